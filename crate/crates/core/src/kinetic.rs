//! Solvers for the limiting kinetic equations on the torus.
//!
//! The homogeneous solver integrates dν/dt = 2∫K̂(k,k')(ν(k') − ν(k))dk'
//! with RK4 on a midpoint grid. The transport solver adds free streaming at
//! speed ω'(k)/2π along x and splits the two parts (Strang).

use crate::chain_sim::{Coupling, WignerEstimate};
use crate::error::{Error, Result};
use crate::kernel1d::{kernel_matrix, KernelCoeffs1D, TorusGrid};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Density ν(k_j) on the nodes of a torus grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDensity {
    pub grid: TorusGrid,
    pub values: Vec<f64>,
    pub time: f64,
}

impl SpectralDensity {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.size() {
            return Err(Error::Mismatch(format!(
                "{} values for a grid of size {}",
                values.len(),
                grid.size()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput(format!("density value {v} is not a nonnegative number")));
        }
        Ok(Self {
            grid,
            values,
            time: 0.0,
        })
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&k| f(k)).collect();
        Self::new(grid, values)
    }

    /// ∫ν dk by the midpoint rule.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.weight()
    }
}

/// The discretised collision operator: quadrature-weighted kernel matrix
/// plus its row sums.
#[derive(Clone, Debug)]
pub struct CollisionOperator {
    size: usize,
    matrix: Vec<f64>,
    row_sums: Vec<f64>,
}

impl CollisionOperator {
    /// Fails if the grid is too coarse to resolve the kernel's cosine modes
    /// (G < 8N).
    pub fn new(c: &KernelCoeffs1D, grid: &TorusGrid) -> Result<Self> {
        let g = grid.size();
        if g < 8 * c.n() {
            return Err(Error::InvalidInput(format!(
                "grid size {g} does not resolve kernel modes up to {} (need G >= {})",
                c.radius(),
                8 * c.n()
            )));
        }
        let w = grid.weight();
        let mut matrix = kernel_matrix(c, grid);
        matrix.iter_mut().for_each(|v| *v *= w);
        let row_sums = matrix.chunks(g).map(|r| r.iter().sum()).collect();
        Ok(Self {
            size: g,
            matrix,
            row_sums,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// 2∫K̂(k,k')(s(k') − s(k))dk' at every node.
    pub fn apply(&self, s: &[f64]) -> Result<Vec<f64>> {
        if s.len() != self.size {
            return Err(Error::Mismatch(format!(
                "vector of length {} for a grid of size {}",
                s.len(),
                self.size
            )));
        }
        let mut out = vec![0.0; self.size];
        self.apply_into(s, &mut out);
        Ok(out)
    }

    fn apply_into(&self, s: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.matrix[i * self.size..(i + 1) * self.size];
            let ks: f64 = row.iter().zip(s).map(|(a, b)| a * b).sum();
            *o = 2.0 * (ks - s[i] * self.row_sums[i]);
        }
    }

    /// 1 / (4 max_k ∫|K̂(k,k')|dk'). Steps below this keep ν nonnegative.
    pub fn positivity_dt_bound(&self) -> f64 {
        let max = self
            .matrix
            .chunks(self.size)
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        if max == 0.0 {
            f64::INFINITY
        } else {
            1.0 / (4.0 * max)
        }
    }

    /// One classical RK4 step of length h, in place.
    fn rk4_step(&self, v: &mut [f64], h: f64) {
        let g = self.size;
        let mut k1 = vec![0.0; g];
        let mut k2 = vec![0.0; g];
        let mut k3 = vec![0.0; g];
        let mut k4 = vec![0.0; g];
        let mut tmp = vec![0.0; g];
        self.apply_into(v, &mut k1);
        for i in 0..g {
            tmp[i] = v[i] + 0.5 * h * k1[i];
        }
        self.apply_into(&tmp, &mut k2);
        for i in 0..g {
            tmp[i] = v[i] + 0.5 * h * k2[i];
        }
        self.apply_into(&tmp, &mut k3);
        for i in 0..g {
            tmp[i] = v[i] + h * k3[i];
        }
        self.apply_into(&tmp, &mut k4);
        for i in 0..g {
            v[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }

    /// Integrate over `span` with steps no longer than `dt`.
    fn integrate(&self, v: &mut [f64], span: f64, dt: f64) {
        if span <= 0.0 {
            return;
        }
        let steps = (span / dt).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        for _ in 0..steps {
            self.rk4_step(v, h);
        }
    }
}

fn check_step(dt: f64, horizon: f64) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidInput(format!("dt must be > 0, got {dt}")));
    }
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidInput(format!("T must be >= 0, got {horizon}")));
    }
    Ok(())
}

/// ν(T) from ν0 by RK4 with step at most `dt` (shortened so that it
/// divides T).
pub fn evolve_homogeneous(
    nu0: &SpectralDensity,
    c: &KernelCoeffs1D,
    horizon: f64,
    dt: f64,
) -> Result<SpectralDensity> {
    Ok(evolve_homogeneous_series(nu0, c, &[horizon], dt)?.remove(0))
}

/// ν at each of the (nondecreasing) `times`, all measured from ν0.
pub fn evolve_homogeneous_series(
    nu0: &SpectralDensity,
    c: &KernelCoeffs1D,
    times: &[f64],
    dt: f64,
) -> Result<Vec<SpectralDensity>> {
    let op = CollisionOperator::new(c, &nu0.grid)?;
    let mut v = nu0.values.clone();
    let mut now = nu0.time;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        check_step(dt, t)?;
        let target = nu0.time + t;
        if target < now {
            return Err(Error::InvalidInput("output times must be nondecreasing".into()));
        }
        op.integrate(&mut v, target - now, dt);
        now = target;
        out.push(SpectralDensity {
            grid: nu0.grid.clone(),
            values: v.clone(),
            time: now,
        });
    }
    Ok(out)
}

/// Density μ(x_i, k_j) on a periodic interval [0, X) times the torus.
/// Values are stored x-major: `values[i * G + j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpaceDensity {
    pub length: f64,
    pub cells: usize,
    pub grid: TorusGrid,
    pub values: Vec<f64>,
    pub time: f64,
}

impl PhaseSpaceDensity {
    pub fn from_fn(
        length: f64,
        cells: usize,
        grid: TorusGrid,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        if !(length > 0.0) || cells == 0 {
            return Err(Error::InvalidInput(format!(
                "x-domain needs positive length and cell count, got {length} and {cells}"
            )));
        }
        let dx = length / cells as f64;
        let mut values = Vec::with_capacity(cells * grid.size());
        for i in 0..cells {
            let x = i as f64 * dx;
            for &k in grid.nodes() {
                let v = f(x, k);
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::InvalidInput(format!("μ({x}, {k}) = {v} is not a nonnegative number")));
                }
                values.push(v);
            }
        }
        Ok(Self {
            length,
            cells,
            grid,
            values,
            time: 0.0,
        })
    }

    pub fn dx(&self) -> f64 {
        self.length / self.cells as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.size() + j]
    }

    pub fn fiber(&self, j: usize) -> Vec<f64> {
        (0..self.cells).map(|i| self.get(i, j)).collect()
    }

    /// ∫∫μ dx dk.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dx() * self.grid.weight()
    }
}

/// Interpolation used by the semi-Lagrangian advection step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Interpolation {
    Linear,
    /// Four-point Lagrange; falls back to linear where the cubic value
    /// would be negative.
    #[default]
    Cubic,
}

/// Periodic shift of one fiber: out[i] = f(x_i − shift·dx).
fn shift_fiber(f: &[f64], shift: f64, interp: Interpolation, out: &mut [f64]) {
    let n = f.len() as i64;
    let at = |i: i64| f[i.rem_euclid(n) as usize];
    let base = shift.floor();
    let t = shift - base;
    let base = base as i64;
    for (i, o) in out.iter_mut().enumerate() {
        // x_i − shift lies between cells i0 and i0 + 1 at fraction s = 1 − t
        let i0 = i as i64 - base - 1;
        let s = 1.0 - t;
        let (p0, p1) = (at(i0), at(i0 + 1));
        let linear = p0 * (1.0 - s) + p1 * s;
        *o = match interp {
            Interpolation::Linear => linear,
            Interpolation::Cubic => {
                let (pm, p2) = (at(i0 - 1), at(i0 + 2));
                let cubic = -s * (s - 1.0) * (s - 2.0) / 6.0 * pm
                    + (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0 * p0
                    - (s + 1.0) * s * (s - 2.0) / 2.0 * p1
                    + (s + 1.0) * s * (s - 1.0) / 6.0 * p2;
                if cubic < 0.0 {
                    linear
                } else {
                    cubic
                }
            }
        };
    }
}

fn advect(mu: &mut PhaseSpaceDensity, speeds: &[f64], h: f64, interp: Interpolation) {
    let g = mu.grid.size();
    let nx = mu.cells;
    let dx = mu.dx();
    let fibers: Vec<Vec<f64>> = (0..g)
        .into_par_iter()
        .map(|j| {
            let f = mu.fiber(j);
            let mut out = vec![0.0; nx];
            shift_fiber(&f, speeds[j] * h / dx, interp, &mut out);
            out
        })
        .collect();
    for (j, f) in fibers.iter().enumerate() {
        for (i, &v) in f.iter().enumerate() {
            mu.values[i * g + j] = v;
        }
    }
}

/// μ(T) by Strang splitting: half advection, collision, half advection.
pub fn evolve_transport(
    mu0: &PhaseSpaceDensity,
    c: &KernelCoeffs1D,
    coupling: &Coupling,
    horizon: f64,
    dt: f64,
    interp: Interpolation,
) -> Result<PhaseSpaceDensity> {
    check_step(dt, horizon)?;
    let disp = coupling.dispersion(&mu0.grid);
    let speeds: Vec<f64> = disp.omega_prime.iter().map(|w| w / (2.0 * PI)).collect();
    if let Some(v) = speeds.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("group velocity {v} is not finite on the grid")));
    }
    let vmax = speeds.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let op = CollisionOperator::new(c, &mu0.grid)?;
    let steps = if horizon > 0.0 {
        (horizon / dt).ceil().max(1.0) as usize
    } else {
        0
    };
    let h = if steps > 0 { horizon / steps as f64 } else { 0.0 };
    if h * vmax > mu0.dx() {
        return Err(Error::Cfl {
            shift: h * vmax,
            dx: mu0.dx(),
        });
    }
    let g = mu0.grid.size();
    let mut mu = mu0.clone();
    for _ in 0..steps {
        advect(&mut mu, &speeds, 0.5 * h, interp);
        mu.values
            .par_chunks_mut(g)
            .for_each(|cell| op.integrate(cell, h, h));
        advect(&mut mu, &speeds, 0.5 * h, interp);
    }
    mu.time = mu0.time + h * steps as f64;
    Ok(mu)
}

/// Normalised L¹ distance ‖mc(t) − ν(t)‖₁ / ‖ν(t)‖₁ per time stamp. The
/// Monte-Carlo spectra are interpolated onto the kinetic grid.
pub fn compare_spectra(
    mc: &[(f64, WignerEstimate)],
    kin: &[SpectralDensity],
) -> Result<Vec<(f64, f64)>> {
    if mc.len() != kin.len() {
        return Err(Error::Mismatch(format!(
            "{} Monte-Carlo snapshots vs {} kinetic snapshots",
            mc.len(),
            kin.len()
        )));
    }
    mc.iter()
        .zip(kin)
        .map(|((t, est), nu)| {
            if (t - nu.time).abs() > 1e-9 {
                return Err(Error::Mismatch(format!(
                    "time stamps differ: {t} vs {}",
                    nu.time
                )));
            }
            if est.ks.is_empty() {
                return Err(Error::Mismatch(format!("empty spectrum at time {t}")));
            }
            let mut num = 0.0;
            let mut den = 0.0;
            for (&k, &v) in nu.grid.nodes().iter().zip(&nu.values) {
                num += (est.interpolate(k) - v).abs();
                den += v.abs();
            }
            Ok((*t, if den > 0.0 { num / den } else { num }))
        })
        .collect()
}
