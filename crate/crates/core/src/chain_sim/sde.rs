use super::Coupling;
use crate::error::{Error, Result};
use crate::kernel1d::{
    ensure_valid, kernel_coeffs, min_ring_size, vector_field_entries, ControlParams1D,
    KernelCoeffs1D,
};
use rand::Rng;
use rand_distr::StandardNormal;

/// Displacements β and momenta α on a ring, with the current micro time.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainState {
    pub beta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub time: f64,
}

impl ChainState {
    pub fn zeros(ring: usize) -> Self {
        Self {
            beta: vec![0.0; ring],
            alpha: vec![0.0; ring],
            time: 0.0,
        }
    }

    pub fn ring(&self) -> usize {
        self.alpha.len()
    }
}

/// Everything a step needs besides the state: controls, their coefficients,
/// the coupling and the noise strength ε.
#[derive(Clone, Debug)]
pub struct ChainModel {
    controls: ControlParams1D,
    coeffs: KernelCoeffs1D,
    coupling: Coupling,
    epsilon: f64,
    /// (offset d, M(d)) for the nonzero entries, both signs.
    taps: Vec<(i64, f64)>,
    /// (offset d, K(d, 0)) for |d| ≤ 2N.
    drift: Vec<(i64, f64)>,
}

impl ChainModel {
    pub fn new(controls: ControlParams1D, coupling: Coupling, epsilon: f64) -> Result<Self> {
        ensure_valid(&controls)?;
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidInput(format!("epsilon must be >= 0, got {epsilon}")));
        }
        let coeffs = kernel_coeffs(&controls)?;
        let n = controls.n() as i64;
        let taps = (-n..=n)
            .filter(|&d| d != 0 && controls.m(d) != 0.0)
            .map(|d| (d, controls.m(d)))
            .collect();
        let r = 2 * n;
        let drift = (-r..=r)
            .map(|d| (d, coeffs.get(d, 0)))
            .filter(|&(_, v)| v != 0.0)
            .collect();
        Ok(Self {
            controls,
            coeffs,
            coupling,
            epsilon,
            taps,
            drift,
        })
    }

    pub fn controls(&self) -> &ControlParams1D {
        &self.controls
    }

    pub fn coeffs(&self) -> &KernelCoeffs1D {
        &self.coeffs
    }

    pub fn coupling(&self) -> &Coupling {
        &self.coupling
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn check_ring(&self, ring: usize) -> Result<()> {
        let min = min_ring_size(self.controls.n());
        if ring < min || ring <= 2 * self.coupling.radius() {
            return Err(Error::InvalidInput(format!(
                "ring size {ring} too small (need at least {min})"
            )));
        }
        Ok(())
    }

    /// min(0.05 / max ω, 0.1 / (ε · max|K| · N)) over the ring modes.
    pub fn default_dt(&self, ring: usize) -> f64 {
        let max_omega = (0..ring)
            .map(|j| self.coupling.omega(super::ring_mode(j, ring)))
            .fold(0.0, f64::max);
        let mut dt = 0.05 / max_omega;
        let rate = self.epsilon * self.coeffs.max_abs() * self.controls.n() as f64;
        if rate > 0.0 {
            dt = dt.min(0.1 / rate);
        }
        dt
    }
}

/// Coefficients of λ_site acting on α, as (position, value) pairs: the
/// diffusion column attached to the Wiener process at `site`.
pub fn apply_vector_field(p: &ControlParams1D, alpha: &[f64], site: usize) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = Vec::new();
    for (target, source, c) in vector_field_entries(p.values(), site, alpha.len()) {
        let v = c * alpha[source];
        match out.iter_mut().find(|(t, _)| *t == target) {
            Some(slot) => slot.1 += v,
            None => out.push((target, v)),
        }
    }
    out.sort_by_key(|&(t, _)| t);
    out
}

/// One Euler–Maruyama step of length `dt`.
///
/// Positions are advanced first and the harmonic force uses the updated
/// positions (symplectic Euler for the Hamiltonian part). Drift and noise
/// are evaluated at the old momenta, as Itô requires.
pub fn sde_step<R: Rng + ?Sized>(state: &mut ChainState, model: &ChainModel, dt: f64, rng: &mut R) {
    let l = state.ring();
    let eps = model.epsilon;

    for (b, a) in state.beta.iter_mut().zip(&state.alpha) {
        *b += a * dt;
    }
    let mut inc = vec![0.0; l];
    model.coupling.convolve(&state.beta, &mut inc);
    for v in inc.iter_mut() {
        *v = -*v * dt;
    }

    if eps > 0.0 && !model.taps.is_empty() {
        let alpha = &state.alpha;
        let at = |i: i64| alpha[i.rem_euclid(l as i64) as usize];
        for (i, v) in inc.iter_mut().enumerate() {
            let i = i as i64;
            let s: f64 = model.drift.iter().map(|&(d, k)| k * at(i + d)).sum();
            *v -= 2.0 * eps * s * dt;
        }

        let scale = (2.0 * eps).sqrt() * dt.sqrt();
        let xi: Vec<f64> = (0..l).map(|_| rng.sample::<f64, _>(StandardNormal) * scale).collect();
        for (site, &x) in xi.iter().enumerate() {
            let s = site as i64;
            let a_s = alpha[site];
            let mut centre = 0.0;
            for &(d, md) in &model.taps {
                let a_fwd = at(s + d);
                let t = (s - d).rem_euclid(l as i64) as usize;
                inc[t] += md * (a_s - a_fwd) * x;
                centre += md * a_fwd;
            }
            inc[site] += centre * x;
        }
    }

    for (a, v) in state.alpha.iter_mut().zip(&inc) {
        *a += v;
    }
    state.time += dt;
}

/// H = ½ Σ α² + ½ Σ β (σ ⋆ β).
pub fn total_energy(state: &ChainState, coupling: &Coupling) -> f64 {
    let mut sb = vec![0.0; state.ring()];
    coupling.convolve(&state.beta, &mut sb);
    let kinetic: f64 = state.alpha.iter().map(|a| a * a).sum();
    let potential: f64 = state.beta.iter().zip(&sb).map(|(b, s)| b * s).sum();
    0.5 * (kinetic + potential)
}

pub fn total_momentum(state: &ChainState) -> f64 {
    state.alpha.iter().sum()
}
