//! Controlled stochastic harmonic chain on a periodic ring.

mod experiment;
mod sde;
mod spectrum;

pub use experiment::{run_experiment, ExperimentConfig, ExperimentOutput, Snapshot};
pub use sde::{
    apply_vector_field, sde_step, total_energy, total_momentum, ChainModel, ChainState,
};
pub use spectrum::{
    energy_spectrum, mode_energies, profile_warning, ring_mode, sample_initial, Profile,
    WignerEstimate,
};

use crate::error::{Error, Result};
use crate::kernel1d::TorusGrid;
use std::f64::consts::PI;

/// Even, finitely supported coupling σ_n, stored as σ_0..σ_R.
#[derive(Clone, Debug, PartialEq)]
pub struct Coupling {
    taps: Vec<f64>,
    pinned: bool,
}

const CHECK_GRID: usize = 1024;

impl Coupling {
    /// Nearest-neighbour coupling with ω(k)² = ω0² + A(1 - cos 2πk).
    pub fn nearest_neighbor(omega0: f64, a: f64) -> Result<Self> {
        if !(a > 0.0) || !(omega0 >= 0.0) || !omega0.is_finite() || !a.is_finite() {
            return Err(Error::InvalidInput(format!(
                "nearest-neighbour coupling needs omega0 >= 0 and A > 0, got omega0 = {omega0}, A = {a}"
            )));
        }
        Self::from_taps(vec![omega0 * omega0 + a, -a / 2.0])
    }

    /// Build from σ_0..σ_R; σ_{-n} = σ_n is implied.
    pub fn from_taps(taps: Vec<f64>) -> Result<Self> {
        if taps.len() < 2 || taps.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "coupling needs finite taps sigma_0..sigma_R with R >= 1".into(),
            ));
        }
        if taps[1..].iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidInput(
                "coupling must have some sigma_n != 0 with n != 0".into(),
            ));
        }
        let mut c = Self {
            taps,
            pinned: true,
        };
        let scale = c.taps.iter().map(|v| v.abs()).sum::<f64>();
        let at_zero = c.sigma_hat(0.0);
        if at_zero.abs() <= 1e-12 * scale {
            c.pinned = false;
            if !(c.sigma_hat_second_at_zero() > 0.0) {
                return Err(Error::InvalidInput(
                    "unpinned coupling must have positive curvature of sigma_hat at k = 0".into(),
                ));
            }
        } else if at_zero < 0.0 {
            return Err(Error::InvalidInput("sigma_hat(0) is negative".into()));
        }
        let grid = TorusGrid::new(CHECK_GRID)?;
        if let Some(&k) = grid.nodes().iter().find(|&&k| !(c.sigma_hat(k) > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "sigma_hat is not positive at k = {k}"
            )));
        }
        Ok(c)
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn radius(&self) -> usize {
        self.taps.len() - 1
    }

    pub fn is_pinned(&self) -> bool {
        self.pinned
    }

    pub fn sigma(&self, n: i64) -> f64 {
        self.taps.get(n.unsigned_abs() as usize).copied().unwrap_or(0.0)
    }

    /// σ̂(k) = Σ_n σ_n e^{-2πikn}.
    pub fn sigma_hat(&self, k: f64) -> f64 {
        self.taps
            .iter()
            .enumerate()
            .map(|(n, &s)| {
                if n == 0 {
                    s
                } else {
                    2.0 * s * (2.0 * PI * k * n as f64).cos()
                }
            })
            .sum()
    }

    fn sigma_hat_prime(&self, k: f64) -> f64 {
        self.taps
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, &s)| -4.0 * PI * n as f64 * s * (2.0 * PI * k * n as f64).sin())
            .sum()
    }

    fn sigma_hat_second_at_zero(&self) -> f64 {
        self.taps
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, &s)| -2.0 * (2.0 * PI * n as f64).powi(2) * s)
            .sum()
    }

    pub fn omega(&self, k: f64) -> f64 {
        self.sigma_hat(k).max(0.0).sqrt()
    }

    /// ω'(k) by exact differentiation of the cosine sum. Undefined at k = 0
    /// for unpinned couplings.
    pub fn omega_prime(&self, k: f64) -> f64 {
        self.sigma_hat_prime(k) / (2.0 * self.omega(k))
    }

    /// (σ ⋆ β)_n on a ring.
    pub fn convolve(&self, beta: &[f64], out: &mut [f64]) {
        let l = beta.len();
        for (i, o) in out.iter_mut().enumerate() {
            let mut s = self.taps[0] * beta[i];
            for (n, &t) in self.taps.iter().enumerate().skip(1) {
                if t != 0.0 {
                    s += t * (beta[(i + n) % l] + beta[(i + l - n % l) % l]);
                }
            }
            *o = s;
        }
    }

    /// ω and ω' sampled on a grid.
    pub fn dispersion(&self, grid: &TorusGrid) -> Dispersion {
        Dispersion {
            nodes: grid.nodes().to_vec(),
            omega: grid.nodes().iter().map(|&k| self.omega(k)).collect(),
            omega_prime: grid.nodes().iter().map(|&k| self.omega_prime(k)).collect(),
        }
    }
}

/// Dispersion relation sampled on grid nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Dispersion {
    pub nodes: Vec<f64>,
    pub omega: Vec<f64>,
    pub omega_prime: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_neighbor_dispersion() {
        let c = Coupling::nearest_neighbor(1.0, 1.0).unwrap();
        assert!(c.is_pinned());
        for k in [-0.4, -0.1, 0.0, 0.3, 0.5] {
            let expected = 1.0 + (1.0 - (2.0 * PI * k).cos());
            assert!((c.omega(k).powi(2) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn unpinned_detected() {
        let c = Coupling::nearest_neighbor(0.0, 2.0).unwrap();
        assert!(!c.is_pinned());
        for k in [0.1, 0.25, 0.5] {
            let expected = 2.0 * (1.0 - (2.0 * PI * k).cos());
            assert!((c.omega(k).powi(2) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn omega_prime_matches_finite_difference() {
        let c = Coupling::from_taps(vec![3.0, -1.0, 0.2]).unwrap();
        let h = 1e-6;
        for k in [-0.33, 0.07, 0.41] {
            let fd = (c.omega(k + h) - c.omega(k - h)) / (2.0 * h);
            assert!((fd - c.omega_prime(k)).abs() < 1e-6);
        }
    }

    #[test]
    fn invalid_couplings_rejected() {
        assert!(Coupling::from_taps(vec![1.0, 0.0]).is_err());
        assert!(Coupling::from_taps(vec![-1.0, 0.1]).is_err());
        assert!(Coupling::from_taps(vec![0.5, 0.5]).is_err());
        assert!(Coupling::nearest_neighbor(1.0, 0.0).is_err());
    }

    #[test]
    fn convolution_matches_fourier_symbol() {
        let c = Coupling::nearest_neighbor(0.5, 1.5).unwrap();
        let l = 32;
        let j = 5;
        let beta: Vec<f64> = (0..l)
            .map(|n| (2.0 * PI * (j * n) as f64 / l as f64).cos())
            .collect();
        let mut out = vec![0.0; l];
        c.convolve(&beta, &mut out);
        let symbol = c.sigma_hat(j as f64 / l as f64);
        for n in 0..l {
            assert!((out[n] - symbol * beta[n]).abs() < 1e-12);
        }
    }
}
