use super::{ChainState, Coupling};
use crate::error::{Error, Result};
use rand::Rng;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Wavenumber of ring mode j, mapped into [-1/2, 1/2).
pub fn ring_mode(j: usize, ring: usize) -> f64 {
    let k = j as f64 / ring as f64;
    if k >= 0.5 {
        k - 1.0
    } else {
        k
    }
}

/// Initial spectral profile ν0(k).
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Constant(f64),
    /// floor + height · (g(k - c) + g(k + c)), g a periodised Gaussian of
    /// standard deviation `width`.
    Gaussian {
        center: f64,
        width: f64,
        height: f64,
        floor: f64,
    },
    /// height · sin²(πk); vanishes at k = 0.
    SinSquared { height: f64 },
}

impl Profile {
    pub fn eval(&self, k: f64) -> f64 {
        match *self {
            Profile::Constant(v) => v,
            Profile::Gaussian {
                center,
                width,
                height,
                floor,
            } => {
                let g = |x: f64| {
                    let x = x - x.round();
                    (-x * x / (2.0 * width * width)).exp()
                };
                floor + height * (g(k - center) + g(k + center))
            }
            Profile::SinSquared { height } => height * (PI * k).sin().powi(2),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Profile::Constant(v) => v >= 0.0 && v.is_finite(),
            Profile::Gaussian {
                width,
                height,
                floor,
                center,
            } => width > 0.0 && height >= 0.0 && floor >= 0.0 && center.is_finite(),
            Profile::SinSquared { height } => height >= 0.0 && height.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("profile must be nonnegative: {self:?}")))
        }
    }
}

/// Warning text when an unpinned coupling meets a profile that does not
/// vanish near k = 0.
pub fn profile_warning(profile: &dyn Fn(f64) -> f64, coupling: &Coupling, ring: usize) -> Option<String> {
    if coupling.is_pinned() {
        return None;
    }
    let k1 = 1.0 / ring as f64;
    let peak = (0..ring).map(|j| profile(ring_mode(j, ring))).fold(0.0, f64::max);
    let near = profile(k1).max(profile(0.0));
    if peak > 0.0 && near > 1e-3 * peak {
        Some(format!(
            "unpinned coupling: profile does not vanish near k = 0 (profile(1/L) = {near:.3e}); the k = 0 mode is dropped"
        ))
    } else {
        None
    }
}

/// Draw a ring state whose wave field has |φ̂(k_j)|² = 2 ν0(k_j) / ε and
/// independent uniform phases, so that (ε/2)|φ̂|² starts at ν0.
pub fn sample_initial<R: Rng + ?Sized>(
    profile: &dyn Fn(f64) -> f64,
    epsilon: f64,
    ring: usize,
    coupling: &Coupling,
    rng: &mut R,
) -> Result<ChainState> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput(format!("epsilon must be > 0, got {epsilon}")));
    }
    if let Some(msg) = profile_warning(profile, coupling, ring) {
        log::warn!("{msg}");
    }
    let mut phi = vec![Complex64::new(0.0, 0.0); ring];
    for (j, slot) in phi.iter_mut().enumerate() {
        let k = ring_mode(j, ring);
        let theta = rng.random::<f64>() * 2.0 * PI;
        let v = profile(k);
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::InvalidInput(format!("profile({k}) = {v} is not a nonnegative number")));
        }
        let amp = (2.0 * v / epsilon).sqrt();
        *slot = Complex64::from_polar(amp, theta);
    }
    if !coupling.is_pinned() {
        phi[0] = Complex64::new(0.0, 0.0);
    }

    let s2 = std::f64::consts::SQRT_2;
    let mut beta_hat = vec![Complex64::new(0.0, 0.0); ring];
    let mut alpha_hat = vec![Complex64::new(0.0, 0.0); ring];
    for j in 0..ring {
        let mirror = phi[(ring - j) % ring].conj();
        let w = coupling.omega(ring_mode(j, ring));
        if w > 0.0 {
            beta_hat[j] = (phi[j] + mirror) / (s2 * w);
        }
        alpha_hat[j] = (phi[j] - mirror) / Complex64::new(0.0, s2);
        if w == 0.0 {
            alpha_hat[j] = Complex64::new(0.0, 0.0);
        }
    }
    let mut planner = FftPlanner::new();
    let inv = planner.plan_fft_inverse(ring);
    inv.process(&mut beta_hat);
    inv.process(&mut alpha_hat);
    let scale = 1.0 / ring as f64;
    Ok(ChainState {
        beta: beta_hat.iter().map(|z| z.re * scale).collect(),
        alpha: alpha_hat.iter().map(|z| z.re * scale).collect(),
        time: 0.0,
    })
}

/// (ε/2)|φ̂(k_j)|² for every ring mode j, in mode order.
pub fn mode_energies(state: &ChainState, coupling: &Coupling, epsilon: f64) -> Vec<f64> {
    let l = state.ring();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(l);
    let mut b: Vec<Complex64> = state.beta.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut a: Vec<Complex64> = state.alpha.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fwd.process(&mut b);
    fwd.process(&mut a);
    let i = Complex64::new(0.0, 1.0);
    (0..l)
        .map(|j| {
            let w = coupling.omega(ring_mode(j, l));
            let phi = (b[j] * w + i * a[j]) / std::f64::consts::SQRT_2;
            0.5 * epsilon * phi.norm_sqr()
        })
        .collect()
}

/// Ensemble-averaged energy spectrum on the ring modes, sorted by k.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerEstimate {
    pub ks: Vec<f64>,
    pub values: Vec<f64>,
}

impl WignerEstimate {
    /// Build from per-mode averages in mode order. The k = 0 mode is dropped
    /// for unpinned couplings.
    pub fn from_modes(mode_values: &[f64], pinned: bool) -> Self {
        let l = mode_values.len();
        let mut pairs: Vec<(f64, f64)> = (0..l)
            .filter(|&j| pinned || j != 0)
            .map(|j| (ring_mode(j, l), mode_values[j]))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self {
            ks: pairs.iter().map(|p| p.0).collect(),
            values: pairs.iter().map(|p| p.1).collect(),
        }
    }

    /// ∫ E dk with the ring quadrature weight 1/L.
    pub fn mass(&self, ring: usize) -> f64 {
        self.values.iter().sum::<f64>() / ring as f64
    }

    /// Periodic linear interpolation at k.
    pub fn interpolate(&self, k: f64) -> f64 {
        let n = self.ks.len();
        if n == 0 {
            return 0.0;
        }
        if n == 1 {
            return self.values[0];
        }
        let k = k - k.round();
        let idx = self.ks.partition_point(|&x| x <= k);
        let (lo, hi) = if idx == 0 {
            (n - 1, 0)
        } else if idx == n {
            (n - 1, 0)
        } else {
            (idx - 1, idx)
        };
        let (mut x0, x1) = (self.ks[lo], self.ks[hi]);
        let mut x = k;
        let mut x1 = x1;
        if lo > hi {
            // wrap across ±1/2
            if x < x0 {
                x += 1.0;
            }
            x1 += 1.0;
            if x0 > x1 {
                x0 -= 1.0;
            }
        }
        let t = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
        self.values[lo] * (1.0 - t) + self.values[hi] * t
    }
}

pub fn energy_spectrum(states: &[ChainState], coupling: &Coupling, epsilon: f64) -> Result<WignerEstimate> {
    let first = states
        .first()
        .ok_or_else(|| Error::InvalidInput("empty ensemble".into()))?;
    let l = first.ring();
    let mut sums = vec![0.0; l];
    for s in states {
        if s.ring() != l {
            return Err(Error::Mismatch("ensemble members have different ring sizes".into()));
        }
        for (acc, v) in sums.iter_mut().zip(mode_energies(s, coupling, epsilon)) {
            *acc += v;
        }
    }
    let count = states.len() as f64;
    for v in sums.iter_mut() {
        *v /= count;
    }
    Ok(WignerEstimate::from_modes(&sums, coupling.is_pinned()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pinned() -> Coupling {
        Coupling::nearest_neighbor(1.0, 1.0).unwrap()
    }

    #[test]
    fn sampled_state_reproduces_profile() {
        let c = pinned();
        let profile = Profile::Gaussian {
            center: 0.2,
            width: 0.05,
            height: 1.0,
            floor: 0.1,
        };
        let f = |k: f64| profile.eval(k);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let state = sample_initial(&f, 0.1, 64, &c, &mut rng).unwrap();
        let e = mode_energies(&state, &c, 0.1);
        for j in 0..64 {
            assert!((e[j] - f(ring_mode(j, 64))).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_profile_zero_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = sample_initial(&|_| 0.0, 0.5, 32, &pinned(), &mut rng).unwrap();
        assert!(s.alpha.iter().chain(&s.beta).all(|&v| v == 0.0));
    }

    #[test]
    fn parseval_mass() {
        let c = pinned();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut s = ChainState::zeros(48);
        for i in 0..48 {
            s.alpha[i] = rng.random_range(-1.0..1.0);
            s.beta[i] = rng.random_range(-1.0..1.0);
        }
        let eps = 0.3;
        let est = energy_spectrum(std::slice::from_ref(&s), &c, eps).unwrap();
        // φ_n = ((ω̃⋆β)_n + iα_n)/√2; Σ|φ_n|² = (β·σβ + α·α)/2.
        let mut sb = vec![0.0; 48];
        c.convolve(&s.beta, &mut sb);
        let phi2 = 0.5 * (s.alpha.iter().map(|a| a * a).sum::<f64>()
            + s.beta.iter().zip(&sb).map(|(b, x)| b * x).sum::<f64>());
        assert!((est.mass(48) - 0.5 * eps * phi2).abs() < 1e-10);
    }

    #[test]
    fn spectrum_is_translation_invariant() {
        let c = pinned();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = sample_initial(&|k| 1.0 + k, 0.2, 40, &c, &mut rng).unwrap();
        let mut shifted = s.clone();
        shifted.alpha.rotate_left(7);
        shifted.beta.rotate_left(7);
        let a = mode_energies(&s, &c, 0.2);
        let b = mode_energies(&shifted, &c, 0.2);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn unpinned_drops_zero_mode() {
        let c = Coupling::nearest_neighbor(0.0, 2.0).unwrap();
        let est = WignerEstimate::from_modes(&[1.0; 16], c.is_pinned());
        assert_eq!(est.ks.len(), 15);
        assert!(est.ks.iter().all(|&k| k != 0.0));
    }

    #[test]
    fn interpolation_wraps() {
        let est = WignerEstimate {
            ks: vec![-0.5, -0.25, 0.0, 0.25],
            values: vec![4.0, 1.0, 2.0, 3.0],
        };
        assert!((est.interpolate(0.125) - 2.5).abs() < 1e-12);
        assert!((est.interpolate(0.375) - 3.5).abs() < 1e-12);
        assert!((est.interpolate(-0.375) - 2.5).abs() < 1e-12);
        assert!((est.interpolate(0.5) - 4.0).abs() < 1e-12);
    }
}
