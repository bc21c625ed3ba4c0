use super::{
    mode_energies, sample_initial, sde_step, total_energy, total_momentum, ChainModel, Coupling,
    Profile, WignerEstimate,
};
use crate::error::{Error, Result};
use crate::kernel1d::ControlParams1D;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Inputs of an ensemble run. Times are macroscopic: the chain is
/// integrated up to microscopic time `horizon / epsilon`.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub ring: usize,
    pub controls: ControlParams1D,
    pub coupling: Coupling,
    pub epsilon: f64,
    pub horizon: f64,
    /// Extra macro times to record besides 0 and `horizon`.
    pub snapshot_times: Vec<f64>,
    pub ensemble: usize,
    /// Microscopic step; `None` uses [`ChainModel::default_dt`].
    pub dt: Option<f64>,
    pub seed: u64,
    pub profile: Profile,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub spectrum: WignerEstimate,
    /// Ensemble means.
    pub total_energy: f64,
    pub total_momentum: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub snapshots: Vec<Snapshot>,
    pub dt: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidInput(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if !(self.horizon >= 0.0) || !self.horizon.is_finite() {
            return Err(Error::InvalidInput(format!("T must be >= 0, got {}", self.horizon)));
        }
        if self.ensemble == 0 {
            return Err(Error::InvalidInput("ensemble must be at least 1".into()));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::InvalidInput(format!("dt must be > 0, got {dt}")));
            }
        }
        for &t in &self.snapshot_times {
            if !(0.0..=self.horizon).contains(&t) {
                return Err(Error::InvalidInput(format!(
                    "snapshot time {t} outside [0, {}]",
                    self.horizon
                )));
            }
        }
        self.profile.validate()
    }

    /// Sorted, deduplicated record times including 0 and the horizon.
    pub fn record_times(&self) -> Vec<f64> {
        let mut times = self.snapshot_times.clone();
        times.push(0.0);
        times.push(self.horizon);
        times.sort_by(f64::total_cmp);
        times.dedup();
        times
    }
}

struct Trace {
    modes: Vec<Vec<f64>>,
    energy: Vec<f64>,
    momentum: Vec<f64>,
}

fn run_trajectory(
    cfg: &ExperimentConfig,
    model: &ChainModel,
    times: &[f64],
    dt: f64,
    index: u64,
) -> Result<Trace> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    let profile = |k: f64| cfg.profile.eval(k);
    let mut state = sample_initial(&profile, cfg.epsilon, cfg.ring, &cfg.coupling, &mut rng)?;
    let mut trace = Trace {
        modes: Vec::with_capacity(times.len()),
        energy: Vec::with_capacity(times.len()),
        momentum: Vec::with_capacity(times.len()),
    };
    let mut prev = 0.0;
    for &t in times {
        let span = (t - prev) / cfg.epsilon;
        if span > 0.0 {
            let steps = (span / dt).ceil() as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                sde_step(&mut state, model, h, &mut rng);
            }
        }
        prev = t;
        trace.modes.push(mode_energies(&state, &cfg.coupling, cfg.epsilon));
        trace.energy.push(total_energy(&state, &cfg.coupling));
        trace.momentum.push(total_momentum(&state));
    }
    Ok(trace)
}

/// Runs the ensemble. Trajectory i draws from ChaCha stream i of the master
/// seed and results are reduced in index order, so the output does not
/// depend on thread scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let model = ChainModel::new(cfg.controls.clone(), cfg.coupling.clone(), cfg.epsilon)?;
    model.check_ring(cfg.ring)?;
    let dt = cfg.dt.unwrap_or_else(|| model.default_dt(cfg.ring));
    let times = cfg.record_times();

    let traces: Vec<Trace> = (0..cfg.ensemble as u64)
        .into_par_iter()
        .map(|i| run_trajectory(cfg, &model, &times, dt, i))
        .collect::<Result<_>>()?;

    let count = cfg.ensemble as f64;
    let snapshots = times
        .iter()
        .enumerate()
        .map(|(s, &time)| {
            let mut sums = vec![0.0; cfg.ring];
            let (mut energy, mut momentum) = (0.0, 0.0);
            for tr in &traces {
                for (acc, v) in sums.iter_mut().zip(&tr.modes[s]) {
                    *acc += v;
                }
                energy += tr.energy[s];
                momentum += tr.momentum[s];
            }
            sums.iter_mut().for_each(|v| *v /= count);
            Snapshot {
                time,
                spectrum: WignerEstimate::from_modes(&sums, cfg.coupling.is_pinned()),
                total_energy: energy / count,
                total_momentum: momentum / count,
            }
        })
        .collect();
    Ok(ExperimentOutput { snapshots, dt })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ExperimentConfig {
        ExperimentConfig {
            ring: 33,
            controls: ControlParams1D::new(3, vec![0.0, 1.0, 2.0]).unwrap(),
            coupling: Coupling::nearest_neighbor(1.0, 1.0).unwrap(),
            epsilon: 0.5,
            horizon: 0.2,
            snapshot_times: vec![0.1],
            ensemble: 4,
            dt: Some(0.02),
            seed: 11,
            profile: Profile::Constant(1.0),
        }
    }

    #[test]
    fn zero_horizon_gives_initial_only() {
        let mut cfg = config();
        cfg.horizon = 0.0;
        cfg.snapshot_times.clear();
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.snapshots.len(), 1);
        assert_eq!(out.snapshots[0].time, 0.0);
        // constant profile: every mode starts at exactly 1
        assert!(out.snapshots[0].spectrum.values.iter().all(|v| (v - 1.0).abs() < 1e-10));
    }

    #[test]
    fn same_seed_same_output() {
        let cfg = config();
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a, b);
        let mut other = cfg.clone();
        other.seed = 12;
        assert_ne!(run_experiment(&other).unwrap(), a);
    }

    #[test]
    fn rejects_bad_config() {
        let mut cfg = config();
        cfg.epsilon = 0.0;
        assert!(run_experiment(&cfg).is_err());
        let mut cfg = config();
        cfg.snapshot_times = vec![1.0];
        assert!(run_experiment(&cfg).is_err());
        let mut cfg = config();
        cfg.ring = 20;
        assert!(run_experiment(&cfg).is_err());
    }
}
