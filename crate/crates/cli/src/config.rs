//! Run configuration: TOML or JSON files, `--set key=value` overrides,
//! defaults and per-subcommand validation.

use crate::CliError;
use lattice_kernel::chain_sim::{Coupling, Profile};
use lattice_kernel::kernel1d::{min_ring_size, validate_controls, ControlParams1D};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<f64>>,
    /// 1D: JSON `{N, m}`. d-dimensional: see [`crate::controls`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controls_file: Option<PathBuf>,
    /// Free coefficients for `synthesize`.
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<f64>>,
    /// Lattice dimension for `paths`, `kernel` and `oracle`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Torus side used by the d-dimensional oracle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torus: Option<usize>,
    /// Grid size for `synthesize` verification and `validate`.
    #[serde(rename = "G", default, skip_serializing_if = "Option::is_none")]
    pub g: Option<usize>,

    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileConfig>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kinetic: Option<KineticConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareConfig>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega0: Option<f64>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taps: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileConfig {
    Constant {
        value: f64,
    },
    Gaussian {
        center: f64,
        width: f64,
        height: f64,
        #[serde(default)]
        floor: f64,
    },
    SinSquared {
        height: f64,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KineticConfig {
    #[serde(rename = "G", default, skip_serializing_if = "Option::is_none")]
    pub g: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Output times; defaults to `snapshot_times` plus 0 and T.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transport: Option<TransportConfig>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportConfig {
    pub length: f64,
    pub cells: usize,
    /// μ0(x, k) = ν0(k) · (1 + amplitude · cos(2πx / length)).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    /// "cubic" (default) or "linear".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interpolation: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub simulation: PathBuf,
    pub kinetic: PathBuf,
}

pub const DEFAULT_SEED: u64 = 0;

impl Config {
    /// Parses a file; the format follows the extension (`.json`, otherwise
    /// TOML).
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)?
        } else {
            Self::from_toml(&text)?
        };
        // relative paths inside a config are relative to the config file
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.rebase(base);
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.controls_file.as_mut() {
            fix(p);
        }
        if let Some(c) = self.compare.as_mut() {
            fix(&mut c.simulation);
            fix(&mut c.kinetic);
        }
    }

    /// Applies `key=value` overrides. Keys may be dotted (`coupling.A`);
    /// values are TOML literals, with bare words taken as strings.
    pub fn apply_overrides(&self, sets: &[String]) -> Result<Self, CliError> {
        if sets.is_empty() {
            return Ok(self.clone());
        }
        let mut root = serde_json::to_value(self).map_err(|e| CliError::Config(e.to_string()))?;
        for s in sets {
            let (key, raw) = s
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--set expects key=value, got `{s}`")))?;
            let key = key.trim();
            let value = parse_literal(raw.trim());
            let mut slot = &mut root;
            let parts: Vec<&str> = key.split('.').collect();
            for (i, part) in parts.iter().enumerate() {
                let map = slot
                    .as_object_mut()
                    .ok_or_else(|| CliError::Config(format!("`{key}`: `{part}` is not a table")))?;
                if i + 1 == parts.len() {
                    map.insert(part.to_string(), value.clone());
                    break;
                }
                slot = map
                    .entry(part.to_string())
                    .or_insert_with(|| serde_json::Value::Object(Default::default()));
            }
        }
        serde_json::from_value(root).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn require_n(&self) -> Result<usize, CliError> {
        match self.n {
            Some(0) => Err(CliError::Config("`N` must be positive".into())),
            Some(n) => Ok(n),
            None => Err(CliError::Config("missing key `N`".into())),
        }
    }

    /// 1D controls from `m` or from a `{N, m}` controls file.
    pub fn controls_1d(&self) -> Result<ControlParams1D, CliError> {
        let (n, m) = match (&self.m, &self.controls_file) {
            (Some(m), _) => (self.require_n()?, m.clone()),
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Config(format!("`controls_file`: cannot read {}: {e}", path.display()))
                })?;
                let file: Controls1DFile = serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("`controls_file`: {e}")))?;
                if let Some(n) = self.n {
                    if n != file.n {
                        return Err(CliError::Config(format!(
                            "`N` = {n} but `controls_file` has N = {}",
                            file.n
                        )));
                    }
                }
                (file.n, file.m)
            }
            (None, None) => return Err(CliError::Config("missing key `m` (or `controls_file`)".into())),
        };
        let p = ControlParams1D::new(n, m).map_err(|e| CliError::Config(format!("`m`: {e}")))?;
        let report = validate_controls(&p);
        if !report.passed() {
            return Err(CliError::Validation(format!("`m`: {report}")));
        }
        Ok(p)
    }

    pub fn ring(&self, n: usize) -> Result<usize, CliError> {
        let l = self.l.unwrap_or_else(|| min_ring_size(n).max(256));
        if l < min_ring_size(n) {
            return Err(CliError::Config(format!(
                "`L` = {l} is too small for N = {n} (need at least {})",
                min_ring_size(n)
            )));
        }
        Ok(l)
    }

    pub fn coupling(&self) -> Result<Coupling, CliError> {
        let c = self.coupling.clone().unwrap_or_default();
        let built = match (&c.taps, c.omega0, c.a) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(CliError::Config(
                    "`coupling`: give either `taps` or `omega0`/`A`, not both".into(),
                ))
            }
            (Some(taps), None, None) => Coupling::from_taps(taps.clone()),
            (None, w, a) => Coupling::nearest_neighbor(w.unwrap_or(1.0), a.unwrap_or(1.0)),
        };
        built.map_err(|e| CliError::Config(format!("`coupling`: {e}")))
    }

    pub fn profile(&self) -> Result<Profile, CliError> {
        let p = match self.profile.clone().unwrap_or(ProfileConfig::Gaussian {
            center: 0.25,
            width: 0.05,
            height: 1.0,
            floor: 0.1,
        }) {
            ProfileConfig::Constant { value } => Profile::Constant(value),
            ProfileConfig::Gaussian {
                center,
                width,
                height,
                floor,
            } => Profile::Gaussian {
                center,
                width,
                height,
                floor,
            },
            ProfileConfig::SinSquared { height } => Profile::SinSquared { height },
        };
        p.validate().map_err(|e| CliError::Config(format!("`profile`: {e}")))?;
        Ok(p)
    }

    pub fn epsilon(&self) -> Result<f64, CliError> {
        let e = self.epsilon.unwrap_or(0.1);
        if !(e > 0.0) || !e.is_finite() {
            return Err(CliError::Config(format!("`epsilon` must be > 0, got {e}")));
        }
        Ok(e)
    }

    pub fn horizon(&self) -> Result<f64, CliError> {
        let t = self.t.unwrap_or(1.0);
        if !(t >= 0.0) || !t.is_finite() {
            return Err(CliError::Config(format!("`T` must be >= 0, got {t}")));
        }
        Ok(t)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Controls1DFile {
    #[serde(rename = "N")]
    n: usize,
    m: Vec<f64>,
}

fn parse_literal(raw: &str) -> serde_json::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t
            .remove("v")
            .and_then(|v| serde_json::to_value(v).ok())
            .unwrap_or(serde_json::Value::Null),
        Err(_) => serde_json::Value::String(raw.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_json_config() {
        let cfg = Config::from_json(r#"{"N": 3, "m": [0, 1, 2]}"#).unwrap();
        let p = cfg.controls_1d().unwrap();
        assert_eq!(p.values(), &[0.0, 1.0, 2.0]);
        assert_eq!(cfg.ring(3).unwrap(), 256);
        assert!(cfg.coupling().unwrap().is_pinned());
    }

    #[test]
    fn small_ring_rejected() {
        let cfg = Config::from_json(r#"{"N": 3, "m": [0, 1, 2], "L": 10}"#).unwrap();
        let err = cfg.ring(3).unwrap_err().to_string();
        assert!(err.contains("`L`"), "{err}");
    }

    #[test]
    fn duplicate_key_named() {
        let err = Config::from_json(r#"{"N": 3, "N": 4}"#).unwrap_err().to_string();
        assert!(err.contains("`N`"), "{err}");
        let err = Config::from_toml("N = 3\nN = 4\n").unwrap_err().to_string();
        assert!(err.contains("N"), "{err}");
    }

    #[test]
    fn unknown_key_named() {
        let err = Config::from_toml("N = 3\nbogus = 1\n").unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
    }

    #[test]
    fn overrides_reach_nested_keys() {
        let cfg = Config::from_toml("N = 3\nm = [0, 1, 2]\n").unwrap();
        let cfg = cfg
            .apply_overrides(&["coupling.A=2.5".into(), "epsilon=0.05".into(), "m=[0,2,2]".into()])
            .unwrap();
        assert_eq!(cfg.coupling.as_ref().unwrap().a, Some(2.5));
        assert_eq!(cfg.epsilon, Some(0.05));
        assert_eq!(cfg.m, Some(vec![0.0, 2.0, 2.0]));
    }

    #[test]
    fn constraint_violation_is_validation_error() {
        let cfg = Config::from_json(r#"{"N": 3, "m": [1, 1, 2]}"#).unwrap();
        assert!(matches!(cfg.controls_1d(), Err(CliError::Validation(_))));
    }
}
