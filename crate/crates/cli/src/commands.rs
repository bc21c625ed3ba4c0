//! One function per subcommand. Each writes its artifacts into the output
//! directory and reports what it read and wrote.

use crate::config::{Config, TransportConfig};
use crate::controls::{NdControls, NdControlsFile};
use crate::export::{num, read_numeric_csv, write_csv, write_jsonl, write_text};
use crate::CliError;
use lattice_kernel::achievable::{basis_polys_exact, synthesize_controls, verify_target, LCoeffs};
use lattice_kernel::chain_sim::{
    profile_warning, run_experiment, ExperimentConfig, WignerEstimate,
};
use lattice_kernel::kernel1d::{
    kernel_coeffs, kernel_coeffs_oracle, kernel_coeffs_oracle_exact, min_ring_size,
    validate_controls, ControlParams1D, KernelCoeffs1D, TorusGrid,
};
use lattice_kernel::kernel_nd::{
    dual_index_coeffs, min_torus_side, nd_coeffs_oracle_dual, nd_coeffs_oracle_simple,
    simple_index_coeffs, KernelCoeffsND, NdVariant,
};
use lattice_kernel::kinetic::{
    compare_spectra, evolve_homogeneous_series, evolve_transport, Interpolation,
    PhaseSpaceDensity, SpectralDensity,
};
use lattice_kernel::lattice_nd::{ball, count_paths_through, enumerate_paths, l1_norm, PartIndex};
use lattice_kernel::scalar::Exact;
use serde_json::json;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// What a subcommand did.
#[derive(Debug, Default)]
pub struct Report {
    /// File names inside the output directory.
    pub outputs: Vec<String>,
    pub inputs: Vec<PathBuf>,
    /// Set when the run completed but the checked property does not hold.
    pub failure: Option<String>,
    pub summary: Vec<String>,
}

fn rt(e: lattice_kernel::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

fn cfg_err(e: lattice_kernel::Error) -> CliError {
    CliError::Config(e.to_string())
}

fn controls_input(cfg: &Config, report: &mut Report) {
    if let Some(p) = &cfg.controls_file {
        report.inputs.push(p.clone());
    }
}

fn nd_controls(cfg: &Config) -> Result<Option<NdControls>, CliError> {
    if cfg.dim.unwrap_or(1) == 1 {
        return Ok(None);
    }
    let path = cfg
        .controls_file
        .as_ref()
        .ok_or_else(|| CliError::Config("missing key `controls_file` (required when `dim` > 1)".into()))?;
    let file = NdControlsFile::read(path)?;
    if Some(file.dim) != cfg.dim {
        return Err(CliError::Config(format!(
            "`dim` = {:?} but `controls_file` has dim = {}",
            cfg.dim, file.dim
        )));
    }
    if cfg.n.is_some_and(|n| n != file.n) {
        return Err(CliError::Config(format!(
            "`N` = {:?} but `controls_file` has N = {}",
            cfg.n, file.n
        )));
    }
    file.build().map(Some)
}

pub fn validate(cfg: &Config, out: &Path) -> Result<Report, CliError> {
    let mut report = Report::default();
    controls_input(cfg, &mut report);
    if let Some(c) = nd_controls(cfg)? {
        let kind = match c {
            NdControls::Simple(_) => "simple",
            NdControls::Dual(_) => "dual",
        };
        write_text(&out.join("validate.json"), &format!("{}\n", json!({"variant": kind, "passed": true})))?;
        report.outputs.push("validate.json".into());
        report.summary.push(format!("{kind}-index controls: pass"));
        return Ok(report);
    }
    let n = cfg.require_n()?;
    let m = cfg
        .m
        .clone()
        .ok_or_else(|| CliError::Config("missing key `m`".into()))?;
    let p = ControlParams1D::new(n, m).map_err(cfg_err)?;
    let v = validate_controls(&p);
    if cfg.l.is_some() {
        cfg.ring(n)?;
    }
    let body = json!({
        "N": n,
        "m": p.values(),
        "oddness_ok": v.oddness_ok,
        "zero_violations": v.zero_violations,
        "passed": v.passed(),
    });
    write_text(&out.join("validate.json"), &format!("{body}\n"))?;
    report.outputs.push("validate.json".into());
    report.summary.push(v.to_string());
    if !v.passed() {
        report.failure = Some(format!("controls violate the zero condition at d = {:?}", v.zero_violations));
    }
    Ok(report)
}

fn table_rows(c: &KernelCoeffs1D) -> Vec<Vec<String>> {
    let r = c.radius() as i64;
    let mut rows = Vec::new();
    for d in -r..=r {
        for dp in -r..=r {
            rows.push(vec![d.to_string(), dp.to_string(), num(c.get(d, dp))]);
        }
    }
    rows
}

fn nd_lines(tables: &[&KernelCoeffsND]) -> Vec<serde_json::Value> {
    let mut lines = Vec::new();
    for t in tables {
        for (d, dp, v) in t.entries() {
            let fmt = |x: f64| if x == 0.0 { 0.0 } else { x };
            lines.push(match t.variant() {
                NdVariant::Simple => {
                    let dim = t.dim();
                    let matrix: Vec<Vec<f64>> =
                        (0..dim).map(|j| (0..dim).map(|i| fmt(v[j * dim + i])).collect()).collect();
                    json!({"variant": "simple", "D": d, "Dprime": dp, "matrix": matrix})
                }
                NdVariant::Dual { i, j } => {
                    json!({"variant": "dual", "i": i, "j": j, "D": d, "Dprime": dp, "value": fmt(v[0])})
                }
            });
        }
    }
    lines
}

fn write_nd(
    out: &Path,
    stem: &str,
    c: NdControls,
    oracle: Option<usize>,
    report: &mut Report,
) -> Result<(), CliError> {
    let name = format!("{stem}.jsonl");
    let lines = match c {
        NdControls::Simple(c) => {
            let t = match oracle {
                Some(side) => nd_coeffs_oracle_simple(&c, side).map_err(cfg_err)?,
                None => simple_index_coeffs(&c).map_err(rt)?,
            };
            report.summary.push(format!("simple-index table: {} nonzero entries", t.len()));
            nd_lines(&[&t])
        }
        NdControls::Dual(c) => {
            let tables: BTreeMap<_, _> = match oracle {
                Some(side) => nd_coeffs_oracle_dual(&c, side).map_err(cfg_err)?,
                None => dual_index_coeffs(&c).map_err(rt)?,
            };
            report.summary.push(format!("dual-index tables for {} component pairs", tables.len()));
            nd_lines(&tables.values().collect::<Vec<_>>())
        }
    };
    write_jsonl(&out.join(&name), &lines)?;
    report.outputs.push(name);
    Ok(())
}

pub fn kernel(cfg: &Config, out: &Path) -> Result<Report, CliError> {
    let mut report = Report::default();
    controls_input(cfg, &mut report);
    if let Some(c) = nd_controls(cfg)? {
        write_nd(out, "kernel", c, None, &mut report)?;
        return Ok(report);
    }
    let p = cfg.controls_1d()?;
    let c = kernel_coeffs(&p).map_err(rt)?;
    write_csv(&out.join("kernel.csv"), &["d", "dprime", "value"], &table_rows(&c))?;
    report.outputs.push("kernel.csv".into());
    report.summary.push(format!("N = {}: {} coefficients", p.n(), (2 * c.radius() + 1).pow(2)));
    Ok(report)
}

fn as_integers(m: &[f64]) -> Option<Vec<i64>> {
    m.iter()
        .map(|&v| (v.fract() == 0.0 && v.abs() < 1e9).then_some(v as i64))
        .collect()
}

pub fn oracle(cfg: &Config, out: &Path) -> Result<Report, CliError> {
    let mut report = Report::default();
    controls_input(cfg, &mut report);
    if let Some(c) = nd_controls(cfg)? {
        let n = cfg.n.unwrap_or(match &c {
            NdControls::Simple(s) => s.n(),
            NdControls::Dual(d) => d.n(),
        });
        let side = cfg.torus.unwrap_or(min_torus_side(n));
        write_nd(out, "oracle", c, Some(side), &mut report)?;
        return Ok(report);
    }
    let p = cfg.controls_1d()?;
    let n = p.n();
    let ring = match cfg.l {
        Some(_) => cfg.ring(n)?,
        None => min_ring_size(n),
    };
    // integer controls are expanded in exact arithmetic
    let c = match as_integers(p.values()) {
        Some(ints) => {
            let exact: Vec<Exact> = ints.into_iter().map(Exact::from_integer).collect();
            kernel_coeffs_oracle_exact(&exact, ring).map_err(cfg_err)?.to_f64()
        }
        None => kernel_coeffs_oracle(&p, ring).map_err(cfg_err)?,
    };
    write_csv(&out.join("oracle.csv"), &["d", "dprime", "value"], &table_rows(&c))?;
    report.outputs.push("oracle.csv".into());
    report.summary.push(format!("N = {n}: oracle on a ring of {ring} sites"));
    Ok(report)
}

pub fn basis(cfg: &Config, out: &Path) -> Result<Report, CliError> {
    let n = cfg.require_n()?;
    let form = basis_polys_exact(n).map_err(cfg_err)?;
    let mut rows = Vec::new();
    for (&(i, j), poly) in form.polys() {
        for (d1, d2, v) in poly.terms() {
            rows.push(vec![
                i.to_string(),
                j.to_string(),
                d1.to_string(),
                d2.to_string(),
                v.to_string(),
                num(*v.numer() as f64 / *v.denom() as f64),
            ]);
        }
    }
    write_csv(&out.join("basis.csv"), &["i", "j", "d1", "d2", "exact", "value"], &rows)?;
    Ok(Report {
        outputs: vec!["basis.csv".into()],
        summary: vec![format!("N = {n}: {} basis polynomials", form.polys().count())],
        ..Default::default()
    })
}

pub fn synthesize(cfg: &Config, out: &Path) -> Result<Report, CliError> {
    let n = cfg.require_n()?;
    let c = cfg
        .c
        .clone()
        .ok_or_else(|| CliError::Config("missing key `C`".into()))?;
    let p = synthesize_controls(n, &c).map_err(cfg_err)?;
    let target: LCoeffs<f64> = basis_polys_exact(n)
        .map_err(cfg_err)?
        .to_f64()
        .combine(&c)
        .map_err(cfg_err)?;
    let g = cfg.g.unwrap_or(64);
    let grid = TorusGrid::new(g).map_err(cfg_err)?;
    let dev = verify_target(&p, &target, &grid).map_err(rt)?;
    let body = json!({"N": n, "m": p.values()});
    write_text(&out.join("controls.json"), &format!("{body}\n"))?;
    let mut rows = Vec::new();
    for (d1, d2, v) in target.terms() {
        rows.push(vec![d1.to_string(), d2.to_string(), num(v)]);
    }
    write_csv(&out.join("target.csv"), &["d1", "d2", "value"], &rows)?;
    let mut report = Report {
        outputs: vec!["controls.json".into(), "target.csv".into()],
        summary: vec![format!("max deviation on {g}x{g} grid: {dev:e}")],
        ..Default::default()
    };
    if dev > 1e-9 {
        report.failure = Some(format!("kernel deviates from the target by {dev:e}"));
    }
    Ok(report)
}

pub fn paths(cfg: &Config, out: &Path) -> Result<Report, CliError> {
    let n = cfg.require_n()?;
    let dim = cfg.dim.unwrap_or(2);
    let mut rows = Vec::new();
    let mut mismatches = 0;
    for part in PartIndex::all(dim).map_err(cfg_err)? {
        let paths = enumerate_paths(dim, n, part).map_err(cfg_err)?;
        for d in ball(dim, n) {
            let norm = l1_norm(&d);
            if norm == 0 || !part.contains(&d) {
                continue;
            }
            let seen = paths.iter().filter(|p| p.point(norm) == d.as_slice()).count() as u128;
            let formula = count_paths_through(dim, n, part, &d).map_err(rt)?;
            if seen != formula {
                mismatches += 1;
            }
            let label: Vec<String> = d.iter().map(|x| x.to_string()).collect();
            rows.push(vec![
                part.index().to_string(),
                label.join(" "),
                seen.to_string(),
                formula.to_string(),
            ]);
        }
    }
    write_csv(&out.join("paths.csv"), &["part", "D", "enumerated", "formula"], &rows)?;
    let mut report = Report {
        outputs: vec!["paths.csv".into()],
        summary: vec![format!("d = {dim}, N = {n}: {} (part, D) counts", rows.len())],
        ..Default::default()
    };
    if mismatches > 0 {
        report.failure = Some(format!("{mismatches} counts disagree with the closed form"));
    }
    Ok(report)
}

pub fn simulate(cfg: &Config, out: &Path) -> Result<Report, CliError> {
    let mut report = Report::default();
    controls_input(cfg, &mut report);
    let p = cfg.controls_1d()?;
    let ring = cfg.ring(p.n())?;
    let coupling = cfg.coupling()?;
    let profile = cfg.profile()?;
    let horizon = cfg.horizon()?;
    let exp = ExperimentConfig {
        ring,
        controls: p,
        coupling: coupling.clone(),
        epsilon: cfg.epsilon()?,
        horizon,
        snapshot_times: cfg.snapshot_times.clone().unwrap_or_default(),
        ensemble: cfg.ensemble.unwrap_or(100),
        dt: cfg.dt,
        seed: cfg.seed.unwrap_or(crate::config::DEFAULT_SEED),
        profile: profile.clone(),
    };
    exp.validate().map_err(cfg_err)?;
    if let Some(w) = profile_warning(&|k| profile.eval(k), &coupling, ring) {
        eprintln!("warning: {w}");
    }
    let result = run_experiment(&exp).map_err(rt)?;
    let mut spectrum = Vec::new();
    let mut conserved = Vec::new();
    for s in &result.snapshots {
        for (k, v) in s.spectrum.ks.iter().zip(&s.spectrum.values) {
            spectrum.push(vec![num(s.time), num(*k), num(*v)]);
        }
        conserved.push(vec![num(s.time), num(s.total_energy), num(s.total_momentum)]);
    }
    write_csv(&out.join("spectrum.csv"), &["time", "k", "spectrum"], &spectrum)?;
    write_csv(&out.join("conserved.csv"), &["time", "total_energy", "total_momentum"], &conserved)?;
    report.outputs = vec!["spectrum.csv".into(), "conserved.csv".into()];
    report.summary.push(format!(
        "L = {ring}, ensemble = {}, dt = {}, {} snapshots",
        exp.ensemble,
        result.dt,
        result.snapshots.len()
    ));
    Ok(report)
}

fn output_times(cfg: &Config, horizon: f64) -> Result<Vec<f64>, CliError> {
    let mut times = match cfg.kinetic.as_ref().and_then(|k| k.times.clone()) {
        Some(t) => t,
        None => {
            let mut t = cfg.snapshot_times.clone().unwrap_or_default();
            t.push(0.0);
            t.push(horizon);
            t
        }
    };
    if let Some(t) = times.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
        return Err(CliError::Config(format!("`kinetic.times`: {t} is not a time >= 0")));
    }
    times.sort_by(f64::total_cmp);
    times.dedup();
    Ok(times)
}

pub fn kinetic(cfg: &Config, out: &Path) -> Result<Report, CliError> {
    let mut report = Report::default();
    controls_input(cfg, &mut report);
    let p = cfg.controls_1d()?;
    let c = kernel_coeffs(&p).map_err(rt)?;
    let kin = cfg.kinetic.clone().unwrap_or_default();
    let g = kin.g.unwrap_or(128);
    let dt = kin.dt.unwrap_or(1e-3);
    let grid = TorusGrid::new(g).map_err(cfg_err)?;
    let profile = cfg.profile()?;
    let horizon = cfg.horizon()?;
    let times = output_times(cfg, horizon)?;
    match &kin.transport {
        None => {
            let nu0 = SpectralDensity::from_fn(grid, |k| profile.eval(k)).map_err(cfg_err)?;
            let series = evolve_homogeneous_series(&nu0, &c, &times, dt).map_err(cfg_err)?;
            let mut rows = Vec::new();
            for nu in &series {
                for (k, v) in nu.grid.nodes().iter().zip(&nu.values) {
                    rows.push(vec![num(nu.time), num(*k), num(*v)]);
                }
            }
            write_csv(&out.join("kinetic.csv"), &["time", "k", "value"], &rows)?;
            report.summary.push(format!("homogeneous, G = {g}, {} output times", series.len()));
        }
        Some(TransportConfig {
            length,
            cells,
            amplitude,
            interpolation,
        }) => {
            let interp = match interpolation.as_deref() {
                None | Some("cubic") => Interpolation::Cubic,
                Some("linear") => Interpolation::Linear,
                Some(other) => {
                    return Err(CliError::Config(format!(
                        "`kinetic.transport.interpolation`: expected `cubic` or `linear`, got `{other}`"
                    )))
                }
            };
            let amp = amplitude.unwrap_or(0.5);
            let coupling = cfg.coupling()?;
            let len = *length;
            let mut mu = PhaseSpaceDensity::from_fn(len, *cells, grid, |x, k| {
                profile.eval(k) * (1.0 + amp * (2.0 * std::f64::consts::PI * x / len).cos())
            })
            .map_err(cfg_err)?;
            let mut rows = Vec::new();
            for &t in &times {
                let span = t - mu.time;
                if span > 0.0 {
                    let h = dt.min(span);
                    mu = evolve_transport(&mu, &c, &coupling, span, h, interp).map_err(|e| match e {
                        lattice_kernel::Error::Cfl { .. } => CliError::Config(format!("`kinetic.dt`: {e}")),
                        other => rt(other),
                    })?;
                    mu.time = t;
                }
                for i in 0..mu.cells {
                    for (j, k) in mu.grid.nodes().iter().enumerate() {
                        rows.push(vec![num(t), num(mu.x(i)), num(*k), num(mu.get(i, j))]);
                    }
                }
            }
            write_csv(&out.join("kinetic.csv"), &["time", "x", "k", "value"], &rows)?;
            report.summary.push(format!("transport, G = {g}, {cells} cells, {} output times", times.len()));
        }
    }
    report.outputs.push("kinetic.csv".into());
    Ok(report)
}

/// Groups rows of (time, k, value) by time, keeping file order.
fn by_time(rows: &[Vec<f64>], path: &Path) -> Result<Vec<(f64, Vec<(f64, f64)>)>, CliError> {
    let mut out: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
    for r in rows {
        if r.len() != 3 {
            return Err(CliError::Config(format!(
                "{}: expected columns time,k,value",
                path.display()
            )));
        }
        match out.last_mut() {
            Some((t, v)) if *t == r[0] => v.push((r[1], r[2])),
            _ => out.push((r[0], vec![(r[1], r[2])])),
        }
    }
    Ok(out)
}

pub fn compare(cfg: &Config, out: &Path) -> Result<Report, CliError> {
    let cmp = cfg
        .compare
        .clone()
        .ok_or_else(|| CliError::Config("missing key `compare` (or --simulation/--kinetic)".into()))?;
    let (_, sim_rows) = read_numeric_csv(&cmp.simulation)?;
    let (_, kin_rows) = read_numeric_csv(&cmp.kinetic)?;
    let sim = by_time(&sim_rows, &cmp.simulation)?;
    let kin = by_time(&kin_rows, &cmp.kinetic)?;
    let mut mc = Vec::new();
    let mut nus = Vec::new();
    for (t, vals) in &kin {
        let Some((_, est)) = sim.iter().find(|(s, _)| (s - t).abs() <= 1e-9) else {
            continue;
        };
        let grid = TorusGrid::new(vals.len()).map_err(cfg_err)?;
        if grid.nodes().iter().zip(vals).any(|(a, (k, _))| (a - k).abs() > 1e-12) {
            return Err(CliError::Config(format!(
                "{}: k column at time {t} is not a midpoint grid",
                cmp.kinetic.display()
            )));
        }
        let mut nu = SpectralDensity::new(grid, vals.iter().map(|v| v.1).collect()).map_err(cfg_err)?;
        nu.time = *t;
        nus.push(nu);
        mc.push((
            *t,
            WignerEstimate {
                ks: est.iter().map(|v| v.0).collect(),
                values: est.iter().map(|v| v.1).collect(),
            },
        ));
    }
    if mc.is_empty() {
        return Err(CliError::Config("the two files share no time stamps".into()));
    }
    let dist = compare_spectra(&mc, &nus).map_err(cfg_err)?;
    let rows: Vec<Vec<String>> = dist.iter().map(|(t, d)| vec![num(*t), num(*d)]).collect();
    write_csv(&out.join("compare.csv"), &["time", "l1_distance"], &rows)?;
    Ok(Report {
        outputs: vec!["compare.csv".into()],
        inputs: vec![cmp.simulation, cmp.kinetic],
        summary: dist.iter().map(|(t, d)| format!("t = {t}: L1 distance {d:.4}")).collect(),
        failure: None,
    })
}
