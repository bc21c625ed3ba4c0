use super::{sub, wrap, DualIndexControls, KernelCoeffsND, NdVariant};
use crate::error::{Error, Result};
use crate::lattice_nd::{ball, l1_norm, LatticePath, PathFamily, Point};
use rand::Rng;
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};

/// Coefficients of λ^{i,j}_{n,γ} applied at α, as (site, component, value)
/// triples for ∂/∂[α_site]_component.
///
/// `mx` weights the differences X_c = Σ_d mx(d)([α_{n+γ_d}]_c - [α_n]_c)
/// and `md` the derivative sums; valid fields have `mx == md`. Keeping them
/// separate makes it possible to probe the energy identity.
pub fn dual_field_apply(
    mx: &[f64],
    md: &[f64],
    path: &LatticePath,
    n: &[i64],
    (i, j): (usize, usize),
    alpha: &dyn Fn(&[i64], usize) -> f64,
) -> Vec<(Point, usize, f64)> {
    let x = |c: usize| -> f64 {
        mx.iter()
            .enumerate()
            .map(|(k, m)| m * (alpha(&super::add(n, path.point(k + 1)), c) - alpha(n, c)))
            .sum()
    };
    let (xi, xj) = (x(i), x(j));
    let s: f64 = md.iter().sum();
    let mut out = Vec::with_capacity(2 * md.len() + 2);
    for (k, m) in md.iter().enumerate() {
        let site = super::add(n, path.point(k + 1));
        out.push((site.clone(), i, xj * m));
        out.push((site, j, -xi * m));
    }
    out.push((n.to_vec(), i, -xj * s));
    out.push((n.to_vec(), j, xi * s));
    out
}

/// R_γ(D) for one path: R(0) = S² + Σ M², and for D ≠ 0 the -S·M(‖D‖)
/// terms where γ_{‖D‖} = ±D plus Σ M(d1)M(d2) over d1 ≠ d2 with
/// γ_{d2} - γ_{d1} = D.
fn path_profile(path: &LatticePath, m: &[f64]) -> HashMap<Point, f64> {
    let dim = path.dim();
    let s: f64 = m.iter().sum();
    let mut r: HashMap<Point, f64> = HashMap::new();
    r.insert(vec![0; dim], s * s + m.iter().map(|v| v * v).sum::<f64>());
    for (k, &mk) in m.iter().enumerate() {
        let p = path.point(k + 1);
        *r.entry(p.to_vec()).or_default() -= s * mk;
        *r.entry(super::neg(p)).or_default() -= s * mk;
    }
    for (k1, &m1) in m.iter().enumerate() {
        for (k2, &m2) in m.iter().enumerate() {
            if k1 != k2 {
                *r.entry(sub(path.point(k2 + 1), path.point(k1 + 1))).or_default() += m1 * m2;
            }
        }
    }
    r
}

/// Closed-form dual-index tables, one per ordered pair carrying controls:
/// K^{i,j}(D, D') = ½ Σ_γ R_γ(D) R_γ(D'), the sum running over every path.
pub fn dual_index_coeffs(
    m: &DualIndexControls,
) -> Result<BTreeMap<(usize, usize), KernelCoeffsND>> {
    m.validate()?;
    let family = m.family();
    let mut out = BTreeMap::new();
    for (i, j) in m.pairs() {
        let mut acc: HashMap<(Point, Point), f64> = HashMap::new();
        for (idx, path) in family.paths().iter().enumerate() {
            let v = m.get(i, j, idx);
            if v.iter().all(|&x| x == 0.0) {
                continue;
            }
            let r = path_profile(path, &v);
            for (d, rd) in &r {
                for (dp, rdp) in &r {
                    *acc.entry((d.clone(), dp.clone())).or_default() += 0.5 * rd * rdp;
                }
            }
        }
        let mut table = KernelCoeffsND::new(family.dim(), family.n(), NdVariant::Dual { i, j });
        for ((d, dp), v) in acc {
            table.insert(d, dp, vec![v]);
        }
        out.insert((i, j), table);
    }
    Ok(out)
}

/// ½ Σ_γ Σ_n Σ_{(x,c)} out(x,c) out(x - D', c), keyed by D', where out is
/// λ^{i,j}_{n,γ} applied to α and n runs over every site whose field sees
/// the support of α.
fn field_autocorrelation(
    m: &DualIndexControls,
    (i, j): (usize, usize),
    support: &[(Point, f64)],
    side: usize,
) -> HashMap<Point, f64> {
    let family = m.family();
    let alpha_map: HashMap<Point, f64> = support.iter().cloned().collect();
    let alpha = |p: &[i64], c: usize| {
        if c == i {
            alpha_map.get(&wrap(p, side)).copied().unwrap_or(0.0)
        } else {
            0.0
        }
    };
    let mut sites: Vec<Point> = support
        .iter()
        .flat_map(|(p, _)| ball(family.dim(), family.n()).into_iter().map(move |b| sub(p, &b)))
        .map(|p| wrap(&p, side))
        .collect();
    sites.sort();
    sites.dedup();
    let mut out: HashMap<Point, f64> = HashMap::new();
    for (idx, path) in family.paths().iter().enumerate() {
        let v = m.get(i, j, idx);
        if v.iter().all(|&x| x == 0.0) {
            continue;
        }
        for n in &sites {
            let mut field: HashMap<(Point, usize), f64> = HashMap::new();
            for (x, c, val) in dual_field_apply(&v, &v, path, n, (i, j), &alpha) {
                if val != 0.0 {
                    *field.entry((wrap(&x, side), c)).or_default() += val;
                }
            }
            for ((x1, c1), v1) in &field {
                for ((x2, c2), v2) in &field {
                    if c1 == c2 {
                        *out.entry(wrap(&sub(x1, x2), side)).or_default() += 0.5 * v1 * v2;
                    }
                }
            }
        }
    }
    out
}

/// Brute-force dual-index tables on a torus of the given side. The
/// quadratic form of the fields is expanded on α = e_0, e_0 + e_D in
/// component i and the coefficients are read off by polarization.
pub fn nd_coeffs_oracle_dual(
    m: &DualIndexControls,
    side: usize,
) -> Result<BTreeMap<(usize, usize), KernelCoeffsND>> {
    let (dim, n) = (m.dim(), m.n());
    if side < super::min_torus_side(n) {
        return Err(Error::InvalidInput(format!(
            "torus side {side} too small for N = {n} (need at least {})",
            super::min_torus_side(n)
        )));
    }
    let origin = vec![0i64; dim];
    let mut out = BTreeMap::new();
    for pair in m.pairs() {
        let base = field_autocorrelation(m, pair, &[(origin.clone(), 1.0)], side);
        let rows: Vec<(Point, HashMap<Point, f64>)> = ball(dim, 2 * n)
            .into_par_iter()
            .map(|d| {
                if d == origin {
                    return (d, base.clone());
                }
                let both = field_autocorrelation(
                    m,
                    pair,
                    &[(origin.clone(), 1.0), (d.clone(), 1.0)],
                    side,
                );
                // the e_D form is a translate of the e_0 form
                let mut row = HashMap::new();
                for (dp, v) in &both {
                    let b = base.get(dp).copied().unwrap_or(0.0);
                    row.insert(dp.clone(), 0.5 * (v - 2.0 * b));
                }
                (d, row)
            })
            .collect();
        let (i, j) = pair;
        let mut table = KernelCoeffsND::new(dim, n, NdVariant::Dual { i, j });
        for (d, row) in rows {
            for (dp, v) in row {
                if l1_norm(&dp) > 2 * n {
                    if v.abs() > 1e-12 {
                        return Err(Error::Mismatch(format!(
                            "oracle produced support at D' = {dp:?} beyond 2N"
                        )));
                    }
                    continue;
                }
                if v.abs() > 1e-14 {
                    table.insert(d.clone(), dp, vec![v]);
                }
            }
        }
        out.insert(pair, table);
    }
    Ok(out)
}

/// Largest change of Σ[α]_i, Σ[α]_j or Σ([α]_i² + [α]_j²) under any single
/// λ^{i,j}_{n,γ}, over `draws` random α on a box of side 4N + 1.
pub fn conservation_check_dual<R: Rng + ?Sized>(
    m: &DualIndexControls,
    draws: usize,
    rng: &mut R,
) -> f64 {
    let mut worst: f64 = 0.0;
    for pair in m.pairs() {
        let weights: Vec<(Vec<f64>, Vec<f64>)> = (0..m.family().len())
            .map(|idx| {
                let v = m.get(pair.0, pair.1, idx);
                (v.clone(), v)
            })
            .collect();
        worst = worst.max(conservation_check_dual_weights(m.family(), pair, &weights, draws, rng));
    }
    worst
}

/// [`conservation_check_dual`] with separate difference and derivative
/// weights `(mx, md)` per path.
pub fn conservation_check_dual_weights<R: Rng + ?Sized>(
    family: &PathFamily,
    (i, j): (usize, usize),
    weights: &[(Vec<f64>, Vec<f64>)],
    draws: usize,
    rng: &mut R,
) -> f64 {
    let dim = family.dim();
    let r = 2 * family.n() as i64;
    let origin = vec![0i64; dim];
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let mut values: HashMap<(Point, usize), f64> = HashMap::new();
        for p in super::simple::ball_box(dim, r) {
            for c in 0..dim {
                values.insert((p.clone(), c), rng.random_range(-1.0..1.0));
            }
        }
        let alpha = |p: &[i64], c: usize| -> f64 {
            values.get(&(p.to_vec(), c)).copied().unwrap_or(0.0)
        };
        for (path, (mx, md)) in family.paths().iter().zip(weights) {
            let (mut pi, mut pj, mut energy) = (0.0, 0.0, 0.0);
            for (x, c, v) in dual_field_apply(mx, md, path, &origin, (i, j), &alpha) {
                if c == i {
                    pi += v;
                } else {
                    pj += v;
                }
                energy += 2.0 * alpha(&x, c) * v;
            }
            worst = worst.max(pi.abs()).max(pj.abs()).max(energy.abs());
        }
    }
    worst
}
