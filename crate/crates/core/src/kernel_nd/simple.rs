use super::{add, neg, sub, wrap, KernelCoeffsND, NdVariant, SimpleIndexControls};
use crate::error::{Error, Result};
use crate::lattice_nd::{ball, l1_norm, LatticePath, PathFamily, Point};
use rand::Rng;
use std::collections::HashMap;

/// Sparse linear map of the path field λ^{M_γ}_n, per component:
/// (target, source, coefficient vector over components).
pub fn simple_field_entries(
    values: &[Vec<f64>],
    path: &LatticePath,
    n: &[i64],
) -> Vec<(Point, Point, Vec<f64>)> {
    let mut out = Vec::new();
    for (k, m) in values.iter().enumerate() {
        if m.iter().all(|&v| v == 0.0) {
            continue;
        }
        let e = path.point(k + 1);
        let back = sub(n, e);
        let fwd = add(n, e);
        out.push((back.clone(), n.to_vec(), m.clone()));
        out.push((back, fwd.clone(), m.iter().map(|v| -v).collect()));
        out.push((n.to_vec(), fwd, m.clone()));
    }
    out
}

/// m(E) = Σ over paths with γ_{‖E‖} = E of M_γ(‖E‖), for 1 ≤ ‖E‖ ≤ N.
fn aggregate(family: &PathFamily, expanded: &[Vec<Vec<f64>>]) -> HashMap<Point, Vec<f64>> {
    let dim = family.dim();
    let mut out = HashMap::new();
    for e in ball(dim, family.n()) {
        let norm = l1_norm(&e);
        if norm == 0 {
            continue;
        }
        let mut acc = vec![0.0; dim];
        for &(idx, k) in family.through(&e) {
            debug_assert_eq!(k, norm);
            for (a, v) in acc.iter_mut().zip(&expanded[idx][k - 1]) {
                *a += v;
            }
        }
        out.insert(e, acc);
    }
    out
}

struct Aggregate {
    dim: usize,
    n: usize,
    m: HashMap<Point, Vec<f64>>,
}

impl Aggregate {
    fn at(&self, x: &[i64], c: usize) -> f64 {
        self.m.get(x).map_or(0.0, |v| v[c])
    }

    /// Σ_{E1 + E2 = x} m_i(E1) m_j(E2).
    fn conv(&self, x: &[i64], i: usize, j: usize) -> f64 {
        self.m
            .iter()
            .map(|(e1, v)| v[i] * self.at(&sub(x, e1), j))
            .sum()
    }

    /// [K(D, D')]_{j,i} by the case list.
    fn entry(&self, d: &[i64], dp: &[i64], i: usize, j: usize) -> f64 {
        let n = self.n;
        let (a, b) = (l1_norm(d), l1_norm(dp));
        let mi = |x: &[i64]| self.at(x, i);
        let mj = |x: &[i64]| self.at(x, j);
        if a == 0 && b == 0 {
            return 1.5 * self.m.values().map(|v| v[i] * v[j]).sum::<f64>();
        }
        if a == 0 || b == 0 {
            let e = if a == 0 { dp } else { d };
            let c = -0.5 * self.conv(e, i, j);
            return if a.max(b) <= n { c - mi(e) * mj(e) } else { c };
        }
        if d == dp {
            let c = -0.5 * self.conv(d, i, j);
            return if a <= n { c - mi(d) * mj(d) } else { c };
        }
        let minus_dp = neg(dp);
        if d == minus_dp.as_slice() {
            if a > n {
                return 0.0;
            }
            let mut v = mi(d) * mj(d);
            if 2 * a <= n {
                let twice: Point = d.iter().map(|x| 2 * x).collect();
                v -= mi(d) * mj(&twice) + mi(&twice) * mj(d);
            }
            return v;
        }
        if (a <= n) != (b <= n) {
            let (s, l) = if a <= n { (d, dp) } else { (dp, d) };
            let diff = sub(l, s);
            if l1_norm(&diff) > n {
                return 0.0;
            }
            return 0.5 * (mi(s) * mj(&diff) + mi(&diff) * mj(s));
        }
        if a <= n && b <= n {
            let dpd = sub(dp, d);
            let ddp = sub(d, dp);
            return 0.5
                * (mi(d) * mj(&dpd) + mi(&dpd) * mj(d) + mi(dp) * mj(&ddp) + mi(&ddp) * mj(dp)
                    - mi(dp) * mj(d)
                    - mi(d) * mj(dp));
        }
        0.0
    }
}

/// Closed-form simple-index coefficients for |D|, |D'| ≤ 2N.
pub fn simple_index_coeffs(m: &SimpleIndexControls) -> Result<KernelCoeffsND> {
    let family = m.family();
    let (dim, n) = (family.dim(), family.n());
    let agg = Aggregate {
        dim,
        n,
        m: aggregate(family, &m.expanded()),
    };
    let mut out = KernelCoeffsND::new(dim, n, NdVariant::Simple);
    let points = ball(dim, 2 * n);
    for d in &points {
        for dp in &points {
            let mut mat = vec![0.0; dim * dim];
            for j in 0..agg.dim {
                for i in 0..agg.dim {
                    mat[j * dim + i] = agg.entry(d, dp, i, j);
                }
            }
            out.insert(d.clone(), dp.clone(), mat);
        }
    }
    Ok(out)
}

/// Brute-force expansion on a torus of the given side: with a = e_0 in
/// component i and b = e_D in component j,
/// [K(D, D')]_{j,i} = ½ Σ_n Σ_x [λ_n a]_i(x) [λ_n b]_j(x - D').
/// Only sites n whose field touches the origin contribute.
pub fn nd_coeffs_oracle_simple(m: &SimpleIndexControls, side: usize) -> Result<KernelCoeffsND> {
    let family = m.family();
    let (dim, n) = (family.dim(), family.n());
    if side < super::min_torus_side(n) {
        return Err(Error::InvalidInput(format!(
            "torus side {side} too small for N = {n} (need at least {})",
            super::min_torus_side(n)
        )));
    }
    let expanded = m.expanded();
    let origin = vec![0i64; dim];
    // λ_n as a map source -> [(target, coefficient vector)], for each n near 0
    let sites: Vec<Point> = ball(dim, n).into_iter().map(|x| wrap(&x, side)).collect();
    let fields: Vec<HashMap<Point, Vec<(Point, Vec<f64>)>>> = sites
        .iter()
        .map(|site| {
            let mut by_source: HashMap<Point, Vec<(Point, Vec<f64>)>> = HashMap::new();
            for (idx, path) in family.paths().iter().enumerate() {
                for (t, s, c) in simple_field_entries(&expanded[idx], path, site) {
                    by_source
                        .entry(wrap(&s, side))
                        .or_default()
                        .push((wrap(&t, side), c));
                }
            }
            by_source
        })
        .collect();

    let collect = |field: &HashMap<Point, Vec<(Point, Vec<f64>)>>, src: &Point| {
        let mut acc: HashMap<Point, Vec<f64>> = HashMap::new();
        for (t, c) in field.get(src).map(Vec::as_slice).unwrap_or(&[]) {
            let slot = acc.entry(t.clone()).or_insert_with(|| vec![0.0; dim]);
            for (a, v) in slot.iter_mut().zip(c) {
                *a += v;
            }
        }
        acc
    };

    let mut raw: HashMap<(Point, Point), Vec<f64>> = HashMap::new();
    for d in ball(dim, 2 * n) {
        let src = wrap(&d, side);
        for field in &fields {
            let u = collect(field, &origin);
            if u.is_empty() {
                continue;
            }
            let v = collect(field, &src);
            for (x, uu) in &u {
                for (y, vv) in &v {
                    let dp = wrap(&sub(x, y), side);
                    let slot = raw
                        .entry((d.clone(), dp))
                        .or_insert_with(|| vec![0.0; dim * dim]);
                    for j in 0..dim {
                        for i in 0..dim {
                            slot[j * dim + i] += 0.5 * uu[i] * vv[j];
                        }
                    }
                }
            }
        }
    }

    let mut out = KernelCoeffsND::new(dim, n, NdVariant::Simple);
    for ((d, dp), v) in raw {
        if l1_norm(&dp) > 2 * n {
            if v.iter().any(|x| x.abs() > 1e-12) {
                return Err(Error::Mismatch(format!(
                    "oracle produced support at D' = {dp:?} beyond 2N"
                )));
            }
            continue;
        }
        out.insert(d, dp, v);
    }
    Ok(out)
}

/// Largest change of local momentum or energy under λ^{M_γ} + λ^{M_{-γ}},
/// over every path pair and `draws` random α on a box of side 4N + 1.
pub fn conservation_check_simple<R: Rng + ?Sized>(
    m: &SimpleIndexControls,
    draws: usize,
    rng: &mut R,
) -> f64 {
    conservation_check_simple_expanded(m.family(), &m.expanded(), draws, rng)
}

/// [`conservation_check_simple`] on an explicit per-path table
/// `[path][dd - 1][component]`, which need not satisfy the reflection rule.
pub fn conservation_check_simple_expanded<R: Rng + ?Sized>(
    family: &PathFamily,
    expanded: &[Vec<Vec<f64>>],
    draws: usize,
    rng: &mut R,
) -> f64 {
    let dim = family.dim();
    let box_points = ball_box(dim, 2 * family.n() as i64);
    let origin = vec![0i64; dim];
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let alpha: HashMap<Point, Vec<f64>> = box_points
            .iter()
            .map(|p| (p.clone(), (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()))
            .collect();
        let get = |p: &Point| alpha.get(p).cloned().unwrap_or_else(|| vec![0.0; dim]);
        for idx in family.canonical() {
            let partner = family.partner(idx);
            let mut momentum = vec![0.0; dim];
            let mut energy = 0.0;
            for k in [idx, partner] {
                for (t, s, c) in simple_field_entries(&expanded[k], &family.paths()[k], &origin) {
                    let (at, as_) = (get(&t), get(&s));
                    for comp in 0..dim {
                        let inc = c[comp] * as_[comp];
                        momentum[comp] += inc;
                        energy += 2.0 * at[comp] * inc;
                    }
                }
            }
            worst = momentum.iter().fold(worst.max(energy.abs()), |w, p| w.max(p.abs()));
        }
    }
    worst
}

/// All points of the cube [-r, r]^d.
pub(crate) fn ball_box(dim: usize, r: i64) -> Vec<Point> {
    let side = (2 * r + 1) as usize;
    (0..side.pow(dim as u32))
        .map(|mut code| {
            (0..dim)
                .map(|_| {
                    let v = (code % side) as i64 - r;
                    code /= side;
                    v
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel1d::{kernel_coeffs, ControlParams1D};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_controls_zero_tables() {
        let c = SimpleIndexControls::zeros(2, 2).unwrap();
        assert!(simple_index_coeffs(&c).unwrap().is_empty());
        assert!(nd_coeffs_oracle_simple(&c, 17).unwrap().is_empty());
    }

    #[test]
    fn single_pair_origin_entry() {
        // one nonzero M_γ(2) = (x, 0) on a canonical path and its reflection
        let mut c = SimpleIndexControls::zeros(2, 2).unwrap();
        c.set(1, 2, &[0.7, 0.0]).unwrap();
        let k = simple_index_coeffs(&c).unwrap();
        let v = k.get(&[0, 0], &[0, 0]);
        assert!((v[0] - 1.5 * 2.0 * 0.49).abs() < 1e-12);
        assert_eq!(v[3], 0.0);
    }

    #[test]
    fn oracle_matches_closed_form_2d() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let c = SimpleIndexControls::random(2, 2, &mut rng).unwrap();
        let a = simple_index_coeffs(&c).unwrap();
        let b = nd_coeffs_oracle_simple(&c, 17).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-10);
    }

    #[test]
    fn one_dimension_reduces_to_scalar_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 1..=4 {
            let c = SimpleIndexControls::random(1, n, &mut rng).unwrap();
            let m: Vec<f64> = (1..=n).map(|dd| c.get(0, dd).unwrap()[0]).collect();
            let k1 = kernel_coeffs(&ControlParams1D::new(n, m).unwrap()).unwrap();
            let kn = simple_index_coeffs(&c).unwrap();
            let r = 2 * n as i64;
            for d in -r..=r {
                for dp in -r..=r {
                    let sym = 0.5 * (kn.get(&[d], &[dp])[0] + kn.get(&[-d], &[dp])[0]);
                    assert!((sym - k1.get(d, dp)).abs() < 1e-12, "N={n} ({d},{dp})");
                }
            }
        }
    }

    #[test]
    fn row_sums_vanish() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let c = SimpleIndexControls::random(2, 3, &mut rng).unwrap();
        for (_, sums) in simple_index_coeffs(&c).unwrap().row_sums() {
            assert!(sums.iter().all(|s| s.abs() < 1e-10));
        }
    }

    #[test]
    fn conservation_and_violation() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let c = SimpleIndexControls::random(2, 2, &mut rng).unwrap();
        assert!(conservation_check_simple(&c, 5, &mut rng) < 1e-12);
        let mut broken = c.expanded();
        let partner = c.family().partner(0);
        broken[partner][1][0] += 0.5;
        assert!(conservation_check_simple_expanded(c.family(), &broken, 5, &mut rng) > 1e-6);
    }

    #[test]
    fn small_torus_rejected() {
        let c = SimpleIndexControls::zeros(2, 2).unwrap();
        assert!(nd_coeffs_oracle_simple(&c, 16).is_err());
    }
}
