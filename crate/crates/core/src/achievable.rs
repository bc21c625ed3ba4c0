//! Chebyshev form of the kernel and synthesis of controls for achievable
//! targets.
//!
//! Because every row of K sums to zero, the kernel factors as
//! K̂(k,k') = 16 sin²(πk) sin²(πk') Σ L(d1,d2) U_{2d1}(cos πk) U_{2d2}(cos πk'),
//! with L the tail sums of K. L is a quadratic form in the free controls, so
//! v = Σ_{i≤j} C_i C_j P_{i,j} for fixed polynomials P_{i,j}.

use crate::error::{Error, Result};
use crate::kernel1d::{
    kernel_coeffs, kernel_coeffs_exact, kernel_matrix, CoeffTable, ControlParams1D, TorusGrid,
};
use crate::scalar::{Exact, Scalar};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Tail sums L(d1, d2) = Σ_{d>d1} Σ_{d'>d2} K(d, d'), 0 ≤ d1, d2 < 2N.
///
/// Also serves as the coefficient matrix of a polynomial in the
/// U_{2d1}(x) U_{2d2}(y) basis.
#[derive(Clone, Debug, PartialEq)]
pub struct LCoeffs<T = f64> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> LCoeffs<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); 4 * n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of U_{2d} terms per axis, 2N.
    pub fn side(&self) -> usize {
        2 * self.n
    }

    pub fn get(&self, d1: usize, d2: usize) -> T {
        if d1 >= self.side() || d2 >= self.side() {
            return T::zero();
        }
        self.data[d1 * self.side() + d2]
    }

    fn set(&mut self, d1: usize, d2: usize, v: T) {
        let s = self.side();
        self.data[d1 * s + d2] = v;
    }

    /// Nonzero entries as (d1, d2, coefficient) in row-major order.
    pub fn terms(&self) -> Vec<(usize, usize, T)> {
        let s = self.side();
        (0..s)
            .flat_map(|a| (0..s).map(move |b| (a, b)))
            .map(|(a, b)| (a, b, self.get(a, b)))
            .filter(|t| t.2 != T::zero())
            .collect()
    }

    pub fn to_f64(&self) -> LCoeffs<f64> {
        LCoeffs {
            n: self.n,
            data: self.data.iter().map(|v| v.to_f64()).collect(),
        }
    }
}

impl LCoeffs<f64> {
    /// Σ L(d1,d2) U_{2d1}(x) U_{2d2}(y), summed by Clenshaw along each axis.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let s = self.side();
        let inner: Vec<f64> = self
            .data
            .chunks(s)
            .map(|row| even_u_series(row, y))
            .collect();
        even_u_series(&inner, x)
    }

    /// Coefficients of x^a y^b, indexed `[a][b]`. Display only.
    pub fn to_monomials(&self) -> Vec<Vec<f64>> {
        let s = self.side();
        let deg = 2 * s - 1;
        let rows: Vec<Vec<f64>> = self
            .data
            .chunks(s)
            .map(|row| u_series_to_monomial(&spread_even(row)))
            .collect();
        let mut out = vec![vec![0.0; deg]; deg];
        for b in 0..deg {
            let column: Vec<f64> = rows.iter().map(|r| r.get(b).copied().unwrap_or(0.0)).collect();
            let mono = u_series_to_monomial(&spread_even(&column));
            for (a, v) in mono.into_iter().enumerate() {
                out[a][b] = v;
            }
        }
        out
    }
}

/// Σ_n a_n U_n over even-only coefficients a_{2d} = c_d.
fn spread_even(c: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; 2 * c.len().max(1) - 1];
    for (d, &v) in c.iter().enumerate() {
        out[2 * d] = v;
    }
    out
}

/// Σ_d c_d U_{2d}(x). The even-index polynomials obey
/// U_{2d+2} = 2(2x²−1) U_{2d} − U_{2d−2}, U_0 = 1, U_2 = 4x² − 1, which
/// gives the Clenshaw sum b0 + b1.
fn even_u_series(c: &[f64], x: f64) -> f64 {
    let z2 = 2.0 * (2.0 * x * x - 1.0);
    let (mut b1, mut b2) = (0.0, 0.0);
    for &a in c.iter().skip(1).rev() {
        let b = a + z2 * b1 - b2;
        b2 = b1;
        b1 = b;
    }
    let b0 = c.first().copied().unwrap_or(0.0) + z2 * b1 - b2;
    b0 + b1
}

pub fn l_coeffs<T: Scalar>(c: &CoeffTable<T>) -> LCoeffs<T> {
    let n = c.n();
    let r = 2 * n;
    let mut out = LCoeffs::zeros(n);
    // suffix sums from the far corner inwards
    let mut tail = vec![vec![T::zero(); r + 2]; r + 2];
    for d in (1..=r).rev() {
        for dp in (1..=r).rev() {
            tail[d][dp] = c.get(d as i64, dp as i64) + tail[d + 1][dp] + tail[d][dp + 1]
                - tail[d + 1][dp + 1];
        }
    }
    for d1 in 0..r {
        for d2 in 0..r {
            out.set(d1, d2, tail[d1 + 1][d2 + 1]);
        }
    }
    out
}

/// U_d(x) by the three-term recurrence.
pub fn chebyshev_u(d: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if d == 0 {
        return prev;
    }
    for _ in 1..d {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// (sin²(dθ), sin²θ · Σ_{d1<d} U_{2d1}(cos θ)). The two agree.
pub fn telescoping_check(d: usize, theta: f64) -> (f64, f64) {
    let lhs = (d as f64 * theta).sin().powi(2);
    let x = theta.cos();
    let sum: f64 = (0..d).map(|d1| chebyshev_u(2 * d1, x)).sum();
    (lhs, theta.sin().powi(2) * sum)
}

/// Monomial coefficients of Σ_n a_n U_n(x). Display only: the U basis is
/// the better conditioned one.
pub fn u_series_to_monomial(a: &[f64]) -> Vec<f64> {
    let len = a.len().max(1);
    let mut out = vec![0.0; len];
    let mut prev = vec![0.0; len + 1];
    let mut cur = vec![0.0; len + 1];
    prev[0] = 1.0; // U_0
    if len > 1 {
        cur[1] = 2.0; // U_1
    }
    for (n, &an) in a.iter().enumerate() {
        let un = if n == 0 { &prev } else { &cur };
        for i in 0..len {
            out[i] += an * un[i];
        }
        if n >= 1 {
            let mut next = vec![0.0; len + 1];
            for i in 0..len {
                next[i + 1] += 2.0 * cur[i];
                next[i] -= prev[i];
            }
            prev = std::mem::replace(&mut cur, next);
        }
    }
    out
}

/// The quadratic form v(C) = Σ_{i≤j} C_i C_j P_{i,j}.
///
/// Indices are 1-based: C_i drives M(i + ⌊N/2⌋). Diagonal polynomials
/// multiply C_i² and off-diagonal ones multiply C_i C_j once.
#[derive(Clone, Debug, PartialEq)]
pub struct ChebQuadraticForm<T = f64> {
    n: usize,
    polys: BTreeMap<(usize, usize), LCoeffs<T>>,
}

impl<T: Scalar> ChebQuadraticForm<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nfree(&self) -> usize {
        self.n - self.n / 2
    }

    /// P_{i,j} for 1 ≤ i ≤ j ≤ nfree.
    pub fn poly(&self, i: usize, j: usize) -> Option<&LCoeffs<T>> {
        self.polys.get(&(i.min(j), i.max(j)))
    }

    pub fn polys(&self) -> impl Iterator<Item = (&(usize, usize), &LCoeffs<T>)> {
        self.polys.iter()
    }

    /// v at the given C, as one polynomial.
    pub fn combine(&self, c: &[T]) -> Result<LCoeffs<T>> {
        if c.len() != self.nfree() {
            return Err(Error::InvalidInput(format!(
                "expected {} values of C for N = {}, got {}",
                self.nfree(),
                self.n,
                c.len()
            )));
        }
        let mut out = LCoeffs::zeros(self.n);
        for (&(i, j), p) in &self.polys {
            let w = c[i - 1] * c[j - 1];
            for (a, v) in out.data.iter_mut().zip(&p.data) {
                *a += w * *v;
            }
        }
        Ok(out)
    }

    pub fn to_f64(&self) -> ChebQuadraticForm<f64> {
        ChebQuadraticForm {
            n: self.n,
            polys: self.polys.iter().map(|(k, v)| (*k, v.to_f64())).collect(),
        }
    }
}

fn extract<T: Scalar>(n: usize, l_of: impl Fn(&[T]) -> LCoeffs<T>) -> ChebQuadraticForm<T> {
    let half = n / 2;
    let nfree = n - half;
    let hot = |idx: &[usize]| {
        let mut m = vec![T::zero(); n];
        for &i in idx {
            m[half + i - 1] = T::one();
        }
        l_of(&m)
    };
    let diag: Vec<LCoeffs<T>> = (1..=nfree).map(|i| hot(&[i])).collect();
    let mut polys = BTreeMap::new();
    for i in 1..=nfree {
        polys.insert((i, i), diag[i - 1].clone());
        for j in i + 1..=nfree {
            let mut p = hot(&[i, j]);
            for ((v, a), b) in p.data.iter_mut().zip(&diag[i - 1].data).zip(&diag[j - 1].data) {
                *v = *v - *a - *b;
            }
            polys.insert((i, j), p);
        }
    }
    ChebQuadraticForm { n, polys }
}

/// Basis polynomials P_{i,j}, extracted from the closed form by one-hot and
/// pairwise-hot evaluations.
pub fn basis_polys(n: usize) -> Result<ChebQuadraticForm<f64>> {
    Ok(basis_polys_exact(n)?.to_f64())
}

/// [`basis_polys`] in exact rational arithmetic.
pub fn basis_polys_exact(n: usize) -> Result<ChebQuadraticForm<Exact>> {
    if n == 0 {
        return Err(Error::InvalidInput("N must be positive".into()));
    }
    Ok(extract(n, |m: &[Exact]| {
        l_coeffs(&kernel_coeffs_exact(n, m).expect("hot controls satisfy the zero condition"))
    }))
}

/// Controls with m(i + ⌊N/2⌋) = C_i and zeros elsewhere.
pub fn synthesize_controls(n: usize, c: &[f64]) -> Result<ControlParams1D> {
    if n == 0 {
        return Err(Error::InvalidInput("N must be positive".into()));
    }
    let nfree = n - n / 2;
    if c.len() != nfree {
        return Err(Error::InvalidInput(format!(
            "expected {nfree} values of C for N = {n}, got {}",
            c.len()
        )));
    }
    let mut m = vec![0.0; n];
    m[n / 2..].copy_from_slice(c);
    ControlParams1D::new(n, m)
}

/// max over grid pairs of |K̂(k,k') − 16 sin²(πk) sin²(πk') v(cos πk, cos πk')|.
pub fn verify_target(p: &ControlParams1D, v: &LCoeffs<f64>, grid: &TorusGrid) -> Result<f64> {
    if v.n() != p.n() {
        return Err(Error::Mismatch(format!(
            "target built for N = {} but controls have N = {}",
            v.n(),
            p.n()
        )));
    }
    let c = kernel_coeffs(p)?;
    let g = grid.size();
    let khat = kernel_matrix(&c, grid);
    let nodes = grid.nodes();
    let s2: Vec<f64> = nodes.iter().map(|&k| (PI * k).sin().powi(2)).collect();
    let cs: Vec<f64> = nodes.iter().map(|&k| (PI * k).cos()).collect();
    let mut worst: f64 = 0.0;
    for i in 0..g {
        for j in 0..g {
            let target = 16.0 * s2[i] * s2[j] * v.eval(cs[i], cs[j]);
            worst = worst.max((khat[i * g + j] - target).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel1d::eval_kernel;

    #[test]
    fn chebyshev_basics() {
        assert_eq!(chebyshev_u(0, 0.3), 1.0);
        assert!((chebyshev_u(1, 0.3) - 0.6).abs() < 1e-15);
        assert!(chebyshev_u(2, 0.5).abs() < 1e-15);
        let t: f64 = 0.3;
        assert!(((4.0 * t).sin() - t.sin() * chebyshev_u(3, t.cos())).abs() < 1e-12);
    }

    #[test]
    fn telescoping_cases() {
        let (a, b) = telescoping_check(1, 0.4);
        assert!((a - b).abs() < 1e-15 && (a - 0.4f64.sin().powi(2)).abs() < 1e-15);
        let (a, b) = telescoping_check(3, 0.7);
        assert!((a - b).abs() < 1e-12);
        assert_eq!(telescoping_check(5, 0.0), (0.0, 0.0));
    }

    #[test]
    fn even_series_matches_direct_sum() {
        let c = [0.3, -1.2, 0.8, 2.0, -0.5];
        for x in [-0.9, -0.2, 0.0, 0.45, 1.0] {
            let direct: f64 = c.iter().enumerate().map(|(d, a)| a * chebyshev_u(2 * d, x)).sum();
            assert!((even_u_series(&c, x) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn monomial_conversion() {
        // U_2 = 4x² − 1, U_3 = 8x³ − 4x
        assert_eq!(u_series_to_monomial(&[0.0, 0.0, 1.0]), vec![-1.0, 0.0, 4.0]);
        assert_eq!(u_series_to_monomial(&[0.0, 0.0, 0.0, 1.0]), vec![0.0, -4.0, 0.0, 8.0]);
    }

    #[test]
    fn canonical_l_values() {
        let p = ControlParams1D::new(3, vec![0.0, 1.0, 2.0]).unwrap();
        let l = l_coeffs(&kernel_coeffs(&p).unwrap());
        assert!((l.get(0, 0) - 3.75).abs() < 1e-12);
        assert!((l.get(5, 5) + 1.0).abs() < 1e-12);
        assert_eq!(l.get(6, 0), 0.0);
    }

    #[test]
    fn chebyshev_form_reproduces_kernel() {
        let p = ControlParams1D::new(4, vec![0.0, 0.0, 1.5, -0.7]).unwrap();
        let c = kernel_coeffs(&p).unwrap();
        let l = l_coeffs(&c);
        for (k, k2) in [(0.1, 0.37), (-0.22, 0.05), (0.5, -0.41)] {
            let target = 16.0 * (PI * k).sin().powi(2) * (PI * k2).sin().powi(2)
                * l.eval((PI * k).cos(), (PI * k2).cos());
            assert!((eval_kernel(&c, k, k2) - target).abs() < 1e-10);
        }
    }

    #[test]
    fn synthesis_index_shift() {
        let p = synthesize_controls(5, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(p.values(), &[0.0, 0.0, 1.0, 2.0, 3.0]);
        assert!(synthesize_controls(3, &[1.0]).is_err());
        let p = synthesize_controls(1, &[4.0]).unwrap();
        assert_eq!(p.values(), &[4.0]);
    }

    #[test]
    fn n1_has_one_polynomial() {
        let f = basis_polys(1).unwrap();
        assert_eq!(f.nfree(), 1);
        assert_eq!(f.polys().count(), 1);
    }

    #[test]
    fn combined_form_matches_direct_l() {
        let f = basis_polys_exact(5).unwrap();
        let c: Vec<Exact> = [2, -1, 3].iter().map(|&v| Exact::from_integer(v)).collect();
        let v = f.combine(&c).unwrap();
        let mut m = vec![Exact::from_integer(0); 5];
        m[2..].copy_from_slice(&c);
        assert_eq!(v, l_coeffs(&kernel_coeffs_exact(5, &m).unwrap()));
    }

    #[test]
    fn zero_target_is_zero() {
        let f = basis_polys(3).unwrap();
        let v = f.combine(&[0.0, 0.0]).unwrap();
        let p = synthesize_controls(3, &[0.0, 0.0]).unwrap();
        let grid = TorusGrid::new(16).unwrap();
        assert_eq!(verify_target(&p, &v, &grid).unwrap(), 0.0);
    }
}
