use super::{ensure_valid, m_at, ControlParams1D};
use crate::error::{Error, Result};
use crate::scalar::{Exact, Scalar};

/// Kernel coefficients K(d, d') for |d|, |d'| ≤ 2N.
///
/// Stored densely over the quadrant (d, d') ∈ [0, 2N]²; reads at negative
/// indices are folded back with K(d, d') = K(-d, d') = K(d, -d').
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffTable<T> {
    n: usize,
    data: Vec<T>,
}

pub type KernelCoeffs1D = CoeffTable<f64>;

impl<T: Scalar> CoeffTable<T> {
    pub fn zeros(n: usize) -> Self {
        let side = 2 * n + 1;
        Self {
            n,
            data: vec![T::zero(); side * side],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Largest |d| with a possibly nonzero coefficient, i.e. 2N.
    pub fn radius(&self) -> usize {
        2 * self.n
    }

    fn side(&self) -> usize {
        2 * self.n + 1
    }

    pub fn get(&self, d: i64, dp: i64) -> T {
        let (a, b) = (d.unsigned_abs() as usize, dp.unsigned_abs() as usize);
        if a > self.radius() || b > self.radius() {
            return T::zero();
        }
        self.data[a * self.side() + b]
    }

    pub(crate) fn set(&mut self, d: usize, dp: usize, v: T) {
        let side = self.side();
        self.data[d * side + dp] = v;
    }

    /// Σ_{|d| ≤ 2N} K(d, d').
    pub fn row_sum(&self, dp: i64) -> T {
        let r = self.radius() as i64;
        let mut s = T::zero();
        for d in -r..=r {
            s += self.get(d, dp);
        }
        s
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max)
    }

    /// The stored quadrant as rows d = 0..=2N.
    pub fn quadrant(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.side()).map(|r| r.to_vec()).collect()
    }

    pub fn to_f64(&self) -> CoeffTable<f64> {
        CoeffTable {
            n: self.n,
            data: self.data.iter().map(|v| v.to_f64()).collect(),
        }
    }
}

/// Closed-form coefficients of a validated control.
pub fn kernel_coeffs(p: &ControlParams1D) -> Result<KernelCoeffs1D> {
    ensure_valid(p)?;
    Ok(closed_form(p.n(), p.values()))
}

/// Closed form in exact rational arithmetic; `m` holds m(1..=N).
pub fn kernel_coeffs_exact(n: usize, m: &[Exact]) -> Result<CoeffTable<Exact>> {
    if n == 0 || m.len() != n {
        return Err(Error::InvalidControls(format!("expected {n} values, got {}", m.len())));
    }
    if let Some(d) = (1..=n / 2).find(|&d| m[d - 1] != Exact::from_int(0)) {
        return Err(Error::InvalidControls(format!("M({d}) must vanish")));
    }
    Ok(closed_form(n, m))
}

pub(crate) fn closed_form<T: Scalar>(n: usize, m: &[T]) -> CoeffTable<T> {
    let mut table = CoeffTable::zeros(n);
    let r = 2 * n;
    for d in 0..=r {
        for dp in d..=r {
            let v = coefficient(n as i64, m, d as i64, dp as i64);
            table.set(d, dp, v);
            table.set(dp, d, v);
        }
    }
    table
}

/// Σ_{d1 + d2 = x} M(d1) M(d2) over 1 ≤ |d1|, |d2| ≤ N.
fn conv<T: Scalar>(n: i64, m: &[T], x: i64) -> T {
    let mut s = T::zero();
    for d1 in -n..=n {
        if d1 != 0 {
            s += m_at(m, d1) * m_at(m, x - d1);
        }
    }
    s
}

/// Single coefficient K(d, d'), for signed arguments.
///
/// Guards follow the case list in order: origin, one axis zero, equal
/// magnitudes, one argument beyond N, both within N. Every case that is not
/// matched is zero.
pub(crate) fn coefficient<T: Scalar>(n: i64, m: &[T], d: i64, dp: i64) -> T {
    let mm = |x: i64| m_at(m, x);
    let (a, b) = (d.abs(), dp.abs());
    if a > 2 * n || b > 2 * n {
        return T::zero();
    }

    if a == 0 && b == 0 {
        let mut s = T::zero();
        for x in 1..=n {
            s += mm(x) * mm(x);
        }
        return T::from_int(3) * s;
    }

    if a == 0 || b == 0 {
        let e = if a == 0 { dp } else { d };
        let c = conv(n, m, e).half();
        return if e.abs() <= n { -(mm(e) * mm(e)) - c } else { -c };
    }

    if a == b {
        let c = conv(n, m, d).quarter();
        return if 2 * a <= n { -c - mm(d) * mm(2 * d) } else { -c };
    }

    if (a <= n) != (b <= n) {
        let (s, l) = if a <= n { (d, dp) } else { (dp, d) };
        let mut v = T::zero();
        if (l - s).abs() <= n {
            v += (mm(s) * mm(l - s)).half();
        }
        if (l + s).abs() <= n {
            v += -(mm(s) * mm(l + s)).half();
        }
        return v;
    }

    if a <= n && b <= n {
        let diff_in = (dp - d).abs() <= n;
        let sum_in = (dp + d).abs() <= n;
        let minus = mm(dp) * mm(d - dp) + mm(d) * mm(dp - d);
        let plus = mm(dp) * mm(d + dp) + mm(d) * mm(d + dp);
        return match (diff_in, sum_in) {
            (true, true) => (minus - plus).half(),
            (true, false) => minus.half(),
            (false, true) => -plus.half(),
            (false, false) => T::zero(),
        };
    }

    T::zero()
}
