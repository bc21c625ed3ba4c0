//! One-dimensional controls, their kernel coefficients K(d, d') and the
//! cosine kernel K̂(k, k') built from them.

mod coeffs;
mod conservation;
mod eval;
mod oracle;

pub use coeffs::{kernel_coeffs, kernel_coeffs_exact, CoeffTable, KernelCoeffs1D};
pub use conservation::{conservation_check_1d, conservation_check_raw, field_residuals_raw};
pub use eval::{bound_ratio, collision_apply, eval_kernel, kernel_matrix, TorusGrid};
pub use oracle::{kernel_coeffs_oracle, kernel_coeffs_oracle_exact, min_ring_size};

pub(crate) use oracle::vector_field_entries;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use std::fmt;

/// Free parameters M(d), d = 1..N, of a one-dimensional control.
///
/// Only positive distances are stored; `m(-d)` returns `-m(d)`, so oddness
/// holds by construction. The zero condition on 1 ≤ d ≤ N/2 is checked by
/// [`validate_controls`].
#[derive(Clone, Debug, PartialEq)]
pub struct ControlParams1D {
    n: usize,
    m: Vec<f64>,
}

impl ControlParams1D {
    pub fn new(n: usize, m: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidControls("N must be positive".into()));
        }
        if m.len() != n {
            return Err(Error::InvalidControls(format!(
                "expected {n} values for N = {n}, got {}",
                m.len()
            )));
        }
        if let Some(i) = m.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidControls(format!("m({}) is not finite", i + 1)));
        }
        Ok(Self { n, m })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(n, vec![0.0; n])
    }

    /// The interaction distance N.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored values m(1..=N).
    pub fn values(&self) -> &[f64] {
        &self.m
    }

    /// M(d) for any integer d, using oddness and zero outside 1 ≤ |d| ≤ N.
    pub fn m(&self, d: i64) -> f64 {
        m_at(&self.m, d)
    }

    /// Distances whose values are not forced to zero: ⌊N/2⌋+1 ..= N.
    pub fn free_distances(&self) -> std::ops::RangeInclusive<usize> {
        self.n / 2 + 1..=self.n
    }

    /// Copy with every constrained entry (1 ≤ d ≤ N/2) set to zero.
    pub fn project(&self) -> Self {
        let mut m = self.m.clone();
        for v in m.iter_mut().take(self.n / 2) {
            *v = 0.0;
        }
        Self { n: self.n, m }
    }
}

/// M(d) with the odd extension, for any scalar type.
pub(crate) fn m_at<T: Scalar>(m: &[T], d: i64) -> T {
    let a = d.unsigned_abs() as usize;
    if a == 0 || a > m.len() {
        T::zero()
    } else if d > 0 {
        m[a - 1]
    } else {
        -m[a - 1]
    }
}

/// Outcome of [`validate_controls`].
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub n: usize,
    /// Oddness cannot fail for [`ControlParams1D`]; kept for reporting.
    pub oddness_ok: bool,
    /// Distances 1 ≤ d ≤ N/2 carrying a nonzero value.
    pub zero_violations: Vec<usize>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.oddness_ok && self.zero_violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "N = {}", self.n)?;
        writeln!(f, "oddness: {}", if self.oddness_ok { "pass" } else { "fail" })?;
        if self.zero_violations.is_empty() {
            write!(f, "zero below N/2: pass")
        } else {
            let ds: Vec<String> = self.zero_violations.iter().map(|d| d.to_string()).collect();
            write!(f, "zero below N/2: fail at d = {}", ds.join(", "))
        }
    }
}

pub fn validate_controls(p: &ControlParams1D) -> ValidationReport {
    let zero_violations = (1..=p.n / 2).filter(|&d| p.m[d - 1] != 0.0).collect();
    ValidationReport {
        n: p.n,
        oddness_ok: true,
        zero_violations,
    }
}

pub(crate) fn ensure_valid(p: &ControlParams1D) -> Result<()> {
    let report = validate_controls(p);
    if report.passed() {
        Ok(())
    } else {
        Err(Error::InvalidControls(format!(
            "M(d) must vanish for 1 <= d <= N/2; offending d: {:?}",
            report.zero_violations
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_examples() {
        let ok = ControlParams1D::new(3, vec![0.0, 1.0, 2.0]).unwrap();
        assert!(validate_controls(&ok).passed());

        let bad = ControlParams1D::new(3, vec![1.0, 1.0, 2.0]).unwrap();
        let r = validate_controls(&bad);
        assert!(!r.passed());
        assert_eq!(r.zero_violations, vec![1]);

        let single = ControlParams1D::new(1, vec![5.0]).unwrap();
        assert!(validate_controls(&single).passed());
    }

    #[test]
    fn oddness_is_structural() {
        let p = ControlParams1D::new(3, vec![0.0, 1.0, 2.0]).unwrap();
        for d in 1..=3 {
            assert_eq!(p.m(-d), -p.m(d));
        }
        assert_eq!(p.m(0), 0.0);
        assert_eq!(p.m(4), 0.0);
    }

    #[test]
    fn constructor_rejects_bad_shapes() {
        assert!(ControlParams1D::new(0, vec![]).is_err());
        assert!(ControlParams1D::new(2, vec![1.0]).is_err());
        assert!(ControlParams1D::new(1, vec![f64::NAN]).is_err());
    }
}
