//! Brute-force coefficient extraction on a finite ring.
//!
//! The vector field λ_n is written out as a sparse linear map on the ring.
//! With a = e_0 and b = e_D, the bilinear form
//!
//! G_{D'}(a, b) = ½ Σ_{n'} Σ_n (λ_n a)_{n'} (λ_n b)_{n'-D'}
//!
//! is the coefficient of a_{n'} b_{n'+D} after summing over translations.
//! The one-dimensional normal form is symmetric in the sign of D, so the
//! table entry is the average of the D and -D classes.

use super::{m_at, ControlParams1D};
use crate::error::{Error, Result};
use crate::scalar::{Exact, Scalar};
use std::collections::HashMap;

use super::coeffs::{CoeffTable, KernelCoeffs1D};

/// Smallest ring accepted by the oracle for interaction distance N.
pub fn min_ring_size(n: usize) -> usize {
    8 * n + 1
}

/// Entries (target, source, coefficient) of λ_site on a ring of size `ring`:
/// (λ_site α)_target = Σ coefficient · α_source.
pub(crate) fn vector_field_entries<T: Scalar>(
    m: &[T],
    site: usize,
    ring: usize,
) -> Vec<(usize, usize, T)> {
    let n = m.len() as i64;
    let l = ring as i64;
    let wrap = |x: i64| x.rem_euclid(l) as usize;
    let s = site as i64;
    let mut out = Vec::with_capacity(6 * m.len());
    for d in -n..=n {
        let md = m_at(m, d);
        if d == 0 || md == T::zero() {
            continue;
        }
        out.push((wrap(s - d), site, md));
        out.push((wrap(s - d), wrap(s + d), -md));
        out.push((site, wrap(s + d), md));
    }
    out
}

pub fn kernel_coeffs_oracle(p: &ControlParams1D, ring: usize) -> Result<KernelCoeffs1D> {
    oracle(p.values(), ring)
}

/// Oracle in exact rational arithmetic; `m` holds m(1..=N).
pub fn kernel_coeffs_oracle_exact(m: &[Exact], ring: usize) -> Result<CoeffTable<Exact>> {
    oracle(m, ring)
}

fn oracle<T: Scalar>(m: &[T], ring: usize) -> Result<CoeffTable<T>> {
    let n = m.len();
    if n == 0 {
        return Err(Error::InvalidControls("N must be positive".into()));
    }
    if ring < min_ring_size(n) {
        return Err(Error::InvalidInput(format!(
            "ring size {ring} is below {} for N = {n}",
            min_ring_size(n)
        )));
    }
    let l = ring as i64;
    let centered = |x: i64| {
        let r = x.rem_euclid(l);
        if r > l / 2 {
            r - l
        } else {
            r
        }
    };

    let mut raw: HashMap<(i64, i64), T> = HashMap::new();
    for site in 0..ring {
        let entries = vector_field_entries(m, site, ring);
        for &(t1, _, c1) in entries.iter().filter(|e| e.1 == 0) {
            for &(t2, q, c2) in &entries {
                let dp = centered(t1 as i64 - t2 as i64);
                let d = centered(q as i64);
                *raw.entry((d, dp)).or_insert_with(T::zero) += (c1 * c2).half();
            }
        }
    }

    let r = 2 * n as i64;
    if let Some(((d, dp), _)) = raw
        .iter()
        .find(|((d, dp), v)| (d.abs() > r || dp.abs() > r) && **v != T::zero())
    {
        return Err(Error::Mismatch(format!(
            "oracle found a coefficient outside |d|, |d'| <= 2N at ({d}, {dp})"
        )));
    }

    let get = |d: i64, dp: i64| raw.get(&(d, dp)).copied().unwrap_or_else(T::zero);
    let mut table = CoeffTable::zeros(n);
    for d in 0..=r {
        for dp in 0..=r {
            let v = if d == 0 {
                get(0, dp)
            } else {
                (get(d, dp) + get(-d, dp)).half()
            };
            table.set(d as usize, dp as usize, v);
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel1d::kernel_coeffs;

    #[test]
    fn canonical_agrees_with_closed_form() {
        let p = ControlParams1D::new(3, vec![0.0, 1.0, 2.0]).unwrap();
        let a = kernel_coeffs(&p).unwrap();
        let b = kernel_coeffs_oracle(&p, 25).unwrap();
        for d in 0..=6 {
            for dp in 0..=6 {
                assert!((a.get(d, dp) - b.get(d, dp)).abs() < 1e-12, "({d},{dp})");
            }
        }
    }

    #[test]
    fn zero_controls() {
        let p = ControlParams1D::zeros(2).unwrap();
        assert_eq!(kernel_coeffs_oracle(&p, 17).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn row_sums_vanish_for_n2() {
        let p = ControlParams1D::new(2, vec![0.0, 1.0]).unwrap();
        let k = kernel_coeffs_oracle(&p, 17).unwrap();
        for dp in -4..=4 {
            assert!(k.row_sum(dp).abs() < 1e-14);
        }
    }

    #[test]
    fn small_ring_rejected() {
        let p = ControlParams1D::new(3, vec![0.0, 1.0, 2.0]).unwrap();
        assert!(matches!(kernel_coeffs_oracle(&p, 24), Err(Error::InvalidInput(_))));
    }
}
