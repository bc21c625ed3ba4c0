//! Kernel coefficients for d-dimensional controls.
//!
//! Two families of controls are supported. Simple-index controls attach a
//! vector M_γ(dd) ∈ R^d to every path and distance; the resulting
//! coefficients are d×d matrices. Dual-index controls attach a scalar
//! M^{i,j}_γ(dd) to an ordered pair of components; each pair yields a scalar
//! table.
//!
//! Both have a closed form and a brute-force oracle that expands the
//! quadratic form of the vector fields on a finite torus.

mod controls;
mod dual;
mod simple;

pub use controls::{DualIndexControls, DualPair, SimpleIndexControls};
pub use dual::{
    conservation_check_dual, conservation_check_dual_weights, dual_field_apply,
    dual_index_coeffs, nd_coeffs_oracle_dual,
};
pub use simple::{
    conservation_check_simple, conservation_check_simple_expanded, nd_coeffs_oracle_simple,
    simple_field_entries, simple_index_coeffs,
};

use crate::lattice_nd::Point;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Smallest torus side accepted by the oracles.
pub fn min_torus_side(n: usize) -> usize {
    8 * n + 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NdVariant {
    /// d×d matrix per (D, D'); entry (row j, column i) is [K(D,D')]_{j,i},
    /// the weight of [α_{n'}]_i [α_{n'+D}]_j.
    Simple,
    /// Scalar per (D, D') for the ordered component pair (i, j).
    Dual { i: usize, j: usize },
}

/// Sparse table of d-dimensional coefficients keyed by (D, D').
#[derive(Clone, Debug, PartialEq)]
pub struct KernelCoeffsND {
    dim: usize,
    n: usize,
    variant: NdVariant,
    table: BTreeMap<(Point, Point), Vec<f64>>,
}

impl KernelCoeffsND {
    pub fn new(dim: usize, n: usize, variant: NdVariant) -> Self {
        Self {
            dim,
            n,
            variant,
            table: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn variant(&self) -> NdVariant {
        self.variant
    }

    /// Values per entry: d² for simple tables, 1 for dual ones.
    pub fn width(&self) -> usize {
        match self.variant {
            NdVariant::Simple => self.dim * self.dim,
            NdVariant::Dual { .. } => 1,
        }
    }

    /// Stores `value` unless it is identically zero.
    pub(crate) fn insert(&mut self, d: Point, dp: Point, value: Vec<f64>) {
        debug_assert_eq!(value.len(), self.width());
        if value.iter().any(|&v| v != 0.0) {
            self.table.insert((d, dp), value);
        }
    }

    pub fn get(&self, d: &[i64], dp: &[i64]) -> Vec<f64> {
        self.table
            .get(&(d.to_vec(), dp.to_vec()))
            .cloned()
            .unwrap_or_else(|| vec![0.0; self.width()])
    }

    /// Nonzero entries in key order.
    pub fn entries(&self) -> impl Iterator<Item = (&Point, &Point, &[f64])> {
        self.table.iter().map(|((d, dp), v)| (d, dp, v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.table
            .values()
            .flatten()
            .map(|v| v.abs())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise difference over the union of both key sets.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for ((d, dp), v) in &self.table {
            let w = other.get(d, dp);
            for (a, b) in v.iter().zip(&w) {
                worst = worst.max((a - b).abs());
            }
        }
        for ((d, dp), w) in &other.table {
            if !self.table.contains_key(&(d.clone(), dp.clone())) {
                worst = worst.max(w.iter().map(|x| x.abs()).fold(0.0, f64::max));
            }
        }
        worst
    }

    /// Σ_D K(D, D') for each stored D'.
    pub fn row_sums(&self) -> BTreeMap<Point, Vec<f64>> {
        let mut out: BTreeMap<Point, Vec<f64>> = BTreeMap::new();
        for ((_, dp), v) in &self.table {
            let acc = out.entry(dp.clone()).or_insert_with(|| vec![0.0; v.len()]);
            for (a, x) in acc.iter_mut().zip(v) {
                *a += x;
            }
        }
        out
    }
}

fn dot(a: &[i64], k: &[f64]) -> f64 {
    a.iter().zip(k).map(|(&x, &y)| x as f64 * y).sum()
}

/// Simple: Σ K(D,D') cos(2π(D·k + D'·k2)), a d×d matrix in the table's
/// (row j, column i) layout. Dual: Σ K(D,D') cos(2πD·k) cos(2πD'·k2), a
/// single value.
pub fn eval_kernel_nd(c: &KernelCoeffsND, k: &[f64], k2: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; c.width()];
    for (d, dp, v) in c.entries() {
        let w = match c.variant {
            NdVariant::Simple => (2.0 * PI * (dot(d, k) + dot(dp, k2))).cos(),
            NdVariant::Dual { .. } => (2.0 * PI * dot(d, k)).cos() * (2.0 * PI * dot(dp, k2)).cos(),
        };
        for (o, x) in out.iter_mut().zip(v) {
            *o += w * x;
        }
    }
    out
}

/// Minimal representative of x modulo `side` in each coordinate.
pub(crate) fn wrap(x: &[i64], side: usize) -> Point {
    let l = side as i64;
    x.iter()
        .map(|&v| {
            let r = v.rem_euclid(l);
            if r > l / 2 {
                r - l
            } else {
                r
            }
        })
        .collect()
}

pub(crate) fn add(a: &[i64], b: &[i64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub(crate) fn sub(a: &[i64], b: &[i64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn neg(a: &[i64]) -> Point {
    a.iter().map(|x| -x).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_is_minimal() {
        assert_eq!(wrap(&[9, -9, 4, -4], 9), vec![0, 0, 4, -4]);
        assert_eq!(wrap(&[5, -5], 9), vec![-4, 4]);
    }

    #[test]
    fn empty_table_evaluates_to_zero() {
        let c = KernelCoeffsND::new(2, 2, NdVariant::Simple);
        assert_eq!(eval_kernel_nd(&c, &[0.1, 0.2], &[0.3, -0.1]), vec![0.0; 4]);
    }

    #[test]
    fn diff_covers_both_key_sets() {
        let mut a = KernelCoeffsND::new(1, 1, NdVariant::Dual { i: 0, j: 1 });
        let mut b = a.clone();
        a.insert(vec![1], vec![0], vec![2.0]);
        b.insert(vec![0], vec![1], vec![-3.0]);
        assert_eq!(a.max_abs_diff(&b), 3.0);
        assert_eq!(b.max_abs_diff(&a), 3.0);
    }
}
