use super::coeffs::KernelCoeffs1D;
use crate::chain_sim::Coupling;
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Midpoint grid on the torus [-1/2, 1/2): k_j = (j + 1/2)/G - 1/2.
///
/// G is even, so the nodes are symmetric under k → -k and none equals 0.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusGrid {
    nodes: Vec<f64>,
}

impl TorusGrid {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || size % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "torus grid size must be positive and even, got {size}"
            )));
        }
        let g = size as f64;
        let nodes = (0..size).map(|j| (j as f64 + 0.5) / g - 0.5).collect();
        Ok(Self { nodes })
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Quadrature weight 1/G of the midpoint rule.
    pub fn weight(&self) -> f64 {
        1.0 / self.nodes.len() as f64
    }
}

/// Σ_{|d|, |d'| ≤ 2N} K(d, d') cos(2πdk) cos(2πd'k2).
pub fn eval_kernel(c: &KernelCoeffs1D, k: f64, k2: f64) -> f64 {
    let r = c.radius() as i64;
    let mut total = 0.0;
    for d in 0..=r {
        let wd = if d == 0 { 1.0 } else { 2.0 };
        let cd = (2.0 * PI * d as f64 * k).cos();
        let mut inner = 0.0;
        for dp in 0..=r {
            let wdp = if dp == 0 { 1.0 } else { 2.0 };
            inner += wdp * c.get(d, dp) * (2.0 * PI * dp as f64 * k2).cos();
        }
        total += wd * cd * inner;
    }
    total
}

/// Row-major G×G matrix of K̂(k_i, k_j) over the grid nodes.
pub fn kernel_matrix(c: &KernelCoeffs1D, grid: &TorusGrid) -> Vec<f64> {
    let r = c.radius();
    let g = grid.size();
    let weight = |d: usize| if d == 0 { 1.0 } else { 2.0 };
    let cosines: Vec<Vec<f64>> = (0..=r)
        .map(|d| {
            grid.nodes()
                .iter()
                .map(|&k| weight(d) * (2.0 * PI * d as f64 * k).cos())
                .collect()
        })
        .collect();
    // inner[d][j] = Σ_{d'} w_d' K(d, d') cos(2πd'k_j)
    let inner: Vec<Vec<f64>> = (0..=r)
        .map(|d| {
            (0..g)
                .map(|j| {
                    (0..=r)
                        .map(|dp| c.get(d as i64, dp as i64) * cosines[dp][j])
                        .sum()
                })
                .collect()
        })
        .collect();
    let mut out = vec![0.0; g * g];
    for i in 0..g {
        for d in 0..=r {
            let cdi = cosines[d][i];
            if cdi == 0.0 {
                continue;
            }
            let row = &mut out[i * g..(i + 1) * g];
            for (o, v) in row.iter_mut().zip(&inner[d]) {
                *o += cdi * v;
            }
        }
    }
    out
}

/// O_col S(k) = 2 ∫ K̂(k, k') (S(k') - S(k)) dk' on the grid nodes.
pub fn collision_apply(c: &KernelCoeffs1D, s: &[f64], grid: &TorusGrid) -> Result<Vec<f64>> {
    crate::kinetic::CollisionOperator::new(c, grid)?.apply(s)
}

/// max over grid nodes of |K̂(k, k')| / ω(k).
pub fn bound_ratio(c: &KernelCoeffs1D, coupling: &Coupling, grid: &TorusGrid) -> f64 {
    let g = grid.size();
    let mat = kernel_matrix(c, grid);
    let mut best: f64 = 0.0;
    for (i, &k) in grid.nodes().iter().enumerate() {
        let w = coupling.omega(k);
        let row_max = mat[i * g..(i + 1) * g]
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max);
        best = best.max(row_max / w);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel1d::{kernel_coeffs, ControlParams1D};

    fn canonical() -> KernelCoeffs1D {
        kernel_coeffs(&ControlParams1D::new(3, vec![0.0, 1.0, 2.0]).unwrap()).unwrap()
    }

    #[test]
    fn grid_is_symmetric_and_avoids_zero() {
        let g = TorusGrid::new(16).unwrap();
        let n = g.nodes();
        for j in 0..16 {
            assert!(n[j] != 0.0);
            assert!((n[j] + n[15 - j]).abs() < 1e-15);
        }
        assert!(TorusGrid::new(15).is_err());
    }

    #[test]
    fn kernel_vanishes_at_origin() {
        let c = canonical();
        for k2 in [-0.4, -0.1, 0.0, 0.23, 0.5] {
            assert!(eval_kernel(&c, 0.0, k2).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_symmetries() {
        let c = canonical();
        let (k, k2) = (0.17, -0.31);
        let v = eval_kernel(&c, k, k2);
        assert!((v - eval_kernel(&c, -k, k2)).abs() < 1e-12);
        assert!((v - eval_kernel(&c, k2, k)).abs() < 1e-12);
    }

    #[test]
    fn quarter_point_value() {
        // At k = k2 = 1/4 the cosines are 1, 0, -1, 0, 1, 0, -1 for d = 0..6.
        let c = canonical();
        let phase = |d: i64| match d.rem_euclid(4) {
            0 => 1.0,
            2 => -1.0,
            _ => 0.0,
        };
        let mut direct = 0.0;
        for d in -6..=6 {
            for dp in -6..=6 {
                direct += c.get(d, dp) * phase(d) * phase(dp);
            }
        }
        assert!((eval_kernel(&c, 0.25, 0.25) - direct).abs() < 1e-12);
        assert!((direct - 16.0).abs() < 1e-12);
    }

    #[test]
    fn matrix_matches_pointwise_eval() {
        let c = canonical();
        let grid = TorusGrid::new(12).unwrap();
        let mat = kernel_matrix(&c, &grid);
        for (i, &k) in grid.nodes().iter().enumerate() {
            for (j, &k2) in grid.nodes().iter().enumerate() {
                assert!((mat[i * 12 + j] - eval_kernel(&c, k, k2)).abs() < 1e-11);
            }
        }
    }
}
