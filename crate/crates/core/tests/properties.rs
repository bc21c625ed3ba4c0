use lattice_kernel::achievable::{basis_polys, l_coeffs, synthesize_controls, verify_target};
use lattice_kernel::kernel1d::{
    conservation_check_1d, eval_kernel, kernel_coeffs, kernel_coeffs_oracle, min_ring_size,
    ControlParams1D, KernelCoeffs1D, TorusGrid,
};
use lattice_kernel::kernel_nd::{
    dual_index_coeffs, eval_kernel_nd, nd_coeffs_oracle_dual, nd_coeffs_oracle_simple,
    simple_index_coeffs, DualIndexControls, SimpleIndexControls,
};
use lattice_kernel::kinetic::{evolve_homogeneous, SpectralDensity};
use lattice_kernel::lattice_nd::{
    ball, count_paths_through, enumerate_paths, l1_norm, reflect, PartIndex, PathFamily,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn controls() -> impl Strategy<Value = ControlParams1D> {
    (1usize..=6).prop_flat_map(|n| {
        prop::collection::vec(-3.0f64..3.0, n - n / 2).prop_map(move |free| {
            let mut m = vec![0.0; n / 2];
            m.extend(free);
            ControlParams1D::new(n, m).unwrap()
        })
    })
}

fn max_diff(a: &KernelCoeffs1D, b: &KernelCoeffs1D) -> f64 {
    let r = a.radius() as i64;
    let mut worst: f64 = 0.0;
    for d in -r..=r {
        for dp in -r..=r {
            worst = worst.max((a.get(d, dp) - b.get(d, dp)).abs());
        }
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closed_form_matches_oracle(p in controls()) {
        let a = kernel_coeffs(&p).unwrap();
        let b = kernel_coeffs_oracle(&p, min_ring_size(p.n())).unwrap();
        prop_assert!(max_diff(&a, &b) < 1e-10);
    }

    #[test]
    fn rows_sum_to_zero(p in controls()) {
        let c = kernel_coeffs(&p).unwrap();
        let r = c.radius() as i64;
        for dp in -r..=r {
            prop_assert!(c.row_sum(dp).abs() < 1e-10, "d' = {dp}");
        }
    }

    #[test]
    fn coefficients_are_quadratic(p in controls(), s in -2.0f64..2.0) {
        let scaled = ControlParams1D::new(p.n(), p.values().iter().map(|v| s * v).collect()).unwrap();
        let a = kernel_coeffs(&p).unwrap();
        let b = kernel_coeffs(&scaled).unwrap();
        let r = a.radius() as i64;
        for d in -r..=r {
            for dp in -r..=r {
                prop_assert!((b.get(d, dp) - s * s * a.get(d, dp)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn kernel_is_even_in_each_argument(p in controls(), k in -0.5f64..0.5, k2 in -0.5f64..0.5) {
        let c = kernel_coeffs(&p).unwrap();
        let v = eval_kernel(&c, k, k2);
        prop_assert!((eval_kernel(&c, -k, k2) - v).abs() < 1e-9);
        prop_assert!((eval_kernel(&c, k, -k2) - v).abs() < 1e-9);
    }

    #[test]
    fn chebyshev_form_reproduces_kernel(p in controls()) {
        let c = kernel_coeffs(&p).unwrap();
        let grid = TorusGrid::new(32).unwrap();
        prop_assert!(verify_target(&p, &l_coeffs(&c), &grid).unwrap() < 1e-9);
    }

    #[test]
    fn basis_combination_matches_synthesis(n in 1usize..=5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nfree = n - n / 2;
        let c: Vec<f64> = (0..nfree).map(|_| rand::Rng::random_range(&mut rng, -2.0..2.0)).collect();
        let v = basis_polys(n).unwrap().combine(&c).unwrap();
        let p = synthesize_controls(n, &c).unwrap();
        let direct = l_coeffs(&kernel_coeffs(&p).unwrap());
        let side = v.side();
        for d1 in 0..side {
            for d2 in 0..side {
                prop_assert!((v.get(d1, d2) - direct.get(d1, d2)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn noise_conserves_momentum_and_energy(p in controls(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert!(conservation_check_1d(&p, 4, &mut rng) < 1e-12);
    }

    #[test]
    fn homogeneous_flow_conserves_mass(p in controls(), shift in 0.0f64..1.0) {
        let c = kernel_coeffs(&p).unwrap();
        let g = (8 * p.n()).max(32);
        let grid = TorusGrid::new(g).unwrap();
        let nu0 = SpectralDensity::from_fn(grid, |k| 1.0 + (2.0 * std::f64::consts::PI * (k + shift)).cos().powi(2)).unwrap();
        let nu = evolve_homogeneous(&nu0, &c, 0.5, 1e-3).unwrap();
        prop_assert!((nu.mass() - nu0.mass()).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn path_counts_match_enumeration(dim in 1usize..=3, n in 1usize..=4, part_seed in any::<usize>()) {
        let part = PartIndex::new(dim, part_seed % (1 << dim)).unwrap();
        let paths = enumerate_paths(dim, n, part).unwrap();
        for d in ball(dim, n) {
            if l1_norm(&d) == 0 || !part.contains(&d) {
                continue;
            }
            let norm = l1_norm(&d);
            let seen = paths.iter().filter(|p| p.point(norm) == d.as_slice()).count() as u128;
            prop_assert_eq!(seen, count_paths_through(dim, n, part, &d).unwrap());
        }
    }

    #[test]
    fn reflection_is_an_involution(dim in 1usize..=3, n in 1usize..=4) {
        let family = PathFamily::new(dim, n).unwrap();
        for (idx, path) in family.paths().iter().enumerate() {
            let back = reflect(&reflect(path));
            prop_assert_eq!(back.points(), path.points());
            prop_assert_eq!(family.partner(family.partner(idx)), idx);
        }
    }

    #[test]
    fn simple_index_oracle_agrees(n in 1usize..=2, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = SimpleIndexControls::random(2, n, &mut rng).unwrap();
        let a = simple_index_coeffs(&c).unwrap();
        let b = nd_coeffs_oracle_simple(&c, 8 * n + 1).unwrap();
        prop_assert!(a.max_abs_diff(&b) < 1e-10);
        for sums in a.row_sums().values() {
            prop_assert!(sums.iter().all(|s| s.abs() < 1e-10));
        }
    }

    #[test]
    fn simple_kernel_even_under_joint_negation(n in 1usize..=3, seed in any::<u64>(), k in prop::array::uniform2(-0.5f64..0.5), k2 in prop::array::uniform2(-0.5f64..0.5)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = simple_index_coeffs(&SimpleIndexControls::random(2, n, &mut rng).unwrap()).unwrap();
        let a = eval_kernel_nd(&c, &k, &k2);
        let b = eval_kernel_nd(&c, &[-k[0], -k[1]], &[-k2[0], -k2[1]]);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn dual_index_oracle_agrees(n in 1usize..=2, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = DualIndexControls::random(2, n, &mut rng).unwrap();
        let a = dual_index_coeffs(&c).unwrap();
        let b = nd_coeffs_oracle_dual(&c, 8 * n + 1).unwrap();
        for (pair, t) in &a {
            prop_assert!(t.max_abs_diff(&b[pair]) < 1e-10);
            for sums in t.row_sums().values() {
                prop_assert!(sums[0].abs() < 1e-9);
            }
        }
    }
}
