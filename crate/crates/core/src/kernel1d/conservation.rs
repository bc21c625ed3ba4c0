use super::ControlParams1D;
use rand::Rng;

/// Changes of Σα and Σα² under λ_site for a signed table M(d),
/// `signed[d + N]` for d = -N..=N. The table need not be odd, which is how
/// violations are exercised.
pub fn field_residuals_raw(signed: &[f64], alpha: &[f64], site: usize) -> (f64, f64) {
    let n = (signed.len() / 2) as i64;
    let l = alpha.len() as i64;
    let at = |i: i64| i.rem_euclid(l) as usize;
    let s = site as i64;
    let (mut momentum, mut energy) = (0.0, 0.0);
    for d in -n..=n {
        let md = signed[(d + n) as usize];
        if d == 0 || md == 0.0 {
            continue;
        }
        let (a_s, a_f) = (alpha[at(s)], alpha[at(s + d)]);
        let back = md * (a_s - a_f);
        let here = md * a_f;
        momentum += back + here;
        energy += 2.0 * (alpha[at(s - d)] * back + a_s * here);
    }
    (momentum, energy)
}

/// Largest residual of local momentum or energy over `draws` random α on a
/// ring of size 4N + 1 and every site.
pub fn conservation_check_1d<R: Rng + ?Sized>(p: &ControlParams1D, draws: usize, rng: &mut R) -> f64 {
    let n = p.n() as i64;
    let signed: Vec<f64> = (-n..=n).map(|d| p.m(d)).collect();
    conservation_check_raw(&signed, draws, rng)
}

/// [`conservation_check_1d`] for a raw signed table.
pub fn conservation_check_raw<R: Rng + ?Sized>(signed: &[f64], draws: usize, rng: &mut R) -> f64 {
    let n = signed.len() / 2;
    let l = 4 * n + 1;
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let alpha: Vec<f64> = (0..l).map(|_| rng.random_range(-1.0..1.0)).collect();
        for site in 0..l {
            let (dp, de) = field_residuals_raw(signed, &alpha, site);
            worst = worst.max(dp.abs()).max(de.abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn odd_controls_conserve() {
        let p = ControlParams1D::new(3, vec![0.0, 1.0, 2.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(conservation_check_1d(&p, 20, &mut rng) < 1e-12);
    }

    #[test]
    fn even_part_breaks_energy() {
        // M(-3) = M(3) instead of -M(3)
        let signed = [2.0, 1.0, 0.0, 0.0, 0.0, 1.0, 2.0];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(conservation_check_raw(&signed, 5, &mut rng) > 1e-6);
    }

    #[test]
    fn zero_alpha_zero_residual() {
        let signed = [1.0, 0.0, 3.0];
        assert_eq!(field_residuals_raw(&signed, &[0.0; 5], 2), (0.0, 0.0));
    }
}
