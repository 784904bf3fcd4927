use nsclab_core::besov::*;
use nsclab_core::spectral::*;
use nsclab_oracles::cyclic_convolution;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid_strategy() -> impl Strategy<Value = Grid> {
    (1usize..=3, prop::sample::select(vec![8usize, 16]), 0.5..20.0f64)
        .prop_filter("keep 3d grids small", |(d, n, _)| !(*d == 3 && *n == 16))
        .prop_map(|(d, n, l)| Grid::new(d, n, l).unwrap())
}

fn field(grid: Grid, seed: u64, kmax: f64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SpectralField::random_hermitian(grid, &mut rng, kmax)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parseval(grid in grid_strategy(), seed in any::<u64>()) {
        let f = field(grid, seed, f64::INFINITY);
        let phys = f.to_physical();
        let direct = (grid.cell_volume() * phys.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
        prop_assert!((f.l2_norm() - direct).abs() <= 1e-12 * direct.max(1e-300));
        prop_assert!((f.lp_norm(2.0) - direct).abs() <= 1e-12 * direct.max(1e-300));
    }

    #[test]
    fn real_fields_are_hermitian(grid in grid_strategy(), seed in any::<u64>()) {
        let f = field(grid, seed, f64::INFINITY);
        let g = field(grid, seed ^ 0x9e37, f64::INFINITY);
        prop_assert!(f.hermitian_defect() <= 1e-15);
        let prod: Vec<f64> = f.to_physical_real().iter().zip(g.to_physical_real()).map(|(a, b)| a * b).collect();
        let h = SpectralField::from_real(grid, &prod).unwrap();
        let scale = h.coeffs.iter().map(|z| z.norm()).fold(1e-300, f64::max);
        prop_assert!(h.hermitian_defect() <= 1e-13 * scale);
        prop_assert!(f.to_physical().iter().all(|z| z.im.abs() <= 1e-12 * scale.max(1.0) * 1e3));
        for j in 0..grid.d {
            prop_assert!(f.apply(Multiplier::Grad(j)).unwrap().hermitian_defect() <= 1e-12);
        }
    }

    #[test]
    fn dealias_idempotent(grid in grid_strategy(), seed in any::<u64>()) {
        let f = field(grid, seed, f64::INFINITY);
        let once = f.dealias_23();
        prop_assert_eq!(once.dealias_23(), once);
    }

    #[test]
    fn product_matches_convolution(seed in any::<u64>(), d in 1usize..=2) {
        let grid = Grid::new(d, 16, 6.0).unwrap();
        // band-limited to |m| < n/4 so the product is alias-free
        let kmax = 3.0 * grid.k0();
        let f = field(grid, seed, kmax);
        let g = field(grid, seed.wrapping_add(1), kmax);
        let prod: Vec<f64> = f.to_physical_real().iter().zip(g.to_physical_real()).map(|(a, b)| a * b).collect();
        let h = SpectralField::from_real(grid, &prod).unwrap();
        let want = cyclic_convolution(grid.n, d, &f.coeffs, &g.coeffs);
        for (a, b) in h.coeffs.iter().zip(&want) {
            prop_assert!((a - b).norm() <= 1e-13);
        }
    }

    #[test]
    fn bands_partition(grid in grid_strategy(), seed in any::<u64>()) {
        let f = field(grid, seed, f64::INFINITY);
        let mut sum = SpectralField::constant(grid, 0.0);
        sum.coeffs[0] = f.coeffs[0];
        let mut energy = f.coeffs[0].norm_sqr() * grid.volume();
        for j in grid_bands(&grid) {
            let p = band_project(&f, j);
            energy += p.l2_norm().powi(2);
            sum = sum.add(&p);
        }
        prop_assert_eq!(&sum, &f);
        prop_assert!((energy - f.l2_norm().powi(2)).abs() <= 1e-12 * energy);
    }

    #[test]
    fn dilation_shifts_bands(j in -40i32..40, frac in 0.0..1.0f64, k in -20i32..20) {
        let r = (j as f64).exp2() * (1.0 + frac * (1.0 - 1e-12));
        prop_assert_eq!(band_of_r(r), Some(j));
        prop_assert_eq!(band_of_r(r * (k as f64).exp2()), Some(j + k));
        prop_assert_eq!(band_of_r2(r * r), band_of_r(r));
    }

    #[test]
    fn seminorm_scaling(seed in any::<u64>(), s in -2.0..3.0f64) {
        // doubling the box halves every wavenumber: bands shift by −1
        let g1 = Grid::new(2, 16, 4.0).unwrap();
        let g2 = Grid::new(2, 16, 8.0).unwrap();
        let f1 = field(g1, seed, f64::INFINITY);
        let f2 = SpectralField { grid: g2, coeffs: f1.coeffs.clone() };
        let th = make_thresholds(8, 1.0, 1.0 / 64.0).unwrap();
        let n1 = besov_seminorm(&f1, s, 2.0, Regime::All, &th);
        let n2 = besov_seminorm(&f2, s, 2.0, Regime::All, &th);
        // ‖·‖_{L²} picks up the volume ratio 2
        prop_assert!((n2 - n1 * 2f64.powf(-s) * 2.0).abs() <= 1e-12 * n1);
    }

    #[test]
    fn derivative_of_mode(m in 1i64..3, l in 1.0..10.0f64) {
        let grid = Grid::new(1, 16, l).unwrap();
        let f = SpectralField::real_mode(grid, &[m], Complex64::new(0.0, -0.5));
        let df = f.apply(Multiplier::Grad(0)).unwrap().to_physical_real();
        let k = 2.0 * std::f64::consts::PI * m as f64 / l;
        for (i, v) in df.iter().enumerate() {
            let x = grid.point(i)[0];
            prop_assert!((v - k * (k * x).cos()).abs() <= 1e-12 * k.max(1.0));
        }
    }
}

#[test]
fn bernstein_holds_on_random_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let grid = Grid::new(2, 32, 2.0 * std::f64::consts::PI).unwrap();
    let th = make_thresholds(2, 1.0, 1.0 / 8.0).unwrap();
    for kind in BernsteinKind::ALL {
        for _ in 0..10 {
            let f = random_band_field(grid, &mut rng, 0, 4);
            for p in [2.0, 4.0] {
                let r = bernstein_check(&f, kind, 0.5, 1.0, p, &th, Convention::Disjoint).unwrap();
                assert!(!r.violated, "{kind:?} p {p}: ratio {}", r.ratio);
            }
        }
    }
}

#[test]
fn nonzero_mean_rejected_by_singular_multiplier() {
    let grid = Grid::new(1, 8, 1.0).unwrap();
    let f = SpectralField::constant(grid, 1.0);
    assert!(f.apply(Multiplier::InvNegLaplacian).is_err());
    assert!(f.apply(Multiplier::Grad(1)).is_err());
}
