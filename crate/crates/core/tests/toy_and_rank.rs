use nsclab_core::model::*;
use nsclab_oracles::{bareiss_rank, dyadic_integer_matrix, quadratic_roots};
use num_bigint::BigInt;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn char_roots(m: &nsclab_core::linalg::CMat) -> [Complex64; 2] {
    // z² − tr z + det
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    quadratic_roots(Complex64::from(1.0), -tr, det)
}

fn match_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let d1 = (a[0] - b[0]).norm().max((a[1] - b[1]).norm());
    let d2 = (a[0] - b[1]).norm().max((a[1] - b[0]).norm());
    d1.min(d2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn toy_eigenvalues_match_quadratic(xi in -1e3..1e3f64, eps in 1e-3..1.0f64) {
        for kind in [ModelKind::ToyPartDamp, ModelKind::ToyPartDiff, ModelKind::CattaneoWave] {
            let spec = ModelSpec::unit(kind, 1, eps);
            let m = symbol(&spec, &[xi]).unwrap();
            let ev = eigenvalues(&m).unwrap();
            let want = char_roots(&m.entries);
            let scale = want.iter().map(|z| z.norm()).fold(1.0, f64::max);
            prop_assert!(match_distance(&ev, &want) <= 1e-10 * scale, "{kind:?}: {ev:?} vs {want:?}");
        }
    }
}

#[test]
fn toy_regimes() {
    for eps in [1e-3, 1e-2, 1e-1] {
        let spec = ModelSpec::unit(ModelKind::ToyPartDamp, 1, eps);
        let low: Vec<f64> = (0..20).map(|k| 1e-2 / eps * (k as f64 + 1.0) / 20.0).collect();
        for &x in &low {
            let ev = eigenvalues(&symbol(&spec, &[x]).unwrap()).unwrap();
            let heat = -spec.heat_rate() * x * x;
            assert!((ev[0].re - heat).abs() <= 0.01 * heat.abs(), "eps {eps} xi {x}");
        }
        let high: Vec<f64> = (0..20).map(|k| 1e2 / eps * (1.0 + k as f64)).collect();
        for &x in &high {
            let ev = eigenvalues(&symbol(&spec, &[x]).unwrap()).unwrap();
            let want = -spec.alpha / (2.0 * eps * eps);
            assert!(ev.iter().all(|z| (z.re - want).abs() <= 0.01 * want.abs() && z.im != 0.0));
        }
        let xs: Vec<f64> = (0..400).map(|k| 10f64.powf(-3.0 + 8.0 * k as f64 / 399.0) / eps).collect();
        assert_eq!(toy_regime_scan(&spec, &xs).unwrap().transitions, 1);
    }
}

fn int_matmul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    a.iter()
        .map(|row| (0..b[0].len()).map(|j| row.iter().zip(b).map(|(x, brow)| x * &brow[j]).sum()).collect())
        .collect()
}

/// Rank of `[D; DA; …; DA^{n−1}]` in exact integer arithmetic.
fn oracle_rank(spec: &ModelSpec, omega: &[f64]) -> usize {
    let (a, d) = kalman_pair(spec, omega);
    let n = a.len();
    let ai = dyadic_integer_matrix(&a);
    let di = dyadic_integer_matrix(&d);
    let mut rows = Vec::new();
    let mut block = di;
    for _ in 0..n {
        rows.extend(block.iter().cloned());
        block = int_matmul(&block, &ai);
    }
    bareiss_rank(rows)
}

fn random_direction<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 {
            let u: Vec<f64> = v.iter().map(|x| x / n).collect();
            if (u.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() < 1e-13 {
                return u;
            }
        }
    }
}

#[test]
fn kalman_rank_matches_bareiss() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for d in 1..=3 {
        let base = ModelSpec::unit(ModelKind::Nsc, d, 0.1);
        let mut no_kappa = base;
        no_kappa.kappa = 0.0;
        let mut no_diss = base;
        no_diss.visc_mu = 0.0;
        no_diss.visc_lam = 0.0;
        no_diss.alpha = 0.0;
        for _ in 0..10 {
            let w = random_direction(&mut rng, d);
            for (spec, full) in [(base, true), (no_kappa, false), (no_diss, false)] {
                let r = kalman_rank(&spec, &w).unwrap();
                assert_eq!(r.rank, oracle_rank(&spec, &w), "d {d} {spec:?}");
                assert_eq!(r.full, full);
            }
        }
    }
}

#[test]
fn numeric_rank_agrees_for_unit_eps() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spec = ModelSpec::unit(ModelKind::Nsc, 2, 1.0);
    for _ in 0..5 {
        let w = random_direction(&mut rng, 2);
        assert_eq!(kalman_rank_numeric(&spec, &w).unwrap(), spec.size());
    }
}
