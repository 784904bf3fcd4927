use nsclab_core::evolve::{source_terms, ImexStepper};
use nsclab_core::model::{ModelKind, ModelSpec};
use nsclab_core::spectral::{Grid, SpectralField, State};
use nsclab_oracles::mms::{Coeffs, Mms1d};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;

fn coeffs(spec: &ModelSpec) -> Coeffs {
    Coeffs {
        alpha: spec.alpha,
        beta: spec.beta,
        gamma: spec.gamma,
        kappa: spec.kappa,
        eps: spec.eps,
        visc_mu: spec.visc_mu,
        visc_lam: spec.visc_lam,
    }
}

fn mms() -> Mms1d {
    Mms1d {
        amp: [0.1, 0.08, 0.06, 0.05],
        k: [1.0, 2.0, 1.0, 1.0],
        phase: [0.0, 0.4, -0.3, 1.1],
        omega: [1.0, 1.5, 0.7, 2.0],
    }
}

fn sample(grid: Grid, t: f64, f: impl Fn(f64, f64) -> [f64; 4]) -> State {
    let vals: Vec<[f64; 4]> = (0..grid.len()).map(|i| f(grid.point(i)[0], t)).collect();
    let comps: Vec<SpectralField> = (0..4)
        .map(|c| SpectralField::from_real(grid, &vals.iter().map(|v| v[c]).collect::<Vec<_>>()).unwrap())
        .collect();
    State::from_components(grid, comps, t).unwrap()
}

fn mms_error(spec: &ModelSpec, grid: Grid, t_end: f64, nsteps: usize) -> f64 {
    let m = mms();
    let c = coeffs(spec);
    let forcing = Arc::new(move |t: f64| sample(grid, t, |x, t| m.forcing(&c, x, t)));
    let stepper = ImexStepper::new(spec, grid, t_end / nsteps as f64).unwrap().with_forcing(forcing);
    let s0 = sample(grid, 0.0, |x, t| m.exact(x, t));
    let mut s = s0;
    for _ in 0..nsteps {
        s = stepper.step(&s).unwrap();
    }
    let exact = sample(grid, t_end, |x, t| m.exact(x, t));
    s.sub(&exact).l2_norm()
}

#[test]
fn manufactured_solution_second_order() {
    let spec = ModelSpec::unit(ModelKind::Nsc, 1, 0.5);
    let grid = Grid::new(1, 128, 2.0 * PI).unwrap();
    let errs: Vec<f64> = [50, 100, 200].iter().map(|&n| mms_error(&spec, grid, 0.5, n)).collect();
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    eprintln!("errors {errs:?} orders {orders:?}");
    assert!(orders.iter().all(|p| (1.8..=2.2).contains(p)), "{orders:?}");
    assert!(errs[2] <= 1e-6, "{errs:?}");
}

#[test]
fn sources_match_closed_form() {
    let spec = ModelSpec::unit(ModelKind::Nsc, 1, 0.5);
    let grid = Grid::new(1, 128, 2.0 * PI).unwrap();
    let m = mms();
    let c = coeffs(&spec);
    let s = sample(grid, 0.3, |x, t| m.exact(x, t));
    let got = source_terms(&s, &spec).unwrap();
    let want = sample(grid, 0.3, |x, t| m.sources(&c, x, t));
    let diff = [got.f.sub(&want.a), got.g[0].sub(&want.v[0]), got.h.sub(&want.theta), got.i[0].sub(&want.q[0])];
    for d in diff {
        assert!(d.l2_norm() <= 1e-12, "{}", d.l2_norm());
    }
}

#[test]
fn density_mean_conserved() {
    let spec = ModelSpec::unit(ModelKind::Nsc, 2, 0.3);
    let grid = Grid::new(2, 32, 2.0 * PI).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut s = State::zeros(grid);
    for c in s.components_mut() {
        *c = SpectralField::random_hermitian(grid, &mut rng, 4.0).scale(0.05);
    }
    s.a.coeffs[0] = num_complex::Complex64::from(0.02);
    let stepper = ImexStepper::new(&spec, grid, 1e-3).unwrap();
    let mut prev = s.a.mean().re;
    for _ in 0..20 {
        s = stepper.step(&s).unwrap();
        let m = s.a.mean().re;
        assert!((m - prev).abs() <= 1e-10);
        prev = m;
    }
}

#[test]
fn sources_are_quadratic() {
    let spec = ModelSpec::unit(ModelKind::Nsc, 2, 0.3);
    let grid = Grid::new(2, 16, 2.0 * PI).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut s = State::zeros(grid);
    for c in s.components_mut() {
        *c = SpectralField::random_hermitian(grid, &mut rng, 3.0);
    }
    let lams = [1e-4, 1e-3, 1e-2];
    let ys: Vec<f64> = lams.iter().map(|&l| source_terms(&s.scale(l), &spec).unwrap().l2_norm().ln()).collect();
    let slope = (ys[2] - ys[0]) / (lams[2].ln() - lams[0].ln());
    assert!((slope - 2.0).abs() <= 0.1, "{slope}");
}
