//! Acceptance suite: one PASS/FAIL line per criterion. Always exits 0; the
//! lines are the result.

use nsclab::StudyName;
use nsclab_core::evolve::{propagate_mode, source_terms, ImexStepper};
use nsclab_core::model::{
    eigenvalues, kalman_pair, kalman_rank, reduced_symbol, symbol, toy_regime_scan, ModelKind, ModelSpec,
};
use nsclab_core::spectral::{Grid, SpectralField, State};
use nsclab_oracles::mms::{Coeffs, Mms1d};
use nsclab_oracles::ode::radau_linear;
use nsclab_oracles::{bareiss_rank, dyadic_integer_matrix, quadratic_roots};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

type C = Complex64;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn criterion(n: u32, title: &str, limit_s: f64, f: impl FnOnce() -> Outcome) {
    let start = Instant::now();
    let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        outcome(false, format!("panicked: {msg}"))
    });
    let secs = start.elapsed().as_secs_f64();
    let in_time = secs < limit_s;
    let verdict = if out.pass && in_time { "PASS" } else { "FAIL" };
    let limit = if limit_s.is_finite() { format!("limit {limit_s} s") } else { "no limit".into() };
    println!("criterion {n:>2} {verdict} {title} | {} | {secs:.2} s ({limit})", out.detail);
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

fn norm(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Runs a study through the CLI library and returns its parsed report.
fn run_study(dir: &Path, tag: &str, name: StudyName, config: &str) -> Value {
    let cfg = dir.join(format!("{tag}.toml"));
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join(tag);
    let r = nsclab::load(&cfg, name, None, Some(out.to_str().unwrap())).unwrap();
    nsclab::run(&r).unwrap();
    serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn propagator() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let eps = log_uniform(&mut rng, 1e-3, 1e-1);
        let r = log_uniform(&mut rng, 1e-2, 1e2);
        let t = rng.gen_range(0.0..10.0);
        let spec = ModelSpec::unit(ModelKind::Nsc, 3, eps);
        let m = reduced_symbol(&spec, r).unwrap();
        let rows: Vec<Vec<C>> = (0..4).map(|i| (0..4).map(|j| m.entries[(i, j)]).collect()).collect();
        let u0: Vec<C> = (0..4).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let got = propagate_mode(&m, &u0, t).unwrap();
        let (want, _) = radau_linear(&rows, &u0, t, 1e-16 * norm(&u0), 1e-12);
        let diff: Vec<C> = got.iter().zip(&want).map(|(a, b)| a - b).collect();
        worst = worst.max(norm(&diff) / norm(&want).max(1e-6 * norm(&u0)));
    }
    outcome(worst <= 1e-8, format!("max relative error {worst:.2e} over 100 blocks (tol 1e-8)"))
}

fn toy_regimes() -> Outcome {
    let mut worst_heat = 0.0f64;
    let mut worst_damp = 0.0f64;
    let mut worst_oracle = 0.0f64;
    let mut transitions = Vec::new();
    let mut crossing_ok = true;
    for eps in [1e-3, 1e-2, 1e-1] {
        let spec = ModelSpec::unit(ModelKind::ToyPartDamp, 1, eps);
        let (a, bk) = (spec.alpha, spec.beta * spec.kappa);
        let e2 = eps * eps;
        let oracle = |x: f64| quadratic_roots(C::from(1.0), C::from(a / e2), C::from(bk * x * x / e2));
        for k in 1..=20 {
            let x = 1e-2 / eps * k as f64 / 20.0;
            let ev = eigenvalues(&symbol(&spec, &[x]).unwrap()).unwrap();
            let slow = ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
            let heat = -spec.heat_rate() * x * x;
            worst_heat = worst_heat.max((slow - heat).abs() / heat.abs());
            let o = oracle(x).iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
            worst_oracle = worst_oracle.max((slow - o).abs() / o.abs());
        }
        for k in 1..=20 {
            let x = 1e2 / eps * k as f64;
            let ev = eigenvalues(&symbol(&spec, &[x]).unwrap()).unwrap();
            let want = -a / (2.0 * e2);
            for z in &ev {
                worst_damp = worst_damp.max((z.re - want).abs() / want.abs());
            }
        }
        let xs: Vec<f64> = (0..400).map(|k| 10f64.powf(-3.0 + 8.0 * k as f64 / 399.0) / eps).collect();
        let scan = toy_regime_scan(&spec, &xs).unwrap();
        transitions.push(scan.transitions);
        // the discriminant vanishes at ξ* = α/(2ε√(βκ))
        let star = a / (2.0 * eps * bk.sqrt());
        let at = scan.kinds.windows(2).position(|w| w[0] != w[1]);
        crossing_ok &= at.is_some_and(|i| xs[i] <= star * 1.0001 && xs[i + 1] >= star * 0.9999);
    }
    let pass = worst_heat <= 0.01 && worst_damp <= 0.01 && transitions.iter().all(|&t| t == 1) && crossing_ok;
    outcome(
        pass,
        format!(
            "slow vs heat rate {worst_heat:.2e}, damped real part {worst_damp:.2e} (tol 1e-2), \
             slow vs quadratic oracle {worst_oracle:.1e}, transitions {transitions:?} at the discriminant zero: {crossing_ok}"
        ),
    )
}

fn int_matmul(a: &[Vec<num_bigint::BigInt>], b: &[Vec<num_bigint::BigInt>]) -> Vec<Vec<num_bigint::BigInt>> {
    a.iter()
        .map(|row| (0..b[0].len()).map(|j| row.iter().zip(b).map(|(x, br)| x * &br[j]).sum()).collect())
        .collect()
}

fn oracle_rank(spec: &ModelSpec, omega: &[f64]) -> usize {
    let (a, d) = kalman_pair(spec, omega);
    let ai = dyadic_integer_matrix(&a);
    let mut rows = Vec::new();
    let mut block = dyadic_integer_matrix(&d);
    for _ in 0..a.len() {
        rows.extend(block.iter().cloned());
        block = int_matmul(&block, &ai);
    }
    bareiss_rank(rows)
}

fn kalman() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let base = ModelSpec::unit(ModelKind::Nsc, 3, 0.1);
    let no_kappa = ModelSpec { kappa: 0.0, ..base };
    let no_diss = ModelSpec {
        alpha: 0.0,
        visc_mu: 0.0,
        visc_lam: 0.0,
        ..base
    };
    let mut full = [0usize; 3];
    let mut agree = true;
    for _ in 0..20 {
        let w = loop {
            let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 0.1 && n <= 1.0 {
                break v.iter().map(|x| x / n).collect::<Vec<f64>>();
            }
        };
        for (k, s) in [base, no_kappa, no_diss].iter().enumerate() {
            let r = kalman_rank(s, &w).unwrap();
            agree &= r.rank == oracle_rank(s, &w);
            full[k] += r.full as usize;
        }
    }
    let pass = full == [20, 0, 0] && agree;
    outcome(
        pass,
        format!(
            "full rank in {}/20 directions; kappa = 0 full in {}/20; no dissipation full in {}/20; Bareiss oracle agrees: {agree}",
            full[0], full[1], full[2]
        ),
    )
}

fn bernstein(dir: &Path) -> Outcome {
    let rep = run_study(
        dir,
        "bernstein",
        StudyName::Bernstein,
        "seed = 104\n[model]\nd = 2\neps = 0.125\n[thresholds]\nbig_k = 2\n[grid]\nn = 32\nl = 6.283185307179586\n\
         [study]\nname = \"bernstein\"\nfields = 100\np_list = [2.0, 4.0]\n",
    );
    let worst = f(&rep["max_ratio"]);
    let kinds: Vec<String> = rep["kinds"]
        .as_array()
        .unwrap()
        .iter()
        .map(|k| format!("{} {:.2}", k["kind"].as_str().unwrap(), f(&k["max_ratio"])))
        .collect();
    outcome(worst <= 4.0, format!("max ratio {worst:.3} (constant 4); {}", kinds.join(", ")))
}

fn lyapunov(dir: &Path) -> Outcome {
    let rep = run_study(
        dir,
        "lyapunov",
        StudyName::Lyapunov,
        "seed = 105\n[model]\nd = 2\neps = 0.0625\n[grid]\nn = 32\nl = 6.283185307179586\n\
         [study]\nname = \"lyapunov\"\nequivalence_samples = 10000\ntrajectories = 50\ncenters = 100\n",
    );
    let within = rep["equivalence_within_brackets"].as_bool().unwrap();
    let res = f(&rep["max_residual"]);
    let bands = rep["bands"].as_array().unwrap();
    let samples: u64 = bands.iter().map(|b| b["equivalence"]["samples"].as_u64().unwrap()).sum();
    let traj: u64 = bands.iter().map(|b| b["dissipation"]["trajectories"].as_u64().unwrap()).sum();
    let times: u64 = bands.iter().map(|b| b["dissipation"]["samples"].as_u64().unwrap()).sum();
    let low_der = bands
        .iter()
        .filter(|b| b["regime"] == "low")
        .map(|b| f(&b["dissipation"]["max_derivative"]))
        .fold(f64::NEG_INFINITY, f64::max);
    let high_der = bands
        .iter()
        .filter(|b| b["regime"] == "high")
        .map(|b| f(&b["dissipation"]["max_derivative"]))
        .fold(f64::NEG_INFINITY, f64::max);
    let ranges: Vec<String> = bands
        .iter()
        .map(|b| {
            format!(
                "{}{} [{:.3}, {:.3}]",
                &b["regime"].as_str().unwrap()[..1],
                b["j"],
                f(&b["equivalence"]["min_ratio"]),
                f(&b["equivalence"]["max_ratio"])
            )
        })
        .collect();
    outcome(
        within && res <= 1e-8 && samples == 10_000 && traj == 50 && times == 5000,
        format!(
            "{samples} states within brackets: {within} ({}); {traj} trajectories x 100 times, max residual {res:.3e} (tol 1e-8); \
             max dL/dt low {low_der:.2e}, high {high_der:.2e}",
            ranges.join(", ")
        ),
    )
}

fn decay(dir: &Path) -> Outcome {
    let rep = run_study(
        dir,
        "decay",
        StudyName::DecayFit,
        "seed = 106\n[model]\nd = 3\n[study]\nname = \"decay-fit\"\np = 2.0\nsigmas = [0.0, 1.0]\neps_list = [1e-2, 1e-3]\n\
         [study.profile]\nsigma1 = 1.5\n",
    );
    // −(d/2)(1/2 − 1/p) − (σ + σ₁)/2 at d = 3, p = 2, σ₁ = 3/2
    let theory = |sigma: f64| -(sigma + 1.5) / 2.0;
    let mut pass = true;
    let mut parts = Vec::new();
    let mut by_sigma: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    for e in rep["entries"].as_array().unwrap() {
        let (eps, sigma) = (f(&e["eps"]), f(&e["sigma"]));
        let (x, r2) = (f(&e["fit"]["exponent_fitted"]), f(&e["fit"]["r_squared"]));
        let err = ((x - theory(sigma)) / theory(sigma)).abs();
        pass &= err <= 0.05 && r2 >= 0.99;
        by_sigma.entry(sigma as i64).or_default().push(x);
        parts.push(format!("eps {eps:e} sigma {sigma}: {x:.4} (want {:.2}, r2 {r2:.5})", theory(sigma)));
    }
    let spread = by_sigma
        .values()
        .map(|v| {
            let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
            (hi - lo) / hi.abs().max(lo.abs())
        })
        .fold(0.0, f64::max);
    pass &= spread <= 0.02 && parts.len() == 4;
    outcome(pass, format!("{}; eps spread {spread:.1e} (tol 2e-2)", parts.join("; ")))
}

fn relax(dir: &Path) -> Outcome {
    let rep = run_study(
        dir,
        "relax",
        StudyName::RelaxSweep,
        "seed = 107\n[model]\nd = 3\neps = 0.1\n[study]\nname = \"relax-sweep\"\neps_list = [1e-1, 3e-2, 1e-2, 3e-3]\n\
         preparation = \"ill\"\ncompare_preparations = true\n",
    );
    let slope = f(&rep["slope_fitted"]);
    let well_le = rep["well_le_ill_every_eps"].as_bool().unwrap_or(false);
    let sup = run_study(
        dir,
        "relax-perturbed",
        StudyName::RelaxSweep,
        "seed = 107\n[model]\nd = 3\neps = 0.1\n[study]\nname = \"relax-sweep\"\neps_list = [1e-1, 3e-2, 1e-2, 3e-3]\n\
         compare_preparations = false\n[study.pairing]\nkind = \"perturbed\"\nscale = 1.0\n",
    );
    let sup_slope = f(&sup["slope_fitted"]);
    outcome(
        (0.85..=1.15).contains(&slope) && well_le,
        format!(
            "slope {slope:.3} (want [0.85, 1.15], identical (a,v,theta) data, q0 = 0); well <= ill at every eps: {well_le}; \
             supplementary O(eps)-perturbed data slope {sup_slope:.3}"
        ),
    )
}

/// `−min Re λ` of the 1D symbol at `ξ`, assembled from the equations.
fn layer_oracle(spec: &ModelSpec, xi: f64) -> f64 {
    let i = C::new(0.0, 1.0);
    let e2 = spec.eps * spec.eps;
    let nu = spec.visc_mu + spec.visc_lam;
    let z = C::from(0.0);
    let m = vec![
        vec![z, -i * xi, z, z],
        vec![-i * xi, C::from(-nu * xi * xi), -i * spec.gamma * xi, z],
        vec![z, -i * spec.gamma * xi, z, -i * spec.beta * xi],
        vec![z, z, -i * spec.kappa * xi / e2, C::from(-spec.alpha / e2)],
    ];
    -nsclab_oracles::eigenvalues(&m).iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
}

fn layer(dir: &Path) -> Outcome {
    let l = 2000.0 * PI;
    let rep = run_study(
        dir,
        "layer",
        StudyName::InitialLayer,
        &format!(
            "seed = 108\n[model]\nd = 1\neps = 0.1\n[grid]\nn = 8\nl = {l:?}\n[study]\nname = \"initial-layer\"\n\
             eps_list = [0.1, 0.05]\nmode = [1]\nwindow = 5.0\nsamples = 64\ncompare_preparations = true\n"
        ),
    );
    let xi = 2.0 * PI / l;
    let mut pass = true;
    let mut parts = Vec::new();
    let mut rates = Vec::new();
    for e in rep["entries"].as_array().unwrap() {
        let r = &e["report"];
        let eps = f(&r["eps"]);
        if e["preparation"] == "ill" {
            let fitted = f(&r["rate_fitted"]);
            let want = layer_oracle(&ModelSpec::unit(ModelKind::Nsc, 1, eps), xi);
            let err = (fitted - want).abs() / want;
            pass &= err <= 0.02;
            rates.push(fitted);
            parts.push(format!("eps {eps}: rate {fitted:.4} vs oracle {want:.4} ({err:.1e})"));
        } else {
            let q = f(&r["max_q_norm"]);
            pass &= q <= 1e-10;
            parts.push(format!("well-prepared eps {eps}: max |Q| {q:.2e}"));
        }
    }
    let ratio = rates[1] / rates[0];
    pass &= (ratio / 4.0 - 1.0).abs() <= 0.05;
    outcome(pass, format!("{}; rate ratio on halving eps {ratio:.4} (want 4 within 5%)", parts.join("; ")))
}

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

fn sample(grid: Grid, t: f64, g: impl Fn(f64, f64) -> [f64; 4]) -> State {
    let vals: Vec<[f64; 4]> = (0..grid.len()).map(|i| g(grid.point(i)[0], t)).collect();
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
    let mut s = sample(grid, 0.0, |x, t| m.exact(x, t));
    for _ in 0..nsteps {
        s = stepper.step(&s).unwrap();
    }
    s.sub(&sample(grid, t_end, |x, t| m.exact(x, t))).l2_norm()
}

fn stepper() -> Outcome {
    let spec = ModelSpec::unit(ModelKind::Nsc, 1, 0.5);
    let grid = Grid::new(1, 128, 2.0 * PI).unwrap();
    let errs: Vec<f64> = [50, 100, 200].iter().map(|&n| mms_error(&spec, grid, 0.5, n)).collect();
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();

    let spec2 = ModelSpec::unit(ModelKind::Nsc, 2, 0.3);
    let grid2 = Grid::new(2, 32, 2.0 * PI).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let mut s = State::zeros(grid2);
    for c in s.components_mut() {
        *c = SpectralField::random_hermitian(grid2, &mut rng, 4.0).scale(0.05);
    }
    s.a.coeffs[0] = C::from(0.02);
    let st = ImexStepper::new(&spec2, grid2, 1e-3).unwrap();
    let mut drift = 0.0f64;
    for _ in 0..50 {
        let next = st.step(&s).unwrap();
        drift = drift.max((next.a.mean().re - s.a.mean().re).abs());
        s = next;
    }

    let mut h = State::zeros(grid2);
    for c in h.components_mut() {
        *c = SpectralField::random_hermitian(grid2, &mut rng, 3.0);
    }
    let lams = [1e-4, 1e-3, 1e-2];
    let ys: Vec<f64> = lams.iter().map(|&l| source_terms(&h.scale(l), &spec2).unwrap().l2_norm().ln()).collect();
    let slope = (ys[2] - ys[0]) / (lams[2].ln() - lams[0].ln());

    let pass = orders.iter().all(|p| (1.8..=2.2).contains(p)) && errs[2] <= 1e-6 && drift <= 1e-10 && (slope - 2.0).abs() <= 0.1;
    outcome(
        pass,
        format!(
            "orders {:.4}/{:.4}; MMS error {:.2e} at n = 128 (tol 1e-6); mass drift per step {drift:.1e}; source homogeneity slope {slope:.4}",
            orders[0], orders[1], errs[2]
        ),
    )
}

fn summed(dir: &Path) -> Outcome {
    let rep = run_study(
        dir,
        "summed",
        StudyName::Lyapunov,
        "seed = 110\n[model]\nd = 3\neps = 0.015625\n[study]\nname = \"lyapunov\"\nfunctional = \"summed\"\nm = 2.0\n\
         t_min = 1.0\nt_max = 1000.0\nsamples = 60\nfit_window = [100.0, 1000.0]\n[study.profile]\nsigma1 = 1.5\n",
    );
    let (d, sigma1) = (3.0, 1.5);
    let predicted = -(d / 2.0 - 1.0 + sigma1) / 2.0;
    let ders: Vec<f64> = rep["report"]["derivatives"].as_array().unwrap().iter().map(f).collect();
    let max_der = ders.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slope = f(&rep["slope_fitted"]);
    let pass = max_der <= 0.0 && ((slope - predicted) / predicted).abs() <= 0.1;
    outcome(
        pass,
        format!(
            "max dL1/dt {max_der:.2e} over {} samples; slope {slope:.4} vs {predicted} (tol 10%)",
            ders.len()
        ),
    )
}

fn snapshot_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn determinism(dir: &Path) -> Outcome {
    let two_pi = "6.283185307179586";
    let cases: Vec<(StudyName, String)> = vec![
        (StudyName::Spectrum, "seed = 11\n".into()),
        (StudyName::SkCheck, "seed = 11\n".into()),
        (
            StudyName::Evolve,
            format!(
                "seed = 11\n[model]\nd = 2\neps = 0.5\n[thresholds]\nbig_k = 2\n[grid]\nn = 16\nl = {two_pi}\n\
                 [study]\nname = \"evolve\"\nmode = \"nonlinear\"\nt_final = 0.1\namplitude = 0.05\n[output]\nstride = 5\n"
            ),
        ),
        (StudyName::DecayFit, "seed = 11\n".into()),
        (
            StudyName::RelaxSweep,
            "seed = 11\n[study]\nname = \"relax-sweep\"\neps_list = [0.1, 0.03]\nt_final = 10.0\nsteps_per_octave = 8\n".into(),
        ),
        (StudyName::InitialLayer, "seed = 11\n[model]\nd = 1\neps = 0.1\n".into()),
        (
            StudyName::Lyapunov,
            format!(
                "seed = 11\n[model]\nd = 2\neps = 0.0625\n[grid]\nn = 16\nl = {two_pi}\n[study]\nname = \"lyapunov\"\n\
                 equivalence_samples = 200\ntrajectories = 4\ncenters = 10\n"
            ),
        ),
        (
            StudyName::Bernstein,
            format!("seed = 11\n[model]\nd = 2\neps = 0.125\n[thresholds]\nbig_k = 2\n[grid]\nn = 32\nl = {two_pi}\n[study]\nname = \"bernstein\"\nfields = 10\n"),
        ),
    ];
    let mut identical = Vec::new();
    let mut files = 0;
    for (name, cfg) in &cases {
        let tag = format!("det-{}", name.as_str());
        let out = dir.join(&tag);
        run_study(dir, &tag, *name, cfg);
        let first = snapshot_dir(&out);
        std::fs::remove_dir_all(&out).unwrap();
        run_study(dir, &tag, *name, cfg);
        let second = snapshot_dir(&out);
        files += first.len();
        identical.push((name.as_str(), first == second && !first.is_empty()));
    }
    let bad: Vec<&str> = identical.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
    outcome(
        bad.is_empty(),
        format!(
            "{} subcommands rerun, {files} files compared byte for byte; differing: {}",
            cases.len(),
            if bad.is_empty() { "none".to_string() } else { bad.join(", ") }
        ),
    )
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    criterion(1, "propagator vs adaptive ODE oracle", 10.0, propagator);
    criterion(2, "toy spectral regimes", 5.0, toy_regimes);
    criterion(3, "Kalman rank condition", 5.0, kalman);
    criterion(4, "Bernstein inequalities", 30.0, || bernstein(dir));
    criterion(5, "Lyapunov equivalence and dissipation", 60.0, || lyapunov(dir));
    criterion(6, "decay exponents", 120.0, || decay(dir));
    criterion(7, "relaxation slope", 120.0, || relax(dir));
    criterion(8, "initial layer", 30.0, || layer(dir));
    criterion(9, "nonlinear stepper", 120.0, stepper);
    criterion(10, "summed functional vs ODE", 60.0, || summed(dir));
    criterion(11, "determinism", f64::INFINITY, || determinism(dir));
}
