//! Validation and execution of each study.

use crate::config::*;
use crate::output::{Artifacts, Cell, Table};
use crate::{CliError, Resolved};
use nsclab_core::besov::{bernstein_check, grid_bands, random_band_field, BernsteinKind, Convention, C_BERN};
use nsclab_core::diagnostics::{dissipation_residual, high_target, lyapunov_high, lyapunov_low, LyapunovRegime};
use nsclab_core::evolve::{default_dt, fourier_law_flux, linear_trajectory, stencil_trajectory, ImexStepper, Trajectory};
use nsclab_core::model::{eigenvalues, kalman_rank, symbol, toy_regime_scan, ModelKind, ModelSpec};
use nsclab_core::spectral::snapshot::write_snapshot;
use nsclab_core::spectral::{Grid, SpectralField, State};
use nsclab_core::studies::layer::layer_data;
use nsclab_core::studies::{
    decay_fit, initial_layer, log_space, lyapunov_ode_compare, relax_sweep, Preparation, RelaxConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn check(ok: bool, msg: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(bad(msg))
    }
}

fn need_nsc(spec: &ModelSpec, what: &str) -> Result<(), CliError> {
    check(spec.kind == ModelKind::Nsc, &format!("{what} needs model.kind = \"nsc\""))
}

fn check_eps_list(list: &[f64], field: &str) -> Result<(), CliError> {
    check(
        !list.is_empty() && list.iter().all(|e| e.is_finite() && *e > 0.0),
        &format!("{field}: need a nonempty list of positive values"),
    )
}

fn other(p: Preparation) -> Preparation {
    match p {
        Preparation::Ill => Preparation::Well,
        Preparation::Well => Preparation::Ill,
    }
}

fn prep_name(p: Preparation) -> &'static str {
    match p {
        Preparation::Ill => "ill",
        Preparation::Well => "well",
    }
}

fn unit_direction(dir: &Option<Vec<f64>>, d: usize) -> Result<Vec<f64>, CliError> {
    match dir {
        None => {
            let mut e = vec![0.0; d];
            e[0] = 1.0;
            Ok(e)
        }
        Some(v) => {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            check(v.len() == d && n > 0.0 && n.is_finite(), "spectrum.direction: need d finite components, not all zero")?;
            Ok(v.iter().map(|x| x / n).collect())
        }
    }
}

fn high_grid(r: &Resolved, l: &LyapunovStudy) -> Result<Grid, CliError> {
    let g = l.high_grid.expect("filled during resolution");
    Ok(Grid::new(r.spec.d, g.n, g.l)?)
}

fn bands_of(l: &LyapunovStudy) -> (&[i32], &[i32]) {
    (
        l.low_bands.as_deref().expect("filled during resolution"),
        l.high_bands.as_deref().expect("filled during resolution"),
    )
}

/// Checks every study parameter. Runs before any compute.
pub fn validate(r: &Resolved) -> Result<(), CliError> {
    let spec = &r.spec;
    match &r.study {
        StudyBlock::Spectrum(s) => {
            check(s.xi_min > 0.0 && s.xi_max > s.xi_min && s.xi_max.is_finite(), "spectrum: need 0 < xi_min < xi_max")?;
            check(s.count >= 2, "spectrum.count: need >= 2")?;
            unit_direction(&s.direction, spec.d)?;
        }
        StudyBlock::SkCheck(s) => check(s.directions >= 1, "sk-check.directions: need >= 1")?,
        StudyBlock::Evolve(s) => {
            check(!spec.kind.is_toy(), "evolve needs the nsc or nsf model")?;
            check(s.t_final > 0.0 && s.t_final.is_finite(), "evolve.t_final: need > 0")?;
            check(s.dt.map_or(true, |dt| dt > 0.0 && dt <= s.t_final), "evolve.dt: need 0 < dt <= t_final")?;
            check(s.kmax > 0.0, "evolve.kmax: need > 0")?;
            check(s.amplitude > 0.0, "evolve.amplitude: need > 0")?;
            if s.mode == EvolveMode::Nonlinear {
                check(s.amplitude < 1.0, "evolve.amplitude: need < 1 so that 1 + a > 0")?;
            }
            check(r.config.output.stride >= 1, "output.stride: need >= 1")?;
        }
        StudyBlock::DecayFit(s) => {
            check(matches!(spec.kind, ModelKind::Nsc | ModelKind::Nsf), "decay-fit needs the nsc or nsf model")?;
            check(s.t_min > 0.0 && s.t_max > s.t_min, "decay-fit: need 0 < t_min < t_max")?;
            check(s.samples >= 2, "decay-fit.samples: need >= 2")?;
            check(!s.sigmas.is_empty(), "decay-fit.sigmas: need at least one")?;
            if let Some(l) = &s.eps_list {
                check_eps_list(l, "decay-fit.eps_list")?;
            }
        }
        StudyBlock::RelaxSweep(s) => {
            need_nsc(spec, "relax-sweep")?;
            check_eps_list(&s.eps_list, "relax-sweep.eps_list")?;
            check(s.eps_list.windows(2).all(|w| w[1] < w[0]), "relax-sweep.eps_list: must be strictly decreasing")?;
            check(s.steps_per_octave >= 2, "relax-sweep.steps_per_octave: need >= 2")?;
            check(s.t_final > 0.0, "relax-sweep.t_final: need > 0")?;
            check(s.p >= 1.0, "relax-sweep.p: need >= 1")?;
        }
        StudyBlock::InitialLayer(s) => {
            need_nsc(spec, "initial-layer")?;
            if let Some(l) = &s.eps_list {
                check_eps_list(l, "initial-layer.eps_list")?;
            }
            if let Some(m) = &s.mode {
                check(m.len() == spec.d && m.iter().any(|&x| x != 0), "initial-layer.mode: need d entries, not all zero")?;
            }
            check(s.samples >= 50, "initial-layer.samples: need >= 50")?;
            check(s.window > 0.0, "initial-layer.window: need > 0")?;
        }
        StudyBlock::Lyapunov(l) => {
            need_nsc(spec, "lyapunov")?;
            let th = r.thresholds.expect("nsc has thresholds");
            match l.functional {
                Functional::Bands => {
                    let (low_bands, high_bands) = bands_of(l);
                    check(!low_bands.is_empty() || !high_bands.is_empty(), "lyapunov: no bands given")?;
                    check(l.eta_low > 0.0 && l.eta_low <= 0.25, "lyapunov.eta_low: need 0 < eta <= 1/4")?;
                    check(l.eta_high > 0.0, "lyapunov.eta_high: need > 0")?;
                    check(l.h > 0.0 && l.t0 >= 2.0 * l.h, "lyapunov: need h > 0 and t0 >= 2h")?;
                    check(l.low_spacing > 0.0 && l.high_spacing > 0.0, "lyapunov: spacings must be > 0")?;
                    check(l.centers >= 1 && l.trajectories >= 1, "lyapunov: need centers, trajectories >= 1")?;
                    let low = grid_bands(r.grid.as_ref().expect("resolved grid"));
                    let high = grid_bands(&high_grid(r, l)?);
                    for &j in low_bands {
                        check(j <= th.j0, &format!("lyapunov.low_bands: band {j} exceeds J0 = {}", th.j0))?;
                        check(low.contains(&j), &format!("lyapunov.low_bands: band {j} has no modes on the grid"))?;
                    }
                    for &j in high_bands {
                        check(
                            j >= th.jeps - 1,
                            &format!("lyapunov.high_bands: band {j} is below J_eps - 1 = {}", th.jeps - 1),
                        )?;
                        check(high.contains(&j), &format!("lyapunov.high_bands: band {j} has no modes on high_grid"))?;
                    }
                }
                Functional::Summed => {
                    check(l.m > 0.0, "lyapunov.m: need > 0")?;
                    check(l.p >= 2.0, "lyapunov.p: need >= 2")?;
                    check(l.t_min > 0.0 && l.t_max > l.t_min && l.samples >= 2, "lyapunov: need 0 < t_min < t_max, samples >= 2")?;
                }
            }
        }
        StudyBlock::Bernstein(b) => {
            check(r.thresholds.is_some(), "bernstein needs a model with eps > 0")?;
            check(b.fields >= 1, "bernstein.fields: need >= 1")?;
            check(b.s_prime > 0.0, "bernstein.s_prime: need > 0")?;
            check(!b.p_list.is_empty() && b.p_list.iter().all(|p| *p >= 1.0), "bernstein.p_list: need values >= 1")?;
            check(b.jmin >= 0 && b.jmin <= b.jmax, "bernstein: need 0 <= jmin <= jmax")?;
        }
    }
    Ok(())
}

/// Runs the resolved study.
pub fn execute(r: &Resolved) -> Result<Artifacts, CliError> {
    match &r.study {
        StudyBlock::Spectrum(s) => spectrum(r, s),
        StudyBlock::SkCheck(s) => sk_check(r, s),
        StudyBlock::Evolve(s) => evolve(r, s),
        StudyBlock::DecayFit(s) => decay(r, s),
        StudyBlock::RelaxSweep(s) => relax(r, s),
        StudyBlock::InitialLayer(s) => layer(r, s),
        StudyBlock::Lyapunov(l) => match l.functional {
            Functional::Bands => lyapunov_bands(r, l),
            Functional::Summed => lyapunov_summed(r, l),
        },
        StudyBlock::Bernstein(b) => bernstein(r, b),
    }
}

fn spectrum(r: &Resolved, s: &SpectrumStudy) -> Result<Artifacts, CliError> {
    let spec = &r.spec;
    let dir = unit_direction(&s.direction, spec.d)?;
    let n = spec.size();
    let xis = log_space(s.xi_min, s.xi_max, s.count);
    let mut header = vec!["xi_abs".to_string()];
    header.extend((1..=n).map(|i| format!("re_lambda_{i}")));
    header.extend((1..=n).map(|i| format!("im_lambda_{i}")));
    let mut table = Table::with_header("spectrum", header);
    let mut max_re = f64::NEG_INFINITY;
    for &x in &xis {
        let xi: Vec<f64> = dir.iter().map(|w| w * x).collect();
        let ev = eigenvalues(&symbol(spec, &xi)?)?;
        let mut row: Vec<Cell> = vec![x.into()];
        row.extend(ev.iter().map(|z| Cell::Num(z.re)));
        row.extend(ev.iter().map(|z| Cell::Num(z.im)));
        max_re = ev.iter().map(|z| z.re).fold(max_re, f64::max);
        table.push(row);
    }
    let transitions = if spec.kind.is_toy() {
        Some(toy_regime_scan(spec, &xis)?.transitions)
    } else {
        None
    };
    Ok(Artifacts {
        report: json!({
            "study": "spectrum",
            "spec": spec,
            "direction": dir,
            "rows": xis.len(),
            "eigenvalue_count": n,
            "max_real_part": max_re,
            "toy_transitions": transitions,
        }),
        tables: vec![table],
        ..Default::default()
    })
}

fn random_unit<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 && n <= 1.0 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

fn sk_check(r: &Resolved, s: &SkStudy) -> Result<Artifacts, CliError> {
    let spec = r.spec;
    let d = spec.d;
    let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
    let dirs: Vec<Vec<f64>> = (0..s.directions).map(|_| random_unit(&mut rng, d)).collect();
    let mut variants = vec![("default", spec)];
    if s.variants {
        variants.push(("kappa-zero", ModelSpec { kappa: 0.0, ..spec }));
        variants.push((
            "no-dissipation",
            ModelSpec {
                alpha: 0.0,
                visc_mu: 0.0,
                visc_lam: 0.0,
                ..spec
            },
        ));
    }
    let mut header = vec!["variant".to_string(), "direction".to_string()];
    header.extend((1..=d).map(|i| format!("omega_{i}")));
    header.extend(["rank".to_string(), "n".to_string(), "full".to_string()]);
    let mut table = Table::with_header("kalman", header);
    table.plot = false;
    let mut summary = Vec::new();
    for (name, v) in &variants {
        let mut min_rank = usize::MAX;
        let mut witness = None;
        for (k, w) in dirs.iter().enumerate() {
            let rep = kalman_rank(v, w)?;
            min_rank = min_rank.min(rep.rank);
            if witness.is_none() && !rep.full {
                witness = rep.witness_direction.clone();
            }
            let mut row: Vec<Cell> = vec![(*name).into(), (k as i64).into()];
            row.extend(w.iter().map(|x| Cell::Num(*x)));
            row.extend([
                Cell::Int(rep.rank as i64),
                Cell::Int(rep.n as i64),
                Cell::Int(rep.full as i64),
            ]);
            table.push(row);
        }
        summary.push(json!({
            "variant": name,
            "n": v.size(),
            "min_rank": min_rank,
            "full_rank_all_directions": min_rank == v.size(),
            "witness_direction": witness,
        }));
    }
    Ok(Artifacts {
        report: json!({ "study": "sk-check", "spec": spec, "directions": dirs, "variants": summary }),
        tables: vec![table],
        ..Default::default()
    })
}

/// Random real state, each component scaled to physical max `amplitude`.
fn random_state<R: Rng>(grid: Grid, spec: &ModelSpec, rng: &mut R, amplitude: f64, kmax: f64) -> State {
    let mut s = State::zeros(grid);
    for c in s.components_mut() {
        let f = SpectralField::random_hermitian(grid, rng, kmax);
        let m = f.to_physical_real().iter().fold(0.0f64, |a, x| a.max(x.abs()));
        *c = if m > 0.0 { f.scale(amplitude / m) } else { f };
    }
    if spec.kind == ModelKind::Nsf {
        s.q = fourier_law_flux(&s.theta, spec);
    }
    s
}

fn vec_norm(fs: &[SpectralField]) -> f64 {
    fs.iter().map(|f| f.l2_norm().powi(2)).sum::<f64>().sqrt()
}

fn evolve(r: &Resolved, s: &EvolveStudy) -> Result<Artifacts, CliError> {
    let spec = r.spec;
    let grid = r.grid.expect("resolved grid");
    let stride = r.config.output.stride;
    let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
    let s0 = random_state(grid, &spec, &mut rng, s.amplitude, s.kmax);
    let (traj, dt, nsteps): (Trajectory, f64, usize) = match s.mode {
        EvolveMode::Linear => {
            let dt0 = s.dt.unwrap_or(s.t_final / 100.0);
            let nsteps = (s.t_final / dt0).ceil() as usize;
            let dt = s.t_final / nsteps as f64;
            let times: Vec<f64> = (0..=nsteps)
                .filter(|k| k % stride == 0 || *k == nsteps)
                .map(|k| k as f64 * dt)
                .collect();
            (linear_trajectory(&s0, &spec, &times)?, dt, nsteps)
        }
        EvolveMode::Nonlinear => {
            let dt0 = s.dt.unwrap_or_else(|| default_dt(&s0, &spec));
            let nsteps = (s.t_final / dt0).ceil() as usize;
            let dt = s.t_final / nsteps as f64;
            (ImexStepper::new(&spec, grid, dt)?.run(&s0, nsteps, stride)?, dt, nsteps)
        }
    };
    let mut table = Table::new("series", &["t", "l2_a", "l2_v", "l2_theta", "l2_q", "mean_a"]);
    let mut binaries = Vec::new();
    let mut files = Vec::new();
    let mean0 = s0.a.mean().re;
    let mut mass_drift = 0.0f64;
    for (k, st) in traj.states.iter().enumerate() {
        let mean = st.a.mean().re;
        mass_drift = mass_drift.max((mean - mean0).abs());
        table.push(vec![
            st.time.into(),
            st.a.l2_norm().into(),
            vec_norm(&st.v).into(),
            st.theta.l2_norm().into(),
            vec_norm(&st.q).into(),
            mean.into(),
        ]);
        let mut buf = Vec::new();
        write_snapshot(&mut buf, st.time, &st.components())?;
        let name = format!("snapshots/snap_{k:05}.nscf");
        files.push(name.clone());
        binaries.push((name, buf));
    }
    let last = traj.states.last().expect("trajectory has the initial state");
    let sidecar = json!({
        "spec": spec,
        "grid": grid,
        "dt": dt,
        "steps": nsteps,
        "stride": stride,
        "thresholds": r.thresholds,
        "components": spec.with_kind(ModelKind::Nsc).labels(),
        "times": traj.times,
        "files": files,
    });
    Ok(Artifacts {
        report: json!({
            "study": "evolve",
            "mode": s.mode,
            "spec": spec,
            "dt": dt,
            "steps": nsteps,
            "t_final": last.time,
            "initial_l2": s0.l2_norm(),
            "final_l2": last.l2_norm(),
            "mass_mean_drift": mass_drift,
        }),
        tables: vec![table],
        json: vec![("trajectory.json".into(), sidecar)],
        binaries,
    })
}

fn decay(r: &Resolved, s: &DecayStudy) -> Result<Artifacts, CliError> {
    let quad = r.radial.as_ref().expect("resolved radial");
    let eps_list = s.eps_list.clone().unwrap_or_else(|| vec![r.spec.eps]);
    let times = log_space(s.t_min, s.t_max, s.samples);
    let prof = s.profile.profile();
    let mut series = Table::new("series", &["eps", "sigma", "t", "norm"]);
    let mut fits = Table::new("fits", &["eps", "sigma", "exponent_fitted", "exponent_theory", "r_squared"]);
    let mut reports = Vec::new();
    for &eps in &eps_list {
        let spec = if r.spec.kind == ModelKind::Nsc { r.spec.with_eps(eps) } else { r.spec };
        for &sigma in &s.sigmas {
            let rep = decay_fit(&spec, &prof, quad, s.p, sigma, s.components, &times)?;
            for (t, n) in rep.times.iter().zip(&rep.norms) {
                series.push(vec![eps.into(), sigma.into(), (*t).into(), (*n).into()]);
            }
            fits.push(vec![
                eps.into(),
                sigma.into(),
                rep.fit.exponent_fitted.into(),
                rep.fit.exponent_theory.into(),
                rep.fit.r_squared.into(),
            ]);
            reports.push(rep);
        }
    }
    let uniformity: Vec<_> = s
        .sigmas
        .iter()
        .map(|&sigma| {
            let e: Vec<f64> = reports.iter().filter(|x| x.sigma == sigma).map(|x| x.fit.exponent_fitted).collect();
            let lo = e.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            json!({ "sigma": sigma, "relative_spread": (hi - lo) / lo.abs().max(hi.abs()) })
        })
        .collect();
    Ok(Artifacts {
        report: json!({ "study": "decay-fit", "entries": reports, "eps_uniformity": uniformity }),
        tables: vec![series, fits],
        ..Default::default()
    })
}

fn relax(r: &Resolved, s: &RelaxStudy) -> Result<Artifacts, CliError> {
    let quad = r.radial.as_ref().expect("resolved radial");
    let mk = |prep| RelaxConfig {
        eps_list: s.eps_list.clone(),
        big_k: r.config.thresholds.big_k,
        k: r.config.thresholds.k,
        p: s.p,
        t_final: s.t_final,
        pairing: s.pairing,
        preparation: prep,
        profile: s.profile.profile(),
        steps_per_octave: s.steps_per_octave,
    };
    let mut preps = vec![s.preparation];
    if s.compare_preparations {
        preps.push(other(s.preparation));
    }
    let reports = preps
        .iter()
        .map(|&p| relax_sweep(&r.spec, &mk(p), quad))
        .collect::<Result<Vec<_>, _>>()?;
    let mut detail = Table::new("xtilde", &["eps", "preparation", "xtilde", "constituent", "value"]);
    detail.plot = false;
    for (p, rep) in preps.iter().zip(&reports) {
        for e in rep.entries.iter().filter(|e| e.skipped.is_none()) {
            for (name, v) in &e.components {
                detail.push(vec![e.eps.into(), prep_name(*p).into(), e.xtilde.into(), name.as_str().into(), (*v).into()]);
            }
        }
    }
    let mut header: Vec<String> = vec!["eps".into()];
    header.extend(preps.iter().map(|p| format!("xtilde_{}", prep_name(*p))));
    let mut sweep = Table::with_header("sweep", header);
    for (i, &eps) in reports[0].eps_values.iter().enumerate() {
        let mut row: Vec<Cell> = vec![eps.into()];
        row.extend(reports.iter().map(|rep| Cell::Num(rep.xtilde_values.get(i).copied().unwrap_or(f64::NAN))));
        sweep.push(row);
    }
    let well_le_ill = (reports.len() == 2).then(|| {
        let (ill, well) = if preps[0] == Preparation::Ill { (&reports[0], &reports[1]) } else { (&reports[1], &reports[0]) };
        ill.xtilde_values.iter().zip(&well.xtilde_values).all(|(i, w)| w <= i)
    });
    let named: serde_json::Map<String, serde_json::Value> = preps
        .iter()
        .zip(&reports)
        .map(|(p, rep)| (prep_name(*p).to_string(), serde_json::to_value(rep).expect("serializable")))
        .collect();
    Ok(Artifacts {
        report: json!({
            "study": "relax-sweep",
            "pairing": s.pairing,
            "slope_fitted": reports[0].slope_fitted,
            "r_squared": reports[0].r_squared,
            "well_le_ill_every_eps": well_le_ill,
            "reports": named,
        }),
        tables: vec![sweep, detail],
        ..Default::default()
    })
}

fn layer(r: &Resolved, s: &LayerStudy) -> Result<Artifacts, CliError> {
    let grid = r.grid.expect("resolved grid");
    let d = r.spec.d;
    let eps_list = s.eps_list.clone().unwrap_or_else(|| vec![r.spec.eps, r.spec.eps / 2.0]);
    let mode = s.mode.clone().unwrap_or_else(|| {
        let mut m = vec![0; d];
        m[0] = 1;
        m
    });
    let mut preps = vec![s.preparation];
    if s.compare_preparations {
        preps.push(other(s.preparation));
    }
    let mut table = Table::new("layer", &["eps", "well_prepared", "t", "q_norm"]);
    let mut entries = Vec::new();
    let mut rates = Vec::new();
    for &p in &preps {
        for &eps in &eps_list {
            let spec = r.spec.with_eps(eps);
            let data = layer_data(grid, &spec, &mode, p == Preparation::Well)?;
            let rep = initial_layer(&spec, &data, s.window, s.samples)?;
            for (t, q) in rep.times.iter().zip(&rep.q_norms) {
                table.push(vec![eps.into(), Cell::Int((p == Preparation::Well) as i64), (*t).into(), (*q).into()]);
            }
            if p == s.preparation {
                rates.push((eps, rep.rate_fitted));
            }
            entries.push(json!({ "preparation": prep_name(p), "report": rep }));
        }
    }
    let scaling: Vec<_> = rates
        .windows(2)
        .map(|w| {
            let ((e1, r1), (e2, r2)) = (w[0], w[1]);
            json!({
                "eps": [e1, e2],
                "rate_ratio": r1.zip(r2).map(|(a, b)| b / a),
                "expected_ratio": (e1 / e2).powi(2),
            })
        })
        .collect();
    Ok(Artifacts {
        report: json!({ "study": "initial-layer", "mode": mode, "entries": entries, "eps_scaling": scaling }),
        tables: vec![table],
        ..Default::default()
    })
}

/// Every component random in band `j`.
fn band_state<R: Rng>(grid: Grid, rng: &mut R, j: i32) -> State {
    let mut s = State::zeros(grid);
    for c in s.components_mut() {
        *c = random_band_field(grid, rng, j, j);
    }
    s
}

/// `total` split as evenly as possible over `parts`, earlier parts first.
fn share(total: usize, parts: usize, k: usize) -> usize {
    total / parts + usize::from(k < total % parts)
}

fn lyapunov_bands(r: &Resolved, l: &LyapunovStudy) -> Result<Artifacts, CliError> {
    let spec = r.spec;
    let th = r.thresholds.expect("nsc has thresholds");
    let low_grid = r.grid.expect("resolved grid");
    let hi_grid = high_grid(r, l)?;
    let (low_bands, high_bands) = bands_of(l);
    let bands: Vec<(LyapunovRegime, i32, Grid, f64, f64)> = low_bands
        .iter()
        .map(|&j| (LyapunovRegime::Low, j, low_grid, l.eta_low, l.low_spacing))
        .chain(high_bands.iter().map(|&j| (LyapunovRegime::High, j, hi_grid, l.eta_high, l.high_spacing)))
        .collect();
    let nb = bands.len();
    let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
    let mut eq_table = Table::new("equivalence", &["j", "high", "samples", "min_ratio", "max_ratio", "lower", "upper"]);
    let mut residuals = Table::new("residuals", &["t", "j", "regime", "lyapunov", "dissipation", "residual"]);
    residuals.plot = false;
    let mut band_reports = Vec::new();
    let mut all_within = true;
    let mut max_residual = f64::NEG_INFINITY;
    let mut max_derivative = f64::NEG_INFINITY;
    for (b, &(regime, j, grid, eta, spacing)) in bands.iter().enumerate() {
        let (lo, hi) = match regime {
            LyapunovRegime::Low => (1.0 - 2.0 * eta, 1.0 + 2.0 * eta),
            LyapunovRegime::High => (0.5, 2.0),
        };
        let count = share(l.equivalence_samples, nb, b);
        let (mut rmin, mut rmax) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut done = 0;
        while done < count {
            let chunk = (count - done).min(256);
            let states: Vec<State> = (0..chunk).map(|_| band_state(grid, &mut rng, j)).collect();
            let ratios = states
                .par_iter()
                .map(|s| -> Result<f64, CliError> {
                    Ok(match regime {
                        LyapunovRegime::Low => {
                            let v = lyapunov_low(s, j, eta)?;
                            v.value / v.norm_part
                        }
                        LyapunovRegime::High => lyapunov_high(s, j, eta, &spec, false)?.value / high_target(s, j, spec.eps),
                    })
                })
                .collect::<Result<Vec<f64>, _>>()?;
            for x in ratios {
                rmin = rmin.min(x);
                rmax = rmax.max(x);
            }
            done += chunk;
        }
        let within = count == 0 || (rmin >= lo && rmax <= hi);
        all_within &= within;
        eq_table.push(vec![
            Cell::Int(j as i64),
            Cell::Int((regime == LyapunovRegime::High) as i64),
            Cell::Int(count as i64),
            rmin.into(),
            rmax.into(),
            lo.into(),
            hi.into(),
        ]);
        let ntraj = share(l.trajectories, nb, b);
        let starts: Vec<State> = (0..ntraj).map(|_| band_state(grid, &mut rng, j)).collect();
        let reps = starts
            .par_iter()
            .map(|s0| -> Result<_, CliError> {
                let traj = stencil_trajectory(s0, &spec, l.t0, spacing, l.centers, l.h)?;
                Ok(dissipation_residual(&traj, j, regime, &spec, &th, eta)?)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut band_max_res = f64::NEG_INFINITY;
        let mut band_max_der = f64::NEG_INFINITY;
        let mut c = f64::NAN;
        let mut samples = 0;
        for rep in &reps {
            c = rep.c;
            band_max_res = band_max_res.max(rep.max_residual);
            for smp in &rep.samples {
                band_max_der = band_max_der.max(smp.derivative);
                samples += 1;
                residuals.push(vec![
                    smp.t.into(),
                    Cell::Int(j as i64),
                    match regime {
                        LyapunovRegime::Low => "low".into(),
                        LyapunovRegime::High => "high".into(),
                    },
                    smp.lyapunov.into(),
                    smp.dissipation.into(),
                    smp.residual.into(),
                ]);
            }
        }
        max_residual = max_residual.max(band_max_res);
        max_derivative = max_derivative.max(band_max_der);
        band_reports.push(json!({
            "j": j,
            "regime": regime,
            "eta": eta,
            "equivalence": { "samples": count, "min_ratio": rmin, "max_ratio": rmax, "bracket": [lo, hi], "within": within },
            "dissipation": {
                "trajectories": ntraj,
                "samples": samples,
                "c": c,
                "max_residual": band_max_res,
                "max_derivative": band_max_der,
            },
        }));
    }
    Ok(Artifacts {
        report: json!({
            "study": "lyapunov",
            "functional": "bands",
            "thresholds": th,
            "equivalence_within_brackets": all_within,
            "max_residual": max_residual,
            "max_derivative": max_derivative,
            "bands": band_reports,
        }),
        tables: vec![eq_table, residuals],
        ..Default::default()
    })
}

fn lyapunov_summed(r: &Resolved, l: &LyapunovStudy) -> Result<Artifacts, CliError> {
    let th = r.thresholds.expect("nsc has thresholds");
    let quad = r.radial.as_ref().expect("resolved radial");
    let times = log_space(l.t_min, l.t_max, l.samples);
    let rep = lyapunov_ode_compare(&r.spec, &l.profile.profile(), quad, &th, l.p, l.m, &times, l.fit_window)?;
    let mut table = Table::new("summed", &["t", "value", "derivative", "envelope"]);
    for i in 0..rep.times.len() {
        table.push(vec![
            rep.times[i].into(),
            rep.values[i].into(),
            rep.derivatives[i].into(),
            rep.envelope[i].into(),
        ]);
    }
    let nonincreasing = rep.derivatives.iter().all(|d| *d <= 0.0);
    Ok(Artifacts {
        report: json!({
            "study": "lyapunov",
            "functional": "summed",
            "nonincreasing": nonincreasing,
            "slope_predicted": -l.m / 2.0,
            "slope_fitted": rep.large_t_fit.map(|f| f.slope),
            "report": rep,
        }),
        tables: vec![table],
        ..Default::default()
    })
}

fn bernstein(r: &Resolved, b: &BernsteinStudy) -> Result<Artifacts, CliError> {
    let grid = r.grid.expect("resolved grid");
    let th = r.thresholds.expect("checked in validation");
    let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
    let mut table = Table::new("bernstein", &["kind", "field", "p", "lhs", "rhs", "ratio"]);
    table.plot = false;
    let mut kinds = Vec::new();
    let mut worst = 0.0f64;
    for kind in BernsteinKind::ALL {
        let mut max_ratio = 0.0f64;
        let mut violations = 0;
        for f_idx in 0..b.fields {
            let f = random_band_field(grid, &mut rng, b.jmin, b.jmax);
            for &p in &b.p_list {
                let rep = bernstein_check(&f, kind, b.s, b.s_prime, p, &th, Convention::Disjoint)?;
                max_ratio = max_ratio.max(rep.ratio);
                violations += rep.violated as usize;
                let name = serde_json::to_value(kind).expect("serializable");
                table.push(vec![
                    name.as_str().unwrap_or_default().into(),
                    Cell::Int(f_idx as i64),
                    p.into(),
                    rep.lhs.into(),
                    rep.rhs.into(),
                    rep.ratio.into(),
                ]);
            }
        }
        worst = worst.max(max_ratio);
        kinds.push(json!({ "kind": kind, "max_ratio": max_ratio, "violations": violations }));
    }
    Ok(Artifacts {
        report: json!({
            "study": "bernstein",
            "constant": C_BERN,
            "max_ratio": worst,
            "all_hold": worst <= C_BERN,
            "kinds": kinds,
        }),
        tables: vec![table],
        ..Default::default()
    })
}
