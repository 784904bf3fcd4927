//! Relaxation sweep: distance between the NSC and NSF linear flows as
//! `ε → 0`, measured by the error functional `X̃`.
//!
//! Runs on radial data over `ℝ^d`. The error unknowns are
//! `(ã, ṽ, θ̃) = (a^ε − a, v^ε − v, θ^ε − θ)`; the `Q` term uses the NSC
//! solution. Low bands are `j <= J0`, high bands `j > J0`.

use super::{linear_fit, node_magnitude2, radial_band_norms};
use crate::besov::{make_thresholds, Convention, Regime};
use crate::diagnostics::{Accumulator, Constituent, Part, SpaceNorm, TimeNorm, Unknown};
use crate::error::{Error, Result};
use crate::evolve::radial::{reduced_step, NodeValue, RadialDataProfile, RadialQuadrature};
use crate::linalg::CVec;
use crate::model::{ModelKind, ModelSpec};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// How NSC data relate to the NSF data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DataPairing {
    /// Same `(a, v, θ)`.
    Identical,
    /// NSC `(a, v, θ) = (1 + scale·ε)·` NSF data.
    Perturbed { scale: f64 },
}

/// Initial heat flux of the NSC run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preparation {
    /// `q₀ = 0`
    Ill,
    /// `q₀ = −(κ/α)∇θ₀`
    Well,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxConfig {
    pub eps_list: Vec<f64>,
    pub big_k: u32,
    pub k: f64,
    pub p: f64,
    pub t_final: f64,
    pub pairing: DataPairing,
    pub preparation: Preparation,
    pub profile: RadialDataProfile,
    /// Uniform steps per time octave (the first octave starts at
    /// `0.05 ε²/α`).
    pub steps_per_octave: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxEntry {
    pub eps: f64,
    pub xtilde: f64,
    pub components: BTreeMap<String, f64>,
    pub time_samples: usize,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxReport {
    pub eps_values: Vec<f64>,
    pub xtilde_values: Vec<f64>,
    pub slope_fitted: f64,
    pub r_squared: f64,
    pub entries: Vec<RelaxEntry>,
}

/// Constituents of `X̃`.
pub fn xtilde_constituents(d: usize, p: f64) -> Vec<Constituent> {
    use Unknown::*;
    let (dd, dp) = (d as f64, d as f64 / p);
    let mk = |name: &str, part, regime, fields: Vec<Unknown>, s, space, time| Constituent {
        name: name.to_string(),
        part,
        regime,
        fields: fields.into_iter().map(|u| (u, 1.0)).collect(),
        s,
        space,
        time,
        weight: 1.0,
    };
    vec![
        mk("low.err.linf", Part::Low, Regime::Low, vec![A, V, Theta], dd / 2.0 - 2.0, SpaceNorm::L2, TimeNorm::LInf),
        mk("low.err.l1", Part::Low, Regime::Low, vec![A, V, Theta], dd / 2.0, SpaceNorm::L2, TimeNorm::L1),
        mk("Q.l1", Part::Med, Regime::All, vec![QEff], dp - 1.0, SpaceNorm::Lp, TimeNorm::L1),
        mk("high.a.linf", Part::High, Regime::MedHigh, vec![A], dp - 1.0, SpaceNorm::Lp, TimeNorm::LInf),
        mk("high.a.l1", Part::High, Regime::MedHigh, vec![A], dp - 1.0, SpaceNorm::Lp, TimeNorm::L1),
        mk("high.vth.linf", Part::High, Regime::MedHigh, vec![V, Theta], dp - 2.0, SpaceNorm::Lp, TimeNorm::LInf),
        mk("high.vth.l1", Part::High, Regime::MedHigh, vec![V, Theta], dp, SpaceNorm::Lp, TimeNorm::L1),
    ]
}

/// Sample times: `[0, τ0]` then doubling octaves up to `t_final`, each split
/// into `m` uniform steps.
pub fn octave_times(tau0: f64, t_final: f64, m: usize) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut a = 0.0;
    let mut b = tau0.min(t_final);
    loop {
        for k in 1..=m {
            out.push(a + (b - a) * k as f64 / m as f64);
        }
        if b >= t_final {
            break;
        }
        a = b;
        b = (2.0 * b).min(t_final);
    }
    out
}

struct NodeSeries {
    nsc: Vec<NodeValue>,
    nsf: Vec<NodeValue>,
}

fn propagate_series(spec: &ModelSpec, u0: Vec<Complex64>, r: f64, times: &[f64]) -> Vec<Vec<Complex64>> {
    let mut out = Vec::with_capacity(times.len());
    let mut u = CVec::from_vec(u0);
    out.push(u.iter().copied().collect());
    let mut last_dt = f64::NAN;
    let mut e = None;
    for w in times.windows(2) {
        let dt = w[1] - w[0];
        if (dt - last_dt).abs() > 1e-14 * dt || e.is_none() {
            e = Some(reduced_step(spec, r, dt));
            last_dt = dt;
        }
        u = e.as_ref().expect("set above") * u;
        out.push(u.iter().copied().collect());
    }
    out
}

fn run_one(nsc: &ModelSpec, cfg: &RelaxConfig, quad: &RadialQuadrature) -> Result<RelaxEntry> {
    let eps = nsc.eps;
    let th = make_thresholds(cfg.big_k, cfg.k, eps)?;
    let nsf = nsc.with_kind(ModelKind::Nsf);
    let d = nsc.d;
    let times = octave_times(0.05 * eps * eps / nsc.alpha, cfg.t_final, cfg.steps_per_octave);
    let factor = match cfg.pairing {
        DataPairing::Identical => 1.0,
        DataPairing::Perturbed { scale } => 1.0 + scale * eps,
    };
    let mut prof_nsc = cfg.profile;
    prof_nsc.weights.fourier_law = cfg.preparation == Preparation::Well;
    if cfg.preparation == Preparation::Ill {
        prof_nsc.weights.q_l = 0.0;
        prof_nsc.weights.sol_q = 0.0;
    }
    let series: Vec<NodeSeries> = quad
        .nodes
        .par_iter()
        .map(|&r| {
            let mut u0 = prof_nsc.reduced_data(nsc, r);
            for z in u0.iter_mut().take(3) {
                *z *= factor;
            }
            let (sv, sq) = prof_nsc.solenoidal_data(nsc, r);
            let sv = sv * factor;
            let un = propagate_series(nsc, u0, r, &times);
            let uf = propagate_series(&nsf, cfg.profile.reduced_data(&nsf, r), r, &times);
            let (svf, _) = cfg.profile.solenoidal_data(&nsf, r);
            let mk = |u: Vec<Complex64>, t: f64, v: f64, q: f64, rate_q: f64| NodeValue {
                reduced: u,
                sol_v: v * (-nsc.visc_mu * r * r * t).exp(),
                sol_q: q * (-rate_q * t).exp(),
            };
            NodeSeries {
                nsc: un
                    .into_iter()
                    .zip(&times)
                    .map(|(u, &t)| mk(u, t, sv, sq, nsc.damping_rate()))
                    .collect(),
                nsf: uf.into_iter().zip(&times).map(|(u, &t)| mk(u, t, svf, 0.0, 0.0)).collect(),
            }
        })
        .collect();
    let mw = quad.measure_weights(d);
    let mut acc = Accumulator::new(xtilde_constituents(d, cfg.p), th, Convention::Disjoint, cfg.p);
    for (ti, &t) in times.iter().enumerate() {
        acc.push(t, |fields, q| {
            let mag2: Vec<f64> = series
                .iter()
                .zip(&quad.nodes)
                .map(|(s, &r)| {
                    let n = &s.nsc[ti];
                    let f = &s.nsf[ti];
                    if fields.iter().any(|(u, _)| *u == Unknown::QEff) {
                        return node_magnitude2(n, nsc, r, fields);
                    }
                    let err = NodeValue {
                        reduced: (0..3).map(|k| n.reduced[k] - f.reduced[k]).collect(),
                        sol_v: n.sol_v - f.sol_v,
                        sol_q: 0.0,
                    };
                    node_magnitude2(&err, &nsf, r, fields)
                })
                .collect();
            radial_band_norms(quad, &mw, d, &mag2, q)
        });
    }
    let x = acc.value();
    if !x.total.is_finite() {
        return Err(Error::NonFinite(format!("X-tilde at eps = {eps}")));
    }
    Ok(RelaxEntry {
        eps,
        xtilde: x.total,
        components: x.constituents,
        time_samples: times.len(),
        skipped: None,
    })
}

/// Runs the sweep. Values of `ε` violating the threshold assumption are
/// skipped with a reason; the slope is fitted over the remaining ones.
pub fn relax_sweep(base: &ModelSpec, cfg: &RelaxConfig, quad: &RadialQuadrature) -> Result<RelaxReport> {
    base.with_kind(ModelKind::Nsc).with_eps(1.0).validate()?;
    if cfg.eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("eps_list", "must be strictly decreasing"));
    }
    if cfg.steps_per_octave < 2 || !(cfg.t_final > 0.0) {
        return Err(Error::invalid("relax", "need steps_per_octave >= 2 and t_final > 0"));
    }
    let entries: Vec<RelaxEntry> = cfg
        .eps_list
        .par_iter()
        .map(|&eps| {
            let spec = base.with_kind(ModelKind::Nsc).with_eps(eps);
            match run_one(&spec, cfg, quad) {
                Ok(e) => Ok(e),
                Err(e @ Error::ThresholdInversion { .. }) => Ok(RelaxEntry {
                    eps,
                    xtilde: f64::NAN,
                    components: BTreeMap::new(),
                    time_samples: 0,
                    skipped: Some(e.to_string()),
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let kept: Vec<&RelaxEntry> = entries.iter().filter(|e| e.skipped.is_none()).collect();
    let (slope_fitted, r_squared) = if kept.len() >= 2 {
        let x: Vec<f64> = kept.iter().map(|e| e.eps.ln()).collect();
        let y: Vec<f64> = kept.iter().map(|e| e.xtilde.ln()).collect();
        let f = linear_fit(&x, &y)?;
        (f.slope, f.r_squared)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(RelaxReport {
        eps_values: kept.iter().map(|e| e.eps).collect(),
        xtilde_values: kept.iter().map(|e| e.xtilde).collect(),
        slope_fitted,
        r_squared,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn octaves_cover_interval() {
        let t = octave_times(0.1, 1.0, 4);
        assert_eq!(t[0], 0.0);
        assert_eq!(*t.last().unwrap(), 1.0);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(t.len(), 1 + 4 * 5);
    }
}
