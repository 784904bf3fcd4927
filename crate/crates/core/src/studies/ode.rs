//! The functional `ℒ₁ = ℒ^ℓ + ℒ^{m,ε} + ℒ^{h,ε}` along radial linear flows,
//! compared with the envelope of the differential inequality
//! `ℒ' + c₀ ℒ^{1+2/m} <= 0`.

use super::{linear_fit, LineFit};
use crate::besov::{Convention, Regime, Thresholds};
use crate::diagnostics::{snapshot_value, Constituent, Part, SpaceNorm, TimeNorm, Unknown};
use crate::error::{Error, Result};
use crate::evolve::radial::{node_value, RadialDataProfile, RadialQuadrature};
use crate::model::{ModelKind, ModelSpec};
use rayon::prelude::*;
use serde::Serialize;

use super::{node_magnitude2, radial_band_norms};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdeCompareReport {
    pub eps: f64,
    pub m: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub derivatives: Vec<f64>,
    /// `min_t (−ℒ')/ℒ^{1+2/m}` over the samples.
    pub c0: f64,
    pub envelope: Vec<f64>,
    /// `max_t ℒ(t)/envelope(t)`.
    pub max_ratio: f64,
    pub large_t_fit: Option<LineFit>,
    pub fit_window: (f64, f64),
}

/// Constituents of `ℒ₁`.
pub fn ode_constituents(d: usize, p: f64, eps: f64) -> Vec<Constituent> {
    use Unknown::*;
    let (dd, dp) = (d as f64, d as f64 / p);
    let mk = |name: &str, part, regime, fields: Vec<(Unknown, f64)>, s, space| Constituent {
        name: name.to_string(),
        part,
        regime,
        fields,
        s,
        space,
        time: TimeNorm::LInf,
        weight: 1.0,
    };
    let (lo, me, hi) = (Part::Low, Part::Med, Part::High);
    let (rl, rm, rh) = (Regime::Low, Regime::Med, Regime::High);
    let (s2, lp) = (SpaceNorm::L2, SpaceNorm::Lp);
    vec![
        mk("l", lo, rl, vec![(A, 1.0), (V, 1.0), (Theta, 1.0), (Q, eps)], dd / 2.0 - 1.0, s2),
        mk("m.a", me, rm, vec![(A, 1.0)], dp, lp),
        mk("m.w", me, rm, vec![(W, 1.0)], dp - 1.0, lp),
        mk("m.Q", me, rm, vec![(QEff, eps)], dp - 2.0, lp),
        mk("m.theta", me, rm, vec![(Theta, 1.0)], dp - 2.0, lp),
        mk("h.a", hi, rh, vec![(A, eps)], dd / 2.0 + 1.0, s2),
        mk("h.w", hi, rh, vec![(W, eps)], dd / 2.0, s2),
        mk("h.theta", hi, rh, vec![(Theta, eps * eps)], dd / 2.0 + 1.0, s2),
        mk("h.q", hi, rh, vec![(Q, eps.powi(3))], dd / 2.0 + 1.0, s2),
    ]
}

/// `ℒ₁` of the radial NSC flow at time `t`.
pub fn lyapunov_value(
    spec: &ModelSpec,
    prof: &RadialDataProfile,
    quad: &RadialQuadrature,
    th: &Thresholds,
    p: f64,
    t: f64,
) -> f64 {
    let d = spec.d;
    let mw = quad.measure_weights(d);
    let nodes: Vec<_> = quad.nodes.par_iter().map(|&r| node_value(spec, prof, r, t)).collect();
    let items = ode_constituents(d, p, spec.eps);
    snapshot_value(&items, th, Convention::Disjoint, p, |fields, q| {
        let mag2: Vec<f64> = nodes
            .iter()
            .zip(&quad.nodes)
            .map(|(n, &r)| node_magnitude2(n, spec, r, fields))
            .collect();
        radial_band_norms(quad, &mw, d, &mag2, q)
    })
}

/// Samples `ℒ₁` and its 5-point derivative (step `10⁻³t`) at `times`,
/// fits `c₀` and the envelope `(ℒ₀^{−2/m} + (2c₀/m)(t − t₀))^{−m/2}`, and the
/// slope of `log ℒ₁` against `log t` on `fit_window`.
#[allow(clippy::too_many_arguments)]
pub fn lyapunov_ode_compare(
    spec: &ModelSpec,
    prof: &RadialDataProfile,
    quad: &RadialQuadrature,
    th: &Thresholds,
    p: f64,
    m: f64,
    times: &[f64],
    fit_window: (f64, f64),
) -> Result<OdeCompareReport> {
    spec.validate()?;
    if spec.kind != ModelKind::Nsc {
        return Err(Error::Precondition("the functional comparison needs the NSC model".into()));
    }
    if !(m > 0.0) {
        return Err(Error::invalid("m", "must be > 0"));
    }
    if times.len() < 2 || times.iter().any(|t| !(*t > 0.0)) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("times", "need >= 2 increasing positive times"));
    }
    let value = |t: f64| lyapunov_value(spec, prof, quad, th, p, t);
    let mut values = Vec::with_capacity(times.len());
    let mut derivatives = Vec::with_capacity(times.len());
    for &t in times {
        let h = 1e-3 * t;
        let f: Vec<f64> = [-2.0, -1.0, 1.0, 2.0].iter().map(|o| value(t + o * h)).collect();
        let v = value(t);
        if !v.is_finite() || f.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("functional at t = {t}")));
        }
        if v == 0.0 {
            return Err(Error::Underflow { t });
        }
        values.push(v);
        derivatives.push((f[0] - 8.0 * f[1] + 8.0 * f[2] - f[3]) / (12.0 * h));
    }
    let c0 = values
        .iter()
        .zip(&derivatives)
        .map(|(v, dv)| -dv / v.powf(1.0 + 2.0 / m))
        .fold(f64::INFINITY, f64::min);
    let (t0, l0) = (times[0], values[0]);
    let envelope: Vec<f64> = times
        .iter()
        .map(|&t| (l0.powf(-2.0 / m) + 2.0 * c0 / m * (t - t0)).powf(-m / 2.0))
        .collect();
    let max_ratio = values.iter().zip(&envelope).map(|(v, e)| v / e).fold(0.0, f64::max);
    let (x, y): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(&values)
        .filter(|(&t, _)| t >= fit_window.0 && t <= fit_window.1)
        .map(|(&t, &v)| (t.ln(), v.ln()))
        .unzip();
    let large_t_fit = if x.len() >= 5 { Some(linear_fit(&x, &y)?) } else { None };
    Ok(OdeCompareReport {
        eps: spec.eps,
        m,
        times: times.to_vec(),
        values,
        derivatives,
        c0,
        envelope,
        max_ratio,
        large_t_fit,
        fit_window,
    })
}
