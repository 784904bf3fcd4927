//! Quantitative experiments built on the propagators and diagnostics.

use crate::diagnostics::Unknown;
use crate::error::{Error, Result};
use crate::evolve::radial::{NodeValue, RadialQuadrature};
use crate::model::ModelSpec;
use serde::Serialize;
use std::collections::BTreeMap;

pub mod decay;
pub mod layer;
pub mod ode;
pub mod relax;

pub use decay::{decay_fit, theory_exponent, DecayReport};
pub use layer::{initial_layer, LayerReport};
pub use ode::{lyapunov_ode_compare, OdeCompareReport};
pub use relax::{relax_sweep, DataPairing, Preparation, RelaxConfig, RelaxEntry, RelaxReport};

/// Least-squares line and its coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Precondition(format!("fit needs >= 2 paired samples, got {} and {}", x.len(), y.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("fit samples".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Precondition("fit abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(LineFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Fitted against theoretical exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    pub exponent_fitted: f64,
    pub exponent_theory: f64,
    pub r_squared: f64,
    pub fit_window: (f64, f64),
    pub samples: usize,
    /// `r² >= 0.98`; otherwise the window is flagged as pre-asymptotic.
    pub clean: bool,
}

impl FitResult {
    pub fn relative_error(&self) -> f64 {
        ((self.exponent_fitted - self.exponent_theory) / self.exponent_theory).abs()
    }
}

/// `n` logarithmically spaced points in `[a, b]`.
pub fn log_space(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|k| (la + (lb - la) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

/// `|U|²` at one radial node for a weighted tuple of unknowns.
pub(crate) fn node_magnitude2(v: &NodeValue, spec: &ModelSpec, r: f64, fields: &[(Unknown, f64)]) -> f64 {
    let u = &v.reduced;
    let ql = u.get(3).copied().unwrap_or_else(|| u[2] * (spec.kappa / spec.alpha * r));
    fields
        .iter()
        .map(|&(f, c)| {
            let m2 = match f {
                Unknown::A => u[0].norm_sqr(),
                Unknown::V => u[1].norm_sqr() + v.sol_v * v.sol_v,
                Unknown::Theta => u[2].norm_sqr(),
                Unknown::Q => ql.norm_sqr() + v.sol_q * v.sol_q,
                Unknown::QEff => {
                    (ql * spec.alpha - u[2] * (spec.kappa * r)).norm_sqr() + (spec.alpha * v.sol_q).powi(2)
                }
                Unknown::W => (u[1] - u[0] / r).norm_sqr() + v.sol_v * v.sol_v,
            };
            c * c * m2
        })
        .sum()
}

/// Band norms from per-node `|U|²` and measure weights: exact `L²` band
/// norms, with the Bernstein factor `2^{jd(1/2−1/q)}` for `q > 2`.
pub(crate) fn radial_band_norms(quad: &RadialQuadrature, mw: &[f64], d: usize, mag2: &[f64], q: f64) -> BTreeMap<i32, f64> {
    quad.panels
        .iter()
        .map(|pn| {
            let s: f64 = (pn.start..pn.end).map(|i| mw[i] * mag2[i]).sum();
            let factor = (pn.band as f64 * d as f64 * (0.5 - 1.0 / q)).exp2();
            (pn.band, factor * s.sqrt())
        })
        .collect()
}
