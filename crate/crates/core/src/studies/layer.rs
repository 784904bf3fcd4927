//! Initial layer of the effective flux `Q = αq + κ∇θ` on the torus.

use super::{linear_fit, LineFit};
use crate::diagnostics::effective_unknowns;
use crate::error::{Error, Result};
use crate::evolve::{evolve_linear, lattice_symbol};
use crate::model::{eigenvalues_of, ModelKind, ModelSpec};
use crate::spectral::{Grid, SpectralField, State};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerReport {
    pub eps: f64,
    /// `−slope` of `log ‖Q(t)‖`, absent when `Q(0)` is below the floor.
    pub rate_fitted: Option<f64>,
    /// `−min Re λ` of the symbol at the dominant data mode.
    pub rate_oracle: f64,
    pub fit: Option<LineFit>,
    pub window: (f64, f64),
    pub max_q_norm: f64,
    pub times: Vec<f64>,
    pub q_norms: Vec<f64>,
}

/// Below this `‖Q(0)‖` (relative to `‖θ₀‖`) no layer is fitted.
pub const Q_FLOOR: f64 = 1e-12;

/// `θ₀` a single real mode with `‖θ₀‖_{L²} = 1`; `q₀ = 0` or, when
/// `well_prepared`, the Fourier-law flux.
pub fn layer_data(grid: Grid, spec: &ModelSpec, mode: &[i64], well_prepared: bool) -> Result<State> {
    if mode.len() != grid.d || mode.iter().all(|&m| m == 0) {
        return Err(Error::invalid("mode", "needs d nonzero-wavenumber entries"));
    }
    let theta = SpectralField::real_mode(grid, mode, Complex64::new(1.0, 0.0));
    let mut s = State::zeros(grid);
    s.theta = theta.scale(1.0 / theta.l2_norm());
    if well_prepared {
        s.q = crate::evolve::fourier_law_flux(&s.theta, spec);
    }
    Ok(s)
}

/// Samples `‖Q(t)‖` on `[0, window·ε²/α]` and fits its exponential rate.
pub fn initial_layer(spec: &ModelSpec, state0: &State, window: f64, nsamples: usize) -> Result<LayerReport> {
    if spec.kind != ModelKind::Nsc {
        return Err(Error::Precondition("initial layer needs the NSC model".into()));
    }
    if nsamples < 50 {
        return Err(Error::Precondition(format!("layer fit needs >= 50 samples, got {nsamples}")));
    }
    if !(window > 0.0) {
        return Err(Error::invalid("window", "must be > 0"));
    }
    let grid = state0.grid;
    let t_end = window * spec.eps * spec.eps / spec.alpha;
    let times: Vec<f64> = (0..nsamples).map(|k| t_end * k as f64 / (nsamples - 1) as f64).collect();
    let q_norms = times
        .iter()
        .map(|&t| {
            let s = evolve_linear(state0, spec, t)?;
            let e = effective_unknowns(&s, spec)?;
            Ok(e.q_eff.iter().map(|f| f.l2_norm().powi(2)).sum::<f64>().sqrt())
        })
        .collect::<Result<Vec<f64>>>()?;
    let dominant = (0..grid.len())
        .filter(|&i| !grid.is_nyquist(i) && grid.xi_norm2(i) > 0.0)
        .max_by(|&i, &k| {
            state0.theta.coeffs[i]
                .norm()
                .partial_cmp(&state0.theta.coeffs[k].norm())
                .expect("finite coefficients")
        })
        .ok_or_else(|| Error::Precondition("grid has no nonzero modes".into()))?;
    let rate_oracle = -eigenvalues_of(&lattice_symbol(spec, &grid, dominant))
        .iter()
        .map(|z| z.re)
        .fold(f64::INFINITY, f64::min);
    let max_q_norm = q_norms.iter().copied().fold(0.0, f64::max);
    let floor = Q_FLOOR * state0.theta.l2_norm();
    let fit = if q_norms[0] > floor {
        let (x, y): (Vec<f64>, Vec<f64>) = times
            .iter()
            .zip(&q_norms)
            .filter(|(_, &q)| q > floor)
            .map(|(&t, &q)| (t, q.ln()))
            .unzip();
        let f = linear_fit(&x, &y)?;
        if f.r_squared < 0.99 {
            return Err(Error::Unresolved(format!(
                "log|Q| is not linear on [0, {t_end:e}]: r^2 = {:.4}",
                f.r_squared
            )));
        }
        Some(f)
    } else {
        None
    };
    Ok(LayerReport {
        eps: spec.eps,
        rate_fitted: fit.map(|f| -f.slope),
        rate_oracle,
        fit,
        window: (0.0, t_end),
        max_q_norm,
        times,
        q_norms,
    })
}
