//! Whole-space linear flow for radial data, evaluated by quadrature in `|ξ|`.
//!
//! A radial profile prescribes, at each `r = |ξ|`, the longitudinal data
//! `(a, ω, θ, q_l)` and the magnitudes of the solenoidal parts of `v` and `q`.
//! Norms are `(2π)^{−d}`-normalised Plancherel integrals over `ℝ^d`.

use crate::besov::floor_log2;
use crate::error::{Error, Result};
use crate::linalg::{expm, CMat, CVec};
use crate::model::{reduced_entries, ModelKind, ModelSpec};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// One quadrature panel, contained in a single dyadic band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Panel {
    pub band: i32,
    pub start: usize,
    pub end: usize,
}

/// Composite Gauss–Legendre rule in `ln r` with dyadic panel breaks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialQuadrature {
    pub r_min: f64,
    pub r_max: f64,
    pub nodes: Vec<f64>,
    /// `∫ g(r) dr ≈ Σ weights[i] g(nodes[i])`
    pub weights: Vec<f64>,
    pub panels: Vec<Panel>,
}

impl RadialQuadrature {
    pub fn new(r_min: f64, r_max: f64, nodes_per_panel: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
            return Err(Error::invalid("radial", format!("need 0 < r_min < r_max, got [{r_min}, {r_max}]")));
        }
        if nodes_per_panel < 2 {
            return Err(Error::invalid("nodes_per_panel", "must be >= 2"));
        }
        let mut breaks = vec![r_min];
        let mut k = floor_log2(r_min) + 1;
        while (k as f64).exp2() < r_max {
            breaks.push((k as f64).exp2());
            k += 1;
        }
        breaks.push(r_max);
        let (gx, gw) = gauss_legendre(nodes_per_panel);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut panels = Vec::new();
        for win in breaks.windows(2) {
            let (ua, ub) = (win[0].ln(), win[1].ln());
            let (mid, half) = (0.5 * (ua + ub), 0.5 * (ub - ua));
            let start = nodes.len();
            for (x, w) in gx.iter().zip(&gw) {
                let r = (mid + half * x).exp();
                nodes.push(r);
                weights.push(w * half * r);
            }
            panels.push(Panel {
                band: floor_log2(win[0]),
                start,
                end: nodes.len(),
            });
        }
        Ok(RadialQuadrature {
            r_min,
            r_max,
            nodes,
            weights,
            panels,
        })
    }

    /// Default rule: `[1e−4, 1e4]`, 20 nodes per dyadic panel.
    pub fn standard() -> Self {
        Self::new(1e-4, 1e4, 20).expect("valid default rule")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Weights of `∫_{ℝ^d} g(|ξ|) dξ / (2π)^d`.
    pub fn measure_weights(&self, d: usize) -> Vec<f64> {
        let c = sphere_area(d) / (2.0 * PI).powi(d as i32);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(r, w)| c * w * r.powi(d as i32 - 1))
            .collect()
    }
}

/// Surface area of the unit sphere in `ℝ^d`.
pub fn sphere_area(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => 2.0 * PI.powf(d as f64 / 2.0) / gamma_half_integer(d as f64 / 2.0),
    }
}

fn gamma_half_integer(x: f64) -> f64 {
    // only half-integers and integers reach here
    if x == 1.0 || x == 0.5 {
        return if x == 1.0 { 1.0 } else { PI.sqrt() };
    }
    (x - 1.0) * gamma_half_integer(x - 1.0)
}

/// Radial envelope of the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum RadialShape {
    /// `r^{σ₁−d/2}` on `r <= cutoff`, zero beyond.
    PowerLaw { cutoff: f64 },
    /// `r^{σ₁−d/2} e^{−(r/width)²}`.
    Gaussian { width: f64 },
}

/// Relative weights of the data components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentWeights {
    pub a: f64,
    pub omega: f64,
    pub theta: f64,
    pub q_l: f64,
    pub sol_v: f64,
    pub sol_q: f64,
    /// Replace `q_l` by the Fourier-law value `(κ/α) r θ`.
    #[serde(default)]
    pub fourier_law: bool,
}

impl ComponentWeights {
    pub fn uniform() -> Self {
        ComponentWeights {
            a: 1.0,
            omega: 1.0,
            theta: 1.0,
            q_l: 1.0,
            sol_v: 1.0,
            sol_q: 1.0,
            fourier_law: false,
        }
    }
}

/// Radial initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialDataProfile {
    pub sigma1: f64,
    pub shape: RadialShape,
    pub weights: ComponentWeights,
}

impl RadialDataProfile {
    pub fn envelope(&self, r: f64, d: usize) -> f64 {
        let base = r.powf(self.sigma1 - d as f64 / 2.0);
        match self.shape {
            RadialShape::PowerLaw { cutoff } => {
                if r <= cutoff {
                    base
                } else {
                    0.0
                }
            }
            RadialShape::Gaussian { width } => base * (-(r / width).powi(2)).exp(),
        }
    }

    /// Longitudinal data vector for the reduced block of `spec`.
    pub fn reduced_data(&self, spec: &ModelSpec, r: f64) -> Vec<Complex64> {
        let e = self.envelope(r, spec.d);
        let w = &self.weights;
        let mut u = vec![w.a * e, w.omega * e, w.theta * e];
        if spec.kind == ModelKind::Nsc {
            let ql = if w.fourier_law { spec.kappa / spec.alpha * r * w.theta } else { w.q_l };
            u.push(ql * e);
        }
        u.into_iter().map(Complex64::from).collect()
    }

    /// Solenoidal magnitudes `(|v_⊥|, |q_⊥|)` of the data.
    pub fn solenoidal_data(&self, spec: &ModelSpec, r: f64) -> (f64, f64) {
        let e = self.envelope(r, spec.d);
        if spec.d == 1 {
            return (0.0, 0.0);
        }
        let q = if spec.kind == ModelKind::Nsc && !self.weights.fourier_law { self.weights.sol_q * e } else { 0.0 };
        (self.weights.sol_v * e, q)
    }
}

/// Which unknowns enter a radial norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormComponents {
    /// `(a, v)`: `|a|² + |ω|² + |v_⊥|²`
    AV,
    /// `(θ, εq)`: `|θ|² + ε²(|q_l|² + |q_⊥|²)`
    ThetaEpsQ,
}

/// Solution of the linear flow at one radial node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeValue {
    pub reduced: Vec<Complex64>,
    pub sol_v: f64,
    pub sol_q: f64,
}

impl NodeValue {
    pub fn magnitude2(&self, spec: &ModelSpec, comps: NormComponents) -> f64 {
        let u = &self.reduced;
        match comps {
            NormComponents::AV => u[0].norm_sqr() + u[1].norm_sqr() + self.sol_v * self.sol_v,
            NormComponents::ThetaEpsQ => {
                let ql = if u.len() > 3 { u[3].norm_sqr() } else { 0.0 };
                u[2].norm_sqr() + spec.eps * spec.eps * (ql + self.sol_q * self.sol_q)
            }
        }
    }
}

/// `exp(tM(r))` applied to the data at node `r`.
pub fn node_value(spec: &ModelSpec, prof: &RadialDataProfile, r: f64, t: f64) -> NodeValue {
    let u0 = prof.reduced_data(spec, r);
    let (sv, sq) = prof.solenoidal_data(spec, r);
    let reduced = if t == 0.0 {
        u0
    } else {
        let e = expm(&reduced_entries(spec, r).map(|z| z * t));
        (&e * CVec::from_column_slice(&u0)).iter().copied().collect()
    };
    let sol_q = if spec.kind == ModelKind::Nsc { sq * (-spec.damping_rate() * t).exp() } else { 0.0 };
    NodeValue {
        reduced,
        sol_v: sv * (-spec.visc_mu * r * r * t).exp(),
        sol_q,
    }
}

/// Propagator matrix of the reduced block for a step `dt` at node `r`.
pub fn reduced_step(spec: &ModelSpec, r: f64, dt: f64) -> CMat {
    expm(&reduced_entries(spec, r).map(|z| z * dt))
}

/// `‖Λ^σ U(t)‖` over `ℝ^d` for each time. `p = 2` is exact Plancherel;
/// `p > 2` uses the band proxy `Σ_j 2^{j(σ + d/2 − d/p)} ‖U_j‖_{L²}`.
pub fn radial_semigroup_norms(
    spec: &ModelSpec,
    prof: &RadialDataProfile,
    quad: &RadialQuadrature,
    p: f64,
    sigma: f64,
    times: &[f64],
    comps: NormComponents,
) -> Result<Vec<f64>> {
    spec.validate()?;
    if !matches!(spec.kind, ModelKind::Nsc | ModelKind::Nsf) {
        return Err(Error::Precondition("radial norms need NSC or NSF".into()));
    }
    if !(p >= 2.0) {
        return Err(Error::invalid("p", format!("must be >= 2, got {p}")));
    }
    let d = spec.d;
    let mw = quad.measure_weights(d);
    times
        .iter()
        .map(|&t| {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::invalid("t", format!("must be finite and >= 0, got {t}")));
            }
            let dens: Vec<f64> = quad
                .nodes
                .par_iter()
                .zip(mw.par_iter())
                .map(|(&r, &w)| w * node_value(spec, prof, r, t).magnitude2(spec, comps))
                .collect();
            let norm = if p == 2.0 {
                quad.nodes
                    .iter()
                    .zip(&dens)
                    .map(|(r, m)| r.powf(2.0 * sigma) * m)
                    .sum::<f64>()
                    .sqrt()
            } else {
                let expo = sigma + d as f64 / 2.0 - d as f64 / p;
                quad.panels
                    .iter()
                    .map(|pn| (pn.band as f64 * expo).exp2() * dens[pn.start..pn.end].iter().sum::<f64>().sqrt())
                    .sum()
            };
            if !norm.is_finite() {
                return Err(Error::NonFinite(format!("radial norm at t = {t}")));
            }
            if norm == 0.0 && t > 0.0 {
                return Err(Error::Underflow { t });
            }
            Ok(norm)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(20);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(38)).sum();
        assert!((s - 2.0 / 39.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn panels_are_dyadic() {
        let q = RadialQuadrature::standard();
        assert!(q.len() >= 512);
        for p in &q.panels {
            for &r in &q.nodes[p.start..p.end] {
                assert_eq!(floor_log2(r), p.band);
            }
        }
        let s: f64 = q.weights.iter().sum();
        assert!((s - (1e4 - 1e-4)).abs() < 1e-8 * 1e4);
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-12);
        assert!((sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
    }
}
