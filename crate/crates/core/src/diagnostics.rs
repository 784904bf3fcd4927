//! Effective unknowns, band Lyapunov functionals, dissipation residuals and
//! time-accumulated Besov functionals.

use crate::besov::{band_of_r2, band_project, grid_bands, tuple_lp_norm, Convention, Regime, Thresholds};
use crate::error::{Error, Result};
use crate::evolve::Trajectory;
use crate::linalg::{hermitian_min_eigenvalue, CMat};
use crate::model::{symbol_entries, ModelKind, ModelSpec};
use crate::spectral::{div, grad, Grid, Multiplier, SpectralField, State};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;

/// `Q = αq + κ∇θ` and `w = v + (−Δ)^{−1}∇a`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveState {
    pub q_eff: Vec<SpectralField>,
    pub w: Vec<SpectralField>,
}

pub fn effective_unknowns(state: &State, spec: &ModelSpec) -> Result<EffectiveState> {
    if spec.d != state.grid.d {
        return Err(Error::Dimension(format!("model dimension {} on a {}-dimensional grid", spec.d, state.grid.d)));
    }
    let gt = grad(&state.theta);
    let q_eff = state
        .q
        .iter()
        .zip(&gt)
        .map(|(q, g)| {
            let mut out = q.scale(spec.alpha);
            out.axpy(spec.kappa, g);
            out
        })
        .collect();
    let w = state
        .v
        .iter()
        .zip(grad(&state.a))
        .map(|(v, ga)| Ok(v.add(&ga.apply(Multiplier::InvNegLaplacian)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(EffectiveState { q_eff, w })
}

/// Largest modulus of the spectral curl `ξ_i c_j − ξ_j c_i` of a tuple.
pub fn curl_defect(fields: &[SpectralField]) -> f64 {
    let g = fields[0].grid;
    let mut worst: f64 = 0.0;
    for idx in 0..g.len() {
        if g.is_nyquist(idx) {
            continue;
        }
        let xi = g.xi(idx);
        for i in 0..g.d {
            for j in (i + 1)..g.d {
                let c = fields[j].coeffs[idx] * xi[i] - fields[i].coeffs[idx] * xi[j];
                worst = worst.max(c.norm());
            }
        }
    }
    worst
}

/// One band functional and its pieces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovValue {
    pub j: i32,
    pub value: f64,
    /// Plain quadratic part.
    pub norm_part: f64,
    /// Hypocoercive cross term.
    pub cross_part: f64,
    /// Density-weight correction `(β/κ)∫J(a)|εq_j|²` (high functional only).
    pub weight_part: f64,
}

fn sum_sq(fields: &[&SpectralField]) -> f64 {
    fields.iter().map(|f| f.l2_norm().powi(2)).sum()
}

fn cross(vs: &[SpectralField], s: &SpectralField) -> f64 {
    // ∫ v·∇s
    grad(s).iter().zip(vs).map(|(g, v)| v.inner(g)).sum()
}

fn check_eta(eta: f64, max: f64, name: &str) -> Result<()> {
    if eta > 0.0 && eta <= max {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must lie in (0, {max}], got {eta}")))
    }
}

/// `‖(a_j, v_j, θ_j)‖² + η 2^{−j} ∫ v_j·∇a_j`.
pub fn lyapunov_low(state: &State, j: i32, eta: f64) -> Result<LyapunovValue> {
    check_eta(eta, 0.25, "eta")?;
    let a = band_project(&state.a, j);
    let th = band_project(&state.theta, j);
    let v: Vec<SpectralField> = state.v.iter().map(|f| band_project(f, j)).collect();
    let mut all = vec![&a, &th];
    all.extend(v.iter());
    let norm_part = sum_sq(&all);
    let cross_part = eta * (-j as f64).exp2() * cross(&v, &a);
    Ok(LyapunovValue {
        j,
        value: norm_part + cross_part,
        norm_part,
        cross_part,
        weight_part: 0.0,
    })
}

/// `‖θ_j‖² + (β/κ)∫(1+J(a))|εq_j|² + η 2^{−2j} ∫ q_j·∇θ_j`. The density
/// weight uses the state's `a` when `density_weight` is set, and `1` otherwise.
pub fn lyapunov_high(state: &State, j: i32, eta: f64, spec: &ModelSpec, density_weight: bool) -> Result<LyapunovValue> {
    if !(eta > 0.0) {
        return Err(Error::invalid("eta", format!("must be > 0, got {eta}")));
    }
    let th = band_project(&state.theta, j);
    let q: Vec<SpectralField> = state.q.iter().map(|f| band_project(f, j)).collect();
    let qw = spec.beta / spec.kappa * spec.eps * spec.eps;
    let qrefs: Vec<&SpectralField> = q.iter().collect();
    let norm_part = th.l2_norm().powi(2) + qw * sum_sq(&qrefs);
    let mut weight_part = 0.0;
    if density_weight {
        let a = state.a.to_physical_real();
        if let Some((i, x)) = a.iter().enumerate().find(|(_, x)| x.abs() >= 1.0) {
            return Err(Error::Precondition(format!("|a| = {} >= 1 at sample {i}", x.abs())));
        }
        let phys: Vec<Vec<f64>> = q.iter().map(|f| f.to_physical_real()).collect();
        let dv = state.grid.cell_volume();
        weight_part = qw
            * (0..a.len())
                .map(|x| a[x] / (1.0 + a[x]) * phys.iter().map(|c| c[x] * c[x]).sum::<f64>())
                .sum::<f64>()
            * dv;
    }
    let cross_part = eta * (-2.0 * j as f64).exp2() * cross(&q, &th);
    Ok(LyapunovValue {
        j,
        value: norm_part + weight_part + cross_part,
        norm_part,
        cross_part,
        weight_part,
    })
}

/// Squared equivalence target of the high functional, `‖θ_j‖² + ‖εq_j‖²`.
pub fn high_target(state: &State, j: i32, eps: f64) -> f64 {
    let th = band_project(&state.theta, j);
    let q: f64 = state.q.iter().map(|f| band_project(f, j).l2_norm().powi(2)).sum();
    th.l2_norm().powi(2) + eps * eps * q
}

/// Hermitian matrix of the low functional on `(a, v, θ)` at `ξ`.
pub fn low_form(d: usize, xi: &[f64], j: i32, eta: f64) -> CMat {
    let n = d + 2;
    let mut h = CMat::identity(n, n);
    let e = eta * (-j as f64).exp2();
    for i in 0..d {
        let z = Complex64::new(0.0, 0.5 * e * xi[i]);
        h[(1 + i, 0)] = z;
        h[(0, 1 + i)] = z.conj();
    }
    h
}

/// Hermitian matrix of the (linear) high functional on `(θ, q)` at `ξ`.
pub fn high_form(spec: &ModelSpec, xi: &[f64], j: i32, eta: f64) -> CMat {
    let d = spec.d;
    let n = d + 1;
    let mut h = CMat::identity(n, n);
    let qw = spec.beta / spec.kappa * spec.eps * spec.eps;
    let e = eta * (-2.0 * j as f64).exp2();
    for i in 0..d {
        h[(1 + i, 1 + i)] = Complex64::from(qw);
        let z = Complex64::new(0.0, 0.5 * e * xi[i]);
        h[(1 + i, 0)] = z;
        h[(0, 1 + i)] = z.conj();
    }
    h
}

/// Restriction of the NSC symbol to `(θ, q)`.
fn high_block(spec: &ModelSpec, xi: &[f64]) -> CMat {
    let full = symbol_entries(spec, xi);
    let d = spec.d;
    let idx: Vec<usize> = (d + 1..2 * d + 2).collect();
    CMat::from_fn(d + 1, d + 1, |i, k| full[(idx[i], idx[k])])
}

/// Regime handled by a dissipation check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LyapunovRegime {
    Low,
    High,
}

fn check_band(regime: LyapunovRegime, j: i32, th: &Thresholds) -> Result<()> {
    match regime {
        LyapunovRegime::Low if j > th.j0 => Err(Error::Regime(format!("low functional needs j <= J0 = {}, got {j}", th.j0))),
        LyapunovRegime::High if j < th.jeps - 1 => Err(Error::Regime(format!(
            "high functional needs j >= J_eps - 1 = {}, got {j}",
            th.jeps - 1
        ))),
        _ => Ok(()),
    }
}

fn band_modes(grid: &Grid, j: i32) -> Vec<usize> {
    (0..grid.len())
        .filter(|&i| !grid.is_nyquist(i) && band_of_r2(grid.xi_norm2(i)) == Some(j))
        .collect()
}

/// Best dissipation constant: the smallest, over the band's lattice modes, of
/// `λ_min(−(HM + M*H))` relative to the dissipation weight (`4^j` on
/// `(a, v, θ)` for low bands, `diag(ε^{−2}, 1)` on `(θ, q)` for high bands).
pub fn calibrate(spec: &ModelSpec, grid: &Grid, j: i32, regime: LyapunovRegime, eta: f64) -> Result<f64> {
    if spec.kind != ModelKind::Nsc {
        return Err(Error::Precondition("dissipation calibration needs the NSC model".into()));
    }
    let modes = band_modes(grid, j);
    if modes.is_empty() {
        return Err(Error::Precondition(format!("band {j} has no lattice modes")));
    }
    let d = spec.d;
    let nsf = spec.with_kind(ModelKind::Nsf);
    let mut c = f64::INFINITY;
    for idx in modes {
        let xi = &grid.xi(idx)[..d];
        let val = match regime {
            LyapunovRegime::Low => {
                let h = low_form(d, xi, j, eta);
                let m = symbol_entries(&nsf, xi);
                let k = -(&h * &m + m.adjoint() * &h);
                hermitian_min_eigenvalue(&k) / (2.0 * j as f64).exp2()
            }
            LyapunovRegime::High => {
                let h = high_form(spec, xi, j, eta);
                let m = high_block(spec, xi);
                let k = -(&h * &m + m.adjoint() * &h);
                let mut s = CMat::identity(d + 1, d + 1);
                s[(0, 0)] = Complex64::from(spec.eps);
                hermitian_min_eigenvalue(&(&s * k * &s))
            }
        };
        c = c.min(val);
    }
    Ok(c)
}

/// One sample of a dissipation check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualSample {
    pub t: f64,
    pub lyapunov: f64,
    pub derivative: f64,
    pub dissipation: f64,
    pub remainder: f64,
    /// `dℒ/dt + c·dissipation − remainder`; non-positive up to differencing error.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub j: i32,
    pub regime: LyapunovRegime,
    pub eta: f64,
    pub c: f64,
    pub samples: Vec<ResidualSample>,
    pub max_residual: f64,
}

fn band_quantities(state: &State, spec: &ModelSpec, j: i32, regime: LyapunovRegime, eta: f64) -> Result<(f64, f64, f64)> {
    match regime {
        LyapunovRegime::Low => {
            let l = lyapunov_low(state, j, eta)?;
            let dissipation = (2.0 * j as f64).exp2() * l.norm_part;
            let eff = effective_unknowns(state, spec)?;
            let qj: Vec<SpectralField> = eff.q_eff.iter().map(|f| band_project(f, j)).collect();
            let remainder = 2.0 * spec.beta / spec.alpha
                * div(&qj)?.l2_norm()
                * band_project(&state.theta, j).l2_norm();
            Ok((l.value, dissipation, remainder))
        }
        LyapunovRegime::High => {
            let l = lyapunov_high(state, j, eta, spec, false)?;
            let th = band_project(&state.theta, j).l2_norm();
            let q: f64 = state.q.iter().map(|f| band_project(f, j).l2_norm().powi(2)).sum::<f64>().sqrt();
            let vj: Vec<SpectralField> = state.v.iter().map(|f| band_project(f, j)).collect();
            let dv = div(&vj)?.l2_norm();
            let dissipation = th * th / (spec.eps * spec.eps) + q * q;
            let remainder = spec.gamma * dv * (2.0 * th + 2.0 * eta * (-j as f64).exp2() * q);
            Ok((l.value, dissipation, remainder))
        }
    }
}

/// Dissipation residual of a band functional along a zero-source linear
/// trajectory. Derivatives use the 5-point centered stencil at every
/// snapshot whose four neighbours are equally spaced around it.
pub fn dissipation_residual(
    traj: &Trajectory,
    j: i32,
    regime: LyapunovRegime,
    spec: &ModelSpec,
    th: &Thresholds,
    eta: f64,
) -> Result<ResidualReport> {
    check_band(regime, j, th)?;
    let Some(first) = traj.states.first() else {
        return Err(Error::Precondition("empty trajectory".into()));
    };
    let c = calibrate(spec, &first.grid, j, regime, eta)?;
    let n = traj.len();
    let mut samples = Vec::new();
    let mut lyap_cache: Vec<Option<f64>> = vec![None; n];
    for i in 2..n.saturating_sub(2) {
        let t = &traj.times;
        let h = t[i + 1] - t[i];
        let uniform = h > 0.0
            && [-2i64, -1, 1, 2]
                .iter()
                .all(|&k| ((t[(i as i64 + k) as usize] - t[i]) - k as f64 * h).abs() <= 1e-9 * h.abs().max(t[i].abs() * 1e-7));
        if !uniform {
            continue;
        }
        let mut lv = |k: usize| -> Result<f64> {
            if let Some(v) = lyap_cache[k] {
                return Ok(v);
            }
            let v = band_quantities(&traj.states[k], spec, j, regime, eta)?.0;
            lyap_cache[k] = Some(v);
            Ok(v)
        };
        let derivative = (lv(i - 2)? - 8.0 * lv(i - 1)? + 8.0 * lv(i + 1)? - lv(i + 2)?) / (12.0 * h);
        let (lyapunov, dissipation, remainder) = band_quantities(&traj.states[i], spec, j, regime, eta)?;
        samples.push(ResidualSample {
            t: t[i],
            lyapunov,
            derivative,
            dissipation,
            remainder,
            residual: derivative + c * dissipation - remainder,
        });
    }
    let max_residual = samples.iter().map(|s| s.residual).fold(f64::NEG_INFINITY, f64::max);
    Ok(ResidualReport {
        j,
        regime,
        eta,
        c,
        samples,
        max_residual,
    })
}

/// Time norm of a constituent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeNorm {
    /// Chemin–Lerner `L^∞_t`: per-band running maximum, then band sum.
    LInf,
    /// `L^1_t`: per-band trapezoid integral.
    L1,
    /// Chemin–Lerner `L^2_t`: per-band square root of the integral of squares.
    L2,
}

/// Unknowns available to functionals. Their meaning is fixed by the band
/// provider (the relaxation study reinterprets them as error unknowns).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Unknown {
    A,
    V,
    Theta,
    Q,
    /// `Q = αq + κ∇θ`
    QEff,
    /// `w = v + (−Δ)^{−1}∇a`
    W,
}

/// Integrability of the spatial norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceNorm {
    L2,
    /// The study exponent `p`.
    Lp,
}

/// Frequency part of `X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Part {
    Low,
    Med,
    High,
}

/// One semi-norm term `weight · ‖(c₁f₁, c₂f₂, …)‖^{regime}_{T(Ḃ^s)}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constituent {
    pub name: String,
    pub part: Part,
    pub regime: Regime,
    pub fields: Vec<(Unknown, f64)>,
    pub s: f64,
    pub space: SpaceNorm,
    pub time: TimeNorm,
    pub weight: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
struct BandAcc {
    max: f64,
    integral: f64,
    last: Option<(f64, f64)>,
}

/// Running accumulator of time-mixed band norms.
#[derive(Debug, Clone, PartialEq)]
pub struct Accumulator {
    pub th: Thresholds,
    pub conv: Convention,
    pub p: f64,
    pub items: Vec<Constituent>,
    acc: Vec<BTreeMap<i32, BandAcc>>,
}

/// Values of `X` and of every constituent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XFunctional {
    pub x_low: f64,
    pub x_med: f64,
    pub x_high: f64,
    pub total: f64,
    pub constituents: BTreeMap<String, f64>,
}

impl Accumulator {
    pub fn new(items: Vec<Constituent>, th: Thresholds, conv: Convention, p: f64) -> Self {
        let acc = vec![BTreeMap::new(); items.len()];
        Accumulator { th, conv, p, items, acc }
    }

    /// Feeds one snapshot. `bands(fields, q)` returns the band norms in
    /// `L^q` of the weighted tuple.
    pub fn push(&mut self, t: f64, mut bands: impl FnMut(&[(Unknown, f64)], f64) -> BTreeMap<i32, f64>) {
        let mut cache: BTreeMap<(Vec<(Unknown, u64)>, u64), BTreeMap<i32, f64>> = BTreeMap::new();
        for (item, acc) in self.items.iter().zip(self.acc.iter_mut()) {
            let q = match item.space {
                SpaceNorm::L2 => 2.0,
                SpaceNorm::Lp => self.p,
            };
            let key = (
                item.fields.iter().map(|(u, c)| (*u, c.to_bits())).collect::<Vec<_>>(),
                q.to_bits(),
            );
            let norms = cache.entry(key).or_insert_with(|| bands(&item.fields, q));
            for (&j, &n) in norms.iter() {
                if !item.regime.contains(j, &self.th, self.conv) {
                    continue;
                }
                let b = acc.entry(j).or_default();
                b.max = b.max.max(n);
                let val = if item.time == TimeNorm::L2 { n * n } else { n };
                if let Some((t0, v0)) = b.last {
                    b.integral += 0.5 * (t - t0) * (v0 + val);
                }
                b.last = Some((t, val));
            }
        }
    }

    pub fn constituent_value(&self, k: usize) -> f64 {
        let item = &self.items[k];
        item.weight
            * self.acc[k]
                .iter()
                .map(|(&j, b)| {
                    let v = match item.time {
                        TimeNorm::LInf => b.max,
                        TimeNorm::L1 => b.integral,
                        TimeNorm::L2 => b.integral.sqrt(),
                    };
                    (j as f64 * item.s).exp2() * v
                })
                .sum::<f64>()
    }

    pub fn value(&self) -> XFunctional {
        let mut parts = [0.0; 3];
        let mut constituents = BTreeMap::new();
        for (k, item) in self.items.iter().enumerate() {
            let v = self.constituent_value(k);
            parts[item.part as usize] += v;
            constituents.insert(item.name.clone(), v);
        }
        XFunctional {
            x_low: parts[0],
            x_med: parts[1],
            x_high: parts[2],
            total: parts.iter().sum(),
            constituents,
        }
    }
}

/// Instantaneous value `Σ weight·Σ_j 2^{js} n_j` of a list of constituents
/// (time norms ignored).
pub fn snapshot_value(
    items: &[Constituent],
    th: &Thresholds,
    conv: Convention,
    p: f64,
    mut bands: impl FnMut(&[(Unknown, f64)], f64) -> BTreeMap<i32, f64>,
) -> f64 {
    items
        .iter()
        .map(|item| {
            let q = if item.space == SpaceNorm::L2 { 2.0 } else { p };
            item.weight
                * bands(&item.fields, q)
                    .iter()
                    .filter(|(&j, _)| item.regime.contains(j, th, conv))
                    .map(|(&j, &n)| (j as f64 * item.s).exp2() * n)
                    .sum::<f64>()
        })
        .sum()
}

/// Constituents of `X = X^ℓ + X^{m,ε} + X^{h,ε}`.
pub fn x_constituents(d: usize, p: f64, eps: f64) -> Vec<Constituent> {
    use SpaceNorm::{Lp, L2 as S2};
    use TimeNorm::{LInf, L1, L2};
    use Unknown::*;
    let (dd, dp) = (d as f64, d as f64 / p);
    let one = |u| vec![(u, 1.0)];
    let mk = |name: &str, part, regime, fields, s, space, time, weight| Constituent {
        name: name.to_string(),
        part,
        regime,
        fields,
        s,
        space,
        time,
        weight,
    };
    let (lo, me, hi) = (Part::Low, Part::Med, Part::High);
    let (rl, rm, rh) = (Regime::Low, Regime::Med, Regime::High);
    vec![
        mk("low.avtheq.linf", lo, rl, vec![(A, 1.0), (V, 1.0), (Theta, 1.0), (Q, eps)], dd / 2.0 - 1.0, S2, LInf, 1.0),
        mk("low.avth.l1", lo, rl, vec![(A, 1.0), (V, 1.0), (Theta, 1.0)], dd / 2.0 + 1.0, S2, L1, 1.0),
        mk("low.q.l1", lo, rl, one(Q), dd / 2.0, S2, L1, 1.0),
        mk("low.Q.l1", lo, rl, one(QEff), dd / 2.0 - 1.0, S2, L1, 1.0 / eps),
        mk("med.theq.linf.a", me, rm, vec![(Theta, 1.0), (Q, eps)], dp - 2.0, Lp, LInf, 1.0),
        mk("med.theq.linf.b", me, rm, vec![(Theta, 1.0), (Q, eps)], dp - 1.0, Lp, LInf, 1.0),
        mk("med.theta.l1.a", me, rm, one(Theta), dp, Lp, L1, 1.0),
        mk("med.theta.l1.b", me, rm, one(Theta), dp + 1.0, Lp, L1, 1.0),
        mk("med.q.l1.a", me, rm, one(Q), dp - 1.0, Lp, L1, 1.0),
        mk("med.q.l1.b", me, rm, one(Q), dp, Lp, L1, 1.0),
        mk("med.q.l2.a", me, rm, one(Q), dp - 2.0, Lp, L2, 1.0),
        mk("med.q.l2.b", me, rm, one(Q), dp - 1.0, Lp, L2, 1.0),
        mk("med.Q.l1.a", me, rm, one(QEff), dp - 2.0, Lp, L1, 1.0 / eps),
        mk("med.Q.l1.b", me, rm, one(QEff), dp - 1.0, Lp, L1, 1.0 / eps),
        mk("med.w.linf", me, rm, one(W), dp - 1.0, Lp, LInf, 1.0),
        mk("med.w.l1", me, rm, one(W), dp + 1.0, Lp, L1, 1.0),
        mk("med.a.linf", me, rm, one(A), dp, Lp, LInf, 1.0),
        mk("med.a.l1", me, rm, one(A), dp, Lp, L1, 1.0),
        mk("med.v.linf.a", me, rm, one(V), dp - 1.0, Lp, LInf, 1.0),
        mk("med.v.linf.b", me, rm, one(V), dp, Lp, LInf, 1.0),
        mk("med.v.l1", me, rm, one(V), dp + 1.0, Lp, L1, 1.0),
        mk("med.v.l2", me, rm, one(V), dp + 1.0, Lp, L2, 1.0),
        mk("high.a.linf", hi, rh, one(A), dd / 2.0 + 1.0, S2, LInf, eps),
        mk("high.a.l1", hi, rh, one(A), dd / 2.0 + 1.0, S2, L1, eps),
        mk("high.theq.linf", hi, rh, vec![(Theta, eps * eps), (Q, eps.powi(3))], dd / 2.0 + 1.0, S2, LInf, 1.0),
        mk("high.theq.l1", hi, rh, vec![(Theta, 1.0), (Q, eps)], dd / 2.0 + 1.0, S2, L1, 1.0),
        mk("high.Q.l1", hi, rh, one(QEff), dp, Lp, L1, 1.0),
        mk("high.w.linf", hi, rh, one(W), dd / 2.0, S2, LInf, eps),
        mk("high.w.l1", hi, rh, one(W), dd / 2.0 + 2.0, S2, L1, eps),
        mk("high.v.linf", hi, rh, one(V), dd / 2.0 + 1.0, S2, LInf, eps),
        mk("high.v.l1", hi, rh, one(V), dd / 2.0 + 2.0, S2, L1, eps),
        mk("high.v.l2", hi, rh, one(V), dd / 2.0 + 2.0, S2, L2, eps),
    ]
}

/// Band norms of weighted unknowns of a torus state.
pub fn state_band_norms(
    state: &State,
    eff: &EffectiveState,
    fields: &[(Unknown, f64)],
    q: f64,
) -> BTreeMap<i32, f64> {
    let mut tuple: Vec<SpectralField> = Vec::new();
    for &(u, c) in fields {
        let src: Vec<&SpectralField> = match u {
            Unknown::A => vec![&state.a],
            Unknown::V => state.v.iter().collect(),
            Unknown::Theta => vec![&state.theta],
            Unknown::Q => state.q.iter().collect(),
            Unknown::QEff => eff.q_eff.iter().collect(),
            Unknown::W => eff.w.iter().collect(),
        };
        tuple.extend(src.into_iter().map(|f| f.scale(c)));
    }
    grid_bands(&state.grid)
        .into_iter()
        .map(|j| {
            let proj: Vec<SpectralField> = tuple.iter().map(|f| band_project(f, j)).collect();
            let refs: Vec<&SpectralField> = proj.iter().collect();
            (j, tuple_lp_norm(&refs, q))
        })
        .collect()
}

/// `X^ε` accumulated along a torus trajectory.
pub fn functional_x(traj: &Trajectory, spec: &ModelSpec, th: &Thresholds, p: f64) -> Result<XFunctional> {
    if !(2.0..=4.0).contains(&p) {
        return Err(Error::invalid("p", format!("must lie in [2, 4], got {p}")));
    }
    let mut acc = Accumulator::new(x_constituents(spec.d, p, spec.eps), *th, Convention::Disjoint, p);
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let eff = effective_unknowns(s, spec)?;
        acc.push(*t, |fields, q| state_band_norms(s, &eff, fields, q));
    }
    Ok(acc.value())
}
