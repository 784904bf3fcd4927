//! Exact linear propagation, whole-space radial quadrature and the nonlinear
//! integrating-factor stepper.

use crate::error::{Error, Result};
use crate::linalg::{expm, CMat, CVec};
use crate::model::{symbol_entries, ModelKind, ModelSpec, SymbolMatrix};
use crate::spectral::{Grid, SpectralField, State};
use num_complex::Complex64;
use rayon::prelude::*;

pub mod nonlinear;
pub mod radial;

pub use nonlinear::{default_dt, source_terms, ImexStepper, Sources};
pub use radial::{
    radial_semigroup_norms, ComponentWeights, NormComponents, RadialDataProfile, RadialQuadrature, RadialShape,
};

/// `exp(tM)` for one symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    pub m: SymbolMatrix,
    pub t: f64,
    pub matrix_exponential: CMat,
}

impl Propagator {
    pub fn new(m: &SymbolMatrix, t: f64) -> Result<Self> {
        check_time(t)?;
        check_finite(&m.entries)?;
        Ok(Propagator {
            m: m.clone(),
            t,
            matrix_exponential: expm(&m.entries.scale_complex(t)),
        })
    }

    pub fn apply(&self, u: &[Complex64]) -> Result<Vec<Complex64>> {
        if u.len() != self.m.n {
            return Err(Error::Dimension(format!("vector of length {} for a {}x{} symbol", u.len(), self.m.n, self.m.n)));
        }
        Ok((&self.matrix_exponential * CVec::from_column_slice(u)).iter().copied().collect())
    }
}

trait ScaleComplex {
    fn scale_complex(&self, t: f64) -> CMat;
}

impl ScaleComplex for CMat {
    fn scale_complex(&self, t: f64) -> CMat {
        self.map(|z| z * t)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("t", format!("must be finite and >= 0, got {t}")))
    }
}

fn check_finite(m: &CMat) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("symbol entries".into()))
    }
}

/// `exp(tM)u0`.
pub fn propagate_mode(m: &SymbolMatrix, u0: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
    if t == 0.0 {
        check_finite(&m.entries)?;
        if u0.len() != m.n {
            return Err(Error::Dimension(format!("vector of length {} for a {}x{} symbol", u0.len(), m.n, m.n)));
        }
        return Ok(u0.to_vec());
    }
    Propagator::new(m, t)?.apply(u0)
}

/// Symbol at a lattice index; Nyquist axes are treated as zero wavenumber,
/// matching the derivative multipliers.
pub(crate) fn lattice_symbol(spec: &ModelSpec, grid: &Grid, idx: usize) -> CMat {
    let mut xi = grid.xi(idx);
    let m = grid.mode(idx);
    let half = -(grid.n as i64 / 2);
    for ax in 0..grid.d {
        if m[ax] == half {
            xi[ax] = 0.0;
        }
    }
    symbol_entries(spec, &xi[..grid.d])
}

pub(crate) fn check_pde_spec(spec: &ModelSpec, grid: &Grid) -> Result<()> {
    spec.validate()?;
    if !matches!(spec.kind, ModelKind::Nsc | ModelKind::Nsf) {
        return Err(Error::Precondition(format!("torus evolution needs NSC or NSF, got {:?}", spec.kind)));
    }
    if spec.d != grid.d {
        return Err(Error::Dimension(format!("model dimension {} on a {}-dimensional grid", spec.d, grid.d)));
    }
    Ok(())
}

/// Unknowns evolved by the spec at one lattice index: all of `(a, v, θ, q)`
/// for NSC, `(a, v, θ)` for NSF.
pub(crate) fn evolved_vector(state: &State, spec: &ModelSpec, idx: usize) -> Vec<Complex64> {
    let mut u = state.mode_vector(idx);
    u.truncate(spec.size());
    u
}

/// Heat flux of the Fourier law `q = −(κ/α)∇θ`.
pub fn fourier_law_flux(theta: &SpectralField, spec: &ModelSpec) -> Vec<SpectralField> {
    crate::spectral::grad(theta)
        .into_iter()
        .map(|g| g.scale(-spec.kappa / spec.alpha))
        .collect()
}

/// Zero-source linear flow applied mode by mode. For NSF the returned `q`
/// is the Fourier-law flux of the evolved `θ`.
pub fn evolve_linear(state0: &State, spec: &ModelSpec, t: f64) -> Result<State> {
    check_pde_spec(spec, &state0.grid)?;
    check_time(t)?;
    let grid = state0.grid;
    let n = spec.size();
    let vecs: Vec<Vec<Complex64>> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let u = evolved_vector(state0, spec, idx);
            if t == 0.0 || u.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
                return u;
            }
            let e = expm(&lattice_symbol(spec, &grid, idx).scale_complex(t));
            (&e * CVec::from_column_slice(&u)).iter().copied().collect()
        })
        .collect();
    let mut out = state0.clone();
    for (idx, u) in vecs.iter().enumerate() {
        for (c, &val) in out.components_mut().into_iter().take(n).zip(u) {
            c.coeffs[idx] = val;
        }
    }
    if spec.kind == ModelKind::Nsf {
        out.q = fourier_law_flux(&out.theta, spec);
    }
    out.time = state0.time + t;
    Ok(out)
}

/// Time-stamped states.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, state: State) {
        self.times.push(state.time);
        self.states.push(state);
    }
}

/// Exact zero-source trajectory sampled at `times` (each measured from the
/// initial state).
pub fn linear_trajectory(state0: &State, spec: &ModelSpec, times: &[f64]) -> Result<Trajectory> {
    let mut traj = Trajectory::default();
    for &t in times {
        traj.push(evolve_linear(state0, spec, t)?);
    }
    Ok(traj)
}

/// Exact states at `c ± {2h, h, 0}` for the centres `c = t0 + k·spacing`,
/// `k < ncenters`, ordered `c−2h, c−h, c, c+h, c+2h` per centre. Suited to
/// 5-point differencing of functionals.
pub fn stencil_trajectory(
    state0: &State,
    spec: &ModelSpec,
    t0: f64,
    spacing: f64,
    ncenters: usize,
    h: f64,
) -> Result<Trajectory> {
    check_pde_spec(spec, &state0.grid)?;
    if !(h > 0.0 && t0 >= 2.0 * h && spacing > 0.0) {
        return Err(Error::invalid("stencil", "need h > 0, t0 >= 2h and spacing > 0"));
    }
    let grid = state0.grid;
    let n = spec.size();
    let offsets = [-2.0, -1.0, 0.0, 1.0, 2.0];
    // per mode: ncenters × 5 vectors
    let per_mode: Vec<Option<Vec<Vec<Complex64>>>> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let u = evolved_vector(state0, spec, idx);
            if u.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
                return None;
            }
            let m = lattice_symbol(spec, &grid, idx);
            let e0 = expm(&m.scale_complex(t0));
            let es = expm(&m.scale_complex(spacing));
            let eo: Vec<CMat> = offsets.iter().map(|o| expm(&m.scale_complex(o * h))).collect();
            let mut c = &e0 * CVec::from_vec(u);
            let mut out = Vec::with_capacity(ncenters * 5);
            for _ in 0..ncenters {
                for e in &eo {
                    out.push((e * &c).iter().copied().collect());
                }
                c = &es * c;
            }
            Some(out)
        })
        .collect();
    let mut traj = Trajectory::default();
    for k in 0..ncenters {
        for (o, off) in offsets.iter().enumerate() {
            let mut s = state0.clone();
            for (idx, vals) in per_mode.iter().enumerate() {
                let zero = vec![Complex64::new(0.0, 0.0); n];
                let v = vals.as_ref().map(|v| &v[5 * k + o]).unwrap_or(&zero);
                for (c, &val) in s.components_mut().into_iter().take(n).zip(v) {
                    c.coeffs[idx] = val;
                }
            }
            if spec.kind == ModelKind::Nsf {
                s.q = fourier_law_flux(&s.theta, spec);
            }
            s.time = state0.time + t0 + k as f64 * spacing + off * h;
            traj.push(s);
        }
    }
    Ok(traj)
}
