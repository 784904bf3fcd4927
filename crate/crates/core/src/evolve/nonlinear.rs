//! Nonlinear sources and the integrating-factor midpoint stepper.
//!
//! Closure: ideal gas `π(ρ) = ρ`, written in the rescaled unknowns. With
//! `J = a/(1+a)`:
//!
//! ```text
//! F = −div(a v)
//! G = −v·∇v − J 𝒜v + J ∇a − γ θ ∇a/(1+a)
//! H = −v·∇θ + β J div q + γ (2μ'|Dv|² + (λ'−μ')(div v)²)/(1+a) − γ² θ div v
//! I = −v·∇q + q·∇v − q div v
//! ```
//!
//! where `μ' = visc_mu`, `λ' = visc_lam`, `(q·∇v)_i = Σ_j q_j ∂_j v_i`.

use super::{check_pde_spec, evolved_vector, fourier_law_flux, lattice_symbol, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{expm, CMat, CVec};
use crate::model::{ModelKind, ModelSpec};
use crate::spectral::{Grid, Multiplier, SpectralField, State};
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;

/// `(F, G, H, I)`; `i` is zero for NSF.
#[derive(Debug, Clone, PartialEq)]
pub struct Sources {
    pub f: SpectralField,
    pub g: Vec<SpectralField>,
    pub h: SpectralField,
    pub i: Vec<SpectralField>,
}

impl Sources {
    /// Mode vector in the component order of the evolved unknowns.
    fn mode_vector(&self, idx: usize, n: usize) -> Vec<Complex64> {
        let mut out = vec![self.f.coeffs[idx]];
        out.extend(self.g.iter().map(|c| c.coeffs[idx]));
        out.push(self.h.coeffs[idx]);
        out.extend(self.i.iter().map(|c| c.coeffs[idx]));
        out.truncate(n);
        out
    }

    pub fn l2_norm(&self) -> f64 {
        let mut s = self.f.l2_norm().powi(2) + self.h.l2_norm().powi(2);
        for c in self.g.iter().chain(&self.i) {
            s += c.l2_norm().powi(2);
        }
        s.sqrt()
    }
}

fn phys(f: &SpectralField) -> Vec<f64> {
    f.dealias_23().to_physical_real()
}

fn back(grid: Grid, samples: &[f64]) -> SpectralField {
    SpectralField::from_real(grid, samples)
        .expect("sample count matches grid")
        .dealias_23()
}

fn deriv(f: &SpectralField, j: usize) -> Vec<f64> {
    phys(&f.apply(Multiplier::Grad(j)).expect("axis within dimension"))
}

/// Pointwise `1 + a > 0` check on physical samples.
pub fn check_density(a: &SpectralField) -> Result<()> {
    for (index, x) in a.to_physical_real().into_iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFinite("density perturbation".into()));
        }
        if 1.0 + x <= 0.0 {
            return Err(Error::DensityPositivity { index, value: 1.0 + x });
        }
    }
    Ok(())
}

/// Nonlinear sources, evaluated pseudo-spectrally with 2/3 dealiasing of
/// inputs and outputs.
pub fn source_terms(state: &State, spec: &ModelSpec) -> Result<Sources> {
    let grid = state.grid;
    check_pde_spec(spec, &grid)?;
    let d = grid.d;
    let np = grid.len();
    let a = phys(&state.a);
    for (index, &x) in a.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFinite("density perturbation".into()));
        }
        if 1.0 + x <= 0.0 {
            return Err(Error::DensityPositivity { index, value: 1.0 + x });
        }
    }
    let q_fields = if spec.kind == ModelKind::Nsf {
        fourier_law_flux(&state.theta, spec)
    } else {
        state.q.clone()
    };
    let v: Vec<Vec<f64>> = state.v.iter().map(phys).collect();
    let q: Vec<Vec<f64>> = q_fields.iter().map(phys).collect();
    let th = phys(&state.theta);
    let grad_a: Vec<Vec<f64>> = (0..d).map(|j| deriv(&state.a, j)).collect();
    let grad_th: Vec<Vec<f64>> = (0..d).map(|j| deriv(&state.theta, j)).collect();
    // dv[i][j] = ∂_j v_i
    let dv: Vec<Vec<Vec<f64>>> = state.v.iter().map(|vi| (0..d).map(|j| deriv(vi, j)).collect()).collect();
    let dq: Vec<Vec<Vec<f64>>> = q_fields.iter().map(|qi| (0..d).map(|j| deriv(qi, j)).collect()).collect();
    let div_v: Vec<f64> = (0..np).map(|x| (0..d).map(|i| dv[i][i][x]).sum()).collect();
    let div_q: Vec<f64> = (0..np).map(|x| (0..d).map(|i| dq[i][i][x]).sum()).collect();
    let div_v_field = crate::spectral::div(&state.v)?;
    let lame_v: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let lap = state.v[i].apply(Multiplier::Laplacian).expect("regular multiplier");
            let gd = div_v_field.apply(Multiplier::Grad(i)).expect("axis within dimension");
            let mut f = lap.scale(spec.visc_mu);
            f.axpy(spec.visc_lam, &gd);
            phys(&f)
        })
        .collect();

    let jac: Vec<f64> = a.iter().map(|&x| x / (1.0 + x)).collect();

    let av: Vec<SpectralField> = (0..d)
        .map(|j| back(grid, &(0..np).map(|x| a[x] * v[j][x]).collect::<Vec<_>>()))
        .collect();
    let f = crate::spectral::div(&av)?.scale(-1.0);

    let g = (0..d)
        .map(|i| {
            let s: Vec<f64> = (0..np)
                .map(|x| {
                    let adv: f64 = (0..d).map(|j| v[j][x] * dv[i][j][x]).sum();
                    -adv - jac[x] * lame_v[i][x] + jac[x] * grad_a[i][x]
                        - spec.gamma * th[x] * grad_a[i][x] / (1.0 + a[x])
                })
                .collect();
            back(grid, &s)
        })
        .collect();

    let h_samples: Vec<f64> = (0..np)
        .map(|x| {
            let adv: f64 = (0..d).map(|j| v[j][x] * grad_th[j][x]).sum();
            let mut dd = 0.0;
            for i in 0..d {
                for j in 0..d {
                    let s = 0.5 * (dv[i][j][x] + dv[j][i][x]);
                    dd += s * s;
                }
            }
            let heating = 2.0 * spec.visc_mu * dd + (spec.visc_lam - spec.visc_mu) * div_v[x] * div_v[x];
            -adv + spec.beta * jac[x] * div_q[x] + spec.gamma * heating / (1.0 + a[x])
                - spec.gamma * spec.gamma * th[x] * div_v[x]
        })
        .collect();
    let h = back(grid, &h_samples);

    let i = if spec.kind == ModelKind::Nsc {
        (0..d)
            .map(|i| {
                let s: Vec<f64> = (0..np)
                    .map(|x| {
                        let adv: f64 = (0..d).map(|j| v[j][x] * dq[i][j][x]).sum();
                        let stretch: f64 = (0..d).map(|j| q[j][x] * dv[i][j][x]).sum();
                        -adv + stretch - q[i][x] * div_v[x]
                    })
                    .collect();
                back(grid, &s)
            })
            .collect()
    } else {
        vec![SpectralField::zeros(grid); d]
    };
    Ok(Sources { f, g, h, i })
}

/// `min(0.25 Δx²/(visc_mu + visc_lam), 0.5 Δx / max|v|)`.
pub fn default_dt(state: &State, spec: &ModelSpec) -> f64 {
    let dx = state.grid.dx();
    let diff = 0.25 * dx * dx / spec.visc_long();
    let vmax = state
        .v
        .iter()
        .flat_map(|c| c.to_physical_real())
        .map(f64::abs)
        .fold(0.0, f64::max);
    if vmax > 0.0 {
        diff.min(0.5 * dx / vmax)
    } else {
        diff
    }
}

/// Additive forcing `f(t)` in the component layout of a [`State`].
pub type Forcing = Arc<dyn Fn(f64) -> State + Send + Sync>;

/// Integrating-factor midpoint rule (second order):
///
/// ```text
/// U* = E_h (Uⁿ + dt/2 (N(Uⁿ) + f(tⁿ)))
/// Uⁿ⁺¹ = E Uⁿ + dt E_h (N(U*) + f(tⁿ + dt/2))
/// ```
///
/// with `E = e^{dt M}`, `E_h = e^{dt M/2}` applied exactly per mode.
pub struct ImexStepper {
    pub spec: ModelSpec,
    pub grid: Grid,
    pub dt: f64,
    e_full: Vec<CMat>,
    e_half: Vec<CMat>,
    forcing: Option<Forcing>,
}

impl ImexStepper {
    pub fn new(spec: &ModelSpec, grid: Grid, dt: f64) -> Result<Self> {
        check_pde_spec(spec, &grid)?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid("dt", format!("must be finite and > 0, got {dt}")));
        }
        let (e_full, e_half): (Vec<CMat>, Vec<CMat>) = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let m = lattice_symbol(spec, &grid, idx);
                (expm(&m.map(|z| z * dt)), expm(&m.map(|z| z * (0.5 * dt))))
            })
            .unzip();
        Ok(ImexStepper {
            spec: *spec,
            grid,
            dt,
            e_full,
            e_half,
            forcing: None,
        })
    }

    pub fn with_forcing(mut self, f: Forcing) -> Self {
        self.forcing = Some(f);
        self
    }

    fn rhs(&self, state: &State, t: f64) -> Result<Vec<Vec<Complex64>>> {
        let n = self.spec.size();
        let src = source_terms(state, &self.spec)?;
        let forcing = self.forcing.as_ref().map(|f| f(t));
        Ok((0..self.grid.len())
            .map(|idx| {
                let mut v = src.mode_vector(idx, n);
                if let Some(fs) = &forcing {
                    for (x, y) in v.iter_mut().zip(evolved_vector(fs, &self.spec, idx)) {
                        *x += y;
                    }
                }
                v
            })
            .collect())
    }

    fn assemble(&self, template: &State, vecs: &[Vec<Complex64>], time: f64) -> State {
        let mut out = template.clone();
        let n = self.spec.size();
        for (idx, u) in vecs.iter().enumerate() {
            for (c, &val) in out.components_mut().into_iter().take(n).zip(u) {
                c.coeffs[idx] = val;
            }
        }
        if self.spec.kind == ModelKind::Nsf {
            out.q = fourier_law_flux(&out.theta, &self.spec);
        }
        out.time = time;
        out
    }

    /// One step. Rejects states violating `1 + a > 0` and aborts on
    /// non-finite values.
    pub fn step(&self, state: &State) -> Result<State> {
        if state.grid != self.grid {
            return Err(Error::Dimension("state grid differs from stepper grid".into()));
        }
        let dt = self.dt;
        let t = state.time;
        let n0 = self.rhs(state, t)?;
        let mid: Vec<Vec<Complex64>> = (0..self.grid.len())
            .into_par_iter()
            .map(|idx| {
                let u = evolved_vector(state, &self.spec, idx);
                let w: Vec<Complex64> = u.iter().zip(&n0[idx]).map(|(x, y)| x + y * (0.5 * dt)).collect();
                (&self.e_half[idx] * CVec::from_vec(w)).iter().copied().collect()
            })
            .collect();
        let mid_state = self.assemble(state, &mid, t + 0.5 * dt);
        let n1 = self.rhs(&mid_state, t + 0.5 * dt)?;
        let next: Vec<Vec<Complex64>> = (0..self.grid.len())
            .into_par_iter()
            .map(|idx| {
                let u = CVec::from_vec(evolved_vector(state, &self.spec, idx));
                let nv = CVec::from_vec(n1[idx].iter().map(|z| z * dt).collect());
                (&self.e_full[idx] * u + &self.e_half[idx] * nv).iter().copied().collect()
            })
            .collect();
        let out = self.assemble(state, &next, t + dt);
        if !out.is_finite() {
            return Err(Error::NonFinite(format!("state after step at t = {}", t + dt)));
        }
        check_density(&out.a)?;
        Ok(out)
    }

    /// `nsteps` steps, recording the initial state and every `stride`-th state.
    pub fn run(&self, state: &State, nsteps: usize, stride: usize) -> Result<Trajectory> {
        let stride = stride.max(1);
        let mut traj = Trajectory::default();
        traj.push(state.clone());
        let mut cur = state.clone();
        for k in 1..=nsteps {
            cur = self.step(&cur)?;
            if k % stride == 0 || k == nsteps {
                traj.push(cur.clone());
            }
        }
        Ok(traj)
    }
}
