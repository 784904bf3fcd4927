//! Model coefficients, per-wavevector generator matrices and stability checks.
//!
//! Unknowns are ordered `(a, v_1..v_d, θ, q_1..q_d)` for NSC and `(a, v, θ)`
//! for NSF. Symbols are generators: the Fourier transform of the zero-source
//! linear system reads `dÛ/dt = M(ξ)Û`, and stability means `Re λ ≤ 0`.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Physical equilibrium and transport data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    pub rho_bar: f64,
    pub t_bar: f64,
    pub c_v: f64,
    pub mu: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub eps: f64,
    /// π(ρ̄)
    pub pi_val: f64,
    /// π′(ρ̄)
    pub pi_prime: f64,
}

impl PhysParams {
    /// Ideal gas `π(ρ) = ρ` at `ρ̄ = T̄ = C_v = 1`, `μ = 1/2`, `λ = 0`, `κ = 1`.
    pub fn unit(eps: f64) -> Self {
        PhysParams {
            rho_bar: 1.0,
            t_bar: 1.0,
            c_v: 1.0,
            mu: 0.5,
            lambda: 0.0,
            kappa: 1.0,
            eps,
            pi_val: 1.0,
            pi_prime: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rho_bar", self.rho_bar),
            ("t_bar", self.t_bar),
            ("c_v", self.c_v),
            ("mu", self.mu),
            ("kappa", self.kappa),
            ("pi_val", self.pi_val),
            ("pi_prime", self.pi_prime),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if !self.lambda.is_finite() {
            return Err(Error::invalid("lambda", "must be finite"));
        }
        let nu = self.lambda + 2.0 * self.mu;
        if nu <= 0.0 {
            return Err(Error::invalid("lambda", format!("nu = lambda + 2 mu must be > 0, got {nu}")));
        }
        if !(self.eps.is_finite() && self.eps >= 0.0) {
            return Err(Error::invalid("eps", format!("must be finite and >= 0, got {}", self.eps)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Nsc,
    Nsf,
    ToyPartDiff,
    ToyPartDamp,
    CattaneoWave,
}

impl ModelKind {
    pub fn is_toy(self) -> bool {
        matches!(self, ModelKind::ToyPartDiff | ModelKind::ToyPartDamp | ModelKind::CattaneoWave)
    }
}

/// Normalized coefficients of one member of the NSC / NSF / toy family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub d: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub eps: f64,
    /// μ/ν
    pub visc_mu: f64,
    /// (λ+μ)/ν
    pub visc_lam: f64,
}

impl ModelSpec {
    /// Unit coefficients `α = β = γ = κ = 1`, viscous weights `(1/2, 1/2)`.
    pub fn unit(kind: ModelKind, d: usize, eps: f64) -> Self {
        ModelSpec {
            kind,
            d,
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
            kappa: 1.0,
            eps: if kind == ModelKind::Nsf { 0.0 } else { eps },
            visc_mu: 0.5,
            visc_lam: 0.5,
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_kind(mut self, kind: ModelKind) -> Self {
        self.kind = kind;
        if kind == ModelKind::Nsf {
            self.eps = 0.0;
        }
        self
    }

    /// Longitudinal viscous weight `visc_mu + visc_lam`.
    pub fn visc_long(&self) -> f64 {
        self.visc_mu + self.visc_lam
    }

    /// Number of unknowns evolved by [`symbol`].
    pub fn size(&self) -> usize {
        match self.kind {
            ModelKind::Nsc => 2 * self.d + 2,
            ModelKind::Nsf => self.d + 2,
            _ => 2,
        }
    }

    pub fn labels(&self) -> Vec<String> {
        let d = self.d;
        let mut out = Vec::new();
        match self.kind {
            ModelKind::Nsc | ModelKind::Nsf => {
                out.push("a".to_string());
                out.extend((1..=d).map(|i| format!("v{i}")));
                out.push("theta".to_string());
                if self.kind == ModelKind::Nsc {
                    out.extend((1..=d).map(|i| format!("q{i}")));
                }
            }
            ModelKind::ToyPartDiff => out.extend(["a".into(), "u".into()]),
            ModelKind::ToyPartDamp => out.extend(["theta".into(), "q".into()]),
            ModelKind::CattaneoWave => out.extend(["theta".into(), "theta_t".into()]),
        }
        out
    }

    /// Checks the invariants of the kind. Construction does not validate so
    /// that degenerate variants can still be rank-tested.
    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.d) {
            return Err(Error::invalid("d", format!("must be 1, 2 or 3, got {}", self.d)));
        }
        if self.kind.is_toy() && self.d != 1 {
            return Err(Error::Dimension(format!(
                "toy model {:?} is a scalar reduction and requires d = 1, got d = {}",
                self.kind, self.d
            )));
        }
        let finite_pos = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be finite and > 0, got {v}")))
            }
        };
        match self.kind {
            ModelKind::Nsc | ModelKind::Nsf => {
                finite_pos("alpha", self.alpha)?;
                finite_pos("beta", self.beta)?;
                finite_pos("gamma", self.gamma)?;
                finite_pos("kappa", self.kappa)?;
                finite_pos("visc_mu", self.visc_mu)?;
                finite_pos("visc_mu + visc_lam", self.visc_long())?;
                if self.kind == ModelKind::Nsc {
                    finite_pos("eps", self.eps)?;
                }
            }
            ModelKind::ToyPartDiff => finite_pos("visc_mu + visc_lam", self.visc_long())?,
            ModelKind::ToyPartDamp | ModelKind::CattaneoWave => {
                finite_pos("alpha", self.alpha)?;
                finite_pos("beta", self.beta)?;
                finite_pos("kappa", self.kappa)?;
                finite_pos("eps", self.eps)?;
            }
        }
        Ok(())
    }

    /// Heat rate `βκ/α` of the Fourier-law limit.
    pub fn heat_rate(&self) -> f64 {
        self.beta * self.kappa / self.alpha
    }

    /// Pure damping rate `α/ε²` of the heat flux.
    pub fn damping_rate(&self) -> f64 {
        self.alpha / (self.eps * self.eps)
    }
}

/// Coefficients of the rescaled system from physical data.
pub fn build_spec(p: &PhysParams, kind: ModelKind, d: usize) -> Result<ModelSpec> {
    p.validate()?;
    let nu = p.lambda + 2.0 * p.mu;
    let nu_bar = nu / p.rho_bar;
    let chi0 = (p.t_bar * p.pi_prime).powf(-0.5);
    let spec = ModelSpec {
        kind,
        d,
        alpha: nu_bar * chi0 * chi0,
        beta: chi0 * chi0 / (p.rho_bar * p.c_v),
        gamma: chi0 / p.rho_bar * (p.t_bar / p.c_v).sqrt() * p.pi_val,
        kappa: p.kappa,
        eps: if kind == ModelKind::Nsf { 0.0 } else { p.eps },
        visc_mu: p.mu / nu,
        visc_lam: (p.lambda + p.mu) / nu,
    };
    spec.validate()?;
    Ok(spec)
}

/// Generator matrix at one wavevector.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolMatrix {
    pub xi: Vec<f64>,
    pub n: usize,
    pub entries: CMat,
    pub system_kind: ModelKind,
    pub component_labels: Vec<String>,
}

fn check_xi(xi: &[f64]) -> Result<()> {
    if xi.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid("xi", "wavevector must be finite"))
    }
}

/// Full symbol `M(ξ)` of the zero-source linear system.
pub fn symbol(spec: &ModelSpec, xi: &[f64]) -> Result<SymbolMatrix> {
    spec.validate()?;
    check_xi(xi)?;
    if xi.len() != spec.d {
        return Err(Error::Dimension(format!(
            "wavevector has {} components, model dimension is {}",
            xi.len(),
            spec.d
        )));
    }
    Ok(SymbolMatrix {
        xi: xi.to_vec(),
        n: spec.size(),
        entries: symbol_entries(spec, xi),
        system_kind: spec.kind,
        component_labels: spec.labels(),
    })
}

/// Symbol entries without validation; `xi.len()` must equal `spec.d`.
pub(crate) fn symbol_entries(spec: &ModelSpec, xi: &[f64]) -> CMat {
    let d = spec.d;
    let n = spec.size();
    let mut m = CMat::zeros(n, n);
    let r2: f64 = xi.iter().map(|x| x * x).sum();
    let c = Complex64::from;
    match spec.kind {
        ModelKind::Nsc | ModelKind::Nsf => {
            let th = d + 1;
            for j in 0..d {
                m[(0, 1 + j)] = -I * xi[j];
                m[(1 + j, 0)] = -I * xi[j];
                m[(1 + j, th)] = -I * (spec.gamma * xi[j]);
                m[(th, 1 + j)] = -I * (spec.gamma * xi[j]);
                for i in 0..d {
                    let mut val = -spec.visc_lam * xi[i] * xi[j];
                    if i == j {
                        val -= spec.visc_mu * r2;
                    }
                    m[(1 + i, 1 + j)] = c(val);
                }
            }
            if spec.kind == ModelKind::Nsc {
                let e2 = spec.eps * spec.eps;
                for j in 0..d {
                    let qj = d + 2 + j;
                    m[(th, qj)] = -I * (spec.beta * xi[j]);
                    m[(qj, th)] = -I * (spec.kappa * xi[j] / e2);
                    m[(qj, qj)] = c(-spec.alpha / e2);
                }
            } else {
                m[(th, th)] = c(-spec.heat_rate() * r2);
            }
        }
        ModelKind::ToyPartDiff => {
            let x = xi[0];
            m[(0, 1)] = -I * x;
            m[(1, 0)] = -I * x;
            m[(1, 1)] = c(-spec.visc_long() * x * x);
        }
        ModelKind::ToyPartDamp => {
            let x = xi[0];
            let e2 = spec.eps * spec.eps;
            m[(0, 1)] = -I * (spec.beta * x);
            m[(1, 0)] = -I * (spec.kappa * x / e2);
            m[(1, 1)] = c(-spec.alpha / e2);
        }
        ModelKind::CattaneoWave => {
            let x = xi[0];
            let e2 = spec.eps * spec.eps;
            m[(0, 1)] = c(1.0);
            m[(1, 0)] = c(-spec.beta * spec.kappa * x * x / e2);
            m[(1, 1)] = c(-spec.alpha / e2);
        }
    }
    m
}

/// Longitudinal block at `|ξ| = r`: `(a, ω, θ, q_l)` for NSC and `(a, ω, θ)`
/// for NSF, with `ω = iξ̂·v̂` and `q_l = iξ̂·q̂`. Real-valued. Toy models
/// return their scalar symbol at `ξ = r`.
pub fn reduced_symbol(spec: &ModelSpec, r: f64) -> Result<SymbolMatrix> {
    spec.validate()?;
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::invalid("r", format!("must be finite and >= 0, got {r}")));
    }
    if spec.kind.is_toy() {
        return symbol(spec, &[r]);
    }
    let labels: Vec<String> = match spec.kind {
        ModelKind::Nsc => ["a", "omega", "theta", "q_long"].iter().map(|s| s.to_string()).collect(),
        _ => ["a", "omega", "theta"].iter().map(|s| s.to_string()).collect(),
    };
    Ok(SymbolMatrix {
        xi: vec![r],
        n: labels.len(),
        entries: reduced_entries(spec, r),
        system_kind: spec.kind,
        component_labels: labels,
    })
}

pub(crate) fn reduced_entries(spec: &ModelSpec, r: f64) -> CMat {
    let c = Complex64::from;
    let g = spec.gamma;
    match spec.kind {
        ModelKind::Nsc => {
            let e2 = spec.eps * spec.eps;
            let vals = [
                [0.0, -r, 0.0, 0.0],
                [r, -spec.visc_long() * r * r, g * r, 0.0],
                [0.0, -g * r, 0.0, -spec.beta * r],
                [0.0, 0.0, spec.kappa * r / e2, -spec.alpha / e2],
            ];
            CMat::from_fn(4, 4, |i, j| c(vals[i][j]))
        }
        ModelKind::Nsf => {
            let vals = [
                [0.0, -r, 0.0],
                [r, -spec.visc_long() * r * r, g * r],
                [0.0, -g * r, -spec.heat_rate() * r * r],
            ];
            CMat::from_fn(3, 3, |i, j| c(vals[i][j]))
        }
        _ => symbol_entries(spec, &[r]),
    }
}

/// Eigenvalues of the decoupled transverse modes at `|ξ| = r`: the viscous
/// rate `−visc_mu r²` and, for NSC, the heat-flux damping `−α/ε²`, each with
/// multiplicity `d − 1`.
pub fn solenoidal_eigenvalues(spec: &ModelSpec, r: f64) -> Vec<Complex64> {
    let mut out = Vec::new();
    if spec.kind.is_toy() {
        return out;
    }
    for _ in 1..spec.d {
        out.push(Complex64::from(-spec.visc_mu * r * r));
        if spec.kind == ModelKind::Nsc {
            out.push(Complex64::from(-spec.damping_rate()));
        }
    }
    out
}

/// Eigenvalues sorted by real part descending (ties: imaginary part
/// descending). Sizes up to 4 use the characteristic polynomial with a
/// resolvent-based polishing pass; larger sizes use a complex Schur form.
pub fn eigenvalues(m: &SymbolMatrix) -> Result<Vec<Complex64>> {
    if m.n > 64 {
        return Err(Error::Precondition(format!("eigenvalues supports n <= 64, got {}", m.n)));
    }
    if m.entries.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite("symbol entries".into()));
    }
    Ok(eigenvalues_of(&m.entries))
}

pub(crate) fn eigenvalues_of(a: &CMat) -> Vec<Complex64> {
    let mut ev = if a.nrows() <= 4 {
        linalg::poly_roots(&linalg::char_poly(a))
    } else {
        linalg::schur_eigenvalues(a)
    };
    linalg::polish_eigenvalues(a, &mut ev);
    linalg::sort_eigenvalues(&mut ev);
    ev
}

/// Eigenvalues by the dense Schur route regardless of size (used to
/// cross-check the polynomial route).
pub fn eigenvalues_dense(m: &SymbolMatrix) -> Vec<Complex64> {
    let mut ev = linalg::schur_eigenvalues(&m.entries);
    linalg::polish_eigenvalues(&m.entries, &mut ev);
    linalg::sort_eigenvalues(&mut ev);
    ev
}

/// Kalman / Shizuta–Kawashima rank report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SKReport {
    pub rank: usize,
    pub n: usize,
    pub full: bool,
    /// Unit vector spanning part of the kernel of the controllability matrix
    /// (an undamped eigendirection of `A(ω)`) when the rank is deficient.
    pub witness_direction: Option<Vec<f64>>,
}

/// First-order coupling `A(ω)` and dissipation rows `D` for direction `ω`.
/// The dissipation collects zero-order damping and second-order
/// (viscous/diffusive) symbols. Degenerate coefficients are allowed.
pub fn kalman_pair(spec: &ModelSpec, omega: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let d = spec.d;
    let n = spec.size();
    let mut a = vec![vec![0.0; n]; n];
    let mut dm = vec![vec![0.0; n]; n];
    match spec.kind {
        ModelKind::Nsc | ModelKind::Nsf => {
            let th = d + 1;
            for j in 0..d {
                a[0][1 + j] = omega[j];
                a[1 + j][0] = omega[j];
                a[1 + j][th] = spec.gamma * omega[j];
                a[th][1 + j] = spec.gamma * omega[j];
                for i in 0..d {
                    let mut val = spec.visc_lam * omega[i] * omega[j];
                    if i == j {
                        val += spec.visc_mu;
                    }
                    dm[1 + i][1 + j] = val;
                }
            }
            if spec.kind == ModelKind::Nsc {
                let e2 = spec.eps * spec.eps;
                for j in 0..d {
                    let qj = d + 2 + j;
                    a[th][qj] = spec.beta * omega[j];
                    a[qj][th] = spec.kappa * omega[j] / e2;
                    dm[qj][qj] = spec.alpha / e2;
                }
            } else if spec.alpha != 0.0 {
                dm[th][th] = spec.beta * spec.kappa / spec.alpha;
            }
        }
        ModelKind::ToyPartDiff => {
            a[0][1] = omega[0];
            a[1][0] = omega[0];
            dm[1][1] = spec.visc_long();
        }
        ModelKind::ToyPartDamp | ModelKind::CattaneoWave => {
            let e2 = spec.eps * spec.eps;
            a[0][1] = spec.beta * omega[0];
            a[1][0] = spec.kappa * omega[0] / e2;
            dm[1][1] = spec.alpha / e2;
        }
    }
    (a, dm)
}

fn matmul(x: &[Vec<f64>], y: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = x.len();
    let m = y[0].len();
    let k = y.len();
    (0..n)
        .map(|i| (0..m).map(|j| (0..k).map(|l| x[i][l] * y[l][j]).sum()).collect())
        .collect()
}

fn controllability_rows(spec: &ModelSpec, omega: &[f64]) -> Result<Vec<Vec<f64>>> {
    if omega.len() != spec.d {
        return Err(Error::Dimension(format!(
            "direction has {} components, model dimension is {}",
            omega.len(),
            spec.d
        )));
    }
    let nrm: f64 = omega.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !((nrm - 1.0).abs() < 1e-12) {
        return Err(Error::invalid("omega", format!("must be a unit vector, |omega| = {nrm}")));
    }
    let (a, dm) = kalman_pair(spec, omega);
    if a.iter().chain(dm.iter()).flatten().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("Kalman pair".into()));
    }
    let n = a.len();
    let mut rows = Vec::with_capacity(n * n);
    let mut block = dm;
    for _ in 0..n {
        rows.extend(block.iter().cloned());
        block = matmul(&block, &a);
    }
    Ok(rows)
}

/// Exact rank of `[D; DA; …; DA^{n−1}]` over the rationals.
pub fn kalman_rank(spec: &ModelSpec, omega: &[f64]) -> Result<SKReport> {
    let rows = controllability_rows(spec, omega)?;
    let n = spec.size();
    let (rank, kernel) = linalg::exact_rank_and_kernel(&rows);
    Ok(SKReport {
        rank,
        n,
        full: rank == n,
        witness_direction: kernel.into_iter().next(),
    })
}

/// Same rank test by singular values with tolerance `1e−10·σ_max`.
pub fn kalman_rank_numeric(spec: &ModelSpec, omega: &[f64]) -> Result<usize> {
    let rows = controllability_rows(spec, omega)?;
    Ok(linalg::numeric_rank(&rows, 1e-10))
}

/// Eigenvalue pair structure of a 2×2 toy symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    TwoReal,
    ComplexPair,
}

/// Regime scan of a toy symbol over a sorted list of frequencies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToyScan {
    pub xi: Vec<f64>,
    pub eigenvalues: Vec<[Complex64; 2]>,
    pub kinds: Vec<PairKind>,
    pub transitions: usize,
}

/// Classifies the eigenvalue pair of a 2×2 toy symbol at each `ξ`.
pub fn toy_regime_scan(spec: &ModelSpec, xis: &[f64]) -> Result<ToyScan> {
    if !spec.kind.is_toy() {
        return Err(Error::Precondition("toy_regime_scan requires a toy model".into()));
    }
    let mut eigs = Vec::with_capacity(xis.len());
    let mut kinds = Vec::with_capacity(xis.len());
    for &x in xis {
        let ev = eigenvalues(&symbol(spec, &[x])?)?;
        let scale = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let complex = ev.iter().any(|z| z.im.abs() > 1e-7 * scale);
        kinds.push(if complex { PairKind::ComplexPair } else { PairKind::TwoReal });
        eigs.push([ev[0], ev[1]]);
    }
    let transitions = kinds.windows(2).filter(|w| w[0] != w[1]).count();
    Ok(ToyScan {
        xi: xis.to_vec(),
        eigenvalues: eigs,
        kinds,
        transitions,
    })
}
