//! Run configuration (TOML key tree) and its resolution against a subcommand.

use crate::StudyName;
use nsclab_core::besov::{make_thresholds, Thresholds};
use nsclab_core::evolve::radial::{ComponentWeights, NormComponents, RadialDataProfile, RadialQuadrature, RadialShape};
use nsclab_core::model::{build_spec, ModelKind, ModelSpec, PhysParams};
use nsclab_core::spectral::Grid;
use nsclab_core::studies::{DataPairing, Preparation};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Seed of every random draw. Required, here or via `--seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub model: ModelBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial: Option<RadialBlock>,
    #[serde(default)]
    pub thresholds: ThresholdBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<StudyBlock>,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelBlock {
    pub kind: ModelKind,
    pub d: usize,
    pub eps: f64,
    /// Normalized coefficients; exclusive with `physical`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Coefficients>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub physical: Option<PhysicalBlock>,
}

impl Default for ModelBlock {
    fn default() -> Self {
        ModelBlock {
            kind: ModelKind::Nsc,
            d: 3,
            eps: 1e-2,
            coefficients: None,
            physical: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Coefficients {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub visc_mu: f64,
    pub visc_lam: f64,
}

impl Default for Coefficients {
    fn default() -> Self {
        let u = ModelSpec::unit(ModelKind::Nsc, 1, 1.0);
        Coefficients {
            alpha: u.alpha,
            beta: u.beta,
            gamma: u.gamma,
            kappa: u.kappa,
            visc_mu: u.visc_mu,
            visc_lam: u.visc_lam,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicalBlock {
    pub rho_bar: f64,
    pub t_bar: f64,
    pub c_v: f64,
    pub mu: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub pi_val: f64,
    pub pi_prime: f64,
}

impl Default for PhysicalBlock {
    fn default() -> Self {
        let p = PhysParams::unit(0.0);
        PhysicalBlock {
            rho_bar: p.rho_bar,
            t_bar: p.t_bar,
            c_v: p.c_v,
            mu: p.mu,
            lambda: p.lambda,
            kappa: p.kappa,
            pi_val: p.pi_val,
            pi_prime: p.pi_prime,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub n: usize,
    pub l: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialBlock {
    pub r_min: f64,
    pub r_max: f64,
    pub nodes_per_panel: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdBlock {
    pub big_k: u32,
    pub k: f64,
}

impl Default for ThresholdBlock {
    fn default() -> Self {
        ThresholdBlock { big_k: 8, k: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub dir: String,
    /// Snapshot stride of `evolve`, in steps.
    pub stride: usize,
    /// Any of `json`, `csv`, `dat`, `bin`.
    pub formats: Vec<String>,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock {
            dir: "out".into(),
            stride: 10,
            formats: ["json", "csv", "dat", "bin"].map(String::from).to_vec(),
        }
    }
}

impl OutputBlock {
    pub fn wants(&self, fmt: &str) -> bool {
        self.formats.iter().any(|f| f == fmt)
    }
}

/// Radial data profile as written in a config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileBlock {
    pub sigma1: f64,
    pub shape: RadialShape,
    pub weights: ComponentWeights,
}

impl ProfileBlock {
    fn power_law() -> Self {
        ProfileBlock {
            sigma1: 1.5,
            shape: RadialShape::PowerLaw { cutoff: 1.0 },
            weights: ComponentWeights::uniform(),
        }
    }

    fn gaussian() -> Self {
        ProfileBlock {
            shape: RadialShape::Gaussian { width: 1.0 },
            ..Self::power_law()
        }
    }

    pub fn profile(&self) -> RadialDataProfile {
        RadialDataProfile {
            sigma1: self.sigma1,
            shape: self.shape,
            weights: self.weights,
        }
    }
}

impl Default for ProfileBlock {
    fn default() -> Self {
        Self::power_law()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum StudyBlock {
    Spectrum(SpectrumStudy),
    SkCheck(SkStudy),
    Evolve(EvolveStudy),
    DecayFit(DecayStudy),
    RelaxSweep(RelaxStudy),
    InitialLayer(LayerStudy),
    Lyapunov(LyapunovStudy),
    Bernstein(BernsteinStudy),
}

impl StudyBlock {
    pub fn name(&self) -> StudyName {
        match self {
            StudyBlock::Spectrum(_) => StudyName::Spectrum,
            StudyBlock::SkCheck(_) => StudyName::SkCheck,
            StudyBlock::Evolve(_) => StudyName::Evolve,
            StudyBlock::DecayFit(_) => StudyName::DecayFit,
            StudyBlock::RelaxSweep(_) => StudyName::RelaxSweep,
            StudyBlock::InitialLayer(_) => StudyName::InitialLayer,
            StudyBlock::Lyapunov(_) => StudyName::Lyapunov,
            StudyBlock::Bernstein(_) => StudyName::Bernstein,
        }
    }

    fn default_for(name: StudyName) -> Self {
        match name {
            StudyName::Spectrum => StudyBlock::Spectrum(Default::default()),
            StudyName::SkCheck => StudyBlock::SkCheck(Default::default()),
            StudyName::Evolve => StudyBlock::Evolve(Default::default()),
            StudyName::DecayFit => StudyBlock::DecayFit(Default::default()),
            StudyName::RelaxSweep => StudyBlock::RelaxSweep(Default::default()),
            StudyName::InitialLayer => StudyBlock::InitialLayer(Default::default()),
            StudyName::Lyapunov => StudyBlock::Lyapunov(Default::default()),
            StudyName::Bernstein => StudyBlock::Bernstein(Default::default()),
        }
    }
}

/// Eigenvalues along a ray `|ξ|·ω`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumStudy {
    pub xi_min: f64,
    pub xi_max: f64,
    pub count: usize,
    /// Unit direction `ω`; `e₁` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
}

impl Default for SpectrumStudy {
    fn default() -> Self {
        SpectrumStudy {
            xi_min: 1e-2,
            xi_max: 1e2,
            count: 200,
            direction: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SkStudy {
    /// Random unit directions.
    pub directions: usize,
    /// Also test `κ = 0` and the variant without dissipation.
    pub variants: bool,
}

impl Default for SkStudy {
    fn default() -> Self {
        SkStudy {
            directions: 20,
            variants: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvolveMode {
    Linear,
    Nonlinear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveStudy {
    pub mode: EvolveMode,
    pub t_final: f64,
    /// Step; the stability-limited default of the stepper when absent
    /// (nonlinear) or `t_final/100` (linear).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Maximum physical amplitude of each random component.
    pub amplitude: f64,
    /// Wavenumber cutoff of the random data.
    pub kmax: f64,
}

impl Default for EvolveStudy {
    fn default() -> Self {
        EvolveStudy {
            mode: EvolveMode::Linear,
            t_final: 1.0,
            dt: None,
            amplitude: 1e-2,
            kmax: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecayStudy {
    pub p: f64,
    pub sigmas: Vec<f64>,
    pub components: NormComponents,
    pub profile: ProfileBlock,
    /// Defaults to `[model.eps]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_list: Option<Vec<f64>>,
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
}

impl Default for DecayStudy {
    fn default() -> Self {
        DecayStudy {
            p: 2.0,
            sigmas: vec![0.0, 1.0],
            components: NormComponents::AV,
            profile: ProfileBlock::power_law(),
            eps_list: None,
            t_min: 10.0,
            t_max: 1e3,
            samples: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RelaxStudy {
    pub eps_list: Vec<f64>,
    pub p: f64,
    pub t_final: f64,
    pub pairing: DataPairing,
    pub preparation: Preparation,
    /// Also run the other preparation and compare at every `ε`.
    pub compare_preparations: bool,
    pub profile: ProfileBlock,
    pub steps_per_octave: usize,
}

impl Default for RelaxStudy {
    fn default() -> Self {
        RelaxStudy {
            eps_list: vec![1e-1, 3e-2, 1e-2, 3e-3],
            p: 2.0,
            t_final: 100.0,
            pairing: DataPairing::Identical,
            preparation: Preparation::Ill,
            compare_preparations: true,
            profile: ProfileBlock::gaussian(),
            steps_per_octave: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LayerStudy {
    /// Defaults to `[model.eps, model.eps/2]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_list: Option<Vec<f64>>,
    /// Lattice mode of `θ₀`; `(1, 0, …)` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Vec<i64>>,
    /// Layer window in units of `ε²/α`.
    pub window: f64,
    pub samples: usize,
    pub preparation: Preparation,
    pub compare_preparations: bool,
}

impl Default for LayerStudy {
    fn default() -> Self {
        LayerStudy {
            eps_list: None,
            mode: None,
            window: 5.0,
            samples: 64,
            preparation: Preparation::Ill,
            compare_preparations: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Functional {
    /// Band functionals on the torus: equivalence and dissipation.
    Bands,
    /// The summed functional on radial data against its ODE envelope.
    Summed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LyapunovStudy {
    pub functional: Functional,
    /// Defaults to `0..=J0`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub low_bands: Option<Vec<i32>>,
    /// Defaults to `Jε−1..=Jε+1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub high_bands: Option<Vec<i32>>,
    pub eta_low: f64,
    pub eta_high: f64,
    /// Grid of the high bands; the top-level grid serves the low bands.
    /// Defaults to `n = 16` with lowest wavenumber `2^{Jε−2}`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub high_grid: Option<GridBlock>,
    /// Random band states, spread over all bands.
    pub equivalence_samples: usize,
    /// Trajectories, spread over all bands.
    pub trajectories: usize,
    /// Sample times per trajectory.
    pub centers: usize,
    pub t0: f64,
    pub low_spacing: f64,
    pub high_spacing: f64,
    /// Differencing step.
    pub h: f64,
    pub p: f64,
    pub m: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
    pub fit_window: (f64, f64),
    pub profile: ProfileBlock,
}

impl Default for LyapunovStudy {
    fn default() -> Self {
        LyapunovStudy {
            functional: Functional::Bands,
            low_bands: None,
            high_bands: None,
            eta_low: 0.25,
            eta_high: 0.125,
            high_grid: None,
            equivalence_samples: 10_000,
            trajectories: 50,
            centers: 100,
            t0: 1e-3,
            low_spacing: 1e-2,
            high_spacing: 5e-4,
            h: 1e-5,
            p: 2.0,
            m: 2.0,
            t_min: 1.0,
            t_max: 1e3,
            samples: 60,
            fit_window: (1e2, 1e3),
            profile: ProfileBlock::power_law(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BernsteinStudy {
    /// Random fields per inequality.
    pub fields: usize,
    pub s: f64,
    pub s_prime: f64,
    pub p_list: Vec<f64>,
    pub jmin: i32,
    pub jmax: i32,
}

impl Default for BernsteinStudy {
    fn default() -> Self {
        BernsteinStudy {
            fields: 100,
            s: 0.5,
            s_prime: 1.0,
            p_list: vec![2.0, 4.0],
            jmin: 0,
            jmax: 4,
        }
    }
}

/// A configuration with every default filled in and all parameters checked.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub config: RunConfig,
    pub seed: u64,
    pub spec: ModelSpec,
    pub thresholds: Option<Thresholds>,
    pub grid: Option<Grid>,
    pub radial: Option<RadialQuadrature>,
    pub study: StudyBlock,
}

fn bad(msg: impl Into<String>) -> crate::CliError {
    crate::CliError::Validation(msg.into())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, crate::CliError> {
        toml::from_str(text).map_err(|e| bad(format!("config: {e}")))
    }

    fn spec(&self) -> Result<ModelSpec, crate::CliError> {
        let m = &self.model;
        let spec = match (&m.coefficients, &m.physical) {
            (Some(_), Some(_)) => return Err(bad("model: give either `coefficients` or `physical`, not both")),
            (_, Some(p)) => build_spec(
                &PhysParams {
                    rho_bar: p.rho_bar,
                    t_bar: p.t_bar,
                    c_v: p.c_v,
                    mu: p.mu,
                    lambda: p.lambda,
                    kappa: p.kappa,
                    eps: m.eps,
                    pi_val: p.pi_val,
                    pi_prime: p.pi_prime,
                },
                m.kind,
                m.d,
            )?,
            (c, None) => {
                let c = c.unwrap_or_default();
                ModelSpec {
                    kind: m.kind,
                    d: m.d,
                    alpha: c.alpha,
                    beta: c.beta,
                    gamma: c.gamma,
                    kappa: c.kappa,
                    eps: if m.kind == ModelKind::Nsf { 0.0 } else { m.eps },
                    visc_mu: c.visc_mu,
                    visc_lam: c.visc_lam,
                }
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Fills defaults for `name`, applies overrides and validates every
    /// parameter before any compute.
    pub fn resolve(mut self, name: StudyName, seed: Option<u64>, out: Option<&str>) -> Result<Resolved, crate::CliError> {
        if let Some(s) = seed {
            self.seed = Some(s);
        }
        let seed = self.seed.ok_or_else(|| bad("seed: required (config `seed` or --seed)"))?;
        if let Some(o) = out {
            self.output.dir = o.to_string();
        }
        let mut study = match self.study.take() {
            Some(s) if s.name() != name => {
                return Err(bad(format!(
                    "study block is `{}` but the subcommand is `{}`",
                    s.name().as_str(),
                    name.as_str()
                )))
            }
            Some(s) => s,
            None => StudyBlock::default_for(name),
        };
        let spec = self.spec()?;
        let thresholds = if spec.eps > 0.0 {
            Some(make_thresholds(self.thresholds.big_k, self.thresholds.k, spec.eps)?)
        } else {
            None
        };
        if let (StudyBlock::Lyapunov(l), Some(th)) = (&mut study, thresholds) {
            l.low_bands.get_or_insert_with(|| (0..=th.j0).collect());
            l.high_bands.get_or_insert_with(|| (th.jeps - 1..=th.jeps + 1).collect());
            l.high_grid.get_or_insert(GridBlock {
                n: 16,
                l: 2.0 * PI / f64::from(th.jeps - 2).exp2(),
            });
        }
        self.study = Some(study.clone());
        for f in &self.output.formats {
            if !["json", "csv", "dat", "bin"].contains(&f.as_str()) {
                return Err(bad(format!("output.formats: unknown format `{f}`")));
            }
        }
        let uses_grid = matches!(
            name,
            StudyName::Evolve | StudyName::InitialLayer | StudyName::Bernstein
        ) || matches!(&study, StudyBlock::Lyapunov(l) if l.functional == Functional::Bands);
        let uses_radial = matches!(name, StudyName::DecayFit | StudyName::RelaxSweep)
            || matches!(&study, StudyBlock::Lyapunov(l) if l.functional == Functional::Summed);
        if uses_grid && self.grid.is_none() {
            self.grid = Some(default_grid(name));
        }
        if uses_radial && self.radial.is_none() {
            self.radial = Some(default_radial(&study));
        }
        let grid = match (uses_grid, self.grid) {
            (true, Some(g)) => Some(Grid::new(spec.d, g.n, g.l)?),
            _ => None,
        };
        let radial = match (uses_radial, self.radial) {
            (true, Some(r)) => Some(RadialQuadrature::new(r.r_min, r.r_max, r.nodes_per_panel)?),
            _ => None,
        };
        let resolved = Resolved {
            config: self,
            seed,
            spec,
            thresholds,
            grid,
            radial,
            study,
        };
        crate::studies::validate(&resolved)?;
        Ok(resolved)
    }
}

fn default_grid(name: StudyName) -> GridBlock {
    match name {
        StudyName::InitialLayer => GridBlock { n: 8, l: 2000.0 * PI },
        _ => GridBlock { n: 32, l: 2.0 * PI },
    }
}

fn default_radial(study: &StudyBlock) -> RadialBlock {
    match study {
        StudyBlock::DecayFit(_) => RadialBlock {
            r_min: 1e-4,
            r_max: 1e2,
            nodes_per_panel: 12,
        },
        StudyBlock::Lyapunov(_) => RadialBlock {
            r_min: 1e-4,
            r_max: 1e3,
            nodes_per_panel: 12,
        },
        _ => RadialBlock {
            r_min: 1e-3,
            r_max: 1e2,
            nodes_per_panel: 8,
        },
    }
}
