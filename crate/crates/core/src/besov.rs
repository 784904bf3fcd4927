//! Dyadic bands, frequency thresholds, regime-restricted Besov semi-norms and
//! Bernstein-type inequality checks.
//!
//! Bands are sharp annuli `2^j <= |ξ| < 2^{j+1}`; the zero mode belongs to no
//! band.

use crate::error::{Error, Result};
use crate::spectral::{lp_of_samples, Grid, SpectralField};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Exact `⌊log₂ x⌋` for finite `x > 0`.
pub fn floor_log2(x: f64) -> i32 {
    assert!(x > 0.0 && x.is_finite(), "floor_log2 needs a positive finite argument");
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    if exp == 0 {
        // subnormal: rescale by 2^64
        return floor_log2(x * 18446744073709551616.0) - 64;
    }
    exp - 1023
}

/// Band index of a wavevector with `|ξ|² = r2`, `None` for the zero mode.
pub fn band_of_r2(r2: f64) -> Option<i32> {
    if r2 > 0.0 {
        Some(floor_log2(r2).div_euclid(2))
    } else {
        None
    }
}

/// Band index of `|ξ| = r`.
pub fn band_of_r(r: f64) -> Option<i32> {
    if r > 0.0 {
        Some(floor_log2(r))
    } else {
        None
    }
}

/// Frequency thresholds `J0 = ⌊log₂K⌋` and `Jε = −⌊log₂ε⌋ + ⌊log₂k⌋`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub big_k: u32,
    pub k: f64,
    pub eps: f64,
    pub j0: i32,
    pub jeps: i32,
}

pub fn make_thresholds(big_k: u32, k: f64, eps: f64) -> Result<Thresholds> {
    if big_k < 2 {
        return Err(Error::invalid("K", format!("must be >= 2, got {big_k}")));
    }
    if !(k > 0.0 && k <= 1.0) {
        return Err(Error::invalid("k", format!("must lie in (0, 1], got {k}")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid("eps", format!("must be > 0, got {eps}")));
    }
    let j0 = floor_log2(big_k as f64);
    let jeps = -floor_log2(eps) + floor_log2(k);
    if j0 > jeps {
        return Err(Error::ThresholdInversion { j0, jeps });
    }
    Ok(Thresholds { big_k, k, eps, j0, jeps })
}

/// Frequency regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Low,
    Med,
    High,
    LowMed,
    MedHigh,
    All,
}

/// Treatment of the regime endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// low `j <= J0`, med `J0 < j < Jε`, high `j >= Jε`.
    #[default]
    Disjoint,
    /// low `j <= J0`, med `J0 <= j <= Jε`, high `j >= Jε − 1`.
    Overlapping,
}

impl Regime {
    pub const ALL: [Regime; 6] = [
        Regime::Low,
        Regime::Med,
        Regime::High,
        Regime::LowMed,
        Regime::MedHigh,
        Regime::All,
    ];

    pub fn contains(self, j: i32, th: &Thresholds, conv: Convention) -> bool {
        let (j0, je) = (th.j0, th.jeps);
        match (self, conv) {
            (Regime::All, _) => true,
            (Regime::Low, _) => j <= j0,
            (Regime::Med, Convention::Disjoint) => j0 < j && j < je,
            (Regime::Med, Convention::Overlapping) => j0 <= j && j <= je,
            (Regime::High, Convention::Disjoint) => j >= je,
            (Regime::High, Convention::Overlapping) => j >= je - 1,
            (Regime::LowMed, Convention::Disjoint) => j < je,
            (Regime::LowMed, Convention::Overlapping) => j <= je,
            (Regime::MedHigh, Convention::Disjoint) => j > j0,
            (Regime::MedHigh, Convention::Overlapping) => j >= j0,
        }
    }
}

/// Band indices present on a grid, ascending.
pub fn grid_bands(grid: &Grid) -> Vec<i32> {
    let mut js: Vec<i32> = (0..grid.len()).filter_map(|i| band_of_r2(grid.xi_norm2(i))).collect();
    js.sort_unstable();
    js.dedup();
    js
}

/// Keeps exactly the coefficients of band `j`.
pub fn band_project(f: &SpectralField, j: i32) -> SpectralField {
    let g = f.grid;
    let coeffs = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, &z)| if band_of_r2(g.xi_norm2(i)) == Some(j) { z } else { Complex64::new(0.0, 0.0) })
        .collect();
    SpectralField { grid: g, coeffs }
}

/// `L^p` norm of the pointwise Euclidean magnitude of a tuple.
pub fn tuple_lp_norm(fields: &[&SpectralField], p: f64) -> f64 {
    let Some(first) = fields.first() else {
        return 0.0;
    };
    let g = first.grid;
    if p == 2.0 {
        let s: f64 = fields.iter().map(|f| f.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum();
        return (g.volume() * s).sqrt();
    }
    let phys: Vec<Vec<Complex64>> = fields.iter().map(|f| f.to_physical()).collect();
    let mag: Vec<Complex64> = (0..g.len())
        .map(|i| Complex64::from(phys.iter().map(|v| v[i].norm_sqr()).sum::<f64>().sqrt()))
        .collect();
    lp_of_samples(&g, &mag, p)
}

/// Band-`j` norms of a tuple for every band of the grid.
pub fn band_norms(fields: &[&SpectralField], p: f64) -> BTreeMap<i32, f64> {
    let Some(first) = fields.first() else {
        return BTreeMap::new();
    };
    grid_bands(&first.grid)
        .into_iter()
        .map(|j| {
            let proj: Vec<SpectralField> = fields.iter().map(|f| band_project(f, j)).collect();
            let refs: Vec<&SpectralField> = proj.iter().collect();
            (j, tuple_lp_norm(&refs, p))
        })
        .collect()
}

/// `Σ_{j ∈ regime} 2^{js} ‖f_j‖_{L^p}` with the disjoint convention.
pub fn besov_seminorm(f: &SpectralField, s: f64, p: f64, regime: Regime, th: &Thresholds) -> f64 {
    besov_seminorm_tuple(&[f], s, p, regime, th, Convention::Disjoint)
}

/// Regime-restricted semi-norm of a tuple (pointwise Euclidean magnitude).
pub fn besov_seminorm_tuple(
    fields: &[&SpectralField],
    s: f64,
    p: f64,
    regime: Regime,
    th: &Thresholds,
    conv: Convention,
) -> f64 {
    weighted_sum(&band_norms(fields, p), s, regime, th, conv)
}

/// `Σ_{j ∈ regime} 2^{js} n_j` over precomputed band norms.
pub fn weighted_sum(norms: &BTreeMap<i32, f64>, s: f64, regime: Regime, th: &Thresholds, conv: Convention) -> f64 {
    norms
        .iter()
        .filter(|(&j, _)| regime.contains(j, th, conv))
        .map(|(&j, &n)| (j as f64 * s).exp2() * n)
        .sum()
}

/// Per-band, per-component norms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandProfile {
    pub p: f64,
    pub s: f64,
    pub labels: Vec<String>,
    pub entries: BTreeMap<i32, Vec<f64>>,
}

impl BandProfile {
    pub fn new(fields: &[&SpectralField], labels: &[&str], p: f64, s: f64) -> Result<Self> {
        if fields.len() != labels.len() {
            return Err(Error::Dimension(format!("{} fields, {} labels", fields.len(), labels.len())));
        }
        let mut entries: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
        for f in fields {
            for (j, n) in band_norms(&[f], p) {
                entries.entry(j).or_default().push(n);
            }
        }
        Ok(BandProfile {
            p,
            s,
            labels: labels.iter().map(|l| l.to_string()).collect(),
            entries,
        })
    }

    /// Geometric centre `1.5·2^j` of band `j`.
    pub fn band_center(j: i32) -> f64 {
        1.5 * (j as f64).exp2()
    }
}

/// The Bernstein-type inequalities checked by [`bernstein_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BernsteinKind {
    /// `‖f‖^ℓ_s ≲ K^{s'} ‖f‖^ℓ_{s−s'}`
    LowUp,
    /// `‖f‖^{h,ε}_s ≲ k^{s'} ε^{s'} ‖f‖^{h,ε}_{s+s'}`
    HighDown,
    /// `‖f‖^{ℓ,ε}_s ≲ k^{s'} ε^{−s'} ‖f‖^{ℓ,ε}_{s−s'}`
    LowMedUp,
    /// `‖f‖^{m,ε}_s ≲ k^{s'} ε^{−s'} ‖f‖^{m,ε}_{s−s'}`
    MedUp,
    /// `‖f‖^{m,ε}_s ≲ K^{−s'} ‖f‖^{m,ε}_{s+s'}`
    MedDown,
    /// `‖f‖^h_s ≲ K^{−s'} ‖f‖^h_{s+s'}`
    UpperDown,
}

impl BernsteinKind {
    pub const ALL: [BernsteinKind; 6] = [
        BernsteinKind::LowUp,
        BernsteinKind::HighDown,
        BernsteinKind::LowMedUp,
        BernsteinKind::MedUp,
        BernsteinKind::MedDown,
        BernsteinKind::UpperDown,
    ];

    pub fn regime(self) -> Regime {
        match self {
            BernsteinKind::LowUp => Regime::Low,
            BernsteinKind::HighDown => Regime::High,
            BernsteinKind::LowMedUp => Regime::LowMed,
            BernsteinKind::MedUp | BernsteinKind::MedDown => Regime::Med,
            BernsteinKind::UpperDown => Regime::MedHigh,
        }
    }

    /// Regularity shift of the right-hand side (`±s'`) and the printed factor.
    fn shift_and_factor(self, s_prime: f64, th: &Thresholds) -> (f64, f64) {
        let bk = th.big_k as f64;
        match self {
            BernsteinKind::LowUp => (-s_prime, bk.powf(s_prime)),
            BernsteinKind::HighDown => (s_prime, (th.k * th.eps).powf(s_prime)),
            BernsteinKind::LowMedUp | BernsteinKind::MedUp => (-s_prime, (th.k / th.eps).powf(s_prime)),
            BernsteinKind::MedDown | BernsteinKind::UpperDown => (s_prime, bk.powf(-s_prime)),
        }
    }
}

/// Both sides of one Bernstein-type inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BernsteinReport {
    pub kind: BernsteinKind,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, zero when both vanish.
    pub ratio: f64,
    pub violated: bool,
}

/// Calibrated constant for the `≲` of the Bernstein inequalities.
pub const C_BERN: f64 = 4.0;

/// `Σ_{j ∈ regime} ‖Λ^s f_j‖_{L^p}`: the dyadic weight realised by the
/// operator `Λ^s` on each band.
pub fn operator_seminorm(f: &SpectralField, s: f64, p: f64, regime: Regime, th: &Thresholds, conv: Convention) -> f64 {
    let g = f.grid;
    grid_bands(&g)
        .into_iter()
        .filter(|&j| regime.contains(j, th, conv))
        .map(|j| {
            let coeffs = f
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, &z)| {
                    let r2 = g.xi_norm2(i);
                    if band_of_r2(r2) == Some(j) {
                        z * r2.powf(0.5 * s)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect();
            tuple_lp_norm(&[&SpectralField { grid: g, coeffs }], p)
        })
        .sum()
}

/// Evaluates one inequality on `f` (regime restriction applied to `f`).
pub fn bernstein_check(
    f: &SpectralField,
    kind: BernsteinKind,
    s: f64,
    s_prime: f64,
    p: f64,
    th: &Thresholds,
    conv: Convention,
) -> Result<BernsteinReport> {
    if !(s_prime > 0.0) {
        return Err(Error::invalid("s_prime", format!("must be > 0, got {s_prime}")));
    }
    if !(p >= 1.0) {
        return Err(Error::invalid("p", format!("must be >= 1, got {p}")));
    }
    let (shift, factor) = kind.shift_and_factor(s_prime, th);
    let regime = kind.regime();
    let lhs = operator_seminorm(f, s, p, regime, th, conv);
    let rhs = factor * operator_seminorm(f, s + shift, p, regime, th, conv);
    let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(BernsteinReport {
        kind,
        lhs,
        rhs,
        ratio,
        violated: ratio > C_BERN,
    })
}

/// Random real field whose coefficients lie in bands `jmin..=jmax`.
pub fn random_band_field<R: Rng>(grid: Grid, rng: &mut R, jmin: i32, jmax: i32) -> SpectralField {
    let mut f = SpectralField::zeros(grid);
    for i in 0..grid.len() {
        let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if grid.is_nyquist(i) {
            continue;
        }
        if let Some(j) = band_of_r2(grid.xi_norm2(i)) {
            if (jmin..=jmax).contains(&j) {
                f.coeffs[i] = z;
            }
        }
    }
    f.symmetrize();
    f
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_log2_exact() {
        assert_eq!(floor_log2(1.0), 0);
        assert_eq!(floor_log2(8.0), 3);
        assert_eq!(floor_log2(7.999999999999999), 2);
        assert_eq!(floor_log2(1.0 / 64.0), -6);
        assert_eq!(floor_log2(0.3), -2);
        assert_eq!(floor_log2(f64::MIN_POSITIVE / 4.0), -1024);
    }

    #[test]
    fn thresholds_examples() {
        let t = make_thresholds(8, 1.0, 1.0 / 64.0).unwrap();
        assert_eq!((t.j0, t.jeps), (3, 6));
        assert_eq!(make_thresholds(8, 1.0, 0.25), Err(Error::ThresholdInversion { j0: 3, jeps: 2 }));
        let t = make_thresholds(16, 0.5, 1.0 / 256.0).unwrap();
        assert_eq!((t.j0, t.jeps), (4, 7));
    }

    #[test]
    fn band_tie_goes_up() {
        assert_eq!(band_of_r(4.0), Some(2));
        assert_eq!(band_of_r2(16.0), Some(2));
        assert_eq!(band_of_r2(15.999999), Some(1));
        assert_eq!(band_of_r2(0.0), None);
    }

    #[test]
    fn regimes_disjoint_partition() {
        let th = make_thresholds(8, 1.0, 1.0 / 64.0).unwrap();
        for j in -5..12 {
            let hits = [Regime::Low, Regime::Med, Regime::High]
                .iter()
                .filter(|r| r.contains(j, &th, Convention::Disjoint))
                .count();
            assert_eq!(hits, 1);
        }
        assert!(Regime::High.contains(5, &th, Convention::Overlapping));
        assert!(!Regime::High.contains(5, &th, Convention::Disjoint));
    }
}
