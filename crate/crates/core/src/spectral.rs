//! Periodic grids, Fourier coefficient fields, differential multipliers and
//! dealiasing.
//!
//! Coefficients are stored in FFT order, lexicographic with axis 0 slowest.
//! The forward transform carries the `1/n^d` factor so coefficients are
//! Fourier-series coefficients: `f(x) = Σ_m c_m e^{iξ_m·x}`, `ξ_m = 2πm/L`.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

pub mod snapshot;

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// Torus `[0, L]^d` sampled by `n` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub d: usize,
    pub n: usize,
    pub l: f64,
}

impl Grid {
    pub fn new(d: usize, n: usize, l: f64) -> Result<Grid> {
        if !(1..=3).contains(&d) {
            return Err(Error::invalid("d", format!("must be 1, 2 or 3, got {d}")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(Error::invalid("n", format!("must be even and >= 8, got {n}")));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::invalid("l", format!("box length must be > 0, got {l}")));
        }
        Ok(Grid { d, n, l })
    }

    /// Number of lattice points `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        self.l / self.n as f64
    }

    /// Fundamental wavenumber `2π/L`.
    pub fn k0(&self) -> f64 {
        2.0 * PI / self.l
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.d as i32)
    }

    pub fn volume(&self) -> f64 {
        self.l.powi(self.d as i32)
    }

    /// Signed wavenumber of FFT slot `i` (`n/2` maps to `−n/2`).
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    fn slot(&self, m: i64) -> usize {
        m.rem_euclid(self.n as i64) as usize
    }

    /// Integer mode `m` of a flat index; unused axes are zero.
    pub fn mode(&self, idx: usize) -> [i64; 3] {
        let mut out = [0i64; 3];
        let mut rest = idx;
        for ax in (0..self.d).rev() {
            out[ax] = self.wavenumber(rest % self.n);
            rest /= self.n;
        }
        out
    }

    pub fn index_of(&self, m: &[i64]) -> usize {
        let mut idx = 0;
        for ax in 0..self.d {
            idx = idx * self.n + self.slot(m[ax]);
        }
        idx
    }

    /// Flat index of `−m`.
    pub fn neg_index(&self, idx: usize) -> usize {
        let m = self.mode(idx);
        self.index_of(&[-m[0], -m[1], -m[2]])
    }

    pub fn is_nyquist(&self, idx: usize) -> bool {
        let half = -(self.n as i64 / 2);
        self.mode(idx)[..self.d].iter().any(|&m| m == half)
    }

    pub fn xi(&self, idx: usize) -> [f64; 3] {
        let m = self.mode(idx);
        let k0 = self.k0();
        [m[0] as f64 * k0, m[1] as f64 * k0, m[2] as f64 * k0]
    }

    pub fn xi_norm2(&self, idx: usize) -> f64 {
        let x = self.xi(idx);
        x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
    }

    /// Physical coordinates of sample `idx`.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let mut out = [0.0; 3];
        let mut rest = idx;
        for ax in (0..self.d).rev() {
            out[ax] = (rest % self.n) as f64 * self.dx();
            rest /= self.n;
        }
        out
    }
}

thread_local! {
    static PLANS: RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> = RefCell::new(HashMap::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|p| {
        p.borrow_mut()
            .entry((n, inverse))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                if inverse {
                    planner.plan_fft_inverse(n)
                } else {
                    planner.plan_fft_forward(n)
                }
            })
            .clone()
    })
}

/// Unnormalized d-dimensional transform in place (forward: e^{−i}, inverse: e^{+i}).
fn fft_nd(grid: &Grid, data: &mut [Complex64], inverse: bool) {
    let n = grid.n;
    let fft = plan(n, inverse);
    if grid.d == 1 {
        fft.process(data);
        return;
    }
    let total = data.len();
    let mut buf = vec![C0; total];
    for ax in 0..grid.d {
        let stride = n.pow((grid.d - 1 - ax) as u32);
        let outer = total / (n * stride);
        let mut line = 0;
        for o in 0..outer {
            for i in 0..stride {
                let base = o * n * stride + i;
                for k in 0..n {
                    buf[line * n + k] = data[base + k * stride];
                }
                line += 1;
            }
        }
        fft.process(&mut buf);
        line = 0;
        for o in 0..outer {
            for i in 0..stride {
                let base = o * n * stride + i;
                for k in 0..n {
                    data[base + k * stride] = buf[line * n + k];
                }
                line += 1;
            }
        }
    }
}

/// Fourier coefficients of one scalar field on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub grid: Grid,
    pub coeffs: Vec<Complex64>,
}

/// Pointwise Fourier multipliers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Multiplier {
    /// `iξ_j`
    Grad(usize),
    /// `−|ξ|²`
    Laplacian,
    /// `|ξ|^{−2}`, zero mode mapped to zero; requires zero mean.
    InvNegLaplacian,
    /// `|ξ|^σ`; for `σ < 0` requires zero mean.
    LambdaSigma(f64),
}

impl Multiplier {
    fn singular(&self) -> bool {
        match self {
            Multiplier::InvNegLaplacian => true,
            Multiplier::LambdaSigma(s) => *s < 0.0,
            _ => false,
        }
    }

    /// Symbol value at a flat lattice index (Nyquist modes map to zero).
    pub fn value(&self, grid: &Grid, idx: usize) -> Complex64 {
        if grid.is_nyquist(idx) {
            return C0;
        }
        let r2 = grid.xi_norm2(idx);
        match *self {
            Multiplier::Grad(j) => Complex64::new(0.0, grid.xi(idx)[j]),
            Multiplier::Laplacian => Complex64::from(-r2),
            Multiplier::InvNegLaplacian => {
                if r2 == 0.0 {
                    C0
                } else {
                    Complex64::from(1.0 / r2)
                }
            }
            Multiplier::LambdaSigma(s) => {
                if r2 == 0.0 {
                    C0
                } else {
                    Complex64::from(r2.powf(0.5 * s))
                }
            }
        }
    }
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        SpectralField {
            grid,
            coeffs: vec![C0; grid.len()],
        }
    }

    /// Constant function `c`.
    pub fn constant(grid: Grid, c: f64) -> Self {
        let mut f = Self::zeros(grid);
        f.coeffs[0] = Complex64::from(c);
        f
    }

    /// Real field `amp e^{iξ_m·x} + conj(amp) e^{−iξ_m·x}`.
    pub fn real_mode(grid: Grid, m: &[i64], amp: Complex64) -> Self {
        let mut f = Self::zeros(grid);
        let i = grid.index_of(m);
        let j = grid.neg_index(i);
        f.coeffs[i] += amp;
        f.coeffs[j] += amp.conj();
        f
    }

    /// Transform of physical samples. Real samples give Hermitian output.
    pub fn from_physical(grid: Grid, samples: &[Complex64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        let mut data = samples.to_vec();
        fft_nd(&grid, &mut data, false);
        let s = 1.0 / grid.len() as f64;
        for z in data.iter_mut() {
            *z *= s;
        }
        Ok(SpectralField { grid, coeffs: data })
    }

    pub fn from_real(grid: Grid, samples: &[f64]) -> Result<Self> {
        let c: Vec<Complex64> = samples.iter().map(|&x| Complex64::from(x)).collect();
        Self::from_physical(grid, &c)
    }

    /// Samples a real function of position.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let samples: Vec<f64> = (0..grid.len()).map(|i| f(&grid.point(i)[..grid.d])).collect();
        Self::from_real(grid, &samples).expect("sample count matches grid")
    }

    pub fn to_physical(&self) -> Vec<Complex64> {
        let mut data = self.coeffs.clone();
        fft_nd(&self.grid, &mut data, true);
        data
    }

    pub fn to_physical_real(&self) -> Vec<f64> {
        self.to_physical().into_iter().map(|z| z.re).collect()
    }

    pub fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// `‖f‖_{L²([0,L]^d)}` by Parseval.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.volume() * self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// `‖f‖_{L^p}` from physical samples (`p = ∞` allowed).
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_of_samples(&self.grid, &self.to_physical(), p)
    }

    /// `max |c(m) − conj c(−m)|`.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| (self.coeffs[i] - self.coeffs[self.grid.neg_index(i)].conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, c: f64) -> Self {
        SpectralField {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|z| z * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        SpectralField {
            grid: self.grid,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        SpectralField {
            grid: self.grid,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x - y).collect(),
        }
    }

    /// `self += c·other`
    pub fn axpy(&mut self, c: f64, other: &Self) {
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * c;
        }
    }

    /// Applies a multiplier. Singular multipliers require zero mean.
    pub fn apply(&self, m: Multiplier) -> Result<Self> {
        if m.singular() && self.coeffs[0] != C0 {
            return Err(Error::NonzeroMean {
                re: self.coeffs[0].re,
                im: self.coeffs[0].im,
            });
        }
        if let Multiplier::Grad(j) = m {
            if j >= self.grid.d {
                return Err(Error::Dimension(format!("gradient axis {j} in dimension {}", self.grid.d)));
            }
        }
        let g = self.grid;
        Ok(SpectralField {
            grid: g,
            coeffs: self.coeffs.iter().enumerate().map(|(i, z)| z * m.value(&g, i)).collect(),
        })
    }

    /// Zeroes every coefficient with some `|m_i| > n/3`.
    pub fn dealias_23(&self) -> Self {
        let mut out = self.clone();
        dealias_in_place(&mut out.coeffs, &self.grid);
        out
    }

    /// Random real field with coefficients supported on `|ξ| <= kmax`
    /// (Nyquist excluded), components drawn uniformly in the unit disc.
    pub fn random_hermitian<R: Rng>(grid: Grid, rng: &mut R, kmax: f64) -> Self {
        let mut f = Self::zeros(grid);
        for i in 0..grid.len() {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if !grid.is_nyquist(i) && grid.xi_norm2(i).sqrt() <= kmax {
                f.coeffs[i] = z;
            }
        }
        f.symmetrize();
        f
    }

    /// Projects onto real fields: `c(m) ← (c(m) + conj c(−m))/2`.
    pub fn symmetrize(&mut self) {
        let g = self.grid;
        let old = self.coeffs.clone();
        for i in 0..g.len() {
            self.coeffs[i] = 0.5 * (old[i] + old[g.neg_index(i)].conj());
        }
    }

    /// Integral `∫ Re(conj(f)·g)` over the torus.
    pub fn inner(&self, other: &Self) -> f64 {
        self.grid.volume()
            * self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| (x.conj() * y).re)
                .sum::<f64>()
    }
}

pub(crate) fn dealias_in_place(coeffs: &mut [Complex64], grid: &Grid) {
    let n = grid.n as i64;
    for (i, z) in coeffs.iter_mut().enumerate() {
        let m = grid.mode(i);
        if m[..grid.d].iter().any(|&k| 3 * k.abs() > n) {
            *z = C0;
        }
    }
}

pub(crate) fn lp_of_samples(grid: &Grid, samples: &[Complex64], p: f64) -> f64 {
    if p.is_infinite() {
        return samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    let s: f64 = samples.iter().map(|z| z.norm().powf(p)).sum();
    (s * grid.cell_volume()).powf(1.0 / p)
}

/// `div` of a d-tuple.
pub fn div(fields: &[SpectralField]) -> Result<SpectralField> {
    let Some(first) = fields.first() else {
        return Err(Error::Dimension("div of an empty tuple".into()));
    };
    let g = first.grid;
    if fields.len() != g.d {
        return Err(Error::Dimension(format!("div needs {} components, got {}", g.d, fields.len())));
    }
    let mut out = SpectralField::zeros(g);
    for (j, f) in fields.iter().enumerate() {
        for i in 0..g.len() {
            out.coeffs[i] += f.coeffs[i] * Multiplier::Grad(j).value(&g, i);
        }
    }
    Ok(out)
}

/// `∇f` as a d-tuple.
pub fn grad(f: &SpectralField) -> Vec<SpectralField> {
    (0..f.grid.d)
        .map(|j| f.apply(Multiplier::Grad(j)).expect("axis within dimension"))
        .collect()
}

/// Unknowns `(a, v, θ, q)` on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub grid: Grid,
    pub a: SpectralField,
    pub v: Vec<SpectralField>,
    pub theta: SpectralField,
    pub q: Vec<SpectralField>,
    pub time: f64,
}

impl State {
    pub fn zeros(grid: Grid) -> Self {
        let z = SpectralField::zeros(grid);
        State {
            grid,
            a: z.clone(),
            v: vec![z.clone(); grid.d],
            theta: z.clone(),
            q: vec![z; grid.d],
            time: 0.0,
        }
    }

    /// Components in the order `(a, v_1..v_d, θ, q_1..q_d)`.
    pub fn components(&self) -> Vec<&SpectralField> {
        let mut out = vec![&self.a];
        out.extend(self.v.iter());
        out.push(&self.theta);
        out.extend(self.q.iter());
        out
    }

    pub fn components_mut(&mut self) -> Vec<&mut SpectralField> {
        let mut out = vec![&mut self.a];
        out.extend(self.v.iter_mut());
        out.push(&mut self.theta);
        out.extend(self.q.iter_mut());
        out
    }

    pub fn from_components(grid: Grid, mut comps: Vec<SpectralField>, time: f64) -> Result<Self> {
        let d = grid.d;
        if comps.len() != 2 * d + 2 {
            return Err(Error::Dimension(format!("state needs {} components, got {}", 2 * d + 2, comps.len())));
        }
        if comps.iter().any(|c| c.grid != grid) {
            return Err(Error::Dimension("components live on different grids".into()));
        }
        let q = comps.split_off(d + 2);
        let theta = comps.pop().expect("length checked");
        let v = comps.split_off(1);
        let a = comps.pop().expect("length checked");
        Ok(State { grid, a, v, theta, q, time })
    }

    /// Coefficient vector `(a, v, θ, q)` at one lattice index.
    pub fn mode_vector(&self, idx: usize) -> Vec<Complex64> {
        self.components().iter().map(|c| c.coeffs[idx]).collect()
    }

    pub fn set_mode_vector(&mut self, idx: usize, vals: &[Complex64]) {
        for (c, &v) in self.components_mut().into_iter().zip(vals) {
            c.coeffs[idx] = v;
        }
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.components().iter().map(|c| c.hermitian_defect()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|c| c.is_finite())
    }

    /// `sqrt(Σ_components ‖·‖²_{L²})`
    pub fn l2_norm(&self) -> f64 {
        self.components().iter().map(|c| c.l2_norm().powi(2)).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        let comps = self.components().into_iter().map(|f| f.scale(c)).collect();
        State::from_components(self.grid, comps, self.time).expect("same layout")
    }

    pub fn sub(&self, other: &Self) -> Self {
        let comps = self
            .components()
            .into_iter()
            .zip(other.components())
            .map(|(x, y)| x.sub(y))
            .collect();
        State::from_components(self.grid, comps, self.time).expect("same layout")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grid_rejects_odd_or_small() {
        assert!(Grid::new(1, 7, 1.0).is_err());
        assert!(Grid::new(1, 6, 1.0).is_err());
        assert!(Grid::new(4, 8, 1.0).is_err());
        assert!(Grid::new(2, 8, 0.0).is_err());
    }

    #[test]
    fn index_roundtrip() {
        let g = Grid::new(3, 8, 1.0).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.index_of(&g.mode(i)), i);
            assert_eq!(g.neg_index(g.neg_index(i)), i);
        }
    }

    #[test]
    fn constant_field_samples() {
        let g = Grid::new(2, 8, 3.0).unwrap();
        let f = SpectralField::constant(g, 2.5);
        for x in f.to_physical_real() {
            assert!((x - 2.5).abs() < 1e-15);
        }
    }

    #[test]
    fn roundtrip_random() {
        let g = Grid::new(2, 16, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = SpectralField::random_hermitian(g, &mut rng, f64::INFINITY);
        let back = SpectralField::from_physical(g, &f.to_physical()).unwrap();
        let err = back.sub(&f).coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-14);
        assert!(f.to_physical().iter().all(|z| z.im.abs() < 1e-13));
    }

    #[test]
    fn nonzero_mean_rejected() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let f = SpectralField::constant(g, 1.0);
        assert_eq!(
            f.apply(Multiplier::InvNegLaplacian),
            Err(Error::NonzeroMean { re: 1.0, im: 0.0 })
        );
        assert!(f.apply(Multiplier::LambdaSigma(-0.5)).is_err());
        assert!(f.apply(Multiplier::LambdaSigma(0.5)).is_ok());
    }

    #[test]
    fn nyquist_zeroed_by_derivatives() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let mut f = SpectralField::zeros(g);
        f.coeffs[4] = Complex64::from(1.0);
        assert_eq!(f.apply(Multiplier::Grad(0)).unwrap().coeffs[4], C0);
        assert_eq!(f.apply(Multiplier::Laplacian).unwrap().coeffs[4], C0);
    }
}
