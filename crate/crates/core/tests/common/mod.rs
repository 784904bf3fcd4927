#![allow(dead_code)]

use nsclab_core::spectral::{Grid, State};
use num_complex::Complex64;
use rand::Rng;

pub fn cmat_rows(m: &nsclab_core::linalg::CMat) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

pub fn random_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

/// Every component random in band `j`.
pub fn band_state<R: Rng>(grid: Grid, rng: &mut R, j: i32) -> State {
    let mut s = State::zeros(grid);
    for c in s.components_mut() {
        *c = nsclab_core::besov::random_band_field(grid, rng, j, j);
    }
    s
}
