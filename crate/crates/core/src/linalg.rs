//! Small dense complex linear algebra: matrix exponential, eigenvalues,
//! and exact rational rank.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Induced 1-norm (maximum absolute column sum).
pub fn norm1(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

const THETA: [(usize, f64); 4] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068),
];
const THETA13: f64 = 5.371_920_351_148_152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const B9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

fn pade_low(a: &CMat, b: &[f64]) -> (CMat, CMat) {
    let n = a.nrows();
    let id = CMat::identity(n, n);
    let a2 = a * a;
    let mut u = &id * Complex64::from(b[1]);
    let mut v = &id * Complex64::from(b[0]);
    let mut p = id;
    let mut k = 2;
    while k < b.len() {
        p = &p * &a2;
        v += &p * Complex64::from(b[k]);
        u += &p * Complex64::from(b[k + 1]);
        k += 2;
    }
    (a * u, v)
}

fn pade13(a: &CMat) -> (CMat, CMat) {
    let n = a.nrows();
    let id = CMat::identity(n, n);
    let c = |x: f64| Complex64::from(x);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * c(B13[13]) + &a4 * c(B13[11]) + &a2 * c(B13[9]);
    let u = a
        * (&a6 * inner_u
            + &a6 * c(B13[7])
            + &a4 * c(B13[5])
            + &a2 * c(B13[3])
            + &id * c(B13[1]));
    let inner_v = &a6 * c(B13[12]) + &a4 * c(B13[10]) + &a2 * c(B13[8]);
    let v = &a6 * inner_v + &a6 * c(B13[6]) + &a4 * c(B13[4]) + &a2 * c(B13[2]) + &id * c(B13[0]);
    (u, v)
}

/// Matrix exponential by scaling and squaring with a diagonal Padé kernel
/// (degrees 3, 5, 7, 9 or 13 chosen from the 1-norm).
///
/// Panics if `a` is not square or contains non-finite entries.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    assert!(
        a.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
        "expm requires finite entries"
    );
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    if n == 1 {
        return CMat::from_element(1, 1, a[(0, 0)].exp());
    }
    let nrm = norm1(a);
    if nrm == 0.0 {
        return CMat::identity(n, n);
    }
    for &(m, theta) in THETA.iter() {
        if nrm <= theta {
            let b: &[f64] = match m {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            let (u, v) = pade_low(a, b);
            return solve_pade(&u, &v);
        }
    }
    let s = (nrm / THETA13).log2().ceil().max(0.0) as i32;
    let scaled = a * Complex64::from(2f64.powi(-s));
    let (u, v) = pade13(&scaled);
    let mut r = solve_pade(&u, &v);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

fn solve_pade(u: &CMat, v: &CMat) -> CMat {
    let p = v + u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .expect("Padé denominator is nonsingular for admissible scaling")
}

/// Characteristic polynomial coefficients `c[0..=n]` (monic, `c[n] = 1`)
/// of `det(λI − M)` by the Faddeev–LeVerrier recursion.
pub fn char_poly(m: &CMat) -> Vec<Complex64> {
    let n = m.nrows();
    let mut c = vec![C0; n + 1];
    c[n] = C1;
    let mut mk = CMat::zeros(n, n);
    let id = CMat::identity(n, n);
    for k in 1..=n {
        mk = m * &mk + &id * c[n - k + 1];
        let amk = m * &mk;
        c[n - k] = -amk.trace() / Complex64::from(k as f64);
    }
    c
}

fn horner(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = C0;
    let mut dp = C0;
    for &ci in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + ci;
    }
    (p, dp)
}

/// Roots of a monic polynomial (coefficients in ascending order) by
/// Aberth–Ehrlich simultaneous iteration.
pub fn poly_roots(c: &[Complex64]) -> Vec<Complex64> {
    let mut coeffs = c.to_vec();
    let mut roots = Vec::new();
    // exact zero roots are deflated so multiplicity at the origin is exact
    while coeffs.len() > 1 && coeffs[0] == C0 {
        roots.push(C0);
        coeffs.remove(0);
    }
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return roots;
    }
    let lead = coeffs[deg];
    let monic: Vec<Complex64> = coeffs.iter().map(|z| z / lead).collect();
    if deg == 1 {
        roots.push(-monic[0]);
        return roots;
    }
    // Cauchy-style radius for the starting circle
    let radius = monic[..deg]
        .iter()
        .enumerate()
        .map(|(i, z)| z.norm().powf(1.0 / (deg - i) as f64))
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / deg as f64 + 0.4;
            Complex64::from_polar(radius, ang)
        })
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let (p, dp) = horner(&monic, z[i]);
            if p == C0 {
                continue;
            }
            let ratio = p / dp;
            let mut s = C0;
            for j in 0..deg {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff != C0 {
                        s += C1 / diff;
                    }
                }
            }
            let w = ratio / (C1 - ratio * s);
            if w.re.is_finite() && w.im.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / z[i].norm().max(radius * 1e-16));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    roots.extend(z);
    roots
}

/// Refines approximate eigenvalues of `m` by Aberth steps whose Newton
/// correction is `1 / tr((λI − M)^{-1})`, evaluated directly on the matrix.
pub fn polish_eigenvalues(m: &CMat, guesses: &mut [Complex64]) {
    let n = m.nrows();
    let scale = norm1(m).max(1e-300);
    let id = CMat::identity(n, n);
    for _ in 0..30 {
        let mut moved = 0.0f64;
        for i in 0..guesses.len() {
            let shifted = &id * guesses[i] - m;
            let lu = shifted.lu();
            let inv = match lu.try_inverse() {
                Some(inv) => inv,
                None => continue,
            };
            let tr = inv.trace();
            if tr == C0 || !tr.re.is_finite() || !tr.im.is_finite() {
                continue;
            }
            let newton = C1 / tr;
            let mut s = C0;
            for j in 0..guesses.len() {
                if j != i {
                    let diff = guesses[i] - guesses[j];
                    if diff != C0 {
                        s += C1 / diff;
                    }
                }
            }
            let w = newton / (C1 - newton * s);
            if !(w.re.is_finite() && w.im.is_finite()) {
                continue;
            }
            guesses[i] -= w;
            moved = moved.max(w.norm() / scale);
        }
        if moved < 1e-16 {
            break;
        }
    }
}

/// Eigenvalues of a general complex matrix via nalgebra's complex Schur form.
pub fn schur_eigenvalues(m: &CMat) -> Vec<Complex64> {
    let schur = nalgebra::Schur::new(m.clone());
    match schur.eigenvalues() {
        Some(ev) => ev.iter().copied().collect(),
        None => {
            // fall back to the diagonal of the (numerically) triangular factor
            let (_, t) = schur.unpack();
            (0..t.nrows()).map(|i| t[(i, i)]).collect()
        }
    }
}

/// Sorts by real part descending, ties by imaginary part descending.
pub fn sort_eigenvalues(ev: &mut [Complex64]) {
    ev.sort_by(|x, y| {
        y.re.partial_cmp(&x.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(y.im.partial_cmp(&x.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn hermitian_min_eigenvalue(h: &CMat) -> f64 {
    let sym = (h + h.adjoint()) * Complex64::from(0.5);
    let eig = nalgebra::SymmetricEigen::new(sym);
    eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Exact rank and a rational null-space basis of a matrix given by f64
/// entries (each f64 is a dyadic rational, so the conversion is exact).
pub fn exact_rank_and_kernel(rows: &[Vec<f64>]) -> (usize, Vec<Vec<f64>>) {
    if rows.is_empty() {
        return (0, Vec::new());
    }
    let ncols = rows[0].len();
    let mut a: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|&x| BigRational::from_float(x).expect("finite matrix entry"))
                .collect()
        })
        .collect();
    let (rank, pivots) = rref(&mut a, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let mut kernel = Vec::new();
    for &f in &free {
        let mut vec = vec![BigRational::zero(); ncols];
        vec[f] = BigRational::from_integer(BigInt::from(1));
        for (row, &pc) in pivots.iter().enumerate() {
            vec[pc] = -a[row][f].clone();
        }
        let fv: Vec<f64> = vec.iter().map(|q| q.to_f64().unwrap_or(0.0)).collect();
        let nrm = fv.iter().map(|x| x * x).sum::<f64>().sqrt();
        kernel.push(fv.iter().map(|x| x / nrm).collect());
    }
    (rank, kernel)
}

fn rref(a: &mut [Vec<BigRational>], ncols: usize) -> (usize, Vec<usize>) {
    let nrows = a.len();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row >= nrows {
            break;
        }
        // largest-magnitude pivot keeps the rationals small-ish
        let piv = (row..nrows)
            .filter(|&r| !a[r][col].is_zero())
            .max_by(|&x, &y| a[x][col].abs().cmp(&a[y][col].abs()));
        let Some(p) = piv else { continue };
        a.swap(row, p);
        let inv = a[row][col].recip();
        for c in col..ncols {
            a[row][c] = &a[row][c] * &inv;
        }
        for r in 0..nrows {
            if r != row && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in col..ncols {
                    let delta = &factor * &a[row][c];
                    a[r][c] -= delta;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    (row, pivots)
}

/// Numerical rank by singular values with relative tolerance `rel_tol`.
pub fn numeric_rank(rows: &[Vec<f64>], rel_tol: f64) -> usize {
    if rows.is_empty() || rows[0].is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let sv = m.singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}
