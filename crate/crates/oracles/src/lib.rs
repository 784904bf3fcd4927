//! Reference computations that share no code with `nsclab-core`.

pub mod mms;
pub mod ode;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::Zero;

/// Roots of `a z² + b z + c` (cancellation-free form).
pub fn quadratic_roots(a: Complex64, b: Complex64, c: Complex64) -> [Complex64; 2] {
    let disc = (b * b - a * c * 4.0).sqrt();
    let s = if (b.conj() * disc).re >= 0.0 { -(b + disc) } else { -(b - disc) };
    let q = s * 0.5;
    if q == Complex64::zero() {
        return [Complex64::zero(), Complex64::zero()];
    }
    [q / a, c / q]
}

/// Eigenvalues of a dense complex matrix by the complex Schur form.
pub fn eigenvalues(m: &[Vec<Complex64>]) -> Vec<Complex64> {
    let n = m.len();
    let a = nalgebra::DMatrix::from_fn(n, n, |i, j| m[i][j]);
    a.eigenvalues().expect("complex Schur form is triangular").iter().copied().collect()
}

/// Exact integer matrix `2^{−e_min}·A` for an f64 matrix: every finite
/// double is `m·2^e` with integer `m`.
pub fn dyadic_integer_matrix(rows: &[Vec<f64>]) -> Vec<Vec<BigInt>> {
    let parts: Vec<Vec<(i64, i32)>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|&x| {
                    assert!(x.is_finite(), "finite entries only");
                    if x == 0.0 {
                        return (0, 0);
                    }
                    let bits = x.to_bits();
                    let sign = if bits >> 63 == 1 { -1 } else { 1 };
                    let exp = ((bits >> 52) & 0x7ff) as i32;
                    let frac = (bits & ((1u64 << 52) - 1)) as i64;
                    if exp == 0 {
                        (sign * frac, -1074)
                    } else {
                        (sign * (frac | (1i64 << 52)), exp - 1075)
                    }
                })
                .collect()
        })
        .collect();
    let emin = parts.iter().flatten().filter(|(m, _)| *m != 0).map(|(_, e)| *e).min().unwrap_or(0);
    parts
        .iter()
        .map(|r| r.iter().map(|&(m, e)| BigInt::from(m) << (e - emin) as usize).collect())
        .collect()
}

/// Rank by fraction-free (Bareiss) elimination.
pub fn bareiss_rank(mut m: Vec<Vec<BigInt>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut prev = BigInt::from(1);
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for r in rank + 1..rows {
            for k in c + 1..cols {
                let v = &m[rank][c] * &m[r][k] - &m[r][c] * &m[rank][k];
                m[r][k] = v / &prev;
            }
            m[r][c] = BigInt::zero();
        }
        prev = m[rank][c].clone();
        rank += 1;
    }
    rank
}

/// Product of two trigonometric polynomials on an `n^d` grid by direct
/// cyclic convolution of their coefficients (index layout `i = Σ m_ax n^{d−1−ax}`).
pub fn cyclic_convolution(n: usize, d: usize, f: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
    let total = n.pow(d as u32);
    assert_eq!(f.len(), total);
    assert_eq!(g.len(), total);
    let digits = |mut i: usize| {
        let mut out = vec![0usize; d];
        for ax in (0..d).rev() {
            out[ax] = i % n;
            i /= n;
        }
        out
    };
    let mut out = vec![Complex64::zero(); total];
    for (a, fa) in f.iter().enumerate() {
        if fa.is_zero() {
            continue;
        }
        let da = digits(a);
        for (b, gb) in g.iter().enumerate() {
            if gb.is_zero() {
                continue;
            }
            let db = digits(b);
            let k = (0..d).fold(0, |acc, ax| acc * n + (da[ax] + db[ax]) % n);
            out[k] += fa * gb;
        }
    }
    out
}
