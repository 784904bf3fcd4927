//! Adaptive integrators for `u' = f(t, u)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

type C = Complex64;

fn err_norm(err: &[C], u: &[C], atol: f64, rtol: f64) -> f64 {
    err.iter()
        .zip(u)
        .map(|(e, x)| e.norm() / (atol + rtol * x.norm()))
        .fold(0.0, f64::max)
}

/// Step counts of a run.
#[derive(Debug, Clone, Copy, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Three-stage Radau IIA (order 5, L-stable) for the linear system
/// `u' = M u` on `[0, t]`, with step-doubling error control.
pub fn radau_linear(m: &[Vec<C>], u0: &[C], t: f64, atol: f64, rtol: f64) -> (Vec<C>, Stats) {
    let n = u0.len();
    let mm = DMatrix::from_fn(n, n, |i, j| m[i][j]);
    let s6 = 6f64.sqrt();
    let a = [
        [(88.0 - 7.0 * s6) / 360.0, (296.0 - 169.0 * s6) / 1800.0, (-2.0 + 3.0 * s6) / 225.0],
        [(296.0 + 169.0 * s6) / 1800.0, (88.0 + 7.0 * s6) / 360.0, (-2.0 - 3.0 * s6) / 225.0],
        [(16.0 - s6) / 36.0, (16.0 + s6) / 36.0, 1.0 / 9.0],
    ];
    let step = |u: &DVector<C>, h: f64| -> DVector<C> {
        // (I − h A⊗M) K = 1⊗(M u), then u + h Σ b_i K_i with b = last row of A.
        let mu = &mm * u;
        let big = DMatrix::from_fn(3 * n, 3 * n, |r, c| {
            let (si, i) = (r / n, r % n);
            let (sj, j) = (c / n, c % n);
            let id = if r == c { C::from(1.0) } else { C::from(0.0) };
            id - mm[(i, j)] * (h * a[si][sj])
        });
        let rhs = DVector::from_fn(3 * n, |r, _| mu[r % n]);
        let k = big.lu().solve(&rhs).expect("Radau stage matrix is regular");
        let mut out = u.clone();
        for s in 0..3 {
            for i in 0..n {
                out[i] += k[s * n + i] * (h * a[2][s]);
            }
        }
        out
    };
    let mut u = DVector::from_column_slice(u0);
    let mut stats = Stats::default();
    if t == 0.0 {
        return (u0.to_vec(), stats);
    }
    let scale = mm.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let mut h = (0.01 / scale).min(t);
    let mut tc = 0.0;
    while tc < t {
        h = h.min(t - tc);
        let full = step(&u, h);
        let half = step(&step(&u, 0.5 * h), 0.5 * h);
        let err: Vec<C> = full.iter().zip(half.iter()).map(|(x, y)| (y - x) / 31.0).collect();
        let e = err_norm(&err, half.as_slice(), atol, rtol);
        if e <= 1.0 {
            u = half;
            tc += h;
            stats.accepted += 1;
        } else {
            stats.rejected += 1;
        }
        let fac = if e == 0.0 { 4.0 } else { (0.9 * e.powf(-1.0 / 6.0)).clamp(0.2, 4.0) };
        h *= fac;
    }
    (u.iter().copied().collect(), stats)
}

/// Dormand–Prince 5(4) with standard step control.
pub fn dopri5(f: impl Fn(f64, &[C]) -> Vec<C>, u0: &[C], t: f64, atol: f64, rtol: f64) -> (Vec<C>, Stats) {
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const CN: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let n = u0.len();
    let mut u = u0.to_vec();
    let mut stats = Stats::default();
    let mut tc = 0.0;
    let mut h = (t * 1e-3).max(1e-12);
    while tc < t {
        h = h.min(t - tc);
        let mut k: Vec<Vec<C>> = Vec::with_capacity(7);
        k.push(f(tc, &u));
        for s in 0..6 {
            let y: Vec<C> = (0..n)
                .map(|i| u[i] + (0..=s).map(|j| k[j][i] * (h * A[s][j])).sum::<C>())
                .collect();
            k.push(f(tc + CN[s + 1] * h, &y));
        }
        let y5: Vec<C> = (0..n)
            .map(|i| u[i] + (0..6).map(|j| k[j][i] * (h * A[5][j])).sum::<C>())
            .collect();
        let err: Vec<C> = (0..n).map(|i| (0..7).map(|j| k[j][i] * (h * E[j])).sum()).collect();
        let e = err_norm(&err, &y5, atol, rtol);
        if e <= 1.0 {
            u = y5;
            tc += h;
            stats.accepted += 1;
        } else {
            stats.rejected += 1;
        }
        let fac = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
    }
    (u, stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_decay() {
        let lam = C::new(-3.0, 2.0);
        let want = (lam * 1.5).exp();
        let (r, _) = radau_linear(&[vec![lam]], &[C::from(1.0)], 1.5, 1e-14, 1e-12);
        assert!((r[0] - want).norm() < 1e-11);
        let (d, _) = dopri5(|_, u| vec![lam * u[0]], &[C::from(1.0)], 1.5, 1e-14, 1e-12);
        assert!((d[0] - want).norm() < 1e-11);
    }

    #[test]
    fn stiff_radau() {
        let m = vec![vec![C::from(-1e6), C::from(1.0)], vec![C::from(0.0), C::from(-1.0)]];
        let (r, s) = radau_linear(&m, &[C::from(1.0), C::from(1.0)], 10.0, 1e-16, 1e-12);
        let want1 = (-10.0f64).exp();
        assert!((r[1].re - want1).abs() < 1e-10 * want1, "{} vs {want1}", r[1].re);
        assert!(s.accepted < 5000);
    }
}
