//! Manufactured solution of the one-dimensional nonlinear system
//! (unknowns `a, v, θ, q`) and its forcing, from closed-form derivatives.

/// System coefficients.
#[derive(Debug, Clone, Copy)]
pub struct Coeffs {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub eps: f64,
    pub visc_mu: f64,
    pub visc_lam: f64,
}

/// `u_i(x, t) = A_i cos(ω_i t) sin(k_i x + φ_i)` for `i = a, v, θ, q`.
#[derive(Debug, Clone, Copy)]
pub struct Mms1d {
    pub amp: [f64; 4],
    pub k: [f64; 4],
    pub phase: [f64; 4],
    pub omega: [f64; 4],
}

struct Jet {
    u: f64,
    ut: f64,
    ux: f64,
    uxx: f64,
}

impl Mms1d {
    fn jet(&self, i: usize, x: f64, t: f64) -> Jet {
        let (a, k, p, w) = (self.amp[i], self.k[i], self.phase[i], self.omega[i]);
        let (s, c) = (k * x + p).sin_cos();
        let (st, ct) = (w * t).sin_cos();
        Jet {
            u: a * ct * s,
            ut: -a * w * st * s,
            ux: a * ct * k * c,
            uxx: -a * ct * k * k * s,
        }
    }

    pub fn exact(&self, x: f64, t: f64) -> [f64; 4] {
        [0, 1, 2, 3].map(|i| self.jet(i, x, t).u)
    }

    /// `∂_t U − L U − N(U)` at `(x, t)`, with
    ///
    /// ```text
    /// L:  a_t = −v_x,  v_t = −a_x − γθ_x + (μ'+λ')v_xx,
    ///     θ_t = −γ v_x − β q_x,  q_t = −(κ θ_x + α q)/ε²
    /// N:  F = −(a v)_x,  G = −v v_x − J (μ'+λ') v_xx + J a_x − γ θ a_x/(1+a),
    ///     H = −v θ_x + β J q_x + γ(μ'+λ') v_x²/(1+a) − γ² θ v_x,  I = −v q_x
    /// ```
    pub fn forcing(&self, c: &Coeffs, x: f64, t: f64) -> [f64; 4] {
        let a = self.jet(0, x, t);
        let v = self.jet(1, x, t);
        let th = self.jet(2, x, t);
        let q = self.jet(3, x, t);
        let nu = c.visc_mu + c.visc_lam;
        let e2 = c.eps * c.eps;
        let rho = 1.0 + a.u;
        let j = a.u / rho;
        let f = -(a.ux * v.u + a.u * v.ux);
        let g = -v.u * v.ux - j * nu * v.uxx + j * a.ux - c.gamma * th.u * a.ux / rho;
        let h = -v.u * th.ux + c.beta * j * q.ux + c.gamma * nu * v.ux * v.ux / rho - c.gamma * c.gamma * th.u * v.ux;
        let i = -v.u * q.ux;
        [
            a.ut + v.ux - f,
            v.ut + a.ux + c.gamma * th.ux - nu * v.uxx - g,
            th.ut + c.gamma * v.ux + c.beta * q.ux - h,
            q.ut + (c.kappa * th.ux + c.alpha * q.u) / e2 - i,
        ]
    }

    /// `(F, G, H, I)` of the exact solution at `(x, t)`.
    pub fn sources(&self, c: &Coeffs, x: f64, t: f64) -> [f64; 4] {
        let a = self.jet(0, x, t);
        let v = self.jet(1, x, t);
        let th = self.jet(2, x, t);
        let q = self.jet(3, x, t);
        let nu = c.visc_mu + c.visc_lam;
        let rho = 1.0 + a.u;
        let j = a.u / rho;
        [
            -(a.ux * v.u + a.u * v.ux),
            -v.u * v.ux - j * nu * v.uxx + j * a.ux - c.gamma * th.u * a.ux / rho,
            -v.u * th.ux + c.beta * j * q.ux + c.gamma * nu * v.ux * v.ux / rho - c.gamma * c.gamma * th.u * v.ux,
            -v.u * q.ux,
        ]
    }
}
