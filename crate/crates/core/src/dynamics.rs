//! Vector fields, Jacobians, saddle frames and unperturbed connections for the
//! perturbed Duffing oscillator and the three-node heteroclinic network.

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};

/// An unforced vector field together with the direction in which a scalar
/// forcing `eps * eta(theta)` enters.
pub trait Model: Sync {
    fn dim(&self) -> usize;
    fn field(&self, x: &[f64], out: &mut [f64]);
    /// Row-major `dim x dim` Jacobian of [`Model::field`].
    fn jacobian(&self, x: &[f64], out: &mut [f64]);
    fn forcing_direction(&self, out: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuffingParams {
    pub gamma: f64,
    pub beta: f64,
}

impl DuffingParams {
    pub fn new(gamma: f64, beta: f64) -> Result<Self> {
        check_finite("gamma", gamma)?;
        check_finite("beta", beta)?;
        if gamma < 0.0 {
            return Err(Error::Config(format!("gamma must be non-negative, got {gamma}")));
        }
        Ok(DuffingParams { gamma, beta })
    }

    /// beta = 5 gamma / 4, the value for which the first order energy balance
    /// along the homoclinic loop vanishes.
    pub fn first_order_balanced(gamma: f64) -> Result<Self> {
        DuffingParams::new(gamma, 1.25 * gamma)
    }
}

pub fn duffing_hamiltonian(x: f64, y: f64) -> f64 {
    0.5 * y * y - 0.5 * x * x + 0.25 * x * x * x * x
}

/// `(x', y')` with forcing value `f = eps * eta(theta)` already evaluated.
pub fn duffing_field(p: &DuffingParams, x: f64, y: f64, f: f64) -> [f64; 2] {
    [y, x - x * x * x - p.gamma * y + p.beta * x * x * y + f]
}

pub fn duffing_jacobian(p: &DuffingParams, x: f64, y: f64) -> [[f64; 2]; 2] {
    [
        [0.0, 1.0],
        [1.0 - 3.0 * x * x + 2.0 * p.beta * x * y, -p.gamma + p.beta * x * x],
    ]
}

/// Unperturbed homoclinic loop on branch `sigma = +1 / -1`, time origin at the
/// turning point `y = 0`.
pub fn duffing_separatrix(s: f64, sigma: f64) -> [f64; 2] {
    let sech = 1.0 / s.cosh();
    let r2 = std::f64::consts::SQRT_2;
    [sigma * r2 * sech, -sigma * r2 * sech * s.tanh()]
}

/// Eigen-coordinates of the saddle at the origin: `(x, y) = C (u, v)` with `u`
/// along the stable and `v` along the unstable eigenvector, both unit length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleFrame {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub c: [[f64; 2]; 2],
    pub c_inv: [[f64; 2]; 2],
}

impl SaddleFrame {
    pub fn duffing(gamma: f64) -> Self {
        let d = (gamma * gamma + 4.0).sqrt();
        let lp = (-gamma + d) / 2.0;
        let lm = (-gamma - d) / 2.0;
        let mp = lp / (1.0 + lp * lp).sqrt();
        let mm = lm / (1.0 + lm * lm).sqrt();
        let c = [[-mm * lp, -mp * lm], [mm, mp]];
        let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
        let c_inv = [[c[1][1] / det, -c[0][1] / det], [-c[1][0] / det, c[0][0] / det]];
        SaddleFrame { lambda_plus: lp, lambda_minus: lm, mu_plus: mp, mu_minus: mm, c, c_inv }
    }

    pub fn to_xy(&self, u: f64, v: f64) -> [f64; 2] {
        [self.c[0][0] * u + self.c[0][1] * v, self.c[1][0] * u + self.c[1][1] * v]
    }

    pub fn to_uv(&self, x: f64, y: f64) -> [f64; 2] {
        [
            self.c_inv[0][0] * x + self.c_inv[0][1] * y,
            self.c_inv[1][0] * x + self.c_inv[1][1] * y,
        ]
    }

    /// Saddle quantity `nu = -lambda_- / lambda_+`.
    pub fn nu(&self) -> f64 {
        -self.lambda_minus / self.lambda_plus
    }

    /// `2 mu_+ mu_-`, the constant relating energy to `u v` near the saddle.
    pub fn mu(&self) -> f64 {
        2.0 * self.mu_plus * self.mu_minus
    }
}

/// Duffing oscillator written in the saddle eigen-coordinates `(u, v)`.
#[derive(Debug, Clone, Copy)]
pub struct DuffingUv {
    pub params: DuffingParams,
    pub frame: SaddleFrame,
}

impl DuffingUv {
    pub fn new(params: DuffingParams) -> Self {
        DuffingUv { params, frame: SaddleFrame::duffing(params.gamma) }
    }

    pub fn field_uv(&self, u: f64, v: f64, f: f64) -> [f64; 2] {
        let [x, y] = self.frame.to_xy(u, v);
        let [dx, dy] = duffing_field(&self.params, x, y, f);
        self.frame.to_uv(dx, dy)
    }
}

impl Model for DuffingUv {
    fn dim(&self) -> usize {
        2
    }

    fn field(&self, x: &[f64], out: &mut [f64]) {
        let d = self.field_uv(x[0], x[1], 0.0);
        out[0] = d[0];
        out[1] = d[1];
    }

    fn jacobian(&self, w: &[f64], out: &mut [f64]) {
        let [x, y] = self.frame.to_xy(w[0], w[1]);
        let j = duffing_jacobian(&self.params, x, y);
        let c = &self.frame.c;
        let ci = &self.frame.c_inv;
        for r in 0..2 {
            for k in 0..2 {
                let mut s = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        s += ci[r][a] * j[a][b] * c[b][k];
                    }
                }
                out[2 * r + k] = s;
            }
        }
    }

    fn forcing_direction(&self, out: &mut [f64]) {
        let d = self.frame.to_uv(0.0, 1.0);
        out[0] = d[0];
        out[1] = d[1];
    }
}

/// Three-node heteroclinic network in coordinates `(p, x, y)` with
/// instability parameters `I_x`, `I_y`. Nodes: LD = (1, 0, 0), RD = (-1, 0, 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HbrParams {
    pub ix: f64,
    pub iy: f64,
}

impl HbrParams {
    pub fn new(ix: f64, iy: f64) -> Result<Self> {
        check_finite("I_x", ix)?;
        check_finite("I_y", iy)?;
        if ix < 0.0 || iy < 0.0 {
            return Err(Error::Config(format!("instability parameters must be non-negative, got ({ix}, {iy})")));
        }
        if ix >= 1.0 || iy >= 1.0 {
            return Err(Error::Config("instability parameters must be below 1 for saddle nodes".into()));
        }
        Ok(HbrParams { ix, iy })
    }

    pub fn symmetric(i: f64) -> Result<Self> {
        HbrParams::new(i, i)
    }
}

/// `(p', x', y')` with forcing value `f = eps * eta(theta)` added to both `x'` and `y'`.
pub fn hbr_field(prm: &HbrParams, s: &[f64; 3], f: f64) -> [f64; 3] {
    let [p, x, y] = *s;
    let h = -p * (p - 1.0) * (p + 1.0);
    let fx = ((0.5 - p) * (p + 1.0) - x * x - y * y) * x;
    let gy = ((0.5 + p) * (1.0 - p) - y * y - x * x) * y;
    [
        h + x * x * (1.0 - p) + y * y * (-1.0 - p),
        fx + prm.ix * x + f,
        gy + prm.iy * y + f,
    ]
}

pub fn hbr_jacobian(prm: &HbrParams, s: &[f64; 3]) -> [[f64; 3]; 3] {
    let [p, x, y] = *s;
    [
        [1.0 - 3.0 * p * p - x * x - y * y, 2.0 * x * (1.0 - p), -2.0 * y * (1.0 + p)],
        [
            x * (-0.5 - 2.0 * p),
            (0.5 - p) * (p + 1.0) - 3.0 * x * x - y * y + prm.ix,
            -2.0 * x * y,
        ],
        [
            y * (0.5 - 2.0 * p),
            -2.0 * x * y,
            (0.5 + p) * (1.0 - p) - 3.0 * y * y - x * x + prm.iy,
        ],
    ]
}

/// Eigenvalues at LD `(p, x, y) = (1, 0, 0)`, in coordinate order.
pub fn hbr_ld_eigenvalues(prm: &HbrParams) -> [f64; 3] {
    [-2.0, -1.0 + prm.ix, prm.iy]
}

/// Eigenvalues at RD `(p, x, y) = (-1, 0, 0)`, in coordinate order.
pub fn hbr_rd_eigenvalues(prm: &HbrParams) -> [f64; 3] {
    [-2.0, prm.ix, -1.0 + prm.iy]
}

/// Eigenvalues at the neutral state `(0, 0, 0)`, in coordinate order.
pub fn hbr_neutral_eigenvalues(prm: &HbrParams) -> [f64; 3] {
    [1.0, 0.5 + prm.ix, 0.5 + prm.iy]
}

#[derive(Debug, Clone, Copy)]
pub struct HbrModel {
    pub params: HbrParams,
}

impl Model for HbrModel {
    fn dim(&self) -> usize {
        3
    }

    fn field(&self, x: &[f64], out: &mut [f64]) {
        let d = hbr_field(&self.params, &[x[0], x[1], x[2]], 0.0);
        out[..3].copy_from_slice(&d);
    }

    fn jacobian(&self, x: &[f64], out: &mut [f64]) {
        let j = hbr_jacobian(&self.params, &[x[0], x[1], x[2]]);
        for r in 0..3 {
            out[3 * r..3 * r + 3].copy_from_slice(&j[r]);
        }
    }

    fn forcing_direction(&self, out: &mut [f64]) {
        out[0] = 0.0;
        out[1] = 1.0;
        out[2] = 1.0;
    }
}

/// Which unperturbed connection of the unforced network (`I_x = I_y = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HbrLeg {
    /// LD -> RD inside the plane `x = 0`.
    LdToRd,
    /// RD -> LD inside the plane `y = 0`.
    RdToLd,
}

/// Closed-form time parameterization of the unforced connections, with time
/// origin at `p = 0`. On the connection `p^2 + 2 y^2 = 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HbrConnection;

impl HbrConnection {
    /// Time at which the LD -> RD connection passes through `p = xi / sqrt(1 + xi^2)`.
    pub fn time_of_xi(xi: f64) -> f64 {
        let q = (xi * xi + 1.0).sqrt();
        if xi < 0.0 {
            // -xi q - xi^2 without cancellation
            -xi / (q - xi) - xi.asinh()
        } else {
            -xi * q - xi.asinh() - xi * xi
        }
    }

    fn xi_of_time(s: f64) -> f64 {
        // time_of_xi is strictly decreasing; bracket then bisect with Newton steps
        let (mut lo, mut hi) = (-1.0, 1.0);
        while Self::time_of_xi(lo) < s {
            lo *= 2.0;
            if lo < -1e300 {
                break;
            }
        }
        while Self::time_of_xi(hi) > s {
            hi *= 2.0;
        }
        let mut xi = 0.5 * (lo + hi);
        for _ in 0..200 {
            let g = Self::time_of_xi(xi) - s;
            if g > 0.0 {
                lo = xi;
            } else {
                hi = xi;
            }
            let q = (xi * xi + 1.0).sqrt();
            let dg = if xi < 0.0 { -2.0 / (q - xi) } else { -2.0 * (q + xi) };
            let mut next = xi - g / dg;
            if !(next > lo && next < hi) || dg == 0.0 {
                next = 0.5 * (lo + hi);
            }
            if (next - xi).abs() <= 1e-16 * xi.abs().max(1.0) {
                return next;
            }
            xi = next;
        }
        xi
    }

    /// Point on the LD -> RD connection at time `s`, as `(p, x, y)`.
    pub fn ld_to_rd(s: f64) -> [f64; 3] {
        let xi = Self::xi_of_time(s);
        let q = (1.0 + xi * xi).sqrt();
        [xi / q, 0.0, std::f64::consts::FRAC_1_SQRT_2 / q]
    }

    pub fn point(leg: HbrLeg, s: f64) -> [f64; 3] {
        let [p, _, y] = Self::ld_to_rd(s);
        match leg {
            HbrLeg::LdToRd => [p, 0.0, y],
            HbrLeg::RdToLd => [-p, y, 0.0],
        }
    }

    /// Time on the LD -> RD connection at which `y = r` on the way out of LD (`p > 0`).
    pub fn exit_time(r: f64) -> f64 {
        let p = (1.0 - 2.0 * r * r).sqrt();
        Self::time_of_xi(p / (1.0 - p * p).sqrt())
    }

    /// Time on the LD -> RD connection at which `y = r` on the way into RD (`p < 0`).
    pub fn entry_time(r: f64) -> f64 {
        let p = -(1.0 - 2.0 * r * r).sqrt();
        Self::time_of_xi(p / (1.0 - p * p).sqrt())
    }
}
