//! Construction of global-map coefficients: variational integration along
//! the unperturbed connections, Melnikov integrals, homoclinic shooting,
//! section-radius calibration and comparison of the two constructions.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2, TAU};

use crate::dynamics::{
    duffing_hamiltonian, duffing_separatrix, hbr_field, DuffingParams, DuffingUv, HbrConnection, HbrModel,
    HbrParams, Model, SaddleFrame,
};
use crate::error::{check_finite, Error, Result};
use crate::integrate::{integrate_to_event, Crossing, Extended, IntegratorOptions, OdeSystem, Reversed};
use crate::trig::{torus_l1_mean, TrigPolynomial};

/// Offset along the unstable eigendirection used to start on an unstable manifold.
const MANIFOLD_OFFSET: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BetaChoice {
    /// beta = 5 gamma / 4.
    #[default]
    FirstOrder,
    /// beta from homoclinic shooting, see [`build_duffing_homoclinic`].
    Shot,
}

fn check_radius(r: f64) -> Result<()> {
    check_finite("section radius", r)?;
    if r <= 0.0 || r >= 1.0 {
        return Err(Error::Config(format!("section radius must lie in (0, 1), got {r}")));
    }
    Ok(())
}

fn check_omegas(omega: &[f64]) -> Result<()> {
    for &w in omega {
        check_finite("frequency", w)?;
        if w <= 0.0 {
            return Err(Error::Config(format!("frequencies must be positive, got {w}")));
        }
    }
    Ok(())
}

/// Coefficients of the Duffing global map `Sigma_out -> Sigma_in`:
/// `v = alpha u + eps rho(theta)`, `theta -> theta + omega T*`.
/// `rho` and `rho_theta` are per unit forcing amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalMapCoeffsDuffing {
    pub gamma: f64,
    pub beta: f64,
    pub r: f64,
    pub t_star: f64,
    /// `u` where the unstable manifold meets `v = r`.
    pub u_exit: f64,
    /// `v` where the unforced orbit returns to `u = r`.
    pub v_entry: f64,
    pub alpha: f64,
    /// Time-of-flight sensitivity to `u`, per unit frequency.
    pub alpha_theta: f64,
    pub rho: TrigPolynomial,
    pub rho_theta: TrigPolynomial,
    pub frame: SaddleFrame,
}

/// Unforced homoclinic connection of the damped Duffing oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuffingHomoclinic {
    pub gamma: f64,
    pub beta: f64,
    /// Energy difference between unstable and stable manifold on `y = 0, x > 1`.
    pub splitting: f64,
    pub x_turn: f64,
}

fn unforced<M: Model>(model: &M) -> Extended<'_, M> {
    Extended::new(model, &[], &[], false)
}

/// Energy mismatch on `y = 0, x > 1` between the unstable and stable manifolds of the origin.
pub fn duffing_splitting(params: DuffingParams, opts: IntegratorOptions) -> Result<(f64, f64)> {
    let model = DuffingUv::new(params);
    let sys = unforced(&model);
    let frame = model.frame;
    let y_of = move |_t: f64, s: &[f64]| frame.to_xy(s[0], s[1])[1];
    let start_u = sys.layout.initial(&[0.0, MANIFOLD_OFFSET], &[], 0.0);
    let (_, a) = integrate_to_event(&sys, 0.0, &start_u, y_of, Crossing::Falling, opts)?;
    let start_s = sys.layout.initial(&[MANIFOLD_OFFSET, 0.0], &[], 0.0);
    let rev = Reversed(&sys);
    let (_, b) = integrate_to_event(&rev, 0.0, &start_s, y_of, Crossing::Rising, opts)?;
    let pa = frame.to_xy(a[0], a[1]);
    let pb = frame.to_xy(b[0], b[1]);
    Ok((duffing_hamiltonian(pa[0], pa[1]) - duffing_hamiltonian(pb[0], pb[1]), pa[0]))
}

/// Find `beta*(gamma)` for which the unforced system has a homoclinic loop.
pub fn build_duffing_homoclinic(gamma: f64, opts: IntegratorOptions) -> Result<DuffingHomoclinic> {
    check_finite("gamma", gamma)?;
    if gamma < 0.0 {
        return Err(Error::Config(format!("gamma must be non-negative, got {gamma}")));
    }
    let split = |b: f64| duffing_splitting(DuffingParams::new(gamma, b)?, opts);
    if gamma == 0.0 {
        let (s, x) = split(0.0)?;
        return Ok(DuffingHomoclinic { gamma, beta: 0.0, splitting: s, x_turn: x });
    }
    let (mut lo, mut hi) = (0.75 * gamma, 1.75 * gamma);
    let (mut flo, _) = split(lo)?;
    let (mut fhi, _) = split(hi)?;
    let mut widen = 0;
    while flo.signum() == fhi.signum() {
        lo -= 0.5 * gamma;
        hi += 0.5 * gamma;
        flo = split(lo)?.0;
        fhi = split(hi)?.0;
        widen += 1;
        if widen > 20 {
            return Err(Error::NoConvergence(format!("no sign change of the splitting for gamma = {gamma}")));
        }
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let mut b = (lo * fhi - hi * flo) / (fhi - flo);
        if !(b > lo && b < hi) {
            b = 0.5 * (lo + hi);
        }
        let (fb, x) = split(b)?;
        if fb.abs() < 1e-12 || (hi - lo) < 1e-15 * gamma {
            return Ok(DuffingHomoclinic { gamma, beta: b, splitting: fb, x_turn: x });
        }
        if fb.signum() == flo.signum() {
            lo = b;
            flo = fb;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = b;
            fhi = fb;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    let b = 0.5 * (lo + hi);
    let (fb, x) = split(b)?;
    if fb.abs() < 1e-10 {
        Ok(DuffingHomoclinic { gamma, beta: b, splitting: fb, x_turn: x })
    } else {
        Err(Error::NoConvergence(format!("homoclinic shooting stalled at splitting {fb}")))
    }
}

fn resolve_beta(gamma: f64, choice: BetaChoice, opts: IntegratorOptions) -> Result<f64> {
    match choice {
        BetaChoice::FirstOrder => Ok(1.25 * gamma),
        BetaChoice::Shot => Ok(build_duffing_homoclinic(gamma, opts)?.beta),
    }
}

/// Point of the unstable manifold of the saddle on `v = r`, in `(u, v)`.
fn duffing_exit_point(model: &DuffingUv, r: f64, opts: IntegratorOptions) -> Result<[f64; 2]> {
    let sys = unforced(model);
    let y0 = sys.layout.initial(&[0.0, MANIFOLD_OFFSET * r.min(1.0)], &[], 0.0);
    let (_, y) = integrate_to_event(&sys, 0.0, &y0, |_, s| s[1] - r, Crossing::Rising, opts)?;
    Ok([y[0], r])
}

fn duffing_leg<'m>(
    model: &'m DuffingUv,
    start: [f64; 2],
    r: f64,
    omega: &[f64],
    theta: &[f64],
    opts: IntegratorOptions,
) -> Result<(f64, Vec<f64>, Extended<'m, DuffingUv>)> {
    let amp = vec![1.0; omega.len()];
    let sys = Extended::new(model, omega, &amp, true);
    let y0 = sys.layout.initial(&start, theta, 0.0);
    let (t, y) = integrate_to_event(&sys, 0.0, &y0, |_, s| s[0] - r, Crossing::Falling, opts)?;
    Ok((t, y, sys))
}

/// Travel time along the unforced connection from `v = r` to `u = r`.
pub fn duffing_global_time(params: DuffingParams, r: f64, opts: IntegratorOptions) -> Result<f64> {
    let model = DuffingUv::new(params);
    let start = duffing_exit_point(&model, r, opts)?;
    let sys = unforced(&model);
    let y0 = sys.layout.initial(&start, &[], 0.0);
    Ok(integrate_to_event(&sys, 0.0, &y0, |_, s| s[0] - r, Crossing::Falling, opts)?.0)
}

pub fn build_duffing_global_map(
    gamma: f64,
    r: f64,
    omega: &[f64],
    beta: BetaChoice,
    opts: IntegratorOptions,
) -> Result<GlobalMapCoeffsDuffing> {
    check_radius(r)?;
    check_omegas(omega)?;
    let beta = resolve_beta(gamma, beta, opts)?;
    let params = DuffingParams::new(gamma, beta)?;
    let model = DuffingUv::new(params);
    let start = duffing_exit_point(&model, r, opts)?;

    let (t_star, y, sys) = duffing_leg(&model, start, r, &[], &[], opts)?;
    let l = sys.layout;
    let mut f = [0.0; 2];
    model.field(&y[..2], &mut f);
    let ratio = f[1] / f[0];
    let alpha = y[l.phi(1, 0)] - ratio * y[l.phi(0, 0)];
    let alpha_theta = -y[l.phi(0, 0)] / f[0];

    let mut rho = TrigPolynomial::zero(omega);
    let mut rho_theta = TrigPolynomial::zero(omega);
    for (i, &w) in omega.iter().enumerate() {
        for (k, phase) in [0.0, FRAC_PI_2].into_iter().enumerate() {
            let (t, y, sys) = duffing_leg(&model, start, r, &[w], &[phase], opts)?;
            if (t - t_star).abs() > 1e-9 * t_star {
                return Err(Error::NoConvergence(format!("unforced travel time changed with phase: {t} vs {t_star}")));
            }
            let l = sys.layout;
            let mut f = [0.0; 2];
            model.field(&y[..2], &mut f);
            let e = l.eps();
            let val = y[l.phi(1, e)] - f[1] / f[0] * y[l.phi(0, e)];
            let val_t = -y[l.phi(0, e)] / f[0];
            if k == 0 {
                rho.cos[i] = val;
                rho_theta.cos[i] = val_t;
            } else {
                rho.sin[i] = val;
                rho_theta.sin[i] = val_t;
            }
        }
    }
    Ok(GlobalMapCoeffsDuffing {
        gamma,
        beta,
        r,
        t_star,
        u_exit: start[0],
        v_entry: y[1],
        alpha,
        alpha_theta,
        rho,
        rho_theta,
        frame: model.frame,
    })
}

/// Values of the eps-order entry displacement `rho(theta)` on a uniform `m^n` phase grid,
/// with every frequency forced at unit amplitude. Row-major in the angles, first angle slowest.
pub fn duffing_rho_on_grid(
    gamma: f64,
    r: f64,
    omega: &[f64],
    beta: BetaChoice,
    m: usize,
    opts: IntegratorOptions,
) -> Result<Vec<f64>> {
    check_radius(r)?;
    check_omegas(omega)?;
    if m < 3 {
        return Err(Error::Config(format!("phase grid needs at least 3 points per angle, got {m}")));
    }
    let beta = resolve_beta(gamma, beta, opts)?;
    let model = DuffingUv::new(DuffingParams::new(gamma, beta)?);
    let start = duffing_exit_point(&model, r, opts)?;
    let n = omega.len();
    let total = m.pow(n as u32);
    let mut out = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rem = idx;
        let mut theta = vec![0.0; n];
        for k in (0..n).rev() {
            theta[k] = TAU * (rem % m) as f64 / m as f64;
            rem /= m;
        }
        let (_, y, sys) = duffing_leg(&model, start, r, omega, &theta, opts)?;
        let l = sys.layout;
        let mut f = [0.0; 2];
        model.field(&y[..2], &mut f);
        let e = l.eps();
        out.push(y[l.phi(1, e)] - f[1] / f[0] * y[l.phi(0, e)]);
    }
    Ok(out)
}

/// First-harmonic Fourier coefficients of samples on a uniform `m^n` phase grid
/// laid out as in [`duffing_rho_on_grid`].
pub fn trig_from_grid(values: &[f64], omega: &[f64], m: usize) -> Result<TrigPolynomial> {
    let n = omega.len();
    if m < 3 || values.len() != m.pow(n as u32) {
        return Err(Error::Config(format!("expected {m}^{n} grid values, got {}", values.len())));
    }
    let mut p = TrigPolynomial::zero(omega);
    let scale = 1.0 / values.len() as f64;
    for (idx, &v) in values.iter().enumerate() {
        p.constant += v * scale;
        let mut rem = idx;
        for k in (0..n).rev() {
            let th = TAU * (rem % m) as f64 / m as f64;
            rem /= m;
            p.cos[k] += 2.0 * v * th.cos() * scale;
            p.sin[k] += 2.0 * v * th.sin() * scale;
        }
    }
    Ok(p)
}

/// Melnikov description of the Duffing loop:
/// `M(theta) = constant + eps sum_i a_i forcing_i(theta)` with angles measured
/// at the turning point `y = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MelnikovCoeffsDuffing {
    pub gamma: f64,
    pub beta: f64,
    pub r: f64,
    pub constant: f64,
    /// Per unit amplitude and unit eps.
    pub forcing: TrigPolynomial,
    /// Time from the turning point to `u = r`.
    pub s0: f64,
    /// Time from `v = r` to the turning point.
    pub s1: f64,
    pub frame: SaddleFrame,
}

impl MelnikovCoeffsDuffing {
    /// `K = 2 mu_+ mu_- u* v*`.
    pub fn k(&self) -> f64 {
        self.frame.mu() * self.r * self.r
    }
}

/// Closed form of the Melnikov function on the upper loop.
pub fn duffing_melnikov_closed_form(gamma: f64, beta: f64, omega: &[f64]) -> (f64, TrigPolynomial) {
    let constant = (16.0 * beta - 20.0 * gamma) / 15.0;
    let mut p = TrigPolynomial::zero(omega);
    for (i, &w) in omega.iter().enumerate() {
        p.sin[i] = SQRT_2 * PI * w / (PI * w / 2.0).cosh();
    }
    (constant, p)
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 || (b - a).abs() < 1e-15 * (1.0 + m.abs()) {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Separatrix times `(s0, s1)` for sections at radius `r` in the frame of `gamma`.
pub fn duffing_section_times(frame: &SaddleFrame, r: f64) -> Result<(f64, f64)> {
    check_radius(r)?;
    let u_of = |s: f64| {
        let [x, y] = duffing_separatrix(s, 1.0);
        frame.to_uv(x, y)[0] - r
    };
    let v_of = |s: f64| {
        let [x, y] = duffing_separatrix(s, 1.0);
        frame.to_uv(x, y)[1] - r
    };
    // approach the sections from the saddle side, where u (resp. v) is monotone
    let far = 40.0;
    let mut s = far;
    while u_of(s) < 0.0 {
        s -= 0.05;
        if s < 0.0 {
            return Err(Error::Config(format!("separatrix never reaches u = {r}")));
        }
    }
    let s0 = bisect(u_of, s, s + 0.05);
    let mut s = -far;
    while v_of(s) < 0.0 {
        s += 0.05;
        if s > 0.0 {
            return Err(Error::Config(format!("separatrix never reaches v = {r}")));
        }
    }
    let s1 = -bisect(v_of, s - 0.05, s);
    Ok((s0, s1))
}

pub fn build_duffing_melnikov(gamma: f64, beta: f64, r: f64, omega: &[f64]) -> Result<MelnikovCoeffsDuffing> {
    check_finite("gamma", gamma)?;
    check_finite("beta", beta)?;
    check_omegas(omega)?;
    let frame = SaddleFrame::duffing(gamma);
    let (s0, s1) = duffing_section_times(&frame, r)?;
    let (constant, forcing) = duffing_melnikov_closed_form(gamma, beta, omega);
    Ok(MelnikovCoeffsDuffing { gamma, beta, r, constant, forcing, s0, s1, frame })
}

/// Coefficients of the heteroclinic-network global map `Sigma_out+ -> Sigma_in-`:
/// `x -> alpha_x x + beta_x q + eps rho_x(theta)`,
/// `q -> q_bar_s + alpha_q x + beta_q q + eps rho_q(theta)`,
/// `theta -> theta + omega (T* + alpha_theta x + beta_theta q + eps rho_theta(theta))`.
/// Here `q = p - 1` on the exit section and `q = p + 1` on the entry section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalMapCoeffsHbr {
    pub ix: f64,
    pub iy: f64,
    pub r: f64,
    pub t_star: f64,
    pub q_s: f64,
    pub q_bar_s: f64,
    pub alpha_x: f64,
    pub beta_x: f64,
    pub alpha_q: f64,
    pub beta_q: f64,
    pub alpha_theta: f64,
    pub beta_theta: f64,
    pub rho_x: TrigPolynomial,
    pub rho_q: TrigPolynomial,
    pub rho_theta: TrigPolynomial,
}

/// Start point `(p, x, y)` on `y = r` of the orbit leaving LD inside `x = 0`.
fn hbr_exit_point(params: HbrParams, r: f64, opts: IntegratorOptions) -> Result<[f64; 3]> {
    if params.iy == 0.0 {
        return Ok([(1.0 - 2.0 * r * r).sqrt(), 0.0, r]);
    }
    let model = HbrModel { params };
    let sys = unforced(&model);
    let y0 = sys.layout.initial(&[1.0, 0.0, MANIFOLD_OFFSET * r.min(1.0)], &[], 0.0);
    let long = IntegratorOptions { t_span_max: opts.t_span_max.max(1e6), ..opts };
    let (_, y) = integrate_to_event(&sys, 0.0, &y0, |_, s| s[2] - r, Crossing::Rising, long)?;
    Ok([y[0], 0.0, r])
}

pub fn hbr_global_time(params: HbrParams, r: f64, opts: IntegratorOptions) -> Result<f64> {
    check_radius(r)?;
    let model = HbrModel { params };
    let start = hbr_exit_point(params, r, opts)?;
    let sys = unforced(&model);
    let y0 = sys.layout.initial(&start, &[], 0.0);
    Ok(integrate_to_event(&sys, 0.0, &y0, |_, s| s[2] - r, Crossing::Falling, opts)?.0)
}

pub fn build_hbr_global_map(
    params: HbrParams,
    r: f64,
    omega: &[f64],
    opts: IntegratorOptions,
) -> Result<GlobalMapCoeffsHbr> {
    check_radius(r)?;
    check_omegas(omega)?;
    let model = HbrModel { params };
    let start = hbr_exit_point(params, r, opts)?;
    let leg = |om: &[f64], th: &[f64]| -> Result<(f64, Vec<f64>, crate::integrate::ExtendedLayout)> {
        let amp = vec![1.0; om.len()];
        let sys = Extended::new(&model, om, &amp, true);
        let y0 = sys.layout.initial(&start, th, 0.0);
        let (t, y) = integrate_to_event(&sys, 0.0, &y0, |_, s| s[2] - r, Crossing::Falling, opts)?;
        if y[0] > 0.0 {
            return Err(Error::NoConvergence("returned to y = r away from RD".into()));
        }
        Ok((t, y, sys.layout))
    };
    // phi^a_b with a, b in (p, x, y) = (0, 1, 2); projection onto y = r along the flow
    let project = |y: &[f64], l: &crate::integrate::ExtendedLayout, col: usize| -> [f64; 3] {
        let f = hbr_field(&params, &[y[0], y[1], y[2]], 0.0);
        let py = y[l.phi(2, col)];
        [
            y[l.phi(1, col)] - f[1] / f[2] * py,
            y[l.phi(0, col)] - f[0] / f[2] * py,
            -py / f[2],
        ]
    };
    let (t_star, y, l) = leg(&[], &[])?;
    let dx = project(&y, &l, 1);
    let dq = project(&y, &l, 0);
    let mut rho_x = TrigPolynomial::zero(omega);
    let mut rho_q = TrigPolynomial::zero(omega);
    let mut rho_theta = TrigPolynomial::zero(omega);
    for (i, &w) in omega.iter().enumerate() {
        for (k, phase) in [0.0, FRAC_PI_2].into_iter().enumerate() {
            let (t, yy, ll) = leg(&[w], &[phase])?;
            if (t - t_star).abs() > 1e-9 * t_star {
                return Err(Error::NoConvergence(format!("unforced travel time changed with phase: {t} vs {t_star}")));
            }
            let de = project(&yy, &ll, ll.eps());
            let slot = |p: &mut TrigPolynomial, v: f64| {
                if k == 0 {
                    p.cos[i] = v
                } else {
                    p.sin[i] = v
                }
            };
            slot(&mut rho_x, de[0]);
            slot(&mut rho_q, de[1]);
            slot(&mut rho_theta, de[2]);
        }
    }
    Ok(GlobalMapCoeffsHbr {
        ix: params.ix,
        iy: params.iy,
        r,
        t_star,
        q_s: start[0] - 1.0,
        q_bar_s: y[0] + 1.0,
        alpha_x: dx[0],
        beta_x: dq[0],
        alpha_q: dx[1],
        beta_q: dq[1],
        alpha_theta: dx[2],
        beta_theta: dq[2],
        rho_x,
        rho_q,
        rho_theta,
    })
}

/// Melnikov-type coefficients of the unforced network leg LD -> RD between the
/// sections `y = r`. Forcing angles are measured at the exit section (time `tau`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MelnikovCoeffsHbr {
    pub r: f64,
    /// Exit and entry times in the parameterization with `p = 0` at time 0.
    pub tau: f64,
    pub tau_bar: f64,
    pub b_h: f64,
    pub a_x: f64,
    pub xi_i: f64,
    pub p_h: TrigPolynomial,
    pub p_x: TrigPolynomial,
}

struct HbrMelnikovSystem<'a> {
    omega: &'a [f64],
}

// layout: p, y, Xi, int a0, int c0, then per frequency (H_cos, X_cos, H_sin, X_sin)
impl OdeSystem for HbrMelnikovSystem<'_> {
    fn dim(&self) -> usize {
        5 + 4 * self.omega.len()
    }

    fn rhs(&self, t: f64, s: &[f64], d: &mut [f64]) {
        let (p, y) = (s[0], s[1]);
        let a0 = -2.0 * (p * p + y * y);
        let c0 = (0.5 - p) * (p + 1.0) - y * y;
        d[0] = -p * (p * p - 1.0) + y * y * (-1.0 - p);
        d[1] = ((0.5 + p) * (1.0 - p) - y * y) * y;
        d[2] = a0 * s[2] + 4.0 * y * y;
        d[3] = a0;
        d[4] = c0;
        for (i, &w) in self.omega.iter().enumerate() {
            let (sn, cs) = (w * t).sin_cos();
            let b = 5 + 4 * i;
            // cos(w t) for phase 0 and cos(pi/2 + w t) = -sin(w t)
            d[b] = a0 * s[b] + 4.0 * y * cs;
            d[b + 1] = c0 * s[b + 1] + cs;
            d[b + 2] = a0 * s[b + 2] - 4.0 * y * sn;
            d[b + 3] = c0 * s[b + 3] - sn;
        }
    }
}

pub fn build_hbr_melnikov(r: f64, omega: &[f64], opts: IntegratorOptions) -> Result<MelnikovCoeffsHbr> {
    check_radius(r)?;
    check_omegas(omega)?;
    let sys = HbrMelnikovSystem { omega };
    let mut y0 = vec![0.0; sys.dim()];
    y0[0] = (1.0 - 2.0 * r * r).sqrt();
    y0[1] = r;
    let (t, y) = integrate_to_event(&sys, 0.0, &y0, |_, s| s[1] - r, Crossing::Falling, opts)?;
    let tau = HbrConnection::exit_time(r);
    let mut p_h = TrigPolynomial::zero(omega);
    let mut p_x = TrigPolynomial::zero(omega);
    for i in 0..omega.len() {
        let b = 5 + 4 * i;
        p_h.cos[i] = y[b];
        p_x.cos[i] = y[b + 1];
        p_h.sin[i] = y[b + 2];
        p_x.sin[i] = y[b + 3];
    }
    Ok(MelnikovCoeffsHbr {
        r,
        tau,
        tau_bar: tau + t,
        b_h: y[3].exp(),
        a_x: y[4].exp(),
        xi_i: y[2],
        p_h,
        p_x,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusErrorRow {
    pub r: f64,
    pub global_time: f64,
    pub error: f64,
}

fn radius_rows<G: Fn(f64) -> Result<f64>>(
    r_grid: &[f64],
    r0: f64,
    global: G,
    rate_out: f64,
    rate_in: f64,
) -> Result<Vec<RadiusErrorRow>> {
    check_radius(r0)?;
    let t0 = global(r0)?;
    r_grid
        .iter()
        .map(|&r| {
            check_radius(r)?;
            let t = if r == r0 { t0 } else { global(r)? };
            let lg = (r / r0).ln();
            let e = (t0 - (lg / rate_out + t + lg / rate_in)).abs();
            Ok(RadiusErrorRow { r, global_time: t, error: e })
        })
        .collect()
}

/// `E_T(r)`: mismatch between the unforced travel time between sections at the
/// reference radius `r0` and the composition local(r0 -> r) + global(r) + local(r -> r0).
pub fn section_radius_error_duffing(
    params: DuffingParams,
    r_grid: &[f64],
    r0: f64,
    opts: IntegratorOptions,
) -> Result<Vec<RadiusErrorRow>> {
    let frame = SaddleFrame::duffing(params.gamma);
    radius_rows(
        r_grid,
        r0,
        |r| duffing_global_time(params, r, opts),
        frame.lambda_plus,
        -frame.lambda_minus,
    )
}

pub fn section_radius_error_hbr(
    params: HbrParams,
    r_grid: &[f64],
    r0: f64,
    opts: IntegratorOptions,
) -> Result<Vec<RadiusErrorRow>> {
    if params.iy <= 0.0 {
        return Err(Error::Config("radius calibration needs I_y > 0".into()));
    }
    radius_rows(r_grid, r0, |r| hbr_global_time(params, r, opts), params.iy, 1.0 - params.iy)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuffingComparisonRow {
    pub gamma: f64,
    pub r: f64,
    pub alpha: f64,
    /// `(u*/v*) alpha`, equal to `alpha` for `u* = v* = r`.
    pub alpha_scaled: f64,
    pub t_star: f64,
    pub s0_plus_s1: f64,
    /// Mean over the torus of `|M_forcing(theta + omega s1) - mu r rho(theta)|`.
    pub gap: f64,
}

pub fn compare_duffing_maps(
    gammas: &[f64],
    radii: &[f64],
    omega: &[f64],
    grid: usize,
    opts: IntegratorOptions,
) -> Result<Vec<DuffingComparisonRow>> {
    let mut rows = vec![];
    for &gamma in gammas {
        for &r in radii {
            let g = build_duffing_global_map(gamma, r, omega, BetaChoice::FirstOrder, opts)?;
            let m = build_duffing_melnikov(gamma, g.beta, r, omega)?;
            let shifted = m.forcing.time_shifted(m.s1);
            let mu = g.frame.mu();
            let gap = torus_l1_mean(omega.len(), grid, |th| shifted.eval(th) - mu * r * g.rho.eval(th));
            rows.push(DuffingComparisonRow {
                gamma,
                r,
                alpha: g.alpha,
                alpha_scaled: g.alpha,
                t_star: g.t_star,
                s0_plus_s1: m.s0 + m.s1,
                gap,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HbrComparisonRow {
    pub i: f64,
    pub alpha_x: f64,
    pub a_x: f64,
    pub t_star: f64,
    /// Mean over the torus of `|rho_x(theta) - P_x(theta)|`, both with the
    /// forcing phase taken at the start of the global leg.
    pub gap: f64,
    /// The same mean with both functions expressed in the forcing phase at
    /// arrival on the entry section.
    pub gap_aligned: f64,
}

pub fn compare_hbr_maps(
    i_values: &[f64],
    r: f64,
    omega: &[f64],
    grid: usize,
    opts: IntegratorOptions,
) -> Result<Vec<HbrComparisonRow>> {
    let mel = build_hbr_melnikov(r, omega, opts)?;
    i_values
        .iter()
        .map(|&i| {
            let g = build_hbr_global_map(HbrParams::symmetric(i)?, r, omega, opts)?;
            let gap = torus_l1_mean(omega.len(), grid, |th| g.rho_x.eval(th) - mel.p_x.eval(th));
            let shifted = mel.p_x.time_shifted(g.t_star - (mel.tau_bar - mel.tau));
            let gap_aligned = torus_l1_mean(omega.len(), grid, |th| g.rho_x.eval(th) - shifted.eval(th));
            Ok(HbrComparisonRow { i, alpha_x: g.alpha_x, a_x: mel.a_x, t_star: g.t_star, gap, gap_aligned })
        })
        .collect()
}
