//! Runge-Kutta-Fehlberg 7(8) integration with event location, the extended
//! (forced + variational) system, Euler-Maruyama stepping and adaptive
//! Gauss-Kronrod quadrature.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dynamics::Model;
use crate::error::{Error, Result};
use crate::trig::Forcing;

pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    /// Integration aborts with [`Error::EventNotFound`] once `|t - t0|` exceeds this.
    pub t_span_max: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions { rtol: 1e-13, atol: 1e-15, h_init: 1e-3, h_min: 1e-14, h_max: 1.0, t_span_max: 1e4 }
    }
}

impl IntegratorOptions {
    pub fn with_tol(tol: f64) -> Self {
        IntegratorOptions { rtol: tol, atol: tol, ..Default::default() }
    }
}

const C: [f64; 13] = [
    0.0,
    2.0 / 27.0,
    1.0 / 9.0,
    1.0 / 6.0,
    5.0 / 12.0,
    0.5,
    5.0 / 6.0,
    1.0 / 6.0,
    2.0 / 3.0,
    1.0 / 3.0,
    1.0,
    0.0,
    1.0,
];

const A: [[f64; 12]; 13] = [
    [0.0; 12],
    [2.0 / 27.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 36.0, 1.0 / 12.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 24.0, 0.0, 1.0 / 8.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [5.0 / 12.0, 0.0, -25.0 / 16.0, 25.0 / 16.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 20.0, 0.0, 0.0, 1.0 / 4.0, 1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [-25.0 / 108.0, 0.0, 0.0, 125.0 / 108.0, -65.0 / 27.0, 125.0 / 54.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [31.0 / 300.0, 0.0, 0.0, 0.0, 61.0 / 225.0, -2.0 / 9.0, 13.0 / 900.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [2.0, 0.0, 0.0, -53.0 / 6.0, 704.0 / 45.0, -107.0 / 9.0, 67.0 / 90.0, 3.0, 0.0, 0.0, 0.0, 0.0],
    [
        -91.0 / 108.0,
        0.0,
        0.0,
        23.0 / 108.0,
        -976.0 / 135.0,
        311.0 / 54.0,
        -19.0 / 60.0,
        17.0 / 6.0,
        -1.0 / 12.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        2383.0 / 4100.0,
        0.0,
        0.0,
        -341.0 / 164.0,
        4496.0 / 1025.0,
        -301.0 / 82.0,
        2133.0 / 4100.0,
        45.0 / 82.0,
        45.0 / 164.0,
        18.0 / 41.0,
        0.0,
        0.0,
    ],
    [3.0 / 205.0, 0.0, 0.0, 0.0, 0.0, -6.0 / 41.0, -3.0 / 205.0, -3.0 / 41.0, 3.0 / 41.0, 6.0 / 41.0, 0.0, 0.0],
    [
        -1777.0 / 4100.0,
        0.0,
        0.0,
        -341.0 / 164.0,
        4496.0 / 1025.0,
        -289.0 / 82.0,
        2193.0 / 4100.0,
        51.0 / 82.0,
        33.0 / 164.0,
        12.0 / 41.0,
        0.0,
        1.0,
    ],
];

/// Eighth-order weights; the seventh-order solution differs by `ERR * (k1 + k11 - k12 - k13)`.
const B8: [f64; 13] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    34.0 / 105.0,
    9.0 / 35.0,
    9.0 / 35.0,
    9.0 / 280.0,
    9.0 / 280.0,
    0.0,
    41.0 / 840.0,
    41.0 / 840.0,
];
const ERR: f64 = 41.0 / 840.0;

/// Single-step RKF78 engine with preallocated stage storage.
pub struct Rkf78<'a, S: OdeSystem + ?Sized> {
    sys: &'a S,
    k: Vec<Vec<f64>>,
    tmp: Vec<f64>,
}

impl<'a, S: OdeSystem + ?Sized> Rkf78<'a, S> {
    pub fn new(sys: &'a S) -> Self {
        let n = sys.dim();
        Rkf78 { sys, k: vec![vec![0.0; n]; 13], tmp: vec![0.0; n] }
    }

    /// Takes one step of size `h` from `(t, y)`, writes the eighth-order result
    /// into `out` and returns the scaled error norm (`<= 1` means acceptable).
    pub fn step(&mut self, t: f64, y: &[f64], h: f64, out: &mut [f64], opts: &IntegratorOptions) -> f64 {
        let n = y.len();
        for s in 0..13 {
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..s {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc += a * self.k[j][i];
                    }
                }
                self.tmp[i] = y[i] + h * acc;
            }
            self.sys.rhs(t + C[s] * h, &self.tmp, &mut self.k[s]);
        }
        let mut err: f64 = 0.0;
        for i in 0..n {
            let mut acc = 0.0;
            for s in 5..13 {
                acc += B8[s] * self.k[s][i];
            }
            out[i] = y[i] + h * acc;
            let e = (ERR * h * (self.k[0][i] + self.k[10][i] - self.k[11][i] - self.k[12][i])).abs();
            let sc = opts.atol + opts.rtol * y[i].abs().max(out[i].abs());
            err = err.max(e / sc);
        }
        if err.is_nan() {
            f64::INFINITY
        } else {
            err
        }
    }
}

/// Adaptive stepper that keeps the last accepted step for event refinement.
pub struct Stepper<'a, S: OdeSystem + ?Sized> {
    rk: Rkf78<'a, S>,
    pub opts: IntegratorOptions,
    pub t0: f64,
    pub t: f64,
    pub y: Vec<f64>,
    pub t_prev: f64,
    pub y_prev: Vec<f64>,
    h: f64,
    dir: f64,
    scratch: Vec<f64>,
}

impl<'a, S: OdeSystem + ?Sized> Stepper<'a, S> {
    /// `direction` is +1 for forward and -1 for backward time.
    pub fn new(sys: &'a S, t0: f64, y0: &[f64], direction: f64, opts: IntegratorOptions) -> Self {
        let dir = if direction < 0.0 { -1.0 } else { 1.0 };
        Stepper {
            rk: Rkf78::new(sys),
            opts,
            t0,
            t: t0,
            y: y0.to_vec(),
            t_prev: t0,
            y_prev: y0.to_vec(),
            h: opts.h_init.min(opts.h_max),
            dir,
            scratch: vec![0.0; y0.len()],
        }
    }

    /// Advance by one accepted step, never stepping past `t_stop` (if given).
    pub fn advance(&mut self, t_stop: Option<f64>) -> Result<()> {
        loop {
            let mut h = self.h.min(self.opts.h_max);
            let mut clipped = false;
            if let Some(ts) = t_stop {
                let rem = (ts - self.t) * self.dir;
                if rem <= h {
                    h = rem;
                    clipped = true;
                }
            }
            let err = self.rk.step(self.t, &self.y, self.dir * h, &mut self.scratch, &self.opts);
            if err <= 1.0 {
                if self.scratch.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite { t: self.t });
                }
                self.t_prev = self.t;
                std::mem::swap(&mut self.y_prev, &mut self.y);
                self.y.copy_from_slice(&self.scratch);
                self.t = if clipped { t_stop.unwrap() } else { self.t_prev + self.dir * h };
                let fac = if err == 0.0 { 4.0 } else { (0.9 * err.powf(-1.0 / 8.0)).clamp(0.2, 4.0) };
                if !clipped || fac < 1.0 {
                    self.h = (h * fac).min(self.opts.h_max);
                }
                return Ok(());
            }
            if !err.is_finite() && h <= self.opts.h_min {
                return Err(Error::NonFinite { t: self.t });
            }
            let fac = if err.is_finite() { (0.9 * err.powf(-1.0 / 8.0)).clamp(0.1, 0.9) } else { 0.1 };
            self.h = h * fac;
            if self.h < self.opts.h_min {
                return Err(Error::StepUnderflow { t: self.t });
            }
        }
    }

    /// State after a single trial step of length `dt` from the previous accepted point.
    pub fn restep(&mut self, dt: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.y.len()];
        if dt == 0.0 {
            out.copy_from_slice(&self.y_prev);
        } else {
            self.rk.step(self.t_prev, &self.y_prev, self.dir * dt, &mut out, &self.opts);
        }
        out
    }

    pub fn elapsed(&self) -> f64 {
        (self.t - self.t0).abs()
    }

    /// Refine a sign change of `g` inside the last accepted step. Illinois
    /// iteration where every evaluation re-takes one step from the step start.
    pub fn locate<G: Fn(f64, &[f64]) -> f64>(&mut self, g: &G, g_prev: f64, g_new: f64) -> (f64, Vec<f64>) {
        let full = (self.t - self.t_prev).abs();
        let (mut a, mut fa) = (0.0, g_prev);
        let (mut b, mut fb) = (full, g_new);
        let mut best = (b, fb);
        let mut side = 0i8;
        for _ in 0..60 {
            if fa == 0.0 {
                best = (a, fa);
                break;
            }
            if fb == 0.0 {
                best = (b, fb);
                break;
            }
            let mut c = (a * fb - b * fa) / (fb - fa);
            if !(c > a && c < b) {
                c = 0.5 * (a + b);
            }
            let yc = self.restep(c);
            let fc = g(self.t_prev + self.dir * c, &yc);
            best = (c, fc);
            if fc == 0.0 {
                break;
            }
            if (fc < 0.0) == (fa < 0.0) {
                a = c;
                fa = fc;
                if side == -1 {
                    fb *= 0.5;
                }
                side = -1;
            } else {
                b = c;
                fb = fc;
                if side == 1 {
                    fa *= 0.5;
                }
                side = 1;
            }
            if (b - a) <= 4.0 * f64::EPSILON * (self.t.abs() + full) {
                best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
                break;
            }
        }
        let dt = best.0;
        (self.t_prev + self.dir * dt, self.restep(dt))
    }
}

/// The same system with time reversed.
pub struct Reversed<'a, S: OdeSystem + ?Sized>(pub &'a S);

impl<S: OdeSystem + ?Sized> OdeSystem for Reversed<'_, S> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        self.0.rhs(-t, y, dy);
        for v in dy.iter_mut() {
            *v = -*v;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    Rising,
    Falling,
    Either,
}

impl Crossing {
    pub fn matches(self, before: f64, after: f64) -> bool {
        let rising = before < 0.0 && after >= 0.0;
        let falling = before > 0.0 && after <= 0.0;
        match self {
            Crossing::Rising => rising,
            Crossing::Falling => falling,
            Crossing::Either => rising || falling,
        }
    }
}

/// Integrate from `(t0, y0)` until `g` crosses zero in the requested sense.
/// A zero of `g` at the initial point is not reported.
pub fn integrate_to_event<S, G>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    g: G,
    crossing: Crossing,
    opts: IntegratorOptions,
) -> Result<(f64, Vec<f64>)>
where
    S: OdeSystem + ?Sized,
    G: Fn(f64, &[f64]) -> f64,
{
    let mut st = Stepper::new(sys, t0, y0, 1.0, opts);
    let mut g_prev = g(t0, y0);
    loop {
        st.advance(None)?;
        let g_new = g(st.t, &st.y);
        if crossing.matches(g_prev, g_new) {
            return Ok(st.locate(&g, g_prev, g_new));
        }
        g_prev = g_new;
        if st.elapsed() > opts.t_span_max {
            return Err(Error::EventNotFound { t_max: st.t });
        }
    }
}

/// Integrate from `t0` to exactly `t1` (either direction).
pub fn integrate_to<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    t1: f64,
    opts: IntegratorOptions,
) -> Result<Vec<f64>> {
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let mut st = Stepper::new(sys, t0, y0, dir, opts);
    while st.t != t1 {
        st.advance(Some(t1))?;
    }
    Ok(st.y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdeConfig {
    pub dt: f64,
    pub seed: u64,
}

impl SdeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!("SDE step must be positive, got {}", self.dt)));
        }
        Ok(())
    }
}

/// Random stream for path `path` of an ensemble seeded with `seed`.
pub fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// Fixed-step Euler-Maruyama for `dy = f(t, y) dt + B dW` with constant
/// `B` (`dim x k`, row-major) and `k` independent Wiener processes.
pub struct EulerMaruyama<F> {
    drift: F,
    diffusion: Vec<f64>,
    k: usize,
    pub dt: f64,
    pub t: f64,
    pub y: Vec<f64>,
    rng: ChaCha8Rng,
    f: Vec<f64>,
    dw: Vec<f64>,
}

impl<F: FnMut(f64, &[f64], &mut [f64])> EulerMaruyama<F> {
    pub fn new(drift: F, diffusion: Vec<f64>, k: usize, y0: &[f64], cfg: SdeConfig, path: u64) -> Result<Self> {
        cfg.validate()?;
        if diffusion.len() != y0.len() * k {
            return Err(Error::Config(format!(
                "diffusion matrix has {} entries, expected {} x {k}",
                diffusion.len(),
                y0.len()
            )));
        }
        Ok(EulerMaruyama {
            drift,
            diffusion,
            k,
            dt: cfg.dt,
            t: 0.0,
            y: y0.to_vec(),
            rng: path_rng(cfg.seed, path),
            f: vec![0.0; y0.len()],
            dw: vec![0.0; k],
        })
    }

    pub fn step(&mut self) {
        (self.drift)(self.t, &self.y, &mut self.f);
        let sq = self.dt.sqrt();
        for w in self.dw.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut self.rng);
            *w = sq * z;
        }
        for (i, yi) in self.y.iter_mut().enumerate() {
            let mut inc = self.f[i] * self.dt;
            for j in 0..self.k {
                inc += self.diffusion[i * self.k + j] * self.dw[j];
            }
            *yi += inc;
        }
        self.t += self.dt;
    }
}

/// Time and state where `g` vanishes, by linear interpolation between two steps.
pub fn interpolate_crossing(t0: f64, y0: &[f64], g0: f64, t1: f64, y1: &[f64], g1: f64) -> (f64, Vec<f64>) {
    let s = if g1 == g0 { 1.0 } else { g0 / (g0 - g1) };
    let y = y0.iter().zip(y1).map(|(a, b)| a + s * (b - a)).collect();
    (t0 + s * (t1 - t0), y)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdeCrossing {
    pub t: f64,
    pub y: Vec<f64>,
}

/// Euler-Maruyama path from `y0` recording the zeros of `g` in the requested
/// sense until `max_events` crossings or time `t_max`.
#[allow(clippy::too_many_arguments)]
pub fn euler_maruyama<F, G>(
    drift: F,
    diffusion: Vec<f64>,
    k: usize,
    y0: &[f64],
    cfg: SdeConfig,
    g: G,
    crossing: Crossing,
    max_events: usize,
    t_max: f64,
) -> Result<Vec<SdeCrossing>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    G: Fn(&[f64]) -> f64,
{
    let mut em = EulerMaruyama::new(drift, diffusion, k, y0, cfg, 0)?;
    let mut out = vec![];
    let mut g_prev = g(&em.y);
    let mut prev = em.y.clone();
    while out.len() < max_events && em.t < t_max {
        let t_prev = em.t;
        prev.copy_from_slice(&em.y);
        em.step();
        let g_new = g(&em.y);
        if crossing.matches(g_prev, g_new) {
            let (t, y) = interpolate_crossing(t_prev, &prev, g_prev, em.t, &em.y, g_new);
            out.push(SdeCrossing { t, y });
        }
        g_prev = g_new;
    }
    Ok(out)
}

/// Index layout of the extended state `[x (m), theta (n), eps, Phi (d x d)]`
/// with `d = m + n + 1` and `Phi` stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtendedLayout {
    pub m: usize,
    pub n: usize,
    pub variational: bool,
}

impl ExtendedLayout {
    pub fn d(&self) -> usize {
        self.m + self.n + 1
    }
    pub fn theta(&self, i: usize) -> usize {
        self.m + i
    }
    pub fn eps(&self) -> usize {
        self.m + self.n
    }
    pub fn phi(&self, row: usize, col: usize) -> usize {
        self.d() + row * self.d() + col
    }
    pub fn len(&self) -> usize {
        if self.variational {
            self.d() + self.d() * self.d()
        } else {
            self.d()
        }
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Extended initial state with `Phi = Id`.
    pub fn initial(&self, x: &[f64], theta: &[f64], eps: f64) -> Vec<f64> {
        let mut s = vec![0.0; self.len()];
        s[..self.m].copy_from_slice(x);
        s[self.m..self.m + self.n].copy_from_slice(theta);
        s[self.eps()] = eps;
        if self.variational {
            for k in 0..self.d() {
                s[self.phi(k, k)] = 1.0;
            }
        }
        s
    }
}

/// Forced model with angles and frozen `eps` as state variables, optionally
/// carrying the first variational equation with respect to all of them.
pub struct Extended<'m, M: Model> {
    pub model: &'m M,
    pub omega: Vec<f64>,
    pub amp: Vec<f64>,
    pub layout: ExtendedLayout,
    dir: Vec<f64>,
}

impl<'m, M: Model> Extended<'m, M> {
    pub fn new(model: &'m M, omega: &[f64], amp: &[f64], variational: bool) -> Self {
        let m = model.dim();
        let mut dir = vec![0.0; m];
        model.forcing_direction(&mut dir);
        Extended {
            model,
            omega: omega.to_vec(),
            amp: amp.to_vec(),
            layout: ExtendedLayout { m, n: omega.len(), variational },
            dir,
        }
    }

    pub fn from_forcing(model: &'m M, f: &Forcing, variational: bool) -> Self {
        Extended::new(model, &f.omega, &f.amp, variational)
    }
}

impl<M: Model> OdeSystem for Extended<'_, M> {
    fn dim(&self) -> usize {
        self.layout.len()
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let ExtendedLayout { m, n, .. } = self.layout;
        let eps = y[self.layout.eps()];
        let mut eta = 0.0;
        for i in 0..n {
            eta += self.amp[i] * y[m + i].cos();
        }
        self.model.field(&y[..m], &mut dy[..m]);
        for r in 0..m {
            dy[r] += eps * eta * self.dir[r];
        }
        for i in 0..n {
            dy[m + i] = self.omega[i];
        }
        dy[m + n] = 0.0;
        if !self.layout.variational {
            return;
        }
        let d = self.layout.d();
        // Jacobian rows of the core variables; angle and eps rows vanish.
        let mut jac = vec![0.0; m * d];
        let mut jm = vec![0.0; m * m];
        self.model.jacobian(&y[..m], &mut jm);
        for r in 0..m {
            jac[r * d..r * d + m].copy_from_slice(&jm[r * m..r * m + m]);
            for i in 0..n {
                jac[r * d + m + i] = -eps * self.amp[i] * y[m + i].sin() * self.dir[r];
            }
            jac[r * d + m + n] = eta * self.dir[r];
        }
        let phi = &y[d..];
        let dphi = &mut dy[d..];
        for r in 0..m {
            for c in 0..d {
                let mut s = 0.0;
                for k in 0..d {
                    s += jac[r * d + k] * phi[k * d + c];
                }
                dphi[r * d + c] = s;
            }
        }
        for v in dphi[m * d..].iter_mut() {
            *v = 0.0;
        }
    }
}

const GK_X: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const GK_WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_WK[7] * fc;
    let mut g = GK_WG[3] * fc;
    for j in 0..7 {
        let x = h * GK_X[j];
        let s = f(c - x) + f(c + x);
        k += GK_WK[j] * s;
        if j % 2 == 1 {
            g += GK_WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive 7/15-point Gauss-Kronrod quadrature on `[a, b]`.
pub fn quad<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let mut stack = vec![(a, b, 0usize)];
    let mut total = 0.0;
    let mut evals = 0usize;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (v, e) = gk15(&f, lo, hi);
        evals += 15;
        if !v.is_finite() {
            return Err(Error::NonFinite { t: lo });
        }
        let scale = (hi - lo) / (b - a).abs().max(f64::MIN_POSITIVE);
        if e <= tol * scale.abs().max(1e-3) || depth >= 50 {
            total += v;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
        if evals > 5_000_000 {
            return Err(Error::NoConvergence("quadrature evaluation budget exhausted".into()));
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Linear(f64);
    impl OdeSystem for Linear {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = self.0 * y[0];
        }
    }

    struct Oscillator;
    impl OdeSystem for Oscillator {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = y[1];
            dy[1] = -y[0];
        }
    }

    #[test]
    fn tableau_consistency() {
        for s in 0..13 {
            let row: f64 = A[s].iter().sum();
            assert!((row - C[s]).abs() < 1e-14, "stage {s}");
        }
        let b: f64 = B8.iter().sum();
        assert!((b - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eighth_order_convergence() {
        let sys = Oscillator;
        let opts = IntegratorOptions::default();
        let mut errs = vec![];
        for n in [8usize, 16] {
            let mut rk = Rkf78::new(&sys);
            let h = 2.0 / n as f64;
            let mut y = vec![1.0, 0.0];
            let mut out = vec![0.0; 2];
            for k in 0..n {
                rk.step(k as f64 * h, &y, h, &mut out, &opts);
                y.copy_from_slice(&out);
            }
            errs.push((y[0] - 2f64.cos()).abs());
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 7.5, "observed order {order}");
    }

    #[test]
    fn exponential_to_fixed_time() {
        let y = integrate_to(&Linear(-0.7), 0.0, &[2.0], 5.0, IntegratorOptions::default()).unwrap();
        assert!((y[0] - 2.0 * (-3.5f64).exp()).abs() < 1e-13);
        let back = integrate_to(&Linear(-0.7), 5.0, &y, 0.0, IntegratorOptions::default()).unwrap();
        assert!((back[0] - 2.0).abs() < 1e-11);
    }

    #[test]
    fn event_time_accuracy() {
        let (t, y) = integrate_to_event(
            &Linear(1.0),
            0.0,
            &[1e-3],
            |_, y| y[0] - 0.5,
            Crossing::Rising,
            IntegratorOptions::default(),
        )
        .unwrap();
        let exact = (0.5f64 / 1e-3).ln();
        assert!((t - exact).abs() < 1e-12, "{t} vs {exact}");
        assert!((y[0] - 0.5).abs() < 1e-13);
    }

    #[test]
    fn event_direction_is_respected() {
        let (t, _) = integrate_to_event(
            &Oscillator,
            0.0,
            &[1.0, 0.0],
            |_, y| y[1],
            Crossing::Rising,
            IntegratorOptions::default(),
        )
        .unwrap();
        assert!((t - std::f64::consts::PI).abs() < 1e-12);
        let (t, _) = integrate_to_event(
            &Oscillator,
            0.0,
            &[1.0, 0.0],
            |_, y| y[0],
            Crossing::Falling,
            IntegratorOptions::default(),
        )
        .unwrap();
        assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn missing_event_reports_error() {
        let opts = IntegratorOptions { t_span_max: 10.0, ..Default::default() };
        let r = integrate_to_event(&Linear(-1.0), 0.0, &[1.0], |_, y| y[0] - 2.0, Crossing::Either, opts);
        assert!(matches!(r, Err(Error::EventNotFound { .. })));
    }

    #[test]
    fn quadrature_of_known_integrals() {
        let v = quad(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-13).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
        let v = quad(|x| 1.0 / x.cosh(), -40.0, 40.0, 1e-13).unwrap();
        assert!((v - std::f64::consts::PI).abs() < 1e-12);
    }
}

#[cfg(test)]
mod sde_tests {
    use super::*;

    struct Pendulum;
    impl OdeSystem for Pendulum {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _t: f64, y: &[f64], d: &mut [f64]) {
            d[0] = y[1];
            d[1] = -y[0].sin();
        }
    }

    fn pendulum(_t: f64, y: &[f64], d: &mut [f64]) {
        Pendulum.rhs(0.0, y, d)
    }

    #[test]
    fn zero_diffusion_is_first_order_euler() {
        let y0 = [1.0, 0.0];
        let exact = integrate_to(&Pendulum, 0.0, &y0, 1.0, IntegratorOptions::default()).unwrap();
        let mut errs = vec![];
        for &dt in &[1e-3, 5e-4] {
            let cfg = SdeConfig { dt, seed: 1 };
            let mut em = EulerMaruyama::new(pendulum, vec![0.0; 4], 2, &y0, cfg, 0).unwrap();
            let steps = (1.0 / dt).round() as usize;
            for _ in 0..steps {
                em.step();
            }
            errs.push((em.y[0] - exact[0]).abs().max((em.y[1] - exact[1]).abs()));
        }
        assert!(errs[0] < 1e-3);
        let ratio = errs[0] / errs[1];
        assert!((ratio - 2.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn pure_diffusion_increment_variance() {
        let dt = 1e-3;
        let cfg = SdeConfig { dt, seed: 42 };
        let mut em = EulerMaruyama::new(|_, _: &[f64], d: &mut [f64]| d[0] = 0.0, vec![1.0], 1, &[0.0], cfg, 3).unwrap();
        let n = 100_000;
        let mut s2 = 0.0;
        for _ in 0..n {
            let before = em.y[0];
            em.step();
            let inc = em.y[0] - before;
            s2 += inc * inc;
        }
        let var = s2 / n as f64;
        assert!((var / dt - 1.0).abs() < 0.05, "{}", var / dt);
    }

    #[test]
    fn fixed_seed_reproduces_path_bitwise() {
        let run = |seed, path| {
            let cfg = SdeConfig { dt: 1e-3, seed };
            let mut em = EulerMaruyama::new(pendulum, vec![0.1, 0.0, 0.0, 0.1], 2, &[1.0, 0.0], cfg, path).unwrap();
            for _ in 0..5000 {
                em.step();
            }
            em.y
        };
        let a = run(7, 0);
        assert_eq!(a, run(7, 0));
        assert_ne!(a, run(7, 1));
        assert_ne!(a, run(8, 0));
    }

    #[test]
    fn linear_crossing_interpolation() {
        let (t, y) = interpolate_crossing(1.0, &[-1.0, 5.0], -1.0, 2.0, &[3.0, 1.0], 3.0);
        assert!((t - 1.25).abs() < 1e-15);
        assert!(y[0].abs() < 1e-15 && (y[1] - 4.0).abs() < 1e-15);
    }

    #[test]
    fn recorded_crossings_follow_direction() {
        let cfg = SdeConfig { dt: 1e-3, seed: 5 };
        let ev = euler_maruyama(pendulum, vec![0.0; 4], 2, &[1.0, 0.0], cfg, |y| y[0], Crossing::Falling, 3, 100.0).unwrap();
        assert_eq!(ev.len(), 3);
        for c in &ev {
            assert!(c.y[0].abs() < 1e-12 && c.y[1] < 0.0);
        }
        assert!(matches!(SdeConfig { dt: 0.0, seed: 0 }.validate(), Err(Error::Config(_))));
    }
}
