//! Discrete separatrix maps: the Duffing map in `(u, theta, sigma)` or
//! `(h, theta, sigma)` variables (optionally scaled by the section radius) and
//! the four-map composition for the heteroclinic network.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapbuild::{GlobalMapCoeffsDuffing, GlobalMapCoeffsHbr, MelnikovCoeffsDuffing, MelnikovCoeffsHbr};
use crate::trig::{wrap_angle, Forcing, TrigPolynomial};

/// Reason an orbit stopped before its iterate budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminalEvent {
    /// The argument of the local passage vanished: the orbit hit the stable manifold.
    SeparatrixHit,
    /// A state component became NaN or infinite.
    NonFinite,
    /// The continuous-time orbit left the escape radius.
    Escape,
    /// No section crossing within the time cap.
    NoCrossing,
}

impl TerminalEvent {
    pub fn code(&self) -> &'static str {
        match self {
            TerminalEvent::SeparatrixHit => "separatrix-hit",
            TerminalEvent::NonFinite => "non-finite",
            TerminalEvent::Escape => "escape",
            TerminalEvent::NoCrossing => "no-crossing",
        }
    }
}

fn signum(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Sign-preserving power `sign(z) |z|^nu`.
pub fn spow(z: f64, nu: f64) -> f64 {
    signum(z) * z.abs().powf(nu)
}

/// One row of an orbit: state after the step, branch label and dominance time of the step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRow {
    pub index: usize,
    pub state: Vec<f64>,
    pub branch: i8,
    pub t_dom: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    /// Names of the state components in [`OrbitRow::state`].
    pub columns: Vec<String>,
    pub rows: Vec<OrbitRow>,
    pub terminal: Option<TerminalEvent>,
}

impl OrbitRecord {
    pub fn dominance_times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t_dom).collect()
    }

    /// Section coordinate at every recorded impact (`u`, `h` or the transverse `w`).
    pub fn impacts(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.state[0]).collect()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

fn angle_columns(n: usize) -> impl Iterator<Item = String> {
    (1..=n).map(|i| format!("theta{i}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DuffingForm {
    /// State `(u, theta, sigma)` on `v = +-r`.
    Variational,
    /// State `(h, theta, sigma)` with `h` the energy on the entry section.
    Melnikov,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuffingState {
    /// `u` (variational form) or `h` (Melnikov form); divided by `r` or `K` in the scaled form.
    pub w: f64,
    pub theta: Vec<f64>,
    pub sigma: f64,
}

/// Result of a single map step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput<S> {
    pub next: S,
    /// Angle increments before reduction mod 2 pi.
    pub increment: Vec<f64>,
    pub t_dom: f64,
}

/// Duffing separatrix map with forcing amplitudes and `eps` folded in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuffingSepMap {
    pub form: DuffingForm,
    pub scaled: bool,
    pub r: f64,
    pub nu: f64,
    pub lambda_plus: f64,
    pub omega: Vec<f64>,
    pub eps: f64,
    /// Travel time outside the saddle neighbourhood: `T*` or `s0 + s1`.
    pub t_global: f64,
    /// `alpha` (variational form); unused in the Melnikov form.
    pub alpha: f64,
    /// `rho` (variational) or the forcing part of `M` (Melnikov), amplitudes applied, per unit eps.
    pub kick: TrigPolynomial,
    /// Constant part of the Melnikov function; zero in the variational form.
    pub constant: f64,
    /// `K = 2 mu_+ mu_- r^2` (Melnikov form only).
    pub k: f64,
}

impl DuffingSepMap {
    pub fn variational(c: &GlobalMapCoeffsDuffing, f: &Forcing) -> Result<Self> {
        f.validate()?;
        let rho = c.rho.restrict(&f.omega)?.with_amplitudes(&f.amp)?;
        Ok(DuffingSepMap {
            form: DuffingForm::Variational,
            scaled: false,
            r: c.r,
            nu: c.frame.nu(),
            lambda_plus: c.frame.lambda_plus,
            omega: f.omega.clone(),
            eps: f.eps,
            t_global: c.t_star,
            alpha: c.alpha,
            kick: rho,
            constant: 0.0,
            k: c.frame.mu() * c.r * c.r,
        })
    }

    pub fn melnikov(c: &MelnikovCoeffsDuffing, f: &Forcing) -> Result<Self> {
        f.validate()?;
        let m = c.forcing.restrict(&f.omega)?.with_amplitudes(&f.amp)?;
        Ok(DuffingSepMap {
            form: DuffingForm::Melnikov,
            scaled: false,
            r: c.r,
            nu: c.frame.nu(),
            lambda_plus: c.frame.lambda_plus,
            omega: f.omega.clone(),
            eps: f.eps,
            t_global: c.s0 + c.s1,
            alpha: 1.0,
            kick: m,
            constant: c.constant,
            k: c.k(),
        })
    }

    /// The same map in normalized variables (`u / r` or `h / K`).
    pub fn scaled(&self) -> Self {
        DuffingSepMap { scaled: true, ..self.clone() }
    }

    /// Factor converting the unscaled state variable to the scaled one.
    pub fn scale(&self) -> f64 {
        match self.form {
            DuffingForm::Variational => self.r,
            DuffingForm::Melnikov => self.k,
        }
    }

    pub fn dim(&self) -> usize {
        1 + self.omega.len()
    }

    /// Quantity whose sign decides the branch and whose modulus sets the passage time:
    /// `alpha u + eps rho` or `h + M_sigma`, in the map's own variables.
    pub fn argument(&self, s: &DuffingState) -> f64 {
        let kick = self.eps * self.kick.eval(&s.theta);
        match (self.form, self.scaled) {
            (DuffingForm::Variational, false) => self.alpha * s.w + kick,
            (DuffingForm::Variational, true) => self.alpha * s.w + kick / self.r,
            (DuffingForm::Melnikov, false) => s.w + self.constant + s.sigma * kick,
            (DuffingForm::Melnikov, true) => s.w + (self.constant + s.sigma * kick) / self.k,
        }
    }

    /// `log` of (section scale / |argument|), i.e. `lambda_+` times the local passage time.
    fn log_ratio(&self, z: f64) -> f64 {
        match (self.form, self.scaled) {
            (DuffingForm::Variational, false) => (self.r / z.abs()).ln(),
            (DuffingForm::Melnikov, false) => (self.k / z).abs().ln(),
            (_, true) => -z.abs().ln(),
        }
    }

    pub fn step(&self, s: &DuffingState) -> std::result::Result<StepOutput<DuffingState>, TerminalEvent> {
        let z = self.argument(s);
        if !z.is_finite() {
            return Err(TerminalEvent::NonFinite);
        }
        if z == 0.0 {
            return Err(TerminalEvent::SeparatrixHit);
        }
        let (w, sigma) = match (self.form, self.scaled) {
            (DuffingForm::Variational, false) => {
                (s.sigma * self.r.powf(1.0 - self.nu) * z.abs().powf(self.nu), signum(z))
            }
            (DuffingForm::Variational, true) => (s.sigma * z.abs().powf(self.nu), signum(z)),
            (DuffingForm::Melnikov, false) => (self.k * spow(z / self.k, self.nu), -s.sigma * signum(z)),
            (DuffingForm::Melnikov, true) => (spow(z, self.nu), -s.sigma * signum(z * self.k)),
        };
        let t_dom = self.t_global + self.log_ratio(z) / self.lambda_plus;
        let increment: Vec<f64> = self.omega.iter().map(|w| w * t_dom).collect();
        let theta = s.theta.iter().zip(&increment).map(|(t, d)| wrap_angle(t + d)).collect();
        if !w.is_finite() {
            return Err(TerminalEvent::NonFinite);
        }
        Ok(StepOutput { next: DuffingState { w, theta, sigma }, increment, t_dom })
    }

    /// Step together with the Jacobian action on a tangent vector `(dw, dtheta)`.
    pub fn step_tangent(
        &self,
        s: &DuffingState,
        tangent: &mut [f64],
    ) -> std::result::Result<StepOutput<DuffingState>, TerminalEvent> {
        let out = self.step(s)?;
        let n = self.omega.len();
        let z = self.argument(s);
        let kick_scale = match (self.form, self.scaled) {
            (DuffingForm::Variational, false) => self.eps,
            (DuffingForm::Variational, true) => self.eps / self.r,
            (DuffingForm::Melnikov, false) => s.sigma * self.eps,
            (DuffingForm::Melnikov, true) => s.sigma * self.eps / self.k,
        };
        let w_coef = match self.form {
            DuffingForm::Variational => self.alpha,
            DuffingForm::Melnikov => 1.0,
        };
        let mut dz = w_coef * tangent[0];
        for j in 0..n {
            dz += kick_scale * self.kick.partial(&s.theta, j) * tangent[1 + j];
        }
        // d(new w)/dz = nu * w_new / z in every form
        tangent[0] = self.nu * out.next.w / z * dz;
        for j in 0..n {
            tangent[1 + j] -= self.omega[j] / self.lambda_plus * dz / z;
        }
        Ok(out)
    }

    pub fn columns(&self) -> Vec<String> {
        let first = match self.form {
            DuffingForm::Variational => "u",
            DuffingForm::Melnikov => "h",
        };
        std::iter::once(first.to_string()).chain(angle_columns(self.omega.len())).collect()
    }

    pub fn iterate(&self, s0: &DuffingState, n: usize) -> Result<OrbitRecord> {
        if n == 0 {
            return Err(Error::Config("iterate count must be at least 1".into()));
        }
        check_state_len(s0.theta.len(), self.omega.len())?;
        let mut rows = Vec::with_capacity(n);
        let mut s = s0.clone();
        let mut terminal = None;
        for index in 0..n {
            match self.step(&s) {
                Ok(out) => {
                    s = out.next;
                    let mut state = vec![s.w];
                    state.extend_from_slice(&s.theta);
                    rows.push(OrbitRow { index, state, branch: s.sigma as i8, t_dom: out.t_dom });
                }
                Err(e) => {
                    terminal = Some(e);
                    break;
                }
            }
        }
        Ok(OrbitRecord { columns: self.columns(), rows, terminal })
    }
}

fn check_state_len(got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::Config(format!("state has {got} angles but the map has {want} frequencies")));
    }
    Ok(())
}

/// State on an exit section: `q` (distance of `p` from the node), the small
/// transverse coordinate `w` (`x` on `Sigma_out+`, `y` on `Sigma_out-`) and angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HbrState {
    pub q: f64,
    pub w: f64,
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HbrStepOutput {
    pub next: HbrState,
    /// The two half steps `Sigma_out+ -> Sigma_out-` and `Sigma_out- -> Sigma_out+`.
    pub halves: [StepOutput<HbrState>; 2],
}

/// Four-map composition `T_L+ o T_G- o T_L- o T_G+` with amplitudes and `eps` folded in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HbrSepMap {
    pub ix: f64,
    pub iy: f64,
    pub r: f64,
    pub omega: Vec<f64>,
    pub eps: f64,
    pub t_star: f64,
    pub alpha_x: f64,
    pub beta_x: f64,
    pub alpha_q: f64,
    pub beta_q: f64,
    pub q_offset: f64,
    pub rho_x: TrigPolynomial,
    pub rho_q: TrigPolynomial,
    /// Time-of-flight corrections `beta_theta (q - q_s) + alpha_theta w + eps rho_theta`;
    /// `None` in the reduced map.
    pub angle_correction: Option<AngleCorrection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleCorrection {
    pub alpha_theta: f64,
    pub beta_theta: f64,
    pub q_s: f64,
    pub rho_theta: TrigPolynomial,
}

impl HbrSepMap {
    /// Reduced map: `q -> eps rho_q`, `x -> alpha_x x + eps rho_x`, `theta -> theta + omega T*`.
    pub fn reduced(c: &GlobalMapCoeffsHbr, f: &Forcing) -> Result<Self> {
        f.validate()?;
        Ok(HbrSepMap {
            ix: c.ix,
            iy: c.iy,
            r: c.r,
            omega: f.omega.clone(),
            eps: f.eps,
            t_star: c.t_star,
            alpha_x: c.alpha_x,
            beta_x: 0.0,
            alpha_q: 0.0,
            beta_q: 0.0,
            q_offset: 0.0,
            rho_x: c.rho_x.restrict(&f.omega)?.with_amplitudes(&f.amp)?,
            rho_q: c.rho_q.restrict(&f.omega)?.with_amplitudes(&f.amp)?,
            angle_correction: None,
        })
    }

    /// Map keeping every coefficient of the variational global map.
    pub fn full(c: &GlobalMapCoeffsHbr, f: &Forcing) -> Result<Self> {
        let mut m = HbrSepMap::reduced(c, f)?;
        m.beta_x = c.beta_x;
        m.alpha_q = c.alpha_q;
        m.beta_q = c.beta_q;
        m.q_offset = c.q_bar_s;
        m.angle_correction = Some(AngleCorrection {
            alpha_theta: c.alpha_theta,
            beta_theta: c.beta_theta,
            q_s: c.q_s,
            rho_theta: c.rho_theta.restrict(&f.omega)?.with_amplitudes(&f.amp)?,
        });
        Ok(m)
    }

    /// Map whose global part comes from the Melnikov route (`x -> A_x x + eps P_x`).
    pub fn from_melnikov(c: &MelnikovCoeffsHbr, ix: f64, iy: f64, f: &Forcing) -> Result<Self> {
        f.validate()?;
        Ok(HbrSepMap {
            ix,
            iy,
            r: c.r,
            omega: f.omega.clone(),
            eps: f.eps,
            t_star: c.tau_bar - c.tau,
            alpha_x: c.a_x,
            beta_x: 0.0,
            alpha_q: 0.0,
            beta_q: 0.0,
            q_offset: 0.0,
            rho_x: c.p_x.restrict(&f.omega)?.with_amplitudes(&f.amp)?,
            rho_q: TrigPolynomial::zero(&f.omega),
            angle_correction: None,
        })
    }

    pub fn dim(&self) -> usize {
        2 + self.omega.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ix > 0.0 && self.iy > 0.0) {
            return Err(Error::Config("local maps need I_x > 0 and I_y > 0".into()));
        }
        Ok(())
    }

    /// Local passage near a node: `(q, w, theta)` on an entry section with `w`
    /// the unstable coordinate, to the exit section. Returns the new state and
    /// the passage time.
    pub fn local(
        &self,
        q: f64,
        w: f64,
        theta: &[f64],
        unstable: f64,
        stable: f64,
    ) -> std::result::Result<(HbrState, f64), TerminalEvent> {
        if !w.is_finite() {
            return Err(TerminalEvent::NonFinite);
        }
        if w == 0.0 {
            return Err(TerminalEvent::SeparatrixHit);
        }
        let t = (self.r / w.abs()).ln() / unstable;
        let next = HbrState {
            q: q * (-2.0 * t).exp(),
            w: self.r * ((-1.0 + stable) * t).exp(),
            theta: theta.iter().zip(&self.omega).map(|(th, om)| th + om * t).collect(),
        };
        Ok((next, t))
    }

    /// Global passage to the next entry section: `(w, q, travel time)` with `w`
    /// the transverse coordinate on the entry section.
    pub fn global(&self, s: &HbrState) -> (f64, f64, f64) {
        let w1 = self.alpha_x * s.w + self.beta_x * s.q + self.eps * self.rho_x.eval(&s.theta);
        let q1 = self.q_offset + self.alpha_q * s.w + self.beta_q * s.q + self.eps * self.rho_q.eval(&s.theta);
        let mut t_glob = self.t_star;
        if let Some(c) = &self.angle_correction {
            t_glob += c.beta_theta * (s.q - c.q_s) + c.alpha_theta * s.w + self.eps * c.rho_theta.eval(&s.theta);
        }
        (w1, q1, t_glob)
    }

    /// `T_L- o T_G+` (`forward = true`, unstable rate `I_x`) or `T_L+ o T_G-`.
    pub fn half_step(
        &self,
        s: &HbrState,
        forward: bool,
    ) -> std::result::Result<StepOutput<HbrState>, TerminalEvent> {
        let (unstable, stable) = if forward { (self.ix, self.iy) } else { (self.iy, self.ix) };
        let (w1, q1, t_glob) = self.global(s);
        let theta_g: Vec<f64> = s.theta.iter().zip(&self.omega).map(|(t, w)| t + w * t_glob).collect();
        let (mut next, t_loc) = self.local(q1, w1, &theta_g, unstable, stable)?;
        let t_dom = t_glob + t_loc;
        let increment: Vec<f64> = self.omega.iter().map(|w| w * t_dom).collect();
        for (th, (t0, d)) in next.theta.iter_mut().zip(s.theta.iter().zip(&increment)) {
            *th = wrap_angle(t0 + d);
        }
        if !next.q.is_finite() || !next.w.is_finite() {
            return Err(TerminalEvent::NonFinite);
        }
        Ok(StepOutput { next, increment, t_dom })
    }

    fn half_step_tangent(
        &self,
        s: &HbrState,
        forward: bool,
        tg: &mut [f64],
    ) -> std::result::Result<StepOutput<HbrState>, TerminalEvent> {
        let out = self.half_step(s, forward)?;
        let (unstable, stable) = if forward { (self.ix, self.iy) } else { (self.iy, self.ix) };
        let n = self.omega.len();
        let (dq, dw) = (tg[0], tg[1]);
        let w1 = self.alpha_x * s.w + self.beta_x * s.q + self.eps * self.rho_x.eval(&s.theta);
        let q1 = self.q_offset + self.alpha_q * s.w + self.beta_q * s.q + self.eps * self.rho_q.eval(&s.theta);
        let mut dw1 = self.alpha_x * dw + self.beta_x * dq;
        let mut dq1 = self.alpha_q * dw + self.beta_q * dq;
        let mut dtg = 0.0;
        if let Some(c) = &self.angle_correction {
            dtg += c.beta_theta * dq + c.alpha_theta * dw;
        }
        for j in 0..n {
            let dth = tg[2 + j];
            dw1 += self.eps * self.rho_x.partial(&s.theta, j) * dth;
            dq1 += self.eps * self.rho_q.partial(&s.theta, j) * dth;
            if let Some(c) = &self.angle_correction {
                dtg += self.eps * c.rho_theta.partial(&s.theta, j) * dth;
            }
        }
        let t_loc = (self.r / w1.abs()).ln() / unstable;
        let dt = -dw1 / (unstable * w1);
        let decay = (-2.0 * t_loc).exp();
        tg[0] = decay * (dq1 - 2.0 * q1 * dt);
        tg[1] = (-1.0 + stable) * out.next.w * dt;
        for j in 0..n {
            tg[2 + j] += self.omega[j] * (dtg + dt);
        }
        Ok(out)
    }

    pub fn step(&self, s: &HbrState) -> std::result::Result<HbrStepOutput, TerminalEvent> {
        let a = self.half_step(s, true)?;
        let b = self.half_step(&a.next, false)?;
        Ok(HbrStepOutput { next: b.next.clone(), halves: [a, b] })
    }

    /// Full step with the Jacobian action on a tangent vector `(dq, dw, dtheta)`.
    pub fn step_tangent(&self, s: &HbrState, tg: &mut [f64]) -> std::result::Result<HbrStepOutput, TerminalEvent> {
        let a = self.half_step_tangent(s, true, tg)?;
        let b = self.half_step_tangent(&a.next, false, tg)?;
        Ok(HbrStepOutput { next: b.next.clone(), halves: [a, b] })
    }

    pub fn columns(&self) -> Vec<String> {
        ["w", "q"].iter().map(|s| s.to_string()).chain(angle_columns(self.omega.len())).collect()
    }

    /// `n` full steps; each full step contributes two rows (one per exit
    /// section), so every row carries one dominance time. `branch` is +1 on
    /// `Sigma_out+` and -1 on `Sigma_out-`.
    pub fn iterate(&self, s0: &HbrState, n: usize) -> Result<OrbitRecord> {
        if n == 0 {
            return Err(Error::Config("iterate count must be at least 1".into()));
        }
        self.validate()?;
        check_state_len(s0.theta.len(), self.omega.len())?;
        let mut rows = Vec::with_capacity(2 * n);
        let mut s = s0.clone();
        let mut terminal = None;
        'outer: for k in 0..n {
            for (h, forward) in [true, false].into_iter().enumerate() {
                match self.half_step(&s, forward) {
                    Ok(out) => {
                        s = out.next;
                        let mut state = vec![s.w, s.q];
                        state.extend_from_slice(&s.theta);
                        let branch = if forward { -1 } else { 1 };
                        rows.push(OrbitRow { index: 2 * k + h, state, branch, t_dom: out.t_dom });
                    }
                    Err(e) => {
                        terminal = Some(e);
                        break 'outer;
                    }
                }
            }
        }
        Ok(OrbitRecord { columns: self.columns(), rows, terminal })
    }
}

impl OrbitRecord {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.state[k]).collect())
    }
}
