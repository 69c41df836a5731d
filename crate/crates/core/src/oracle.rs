//! Continuous-time baselines: the noisy Duffing system in saddle coordinates,
//! the noisy heteroclinic network, and forced ODE runs that check the discrete
//! maps crossing by crossing.

use serde::{Deserialize, Serialize};

use crate::dynamics::{hbr_field, DuffingParams, DuffingUv, HbrModel, HbrParams};
use crate::error::{Error, Result};
use crate::integrate::{
    integrate_to_event, interpolate_crossing, Crossing, EulerMaruyama, Extended, IntegratorOptions, SdeConfig,
};
use crate::mapbuild::{build_duffing_global_map, build_hbr_global_map, BetaChoice};
use crate::sepmap::{DuffingSepMap, DuffingState, HbrSepMap, HbrState, OrbitRecord, OrbitRow, TerminalEvent};
use crate::trig::{wrap_angle, Forcing, TrigPolynomial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineModel {
    DuffingUvSde,
    HbrSde,
    DuffingOde,
    HbrOde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Map,
    Ode,
    Sde,
}

/// Section crossings of a continuous-time run in the orbit-record layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRun {
    pub model: BaselineModel,
    pub provenance: Provenance,
    pub seed: Option<u64>,
    pub record: OrbitRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub sde: SdeConfig,
    /// Diffusion strength (shared by all noisy components).
    pub eps: f64,
    pub crossings: usize,
    /// Index of the random stream, for ensembles sharing one seed.
    pub path: u64,
    /// The run stops with [`TerminalEvent::Escape`] once a state component exceeds this.
    pub escape_radius: f64,
    /// The run stops with [`TerminalEvent::NoCrossing`] after this long without a crossing.
    pub max_gap: f64,
}

impl NoiseConfig {
    /// Step and noise level used for the Duffing system at damping `gamma`.
    pub fn duffing_default(gamma: f64, seed: u64) -> Self {
        let (dt, eps) = if gamma < 0.03 { (1e-6, 5e-4) } else { (1e-5, 1e-3) };
        NoiseConfig {
            sde: SdeConfig { dt, seed },
            eps,
            crossings: 10_000,
            path: 0,
            escape_radius: 10.0,
            max_gap: 1e3,
        }
    }

    pub fn hbr_default(seed: u64) -> Self {
        NoiseConfig {
            sde: SdeConfig { dt: 1e-3, seed },
            eps: 1e-3,
            crossings: 2000,
            path: 0,
            escape_radius: 10.0,
            max_gap: 1e4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.sde.validate()?;
        if !(self.eps >= 0.0) || !self.eps.is_finite() {
            return Err(Error::Config(format!("noise strength must be non-negative, got {}", self.eps)));
        }
        if self.crossings == 0 {
            return Err(Error::Config("crossing budget must be at least 1".into()));
        }
        if !(self.escape_radius > 0.0 && self.max_gap > 0.0) {
            return Err(Error::Config("escape radius and crossing time cap must be positive".into()));
        }
        Ok(())
    }
}

fn escaped(y: &[f64], radius: f64) -> Option<TerminalEvent> {
    if y.iter().any(|v| !v.is_finite()) {
        Some(TerminalEvent::NonFinite)
    } else if y.iter().any(|v| v.abs() > radius) {
        Some(TerminalEvent::Escape)
    } else {
        None
    }
}

/// Noisy Duffing system in `(u, v)` with independent noise on both
/// coordinates, started at `(0, r)`. Records `u` and the dominance time at
/// every outgoing crossing of `|v| = r`; a crossing re-arms once `|v| < r / 2`.
pub fn run_duffing_noise(params: DuffingParams, r: f64, cfg: &NoiseConfig) -> Result<BaselineRun> {
    cfg.validate()?;
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Config(format!("section radius must lie in (0, 1), got {r}")));
    }
    let model = DuffingUv::new(params);
    let drift = |_t: f64, y: &[f64], d: &mut [f64]| {
        let f = model.field_uv(y[0], y[1], 0.0);
        d[0] = f[0];
        d[1] = f[1];
    };
    let diffusion = vec![cfg.eps, 0.0, 0.0, cfg.eps];
    let mut em = EulerMaruyama::new(drift, diffusion, 2, &[0.0, r], cfg.sde, cfg.path)?;
    let g = |y: &[f64]| y[1].abs() - r;
    let mut rows = Vec::with_capacity(cfg.crossings);
    let mut armed = false;
    let mut last = 0.0;
    let mut prev = [0.0; 2];
    let mut terminal = None;
    while rows.len() < cfg.crossings {
        let t0 = em.t;
        prev.copy_from_slice(&em.y);
        em.step();
        if let Some(e) = escaped(&em.y, cfg.escape_radius) {
            terminal = Some(e);
            break;
        }
        if !armed {
            armed = em.y[1].abs() < 0.5 * r;
        } else if g(&em.y) >= 0.0 {
            let (t, y) = interpolate_crossing(t0, &prev, g(&prev), em.t, &em.y, g(&em.y));
            rows.push(OrbitRow {
                index: rows.len(),
                state: vec![y[0]],
                branch: if y[1] < 0.0 { -1 } else { 1 },
                t_dom: t - last,
            });
            last = t;
            armed = false;
        }
        if em.t - last > cfg.max_gap {
            terminal = Some(TerminalEvent::NoCrossing);
            break;
        }
    }
    Ok(BaselineRun {
        model: BaselineModel::DuffingUvSde,
        provenance: Provenance::Sde,
        seed: Some(cfg.sde.seed),
        record: OrbitRecord { columns: vec!["u".into()], rows, terminal },
    })
}

/// Noisy heteroclinic network with the same Wiener increment added to `x` and
/// `y`. Records `(x, y)` and the time since the previous crossing at every
/// crossing of `p = 0`; `branch` is the sign of `p'`.
pub fn run_hbr_noise(params: HbrParams, start: [f64; 3], cfg: &NoiseConfig) -> Result<BaselineRun> {
    cfg.validate()?;
    let drift = |_t: f64, y: &[f64], d: &mut [f64]| {
        let f = hbr_field(&params, &[y[0], y[1], y[2]], 0.0);
        d.copy_from_slice(&f);
    };
    let diffusion = vec![0.0, cfg.eps, cfg.eps];
    let mut em = EulerMaruyama::new(drift, diffusion, 1, &start, cfg.sde, cfg.path)?;
    let mut rows = Vec::with_capacity(cfg.crossings);
    let mut last = 0.0;
    let mut prev = [0.0; 3];
    let mut terminal = None;
    while rows.len() < cfg.crossings {
        let t0 = em.t;
        prev.copy_from_slice(&em.y);
        em.step();
        if let Some(e) = escaped(&em.y, cfg.escape_radius) {
            terminal = Some(e);
            break;
        }
        if Crossing::Either.matches(prev[0], em.y[0]) {
            let (t, y) = interpolate_crossing(t0, &prev, prev[0], em.t, &em.y, em.y[0]);
            rows.push(OrbitRow {
                index: rows.len(),
                state: vec![y[1], y[2]],
                branch: if em.y[0] > prev[0] { 1 } else { -1 },
                t_dom: t - last,
            });
            last = t;
        }
        if em.t - last > cfg.max_gap {
            terminal = Some(TerminalEvent::NoCrossing);
            break;
        }
    }
    Ok(BaselineRun {
        model: BaselineModel::HbrSde,
        provenance: Provenance::Sde,
        seed: Some(cfg.sde.seed),
        record: OrbitRecord { columns: vec!["x".into(), "y".into()], rows, terminal },
    })
}

fn terminal_of(e: &Error) -> Option<TerminalEvent> {
    match e {
        Error::EventNotFound { .. } => Some(TerminalEvent::NoCrossing),
        Error::NonFinite { .. } | Error::StepUnderflow { .. } => Some(TerminalEvent::NonFinite),
        _ => None,
    }
}

fn angle_columns(n: usize) -> impl Iterator<Item = String> {
    (1..=n).map(|i| format!("theta{i}"))
}

/// Forced Duffing ODE in `(u, v)` from the exit section `v = sigma r`;
/// records `u` and angles at each later outgoing crossing of `|v| = r`.
pub fn run_duffing_ode(
    params: DuffingParams,
    r: f64,
    forcing: &Forcing,
    s0: &DuffingState,
    n: usize,
    opts: IntegratorOptions,
) -> Result<BaselineRun> {
    forcing.validate()?;
    let model = DuffingUv::new(params);
    let sys = Extended::from_forcing(&model, forcing, false);
    let m = forcing.omega.len();
    let mut y = sys.layout.initial(&[s0.w, s0.sigma * r], &s0.theta, forcing.eps);
    let mut rows = Vec::with_capacity(n);
    let mut terminal = None;
    for index in 0..n {
        match integrate_to_event(&sys, 0.0, &y, |_, s| s[1] * s[1] - r * r, Crossing::Rising, opts) {
            Ok((t, next)) => {
                y = next;
                let mut state = vec![y[0]];
                state.extend((0..m).map(|i| wrap_angle(y[2 + i])));
                rows.push(OrbitRow { index, state, branch: if y[1] < 0.0 { -1 } else { 1 }, t_dom: t });
            }
            Err(e) => {
                terminal = Some(terminal_of(&e).ok_or(e)?);
                break;
            }
        }
    }
    let columns = std::iter::once("u".to_string()).chain(angle_columns(m)).collect();
    Ok(BaselineRun {
        model: BaselineModel::DuffingOde,
        provenance: Provenance::Ode,
        seed: None,
        record: OrbitRecord { columns, rows, terminal },
    })
}

/// Exit-section coordinates of a network state: on `Sigma_out+` (`y = r` near
/// LD) `q = p - 1`, `w = x`; on `Sigma_out-` (`x = r` near RD) `q = -(p + 1)`, `w = y`.
fn hbr_section_state(y: &[f64], plus: bool) -> (f64, f64) {
    if plus {
        (y[0] - 1.0, y[1])
    } else {
        (-(y[0] + 1.0), y[2])
    }
}

/// Forced network ODE from `Sigma_out+`; records `(w, q, theta)` at every
/// exit section, alternating `Sigma_out-` and `Sigma_out+` as the map does.
pub fn run_hbr_ode(
    params: HbrParams,
    r: f64,
    forcing: &Forcing,
    s0: &HbrState,
    n_full: usize,
    opts: IntegratorOptions,
) -> Result<BaselineRun> {
    forcing.validate()?;
    let model = HbrModel { params };
    let sys = Extended::from_forcing(&model, forcing, false);
    let m = forcing.omega.len();
    let mut y = sys.layout.initial(&[1.0 + s0.q, s0.w, r], &s0.theta, forcing.eps);
    let mut rows = Vec::with_capacity(2 * n_full);
    let mut terminal = None;
    'outer: for k in 0..n_full {
        for (h, plus) in [false, true].into_iter().enumerate() {
            let c = if plus { 2 } else { 1 };
            match integrate_to_event(&sys, 0.0, &y, |_, s| s[c] * s[c] - r * r, Crossing::Rising, opts) {
                Ok((t, next)) => {
                    y = next;
                    let (q, w) = hbr_section_state(&y, plus);
                    let mut state = vec![w, q];
                    state.extend((0..m).map(|i| wrap_angle(y[3 + i])));
                    rows.push(OrbitRow { index: 2 * k + h, state, branch: if plus { 1 } else { -1 }, t_dom: t });
                }
                Err(e) => {
                    terminal = Some(terminal_of(&e).ok_or(e)?);
                    break 'outer;
                }
            }
        }
    }
    let columns = ["w", "q"].iter().map(|s| s.to_string()).chain(angle_columns(m)).collect();
    Ok(BaselineRun {
        model: BaselineModel::HbrOde,
        provenance: Provenance::Ode,
        seed: None,
        record: OrbitRecord { columns, rows, terminal },
    })
}

/// One step of the map against the ODE from the same section state.
/// `entry` is the transverse coordinate on the entry section, `exit` the
/// section coordinate after the step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub step: usize,
    pub map_entry: f64,
    pub ode_entry: f64,
    pub map_exit: f64,
    pub ode_exit: f64,
    pub map_t_dom: f64,
    pub ode_t_dom: f64,
    /// Size of the forcing term on the entry section, `eps * sum_i |rho_i|`.
    pub entry_scale: f64,
}

impl GapRow {
    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }
    pub fn entry_gap(&self) -> f64 {
        Self::rel(self.map_entry, self.ode_entry)
    }
    /// Entry gap relative to `max(|ode_entry|, entry_scale)`, finite when the
    /// entry coordinate passes near zero.
    pub fn entry_gap_scaled(&self) -> f64 {
        (self.map_entry - self.ode_entry).abs() / self.ode_entry.abs().max(self.entry_scale)
    }
    pub fn exit_gap(&self) -> f64 {
        Self::rel(self.map_exit, self.ode_exit)
    }
    pub fn t_dom_gap(&self) -> f64 {
        Self::rel(self.map_t_dom, self.ode_t_dom)
    }
}

fn amplitude_sum(p: &TrigPolynomial) -> f64 {
    p.cos.iter().zip(&p.sin).map(|(c, s)| c.hypot(*s)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapOdeComparison {
    pub rows: Vec<GapRow>,
    pub ode: BaselineRun,
}

/// Duffing variational map against the forced ODE, restarting both from the
/// ODE crossing state at every step.
pub fn verify_duffing_map_against_ode(
    gamma: f64,
    beta: BetaChoice,
    r: f64,
    forcing: &Forcing,
    s0: &DuffingState,
    n: usize,
    opts: IntegratorOptions,
) -> Result<MapOdeComparison> {
    let coeffs = build_duffing_global_map(gamma, r, &forcing.omega, beta, opts)?;
    let map = DuffingSepMap::variational(&coeffs, forcing)?;
    let params = DuffingParams::new(gamma, coeffs.beta)?;
    let model = DuffingUv::new(params);
    let sys = Extended::from_forcing(&model, forcing, false);
    let m = forcing.omega.len();
    let mut s = s0.clone();
    let mut rows = Vec::with_capacity(n);
    let mut ode_rows = Vec::with_capacity(n);
    for step in 0..n {
        let out = map.step(&s).map_err(|e| Error::NoConvergence(format!("map stopped: {}", e.code())))?;
        let y0 = sys.layout.initial(&[s.w, s.sigma * r], &s.theta, forcing.eps);
        let (t1, y1) = integrate_to_event(&sys, 0.0, &y0, |_, y| y[0] * y[0] - r * r, Crossing::Falling, opts)?;
        let (t2, y2) = integrate_to_event(&sys, 0.0, &y1, |_, y| y[1] * y[1] - r * r, Crossing::Rising, opts)?;
        let theta: Vec<f64> = (0..m).map(|i| wrap_angle(y2[2 + i])).collect();
        rows.push(GapRow {
            step,
            map_entry: map.argument(&s),
            ode_entry: y1[1],
            map_exit: out.next.w,
            ode_exit: y2[0],
            map_t_dom: out.t_dom,
            ode_t_dom: t1 + t2,
            entry_scale: forcing.eps.abs() * amplitude_sum(&map.kick),
        });
        let mut state = vec![y2[0]];
        state.extend_from_slice(&theta);
        let sigma = if y2[1] < 0.0 { -1.0 } else { 1.0 };
        ode_rows.push(OrbitRow { index: step, state, branch: sigma as i8, t_dom: t1 + t2 });
        s = DuffingState { w: y2[0], theta, sigma };
    }
    let columns = std::iter::once("u".to_string()).chain(angle_columns(m)).collect();
    let ode = BaselineRun {
        model: BaselineModel::DuffingOde,
        provenance: Provenance::Ode,
        seed: None,
        record: OrbitRecord { columns, rows: ode_rows, terminal: None },
    };
    Ok(MapOdeComparison { rows, ode })
}

/// Network map (all variational coefficients) against the forced ODE over
/// `n_full` cycles; one row per half cycle, both restarted from the ODE state.
pub fn verify_hbr_map_against_ode(
    params: HbrParams,
    r: f64,
    forcing: &Forcing,
    s0: &HbrState,
    n_full: usize,
    opts: IntegratorOptions,
) -> Result<MapOdeComparison> {
    let coeffs = build_hbr_global_map(params, r, &forcing.omega, opts)?;
    let map = HbrSepMap::full(&coeffs, forcing)?;
    map.validate()?;
    let model = HbrModel { params };
    let sys = Extended::from_forcing(&model, forcing, false);
    let m = forcing.omega.len();
    let mut y = sys.layout.initial(&[1.0 + s0.q, s0.w, r], &s0.theta, forcing.eps);
    let mut s = s0.clone();
    let mut rows = Vec::with_capacity(2 * n_full);
    let mut ode_rows = Vec::with_capacity(2 * n_full);
    for k in 0..n_full {
        for (h, forward) in [true, false].into_iter().enumerate() {
            let out = map
                .half_step(&s, forward)
                .map_err(|e| Error::NoConvergence(format!("map stopped: {}", e.code())))?;
            let (entry_w, _, _) = map.global(&s);
            // forward: LD -> RD, entry y = r near RD, exit |x| = r
            let (c_in, c_out, w_in) = if forward { (2, 1, 1) } else { (1, 2, 2) };
            let (t1, y1) =
                integrate_to_event(&sys, 0.0, &y, |_, v| v[c_in] * v[c_in] - r * r, Crossing::Falling, opts)?;
            let (t2, y2) =
                integrate_to_event(&sys, 0.0, &y1, |_, v| v[c_out] * v[c_out] - r * r, Crossing::Rising, opts)?;
            let (q, w) = hbr_section_state(&y2, !forward);
            let theta: Vec<f64> = (0..m).map(|i| wrap_angle(y2[3 + i])).collect();
            rows.push(GapRow {
                step: 2 * k + h,
                map_entry: entry_w,
                ode_entry: y1[w_in],
                map_exit: out.next.w,
                ode_exit: w,
                map_t_dom: out.t_dom,
                ode_t_dom: t1 + t2,
                entry_scale: forcing.eps.abs() * amplitude_sum(&map.rho_x),
            });
            let mut state = vec![w, q];
            state.extend_from_slice(&theta);
            ode_rows.push(OrbitRow { index: 2 * k + h, state, branch: if forward { -1 } else { 1 }, t_dom: t1 + t2 });
            s = HbrState { q, w, theta };
            y = y2;
        }
    }
    let columns = ["w", "q"].iter().map(|s| s.to_string()).chain(angle_columns(m)).collect();
    let ode = BaselineRun {
        model: BaselineModel::HbrOde,
        provenance: Provenance::Ode,
        seed: None,
        record: OrbitRecord { columns, rows: ode_rows, terminal: None },
    };
    Ok(MapOdeComparison { rows, ode })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapbuild::build_duffing_global_map;
    use crate::stats::ks_distance;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn median(mut v: Vec<f64>) -> f64 {
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    }

    #[test]
    fn duffing_zero_noise_converges_to_deterministic_transit() {
        let params = DuffingParams::first_order_balanced(0.08).unwrap();
        let f = Forcing::standard(1, 0.0).unwrap();
        let s0 = DuffingState { w: 0.0, theta: vec![0.0], sigma: 1.0 };
        let ode = run_duffing_ode(params, 0.1, &f, &s0, 1, IntegratorOptions::default()).unwrap();
        let exact = ode.record.rows[0].t_dom;
        let mut cfg = NoiseConfig::duffing_default(0.08, 3);
        cfg.eps = 0.0;
        cfg.crossings = 1;
        let mut errs = vec![];
        for (dt, seed) in [(4e-5, 3), (1e-5, 4)] {
            cfg.sde = SdeConfig { dt, seed };
            let a = run_duffing_noise(params, 0.1, &cfg).unwrap();
            cfg.path = 5;
            let b = run_duffing_noise(params, 0.1, &cfg).unwrap();
            assert_eq!(a.record.rows, b.record.rows);
            assert_eq!(a.record.rows[0].branch, ode.record.rows[0].branch);
            errs.push((a.record.rows[0].t_dom - exact).abs());
        }
        // the transit time depends logarithmically on the Euler drift off the
        // separatrix, so the error shrinks but not exactly linearly in dt
        assert!(errs[1] < 0.5 * errs[0], "{errs:?}");
        assert!(errs[1] < 0.05 * exact);
    }

    #[test]
    fn noise_runs_are_reproducible() {
        let p = HbrParams::symmetric(0.1).unwrap();
        let mut cfg = NoiseConfig::hbr_default(11);
        cfg.crossings = 40;
        let a = run_hbr_noise(p, [0.0, 0.0, FRAC_1_SQRT_2], &cfg).unwrap();
        let b = run_hbr_noise(p, [0.0, 0.0, FRAC_1_SQRT_2], &cfg).unwrap();
        assert_eq!(a, b);
        cfg.path = 1;
        let c = run_hbr_noise(p, [0.0, 0.0, FRAC_1_SQRT_2], &cfg).unwrap();
        assert_ne!(a.record.rows, c.record.rows);
        assert_eq!(a.provenance, Provenance::Sde);
    }

    #[test]
    fn hbr_noise_symmetric_under_swap() {
        let p = HbrParams::symmetric(0.1).unwrap();
        let cfg = NoiseConfig::hbr_default(2024);
        let a = run_hbr_noise(p, [0.0, 0.0, FRAC_1_SQRT_2], &cfg).unwrap();
        let b = run_hbr_noise(p, [0.0, FRAC_1_SQRT_2, 0.0], &cfg).unwrap();
        assert_eq!(a.record.len(), 2000);
        assert_eq!(b.record.len(), 2000);
        let d = ks_distance(&a.record.dominance_times(), &b.record.dominance_times());
        assert!(d < 0.05, "KS distance {d}");
    }

    #[test]
    fn unforced_network_slows_down() {
        // contraction per passage is (1 - I) / I; I close to 1/2 keeps 30 passages in range
        let mut cfg = NoiseConfig::hbr_default(1);
        cfg.eps = 0.0;
        cfg.crossings = 30;
        cfg.max_gap = 1e5;
        let run = run_hbr_noise(HbrParams::symmetric(0.48).unwrap(), [0.0, 1e-3, FRAC_1_SQRT_2], &cfg).unwrap();
        let t = run.record.dominance_times();
        assert_eq!(t.len(), 30, "{:?}", run.record.terminal);
        assert!(t.windows(2).all(|w| w[1] > w[0]), "{t:?}");
    }

    #[test]
    fn escape_is_reported() {
        let p = HbrParams::symmetric(0.1).unwrap();
        let mut cfg = NoiseConfig::hbr_default(1);
        cfg.escape_radius = 0.5;
        let run = run_hbr_noise(p, [0.0, 0.0, FRAC_1_SQRT_2], &cfg).unwrap();
        assert_eq!(run.record.terminal, Some(TerminalEvent::Escape));
        cfg.crossings = 0;
        assert!(matches!(run_hbr_noise(p, [0.0; 3], &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn duffing_map_tracks_ode() {
        let o = IntegratorOptions::default();
        let f = Forcing::standard(1, 1e-4).unwrap();
        let s0 = DuffingState { w: 0.0, theta: vec![0.0], sigma: 1.0 };
        let c = verify_duffing_map_against_ode(0.08, BetaChoice::Shot, 0.1, &f, &s0, 20, o).unwrap();
        assert_eq!(c.rows.len(), 20);
        for r in &c.rows {
            assert!(r.t_dom_gap() < 0.01, "{r:?}");
        }
        let f = Forcing::standard(3, 1e-4).unwrap();
        let s0 = DuffingState { w: 0.0, theta: vec![0.0; 3], sigma: 1.0 };
        let c = verify_duffing_map_against_ode(0.08, BetaChoice::Shot, 0.1, &f, &s0, 20, o).unwrap();
        assert!(median(c.rows.iter().map(|r| r.t_dom_gap()).collect()) < 0.01);
        assert!(c.rows.iter().all(|r| r.t_dom_gap() < 0.1 && r.entry_gap_scaled() < 0.05));
    }

    #[test]
    fn hbr_map_tracks_ode() {
        let o = IntegratorOptions::default();
        let p = HbrParams::symmetric(0.1).unwrap();
        for n in [1, 3] {
            let f = Forcing::standard(n, 1e-4).unwrap();
            let q_s = build_hbr_global_map(p, 0.1, &[], o).unwrap().q_s;
            let s0 = HbrState { q: q_s, w: 0.0, theta: vec![0.0; n] };
            let c = verify_hbr_map_against_ode(p, 0.1, &f, &s0, 10, o).unwrap();
            assert_eq!(c.rows.len(), 20);
            for r in &c.rows {
                assert!(r.entry_gap_scaled() < 0.05, "{n} {r:?}");
            }
        }
    }

    #[test]
    fn unforced_ode_reproduces_global_time() {
        let o = IntegratorOptions::default();
        let c = build_duffing_global_map(0.08, 0.1, &[1.0], BetaChoice::FirstOrder, o).unwrap();
        let model = DuffingUv::new(DuffingParams::new(0.08, c.beta).unwrap());
        let f = Forcing::standard(1, 0.0).unwrap();
        let sys = Extended::from_forcing(&model, &f, false);
        let y0 = sys.layout.initial(&[c.u_exit, 0.1], &[0.3], 0.0);
        let (t, _) = integrate_to_event(&sys, 0.0, &y0, |_, y| y[0] - 0.1, Crossing::Falling, o).unwrap();
        assert!((t - c.t_star).abs() < 1e-10, "{t} {}", c.t_star);
    }
}
