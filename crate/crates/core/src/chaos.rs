//! Maximal Lyapunov exponents of the separatrix maps (MEGNO with a Benettin
//! cross-check), grid scans over initial conditions, and the diophantine
//! constant of a frequency pair.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::sepmap::{DuffingSepMap, DuffingState, HbrSepMap, HbrState, TerminalEvent};

/// A map together with its Jacobian action on tangent vectors.
pub trait TangentMap: Sync {
    type State: Clone + Send;
    fn dim(&self) -> usize;
    /// Advance `s` one step and replace `tangent` by its image under the Jacobian.
    fn advance(&self, s: &mut Self::State, tangent: &mut [f64]) -> std::result::Result<(), TerminalEvent>;
}

impl TangentMap for DuffingSepMap {
    type State = DuffingState;
    fn dim(&self) -> usize {
        DuffingSepMap::dim(self)
    }
    fn advance(&self, s: &mut DuffingState, tangent: &mut [f64]) -> std::result::Result<(), TerminalEvent> {
        *s = self.step_tangent(s, tangent)?.next;
        Ok(())
    }
}

impl TangentMap for HbrSepMap {
    type State = HbrState;
    fn dim(&self) -> usize {
        HbrSepMap::dim(self)
    }
    fn advance(&self, s: &mut HbrState, tangent: &mut [f64]) -> std::result::Result<(), TerminalEvent> {
        *s = self.step_tangent(s, tangent)?.next;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    /// Time-averaged MEGNO `<Y>` at the end of the run.
    pub megno_mean: f64,
    /// Maximal exponent from the growth rate of `<Y>`.
    pub lambda: f64,
    /// Maximal exponent from the plain renormalized tangent growth over the same window.
    pub lambda_benettin: f64,
    pub iterates: usize,
    pub terminal: Option<TerminalEvent>,
}

impl LyapunovEstimate {
    pub fn is_partial(&self) -> bool {
        self.terminal.is_some() || !self.lambda.is_finite()
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 && n.is_finite() {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
    n
}

/// MEGNO for maps. With `l_k = ln(|d_k| / |d_{k-1}|)` (tangent renormalized
/// every step), `Y_k = (2/k) sum_{j<=k} j l_j` and `<Y>_k = (1/k) sum_{j<=k} Y_j`.
/// Since `<Y>_k ~ lambda k / 2 + const`, the exponent is twice the least-squares
/// slope of `<Y>_k` over the second half of the run.
pub fn megno_lyapunov<M: TangentMap>(map: &M, s0: &M::State, n: usize, transient: usize) -> Result<LyapunovEstimate> {
    if n < 10 {
        return Err(Error::Config(format!("MEGNO needs at least 10 iterates, got {n}")));
    }
    let d = map.dim();
    let mut s = s0.clone();
    let mut tg = vec![1.0; d];
    normalize(&mut tg);
    for _ in 0..transient {
        if let Err(e) = map.advance(&mut s, &mut tg) {
            return Ok(LyapunovEstimate {
                megno_mean: f64::NAN,
                lambda: f64::NAN,
                lambda_benettin: f64::NAN,
                iterates: 0,
                terminal: Some(e),
            });
        }
        normalize(&mut tg);
    }
    let (mut weighted, mut plain) = (0.0, 0.0);
    let mut y_sum = 0.0;
    let mut y_mean = f64::NAN;
    let start = n / 2;
    let (mut sk, mut sk2, mut sy, mut sky, mut cnt) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut terminal = None;
    let mut done = 0;
    for k in 1..=n {
        if let Err(e) = map.advance(&mut s, &mut tg) {
            terminal = Some(e);
            break;
        }
        let g = normalize(&mut tg);
        if !(g > 0.0 && g.is_finite()) {
            terminal = Some(TerminalEvent::NonFinite);
            break;
        }
        let l = g.ln();
        let kf = k as f64;
        weighted += kf * l;
        let y = 2.0 * weighted / kf;
        y_sum += y;
        y_mean = y_sum / kf;
        if k > start {
            plain += l;
            sk += kf;
            sk2 += kf * kf;
            sy += y_mean;
            sky += kf * y_mean;
            cnt += 1.0;
        }
        done = k;
    }
    let slope = if cnt >= 2.0 { (cnt * sky - sk * sy) / (cnt * sk2 - sk * sk) } else { f64::NAN };
    Ok(LyapunovEstimate {
        megno_mean: y_mean,
        lambda: 2.0 * slope,
        lambda_benettin: if cnt > 0.0 { plain / cnt } else { f64::NAN },
        iterates: done,
        terminal,
    })
}

pub const DEFAULT_CHAOS_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub w_min: f64,
    pub w_max: f64,
    pub n_w: usize,
    pub n_theta: usize,
    pub iterates: usize,
    pub transient: usize,
    /// Cells with `lambda > threshold` count as chaotic. An attracting invariant
    /// curve has a zero maximal exponent whose finite-time estimate carries either sign.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub cells: usize,
    /// `lambda > threshold`.
    pub fraction_positive: f64,
    /// `lambda <= threshold`.
    pub fraction_nonpositive: f64,
    /// `lambda < 0` literally.
    pub fraction_negative: f64,
    pub fraction_flagged: f64,
    /// Cells that MEGNO and Benettin classify differently with respect to the threshold.
    pub sign_disagreements: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovScan {
    pub spec: GridSpec,
    pub w: Vec<f64>,
    pub theta: Vec<f64>,
    /// Row-major over `(theta index, w index)`.
    pub cells: Vec<LyapunovEstimate>,
    pub summary: ScanSummary,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_w == 0 || self.n_theta == 0 {
            return Err(Error::Config("grid needs at least one cell per axis".into()));
        }
        if !(self.w_min < self.w_max) || !self.w_min.is_finite() || !self.w_max.is_finite() {
            return Err(Error::Config(format!("bad state range [{}, {}]", self.w_min, self.w_max)));
        }
        if !(self.threshold >= 0.0) {
            return Err(Error::Config("chaos threshold must be non-negative".into()));
        }
        if self.iterates < 10 {
            return Err(Error::Config("iterate budget must be at least 10".into()));
        }
        Ok(())
    }

    /// Cell-centre coordinates.
    pub fn axes(&self) -> (Vec<f64>, Vec<f64>) {
        let dw = (self.w_max - self.w_min) / self.n_w as f64;
        let w = (0..self.n_w).map(|i| self.w_min + (i as f64 + 0.5) * dw).collect();
        let th = (0..self.n_theta).map(|j| (j as f64 + 0.5) * TAU / self.n_theta as f64).collect();
        (w, th)
    }
}

/// Scan initial conditions `(w, theta_1 = ... = theta_n = theta)` built by `make`.
pub fn lyapunov_grid<M, F>(map: &M, spec: &GridSpec, make: F) -> Result<LyapunovScan>
where
    M: TangentMap,
    F: Fn(f64, f64) -> M::State + Sync,
{
    spec.validate()?;
    let (w, theta) = spec.axes();
    let idx: Vec<(usize, usize)> = (0..spec.n_theta).flat_map(|j| (0..spec.n_w).map(move |i| (j, i))).collect();
    let cells: Vec<LyapunovEstimate> = idx
        .par_iter()
        .map(|&(j, i)| megno_lyapunov(map, &make(w[i], theta[j]), spec.iterates, spec.transient))
        .collect::<Result<_>>()?;
    let total = cells.len() as f64;
    let flagged = cells.iter().filter(|c| c.is_partial()).count();
    let th = spec.threshold;
    let pos = cells.iter().filter(|c| !c.is_partial() && c.lambda > th).count();
    let nonpos = cells.iter().filter(|c| !c.is_partial() && c.lambda <= th).count();
    let neg = cells.iter().filter(|c| !c.is_partial() && c.lambda < 0.0).count();
    let dis = cells
        .iter()
        .filter(|c| !c.is_partial() && (c.lambda > th) != (c.lambda_benettin > th))
        .count();
    Ok(LyapunovScan {
        spec: spec.clone(),
        w,
        theta,
        summary: ScanSummary {
            cells: cells.len(),
            fraction_positive: pos as f64 / total,
            fraction_nonpositive: nonpos as f64 / total,
            fraction_negative: neg as f64 / total,
            fraction_flagged: flagged as f64 / total,
            sign_disagreements: dis,
        },
        cells,
    })
}

/// Best constant `C` in `|k0 + k1 w2 + k2 w3| >= C (|k0| + |k1| + |k2|)^-2` over
/// `0 < max(|k1|, |k2|) <= K`, minimizing over `k0` for each pair.
pub fn diophantine_constant(w2: f64, w3: f64, k_max: u64) -> Result<f64> {
    if k_max == 0 {
        return Err(Error::Config("K must be at least 1".into()));
    }
    if !w2.is_finite() || !w3.is_finite() {
        return Err(Error::Config("frequencies must be finite".into()));
    }
    let k = k_max as i64;
    let best = (0..=k)
        .into_par_iter()
        .map(|k1| {
            let mut local = f64::INFINITY;
            // (k1, k2) and (-k1, -k2) give the same value; keep k1 >= 0 and for k1 = 0 only k2 > 0
            let lo = if k1 == 0 { 1 } else { -k };
            for k2 in lo..=k {
                let x = k1 as f64 * w2 + k2 as f64 * w3;
                let a = (k1.abs() + k2.abs()) as f64;
                for k0 in [(-x).floor(), (-x).ceil(), 0.0] {
                    let v = (k0 + x).abs() * (k0.abs() + a).powi(2);
                    if v < local {
                        local = v;
                    }
                }
            }
            local
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(best)
}
