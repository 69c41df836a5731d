//! Maximum-likelihood fits (Gamma, log-normal, normal), density histograms
//! and fit overlays for dominance times and impact coordinates.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Digamma function, by upward recurrence to `x >= 10` and the asymptotic series.
pub fn digamma(mut x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return f64::NAN;
    }
    if x < 0.0 {
        // reflection
        return digamma(1.0 - x) - PI / (PI * x).tan();
    }
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let x2 = 1.0 / (x * x);
    let series = x2
        * (1.0 / 12.0
            - x2 * (1.0 / 120.0
                - x2 * (1.0 / 252.0 - x2 * (1.0 / 240.0 - x2 * (1.0 / 132.0 - x2 * (691.0 / 32760.0 - x2 / 12.0))))));
    acc + x.ln() - 0.5 / x - series
}

/// Trigamma function, by upward recurrence to `x >= 10` and the asymptotic series.
pub fn trigamma(mut x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NAN;
    }
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let z = 1.0 / x;
    let z2 = z * z;
    let series = z
        + 0.5 * z2
        + z * z2
            * (1.0 / 6.0
                - z2 * (1.0 / 30.0
                    - z2 * (1.0 / 42.0 - z2 * (1.0 / 30.0 - z2 * (5.0 / 66.0 - z2 * (691.0 / 2730.0 - z2 * 7.0 / 6.0))))));
    acc + series
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gamma,
    Lognormal,
    Normal,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Gamma => "gamma",
            Family::Lognormal => "lognormal",
            Family::Normal => "normal",
        }
    }
}

/// Fitted distribution. Gamma: `(p1, p2) = (shape a, scale lambda)`;
/// log-normal and normal: `(p1, p2) = (mu, sigma)`, with the log-normal `mu`
/// in natural log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub family: Family,
    pub p1: f64,
    pub p2: f64,
    pub log_likelihood: f64,
    pub n: usize,
    /// Zero spread in the sample: the fit is a point mass.
    pub degenerate: bool,
}

impl FitResult {
    pub fn density(&self, x: f64) -> f64 {
        match self.family {
            Family::Gamma => {
                if x <= 0.0 {
                    return 0.0;
                }
                let (a, l) = (self.p1, self.p2);
                ((a - 1.0) * x.ln() - x / l - ln_gamma(a) - a * l.ln()).exp()
            }
            Family::Lognormal => {
                if x <= 0.0 {
                    return 0.0;
                }
                let z = (x.ln() - self.p1) / self.p2;
                (-0.5 * z * z).exp() / (x * self.p2 * (2.0 * PI).sqrt())
            }
            Family::Normal => {
                let z = (x - self.p1) / self.p2;
                (-0.5 * z * z).exp() / (self.p2 * (2.0 * PI).sqrt())
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self.family {
            Family::Gamma => self.p1 * self.p2,
            Family::Lognormal => (self.p1 + 0.5 * self.p2 * self.p2).exp(),
            Family::Normal => self.p1,
        }
    }
}

/// Log-likelihood of `samples` under a family with parameters `(p1, p2)`.
pub fn log_likelihood(family: Family, p1: f64, p2: f64, samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    match family {
        Family::Gamma => {
            let (a, l) = (p1, p2);
            let sl: f64 = samples.iter().map(|x| x.ln()).sum();
            let sx: f64 = samples.iter().sum();
            (a - 1.0) * sl - sx / l - n * (ln_gamma(a) + a * l.ln())
        }
        Family::Lognormal => {
            let mut s = 0.0;
            for x in samples {
                let z = (x.ln() - p1) / p2;
                s += -x.ln() - 0.5 * z * z;
            }
            s - n * (p2.ln() + 0.5 * (2.0 * PI).ln())
        }
        Family::Normal => {
            let mut s = 0.0;
            for x in samples {
                let z = (x - p1) / p2;
                s -= 0.5 * z * z;
            }
            s - n * (p2.ln() + 0.5 * (2.0 * PI).ln())
        }
    }
}

fn check_positive(samples: &[f64]) -> Result<()> {
    for (i, &x) in samples.iter().enumerate() {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::Fit(format!("sample {i} is not a positive finite number: {x}")));
        }
    }
    Ok(())
}

fn check_count(samples: &[f64], min: usize) -> Result<()> {
    if samples.len() < min {
        return Err(Error::Fit(format!("need at least {min} samples, got {}", samples.len())));
    }
    Ok(())
}

fn mean_sd(v: impl Iterator<Item = f64> + Clone) -> (f64, f64, usize) {
    let n = v.clone().count();
    let m = v.clone().sum::<f64>() / n as f64;
    let var = v.map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64;
    (m, var.sqrt(), n)
}

/// `ln a - psi(a)` and its derivative; asymptotic series for large `a`.
fn log_minus_digamma(a: f64) -> (f64, f64) {
    if a < 1e3 {
        return (a.ln() - digamma(a), 1.0 / a - trigamma(a));
    }
    let i = 1.0 / a;
    let i2 = i * i;
    let g = i * (0.5 + i * (1.0 / 12.0 - i2 / 120.0));
    let dg = -i2 * (0.5 + i * (1.0 / 6.0 - i2 / 30.0));
    (g, dg)
}

/// Gamma MLE: Newton on `ln a - psi(a) = ln(mean) - mean(ln x)`, `lambda = mean / a`.
pub fn fit_gamma(samples: &[f64]) -> Result<FitResult> {
    check_count(samples, 10)?;
    check_positive(samples)?;
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let mean_log = samples.iter().map(|x| x.ln()).sum::<f64>() / n;
    let s = mean.ln() - mean_log;
    if constant(samples) || !(s > 0.0) {
        return Ok(FitResult {
            family: Family::Gamma,
            p1: f64::INFINITY,
            p2: 0.0,
            log_likelihood: f64::INFINITY,
            n: samples.len(),
            degenerate: true,
        });
    }
    let mut a = (3.0 - s + ((s - 3.0) * (s - 3.0) + 24.0 * s).sqrt()) / (12.0 * s);
    let mut converged = false;
    for _ in 0..100 {
        let (g, dg) = log_minus_digamma(a);
        let g = g - s;
        let mut next = a - g / dg;
        if !(next > 0.0) {
            next = 0.5 * a;
        }
        let done = (next - a).abs() <= 1e-13 * a;
        a = next;
        if done {
            converged = true;
            break;
        }
    }
    if !converged || !a.is_finite() {
        return Err(Error::Fit(format!("gamma shape iteration did not converge (s = {s})")));
    }
    let l = mean / a;
    Ok(FitResult {
        family: Family::Gamma,
        p1: a,
        p2: l,
        log_likelihood: log_likelihood(Family::Gamma, a, l, samples),
        n: samples.len(),
        degenerate: false,
    })
}

pub fn fit_lognormal(samples: &[f64]) -> Result<FitResult> {
    check_count(samples, 2)?;
    check_positive(samples)?;
    let (mu, sigma, n) = mean_sd(samples.iter().map(|x| x.ln()));
    Ok(finish(Family::Lognormal, mu, if constant(samples) { 0.0 } else { sigma }, n, samples))
}

pub fn fit_normal(samples: &[f64]) -> Result<FitResult> {
    check_count(samples, 2)?;
    if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
        return Err(Error::Fit(format!("sample {i} is not finite")));
    }
    let (mu, sigma, n) = mean_sd(samples.iter().copied());
    Ok(finish(Family::Normal, mu, if constant(samples) { 0.0 } else { sigma }, n, samples))
}

fn constant(samples: &[f64]) -> bool {
    samples.iter().all(|&x| x == samples[0])
}

fn finish(family: Family, mu: f64, sigma: f64, n: usize, samples: &[f64]) -> FitResult {
    let degenerate = !(sigma > 0.0);
    let ll = if degenerate { f64::INFINITY } else { log_likelihood(family, mu, sigma, samples) };
    FitResult { family, p1: mu, p2: sigma, log_likelihood: ll, n, degenerate }
}

pub fn fit(family: Family, samples: &[f64]) -> Result<FitResult> {
    match family {
        Family::Gamma => fit_gamma(samples),
        Family::Lognormal => fit_lognormal(samples),
        Family::Normal => fit_normal(samples),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BinRule {
    FreedmanDiaconis,
    Count(usize),
    Width(f64),
}

/// Density histogram: `sum(density * width) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn area(&self) -> f64 {
        self.density.iter().zip(self.edges.windows(2)).map(|(d, e)| d * (e[1] - e[0])).sum()
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

const MAX_BINS: usize = 100_000;

pub fn histogram(samples: &[f64], rule: BinRule) -> Result<Histogram> {
    if samples.is_empty() {
        return Err(Error::Fit("histogram of an empty sample".into()));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::Fit("histogram of non-finite samples".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let n = samples.len();
    if hi == lo {
        return Ok(Histogram { edges: vec![lo - 0.5, lo + 0.5], counts: vec![n as u64], density: vec![1.0] });
    }
    let bins = match rule {
        BinRule::Count(k) => k.max(1),
        BinRule::Width(w) => {
            if !(w > 0.0) {
                return Err(Error::Config(format!("bin width must be positive, got {w}")));
            }
            ((hi - lo) / w).ceil().max(1.0) as usize
        }
        BinRule::FreedmanDiaconis => {
            let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
            let w = 2.0 * iqr / (n as f64).cbrt();
            if w > 0.0 {
                ((hi - lo) / w).ceil().max(1.0) as usize
            } else {
                1
            }
        }
    }
    .min(MAX_BINS);
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|k| if k == bins { hi } else { lo + k as f64 * width }).collect();
    let mut counts = vec![0u64; bins];
    for &x in &sorted {
        let k = (((x - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let density = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, e)| c as f64 / (n as f64 * (e[1] - e[0])))
        .collect();
    Ok(Histogram { edges, counts, density })
}

/// Gamma, log-normal and normal fits with their densities on a shared grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Overlay {
    pub fits: Vec<FitResult>,
    pub x: Vec<f64>,
    /// `densities[k][j]` is the density of `fits[j]` at `x[k]`.
    pub densities: Vec<Vec<f64>>,
}

/// Fits every family applicable to the sample (Gamma and log-normal need positive data).
pub fn overlay_fits(samples: &[f64], points: usize) -> Result<Overlay> {
    let mut fits = vec![];
    if samples.iter().all(|&x| x > 0.0) {
        fits.push(fit_gamma(samples)?);
        fits.push(fit_lognormal(samples)?);
    }
    fits.push(fit_normal(samples)?);
    overlay(fits, samples, points)
}

/// Densities of the given fits on a uniform grid spanning the sample with 5% padding.
pub fn overlay(fits: Vec<FitResult>, samples: &[f64], points: usize) -> Result<Overlay> {
    if samples.is_empty() {
        return Err(Error::Fit("overlay of an empty sample".into()));
    }
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pad = 0.05 * (hi - lo).max(f64::EPSILON * hi.abs().max(1.0));
    let (a, b) = (lo - pad, hi + pad);
    let m = points.max(2);
    let x: Vec<f64> = (0..m).map(|k| a + (b - a) * k as f64 / (m - 1) as f64).collect();
    let densities = x
        .iter()
        .map(|&t| fits.iter().map(|f| if f.degenerate { f64::NAN } else { f.density(t) }).collect())
        .collect();
    Ok(Overlay { fits, x, densities })
}

/// `int |f - g|` over `[a, b]` by the midpoint rule with `m` cells.
pub fn density_l1(f: &FitResult, g: &FitResult, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    (0..m)
        .map(|k| {
            let x = a + (k as f64 + 0.5) * h;
            (f.density(x) - g.density(x)).abs()
        })
        .sum::<f64>()
        * h
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / x.len() as f64 - j as f64 / y.len() as f64).abs());
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Exp1, Gamma, LogNormal, Normal, Uniform};

    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

    fn draws<D: Distribution<f64>>(d: D, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| d.sample(&mut rng)).collect()
    }

    #[test]
    fn digamma_known_values() {
        assert!((digamma(1.0) + EULER_GAMMA).abs() < 1e-14);
        assert!((digamma(0.5) + EULER_GAMMA + 2.0 * 2f64.ln()).abs() < 1e-14);
        assert!((trigamma(1.0) - PI * PI / 6.0).abs() < 1e-13);
        assert!((trigamma(0.5) - PI * PI / 2.0).abs() < 1e-13);
    }

    #[test]
    fn large_shape_series_joins_direct_form() {
        for a in [1e3, 3e3] {
            let (g, dg) = log_minus_digamma(a);
            assert!((g - (a.ln() - digamma(a))).abs() < 1e-9 * g);
            assert!((dg - (1.0 / a - trigamma(a))).abs() < 1e-7 * dg.abs());
        }
    }

    #[test]
    fn nearly_constant_sample_fits_gamma() {
        let s: Vec<f64> = (0..100).map(|k| 9.0 + 1e-6 * k as f64).collect();
        let f = fit_gamma(&s).unwrap();
        assert!(!f.degenerate);
        assert!(f.p1 > 1e10);
        let mean = s.iter().sum::<f64>() / 100.0;
        assert!((f.p1 * f.p2 - mean).abs() < 1e-9 * mean);
    }

    #[test]
    fn digamma_matches_independent_implementation() {
        let mut x: f64 = 1e-3;
        while x < 1e6 {
            let a = digamma(x);
            let b = statrs::function::gamma::digamma(x);
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "x={x} {a} {b}");
            // recurrence
            assert!((digamma(x + 1.0) - a - 1.0 / x).abs() <= 1e-12 * a.abs().max(1.0));
            let t = trigamma(x);
            assert!((trigamma(x + 1.0) - t + 1.0 / (x * x)).abs() <= 1e-12 * t.max(1.0));
            x *= 1.7;
        }
    }

    #[test]
    fn trigamma_is_derivative_of_digamma() {
        for &x in &[0.01, 0.3, 2.5, 17.0, 350.0] {
            let h = 1e-5 * x;
            let fd = (digamma(x + h) - digamma(x - h)) / (2.0 * h);
            assert!((fd - trigamma(x)).abs() < 1e-6 * trigamma(x), "x={x}");
        }
    }

    #[test]
    fn gamma_fit_recovers_shape() {
        let s = draws(Gamma::new(2.0, 1.0).unwrap(), 1_000_000, 7);
        let f = fit_gamma(&s).unwrap();
        assert!((1.98..=2.02).contains(&f.p1), "a = {}", f.p1);
        let e = draws(Exp1, 100_000, 8);
        let f = fit_gamma(&e).unwrap();
        assert!((f.p1 - 1.0).abs() < 0.02, "a = {}", f.p1);
    }

    fn gradient(family: Family, p1: f64, p2: f64, s: &[f64]) -> (f64, f64) {
        let h1 = 1e-6 * p1.abs().max(1e-3);
        let h2 = 1e-6 * p2;
        let g1 = (log_likelihood(family, p1 + h1, p2, s) - log_likelihood(family, p1 - h1, p2, s)) / (2.0 * h1);
        let g2 = (log_likelihood(family, p1, p2 + h2, s) - log_likelihood(family, p1, p2 - h2, s)) / (2.0 * h2);
        (g1, g2)
    }

    #[test]
    fn mle_stationarity() {
        let s = draws(Gamma::new(55.0, 1.0).unwrap(), 5000, 3);
        // analytic score at the fitted parameters, per sample
        let f = fit_gamma(&s).unwrap();
        let n = s.len() as f64;
        let ml = s.iter().map(|x| x.ln()).sum::<f64>() / n;
        let m = s.iter().sum::<f64>() / n;
        let da = ml - f.p2.ln() - digamma(f.p1);
        let dl = m / (f.p2 * f.p2) - f.p1 / f.p2;
        assert!(da.abs() < 1e-8 && dl.abs() < 1e-8, "{da} {dl}");
        for fam in [Family::Gamma, Family::Lognormal, Family::Normal] {
            let f = fit(fam, &s).unwrap();
            let (g1, g2) = gradient(fam, f.p1, f.p2, &s);
            let scale = f.log_likelihood.abs().max(1.0);
            assert!(g1.abs() / scale < 1e-8 && g2.abs() / scale < 1e-8, "{fam:?} {g1} {g2}");
        }
    }

    #[test]
    fn closed_form_fits_match_sample_moments() {
        let s = draws(LogNormal::new(0.96, 0.1).unwrap(), 50_000, 4);
        let f = fit_lognormal(&s).unwrap();
        assert!((f.p1 - 0.96).abs() < 0.003 && (f.p2 - 0.1).abs() < 0.003);
        let s = draws(Normal::new(0.0003, 0.02).unwrap(), 50_000, 5);
        let f = fit_normal(&s).unwrap();
        assert!((f.p1 - 0.0003).abs() < 5e-4 && (f.p2 - 0.02).abs() < 5e-4);
    }

    #[test]
    fn scale_equivariance() {
        let s = draws(Gamma::new(3.5, 0.7).unwrap(), 20_000, 9);
        let c = 4.25;
        let t: Vec<f64> = s.iter().map(|x| c * x).collect();
        let (g, gc) = (fit_gamma(&s).unwrap(), fit_gamma(&t).unwrap());
        assert!((g.p1 - gc.p1).abs() < 1e-10 * g.p1);
        assert!((c * g.p2 - gc.p2).abs() < 1e-10 * gc.p2);
        let (l, lc) = (fit_lognormal(&s).unwrap(), fit_lognormal(&t).unwrap());
        assert!((l.p1 + c.ln() - lc.p1).abs() < 1e-12 && (l.p2 - lc.p2).abs() < 1e-12);
        let (n, nc) = (fit_normal(&s).unwrap(), fit_normal(&t).unwrap());
        assert!((c * n.p1 - nc.p1).abs() < 1e-12 * nc.p1 && (c * n.p2 - nc.p2).abs() < 1e-12 * nc.p2);
    }

    #[test]
    fn invalid_samples_rejected() {
        let mut s = vec![1.0; 20];
        s[13] = -0.5;
        match fit_gamma(&s) {
            Err(Error::Fit(m)) => assert!(m.contains("13")),
            other => panic!("{other:?}"),
        }
        assert!(fit_gamma(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn degenerate_sample_is_flagged() {
        let s = vec![2.5; 50];
        assert!(fit_lognormal(&s).unwrap().degenerate);
        assert!(fit_normal(&s).unwrap().degenerate);
        assert!(fit_gamma(&s).unwrap().degenerate);
        let h = histogram(&s, BinRule::FreedmanDiaconis).unwrap();
        assert_eq!(h.counts, vec![50]);
        assert!((h.area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_histogram_is_flat() {
        let s = draws(Uniform::new(0.0, 1.0).unwrap(), 1_000_000, 11);
        let h = histogram(&s, BinRule::Count(20)).unwrap();
        let dev = h.density.iter().map(|d| (d - 1.0).abs()).fold(0.0, f64::max);
        assert!(dev < 0.02, "{dev}");
        assert!((h.area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn histogram_area_independent_of_rule() {
        let s = draws(Gamma::new(5.0, 2.0).unwrap(), 3000, 12);
        for rule in [BinRule::FreedmanDiaconis, BinRule::Count(7), BinRule::Count(300), BinRule::Width(0.37)] {
            let h = histogram(&s, rule).unwrap();
            assert!((h.area() - 1.0).abs() < 1e-12, "{rule:?}");
            assert_eq!(h.counts.iter().sum::<u64>(), 3000);
        }
    }

    #[test]
    fn densities_integrate_to_one() {
        let s = draws(Gamma::new(8.0, 0.5).unwrap(), 5000, 13);
        let o = overlay_fits(&s, 50).unwrap();
        assert_eq!(o.fits.len(), 3);
        for f in &o.fits {
            let (lo, hi, m) = (-20.0, 40.0, 600_000);
            let h = (hi - lo) / m as f64;
            let total: f64 = (0..m).map(|k| f.density(lo + (k as f64 + 0.5) * h)).sum::<f64>() * h;
            assert!((total - 1.0).abs() < 1e-6, "{:?} {total}", f.family);
        }
    }

    #[test]
    fn gamma_and_lognormal_overlap_for_large_shape() {
        let s = draws(Gamma::new(90.0, 0.1).unwrap(), 20_000, 14);
        let o = overlay_fits(&s, 400).unwrap();
        let peak = o.densities.iter().map(|d| d[0]).fold(0.0, f64::max);
        let gap = o.densities.iter().map(|d| (d[0] - d[1]).abs()).fold(0.0, f64::max);
        assert!(gap < 0.1 * peak);
    }

    #[test]
    fn disjoint_samples_give_separated_peaks() {
        let a = draws(Normal::new(1.0, 0.05).unwrap(), 2000, 15);
        let b = draws(Normal::new(3.0, 0.05).unwrap(), 2000, 16);
        let (fa, fb) = (fit_normal(&a).unwrap(), fit_normal(&b).unwrap());
        assert!((fb.p1 - fa.p1) > 10.0 * (fa.p2 + fb.p2));
        assert!((density_l1(&fa, &fb, 0.0, 4.0, 4000) - 2.0).abs() < 1e-6);
        assert_eq!(ks_distance(&a, &b), 1.0);
    }

    #[test]
    fn ks_of_identical_distributions_is_small() {
        let a = draws(Exp1, 4000, 17);
        let b = draws(Exp1, 4000, 18);
        assert!(ks_distance(&a, &b) < 0.05);
        assert_eq!(ks_distance(&a, &a), 0.0);
    }
}
