use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{check_finite, Error, Result};

/// Frequencies used throughout the examples: 1, the golden mean and sqrt(769) - 27.
pub fn standard_frequencies() -> [f64; 3] {
    [1.0, (5f64.sqrt() - 1.0) / 2.0, 769f64.sqrt() - 27.0]
}

/// `(1, W, W^2)` with `W` the real root of `x^3 + x - 1`.
pub fn cubic_golden_frequencies() -> [f64; 3] {
    let d = (31.0f64 / 27.0).sqrt();
    let w = ((1.0 + d) / 2.0).cbrt() + ((1.0 - d) / 2.0).cbrt();
    [1.0, w, w * w]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrequencyPreset {
    Paper,
    CubicGolden,
}

impl FrequencyPreset {
    pub fn frequencies(&self) -> [f64; 3] {
        match self {
            FrequencyPreset::Paper => standard_frequencies(),
            FrequencyPreset::CubicGolden => cubic_golden_frequencies(),
        }
    }
}

/// Quasi-periodic forcing `eps * sum_i a_i cos(theta_i)` with `theta_i' = omega_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forcing {
    pub omega: Vec<f64>,
    pub amp: Vec<f64>,
    pub eps: f64,
}

impl Forcing {
    pub fn new(omega: Vec<f64>, amp: Vec<f64>, eps: f64) -> Result<Self> {
        let f = Forcing { omega, amp, eps };
        f.validate()?;
        Ok(f)
    }

    /// The first `n` standard frequencies with unit amplitudes.
    pub fn standard(n: usize, eps: f64) -> Result<Self> {
        Forcing::preset(FrequencyPreset::Paper, n, eps)
    }

    /// The first `n` frequencies of a preset with unit amplitudes.
    pub fn preset(preset: FrequencyPreset, n: usize, eps: f64) -> Result<Self> {
        if n == 0 || n > 3 {
            return Err(Error::Config(format!("number of frequencies must be 1..=3, got {n}")));
        }
        Forcing::new(preset.frequencies()[..n].to_vec(), vec![1.0; n], eps)
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega.is_empty() {
            return Err(Error::Config("forcing needs at least one frequency".into()));
        }
        if self.omega.len() != self.amp.len() {
            return Err(Error::Config(format!(
                "{} frequencies but {} amplitudes",
                self.omega.len(),
                self.amp.len()
            )));
        }
        for &w in &self.omega {
            check_finite("frequency", w)?;
            if w <= 0.0 {
                return Err(Error::Config(format!("frequencies must be positive, got {w}")));
            }
        }
        for &a in &self.amp {
            check_finite("amplitude", a)?;
        }
        check_finite("eps", self.eps)?;
        if self.eps < 0.0 {
            return Err(Error::Config(format!("eps must be non-negative, got {}", self.eps)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// `sum_i a_i cos(theta_i)`, without the factor eps.
    pub fn eta(&self, theta: &[f64]) -> f64 {
        self.amp.iter().zip(theta).map(|(a, t)| a * t.cos()).sum()
    }
}

/// `c + sum_i (a_i cos(theta_i) + b_i sin(theta_i))` on the n-torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPolynomial {
    pub constant: f64,
    pub omega: Vec<f64>,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl TrigPolynomial {
    pub fn zero(omega: &[f64]) -> Self {
        TrigPolynomial {
            constant: 0.0,
            omega: omega.to_vec(),
            cos: vec![0.0; omega.len()],
            sin: vec![0.0; omega.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn eval(&self, theta: &[f64]) -> f64 {
        let mut s = self.constant;
        for i in 0..self.len() {
            let (sn, cs) = theta[i].sin_cos();
            s += self.cos[i] * cs + self.sin[i] * sn;
        }
        s
    }

    /// Partial derivative with respect to `theta_i`.
    pub fn partial(&self, theta: &[f64], i: usize) -> f64 {
        let (sn, cs) = theta[i].sin_cos();
        -self.cos[i] * sn + self.sin[i] * cs
    }

    /// Multiply the i-th harmonic by `amp[i]`, leaving the constant term untouched.
    pub fn with_amplitudes(&self, amp: &[f64]) -> Result<Self> {
        if amp.len() != self.len() {
            return Err(Error::Config(format!(
                "{} amplitudes for a polynomial in {} angles",
                amp.len(),
                self.len()
            )));
        }
        let mut p = self.clone();
        for i in 0..p.len() {
            p.cos[i] *= amp[i];
            p.sin[i] *= amp[i];
        }
        Ok(p)
    }

    /// Keep the harmonics whose frequency matches one of `omega` (in that order).
    pub fn restrict(&self, omega: &[f64]) -> Result<Self> {
        let mut p = TrigPolynomial::zero(omega);
        p.constant = self.constant;
        for (j, w) in omega.iter().enumerate() {
            let i = self
                .omega
                .iter()
                .position(|x| (x - w).abs() <= 1e-12 * w.abs().max(1.0))
                .ok_or_else(|| Error::Config(format!("frequency {w} not present in coefficients")))?;
            p.cos[j] = self.cos[i];
            p.sin[j] = self.sin[i];
        }
        Ok(p)
    }

    /// Shift every angle by `omega_i * dt`.
    pub fn time_shifted(&self, dt: f64) -> Self {
        let mut p = self.clone();
        for i in 0..p.len() {
            let (sn, cs) = (self.omega[i] * dt).sin_cos();
            // a cos(t + d) + b sin(t + d) rewritten in cos t, sin t
            p.cos[i] = self.cos[i] * cs + self.sin[i] * sn;
            p.sin[i] = -self.cos[i] * sn + self.sin[i] * cs;
        }
        p
    }
}

/// Mean of `|f|` over a uniform grid with `m` points per angle on the n-torus.
pub fn torus_l1_mean<F: Fn(&[f64]) -> f64>(n: usize, m: usize, f: F) -> f64 {
    let total = m.pow(n as u32);
    let mut theta = vec![0.0; n];
    let mut acc = 0.0;
    for k in 0..total {
        let mut idx = k;
        for t in theta.iter_mut() {
            *t = TAU * (idx % m) as f64 / m as f64;
            idx /= m;
        }
        acc += f(&theta).abs();
    }
    acc / total as f64
}

pub fn wrap_angle(t: f64) -> f64 {
    let w = t.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}
