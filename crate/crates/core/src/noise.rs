//! Noise processes: white noise and Ornstein-Uhlenbeck, their exact path
//! sampling, the law of the terminal increment `ΔX = X_t − X₀`, and the
//! moment calculus behind every closed-form fidelity moment.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("noise intensity must be finite and non-negative, got {0}")]
    BadGamma(f64),
    #[error("damping rate must be finite and non-negative, got {0}")]
    BadDamping(f64),
    #[error("white noise has no damping and only calibrated initial data")]
    WhiteNoiseParameters,
    #[error("time step must be positive, got {0}")]
    BadStep(f64),
    #[error("horizon {horizon} is shorter than the step {dt}")]
    BadHorizon { horizon: f64, dt: f64 },
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("moment order {0} exceeds the supported maximum of {MAX_MOMENT_ORDER}")]
    OrderTooLarge(u32),
    #[error("conditional moments are defined for Ornstein-Uhlenbeck noise only")]
    NotOrnsteinUhlenbeck,
}

/// Highest moment order handled by the factorial-based formulas.
pub const MAX_MOMENT_ORDER: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    WhiteNoise,
    OrnsteinUhlenbeck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialData {
    /// `X₀ = 0`.
    Calibrated,
    /// `X₀ ~ γN/√(2k)`, the stationary law.
    Stationary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub gamma: f64,
    pub k: f64,
    pub init: InitialData,
}

impl NoiseModel {
    pub fn white(gamma: f64) -> Result<Self, NoiseError> {
        Self::new(NoiseKind::WhiteNoise, gamma, 0.0, InitialData::Calibrated)
    }

    pub fn ou(gamma: f64, k: f64, init: InitialData) -> Result<Self, NoiseError> {
        Self::new(NoiseKind::OrnsteinUhlenbeck, gamma, k, init)
    }

    pub fn new(kind: NoiseKind, gamma: f64, k: f64, init: InitialData) -> Result<Self, NoiseError> {
        let model = Self { kind, gamma, k, init };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(NoiseError::BadGamma(self.gamma));
        }
        if !(self.k.is_finite() && self.k >= 0.0) {
            return Err(NoiseError::BadDamping(self.k));
        }
        if self.kind == NoiseKind::WhiteNoise && (self.k != 0.0 || self.init != InitialData::Calibrated) {
            return Err(NoiseError::WhiteNoiseParameters);
        }
        if self.kind == NoiseKind::OrnsteinUhlenbeck && self.init == InitialData::Stationary && self.k == 0.0 {
            // No stationary law without damping.
            return Err(NoiseError::BadDamping(self.k));
        }
        Ok(())
    }

    /// Drift coefficient of `dX = −kX dt + γ dW`; zero for white noise.
    pub fn damping(&self) -> f64 {
        match self.kind {
            NoiseKind::WhiteNoise => 0.0,
            NoiseKind::OrnsteinUhlenbeck => self.k,
        }
    }

    /// Standard deviation of the stationary law `γ/√(2k)`, or 0 when the
    /// initial data is calibrated.
    pub fn initial_std(&self) -> f64 {
        match self.init {
            InitialData::Calibrated => 0.0,
            InitialData::Stationary => self.gamma / (2.0 * self.k).sqrt(),
        }
    }

    /// Draws `X₀`; consumes one normal draw only for stationary data.
    pub fn draw_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.init {
            InitialData::Calibrated => 0.0,
            InitialData::Stationary => self.initial_std() * rng.sample::<f64, _>(StandardNormal),
        }
    }

    /// Variance of `ΔX = X_t − X₀`.
    ///
    /// White noise: `γ²t`. Calibrated OU: `(γ²/2k)(1 − e^{−2kt})`.
    /// Stationary OU: `(γ²/k)(1 − e^{−kt})`. Written with `expm1` so the
    /// `k → 0` limit is numerically continuous.
    pub fn increment_variance(&self, t: f64) -> f64 {
        let g2 = self.gamma * self.gamma;
        let k = self.damping();
        if k == 0.0 {
            return g2 * t;
        }
        match self.init {
            InitialData::Calibrated => -g2 * (-2.0 * k * t).exp_m1() / (2.0 * k),
            InitialData::Stationary => -g2 * (-k * t).exp_m1() / k,
        }
    }

    /// `τ_k(t) = e^{−kt} sinh(kt)/k`, with `τ_0(t) = t`.
    pub fn tau(&self, t: f64) -> f64 {
        let k = self.damping();
        if k == 0.0 {
            t
        } else {
            -(-2.0 * k * t).exp_m1() / (2.0 * k)
        }
    }
}

/// Gaussian law of the terminal increment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianLaw {
    pub mean: f64,
    pub variance: f64,
}

/// Law of `X_t − X₀`. All of its even moments follow `(2n−1)!!·vⁿ`, so it
/// is exactly Gaussian with mean zero.
pub fn terminal_increment_law(model: &NoiseModel, t: f64) -> Result<GaussianLaw, NoiseError> {
    if t < 0.0 {
        return Err(NoiseError::NegativeTime(t));
    }
    Ok(GaussianLaw {
        mean: 0.0,
        variance: model.increment_variance(t),
    })
}

/// `E[cos(α(X_t − X₀))] = exp(−α²v(t)/2)`.
pub fn expected_cos(alpha: f64, model: &NoiseModel, t: f64) -> f64 {
    (-0.5 * alpha * alpha * model.increment_variance(t.max(0.0))).exp()
}

/// `(2n−1)!!` in floating point; `(−1)!! = 1`.
pub fn double_factorial_odd(n: u32) -> f64 {
    (1..=n).map(|j| (2 * j - 1) as f64).product()
}

/// `E[(X_t − X₀)^{2n}] = (2n−1)!!·v(t)ⁿ`.
pub fn raw_even_moment(n: u32, model: &NoiseModel, t: f64) -> Result<f64, NoiseError> {
    if n > MAX_MOMENT_ORDER {
        return Err(NoiseError::OrderTooLarge(n));
    }
    if t < 0.0 {
        return Err(NoiseError::NegativeTime(t));
    }
    Ok(double_factorial_odd(n) * model.increment_variance(t).powi(n as i32))
}

fn coef_even(l: u32, w: u32) -> f64 {
    let p: f64 = (l + 1..=w)
        .map(|q| {
            let q = q as f64;
            q * (2.0 * q - 1.0) / (q - l as f64)
        })
        .product();
    2f64.powi(l as i32) * p
}

fn coef_odd(l: u32, w: u32) -> f64 {
    let p: f64 = (l..w)
        .map(|q| {
            let q = q as f64;
            (1.0 + q) * (3.0 + 2.0 * q) / (q - l as f64 + 1.0)
        })
        .product();
    2f64.powi(l as i32) * p
}

/// `E[X_t^m | X₀]` for an OU process from the even/odd closed forms with
/// coefficient families `a[l,w]` and `b[l,w]`.
pub fn conditional_moment(m: u32, x0: f64, model: &NoiseModel, t: f64) -> Result<f64, NoiseError> {
    if model.kind != NoiseKind::OrnsteinUhlenbeck {
        return Err(NoiseError::NotOrnsteinUhlenbeck);
    }
    if m > MAX_MOMENT_ORDER {
        return Err(NoiseError::OrderTooLarge(m));
    }
    if t < 0.0 {
        return Err(NoiseError::NegativeTime(t));
    }
    if m == 0 {
        return Ok(1.0);
    }
    let k = model.k;
    let g2 = model.gamma * model.gamma;
    if k == 0.0 {
        // Brownian limit: X_t | X₀ ~ N(X₀, γ²t).
        return Ok(gaussian_raw_moment(m, x0, g2 * t));
    }
    let growth = (2.0 * k * t).exp_m1();
    let (w, odd) = if m.is_multiple_of(2) {
        (m / 2, false)
    } else {
        ((m - 1) / 2, true)
    };
    let sum: f64 = (0..=w)
        .map(|l| {
            let c = if odd { coef_odd(l, w) } else { coef_even(l, w) };
            let x_pow = if odd { 2 * l + 1 } else { 2 * l };
            c * growth.powi((w - l) as i32) * g2.powi((w - l) as i32) * k.powi(l as i32) * x0.powi(x_pow as i32)
        })
        .sum();
    let decay = (-(m as f64) * k * t).exp();
    Ok(decay * (2.0 * k).powi(-(w as i32)) * sum)
}

/// `E[(μ + √v·N)^m]` by the binomial expansion over standard normal moments.
pub(crate) fn gaussian_raw_moment(m: u32, mean: f64, variance: f64) -> f64 {
    let mut total = 0.0;
    let mut binom = 1.0;
    for j in 0..=m {
        if j % 2 == 0 {
            total += binom * mean.powi((m - j) as i32) * variance.powi((j / 2) as i32) * double_factorial_odd(j / 2);
        }
        binom = binom * (m - j) as f64 / (j + 1) as f64;
    }
    total
}

/// A sampled realization of the noise process.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub seed: (u64, u64),
}

/// Samples `X` on the grid `0, dt, …, T` using the exact one-step transition
/// `X_{t+dt} = X_t e^{−k dt} + γ√((1 − e^{−2k dt})/(2k))·N` (white noise:
/// `X_t + γ√dt·N`). The stationary initial draw comes first from the same
/// stream.
pub fn sample_path<R: Rng + ?Sized>(
    model: &NoiseModel,
    horizon: f64,
    dt: f64,
    rng: &mut R,
    seed: (u64, u64),
) -> Result<NoisePath, NoiseError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(NoiseError::BadStep(dt));
    }
    if horizon < dt {
        return Err(NoiseError::BadHorizon { horizon, dt });
    }
    let steps = (horizon / dt).round() as usize;
    let k = model.damping();
    let (decay, scale) = if k == 0.0 {
        (1.0, model.gamma * dt.sqrt())
    } else {
        let decay = (-k * dt).exp();
        (decay, model.gamma * (-(-2.0 * k * dt).exp_m1() / (2.0 * k)).sqrt())
    };
    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    let mut x = model.draw_initial(rng);
    times.push(0.0);
    values.push(x);
    for i in 1..=steps {
        let n: f64 = rng.sample(StandardNormal);
        x = x * decay + scale * n;
        times.push(i as f64 * dt);
        values.push(x);
    }
    Ok(NoisePath { times, values, seed })
}
