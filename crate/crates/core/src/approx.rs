//! Moment-closure approximations for Pauli noise driven by an
//! Ornstein-Uhlenbeck process.
//!
//! Products with powers of `X_t` are decoupled through
//! `E[X_t²V] ≈ E[X_t²]E[V]`, which turns the moment hierarchy into a finite
//! time-dependent linear ODE. Order one keeps three moments, order two six.
//! The matrices carry imaginary entries while the fidelity is real, so the
//! system is integrated in complex arithmetic and the imaginary part of the
//! fidelity component is reported as a diagnostic.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qstate::ComplexMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ApproxError {
    #[error("time step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("horizon must be non-negative and finite, got {0}")]
    BadHorizon(f64),
    #[error("noise parameters must be finite and non-negative (γ={gamma}, k={k})")]
    BadParameters { gamma: f64, k: f64 },
}

/// Default RK4 step.
pub const DEFAULT_DT: f64 = 1e-3;

/// `E[X_t²] = γ²(1 − e^{−2kt})/(2k)` for calibrated data, `γ²t` at `k = 0`.
pub fn mean_square(t: f64, gamma: f64, k: f64) -> f64 {
    if k == 0.0 {
        gamma * gamma * t
    } else {
        -gamma * gamma * (-2.0 * k * t).exp_m1() / (2.0 * k)
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn matrix<const N: usize>(rows: [[Complex64; N]; N]) -> ComplexMatrix {
    ComplexMatrix::from_row_major(N, rows.iter().flatten().copied().collect()).expect("square by construction")
}

/// Three-moment closure, `p = kE[X_t²] − γ²`.
pub fn first_order_matrix(t: f64, gamma: f64, k: f64) -> ComplexMatrix {
    let g2 = gamma * gamma;
    let p = k * mean_square(t, gamma, k) - g2;
    matrix([
        [c(-g2, 0.0), c(g2, 0.0), c(0.0, k)],
        [c(g2, 0.0), c(-g2, 0.0), c(0.0, -k)],
        [c(0.0, 2.0 * p), c(0.0, -2.0 * p), c(-k - 2.0 * g2, 0.0)],
    ])
}

/// Six-moment closure.
pub fn second_order_matrix(t: f64, gamma: f64, k: f64) -> ComplexMatrix {
    let g2 = gamma * gamma;
    let q = k * mean_square(t, gamma, k) - 2.0 * g2;
    let z = c(0.0, 0.0);
    matrix([
        [c(-g2, 0.0), c(g2, 0.0), c(0.0, k), z, z, z],
        [c(g2, 0.0), c(-g2, 0.0), c(0.0, -k), z, z, z],
        [
            c(0.0, -2.0 * g2),
            c(0.0, 2.0 * g2),
            c(-(k + 2.0 * g2), 0.0),
            c(0.0, 2.0 * k),
            c(0.0, -2.0 * k),
            z,
        ],
        [
            c(g2, 0.0),
            z,
            c(0.0, -2.0 * g2),
            c(-(2.0 * k + g2), 0.0),
            c(g2, 0.0),
            c(0.0, k),
        ],
        [
            z,
            c(g2, 0.0),
            c(0.0, 2.0 * g2),
            c(g2, 0.0),
            c(-(2.0 * k + g2), 0.0),
            c(0.0, -k),
        ],
        [
            z,
            z,
            c(2.0 * g2, 0.0),
            c(0.0, 2.0 * q),
            c(0.0, -2.0 * q),
            c(-(3.0 * k + 2.0 * g2), 0.0),
        ],
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClosureOrder {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosureSystem {
    pub order: ClosureOrder,
    pub gamma: f64,
    pub k: f64,
    pub s0: f64,
}

impl ClosureSystem {
    pub fn new(order: ClosureOrder, gamma: f64, k: f64, s0: f64) -> Result<Self, ApproxError> {
        if !(gamma.is_finite() && gamma >= 0.0 && k.is_finite() && k >= 0.0) {
            return Err(ApproxError::BadParameters { gamma, k });
        }
        Ok(Self { order, gamma, k, s0 })
    }

    pub fn matrix(&self, t: f64) -> ComplexMatrix {
        match self.order {
            ClosureOrder::First => first_order_matrix(t, self.gamma, self.k),
            ClosureOrder::Second => second_order_matrix(t, self.gamma, self.k),
        }
    }

    pub fn v0(&self) -> Vec<Complex64> {
        let n = match self.order {
            ClosureOrder::First => 3,
            ClosureOrder::Second => 6,
        };
        let mut v = vec![c(0.0, 0.0); n];
        v[0] = c(1.0, 0.0);
        v[1] = c(self.s0 * self.s0, 0.0);
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosureSolution {
    pub times: Vec<f64>,
    /// Real part of the fidelity component.
    pub fidelity: Vec<f64>,
    /// Largest `|Im F|` encountered.
    pub max_imag_residue: f64,
}

impl ClosureSolution {
    /// First recorded time at which the fidelity leaves `[lo, hi]`.
    pub fn first_exit(&self, lo: f64, hi: f64) -> Option<f64> {
        self.times
            .iter()
            .zip(&self.fidelity)
            .find(|(_, &f)| !(lo..=hi).contains(&f))
            .map(|(&t, _)| t)
    }
}

fn axpy(y: &[Complex64], a: f64, x: &[Complex64]) -> Vec<Complex64> {
    y.iter().zip(x).map(|(yi, xi)| yi + xi * a).collect()
}

/// Classical fourth-order Runge-Kutta on `V' = M(t)V` up to `horizon`,
/// recording every `record_every` steps and at the end.
pub fn integrate_closure(
    sys: &ClosureSystem,
    horizon: f64,
    dt: f64,
    record_every: usize,
) -> Result<ClosureSolution, ApproxError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(ApproxError::BadStep(dt));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(ApproxError::BadHorizon(horizon));
    }
    let steps = (horizon / dt).round() as usize;
    let every = record_every.max(1);
    let mut v = sys.v0();
    let mut out = ClosureSolution {
        times: vec![0.0],
        fidelity: vec![v[0].re],
        max_imag_residue: v[0].im.abs(),
    };
    let f = |t: f64, v: &[Complex64]| sys.matrix(t).apply(v).expect("fixed dimension");
    for i in 0..steps {
        let t = i as f64 * dt;
        let k1 = f(t, &v);
        let k2 = f(t + 0.5 * dt, &axpy(&v, 0.5 * dt, &k1));
        let k3 = f(t + 0.5 * dt, &axpy(&v, 0.5 * dt, &k2));
        let k4 = f(t + dt, &axpy(&v, dt, &k3));
        for j in 0..v.len() {
            v[j] += (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (dt / 6.0);
        }
        out.max_imag_residue = out.max_imag_residue.max(v[0].im.abs());
        if (i + 1) % every == 0 || i + 1 == steps {
            out.times.push((i + 1) as f64 * dt);
            out.fidelity.push(v[0].re);
        }
    }
    Ok(out)
}
