//! The non-commuting case `H = ασ₁`, `S = σ₂`.
//!
//! The Pauli algebra closes the observables `V` (fidelity plus nine
//! quadratic overlaps) into a ten-dimensional linear system
//! `dV = A_c V dt + (γ²/2)B²V dt + BV dX`. Because `[A_c, B] ≠ 0` it has no
//! pathwise closed form; in the interaction picture `U = e^{−A_c t}V` the
//! first-order stochastic Magnus expansion gives the white-noise mean, and a
//! second-order series expansion gives a crude Ornstein-Uhlenbeck estimate.
//!
//! Everything below works in rescaled time `α = 1`; general `α` maps to it
//! through `F_{α,γ,k}(t) = F_{1,γ/√α,k/α}(αt)`.

use num_complex::Complex64;
use thiserror::Error;

use crate::noise::{NoiseKind, NoiseModel};
use crate::qstate::{commutator, expect_value, mat_exp, ComplexMatrix, PauliAxis, PureState, QStateError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MagnusError {
    #[error("Hamiltonian strength must be positive and finite, got {0}")]
    BadAlpha(f64),
    #[error("noise intensity must be finite and non-negative, got {0}")]
    BadGamma(f64),
    #[error("H and S must be different Pauli axes")]
    SameAxis,
    #[error("initial state must be a single qubit")]
    NotQubit,
    #[error("Bloch vector has squared length {0}, expected 1")]
    NotPure(f64),
    #[error("the second-order expansion is for Ornstein-Uhlenbeck noise")]
    NotOrnsteinUhlenbeck,
    #[error(transparent)]
    QState(#[from] QStateError),
}

/// `ε² = γ²/α` at or above this value makes the expansion unreliable.
pub const EPSILON_SQ_WARN: f64 = 0.5;

/// Simpson intervals for the second-order OU integrals.
pub const OU_QUADRATURE_INTERVALS: usize = 400;

const DIM: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct NonCommutingSystem {
    pub alpha: f64,
    pub gamma: f64,
    pub h_axis: PauliAxis,
    pub s_axis: PauliAxis,
    /// `C_i = φ₀†σ_iφ₀` with `σ₃ = [σ₁, σ₂]/(2i)`.
    pub c: [f64; 3],
}

impl NonCommutingSystem {
    pub fn new(
        alpha: f64,
        gamma: f64,
        h_axis: PauliAxis,
        s_axis: PauliAxis,
        phi0: &PureState,
    ) -> Result<Self, MagnusError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(MagnusError::BadAlpha(alpha));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(MagnusError::BadGamma(gamma));
        }
        if h_axis == s_axis {
            return Err(MagnusError::SameAxis);
        }
        if phi0.dim() != 2 {
            return Err(MagnusError::NotQubit);
        }
        let [s1, s2, s3] = sigma_triple(h_axis, s_axis)?;
        let c = [
            expect_value(&s1, phi0)?.re,
            expect_value(&s2, phi0)?.re,
            expect_value(&s3, phi0)?.re,
        ];
        let len2: f64 = c.iter().map(|x| x * x).sum();
        if (len2 - 1.0).abs() > 1e-10 {
            return Err(MagnusError::NotPure(len2));
        }
        let sys = Self {
            alpha,
            gamma,
            h_axis,
            s_axis,
            c,
        };
        if sys.epsilon_sq() >= EPSILON_SQ_WARN {
            log::warn!(
                "ε² = γ²/α = {} is not small; the Magnus mean is unreliable",
                sys.epsilon_sq()
            );
        }
        Ok(sys)
    }

    pub fn epsilon_sq(&self) -> f64 {
        self.gamma * self.gamma / self.alpha
    }

    /// `H = ασ₁` and `S = σ₂`.
    pub fn operators(&self) -> (ComplexMatrix, ComplexMatrix) {
        (self.h_axis.matrix().scale_real(self.alpha), self.s_axis.matrix())
    }

    /// Noise intensity after rescaling to `α = 1`.
    fn scaled_gamma(&self) -> f64 {
        self.gamma / self.alpha.sqrt()
    }
}

/// `(σ₁, σ₂, σ₃)` with `σ₃ = [σ₁, σ₂]/(2i)`, which is ± the remaining axis.
pub fn sigma_triple(h_axis: PauliAxis, s_axis: PauliAxis) -> Result<[ComplexMatrix; 3], MagnusError> {
    let s1 = h_axis.matrix();
    let s2 = s_axis.matrix();
    let s3 = commutator(&s1, &s2, false)?.scale(Complex64::new(0.0, -0.5));
    Ok([s1, s2, s3])
}

/// The matrices and initial vector of the ten-dimensional system.
#[derive(Debug, Clone, PartialEq)]
pub struct TenSystem {
    pub a_c: ComplexMatrix,
    pub b: ComplexMatrix,
    pub v0: Vec<Complex64>,
}

fn from_entries(entries: &[(usize, usize, f64)]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(DIM);
    for &(i, j, v) in entries {
        m[(i, j)] = Complex64::new(v, 0.0);
    }
    m
}

/// Commutator part `A_c` (zero-based indices).
pub fn commutator_matrix() -> ComplexMatrix {
    from_entries(&[
        (2, 9, -2.0),
        (3, 9, 2.0),
        (5, 6, -2.0),
        (6, 5, 2.0),
        (7, 8, -2.0),
        (8, 7, 2.0),
        (9, 2, 4.0),
        (9, 3, -4.0),
    ])
}

/// Noise coupling `B` (zero-based indices).
pub fn noise_matrix() -> ComplexMatrix {
    from_entries(&[
        (0, 5, -1.0),
        (1, 8, 1.0),
        (2, 5, 1.0),
        (3, 8, -1.0),
        (4, 6, 1.0),
        (4, 7, -1.0),
        (5, 0, 2.0),
        (5, 2, -2.0),
        (6, 4, -1.0),
        (6, 9, -1.0),
        (7, 4, 1.0),
        (7, 9, 1.0),
        (8, 1, -2.0),
        (8, 3, 2.0),
        (9, 6, 1.0),
        (9, 7, -1.0),
    ])
}

pub fn build_system(sys: &NonCommutingSystem) -> TenSystem {
    let [c1, c2, c3] = sys.c;
    let v0 = [
        1.0,
        c1 * c1,
        c2 * c2,
        c3 * c3,
        0.0,
        0.0,
        0.0,
        2.0 * c1 * c2,
        2.0 * c1 * c3,
        2.0 * c2 * c3,
    ]
    .iter()
    .map(|&x| Complex64::new(x, 0.0))
    .collect();
    TenSystem {
        a_c: commutator_matrix(),
        b: noise_matrix(),
        v0,
    }
}

/// Interaction-picture coupling `D(t) = e^{−A_c t}Be^{A_c t}`, in the
/// closed form `cos(2t)B − ½sin(2t)[A_c, B]`.
#[derive(Debug, Clone)]
pub struct RotatingFrame {
    b: ComplexMatrix,
    comm: ComplexMatrix,
    b2: ComplexMatrix,
    comm2: ComplexMatrix,
    /// `B[A_c,B] + [A_c,B]B`.
    anti: ComplexMatrix,
}

impl RotatingFrame {
    pub fn new(ten: &TenSystem) -> Self {
        let comm = commutator(&ten.a_c, &ten.b, false).expect("fixed dimensions");
        let anti = commutator(&ten.b, &comm, true).expect("fixed dimensions");
        Self {
            b2: &ten.b * &ten.b,
            comm2: &comm * &comm,
            b: ten.b.clone(),
            comm,
            anti,
        }
    }

    pub fn d(&self, t: f64) -> ComplexMatrix {
        &self.b.scale_real((2.0 * t).cos()) - &self.comm.scale_real(0.5 * (2.0 * t).sin())
    }

    /// `∫₀ᵗ D²(s) ds` from the antiderivatives of `cos²2s`, `sin²2s` and
    /// `sin2s·cos2s`.
    pub fn integral_d2(&self, t: f64) -> ComplexMatrix {
        let s4 = (4.0 * t).sin();
        let icc = 0.5 * t + s4 / 8.0;
        let iss = 0.5 * t - s4 / 8.0;
        let isc = (1.0 - (4.0 * t).cos()) / 8.0;
        let m = &self.b2.scale_real(icc) + &self.comm2.scale_real(0.25 * iss);
        &m - &self.anti.scale_real(0.5 * isc)
    }
}

/// `rotating_frame_D` at `α = 1`.
pub fn rotating_frame_d(t: f64) -> ComplexMatrix {
    let ten = TenSystem {
        a_c: commutator_matrix(),
        b: noise_matrix(),
        v0: vec![],
    };
    RotatingFrame::new(&ten).d(t)
}

fn first(v: &[Complex64]) -> f64 {
    v[0].re
}

/// First-order Magnus mean fidelity under white noise:
/// `e^{A_c t}·exp((γ²/2)∫₀ᵗD²)·V₀`, first component.
pub fn wn_mean_fidelity(sys: &NonCommutingSystem, t: f64) -> Result<f64, MagnusError> {
    let ten = build_system(sys);
    let frame = RotatingFrame::new(&ten);
    let (g, tau) = (sys.scaled_gamma(), sys.alpha * t);
    let m = frame.integral_d2(tau).scale_real(0.5 * g * g);
    let u = mat_exp(&m)?.apply(&ten.v0)?;
    let v = mat_exp(&ten.a_c.scale_real(tau))?.apply(&u)?;
    Ok(first(&v))
}

/// Exact white-noise mean from the averaged linear system
/// `dE[V] = (A_c + (γ²/2)B²)E[V] dt`.
pub fn wn_exact_mean_fidelity(sys: &NonCommutingSystem, t: f64) -> Result<f64, MagnusError> {
    let ten = build_system(sys);
    let (g, tau) = (sys.scaled_gamma(), sys.alpha * t);
    let gen = &ten.a_c + &(&ten.b * &ten.b).scale_real(0.5 * g * g);
    Ok(first(&mat_exp(&gen.scale_real(tau))?.apply(&ten.v0)?))
}

/// Result of the second-order Ornstein-Uhlenbeck expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxMean {
    pub value: f64,
    /// Set when the value is outside `[0, 1]`.
    pub nonphysical: bool,
}

fn simpson_weights(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| match i {
            0 => 1.0,
            i if i == n => 1.0,
            i if i % 2 == 1 => 4.0,
            _ => 2.0,
        })
        .collect()
}

/// `∫₀ˢ e^{κs'}cos(2s')ds'` and `∫₀ˢ e^{κs'}sin(2s')ds'`.
fn damped_trig_integrals(kappa: f64, s: f64) -> (f64, f64) {
    let den = kappa * kappa + 4.0;
    let e = (kappa * s).exp();
    let (sn, cs) = (2.0 * s).sin_cos();
    let ic = (e * (kappa * cs + 2.0 * sn) - kappa) / den;
    let is = (e * (kappa * sn - 2.0 * cs) + 2.0) / den;
    (ic, is)
}

/// Second-order expansion of `E[U_t]` for Ornstein-Uhlenbeck noise:
///
/// `I + (γ²/2)∫D² − (γ²/2)k∫{e^{−ks}D(s), ∫₀ˢe^{ks'}D} ds
///  + (γ²/4)k∫{e^{−2ks}D(s), ∫₀ˢe^{2ks'}D} ds`.
///
/// The inner integrals are elementary; the outer ones use composite Simpson
/// with [`OU_QUADRATURE_INTERVALS`] intervals. The result may leave `[0, 1]`.
pub fn ou_second_order_mean(sys: &NonCommutingSystem, model: &NoiseModel, t: f64) -> Result<ApproxMean, MagnusError> {
    if model.kind != NoiseKind::OrnsteinUhlenbeck {
        return Err(MagnusError::NotOrnsteinUhlenbeck);
    }
    let ten = build_system(sys);
    let frame = RotatingFrame::new(&ten);
    let g = model.gamma / sys.alpha.sqrt();
    let k = model.k / sys.alpha;
    let tau = sys.alpha * t;
    let g2 = g * g;

    let mut u = ComplexMatrix::identity(DIM);
    u = &u + &frame.integral_d2(tau).scale_real(0.5 * g2);

    if k > 0.0 && tau > 0.0 {
        let n = OU_QUADRATURE_INTERVALS;
        let h = tau / n as f64;
        let w = simpson_weights(n);
        // Anticommutator {D(s), cB − ½sC} expanded in the fixed matrices.
        let bb = &frame.b2.scale_real(2.0);
        let cc = &frame.comm2.scale_real(2.0);
        let bc = &frame.anti;
        let mut acc = [0.0f64; 3]; // coefficients of {B,B}, {C,C}, {B,C}
        for (i, wi) in w.iter().enumerate() {
            let s = i as f64 * h;
            let (sn, cs) = (2.0 * s).sin_cos();
            for (kappa, pref) in [(k, -0.5 * g2 * k), (2.0 * k, 0.25 * g2 * k)] {
                let (ic, is) = damped_trig_integrals(kappa, s);
                let e = (-kappa * s).exp() * pref * wi * h / 3.0;
                // D(s) = cs·B − ½sn·C, inner = ic·B − ½is·C.
                acc[0] += e * cs * ic;
                acc[1] += e * 0.25 * sn * is;
                acc[2] += e * -0.5 * (cs * is + sn * ic);
            }
        }
        let corr = &(&bb.scale_real(acc[0]) + &cc.scale_real(acc[1])) + &bc.scale_real(acc[2]);
        u = &u + &corr;
    }
    let v = mat_exp(&ten.a_c.scale_real(tau))?.apply(&u.apply(&ten.v0)?)?;
    let value = first(&v);
    Ok(ApproxMean {
        value,
        nonphysical: !(0.0..=1.0).contains(&value),
    })
}
