//! Closed-form pathwise fidelity laws.
//!
//! When `[H, S] = 0` the fidelity at time `t` is a deterministic function of
//! the noise increment `ΔX = X_t − X₀` alone, and in every solved case that
//! function is a finite cosine polynomial `Σ c_m cos(m·ΔX)`. Because `ΔX` is
//! Gaussian, moments of such a series are exact: `E[cos(mΔX)]` is a
//! characteristic-function value and squaring a series is a discrete
//! convolution of harmonics.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::noise::{expected_cos, NoiseModel};
use crate::qstate::{self, expect_value, mat_exp, ComplexMatrix, PureState, QStateError, ZERO};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LawError {
    #[error("parameter {name}={value} outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("law leaves [0, 1]: value {value} at ΔX = {at}")]
    InvalidLaw { value: f64, at: f64 },
    #[error("matrix B is not diagonalizable")]
    NotDiagonalizable,
    #[error("drift is not compatible with the diagonalization method: {0}")]
    IncompatibleDrift(&'static str),
    #[error("stored S₀ {stored} differs from recomputed {recomputed}")]
    S0Mismatch { stored: f64, recomputed: f64 },
    #[error(transparent)]
    QState(#[from] QStateError),
}

/// Number of grid points used when scanning a law for validity.
pub const VALIDITY_GRID: usize = 10_000;
const VALIDITY_TOL: f64 = 1e-12;

/// Finite cosine series `Σ_m c_m cos(m x)` with distinct, sorted harmonics.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CosineSeries {
    terms: Vec<(u32, f64)>,
}

impl CosineSeries {
    /// Merges repeated harmonics and drops exact zeros.
    pub fn new(terms: impl IntoIterator<Item = (u32, f64)>) -> Self {
        let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
        for (m, c) in terms {
            *acc.entry(m).or_insert(0.0) += c;
        }
        Self {
            terms: acc.into_iter().filter(|&(_, c)| c != 0.0).collect(),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new([(0, c)])
    }

    pub fn terms(&self) -> &[(u32, f64)] {
        &self.terms
    }

    pub fn coefficient(&self, harmonic: u32) -> f64 {
        self.terms.iter().find(|(m, _)| *m == harmonic).map_or(0.0, |&(_, c)| c)
    }

    pub fn max_harmonic(&self) -> u32 {
        self.terms.last().map_or(0, |&(m, _)| m)
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        self.terms.iter().map(|&(m, c)| c * (m as f64 * x).cos()).sum()
    }

    /// Product expanded back into harmonics with
    /// `cos(ma)cos(na) = ½[cos((m+n)a) + cos(|m−n|a)]`.
    pub fn product(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(2 * self.terms.len() * other.terms.len());
        for &(m, a) in &self.terms {
            for &(n, b) in &other.terms {
                out.push((m + n, 0.5 * a * b));
                out.push((m.abs_diff(n), 0.5 * a * b));
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.terms.iter().map(|&(m, c)| (m, c * s)))
    }

    pub fn sum(&self, other: &Self) -> Self {
        Self::new(self.terms.iter().chain(&other.terms).copied())
    }

    /// `Σ_n p_n cos^n(h·x)`.
    pub fn from_cos_polynomial(coeffs: &[f64], harmonic: u32) -> Self {
        let base = Self::new([(harmonic, 1.0)]);
        let mut power = Self::constant(1.0);
        let mut out = Self::default();
        for (n, &p) in coeffs.iter().enumerate() {
            if n > 0 {
                power = power.product(&base);
            }
            out = out.sum(&power.scale(p));
        }
        out
    }

    /// Minimum and maximum over an `n`-point grid on one period `[0, 2π]`.
    pub fn grid_range(&self, n: usize) -> ((f64, f64), (f64, f64)) {
        let mut lo = (f64::INFINITY, 0.0);
        let mut hi = (f64::NEG_INFINITY, 0.0);
        for i in 0..n {
            let x = 2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64;
            let v = self.evaluate(x);
            if v < lo.0 {
                lo = (v, x);
            }
            if v > hi.0 {
                hi = (v, x);
            }
        }
        (lo, hi)
    }

    /// Errors when the series leaves `[0, 1]` on the validity grid.
    pub fn check_fidelity_range(&self) -> Result<(), LawError> {
        let ((lo, at_lo), (hi, at_hi)) = self.grid_range(VALIDITY_GRID);
        if lo < -VALIDITY_TOL {
            return Err(LawError::InvalidLaw { value: lo, at: at_lo });
        }
        if hi > 1.0 + VALIDITY_TOL {
            return Err(LawError::InvalidLaw { value: hi, at: at_hi });
        }
        Ok(())
    }
}

/// Accepts values within rounding of the interval and clamps them into it.
fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<f64, LawError> {
    if !(lo - VALIDITY_TOL..=hi + VALIDITY_TOL).contains(&value) {
        return Err(LawError::OutOfRange { name, value, lo, hi });
    }
    Ok(value.clamp(lo, hi))
}

/// `F = cos²ΔX + S₀² sin²ΔX = ½(1+S₀²) + ½(1−S₀²)cos 2ΔX`.
pub fn pauli_law(s0: f64) -> Result<CosineSeries, LawError> {
    let s0 = check_range("s0", s0, -1.0, 1.0)?;
    let s2 = s0 * s0;
    Ok(CosineSeries::new([(0, 0.5 * (1.0 + s2)), (2, 0.5 * (1.0 - s2))]))
}

/// `F = 1 − 2(1−S₀²)S₀²(1 − cos ΔX)`.
///
/// The parameter enters only through `S₀²`, which for a projector `S` is the
/// population `φ₀†Sφ₀`; see [`projection_s0`].
pub fn projection_law(s0: f64) -> Result<CosineSeries, LawError> {
    let s0 = check_range("s0", s0, -1.0, 1.0)?;
    let amp = 2.0 * (1.0 - s0 * s0) * s0 * s0;
    Ok(CosineSeries::new([(0, 1.0 - amp), (1, amp)]))
}

/// Law parameter for projection noise: `‖Sφ₀‖ = √(φ₀†Sφ₀)`.
pub fn projection_s0(s: &ComplexMatrix, phi0: &PureState) -> Result<f64, LawError> {
    Ok(expect_value(s, phi0)?.re.clamp(0.0, 1.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseClass {
    /// `S² = I`.
    Pauli,
    /// `S² = S`.
    Projection,
}

/// Two-qubit law for `S = Q⊗I + I⊗Q` in terms of `S₀ = ⟨S⟩` and
/// `R₀ = ⟨Q⊗Q⟩`.
pub fn two_qubit_law(s0: f64, r0: f64, class: NoiseClass) -> Result<CosineSeries, LawError> {
    let s0 = check_range("s0", s0, -2.0, 2.0)?;
    let r0 = check_range("r0", r0, -1.0, 1.0)?;
    let series = match class {
        NoiseClass::Pauli => {
            // ¼[S₀² + (R₀−1)² + 2(1−R₀²)c + (1−S₀+R₀)(1+S₀+R₀)c²], c = cos 2ΔX.
            let p = (1.0 - s0 + r0) * (1.0 + s0 + r0);
            CosineSeries::from_cos_polynomial(
                &[0.25 * (s0 * s0 + (r0 - 1.0).powi(2)), 0.5 * (1.0 - r0 * r0), 0.25 * p],
                2,
            )
        }
        NoiseClass::Projection => {
            // 1 − 2u[(S₀²−S₀−2R₀) + 2R₀(S₀−R₀−1)u], u = cos ΔX − 1.
            let a1 = s0 * s0 - s0 - 2.0 * r0;
            let a2 = 2.0 * r0 * (s0 - r0 - 1.0);
            CosineSeries::from_cos_polynomial(&[1.0 + 2.0 * a1 - 2.0 * a2, -2.0 * a1 + 4.0 * a2, -2.0 * a2], 1)
        }
    };
    series.check_fidelity_range()?;
    Ok(series)
}

/// Pointwise product of single-system laws driven by the same `ΔX`.
pub fn product_law(laws: &[CosineSeries]) -> CosineSeries {
    laws.iter().fold(CosineSeries::constant(1.0), |acc, l| acc.product(l))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanVariance {
    pub mean: f64,
    pub variance: f64,
}

/// Exact mean and variance of `F = law(ΔX)` at time `t`.
pub fn series_mean_variance(law: &CosineSeries, model: &NoiseModel, t: f64) -> MeanVariance {
    let expect = |s: &CosineSeries| -> f64 {
        s.terms()
            .iter()
            .map(|&(m, c)| c * expected_cos(m as f64, model, t))
            .sum()
    };
    let mean = expect(law);
    let second = expect(&law.product(law));
    MeanVariance {
        mean,
        variance: (second - mean * mean).max(0.0),
    }
}

/// Direct samples of `F` at time `t`: draws `ΔX` from its Gaussian law and
/// evaluates the series. No path integration.
pub fn sample_distribution<R: Rng + ?Sized>(
    law: &CosineSeries,
    model: &NoiseModel,
    t: f64,
    n: usize,
    rng: &mut R,
) -> Vec<f64> {
    let sd = model.increment_variance(t.max(0.0)).sqrt();
    (0..n)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            law.evaluate(sd * z)
        })
        .collect()
}

/// Exact pathwise fidelity `|φ₀† e^{−iSΔX} φ₀|²` for commuting `H` and `S`,
/// by direct matrix exponentiation.
pub fn commuting_pathwise_fidelity(s: &ComplexMatrix, phi0: &PureState, dx: f64) -> Result<f64, LawError> {
    let u = mat_exp(&s.scale(Complex64::new(0.0, -dx)))?;
    let psi = u.apply(phi0.amplitudes())?;
    Ok(phi0
        .amplitudes()
        .iter()
        .zip(&psi)
        .map(|(a, b)| a.conj() * b)
        .sum::<Complex64>()
        .norm_sqr())
}

/// A fidelity law together with the initial-state data it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioLaw {
    pub series: CosineSeries,
    pub s0: f64,
    pub r0: Option<f64>,
    pub class: NoiseClass,
    pub model: NoiseModel,
}

impl ScenarioLaw {
    /// Single-qubit law for noise operator `s` and initial state `phi0`.
    pub fn single(s: &ComplexMatrix, phi0: &PureState, class: NoiseClass, model: NoiseModel) -> Result<Self, LawError> {
        let s0 = Self::recompute_s0(s, phi0, class)?;
        let series = match class {
            NoiseClass::Pauli => pauli_law(s0)?,
            NoiseClass::Projection => projection_law(s0)?,
        };
        Ok(Self {
            series,
            s0,
            r0: None,
            class,
            model,
        })
    }

    /// Two-qubit law for `S = Q⊗I + I⊗Q` with single-qubit `q`.
    pub fn two_qubit(
        q: &ComplexMatrix,
        phi0: &PureState,
        class: NoiseClass,
        model: NoiseModel,
    ) -> Result<Self, LawError> {
        let id = ComplexMatrix::identity(2);
        let s = q.kron(&id).checked_add(&id.kron(q))?;
        let r = q.kron(q);
        let s0 = expect_value(&s, phi0)?.re;
        let r0 = expect_value(&r, phi0)?.re;
        let series = two_qubit_law(s0, r0, class)?;
        Ok(Self {
            series,
            s0,
            r0: Some(r0),
            class,
            model,
        })
    }

    fn recompute_s0(s: &ComplexMatrix, phi0: &PureState, class: NoiseClass) -> Result<f64, LawError> {
        match class {
            NoiseClass::Pauli => Ok(expect_value(s, phi0)?.re),
            NoiseClass::Projection => projection_s0(s, phi0),
        }
    }

    /// Checks the stored `S₀` against the inputs (single-qubit laws).
    pub fn verify_s0(&self, s: &ComplexMatrix, phi0: &PureState) -> Result<(), LawError> {
        let recomputed = Self::recompute_s0(s, phi0, self.class)?;
        if (recomputed - self.s0).abs() > 1e-12 {
            return Err(LawError::S0Mismatch {
                stored: self.s0,
                recomputed,
            });
        }
        Ok(())
    }

    pub fn mean_variance(&self, t: f64) -> MeanVariance {
        series_mean_variance(&self.series, &self.model, t)
    }

    pub fn export(&self) -> LawExport {
        LawExport {
            harmonics: self.series.terms().iter().map(|&(m, c)| (m, c)).collect(),
            s0: self.s0,
            r0: self.r0,
            model: self.model,
        }
    }
}

/// JSON form of a law: `{harmonics: [[m, c_m]...], s0, r0, model}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawExport {
    pub harmonics: Vec<(u32, f64)>,
    pub s0: f64,
    pub r0: Option<f64>,
    pub model: NoiseModel,
}

impl LawExport {
    pub fn series(&self) -> CosineSeries {
        CosineSeries::new(self.harmonics.iter().copied())
    }
}

/// Affine linear SDE system `dV = AV dt + BV dX + a dt + b dX`.
#[derive(Debug, Clone)]
pub struct OdeSystem {
    pub a_mat: ComplexMatrix,
    pub b_mat: ComplexMatrix,
    pub a_vec: Vec<Complex64>,
    pub b_vec: Vec<Complex64>,
    pub v0: Vec<Complex64>,
    pub gamma: f64,
}

fn real_vec(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

impl OdeSystem {
    /// Pauli noise, `V = (F, |φ†Sψ|², i(φ†Sψψ†φ − φ†ψψ†Sφ))`.
    pub fn pauli(gamma: f64, s0: f64) -> Self {
        let g2 = gamma * gamma;
        Self {
            a_mat: ComplexMatrix::from_real_rows(&[[-g2, g2, 0.0], [g2, -g2, 0.0], [0.0, 0.0, -2.0 * g2]]),
            b_mat: ComplexMatrix::from_real_rows(&[[0.0, 0.0, -1.0], [0.0, 0.0, 1.0], [2.0, -2.0, 0.0]]),
            a_vec: vec![ZERO; 3],
            b_vec: vec![ZERO; 3],
            v0: real_vec(&[1.0, s0 * s0, 0.0]),
            gamma,
        }
    }

    /// Projection noise with population `p = φ₀†Sφ₀`,
    /// `V = (F, φ†Sψψ†φ + φ†ψψ†Sφ, i(φ†Sψψ†φ − φ†ψψ†Sφ))`.
    pub fn projection(gamma: f64, p: f64) -> Self {
        let g2 = gamma * gamma;
        let h = -0.5 * g2;
        Self {
            a_mat: ComplexMatrix::from_real_rows(&[[0.0, h, 0.0], [0.0, h, 0.0], [0.0, 0.0, h]]),
            b_mat: ComplexMatrix::from_real_rows(&[[0.0, 0.0, -1.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]]),
            a_vec: real_vec(&[g2 * p * p, g2 * p * p, 0.0]),
            b_vec: real_vec(&[0.0, 0.0, -2.0 * p * p]),
            v0: real_vec(&[1.0, 2.0 * p, 0.0]),
            gamma,
        }
    }
}

/// Closed-form solution `V(ΔX) = P(exp(ΛΔX)(Z₀ − c) + c)`.
#[derive(Debug, Clone)]
pub struct PathwiseSolution {
    p: ComplexMatrix,
    eigenvalues: Vec<Complex64>,
    z0_minus_c: Vec<Complex64>,
    c: Vec<Complex64>,
}

impl PathwiseSolution {
    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn evaluate(&self, dx: f64) -> Vec<Complex64> {
        let z: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .zip(self.z0_minus_c.iter().zip(&self.c))
            .map(|(l, (d, c))| (l * dx).exp() * d + c)
            .collect();
        self.p.apply(&z).expect("dimension fixed at construction")
    }

    /// First component, the fidelity.
    pub fn fidelity(&self, dx: f64) -> f64 {
        self.evaluate(dx)[0].re
    }
}

fn to_nalgebra(m: &ComplexMatrix) -> DMatrix<Complex64> {
    let n = m.dim();
    DMatrix::from_fn(n, n, |i, j| m[(i, j)])
}

/// Eigen-decomposition `B = PΛP⁻¹` with multiplicities handled by null-space
/// extraction; defective matrices are rejected.
fn diagonalize(b: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<Complex64>), LawError> {
    let n = b.dim();
    let scale = b.norm_one().max(1.0);
    let nb = to_nalgebra(b);
    let eig = nb.clone().schur().eigenvalues().ok_or(LawError::NotDiagonalizable)?;

    // Cluster numerically equal eigenvalues.
    let cluster_tol = 1e-7 * scale;
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for &l in eig.iter() {
        match clusters.iter_mut().find(|(c, _)| (c - l).norm() < cluster_tol) {
            Some(entry) => entry.1 += 1,
            None => clusters.push((l, 1)),
        }
    }

    let mut p = ComplexMatrix::zeros(n);
    let mut lambdas = Vec::with_capacity(n);
    let mut col = 0;
    for (lambda, mult) in clusters {
        let shifted = &nb - DMatrix::<Complex64>::identity(n, n) * lambda;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.ok_or(LawError::NotDiagonalizable)?;
        let null_tol = 1e-8 * scale;
        let null_dirs: Vec<usize> = (0..n).filter(|&i| svd.singular_values[i] < null_tol).collect();
        if null_dirs.len() < mult {
            return Err(LawError::NotDiagonalizable);
        }
        for &r in null_dirs.iter().take(mult) {
            for i in 0..n {
                p[(i, col)] = v_t[(r, i)].conj();
            }
            lambdas.push(lambda);
            col += 1;
        }
    }
    Ok((p, lambdas))
}

/// Solves the affine system pathwise when `A = (γ²/2)B²`, `B` is
/// diagonalizable, and the affine parts admit a fixed point `c` with
/// `Bc = −b`, `Ac = −a`. Then `V − c = exp(BΔX)(V₀ − c)` for any driver with
/// quadratic variation `γ²t`.
pub fn diagonalized_solve(sys: &OdeSystem) -> Result<PathwiseSolution, LawError> {
    let n = sys.b_mat.dim();
    let scale = sys.b_mat.norm_one().max(1.0);
    let b2 = &sys.b_mat * &sys.b_mat;
    let g2h = 0.5 * sys.gamma * sys.gamma;
    if sys.a_mat.max_abs_diff(&b2.scale_real(g2h)) > 1e-12 * scale * scale.max(g2h) {
        return Err(LawError::IncompatibleDrift("A ≠ (γ²/2)B²"));
    }
    let (p, lambdas) = diagonalize(&sys.b_mat)?;
    let p_inv = p.inverse().ok_or(LawError::NotDiagonalizable)?;
    if (&(&p * &ComplexMatrix::from_diagonal(&lambdas)) * &p_inv).max_abs_diff(&sys.b_mat) > 1e-9 * scale {
        return Err(LawError::NotDiagonalizable);
    }
    let z0 = p_inv.apply(&sys.v0)?;
    let beta = p_inv.apply(&sys.b_vec)?;
    let alpha = p_inv.apply(&sys.a_vec)?;

    let tol = 1e-10 * scale.max(1.0);
    let mut c = vec![ZERO; n];
    for j in 0..n {
        let l = lambdas[j];
        if l.norm() < 1e-9 * scale {
            if beta[j].norm() > tol || alpha[j].norm() > tol {
                return Err(LawError::IncompatibleDrift("affine term along the kernel of B"));
            }
        } else {
            c[j] = -beta[j] / l;
            if (alpha[j] - l * beta[j] * g2h).norm() > tol {
                return Err(LawError::IncompatibleDrift("a ≠ (γ²/2)Bb"));
            }
        }
    }
    let z0_minus_c = z0.iter().zip(&c).map(|(z, c)| z - c).collect();
    Ok(PathwiseSolution {
        p,
        eigenvalues: lambdas,
        z0_minus_c,
        c,
    })
}

/// Convenience used by tests and the runner: `⟨S⟩` for a state.
pub fn population(s: &ComplexMatrix, phi0: &PureState) -> Result<f64, LawError> {
    Ok(qstate::expect_value(s, phi0)?.re)
}
