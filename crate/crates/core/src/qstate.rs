//! Dense complex linear algebra for small quantum registers.
//!
//! Everything here is sized for at most four qubits (dimension 16) plus the
//! 10-component observable system, so matrices are stored densely in
//! row-major order and no attempt is made at sparsity.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Tolerance used for Hermiticity checks on unit-scale entries.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on the squared norm of a [`PureState`].
pub const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QStateError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("empty operator specification")]
    Empty,
    #[error("cannot parse operator `{0}`")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, QStateError>;

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row-major data; `data.len()` must be a square.
    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(QStateError::DimensionMismatch {
                left: dim * dim,
                right: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_rows<const N: usize>(rows: &[[f64; N]; N]) -> Self {
        let mut m = Self::zeros(N);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = Complex64::new(v, 0.0);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(j, i)] = self[(i, j)];
            }
        }
        m
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.dim).all(|i| (i..self.dim).all(|j| (self[(i, j)] - self[(j, i)].conj()).norm() <= tol))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self> {
        check_dims(self.dim, rhs.dim)?;
        Ok(self.mul_unchecked(rhs))
    }

    fn mul_unchecked(&self, rhs: &Self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let rrow = &rhs.data[k * n..(k + 1) * n];
                let orow = &mut out.data[i * n..(i + 1) * n];
                for (o, &b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self> {
        check_dims(self.dim, rhs.dim)?;
        Ok(Self {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self> {
        check_dims(self.dim, rhs.dim)?;
        Ok(Self {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        })
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let (n, m) = (self.dim, rhs.dim);
        let mut out = Self::zeros(n * m);
        for i in 0..n {
            for j in 0..n {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        out[(i * m + k, j * m + l)] = a * rhs[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// `out = self · v`.
    pub fn apply_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(v.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        check_dims(self.dim, v.len())?;
        let mut out = vec![ZERO; self.dim];
        self.apply_into(v, &mut out);
        Ok(out)
    }

    /// Solves `self · X = rhs` by LU decomposition with partial pivoting.
    /// Returns `None` when the matrix is numerically singular.
    pub fn solve(&self, rhs: &Self) -> Option<Self> {
        let n = self.dim;
        let mut lu = self.clone();
        let mut x = rhs.clone();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&a, &b| lu[(a, col)].norm().total_cmp(&lu[(b, col)].norm()))
                .unwrap();
            if lu[(pivot, col)].norm() < 1e-300 {
                return None;
            }
            if pivot != col {
                for j in 0..n {
                    lu.data.swap(pivot * n + j, col * n + j);
                    x.data.swap(pivot * n + j, col * n + j);
                }
            }
            let d = lu[(col, col)];
            for r in col + 1..n {
                let f = lu[(r, col)] / d;
                if f == ZERO {
                    continue;
                }
                for j in col..n {
                    let v = lu[(col, j)];
                    lu[(r, j)] -= f * v;
                }
                for j in 0..n {
                    let v = x[(col, j)];
                    x[(r, j)] -= f * v;
                }
            }
        }
        for col in (0..n).rev() {
            let d = lu[(col, col)];
            for j in 0..n {
                let mut s = x[(col, j)];
                for k in col + 1..n {
                    s -= lu[(col, k)] * x[(k, j)];
                }
                x[(col, j)] = s / d;
            }
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Self> {
        self.solve(&Self::identity(self.dim))
    }
}

fn check_dims(left: usize, right: usize) -> Result<()> {
    if left != right {
        Err(QStateError::DimensionMismatch { left, right })
    } else {
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

// Operator overloads panic on dimension mismatch; use the checked_* forms at
// API boundaries.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        self.checked_mul(rhs).expect("matrix dimension mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        self.checked_add(rhs).expect("matrix dimension mismatch")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        self.checked_sub(rhs).expect("matrix dimension mismatch")
    }
}

/// `AB − BA`, or `AB + BA` when `anti` is set.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix, anti: bool) -> Result<ComplexMatrix> {
    let ab = a.checked_mul(b)?;
    let ba = b.checked_mul(a)?;
    if anti {
        ab.checked_add(&ba)
    } else {
        ab.checked_sub(&ba)
    }
}

/// Normalized amplitude vector of an n-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: Vec<Complex64>,
}

impl PureState {
    /// Accepts amplitudes that are already normalized within [`NORM_TOL`].
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(QStateError::NotPowerOfTwo(amps.len()));
        }
        let n2: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if !n2.is_finite() {
            return Err(QStateError::NonFinite);
        }
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(QStateError::NotNormalized(n2));
        }
        Ok(Self { amps })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(mut amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(QStateError::NotPowerOfTwo(amps.len()));
        }
        let n = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !n.is_finite() || n == 0.0 {
            return Err(QStateError::NotNormalized(n * n));
        }
        for z in &mut amps {
            *z /= n;
        }
        Ok(Self { amps })
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if !dim.is_power_of_two() {
            return Err(QStateError::NotPowerOfTwo(dim));
        }
        if index >= dim {
            return Err(QStateError::DimensionMismatch {
                left: dim,
                right: index,
            });
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Self { amps })
    }

    /// `cos θ |0⟩ + sin θ |1⟩`.
    pub fn real_rotation(theta: f64) -> Self {
        Self {
            amps: vec![Complex64::new(theta.cos(), 0.0), Complex64::new(theta.sin(), 0.0)],
        }
    }

    /// `(|0…0⟩ + |1…1⟩)/√2` on `n` qubits.
    pub fn ghz(n: u32) -> Self {
        let dim = 1usize << n;
        let mut amps = vec![ZERO; dim];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        amps[0] = Complex64::new(h, 0.0);
        amps[dim - 1] = Complex64::new(h, 0.0);
        Self { amps }
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        check_dims(self.dim(), other.dim())?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }
}

/// `φ†Aφ`.
pub fn expect_value(a: &ComplexMatrix, phi: &PureState) -> Result<Complex64> {
    let av = a.apply(phi.amplitudes())?;
    Ok(phi.amplitudes().iter().zip(&av).map(|(p, q)| p.conj() * q).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub fn matrix(self) -> ComplexMatrix {
        match self {
            PauliAxis::X => ComplexMatrix::from_row_major(2, vec![ZERO, ONE, ONE, ZERO]).unwrap(),
            PauliAxis::Y => ComplexMatrix::from_row_major(2, vec![ZERO, -I, I, ZERO]).unwrap(),
            PauliAxis::Z => ComplexMatrix::from_row_major(2, vec![ONE, ZERO, ZERO, -ONE]).unwrap(),
        }
    }
}

/// Declarative description of a Hermitian operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OperatorSpec {
    Pauli(PauliAxis),
    Identity,
    /// `|1⟩⟨1|`, the detuning operator.
    Projector,
    /// `Ω·H_coup(φ) + ½Δ·H_det`.
    Control {
        omega: f64,
        phase: f64,
        detuning: f64,
    },
    /// Kronecker product, first factor acts on the most significant qubit.
    Tensor(Vec<OperatorSpec>),
    Sum(Vec<OperatorSpec>),
    Scaled(f64, Box<OperatorSpec>),
}

impl OperatorSpec {
    /// Parses compact strings such as `"X"`, `"XI + IX"`, `"0.5*ZZ"` or `"P"`.
    ///
    /// Each `+`-separated term is an optional `coef*` prefix followed by one
    /// letter per qubit from `I X Y Z P` (`P` is `|1⟩⟨1|`).
    pub fn parse(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for raw in text.split('+') {
            let term = raw.trim();
            if term.is_empty() {
                return Err(QStateError::Parse(text.to_string()));
            }
            let (coef, word) = match term.split_once('*') {
                Some((c, w)) => (
                    c.trim()
                        .parse::<f64>()
                        .map_err(|_| QStateError::Parse(text.to_string()))?,
                    w.trim(),
                ),
                None => (1.0, term),
            };
            let factors = word
                .chars()
                .filter(|c| !c.is_whitespace() && *c != '⊗')
                .map(|c| match c {
                    'I' => Ok(OperatorSpec::Identity),
                    'X' => Ok(OperatorSpec::Pauli(PauliAxis::X)),
                    'Y' => Ok(OperatorSpec::Pauli(PauliAxis::Y)),
                    'Z' => Ok(OperatorSpec::Pauli(PauliAxis::Z)),
                    'P' => Ok(OperatorSpec::Projector),
                    _ => Err(QStateError::Parse(text.to_string())),
                })
                .collect::<Result<Vec<_>>>()?;
            let base = match factors.len() {
                0 => return Err(QStateError::Parse(text.to_string())),
                1 => factors.into_iter().next().unwrap(),
                _ => OperatorSpec::Tensor(factors),
            };
            terms.push(if coef == 1.0 {
                base
            } else {
                OperatorSpec::Scaled(coef, Box::new(base))
            });
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            OperatorSpec::Sum(terms)
        })
    }
}

pub fn build_operator(spec: &OperatorSpec) -> Result<ComplexMatrix> {
    match spec {
        OperatorSpec::Pauli(axis) => Ok(axis.matrix()),
        OperatorSpec::Identity => Ok(ComplexMatrix::identity(2)),
        OperatorSpec::Projector => Ok(ComplexMatrix::from_diagonal(&[ZERO, ONE])),
        OperatorSpec::Control { omega, phase, detuning } => {
            let e = Complex64::from_polar(1.0, *phase);
            let coup = ComplexMatrix::from_row_major(2, vec![ZERO, e, e.conj(), ZERO])?;
            let det = ComplexMatrix::from_diagonal(&[ZERO, ONE]);
            coup.scale_real(*omega).checked_add(&det.scale_real(0.5 * detuning))
        }
        OperatorSpec::Tensor(factors) => {
            let mut it = factors.iter();
            let first = it.next().ok_or(QStateError::Empty)?;
            it.try_fold(build_operator(first)?, |acc, f| Ok(acc.kron(&build_operator(f)?)))
        }
        OperatorSpec::Sum(terms) => {
            let mut it = terms.iter();
            let first = it.next().ok_or(QStateError::Empty)?;
            it.try_fold(build_operator(first)?, |acc, t| acc.checked_add(&build_operator(t)?))
        }
        OperatorSpec::Scaled(c, inner) => Ok(build_operator(inner)?.scale_real(*c)),
    }
}

/// Pade(6,6) coefficients `c_j = (2q−j)! q! / ((2q)! j! (q−j)!)` for q = 6.
const PADE6: [f64; 7] = [
    1.0,
    0.5,
    5.0 / 44.0,
    1.0 / 66.0,
    1.0 / 792.0,
    1.0 / 15840.0,
    1.0 / 665280.0,
];

/// Matrix exponential by scaling and squaring with a diagonal Pade(6,6)
/// kernel. The argument is scaled until its one-norm is at most 1/2, where
/// the truncation error is far below double precision.
pub fn mat_exp(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_finite() {
        return Err(QStateError::NonFinite);
    }
    let n = a.dim();
    let norm = a.norm_one();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let x = a.scale_real(0.5f64.powi(squarings as i32));

    let mut num = ComplexMatrix::identity(n);
    let mut den = ComplexMatrix::identity(n);
    let mut power = ComplexMatrix::identity(n);
    for (j, &c) in PADE6.iter().enumerate().skip(1) {
        power = power.mul_unchecked(&x);
        let term = power.scale_real(c);
        num = &num + &term;
        den = if j % 2 == 0 { &den + &term } else { &den - &term };
    }
    let mut r = den.solve(&num).ok_or(QStateError::NonFinite)?;
    for _ in 0..squarings {
        r = r.mul_unchecked(&r);
    }
    Ok(r)
}
