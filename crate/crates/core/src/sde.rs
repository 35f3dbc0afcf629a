//! Monte-Carlo integration of the joint (state, noise) SDE.
//!
//! The state obeys `dψ = (−iH + ikX·S − (γ²/2)S†S)ψ dt − iγSψ dW` and the
//! noise `dX = −kX dt + γ dW`, with one shared Brownian increment per step.
//! Two schemes are provided: Euler-Maruyama and Platen's explicit weak
//! order-two scheme.

use std::io::{self, Write};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{map_indexed, Execution};
use crate::noise::{NoiseError, NoiseModel};
use crate::qstate::{mat_exp, ComplexMatrix, PureState, QStateError, HERMITIAN_TOL, ZERO};
use crate::rng;
use crate::stats::{summary, SampleSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdeError {
    #[error("time step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("horizon {horizon} is not an integer multiple of dt = {dt}")]
    HorizonNotMultiple { horizon: f64, dt: f64 },
    #[error("need at least one path")]
    NoPaths,
    #[error("record_every must be at least 1")]
    BadRecordInterval,
    #[error("{0} is not Hermitian")]
    NotHermitian(&'static str),
    #[error("{aborted} of {total} paths aborted, above the 1% limit")]
    TooManyAborts { aborted: usize, total: usize },
    #[error("path {path}: fidelity {value} exceeds 1 at t = {t}")]
    FidelityOverflow { path: usize, t: f64, value: f64 },
    #[error("exact expectation map needs k = 0 and renormalization off")]
    NotLinear,
    #[error(transparent)]
    QState(#[from] QStateError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

/// Largest fraction of aborted paths a run tolerates.
pub const MAX_ABORT_FRACTION: f64 = 0.01;
/// Norm above which a path is considered divergent.
pub const ABORT_NORM: f64 = 1.5;
/// Tolerance for fidelities above 1 before clamping.
pub const FIDELITY_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    EulerMaruyama,
    #[default]
    PlatenWeak2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    pub scheme: Scheme,
    pub renormalize: bool,
    pub n_paths: usize,
    pub master_seed: u64,
    /// Store every `record_every`-th step (the final step is always stored).
    pub record_every: usize,
    /// Keep the state vectors, not just fidelities and noise values.
    pub keep_states: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            horizon: 1.0,
            scheme: Scheme::PlatenWeak2,
            renormalize: true,
            n_paths: 100,
            master_seed: 0,
            record_every: 1,
            keep_states: false,
        }
    }
}

impl SimConfig {
    /// Number of integration steps; validates the grid.
    pub fn steps(&self) -> Result<usize, SdeError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SdeError::BadStep(self.dt));
        }
        let ratio = self.horizon / self.dt;
        let n = ratio.round();
        if n.is_nan() || n < 1.0 || (ratio - n).abs() > 1e-9 * n.max(1.0) {
            return Err(SdeError::HorizonNotMultiple {
                horizon: self.horizon,
                dt: self.dt,
            });
        }
        Ok(n as usize)
    }

    pub fn validate(&self) -> Result<usize, SdeError> {
        if self.n_paths == 0 {
            return Err(SdeError::NoPaths);
        }
        if self.record_every == 0 {
            return Err(SdeError::BadRecordInterval);
        }
        self.steps()
    }

    /// Step indices that are recorded, starting at 0.
    pub fn record_steps(&self) -> Result<Vec<usize>, SdeError> {
        let n = self.validate()?;
        let mut out: Vec<usize> = (0..=n).step_by(self.record_every).collect();
        if *out.last().unwrap() != n {
            out.push(n);
        }
        Ok(out)
    }
}

/// `Y = (ψ, X)`. `psi` is unit-norm only up to the integrator's drift when
/// renormalization is off.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub psi: Vec<Complex64>,
    pub x: f64,
}

impl JointState {
    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftDiffusion {
    pub state_drift: Vec<Complex64>,
    pub state_diffusion: Vec<Complex64>,
    pub noise_drift: f64,
    pub noise_diffusion: f64,
}

/// Drift and diffusion of the joint system at `y`.
pub fn drift_diffusion(
    y: &JointState,
    h: &ComplexMatrix,
    s: &ComplexMatrix,
    model: &NoiseModel,
) -> Result<DriftDiffusion, SdeError> {
    let stepper = Stepper::new(h, s, model, 1.0, Scheme::EulerMaruyama, false)?;
    if y.psi.len() != stepper.dim {
        return Err(QStateError::DimensionMismatch {
            left: stepper.dim,
            right: y.psi.len(),
        }
        .into());
    }
    let mut sp = vec![ZERO; stepper.dim];
    let mut a = vec![ZERO; stepper.dim];
    let mut b = vec![ZERO; stepper.dim];
    stepper.eval(&y.psi, y.x, &mut sp, Some(&mut a), &mut b);
    Ok(DriftDiffusion {
        state_drift: a,
        state_diffusion: b,
        noise_drift: -stepper.k * y.x,
        noise_diffusion: stepper.gamma,
    })
}

/// Why a path stopped early.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AbortReason {
    NotFinite,
    NormBlowUp(f64),
}

/// Precomputed one-step integrator for a fixed `(H, S, model, dt)`.
#[derive(Debug, Clone)]
pub struct Stepper {
    g: ComplexMatrix,
    s: ComplexMatrix,
    gamma: f64,
    k: f64,
    dt: f64,
    sqrt_dt: f64,
    scheme: Scheme,
    renormalize: bool,
    dim: usize,
}

/// Scratch buffers for [`Stepper::step`].
#[derive(Debug, Clone)]
pub struct Workspace {
    sp: Vec<Complex64>,
    a0: Vec<Complex64>,
    b0: Vec<Complex64>,
    a1: Vec<Complex64>,
    bp: Vec<Complex64>,
    bm: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Workspace {
    pub fn new(dim: usize) -> Self {
        let v = vec![ZERO; dim];
        Self {
            sp: v.clone(),
            a0: v.clone(),
            b0: v.clone(),
            a1: v.clone(),
            bp: v.clone(),
            bm: v.clone(),
            tmp: v,
        }
    }
}

impl Stepper {
    pub fn new(
        h: &ComplexMatrix,
        s: &ComplexMatrix,
        model: &NoiseModel,
        dt: f64,
        scheme: Scheme,
        renormalize: bool,
    ) -> Result<Self, SdeError> {
        model.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SdeError::BadStep(dt));
        }
        if h.dim() != s.dim() {
            return Err(QStateError::DimensionMismatch {
                left: h.dim(),
                right: s.dim(),
            }
            .into());
        }
        if !h.is_hermitian(HERMITIAN_TOL) {
            return Err(SdeError::NotHermitian("H"));
        }
        if !s.is_hermitian(HERMITIAN_TOL) {
            return Err(SdeError::NotHermitian("S"));
        }
        let g2 = model.gamma * model.gamma;
        let sds = s.adjoint().checked_mul(s)?;
        let g = h
            .scale(Complex64::new(0.0, -1.0))
            .checked_sub(&sds.scale_real(0.5 * g2))?;
        Ok(Self {
            g,
            s: s.clone(),
            gamma: model.gamma,
            k: model.damping(),
            dt,
            sqrt_dt: dt.sqrt(),
            scheme,
            renormalize,
            dim: h.dim(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Writes `Sψ` into `sp`, the drift into `a` (if requested) and the
    /// diffusion `−iγSψ` into `b`.
    fn eval(&self, psi: &[Complex64], x: f64, sp: &mut [Complex64], a: Option<&mut [Complex64]>, b: &mut [Complex64]) {
        self.s.apply_into(psi, sp);
        let mgi = Complex64::new(0.0, -self.gamma);
        for (bi, si) in b.iter_mut().zip(sp.iter()) {
            *bi = mgi * si;
        }
        if let Some(a) = a {
            self.g.apply_into(psi, a);
            let ikx = Complex64::new(0.0, self.k * x);
            for (ai, si) in a.iter_mut().zip(sp.iter()) {
                *ai += ikx * si;
            }
        }
    }

    /// Advances `y` by one step using the standard-normal draw `n`.
    pub fn step(&self, y: &mut JointState, n: f64, ws: &mut Workspace) -> Result<(), AbortReason> {
        let dt = self.dt;
        let sq = self.sqrt_dt;
        let dw = n * sq;
        let x = y.x;
        self.eval(&y.psi, x, &mut ws.sp, Some(&mut ws.a0), &mut ws.b0);
        let ax = -self.k * x;
        match self.scheme {
            Scheme::EulerMaruyama => {
                for i in 0..self.dim {
                    y.psi[i] += ws.a0[i] * dt + ws.b0[i] * dw;
                }
                y.x = x + ax * dt + self.gamma * dw;
            }
            Scheme::PlatenWeak2 => {
                // Supporting value Ῡ = Y + aΔ + bΔW; only its drift is needed.
                for i in 0..self.dim {
                    ws.tmp[i] = y.psi[i] + ws.a0[i] * dt + ws.b0[i] * dw;
                }
                let xbar = x + ax * dt + self.gamma * dw;
                self.eval(&ws.tmp, xbar, &mut ws.sp, Some(&mut ws.a1), &mut ws.bp);
                let ax1 = -self.k * xbar;

                // Ῡ± = Y + aΔ ± b√Δ; only diffusions are needed. The noise
                // block has constant diffusion, so its terms collapse.
                for i in 0..self.dim {
                    ws.tmp[i] = y.psi[i] + ws.a0[i] * dt + ws.b0[i] * sq;
                }
                self.eval(&ws.tmp, 0.0, &mut ws.sp, None, &mut ws.bp);
                for i in 0..self.dim {
                    ws.tmp[i] = y.psi[i] + ws.a0[i] * dt - ws.b0[i] * sq;
                }
                self.eval(&ws.tmp, 0.0, &mut ws.sp, None, &mut ws.bm);

                let corr = (n * n - 1.0) * sq;
                for i in 0..self.dim {
                    y.psi[i] += 0.5 * (ws.a1[i] + ws.a0[i]) * dt
                        + 0.25 * (ws.bp[i] + ws.bm[i] + 2.0 * ws.b0[i]) * dw
                        + 0.25 * (ws.bp[i] - ws.bm[i]) * corr;
                }
                y.x = x + 0.5 * (ax1 + ax) * dt + self.gamma * dw;
            }
        }
        let norm = y.norm();
        if !norm.is_finite() || !y.x.is_finite() {
            return Err(AbortReason::NotFinite);
        }
        if norm > ABORT_NORM {
            return Err(AbortReason::NormBlowUp(norm));
        }
        if self.renormalize {
            let inv = 1.0 / norm;
            for z in y.psi.iter_mut() {
                *z *= inv;
            }
        }
        Ok(())
    }

    /// The step as a matrix `ψ ↦ M(n)ψ` for a fixed draw, available when
    /// the step is linear in ψ (`k = 0`, no renormalization). Built by
    /// stepping basis vectors.
    pub fn linear_step_matrix(&self, n: f64) -> Result<ComplexMatrix, SdeError> {
        if self.k != 0.0 || self.renormalize {
            return Err(SdeError::NotLinear);
        }
        let mut m = ComplexMatrix::zeros(self.dim);
        let mut ws = Workspace::new(self.dim);
        for j in 0..self.dim {
            let mut y = JointState {
                psi: vec![ZERO; self.dim],
                x: 0.0,
            };
            y.psi[j] = Complex64::new(1.0, 0.0);
            // Basis vectors have unit norm, so the abort guard cannot trigger
            // for sane step sizes; a trip means the map is meaningless anyway.
            self.step(&mut y, n, &mut ws).map_err(|_| SdeError::BadStep(self.dt))?;
            for i in 0..self.dim {
                m[(i, j)] = y.psi[i];
            }
        }
        Ok(m)
    }
}

/// Three-point Gauss-Hermite rule for a standard normal: nodes `0, ±√3`,
/// weights `2/3, 1/6, 1/6`. Exact for polynomials up to degree five.
pub const GAUSS_HERMITE_3: [(f64, f64); 3] = [
    (0.0, 2.0 / 3.0),
    (1.732_050_807_568_877_2, 1.0 / 6.0),
    (-1.732_050_807_568_877_2, 1.0 / 6.0),
];

/// Scheme expectation `E[|φ_T†ψ_T|²]` after `steps` steps, computed without
/// sampling by propagating `E[ψψ†]` through the averaged one-step map.
///
/// Exact for the discrete scheme whenever each step is a polynomial of
/// degree at most two in the draw (both schemes with `k = 0`).
pub fn scheme_expected_fidelity(
    stepper: &Stepper,
    phi0: &PureState,
    target: &PureState,
    steps: usize,
) -> Result<f64, SdeError> {
    let maps: Vec<(ComplexMatrix, ComplexMatrix, f64)> = GAUSS_HERMITE_3
        .iter()
        .map(|&(node, w)| {
            let m = stepper.linear_step_matrix(node)?;
            let ma = m.adjoint();
            Ok((m, ma, w))
        })
        .collect::<Result<_, SdeError>>()?;
    let d = stepper.dim();
    let mut rho = ComplexMatrix::zeros(d);
    let a = phi0.amplitudes();
    for i in 0..d {
        for j in 0..d {
            rho[(i, j)] = a[i] * a[j].conj();
        }
    }
    for _ in 0..steps {
        let mut next = ComplexMatrix::zeros(d);
        for (m, ma, w) in &maps {
            next = &next + &(&(m * &rho) * ma).scale_real(*w);
        }
        rho = next;
    }
    let t = target.amplitudes();
    let v = rho.apply(t)?;
    Ok(t.iter().zip(&v).map(|(ti, vi)| ti.conj() * vi).sum::<Complex64>().re)
}

/// `φ_t = exp(−iHt)φ₀`.
pub fn target_evolution(h: &ComplexMatrix, phi0: &PureState, t: f64) -> Result<PureState, SdeError> {
    let u = mat_exp(&h.scale(Complex64::new(0.0, -t)))?;
    Ok(PureState::normalized(u.apply(phi0.amplitudes())?)?)
}

/// One simulated path sampled on the record grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub index: usize,
    pub x0: f64,
    /// Noise values at the recorded times.
    pub xs: Vec<f64>,
    /// Clamped fidelities at the recorded times.
    pub fidelities: Vec<f64>,
    pub states: Option<Vec<Vec<Complex64>>>,
    /// Largest unclamped fidelity seen.
    pub max_raw_fidelity: f64,
    /// `max |‖ψ‖ − 1|` over all steps, measured before renormalization.
    pub max_norm_deviation: f64,
    pub abort: Option<(usize, AbortReason)>,
}

impl Trajectory {
    pub fn aborted(&self) -> bool {
        self.abort.is_some()
    }
}

fn overlap_sqr(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr()
}

/// Integrates a single path from `phi0` with the given per-path stream.
/// `targets[r]` is the noiseless state at record `r`.
#[allow(clippy::too_many_arguments)]
pub fn integrate_path<R: Rng + ?Sized>(
    stepper: &Stepper,
    model: &NoiseModel,
    phi0: &PureState,
    targets: &[Vec<Complex64>],
    record_steps: &[usize],
    keep_states: bool,
    index: usize,
    rng: &mut R,
) -> Trajectory {
    let x0 = model.draw_initial(rng);
    let mut y = JointState {
        psi: phi0.amplitudes().to_vec(),
        x: x0,
    };
    let mut ws = Workspace::new(stepper.dim());
    let mut tr = Trajectory {
        index,
        x0,
        xs: Vec::with_capacity(record_steps.len()),
        fidelities: Vec::with_capacity(record_steps.len()),
        states: keep_states.then(|| Vec::with_capacity(record_steps.len())),
        max_raw_fidelity: 0.0,
        max_norm_deviation: 0.0,
        abort: None,
    };
    let record = |y: &JointState, r: usize, tr: &mut Trajectory| {
        let f = overlap_sqr(&targets[r], &y.psi);
        tr.max_raw_fidelity = tr.max_raw_fidelity.max(f);
        tr.fidelities.push(f.clamp(0.0, 1.0));
        tr.xs.push(y.x);
        if let Some(s) = tr.states.as_mut() {
            s.push(y.psi.clone());
        }
    };
    record(&y, 0, &mut tr);
    let mut next = 1;
    let last = *record_steps.last().unwrap_or(&0);
    let renorm = stepper.renormalize;
    for step in 1..=last {
        let n: f64 = rng.sample(StandardNormal);
        if let Err(reason) = stepper.step(&mut y, n, &mut ws) {
            tr.abort = Some((step, reason));
            return tr;
        }
        if !renorm {
            tr.max_norm_deviation = tr.max_norm_deviation.max((y.norm() - 1.0).abs());
        }
        if record_steps.get(next) == Some(&step) {
            record(&y, next, &mut tr);
            next += 1;
        }
    }
    tr
}

/// Per-time ensemble statistics over the non-aborted paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSummary {
    pub t: f64,
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
    pub n_effective: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub times: Vec<f64>,
    pub paths: Vec<Trajectory>,
    pub config: SimConfig,
}

impl Ensemble {
    pub fn aborted(&self) -> usize {
        self.paths.iter().filter(|p| p.aborted()).count()
    }

    pub fn completed(&self) -> impl Iterator<Item = &Trajectory> {
        self.paths.iter().filter(|p| !p.aborted())
    }

    /// Fidelities of completed paths at record `r`, in path order.
    pub fn fidelities_at(&self, r: usize) -> Vec<f64> {
        self.completed().map(|p| p.fidelities[r]).collect()
    }

    /// Recorded time index closest to `t`.
    pub fn record_index(&self, t: f64) -> usize {
        self.times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map_or(0, |(i, _)| i)
    }

    pub fn summaries(&self) -> Vec<TimeSummary> {
        (0..self.times.len())
            .map(|r| {
                let vals = self.fidelities_at(r);
                let n = vals.len();
                match SampleSet::new(vals).ok().and_then(|s| summary(&s).ok()) {
                    Some(s) => TimeSummary {
                        t: self.times[r],
                        mean: s.mean,
                        variance: s.variance,
                        stderr: s.stderr,
                        n_effective: n,
                    },
                    None => TimeSummary {
                        t: self.times[r],
                        mean: f64::NAN,
                        variance: f64::NAN,
                        stderr: f64::NAN,
                        n_effective: n,
                    },
                }
            })
            .collect()
    }

    /// `t, mean_F, var_F, stderr_F, n_effective`.
    pub fn write_summary_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,mean_F,var_F,stderr_F,n_effective")?;
        for s in self.summaries() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{}",
                s.t, s.mean, s.variance, s.stderr, s.n_effective
            )?;
        }
        Ok(())
    }

    /// `t, re(ψ_0..), im(ψ_0..), X, F` for one path; needs stored states.
    pub fn write_trajectory_csv<W: Write>(&self, path: usize, mut w: W) -> io::Result<()> {
        let p = &self.paths[path];
        let states = p
            .states
            .as_ref()
            .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "states were not kept"))?;
        let d = states.first().map_or(0, Vec::len);
        let mut header = vec!["t".to_string()];
        header.extend((0..d).map(|i| format!("re_psi_{i}")));
        header.extend((0..d).map(|i| format!("im_psi_{i}")));
        header.push("X".into());
        header.push("F".into());
        writeln!(w, "{}", header.join(","))?;
        for (r, psi) in states.iter().enumerate() {
            let mut row = vec![format!("{:.16e}", self.times[r])];
            row.extend(psi.iter().map(|z| format!("{:.16e}", z.re)));
            row.extend(psi.iter().map(|z| format!("{:.16e}", z.im)));
            row.push(format!("{:.16e}", p.xs[r]));
            row.push(format!("{:.16e}", p.fidelities[r]));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Runs `config.n_paths` independent paths. Path `i` draws from stream `i`
/// of the master seed, so results do not depend on `exec` or thread count.
pub fn simulate_paths(
    h: &ComplexMatrix,
    s: &ComplexMatrix,
    model: &NoiseModel,
    phi0: &PureState,
    config: &SimConfig,
    exec: Execution,
) -> Result<Ensemble, SdeError> {
    let record_steps = config.record_steps()?;
    if phi0.dim() != h.dim() {
        return Err(QStateError::DimensionMismatch {
            left: h.dim(),
            right: phi0.dim(),
        }
        .into());
    }
    let stepper = Stepper::new(h, s, model, config.dt, config.scheme, config.renormalize)?;
    let times: Vec<f64> = record_steps.iter().map(|&i| i as f64 * config.dt).collect();
    let targets = times
        .iter()
        .map(|&t| target_evolution(h, phi0, t).map(PureState::into_amplitudes))
        .collect::<Result<Vec<_>, _>>()?;

    let paths = map_indexed(config.n_paths, exec, |i| {
        let mut rng = rng::stream(config.master_seed, i as u64);
        integrate_path(
            &stepper,
            model,
            phi0,
            &targets,
            &record_steps,
            config.keep_states,
            i,
            &mut rng,
        )
    });

    let aborted = paths.iter().filter(|p| p.aborted()).count();
    for p in &paths {
        if let Some((step, reason)) = p.abort {
            log::warn!("path {} aborted at step {step}: {reason:?}", p.index);
        }
    }
    if aborted as f64 > MAX_ABORT_FRACTION * config.n_paths as f64 {
        return Err(SdeError::TooManyAborts {
            aborted,
            total: config.n_paths,
        });
    }
    if let Some(p) = paths.iter().find(|p| p.max_raw_fidelity > 1.0 + FIDELITY_SLACK) {
        let r = p.fidelities.iter().position(|&f| f >= 1.0).unwrap_or(0);
        return Err(SdeError::FidelityOverflow {
            path: p.index,
            t: times[r],
            value: p.max_raw_fidelity,
        });
    }
    Ok(Ensemble {
        times,
        paths,
        config: *config,
    })
}
