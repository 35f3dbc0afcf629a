//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_8, PI};
use std::fs;
use std::path::Path;
use std::time::Instant;

use sselab::presets;
use sselab::runner::{run, run_scenario, Overrides, ScenarioReport};
use sselab_core::approx::{integrate_closure, ClosureOrder, ClosureSystem, DEFAULT_DT};
use sselab_core::laws::{
    commuting_pathwise_fidelity, pauli_law, product_law, projection_law, CosineSeries, NoiseClass, ScenarioLaw,
};
use sselab_core::magnus::{wn_mean_fidelity, NonCommutingSystem};
use sselab_core::noise::{
    conditional_moment, double_factorial_odd, raw_even_moment, sample_path, InitialData, NoiseModel,
};
use sselab_core::qstate::{ComplexMatrix, PauliAxis, PureState, I, ONE};
use sselab_core::sde::{scheme_expected_fidelity, simulate_paths, Scheme, SimConfig, Stepper};
use sselab_core::stats::neumaier_sum;
use sselab_core::{rng, Execution};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn scratch(name: &str) -> tempfile::TempDir {
    tempfile::Builder::new()
        .prefix(&format!("sselab-{name}-"))
        .tempdir()
        .expect("temp dir")
}

fn run_preset(name: &str, paths: Option<usize>) -> Vec<ScenarioReport> {
    let mut cfg = presets::load(name).expect("preset");
    if let Some(p) = paths {
        for s in &mut cfg.scenarios {
            s.sim.paths = p;
        }
    }
    let dir = scratch(name);
    cfg.scenarios
        .iter()
        .map(|s| run_scenario(s, &dir.path().join(&s.name), Execution::Parallel).expect("scenario runs"))
        .collect()
}

/// Worst check of a kind across reports, and whether all of them passed.
fn worst(reports: &[ScenarioReport], prefix: &str) -> (f64, bool) {
    let checks: Vec<_> = reports
        .iter()
        .flat_map(|r| &r.checks)
        .filter(|c| c.name.starts_with(prefix))
        .collect();
    assert!(!checks.is_empty(), "no {prefix} checks");
    (
        checks.iter().map(|c| c.value).fold(0.0, f64::max),
        checks.iter().all(|c| c.passed),
    )
}

fn x() -> ComplexMatrix {
    PauliAxis::X.matrix()
}

fn projector() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[[0.0, 0.0], [0.0, 1.0]])
}

fn plus() -> PureState {
    PureState::normalized(vec![ONE, ONE]).unwrap()
}

fn sum_over_qubits(q: &ComplexMatrix, n: usize) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    let mut total = ComplexMatrix::zeros(1 << n);
    for site in 0..n {
        let mut term = ComplexMatrix::identity(1);
        for j in 0..n {
            term = term.kron(if j == site { q } else { &id });
        }
        total = &total + &term;
    }
    total
}

/// Largest per-path deviation `|F(t) − law(X_t − X₀)|` over the record grid.
fn pathwise_deviation(s: &ComplexMatrix, phi0: &PureState, law: &CosineSeries, model: &NoiseModel, seed: u64) -> f64 {
    let cfg = SimConfig {
        dt: 1e-4,
        horizon: 1.0,
        n_paths: 100,
        master_seed: seed,
        record_every: 10,
        ..SimConfig::default()
    };
    let h = ComplexMatrix::zeros(s.dim());
    let ens = simulate_paths(&h, s, model, phi0, &cfg, Execution::Parallel).expect("ensemble");
    assert_eq!(ens.aborted(), 0);
    ens.paths
        .iter()
        .flat_map(|p| {
            p.xs.iter()
                .zip(&p.fidelities)
                .map(move |(xt, f)| (f - law.evaluate(xt - p.x0)).abs())
        })
        .fold(0.0, f64::max)
}

fn criterion_1() -> Outcome {
    let model = NoiseModel::ou(0.2, 0.1, InitialData::Calibrated).unwrap();
    let tilted = PureState::real_rotation(FRAC_PI_8);
    let mut cases: Vec<(String, ComplexMatrix, PureState, CosineSeries)> = vec![
        (
            "pauli".into(),
            x(),
            tilted.clone(),
            ScenarioLaw::single(&x(), &tilted, NoiseClass::Pauli, model)
                .unwrap()
                .series,
        ),
        (
            "projection".into(),
            projector(),
            plus(),
            ScenarioLaw::single(&projector(), &plus(), NoiseClass::Projection, model)
                .unwrap()
                .series,
        ),
    ];
    let generic = PureState::normalized(vec![ONE, I * 0.5, ONE * 0.3, -ONE * 0.8]).unwrap();
    for (label, q, class) in [
        ("2q-pauli", x(), NoiseClass::Pauli),
        ("2q-projection", projector(), NoiseClass::Projection),
    ] {
        for (state_label, phi0) in [
            ("00", PureState::basis(4, 0).unwrap()),
            ("ghz", PureState::ghz(2)),
            ("generic", generic.clone()),
        ] {
            let law = ScenarioLaw::two_qubit(&q, &phi0, class, model).unwrap().series;
            cases.push((format!("{label}/{state_label}"), sum_over_qubits(&q, 2), phi0, law));
        }
    }
    let mut worst = (0.0, "");
    for (i, (name, s, phi0, law)) in cases.iter().enumerate() {
        let d = pathwise_deviation(s, phi0, law, &model, 100 + i as u64);
        if d > worst.0 {
            worst = (d, name.as_str());
        }
    }
    ensure(
        worst.0 <= 5e-3,
        format!(
            "{} cases x 100 paths, max |F - law| = {:.2e} ({}), limit 5e-3",
            cases.len(),
            worst.0,
            worst.1
        ),
    )
}

fn criterion_2() -> Outcome {
    let reports = run_preset("fig3", Some(2000));
    let (z, z_ok) = worst(&reports, "mean_z");
    let scn = &presets::load("fig3").unwrap().scenarios[0];
    let window = scn.output.approx_horizon.unwrap();
    let r = scn.resolve().unwrap();
    let law = ScenarioLaw::single(&r.s, &r.phi0, NoiseClass::Pauli, r.model).unwrap();
    let s0 = law.s0;
    let every = (0.1 / DEFAULT_DT).round() as usize;
    let solve = |order| {
        integrate_closure(
            &ClosureSystem::new(order, r.model.gamma, r.model.k, s0).unwrap(),
            window,
            DEFAULT_DT,
            every,
        )
        .unwrap()
    };
    let first = solve(ClosureOrder::First);
    let second = solve(ClosureOrder::Second);
    let exact_inside = first
        .times
        .iter()
        .map(|&t| law.mean_variance(t).mean)
        .all(|m| (0.0..=1.0).contains(&m));
    let exit1 = first.first_exit(0.0, 1.0);
    let exit2 = second.first_exit(0.0, 1.0);
    let fmt_exit = |e: Option<f64>| e.map_or("none".to_string(), |t| format!("t={t:.1}"));
    ensure(
        z_ok && exact_inside && exit1.is_some(),
        format!(
            "2000 paths, max z = {z:.2} (limit 3); exact mean inside [0,1]: {exact_inside}; \
             order-1 closure exit on [0,{window}]: {} (required), order-2 exit: {}, order-1 F({window}) = {:.4}",
            fmt_exit(exit1),
            fmt_exit(exit2),
            first.fidelity.last().unwrap()
        ),
    )
}

fn criterion_3() -> Outcome {
    let reports = run_preset("fig4", None);
    let (ks, ok) = worst(&reports, "ks@");
    let n = reports[0].checks.iter().filter(|c| c.name.starts_with("ks@")).count();
    ensure(
        ok,
        format!("{n} slices, 2000 vs 2000 samples, max KS = {ks:.4} (limit 0.05)"),
    )
}

/// Envelope decay rate of `F − ½` from a log-linear least-squares fit.
fn envelope_rate(times: &[f64], f: &[f64]) -> f64 {
    let ys: Vec<f64> = f.iter().map(|v| (2.0 * v - 1.0).ln()).collect();
    let n = times.len() as f64;
    let (mx, my) = (times.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = times.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = times.iter().map(|a| (a - mx).powi(2)).sum();
    -sxy / sxx
}

/// `π / (median spacing)` of the local maxima of `dF/dt`. The decay makes
/// `F` itself a staircase, so the oscillation is read off its slope.
fn oscillation_frequency(times: &[f64], f: &[f64]) -> Option<f64> {
    let slope: Vec<f64> = f.windows(2).map(|w| w[1] - w[0]).collect();
    let peaks: Vec<f64> = (1..slope.len() - 1)
        .filter(|&i| slope[i] > slope[i - 1] && slope[i] >= slope[i + 1])
        .map(|i| times[i])
        .collect();
    if peaks.len() < 3 {
        return None;
    }
    let mut gaps: Vec<f64> = peaks.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.sort_by(f64::total_cmp);
    Some(PI / gaps[gaps.len() / 2])
}

fn criterion_4() -> Outcome {
    let reports = run_preset("fig5", None);
    let (diff, diff_ok) = worst(&reports, "max_abs_diff");
    let cfg = presets::load("fig5").unwrap();
    let mut parts = vec![format!("MC vs Magnus max |diff| (t<=5) = {diff:.4} (limit 0.02)")];
    let mut ok = diff_ok;
    for scn in &cfg.scenarios {
        let r = scn.resolve().unwrap();
        let alpha = scn.system.alpha;
        let gamma = r.model.gamma;
        let sys = NonCommutingSystem::new(alpha, gamma, r.h_axis.unwrap(), r.s_axis.unwrap(), &r.phi0).unwrap();
        let times: Vec<f64> = (0..=10_000).map(|i| i as f64 * 1e-3).collect();
        let f: Vec<f64> = times.iter().map(|&t| wn_mean_fidelity(&sys, t).unwrap()).collect();
        let axis = sys
            .c
            .iter()
            .position(|c| (c - 1.0).abs() < 1e-9)
            .expect("axis-aligned state");
        let expected_rate = if axis == 0 { 2.0 * gamma * gamma } else { gamma * gamma };
        let rate = envelope_rate(&times, &f);
        let rate_err = (rate / expected_rate - 1.0).abs();
        ok &= rate_err <= 0.10;
        parts.push(format!(
            "{}: rate {rate:.4} vs {expected_rate:.4} ({:.1}%)",
            scn.name,
            100.0 * rate_err
        ));
        if axis != 0 {
            match oscillation_frequency(&times, &f) {
                Some(w) => {
                    let err = (w / (2.0 * alpha) - 1.0).abs();
                    ok &= err <= 0.02;
                    parts.push(format!(
                        "{}: frequency {w:.4} vs {:.4} ({:.2}%)",
                        scn.name,
                        2.0 * alpha,
                        100.0 * err
                    ));
                }
                None => {
                    ok = false;
                    parts.push(format!("{}: no oscillation found", scn.name));
                }
            }
        }
    }
    ensure(ok, parts.join("; "))
}

fn criterion_5() -> Outcome {
    let reports = run_preset("fig6", None);
    let (z, z_ok) = worst(&reports, "mean_z");
    let cfg = presets::load("fig6").unwrap();
    let laws: BTreeMap<String, ScenarioLaw> = cfg
        .scenarios
        .iter()
        .map(|s| {
            let r = s.resolve().unwrap();
            (
                s.name.clone(),
                ScenarioLaw::single(&r.s, &r.phi0, NoiseClass::Projection, r.model).unwrap(),
            )
        })
        .collect();
    let (ou, wn) = (&laws["ou"], &laws["wn"]);
    let s2 = ou.s0 * ou.s0;
    let (g, k) = (ou.model.gamma, ou.model.k);
    let wn_limit = 1.0 - 2.0 * (1.0 - s2) * s2;
    let ou_limit = 1.0 - 2.0 * (1.0 - s2) * s2 * (1.0 - (-g * g / (2.0 * k)).exp());
    let late = 1e4;
    let wn_err = (wn.mean_variance(late).mean - wn_limit).abs();
    let ou_err = (ou.mean_variance(late).mean - ou_limit).abs();

    let scn = &cfg.scenarios[0];
    let times: Vec<f64> = (0..=1000).map(|i| i as f64 * scn.sim.horizon / 1000.0).collect();
    let var_ok = times
        .iter()
        .all(|&t| wn.mean_variance(t).variance >= ou.mean_variance(t).variance);
    let gap = |t: f64| ou.mean_variance(t).mean - wn.mean_variance(t).mean;
    let diverging = times.windows(2).all(|w| gap(w[1]) >= gap(w[0])) && gap(scn.sim.horizon) > 0.1;
    ensure(
        z_ok && var_ok && diverging && wn_err < 1e-12 && ou_err < 1e-12 && ou_limit > wn_limit,
        format!(
            "asymptotes WN {wn_limit:.4} OU {ou_limit:.4} (law errors {wn_err:.1e}, {ou_err:.1e}); \
             mean gap at t={} is {:.4} and growing: {diverging}; Var_WN >= Var_OU on 1001 times: {var_ok}; \
             500 paths, max z = {z:.2} (limit 3)",
            scn.sim.horizon,
            gap(scn.sim.horizon)
        ),
    )
}

/// `E[law(ΔX)]` for `ΔX ~ N(0, v)`.
fn mean_at_variance(law: &CosineSeries, v: f64) -> f64 {
    law.terms()
        .iter()
        .map(|&(m, c)| c * (-0.5 * (m as f64).powi(2) * v).exp())
        .sum()
}

fn criterion_6() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (preset, product_ref, ghz_ref, product_wins) in [("fig7a", 0.801, 0.672, true), ("fig7b", 0.375, 0.500, false)]
    {
        let cfg = presets::load(preset).unwrap();
        let mut limits = Vec::new();
        for scn in &cfg.scenarios {
            let r = scn.resolve().unwrap();
            let law = ScenarioLaw::two_qubit(r.q.as_ref().unwrap(), &r.phi0, r.class, r.model).unwrap();
            let v = r.model.gamma * r.model.gamma / r.model.k;
            limits.push(mean_at_variance(&law.series, v));
        }
        let (p, g) = (limits[0], limits[1]);
        let refs_ok = (p - product_ref).abs() < 5e-4 && (g - ghz_ref).abs() < 5e-4;
        let order_ok = (p > g) == product_wins;
        let reports = run_preset(preset, None);
        let (z, z_ok) = worst(&reports, "mean_z");
        ok &= refs_ok && order_ok && z_ok;
        parts.push(format!(
            "{preset}: |00> {p:.4} vs GHZ {g:.4} (refs {product_ref}/{ghz_ref}), max z = {z:.2}"
        ));
    }
    ensure(ok, parts.join("; "))
}

fn criterion_7() -> Outcome {
    let t = 2.0;
    let n_samples = 1_000_000usize;
    let models = [
        ("wn", NoiseModel::white(0.3).unwrap()),
        (
            "ou-calibrated",
            NoiseModel::ou(0.3, 0.5, InitialData::Calibrated).unwrap(),
        ),
        (
            "ou-stationary",
            NoiseModel::ou(0.3, 0.5, InitialData::Stationary).unwrap(),
        ),
    ];
    let mut worst_mc = 0.0f64;
    for (mi, (_, model)) in models.iter().enumerate() {
        let incs = sselab_core::exec::map_indexed(n_samples, Execution::Parallel, |i| {
            let mut s = rng::stream(7000 + mi as u64, i as u64);
            let p = sample_path(model, t, t / 8.0, &mut s, (7000, i as u64)).unwrap();
            p.values.last().unwrap() - p.values[0]
        });
        for n in 1..=3u32 {
            let powers: Vec<f64> = incs.iter().map(|d| d.powi(2 * n as i32)).collect();
            let mc = neumaier_sum(&powers) / n_samples as f64;
            let exact = raw_even_moment(n, model, t).unwrap();
            worst_mc = worst_mc.max((mc / exact - 1.0).abs());
        }
    }

    let mut worst_cond = 0.0f64;
    for &(g, k) in &[(0.2, 0.1), (0.3, 0.5), (1.0, 2.0)] {
        let model = NoiseModel::ou(g, k, InitialData::Calibrated).unwrap();
        for &t in &[0.1, 1.0, 5.0] {
            let v: f64 = g * g * (1.0 - (-2.0 * k * t).exp()) / (2.0 * k);
            for m in 1..=8u32 {
                let expected = if m % 2 == 1 {
                    0.0
                } else {
                    double_factorial_odd(m / 2) * v.powi((m / 2) as i32)
                };
                let got = conditional_moment(m, 0.0, &model, t).unwrap();
                let err = if expected == 0.0 {
                    got.abs()
                } else {
                    (got / expected - 1.0).abs()
                };
                worst_cond = worst_cond.max(err);
            }
        }
    }

    let mut worst_limit = 0.0f64;
    let (g, t) = (0.4, 1.5);
    let wn = NoiseModel::white(g).unwrap();
    for init in [InitialData::Calibrated, InitialData::Stationary] {
        let ou = NoiseModel::ou(g, 1e-9, init).unwrap();
        for n in 1..=3 {
            let a = raw_even_moment(n, &ou, t).unwrap();
            let b = double_factorial_odd(n) * (g * g * t).powi(n as i32);
            worst_limit = worst_limit.max((a / b - 1.0).abs());
            assert_eq!(b, raw_even_moment(n, &wn, t).unwrap());
        }
    }
    let calibrated = NoiseModel::ou(g, 1e-9, InitialData::Calibrated).unwrap();
    let brownian = NoiseModel::ou(g, 0.0, InitialData::Calibrated).unwrap();
    for m in 1..=6 {
        let a = conditional_moment(m, 0.7, &calibrated, t).unwrap();
        let b = conditional_moment(m, 0.7, &brownian, t).unwrap();
        worst_limit = worst_limit.max((a / b - 1.0).abs());
    }
    ensure(
        worst_mc <= 0.05 && worst_cond <= 1e-12 && worst_limit <= 1e-6,
        format!(
            "MC (1e6 paths) worst rel err {worst_mc:.2e} (limit 5e-2); conditional X0=0 worst {worst_cond:.1e} \
             (limit 1e-12); k=1e-9 vs white noise worst {worst_limit:.1e} (limit 1e-6)"
        ),
    )
}

fn criterion_8() -> Outcome {
    let n = 3;
    let s = sum_over_qubits(&x(), n);
    let phi0 = PureState::basis(8, 0).unwrap();
    let single = pauli_law(0.0).unwrap();
    let product = product_law(&vec![single; n]);
    let pointwise = (0..=2000)
        .map(|i| -4.0 + 8.0 * i as f64 / 2000.0)
        .map(|dx| (product.evaluate(dx) - commuting_pathwise_fidelity(&s, &phi0, dx).unwrap()).abs())
        .fold(0.0, f64::max);
    let model = NoiseModel::ou(0.2, 0.1, InitialData::Calibrated).unwrap();
    let per_path = pathwise_deviation(&s, &phi0, &product, &model, 800);
    // The projector case factors the same way.
    let pl = projection_law(std::f64::consts::FRAC_1_SQRT_2).unwrap();
    let pstate = plus().tensor(&plus()).tensor(&plus());
    let ps = sum_over_qubits(&projector(), n);
    let pprod = product_law(&vec![pl; n]);
    let pointwise_proj = (0..=2000)
        .map(|i| -4.0 + 8.0 * i as f64 / 2000.0)
        .map(|dx| (pprod.evaluate(dx) - commuting_pathwise_fidelity(&ps, &pstate, dx).unwrap()).abs())
        .fold(0.0, f64::max);
    ensure(
        pointwise <= 1e-12 && pointwise_proj <= 1e-12 && per_path <= 5e-3,
        format!(
            "product vs joint law: {pointwise:.1e} (Pauli), {pointwise_proj:.1e} (projection), limit 1e-12; \
             8-dim simulation, 100 paths, max |F - product| = {per_path:.2e} (limit 5e-3)"
        ),
    )
}

fn criterion_9() -> Outcome {
    let gamma = 1.0;
    let model = NoiseModel::white(gamma).unwrap();
    let h = ComplexMatrix::zeros(2);
    let phi0 = PureState::basis(2, 0).unwrap();
    let exact = 0.5 + 0.5 * (-2.0 * gamma * gamma).exp();
    let weak_error = |scheme, dt: f64| {
        let st = Stepper::new(&h, &x(), &model, dt, scheme, false).unwrap();
        (scheme_expected_fidelity(&st, &phi0, &phi0, (1.0 / dt).round() as usize).unwrap() - exact).abs()
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for (scheme, label, min_ratio) in [(Scheme::PlatenWeak2, "Platen", 3.5), (Scheme::EulerMaruyama, "EM", 1.8)] {
        let (e1, e2) = (weak_error(scheme, 2e-4), weak_error(scheme, 1e-4));
        let ratio = e1 / e2;
        ok &= ratio >= min_ratio;
        parts.push(format!(
            "{label} weak error {e1:.2e} -> {e2:.2e}, ratio {ratio:.2} (min {min_ratio})"
        ));
    }

    let cfg = SimConfig {
        dt: 1e-4,
        horizon: 1.0,
        renormalize: false,
        n_paths: 100,
        master_seed: 900,
        record_every: 1000,
        ..SimConfig::default()
    };
    let z = PauliAxis::Z.matrix();
    let mut drift = 0.0f64;
    for (hm, sm, model) in [
        (x(), z.clone(), NoiseModel::white(0.4).unwrap()),
        (
            x(),
            z.clone(),
            NoiseModel::ou(0.4, 0.5, InitialData::Stationary).unwrap(),
        ),
        (ComplexMatrix::zeros(2), x(), NoiseModel::white(0.4).unwrap()),
    ] {
        let ens = simulate_paths(
            &hm,
            &sm,
            &model,
            &PureState::basis(2, 0).unwrap(),
            &cfg,
            Execution::Parallel,
        )
        .unwrap();
        drift = drift.max(ens.paths.iter().map(|p| p.max_norm_deviation).fold(0.0, f64::max));
    }
    ok &= drift <= 1e-3;
    parts.push(format!("norm drift without renormalization {drift:.2e} (limit 1e-3)"));
    ensure(ok, parts.join("; "))
}

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|e| e == "csv") {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn criterion_10() -> Outcome {
    let root = scratch("threads");
    let mut outputs = Vec::new();
    for threads in [1, 4, 8] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let mut files = BTreeMap::new();
        for (preset, paths) in [("fig4", 300), ("fig7a", 100), ("fig5", 50)] {
            let mut cfg = presets::load(preset).unwrap();
            Overrides {
                seed: Some(17),
                paths: Some(paths),
            }
            .apply(&mut cfg)
            .unwrap();
            let out = root.path().join(format!("{preset}-{threads}"));
            pool.install(|| run(&cfg, &out, Execution::Parallel))
                .map_err(|e| format!("{preset} with {threads} threads: {e}"))?;
            for (name, bytes) in csv_files(&out) {
                files.insert(format!("{preset}/{name}"), bytes);
            }
        }
        outputs.push(files);
    }
    let n = outputs[0].len();
    let identical = outputs.iter().all(|o| o == &outputs[0]);
    ensure(
        identical && n > 0,
        format!("{n} CSV files, byte-identical across 1/4/8 threads: {identical}"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("pathwise law", criterion_1),
        ("Pauli mean and closures", criterion_2),
        ("fidelity distributions", criterion_3),
        ("non-commuting mean", criterion_4),
        ("projection, OU vs white noise", criterion_5),
        ("two-qubit asymptotics", criterion_6),
        ("moment engine", criterion_7),
        ("factoring", criterion_8),
        ("integrator quality", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = f();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {:>2} {name} [{secs:.1}s]: {detail}", i + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
