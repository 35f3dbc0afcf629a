//! Executes scenarios and writes their artifacts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sselab_core::approx::{integrate_closure, ClosureOrder, ClosureSystem, DEFAULT_DT};
use sselab_core::laws::{sample_distribution, LawError, ScenarioLaw};
use sselab_core::magnus::{ou_second_order_mean, wn_mean_fidelity, MagnusError, NonCommutingSystem};
use sselab_core::noise::NoiseKind;
use sselab_core::sde::{simulate_paths, Ensemble, SdeError};
use sselab_core::stats::{ecdf, kde, ks_distance, linspace, SampleSet, StatsError};
use sselab_core::{rng, Execution};
use thiserror::Error;

use crate::config::{ConfigError, Resolved, RunConfig, Scenario, ScenarioKind};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("simulation failed: {0}")]
    Sde(#[from] SdeError),
    #[error("law: {0}")]
    Law(#[from] LawError),
    #[error("non-commuting mean: {0}")]
    Magnus(#[from] MagnusError),
    #[error("closure: {0}")]
    Approx(#[from] sselab_core::approx::ApproxError),
    #[error("statistics: {0}")]
    Stats(#[from] StatsError),
    #[error("writing {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl RunError {
    /// Whether the failure comes from the configuration rather than the run.
    pub fn is_config(&self) -> bool {
        matches!(self, RunError::Config(_))
    }
}

/// Overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub paths: Option<usize>,
}

impl Overrides {
    /// Applies the overrides. With `seed`, scenario `i` uses `seed + i`.
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<(), ConfigError> {
        for (i, s) in cfg.scenarios.iter_mut().enumerate() {
            if let Some(seed) = self.seed {
                s.sim.seed = seed.wrapping_add(i as u64);
            }
            if let Some(p) = self.paths {
                s.sim.paths = p;
            }
        }
        cfg.validate()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub limit: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub name: String,
    pub kind: ScenarioKind,
    pub seed: u64,
    pub paths: usize,
    pub aborted_paths: usize,
    pub files: Vec<String>,
    pub checks: Vec<Check>,
    /// Free-form diagnostics (closure exit times, KS distances, ...).
    pub notes: serde_json::Map<String, serde_json::Value>,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub name: String,
    pub description: String,
    pub versions: Versions,
    pub config: RunConfig,
    pub scenarios: Vec<ScenarioReport>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.scenarios.iter().all(ScenarioReport::passed)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub sselab: &'static str,
    pub format: u32,
}

const VERSIONS: Versions = Versions {
    sselab: env!("CARGO_PKG_VERSION"),
    format: 1,
};

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<File>, RunError> {
    File::create(path).map(BufWriter::new).map_err(|source| RunError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Per-time analytic mean and variance; `None` where no closed form exists.
enum Analytic {
    Law(ScenarioLaw),
    Magnus(NonCommutingSystem),
}

impl Analytic {
    fn mean_var(&self, r: &Resolved, t: f64) -> Result<(f64, f64), RunError> {
        match self {
            Analytic::Law(l) => {
                let mv = l.mean_variance(t);
                Ok((mv.mean, mv.variance))
            }
            Analytic::Magnus(sys) => {
                let m = match r.model.kind {
                    NoiseKind::WhiteNoise => wn_mean_fidelity(sys, t)?,
                    NoiseKind::OrnsteinUhlenbeck => ou_second_order_mean(sys, &r.model, t)?.value,
                };
                Ok((m, f64::NAN))
            }
        }
    }
}

fn analytic_for(scn: &Scenario, r: &Resolved) -> Result<Analytic, RunError> {
    Ok(match scn.kind {
        ScenarioKind::Noncommuting => Analytic::Magnus(NonCommutingSystem::new(
            scn.system.alpha,
            r.model.gamma,
            r.h_axis.expect("resolved"),
            r.s_axis.expect("resolved"),
            &r.phi0,
        )?),
        ScenarioKind::Twoqubit => Analytic::Law(ScenarioLaw::two_qubit(
            r.q.as_ref().expect("resolved"),
            &r.phi0,
            r.class,
            r.model,
        )?),
        _ => Analytic::Law(ScenarioLaw::single(&r.s, &r.phi0, r.class, r.model)?),
    })
}

/// Runs one scenario and writes its files into `dir`.
pub fn run_scenario(scn: &Scenario, dir: &Path, exec: Execution) -> Result<ScenarioReport, RunError> {
    let r = scn.resolve()?;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    log::info!(
        "scenario {}: {} paths, {} steps",
        scn.name,
        r.sim.n_paths,
        r.sim.steps()?
    );
    let ens = simulate_paths(&r.h, &r.s, &r.model, &r.phi0, &r.sim, exec)?;
    let analytic = analytic_for(scn, &r)?;
    let mut report = ScenarioReport {
        name: scn.name.clone(),
        kind: scn.kind,
        seed: r.sim.master_seed,
        paths: r.sim.n_paths,
        aborted_paths: ens.aborted(),
        files: Vec::new(),
        checks: Vec::new(),
        notes: serde_json::Map::new(),
    };

    let sums = ens.summaries();
    let mut rows = Vec::with_capacity(sums.len());
    for s in &sums {
        let (m, v) = analytic.mean_var(&r, s.t)?;
        rows.push((s.t, m, v, s.mean, s.stderr, s.variance));
    }
    let path = dir.join("summary.csv");
    let mut w = create(&path)?;
    writeln!(w, "t,analytic_mean,analytic_var,mc_mean,mc_stderr,mc_var").map_err(io_err(&path))?;
    for (t, m, v, mm, se, mv) in &rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt(*t),
            fmt(*m),
            fmt(*v),
            fmt(*mm),
            fmt(*se),
            fmt(*mv)
        )
        .map_err(io_err(&path))?;
    }
    w.flush().map_err(io_err(&path))?;
    report.files.push("summary.csv".into());

    let check_times: Vec<f64> = if scn.check.times.is_empty() {
        vec![r.sim.horizon]
    } else {
        scn.check.times.clone()
    };
    match &analytic {
        Analytic::Law(law) => {
            let path = dir.join("law.json");
            let text = serde_json::to_string_pretty(&law.export()).expect("plain data");
            fs::write(&path, text + "\n").map_err(io_err(&path))?;
            report.files.push("law.json".into());
            for &t in &check_times {
                let i = ens.record_index(t);
                let (_, m, _, mm, se, _) = rows[i];
                let diff = (mm - m).abs();
                let (value, limit) = if se > 0.0 {
                    (diff / se, scn.check.max_z)
                } else {
                    (diff, 1e-9)
                };
                report.checks.push(Check {
                    name: format!("mean_z@t={}", ens.times[i]),
                    passed: value <= limit,
                    value,
                    limit,
                });
            }
        }
        Analytic::Magnus(_) => {
            let until = check_times.iter().cloned().fold(0.0, f64::max);
            let worst = rows
                .iter()
                .filter(|row| row.0 <= until + 1e-12)
                .map(|row| (row.3 - row.1).abs())
                .fold(0.0, f64::max);
            report.checks.push(Check {
                name: format!("max_abs_diff@t<={until}"),
                passed: worst <= scn.check.max_abs,
                value: worst,
                limit: scn.check.max_abs,
            });
        }
    }

    if let Analytic::Law(law) = &analytic {
        for (i, &t) in scn.output.distribution_times.iter().enumerate() {
            let name = write_distribution(dir, &ens, law, t, i, scn, &mut report)?;
            report.files.push(name);
        }
    }

    if scn.kind == ScenarioKind::ApproxOrder {
        write_closures(dir, scn, &r, &analytic, &mut report)?;
    }

    for i in 0..scn.output.trajectories {
        let name = format!("trajectory_{i}.csv");
        let path = dir.join(&name);
        let mut w = create(&path)?;
        ens.write_trajectory_csv(i, &mut w).map_err(io_err(&path))?;
        w.flush().map_err(io_err(&path))?;
        report.files.push(name);
    }
    Ok(report)
}

/// Stream indices for direct law sampling sit far above any path index.
const LAW_STREAM_BASE: u64 = 1 << 62;

fn write_distribution(
    dir: &Path,
    ens: &Ensemble,
    law: &ScenarioLaw,
    t: f64,
    slice: usize,
    scn: &Scenario,
    report: &mut ScenarioReport,
) -> Result<String, RunError> {
    let r = ens.record_index(t);
    let t_rec = ens.times[r];
    let mc = SampleSet::new(ens.fidelities_at(r))?;
    let mut stream = rng::stream(scn.sim.seed, LAW_STREAM_BASE + slice as u64);
    let direct = SampleSet::new(sample_distribution(
        &law.series,
        &law.model,
        t_rec,
        scn.output.distribution_samples,
        &mut stream,
    ))?;
    let ks = ks_distance(&mc, &direct);
    report.checks.push(Check {
        name: format!("ks@t={t}"),
        passed: ks <= scn.check.max_ks,
        value: ks,
        limit: scn.check.max_ks,
    });
    let lo = mc.values().iter().chain(direct.values()).cloned().fold(1.0, f64::min);
    let grid = linspace(lo - 0.05 * (1.0 - lo), 1.0, 256);
    let dm = kde(&mc, &grid)?;
    let dl = kde(&direct, &grid)?;
    let cm = ecdf(&mc, &grid);
    let cl = ecdf(&direct, &grid);

    let name = format!("distribution_t{t}.csv");
    let path = dir.join(&name);
    let mut w = create(&path)?;
    writeln!(w, "F,mc_density,law_density,mc_cdf,law_cdf").map_err(io_err(&path))?;
    for i in 0..grid.len() {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt(grid[i]),
            fmt(dm.density[i]),
            fmt(dl.density[i]),
            fmt(cm[i]),
            fmt(cl[i])
        )
        .map_err(io_err(&path))?;
    }
    w.flush().map_err(io_err(&path))?;
    Ok(name)
}

fn write_closures(
    dir: &Path,
    scn: &Scenario,
    r: &Resolved,
    analytic: &Analytic,
    report: &mut ScenarioReport,
) -> Result<(), RunError> {
    let horizon = scn.output.approx_horizon.unwrap_or(r.sim.horizon);
    let s0 = sselab_core::laws::population(&r.s, &r.phi0)?;
    let every = (0.1 / DEFAULT_DT).round() as usize;
    let mut sols = Vec::new();
    for order in [ClosureOrder::First, ClosureOrder::Second] {
        let sys = ClosureSystem::new(order, r.model.gamma, r.model.k, s0)?;
        sols.push(integrate_closure(&sys, horizon, DEFAULT_DT, every)?);
    }
    let path = dir.join("approx.csv");
    let mut w = create(&path)?;
    writeln!(w, "t,exact_mean,order1,order2").map_err(io_err(&path))?;
    let mut dev = [None, None];
    for i in 0..sols[0].times.len() {
        let t = sols[0].times[i];
        let (exact, _) = analytic.mean_var(r, t)?;
        for (o, sol) in sols.iter().enumerate() {
            if dev[o].is_none() && (sol.fidelity[i] - exact).abs() > 0.01 {
                dev[o] = Some(t);
            }
        }
        writeln!(
            w,
            "{},{},{},{}",
            fmt(t),
            fmt(exact),
            fmt(sols[0].fidelity[i]),
            fmt(sols[1].fidelity[i])
        )
        .map_err(io_err(&path))?;
    }
    w.flush().map_err(io_err(&path))?;
    report.files.push("approx.csv".into());
    for (o, sol) in sols.iter().enumerate() {
        let key = format!("order{}", o + 1);
        report.notes.insert(
            key,
            serde_json::json!({
                "first_exit_unit_interval": sol.first_exit(0.0, 1.0),
                "first_deviation_over_0.01": dev[o],
                "max_imag_residue": sol.max_imag_residue,
            }),
        );
    }
    Ok(())
}

/// Runs every scenario of `cfg` under `out`. Single-scenario runs write
/// into `out` directly, others into one subdirectory per scenario.
pub fn run(cfg: &RunConfig, out: &Path, exec: Execution) -> Result<RunReport, RunError> {
    cfg.validate()?;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let single = cfg.scenarios.len() == 1;
    let mut scenarios = Vec::new();
    for scn in &cfg.scenarios {
        let dir: PathBuf = if single { out.to_path_buf() } else { out.join(&scn.name) };
        scenarios.push(run_scenario(scn, &dir, exec)?);
    }
    let report = RunReport {
        name: cfg.name.clone(),
        description: cfg.description.clone(),
        versions: VERSIONS,
        config: cfg.clone(),
        scenarios,
    };
    let path = out.join("run.json");
    let text = serde_json::to_string_pretty(&report).expect("plain data");
    fs::write(&path, text + "\n").map_err(io_err(&path))?;
    Ok(report)
}
