use sselab_core::noise::{sample_path, InitialData, NoiseModel};
use sselab_core::qstate::{ComplexMatrix, PauliAxis, PureState};
use sselab_core::rng;
use sselab_core::sde::{simulate_paths, Scheme, SimConfig};
use sselab_core::stats::{ks_distance, SampleSet};
use sselab_core::Execution;
use statrs::distribution::{ContinuousCDF, Normal};

#[test]
fn quadratic_variation_of_white_noise() {
    let model = NoiseModel::white(0.7).unwrap();
    let mut s = rng::stream(5, 0);
    let path = sample_path(&model, 2.0, 1e-5, &mut s, (5, 0)).unwrap();
    let qv: f64 = path.values.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    let expected = 0.49 * 2.0;
    assert!((qv / expected - 1.0).abs() < 0.01, "{qv} vs {expected}");
}

#[test]
fn ou_transitions_are_standard_normal() {
    let model = NoiseModel::ou(0.5, 2.0, InitialData::Stationary).unwrap();
    let dt = 0.05;
    let mut s = rng::stream(6, 0);
    let path = sample_path(&model, 200.0, dt, &mut s, (6, 0)).unwrap();
    let decay = (-2.0 * dt).exp();
    let scale = 0.5 * ((1.0 - decay * decay) / 4.0).sqrt();
    let z: Vec<f64> = path.values.windows(2).map(|w| (w[1] - decay * w[0]) / scale).collect();
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut sorted = z.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let d = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = normal.cdf(x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max);
    assert!(d < 1.63 / n.sqrt(), "KS {d}");
    // Stationary start: X₀ itself has variance γ²/(2k).
    let x0: Vec<f64> = (0..4000)
        .map(|i| model.draw_initial(&mut rng::stream(7, i)) / model.initial_std())
        .collect();
    let reference: Vec<f64> = (0..4000)
        .map(|i| {
            let u = (i as f64 + 0.5) / 4000.0;
            normal.inverse_cdf(u)
        })
        .collect();
    let ks = ks_distance(&SampleSet::new(x0).unwrap(), &SampleSet::new(reference).unwrap());
    assert!(ks < 0.035, "{ks}");
}

fn small_config(seed: u64) -> SimConfig {
    SimConfig {
        dt: 1e-3,
        horizon: 0.5,
        n_paths: 64,
        master_seed: seed,
        record_every: 50,
        ..SimConfig::default()
    }
}

#[test]
fn sequential_and_parallel_agree_bitwise() {
    let model = NoiseModel::ou(0.4, 0.5, InitialData::Stationary).unwrap();
    let (h, s) = (PauliAxis::X.matrix(), PauliAxis::Z.matrix());
    let phi0 = PureState::basis(2, 0).unwrap();
    let cfg = small_config(11);
    let a = simulate_paths(&h, &s, &model, &phi0, &cfg, Execution::Sequential).unwrap();
    let b = simulate_paths(&h, &s, &model, &phi0, &cfg, Execution::Parallel).unwrap();
    assert_eq!(a, b);
    let mut buf_a = Vec::new();
    let mut buf_b = Vec::new();
    a.write_summary_csv(&mut buf_a).unwrap();
    b.write_summary_csv(&mut buf_b).unwrap();
    assert_eq!(buf_a, buf_b);
}

#[test]
fn seeds_select_independent_streams() {
    let model = NoiseModel::white(0.3).unwrap();
    let (h, s) = (ComplexMatrix::zeros(2), PauliAxis::X.matrix());
    let phi0 = PureState::basis(2, 0).unwrap();
    let a = simulate_paths(&h, &s, &model, &phi0, &small_config(1), Execution::Parallel).unwrap();
    let b = simulate_paths(&h, &s, &model, &phi0, &small_config(2), Execution::Parallel).unwrap();
    assert_ne!(a.paths[0].xs, b.paths[0].xs);
    assert_ne!(a.paths[0].xs, a.paths[1].xs);
}

#[test]
fn euler_maruyama_runs_and_stays_normalized() {
    let model = NoiseModel::white(0.3).unwrap();
    let (h, s) = (PauliAxis::X.matrix(), PauliAxis::Z.matrix());
    let phi0 = PureState::basis(2, 0).unwrap();
    let cfg = SimConfig {
        scheme: Scheme::EulerMaruyama,
        keep_states: true,
        ..small_config(3)
    };
    let ens = simulate_paths(&h, &s, &model, &phi0, &cfg, Execution::Parallel).unwrap();
    for p in &ens.paths {
        for psi in p.states.as_ref().unwrap() {
            let n: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }
}
