//! Built-in configurations, selectable by name on the command line.

use crate::config::{ConfigError, RunConfig};

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub toml: &'static str,
}

const FIG3: &str = r#"
name = "fig3"
description = "Pauli noise S = X, mean fidelity against first- and second-order closures"

[[scenario]]
name = "fig3"
kind = "approx-order"
noise = { kind = "ornstein-uhlenbeck", gamma = 0.2, k = 0.1, init = "calibrated" }
system = { noise_operator = "X", initial_state = "0" }
sim = { dt = 0.01, horizon = 50.0, paths = 200, seed = 3, record_every = 10 }
output = { approx_horizon = 60.0 }
check = { times = [0.5, 1.0, 2.0, 5.0] }
"#;

const FIG4: &str = r#"
name = "fig4"
description = "Pauli noise S = X, fidelity distributions at t = {1, 5, 10, 50, 100} x 0.06"

[[scenario]]
name = "fig4"
kind = "distribution"
noise = { kind = "ornstein-uhlenbeck", gamma = 0.2, k = 0.1, init = "calibrated" }
system = { noise_operator = "X", initial_state = "0" }
sim = { dt = 0.001, horizon = 6.0, paths = 2000, seed = 4, record_every = 60 }
output = { distribution_times = [0.06, 0.3, 0.6, 3.0, 6.0], distribution_samples = 2000 }
check = { times = [0.06, 0.3, 0.6, 3.0, 6.0] }
"#;

const FIG5: &str = r#"
name = "fig5"
description = "Non-commuting H = X, S = Z under white noise, one run per Bloch axis"

[[scenario]]
name = "c1"
kind = "noncommuting"
noise = { kind = "white-noise", gamma = 0.4 }
system = { noise_operator = "Z", hamiltonian = "X", alpha = 1.0, initial_state = "+" }
sim = { dt = 0.001, horizon = 10.0, paths = 1000, seed = 51, record_every = 50 }
check = { times = [5.0], max_abs = 0.02 }

[[scenario]]
name = "c2"
kind = "noncommuting"
noise = { kind = "white-noise", gamma = 0.4 }
system = { noise_operator = "Z", hamiltonian = "X", alpha = 1.0, initial_state = "0" }
sim = { dt = 0.001, horizon = 10.0, paths = 1000, seed = 52, record_every = 50 }
check = { times = [5.0], max_abs = 0.02 }

[[scenario]]
name = "c3"
kind = "noncommuting"
noise = { kind = "white-noise", gamma = 0.4 }
system = { noise_operator = "Z", hamiltonian = "X", alpha = 1.0, initial_state = "l" }
sim = { dt = 0.001, horizon = 10.0, paths = 1000, seed = 53, record_every = 50 }
check = { times = [5.0], max_abs = 0.02 }
"#;

const FIG6: &str = r#"
name = "fig6"
description = "Projection noise, stationary Ornstein-Uhlenbeck against white noise"

[[scenario]]
name = "ou"
kind = "projection"
noise = { kind = "ornstein-uhlenbeck", gamma = 0.1, k = 0.1, init = "stationary" }
system = { noise_operator = "P", initial_state = "+" }
sim = { dt = 0.01, horizon = 100.0, paths = 500, seed = 61, record_every = 50 }
check = { times = [1.0, 10.0, 50.0, 100.0] }

[[scenario]]
name = "wn"
kind = "projection"
noise = { kind = "white-noise", gamma = 0.1 }
system = { noise_operator = "P", initial_state = "+" }
sim = { dt = 0.01, horizon = 100.0, paths = 500, seed = 62, record_every = 50 }
check = { times = [1.0, 10.0, 50.0, 100.0] }
"#;

const FIG7A: &str = r#"
name = "fig7a"
description = "Two qubits, S = XI + IX, stationary noise with k = 0.3"

[[scenario]]
name = "product"
kind = "twoqubit"
noise = { kind = "ornstein-uhlenbeck", gamma = 0.2, k = 0.3, init = "stationary" }
system = { noise_operator = "X", initial_state = "00" }
sim = { dt = 0.01, horizon = 30.0, paths = 500, seed = 71, record_every = 25 }
check = { times = [1.0, 5.0, 10.0, 30.0] }

[[scenario]]
name = "ghz"
kind = "twoqubit"
noise = { kind = "ornstein-uhlenbeck", gamma = 0.2, k = 0.3, init = "stationary" }
system = { noise_operator = "X", initial_state = "ghz" }
sim = { dt = 0.01, horizon = 30.0, paths = 500, seed = 72, record_every = 25 }
check = { times = [1.0, 5.0, 10.0, 30.0] }
"#;

const FIG7B: &str = r#"
name = "fig7b"
description = "Two qubits, S = XI + IX, stationary noise with k = 0.01"

[[scenario]]
name = "product"
kind = "twoqubit"
noise = { kind = "ornstein-uhlenbeck", gamma = 0.2, k = 0.01, init = "stationary" }
system = { noise_operator = "X", initial_state = "00" }
sim = { dt = 0.01, horizon = 100.0, paths = 500, seed = 73, record_every = 50 }
check = { times = [1.0, 10.0, 50.0, 100.0] }

[[scenario]]
name = "ghz"
kind = "twoqubit"
noise = { kind = "ornstein-uhlenbeck", gamma = 0.2, k = 0.01, init = "stationary" }
system = { noise_operator = "X", initial_state = "ghz" }
sim = { dt = 0.01, horizon = 100.0, paths = 500, seed = 74, record_every = 50 }
check = { times = [1.0, 10.0, 50.0, 100.0] }
"#;

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig3",
        summary: "Pauli X, OU gamma=0.2 k=0.1 calibrated, 200 paths, closures of order 1 and 2",
        toml: FIG3,
    },
    Preset {
        name: "fig4",
        summary: "Pauli X, OU gamma=0.2 k=0.1 calibrated, distributions at t0 x {1,5,10,50,100}, t0=0.06",
        toml: FIG4,
    },
    Preset {
        name: "fig5",
        summary: "H=X, S=Z, white noise gamma=0.4, C1/C2/C3 initial states, 1000 paths",
        toml: FIG5,
    },
    Preset {
        name: "fig6",
        summary: "projection, OU gamma=0.1 k=0.1 stationary vs white noise, 500 paths",
        toml: FIG6,
    },
    Preset {
        name: "fig7a",
        summary: "two qubits XI+IX, OU gamma=0.2 k=0.3 stationary, |00> and GHZ, 500 paths",
        toml: FIG7A,
    },
    Preset {
        name: "fig7b",
        summary: "two qubits XI+IX, OU gamma=0.2 k=0.01 stationary, |00> and GHZ, 500 paths",
        toml: FIG7B,
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

pub fn load(name: &str) -> Result<RunConfig, ConfigError> {
    let p = find(name).ok_or_else(|| ConfigError::NotFound(name.to_string()))?;
    RunConfig::from_toml(p.toml)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioKind;
    use sselab_core::noise::InitialData;

    #[test]
    fn every_preset_parses() {
        for p in PRESETS {
            let cfg = load(p.name).unwrap();
            assert_eq!(cfg.name, p.name);
        }
        assert!(load("fig9").is_err());
    }

    #[test]
    fn preset_parameters() {
        let f3 = &load("fig3").unwrap().scenarios[0];
        assert_eq!((f3.noise.gamma, f3.noise.k, f3.sim.paths), (0.2, 0.1, 200));
        let f5 = load("fig5").unwrap();
        assert!(f5.scenarios.iter().all(|s| s.noise.gamma == 0.4
            && s.system.noise_operator == "Z"
            && s.system.hamiltonian.as_deref() == Some("X")));
        let f6 = &load("fig6").unwrap().scenarios[0];
        assert_eq!(
            (f6.noise.gamma, f6.noise.k, f6.noise.init),
            (0.1, 0.1, InitialData::Stationary)
        );
        let f7 = &load("fig7a").unwrap().scenarios[0];
        assert_eq!(f7.kind, ScenarioKind::Twoqubit);
        assert_eq!((f7.noise.gamma, f7.noise.k, f7.sim.paths), (0.2, 0.3, 500));
        let f4 = &load("fig4").unwrap().scenarios[0];
        let t0 = 0.06;
        for (t, m) in f4.output.distribution_times.iter().zip([1.0, 5.0, 10.0, 50.0, 100.0]) {
            assert!((t - m * t0).abs() < 1e-12);
        }
    }
}
