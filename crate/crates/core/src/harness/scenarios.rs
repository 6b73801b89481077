//! Built-in reproduction scenarios.
//!
//! | name    | circuit                                   | code, backend            |
//! |---------|-------------------------------------------|--------------------------|
//! | `fig4`  | 21 CX alternating (0,1), (1,2) on `111`   | rep 1..=5, tableau       |
//! | `fig5`  | two-qubit Grover marking `11`             | unencoded and Steane     |
//! | `fig7a` | six non-FT H                              | rep 1..=5, exact         |
//! | `fig7b` | three S S† pairs                          | rep 1..=5, exact         |
//! | `hdw11` | 11 CX(0,1) on `00` and `11`, all policies | rep 1..=5, tableau       |
//! | `hdw35` | the same with 35 CX                       | rep 1..=5, tableau       |
//!
//! The `hdw*` scenarios are simulated stand-ins for the device runs, with a
//! 1% two-qubit error rate; their records carry a "simulated analog" label.

use std::fmt::Write;

use super::{run_grid, CircuitSource, ExperimentConfig, HarnessError, Result, RunRecord};
use crate::codes::{CodeSpec, HadamardMode};
use crate::mitigation::{DecodePolicy, Strategy};
use crate::noise::NoiseModel;
use crate::sim::Backend;

pub const SCENARIOS: [&str; 6] = ["fig4", "fig5", "fig7a", "fig7b", "hdw11", "hdw35"];

#[derive(Clone, Debug)]
pub struct ScenarioRun {
    pub config: ExperimentConfig,
    pub strategies: Vec<Strategy>,
    pub policies: Vec<DecodePolicy>,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub runs: Vec<ScenarioRun>,
}

impl Scenario {
    pub fn with_shots(mut self, shots: u64) -> Self {
        self.runs.iter_mut().for_each(|r| r.config.shots = shots);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.runs.iter_mut().for_each(|r| r.config.seed = seed);
        self
    }

    /// Records of every run, in run order.
    pub fn run(&self) -> Result<Vec<RunRecord>> {
        let mut out = Vec::new();
        for r in &self.runs {
            out.extend(run_grid(&r.config, &r.strategies, &r.policies)?);
        }
        Ok(out)
    }
}

fn repeated(qubits: usize, lines: &[&str], times: usize) -> String {
    let mut s = format!("qubits {qubits}");
    for _ in 0..times {
        for l in lines {
            let _ = write!(s, "\n{l}");
        }
    }
    s
}

pub fn cnot_cascade() -> String {
    let mut s = repeated(3, &["cx 0 1", "cx 1 2"], 10);
    s.push_str("\ncx 0 1");
    s
}

pub fn grover_two_qubit() -> String {
    [
        "qubits 2", "h 0", "h 1", "cz 0 1", "h 0", "h 1", "x 0", "x 1", "cz 0 1", "x 0", "x 1",
        "h 0", "h 1",
    ]
    .join("\n")
}

fn base(circuit: String, noise: NoiseModel, backend: Backend) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(CircuitSource::Inline(circuit));
    cfg.noise = noise;
    cfg.backend = backend;
    cfg
}

fn sweep(mut cfg: ExperimentConfig, ds: impl IntoIterator<Item = usize>) -> ExperimentConfig {
    cfg.sweep = Some(ds.into_iter().collect());
    cfg
}

fn dm_only(config: ExperimentConfig) -> ScenarioRun {
    ScenarioRun {
        config,
        strategies: vec![Strategy::DM],
        policies: vec![DecodePolicy::PostSelect],
    }
}

fn noise(p1: f64, p2: f64) -> NoiseModel {
    NoiseModel::new(p1, p2).expect("scenario rates are probabilities")
}

fn hdw(name: &str, gates: usize) -> Scenario {
    let runs = ["00", "11"]
        .into_iter()
        .map(|initial| {
            let mut cfg = sweep(
                base(
                    repeated(2, &["cx 0 1"], gates),
                    noise(0.001, 0.01),
                    Backend::TableauMc,
                ),
                1..=5,
            );
            cfg.initial = Some(initial.into());
            cfg.label = Some(format!("simulated analog |{initial}>"));
            ScenarioRun {
                config: cfg,
                strategies: vec![Strategy::DM],
                policies: DecodePolicy::ALL.to_vec(),
            }
        })
        .collect();
    Scenario {
        name: name.into(),
        runs,
    }
}

/// The named scenario's configuration, without running it.
pub fn scenario(name: &str) -> Result<Scenario> {
    let runs = match name {
        "fig4" => {
            let mut cfg = sweep(
                base(cnot_cascade(), noise(0.001, 0.01), Backend::TableauMc),
                1..=5,
            );
            cfg.initial = Some("111".into());
            vec![ScenarioRun {
                config: cfg,
                strategies: Strategy::ALL.to_vec(),
                policies: vec![DecodePolicy::PostSelect],
            }]
        }
        "fig5" => [CodeSpec::Repetition(1), CodeSpec::Steane]
            .into_iter()
            .map(|code| {
                let mut cfg = base(grover_two_qubit(), noise(3e-7, 2e-5), Backend::TableauMc);
                cfg.code = code;
                cfg.hmode = HadamardMode::FTGadget;
                ScenarioRun {
                    config: cfg,
                    strategies: vec![Strategy::DM, Strategy::DSM],
                    policies: vec![DecodePolicy::PostSelect],
                }
            })
            .collect(),
        "fig7a" => vec![dm_only(sweep(
            base(
                repeated(1, &["h 0"], 6),
                noise(0.001, 0.01),
                Backend::DmExact,
            ),
            1..=5,
        ))],
        "fig7b" => vec![dm_only(sweep(
            base(
                repeated(1, &["s 0", "sdg 0"], 3),
                noise(0.001, 0.01),
                Backend::DmExact,
            ),
            1..=5,
        ))],
        "hdw11" => return Ok(hdw(name, 11)),
        "hdw35" => return Ok(hdw(name, 35)),
        _ => return Err(HarnessError::UnknownScenario(name.into())),
    };
    Ok(Scenario {
        name: name.into(),
        runs,
    })
}

/// Builds and runs a named scenario.
pub fn repro(name: &str) -> Result<Vec<RunRecord>> {
    scenario(name)?.run()
}
