//! Experiment orchestration: load a config, compile for every sweep point,
//! simulate, post-select and score against the noiseless unencoded run.

mod emit;
pub mod scenarios;

pub use emit::{emit, to_csv_string, Format};
pub use scenarios::{repro, scenario, Scenario, ScenarioRun, SCENARIOS};

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{sso, AnalysisError};
use crate::circuit::{parse_circuit, Circuit, Gate, GateKind, ParseError};
use crate::codes::{CodeError, CodeSpec, EncodedCircuit, HadamardMode, LayoutKind};
use crate::mitigation::{
    compile_for_strategy, mitigate, mitigate_exact, DecodePolicy, MitigationError, Strategy,
};
use crate::noise::{NoiseError, NoiseModel};
use crate::sim::{
    run_dm_with, run_trajectories, Backend, DmOptions, OutcomeDistribution, OutcomeHistogram,
    SimError,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV output: {0}")]
    Csv(#[from] csv::Error),
    #[error("circuit: {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Mitigation(#[from] MitigationError),
    #[error("simulation failed: {0}")]
    Sim(#[from] SimError),
    #[error("scoring failed: {0}")]
    Analysis(#[from] AnalysisError),
}

impl HarnessError {
    /// Whether the failure happened while simulating or scoring, as opposed
    /// to reading or validating the inputs.
    pub fn is_simulation(&self) -> bool {
        matches!(self, HarnessError::Sim(_) | HarnessError::Analysis(_))
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitSource {
    Path(PathBuf),
    Inline(String),
}

fn default_code() -> CodeSpec {
    CodeSpec::Repetition(1)
}

fn default_strategy() -> Strategy {
    Strategy::DM
}

pub const DEFAULT_SHOTS: u64 = 100_000;

fn default_shots() -> u64 {
    DEFAULT_SHOTS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub circuit: CircuitSource,
    /// Logical basis state prepared first, qubit 0 leftmost.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
    #[serde(default = "default_code")]
    pub code: CodeSpec,
    #[serde(default)]
    pub hmode: HadamardMode,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default = "default_strategy")]
    pub strategy: Strategy,
    #[serde(default)]
    pub policy: DecodePolicy,
    #[serde(default)]
    pub backend: Backend,
    /// Tableau backend only.
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
    /// Repetition distances to run instead of `code`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<usize>>,
    #[serde(default)]
    pub layout: LayoutKind,
    /// Let the DSM decoding circuit carry gate noise.
    #[serde(default)]
    pub noisy_decoder: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl ExperimentConfig {
    pub fn new(circuit: CircuitSource) -> Self {
        ExperimentConfig {
            circuit,
            initial: None,
            code: default_code(),
            hmode: HadamardMode::default(),
            noise: NoiseModel::default(),
            strategy: Strategy::DM,
            policy: DecodePolicy::PostSelect,
            backend: Backend::default(),
            shots: DEFAULT_SHOTS,
            seed: 0,
            sweep: None,
            layout: LayoutKind::default(),
            noisy_decoder: false,
            label: None,
        }
    }

    /// Reads a JSON config; a relative circuit path is resolved against the
    /// config's directory.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)?;
        if let CircuitSource::Path(p) = &mut cfg.circuit {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        if let Some(sweep) = &self.sweep {
            if sweep.is_empty() {
                return Err(HarnessError::Config("sweep is empty".into()));
            }
            if sweep.contains(&0) {
                return Err(HarnessError::Config(
                    "sweep distances must be at least 1".into(),
                ));
            }
            if self.code == CodeSpec::Steane {
                return Err(HarnessError::Config(
                    "sweep applies to the repetition code only".into(),
                ));
            }
        }
        if self.backend == Backend::TableauMc && self.shots == 0 {
            return Err(HarnessError::Config("shots must be positive".into()));
        }
        Ok(())
    }

    /// The codes visited, in order.
    pub fn points(&self) -> Vec<CodeSpec> {
        match &self.sweep {
            Some(s) => s.iter().map(|&d| CodeSpec::Repetition(d)).collect(),
            None => vec![self.code],
        }
    }
}

/// Loads the logical circuit, adding a final `measure q -> q` layer when
/// the circuit measures nothing.
pub fn load_circuit(source: &CircuitSource) -> Result<Circuit> {
    let text = match source {
        CircuitSource::Inline(s) => s.clone(),
        CircuitSource::Path(p) => {
            std::fs::read_to_string(p).map_err(|source| HarnessError::Io {
                path: p.clone(),
                source,
            })?
        }
    };
    let mut c = parse_circuit(&text)?;
    if !c.gates().iter().any(|g| g.kind == GateKind::Measure) {
        let n = c.num_qubits();
        c.grow_clbits(n);
        for q in 0..n {
            c.push(Gate::measure(q, q)).expect("clbits were grown");
        }
    }
    Ok(c)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub d: usize,
    pub code: CodeSpec,
    pub strategy: Strategy,
    pub policy: DecodePolicy,
    pub backend: Backend,
    /// `None` for exact runs.
    pub shots: Option<u64>,
    pub accepted: Option<u64>,
    pub post_rate: f64,
    /// SSO fidelity of the accepted logical distribution against the ideal.
    pub sso: f64,
    pub seed: u64,
    pub wall_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl RunRecord {
    pub fn same_result(&self, other: &RunRecord) -> bool {
        RunRecord {
            wall_ms: 0.0,
            ..self.clone()
        } == RunRecord {
            wall_ms: 0.0,
            ..other.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RawOutcome {
    Exact(OutcomeDistribution),
    Sampled(OutcomeHistogram),
}

/// One simulated sweep point before post-selection.
#[derive(Clone, Debug)]
pub struct PointRun {
    pub code: CodeSpec,
    pub strategy: Strategy,
    pub encoded: EncodedCircuit,
    pub raw: RawOutcome,
    pub wall_ms: f64,
}

/// Noiseless output distribution of the unencoded circuit.
pub fn ideal_distribution(logical: &Circuit, initial: Option<&str>) -> Result<OutcomeDistribution> {
    let enc = compile_for_strategy(
        &CodeSpec::Repetition(1),
        logical,
        HadamardMode::NonFT,
        Strategy::DM,
        LayoutKind::Interleaved,
        initial.map(str::to_owned),
        false,
    )?;
    let dist = run_dm_with(
        &enc.physical,
        &NoiseModel::noiseless(),
        &DmOptions::default(),
    )?;
    let m = mitigate_exact(
        &dist,
        &enc.classical,
        &enc.code,
        Strategy::DM,
        DecodePolicy::PostSelect,
    )?;
    Ok(m.logical)
}

pub fn simulate_point(
    cfg: &ExperimentConfig,
    logical: &Circuit,
    code: CodeSpec,
    strategy: Strategy,
) -> Result<PointRun> {
    let encoded = compile_for_strategy(
        &code,
        logical,
        cfg.hmode,
        strategy,
        cfg.layout,
        cfg.initial.clone(),
        cfg.noisy_decoder,
    )?;
    let start = Instant::now();
    let raw = match cfg.backend {
        Backend::DmExact => RawOutcome::Exact(run_dm_with(
            &encoded.physical,
            &cfg.noise,
            &DmOptions::default(),
        )?),
        Backend::TableauMc => RawOutcome::Sampled(run_trajectories(
            &encoded.physical,
            &cfg.noise,
            cfg.shots,
            cfg.seed,
        )?),
    };
    Ok(PointRun {
        code,
        strategy,
        encoded,
        raw,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Post-selects a simulated point under `policy` and scores it.
pub fn score_point(
    cfg: &ExperimentConfig,
    point: &PointRun,
    policy: DecodePolicy,
    ideal: &OutcomeDistribution,
) -> Result<RunRecord> {
    let start = Instant::now();
    let classical = &point.encoded.classical;
    let (shots, accepted, post_rate, logical) = match &point.raw {
        RawOutcome::Exact(dist) => {
            let m = mitigate_exact(dist, classical, &point.code, point.strategy, policy)?;
            (None, None, m.post_rate, m.logical)
        }
        RawOutcome::Sampled(hist) => {
            let m = mitigate(hist, classical, &point.code, point.strategy, policy)?;
            (
                Some(m.total),
                Some(m.accepted),
                m.post_rate,
                m.logical_distribution(),
            )
        }
    };
    let fidelity = match logical.normalized() {
        Some(l) => sso(&l, ideal)?,
        None => 0.0,
    };
    Ok(RunRecord {
        d: point.code.distance(),
        code: point.code,
        strategy: point.strategy,
        policy,
        backend: cfg.backend,
        shots,
        accepted,
        post_rate,
        sso: fidelity,
        seed: cfg.seed,
        wall_ms: point.wall_ms + start.elapsed().as_secs_f64() * 1e3,
        label: cfg.label.clone(),
    })
}

/// Runs every point of `cfg` for each strategy, scoring each simulation
/// under every policy that applies to it (correction policies are DM-only
/// and skipped elsewhere). Records are ordered by `(d, strategy, policy)`.
pub fn run_grid(
    cfg: &ExperimentConfig,
    strategies: &[Strategy],
    policies: &[DecodePolicy],
) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let logical = load_circuit(&cfg.circuit)?;
    let ideal = ideal_distribution(&logical, cfg.initial.as_deref())?;
    let mut out = Vec::new();
    for code in cfg.points() {
        for &strategy in strategies {
            let applicable: Vec<DecodePolicy> = policies
                .iter()
                .copied()
                .filter(|p| {
                    strategy == Strategy::DM && code != CodeSpec::Steane
                        || *p == DecodePolicy::PostSelect
                })
                .collect();
            if applicable.is_empty() {
                continue;
            }
            let point = simulate_point(cfg, &logical, code, strategy)?;
            for policy in applicable {
                out.push(score_point(cfg, &point, policy, &ideal)?);
            }
        }
    }
    out.sort_by_key(|r| (r.d, r.strategy, r.policy));
    Ok(out)
}

/// One record per sweep point for the configured strategy and policy.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let logical = load_circuit(&cfg.circuit)?;
    let ideal = ideal_distribution(&logical, cfg.initial.as_deref())?;
    cfg.points()
        .into_iter()
        .map(|code| {
            let point = simulate_point(cfg, &logical, code, cfg.strategy)?;
            score_point(cfg, &point, cfg.policy, &ideal)
        })
        .collect()
}
