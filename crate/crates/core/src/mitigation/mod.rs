//! Post-selection on the code space.
//!
//! A shot is kept only if every logical readout block passes its test:
//!
//! * **DM** reads the block directly and keeps codewords (or, under a
//!   correction policy, majority-decodes outside a Hamming band);
//! * **DSM** decodes first and keeps shots whose non-primary positions read 0;
//! * **SS** extracts every generator with a cat ancilla and keeps shots whose
//!   syndromes are all trivial, then applies the DM post-selection rule.

pub mod pcs;

use crate::circuit::Circuit;
use crate::codes::{
    compile_with, BlockReadout, ClassicalLayout, CodeError, CodeSpec, CompileOptions,
    EncodedCircuit, HadamardMode, LayoutKind, Readout,
};
use crate::sim::{OutcomeDistribution, OutcomeHistogram};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MitigationError {
    #[error("bitstring has length {got}, expected {expected}")]
    Length { expected: usize, got: usize },
    #[error("{strategy} cannot be applied: {reason}")]
    StrategyMismatch {
        strategy: Strategy,
        reason: &'static str,
    },
    #[error("policy {policy} applies to DM on the repetition code only")]
    InvalidPolicy { policy: DecodePolicy },
    #[error("a check is not a stabilizer element: {0}")]
    NotAStabilizer(String),
    #[error("checks do not satisfy R U L = U: expected right check {expected}, got {got}")]
    NotACheckPair { expected: String, got: String },
    #[error("payload must be a unitary Clifford circuit")]
    NonUnitaryPayload,
    #[error(transparent)]
    Code(#[from] CodeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Strategy {
    DM,
    DSM,
    SS,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::DM, Strategy::DSM, Strategy::SS];

    pub fn readout(self, noisy_decoder: bool) -> Readout {
        match self {
            Strategy::DM => Readout::Direct,
            Strategy::DSM => Readout::Decoded {
                noisy: noisy_decoder,
            },
            Strategy::SS => Readout::Syndromes,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::DM => "DM",
            Strategy::DSM => "DSM",
            Strategy::SS => "SS",
        })
    }
}

impl FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "DM" => Ok(Strategy::DM),
            "DSM" => Ok(Strategy::DSM),
            "SS" => Ok(Strategy::SS),
            _ => Err(format!("unknown strategy `{s}` (expected DM, DSM or SS)")),
        }
    }
}

impl TryFrom<String> for Strategy {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Strategy> for String {
    fn from(s: Strategy) -> String {
        s.to_string()
    }
}

/// Readouts discarded by the correction policy in addition to ties.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Band {
    None,
    /// `|w - d/2| <= sqrt(d)/2`: within one binomial standard deviation of
    /// the mean Hamming weight.
    OneSigma,
}

#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(try_from = "String", into = "String")]
pub enum DecodePolicy {
    #[default]
    PostSelect,
    Correct {
        band: Band,
    },
}

impl DecodePolicy {
    pub const ALL: [DecodePolicy; 3] = [
        DecodePolicy::PostSelect,
        DecodePolicy::Correct { band: Band::None },
        DecodePolicy::Correct {
            band: Band::OneSigma,
        },
    ];
}

impl fmt::Display for DecodePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecodePolicy::PostSelect => "postselect",
            DecodePolicy::Correct { band: Band::None } => "correct",
            DecodePolicy::Correct {
                band: Band::OneSigma,
            } => "correct_1sigma",
        })
    }
}

impl FromStr for DecodePolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "postselect" | "post_select" => Ok(DecodePolicy::PostSelect),
            "correct" => Ok(DecodePolicy::Correct { band: Band::None }),
            "correct_1sigma" | "correct_one_sigma" => Ok(DecodePolicy::Correct {
                band: Band::OneSigma,
            }),
            _ => Err(format!(
                "unknown policy `{s}` (expected postselect, correct or correct_1sigma)"
            )),
        }
    }
}

impl TryFrom<String> for DecodePolicy {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<DecodePolicy> for String {
    fn from(p: DecodePolicy) -> String {
        p.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    /// Logical bits, one character per logical bit.
    Accept(String),
    Reject,
}

fn bit(b: u8) -> bool {
    b == b'1'
}

/// Direct-measurement test of one block readout. `Ok(None)` rejects.
pub fn dm_decode_block(
    block: &[u8],
    code: &CodeSpec,
    policy: DecodePolicy,
) -> Result<Option<bool>, MitigationError> {
    if block.len() != code.block_size() {
        return Err(MitigationError::Length {
            expected: code.block_size(),
            got: block.len(),
        });
    }
    match (code, policy) {
        (CodeSpec::Steane, DecodePolicy::PostSelect) => {
            let ok = code
                .z_checks()
                .iter()
                .all(|check| check.iter().filter(|&&k| bit(block[k])).count() % 2 == 0);
            let logical = code
                .logical_z_support()
                .iter()
                .filter(|&&k| bit(block[k]))
                .count()
                % 2
                == 1;
            Ok(ok.then_some(logical))
        }
        (CodeSpec::Steane, _) => Err(MitigationError::InvalidPolicy { policy }),
        (CodeSpec::Repetition(d), _) => {
            let d = *d;
            let w = block.iter().filter(|&&b| bit(b)).count();
            Ok(match policy {
                DecodePolicy::PostSelect => match w {
                    0 => Some(false),
                    w if w == d => Some(true),
                    _ => None,
                },
                // Unencoded blocks carry no redundancy and are read as is.
                DecodePolicy::Correct { .. } if d == 1 => Some(w == 1),
                DecodePolicy::Correct { band } => {
                    let tie = 2 * w == d;
                    let in_band = band == Band::OneSigma
                        && (w as f64 - d as f64 / 2.0).abs() <= (d as f64).sqrt() / 2.0;
                    if tie || in_band {
                        None
                    } else {
                        let value = 2 * w > d;
                        let flips = if value { d - w } else { w };
                        assert!(flips <= (d - 1) / 2, "corrected {flips} flips at d = {d}");
                        Some(value)
                    }
                }
            })
        }
    }
}

/// Decoded-readout test: the non-primary positions must all read 0.
pub fn dsm_decode_block(block: &[u8], primary: usize) -> Option<bool> {
    let clean = block
        .iter()
        .enumerate()
        .all(|(k, &b)| k == primary || !bit(b));
    clean.then(|| bit(block[primary]))
}

/// Syndrome test followed by the DM post-selection rule on the data.
pub fn ss_decode_block(
    block: &[u8],
    syndromes: &[[u8; 2]],
    code: &CodeSpec,
) -> Result<Option<bool>, MitigationError> {
    if syndromes.iter().any(|[a, b]| bit(*a) != bit(*b)) {
        return Ok(None);
    }
    dm_decode_block(block, code, DecodePolicy::PostSelect)
}

/// Decodes a direct readout in which `blocks[j]` lists the positions of
/// logical block `j` inside `bits`.
pub fn dm_decode(
    bits: &str,
    blocks: &[Vec<usize>],
    code: &CodeSpec,
    policy: DecodePolicy,
) -> Result<Decision, MitigationError> {
    let b = bits.as_bytes();
    let expected = blocks.iter().map(Vec::len).sum();
    if b.len() != expected {
        return Err(MitigationError::Length {
            expected,
            got: b.len(),
        });
    }
    let mut out = String::with_capacity(blocks.len());
    for block in blocks {
        let vals: Vec<u8> = block.iter().map(|&k| b[k]).collect();
        match dm_decode_block(&vals, code, policy)? {
            Some(v) => out.push(if v { '1' } else { '0' }),
            None => return Ok(Decision::Reject),
        }
    }
    Ok(Decision::Accept(out))
}

fn check_policy(
    code: &CodeSpec,
    strategy: Strategy,
    policy: DecodePolicy,
) -> Result<(), MitigationError> {
    let correct = matches!(policy, DecodePolicy::Correct { .. });
    if correct && (strategy != Strategy::DM || *code == CodeSpec::Steane) {
        return Err(MitigationError::InvalidPolicy { policy });
    }
    Ok(())
}

fn check_readout(
    r: &BlockReadout,
    code: &CodeSpec,
    strategy: Strategy,
) -> Result<(), MitigationError> {
    let gens = crate::codes::stabilizer_generators(code).len();
    let mismatch = |reason| MitigationError::StrategyMismatch { strategy, reason };
    match strategy {
        Strategy::DSM if !r.decoded && code.block_size() > 1 => {
            Err(mismatch("readout was not decoded"))
        }
        Strategy::DM if r.decoded => Err(mismatch("readout was decoded")),
        Strategy::SS if r.syndromes.len() != gens => Err(mismatch("missing syndrome bits")),
        _ => Ok(()),
    }
}

/// Decodes one shot keyed by the full classical register.
pub fn decode_shot(
    key: &[u8],
    classical: &ClassicalLayout,
    code: &CodeSpec,
    strategy: Strategy,
    policy: DecodePolicy,
) -> Result<Decision, MitigationError> {
    let mut out = String::with_capacity(classical.readouts.len());
    let mut block = Vec::with_capacity(code.block_size());
    for r in &classical.readouts {
        let get = |c: usize| {
            key.get(c).copied().ok_or(MitigationError::Length {
                expected: c + 1,
                got: key.len(),
            })
        };
        block.clear();
        for &c in &r.clbits {
            block.push(get(c)?);
        }
        if block.is_empty() {
            // Never measured: the logical bit reads 0.
            out.push('0');
            continue;
        }
        let v = match strategy {
            Strategy::DM => dm_decode_block(&block, code, policy)?,
            Strategy::DSM if code.block_size() == 1 => Some(bit(block[0])),
            Strategy::DSM => dsm_decode_block(&block, classical.primary),
            Strategy::SS => {
                let syn = r
                    .syndromes
                    .iter()
                    .map(|&[a, b]| Ok([get(a)?, get(b)?]))
                    .collect::<Result<Vec<_>, MitigationError>>()?;
                ss_decode_block(&block, &syn, code)?
            }
        };
        match v {
            Some(v) => out.push(if v { '1' } else { '0' }),
            None => return Ok(Decision::Reject),
        }
    }
    Ok(Decision::Accept(out))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MitigationResult {
    pub strategy: Strategy,
    pub policy: DecodePolicy,
    pub accepted: u64,
    pub total: u64,
    pub post_rate: f64,
    pub logical_counts: BTreeMap<String, u64>,
}

impl MitigationResult {
    pub fn logical_distribution(&self) -> OutcomeDistribution {
        let n = self.accepted.max(1) as f64;
        self.logical_counts
            .iter()
            .map(|(k, &v)| (k.clone(), v as f64 / n))
            .collect()
    }
}

fn validate(
    classical: &ClassicalLayout,
    code: &CodeSpec,
    strategy: Strategy,
    policy: DecodePolicy,
) -> Result<(), MitigationError> {
    check_policy(code, strategy, policy)?;
    for r in classical.readouts.iter().filter(|r| !r.clbits.is_empty()) {
        check_readout(r, code, strategy)?;
    }
    Ok(())
}

/// Applies the strategy's test to every histogram entry.
pub fn mitigate(
    hist: &OutcomeHistogram,
    classical: &ClassicalLayout,
    code: &CodeSpec,
    strategy: Strategy,
    policy: DecodePolicy,
) -> Result<MitigationResult, MitigationError> {
    validate(classical, code, strategy, policy)?;
    let mut logical_counts = BTreeMap::new();
    let mut accepted = 0;
    for (key, &count) in &hist.counts {
        if let Decision::Accept(l) = decode_shot(key.as_bytes(), classical, code, strategy, policy)?
        {
            *logical_counts.entry(l).or_insert(0) += count;
            accepted += count;
        }
    }
    Ok(MitigationResult {
        strategy,
        policy,
        accepted,
        total: hist.shots,
        post_rate: if hist.shots == 0 {
            0.0
        } else {
            accepted as f64 / hist.shots as f64
        },
        logical_counts,
    })
}

/// Exact counterpart of [`mitigate`] for a probability distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactMitigation {
    pub post_rate: f64,
    /// Accepted logical distribution, renormalised.
    pub logical: OutcomeDistribution,
}

pub fn mitigate_exact(
    dist: &OutcomeDistribution,
    classical: &ClassicalLayout,
    code: &CodeSpec,
    strategy: Strategy,
    policy: DecodePolicy,
) -> Result<ExactMitigation, MitigationError> {
    validate(classical, code, strategy, policy)?;
    let mut logical: BTreeMap<String, f64> = BTreeMap::new();
    let mut kept = 0.0;
    for (key, &p) in &dist.probs {
        if let Decision::Accept(l) = decode_shot(key.as_bytes(), classical, code, strategy, policy)?
        {
            *logical.entry(l).or_insert(0.0) += p;
            kept += p;
        }
    }
    if kept > 0.0 {
        logical.values_mut().for_each(|v| *v /= kept);
    }
    Ok(ExactMitigation {
        post_rate: kept,
        logical: OutcomeDistribution { probs: logical },
    })
}

/// Compiles `logical` with the measurement tail required by `strategy`.
pub fn compile_for_strategy(
    code: &CodeSpec,
    logical: &Circuit,
    hmode: HadamardMode,
    strategy: Strategy,
    layout: LayoutKind,
    initial: Option<String>,
    noisy_decoder: bool,
) -> Result<EncodedCircuit, MitigationError> {
    let options = CompileOptions {
        layout,
        readout: strategy.readout(noisy_decoder),
        initial,
    };
    Ok(compile_with(code, logical, hmode, &options)?)
}
