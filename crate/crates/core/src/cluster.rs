//! A deterministic, single-threaded storage cluster driven by scripted events.
//!
//! Compromised nodes keep honest copies of their data but send corrupted
//! symbols whenever they take part in a repair or a read. Decoding never
//! looks at which nodes are compromised.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{Fe, PrimeField};
use crate::audit::Captured;
use crate::code::{Code, CodeSpec, HelperData, RegeneratingCode, Share};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    Fail { node: usize },
    Repair { node: usize, helpers: Vec<usize>, p: usize },
    Reconstruct { readers: Vec<usize>, p: usize },
    Compromise { node: usize },
    TapStorage { node: usize },
    TapRepair { node: usize },
}

/// What a compromised node does to the symbols it sends.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Adversary {
    /// Replace every symbol with a fresh uniform element.
    #[default]
    UniformRandom,
    /// Add a nonzero offset to a single symbol.
    FlipOne,
}

impl Adversary {
    fn corrupt(self, field: PrimeField, symbols: &mut [Fe], rng: &mut ChaCha8Rng) {
        let q = field.modulus() as u64;
        match self {
            Adversary::UniformRandom => {
                for s in symbols.iter_mut() {
                    *s = field.elem(rng.gen_range(0..q));
                }
            }
            Adversary::FlipOne => {
                if !symbols.is_empty() {
                    let i = rng.gen_range(0..symbols.len());
                    symbols[i] += field.elem(rng.gen_range(1..q));
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeState {
    Live(Share),
    Failed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Outcome {
    Failed,
    /// `exact` is false when corruption beyond `p` slipped through as a
    /// wrong but consistent share.
    Repaired { exact: bool },
    RepairFailed { error: String },
    Reconstructed { exact: bool },
    ReconstructFailed { error: String },
    Compromised,
    Tapped,
}

impl Outcome {
    pub fn is_success(&self) -> bool {
        !matches!(
            self,
            Outcome::RepairFailed { .. }
                | Outcome::ReconstructFailed { .. }
                | Outcome::Repaired { exact: false }
                | Outcome::Reconstructed { exact: false }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub event: Event,
    #[serde(flatten)]
    pub outcome: Outcome,
}

/// Accumulated eavesdropper observations.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Eavesdropper {
    pub storage_nodes: BTreeSet<usize>,
    pub repair_nodes: BTreeSet<usize>,
    pub captured: Vec<Captured>,
}

/// Input document for a simulation run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub code: CodeSpec,
    pub message: Vec<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub adversary: Adversary,
    #[serde(default)]
    pub events: Vec<Event>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub seed: u64,
    pub successes: usize,
    pub failures: usize,
    pub log: Vec<LogEntry>,
    pub compromised: BTreeSet<usize>,
    pub failed_nodes: Vec<usize>,
    /// Every live share equals the one written at initialisation.
    pub shares_intact: bool,
    pub eavesdropper: Eavesdropper,
}

pub struct ClusterState {
    code: Code,
    nodes: BTreeMap<usize, NodeState>,
    original: Vec<Share>,
    message: Vec<Fe>,
    compromised: BTreeSet<usize>,
    eaves: Eavesdropper,
    log: Vec<LogEntry>,
    adversary: Adversary,
    seed: u64,
    rng: ChaCha8Rng,
}

impl ClusterState {
    /// Encodes `message` with randomness drawn from a generator seeded by
    /// `seed`; the same generator later drives the adversary.
    pub fn new(code: Code, message: &[u64], seed: u64, adversary: Adversary) -> Result<Self> {
        let field = code.field();
        let msg = message
            .iter()
            .map(|&v| {
                if v < field.modulus() as u64 {
                    Ok(field.elem(v))
                } else {
                    Err(Error::InvalidParams(format!("message symbol {v} is not below {}", field.modulus())))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let original = code.encode(&msg, &mut rng)?;
        let nodes = original.iter().map(|s| (s.node, NodeState::Live(s.clone()))).collect();
        Ok(ClusterState {
            code,
            nodes,
            original,
            message: msg,
            compromised: BTreeSet::new(),
            eaves: Eavesdropper::default(),
            log: vec![],
            adversary,
            seed,
            rng,
        })
    }

    pub fn from_config(config: &SimulationConfig) -> Result<Self> {
        ClusterState::new(config.code.build()?, &config.message, config.seed, config.adversary)
    }

    pub fn code(&self) -> &Code {
        &self.code
    }

    pub fn node(&self, node: usize) -> Option<&NodeState> {
        self.nodes.get(&node)
    }

    pub fn live_share(&self, node: usize) -> Option<&Share> {
        match self.nodes.get(&node) {
            Some(NodeState::Live(s)) => Some(s),
            _ => None,
        }
    }

    pub fn original(&self) -> &[Share] {
        &self.original
    }

    pub fn message(&self) -> &[Fe] {
        &self.message
    }

    pub fn compromised(&self) -> &BTreeSet<usize> {
        &self.compromised
    }

    pub fn eavesdropper(&self) -> &Eavesdropper {
        &self.eaves
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    pub fn shares_intact(&self) -> bool {
        self.nodes.iter().all(|(&i, s)| match s {
            NodeState::Live(share) => *share == self.original[i - 1],
            NodeState::Failed => true,
        })
    }

    fn check_node(&self, node: usize) -> Result<()> {
        if node == 0 || node > self.code.n() {
            return Err(Error::InvalidEvent(format!("node {node} outside 1..={}", self.code.n())));
        }
        Ok(())
    }

    fn require_live(&self, nodes: &[usize]) -> Result<()> {
        let mut seen = BTreeSet::new();
        for &x in nodes {
            self.check_node(x)?;
            if !seen.insert(x) {
                return Err(Error::InvalidEvent(format!("node {x} listed twice")));
            }
            if self.live_share(x).is_none() {
                return Err(Error::InvalidEvent(format!("node {x} is not live")));
            }
        }
        Ok(())
    }

    fn capture(&mut self, label: String, symbols: impl IntoIterator<Item = Fe>) {
        self.eaves.captured.extend(symbols.into_iter().enumerate().map(|(j, v)| Captured {
            label: format!("{label} symbol {j}"),
            value: v.value() as u64,
        }));
    }

    /// Applies one event. Failed repairs and reads are outcomes, not errors;
    /// an event that breaks its own preconditions is `InvalidEvent` and
    /// leaves the state unchanged.
    pub fn apply(&mut self, event: &Event) -> Result<Outcome> {
        let field = self.code.field();
        let outcome = match event {
            &Event::Fail { node } => {
                self.require_live(&[node])?;
                self.nodes.insert(node, NodeState::Failed);
                Outcome::Failed
            }
            Event::Repair { node, helpers, p } => {
                let (node, p) = (*node, *p);
                self.check_node(node)?;
                if self.live_share(node).is_some() {
                    return Err(Error::InvalidEvent(format!("node {node} has not failed")));
                }
                if helpers.len() != self.code.d() + 2 * p {
                    return Err(Error::InvalidEvent(format!(
                        "repair at p={p} takes {} helpers, got {}",
                        self.code.d() + 2 * p,
                        helpers.len()
                    )));
                }
                self.require_live(helpers)?;
                let mut data = vec![];
                for &h in helpers {
                    let share = self.live_share(h).unwrap().clone();
                    let mut symbols = self.code.helper_symbol(&share, node)?;
                    if self.compromised.contains(&h) {
                        self.adversary.corrupt(field, &mut symbols, &mut self.rng);
                    }
                    data.push(HelperData::new(h, symbols));
                }
                if self.eaves.repair_nodes.contains(&node) {
                    for h in &data {
                        self.capture(format!("repair {} of node {node} from {}", self.log.len(), h.node), h.symbols.clone());
                    }
                }
                match self.code.repair(node, &data, p) {
                    Ok(share) => {
                        let exact = share == self.original[node - 1];
                        self.nodes.insert(node, NodeState::Live(share));
                        Outcome::Repaired { exact }
                    }
                    Err(e) => Outcome::RepairFailed { error: e.to_string() },
                }
            }
            Event::Reconstruct { readers, p } => {
                let p = *p;
                if readers.len() < self.code.k() + 2 * p {
                    return Err(Error::InvalidEvent(format!(
                        "read at p={p} takes at least {} nodes, got {}",
                        self.code.k() + 2 * p,
                        readers.len()
                    )));
                }
                self.require_live(readers)?;
                let mut shares = vec![];
                for &r in readers {
                    let mut share = self.live_share(r).unwrap().clone();
                    if self.compromised.contains(&r) {
                        let mut flat: Vec<Fe> = share.stripes.concat();
                        self.adversary.corrupt(field, &mut flat, &mut self.rng);
                        let alpha = self.code.alpha();
                        share.stripes = flat.chunks(alpha).map(<[Fe]>::to_vec).collect();
                    }
                    shares.push(share);
                }
                match self.code.reconstruct(&shares, p) {
                    Ok(msg) => Outcome::Reconstructed { exact: msg == self.message },
                    Err(e) => Outcome::ReconstructFailed { error: e.to_string() },
                }
            }
            &Event::Compromise { node } => {
                self.check_node(node)?;
                self.compromised.insert(node);
                Outcome::Compromised
            }
            &Event::TapStorage { node } => {
                self.require_live(&[node])?;
                self.eaves.storage_nodes.insert(node);
                let stored: Vec<Fe> = self.live_share(node).unwrap().stripes.concat();
                self.capture(format!("stored node {node}"), stored);
                Outcome::Tapped
            }
            &Event::TapRepair { node } => {
                self.check_node(node)?;
                self.eaves.repair_nodes.insert(node);
                Outcome::Tapped
            }
        };
        self.log.push(LogEntry {
            event: event.clone(),
            outcome: outcome.clone(),
        });
        Ok(outcome)
    }

    pub fn report(&self) -> Report {
        let successes = self.log.iter().filter(|e| e.outcome.is_success()).count();
        Report {
            seed: self.seed,
            successes,
            failures: self.log.len() - successes,
            log: self.log.clone(),
            compromised: self.compromised.clone(),
            failed_nodes: self
                .nodes
                .iter()
                .filter(|(_, s)| matches!(s, NodeState::Failed))
                .map(|(&i, _)| i)
                .collect(),
            shares_intact: self.shares_intact(),
            eavesdropper: self.eaves.clone(),
        }
    }

    /// Applies every event in order. Stops at the first invalid event.
    pub fn run_script(&mut self, events: &[Event]) -> Result<Report> {
        for e in events {
            self.apply(e)?;
        }
        Ok(self.report())
    }
}

/// Builds a cluster from a config and runs its script.
pub fn simulate(config: &SimulationConfig) -> Result<Report> {
    ClusterState::from_config(config)?.run_script(&config.events)
}
