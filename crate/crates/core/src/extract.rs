//! Exact measurement-outcome distributions of dynamic circuits by branching
//! state-vector simulation.
//!
//! Every measurement splits the running simulation into a |0⟩ and a |1⟩
//! successor weighted by the checkpointed outcome probabilities. Both
//! successors continue from the shared prefix state, so the part of the
//! circuit before the k-th branching point is simulated at most `2^k` times.
//! Successors whose weight falls to the pruning threshold are never started.
//! Classically-controlled gates are applied or skipped according to the
//! branch's classical record; a reset on a qubit whose value the branch knows
//! becomes an `X` or nothing, and a reset on an unknown qubit splits the
//! branch without recording an output bit.
//!
//! Sibling branches are independent and run on a work-stealing pool. Results
//! are merged in tree order, so the distribution does not depend on how the
//! branches were scheduled.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;
use thiserror::Error;

use crate::circuit::{Circuit, Clbit, GateKind, Operation, UnitaryOp};
use crate::distribution::{bitstring_lsb_first, OutcomeDistribution};
use crate::sim::{SimConfig, SimError, StateVector};
use crate::workers::Workers;

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractConfig {
    /// Branches whose cumulative weight is at or below this are dropped.
    pub prune_threshold: f64,
    /// Upper bound on the number of branches created during one run.
    pub max_branches: u64,
    pub workers: Workers,
    pub sim: SimConfig,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            prune_threshold: 1e-12,
            max_branches: 1 << 26,
            workers: Workers::Auto,
            sim: SimConfig::default(),
        }
    }
}

impl ExtractConfig {
    pub fn sequential() -> Self {
        ExtractConfig { workers: Workers::Fixed(1), ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtractError {
    #[error("branch budget exceeded: more than {0} branches")]
    BranchBudgetExceeded(u64),
    #[error("op {op}: condition on unwritten clbit {clbit}")]
    UnwrittenClbit { op: usize, clbit: usize },
    #[error("expected {expected} forced outcomes, got {got}")]
    OutcomeCount { expected: usize, got: usize },
    #[error("invalid circuit: {0}")]
    Invalid(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// One recorded branching decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    /// Written clbit; `None` for the internal split of a reset on an unknown qubit.
    pub clbit: Option<Clbit>,
    pub outcome: bool,
    pub probability: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExtractStats {
    /// Successor branches that were started (the root is not counted).
    pub branches_simulated: u64,
    pub gate_applications: u64,
    /// Σ over gate applications of the state dimension `2^n`.
    pub amplitude_updates: u64,
    /// Gate applications per segment; segment `k` runs after the `k`-th checkpoint of a path.
    #[serde(skip)]
    pub segment_applications: Vec<u64>,
}

impl ExtractStats {
    fn merge(&mut self, other: ExtractStats) {
        self.branches_simulated += other.branches_simulated;
        self.gate_applications += other.gate_applications;
        self.amplitude_updates += other.amplitude_updates;
        if self.segment_applications.len() < other.segment_applications.len() {
            self.segment_applications.resize(other.segment_applications.len(), 0);
        }
        for (a, b) in self.segment_applications.iter_mut().zip(other.segment_applications) {
            *a += b;
        }
    }

    fn count_gate(&mut self, segment: usize, dim: usize) {
        self.gate_applications += 1;
        self.amplitude_updates += dim as u64;
        if self.segment_applications.len() <= segment {
            self.segment_applications.resize(segment + 1, 0);
        }
        self.segment_applications[segment] += 1;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub distribution: OutcomeDistribution,
    pub stats: ExtractStats,
}

#[derive(Debug, Clone)]
struct Branch {
    state: StateVector,
    path: Vec<Checkpoint>,
    weight: f64,
    classical: Vec<Option<bool>>,
    /// Basis value of a qubit when every nonzero amplitude agrees on it.
    known: Vec<Option<bool>>,
}

impl Branch {
    fn apply(&mut self, u: &UnitaryOp, stats: &mut ExtractStats) {
        self.state.apply(u);
        stats.count_gate(self.path.len(), self.state.amplitudes().len());
        track_knowledge(&mut self.known, u);
    }

    fn record(&mut self, checkpoint: Checkpoint) {
        self.weight *= checkpoint.probability;
        self.path.push(checkpoint);
    }
}

fn track_knowledge(known: &mut [Option<bool>], u: &UnitaryOp) {
    let uncontrolled = u.controls.is_empty();
    match u.gate {
        GateKind::Z
        | GateKind::S
        | GateKind::Sdg
        | GateKind::T
        | GateKind::Tdg
        | GateKind::P(_)
        | GateKind::RZ(_) => {}
        GateKind::X | GateKind::Y if uncontrolled => {
            let t = u.targets[0].0;
            known[t] = known[t].map(|v| !v);
        }
        GateKind::Swap if uncontrolled => known.swap(u.targets[0].0, u.targets[1].0),
        _ => {
            for t in &u.targets {
                known[t.0] = None;
            }
        }
    }
}

#[derive(Debug, Default)]
struct Partial {
    leaves: Vec<(String, f64)>,
    pruned: f64,
    stats: ExtractStats,
}

impl Partial {
    fn merge(&mut self, other: Partial) {
        self.leaves.extend(other.leaves);
        self.pruned += other.pruned;
        self.stats.merge(other.stats);
    }
}

struct Walker<'a> {
    circuit: &'a Circuit,
    output_order: Vec<Clbit>,
    cfg: &'a ExtractConfig,
    parallel: bool,
    created: AtomicU64,
}

impl Walker<'_> {
    fn spawn(&self) -> Result<(), ExtractError> {
        let n = self.created.fetch_add(1, Ordering::Relaxed) + 1;
        if n > self.cfg.max_branches {
            return Err(ExtractError::BranchBudgetExceeded(self.cfg.max_branches));
        }
        Ok(())
    }

    /// Splits `branch` on `qubit`. Returns the surviving successors.
    fn split(
        &self,
        mut branch: Branch,
        qubit: usize,
        clbit: Option<Clbit>,
        part: &mut Partial,
    ) -> Result<Vec<Branch>, ExtractError> {
        let p0 = branch.state.prob_zero(qubit);
        let probs = [p0, (1.0 - p0).max(0.0)];
        let alive: Vec<bool> = probs
            .iter()
            .map(|&p| p > self.cfg.sim.zero_prob_threshold && branch.weight * p > self.cfg.prune_threshold)
            .collect();
        for (k, &p) in probs.iter().enumerate() {
            if !alive[k] {
                part.pruned += branch.weight * p;
            }
        }
        let mut out = Vec::with_capacity(2);
        let survivors = alive.iter().filter(|a| **a).count();
        for (k, &p) in probs.iter().enumerate() {
            if !alive[k] {
                continue;
            }
            self.spawn()?;
            part.stats.branches_simulated += 1;
            let outcome = k == 1;
            let mut child = if survivors == 2 && k == 0 { branch.clone() } else {
                std::mem::replace(&mut branch, empty_branch())
            };
            child.state.collapse(qubit, outcome, p);
            child.record(Checkpoint { clbit, outcome, probability: p });
            child.known[qubit] = Some(outcome);
            if let Some(c) = clbit {
                child.classical[c.0] = Some(outcome);
            }
            out.push(child);
        }
        Ok(out)
    }

    fn run(&self, mut branch: Branch, start: usize) -> Result<Partial, ExtractError> {
        let mut part = Partial::default();
        let ops = &self.circuit.ops;
        let mut index = start;
        while index < ops.len() {
            match &ops[index] {
                Operation::Unitary(u) => branch.apply(u, &mut part.stats),
                Operation::ClassicControlled { op, condition } => {
                    match branch.classical[condition.clbit.0] {
                        None => {
                            return Err(ExtractError::UnwrittenClbit { op: index, clbit: condition.clbit.0 })
                        }
                        Some(v) if v == condition.value => branch.apply(op, &mut part.stats),
                        Some(_) => {}
                    }
                }
                Operation::Reset { qubit } if branch.known[qubit.0].is_some() => {
                    if branch.known[qubit.0] == Some(true) {
                        branch.apply(&UnitaryOp::new(GateKind::X, &[qubit.0]), &mut part.stats);
                    }
                }
                Operation::Reset { qubit } | Operation::Measure { qubit, .. } => {
                    let (clbit, is_reset) = match &ops[index] {
                        Operation::Measure { clbit, .. } => (Some(*clbit), false),
                        _ => (None, true),
                    };
                    let mut children = self.split(branch, qubit.0, clbit, &mut part)?;
                    if is_reset {
                        for child in children.iter_mut().filter(|c| c.known[qubit.0] == Some(true)) {
                            child.apply(&UnitaryOp::new(GateKind::X, &[qubit.0]), &mut part.stats);
                        }
                    }
                    match children.len() {
                        0 => return Ok(part),
                        1 => branch = children.pop().expect("one child"),
                        _ => {
                            let second = children.pop().expect("two children");
                            let first = children.pop().expect("two children");
                            let (a, b) = if self.parallel {
                                rayon::join(|| self.run(first, index + 1), || self.run(second, index + 1))
                            } else {
                                (self.run(first, index + 1), self.run(second, index + 1))
                            };
                            part.merge(a?);
                            part.merge(b?);
                            return Ok(part);
                        }
                    }
                }
            }
            index += 1;
        }
        let bits: Vec<bool> = self
            .output_order
            .iter()
            .map(|c| branch.classical[c.0].unwrap_or(false))
            .collect();
        part.leaves.push((bitstring_lsb_first(&bits), branch.weight));
        Ok(part)
    }
}

fn empty_branch() -> Branch {
    Branch {
        state: StateVector::init_basis(0, 0).expect("zero-qubit state"),
        path: Vec::new(),
        weight: 0.0,
        classical: Vec::new(),
        known: Vec::new(),
    }
}

fn basis_knowledge(num_qubits: usize, input: u64) -> Vec<Option<bool>> {
    (0..num_qubits).map(|q| Some((input >> q) & 1 == 1)).collect()
}

/// Extracts the complete outcome distribution of `g` for the basis input.
pub fn extract(g: &Circuit, input: u64, cfg: &ExtractConfig) -> Result<Extraction, ExtractError> {
    if let Some(e) = g.validate().into_iter().next() {
        return Err(ExtractError::Invalid(e.to_string()));
    }
    let root = Branch {
        state: StateVector::init_basis(g.num_qubits, input)?,
        path: Vec::new(),
        weight: 1.0,
        classical: vec![None; g.num_clbits],
        known: basis_knowledge(g.num_qubits, input),
    };
    let parallel = cfg.workers.count() > 1;
    let walker = Walker {
        circuit: g,
        output_order: g.output_order(),
        cfg,
        parallel,
        created: AtomicU64::new(0),
    };
    let part = if parallel {
        cfg.workers.install(|| walker.run(root, 0))?
    } else {
        walker.run(root, 0)?
    };

    let mut distribution = OutcomeDistribution::new(walker.output_order.len());
    for (key, p) in part.leaves {
        distribution.add(key, p);
    }
    distribution.pruned_mass = part.pruned;
    Ok(Extraction { distribution, stats: part.stats })
}

/// Probability of one specific sequence of measurement outcomes, computed
/// along a single forced path. Resets on qubits are resolved by summing over
/// both of their internal outcomes. Used as a brute-force reference for
/// [`extract`].
pub fn enumerate_forced(
    g: &Circuit,
    input: u64,
    outcomes: &[bool],
    sim: &SimConfig,
) -> Result<f64, ExtractError> {
    if let Some(e) = g.validate().into_iter().next() {
        return Err(ExtractError::Invalid(e.to_string()));
    }
    let expected = g.count_measurements();
    if outcomes.len() != expected {
        return Err(ExtractError::OutcomeCount { expected, got: outcomes.len() });
    }
    let state = StateVector::init_basis(g.num_qubits, input)?;
    forced_from(g, state, 0, outcomes, vec![None; g.num_clbits], sim)
}

fn forced_from(
    g: &Circuit,
    mut state: StateVector,
    start: usize,
    mut outcomes: &[bool],
    mut classical: Vec<Option<bool>>,
    sim: &SimConfig,
) -> Result<f64, ExtractError> {
    let mut weight = 1.0;
    for (index, op) in g.ops.iter().enumerate().skip(start) {
        match op {
            Operation::Unitary(u) => state.apply(u),
            Operation::ClassicControlled { op: u, condition } => match classical[condition.clbit.0] {
                None => return Err(ExtractError::UnwrittenClbit { op: index, clbit: condition.clbit.0 }),
                Some(v) => {
                    if v == condition.value {
                        state.apply(u)
                    }
                }
            },
            Operation::Measure { qubit, clbit } => {
                let (&outcome, rest) = outcomes.split_first().expect("outcome count checked");
                outcomes = rest;
                match state.project(qubit.0, outcome, sim) {
                    Ok(p) => weight *= p,
                    Err(SimError::ZeroProbabilityProjection { .. }) => return Ok(0.0),
                    Err(e) => return Err(e.into()),
                }
                classical[clbit.0] = Some(outcome);
            }
            Operation::Reset { qubit } => {
                let mut total = 0.0;
                for outcome in [false, true] {
                    let mut s = state.clone();
                    let p = match s.project(qubit.0, outcome, sim) {
                        Ok(p) => p,
                        Err(SimError::ZeroProbabilityProjection { .. }) => continue,
                        Err(e) => return Err(e.into()),
                    };
                    if outcome {
                        s.apply(&UnitaryOp::new(GateKind::X, &[qubit.0]));
                    }
                    total += p * forced_from(g, s, index + 1, outcomes, classical.clone(), sim)?;
                }
                return Ok(weight * total);
            }
        }
    }
    Ok(weight)
}
