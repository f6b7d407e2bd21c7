//! Benchmark circuit families (Bernstein–Vazirani, QFT, phase estimation) in
//! static and dynamic form, plus seeded random circuits for property tests.
//!
//! Bitstrings such as BV secrets are written like outcome keys: the last
//! character is clbit 0.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::angle::Angle;
use crate::circuit::{Circuit, Clbit, Condition, Control, GateKind, Operation, Polarity, Qubit, UnitaryOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Bv,
    Qft,
    Qpe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Static,
    Dynamic,
}

impl FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bv" => Ok(Family::Bv),
            "qft" => Ok(Family::Qft),
            "qpe" | "iqpe" => Ok(Family::Qpe),
            _ => Err(format!("unknown family `{s}` (expected bv, qft or qpe)")),
        }
    }
}

impl FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "static" => Ok(Variant::Static),
            "dynamic" => Ok(Variant::Dynamic),
            _ => Err(format!("unknown variant `{s}` (expected static or dynamic)")),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Bv => "bv",
            Family::Qft => "qft",
            Family::Qpe => "qpe",
        })
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Static => "static",
            Variant::Dynamic => "dynamic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BenchError {
    #[error("size must be at least 1")]
    ZeroSize,
    #[error("secret `{secret}` must be {size} characters of 0/1")]
    BadSecret { secret: String, size: usize },
    #[error("theta must lie in [0, 2π), got {0}")]
    ThetaOutOfRange(String),
}

/// Parameters of one benchmark instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec {
    pub family: Family,
    pub variant: Variant,
    /// Secret length, QFT width, or phase-estimation precision.
    pub size: usize,
    /// Phase-gate angle for `qpe`; defaults to `3π/8`.
    pub theta: Option<Angle>,
    /// Secret for `bv`; defaults to all ones.
    pub secret: Option<String>,
}

pub fn default_theta() -> Angle {
    Angle::pi_frac(3, 8)
}

impl BenchSpec {
    pub fn new(family: Family, variant: Variant, size: usize) -> Self {
        BenchSpec { family, variant, size, theta: None, secret: None }
    }

    pub fn build(&self) -> Result<Circuit, BenchError> {
        if self.size == 0 {
            return Err(BenchError::ZeroSize);
        }
        match self.family {
            Family::Bv => {
                let secret = self.secret.clone().unwrap_or_else(|| "1".repeat(self.size));
                if secret.len() != self.size || !secret.chars().all(|c| c == '0' || c == '1') {
                    return Err(BenchError::BadSecret { secret, size: self.size });
                }
                Ok(match self.variant {
                    Variant::Static => bv_static(&secret),
                    Variant::Dynamic => bv_dynamic(&secret),
                })
            }
            Family::Qft => Ok(match self.variant {
                Variant::Static => qft_static(self.size),
                Variant::Dynamic => qft_dynamic(self.size),
            }),
            Family::Qpe => {
                let theta = self.theta.unwrap_or_else(default_theta);
                let r = theta.radians();
                if !(0.0..2.0 * std::f64::consts::PI).contains(&r) {
                    return Err(BenchError::ThetaOutOfRange(theta.to_string()));
                }
                Ok(match self.variant {
                    Variant::Static => qpe_static(self.size, theta),
                    Variant::Dynamic => iqpe_dynamic(self.size, theta),
                })
            }
        }
    }
}

/// The static partner's qubit count, used for qubit accounting checks.
pub fn static_qubits(family: Family, size: usize) -> usize {
    match family {
        Family::Bv | Family::Qpe => size + 1,
        Family::Qft => size,
    }
}

fn secret_bits(secret: &str) -> Vec<bool> {
    secret.chars().rev().map(|c| c == '1').collect()
}

/// Controlled `P(−π/2^d)`, written as `S†`/`T†` where possible.
fn inverse_rotation(d: usize) -> GateKind {
    match d {
        1 => GateKind::Sdg,
        2 => GateKind::Tdg,
        _ => GateKind::P(Angle::pi_frac(-1, 1 << d)),
    }
}

/// Textbook phase estimation with `m` counting qubits (`0..m`) and the
/// eigenstate `|1⟩` of `P(θ)` on qubit `m`. Counting qubit `j` carries the
/// `j`-th least significant bit of the estimate and is measured to clbit `j`.
pub fn qpe_static(m: usize, theta: Angle) -> Circuit {
    assert!(m >= 1, "precision must be positive");
    let mut g = Circuit::new(m + 1, m).named(format!("qpe_static_{m}"));
    g.x(m);
    for j in 0..m {
        g.h(j);
    }
    for j in 0..m {
        g.cp(theta.scaled_mod_2pi(1 << (m - 1 - j)), j, m);
    }
    for k in 0..m {
        for j in 0..k {
            g.controlled(inverse_rotation(k - j), &[Control::pos(j)], &[k]);
        }
        g.h(k);
    }
    for j in 0..m {
        g.measure(j, j);
    }
    g
}

/// Iterative phase estimation: work qubit 0 is measured and reset once per
/// bit, eigenstate on qubit 1. Round `k` determines clbit `k` and corrects
/// with `P(−π/2^(k−j))` for every earlier bit `j` that read 1.
pub fn iqpe_dynamic(m: usize, theta: Angle) -> Circuit {
    assert!(m >= 1, "precision must be positive");
    let mut g = Circuit::new(2, m).named(format!("iqpe_dynamic_{m}"));
    g.x(1);
    for k in 0..m {
        g.h(0);
        g.cp(theta.scaled_mod_2pi(1 << (m - 1 - k)), 0, 1);
        for j in 0..k {
            g.c_if(j, true, GateKind::P(Angle::pi_frac(-1, 1 << (k - j))), &[0]);
        }
        g.h(0).measure(0, k);
        if k + 1 < m {
            g.reset(0);
        }
    }
    g
}

/// Bernstein–Vazirani with data qubits `0..n` and the `|−⟩` ancilla on qubit `n`.
pub fn bv_static(secret: &str) -> Circuit {
    let bits = secret_bits(secret);
    let n = bits.len();
    assert!(n >= 1, "secret must be nonempty");
    let mut g = Circuit::new(n + 1, n).named(format!("bv_static_{secret}"));
    g.x(n).h(n);
    for i in 0..n {
        g.h(i);
    }
    for (i, &b) in bits.iter().enumerate() {
        if b {
            g.cx(i, n);
        }
    }
    for i in 0..n {
        g.h(i);
    }
    for i in 0..n {
        g.measure(i, i);
    }
    g
}

/// Bernstein–Vazirani on two qubits: the work qubit queries one secret bit
/// per round and is reset in between.
pub fn bv_dynamic(secret: &str) -> Circuit {
    let bits = secret_bits(secret);
    let n = bits.len();
    assert!(n >= 1, "secret must be nonempty");
    let mut g = Circuit::new(2, n).named(format!("bv_dynamic_{secret}"));
    g.x(1).h(1);
    for (i, &b) in bits.iter().enumerate() {
        g.h(0);
        if b {
            g.cx(0, 1);
        }
        g.h(0).measure(0, i);
        if i + 1 < n {
            g.reset(0);
        }
    }
    g
}

/// Quantum Fourier transform on `n` qubits (qubit 0 most significant, no
/// final swaps), followed by measuring qubit `k` into clbit `k`.
pub fn qft_static(n: usize) -> Circuit {
    assert!(n >= 1, "width must be positive");
    let mut g = Circuit::new(n, n).named(format!("qft_static_{n}"));
    for k in 0..n {
        g.h(k);
        for j in k + 1..n {
            g.cp(Angle::pi_frac(1, 1 << (j - k)), j, k);
        }
    }
    for k in 0..n {
        g.measure(k, k);
    }
    g
}

/// Semiclassical QFT on one work qubit: per output bit, phase corrections
/// conditioned on the earlier bits, `H`, measure, reset.
pub fn qft_dynamic(n: usize) -> Circuit {
    assert!(n >= 1, "width must be positive");
    let mut g = Circuit::new(1, n).named(format!("qft_dynamic_{n}"));
    for k in 0..n {
        for i in 0..k {
            g.c_if(i, true, GateKind::P(Angle::pi_frac(1, 1 << (k - i))), &[0]);
        }
        g.h(0).measure(0, k);
        if k + 1 < n {
            g.reset(0);
        }
    }
    g
}

/// Uniformly random secret of length `n`.
pub fn random_secret(n: usize, rng: &mut impl Rng) -> String {
    (0..n).map(|_| if rng.gen_bool(0.5) { '1' } else { '0' }).collect()
}

/// Shape of a random circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomSpec {
    pub num_qubits: usize,
    /// Upper bound; fewer are placed when no unmeasured qubit is available.
    pub measurements: usize,
    pub resets: usize,
    pub gates: usize,
    pub negative_controls: bool,
    /// Allow classically-controlled gates.
    pub feed_forward: bool,
}

fn random_angle(rng: &mut impl Rng) -> Angle {
    if rng.gen_bool(0.5) {
        Angle::pi_frac(rng.gen_range(-16..=16), 1 << rng.gen_range(0..5))
    } else {
        Angle::Radians(rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
    }
}

fn random_gate(rng: &mut impl Rng, allow_swap: bool) -> GateKind {
    let choices = if allow_swap { 15 } else { 14 };
    match rng.gen_range(0..choices) {
        0 => GateKind::X,
        1 => GateKind::Y,
        2 => GateKind::Z,
        3 => GateKind::H,
        4 => GateKind::S,
        5 => GateKind::Sdg,
        6 => GateKind::T,
        7 => GateKind::Tdg,
        8 => GateKind::SX,
        9 => GateKind::P(random_angle(rng)),
        10 => GateKind::RX(random_angle(rng)),
        11 => GateKind::RY(random_angle(rng)),
        12 => GateKind::RZ(random_angle(rng)),
        13 => GateKind::U(random_angle(rng), random_angle(rng), random_angle(rng)),
        _ => GateKind::Swap,
    }
}

/// A random valid circuit whose measurements are deferrable: a measured
/// qubit is never a gate target again until it is reset, every condition
/// reads an already written clbit, and every clbit is written once.
pub fn random_circuit(spec: &RandomSpec, rng: &mut impl Rng) -> Circuit {
    let n = spec.num_qubits;
    assert!(n >= 1, "need at least one qubit");
    #[derive(Clone, Copy)]
    enum Event {
        Gate,
        Measure,
        Reset,
    }
    let mut events: Vec<Event> = std::iter::repeat_n(Event::Gate, spec.gates)
        .chain(std::iter::repeat_n(Event::Measure, spec.measurements))
        .chain(std::iter::repeat_n(Event::Reset, spec.resets))
        .collect();
    events.shuffle(rng);

    let mut ops = Vec::new();
    let mut measured = vec![false; n];
    // clbit -> qubit still holding the measured value
    let mut writer: Vec<Option<usize>> = Vec::new();
    for event in events {
        match event {
            Event::Measure => {
                let free: Vec<usize> = (0..n).filter(|&q| !measured[q]).collect();
                if let Some(&q) = free.choose(rng) {
                    ops.push(Operation::Measure { qubit: Qubit(q), clbit: Clbit(writer.len()) });
                    writer.push(Some(q));
                    measured[q] = true;
                }
            }
            Event::Reset => {
                let q = rng.gen_range(0..n);
                ops.push(Operation::Reset { qubit: Qubit(q) });
                measured[q] = false;
                for w in writer.iter_mut().filter(|w| **w == Some(q)) {
                    *w = None;
                }
            }
            Event::Gate => {
                let conditioned = spec.feed_forward && !writer.is_empty() && rng.gen_bool(0.35);
                let condition = conditioned.then(|| Condition {
                    clbit: Clbit(rng.gen_range(0..writer.len())),
                    value: rng.gen_bool(0.5),
                });
                let blocked = condition.and_then(|c| writer[c.clbit.0]);
                let mut targets_pool: Vec<usize> = (0..n).filter(|&q| !measured[q]).collect();
                targets_pool.shuffle(rng);
                let gate = random_gate(rng, targets_pool.len() >= 2);
                let Some(targets) = targets_pool.get(..gate.arity()) else { continue };
                let targets = targets.to_vec();
                let mut pool: Vec<usize> =
                    (0..n).filter(|q| !targets.contains(q) && Some(*q) != blocked).collect();
                pool.shuffle(rng);
                let k = rng.gen_range(0..=pool.len().min(2));
                let controls: Vec<Control> = pool[..k]
                    .iter()
                    .map(|&q| Control {
                        qubit: Qubit(q),
                        polarity: if spec.negative_controls && rng.gen_bool(0.3) {
                            Polarity::Negative
                        } else {
                            Polarity::Positive
                        },
                    })
                    .collect();
                let op = UnitaryOp::controlled(gate, &controls, &targets);
                ops.push(match condition {
                    Some(condition) => Operation::ClassicControlled { op, condition },
                    None => Operation::Unitary(op),
                });
            }
        }
    }
    Circuit { name: "random".into(), num_qubits: n, num_clbits: writer.len(), ops, output_order: None }
}
