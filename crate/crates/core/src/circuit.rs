//! Circuit data model: unitary gates plus the three dynamic primitives
//! (mid-circuit measurement, reset, classically-controlled gates).
//!
//! Qubit `k` carries weight `2^k` in basis-state indices, and output bitstrings
//! place `output_order[0]` in the least significant position.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::angle::Angle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Qubit(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clbit(pub usize);

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

impl fmt::Display for Clbit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
    SX,
    P(Angle),
    RX(Angle),
    RY(Angle),
    RZ(Angle),
    U(Angle, Angle, Angle),
    Swap,
}

impl GateKind {
    /// Number of target qubits.
    pub fn arity(&self) -> usize {
        match self {
            GateKind::Swap => 2,
            _ => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::SX => "sx",
            GateKind::P(_) => "p",
            GateKind::RX(_) => "rx",
            GateKind::RY(_) => "ry",
            GateKind::RZ(_) => "rz",
            GateKind::U(..) => "U",
            GateKind::Swap => "swap",
        }
    }

    pub fn params(&self) -> Vec<Angle> {
        match *self {
            GateKind::P(a) | GateKind::RX(a) | GateKind::RY(a) | GateKind::RZ(a) => vec![a],
            GateKind::U(a, b, c) => vec![a, b, c],
            _ => Vec::new(),
        }
    }

    /// The adjoint gate, if the gate set has one. `SX` does not; see
    /// [`UnitaryOp::inverse`].
    pub fn inverse(&self) -> Option<GateKind> {
        Some(match *self {
            GateKind::S => GateKind::Sdg,
            GateKind::Sdg => GateKind::S,
            GateKind::T => GateKind::Tdg,
            GateKind::Tdg => GateKind::T,
            GateKind::SX => return None,
            GateKind::P(a) => GateKind::P(a.neg()),
            GateKind::RX(a) => GateKind::RX(a.neg()),
            GateKind::RY(a) => GateKind::RY(a.neg()),
            GateKind::RZ(a) => GateKind::RZ(a.neg()),
            GateKind::U(theta, phi, lambda) => GateKind::U(theta.neg(), lambda.neg(), phi.neg()),
            g => g,
        })
    }

    fn approx_eq(&self, other: &GateKind, tol: f64) -> bool {
        if std::mem::discriminant(self) != std::mem::discriminant(other) {
            return false;
        }
        self.params()
            .iter()
            .zip(other.params().iter())
            .all(|(a, b)| a.approx_eq(b, tol))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Control {
    pub qubit: Qubit,
    pub polarity: Polarity,
}

impl Control {
    pub fn pos(q: usize) -> Self {
        Control { qubit: Qubit(q), polarity: Polarity::Positive }
    }

    pub fn neg(q: usize) -> Self {
        Control { qubit: Qubit(q), polarity: Polarity::Negative }
    }
}

/// A (possibly controlled) application of a gate from the fixed gate set.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOp {
    pub gate: GateKind,
    pub targets: Vec<Qubit>,
    pub controls: Vec<Control>,
}

impl UnitaryOp {
    pub fn new(gate: GateKind, targets: &[usize]) -> Self {
        UnitaryOp {
            gate,
            targets: targets.iter().map(|&q| Qubit(q)).collect(),
            controls: Vec::new(),
        }
    }

    pub fn controlled(gate: GateKind, controls: &[Control], targets: &[usize]) -> Self {
        UnitaryOp {
            gate,
            targets: targets.iter().map(|&q| Qubit(q)).collect(),
            controls: controls.to_vec(),
        }
    }

    /// The exact adjoint as a gate sequence. Everything but `SX` inverts to a
    /// single gate; `SX† = H·S†·H` keeps controlled variants phase-exact.
    pub fn inverse(&self) -> Vec<UnitaryOp> {
        match self.gate.inverse() {
            Some(gate) => vec![UnitaryOp { gate, ..self.clone() }],
            None => [GateKind::H, GateKind::Sdg, GateKind::H]
                .into_iter()
                .map(|gate| UnitaryOp { gate, ..self.clone() })
                .collect(),
        }
    }

    pub fn qubits(&self) -> impl Iterator<Item = Qubit> + '_ {
        self.controls.iter().map(|c| c.qubit).chain(self.targets.iter().copied())
    }

    fn approx_eq(&self, other: &UnitaryOp, tol: f64) -> bool {
        self.targets == other.targets
            && self.controls == other.controls
            && self.gate.approx_eq(&other.gate, tol)
    }
}

/// Single-bit equality test on a classical bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Condition {
    pub clbit: Clbit,
    pub value: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operation {
    Unitary(UnitaryOp),
    Measure { qubit: Qubit, clbit: Clbit },
    Reset { qubit: Qubit },
    ClassicControlled { op: UnitaryOp, condition: Condition },
}

impl Operation {
    /// Every qubit the operation acts on, controls included.
    pub fn qubits(&self) -> Vec<Qubit> {
        match self {
            Operation::Unitary(u) | Operation::ClassicControlled { op: u, .. } => u.qubits().collect(),
            Operation::Measure { qubit, .. } | Operation::Reset { qubit } => vec![*qubit],
        }
    }

    pub fn clbits(&self) -> Vec<Clbit> {
        match self {
            Operation::Measure { clbit, .. } => vec![*clbit],
            Operation::ClassicControlled { condition, .. } => vec![condition.clbit],
            _ => Vec::new(),
        }
    }

    pub fn is_unitary(&self) -> bool {
        matches!(self, Operation::Unitary(_))
    }

    fn approx_eq(&self, other: &Operation, tol: f64) -> bool {
        match (self, other) {
            (Operation::Unitary(a), Operation::Unitary(b)) => a.approx_eq(b, tol),
            (
                Operation::ClassicControlled { op: a, condition: ca },
                Operation::ClassicControlled { op: b, condition: cb },
            ) => ca == cb && a.approx_eq(b, tol),
            _ => self == other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationErrorKind {
    #[error("qubit index {0} out of range")]
    QubitOutOfRange(usize),
    #[error("clbit index {0} out of range")]
    ClbitOutOfRange(usize),
    #[error("gate `{gate}` expects {expected} target(s), got {got}")]
    ArityMismatch { gate: &'static str, expected: usize, got: usize },
    #[error("control equals target")]
    ControlEqualsTarget,
    #[error("qubit {0} appears more than once")]
    DuplicateQubit(usize),
    #[error("non-finite angle parameter")]
    NonFiniteAngle,
    #[error("clbit {0} listed twice in output order")]
    DuplicateOutput(usize),
    #[error("output clbit {0} is never the target of a measurement")]
    OutputNotMeasured(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}{kind}", op.map(|i| format!("op {i}: ")).unwrap_or_default())]
pub struct ValidationError {
    /// Offending operation index; `None` for circuit-level problems.
    pub op: Option<usize>,
    pub kind: ValidationErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("cannot compose circuits over {left_qubits} qubits/{left_clbits} clbits and {right_qubits} qubits/{right_clbits} clbits")]
    ArityMismatch {
        left_qubits: usize,
        left_clbits: usize,
        right_qubits: usize,
        right_clbits: usize,
    },
    #[error("operation {0} is not unitary")]
    NotUnitary(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub name: String,
    pub num_qubits: usize,
    pub num_clbits: usize,
    pub ops: Vec<Operation>,
    /// Explicit output bit order; `None` means every measured clbit in index order.
    pub output_order: Option<Vec<Clbit>>,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_clbits: usize) -> Self {
        Circuit {
            name: String::new(),
            num_qubits,
            num_clbits,
            ops: Vec::new(),
            output_order: None,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn push(&mut self, op: Operation) -> &mut Self {
        self.ops.push(op);
        self
    }

    pub fn gate(&mut self, gate: GateKind, targets: &[usize]) -> &mut Self {
        self.push(Operation::Unitary(UnitaryOp::new(gate, targets)))
    }

    pub fn controlled(&mut self, gate: GateKind, controls: &[Control], targets: &[usize]) -> &mut Self {
        self.push(Operation::Unitary(UnitaryOp::controlled(gate, controls, targets)))
    }

    pub fn h(&mut self, q: usize) -> &mut Self {
        self.gate(GateKind::H, &[q])
    }

    pub fn x(&mut self, q: usize) -> &mut Self {
        self.gate(GateKind::X, &[q])
    }

    pub fn p(&mut self, angle: Angle, q: usize) -> &mut Self {
        self.gate(GateKind::P(angle), &[q])
    }

    pub fn cx(&mut self, control: usize, target: usize) -> &mut Self {
        self.controlled(GateKind::X, &[Control::pos(control)], &[target])
    }

    pub fn cp(&mut self, angle: Angle, control: usize, target: usize) -> &mut Self {
        self.controlled(GateKind::P(angle), &[Control::pos(control)], &[target])
    }

    pub fn measure(&mut self, q: usize, c: usize) -> &mut Self {
        self.push(Operation::Measure { qubit: Qubit(q), clbit: Clbit(c) })
    }

    pub fn reset(&mut self, q: usize) -> &mut Self {
        self.push(Operation::Reset { qubit: Qubit(q) })
    }

    /// Appends `gate` on `targets`, applied only if clbit `c` reads `value`.
    pub fn c_if(&mut self, c: usize, value: bool, gate: GateKind, targets: &[usize]) -> &mut Self {
        self.push(Operation::ClassicControlled {
            op: UnitaryOp::new(gate, targets),
            condition: Condition { clbit: Clbit(c), value },
        })
    }

    /// The effective output order (explicit, or measured clbits ascending).
    pub fn output_order(&self) -> Vec<Clbit> {
        if let Some(order) = &self.output_order {
            return order.clone();
        }
        let mut measured: Vec<Clbit> = self
            .ops
            .iter()
            .filter_map(|op| match op {
                Operation::Measure { clbit, .. } => Some(*clbit),
                _ => None,
            })
            .collect();
        measured.sort_unstable();
        measured.dedup();
        measured
    }

    pub fn validate(&self) -> Vec<ValidationError> {
        let mut errors = Vec::new();
        for (index, op) in self.ops.iter().enumerate() {
            let mut push = |kind| errors.push(ValidationError { op: Some(index), kind });
            match op {
                Operation::Unitary(u) => validate_unitary(u, self.num_qubits, &mut push),
                Operation::ClassicControlled { op: u, condition } => {
                    validate_unitary(u, self.num_qubits, &mut push);
                    if condition.clbit.0 >= self.num_clbits {
                        push(ValidationErrorKind::ClbitOutOfRange(condition.clbit.0));
                    }
                }
                Operation::Measure { qubit, clbit } => {
                    if qubit.0 >= self.num_qubits {
                        push(ValidationErrorKind::QubitOutOfRange(qubit.0));
                    }
                    if clbit.0 >= self.num_clbits {
                        push(ValidationErrorKind::ClbitOutOfRange(clbit.0));
                    }
                }
                Operation::Reset { qubit } => {
                    if qubit.0 >= self.num_qubits {
                        push(ValidationErrorKind::QubitOutOfRange(qubit.0));
                    }
                }
            }
        }
        if let Some(order) = &self.output_order {
            let measured: HashSet<Clbit> = self
                .ops
                .iter()
                .filter_map(|op| match op {
                    Operation::Measure { clbit, .. } => Some(*clbit),
                    _ => None,
                })
                .collect();
            let mut seen = HashSet::new();
            for c in order {
                let kind = if c.0 >= self.num_clbits {
                    Some(ValidationErrorKind::ClbitOutOfRange(c.0))
                } else if !seen.insert(*c) {
                    Some(ValidationErrorKind::DuplicateOutput(c.0))
                } else if !measured.contains(c) {
                    Some(ValidationErrorKind::OutputNotMeasured(c.0))
                } else {
                    None
                };
                if let Some(kind) = kind {
                    errors.push(ValidationError { op: None, kind });
                }
            }
        }
        errors
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    pub fn count_resets(&self) -> usize {
        self.ops.iter().filter(|op| matches!(op, Operation::Reset { .. })).count()
    }

    pub fn count_measurements(&self) -> usize {
        self.ops.iter().filter(|op| matches!(op, Operation::Measure { .. })).count()
    }

    pub fn count_classic_controls(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| matches!(op, Operation::ClassicControlled { .. }))
            .count()
    }

    pub fn count_unitaries(&self) -> usize {
        self.ops.iter().filter(|op| op.is_unitary()).count()
    }

    /// True if the circuit has a reset, a classically-controlled gate, or a
    /// measurement followed by a later operation on the same qubit or clbit.
    pub fn is_dynamic(&self) -> bool {
        let mut measured_qubits = HashSet::new();
        let mut measured_clbits = HashSet::new();
        for op in &self.ops {
            match op {
                Operation::Reset { .. } | Operation::ClassicControlled { .. } => return true,
                _ => {}
            }
            if op.qubits().iter().any(|q| measured_qubits.contains(q))
                || op.clbits().iter().any(|c| measured_clbits.contains(c))
            {
                return true;
            }
            if let Operation::Measure { qubit, clbit } = op {
                measured_qubits.insert(*qubit);
                measured_clbits.insert(*clbit);
            }
        }
        false
    }

    /// Operation lists concatenated; register sizes must agree.
    pub fn compose(&self, other: &Circuit) -> Result<Circuit, CircuitError> {
        if self.num_qubits != other.num_qubits || self.num_clbits != other.num_clbits {
            return Err(CircuitError::ArityMismatch {
                left_qubits: self.num_qubits,
                left_clbits: self.num_clbits,
                right_qubits: other.num_qubits,
                right_clbits: other.num_clbits,
            });
        }
        let mut out = self.clone();
        out.ops.extend(other.ops.iter().cloned());
        Ok(out)
    }

    pub fn append(&self, op: Operation) -> Circuit {
        let mut out = self.clone();
        out.ops.push(op);
        out
    }

    /// Adjoint of a unitary-only circuit.
    pub fn inverse(&self) -> Result<Circuit, CircuitError> {
        let mut out = Circuit::new(self.num_qubits, self.num_clbits);
        out.name = format!("{}_dg", self.name);
        for (i, op) in self.ops.iter().enumerate().rev() {
            match op {
                Operation::Unitary(u) => out.ops.extend(u.inverse().into_iter().map(Operation::Unitary)),
                _ => return Err(CircuitError::NotUnitary(i)),
            }
        }
        Ok(out)
    }

    /// Same circuit without any measurement operations.
    pub fn without_measurements(&self) -> Circuit {
        Circuit {
            ops: self
                .ops
                .iter()
                .filter(|op| !matches!(op, Operation::Measure { .. }))
                .cloned()
                .collect(),
            output_order: None,
            ..self.clone()
        }
    }

    /// Structural equality with angles compared to within `tol` radians.
    /// Names are ignored.
    pub fn structurally_eq(&self, other: &Circuit, tol: f64) -> bool {
        self.num_qubits == other.num_qubits
            && self.num_clbits == other.num_clbits
            && self.output_order() == other.output_order()
            && self.ops.len() == other.ops.len()
            && self.ops.iter().zip(&other.ops).all(|(a, b)| a.approx_eq(b, tol))
    }
}

fn validate_unitary(u: &UnitaryOp, num_qubits: usize, push: &mut impl FnMut(ValidationErrorKind)) {
    if u.targets.len() != u.gate.arity() {
        push(ValidationErrorKind::ArityMismatch {
            gate: u.gate.name(),
            expected: u.gate.arity(),
            got: u.targets.len(),
        });
    }
    if !u.gate.params().iter().all(Angle::is_finite) {
        push(ValidationErrorKind::NonFiniteAngle);
    }
    for q in u.qubits() {
        if q.0 >= num_qubits {
            push(ValidationErrorKind::QubitOutOfRange(q.0));
        }
    }
    let targets: HashSet<Qubit> = u.targets.iter().copied().collect();
    if targets.len() != u.targets.len() {
        let dup = u.targets.iter().find(|q| u.targets.iter().filter(|p| p == q).count() > 1);
        push(ValidationErrorKind::DuplicateQubit(dup.map_or(0, |q| q.0)));
    }
    let mut seen_controls = HashSet::new();
    for c in &u.controls {
        if targets.contains(&c.qubit) {
            push(ValidationErrorKind::ControlEqualsTarget);
        } else if !seen_controls.insert(c.qubit) {
            push(ValidationErrorKind::DuplicateQubit(c.qubit.0));
        }
    }
}
