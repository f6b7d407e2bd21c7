//! Unitary reconstruction of dynamic circuits.
//!
//! Two passes turn a dynamic circuit into one whose only non-unitary content
//! is a trailing measurement layer:
//!
//! 1. [`substitute_resets`] gives every reset a fresh qubit (appended at the
//!    highest index) and reroutes all later operations on the reset wire to it.
//! 2. [`defer_measurements`] moves measurements to the end and turns each
//!    classically-controlled gate into a gate controlled by the measured qubit.
//!
//! An `n`-qubit circuit with `r` resets therefore becomes an `(n + r)`-qubit one.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::circuit::{Circuit, Clbit, Control, Operation, Polarity, Qubit, UnitaryOp};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReconstructError {
    #[error("op {op}: condition on unwritten clbit {clbit}")]
    UnwrittenClbit { op: usize, clbit: usize },
    #[error("op {op}: clbit {clbit} overwritten (already written by op {first})")]
    ClbitOverwritten { op: usize, clbit: usize, first: usize },
    #[error("op {op}: non-deferrable, qubit {qubit} is a gate target after being measured")]
    NonDeferrable { op: usize, qubit: usize },
    #[error("op {op}: classical condition conflicts with an existing control on qubit {qubit}")]
    ConflictingControl { op: usize, qubit: usize },
    #[error("op {op}: reset must be substituted before deferring measurements")]
    ResetPresent { op: usize },
    #[error("invalid circuit: {0}")]
    Invalid(String),
}

/// Where each original qubit lives after reset substitution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct WireMap {
    /// `(index of the reset op in the input circuit, fresh qubit)`, in encounter order.
    pub allocations: Vec<(usize, usize)>,
    /// Physical qubit holding each original qubit at the end of the circuit.
    #[serde(rename = "finalMap")]
    pub current: Vec<usize>,
}

impl WireMap {
    pub fn identity(num_qubits: usize) -> Self {
        WireMap { allocations: Vec::new(), current: (0..num_qubits).collect() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("wire map serializes")
    }
}

fn remap_unitary(u: &UnitaryOp, map: &[usize]) -> UnitaryOp {
    UnitaryOp {
        gate: u.gate,
        targets: u.targets.iter().map(|q| Qubit(map[q.0])).collect(),
        controls: u
            .controls
            .iter()
            .map(|c| Control { qubit: Qubit(map[c.qubit.0]), polarity: c.polarity })
            .collect(),
    }
}

fn check_valid(g: &Circuit) -> Result<(), ReconstructError> {
    match g.validate().into_iter().next() {
        Some(e) => Err(ReconstructError::Invalid(e.to_string())),
        None => Ok(()),
    }
}

/// Replaces every reset by a fresh qubit. Total on valid circuits.
pub fn substitute_resets(g: &Circuit) -> Result<(Circuit, WireMap), ReconstructError> {
    check_valid(g)?;
    let r = g.count_resets();
    let mut wires = WireMap::identity(g.num_qubits);
    let mut next_fresh = g.num_qubits;
    let mut out = Circuit::new(g.num_qubits + r, g.num_clbits);
    out.name = g.name.clone();
    out.output_order = g.output_order.clone();
    for (index, op) in g.ops.iter().enumerate() {
        let map = &wires.current;
        let rewritten = match op {
            Operation::Reset { qubit } => {
                wires.current[qubit.0] = next_fresh;
                wires.allocations.push((index, next_fresh));
                next_fresh += 1;
                continue;
            }
            Operation::Unitary(u) => Operation::Unitary(remap_unitary(u, map)),
            Operation::Measure { qubit, clbit } => {
                Operation::Measure { qubit: Qubit(map[qubit.0]), clbit: *clbit }
            }
            Operation::ClassicControlled { op, condition } => Operation::ClassicControlled {
                op: remap_unitary(op, map),
                condition: *condition,
            },
        };
        out.ops.push(rewritten);
    }
    Ok((out, wires))
}

/// Moves all measurements to the end (ordered by clbit) and converts
/// classical conditions into quantum controls on the measured qubit.
pub fn defer_measurements(g: &Circuit) -> Result<Circuit, ReconstructError> {
    check_valid(g)?;
    // clbit -> (measured qubit, op index of the measurement)
    let mut writers: HashMap<Clbit, (Qubit, usize)> = HashMap::new();
    let mut measured = vec![false; g.num_qubits];
    let mut body = Vec::with_capacity(g.ops.len());
    let mut tail = Vec::new();

    let check_targets = |u: &UnitaryOp, measured: &[bool], index: usize| {
        match u.targets.iter().find(|q| measured[q.0]) {
            Some(q) => Err(ReconstructError::NonDeferrable { op: index, qubit: q.0 }),
            None => Ok(()),
        }
    };

    for (index, op) in g.ops.iter().enumerate() {
        match op {
            Operation::Reset { .. } => return Err(ReconstructError::ResetPresent { op: index }),
            Operation::Measure { qubit, clbit } => {
                if let Some(&(_, first)) = writers.get(clbit) {
                    return Err(ReconstructError::ClbitOverwritten { op: index, clbit: clbit.0, first });
                }
                writers.insert(*clbit, (*qubit, index));
                measured[qubit.0] = true;
                tail.push((*clbit, *qubit));
            }
            Operation::Unitary(u) => {
                check_targets(u, &measured, index)?;
                body.push(op.clone());
            }
            Operation::ClassicControlled { op: u, condition } => {
                let Some(&(source, _)) = writers.get(&condition.clbit) else {
                    return Err(ReconstructError::UnwrittenClbit { op: index, clbit: condition.clbit.0 });
                };
                check_targets(u, &measured, index)?;
                let polarity = if condition.value { Polarity::Positive } else { Polarity::Negative };
                let mut controlled = u.clone();
                match controlled.controls.iter().find(|c| c.qubit == source) {
                    Some(existing) if existing.polarity == polarity => {}
                    Some(_) => {
                        return Err(ReconstructError::ConflictingControl { op: index, qubit: source.0 })
                    }
                    None => controlled.controls.push(Control { qubit: source, polarity }),
                }
                body.push(Operation::Unitary(controlled));
            }
        }
    }

    tail.sort_by_key(|(clbit, _)| *clbit);
    body.extend(tail.into_iter().map(|(clbit, qubit)| Operation::Measure { qubit, clbit }));
    Ok(Circuit {
        name: g.name.clone(),
        num_qubits: g.num_qubits,
        num_clbits: g.num_clbits,
        ops: body,
        output_order: g.output_order.clone(),
    })
}

/// Reset substitution followed by measurement deferral.
pub fn reconstruct_unitary(g: &Circuit) -> Result<(Circuit, WireMap), ReconstructError> {
    let (substituted, wires) = substitute_resets(g)?;
    Ok((defer_measurements(&substituted)?, wires))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::Angle;
    use crate::circuit::GateKind;

    fn neg_pi_over(d: i64) -> Angle {
        Angle::pi_frac(-1, d)
    }

    /// IQPE for θ = 3π/8 with three bits, written out gate by gate.
    fn iqpe_3() -> Circuit {
        let mut g = Circuit::new(2, 3);
        g.x(1);
        g.h(0).cp(Angle::pi_frac(3, 2), 0, 1).h(0).measure(0, 0).reset(0);
        g.h(0).cp(Angle::pi_frac(3, 4), 0, 1);
        g.c_if(0, true, GateKind::P(neg_pi_over(2)), &[0]);
        g.h(0).measure(0, 1).reset(0);
        g.h(0).cp(Angle::pi_frac(3, 8), 0, 1);
        g.c_if(0, true, GateKind::P(neg_pi_over(4)), &[0]);
        g.c_if(1, true, GateKind::P(neg_pi_over(2)), &[0]);
        g.h(0).measure(0, 2);
        g
    }

    #[test]
    fn reset_substitution_on_the_iqpe_circuit() {
        let (sub, wires) = substitute_resets(&iqpe_3()).unwrap();
        assert_eq!(sub.num_qubits, 4);
        assert_eq!(sub.count_resets(), 0);
        assert_eq!(wires.allocations, vec![(5, 2), (11, 3)]);
        assert_eq!(wires.current, vec![3, 1]);

        let mut expected = Circuit::new(4, 3);
        expected.x(1);
        expected.h(0).cp(Angle::pi_frac(3, 2), 0, 1).h(0).measure(0, 0);
        expected.h(2).cp(Angle::pi_frac(3, 4), 2, 1);
        expected.c_if(0, true, GateKind::P(neg_pi_over(2)), &[2]);
        expected.h(2).measure(2, 1);
        expected.h(3).cp(Angle::pi_frac(3, 8), 3, 1);
        expected.c_if(0, true, GateKind::P(neg_pi_over(4)), &[3]);
        expected.c_if(1, true, GateKind::P(neg_pi_over(2)), &[3]);
        expected.h(3).measure(3, 2);
        assert_eq!(sub.ops, expected.ops);
    }

    #[test]
    fn deferral_on_the_iqpe_circuit() {
        let (rec, _) = reconstruct_unitary(&iqpe_3()).unwrap();
        let mut expected = Circuit::new(4, 3);
        expected.x(1);
        expected.h(0).cp(Angle::pi_frac(3, 2), 0, 1).h(0);
        expected.h(2).cp(Angle::pi_frac(3, 4), 2, 1);
        expected.cp(neg_pi_over(2), 0, 2);
        expected.h(2);
        expected.h(3).cp(Angle::pi_frac(3, 8), 3, 1);
        expected.cp(neg_pi_over(4), 0, 3);
        expected.cp(neg_pi_over(2), 2, 3);
        expected.h(3);
        expected.measure(0, 0).measure(2, 1).measure(3, 2);
        assert_eq!(rec.ops, expected.ops);
        assert!(!rec.is_dynamic());
        assert_eq!(rec.count_unitaries(), iqpe_3().count_unitaries() + iqpe_3().count_classic_controls());
    }

    #[test]
    fn circuits_without_resets_are_unchanged() {
        let mut g = Circuit::new(2, 2);
        g.h(0).cx(0, 1).measure(0, 0).measure(1, 1);
        let (sub, wires) = substitute_resets(&g).unwrap();
        assert_eq!(sub, g);
        assert!(wires.allocations.is_empty());
        assert_eq!(defer_measurements(&g).unwrap(), g);
    }

    #[test]
    fn single_qubit_reset() {
        let mut g = Circuit::new(1, 0);
        g.h(0).reset(0).h(0);
        let (sub, wires) = substitute_resets(&g).unwrap();
        let mut expected = Circuit::new(2, 0);
        expected.h(0).h(1);
        assert_eq!(sub, expected);
        assert_eq!(wires.allocations, vec![(1, 1)]);
    }

    #[test]
    fn leading_reset_is_still_substituted() {
        let mut g = Circuit::new(1, 1);
        g.reset(0).measure(0, 0);
        let (rec, _) = reconstruct_unitary(&g).unwrap();
        assert_eq!(rec.num_qubits, 2);
        assert_eq!(rec.ops, vec![Operation::Measure { qubit: Qubit(1), clbit: Clbit(0) }]);
    }

    #[test]
    fn value_zero_conditions_become_negative_controls() {
        let mut g = Circuit::new(2, 1);
        g.h(0).measure(0, 0).c_if(0, false, GateKind::X, &[1]);
        let rec = defer_measurements(&g).unwrap();
        assert_eq!(
            rec.ops[1],
            Operation::Unitary(UnitaryOp::controlled(GateKind::X, &[Control::neg(0)], &[1]))
        );
    }

    #[test]
    fn measurements_sorted_by_clbit() {
        let mut g = Circuit::new(2, 2);
        g.measure(1, 0).measure(0, 1).h(0).h(1);
        let rec = defer_measurements(&g);
        assert!(matches!(rec, Err(ReconstructError::NonDeferrable { op: 2, qubit: 0 })));
        let mut g = Circuit::new(3, 2);
        g.measure(1, 1).measure(0, 0).h(2);
        let rec = defer_measurements(&g).unwrap();
        assert_eq!(
            rec.ops,
            vec![
                Operation::Unitary(UnitaryOp::new(GateKind::H, &[2])),
                Operation::Measure { qubit: Qubit(0), clbit: Clbit(0) },
                Operation::Measure { qubit: Qubit(1), clbit: Clbit(1) },
            ]
        );
    }

    #[test]
    fn deferral_errors() {
        let mut g = Circuit::new(1, 1);
        g.measure(0, 0).x(0);
        assert_eq!(defer_measurements(&g), Err(ReconstructError::NonDeferrable { op: 1, qubit: 0 }));

        let mut g = Circuit::new(2, 2);
        g.c_if(1, true, GateKind::X, &[0]);
        assert_eq!(defer_measurements(&g), Err(ReconstructError::UnwrittenClbit { op: 0, clbit: 1 }));

        let mut g = Circuit::new(2, 1);
        g.measure(0, 0).measure(1, 0);
        assert_eq!(
            defer_measurements(&g),
            Err(ReconstructError::ClbitOverwritten { op: 1, clbit: 0, first: 0 })
        );

        let mut g = Circuit::new(1, 0);
        g.reset(0);
        assert_eq!(defer_measurements(&g), Err(ReconstructError::ResetPresent { op: 0 }));

        let mut g = Circuit::new(2, 1);
        g.measure(0, 0).c_if(0, true, GateKind::X, &[0]);
        assert_eq!(defer_measurements(&g), Err(ReconstructError::NonDeferrable { op: 1, qubit: 0 }));
    }

    #[test]
    fn measured_qubit_may_be_a_control() {
        let mut g = Circuit::new(2, 1);
        g.h(0).measure(0, 0).cx(0, 1);
        let rec = defer_measurements(&g).unwrap();
        assert_eq!(rec.ops.last(), Some(&Operation::Measure { qubit: Qubit(0), clbit: Clbit(0) }));
    }

    #[test]
    fn wire_map_json_shape() {
        let w = WireMap { allocations: vec![(5, 2)], current: vec![2, 1] };
        let v: serde_json::Value = serde_json::from_str(&w.to_json()).unwrap();
        assert_eq!(v, serde_json::json!({"allocations": [[5, 2]], "finalMap": [2, 1]}));
    }
}
