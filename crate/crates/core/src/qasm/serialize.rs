use std::fmt::Write;

use crate::circuit::{Circuit, Condition, GateKind, Operation, Polarity, UnitaryOp};

fn gate_text(gate: &GateKind) -> String {
    let name = match gate {
        GateKind::U(..) => "U",
        GateKind::Swap => "swap",
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
    };
    let params = gate.params();
    if params.is_empty() {
        name.to_string()
    } else {
        let list: Vec<String> = params.iter().map(ToString::to_string).collect();
        format!("{name}({})", list.join(", "))
    }
}

fn condition_prefix(condition: Option<&Condition>) -> String {
    condition.map_or(String::new(), |c| format!("if (c[{}] == {}) ", c.clbit.0, u8::from(c.value)))
}

fn write_unitary(out: &mut String, u: &UnitaryOp, condition: Option<&Condition>) {
    let prefix = condition_prefix(condition);
    let negated: Vec<usize> =
        u.controls.iter().filter(|c| c.polarity == Polarity::Negative).map(|c| c.qubit.0).collect();
    for q in &negated {
        let _ = writeln!(out, "{prefix}x q[{q}];");
    }
    let modifier = match u.controls.len() {
        0 => String::new(),
        1 => "ctrl @ ".to_string(),
        k => format!("ctrl({k}) @ "),
    };
    let operands: Vec<String> =
        u.controls.iter().map(|c| c.qubit).chain(u.targets.iter().copied()).map(|q| format!("q[{}]", q.0)).collect();
    let _ = writeln!(out, "{prefix}{modifier}{} {};", gate_text(&u.gate), operands.join(", "));
    for q in &negated {
        let _ = writeln!(out, "{prefix}x q[{q}];");
    }
}

/// Renders `circuit` in the OpenQASM 3.0 subset, with one qubit register `q`
/// and one bit register `c`. Negative controls are written as `x`-conjugated
/// positive controls.
pub fn serialize(circuit: &Circuit) -> String {
    let mut out = String::from("OPENQASM 3.0;\ninclude \"stdgates.inc\";\n");
    let name = circuit.name.replace(['\n', '\r'], " ");
    if !name.trim().is_empty() {
        let _ = writeln!(out, "// name: {}", name.trim());
    }
    if let Some(order) = &circuit.output_order {
        let list: Vec<String> = order.iter().map(|c| c.0.to_string()).collect();
        let _ = writeln!(out, "// output_order: {}", list.join(" "));
    }
    if circuit.num_qubits > 0 {
        let _ = writeln!(out, "qubit[{}] q;", circuit.num_qubits);
    }
    if circuit.num_clbits > 0 {
        let _ = writeln!(out, "bit[{}] c;", circuit.num_clbits);
    }
    for op in &circuit.ops {
        match op {
            Operation::Unitary(u) => write_unitary(&mut out, u, None),
            Operation::ClassicControlled { op, condition } => write_unitary(&mut out, op, Some(condition)),
            Operation::Measure { qubit, clbit } => {
                let _ = writeln!(out, "c[{}] = measure q[{}];", clbit.0, qubit.0);
            }
            Operation::Reset { qubit } => {
                let _ = writeln!(out, "reset q[{}];", qubit.0);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::Angle;
    use crate::circuit::Control;
    use crate::qasm::parse;

    #[test]
    fn statement_forms() {
        let mut g = Circuit::new(3, 2).named("demo");
        g.h(0)
            .cp(Angle::pi_frac(3, 8), 0, 2)
            .controlled(GateKind::Swap, &[Control::pos(0)], &[1, 2])
            .gate(GateKind::U(Angle::Radians(0.25), Angle::ZERO, Angle::pi_frac(-1, 2)), &[1])
            .measure(0, 1)
            .reset(0)
            .c_if(1, false, GateKind::RZ(Angle::pi_frac(1, 4)), &[2]);
        g.output_order = Some(vec![crate::circuit::Clbit(1)]);
        let text = serialize(&g);
        let expected = "OPENQASM 3.0;\ninclude \"stdgates.inc\";\n// name: demo\n// output_order: 1\nqubit[3] q;\nbit[2] c;\n\
                        h q[0];\nctrl @ p(3*pi/8) q[0], q[2];\nctrl @ swap q[0], q[1], q[2];\nU(0.25, 0, -pi/2) q[1];\n\
                        c[1] = measure q[0];\nreset q[0];\nif (c[1] == 0) rz(pi/4) q[2];\n";
        assert_eq!(text, expected);
        let back = parse(&text).unwrap();
        assert!(back.structurally_eq(&g, 0.0));
        assert_eq!(back.name, "demo");
    }

    #[test]
    fn conditioned_negative_control() {
        let mut g = Circuit::new(3, 1);
        g.measure(2, 0);
        g.push(Operation::ClassicControlled {
            op: UnitaryOp::controlled(GateKind::Z, &[Control::pos(0), Control::neg(1)], &[2]),
            condition: Condition { clbit: crate::circuit::Clbit(0), value: true },
        });
        let text = serialize(&g);
        assert!(text.contains("if (c[0] == 1) x q[1];\nif (c[0] == 1) ctrl(2) @ z q[0], q[1], q[2];\nif (c[0] == 1) x q[1];\n"));
    }
}
