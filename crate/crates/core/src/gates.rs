//! Matrix semantics of the fixed gate set.
//!
//! Controlled variants are not built here; the simulator applies the target
//! matrix only on amplitudes whose control bits match.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::circuit::GateKind;
use crate::matrix::{Matrix, C64, ONE, ZERO};

/// Row-major 2×2 matrix `[m00, m01, m10, m11]`.
pub type Mat2 = [C64; 4];

fn cis(phi: f64) -> C64 {
    C64::from_polar(1.0, phi)
}

/// The 2×2 matrix of a single-target gate, or `None` for `SWAP`.
pub fn single_qubit_matrix(gate: &GateKind) -> Option<Mat2> {
    let i = C64::new(0.0, 1.0);
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    Some(match *gate {
        GateKind::X => [ZERO, ONE, ONE, ZERO],
        GateKind::Y => [ZERO, -i, i, ZERO],
        GateKind::Z => [ONE, ZERO, ZERO, -ONE],
        GateKind::H => [h, h, h, -h],
        GateKind::S => [ONE, ZERO, ZERO, i],
        GateKind::Sdg => [ONE, ZERO, ZERO, -i],
        GateKind::T => [ONE, ZERO, ZERO, C64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2)],
        GateKind::Tdg => [ONE, ZERO, ZERO, C64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2)],
        GateKind::SX => {
            let a = C64::new(0.5, 0.5);
            let b = C64::new(0.5, -0.5);
            [a, b, b, a]
        }
        GateKind::P(theta) => [ONE, ZERO, ZERO, cis(theta.radians())],
        GateKind::RX(theta) => {
            let (s, c) = (theta.radians() / 2.0).sin_cos();
            [C64::new(c, 0.0), C64::new(0.0, -s), C64::new(0.0, -s), C64::new(c, 0.0)]
        }
        GateKind::RY(theta) => {
            let (s, c) = (theta.radians() / 2.0).sin_cos();
            [C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)]
        }
        GateKind::RZ(theta) => {
            let half = theta.radians() / 2.0;
            [cis(-half), ZERO, ZERO, cis(half)]
        }
        GateKind::U(theta, phi, lambda) => {
            let (s, c) = (theta.radians() / 2.0).sin_cos();
            let (phi, lambda) = (phi.radians(), lambda.radians());
            [
                C64::new(c, 0.0),
                -cis(lambda) * s,
                cis(phi) * s,
                cis(phi + lambda) * c,
            ]
        }
        GateKind::Swap => return None,
    })
}

/// The `2^k × 2^k` matrix of `gate` acting on its `k` targets. For `SWAP`
/// the first target is the low-order bit of the row/column index.
pub fn gate_matrix(gate: &GateKind) -> Matrix {
    match single_qubit_matrix(gate) {
        Some(m) => Matrix::from_rows(2, m.to_vec()),
        None => {
            let mut m = Matrix::zeros(4);
            m[(0, 0)] = ONE;
            m[(1, 2)] = ONE;
            m[(2, 1)] = ONE;
            m[(3, 3)] = ONE;
            m
        }
    }
}
