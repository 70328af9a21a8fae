//! Rewriting into the native set `{RZ, X, SX, CX}`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::circuit::{BoundGate, GateKind};
use crate::simulator::{matrix_1q, Mat2};

const EPS: f64 = 1e-12;

/// Angle in `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Euler angles `(θ, φ, λ)` with `U ∝ RZ(φ) RY(θ) RZ(λ)` and `θ ∈ [0, π]`.
pub fn zyz_angles(u: &Mat2) -> (f64, f64, f64) {
    // scale into SU(2) so the diagonal/off-diagonal phases are (φ±λ)/2 exactly
    let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    let inv = det.sqrt().inv();
    let v = [
        [u[0][0] * inv, u[0][1] * inv],
        [u[1][0] * inv, u[1][1] * inv],
    ];
    let theta = 2.0 * v[1][0].norm().atan2(v[0][0].norm());
    let sum = if v[1][1].norm() > EPS {
        2.0 * v[1][1].arg()
    } else {
        0.0
    };
    let diff = if v[1][0].norm() > EPS {
        2.0 * v[1][0].arg()
    } else {
        0.0
    };
    (theta, (sum + diff) / 2.0, (sum - diff) / 2.0)
}

/// Native sequence (circuit order) for an arbitrary single-qubit unitary,
/// equal up to global phase.
///
/// The general case is `RZ(λ) · SX · RZ(θ+π) · SX · RZ(φ+π)`; rotations with
/// `θ` near `0`, `π/2` or `π` use shorter forms.
pub fn synthesize_1q(u: &Mat2) -> Vec<(GateKind, f64)> {
    let (theta, phi, lam) = zyz_angles(u);
    let tol = 1e-10;
    if theta.abs() < tol {
        vec![(GateKind::RZ, phi + lam)]
    } else if (theta - FRAC_PI_2).abs() < tol {
        vec![
            (GateKind::RZ, lam - FRAC_PI_2),
            (GateKind::SX, 0.0),
            (GateKind::RZ, phi + FRAC_PI_2),
        ]
    } else if (theta - PI).abs() < tol {
        vec![
            (GateKind::RZ, lam + PI),
            (GateKind::X, 0.0),
            (GateKind::RZ, phi),
        ]
    } else {
        vec![
            (GateKind::RZ, lam),
            (GateKind::SX, 0.0),
            (GateKind::RZ, theta + PI),
            (GateKind::SX, 0.0),
            (GateKind::RZ, phi + PI),
        ]
    }
}

/// Native sequence for a single-qubit gate kind.
pub fn decompose_1q(kind: GateKind, angle: f64) -> Vec<(GateKind, f64)> {
    match kind {
        GateKind::X | GateKind::SX => vec![(kind, 0.0)],
        GateKind::RZ | GateKind::P => vec![(GateKind::RZ, angle)],
        GateKind::H => vec![
            (GateKind::RZ, FRAC_PI_2),
            (GateKind::SX, 0.0),
            (GateKind::RZ, FRAC_PI_2),
        ],
        _ => synthesize_1q(&matrix_1q(kind, angle)),
    }
}

/// Rewrite one bound gate into natives on the same wires.
pub fn decompose(gate: &BoundGate) -> Vec<BoundGate> {
    let [a, b] = gate.qubits;
    match gate.kind {
        GateKind::CX => vec![*gate],
        GateKind::CP => {
            let h = gate.angle / 2.0;
            vec![
                BoundGate::one(GateKind::RZ, a, h),
                BoundGate::one(GateKind::RZ, b, h),
                BoundGate::two(GateKind::CX, a, b, 0.0),
                BoundGate::one(GateKind::RZ, b, -h),
                BoundGate::two(GateKind::CX, a, b, 0.0),
            ]
        }
        GateKind::SWAP => swap_as_cx(a, b).to_vec(),
        kind => decompose_1q(kind, gate.angle)
            .into_iter()
            .map(|(k, angle)| BoundGate::one(k, a, angle))
            .collect(),
    }
}

pub fn swap_as_cx(a: usize, b: usize) -> [BoundGate; 3] {
    [
        BoundGate::two(GateKind::CX, a, b, 0.0),
        BoundGate::two(GateKind::CX, b, a, 0.0),
        BoundGate::two(GateKind::CX, a, b, 0.0),
    ]
}

pub fn is_native(kind: GateKind) -> bool {
    matches!(
        kind,
        GateKind::RZ | GateKind::X | GateKind::SX | GateKind::CX
    )
}
