//! Gate matrices.
//!
//! Conventions follow the common circuit-toolkit definitions:
//! `RZ(λ) = diag(e^{-iλ/2}, e^{iλ/2})`, `P(λ) = diag(1, e^{iλ})` (so the two
//! differ by the global phase `e^{iλ/2}`), `SX = √X` with `SX² = X` exactly.
//! Two-qubit matrices are indexed by `b0 + 2·b1` where `b0` is the bit of the
//! first operand (the control for CX/CP).

use num_complex::Complex64 as C;

use crate::circuit::GateKind;

pub type Mat2 = [[C; 2]; 2];
pub type Mat4 = [[C; 4]; 4];

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

pub fn matrix_1q(kind: GateKind, angle: f64) -> Mat2 {
    let h = angle / 2.0;
    match kind {
        GateKind::H => {
            let s = C::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            [[s, s], [s, -s]]
        }
        GateKind::X => [[ZERO, ONE], [ONE, ZERO]],
        GateKind::SX => {
            let a = C::new(0.5, 0.5);
            let b = C::new(0.5, -0.5);
            [[a, b], [b, a]]
        }
        GateKind::RX => {
            let (s, c) = h.sin_cos();
            [
                [C::new(c, 0.0), C::new(0.0, -s)],
                [C::new(0.0, -s), C::new(c, 0.0)],
            ]
        }
        GateKind::RY => {
            let (s, c) = h.sin_cos();
            [
                [C::new(c, 0.0), C::new(-s, 0.0)],
                [C::new(s, 0.0), C::new(c, 0.0)],
            ]
        }
        GateKind::RZ => [
            [C::from_polar(1.0, -h), ZERO],
            [ZERO, C::from_polar(1.0, h)],
        ],
        GateKind::P => [[ONE, ZERO], [ZERO, C::from_polar(1.0, angle)]],
        other => panic!("{other} is not a single-qubit gate"),
    }
}

pub fn matrix_2q(kind: GateKind, angle: f64) -> Mat4 {
    let mut m = [[ZERO; 4]; 4];
    match kind {
        GateKind::CX => {
            m[0][0] = ONE;
            m[2][2] = ONE;
            m[1][3] = ONE;
            m[3][1] = ONE;
        }
        GateKind::SWAP => {
            m[0][0] = ONE;
            m[3][3] = ONE;
            m[1][2] = ONE;
            m[2][1] = ONE;
        }
        GateKind::CP => {
            m[0][0] = ONE;
            m[1][1] = ONE;
            m[2][2] = ONE;
            m[3][3] = C::from_polar(1.0, angle);
        }
        other => panic!("{other} is not a two-qubit gate"),
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_defect<const D: usize>(m: &[[C; D]; D]) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..D {
            for j in 0..D {
                let dot: C = (0..D).map(|k| m[k][i].conj() * m[k][j]).sum();
                let want = if i == j { ONE } else { ZERO };
                worst = worst.max((dot - want).norm());
            }
        }
        worst
    }

    #[test]
    fn all_kinds_unitary() {
        for &angle in &[0.0, 0.3, -1.7, 2.9, 6.1] {
            for kind in GateKind::ALL.into_iter().filter(|k| !k.is_layer()) {
                let d = if kind.arity() == 1 {
                    max_defect(&matrix_1q(kind, angle))
                } else {
                    max_defect(&matrix_2q(kind, angle))
                };
                assert!(d < 1e-12, "{kind} at {angle}: {d}");
            }
        }
    }

    #[test]
    fn sx_squares_to_x() {
        let s = matrix_1q(GateKind::SX, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                let v: C = (0..2).map(|k| s[i][k] * s[k][j]).sum();
                assert!((v - matrix_1q(GateKind::X, 0.0)[i][j]).norm() < 1e-15);
            }
        }
    }
}
