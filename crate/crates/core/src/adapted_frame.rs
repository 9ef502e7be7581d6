//! Oriented singular-value decomposition of a 2×2 differential and the
//! orthonormal frame it induces on a graph.
//!
//! For the transposed gradient `M = dfᵀ` (rows indexed by `x_i`, columns by
//! `f_j`) we produce rotations `A, B ∈ SO(2)` and signed values `λ1, λ2` with
//! `M = A·diag(λ1, λ2)·B`. The domain basis `a1, a2` is the columns of `A`,
//! the range basis `a3, a4` is the rows of `B`, so `df(a_i) = λ_i a_{2+i}` and
//! `λ1 λ2 = det df`.
//!
//! Convention: `λ2 ≥ |λ1| ≥ 0` and `λ1` carries the sign of the Jacobian.
//! When the two singular values coincide the rotation is not unique and the
//! domain basis is pinned to the coordinate axes.

use serde::Serialize;

use crate::error::Result;
use crate::geometry::{Immersion, Vec4};

pub type Mat2 = [[f64; 2]; 2];

const TIE_TOLERANCE: f64 = 1e-14;

fn rotation(t: f64) -> Mat2 {
    let (s, c) = t.sin_cos();
    [[c, -s], [s, c]]
}

fn matmul(a: &Mat2, b: &Mat2) -> Mat2 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j]))
}

fn det(a: &Mat2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

fn transpose(a: &Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

const SWAP: Mat2 = [[0.0, 1.0], [1.0, 0.0]];
const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

#[derive(Clone, Debug, Serialize)]
pub struct SingularDecomposition {
    /// Signed values `[λ1, λ2]`.
    pub lambda: [f64; 2],
    /// `a1, a2` in the domain plane, `a3, a4` in the range plane.
    pub bases: [[f64; 2]; 4],
    /// `A`, with `a1, a2` as its columns.
    pub factor_a: Mat2,
    /// `B`, with `a3, a4` as its rows.
    pub factor_b: Mat2,
    /// Orthogonal factors of the plain SVD `M = Q1·diag(σ)·Q2`, `σ ≥ 0` ascending.
    pub q1: Mat2,
    pub q2: Mat2,
    pub singular_values: [f64; 2],
    pub jacobian: f64,
}

impl SingularDecomposition {
    /// An alternate valid decomposition: every basis vector negated.
    pub fn negated(&self) -> SingularDecomposition {
        let neg = |m: &Mat2| m.map(|r| r.map(|v| -v));
        SingularDecomposition {
            bases: self.bases.map(|b| b.map(|v| -v)),
            factor_a: neg(&self.factor_a),
            factor_b: neg(&self.factor_b),
            ..self.clone()
        }
    }

    /// `A·diag(λ)·B`, which reproduces `dfᵀ`.
    pub fn reconstruct(&self) -> Mat2 {
        let d = [[self.lambda[0], 0.0], [0.0, self.lambda[1]]];
        matmul(&matmul(&self.factor_a, &d), &self.factor_b)
    }
}

/// The plain SVD `M = Q1·diag(σ1, σ2)·Q2` with `0 ≤ σ1 ≤ σ2`.
fn plain_svd(m: &Mat2) -> (Mat2, [f64; 2], Mat2) {
    let e = 0.5 * (m[0][0] + m[1][1]);
    let f = 0.5 * (m[0][0] - m[1][1]);
    let g = 0.5 * (m[1][0] + m[0][1]);
    let h = 0.5 * (m[1][0] - m[0][1]);
    let q = e.hypot(h);
    let r = f.hypot(g);
    let scale = q + r;
    if r <= TIE_TOLERANCE * scale || scale == 0.0 {
        // conformal: M = q·R(t)
        let q2 = if q == 0.0 { IDENTITY } else { rotation(h.atan2(e)) };
        return (IDENTITY, [q, q], q2);
    }
    if q <= TIE_TOLERANCE * scale {
        // anti-conformal: M = r·S with S a reflection
        let s = m.map(|row| row.map(|v| v / r));
        return (IDENTITY, [r, r], s);
    }
    let a1 = g.atan2(f);
    let a2 = h.atan2(e);
    let theta = 0.5 * (a2 - a1);
    let phi = 0.5 * (a2 + a1);
    // M = R(φ)·diag(q + r, q - r)·R(θ); reorder to ascending magnitude
    let sy = q - r;
    let sign = if sy < 0.0 { -1.0 } else { 1.0 };
    let q1 = matmul(&rotation(phi), &SWAP);
    let q2 = matmul(&matmul(&SWAP, &[[1.0, 0.0], [0.0, sign]]), &rotation(theta));
    (q1, [sy.abs(), q + r], q2)
}

/// Oriented decomposition of the Jacobian `df` (row `j` = gradient of `f_j`).
pub fn singular_decomposition(df: &Mat2) -> SingularDecomposition {
    let m = transpose(df);
    let (q1, sigma, q2) = plain_svd(&m);
    let d1 = det(&q1).signum();
    let d2 = det(&q2).signum();
    let lambda = [d1 * sigma[0] * d2, sigma[1]];
    // flipping one column of Q1 and one row of Q2 moves both signs onto λ1
    let factor_a = matmul(&q1, &[[d1, 0.0], [0.0, 1.0]]);
    let factor_b = matmul(&[[d2, 0.0], [0.0, 1.0]], &q2);
    let bases = [
        [factor_a[0][0], factor_a[1][0]],
        [factor_a[0][1], factor_a[1][1]],
        factor_b[0],
        factor_b[1],
    ];
    SingularDecomposition {
        lambda,
        bases,
        factor_a,
        factor_b,
        q1,
        q2,
        singular_values: sigma,
        jacobian: det(df),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AdaptedFrame {
    pub decomposition: SingularDecomposition,
    /// `e1, e2` tangent and `e3, e4` normal.
    pub e: [Vec4; 4],
}

impl AdaptedFrame {
    pub fn lambda(&self) -> [f64; 2] {
        self.decomposition.lambda
    }

    pub fn from_decomposition(decomposition: SingularDecomposition) -> AdaptedFrame {
        let lift_domain = |v: [f64; 2]| [v[0], v[1], 0.0, 0.0];
        let lift_range = |v: [f64; 2]| [0.0, 0.0, v[0], v[1]];
        let mut e = [[0.0; 4]; 4];
        for i in 0..2 {
            let l = decomposition.lambda[i];
            let s = 1.0 / (1.0 + l * l).sqrt();
            let a = lift_domain(decomposition.bases[i]);
            let b = lift_range(decomposition.bases[2 + i]);
            e[i] = std::array::from_fn(|c| s * (a[c] + l * b[c]));
            e[2 + i] = std::array::from_fn(|c| s * (b[c] - l * a[c]));
        }
        AdaptedFrame { decomposition, e }
    }
}

/// Adapted frame of a graph immersion at `x`.
pub fn build_adapted_frame(imm: &Immersion, x: [f64; 2]) -> Result<AdaptedFrame> {
    let df = imm.differential(x)?;
    Ok(AdaptedFrame::from_decomposition(singular_decomposition(&df)))
}

/// `(∗η1, ∗η2, ∗η′, ∗η″)` in terms of the signed singular values.
pub fn closed_form_stars(lambda1: f64, lambda2: f64) -> [f64; 4] {
    let star1 = 1.0 / ((1.0 + lambda1 * lambda1) * (1.0 + lambda2 * lambda2)).sqrt();
    let jac = lambda1 * lambda2;
    [star1, jac * star1, (1.0 + jac) * star1, (1.0 - jac) * star1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::dot4;

    fn apply(m: &Mat2, v: [f64; 2]) -> [f64; 2] {
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    #[test]
    fn diagonal_differential() {
        let d = singular_decomposition(&[[3.0, 0.0], [0.0, 4.0]]);
        assert_eq!(d.lambda, [3.0, 4.0]);
        assert_eq!(d.jacobian, 12.0);
        assert!((d.bases[0][0] - 1.0).abs() < 1e-15 && d.bases[0][1].abs() < 1e-15);
        assert!((d.bases[1][1] - 1.0).abs() < 1e-15 && d.bases[1][0].abs() < 1e-15);
        assert!((d.bases[2][0] - 1.0).abs() < 1e-15 && (d.bases[3][1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rotation_differential() {
        let d = singular_decomposition(&[[0.0, 1.0], [-1.0, 0.0]]);
        assert_eq!(d.jacobian, 1.0);
        assert_eq!(d.lambda, [1.0, 1.0]);
        assert_eq!(d.bases[0], [1.0, 0.0]);
    }

    /// Brute-force oracle: scan SO(2)×SO(2) for the pair that diagonalizes
    /// `Aᵀ·M·Bᵀ`, then order by the `λ2 ≥ |λ1|` convention.
    fn brute_force_lambdas(df: &Mat2) -> [f64; 2] {
        let m = transpose(df);
        let steps = 720;
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        for i in 0..steps {
            for j in 0..steps {
                let a = rotation(i as f64 * std::f64::consts::TAU / steps as f64);
                let b = rotation(j as f64 * std::f64::consts::TAU / steps as f64);
                let d = matmul(&matmul(&transpose(&a), &m), &transpose(&b));
                let off = d[0][1].abs() + d[1][0].abs();
                let lam = [d[0][0], d[1][1]];
                if lam[1] >= lam[0].abs() - 1e-9 && off < best.0 {
                    best = (off, lam);
                }
            }
        }
        assert!(best.0 < 1e-9);
        best.1
    }

    #[test]
    fn swap_differential_matches_brute_force() {
        let df = [[0.0, 1.0], [1.0, 0.0]];
        let oracle = brute_force_lambdas(&df);
        assert!((oracle[0] + 1.0).abs() < 1e-9 && (oracle[1] - 1.0).abs() < 1e-9);
        let d = singular_decomposition(&df);
        assert_eq!(d.jacobian, -1.0);
        assert_eq!(d.lambda, [-1.0, 1.0]);
    }

    #[test]
    fn generic_properties() {
        for df in [
            [[1.0, 2.0], [3.0, 4.0]],
            [[-0.3, 7.0], [0.2, -5.0]],
            [[0.0, 0.0], [0.0, 0.0]],
            [[1e-3, 0.0], [0.0, -1e3]],
            [[2.0, 2.0], [2.0, 2.0]],
        ] {
            let d = singular_decomposition(&df);
            assert!(d.lambda[1] >= d.lambda[0].abs());
            assert!((d.lambda[0] * d.lambda[1] - d.jacobian).abs() <= 1e-10 * (1.0 + d.jacobian.abs()));
            assert!((det(&d.factor_a) - 1.0).abs() < 1e-14);
            assert!((det(&d.factor_b) - 1.0).abs() < 1e-14);
            for i in 0..2 {
                let lhs = apply(&df, d.bases[i]);
                for c in 0..2 {
                    assert!((lhs[c] - d.lambda[i] * d.bases[2 + i][c]).abs() < 1e-12, "{df:?}");
                }
            }
            let r = d.reconstruct();
            let m = transpose(&df);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((r[i][j] - m[i][j]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn flat_and_identity_frames() {
        let f = AdaptedFrame::from_decomposition(singular_decomposition(&[[0.0; 2]; 2]));
        assert_eq!(f.e[0], [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(f.e[1], [0.0, 1.0, 0.0, 0.0]);
        assert_eq!(f.e[2], [0.0, 0.0, 1.0, 0.0]);
        assert_eq!(f.e[3], [0.0, 0.0, 0.0, 1.0]);

        let f = AdaptedFrame::from_decomposition(singular_decomposition(&[[1.0, 0.0], [0.0, 1.0]]));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for (got, want) in f.e[0].iter().chain(&f.e[1]).zip([s, 0.0, s, 0.0, 0.0, s, 0.0, s]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn frame_is_orthonormal() {
        let f = AdaptedFrame::from_decomposition(singular_decomposition(&[[0.3, -2.2], [1.7, 0.9]]));
        for a in 0..4 {
            for b in 0..4 {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((dot4(&f.e[a], &f.e[b]) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(closed_form_stars(0.0, 0.0), [1.0, 0.0, 1.0, 1.0]);
        assert_eq!(closed_form_stars(1.0, 1.0), [0.5, 0.5, 1.0, 0.0]);
        assert_eq!(closed_form_stars(-1.0, 1.0), [0.5, -0.5, 0.0, 1.0]);
    }
}
