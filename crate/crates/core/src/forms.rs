//! Constant 2-forms on R⁴, their Hodge stars on a surface and the frame
//! contractions `Ω_{iα}`, `Ω_{iα,jβ}`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Immersion, LocalGeometry, PointFrame, SurfaceJet, Vec4};
use crate::jets::Jet3;

/// Index pairs `(A, B)`, `A < B`, in storage order.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// A constant 2-form `Σ_{A<B} ω_AB dx_A ∧ dx_B`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParallelForm2 {
    /// `[ω12, ω13, ω14, ω23, ω24, ω34]`.
    pub coeff: [f64; 6],
}

impl ParallelForm2 {
    pub const fn new(coeff: [f64; 6]) -> Self {
        ParallelForm2 { coeff }
    }

    /// `dx1 ∧ dx2`.
    pub const fn eta1() -> Self {
        Self::new([1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    }

    /// `dx3 ∧ dx4`.
    pub const fn eta2() -> Self {
        Self::new([0.0, 0.0, 0.0, 0.0, 0.0, 1.0])
    }

    /// `η1 + η2`.
    pub const fn eta_prime() -> Self {
        Self::new([1.0, 0.0, 0.0, 0.0, 0.0, 1.0])
    }

    /// `η1 − η2`.
    pub const fn eta_double_prime() -> Self {
        Self::new([1.0, 0.0, 0.0, 0.0, 0.0, -1.0])
    }

    pub fn named() -> [(&'static str, ParallelForm2); 4] {
        [
            ("eta1", Self::eta1()),
            ("eta2", Self::eta2()),
            ("etaP", Self::eta_prime()),
            ("etaPP", Self::eta_double_prime()),
        ]
    }

    /// `ω_AB` for any index order.
    pub fn component(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return 0.0;
        }
        let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        let k = PAIRS.iter().position(|&p| p == (lo, hi)).expect("indices below 4");
        sign * self.coeff[k]
    }

    /// `Ω(u, v)`.
    pub fn eval(&self, u: &Vec4, v: &Vec4) -> f64 {
        PAIRS
            .iter()
            .zip(self.coeff.iter())
            .map(|(&(a, b), w)| w * (u[a] * v[b] - u[b] * v[a]))
            .sum()
    }

    pub fn eval_jets(&self, u: &[Jet3; 4], v: &[Jet3; 4]) -> Jet3 {
        let mut acc = Jet3::constant(0.0);
        for (&(a, b), &w) in PAIRS.iter().zip(self.coeff.iter()) {
            if w != 0.0 {
                acc = acc + (u[a] * v[b] - u[b] * v[a]) * w;
            }
        }
        acc
    }
}

impl std::ops::Add for ParallelForm2 {
    type Output = ParallelForm2;
    fn add(self, rhs: Self) -> Self {
        ParallelForm2::new(std::array::from_fn(|k| self.coeff[k] + rhs.coeff[k]))
    }
}

impl fmt::Display for ParallelForm2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((name, _)) = Self::named().iter().find(|(_, w)| w == self) {
            return f.write_str(name);
        }
        let c = &self.coeff;
        write!(f, "{},{},{},{},{},{}", c[0], c[1], c[2], c[3], c[4], c[5])
    }
}

impl FromStr for ParallelForm2 {
    type Err = Error;

    /// Accepts `eta1`, `eta2`, `etaP`, `etaPP` or six comma-separated
    /// coefficients `w12,w13,w14,w23,w24,w34`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((_, w)) = Self::named().into_iter().find(|(n, _)| *n == s) {
            return Ok(w);
        }
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 6 {
            return Err(Error::InvalidArgument(format!(
                "form must be eta1|eta2|etaP|etaPP or six coefficients, got {s:?}"
            )));
        }
        let mut coeff = [0.0; 6];
        for (c, p) in coeff.iter_mut().zip(parts) {
            *c = p
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad form coefficient {p:?}")))?;
        }
        Ok(ParallelForm2::new(coeff))
    }
}

/// `∗Ω = Ω(∂1F, ∂2F)/√det g`.
pub fn hodge_star(form: &ParallelForm2, frame: &PointFrame) -> f64 {
    form.eval(&frame.coordinate_tangents[0], &frame.coordinate_tangents[1]) / frame.sqrt_det_g
}

/// `∗Ω` as a jet field through the coordinate formula; valid through order two.
pub fn star_field(form: &ParallelForm2, surface: &SurfaceJet) -> Result<Jet3> {
    let [x1, x2] = surface.tangents();
    let g11 = crate::jets::dot(&x1, &x1);
    let g12 = crate::jets::dot(&x1, &x2);
    let g22 = crate::jets::dot(&x2, &x2);
    let det = g11 * g22 - g12 * g12;
    form.eval_jets(&x1, &x2).checked_div(&det.sqrt()?)
}

/// `Ω_{iα}`, indexed `[i][α]`: `Ω_{1α} = Ω(e_α, e2)`, `Ω_{2α} = Ω(e1, e_α)`.
pub fn contraction_i_alpha(form: &ParallelForm2, frame: &PointFrame) -> [[f64; 2]; 2] {
    let e = &frame.frame;
    [
        [form.eval(&e[2], &e[1]), form.eval(&e[3], &e[1])],
        [form.eval(&e[0], &e[2]), form.eval(&e[0], &e[3])],
    ]
}

/// `Ω_{iα,jβ}`, indexed `[i][α][j][β]`. For surfaces only `i = 1, j = 2`
/// occurs and equals `Ω(e_α, e_β)`; all other slots are zero.
pub fn contraction_i_alpha_j_beta(form: &ParallelForm2, frame: &PointFrame) -> [[[[f64; 2]; 2]; 2]; 2] {
    let mut out = [[[[0.0; 2]; 2]; 2]; 2];
    for alpha in 0..2 {
        for beta in 0..2 {
            out[0][alpha][1][beta] = form.eval(&frame.frame[2 + alpha], &frame.frame[2 + beta]);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMethod {
    /// `e_k(∗Ω) = Σ_i h^α_ik Ω_{iα}`.
    FrameFormula,
    /// Differentiate the `∗Ω` jet field along the surface.
    Direct,
}

/// Frame-formula gradient from values already on hand.
pub fn star_gradient_from_frame(form: &ParallelForm2, frame: &PointFrame) -> [f64; 2] {
    let c = contraction_i_alpha(form, frame);
    std::array::from_fn(|k| {
        let mut acc = 0.0;
        for i in 0..2 {
            for alpha in 0..2 {
                acc += frame.sff[alpha][i][k] * c[i][alpha];
            }
        }
        acc
    })
}

/// Components of `∇(∗Ω)` along `e1, e2`.
pub fn star_gradient_at(form: &ParallelForm2, geo: &LocalGeometry, method: GradientMethod) -> Result<[f64; 2]> {
    match method {
        GradientMethod::FrameFormula => Ok(star_gradient_from_frame(form, geo.frame())),
        GradientMethod::Direct => Ok(geo.gradient(&star_field(form, geo.surface())?)),
    }
}

pub fn star_gradient(
    form: &ParallelForm2,
    imm: &Immersion,
    x: [f64; 2],
    method: GradientMethod,
) -> Result<[f64; 2]> {
    star_gradient_at(form, &LocalGeometry::at(imm, x)?, method)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{evaluate_frame, Gauge};

    #[test]
    fn antisymmetry() {
        let w = ParallelForm2::new([0.3, -1.0, 2.0, 0.5, 0.25, -0.75]);
        let u = [0.1, 0.7, -0.2, 1.3];
        let v = [-0.9, 0.4, 0.6, 0.05];
        assert_eq!(w.eval(&u, &v), -w.eval(&v, &u));
        assert_eq!(w.component(3, 1), -w.component(1, 3));
        assert_eq!(w.eval(&u, &u), 0.0);
    }

    #[test]
    fn parse_and_print() {
        assert_eq!("etaP".parse::<ParallelForm2>().unwrap(), ParallelForm2::eta_prime());
        assert_eq!(
            "1,0,0,0,0,-1".parse::<ParallelForm2>().unwrap(),
            ParallelForm2::eta_double_prime()
        );
        let w: ParallelForm2 = "1,2,3,4,5,6".parse().unwrap();
        assert_eq!(w.to_string(), "1,2,3,4,5,6");
        assert_eq!(ParallelForm2::eta2().to_string(), "eta2");
        assert!("eta3".parse::<ParallelForm2>().is_err());
        assert!("1,2,x,4,5,6".parse::<ParallelForm2>().is_err());
    }

    #[test]
    fn stars_on_flat_plane() {
        let imm = Immersion::linear_plane([[0.0; 2]; 2]);
        let f = evaluate_frame(&imm, [0.2, 0.1], Gauge::GramSchmidt).unwrap();
        assert_eq!(hodge_star(&ParallelForm2::eta1(), &f), 1.0);
        assert_eq!(hodge_star(&ParallelForm2::eta2(), &f), 0.0);
        assert_eq!(contraction_i_alpha(&ParallelForm2::eta1(), &f), [[0.0; 2]; 2]);
        let c = contraction_i_alpha(&ParallelForm2::eta2(), &f);
        assert!(c.iter().flatten().all(|v| [0.0, 1.0, -1.0].contains(v)));
        assert_eq!(contraction_i_alpha_j_beta(&ParallelForm2::eta1(), &f)[0][0][1][1], 0.0);
    }

    #[test]
    fn stars_on_identity_graph() {
        let imm = Immersion::graph("x1", "x2").unwrap();
        let f = evaluate_frame(&imm, [0.5, -0.5], Gauge::GramSchmidt).unwrap();
        let s: Vec<f64> = ParallelForm2::named().iter().map(|(_, w)| hodge_star(w, &f)).collect();
        let want = [0.5, 0.5, 1.0, 0.0];
        for (a, b) in s.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn swap_graph_has_negative_jacobian_weight() {
        let imm = Immersion::graph("x2", "x1").unwrap();
        let f = evaluate_frame(&imm, [0.3, 0.8], Gauge::GramSchmidt).unwrap();
        let s1 = hodge_star(&ParallelForm2::eta1(), &f);
        let s2 = hodge_star(&ParallelForm2::eta2(), &f);
        assert!((s1 - 0.5).abs() < 1e-15);
        assert!((s2 + 0.5).abs() < 1e-15);
    }

    #[test]
    fn orthonormal_frame_star_matches_coordinate_formula() {
        let imm = Immersion::graph("x1*x2 - sin(x2)", "0.5*x1^2").unwrap();
        for gauge in [Gauge::GramSchmidt, Gauge::Adapted] {
            let f = evaluate_frame(&imm, [0.6, -0.3], gauge).unwrap();
            for (_, w) in ParallelForm2::named() {
                assert!((hodge_star(&w, &f) - w.eval(&f.frame[0], &f.frame[1])).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn gradient_vanishes_on_planes() {
        let imm = Immersion::plane([[0.4, -1.0], [2.0, 0.1]], [1.0, 0.0, -2.0, 0.5]);
        for method in [GradientMethod::FrameFormula, GradientMethod::Direct] {
            let g = star_gradient(&ParallelForm2::eta_prime(), &imm, [0.3, 0.9], method).unwrap();
            assert!(g.iter().all(|v| v.abs() < 1e-14), "{method:?} {g:?}");
        }
    }

    #[test]
    fn gradient_methods_agree_on_torus() {
        let imm = Immersion::torus(2f64.sqrt(), 2f64.sqrt()).unwrap();
        let x = [std::f64::consts::FRAC_PI_4, 0.0];
        let a = star_gradient(&ParallelForm2::eta_prime(), &imm, x, GradientMethod::FrameFormula).unwrap();
        let b = star_gradient(&ParallelForm2::eta_prime(), &imm, x, GradientMethod::Direct).unwrap();
        for k in 0..2 {
            assert!((a[k] - b[k]).abs() <= 1e-9 * (1.0 + a[k].abs()));
        }
    }
}
