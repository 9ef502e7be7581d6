//! Pointwise verifiers for the extrinsic identities satisfied by parallel
//! 2-forms on surfaces in R⁴, and the rigidity algebra for minimal
//! self-shrinking graphs.
//!
//! Each verifier evaluates both sides of an identity along separate code
//! paths and returns a [`ResidualReport`]. Laplacians and gradients of `∗Ω`
//! come from differentiating the coordinate jet of `∗Ω`; the other sides are
//! frame contractions of the second fundamental form and its derivatives.

use serde::{Deserialize, Serialize};

use crate::adapted_frame::{build_adapted_frame, closed_form_stars};
use crate::error::{Error, Result};
use crate::forms::{contraction_i_alpha, contraction_i_alpha_j_beta, star_field, ParallelForm2};
use crate::geometry::{norm4, Gauge, Immersion, LocalGeometry, PointFrame};

/// Default tolerance for [`classify_rigidity`].
pub const RIGIDITY_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub name: String,
    pub point: [f64; 2],
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs − rhs`.
    pub defect: f64,
    pub abs_residual: f64,
    /// `abs_residual / (1 + max(|lhs|, |rhs|))`.
    pub rel_residual: f64,
    /// `|H⃗ + ½F⃗^⊥|` at the point.
    pub shrinker_residual: f64,
}

impl ResidualReport {
    pub fn new(name: impl Into<String>, point: [f64; 2], lhs: f64, rhs: f64, shrinker_residual: f64) -> Self {
        let defect = lhs - rhs;
        let abs_residual = defect.abs();
        ResidualReport {
            name: name.into(),
            point,
            lhs,
            rhs,
            defect,
            abs_residual,
            rel_residual: abs_residual / (1.0 + lhs.abs().max(rhs.abs())),
            shrinker_residual,
        }
    }

    /// A report whose residual is a precomputed nonnegative magnitude.
    fn from_residual(name: impl Into<String>, point: [f64; 2], lhs: f64, rhs: f64, residual: f64, shrinker: f64) -> Self {
        ResidualReport {
            defect: residual,
            abs_residual: residual,
            rel_residual: residual / (1.0 + lhs.abs().max(rhs.abs())),
            ..Self::new(name, point, lhs, rhs, shrinker)
        }
    }
}

/// `Σ_{α,i,k} (h^α_ik)²`.
fn sff_norm_sq(h: &[[[f64; 2]; 2]; 2]) -> f64 {
    h.iter().flatten().flatten().map(|v| v * v).sum()
}

/// `2 Σ_{k,α,β} h^α_1k h^β_2k Ω_{1α,2β}`.
fn quadratic_contraction(form: &ParallelForm2, frame: &PointFrame) -> f64 {
    let c = contraction_i_alpha_j_beta(form, frame);
    let h = &frame.sff;
    let mut acc = 0.0;
    for k in 0..2 {
        for alpha in 0..2 {
            for beta in 0..2 {
                acc += h[alpha][0][k] * h[beta][1][k] * c[0][alpha][1][beta];
            }
        }
    }
    2.0 * acc
}

/// `Σ_k (h³_1k h⁴_2k − h⁴_1k h³_2k)`.
fn normal_cross(h: &[[[f64; 2]; 2]; 2]) -> f64 {
    (0..2).map(|k| h[0][0][k] * h[1][1][k] - h[1][0][k] * h[0][1][k]).sum()
}

/// Shared evaluation of the terms in the Laplacian identity for `∗Ω`.
struct StarTerms {
    laplacian: f64,
    star: f64,
    /// `½⟨F⃗, ∇(∗Ω)⟩` with the gradient taken from the `∗Ω` jet.
    drift: f64,
    /// `Σ_i h^α_{,i} Ω_{iα}`.
    mean_term: f64,
    /// `2 Σ_{i<j,k} h^α_ik h^β_jk Ω_{iα,jβ}`.
    quadratic: f64,
    sff_sq: f64,
    shrinker: f64,
}

impl StarTerms {
    fn at(geo: &LocalGeometry, form: &ParallelForm2) -> Result<StarTerms> {
        let frame = geo.frame();
        let star = star_field(form, geo.surface())?;
        let grad = geo.gradient(&star);
        let drift = 0.5 * (frame.position_tangential[0] * grad[0] + frame.position_tangential[1] * grad[1]);
        let dh = geo.mean_curvature_normal_derivative();
        let c = contraction_i_alpha(form, frame);
        let mut mean_term = 0.0;
        for i in 0..2 {
            for alpha in 0..2 {
                mean_term += dh[alpha][i] * c[i][alpha];
            }
        }
        Ok(StarTerms {
            laplacian: geo.laplacian(&star),
            star: star.value(),
            drift,
            mean_term,
            quadratic: quadratic_contraction(form, frame),
            sff_sq: frame.sff_norm_sq(),
            shrinker: norm4(&frame.shrinker_residual()),
        })
    }

    fn prop_rhs(&self) -> f64 {
        -self.sff_sq * self.star + self.mean_term + self.quadratic
    }
}

/// Symmetry of `h^α_{ij,k}` in its last two indices.
pub fn check_codazzi(imm: &Immersion, x: [f64; 2]) -> Result<ResidualReport> {
    let geo = LocalGeometry::at(imm, x)?;
    let d = geo.sff_covariant_derivative();
    let mut worst = (0.0, 0.0, 0.0);
    for da in &d {
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let (a, b) = (da[i][j][k], da[i][k][j]);
                    if (a - b).abs() > worst.0 {
                        worst = ((a - b).abs(), a, b);
                    }
                }
            }
        }
    }
    let shrinker = norm4(&geo.frame().shrinker_residual());
    Ok(ResidualReport::from_residual("codazzi", x, worst.1, worst.2, worst.0, shrinker))
}

/// `Δ(∗Ω) = −|h|²∗Ω + Σ_i h^α_{,i}Ω_{iα} + 2Σ_{i<j,k} h^α_ik h^β_jk Ω_{iα,jβ}`
/// on any surface in flat R⁴.
pub fn check_prop_2_5(imm: &Immersion, x: [f64; 2], form: &ParallelForm2) -> Result<ResidualReport> {
    let t = StarTerms::at(&LocalGeometry::at(imm, x)?, form)?;
    Ok(ResidualReport::new("laplacian_of_star", x, t.laplacian, t.prop_rhs(), t.shrinker))
}

/// `Σ_i Ω_{iα} h^α_{,i} = ½⟨F⃗, ∇(∗Ω)⟩`, valid on self-shrinkers.
pub fn check_lemma_2_6(imm: &Immersion, x: [f64; 2], form: &ParallelForm2) -> Result<ResidualReport> {
    let t = StarTerms::at(&LocalGeometry::at(imm, x)?, form)?;
    Ok(ResidualReport::new("shrinker_mean_term", x, t.mean_term, t.drift, t.shrinker))
}

/// `Δ(∗Ω) + |h|²∗Ω − 2Σ_{i<j} Ω_{iα,jβ}h^α_ik h^β_jk − ½⟨F⃗, ∇(∗Ω)⟩ = 0`,
/// valid on self-shrinkers. `lhs` is the Laplacian, `rhs` the remaining
/// terms moved across.
pub fn check_structure_eq(imm: &Immersion, x: [f64; 2], form: &ParallelForm2) -> Result<ResidualReport> {
    let t = StarTerms::at(&LocalGeometry::at(imm, x)?, form)?;
    let rhs = -t.sff_sq * t.star + t.quadratic + t.drift;
    Ok(ResidualReport::new("structure_equation", x, t.laplacian, rhs, t.shrinker))
}

/// The two forms whose quadratic contraction has a closed form in the
/// adapted frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeForm {
    Eta1,
    Eta2,
}

impl VolumeForm {
    pub fn form(self) -> ParallelForm2 {
        match self {
            VolumeForm::Eta1 => ParallelForm2::eta1(),
            VolumeForm::Eta2 => ParallelForm2::eta2(),
        }
    }
}

fn adapted_geometry(imm: &Immersion, x: [f64; 2]) -> Result<(LocalGeometry, PointFrame)> {
    if !imm.is_graph() {
        return Err(Error::NotGraph(imm.kind_name()));
    }
    let geo = LocalGeometry::at(imm, x)?;
    let frame = geo.frame_in(imm, Gauge::Adapted)?;
    Ok((geo, frame))
}

/// Weight `w` in `2Σ Ω_{1α,2β} h^α_1k h^β_2k = 2w Σ_k (h³_1k h⁴_2k − h⁴_1k h³_2k)`
/// from the signed singular values: `∗η2` for `η1` and `∗η1` for `η2`.
pub fn contraction_weight(imm: &Immersion, x: [f64; 2], which: VolumeForm) -> Result<f64> {
    let [l1, l2] = build_adapted_frame(imm, x)?.lambda();
    let stars = closed_form_stars(l1, l2);
    Ok(match which {
        VolumeForm::Eta1 => stars[1],
        VolumeForm::Eta2 => stars[0],
    })
}

/// Quadratic contraction of `η1` or `η2` against its closed form in the
/// adapted frame; valid on any graph.
pub fn check_contraction_identity(imm: &Immersion, x: [f64; 2], which: VolumeForm) -> Result<ResidualReport> {
    let (_, frame) = adapted_geometry(imm, x)?;
    let lhs = quadratic_contraction(&which.form(), &frame);
    let rhs = 2.0 * contraction_weight(imm, x, which)? * normal_cross(&frame.sff);
    let name = match which {
        VolumeForm::Eta1 => "contraction_eta1",
        VolumeForm::Eta2 => "contraction_eta2",
    };
    Ok(ResidualReport::new(name, x, lhs, rhs, norm4(&frame.shrinker_residual())))
}

/// The four Laplacian equations for `∗η1, ∗η2, ∗η′, ∗η″` on a graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphEquation {
    Eta1,
    Eta2,
    EtaPrime,
    EtaDoublePrime,
}

impl GraphEquation {
    pub const ALL: [GraphEquation; 4] = [
        GraphEquation::Eta1,
        GraphEquation::Eta2,
        GraphEquation::EtaPrime,
        GraphEquation::EtaDoublePrime,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GraphEquation::Eta1 => "graph_eta1",
            GraphEquation::Eta2 => "graph_eta2",
            GraphEquation::EtaPrime => "graph_eta_prime",
            GraphEquation::EtaDoublePrime => "graph_eta_double_prime",
        }
    }

    pub fn form(self) -> ParallelForm2 {
        match self {
            GraphEquation::Eta1 => ParallelForm2::eta1(),
            GraphEquation::Eta2 => ParallelForm2::eta2(),
            GraphEquation::EtaPrime => ParallelForm2::eta_prime(),
            GraphEquation::EtaDoublePrime => ParallelForm2::eta_double_prime(),
        }
    }
}

/// Left side of the selected graph equation, with the second fundamental
/// form in the adapted frame. `lhs` is the Laplacian and `rhs` the remaining
/// terms moved across, so `defect` is the left side itself.
pub fn check_thm_3_6(imm: &Immersion, x: [f64; 2], which: GraphEquation) -> Result<ResidualReport> {
    let (geo, frame) = adapted_geometry(imm, x)?;
    let form = which.form();
    let star_jet = star_field(&form, geo.surface())?;
    let laplacian = geo.laplacian(&star_jet);
    let grad = geo.gradient(&star_jet);
    let drift = 0.5 * (geo.frame().position_tangential[0] * grad[0] + geo.frame().position_tangential[1] * grad[1]);
    let [l1, l2] = build_adapted_frame(imm, x)?.lambda();
    let [s1, s2, sp, spp] = closed_form_stars(l1, l2);
    let h = &frame.sff;
    let sq = sff_norm_sq(h);
    let cross = normal_cross(h);
    let curvature = match which {
        GraphEquation::Eta1 => s1 * sq - 2.0 * s2 * cross,
        GraphEquation::Eta2 => s2 * sq - 2.0 * s1 * cross,
        GraphEquation::EtaPrime => sp * curvature_sums(h)[0],
        GraphEquation::EtaDoublePrime => spp * curvature_sums(h)[1],
    };
    Ok(ResidualReport::new(
        which.name(),
        x,
        laplacian,
        drift - curvature,
        norm4(&frame.shrinker_residual()),
    ))
}

/// Defects of the Laplacian identity and the shrinker mean-term identity for
/// one form, which add up to the structure-equation defect.
pub fn structure_decomposition(imm: &Immersion, x: [f64; 2], form: &ParallelForm2) -> Result<[f64; 3]> {
    let t = StarTerms::at(&LocalGeometry::at(imm, x)?, form)?;
    let laplacian_defect = t.laplacian - t.prop_rhs();
    let mean_term_defect = t.mean_term - t.drift;
    let structure = t.laplacian - (-t.sff_sq * t.star + t.quadratic + t.drift);
    Ok([laplacian_defect, mean_term_defect, structure])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rigidity {
    None,
    Minimal,
    TotallyGeodesic,
}

/// The two nonnegative curvature sums of adapted-frame data `h[α][i][j]`
/// that weight `∗η′` and `∗η″` in the graph equations:
/// `Σ_k (h³_1k − h⁴_2k)² + (h⁴_1k + h³_2k)²` and
/// `Σ_k (h³_1k + h⁴_2k)² + (h⁴_1k − h³_2k)²`.
pub fn curvature_sums(h: &[[[f64; 2]; 2]; 2]) -> [f64; 2] {
    let plus = (0..2)
        .map(|k| (h[0][0][k] - h[1][1][k]).powi(2) + (h[1][0][k] + h[0][1][k]).powi(2))
        .sum();
    let minus = (0..2)
        .map(|k| (h[0][0][k] + h[1][1][k]).powi(2) + (h[1][0][k] - h[0][1][k]).powi(2))
        .sum();
    [plus, minus]
}

/// Classifies second fundamental form data at a point of a graph.
///
/// `h` is indexed `[α][i][j]` in the adapted frame. The data is minimal when
/// either of the two curvature sums annihilated by the positive stars is at
/// most `tol²`. A minimal point with `|F^⊥| ≤ tol < |F^T|` is totally
/// geodesic when `h^α_11 h^α_22 − (h^α_12)² = 0` holds within `tol²` for each
/// `α`; failure of that relation makes the data inconsistent and the verdict
/// is `None`.
pub fn classify_rigidity(
    h: &[[[f64; 2]; 2]; 2],
    position_tangential: [f64; 2],
    position_normal: [f64; 2],
    tol: f64,
) -> Result<Rigidity> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let tol_sq = tol * tol;
    let [plus, minus] = curvature_sums(h);
    if plus > tol_sq && minus > tol_sq {
        return Ok(Rigidity::None);
    }
    let f_nor = position_normal[0].hypot(position_normal[1]);
    let f_tan = position_tangential[0].hypot(position_tangential[1]);
    if f_nor > tol || f_tan <= tol {
        return Ok(Rigidity::Minimal);
    }
    let determinant_holds = h
        .iter()
        .all(|ha| (ha[0][0] * ha[1][1] - ha[0][1] * ha[0][1]).abs() <= tol_sq);
    Ok(if determinant_holds {
        Rigidity::TotallyGeodesic
    } else {
        Rigidity::None
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_normalization() {
        let r = ResidualReport::new("t", [0.0, 0.0], 3.0, -1.0, 0.0);
        assert_eq!(r.abs_residual, 4.0);
        assert_eq!(r.rel_residual, 1.0);
        let z = ResidualReport::new("t", [0.0, 0.0], 0.0, 0.0, 0.0);
        assert_eq!(z.rel_residual, 0.0);
    }

    #[test]
    fn classifier_rejects_nonpositive_tolerance() {
        let h = [[[0.0; 2]; 2]; 2];
        assert!(classify_rigidity(&h, [1.0, 0.0], [0.0, 0.0], 0.0).is_err());
        assert!(classify_rigidity(&h, [1.0, 0.0], [0.0, 0.0], -1.0).is_err());
    }

    #[test]
    fn normal_cross_is_antisymmetric_in_normals() {
        let h = [[[1.0, 2.0], [2.0, -0.5]], [[0.3, 0.7], [0.7, 1.1]]];
        let swapped = [h[1], h[0]];
        assert!((normal_cross(&h) + normal_cross(&swapped)).abs() < 1e-15);
    }
}
