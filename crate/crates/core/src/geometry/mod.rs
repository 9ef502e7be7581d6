//! Extrinsic geometry of immersed surfaces in R⁴.
//!
//! Everything here is computed from jets of the immersion. [`LocalGeometry`]
//! expands the position to third order at a point and builds the
//! Gram–Schmidt frame, the metric and the second fundamental form as jet
//! fields, so their first (and for metric quantities, second) derivatives
//! are exact. Covariant derivatives of the second fundamental form and of
//! the mean curvature vector are read off those jets.
//!
//! Index conventions: tangent indices `i, j, k ∈ {0, 1}` stand for `e1, e2`;
//! normal indices `α ∈ {0, 1}` stand for `e3, e4`.

mod immersion;

pub use immersion::{GridInterpolant, Immersion};

use serde::Serialize;

use crate::adapted_frame;
use crate::error::{Error, Result};
use crate::jets::{dot, Coord, Jet3};

/// Gram determinants at or below this value are treated as degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// Ambient axes are projected onto the normal plane in this order when
/// completing the Gram–Schmidt frame.
pub const NORMAL_AXIS_ORDER: [usize; 4] = [2, 3, 0, 1];

/// Minimum projected length for an ambient axis to seed a normal vector.
pub const NORMAL_AXIS_THRESHOLD: f64 = 1e-6;

pub type Vec4 = [f64; 4];
type JVec = [Jet3; 4];

/// How the orthonormal frame at a point is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    GramSchmidt,
    Adapted,
}

#[inline]
pub fn dot4(a: &Vec4, b: &Vec4) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

#[inline]
pub fn norm4(a: &Vec4) -> f64 {
    dot4(a, a).sqrt()
}

#[inline]
fn axpy4(alpha: f64, x: &Vec4, y: &Vec4) -> Vec4 {
    std::array::from_fn(|i| alpha * x[i] + y[i])
}

fn inverse2(m: &[[f64; 2]; 2]) -> ([[f64; 2]; 2], f64) {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    (
        [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]],
        det,
    )
}

/// Per-point extrinsic state of the surface in a chosen orthonormal gauge.
#[derive(Clone, Debug, Serialize)]
pub struct PointFrame {
    pub x: [f64; 2],
    pub gauge: Gauge,
    pub position: Vec4,
    /// Coordinate tangent vectors `∂_a F`.
    pub coordinate_tangents: [Vec4; 2],
    /// `e1, e2` tangent, `e3, e4` normal.
    pub frame: [Vec4; 4],
    /// `e_i = Σ_a frame_coeff[i][a] ∂_a F`.
    pub frame_coeff: [[f64; 2]; 2],
    pub metric: [[f64; 2]; 2],
    pub metric_inv: [[f64; 2]; 2],
    pub sqrt_det_g: f64,
    /// `christoffel[c][a][b] = Γ^c_ab` of the coordinate connection.
    pub christoffel: [[[f64; 2]; 2]; 2],
    /// `sff[α][i][j] = h^α_ij`.
    pub sff: [[[f64; 2]; 2]; 2],
    /// `h^α = h^α_11 + h^α_22`.
    pub mean_curvature: [f64; 2],
    /// `⟨F, e_i⟩`.
    pub position_tangential: [f64; 2],
    /// `⟨F, e_α⟩`.
    pub position_normal: [f64; 2],
}

impl PointFrame {
    /// Builds the per-point state from the position, its first and second
    /// coordinate derivatives and an orthonormal frame adapted to them.
    pub fn from_vectors(
        x: [f64; 2],
        gauge: Gauge,
        position: Vec4,
        tangents: [Vec4; 2],
        second: [[Vec4; 2]; 2],
        frame: [Vec4; 4],
    ) -> Result<PointFrame> {
        let metric = [
            [dot4(&tangents[0], &tangents[0]), dot4(&tangents[0], &tangents[1])],
            [dot4(&tangents[1], &tangents[0]), dot4(&tangents[1], &tangents[1])],
        ];
        let (metric_inv, det) = inverse2(&metric);
        if !(det > DEGENERACY_THRESHOLD) {
            return Err(Error::DegenerateImmersion { point: x, gram_det: det });
        }
        let mut christoffel = [[[0.0; 2]; 2]; 2];
        for (c, gc) in christoffel.iter_mut().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    gc[a][b] = (0..2)
                        .map(|d| metric_inv[c][d] * dot4(&second[a][b], &tangents[d]))
                        .sum();
                }
            }
        }
        let frame_coeff: [[f64; 2]; 2] = std::array::from_fn(|i| {
            let p = [dot4(&frame[i], &tangents[0]), dot4(&frame[i], &tangents[1])];
            [
                metric_inv[0][0] * p[0] + metric_inv[0][1] * p[1],
                metric_inv[1][0] * p[0] + metric_inv[1][1] * p[1],
            ]
        });
        let mut sff = [[[0.0; 2]; 2]; 2];
        for (alpha, s) in sff.iter_mut().enumerate() {
            let n = &frame[2 + alpha];
            let coord: [[f64; 2]; 2] =
                std::array::from_fn(|a| std::array::from_fn(|b| dot4(&second[a][b], n)));
            for i in 0..2 {
                for j in 0..2 {
                    let mut acc = 0.0;
                    for a in 0..2 {
                        for b in 0..2 {
                            acc += frame_coeff[i][a] * frame_coeff[j][b] * coord[a][b];
                        }
                    }
                    s[i][j] = acc;
                }
            }
        }
        let mean_curvature = [sff[0][0][0] + sff[0][1][1], sff[1][0][0] + sff[1][1][1]];
        Ok(PointFrame {
            x,
            gauge,
            position,
            coordinate_tangents: tangents,
            frame,
            frame_coeff,
            metric,
            metric_inv,
            sqrt_det_g: det.sqrt(),
            christoffel,
            sff,
            mean_curvature,
            position_tangential: [dot4(&position, &frame[0]), dot4(&position, &frame[1])],
            position_normal: [dot4(&position, &frame[2]), dot4(&position, &frame[3])],
        })
    }

    pub fn tangent(&self, i: usize) -> &Vec4 {
        &self.frame[i]
    }

    pub fn normal(&self, alpha: usize) -> &Vec4 {
        &self.frame[2 + alpha]
    }

    /// `H⃗ = h^α e_α` as an ambient vector.
    pub fn mean_curvature_vector(&self) -> Vec4 {
        let h = axpy4(self.mean_curvature[0], &self.frame[2], &[0.0; 4]);
        axpy4(self.mean_curvature[1], &self.frame[3], &h)
    }

    /// `F⃗^⊥` as an ambient vector.
    pub fn position_normal_vector(&self) -> Vec4 {
        let v = axpy4(self.position_normal[0], &self.frame[2], &[0.0; 4]);
        axpy4(self.position_normal[1], &self.frame[3], &v)
    }

    /// `H⃗ + ½F⃗^⊥`.
    pub fn shrinker_residual(&self) -> Vec4 {
        axpy4(0.5, &self.position_normal_vector(), &self.mean_curvature_vector())
    }

    /// `Σ (h^α_ij)²`.
    pub fn sff_norm_sq(&self) -> f64 {
        self.sff.iter().flatten().flatten().map(|v| v * v).sum()
    }

    /// `e_k(u)` from the coordinate gradient of `u`.
    pub fn frame_derivative(&self, k: usize, grad: [f64; 2]) -> f64 {
        self.frame_coeff[k][0] * grad[0] + self.frame_coeff[k][1] * grad[1]
    }

    /// Laplace–Beltrami operator of a scalar jet carrying two valid orders.
    pub fn laplacian(&self, u: &Jet3) -> f64 {
        debug_assert!(u.order() >= 2);
        let mut acc = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                let ca = Coord::from_index(a).unwrap();
                let cb = Coord::from_index(b).unwrap();
                let mut term = u.d2(ca, cb);
                for c in 0..2 {
                    term -= self.christoffel[c][a][b] * u.grad()[c];
                }
                acc += self.metric_inv[a][b] * term;
            }
        }
        acc
    }
}

/// The position of the surface and its coordinate functions as jets; the
/// argument handed to scalar fields.
#[derive(Clone, Debug)]
pub struct SurfaceJet {
    pub coords: [Jet3; 2],
    pub position: [Jet3; 4],
}

impl SurfaceJet {
    pub fn at(imm: &Immersion, x: [f64; 2]) -> Result<SurfaceJet> {
        let coords = Jet3::seed_both(x);
        let position = imm.position_from_coords(&coords)?;
        Ok(SurfaceJet { coords, position })
    }

    /// `∂_a F` as jets, valid through order two.
    pub fn tangents(&self) -> [[Jet3; 4]; 2] {
        [
            self.position.map(|p| p.partial(Coord::X1)),
            self.position.map(|p| p.partial(Coord::X2)),
        ]
    }

    /// `|F|²` as a jet.
    pub fn position_norm_sq(&self) -> Jet3 {
        dot(&self.position, &self.position)
    }
}

fn jscale(v: &JVec, s: Jet3) -> JVec {
    v.map(|c| c * s)
}

fn jsub(a: &JVec, b: &JVec) -> JVec {
    std::array::from_fn(|i| a[i] - b[i])
}

fn jnormalize(v: &JVec) -> Result<JVec> {
    let inv = dot(v, v).sqrt()?.recip()?;
    Ok(jscale(v, inv))
}

/// Gram–Schmidt frame at a point: tangents from `∂1F, ∂2F`, normals from the
/// projected ambient axes in [`NORMAL_AXIS_ORDER`].
pub fn gram_schmidt_frame(tangents: &[Vec4; 2]) -> [Vec4; 4] {
    let normalize = |v: Vec4| {
        let n = norm4(&v);
        v.map(|c| c / n)
    };
    let e1 = normalize(tangents[0]);
    let e2 = normalize(axpy4(-dot4(&tangents[1], &e1), &e1, &tangents[1]));
    let mut basis = vec![e1, e2];
    for axis in NORMAL_AXIS_ORDER {
        if basis.len() == 4 {
            break;
        }
        let mut v: Vec4 = std::array::from_fn(|c| if c == axis { 1.0 } else { 0.0 });
        for b in &basis {
            v = axpy4(-dot4(&v, b), b, &v);
        }
        if norm4(&v) > NORMAL_AXIS_THRESHOLD {
            basis.push(normalize(v));
        }
    }
    [basis[0], basis[1], basis[2], basis[3]]
}

/// Gram–Schmidt frame as jet fields: tangents from `∂1F, ∂2F`, normals from
/// the projected ambient axes in [`NORMAL_AXIS_ORDER`].
fn gram_schmidt_jets(tangents: &[JVec; 2]) -> Result<[JVec; 4]> {
    let e1 = jnormalize(&tangents[0])?;
    let u2 = jsub(&tangents[1], &jscale(&e1, dot(&tangents[1], &e1)));
    let e2 = jnormalize(&u2)?;
    let mut basis = vec![e1, e2];
    for axis in NORMAL_AXIS_ORDER {
        if basis.len() == 4 {
            break;
        }
        let mut v: JVec = std::array::from_fn(|c| Jet3::constant(if c == axis { 1.0 } else { 0.0 }));
        for b in &basis {
            v = jsub(&v, &jscale(b, dot(&v, b)));
        }
        if dot(&v, &v).value().sqrt() > NORMAL_AXIS_THRESHOLD {
            basis.push(jnormalize(&v)?);
        }
    }
    Ok([basis[0], basis[1], basis[2], basis[3]])
}

/// Jet expansion of the surface and its Gram–Schmidt frame field at a point.
#[derive(Clone, Debug)]
pub struct LocalGeometry {
    surface: SurfaceJet,
    tangents: [JVec; 2],
    second: [[JVec; 2]; 2],
    frame: [JVec; 4],
    /// `h^α_ij` jets, valid through order one.
    sff: [[[Jet3; 2]; 2]; 2],
    point: PointFrame,
}

impl LocalGeometry {
    pub fn at(imm: &Immersion, x: [f64; 2]) -> Result<LocalGeometry> {
        let surface = SurfaceJet::at(imm, x)?;
        let tangents = surface.tangents();
        let second = [
            [tangents[0].map(|t| t.partial(Coord::X1)), tangents[0].map(|t| t.partial(Coord::X2))],
            [tangents[1].map(|t| t.partial(Coord::X1)), tangents[1].map(|t| t.partial(Coord::X2))],
        ];
        let g = [
            [dot(&tangents[0], &tangents[0]), dot(&tangents[0], &tangents[1])],
            [dot(&tangents[0], &tangents[1]), dot(&tangents[1], &tangents[1])],
        ];
        let det = g[0][0] * g[1][1] - g[0][1] * g[0][1];
        if !(det.value() > DEGENERACY_THRESHOLD) {
            return Err(Error::DegenerateImmersion { point: x, gram_det: det.value() });
        }
        let frame = gram_schmidt_jets(&tangents)?;
        let inv_det = det.recip()?;
        let ginv = [
            [g[1][1] * inv_det, -(g[0][1] * inv_det)],
            [-(g[0][1] * inv_det), g[0][0] * inv_det],
        ];
        let coeff: [[Jet3; 2]; 2] = std::array::from_fn(|i| {
            let p = [dot(&frame[i], &tangents[0]), dot(&frame[i], &tangents[1])];
            [ginv[0][0] * p[0] + ginv[0][1] * p[1], ginv[1][0] * p[0] + ginv[1][1] * p[1]]
        });
        let sff = std::array::from_fn(|alpha| {
            let n = &frame[2 + alpha];
            let coord: [[Jet3; 2]; 2] =
                std::array::from_fn(|a| std::array::from_fn(|b| dot(&second[a][b], n)));
            std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    let mut acc = Jet3::constant(0.0);
                    for a in 0..2 {
                        for b in 0..2 {
                            acc = acc + coeff[i][a] * coeff[j][b] * coord[a][b];
                        }
                    }
                    acc
                })
            })
        });
        let val = |v: &JVec| v.map(|c| c.value());
        let point = PointFrame::from_vectors(
            x,
            Gauge::GramSchmidt,
            val(&surface.position),
            [val(&tangents[0]), val(&tangents[1])],
            [[val(&second[0][0]), val(&second[0][1])], [val(&second[1][0]), val(&second[1][1])]],
            [val(&frame[0]), val(&frame[1]), val(&frame[2]), val(&frame[3])],
        )?;
        Ok(LocalGeometry {
            surface,
            tangents,
            second,
            frame,
            sff,
            point,
        })
    }

    pub fn surface(&self) -> &SurfaceJet {
        &self.surface
    }

    /// The Gram–Schmidt point frame.
    pub fn frame(&self) -> &PointFrame {
        &self.point
    }

    pub fn x(&self) -> [f64; 2] {
        self.point.x
    }

    /// Same point, frame in the requested gauge.
    pub fn frame_in(&self, imm: &Immersion, gauge: Gauge) -> Result<PointFrame> {
        match gauge {
            Gauge::GramSchmidt => Ok(self.point.clone()),
            Gauge::Adapted => {
                let adapted = adapted_frame::build_adapted_frame(imm, self.point.x)?;
                let p = &self.point;
                let val = |v: &JVec| v.map(|c| c.value());
                PointFrame::from_vectors(
                    p.x,
                    Gauge::Adapted,
                    p.position,
                    p.coordinate_tangents,
                    [
                        [val(&self.second[0][0]), val(&self.second[0][1])],
                        [val(&self.second[1][0]), val(&self.second[1][1])],
                    ],
                    adapted.e,
                )
            }
        }
    }

    /// `e_k(u)` for a jet field `u`.
    fn along(&self, k: usize, u: &Jet3) -> f64 {
        self.point.frame_derivative(k, u.grad())
    }

    /// `∂_{e_k}` of the ambient frame vector `e_m`.
    fn frame_vector_derivative(&self, k: usize, m: usize) -> Vec4 {
        self.frame[m].map(|c| self.along(k, &c))
    }

    /// `⟨e_α, ∇̄_{e_k} e_β⟩`, indexed `[k][α][β]`.
    pub fn normal_connection(&self) -> [[[f64; 2]; 2]; 2] {
        std::array::from_fn(|k| {
            std::array::from_fn(|alpha| {
                std::array::from_fn(|beta| {
                    let d = self.frame_vector_derivative(k, 2 + beta);
                    dot4(&self.point.frame[2 + alpha], &d)
                })
            })
        })
    }

    /// `C^l_ki` with `∇_{e_k} e_i = C^l_ki e_l`, indexed `[k][i][l]`.
    pub fn tangent_connection(&self) -> [[[f64; 2]; 2]; 2] {
        std::array::from_fn(|k| {
            std::array::from_fn(|i| {
                let d = self.frame_vector_derivative(k, i);
                std::array::from_fn(|l| dot4(&self.point.frame[l], &d))
            })
        })
    }

    /// `h^α_{ij,k}`, indexed `[α][i][j][k]`.
    pub fn sff_covariant_derivative(&self) -> [[[[f64; 2]; 2]; 2]; 2] {
        let normal = self.normal_connection();
        let tangent = self.tangent_connection();
        let h = &self.point.sff;
        let mut out = [[[[0.0; 2]; 2]; 2]; 2];
        for (alpha, oa) in out.iter_mut().enumerate() {
            for (i, oi) in oa.iter_mut().enumerate() {
                for (j, oj) in oi.iter_mut().enumerate() {
                    for (k, slot) in oj.iter_mut().enumerate() {
                        let mut v = self.along(k, &self.sff[alpha][i][j]);
                        for beta in 0..2 {
                            v += h[beta][i][j] * normal[k][alpha][beta];
                        }
                        for l in 0..2 {
                            v -= tangent[k][i][l] * h[alpha][l][j];
                            v -= tangent[k][j][l] * h[alpha][l][i];
                        }
                        *slot = v;
                    }
                }
            }
        }
        out
    }

    /// `h^α_{,i} = ⟨(∂_{e_i} H⃗)^⊥, e_α⟩`, indexed `[α][i]`, obtained by
    /// differentiating the ambient mean curvature vector field.
    pub fn mean_curvature_normal_derivative(&self) -> [[f64; 2]; 2] {
        let mean: [Jet3; 2] = std::array::from_fn(|a| self.sff[a][0][0] + self.sff[a][1][1]);
        let field: JVec = std::array::from_fn(|c| mean[0] * self.frame[2][c] + mean[1] * self.frame[3][c]);
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            let d = field.map(|c| self.along(i, &c));
            for (alpha, row) in out.iter_mut().enumerate() {
                row[i] = dot4(&self.point.frame[2 + alpha], &d);
            }
        }
        out
    }

    /// Δu for a scalar field evaluated on this point's surface jet.
    pub fn laplacian(&self, u: &Jet3) -> f64 {
        self.point.laplacian(u)
    }

    /// Coordinate tangent jets `∂_a F`.
    pub fn tangent_jets(&self) -> &[JVec; 2] {
        &self.tangents
    }

    /// Orthonormal frame components of the surface gradient of `u`.
    pub fn gradient(&self, u: &Jet3) -> [f64; 2] {
        [self.along(0, u), self.along(1, u)]
    }
}

/// Builds the point frame in the requested gauge.
pub fn evaluate_frame(imm: &Immersion, x: [f64; 2], gauge: Gauge) -> Result<PointFrame> {
    if gauge == Gauge::Adapted && !imm.is_graph() {
        return Err(Error::NotGraph(imm.kind_name()));
    }
    LocalGeometry::at(imm, x)?.frame_in(imm, gauge)
}

/// `H⃗ + ½F⃗^⊥` as an ambient vector.
pub fn shrinker_residual(imm: &Immersion, x: [f64; 2]) -> Result<Vec4> {
    Ok(evaluate_frame(imm, x, Gauge::GramSchmidt)?.shrinker_residual())
}

/// Laplace–Beltrami operator of the scalar field `field` at `x`. The field
/// must return a jet valid through order two.
pub fn laplace_beltrami<F>(imm: &Immersion, field: F, x: [f64; 2]) -> Result<f64>
where
    F: Fn(&SurfaceJet) -> Result<Jet3>,
{
    let geo = LocalGeometry::at(imm, x)?;
    let u = field(geo.surface())?;
    if u.order() < 2 {
        return Err(Error::Precondition(format!(
            "field jet valid only through order {}, Laplacian needs 2",
            u.order()
        )));
    }
    Ok(geo.laplacian(&u))
}

pub fn mean_curvature_normal_derivative(imm: &Immersion, x: [f64; 2]) -> Result<[[f64; 2]; 2]> {
    Ok(LocalGeometry::at(imm, x)?.mean_curvature_normal_derivative())
}

pub fn sff_covariant_derivative(imm: &Immersion, x: [f64; 2]) -> Result<[[[[f64; 2]; 2]; 2]; 2]> {
    Ok(LocalGeometry::at(imm, x)?.sff_covariant_derivative())
}
