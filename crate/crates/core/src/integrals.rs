//! Surface quadrature over a parameter rectangle.
//!
//! Integrals are sums over cells of a tensor-product rule, each node weighted
//! by `√det g`. Cell contributions are computed in parallel and combined by a
//! fixed pairwise tree, so results do not depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Immersion, LocalGeometry, SurfaceJet};
use crate::jets::Jet3;

pub const MIN_CELLS: usize = 8;

/// Boundary cells of the ball indicator are split this many times.
pub const BALL_SUBDIVISION_LEVELS: usize = 2;

/// Area fraction of unresolved indicator cells above which the grid is
/// reported as too coarse.
pub const COARSE_BOUNDARY_FRACTION: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    Midpoint,
    GaussLegendre4,
}

const MIDPOINT_1D: [(f64, f64); 1] = [(0.5, 1.0)];

/// Four-point Gauss–Legendre nodes and weights on `[0, 1]`.
const GAUSS4_1D: [(f64, f64); 4] = [
    (0.069_431_844_202_973_71, 0.173_927_422_568_726_93),
    (0.330_009_478_207_571_9, 0.326_072_577_431_273_07),
    (0.669_990_521_792_428_1, 0.326_072_577_431_273_07),
    (0.930_568_155_797_026_3, 0.173_927_422_568_726_93),
];

impl QuadratureRule {
    fn nodes_1d(self) -> &'static [(f64, f64)] {
        match self {
            QuadratureRule::Midpoint => &MIDPOINT_1D,
            QuadratureRule::GaussLegendre4 => &GAUSS4_1D,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Rect {
    lo: [f64; 2],
    hi: [f64; 2],
}

impl Rect {
    fn quarters(&self) -> [Rect; 4] {
        let mid = [0.5 * (self.lo[0] + self.hi[0]), 0.5 * (self.lo[1] + self.hi[1])];
        [
            Rect { lo: self.lo, hi: mid },
            Rect { lo: [mid[0], self.lo[1]], hi: [self.hi[0], mid[1]] },
            Rect { lo: [self.lo[0], mid[1]], hi: [mid[0], self.hi[1]] },
            Rect { lo: mid, hi: self.hi },
        ]
    }

    fn probes(&self) -> [[f64; 2]; 5] {
        [
            self.lo,
            [self.hi[0], self.lo[1]],
            [self.lo[0], self.hi[1]],
            self.hi,
            [0.5 * (self.lo[0] + self.hi[0]), 0.5 * (self.lo[1] + self.hi[1])],
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub u: [f64; 2],
    pub v: [f64; 2],
    pub cells: [usize; 2],
    pub rule: QuadratureRule,
}

impl QuadratureGrid {
    pub fn new(u: [f64; 2], v: [f64; 2], cells: [usize; 2], rule: QuadratureRule) -> Result<Self> {
        if cells[0] < MIN_CELLS || cells[1] < MIN_CELLS {
            return Err(Error::InvalidArgument(format!(
                "quadrature needs at least {MIN_CELLS} cells per side, got {cells:?}"
            )));
        }
        if !(u[1] > u[0] && v[1] > v[0]) {
            return Err(Error::InvalidArgument(format!("empty parameter rectangle {u:?} × {v:?}")));
        }
        Ok(QuadratureGrid { u, v, cells, rule })
    }

    /// The square `[-radius, radius]²` with `n × n` cells.
    pub fn square(radius: f64, n: usize, rule: QuadratureRule) -> Result<Self> {
        Self::new([-radius, radius], [-radius, radius], [n, n], rule)
    }

    pub fn area(&self) -> f64 {
        (self.u[1] - self.u[0]) * (self.v[1] - self.v[0])
    }

    fn cell(&self, i: usize, j: usize) -> Rect {
        let du = (self.u[1] - self.u[0]) / self.cells[0] as f64;
        let dv = (self.v[1] - self.v[0]) / self.cells[1] as f64;
        Rect {
            lo: [self.u[0] + i as f64 * du, self.v[0] + j as f64 * dv],
            hi: [self.u[0] + (i + 1) as f64 * du, self.v[0] + (j + 1) as f64 * dv],
        }
    }

    fn cell_rects(&self) -> Vec<Rect> {
        (0..self.cells[0])
            .flat_map(|i| (0..self.cells[1]).map(move |j| (i, j)))
            .map(|(i, j)| self.cell(i, j))
            .collect()
    }

    /// All quadrature nodes with their parameter-space weights.
    pub fn nodes(&self) -> Vec<([f64; 2], f64)> {
        self.cell_rects().iter().flat_map(|r| rect_nodes(self.rule, r)).collect()
    }
}

fn rect_nodes(rule: QuadratureRule, r: &Rect) -> Vec<([f64; 2], f64)> {
    let nodes = rule.nodes_1d();
    let (du, dv) = (r.hi[0] - r.lo[0], r.hi[1] - r.lo[1]);
    let mut out = Vec::with_capacity(nodes.len() * nodes.len());
    for &(s, ws) in nodes {
        for &(t, wt) in nodes {
            out.push(([r.lo[0] + s * du, r.lo[1] + t * dv], ws * wt * du * dv));
        }
    }
    out
}

/// Sum by a balanced binary tree over the slice order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

fn sum_cells<T, F>(items: &[T], f: F) -> Result<f64>
where
    T: Sync,
    F: Fn(&T) -> Result<f64> + Sync + Send,
{
    let parts: Result<Vec<f64>> = items.par_iter().map(f).collect();
    Ok(pairwise_sum(&parts?))
}

/// `∫ f dvol` over the grid rectangle.
pub fn integrate<F>(imm: &Immersion, grid: &QuadratureGrid, f: F) -> Result<f64>
where
    F: Fn(&LocalGeometry) -> Result<f64> + Sync,
{
    sum_cells(&grid.cell_rects(), |r| {
        let mut acc = 0.0;
        for (x, w) in rect_nodes(grid.rule, r) {
            let geo = LocalGeometry::at(imm, x)?;
            acc += w * geo.frame().sqrt_det_g * f(&geo)?;
        }
        Ok(acc)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BallIntegral {
    pub value: f64,
    /// Surface area of the finest cells still cut by the sphere, relative to
    /// the area inside the ball.
    pub boundary_fraction: f64,
}

impl BallIntegral {
    pub fn too_coarse(&self) -> bool {
        self.boundary_fraction > COARSE_BOUNDARY_FRACTION
    }
}

fn position_norm(imm: &Immersion, x: [f64; 2]) -> Result<f64> {
    let p = imm.position_jets(x)?;
    Ok(p.iter().map(|c| c.value() * c.value()).sum::<f64>().sqrt())
}

/// `[∫_cut χ f dvol, ∫_cut dvol, ∫_cut χ dvol]` over one cell, splitting
/// cells whose probes straddle the sphere.
fn ball_cell<F>(imm: &Immersion, rule: QuadratureRule, rect: &Rect, r: f64, level: usize, f: &F) -> Result<[f64; 3]>
where
    F: Fn(&LocalGeometry) -> Result<f64>,
{
    let mut inside = 0;
    for p in rect.probes() {
        if position_norm(imm, p)? <= r {
            inside += 1;
        }
    }
    if inside == 0 {
        return Ok([0.0; 3]);
    }
    let straddles = inside < 5;
    if straddles && level < BALL_SUBDIVISION_LEVELS {
        let mut acc = [0.0; 3];
        for q in rect.quarters() {
            let s = ball_cell(imm, rule, &q, r, level + 1, f)?;
            for k in 0..3 {
                acc[k] += s[k];
            }
        }
        return Ok(acc);
    }
    let mut value = 0.0;
    let mut cut_area = 0.0;
    let mut inside_area = 0.0;
    for (x, w) in rect_nodes(rule, rect) {
        let geo = LocalGeometry::at(imm, x)?;
        let dv = w * geo.frame().sqrt_det_g;
        if straddles {
            cut_area += dv;
        }
        if norm4_of(&geo) <= r {
            value += dv * f(&geo)?;
            inside_area += dv;
        }
    }
    Ok([value, cut_area, inside_area])
}

fn norm4_of(geo: &LocalGeometry) -> f64 {
    crate::geometry::norm4(&geo.frame().position)
}

/// `∫_{|F| ≤ r} f dvol`, with the indicator resolved by cell subdivision.
pub fn integrate_in_ball<F>(imm: &Immersion, grid: &QuadratureGrid, r: f64, f: F) -> Result<BallIntegral>
where
    F: Fn(&LocalGeometry) -> Result<f64> + Sync,
{
    let cells = grid.cell_rects();
    let parts: Result<Vec<[f64; 3]>> = cells
        .par_iter()
        .map(|c| ball_cell(imm, grid.rule, c, r, 0, &f))
        .collect();
    let parts = parts?;
    let column = |k: usize| pairwise_sum(&parts.iter().map(|p| p[k]).collect::<Vec<_>>());
    let (value, cut, area) = (column(0), column(1), column(2));
    Ok(BallIntegral {
        value,
        boundary_fraction: if area > 0.0 { cut / area } else { 0.0 },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AreaInBall {
    pub r: f64,
    pub area: f64,
    /// `area / r²`.
    pub ratio: f64,
    pub boundary_fraction: f64,
    pub too_coarse: bool,
}

/// Area of the part of the surface inside the ambient ball of radius `r`.
pub fn surface_area_in_ball(imm: &Immersion, grid: &QuadratureGrid, r: f64) -> Result<AreaInBall> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("ball radius must be positive, got {r}")));
    }
    let b = integrate_in_ball(imm, grid, r, |_| Ok(1.0))?;
    Ok(AreaInBall {
        r,
        area: b.value,
        ratio: b.value / (r * r),
        boundary_fraction: b.boundary_fraction,
        too_coarse: b.too_coarse(),
    })
}

/// `e^{-|F|²/4}`.
fn gaussian_weight(geo: &LocalGeometry) -> f64 {
    let p = &geo.frame().position;
    (-0.25 * crate::geometry::dot4(p, p)).exp()
}

/// `∫ f e^{-|F|²/4} dvol`.
pub fn gaussian_weighted_integral<F>(imm: &Immersion, grid: &QuadratureGrid, f: F) -> Result<f64>
where
    F: Fn(&LocalGeometry) -> Result<f64> + Sync,
{
    integrate(imm, grid, |geo| Ok(f(geo)? * gaussian_weight(geo)))
}

/// Radial cutoff `φ(ρ) = 1 − S(ρ − r)` on `[r, r + 1]`, with `S` the quintic
/// smoothstep; `φ ≡ 1` inside `B_r` and `φ ≡ 0` outside `B_{r+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    pub r: f64,
}

impl CutoffProfile {
    /// `max |φ'| = 15/8`, attained at `ρ = r + ½`.
    pub const MAX_SLOPE: f64 = 1.875;

    pub fn new(r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::InvalidArgument(format!("cutoff radius must be positive, got {r}")));
        }
        Ok(CutoffProfile { r })
    }

    /// `[φ, φ', φ'', φ''']` at radius `rho`.
    pub fn profile(&self, rho: f64) -> [f64; 4] {
        let t = rho - self.r;
        if t <= 0.0 {
            return [1.0, 0.0, 0.0, 0.0];
        }
        if t >= 1.0 {
            return [0.0; 4];
        }
        let t2 = t * t;
        [
            1.0 - t2 * t * (10.0 - 15.0 * t + 6.0 * t2),
            -30.0 * t2 * (1.0 - t) * (1.0 - t),
            -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t),
            -60.0 * (1.0 - 6.0 * t + 6.0 * t2),
        ]
    }

    /// `φ(|F|)` as a jet on the surface.
    pub fn field(&self, surface: &SurfaceJet) -> Result<Jet3> {
        let rho_sq = surface.position_norm_sq();
        let rho = rho_sq.value().sqrt();
        if rho <= self.r || rho >= self.r + 1.0 {
            return Ok(Jet3::constant(self.profile(rho)[0]));
        }
        Ok(rho_sq.sqrt()?.compose(self.profile(rho)))
    }
}

fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// The two integrals of the integration-by-parts step and their sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IbpResidual {
    /// `∫ φ² div(e^{-|F|²/4} ∇u)`.
    pub divergence_term: f64,
    /// `∫ 2φ⟨∇φ, ∇u⟩ e^{-|F|²/4}`.
    pub gradient_term: f64,
    pub residual: f64,
}

/// Quadrature residual of `∫ φ² div(w∇u) = −∫ 2φ⟨∇φ, ∇u⟩w`, `w = e^{-|F|²/4}`.
/// The grid must cover the support of the cutoff.
pub fn ibp_residual<U>(imm: &Immersion, grid: &QuadratureGrid, u: U, cutoff: &CutoffProfile) -> Result<IbpResidual>
where
    U: Fn(&SurfaceJet) -> Result<Jet3> + Sync,
{
    let terms = |geo: &LocalGeometry| -> Result<[f64; 2]> {
        let phi = cutoff.field(geo.surface())?;
        if phi.value() == 0.0 && phi.grad() == [0.0, 0.0] {
            return Ok([0.0; 2]);
        }
        let uj = u(geo.surface())?;
        if uj.order() < 2 {
            return Err(Error::Precondition("field must be valid through order two".into()));
        }
        let w = (geo.surface().position_norm_sq() * -0.25).exp();
        let grad_u = geo.gradient(&uj);
        let grad_w = geo.gradient(&w);
        let grad_phi = geo.gradient(&phi);
        let div = w.value() * geo.laplacian(&uj) + dot2(grad_w, grad_u);
        let p = phi.value();
        Ok([p * p * div, 2.0 * p * dot2(grad_phi, grad_u) * w.value()])
    };
    let divergence_term = integrate(imm, grid, |g| Ok(terms(g)?[0]))?;
    let gradient_term = integrate(imm, grid, |g| Ok(terms(g)?[1]))?;
    Ok(IbpResidual {
        divergence_term,
        gradient_term,
        residual: (divergence_term + gradient_term).abs(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointwiseCheck {
    pub samples: usize,
    pub violations: usize,
    /// Largest value of `Δg − ½⟨F, ∇g⟩ + Kg` seen.
    pub max_value: f64,
    pub worst_point: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainReport {
    pub r: f64,
    /// `∫_{B_r} e^{-|F|²/4}(K + |∇u|²/2)`, `u = log g`.
    pub ball_term: f64,
    /// `∫ φ² e^{-|F|²/4}(K + |∇u|²/2)`.
    pub cutoff_term: f64,
    /// `∫ 2|∇φ|² e^{-|F|²/4}`.
    pub gradient_term: f64,
    /// `8 ∫_{B_{r+1} \ B_r} e^{-|F|²/4}`.
    pub annulus_term: f64,
    /// `8 Ĉ (r+1)² e^{-r²/4}`.
    pub analytic_bound: f64,
    /// `max area/ρ²` over the sampled radii.
    pub growth_constant: f64,
    pub sampled_radii: Vec<f64>,
    /// `∫ φ² div(e^{-|F|²/4}∇u) + ∫ φ² e^{-|F|²/4}(K + |∇u|²)`, which the
    /// differential inequality makes nonpositive.
    pub integrated_inequality: f64,
    /// Each `≤` of the chain in order, ending with the integrated inequality.
    pub holds: [bool; 5],
    pub pointwise: PointwiseCheck,
    pub note: &'static str,
}

/// Slack for comparing chain quantities.
const CHAIN_SLACK: f64 = 1e-12;

const CHAIN_NOTE: &str = "finite quadrature of one cutoff radius; the vanishing of K and constancy of g \
are global statements that this report does not establish";

/// Evaluates every quantity in the cutoff estimate for `g > 0`, `K ≥ 0` on a
/// surface, together with a pointwise test of `Δg − ½⟨F, ∇g⟩ + Kg ≤ 0`.
pub fn lemma_3_10_chain<G, K>(imm: &Immersion, grid: &QuadratureGrid, g: G, k: K, r: f64) -> Result<ChainReport>
where
    G: Fn(&SurfaceJet) -> Result<Jet3> + Sync,
    K: Fn(&LocalGeometry) -> Result<f64> + Sync,
{
    let cutoff = CutoffProfile::new(r)?;
    // every node is screened first so precondition failures name a point
    let nodes = grid.nodes();
    let checks: Result<Vec<f64>> = nodes
        .par_iter()
        .map(|(x, _)| {
            let geo = LocalGeometry::at(imm, *x)?;
            let gj = g(geo.surface())?;
            let kv = k(&geo)?;
            if !(gj.value() > 0.0) {
                return Err(Error::Precondition(format!("g = {} is not positive at {x:?}", gj.value())));
            }
            if !(kv >= 0.0) {
                return Err(Error::Precondition(format!("K = {kv} is negative at {x:?}")));
            }
            if gj.order() < 2 {
                return Err(Error::Precondition("g must be valid through order two".into()));
            }
            let grad = geo.gradient(&gj);
            let drift = 0.5 * dot2(geo.frame().position_tangential, grad);
            Ok(geo.laplacian(&gj) - drift + kv * gj.value())
        })
        .collect();
    let checks = checks?;
    let tol = 1e-10;
    let mut pointwise = PointwiseCheck {
        samples: checks.len(),
        violations: 0,
        max_value: f64::NEG_INFINITY,
        worst_point: [0.0; 2],
    };
    for (v, (x, _)) in checks.iter().zip(&nodes) {
        if *v > tol * (1.0 + v.abs()) {
            pointwise.violations += 1;
        }
        if *v > pointwise.max_value {
            pointwise.max_value = *v;
            pointwise.worst_point = *x;
        }
    }

    let energy = |geo: &LocalGeometry| -> Result<(f64, f64, f64)> {
        let gj = g(geo.surface())?;
        let u = gj.ln()?;
        let gu = geo.gradient(&u);
        let grad_sq = dot2(gu, gu);
        Ok((k(geo)?, grad_sq, gaussian_weight(geo)))
    };
    let ball_term = integrate_in_ball(imm, grid, r, |geo| {
        let (kv, gs, w) = energy(geo)?;
        Ok(w * (kv + 0.5 * gs))
    })?
    .value;
    let cutoff_term = integrate(imm, grid, |geo| {
        let phi = cutoff.field(geo.surface())?.value();
        if phi == 0.0 {
            return Ok(0.0);
        }
        let (kv, gs, w) = energy(geo)?;
        Ok(phi * phi * w * (kv + 0.5 * gs))
    })?;
    let gradient_term = integrate(imm, grid, |geo| {
        let gp = geo.gradient(&cutoff.field(geo.surface())?);
        Ok(2.0 * dot2(gp, gp) * gaussian_weight(geo))
    })?;
    let outer = integrate_in_ball(imm, grid, r + 1.0, |geo| Ok(gaussian_weight(geo)))?.value;
    let inner = integrate_in_ball(imm, grid, r, |geo| Ok(gaussian_weight(geo)))?.value;
    let annulus_term = 8.0 * (outer - inner);

    let mut sampled_radii: Vec<f64> = (1..).map(f64::from).take_while(|&s| s < r + 1.0).collect();
    sampled_radii.push(r + 1.0);
    let mut growth_constant: f64 = 0.0;
    for &s in &sampled_radii {
        growth_constant = growth_constant.max(surface_area_in_ball(imm, grid, s)?.ratio);
    }
    let analytic_bound = 8.0 * growth_constant * (r + 1.0).powi(2) * (-0.25 * r * r).exp();

    let integrated_inequality = integrate(imm, grid, |geo| {
        let phi = cutoff.field(geo.surface())?.value();
        if phi == 0.0 {
            return Ok(0.0);
        }
        let gj = g(geo.surface())?;
        let u = gj.ln()?;
        let w = (geo.surface().position_norm_sq() * -0.25).exp();
        let gu = geo.gradient(&u);
        let div = w.value() * geo.laplacian(&u) + dot2(geo.gradient(&w), gu);
        Ok(phi * phi * (div + w.value() * (k(geo)? + dot2(gu, gu))))
    })?;

    let le = |a: f64, b: f64| a <= b + CHAIN_SLACK * (1.0 + a.abs().max(b.abs()));
    let holds = [
        le(ball_term, cutoff_term),
        le(cutoff_term, gradient_term),
        le(gradient_term, annulus_term),
        le(annulus_term, analytic_bound),
        le(integrated_inequality, 0.0),
    ];
    Ok(ChainReport {
        r,
        ball_term,
        cutoff_term,
        gradient_term,
        annulus_term,
        analytic_bound,
        growth_constant,
        sampled_radii,
        integrated_inequality,
        holds,
        pointwise,
        note: CHAIN_NOTE,
    })
}
