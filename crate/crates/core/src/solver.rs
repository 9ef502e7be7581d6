//! Levenberg–Marquardt solver for the discrete graphical self-shrinker
//! equation on a square grid with affine Dirichlet data.
//!
//! Unknowns are the values of `f = (f1, f2)` at interior nodes. The residual
//! at an interior node is the pair of normal components of `H⃗ + ½F⃗^⊥`, with
//! the geometry built from second-order central differences on the 3×3
//! stencil around the node.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dot4, gram_schmidt_frame, Gauge, GridInterpolant, Immersion, PointFrame, Vec4};

/// Discrete Gram determinants at or below this value are rejected.
pub const NODE_DEGENERACY_THRESHOLD: f64 = 1e-10;

/// Sine modes per axis in a random perturbation.
pub const PERTURBATION_MODES: usize = 3;

pub const MIN_GRID_CELLS: usize = 8;

/// Unknowns sharing a color are at least this many nodes apart along some
/// axis, so no residual stencil sees two of them.
const COLOR_STRIDE: usize = 3;

/// `x ↦ linear·x + offset` on the parameter plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    /// Row `j` is the gradient of `f_j`.
    pub linear: [[f64; 2]; 2],
    pub offset: [f64; 2],
}

impl AffineMap {
    pub const ZERO: AffineMap = AffineMap { linear: [[0.0; 2]; 2], offset: [0.0; 2] };

    pub fn linear(linear: [[f64; 2]; 2]) -> Self {
        AffineMap { linear, offset: [0.0; 2] }
    }

    /// From `[a, b, c, d]` meaning `[[a, b], [c, d]]`.
    pub fn from_entries(e: [f64; 4]) -> Self {
        Self::linear([[e[0], e[1]], [e[2], e[3]]])
    }

    pub fn apply(&self, x: [f64; 2]) -> [f64; 2] {
        std::array::from_fn(|j| self.linear[j][0] * x[0] + self.linear[j][1] * x[1] + self.offset[j])
    }

    pub fn jacobian(&self) -> f64 {
        self.linear[0][0] * self.linear[1][1] - self.linear[0][1] * self.linear[1][0]
    }
}

/// Node values of `f` on the `(n+1)×(n+1)` grid over `[-radius, radius]²`.
/// Node `(i, j)` sits at `(-radius + i·h, -radius + j·h)`; storage is
/// row-major with `i` slowest. Boundary nodes always hold the affine data.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscreteGraph {
    n: usize,
    radius: f64,
    boundary: AffineMap,
    values: Vec<[f64; 2]>,
}

impl DiscreteGraph {
    /// Samples `f` at every node, then overwrites the boundary with the
    /// affine data.
    pub fn from_fn<F>(n: usize, radius: f64, boundary: AffineMap, f: F) -> Result<Self>
    where
        F: Fn([f64; 2]) -> [f64; 2],
    {
        if n < MIN_GRID_CELLS {
            return Err(Error::InvalidArgument(format!("grid needs N ≥ {MIN_GRID_CELLS}, got {n}")));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!("grid radius must be positive, got {radius}")));
        }
        let h = 2.0 * radius / n as f64;
        let values = (0..=n)
            .flat_map(|i| (0..=n).map(move |j| (i, j)))
            .map(|(i, j)| f([-radius + i as f64 * h, -radius + j as f64 * h]))
            .collect();
        let mut dg = DiscreteGraph { n, radius, boundary, values };
        dg.enforce_boundary();
        Ok(dg)
    }

    /// The affine data sampled everywhere.
    pub fn affine(n: usize, radius: f64, boundary: AffineMap) -> Result<Self> {
        Self::from_fn(n, radius, boundary, |x| boundary.apply(x))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn boundary(&self) -> &AffineMap {
        &self.boundary
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.radius / self.n as f64
    }

    pub fn position(&self, i: usize, j: usize) -> [f64; 2] {
        let h = self.spacing();
        [-self.radius + i as f64 * h, -self.radius + j as f64 * h]
    }

    pub fn value(&self, i: usize, j: usize) -> [f64; 2] {
        self.values[i * (self.n + 1) + j]
    }

    pub fn values(&self) -> &[[f64; 2]] {
        &self.values
    }

    fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.n || j == self.n
    }

    pub fn enforce_boundary(&mut self) {
        for i in 0..=self.n {
            for j in 0..=self.n {
                if self.is_boundary(i, j) {
                    let x = self.position(i, j);
                    self.values[i * (self.n + 1) + j] = self.boundary.apply(x);
                }
            }
        }
    }

    fn interior_count(&self) -> usize {
        (self.n - 1) * (self.n - 1)
    }

    /// Interior node `(i, j)` for interior index `p`.
    fn interior_node(&self, p: usize) -> (usize, usize) {
        (1 + p / (self.n - 1), 1 + p % (self.n - 1))
    }

    fn unknowns(&self) -> Vec<f64> {
        (0..self.interior_count())
            .flat_map(|p| {
                let (i, j) = self.interior_node(p);
                self.value(i, j)
            })
            .collect()
    }

    fn set_unknowns(&mut self, u: &[f64]) {
        for p in 0..self.interior_count() {
            let (i, j) = self.interior_node(p);
            self.values[i * (self.n + 1) + j] = [u[2 * p], u[2 * p + 1]];
        }
    }

    /// Central-difference geometry at an interior node.
    pub fn node_frame(&self, i: usize, j: usize) -> Result<PointFrame> {
        if self.is_boundary(i, j) {
            return Err(Error::InvalidArgument(format!("node ({i}, {j}) is on the boundary")));
        }
        let h = self.spacing();
        let v = |di: isize, dj: isize| self.value((i as isize + di) as usize, (j as isize + dj) as usize);
        let c = v(0, 0);
        let d1: [f64; 2] = std::array::from_fn(|k| (v(1, 0)[k] - v(-1, 0)[k]) / (2.0 * h));
        let d2: [f64; 2] = std::array::from_fn(|k| (v(0, 1)[k] - v(0, -1)[k]) / (2.0 * h));
        let d11: [f64; 2] = std::array::from_fn(|k| (v(1, 0)[k] - 2.0 * c[k] + v(-1, 0)[k]) / (h * h));
        let d22: [f64; 2] = std::array::from_fn(|k| (v(0, 1)[k] - 2.0 * c[k] + v(0, -1)[k]) / (h * h));
        let d12: [f64; 2] =
            std::array::from_fn(|k| (v(1, 1)[k] - v(1, -1)[k] - v(-1, 1)[k] + v(-1, -1)[k]) / (4.0 * h * h));
        let x = self.position(i, j);
        let tangents: [Vec4; 2] = [[1.0, 0.0, d1[0], d1[1]], [0.0, 1.0, d2[0], d2[1]]];
        let gram = dot4(&tangents[0], &tangents[0]) * dot4(&tangents[1], &tangents[1])
            - dot4(&tangents[0], &tangents[1]).powi(2);
        if !(gram > NODE_DEGENERACY_THRESHOLD) {
            return Err(Error::DegenerateNode { node: (i, j), gram_det: gram });
        }
        let second = [
            [[0.0, 0.0, d11[0], d11[1]], [0.0, 0.0, d12[0], d12[1]]],
            [[0.0, 0.0, d12[0], d12[1]], [0.0, 0.0, d22[0], d22[1]]],
        ];
        let frame = gram_schmidt_frame(&tangents);
        PointFrame::from_vectors(x, Gauge::GramSchmidt, [x[0], x[1], c[0], c[1]], tangents, second, frame)
    }

    /// Discrete Jacobian determinant of `f` at an interior node.
    pub fn node_jacobian(&self, i: usize, j: usize) -> f64 {
        let h = self.spacing();
        let a: [f64; 2] = std::array::from_fn(|k| (self.value(i + 1, j)[k] - self.value(i - 1, j)[k]) / (2.0 * h));
        let b: [f64; 2] = std::array::from_fn(|k| (self.value(i, j + 1)[k] - self.value(i, j - 1)[k]) / (2.0 * h));
        a[0] * b[1] - b[0] * a[1]
    }

    pub fn to_interpolant(&self) -> Result<GridInterpolant> {
        GridInterpolant::new(self.n, self.radius, self.values.clone())
    }

    pub fn to_immersion(&self) -> Result<Immersion> {
        Ok(Immersion::Discrete(self.to_interpolant()?))
    }

    /// Least-squares affine fit over all nodes and the sup-norm of its misfit.
    pub fn best_affine_fit(&self) -> (AffineMap, f64) {
        // normal equations for basis (1, x1, x2)
        let mut m = [[0.0; 3]; 3];
        let mut rhs = [[0.0; 3]; 2];
        for i in 0..=self.n {
            for j in 0..=self.n {
                let x = self.position(i, j);
                let b = [1.0, x[0], x[1]];
                let v = self.value(i, j);
                for r in 0..3 {
                    for c in 0..3 {
                        m[r][c] += b[r] * b[c];
                    }
                    for k in 0..2 {
                        rhs[k][r] += b[r] * v[k];
                    }
                }
            }
        }
        let coef = rhs.map(|r| solve3(m, r));
        let fit = AffineMap {
            linear: [[coef[0][1], coef[0][2]], [coef[1][1], coef[1][2]]],
            offset: [coef[0][0], coef[1][0]],
        };
        (fit, self.distance_to(&fit))
    }

    /// `max_nodes |f − a|`.
    pub fn distance_to(&self, a: &AffineMap) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..=self.n {
            for j in 0..=self.n {
                let fa = a.apply(self.position(i, j));
                let v = self.value(i, j);
                worst = worst.max((v[0] - fa[0]).hypot(v[1] - fa[1]));
            }
        }
        worst
    }

    /// Adds a random smooth perturbation vanishing on the boundary: per
    /// component, a combination of the lowest `PERTURBATION_MODES²` sine
    /// modes of the square with `U(-1, 1)` coefficients, rescaled so its
    /// largest nodal value is `amplitude`. Smoothness keeps the perturbation
    /// mesh independent.
    pub fn perturb(&mut self, amplitude: f64, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeff: [[[f64; PERTURBATION_MODES]; PERTURBATION_MODES]; 2] =
            std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0))));
        let width = 2.0 * self.radius;
        let field = |x: [f64; 2], c: usize| {
            let mut acc = 0.0;
            for (k, row) in coeff[c].iter().enumerate() {
                let sk = ((k + 1) as f64 * std::f64::consts::PI * (x[0] + self.radius) / width).sin();
                for (l, a) in row.iter().enumerate() {
                    acc += a * sk * ((l + 1) as f64 * std::f64::consts::PI * (x[1] + self.radius) / width).sin();
                }
            }
            acc
        };
        let mut delta = vec![[0.0; 2]; self.values.len()];
        let mut peak = 0.0f64;
        for p in 0..self.interior_count() {
            let (i, j) = self.interior_node(p);
            let k = i * (self.n + 1) + j;
            let x = self.position(i, j);
            delta[k] = [field(x, 0), field(x, 1)];
            peak = peak.max(delta[k][0].abs()).max(delta[k][1].abs());
        }
        if peak == 0.0 {
            return;
        }
        for (v, d) in self.values.iter_mut().zip(&delta) {
            v[0] += amplitude * d[0] / peak;
            v[1] += amplitude * d[1] / peak;
        }
    }
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &c| m[a][col].abs().total_cmp(&m[c][col].abs())).unwrap();
        m.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = m[r][col] / m[col][col];
            for c in col..3 {
                m[r][c] -= f * m[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|c| m[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / m[r][r];
    }
    x
}

/// Normal components `⟨H⃗ + ½F⃗, e_α⟩` at every interior node, concatenated
/// in interior order.
pub fn assemble_residual(dg: &DiscreteGraph) -> Result<Vec<f64>> {
    let parts: Result<Vec<[f64; 2]>> = (0..dg.interior_count())
        .into_par_iter()
        .map(|p| {
            let (i, j) = dg.interior_node(p);
            let f = dg.node_frame(i, j)?;
            Ok(std::array::from_fn(|a| f.mean_curvature[a] + 0.5 * f.position_normal[a]))
        })
        .collect();
    Ok(parts?.into_iter().flatten().collect())
}

fn max_node_norm(r: &[f64]) -> f64 {
    r.chunks(2).map(|c| c[0].hypot(c[1])).fold(0.0, f64::max)
}

fn norm2(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Convergence when every node's residual norm is at most this.
    pub tol: f64,
    pub max_iter: usize,
    pub damping_init: f64,
    pub damping_increase: f64,
    pub damping_decrease: f64,
    /// Giving up once the damping exceeds this.
    pub damping_max: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-10,
            max_iter: 100,
            damping_init: 1e-3,
            damping_increase: 10.0,
            damping_decrease: 3.0,
            damping_max: 1e12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverReport {
    pub iterations: usize,
    /// Euclidean residual norm at the start and after every accepted step.
    pub residual_history: Vec<f64>,
    /// Largest per-node norm of `H⃗ + ½F⃗^⊥` at the end.
    pub max_shrinker_residual: f64,
    pub best_fit: AffineMap,
    /// Sup-norm distance to the least-squares affine map.
    pub distance_to_affine: f64,
    /// Sup-norm distance to the boundary map extended inside.
    pub distance_to_boundary_map: f64,
    /// `[min, max]` of the discrete `J_f` over interior nodes and all
    /// accepted iterates.
    pub jacobian_range: [f64; 2],
    /// Largest `|h|` over interior nodes at the end.
    pub max_sff_norm: f64,
    pub converged: bool,
    pub diverged: bool,
    pub final_damping: f64,
}

fn jacobian_range(dg: &DiscreteGraph) -> [f64; 2] {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in 0..dg.interior_count() {
        let (i, j) = dg.interior_node(p);
        let v = dg.node_jacobian(i, j);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    [lo, hi]
}

fn max_sff_norm(dg: &DiscreteGraph) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in 0..dg.interior_count() {
        let (i, j) = dg.interior_node(p);
        worst = worst.max(dg.node_frame(i, j)?.sff_norm_sq().sqrt());
    }
    Ok(worst)
}

/// Symmetric positive definite band matrix, lower band stored by row:
/// `band[i][k] = A[i][i - k]`.
struct BandMatrix {
    n: usize,
    width: usize,
    band: Vec<f64>,
}

impl BandMatrix {
    fn zeros(n: usize, width: usize) -> Self {
        BandMatrix { n, width, band: vec![0.0; n * (width + 1)] }
    }

    fn at(&mut self, i: usize, k: usize) -> &mut f64 {
        &mut self.band[i * (self.width + 1) + k]
    }

    fn get(&self, i: usize, k: usize) -> f64 {
        self.band[i * (self.width + 1) + k]
    }

    /// In-place `A = L·Lᵀ`; returns false if a pivot is not positive.
    fn cholesky(&mut self) -> bool {
        for i in 0..self.n {
            let lo = i.saturating_sub(self.width);
            for j in lo..=i {
                let mut s = self.get(i, i - j);
                let start = lo.max(j.saturating_sub(self.width));
                for m in start..j {
                    s -= self.get(i, i - m) * self.get(j, j - m);
                }
                if i == j {
                    if !(s > 0.0) {
                        return false;
                    }
                    *self.at(i, 0) = s.sqrt();
                } else {
                    *self.at(i, i - j) = s / self.get(j, 0);
                }
            }
        }
        true
    }

    fn solve(&self, b: &mut [f64]) {
        for i in 0..self.n {
            let lo = i.saturating_sub(self.width);
            let s: f64 = (lo..i).map(|m| self.get(i, i - m) * b[m]).sum();
            b[i] = (b[i] - s) / self.get(i, 0);
        }
        for i in (0..self.n).rev() {
            let hi = (i + self.width).min(self.n - 1);
            let s: f64 = (i + 1..=hi).map(|m| self.get(m, m - i) * b[m]).sum();
            b[i] = (b[i] - s) / self.get(i, 0);
        }
    }
}

/// Sparse Jacobian rows: `(column, value)` pairs for every residual entry.
fn colored_jacobian(dg: &DiscreteGraph) -> Result<Vec<Vec<(usize, f64)>>> {
    let m = dg.interior_count();
    let side = dg.n - 1;
    let u0 = dg.unknowns();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); 2 * m];
    let mut work = dg.clone();
    for ci in 0..COLOR_STRIDE {
        for cj in 0..COLOR_STRIDE {
            for comp in 0..2 {
                let members: Vec<usize> = (0..m)
                    .filter(|&p| (p / side) % COLOR_STRIDE == ci && (p % side) % COLOR_STRIDE == cj)
                    .collect();
                if members.is_empty() {
                    continue;
                }
                let steps: Vec<f64> = members.iter().map(|&p| 1e-6 * (1.0 + u0[2 * p + comp].abs())).collect();
                let eval = |sign: f64, work: &mut DiscreteGraph| -> Result<Vec<f64>> {
                    let mut u = u0.clone();
                    for (&p, &s) in members.iter().zip(&steps) {
                        u[2 * p + comp] += sign * s;
                    }
                    work.set_unknowns(&u);
                    assemble_residual(work)
                };
                let plus = eval(1.0, &mut work)?;
                let minus = eval(-1.0, &mut work)?;
                for (&p, &s) in members.iter().zip(&steps) {
                    let (pi, pj) = (p / side, p % side);
                    let col = 2 * p + comp;
                    for di in -1isize..=1 {
                        for dj in -1isize..=1 {
                            let (qi, qj) = (pi as isize + di, pj as isize + dj);
                            if qi < 0 || qj < 0 || qi >= side as isize || qj >= side as isize {
                                continue;
                            }
                            let q = qi as usize * side + qj as usize;
                            for a in 0..2 {
                                let row = 2 * q + a;
                                let d = (plus[row] - minus[row]) / (2.0 * s);
                                if d != 0.0 {
                                    rows[row].push((col, d));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(rows)
}

/// Minimizes the residual from `start` by Levenberg–Marquardt with damping
/// `μ·diag(JᵀJ)`. Divergence ends the run with an unconverged report.
pub fn gauss_newton_solve(start: &DiscreteGraph, cfg: &SolverConfig) -> Result<(DiscreteGraph, SolverReport)> {
    let mut dg = start.clone();
    dg.enforce_boundary();
    let side = dg.n - 1;
    let unknown_count = 2 * dg.interior_count();
    // stencil rows couple nodes up to one grid row apart, so JᵀJ couples two
    let width = 2 * (2 * side + 2) + 1;
    let mut r = assemble_residual(&dg)?;
    let mut history = vec![norm2(&r)];
    let mut jac_range = jacobian_range(&dg);
    let mut mu = cfg.damping_init;
    let mut iterations = 0;
    let mut converged = max_node_norm(&r) <= cfg.tol;
    let mut diverged = false;
    while !converged && iterations < cfg.max_iter {
        let rows = colored_jacobian(&dg)?;
        let mut jtj = BandMatrix::zeros(unknown_count, width);
        let mut grad = vec![0.0; unknown_count];
        for (row, entries) in rows.iter().enumerate() {
            for &(a, va) in entries {
                grad[a] += va * r[row];
                for &(b, vb) in entries {
                    if b <= a {
                        *jtj.at(a, a - b) += va * vb;
                    }
                }
            }
        }
        let u0 = dg.unknowns();
        let cost = history[history.len() - 1];
        let accepted = loop {
            let mut damped = BandMatrix { n: jtj.n, width: jtj.width, band: jtj.band.clone() };
            for i in 0..unknown_count {
                let d = jtj.get(i, 0);
                *damped.at(i, 0) += mu * d.max(1e-12);
            }
            if damped.cholesky() {
                let mut step: Vec<f64> = grad.iter().map(|g| -g).collect();
                damped.solve(&mut step);
                let trial: Vec<f64> = u0.iter().zip(&step).map(|(u, s)| u + s).collect();
                let mut candidate = dg.clone();
                candidate.set_unknowns(&trial);
                if let Ok(rt) = assemble_residual(&candidate) {
                    let nt = norm2(&rt);
                    if nt < cost {
                        dg = candidate;
                        r = rt;
                        history.push(nt);
                        mu /= cfg.damping_decrease;
                        break true;
                    }
                }
            }
            mu *= cfg.damping_increase;
            if mu > cfg.damping_max {
                break false;
            }
        };
        if !accepted {
            diverged = true;
            break;
        }
        iterations += 1;
        let jr = jacobian_range(&dg);
        jac_range = [jac_range[0].min(jr[0]), jac_range[1].max(jr[1])];
        converged = max_node_norm(&r) <= cfg.tol;
    }
    let (best_fit, distance_to_affine) = dg.best_affine_fit();
    let report = SolverReport {
        iterations,
        residual_history: history,
        max_shrinker_residual: max_node_norm(&r),
        best_fit,
        distance_to_affine,
        distance_to_boundary_map: dg.distance_to(&dg.boundary),
        jacobian_range: jac_range,
        max_sff_norm: max_sff_norm(&dg)?,
        converged,
        diverged,
        final_damping: mu,
    };
    Ok((dg, report))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub n: usize,
    pub radius: f64,
    pub perturbation: f64,
    pub seeds: usize,
    pub seed: u64,
    pub solver: SolverConfig,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            n: 32,
            radius: 3.0,
            perturbation: 0.1,
            seeds: 5,
            seed: 1,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub boundary: AffineMap,
    pub jacobian: f64,
    /// `J_f + 1 > 0` on the boundary map.
    pub condition_plus: bool,
    /// `1 − J_f > 0` on the boundary map.
    pub condition_minus: bool,
    pub runs: Vec<SolverReport>,
    pub fraction_converged: f64,
    pub max_distance_to_affine: f64,
    pub jacobian_range: [f64; 2],
    pub max_sff_norm: f64,
    pub statement: &'static str,
}

/// Solves from `seeds` random interior perturbations of the affine data and
/// aggregates the outcomes.
pub fn bernstein_probe(boundary: AffineMap, cfg: &ProbeConfig) -> Result<ProbeReport> {
    let jacobian = boundary.jacobian();
    let mut runs = Vec::with_capacity(cfg.seeds);
    for s in 0..cfg.seeds {
        let mut dg = DiscreteGraph::affine(cfg.n, cfg.radius, boundary)?;
        dg.perturb(cfg.perturbation, cfg.seed.wrapping_add(s as u64));
        let (_, report) = gauss_newton_solve(&dg, &cfg.solver)?;
        runs.push(report);
    }
    let converged = runs.iter().filter(|r| r.converged).count();
    let fold = |f: fn(&SolverReport) -> f64| runs.iter().map(f).fold(0.0, f64::max);
    let jacobian_range = runs.iter().fold([f64::INFINITY, f64::NEG_INFINITY], |acc, r| {
        [acc[0].min(r.jacobian_range[0]), acc[1].max(r.jacobian_range[1])]
    });
    Ok(ProbeReport {
        boundary,
        jacobian,
        condition_plus: jacobian + 1.0 > 0.0,
        condition_minus: 1.0 - jacobian > 0.0,
        fraction_converged: if runs.is_empty() { 0.0 } else { converged as f64 / runs.len() as f64 },
        max_distance_to_affine: fold(|r| r.distance_to_affine),
        max_sff_norm: fold(|r| r.max_sff_norm),
        jacobian_range,
        runs,
        statement: "descriptive run on a bounded grid with affine Dirichlet data; \
a planar outcome is consistent with the rigidity theorem, not a verification of it",
    })
}

/// `H⃗ + ½F⃗^⊥` at an interior node as an ambient vector.
pub fn node_shrinker_vector(dg: &DiscreteGraph, i: usize, j: usize) -> Result<Vec4> {
    Ok(dg.node_frame(i, j)?.shrinker_residual())
}

/// Per-node residual norms, for diagnostics.
pub fn residual_norms(dg: &DiscreteGraph) -> Result<Vec<f64>> {
    Ok(assemble_residual(dg)?.chunks(2).map(|c| c[0].hypot(c[1])).collect())
}
