use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jets::{Coord, Jet3};

/// A map from the parameter plane into R⁴ that can be expanded as jets.
#[derive(Clone, Debug)]
pub enum Immersion {
    /// The graph `x ↦ (x, f1(x), f2(x))`.
    Graph { f: [Expr; 2] },
    /// The affine plane `x ↦ (x, linear·x) + offset`.
    Plane { linear: [[f64; 2]; 2], offset: [f64; 4] },
    /// `(θ1, θ2) ↦ (r1 cos θ1, r1 sin θ1, r2 cos θ2, r2 sin θ2)`.
    Torus { r1: f64, r2: f64 },
    /// Graph of a piecewise-cubic interpolant of grid samples.
    Discrete(GridInterpolant),
}

impl Immersion {
    pub fn graph(f1: &str, f2: &str) -> Result<Immersion> {
        Ok(Immersion::Graph {
            f: [Expr::parse(f1)?, Expr::parse(f2)?],
        })
    }

    pub fn plane(linear: [[f64; 2]; 2], offset: [f64; 4]) -> Immersion {
        Immersion::Plane { linear, offset }
    }

    /// The plane `x ↦ (x, linear·x)` through the origin.
    pub fn linear_plane(linear: [[f64; 2]; 2]) -> Immersion {
        Immersion::Plane {
            linear,
            offset: [0.0; 4],
        }
    }

    pub fn torus(r1: f64, r2: f64) -> Result<Immersion> {
        if !(r1 > 0.0 && r2 > 0.0) {
            return Err(Error::InvalidArgument(format!("torus radii must be positive, got {r1}, {r2}")));
        }
        Ok(Immersion::Torus { r1, r2 })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Immersion::Graph { .. } => "graph",
            Immersion::Plane { .. } => "plane",
            Immersion::Torus { .. } => "torus",
            Immersion::Discrete(_) => "discrete",
        }
    }

    /// True for every kind of the form `x ↦ (x + c, f(x))`.
    pub fn is_graph(&self) -> bool {
        !matches!(self, Immersion::Torus { .. })
    }

    /// Ambient coordinates `F1..F4` as jets in the parameters.
    pub fn position_jets(&self, x: [f64; 2]) -> Result<[Jet3; 4]> {
        self.position_from_coords(&Jet3::seed_both(x))
    }

    pub fn position_from_coords(&self, c: &[Jet3; 2]) -> Result<[Jet3; 4]> {
        match self {
            Immersion::Graph { f } => Ok([c[0], c[1], f[0].eval_jets(c)?, f[1].eval_jets(c)?]),
            Immersion::Plane { linear, offset } => {
                let row = |r: [f64; 2]| c[0] * r[0] + c[1] * r[1];
                Ok([
                    c[0] + offset[0],
                    c[1] + offset[1],
                    row(linear[0]) + offset[2],
                    row(linear[1]) + offset[3],
                ])
            }
            Immersion::Torus { r1, r2 } => Ok([
                c[0].cos() * *r1,
                c[0].sin() * *r1,
                c[1].cos() * *r2,
                c[1].sin() * *r2,
            ]),
            Immersion::Discrete(grid) => {
                let [f1, f2] = grid.eval_jets(c)?;
                Ok([c[0], c[1], f1, f2])
            }
        }
    }

    /// Jacobian `∂f_j/∂x_i` (row `j`, column `i`) of the graphing map.
    pub fn differential(&self, x: [f64; 2]) -> Result<[[f64; 2]; 2]> {
        if !self.is_graph() {
            return Err(Error::NotGraph(self.kind_name()));
        }
        let p = self.position_jets(x)?;
        Ok([
            [p[2].d(Coord::X1), p[2].d(Coord::X2)],
            [p[3].d(Coord::X1), p[3].d(Coord::X2)],
        ])
    }
}

/// Samples of `f = (f1, f2)` on the `(n+1)×(n+1)` grid over `[-radius, radius]²`,
/// evaluated by tensor-product cubic Lagrange interpolation on the 4×4 block of
/// nodes around each cell.
#[derive(Clone, Debug, PartialEq)]
pub struct GridInterpolant {
    n: usize,
    radius: f64,
    values: Vec<[f64; 2]>,
}

impl GridInterpolant {
    /// `values` is row-major with the `x1` index varying slowest:
    /// node `(i, j)` sits at `(-radius + i·h, -radius + j·h)`.
    pub fn new(n: usize, radius: f64, values: Vec<[f64; 2]>) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!("grid needs at least 4 nodes per side, got n = {n}")));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!("grid radius must be positive, got {radius}")));
        }
        if values.len() != (n + 1) * (n + 1) {
            return Err(Error::InvalidArgument(format!(
                "expected {} node values, got {}",
                (n + 1) * (n + 1),
                values.len()
            )));
        }
        Ok(GridInterpolant { n, radius, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.radius / self.n as f64
    }

    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        self.values[i * (self.n + 1) + j]
    }

    pub fn node_position(&self, i: usize, j: usize) -> [f64; 2] {
        let h = self.spacing();
        [-self.radius + i as f64 * h, -self.radius + j as f64 * h]
    }

    fn stencil_start(&self, t: f64) -> Result<usize> {
        let h = self.spacing();
        let s = (t + self.radius) / h;
        if !(-1e-9..=self.n as f64 + 1e-9).contains(&s) {
            return Err(Error::Domain(format!("point {t} outside the grid [-{0}, {0}]", self.radius)));
        }
        let cell = (s.floor().max(0.0) as usize).min(self.n - 1);
        Ok(cell.saturating_sub(1).min(self.n - 3))
    }

    fn basis(&self, t: &Jet3, start: usize) -> [Jet3; 4] {
        let nodes: [f64; 4] = std::array::from_fn(|m| -self.radius + (start + m) as f64 * self.spacing());
        std::array::from_fn(|k| {
            let mut b = Jet3::constant(1.0);
            for (m, &xm) in nodes.iter().enumerate() {
                if m != k {
                    b = b * (*t - xm) * (1.0 / (nodes[k] - xm));
                }
            }
            b
        })
    }

    pub fn eval_jets(&self, c: &[Jet3; 2]) -> Result<[Jet3; 2]> {
        let si = self.stencil_start(c[0].value())?;
        let sj = self.stencil_start(c[1].value())?;
        let bu = self.basis(&c[0], si);
        let bv = self.basis(&c[1], sj);
        let mut out = [Jet3::constant(0.0); 2];
        for (k, bk) in bu.iter().enumerate() {
            for (l, bl) in bv.iter().enumerate() {
                let w = *bk * *bl;
                let v = self.node(si + k, sj + l);
                out[0] = out[0] + w * v[0];
                out[1] = out[1] + w * v[1];
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_keeps_parameter_coordinates() {
        let imm = Immersion::graph("sin(x1)", "x1*x2").unwrap();
        let p = imm.position_jets([0.3, -1.2]).unwrap();
        assert_eq!(p[0].value(), 0.3);
        assert_eq!(p[1].value(), -1.2);
        assert_eq!(p[0].grad(), [1.0, 0.0]);
        assert_eq!(p[1].grad(), [0.0, 1.0]);
    }

    #[test]
    fn differential_of_rotation() {
        let imm = Immersion::graph("x2", "-x1").unwrap();
        assert_eq!(imm.differential([1.0, 0.0]).unwrap(), [[0.0, 1.0], [-1.0, 0.0]]);
        let t = Immersion::torus(1.0, 1.0).unwrap();
        assert!(matches!(t.differential([0.0, 0.0]), Err(Error::NotGraph("torus"))));
    }

    #[test]
    fn interpolant_reproduces_cubics() {
        let n = 8;
        let r = 2.0;
        let f = |x: f64, y: f64| [x * x * y - 0.5 * y * y * y + x, 3.0 - x * y];
        let h = 2.0 * r / n as f64;
        let mut vals = Vec::new();
        for i in 0..=n {
            for j in 0..=n {
                let (x, y) = (-r + i as f64 * h, -r + j as f64 * h);
                vals.push(f(x, y));
            }
        }
        let g = GridInterpolant::new(n, r, vals).unwrap();
        let p = [0.37, -1.61];
        let [a, b] = g.eval_jets(&Jet3::seed_both(p)).unwrap();
        let exact = f(p[0], p[1]);
        assert!((a.value() - exact[0]).abs() < 1e-12);
        assert!((b.value() - exact[1]).abs() < 1e-12);
        // ∂x1 ∂x1 ∂x2 of x1² x2 is 2
        assert!((a.d3(Coord::X1, Coord::X1, Coord::X2) - 2.0).abs() < 1e-9);
        assert!(g.eval_jets(&Jet3::seed_both([2.5, 0.0])).is_err());
    }
}
