//! Test-only oracles independent of the crate's parser and jet arithmetic.
#![allow(dead_code)]

use rand::Rng;

/// Plain f64 expression tree, rendered fully parenthesized.
#[derive(Clone, Debug)]
pub enum TExpr {
    Const(f64),
    X1,
    X2,
    Neg(Box<TExpr>),
    Add(Box<TExpr>, Box<TExpr>),
    Sub(Box<TExpr>, Box<TExpr>),
    Mul(Box<TExpr>, Box<TExpr>),
    Div(Box<TExpr>, Box<TExpr>),
    Sin(Box<TExpr>),
    Cos(Box<TExpr>),
    Exp(Box<TExpr>),
    Sqrt(Box<TExpr>),
    Pow(Box<TExpr>, i32),
}

impl TExpr {
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        match self {
            TExpr::Const(c) => *c,
            TExpr::X1 => x[0],
            TExpr::X2 => x[1],
            TExpr::Neg(a) => -a.eval(x),
            TExpr::Add(a, b) => a.eval(x) + b.eval(x),
            TExpr::Sub(a, b) => a.eval(x) - b.eval(x),
            TExpr::Mul(a, b) => a.eval(x) * b.eval(x),
            TExpr::Div(a, b) => a.eval(x) / b.eval(x),
            TExpr::Sin(a) => a.eval(x).sin(),
            TExpr::Cos(a) => a.eval(x).cos(),
            TExpr::Exp(a) => a.eval(x).exp(),
            TExpr::Sqrt(a) => a.eval(x).sqrt(),
            TExpr::Pow(a, n) => a.eval(x).powi(*n),
        }
    }

    pub fn render(&self) -> String {
        match self {
            TExpr::Const(c) => format!("({c})"),
            TExpr::X1 => "x1".into(),
            TExpr::X2 => "x2".into(),
            TExpr::Neg(a) => format!("(-{})", a.render()),
            TExpr::Add(a, b) => format!("({} + {})", a.render(), b.render()),
            TExpr::Sub(a, b) => format!("({} - {})", a.render(), b.render()),
            TExpr::Mul(a, b) => format!("({} * {})", a.render(), b.render()),
            TExpr::Div(a, b) => format!("({} / {})", a.render(), b.render()),
            TExpr::Sin(a) => format!("sin({})", a.render()),
            TExpr::Cos(a) => format!("cos({})", a.render()),
            TExpr::Exp(a) => format!("exp({})", a.render()),
            TExpr::Sqrt(a) => format!("sqrt({})", a.render()),
            TExpr::Pow(a, n) => format!("{}^({n})", a.render()),
        }
    }
}

fn b(e: TExpr) -> Box<TExpr> {
    Box::new(e)
}

/// Random composite expression that stays in every function's domain:
/// divisors are `2 + sin(·)`, square roots act on `1 + (·)²`, exponentials on
/// bounded arguments.
pub fn random_expr<R: Rng>(rng: &mut R, depth: usize) -> TExpr {
    if depth == 0 {
        return match rng.gen_range(0..3) {
            0 => TExpr::X1,
            1 => TExpr::X2,
            _ => TExpr::Const((rng.gen_range(-2.0..2.0f64) * 100.0).round() / 100.0),
        };
    }
    let a = random_expr(rng, depth - 1);
    match rng.gen_range(0..10) {
        0 => TExpr::Add(b(a), b(random_expr(rng, depth - 1))),
        1 => TExpr::Sub(b(a), b(random_expr(rng, depth - 1))),
        2 | 3 => TExpr::Mul(b(a), b(random_expr(rng, depth - 1))),
        4 => TExpr::Div(b(a), b(TExpr::Add(b(TExpr::Const(2.0)), b(TExpr::Sin(b(random_expr(rng, depth - 1))))))),
        5 => TExpr::Sin(b(a)),
        6 => TExpr::Cos(b(a)),
        7 => TExpr::Exp(b(TExpr::Sin(b(a)))),
        8 => TExpr::Sqrt(b(TExpr::Add(b(TExpr::Const(1.0)), b(TExpr::Pow(b(a), 2))))),
        _ => TExpr::Neg(b(TExpr::Pow(b(TExpr::Cos(b(a))), rng.gen_range(2..=3)))),
    }
}

/// Multi-indices through order three as counts of `x2` derivatives.
pub const MULTI_INDICES: [(usize, usize); 9] = [(1, 0), (1, 1), (2, 0), (2, 1), (2, 2), (3, 0), (3, 1), (3, 2), (3, 3)];

/// Second-order-accurate central difference for `∂^order` with `k` of the
/// derivatives along `x2`.
pub fn central_difference<F: Fn([f64; 2]) -> f64>(f: &F, x: [f64; 2], order: usize, k: usize, h: f64) -> f64 {
    let at = |a: f64, c: f64| f([x[0] + a * h, x[1] + c * h]);
    // 1D stencils along an axis, expressed by a callback on offsets
    let d1 = |g: &dyn Fn(f64) -> f64| (g(1.0) - g(-1.0)) / (2.0 * h);
    let d2 = |g: &dyn Fn(f64) -> f64| (g(1.0) - 2.0 * g(0.0) + g(-1.0)) / (h * h);
    let d3 = |g: &dyn Fn(f64) -> f64| (g(2.0) - 2.0 * g(1.0) + 2.0 * g(-1.0) - g(-2.0)) / (2.0 * h * h * h);
    match (order, k) {
        (1, 0) => d1(&|s| at(s, 0.0)),
        (1, 1) => d1(&|s| at(0.0, s)),
        (2, 0) => d2(&|s| at(s, 0.0)),
        (2, 2) => d2(&|s| at(0.0, s)),
        (2, 1) => (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * h * h),
        (3, 0) => d3(&|s| at(s, 0.0)),
        (3, 3) => d3(&|s| at(0.0, s)),
        (3, 1) => d1(&|t| (at(1.0, t) - 2.0 * at(0.0, t) + at(-1.0, t)) / (h * h)),
        (3, 2) => d1(&|t| (at(t, 1.0) - 2.0 * at(t, 0.0) + at(t, -1.0)) / (h * h)),
        _ => panic!("unsupported multi-index ({order}, {k})"),
    }
}

/// Jet derivative for the same multi-index.
pub fn jet_derivative(j: &graphshrink::Jet3, order: usize, k: usize) -> f64 {
    use graphshrink::Coord::{X1, X2};
    let axes: Vec<graphshrink::Coord> = (0..order).map(|m| if m < order - k { X1 } else { X2 }).collect();
    match order {
        1 => j.d(axes[0]),
        2 => j.d2(axes[0], axes[1]),
        3 => j.d3(axes[0], axes[1], axes[2]),
        _ => unreachable!(),
    }
}

#[derive(Clone, Debug, Default)]
pub struct ConvergenceStats {
    pub checks: usize,
    pub ratio_checks: usize,
    pub worst_match: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub failures: Vec<String>,
}

/// Relative tolerance on the extrapolated difference quotient.
pub const MATCH_TOLERANCE: f64 = 1e-4;

/// Coarse step per derivative order; the fine step is half of it. Larger
/// steps at higher order keep rounding far below truncation.
pub const STEPS: [f64; 3] = [1e-3, 1e-2, 2e-2];

/// Discrepancies within this factor of the rounding estimate carry no rate.
pub const RATIO_FLOOR_FACTOR: f64 = 50.0;

/// Compares every jet derivative through order three with central
/// differences at steps `h` and `h/2`, recording the error ratio.
pub fn check_expression(e: &TExpr, x: [f64; 2], stats: &mut ConvergenceStats) {
    let src = e.render();
    let parsed = graphshrink::Expr::parse(&src).unwrap_or_else(|err| panic!("{src}: {err}"));
    let jet = parsed.eval(x).unwrap();
    let f = |p: [f64; 2]| e.eval(p);
    if (jet.value() - f(x)).abs() > 1e-12 * (1.0 + f(x).abs()) {
        stats.failures.push(format!("value mismatch for {src} at {x:?}"));
    }
    if stats.checks == 0 {
        stats.min_ratio = f64::INFINITY;
    }
    for (order, k) in MULTI_INDICES {
        let exact = jet_derivative(&jet, order, k);
        let h = STEPS[order - 1];
        let (fd1, fd2) = (central_difference(&f, x, order, k, h), central_difference(&f, x, order, k, 0.5 * h));
        let (e1, e2) = ((fd1 - exact).abs(), (fd2 - exact).abs());
        // the h² terms cancel in the extrapolant
        let extrapolated = (4.0 * fd2 - fd1) / 3.0;
        let scale = 1.0 + exact.abs();
        let mismatch = (extrapolated - exact).abs() / scale;
        stats.checks += 1;
        stats.worst_match = stats.worst_match.max(mismatch);
        if mismatch > MATCH_TOLERANCE {
            stats.failures.push(format!("∂({order},{k}) of {src} at {x:?}: jet {exact}, extrapolated {extrapolated}"));
        }
        // rounding in an order-k difference quotient grows like ε|f|/h^k
        let rounding = 4.0 * f64::EPSILON * (1.0 + f(x).abs()) / (0.5 * h).powi(order as i32);
        if e2 > RATIO_FLOOR_FACTOR * rounding {
            let ratio = e1 / e2;
            stats.ratio_checks += 1;
            stats.min_ratio = stats.min_ratio.min(ratio);
            stats.max_ratio = stats.max_ratio.max(ratio);
            if !(3.5..=4.5).contains(&ratio) {
                stats.failures.push(format!("∂({order},{k}) of {src} at {x:?}: ratio {ratio} ({e1:e} → {e2:e})"));
            }
        }
    }
}
