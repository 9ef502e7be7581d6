//! Shared fixtures for the criterion benchmarks.

use graphshrink::Immersion;

/// A non-trivial graph used across benchmarks.
pub fn sample_graph() -> Immersion {
    Immersion::graph("0.3*sin(x1)*x2 + 0.1*x1^3", "exp(0.2*x2) - 0.5*x1*x2").expect("valid expressions")
}
