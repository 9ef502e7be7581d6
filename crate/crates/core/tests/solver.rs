use graphshrink::geometry::{norm4, shrinker_residual};
use graphshrink::solver::*;
use graphshrink::Immersion;

#[test]
fn affine_through_origin_is_an_exact_root() {
    let a = AffineMap::from_entries([0.3, -1.2, 0.7, 0.4]);
    let dg = DiscreteGraph::affine(16, 2.0, a).unwrap();
    let r = assemble_residual(&dg).unwrap();
    assert_eq!(r.len(), 2 * 15 * 15);
    assert!(r.iter().all(|v| v.abs() <= 1e-14), "{:e}", r.iter().fold(0.0f64, |m, v| m.max(v.abs())));
}

#[test]
fn constant_offset_gives_half_normal_offset() {
    let c = [0.4, -0.3];
    let a = AffineMap { linear: [[0.5, 0.0], [0.0, -0.2]], offset: c };
    let dg = DiscreteGraph::affine(12, 1.5, a).unwrap();
    // F = (x, Lx) + (0, c); the constant's normal part is all that survives
    let imm = Immersion::plane(a.linear, [0.0, 0.0, c[0], c[1]]);
    let want = norm4(&shrinker_residual(&imm, [0.0, 0.0]).unwrap());
    assert!(want > 0.1);
    for v in residual_norms(&dg).unwrap() {
        assert!((v - want).abs() <= 1e-12);
    }
}

#[test]
fn finite_difference_residual_converges_to_jet_residual() {
    let f = |x: [f64; 2]| [0.1 * x[0].sin(), 0.0];
    let imm = Immersion::graph("0.1*sin(x1)", "0").unwrap();
    let point = [0.5, 0.5];
    let exact = shrinker_residual(&imm, point).unwrap();
    let errors: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&n| {
            // boundary data is irrelevant here, only the stencil around the node matters
            let dg = DiscreteGraph::from_fn(n, 2.0, AffineMap::ZERO, f).unwrap();
            let h = dg.spacing();
            let i = ((point[0] + 2.0) / h).round() as usize;
            let j = ((point[1] + 2.0) / h).round() as usize;
            assert_eq!(dg.position(i, j), point);
            let v = node_shrinker_vector(&dg, i, j).unwrap();
            norm4(&std::array::from_fn(|k| v[k] - exact[k]))
        })
        .collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..=4.5).contains(&ratio), "{errors:?}");
    }
}

#[test]
fn exact_root_converges_immediately() {
    let a = AffineMap::from_entries([0.0, 1.0, -1.0, 0.0]);
    let dg = DiscreteGraph::affine(12, 2.0, a).unwrap();
    let (out, rep) = gauss_newton_solve(&dg, &SolverConfig::default()).unwrap();
    assert!(rep.converged && rep.iterations <= 1, "{rep:?}");
    assert_eq!(out, dg);
}

#[test]
fn perturbed_rotation_relaxes_to_the_rotation() {
    let a = AffineMap::from_entries([0.0, 1.0, -1.0, 0.0]);
    let mut dg = DiscreteGraph::affine(32, 3.0, a).unwrap();
    dg.perturb(0.1, 11);
    let (_, rep) = gauss_newton_solve(&dg, &SolverConfig::default()).unwrap();
    assert!(rep.converged, "{rep:?}");
    assert!(rep.distance_to_affine <= 1e-6 && rep.distance_to_boundary_map <= 1e-6, "{rep:?}");
    assert!(rep.max_sff_norm <= 1e-4);
    for w in rep.residual_history.windows(2) {
        assert!(w[1] < w[0]);
    }
}

#[test]
fn gaussian_bump_relaxes_to_zero() {
    let dg = DiscreteGraph::from_fn(32, 3.0, AffineMap::ZERO, |x| {
        let b = 0.2 * (-(x[0] * x[0] + x[1] * x[1])).exp();
        [b, b]
    })
    .unwrap();
    let (out, rep) = gauss_newton_solve(&dg, &SolverConfig::default()).unwrap();
    assert!(rep.converged, "{rep:?}");
    assert!(out.distance_to(&AffineMap::ZERO) <= 1e-6);
}

#[test]
fn probe_bookkeeping() {
    let cfg = ProbeConfig { n: 12, radius: 2.5, seeds: 2, ..ProbeConfig::default() };
    let p = bernstein_probe(AffineMap::from_entries([0.0, 1.0, 1.0, 0.0]), &cfg).unwrap();
    assert_eq!(p.jacobian, -1.0);
    assert!(!p.condition_plus && p.condition_minus);
    assert_eq!(p.runs.len(), 2);
    let p = bernstein_probe(AffineMap::from_entries([0.0, 1.0, -1.0, 0.0]), &cfg).unwrap();
    assert!(p.condition_plus && !p.condition_minus);
}

#[test]
fn probe_from_flat_data() {
    let cfg = ProbeConfig { n: 24, radius: 2.5, seeds: 5, ..ProbeConfig::default() };
    let p = bernstein_probe(AffineMap::ZERO, &cfg).unwrap();
    assert_eq!(p.fraction_converged, 1.0, "{p:?}");
    assert!(p.max_distance_to_affine <= 1e-6);
    for r in &p.runs {
        assert!(r.distance_to_boundary_map <= 1e-6);
    }
}

#[test]
fn solved_grid_is_a_smooth_immersion() {
    let a = AffineMap::from_entries([0.2, 0.0, 0.0, 0.3]);
    let dg = DiscreteGraph::affine(10, 1.0, a).unwrap();
    let imm = dg.to_immersion().unwrap();
    let r = shrinker_residual(&imm, [0.13, -0.41]).unwrap();
    assert!(norm4(&r) < 1e-12);
}
