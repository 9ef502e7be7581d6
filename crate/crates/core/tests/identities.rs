use std::f64::consts::SQRT_2;

use graphshrink::corpus::{Corpus, CorpusSpec};
use graphshrink::forms::ParallelForm2;
use graphshrink::identities::*;
use graphshrink::Immersion;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_points(n: usize, seed: u64, lo: f64, hi: f64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| [rng.gen_range(lo..hi), rng.gen_range(lo..hi)]).collect()
}

fn shrinker_torus() -> Immersion {
    Immersion::torus(SQRT_2, SQRT_2).unwrap()
}

#[test]
fn codazzi_symmetry() {
    let plane = Immersion::plane([[0.3, 1.0], [-2.0, 0.1]], [0.0, 1.0, 2.0, 3.0]);
    assert!(check_codazzi(&plane, [0.4, 0.2]).unwrap().abs_residual < 1e-14);
    let g = Immersion::graph("x1*x2", "x1^2 - x2^2").unwrap();
    assert!(check_codazzi(&g, [0.3, -0.4]).unwrap().abs_residual <= 1e-8);
    let t = Immersion::torus(1.0, 2.0).unwrap();
    assert!(check_codazzi(&t, [1.0, 1.0]).unwrap().abs_residual <= 1e-8);
}

#[test]
fn laplacian_of_star_on_planes_vanishes() {
    let plane = Immersion::plane([[0.7, -0.2], [1.5, 0.4]], [1.0, -2.0, 0.5, 0.0]);
    for (_, form) in ParallelForm2::named() {
        let r = check_prop_2_5(&plane, [0.3, -1.1], &form).unwrap();
        assert!(r.lhs.abs() < 1e-13 && r.rhs.abs() < 1e-13, "{r:?}");
    }
}

#[test]
fn laplacian_of_star_examples() {
    let g = Immersion::graph("sin(x1)", "x1*x2").unwrap();
    let r = check_prop_2_5(&g, [0.7, 0.2], &ParallelForm2::eta_prime()).unwrap();
    assert!(r.rel_residual <= 1e-8, "{r:?}");
    assert!(r.lhs.abs() > 1e-3);
    let t = Immersion::torus(1.3, 0.9).unwrap();
    let r = check_prop_2_5(&t, [2.0, 5.0], &ParallelForm2::eta2()).unwrap();
    assert!(r.rel_residual <= 1e-8, "{r:?}");
}

#[test]
fn laplacian_of_star_against_finite_differences() {
    // Δ from a five-point stencil in coordinates, conformally flat torus
    // factor: metric diag(r1², r2²).
    let (r1, r2) = (1.3, 0.9);
    let t = Immersion::torus(r1, r2).unwrap();
    let form = ParallelForm2::new([0.2, 1.0, -0.5, 0.3, 0.8, -1.2]);
    let star = |x: [f64; 2]| {
        let f = graphshrink::geometry::evaluate_frame(&t, x, graphshrink::Gauge::GramSchmidt).unwrap();
        graphshrink::forms::hodge_star(&form, &f)
    };
    let x = [0.4, 2.2];
    let h = 1e-3;
    let d11 = (star([x[0] + h, x[1]]) - 2.0 * star(x) + star([x[0] - h, x[1]])) / (h * h);
    let d22 = (star([x[0], x[1] + h]) - 2.0 * star(x) + star([x[0], x[1] - h])) / (h * h);
    let fd = d11 / (r1 * r1) + d22 / (r2 * r2);
    let r = check_prop_2_5(&t, x, &form).unwrap();
    assert!((r.lhs - fd).abs() < 1e-5, "{} vs {fd}", r.lhs);
}

#[test]
fn shrinker_mean_term_on_exact_shrinkers() {
    let plane = Immersion::linear_plane([[0.5, 0.1], [-0.3, 2.0]]);
    let r = check_lemma_2_6(&plane, [0.9, -0.3], &ParallelForm2::eta_prime()).unwrap();
    assert!(r.lhs.abs() < 1e-14 && r.rhs.abs() < 1e-14);
    let t = shrinker_torus();
    for x in random_points(20, 7, -3.2, 3.2) {
        let r = check_lemma_2_6(&t, x, &ParallelForm2::eta1()).unwrap();
        assert!(r.rel_residual <= 1e-8, "{r:?}");
        assert!(r.shrinker_residual <= 1e-12);
    }
}

#[test]
fn mean_term_identity_holds_trivially_on_product_tori() {
    // F is normal and H⃗ is normal-parallel on every product torus, so both
    // sides vanish whether or not the radii make it a shrinker.
    let t = Immersion::torus(1.0, 1.0).unwrap();
    for x in random_points(10, 8, -3.0, 3.0) {
        for (_, form) in ParallelForm2::named() {
            let r = check_lemma_2_6(&t, x, &form).unwrap();
            assert!(r.shrinker_residual > 0.1, "{r:?}");
            assert!(r.lhs.abs() < 1e-14 && r.rhs.abs() < 1e-14, "{r:?}");
        }
    }
}

#[test]
fn shrinker_mean_term_fails_off_shrinkers() {
    let g = Immersion::graph("x1^2", "0.5*x1*x2").unwrap();
    for x in random_points(10, 8, -1.0, 1.0) {
        let r = check_lemma_2_6(&g, x, &ParallelForm2::eta1()).unwrap();
        assert!(r.shrinker_residual > 1e-2, "{r:?}");
        assert!(r.abs_residual > 1e-3, "{r:?}");
    }
}

#[test]
fn structure_equation_on_exact_shrinkers() {
    let plane = Immersion::linear_plane([[0.0, 1.0], [1.0, 0.0]]);
    for (_, form) in ParallelForm2::named() {
        assert!(check_structure_eq(&plane, [0.2, 0.3], &form).unwrap().abs_residual < 1e-13);
    }
    let t = shrinker_torus();
    for x in random_points(20, 9, -3.2, 3.2) {
        for (_, form) in ParallelForm2::named() {
            let r = check_structure_eq(&t, x, &form).unwrap();
            assert!(r.rel_residual <= 1e-8, "{r:?}");
        }
    }
}

#[test]
fn structure_defect_decomposes() {
    let g = Immersion::graph("x1^2", "0").unwrap();
    let t = Immersion::torus(1.0, 1.7).unwrap();
    for (imm, x) in [(&g, [0.5, 0.0]), (&g, [-0.3, 1.2]), (&t, [0.4, 2.0])] {
        for (_, form) in ParallelForm2::named() {
            let [laplacian, mean_term, structure] = structure_decomposition(imm, x, &form).unwrap();
            assert!((laplacian + mean_term - structure).abs() <= 1e-10);
            let direct = check_structure_eq(imm, x, &form).unwrap();
            assert!((direct.defect - structure).abs() <= 1e-12);
        }
    }
}

#[test]
fn contraction_identity_examples() {
    let flat = Immersion::graph("0", "0").unwrap();
    for which in [VolumeForm::Eta1, VolumeForm::Eta2] {
        let r = check_contraction_identity(&flat, [0.3, 0.3], which).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
    }
    let g = Immersion::graph("x1^2 + x2", "sin(x2)").unwrap();
    for which in [VolumeForm::Eta1, VolumeForm::Eta2] {
        let r = check_contraction_identity(&g, [0.1, 0.6], which).unwrap();
        assert!(r.rel_residual <= 1e-9, "{r:?}");
        assert!(r.lhs.abs() > 1e-4, "{r:?}");
    }
    // J_f = -1: the weight of the eta1 identity is -∗η1
    let swap = Immersion::graph("x2", "x1").unwrap();
    let w = contraction_weight(&swap, [1.0, 1.0], VolumeForm::Eta1).unwrap();
    assert!((w + 0.5).abs() < 1e-15, "{w}");
    assert!(check_contraction_identity(&Immersion::torus(1.0, 1.0).unwrap(), [0.0, 0.0], VolumeForm::Eta1).is_err());
}

#[test]
fn graph_equations_on_planes_vanish() {
    let plane = Immersion::graph("0.4*x1 - 1.3*x2", "2*x1 + 0.5*x2").unwrap();
    for eq in GraphEquation::ALL {
        let r = check_thm_3_6(&plane, [0.7, -0.2], eq).unwrap();
        assert!(r.abs_residual < 1e-13, "{r:?}");
    }
}

#[test]
fn graph_equations_are_additive() {
    let g = Immersion::graph("x1^2", "0").unwrap();
    let d = |x, eq| check_thm_3_6(&g, x, eq).unwrap().defect;
    for x in [[0.5, 0.0], [0.1, -0.8]] {
        let (e1, e2) = (d(x, GraphEquation::Eta1), d(x, GraphEquation::Eta2));
        assert!((d(x, GraphEquation::EtaPrime) - (e1 + e2)).abs() <= 1e-10);
        assert!((d(x, GraphEquation::EtaDoublePrime) - (e1 - e2)).abs() <= 1e-10);
    }
    // off shrinkers the defect is the structure-equation defect of the same form
    let x = [0.5, 0.0];
    let r = check_thm_3_6(&g, x, GraphEquation::Eta1).unwrap();
    assert!(r.abs_residual > 1e-3);
    let [prop, lemma, _] = structure_decomposition(&g, x, &ParallelForm2::eta1()).unwrap();
    assert!((r.defect - (prop + lemma)).abs() <= 1e-10);
}

#[test]
fn corpus_sweep_small() {
    let corpus = Corpus::generate(&CorpusSpec { graphs: 8, points_per_graph: 4, ..CorpusSpec::default() }).unwrap();
    for (g, x) in corpus.samples() {
        let imm = &corpus.graphs[g].immersion;
        for (name, form) in &corpus.forms {
            let r = check_prop_2_5(imm, x, form).unwrap();
            assert!(r.rel_residual <= 1e-8, "{name} {:?} {r:?}", corpus.graphs[g].source);
        }
        for which in [VolumeForm::Eta1, VolumeForm::Eta2] {
            assert!(check_contraction_identity(imm, x, which).unwrap().rel_residual <= 1e-9);
        }
    }
}

#[test]
fn rigidity_examples() {
    let zero = [[[0.0; 2]; 2]; 2];
    assert_eq!(
        classify_rigidity(&zero, [1.0, 0.0], [0.0, 0.0], RIGIDITY_TOLERANCE).unwrap(),
        Rigidity::TotallyGeodesic
    );
    // h³ = diag(1, -1), h⁴ = offdiag(1): annihilates the first curvature sum
    let minimal = [[[1.0, 0.0], [0.0, -1.0]], [[0.0, 1.0], [1.0, 0.0]]];
    assert_eq!(
        classify_rigidity(&minimal, [0.0, 0.0], [0.0, 0.0], RIGIDITY_TOLERANCE).unwrap(),
        Rigidity::Minimal
    );
    assert_eq!(
        classify_rigidity(&minimal, [1.0, 0.0], [0.5, 0.0], RIGIDITY_TOLERANCE).unwrap(),
        Rigidity::Minimal
    );
    // traceless but the determinant relation fails
    let bad = [[[1.0, 1.0], [1.0, -1.0]], [[0.0; 2]; 2]];
    assert_eq!(
        classify_rigidity(&bad, [1.0, 0.0], [0.0, 0.0], RIGIDITY_TOLERANCE).unwrap(),
        Rigidity::None
    );
    // minimal data at a point with F tangential and nonzero contradicts the
    // determinant relation
    assert_eq!(
        classify_rigidity(&minimal, [1.0, 0.0], [0.0, 0.0], RIGIDITY_TOLERANCE).unwrap(),
        Rigidity::None
    );
}
