use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use graphshrink::identities::{check_contraction_identity, check_prop_2_5, check_thm_3_6, GraphEquation, VolumeForm};
use graphshrink::integrals::{integrate, QuadratureGrid, QuadratureRule};
use graphshrink::solver::{assemble_residual, AffineMap, DiscreteGraph};
use graphshrink::{Expr, LocalGeometry, ParallelForm2};
use graphshrink_bench::sample_graph;

const POINT: [f64; 2] = [0.4, -0.7];

fn jets(c: &mut Criterion) {
    let e = Expr::parse("sin(x1*x2)^2/(2+cos(x1)) + sqrt(1+x2^2)*exp(-x1)").unwrap();
    c.bench_function("expr_eval_order3", |b| b.iter(|| e.eval(black_box(POINT)).unwrap()));
}

fn geometry(c: &mut Criterion) {
    let imm = sample_graph();
    c.bench_function("local_geometry_at", |b| b.iter(|| LocalGeometry::at(&imm, black_box(POINT)).unwrap()));
}

fn identities(c: &mut Criterion) {
    let imm = sample_graph();
    let form = ParallelForm2::eta_prime();
    c.bench_function("laplacian_of_star", |b| b.iter(|| check_prop_2_5(&imm, black_box(POINT), &form).unwrap()));
    c.bench_function("contraction_identity", |b| {
        b.iter(|| check_contraction_identity(&imm, black_box(POINT), VolumeForm::Eta1).unwrap())
    });
    c.bench_function("graph_equation", |b| {
        b.iter(|| check_thm_3_6(&imm, black_box(POINT), GraphEquation::EtaPrime).unwrap())
    });
}

fn quadrature(c: &mut Criterion) {
    let imm = sample_graph();
    let grid = QuadratureGrid::square(2.0, 16, QuadratureRule::GaussLegendre4).unwrap();
    c.bench_function("area_gl4_16x16", |b| b.iter(|| integrate(&imm, black_box(&grid), |_| Ok(1.0)).unwrap()));
}

fn solver(c: &mut Criterion) {
    let mut dg = DiscreteGraph::affine(32, 3.0, AffineMap::from_entries([0.0, 1.0, -1.0, 0.0])).unwrap();
    dg.perturb(0.1, 1);
    c.bench_function("residual_n32", |b| b.iter(|| assemble_residual(black_box(&dg)).unwrap()));
}

criterion_group!(benches, jets, geometry, identities, quadrature, solver);
criterion_main!(benches);
