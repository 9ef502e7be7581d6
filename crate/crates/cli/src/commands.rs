use std::f64::consts::{PI, SQRT_2};

use graphshrink::adapted_frame::{build_adapted_frame, closed_form_stars, singular_decomposition};
use graphshrink::corpus::{Corpus, CorpusSpec};
use graphshrink::forms::{hodge_star, star_field};
use graphshrink::geometry::{evaluate_frame, norm4, shrinker_residual, SurfaceJet};
use graphshrink::identities::*;
use graphshrink::integrals::{lemma_3_10_chain, surface_area_in_ball};
use graphshrink::solver::{bernstein_probe, gauss_newton_solve, DiscreteGraph, ProbeConfig};
use graphshrink::{Expr, Gauge, Immersion, Jet3, LocalGeometry, ParallelForm2, ResidualReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::Output;
use crate::CliError;

/// How a family of reports is judged.
#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
enum Measure {
    Absolute,
    Relative,
}

#[derive(Clone, Debug, Serialize)]
struct IdentitySummary {
    identity: String,
    samples: usize,
    max_abs_residual: f64,
    max_rel_residual: f64,
    measure: Measure,
    tolerance: f64,
    pass: bool,
}

fn tolerance_for(name: &str) -> (Measure, f64) {
    match name {
        "codazzi" => (Measure::Absolute, 1e-8),
        "laplacian_of_star" | "shrinker_mean_term" | "structure_equation" => (Measure::Relative, 1e-8),
        "contraction_eta1" | "contraction_eta2" => (Measure::Relative, 1e-9),
        "graph_additivity_sum" | "graph_additivity_difference" => (Measure::Absolute, 1e-10),
        "shrinker_residual" => (Measure::Absolute, 1e-12),
        // graph equations on planes through the origin
        _ => (Measure::Relative, 1e-8),
    }
}

fn summarize(reports: &[ResidualReport]) -> Vec<IdentitySummary> {
    let mut order: Vec<String> = Vec::new();
    for r in reports {
        if !order.contains(&r.name) {
            order.push(r.name.clone());
        }
    }
    order
        .into_iter()
        .map(|name| {
            let rows: Vec<&ResidualReport> = reports.iter().filter(|r| r.name == name).collect();
            let max_abs = rows.iter().map(|r| r.abs_residual).fold(0.0, f64::max);
            let max_rel = rows.iter().map(|r| r.rel_residual).fold(0.0, f64::max);
            let (measure, tolerance) = tolerance_for(&name);
            let worst = match measure {
                Measure::Absolute => max_abs,
                Measure::Relative => max_rel,
            };
            IdentitySummary {
                identity: name,
                samples: rows.len(),
                max_abs_residual: max_abs,
                max_rel_residual: max_rel,
                measure,
                tolerance,
                pass: worst <= tolerance,
            }
        })
        .collect()
}

fn corpus_reports(imm: &Immersion, x: [f64; 2], forms: &[(String, ParallelForm2)]) -> graphshrink::Result<Vec<ResidualReport>> {
    let mut out = vec![check_codazzi(imm, x)?];
    for (_, form) in forms {
        out.push(check_prop_2_5(imm, x, form)?);
    }
    out.push(check_contraction_identity(imm, x, VolumeForm::Eta1)?);
    out.push(check_contraction_identity(imm, x, VolumeForm::Eta2)?);
    let [e1, e2, sum, diff] = GraphEquation::ALL.map(|eq| check_thm_3_6(imm, x, eq));
    let (e1, e2, sum, diff) = (e1?, e2?, sum?, diff?);
    let shrinker = e1.shrinker_residual;
    out.push(ResidualReport::new("graph_additivity_sum", x, sum.defect, e1.defect + e2.defect, shrinker));
    out.push(ResidualReport::new("graph_additivity_difference", x, diff.defect, e1.defect - e2.defect, shrinker));
    Ok(out)
}

fn shrinker_reports(imm: &Immersion, x: [f64; 2], graph: bool) -> graphshrink::Result<Vec<ResidualReport>> {
    let residual = norm4(&shrinker_residual(imm, x)?);
    let mut out = vec![ResidualReport::new("shrinker_residual", x, residual, 0.0, residual)];
    for (_, form) in ParallelForm2::named() {
        out.push(check_lemma_2_6(imm, x, &form)?);
        out.push(check_structure_eq(imm, x, &form)?);
    }
    if graph {
        for eq in GraphEquation::ALL {
            out.push(check_thm_3_6(imm, x, eq)?);
        }
    }
    Ok(out)
}

fn assert_all(failures: Vec<String>) -> Result<(), CliError> {
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Assertion(failures.join("; ")))
    }
}

pub fn verify(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let quick = cfg.verify.suite == "quick";
    let spec = if quick {
        CorpusSpec { graphs: 5, points_per_graph: 4, random_forms: 2, seed: cfg.seed, ..CorpusSpec::default() }
    } else {
        CorpusSpec { seed: cfg.seed, ..CorpusSpec::default() }
    };
    let corpus = Corpus::generate(&spec)?;
    let samples = corpus.samples();
    let per_sample: graphshrink::Result<Vec<Vec<ResidualReport>>> = samples
        .par_iter()
        .map(|(g, x)| corpus_reports(&corpus.graphs[*g].immersion, *x, &corpus.forms))
        .collect();
    let mut reports: Vec<ResidualReport> = per_sample?.into_iter().flatten().collect();

    // exact shrinkers: planes through the origin and the torus of radii √2
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let points = if quick { 5 } else { 20 };
    let mut exact: Vec<(Immersion, [f64; 2], bool)> = Vec::new();
    for _ in 0..3 {
        let plane = Immersion::linear_plane(std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-2.0..2.0))));
        for _ in 0..points {
            exact.push((plane.clone(), [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)], true));
        }
    }
    let torus = Immersion::torus(SQRT_2, SQRT_2)?;
    for _ in 0..points {
        exact.push((torus.clone(), [rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)], false));
    }
    let exact_reports: graphshrink::Result<Vec<Vec<ResidualReport>>> =
        exact.par_iter().map(|(imm, x, graph)| shrinker_reports(imm, *x, *graph)).collect();
    reports.extend(exact_reports?.into_iter().flatten());

    let summary = summarize(&reports);
    let reports_hash = out.write_jsonl("reports.jsonl", &reports)?;
    let rows: Vec<Vec<String>> = summary
        .iter()
        .map(|s| {
            vec![
                s.identity.clone(),
                s.samples.to_string(),
                format!("{:e}", s.max_abs_residual),
                format!("{:e}", s.max_rel_residual),
                serde_json::to_value(s.measure).unwrap().as_str().unwrap().to_string(),
                format!("{:e}", s.tolerance),
                s.pass.to_string(),
            ]
        })
        .collect();
    out.write_csv("summary.csv", "identity,samples,max_abs_residual,max_rel_residual,measure,tolerance,pass", &rows)?;
    out.write_json(
        "summary.json",
        &json!({
            "suite": cfg.verify.suite,
            "graphs": corpus.graphs.len(),
            "points": samples.len(),
            "forms": corpus.forms.len(),
            "reports": reports.len(),
            "reports_sha256": reports_hash,
            "identities": summary,
        }),
    )?;
    for s in &summary {
        println!(
            "{:<28} {:>6} samples  max {} residual {:.3e}  (tolerance {:.0e})  {}",
            s.identity,
            s.samples,
            match s.measure {
                Measure::Absolute => "abs",
                Measure::Relative => "rel",
            },
            match s.measure {
                Measure::Absolute => s.max_abs_residual,
                Measure::Relative => s.max_rel_residual,
            },
            s.tolerance,
            if s.pass { "ok" } else { "FAILED" }
        );
    }
    assert_all(
        summary
            .iter()
            .filter(|s| !s.pass)
            .map(|s| format!("{} exceeds tolerance {:e}", s.identity, s.tolerance))
            .collect(),
    )
}

pub fn star(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let imm = cfg.immersion()?;
    let x = cfg.star.at;
    let frame = evaluate_frame(&imm, x, Gauge::GramSchmidt)?;
    let named = ParallelForm2::named();
    let direct: Vec<f64> = named.iter().map(|(_, f)| hodge_star(f, &frame)).collect();
    let mut results = json!({ "point": x });
    let mut failures = Vec::new();
    if imm.is_graph() {
        let adapted = build_adapted_frame(&imm, x)?;
        let [l1, l2] = adapted.lambda();
        let closed = closed_form_stars(l1, l2);
        for (k, (name, _)) in named.iter().enumerate() {
            println!("star_{name} = {}", show(closed[k]));
            if (closed[k] - direct[k]).abs() > 1e-10 {
                failures.push(format!("star_{name}: closed form {} vs frame {}", closed[k], direct[k]));
            }
        }
        println!("lambda = [{}, {}]", show(l1), show(l2));
        println!("J = {}", show(adapted.decomposition.jacobian));
        results["stars"] = json!(named.iter().zip(closed).map(|((n, _), v)| (n.to_string(), v)).collect::<std::collections::BTreeMap<_, _>>());
        results["lambda"] = json!([l1, l2]);
        results["jacobian"] = json!(adapted.decomposition.jacobian);
    } else {
        for ((name, _), v) in named.iter().zip(&direct) {
            println!("star_{name} = {}", show(*v));
        }
    }
    results["stars_from_frame"] = json!(named.iter().zip(&direct).map(|((n, _), v)| (n.to_string(), *v)).collect::<std::collections::BTreeMap<_, _>>());
    out.write_json("star.json", &results)?;
    assert_all(failures)
}

pub fn svd(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let m = cfg.svd.matrix;
    let df = [[m[0], m[1]], [m[2], m[3]]];
    let d = singular_decomposition(&df);
    let stars = closed_form_stars(d.lambda[0], d.lambda[1]);
    println!("lambda1 = {}", show(d.lambda[0]));
    println!("lambda2 = {}", show(d.lambda[1]));
    println!("J = {}", show(d.jacobian));
    for (k, b) in d.bases.iter().enumerate() {
        println!("a{} = [{}, {}]", k + 1, show(b[0]), show(b[1]));
    }
    for ((name, _), v) in ParallelForm2::named().iter().zip(stars) {
        println!("star_{name} = {}", show(v));
    }
    let mut failures = Vec::new();
    let scale = 1.0 + d.lambda[1].abs();
    if (d.lambda[0] * d.lambda[1] - d.jacobian).abs() > 1e-10 * scale * scale {
        failures.push("λ1λ2 differs from J".to_string());
    }
    for i in 0..2 {
        let a = d.bases[i];
        for c in 0..2 {
            let image = df[c][0] * a[0] + df[c][1] * a[1];
            if (image - d.lambda[i] * d.bases[2 + i][c]).abs() > 1e-12 * scale {
                failures.push(format!("df(a{}) differs from λ{} a{}", i + 1, i + 1, i + 3));
            }
        }
    }
    out.write_json("svd.json", &json!({ "decomposition": d, "stars": stars }))?;
    assert_all(failures)
}

fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

/// Plain decimals for readable magnitudes, exponents for tiny ones.
fn show(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-4 {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

pub fn solve(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let s = &cfg.solve;
    let mut start = DiscreteGraph::affine(s.n, s.r, s.boundary())?;
    start.perturb(s.perturbation, cfg.seed);
    let (solved, report) = gauss_newton_solve(&start, &s.solver())?;
    let mut rows = Vec::with_capacity((s.n + 1) * (s.n + 1));
    for i in 0..=s.n {
        for j in 0..=s.n {
            let [x1, x2] = solved.position(i, j);
            let [f1, f2] = solved.value(i, j);
            rows.push(vec![fmt_f64(x1), fmt_f64(x2), fmt_f64(f1), fmt_f64(f2)]);
        }
    }
    let grid_hash = out.write_csv("grid.csv", "x1,x2,f1,f2", &rows)?;
    out.write_json("solve.json", &json!({ "report": report, "grid_sha256": grid_hash }))?;
    println!(
        "converged = {}  iterations = {}  max shrinker residual = {:.3e}  distance to affine = {:.3e}  max |h| = {:.3e}",
        report.converged, report.iterations, report.max_shrinker_residual, report.distance_to_affine, report.max_sff_norm
    );
    if report.converged {
        Ok(())
    } else {
        Err(CliError::Assertion(format!(
            "solver did not converge after {} iterations (damping {:e})",
            report.iterations, report.final_damping
        )))
    }
}

pub fn growth(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let imm = cfg.immersion()?;
    let mut entries = Vec::new();
    for &r in &cfg.growth.radii {
        // graphs and planes satisfy |x| ≤ |F|, so a square of half-width r suffices
        let grid = cfg.grid_with_radius(1.05 * r)?;
        entries.push(surface_area_in_ball(&imm, &grid, r)?);
    }
    let rows: Vec<Vec<String>> = entries.iter().map(|a| vec![fmt_f64(a.r), fmt_f64(a.area), fmt_f64(a.ratio)]).collect();
    let csv_hash = out.write_csv("growth.csv", "r,area,ratio", &rows)?;
    let constant = entries.iter().map(|a| a.ratio).fold(0.0, f64::max);
    for a in &entries {
        println!(
            "r = {}  area = {:.10}  ratio = {:.10}{}",
            a.r,
            a.area,
            a.ratio,
            if a.too_coarse { "  (grid too coarse near the sphere)" } else { "" }
        );
    }
    out.write_json("growth.json", &json!({ "entries": entries, "growth_constant": constant, "csv_sha256": csv_hash }))?;
    Ok(())
}

pub fn chain(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let imm = cfg.immersion()?;
    let grid = cfg.grid()?;
    let c = &cfg.chain;
    let expr = match c.g.strip_prefix("expr:") {
        Some(src) => Some(Expr::parse(src)?),
        None => None,
    };
    let form: Option<ParallelForm2> = match expr {
        Some(_) => None,
        None => Some(c.g.parse().map_err(|e: graphshrink::Error| CliError::Config(format!("chain.g: {e}")))?),
    };
    let g = |s: &SurfaceJet| -> graphshrink::Result<Jet3> {
        match (&expr, &form) {
            (Some(e), _) => e.eval_jets(&s.coords),
            (None, Some(f)) => star_field(f, s),
            _ => unreachable!(),
        }
    };
    let which = match c.k.as_str() {
        "curvature_plus" => Some(0),
        "curvature_minus" => Some(1),
        _ => None,
    };
    let k = |geo: &LocalGeometry| -> graphshrink::Result<f64> {
        match which {
            None => Ok(0.0),
            Some(w) => Ok(curvature_sums(&geo.frame_in(&imm, Gauge::Adapted)?.sff)[w]),
        }
    };
    let report = lemma_3_10_chain(&imm, &grid, g, k, c.r)?;
    out.write_json("chain.json", &report)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("json"));
    if report.pointwise.violations == 0 && !report.holds.iter().all(|&h| h) {
        return Err(CliError::Assertion(format!(
            "differential inequality holds at every node but the chain fails: {:?}",
            report.holds
        )));
    }
    Ok(())
}

pub fn probe(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let s = &cfg.solve;
    let pc = ProbeConfig {
        n: s.n,
        radius: s.r,
        perturbation: s.perturbation,
        seeds: cfg.probe.seeds,
        seed: cfg.seed,
        solver: s.solver(),
    };
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for m in &cfg.probe.maps {
        let p = bernstein_probe(graphshrink::solver::AffineMap::from_entries(*m), &pc)?;
        println!(
            "map {:?}: J = {}  conditions (+, -) = ({}, {})  converged {:.0}%  max distance to affine {:.3e}  max |h| {:.3e}",
            m,
            p.jacobian,
            p.condition_plus,
            p.condition_minus,
            100.0 * p.fraction_converged,
            p.max_distance_to_affine,
            p.max_sff_norm
        );
        // only maps satisfying both conditions carry an expectation
        if p.condition_plus && p.condition_minus && (p.fraction_converged < 1.0 || p.max_distance_to_affine > 1e-6 || p.max_sff_norm > 1e-4) {
            failures.push(format!("map {m:?} did not relax to an affine map"));
        }
        reports.push(p);
    }
    out.write_json("probe.json", &reports)?;
    assert_all(failures)
}
