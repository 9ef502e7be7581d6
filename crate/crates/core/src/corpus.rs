//! Seeded random corpus of graphs, sample points and constant 2-forms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::forms::ParallelForm2;
use crate::geometry::Immersion;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorpusSpec {
    pub graphs: usize,
    pub points_per_graph: usize,
    pub random_forms: usize,
    /// Sample points lie in `[-box, box]²`.
    pub point_box: f64,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            graphs: 50,
            points_per_graph: 10,
            random_forms: 10,
            point_box: 1.0,
            seed: 20_140_311,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CorpusGraph {
    pub source: [String; 2],
    pub immersion: Immersion,
    pub points: Vec<[f64; 2]>,
}

#[derive(Clone, Debug)]
pub struct Corpus {
    pub graphs: Vec<CorpusGraph>,
    /// Named forms first, then random ones.
    pub forms: Vec<(String, ParallelForm2)>,
}

fn coefficient(rng: &mut ChaCha8Rng, scale: f64) -> String {
    format!("{:.3}", rng.gen_range(-scale..scale))
}

fn linear_argument(rng: &mut ChaCha8Rng) -> String {
    format!("({})*x1 + ({})*x2", coefficient(rng, 1.5), coefficient(rng, 1.5))
}

fn random_term(rng: &mut ChaCha8Rng) -> String {
    let c = coefficient(rng, 0.8);
    let body = match rng.gen_range(0..10) {
        0 => "x1".to_string(),
        1 => "x2".to_string(),
        2 => "x1*x2".to_string(),
        3 => "x1^2".to_string(),
        4 => "x2^2".to_string(),
        5 => "x1^2*x2".to_string(),
        6 => "x2^3".to_string(),
        7 => format!("sin({})", linear_argument(rng)),
        8 => format!("cos({})", linear_argument(rng)),
        _ => format!("exp(({})*x1 + ({})*x2)", coefficient(rng, 0.5), coefficient(rng, 0.5)),
    };
    format!("({c})*{body}")
}

fn random_component(rng: &mut ChaCha8Rng) -> String {
    let terms = rng.gen_range(2..=4);
    (0..terms).map(|_| random_term(rng)).collect::<Vec<_>>().join(" + ")
}

impl Corpus {
    pub fn generate(spec: &CorpusSpec) -> Result<Corpus> {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut graphs = Vec::with_capacity(spec.graphs);
        for _ in 0..spec.graphs {
            let source = [random_component(&mut rng), random_component(&mut rng)];
            let immersion = Immersion::graph(&source[0], &source[1])?;
            let points = (0..spec.points_per_graph)
                .map(|_| {
                    [
                        rng.gen_range(-spec.point_box..spec.point_box),
                        rng.gen_range(-spec.point_box..spec.point_box),
                    ]
                })
                .collect();
            graphs.push(CorpusGraph { source, immersion, points });
        }
        let mut forms: Vec<(String, ParallelForm2)> =
            ParallelForm2::named().iter().map(|(n, f)| (n.to_string(), *f)).collect();
        for k in 0..spec.random_forms {
            let coeff = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            forms.push((format!("random{k}"), ParallelForm2::new(coeff)));
        }
        Ok(Corpus { graphs, forms })
    }

    /// All `(graph index, point)` pairs.
    pub fn samples(&self) -> Vec<(usize, [f64; 2])> {
        self.graphs
            .iter()
            .enumerate()
            .flat_map(|(g, cg)| cg.points.iter().map(move |p| (g, *p)))
            .collect()
    }
}
