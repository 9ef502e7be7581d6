//! Run configuration: a TOML file with nested sections, every key
//! overridable by a dotted flag (`--solve.N 48`).

use std::path::Path;

use graphshrink::integrals::{QuadratureGrid, QuadratureRule};
use graphshrink::solver::{AffineMap, SolverConfig};
use graphshrink::{Immersion, ParallelForm2};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub surface: SurfaceConfig,
    /// `eta1`, `eta2`, `etaP`, `etaPP` or `w12,w13,w14,w23,w24,w34`.
    pub form: String,
    pub grid: GridConfig,
    pub verify: VerifyConfig,
    pub star: StarConfig,
    pub svd: SvdConfig,
    pub solve: SolveConfig,
    pub growth: GrowthConfig,
    pub chain: ChainConfig,
    pub probe: ProbeSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 20_140_311,
            surface: SurfaceConfig::default(),
            form: "etaP".into(),
            grid: GridConfig::default(),
            verify: VerifyConfig::default(),
            star: StarConfig::default(),
            svd: SvdConfig::default(),
            solve: SolveConfig::default(),
            growth: GrowthConfig::default(),
            chain: ChainConfig::default(),
            probe: ProbeSection::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurfaceConfig {
    /// `graph`, `plane`, `torus` or `discrete`.
    pub kind: String,
    pub f1: String,
    pub f2: String,
    /// Plane: `x ↦ (x + offset[0..2], linear·x + offset[2..4])`, linear row-major.
    pub linear: [f64; 4],
    pub offset: [f64; 4],
    pub r1: f64,
    pub r2: f64,
    /// Discrete: a grid CSV `x1,x2,f1,f2` as written by `solve`.
    pub grid_csv: String,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        SurfaceConfig {
            kind: "graph".into(),
            f1: "0".into(),
            f2: "0".into(),
            linear: [0.0; 4],
            offset: [0.0; 4],
            r1: std::f64::consts::SQRT_2,
            r2: std::f64::consts::SQRT_2,
            grid_csv: String::new(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Half-width of the parameter square; unused on the torus.
    pub radius: f64,
    pub cells: usize,
    /// `gl4` or `midpoint`.
    pub rule: String,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { radius: 4.0, cells: 64, rule: "gl4".into() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// `full` or `quick`.
    pub suite: String,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { suite: "full".into() }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StarConfig {
    pub at: [f64; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvdConfig {
    /// `df` row-major: `[∂1 f1, ∂2 f1, ∂1 f2, ∂2 f2]`.
    pub matrix: [f64; 4],
}

impl Default for SvdConfig {
    fn default() -> Self {
        SvdConfig { matrix: [1.0, 0.0, 0.0, 1.0] }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "R")]
    pub r: f64,
    /// Linear boundary map row-major.
    pub boundary_map: [f64; 4],
    pub perturbation: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub damping_init: f64,
    pub damping_increase: f64,
    pub damping_decrease: f64,
    pub damping_max: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        let s = SolverConfig::default();
        SolveConfig {
            n: 32,
            r: 3.0,
            boundary_map: [0.0, 1.0, -1.0, 0.0],
            perturbation: 0.1,
            tol: s.tol,
            max_iter: s.max_iter,
            damping_init: s.damping_init,
            damping_increase: s.damping_increase,
            damping_decrease: s.damping_decrease,
            damping_max: s.damping_max,
        }
    }
}

impl SolveConfig {
    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            damping_init: self.damping_init,
            damping_increase: self.damping_increase,
            damping_decrease: self.damping_decrease,
            damping_max: self.damping_max,
        }
    }

    pub fn boundary(&self) -> AffineMap {
        AffineMap::from_entries(self.boundary_map)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowthConfig {
    pub radii: Vec<f64>,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        GrowthConfig { radii: vec![1.0, 2.0, 4.0, 8.0] }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainConfig {
    pub r: f64,
    /// A form (g = ∗Ω) or `expr:<expression in x1, x2>`.
    pub g: String,
    /// `zero`, `curvature_plus` or `curvature_minus`.
    pub k: String,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig { r: 2.0, g: "etaP".into(), k: "zero".into() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSection {
    /// Linear boundary maps, row-major.
    pub maps: Vec<[f64; 4]>,
    pub seeds: usize,
}

impl Default for ProbeSection {
    fn default() -> Self {
        ProbeSection { maps: vec![[0.0; 4], [0.0, 1.0, -1.0, 0.0]], seeds: 5 }
    }
}

fn config_error(message: impl Into<String>) -> CliError {
    CliError::Config(message.into())
}

/// A bare override value is read as a TOML value when it parses as one
/// (numbers, arrays, quoted strings) and as a string otherwise.
fn parse_value(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

fn set_dotted(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<(), CliError> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| config_error(format!("empty key {key:?}")))?;
    let mut cur = table;
    for p in parts {
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| config_error(format!("{key}: {p} is not a section")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

/// Parses `--a.b value` and `--a.b=value` pairs.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let key = a
            .strip_prefix("--")
            .ok_or_else(|| config_error(format!("unexpected argument {a:?}; overrides look like --section.key value")))?;
        if let Some((k, v)) = key.split_once('=') {
            out.push((k.to_string(), v.to_string()));
        } else {
            let v = it.next().ok_or_else(|| config_error(format!("override --{key} needs a value")))?;
            out.push((key.to_string(), v.clone()));
        }
    }
    Ok(out)
}

impl RunConfig {
    /// Defaults, then the file, then overrides in order.
    pub fn resolve(file: Option<&Path>, overrides: &[(String, String)]) -> Result<RunConfig, CliError> {
        let mut table = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
                toml::from_str::<toml::Table>(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))?
            }
            None => toml::Table::new(),
        };
        for (k, v) in overrides {
            set_dotted(&mut table, k, parse_value(v))?;
        }
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| config_error(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if !matches!(self.verify.suite.as_str(), "full" | "quick") {
            return Err(config_error(format!("verify.suite must be full or quick, got {:?}", self.verify.suite)));
        }
        if !matches!(self.chain.k.as_str(), "zero" | "curvature_plus" | "curvature_minus") {
            return Err(config_error(format!(
                "chain.k must be zero, curvature_plus or curvature_minus, got {:?}",
                self.chain.k
            )));
        }
        self.form()?;
        self.rule()?;
        Ok(())
    }

    pub fn form(&self) -> Result<ParallelForm2, CliError> {
        self.form.parse().map_err(|e: graphshrink::Error| config_error(format!("form: {e}")))
    }

    pub fn rule(&self) -> Result<QuadratureRule, CliError> {
        match self.grid.rule.as_str() {
            "gl4" => Ok(QuadratureRule::GaussLegendre4),
            "midpoint" => Ok(QuadratureRule::Midpoint),
            other => Err(config_error(format!("grid.rule must be gl4 or midpoint, got {other:?}"))),
        }
    }

    pub fn immersion(&self) -> Result<Immersion, CliError> {
        let s = &self.surface;
        let m = |a: [f64; 4]| [[a[0], a[1]], [a[2], a[3]]];
        match s.kind.as_str() {
            "graph" => Ok(Immersion::graph(&s.f1, &s.f2)?),
            "plane" => Ok(Immersion::plane(m(s.linear), s.offset)),
            "torus" => Ok(Immersion::torus(s.r1, s.r2)?),
            "discrete" => read_grid_csv(Path::new(&s.grid_csv)),
            other => Err(config_error(format!("surface.kind must be graph, plane, torus or discrete, got {other:?}"))),
        }
    }

    /// The parameter square of half-width `radius`, or the full torus.
    pub fn grid_with_radius(&self, radius: f64) -> Result<QuadratureGrid, CliError> {
        let rule = self.rule()?;
        if self.surface.kind == "torus" {
            let tau = 2.0 * std::f64::consts::PI;
            return Ok(QuadratureGrid::new([0.0, tau], [0.0, tau], [self.grid.cells; 2], rule)?);
        }
        Ok(QuadratureGrid::square(radius, self.grid.cells, rule)?)
    }

    pub fn grid(&self) -> Result<QuadratureGrid, CliError> {
        self.grid_with_radius(self.grid.radius)
    }
}

/// Reads `x1,x2,f1,f2` rows on a square grid, `x1` varying slowest.
fn read_grid_csv(path: &Path) -> Result<Immersion, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (line_no, line) in text.lines().enumerate().skip(1) {
        let fields: Result<Vec<f64>, _> = line.split(',').map(|v| v.trim().parse::<f64>()).collect();
        match fields {
            Ok(v) if v.len() == 4 => rows.push([v[0], v[1], v[2], v[3]]),
            _ => return Err(config_error(format!("{}:{}: expected x1,x2,f1,f2", path.display(), line_no + 1))),
        }
    }
    let side = (rows.len() as f64).sqrt().round() as usize;
    if side < 2 || side * side != rows.len() {
        return Err(config_error(format!("{}: {} rows do not form a square grid", path.display(), rows.len())));
    }
    let radius = -rows[0][0];
    let values = rows.iter().map(|r| [r[2], r[3]]).collect();
    let grid = graphshrink::geometry::GridInterpolant::new(side - 1, radius, values)?;
    Ok(Immersion::Discrete(grid))
}
