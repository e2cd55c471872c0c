//! JSON experiment configuration: grid / exponent / boundary / solver
//! descriptors, sweep values and the constants-file pointer.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::{BoundaryData, ExponentField, Grid};
use crate::error::{Error, Result};
use crate::numeric::fnv1a64;
use crate::solvers::SolveConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Solve,
    Aux,
    Oracle1d,
    StabilityThm1,
    StabilityTwoExp,
    Doubling,
    TransformCheck,
    Convergence,
    Calibrate,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Solve => "solve",
            ExperimentKind::Aux => "aux",
            ExperimentKind::Oracle1d => "oracle1d",
            ExperimentKind::StabilityThm1 => "stability-thm1",
            ExperimentKind::StabilityTwoExp => "stability-two-exp",
            ExperimentKind::Doubling => "doubling",
            ExperimentKind::TransformCheck => "transform-check",
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::Calibrate => "calibrate",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub n: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExponentSpec {
    /// p = p0 everywhere.
    Constant { p0: f64 },
    /// p = p0 * exp(<delta, x>); grad ln p = delta exactly.
    Exponential { p0: f64, delta: Vec<f64> },
    /// p = p0 + <slope, x>; grad ln p = slope / p exactly.
    Affine { p0: f64, slope: Vec<f64> },
    /// Explicit nodewise tables.
    Tabulated { p: Vec<f64>, grad_ln_p: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BoundarySpec {
    Constant {
        value: f64,
    },
    Affine {
        offset: f64,
        gradient: Vec<f64>,
    },
    /// f = slope * |x_1 - center| + <tilt, x> + offset; a Lipschitz fold.
    Fold {
        center: f64,
        slope: f64,
        #[serde(default)]
        tilt: Vec<f64>,
        #[serde(default)]
        offset: f64,
    },
    /// Explicit values aligned with the ascending boundary-node order.
    Values {
        values: Vec<f64>,
    },
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub max_iterations: Option<usize>,
    #[serde(default)]
    pub gradient_floor: Option<f64>,
    #[serde(default)]
    pub relaxation: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformSpec {
    pub a: f64,
    /// Defaults to 1 / sup of the transformed field when absent.
    #[serde(default)]
    pub alpha: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    pub fa: f64,
    pub fb: f64,
    #[serde(default)]
    pub quad_tol: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoublingSpec {
    /// Penalty strengths, strictly increasing.
    pub j_values: Vec<f64>,
    /// Transform parameter A for w2 = g(u2+).
    pub a: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: Option<ExperimentKind>,
    pub grid: GridSpec,
    #[serde(default)]
    pub exponent: Option<ExponentSpec>,
    #[serde(default)]
    pub exponent2: Option<ExponentSpec>,
    pub boundary: BoundarySpec,
    #[serde(default)]
    pub solver: SolverSpec,
    /// Sweep values (delta or epsilon), positive and strictly decreasing.
    #[serde(default)]
    pub sweep: Vec<f64>,
    /// Refinement levels for the convergence study (default 3).
    #[serde(default)]
    pub levels: Option<usize>,
    #[serde(default)]
    pub constants_file: Option<String>,
    #[serde(default)]
    pub transform: Option<TransformSpec>,
    #[serde(default)]
    pub oracle: Option<OracleSpec>,
    #[serde(default)]
    pub doubling: Option<DoublingSpec>,
    /// Reserved for randomized property checks; the experiments themselves
    /// are deterministic and ignore it.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.grid.dim;
        if d != 1 && d != 2 {
            return Err(Error::Config(format!("grid.dim must be 1 or 2, got {d}")));
        }
        if self.grid.lower.len() < d || self.grid.upper.len() < d {
            return Err(Error::Config(
                "grid.lower / grid.upper must carry one coordinate per axis".into(),
            ));
        }
        if !self.sweep.is_empty() {
            for w in self.sweep.windows(2) {
                if !(w[1] < w[0]) {
                    return Err(Error::Config(
                        "sweep values must be strictly decreasing".into(),
                    ));
                }
            }
            if self.sweep.iter().any(|&v| !(v > 0.0)) {
                return Err(Error::Config("sweep values must be positive".into()));
            }
        }
        if let Some(db) = &self.doubling {
            if db.j_values.is_empty() {
                return Err(Error::Config("doubling.j_values must be nonempty".into()));
            }
            for w in db.j_values.windows(2) {
                if !(w[1] > w[0]) {
                    return Err(Error::Config(
                        "doubling.j_values must be strictly increasing".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Canonical serialization of the parsed config; whitespace and key
    /// formatting of the input file do not affect it.
    pub fn canonical_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// FNV-1a fingerprint over the canonical config and, when present, the
    /// raw bytes of the constants file.
    pub fn fingerprint(&self) -> Result<String> {
        let mut bytes = self.canonical_json()?.into_bytes();
        if let Some(path) = &self.constants_file {
            bytes.extend_from_slice(&std::fs::read(path)?);
        }
        Ok(format!("{:016x}", fnv1a64(&bytes)))
    }

    pub fn build_grid(&self) -> Result<Arc<Grid>> {
        let g = &self.grid;
        let grid = match g.dim {
            1 => Grid::new_1d(g.lower[0], g.upper[0], g.n)?,
            _ => Grid::new_2d(
                [g.lower[0], g.lower[1]],
                [g.upper[0], g.upper[1]],
                g.n,
            )?,
        };
        Ok(Arc::new(grid))
    }

    pub fn build_boundary(&self, grid: &Grid) -> Result<BoundaryData> {
        build_boundary(&self.boundary, grid)
    }

    pub fn build_solver(&self, grid: &Grid, f: &BoundaryData) -> Result<SolveConfig> {
        let mut cfg = SolveConfig::recommended(grid, f);
        let s = &self.solver;
        if let Some(e) = s.epsilon {
            cfg.epsilon = e;
        }
        if let Some(t) = s.tolerance {
            cfg.tolerance = t;
        }
        if let Some(m) = s.max_iterations {
            cfg.max_iterations = m;
        }
        if let Some(g) = s.gradient_floor {
            cfg.gradient_floor = g;
        }
        if let Some(r) = s.relaxation {
            cfg.relaxation = r;
        }
        Ok(cfg)
    }
}

pub fn build_boundary(spec: &BoundarySpec, grid: &Grid) -> Result<BoundaryData> {
    match spec {
        BoundarySpec::Constant { value } => BoundaryData::constant(grid, *value),
        BoundarySpec::Affine { offset, gradient } => {
            let gx = gradient.first().copied().unwrap_or(0.0);
            let gy = gradient.get(1).copied().unwrap_or(0.0);
            BoundaryData::from_fn(grid, |c| offset + gx * c[0] + gy * c[1])
        }
        BoundarySpec::Fold { center, slope, tilt, offset } => {
            let tx = tilt.first().copied().unwrap_or(0.0);
            let ty = tilt.get(1).copied().unwrap_or(0.0);
            let (c0, s0, off) = (*center, *slope, *offset);
            BoundaryData::from_fn(grid, move |c| {
                off + s0 * (c[0] - c0).abs() + tx * c[0] + ty * c[1]
            })
        }
        BoundarySpec::Values { values } => BoundaryData::new(grid, values.clone()),
    }
}

/// Builds an exponent field from its spec.
pub fn build_exponent(spec: &ExponentSpec, grid: &Arc<Grid>) -> Result<ExponentField> {
    match spec {
        ExponentSpec::Constant { p0 } => ExponentField::constant(grid.clone(), *p0),
        ExponentSpec::Exponential { p0, delta } => {
            let d = vec2(delta);
            ExponentField::exponential(grid.clone(), *p0, d)
        }
        ExponentSpec::Affine { p0, slope } => {
            let s = vec2(slope);
            affine_exponent(grid, *p0, s)
        }
        ExponentSpec::Tabulated { p, grad_ln_p } => {
            let grads: Vec<[f64; 2]> = grad_ln_p.iter().map(|g| vec2(g)).collect();
            ExponentField::tabulated(grid.clone(), p.clone(), grads)
        }
    }
}

/// Rescales the perturbation family so its strength parameter becomes
/// `delta`: the direction vector is normalized and multiplied by `delta`.
pub fn scale_exponent(spec: &ExponentSpec, grid: &Arc<Grid>, delta: f64) -> Result<ExponentField> {
    match spec {
        ExponentSpec::Exponential { p0, delta: dir } => {
            let u = unit(&vec2(dir))?;
            ExponentField::exponential(grid.clone(), *p0, [u[0] * delta, u[1] * delta])
        }
        ExponentSpec::Affine { p0, slope } => {
            let u = unit(&vec2(slope))?;
            affine_exponent(grid, *p0, [u[0] * delta, u[1] * delta])
        }
        _ => Err(Error::Config(
            "sweeps need a scalable exponent family (exponential or affine)".into(),
        )),
    }
}

/// 1D closure form of an analytic exponent spec, optionally rescaled; used
/// by the oracle.
pub fn exponent_closure_1d(
    spec: &ExponentSpec,
    delta: Option<f64>,
) -> Result<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
    match spec {
        ExponentSpec::Constant { p0 } => {
            let p0 = *p0;
            Ok(Box::new(move |_| p0))
        }
        ExponentSpec::Exponential { p0, delta: dir } => {
            let p0 = *p0;
            let d = match delta {
                Some(s) => unit(&vec2(dir))?[0] * s,
                None => vec2(dir)[0],
            };
            Ok(Box::new(move |x| p0 * (d * x).exp()))
        }
        ExponentSpec::Affine { p0, slope } => {
            let p0 = *p0;
            let s = match delta {
                Some(sc) => unit(&vec2(slope))?[0] * sc,
                None => vec2(slope)[0],
            };
            Ok(Box::new(move |x| p0 + s * x))
        }
        ExponentSpec::Tabulated { .. } => Err(Error::Config(
            "oracle experiments need an analytic exponent kind (constant, exponential or affine)"
                .into(),
        )),
    }
}

fn affine_exponent(grid: &Arc<Grid>, p0: f64, slope: [f64; 2]) -> Result<ExponentField> {
    let n = grid.node_count();
    let mut p = Vec::with_capacity(n);
    let mut grad = Vec::with_capacity(n);
    for idx in 0..n {
        let c = grid.coords(idx);
        let v = p0 + slope[0] * c[0] + slope[1] * c[1];
        if !(v > 0.0) {
            return Err(Error::Config(format!(
                "affine exponent becomes nonpositive at node {idx} (p = {v})"
            )));
        }
        p.push(v);
        grad.push([slope[0] / v, slope[1] / v]);
    }
    ExponentField::tabulated(grid.clone(), p, grad)
}

fn vec2(v: &[f64]) -> [f64; 2] {
    [
        v.first().copied().unwrap_or(0.0),
        v.get(1).copied().unwrap_or(0.0),
    ]
}

fn unit(v: &[f64; 2]) -> Result<[f64; 2]> {
    let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
    if !(n > 0.0) {
        return Err(Error::Config(
            "perturbation direction must be a nonzero vector".into(),
        ));
    }
    Ok([v[0] / n, v[1] / n])
}
