//! JSON problem files. The schema is documented in `docs/format.md`.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Metric, ProxGeometry, Vector};
use crate::oracles::{CompositeTerm, Function, Growth, MaxType, ProblemInstance, Truth};
use crate::sets::{Halfspace, SetDescriptor};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default)]
    pub name: Option<String>,
    pub dimension: usize,
    pub geometry: GeometrySpec,
    #[serde(rename = "Q")]
    pub set: SetSpec,
    pub objective: ObjectiveSpec,
    #[serde(default)]
    pub psi: Option<PsiSpec>,
    #[serde(default)]
    pub constraints: Vec<FunctionSpec>,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub truth: Option<TruthSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeometrySpec {
    /// `"euclidean"`, `"euclidean-I"` or `"entropy"`.
    Short(String),
    Full(GeometryFull),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "kebab-case")]
pub enum GeometryFull {
    Euclidean {
        #[serde(rename = "B", default)]
        b: Option<MetricSpec>,
    },
    Entropy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub enum MetricSpec {
    Identity,
    Diagonal(Vec<f64>),
    Dense(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SetSpec {
    /// `"whole-space"` or `"simplex"`.
    Short(String),
    Full(SetFull),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "kebab-case")]
pub enum SetFull {
    WholeSpace,
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Halfspaces { halfspaces: Vec<HalfspaceSpec> },
    Simplex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfspaceSpec {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObjectiveSpec {
    /// `"|x|"` (Euclidean norm) or `"|x|_1"`.
    Short(String),
    Components(ComponentsSpec),
    Single(FunctionSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentsSpec {
    pub components: Vec<FunctionSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "type", rename_all = "kebab-case")]
pub enum FunctionSpec {
    Linear {
        a: Vec<f64>,
        #[serde(default)]
        c: f64,
    },
    Quadratic {
        #[serde(rename = "H")]
        h: Vec<Vec<f64>>,
        #[serde(default)]
        b: Option<Vec<f64>>,
        #[serde(default)]
        c: f64,
    },
    Norm {
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        offset: f64,
    },
    L1 {
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        offset: f64,
    },
    Ratio {
        num: Vec<f64>,
        #[serde(default)]
        num_c: f64,
        den: Vec<f64>,
        #[serde(default)]
        den_c: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PsiSpec {
    /// `"zero"`.
    Short(String),
    Full(PsiFull),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "kebab-case")]
pub enum PsiFull {
    Zero,
    Indicator { set: SetSpec },
    Linear { c: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthSpec {
    #[serde(default)]
    pub xstar: Option<Vec<f64>>,
    #[serde(default)]
    pub fstar: Option<f64>,
    #[serde(rename = "M", default)]
    pub m: Option<Vec<f64>>,
    #[serde(rename = "M0", default)]
    pub m0: Option<f64>,
    #[serde(rename = "D", default)]
    pub d: Option<f64>,
    #[serde(rename = "D0", default)]
    pub d0: Option<f64>,
    #[serde(rename = "L", default)]
    pub l: Option<f64>,
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(rename = "L1", default)]
    pub l1: Option<f64>,
    #[serde(default)]
    pub growth: Option<GrowthSpec>,
    #[serde(default)]
    pub multipliers: Option<Vec<f64>>,
    #[serde(default)]
    pub slater_point: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "kebab-case")]
pub enum GrowthSpec {
    Linear { slope: f64 },
    Quadratic { lipschitz: f64, gradient_norm: f64 },
}

/// Reads, parses and validates a problem file.
pub fn load_problem(path: &Path) -> Result<ProblemInstance> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut problem = parse_problem(&text)?;
    if problem.name.is_empty() {
        problem.name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    }
    Ok(problem)
}

/// Parses and validates problem JSON; errors name the offending key path.
pub fn parse_problem(text: &str) -> Result<ProblemInstance> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ProblemFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(if path.is_empty() { ".".to_string() } else { path }, e.into_inner().to_string())
    })?;
    let problem = file.build()?;
    problem.validate()?;
    Ok(problem)
}

fn vector(key: &str, values: &[f64], n: usize) -> Result<Vector> {
    if values.len() != n {
        return Err(Error::config(key, format!("expected {n} entries, got {}", values.len())));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::config(key, "entries must be finite"));
    }
    Ok(Vector::from_column_slice(values))
}

fn matrix(key: &str, rows: &[Vec<f64>], n: usize) -> Result<DMatrix<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::config(key, format!("expected a {n}x{n} matrix")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl GeometrySpec {
    fn build(&self, n: usize) -> Result<ProxGeometry> {
        match self {
            GeometrySpec::Short(s) => match s.as_str() {
                "euclidean" | "euclidean-I" => Ok(ProxGeometry::euclidean()),
                "entropy" => Ok(ProxGeometry::Entropy),
                other => Err(Error::config("geometry", format!("unknown geometry `{other}`"))),
            },
            GeometrySpec::Full(GeometryFull::Entropy) => Ok(ProxGeometry::Entropy),
            GeometrySpec::Full(GeometryFull::Euclidean { b }) => {
                let metric = match b {
                    None | Some(MetricSpec::Identity) => Metric::Identity,
                    Some(MetricSpec::Diagonal(d)) => Metric::diagonal(vector("geometry.B.diagonal", d, n)?)
                        .map_err(|e| Error::config("geometry.B.diagonal", e.to_string()))?,
                    Some(MetricSpec::Dense(rows)) => Metric::dense(matrix("geometry.B.dense", rows, n)?)
                        .map_err(|e| Error::config("geometry.B.dense", e.to_string()))?,
                };
                Ok(ProxGeometry::Euclidean(metric))
            }
        }
    }
}

impl SetSpec {
    fn build(&self, key: &str, n: usize) -> Result<SetDescriptor> {
        let set = match self {
            SetSpec::Short(s) => match s.as_str() {
                "whole-space" => SetDescriptor::WholeSpace,
                "simplex" => SetDescriptor::Simplex,
                other => return Err(Error::config(key, format!("unknown set `{other}`"))),
            },
            SetSpec::Full(SetFull::WholeSpace) => SetDescriptor::WholeSpace,
            SetSpec::Full(SetFull::Simplex) => SetDescriptor::Simplex,
            SetSpec::Full(SetFull::Box { lower, upper }) => SetDescriptor::Box {
                lower: vector(&format!("{key}.lower"), lower, n)?,
                upper: vector(&format!("{key}.upper"), upper, n)?,
            },
            SetSpec::Full(SetFull::Ball { center, radius }) => SetDescriptor::Ball {
                center: vector(&format!("{key}.center"), center, n)?,
                radius: *radius,
            },
            SetSpec::Full(SetFull::Halfspaces { halfspaces }) => SetDescriptor::Halfspaces(
                halfspaces
                    .iter()
                    .enumerate()
                    .map(|(i, h)| Ok(Halfspace::new(vector(&format!("{key}.halfspaces[{i}].normal"), &h.normal, n)?, h.offset)))
                    .collect::<Result<_>>()?,
            ),
        };
        set.validate(n).map_err(|e| Error::config(key, e.to_string()))?;
        Ok(set)
    }
}

impl FunctionSpec {
    fn build(&self, key: &str, n: usize) -> Result<Function> {
        let center = |c: &Option<Vec<f64>>| match c {
            Some(c) => vector(&format!("{key}.center"), c, n),
            None => Ok(Vector::zeros(n)),
        };
        Ok(match self {
            FunctionSpec::Linear { a, c } => Function::Linear { a: vector(&format!("{key}.a"), a, n)?, c: *c },
            FunctionSpec::Quadratic { h, b, c } => {
                let h = matrix(&format!("{key}.H"), h, n)?;
                if (&h - h.transpose()).amax() > 1e-12 * (1.0 + h.amax()) {
                    return Err(Error::config(format!("{key}.H"), "must be symmetric"));
                }
                let b = match b {
                    Some(b) => vector(&format!("{key}.b"), b, n)?,
                    None => Vector::zeros(n),
                };
                Function::Quadratic { h, b, c: *c }
            }
            FunctionSpec::Norm { center: c, scale, offset } => {
                Function::Norm { center: center(c)?, scale: *scale, offset: *offset }
            }
            FunctionSpec::L1 { center: c, scale, offset } => Function::L1 { center: center(c)?, scale: *scale, offset: *offset },
            FunctionSpec::Ratio { num, num_c, den, den_c } => Function::Ratio {
                num: vector(&format!("{key}.num"), num, n)?,
                num_c: *num_c,
                den: vector(&format!("{key}.den"), den, n)?,
                den_c: *den_c,
            },
        })
    }
}

impl ProblemFile {
    pub fn build(&self) -> Result<ProblemInstance> {
        let n = self.dimension;
        if n == 0 {
            return Err(Error::config("dimension", "must be positive"));
        }
        let geometry = self.geometry.build(n)?;
        let set = self.set.build("Q", n)?;
        let components = match &self.objective {
            ObjectiveSpec::Short(s) => match s.as_str() {
                "|x|" => vec![Function::Norm { center: Vector::zeros(n), scale: 1.0, offset: 0.0 }],
                "|x|_1" => vec![Function::L1 { center: Vector::zeros(n), scale: 1.0, offset: 0.0 }],
                other => return Err(Error::config("objective", format!("unknown shorthand `{other}`"))),
            },
            ObjectiveSpec::Single(f) => vec![f.build("objective", n)?],
            ObjectiveSpec::Components(c) => c
                .components
                .iter()
                .enumerate()
                .map(|(i, f)| f.build(&format!("objective.components[{i}]"), n))
                .collect::<Result<_>>()?,
        };
        let psi = match &self.psi {
            None => CompositeTerm::Zero,
            Some(PsiSpec::Short(s)) if s == "zero" => CompositeTerm::Zero,
            Some(PsiSpec::Short(s)) => return Err(Error::config("psi", format!("unknown shorthand `{s}`"))),
            Some(PsiSpec::Full(PsiFull::Zero)) => CompositeTerm::Zero,
            Some(PsiSpec::Full(PsiFull::Indicator { set })) => CompositeTerm::Indicator(set.build("psi.set", n)?),
            Some(PsiSpec::Full(PsiFull::Linear { c })) => CompositeTerm::Linear(vector("psi.c", c, n)?),
        };
        let constraints = self
            .constraints
            .iter()
            .enumerate()
            .map(|(i, f)| f.build(&format!("constraints[{i}]"), n))
            .collect::<Result<Vec<_>>>()?;
        let x0 = match &self.x0 {
            Some(x) => vector("x0", x, n)?,
            None if set == SetDescriptor::Simplex => Vector::from_element(n, 1.0 / n as f64),
            None => Vector::zeros(n),
        };
        let truth = self.truth.clone().unwrap_or_default().build(n, constraints.len())?;
        Ok(ProblemInstance {
            name: self.name.clone().unwrap_or_default(),
            geometry,
            set,
            objective: MaxType { components },
            psi,
            constraints,
            x0,
            truth,
        })
    }
}

impl TruthSpec {
    fn build(self, n: usize, m: usize) -> Result<Truth> {
        let opt_vec = |key: &str, v: &Option<Vec<f64>>, len: usize| v.as_ref().map(|v| vector(key, v, len)).transpose();
        Ok(Truth {
            xstar: opt_vec("truth.xstar", &self.xstar, n)?,
            fstar: self.fstar,
            constraint_bounds: opt_vec("truth.M", &self.m, m)?.map(|v| v.iter().copied().collect()),
            objective_bound: self.m0,
            d: self.d,
            d0: self.d0,
            smoothness: self.l,
            strong_convexity: self.mu,
            constraint_smoothness: self.l1,
            growth: self.growth.map(|g| match g {
                GrowthSpec::Linear { slope } => Growth::Linear { slope },
                GrowthSpec::Quadratic { lipschitz, gradient_norm } => Growth::Quadratic { lipschitz, gradient_norm },
            }),
            multipliers: opt_vec("truth.multipliers", &self.multipliers, m)?.map(|v| v.iter().copied().collect()),
            slater_point: opt_vec("truth.slater_point", &self.slater_point, n)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::gallery;

    #[test]
    fn minimal_file_loads() {
        let p = parse_problem(r#"{"dimension": 1, "geometry": "euclidean-I", "Q": "whole-space", "objective": "|x|"}"#).unwrap();
        assert_eq!(p.dim(), 1);
        assert_eq!(p.f0(&Vector::from_element(1, -3.0)), 3.0);
    }

    #[test]
    fn unknown_keys_name_their_path() {
        let err = parse_problem(
            r#"{"dimension": 2, "geometry": "euclidean", "Q": "whole-space", "objective": "|x|", "truth": {"fstar": 0, "bogus": 1}}"#,
        )
        .unwrap_err();
        match err {
            Error::Config { key, .. } => assert!(key.starts_with("truth"), "{key}"),
            other => panic!("{other:?}"),
        }
        let err = parse_problem(r#"{"dimension": 2, "geometry": "euclidean", "Q": "whole-space"}"#).unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
    }

    #[test]
    fn shipped_optstep_file_matches_gallery() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../problems/optstep-halfspace.json");
        let p = load_problem(&path).unwrap();
        assert_eq!(p, gallery("optstep-halfspace").unwrap());
    }

    #[test]
    fn simplex_needs_compatible_metric() {
        let err = parse_problem(
            r#"{"dimension": 2, "geometry": {"kind": "euclidean", "B": {"diagonal": [1, 2]}}, "Q": "simplex", "objective": "|x|"}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Capability(_) | Error::Config { .. }), "{err:?}");
    }
}
