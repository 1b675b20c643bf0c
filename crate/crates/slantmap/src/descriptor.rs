//! JSON descriptors for almost-contact structures and maps.
//!
//! Expressions are evaluated with `evalexpr`; the coordinates are the
//! variables `x0, x1, …` and functions such as `math::exp` are available.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use evalexpr::{
    build_operator_tree, ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node,
    Value,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fixtures::structure_fixture;
use crate::geometry::{ConstantMetric, FnMetric, MetricField, WarpedMetric};
use crate::kenmotsu::{AlmostContactStructure, ComponentField, OperatorField};
use crate::linalg::{Matrix, Vector};
use crate::map::{AffineMap, ChartMap, FnMap, PullbackMetric, RiemannianMapInstance};

pub const DESCRIPTOR_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DescriptorError {
    #[error("unsupported schema_version {0}, expected 1")]
    SchemaVersion(u32),
    #[error("{0}")]
    Invalid(String),
    #[error("expression `{expr}`: {message}")]
    Expression { expr: String, message: String },
    #[error("reading {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn default_version() -> u32 {
    DESCRIPTOR_SCHEMA_VERSION
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MetricDescriptor {
    /// Either `diagonal` or a full symmetric `matrix`.
    Constant {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        diagonal: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<Vec<Vec<f64>>>,
    },
    /// `e^{2w} Σ(du² + dv²) + dw²` on `(u_1..u_m, v_1..v_m, w)`.
    Warped { half_dim: usize },
    /// Row-major component expressions in `x0, x1, …`.
    Expression { entries: Vec<Vec<String>> },
}

/// `ψe_from = sign·scale·e_to`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiEntry {
    pub from: usize,
    pub to: usize,
    pub sign: i8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureDescriptor {
    #[serde(default = "default_version")]
    pub schema_version: u32,
    pub dimension: usize,
    pub metric: MetricDescriptor,
    pub psi: Vec<PsiEntry>,
    /// `ξ = ∂_{xi_index}`
    pub xi_index: usize,
    /// `η = dx_{eta_index}`
    pub eta_index: usize,
    /// Ambient `ψ`-sectional curvature when the structure is a space form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space_form: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetRef {
    Fixture { fixture: String },
    Path { path: PathBuf },
    Inline(Box<StructureDescriptor>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MapKind {
    /// `F(x) = offset + A x`
    Linear {
        matrix: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offset: Option<Vec<f64>>,
    },
    /// One expression per target coordinate.
    Expressions { components: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SourceMetric {
    Euclidean,
    /// Pull back the target metric along a linear map (plus the identity on
    /// the kernel), which makes the map Riemannian.
    Pullback,
    Given {
        metric: MetricDescriptor,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapDescriptor {
    #[serde(default = "default_version")]
    pub schema_version: u32,
    pub source_dim: usize,
    #[serde(default = "euclidean")]
    pub source_metric: SourceMetric,
    pub target: TargetRef,
    pub map: MapKind,
    pub base_point: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizontal_basis: Option<Vec<Vec<f64>>>,
}

fn euclidean() -> SourceMetric {
    SourceMetric::Euclidean
}

/// A compiled structure together with its declared space-form constant.
#[derive(Clone)]
pub struct LoadedStructure {
    pub structure: AlmostContactStructure<f64>,
    pub space_form: Option<f64>,
}

#[derive(Clone)]
pub struct LoadedMap {
    pub instance: RiemannianMapInstance<f64>,
    pub space_form: Option<f64>,
}

fn invalid(msg: impl Into<String>) -> DescriptorError {
    DescriptorError::Invalid(msg.into())
}

fn read(path: &Path) -> Result<String, DescriptorError> {
    std::fs::read_to_string(path).map_err(|e| DescriptorError::Io {
        path: path.to_owned(),
        message: e.to_string(),
    })
}

fn check_version(v: u32) -> Result<(), DescriptorError> {
    if v == DESCRIPTOR_SCHEMA_VERSION {
        Ok(())
    } else {
        Err(DescriptorError::SchemaVersion(v))
    }
}

/// Expressions compiled once and evaluated at coordinate points.
#[derive(Clone)]
struct Compiled {
    nodes: Vec<Node<DefaultNumericTypes>>,
    dim: usize,
}

impl Compiled {
    fn new(exprs: &[String], dim: usize) -> Result<Self, DescriptorError> {
        let nodes = exprs
            .iter()
            .map(|e| {
                build_operator_tree::<DefaultNumericTypes>(e).map_err(|err| {
                    DescriptorError::Expression {
                        expr: e.clone(),
                        message: err.to_string(),
                    }
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let c = Self { nodes, dim };
        let probe = vec![0.5; dim];
        for (i, e) in exprs.iter().enumerate() {
            c.eval_one(i, &probe)
                .map_err(|message| DescriptorError::Expression {
                    expr: e.clone(),
                    message,
                })?;
        }
        Ok(c)
    }

    fn context(&self, x: &[f64]) -> HashMapContext<DefaultNumericTypes> {
        let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
        for (i, &v) in x.iter().enumerate().take(self.dim) {
            ctx.set_value(format!("x{i}"), Value::Float(v))
                .expect("float variables are accepted");
        }
        ctx
    }

    fn eval_one(&self, i: usize, x: &[f64]) -> Result<f64, String> {
        self.nodes[i]
            .eval_number_with_context(&self.context(x))
            .map_err(|e| e.to_string())
    }

    fn eval_all(&self, x: &[f64]) -> Vec<f64> {
        let ctx = self.context(x);
        self.nodes
            .iter()
            .map(|n| n.eval_number_with_context(&ctx).unwrap_or(f64::NAN))
            .collect()
    }
}

fn square_rows(rows: &[Vec<f64>], n: usize, what: &str) -> Result<Matrix<f64>, DescriptorError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(invalid(format!("{what} must be {n}×{n}")));
    }
    Ok(Matrix::from_rows_f64(rows))
}

impl MetricDescriptor {
    pub fn build(&self, dim: usize) -> Result<Arc<dyn MetricField<f64>>, DescriptorError> {
        match self {
            Self::Constant {
                diagonal: Some(d),
                matrix: None,
            } => {
                if d.len() != dim {
                    return Err(invalid(format!(
                        "diagonal has {} entries, dimension is {dim}",
                        d.len()
                    )));
                }
                Ok(Arc::new(
                    ConstantMetric::diagonal(d).map_err(|e| invalid(e.to_string()))?,
                ))
            }
            Self::Constant {
                diagonal: None,
                matrix: Some(m),
            } => {
                let m = square_rows(m, dim, "metric matrix")?;
                let metric = crate::frame::Metric::new(m).map_err(|e| invalid(e.to_string()))?;
                Ok(Arc::new(ConstantMetric::new(metric)))
            }
            Self::Constant { .. } => Err(invalid(
                "constant metric needs exactly one of `diagonal` or `matrix`",
            )),
            Self::Warped { half_dim } => {
                if 2 * half_dim + 1 != dim {
                    return Err(invalid(format!(
                        "warped metric of half-dimension {half_dim} has dimension {}",
                        2 * half_dim + 1
                    )));
                }
                Ok(Arc::new(WarpedMetric::new(*half_dim)))
            }
            Self::Expression { entries } => {
                if entries.len() != dim || entries.iter().any(|r| r.len() != dim) {
                    return Err(invalid(format!("metric expressions must be {dim}×{dim}")));
                }
                let flat: Vec<String> = entries.iter().flatten().cloned().collect();
                let compiled = Compiled::new(&flat, dim)?;
                Ok(Arc::new(FnMetric::new(dim, move |p: &[f64]| {
                    let v = compiled.eval_all(p);
                    Matrix::from_fn(dim, dim, |i, j| v[i * dim + j])
                })))
            }
        }
    }
}

impl StructureDescriptor {
    pub fn from_json(s: &str) -> Result<Self, DescriptorError> {
        let d: Self = serde_json::from_str(s)?;
        check_version(d.schema_version)?;
        Ok(d)
    }

    pub fn from_path(path: &Path) -> Result<Self, DescriptorError> {
        Self::from_json(&read(path)?)
    }

    pub fn psi_matrix(&self) -> Result<Matrix<f64>, DescriptorError> {
        let n = self.dimension;
        let mut m = Matrix::zeros(n, n);
        for e in &self.psi {
            if e.from >= n || e.to >= n {
                return Err(invalid(format!(
                    "ψ entry ({}, {}) is out of range",
                    e.from, e.to
                )));
            }
            if e.sign != 1 && e.sign != -1 {
                return Err(invalid(format!("ψ sign must be ±1, got {}", e.sign)));
            }
            m[(e.to, e.from)] = f64::from(e.sign) * e.scale.unwrap_or(1.0);
        }
        Ok(m)
    }

    pub fn build(&self) -> Result<LoadedStructure, DescriptorError> {
        let n = self.dimension;
        if self.xi_index >= n || self.eta_index >= n {
            return Err(invalid("ξ or η index out of range"));
        }
        let structure = AlmostContactStructure::new(
            self.metric.build(n)?,
            OperatorField::Constant(self.psi_matrix()?),
            ComponentField::Constant(Vector::basis(n, self.xi_index)),
            ComponentField::Constant(Vector::basis(n, self.eta_index)),
        );
        Ok(LoadedStructure {
            structure,
            space_form: self.space_form,
        })
    }
}

/// Loads a structure from a descriptor file or a built-in fixture id.
pub fn load_structure(
    path: Option<&Path>,
    fixture: Option<&str>,
) -> Result<LoadedStructure, crate::Error> {
    match (path, fixture) {
        (Some(p), _) => Ok(StructureDescriptor::from_path(p)?.build()?),
        (None, Some(id)) => {
            let f = structure_fixture(id)?;
            Ok(LoadedStructure {
                structure: f.structure,
                space_form: f.space_form,
            })
        }
        (None, None) => Err(invalid("need a descriptor path or a fixture id").into()),
    }
}

impl MapDescriptor {
    pub fn from_json(s: &str) -> Result<Self, DescriptorError> {
        let d: Self = serde_json::from_str(s)?;
        check_version(d.schema_version)?;
        Ok(d)
    }

    pub fn from_path(path: &Path) -> Result<Self, DescriptorError> {
        Self::from_json(&read(path)?)
    }

    /// Relative target paths resolve against `base_dir`.
    pub fn build(&self, base_dir: Option<&Path>) -> Result<LoadedMap, crate::Error> {
        let target = match &self.target {
            TargetRef::Fixture { fixture } => {
                let f = structure_fixture(fixture)?;
                LoadedStructure {
                    structure: f.structure,
                    space_form: f.space_form,
                }
            }
            TargetRef::Path { path } => {
                let full = match base_dir {
                    Some(b) if path.is_relative() => b.join(path),
                    _ => path.clone(),
                };
                StructureDescriptor::from_path(&full)?.build()?
            }
            TargetRef::Inline(d) => {
                check_version(d.schema_version)?;
                d.build()?
            }
        };
        let n = self.source_dim;
        let m = target.structure.dim();
        if self.base_point.len() != n {
            return Err(invalid(format!(
                "base point has {} coordinates, source dimension is {n}",
                self.base_point.len()
            ))
            .into());
        }
        let (map, affine): (Arc<dyn ChartMap<f64>>, Option<AffineMap<f64>>) = match &self.map {
            MapKind::Linear { matrix, offset } => {
                if matrix.len() != m || matrix.iter().any(|r| r.len() != n) {
                    return Err(invalid(format!("linear map must be {m}×{n}")).into());
                }
                let offset = Vector::new(offset.clone().unwrap_or_else(|| vec![0.0; m]));
                let a = AffineMap::new(offset, Matrix::from_rows_f64(matrix))?;
                (Arc::new(a.clone()), Some(a))
            }
            MapKind::Expressions { components } => {
                if components.len() != m {
                    return Err(invalid(format!(
                        "need {m} component expressions, got {}",
                        components.len()
                    ))
                    .into());
                }
                let compiled = Compiled::new(components, n)?;
                (
                    Arc::new(FnMap::new(n, m, move |x: &[f64]| {
                        Vector::new(compiled.eval_all(x))
                    })),
                    None,
                )
            }
        };
        let source: Arc<dyn MetricField<f64>> = match &self.source_metric {
            SourceMetric::Euclidean => Arc::new(ConstantMetric::euclidean(n)),
            SourceMetric::Given { metric } => metric.build(n)?,
            SourceMetric::Pullback => {
                let a =
                    affine.ok_or_else(|| invalid("a pullback source metric needs a linear map"))?;
                Arc::new(PullbackMetric::new(a, target.structure.metric.clone())?)
            }
        };
        let mut instance =
            RiemannianMapInstance::new(source, target.structure, map, self.base_point.clone())?;
        if let Some(h) = &self.horizontal_basis {
            if h.iter().any(|v| v.len() != n) {
                return Err(
                    invalid("horizontal basis vectors must have the source dimension").into(),
                );
            }
            instance =
                instance.with_horizontal_basis(h.iter().map(|v| Vector::new(v.clone())).collect());
        }
        Ok(LoadedMap {
            instance,
            space_form: target.space_form,
        })
    }
}

/// Loads a map descriptor from a file.
pub fn load_map(path: &Path) -> Result<LoadedMap, crate::Error> {
    let d = MapDescriptor::from_path(path)?;
    d.build(path.parent())
}

/// Reads an algebraic `(c, profile, ζ)` instance, as written into sweep findings.
pub fn load_algebraic(
    path: &Path,
) -> Result<crate::falsify::FalsificationInstance, DescriptorError> {
    Ok(serde_json::from_str(&read(path)?)?)
}
