//! JSON instance files.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::conjugate::ParamSearch;
use crate::duality::ProblemInstance;
use crate::elementary::{CurvatureSpec, Family, LinearMap, Quadratic};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::objective::{Body, DomainBox, Objective};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema_version: String,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "L")]
    pub l: Vec<Vec<f64>>,
    pub f: ObjectiveDescriptor,
    pub g: ObjectiveDescriptor,
    pub phi: FamilyDescriptor,
    pub psi: FamilyDescriptor,
    #[serde(default)]
    pub search: SearchDescriptor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveKind {
    /// Handled by the closed-form engines unless a domain box is present.
    #[serde(rename = "quadratic")]
    Quadratic,
    /// The same polynomial, evaluated only pointwise by the grid engines.
    #[serde(rename = "blackbox-poly")]
    BlackBoxPoly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveDescriptor {
    pub kind: ObjectiveKind,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub u: Vec<f64>,
    pub c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_box: Option<BoxDescriptor>,
}

/// `null` bounds are infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxDescriptor {
    pub lower: Vec<Option<f64>>,
    pub upper: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDescriptor {
    /// `zero`, `nonneg`, `nonpos`, `fixed:<a>` or `any`.
    pub curvature: String,
    #[serde(default = "default_true")]
    pub constants: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointsPerAxis {
    pub psi_slope: Option<usize>,
    pub x: Option<usize>,
    pub y: Option<usize>,
}

/// Search configuration; omitted fields take the library defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchDescriptor {
    pub psi_slope_box: [f64; 2],
    /// Points on the curvature axis.
    pub psi_curv_grid: usize,
    pub psi_curv_clip: f64,
    /// Cube side used for both the x and y grids.
    pub x_box: [f64; 2],
    pub points_per_axis: PointsPerAxis,
    pub refine_rounds: usize,
}

impl Default for SearchDescriptor {
    fn default() -> Self {
        Self {
            psi_slope_box: [-crate::conjugate::DEFAULT_SLOPE_BOUND, crate::conjugate::DEFAULT_SLOPE_BOUND],
            psi_curv_grid: crate::conjugate::DEFAULT_CURVATURE_POINTS,
            psi_curv_clip: crate::conjugate::DEFAULT_CURVATURE_CLIP,
            x_box: [-10.0, 10.0],
            points_per_axis: PointsPerAxis { psi_slope: None, x: None, y: None },
            refine_rounds: crate::grid::DEFAULT_REFINE_ROUNDS,
        }
    }
}

/// An isotropic elementary function `a|x|^2 + u'x + c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementJson {
    pub a: f64,
    pub u: Vec<f64>,
    #[serde(default)]
    pub c: f64,
}

impl ElementJson {
    pub fn from_quadratic(q: &Quadratic) -> Option<Self> {
        Some(Self {
            a: q.isotropic_curvature(crate::tolerance::global())?,
            u: q.u().iter().copied().collect(),
            c: q.c(),
        })
    }

    pub fn to_quadratic(&self) -> Quadratic {
        Quadratic::isotropic(self.a, DVector::from_vec(self.u.clone()), self.c)
    }
}

/// Formats in the syntax read by [`parse_element`].
impl std::fmt::Display for ElementJson {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let u: Vec<String> = self.u.iter().map(|v| v.to_string()).collect();
        write!(f, "a={},u={},c={}", self.a, u.join(":"), self.c)
    }
}

/// Parses `a=<a>,u=<u1>:<u2>:...,c=<c>` with an optional `r=<r>` entry.
/// Missing `a` and `c` default to zero.
pub fn parse_element(text: &str) -> Result<(ElementJson, Option<f64>)> {
    let mut element = ElementJson { a: 0.0, u: Vec::new(), c: 0.0 };
    let mut r = None;
    let mut seen_u = false;
    let num = |key: &str, v: &str| {
        v.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| field(key, format!("`{v}` is not a finite number")))
    };
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| field("element", format!("expected key=value, found `{part}`")))?;
        match key.trim() {
            "a" => element.a = num("a", value)?,
            "c" => element.c = num("c", value)?,
            "r" => r = Some(num("r", value)?),
            "u" => {
                seen_u = true;
                element.u = value.split(':').map(|v| num("u", v)).collect::<Result<_>>()?;
            }
            other => return Err(field("element", format!("unknown key `{other}`"))),
        }
    }
    if !seen_u {
        return Err(field("u", "missing linear term"));
    }
    Ok((element, r))
}

fn field(name: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        field: name.to_string(),
        message: message.into(),
    }
}

fn matrix(name: &str, rows: &[Vec<f64>], nrows: usize, ncols: usize) -> Result<DMatrix<f64>> {
    if rows.len() != nrows {
        return Err(field(name, format!("expected {nrows} rows, found {}", rows.len())));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(field(&format!("{name}[{i}]"), format!("expected {ncols} entries, found {}", row.len())));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(field(&format!("{name}[{i}]"), "entries must be finite"));
        }
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn parse_curvature(s: &str) -> Result<CurvatureSpec> {
    match s {
        "zero" => Ok(CurvatureSpec::Zero),
        "nonneg" => Ok(CurvatureSpec::NonNegative),
        "nonpos" => Ok(CurvatureSpec::NonPositive),
        "any" => Ok(CurvatureSpec::Any),
        other => match other.strip_prefix("fixed:").map(str::parse::<f64>) {
            Some(Ok(a)) if a.is_finite() => Ok(CurvatureSpec::Fixed(a)),
            _ => Err(field("curvature", format!("unknown curvature `{other}`"))),
        },
    }
}

pub fn curvature_name(c: CurvatureSpec) -> String {
    match c {
        CurvatureSpec::Zero => "zero".into(),
        CurvatureSpec::NonNegative => "nonneg".into(),
        CurvatureSpec::NonPositive => "nonpos".into(),
        CurvatureSpec::Any => "any".into(),
        CurvatureSpec::Fixed(a) => format!("fixed:{a}"),
    }
}

impl FamilyDescriptor {
    fn to_family(&self, name: &str, dim: usize) -> Result<Family> {
        let curvature = parse_curvature(&self.curvature).map_err(|e| match e {
            Error::Parse { message, .. } => field(&format!("{name}.curvature"), message),
            other => other,
        })?;
        Ok(Family {
            dim,
            curvature,
            includes_constants: self.constants,
        })
    }

    fn from_family(f: &Family) -> Self {
        Self {
            curvature: curvature_name(f.curvature),
            constants: f.includes_constants,
        }
    }
}

impl ObjectiveDescriptor {
    fn to_objective(&self, name: &str, dim: usize) -> Result<Objective> {
        let a = matrix(&format!("{name}.A"), &self.a, dim, dim)?;
        if self.u.len() != dim {
            return Err(field(&format!("{name}.u"), format!("expected {dim} entries, found {}", self.u.len())));
        }
        if !self.c.is_finite() || self.u.iter().any(|v| !v.is_finite()) {
            return Err(field(name, "coefficients must be finite"));
        }
        let q = Quadratic::new(a, DVector::from_vec(self.u.clone()), self.c)
            .map_err(|e| field(&format!("{name}.A"), e.to_string()))?;
        let domain = match &self.domain_box {
            None => None,
            Some(b) => {
                let side = |v: &[Option<f64>], inf: f64, which: &str| -> Result<Vec<f64>> {
                    if v.len() != dim {
                        return Err(field(&format!("{name}.domain_box.{which}"), format!("expected {dim} entries")));
                    }
                    Ok(v.iter().map(|x| x.unwrap_or(inf)).collect())
                };
                let lower = side(&b.lower, f64::NEG_INFINITY, "lower")?;
                let upper = side(&b.upper, f64::INFINITY, "upper")?;
                Some(DomainBox::new(lower, upper).map_err(|e| field(&format!("{name}.domain_box"), e.to_string()))?)
            }
        };
        match self.kind {
            ObjectiveKind::Quadratic => match domain {
                None => Ok(Objective::quadratic(q)),
                Some(d) => Objective::quadratic(q).with_domain(d),
            },
            ObjectiveKind::BlackBoxPoly => Objective::sampled_quadratic(q, domain),
        }
    }

    fn from_objective(name: &str, f: &Objective) -> Result<Self> {
        let (kind, q) = match f.body() {
            Body::Quadratic(q) => (ObjectiveKind::Quadratic, q),
            Body::BlackBox { source: Some(q), .. } => (ObjectiveKind::BlackBoxPoly, q),
            Body::BlackBox { source: None, .. } => {
                return Err(Error::InvalidArgument(format!("{name} is an opaque black box and cannot be serialized")))
            }
        };
        let opt = |v: f64| v.is_finite().then_some(v);
        Ok(Self {
            kind,
            a: rows_of(q.a()),
            u: q.u().iter().copied().collect(),
            c: q.c(),
            domain_box: f.domain().map(|d| BoxDescriptor {
                lower: d.lower.iter().copied().map(opt).collect(),
                upper: d.upper.iter().copied().map(opt).collect(),
            }),
        })
    }
}

fn cube_side(grid: &GridSpec) -> Option<(f64, f64, usize)> {
    let (lo, hi, n) = (grid.lower[0], grid.upper[0], grid.points[0]);
    let uniform = grid.lower.iter().all(|v| *v == lo) && grid.upper.iter().all(|v| *v == hi) && grid.points.iter().all(|p| *p == n);
    uniform.then_some((lo, hi, n))
}

impl InstanceFile {
    pub fn to_instance(&self) -> Result<ProblemInstance> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(field("schema_version", format!("expected \"{SCHEMA_VERSION}\", found \"{}\"", self.schema_version)));
        }
        let (n, m) = (self.n, self.m);
        if n == 0 || m == 0 {
            return Err(field("n", "dimensions must be positive"));
        }
        let l = LinearMap::new(matrix("L", &self.l, m, n)?)?;
        let f = self.f.to_objective("f", n)?;
        let g = self.g.to_objective("g", m)?;
        let phi = self.phi.to_family("phi", n)?;
        let psi = self.psi.to_family("psi", m)?;
        let s = &self.search;
        let ppa = &s.points_per_axis;
        let psi_search = ParamSearch::new(psi.clone())
            .with_points(
                s.psi_curv_grid,
                ppa.psi_slope.unwrap_or_else(|| crate::conjugate::default_points(m)),
                s.refine_rounds,
            )
            .with_slope_box(s.psi_slope_box[0], s.psi_slope_box[1]);
        if !(s.psi_curv_clip > 0.0 && s.psi_curv_clip.is_finite()) {
            return Err(field("search.psi_curv_clip", "must be positive and finite"));
        }
        let psi_search = ParamSearch { curvature_clip: s.psi_curv_clip, ..psi_search };
        let grid = |dim: usize, pts: Option<usize>, name: &str| {
            GridSpec::cube(
                dim,
                s.x_box[0],
                s.x_box[1],
                pts.unwrap_or_else(|| crate::conjugate::default_points(dim)),
                s.refine_rounds,
            )
            .map_err(|e| field(name, e.to_string()))
        };
        let inst = ProblemInstance::new(f, g, l, phi, psi)?
            .with_psi_search(psi_search)
            .map_err(|e| field("search", e.to_string()))?
            .with_x_search(grid(n, ppa.x, "search.x_box")?)?
            .with_y_search(grid(m, ppa.y, "search.x_box")?)?;
        Ok(inst)
    }

    pub fn from_instance(inst: &ProblemInstance) -> Result<Self> {
        let ps = &inst.psi_search;
        let (x_lo, x_hi, x_pts) = cube_side(&inst.x_search)
            .ok_or_else(|| Error::InvalidArgument("x grid is not a cube".into()))?;
        let (y_lo, y_hi, y_pts) = cube_side(&inst.y_search)
            .ok_or_else(|| Error::InvalidArgument("y grid is not a cube".into()))?;
        if (x_lo, x_hi) != (y_lo, y_hi)
            || inst.x_search.refine_rounds != ps.refine_rounds
            || inst.y_search.refine_rounds != ps.refine_rounds
        {
            return Err(Error::InvalidArgument("x and y grids must share the box and refine rounds".into()));
        }
        Ok(Self {
            schema_version: SCHEMA_VERSION.into(),
            n: inst.n(),
            m: inst.m(),
            l: rows_of(inst.l.matrix()),
            f: ObjectiveDescriptor::from_objective("f", &inst.f)?,
            g: ObjectiveDescriptor::from_objective("g", &inst.g)?,
            phi: FamilyDescriptor::from_family(&inst.phi),
            psi: FamilyDescriptor::from_family(&inst.psi),
            search: SearchDescriptor {
                psi_slope_box: [ps.slope_lower, ps.slope_upper],
                psi_curv_grid: ps.curvature_points,
                psi_curv_clip: ps.curvature_clip,
                x_box: [x_lo, x_hi],
                points_per_axis: PointsPerAxis {
                    psi_slope: Some(ps.slope_points),
                    x: Some(x_pts),
                    y: Some(y_pts),
                },
                refine_rounds: ps.refine_rounds,
            },
        })
    }
}

/// Parses instance JSON. Errors carry the offending field path and position.
pub fn parse_instance(text: &str) -> Result<ProblemInstance> {
    parse_instance_file(text)?.to_instance()
}

pub fn parse_instance_file(text: &str) -> Result<InstanceFile> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Parse {
            field: if path == "." { "<root>".into() } else { path },
            message: format!("{inner} (line {}, column {})", inner.line(), inner.column()),
        }
    })
}

pub fn instance_to_json(inst: &ProblemInstance) -> Result<String> {
    let file = InstanceFile::from_instance(inst)?;
    Ok(serde_json::to_string_pretty(&file).expect("instance files always serialize"))
}

/// A loaded instance plus sampling warnings about its assumptions.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub instance: ProblemInstance,
    pub warnings: Vec<String>,
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Loaded> {
    let text = fs::read_to_string(path)?;
    let instance = parse_instance(&text)?;
    Ok(Loaded {
        warnings: instance.domain_warnings(),
        instance,
    })
}

pub fn save_instance(inst: &ProblemInstance, path: impl AsRef<Path>) -> Result<()> {
    let mut text = instance_to_json(inst)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
