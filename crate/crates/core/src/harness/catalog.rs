//! Built-in scalar and low-dimensional instances with closed-form answers.

use nalgebra::{dmatrix, dvector};

use crate::duality::ProblemInstance;
use crate::elementary::{CurvatureSpec, Family, LinearMap, Quadratic};
use crate::error::{Error, Result};
use crate::objective::Objective;

pub const CATALOG_NAMES: [&str; 7] = ["ex4.7", "ex4.7-reversed", "ex4.8", "ex5.6", "ex6.10", "ex6.11", "zero"];

/// Prefix accepted wherever an instance path is expected.
pub const CATALOG_PREFIX: &str = "catalog:";

fn build(
    f: Quadratic,
    g: Quadratic,
    l: LinearMap,
    phi: CurvatureSpec,
    psi: CurvatureSpec,
) -> Result<ProblemInstance> {
    let (n, m) = (l.cols(), l.rows());
    ProblemInstance::new(
        Objective::quadratic(f),
        Objective::quadratic(g),
        l,
        Family::new(n, phi),
        Family::new(m, psi),
    )
}

pub fn catalog(name: &str) -> Result<ProblemInstance> {
    let id = LinearMap::identity(1);
    match name {
        // (x+1)^2 + 4x^2 with concave-quadratic Phi and affine Psi.
        "ex4.7" => build(
            Quadratic::scalar(1.0, 2.0, 1.0),
            Quadratic::scalar(4.0, 0.0, 0.0),
            id,
            CurvatureSpec::NonPositive,
            CurvatureSpec::Zero,
        ),
        "ex4.7-reversed" => build(
            Quadratic::scalar(1.0, 2.0, 1.0),
            Quadratic::scalar(4.0, 0.0, 0.0),
            id,
            CurvatureSpec::Zero,
            CurvatureSpec::NonPositive,
        ),
        // 3x^2 + 2y^2 - (x - y - 1)^2.
        "ex4.8" => build(
            Quadratic::new(dmatrix![3.0, 0.0; 0.0, 2.0], dvector![0.0, 0.0], 0.0)?,
            Quadratic::scalar(-1.0, 2.0, -1.0),
            LinearMap::from_rows(&[&[1.0, -1.0]])?,
            CurvatureSpec::NonPositive,
            CurvatureSpec::NonPositive,
        ),
        // x^2 + y^2 + 2(x + y)^2.
        "ex5.6" => build(
            Quadratic::new(dmatrix![1.0, 0.0; 0.0, 1.0], dvector![0.0, 0.0], 0.0)?,
            Quadratic::scalar(2.0, 0.0, 0.0),
            LinearMap::from_rows(&[&[1.0, 1.0]])?,
            CurvatureSpec::NonPositive,
            CurvatureSpec::Zero,
        ),
        "ex6.10" => build(
            Quadratic::scalar(3.0, -3.0, -10.0),
            Quadratic::scalar(-2.0, 1.0, -8.0),
            id,
            CurvatureSpec::NonPositive,
            CurvatureSpec::NonPositive,
        ),
        "ex6.11" => build(
            Quadratic::scalar(1.0, -3.0, -10.0),
            Quadratic::scalar(0.0, 2.0, 1.0),
            id,
            CurvatureSpec::Zero,
            CurvatureSpec::Zero,
        ),
        "zero" => build(Quadratic::zero(1), Quadratic::zero(1), id, CurvatureSpec::Zero, CurvatureSpec::Zero),
        other => Err(Error::UnknownCatalog(other.to_string())),
    }
}

/// Resolves `catalog:<name>` references; `None` for anything else.
pub fn resolve_reference(spec: &str) -> Option<Result<ProblemInstance>> {
    spec.strip_prefix(CATALOG_PREFIX).map(catalog)
}
