//! Phi-conjugates `f*(phi) = sup_x phi(x) - f(x)`, biconjugates, and
//! epsilon-subdifferential membership via the Fenchel-type inequality
//! `f(x) + f*(phi) <= phi(x) + eps`.
//!
//! Two engines compute conjugates. The closed-form engine handles quadratic
//! objectives defined on all of R^n exactly. The grid engine maximizes over a
//! [`GridSpec`] and only ever yields a lower bound of the true supremum.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::elementary::{infimum_spectral, CurvatureSpec, Family, Quadratic};
use crate::error::{check_dim, Error, Result};
use crate::grid::{self, GridSpec, DEFAULT_POINTS, DEFAULT_REFINE_ROUNDS};
use crate::objective::Objective;
use crate::tolerance;

/// Slack added to `eps` in membership tests.
pub const MEMBERSHIP_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineKind {
    ClosedForm,
    Grid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateValue {
    pub value: f64,
    pub maximizer: Option<DVector<f64>>,
    pub engine: EngineKind,
    /// Every grid point was outside `dom f`.
    pub improper_window: bool,
}

impl ConjugateValue {
    /// Grid values are lower bounds of the true supremum.
    pub fn grid_truncated(&self) -> bool {
        self.engine == EngineKind::Grid
    }
}

/// Exact `f*(phi)` for a quadratic `f` on all of R^n, with the global tolerance.
pub fn conjugate_closed_form(f: &Quadratic, phi: &Quadratic) -> Result<ConjugateValue> {
    conjugate_closed_form_tol(f, phi, tolerance::global())
}

pub fn conjugate_closed_form_tol(f: &Quadratic, phi: &Quadratic, tol: f64) -> Result<ConjugateValue> {
    check_dim("conjugate", f.dim(), phi.dim())?;
    let inf = f.sub(phi)?.infimum(tol);
    Ok(ConjugateValue {
        value: -inf.value,
        maximizer: inf.point,
        engine: EngineKind::ClosedForm,
        improper_window: false,
    })
}

/// `max_x phi(x) - f(x)` over the grid, skipping points where `f = +inf`.
pub fn conjugate_grid(f: &Objective, phi: &Quadratic, grid: &GridSpec) -> Result<ConjugateValue> {
    check_dim("conjugate", f.dim(), phi.dim())?;
    check_dim("conjugate grid", f.dim(), grid.dim())?;
    grid.validate()?;
    Ok(grid_value(f, phi, grid))
}

fn grid_value(f: &Objective, phi: &Quadratic, grid: &GridSpec) -> ConjugateValue {
    let out = grid::maximize_validated(grid, |x| {
        let fx = f.value(x);
        if fx == f64::INFINITY {
            f64::NEG_INFINITY
        } else {
            phi.value_at(x) - fx
        }
    });
    let improper_window = out.finite_evaluations == 0;
    ConjugateValue {
        value: out.value,
        maximizer: out.argmax.map(DVector::from_vec),
        engine: EngineKind::Grid,
        improper_window,
    }
}

/// How a conjugate is computed.
#[derive(Debug, Clone, PartialEq)]
pub enum Engine {
    ClosedForm,
    Grid(GridSpec),
}

impl Engine {
    /// Closed form when `f` is a full-space quadratic, otherwise the grid.
    pub fn auto(f: &Objective, grid: &GridSpec) -> Engine {
        if f.as_full_quadratic().is_some() {
            Engine::ClosedForm
        } else {
            Engine::Grid(grid.clone())
        }
    }
}

pub fn conjugate(f: &Objective, phi: &Quadratic, engine: &Engine) -> Result<ConjugateValue> {
    match engine {
        Engine::ClosedForm => {
            let q = f.as_full_quadratic().ok_or_else(|| {
                Error::InvalidArgument(
                    "closed-form engine needs a quadratic objective without a domain box".into(),
                )
            })?;
            conjugate_closed_form(q, phi)
        }
        Engine::Grid(grid) => conjugate_grid(f, phi, grid),
    }
}

/// Repeated conjugation of one objective. For a full-space quadratic the
/// eigen-decomposition of its matrix is computed once, so isotropic
/// arguments cost a single spectral pass.
#[derive(Debug, Clone)]
pub struct Conjugator {
    inner: Inner,
    tol: f64,
}

#[derive(Debug, Clone)]
enum Inner {
    Spectral {
        f: Quadratic,
        values: DVector<f64>,
        vectors: DMatrix<f64>,
    },
    Grid {
        f: Objective,
        grid: GridSpec,
    },
}

impl Conjugator {
    pub fn new(f: &Objective, grid: &GridSpec) -> Result<Self> {
        let inner = match f.as_full_quadratic() {
            Some(q) => Self::spectral(q),
            None => {
                check_dim("conjugate grid", f.dim(), grid.dim())?;
                grid.validate()?;
                Inner::Grid {
                    f: f.clone(),
                    grid: grid.clone(),
                }
            }
        };
        Ok(Self {
            inner,
            tol: tolerance::global(),
        })
    }

    pub fn for_quadratic(q: &Quadratic) -> Self {
        Self {
            inner: Self::spectral(q),
            tol: tolerance::global(),
        }
    }

    fn spectral(q: &Quadratic) -> Inner {
        let eig = SymmetricEigen::new(q.a().clone());
        Inner::Spectral {
            f: q.clone(),
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.inner {
            Inner::Spectral { f, .. } => f.dim(),
            Inner::Grid { f, .. } => f.dim(),
        }
    }

    pub fn engine(&self) -> EngineKind {
        match self.inner {
            Inner::Spectral { .. } => EngineKind::ClosedForm,
            Inner::Grid { .. } => EngineKind::Grid,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.engine() == EngineKind::ClosedForm
    }

    pub fn conjugate(&self, phi: &Quadratic) -> Result<ConjugateValue> {
        check_dim("conjugate", self.dim(), phi.dim())?;
        match &self.inner {
            Inner::Spectral { f, .. } => conjugate_closed_form_tol(f, phi, self.tol),
            Inner::Grid { f, grid } => Ok(grid_value(f, phi, grid)),
        }
    }

    /// `f*(a|x|^2 + u'x + c)`; `u.len()` must equal the dimension.
    pub fn isotropic(&self, a: f64, u: &[f64], c: f64) -> f64 {
        debug_assert_eq!(u.len(), self.dim());
        match &self.inner {
            Inner::Spectral { f, values, vectors } => {
                let shifted = values.map(|l| l - a);
                let lin = f.u() - DVector::from_column_slice(u);
                -infimum_spectral(&shifted, vectors, &lin, f.c() - c, self.tol).value
            }
            Inner::Grid { f, grid } => {
                let phi = Quadratic::isotropic(a, DVector::from_column_slice(u), c);
                grid_value(f, &phi, grid).value
            }
        }
    }
}

pub const DEFAULT_CURVATURE_POINTS: usize = 21;
pub const DEFAULT_CURVATURE_CLIP: f64 = 10.0;
pub const DEFAULT_SLOPE_BOUND: f64 = 10.0;

/// Finite search over a family: an optional curvature axis followed by one
/// axis per slope coordinate. Constants are fixed at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSearch {
    pub family: Family,
    pub curvature_points: usize,
    pub curvature_clip: f64,
    pub slope_lower: f64,
    pub slope_upper: f64,
    pub slope_points: usize,
    pub refine_rounds: usize,
}

impl ParamSearch {
    pub fn new(family: Family) -> Self {
        let slope_points = default_points(family.dim);
        Self {
            family,
            curvature_points: DEFAULT_CURVATURE_POINTS,
            curvature_clip: DEFAULT_CURVATURE_CLIP,
            slope_lower: -DEFAULT_SLOPE_BOUND,
            slope_upper: DEFAULT_SLOPE_BOUND,
            slope_points,
            refine_rounds: DEFAULT_REFINE_ROUNDS,
        }
    }

    pub fn with_points(mut self, curvature_points: usize, slope_points: usize, refine_rounds: usize) -> Self {
        self.curvature_points = curvature_points;
        self.slope_points = slope_points;
        self.refine_rounds = refine_rounds;
        self
    }

    pub fn with_slope_box(mut self, lower: f64, upper: f64) -> Self {
        self.slope_lower = lower;
        self.slope_upper = upper;
        self
    }

    pub fn dim(&self) -> usize {
        self.family.dim
    }

    fn curvature_axis(&self) -> Option<(f64, f64)> {
        if !self.family.curvature.is_free() {
            return None;
        }
        let (lo, hi) = self.family.curvature.search_range(self.curvature_clip);
        (lo < hi).then_some((lo, hi))
    }

    fn pinned_curvature(&self) -> f64 {
        match self.family.curvature {
            CurvatureSpec::NonNegative | CurvatureSpec::NonPositive | CurvatureSpec::Any => 0.0,
            other => other.pinned(),
        }
    }

    /// Whether parameter vectors start with a curvature coordinate.
    pub fn has_curvature_axis(&self) -> bool {
        self.curvature_axis().is_some()
    }

    pub fn param_dim(&self) -> usize {
        self.dim() + usize::from(self.has_curvature_axis())
    }

    pub fn grid(&self) -> Result<GridSpec> {
        let n = self.dim();
        let mut lower = Vec::with_capacity(n + 1);
        let mut upper = Vec::with_capacity(n + 1);
        let mut points = Vec::with_capacity(n + 1);
        if let Some((lo, hi)) = self.curvature_axis() {
            lower.push(lo);
            upper.push(hi);
            points.push(self.curvature_points);
        }
        lower.extend(std::iter::repeat_n(self.slope_lower, n));
        upper.extend(std::iter::repeat_n(self.slope_upper, n));
        points.extend(std::iter::repeat_n(self.slope_points, n));
        let spec = GridSpec {
            lower,
            upper,
            points,
            refine_rounds: self.refine_rounds,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Curvature and slope slice of a parameter vector.
    pub fn split<'a>(&self, params: &'a [f64]) -> (f64, &'a [f64]) {
        if self.has_curvature_axis() {
            (params[0], &params[1..])
        } else {
            (self.pinned_curvature(), params)
        }
    }

    pub fn element(&self, params: &[f64]) -> Quadratic {
        let (a, u) = self.split(params);
        Quadratic::isotropic(a, DVector::from_column_slice(u), 0.0)
    }

    /// Parameters of an isotropic family member, if `q` is one.
    pub fn params_of(&self, q: &Quadratic, tol: f64) -> Option<Vec<f64>> {
        if !self.family.contains(q, tol) {
            return None;
        }
        let a = q.isotropic_curvature(tol).unwrap_or(0.0);
        let mut p = Vec::with_capacity(self.param_dim());
        if self.has_curvature_axis() {
            p.push(a);
        }
        p.extend(q.u().iter().copied());
        Some(p)
    }

    /// Points of the unrefined grid, in flattened order.
    pub fn candidates(&self) -> Result<Vec<Vec<f64>>> {
        Ok(self.grid()?.nodes())
    }
}

/// Points per axis that keep one search round around 10^4 to 10^5 evaluations.
pub fn default_points(dim: usize) -> usize {
    match dim {
        0 | 1 => DEFAULT_POINTS,
        2 => 41,
        _ => 21,
    }
}

/// Grid-truncated biconjugate value.
#[derive(Debug, Clone, PartialEq)]
pub struct BiconjugateValue {
    /// Lower bound of `f**(x)`; `-inf` when no searched member had a finite conjugate.
    pub value: f64,
    pub params: Option<Vec<f64>>,
    pub grid_truncated: bool,
}

/// `sup_phi phi(x) - f*(phi)` over the parameter grid. `x_grid` is used only
/// when `f` needs the grid engine.
pub fn biconjugate_at(
    f: &Objective,
    search: &ParamSearch,
    x: &DVector<f64>,
    x_grid: &GridSpec,
) -> Result<BiconjugateValue> {
    check_dim("biconjugate", f.dim(), x.len())?;
    check_dim("biconjugate family", f.dim(), search.dim())?;
    let conj = Conjugator::new(f, x_grid)?;
    biconjugate_with(&conj, search, x)
}

pub fn biconjugate_with(
    conj: &Conjugator,
    search: &ParamSearch,
    x: &DVector<f64>,
) -> Result<BiconjugateValue> {
    let spec = search.grid()?;
    let xs = x.as_slice();
    let sq: f64 = xs.iter().map(|v| v * v).sum();
    let out = grid::maximize_validated(&spec, |p| {
        let (a, u) = search.split(p);
        let fs = conj.isotropic(a, u, 0.0);
        if fs == f64::INFINITY {
            return f64::NEG_INFINITY;
        }
        let phix = a * sq + u.iter().zip(xs).map(|(u, x)| u * x).sum::<f64>();
        phix - fs
    });
    Ok(BiconjugateValue {
        value: out.value,
        params: out.argmax,
        grid_truncated: true,
    })
}

/// Exact `f**` for a full-space quadratic over an isotropic family: `f` itself
/// when some admissible curvature lies at or below the smallest eigenvalue of
/// its matrix, and `-inf` everywhere otherwise.
pub fn biconjugate_closed_form(f: &Quadratic, family: &Family, x: &DVector<f64>, tol: f64) -> Result<f64> {
    check_dim("biconjugate", f.dim(), x.len())?;
    check_dim("biconjugate family", f.dim(), family.dim)?;
    Ok(if has_quadratic_minorant(f, family.curvature, tol) {
        f.value_at(x.as_slice())
    } else {
        f64::NEG_INFINITY
    })
}

pub(crate) fn has_quadratic_minorant(f: &Quadratic, curvature: CurvatureSpec, tol: f64) -> bool {
    let lambda_min = SymmetricEigen::new(f.a().clone()).eigenvalues.min();
    let slack = tol * lambda_min.abs().max(1.0);
    match curvature {
        CurvatureSpec::Zero | CurvatureSpec::NonNegative => lambda_min >= -slack,
        CurvatureSpec::Fixed(a) => a <= lambda_min + slack,
        CurvatureSpec::NonPositive | CurvatureSpec::Any => true,
    }
}

/// `|f**(x) - f(x)| <= tol` with the grid-truncated biconjugate.
pub fn is_phi_convex_at(
    f: &Objective,
    search: &ParamSearch,
    x: &DVector<f64>,
    x_grid: &GridSpec,
    tol: f64,
) -> Result<bool> {
    let fx = f.eval_extended(x)?;
    if !fx.is_finite() {
        return Err(Error::NotInDomain("x is outside dom f"));
    }
    let bic = biconjugate_at(f, search, x, x_grid)?;
    Ok(bic.value.is_finite() && (bic.value - fx).abs() <= tol)
}

/// The inequality `fx + fstar <= phix + eps` with the membership slack.
pub fn fenchel_young_gap_ok(fx: f64, fstar: f64, phix: f64, eps: f64) -> bool {
    fstar < f64::INFINITY && fx + fstar <= phix + eps + MEMBERSHIP_SLACK
}

/// Whether `phi` lies in the eps-subdifferential of `f` at `x`.
pub fn eps_subdiff_contains(
    f: &Objective,
    phi: &Quadratic,
    x: &DVector<f64>,
    eps: f64,
    engine: &Engine,
) -> Result<bool> {
    if !(eps >= 0.0) || eps == f64::INFINITY {
        return Err(Error::InvalidArgument(format!("eps must be finite and >= 0, got {eps}")));
    }
    check_dim("subdifferential point", phi.dim(), x.len())?;
    let fx = f.eval_extended(x)?;
    if !fx.is_finite() {
        return Err(Error::NotInDomain("x is outside dom f"));
    }
    let fstar = conjugate(f, phi, engine)?.value;
    Ok(fenchel_young_gap_ok(fx, fstar, phi.value_at(x.as_slice()), eps))
}

/// Family parameters (from the unrefined search grid) that belong to the
/// eps-subdifferential of `f` at some sample point, for every eps in the list.
pub fn dom_conjugate_probe(
    f: &Objective,
    search: &ParamSearch,
    eps_list: &[f64],
    sample_points: &[DVector<f64>],
    engine: &Engine,
) -> Result<Vec<Vec<f64>>> {
    if eps_list.is_empty() {
        return Err(Error::InvalidArgument("eps list is empty".into()));
    }
    if eps_list.iter().any(|e| !(*e > 0.0) || !e.is_finite())
        || eps_list.windows(2).any(|w| w[1] > w[0])
    {
        return Err(Error::InvalidArgument("eps list must be positive and decreasing".into()));
    }
    check_dim("probe family", f.dim(), search.dim())?;
    let mut samples = Vec::with_capacity(sample_points.len());
    for x in sample_points {
        let fx = f.eval_extended(x)?;
        if fx.is_finite() {
            samples.push((x, fx));
        }
    }
    let mut kept = Vec::new();
    for params in search.candidates()? {
        let phi = search.element(&params);
        let fstar = conjugate(f, &phi, engine)?.value;
        if !fstar.is_finite() {
            continue;
        }
        let survives = eps_list.iter().all(|&eps| {
            samples
                .iter()
                .any(|(x, fx)| fenchel_young_gap_ok(*fx, fstar, phi.value_at(x.as_slice()), eps))
        });
        if survives {
            kept.push(params);
        }
    }
    Ok(kept)
}
