//! Conjugate duality for `inf_x f(x) + g(Lx)`.
//!
//! The dual is built from the perturbation `f(x) + g(Lx + y)` and the coupling
//! `phi(x) + psi(Lx + y) - psi(Lx)`, giving the dual objective
//! `inf_x {f(x) + psi(Lx)} - g*(psi)` maximized over `psi` in the family Psi.
//! The supremum is truncated to a parameter grid and always reported as such.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conjugate::{
    default_points, fenchel_young_gap_ok, ConjugateValue, Conjugator, ParamSearch,
    MEMBERSHIP_SLACK,
};
use crate::elementary::{Family, LinearMap, Quadratic};
use crate::error::{check_dim, Error, Result};
use crate::grid::{self, GridSpec, DEFAULT_REFINE_ROUNDS};
use crate::objective::Objective;
use crate::tolerance;

/// Slack in `dual <= primal + WEAK_DUALITY_TOL`.
pub const WEAK_DUALITY_TOL: f64 = 1e-6;

/// Decreasing eps values used by optimality checks.
pub const EPS_LADDER: [f64; 7] = [1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

const DOMAIN_SAMPLES: usize = 4096;

#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub f: Objective,
    pub g: Objective,
    pub l: LinearMap,
    pub phi: Family,
    pub psi: Family,
    pub psi_search: ParamSearch,
    /// Grid over R^n for every x-side grid computation.
    pub x_search: GridSpec,
    /// Grid over R^m used when `g` needs the grid engine.
    pub y_search: GridSpec,
}

impl ProblemInstance {
    pub fn new(f: Objective, g: Objective, l: LinearMap, phi: Family, psi: Family) -> Result<Self> {
        let (n, m) = (l.cols(), l.rows());
        check_dim("f dimension", n, f.dim())?;
        check_dim("g dimension", m, g.dim())?;
        check_dim("Phi dimension", n, phi.dim)?;
        check_dim("Psi dimension", m, psi.dim)?;
        let x_search = GridSpec::cube(n, -10.0, 10.0, default_points(n), DEFAULT_REFINE_ROUNDS)?;
        let y_search = GridSpec::cube(m, -10.0, 10.0, default_points(m), DEFAULT_REFINE_ROUNDS)?;
        Ok(Self {
            psi_search: ParamSearch::new(psi.clone()),
            f,
            g,
            l,
            phi,
            psi,
            x_search,
            y_search,
        })
    }

    pub fn with_psi_search(mut self, search: ParamSearch) -> Result<Self> {
        if search.family != self.psi {
            return Err(Error::InvalidArgument("psi search must range over Psi".into()));
        }
        search.grid()?;
        self.psi_search = search;
        Ok(self)
    }

    pub fn with_x_search(mut self, grid: GridSpec) -> Result<Self> {
        check_dim("x search", self.n(), grid.dim())?;
        grid.validate()?;
        self.x_search = grid;
        Ok(self)
    }

    pub fn with_y_search(mut self, grid: GridSpec) -> Result<Self> {
        check_dim("y search", self.m(), grid.dim())?;
        grid.validate()?;
        self.y_search = grid;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.l.cols()
    }

    pub fn m(&self) -> usize {
        self.l.rows()
    }

    /// Messages for assumptions that sampling could not confirm.
    pub fn domain_warnings(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        if !self.has_common_domain_point() {
            warnings.push(
                "no sampled x has both f(x) and g(Lx) finite; dom g and L(dom f) may not intersect"
                    .to_string(),
            );
        }
        warnings
    }

    fn has_common_domain_point(&self) -> bool {
        let n = self.n();
        if self.objective_at(&vec![0.0; n]).is_finite() {
            return true;
        }
        let (lo, hi) = self.f.sampling_box(10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0xd0_0d);
        let mut x = vec![0.0; n];
        (0..DOMAIN_SAMPLES).any(|_| {
            for i in 0..n {
                x[i] = if lo[i] < hi[i] { rng.gen_range(lo[i]..=hi[i]) } else { lo[i] };
            }
            self.objective_at(&x).is_finite()
        })
    }

    /// `f(x) + g(Lx)`.
    pub fn objective_at(&self, x: &[f64]) -> f64 {
        let fx = self.f.value(x);
        if fx == f64::INFINITY {
            return fx;
        }
        fx + self.g.value(apply(&self.l, x).as_slice())
    }

    /// `f + g o L` when both parts are full-space quadratics.
    pub fn composite_quadratic(&self) -> Option<Quadratic> {
        let f = self.f.as_full_quadratic()?;
        let g = self.g.as_full_quadratic()?;
        f.add(&g.pullback(&self.l).ok()?).ok()
    }

    pub fn f_conjugator(&self) -> Result<Conjugator> {
        Conjugator::new(&self.f, &self.x_search)
    }

    pub fn g_conjugator(&self) -> Result<Conjugator> {
        Conjugator::new(&self.g, &self.y_search)
    }

    /// An objective on R^n made of `f` (optional) plus a tail composed with `L`.
    fn x_objective(&self, with_f: bool, tail: Tail<'_>) -> Result<Objective> {
        let n = self.n();
        let f_quad = if with_f { self.f.as_full_quadratic().cloned() } else { Some(Quadratic::zero(n)) };
        let tail_quad = match tail {
            Tail::G => self.g.as_full_quadratic().map(|g| g.pullback(&self.l)).transpose()?,
            Tail::Psi(psi) => Some(psi.pullback(&self.l)?),
        };
        if let (Some(a), Some(b)) = (f_quad, tail_quad) {
            return Ok(Objective::quadratic(a.add(&b)?));
        }
        let f = with_f.then(|| self.f.clone());
        let l = self.l.clone();
        let tail: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync> = match tail {
            Tail::G => {
                let g = self.g.clone();
                Arc::new(move |x: &[f64]| g.value(apply(&l, x).as_slice()))
            }
            Tail::Psi(psi) => {
                let psi = psi.clone();
                Arc::new(move |x: &[f64]| psi.value_at(apply(&l, x).as_slice()))
            }
        };
        let domain = f.as_ref().and_then(|f| f.domain().cloned());
        let eval = Arc::new(move |x: &[f64]| {
            let fx = f.as_ref().map_or(0.0, |f| f.value(x));
            if fx == f64::INFINITY {
                return fx;
            }
            let t = tail(x);
            if t.is_nan() {
                f64::INFINITY
            } else {
                fx + t
            }
        });
        Ok(Objective::from_evaluator_unchecked(n, eval, domain))
    }

    fn x_conjugate(&self, with_f: bool, tail: Tail<'_>, phi: &Quadratic) -> Result<ConjugateValue> {
        check_dim("conjugate argument", self.n(), phi.dim())?;
        Conjugator::new(&self.x_objective(with_f, tail)?, &self.x_search)?.conjugate(phi)
    }
}

#[derive(Clone, Copy)]
enum Tail<'a> {
    G,
    Psi(&'a Quadratic),
}

pub(crate) fn apply(l: &LinearMap, x: &[f64]) -> DVector<f64> {
    let m = l.matrix();
    DVector::from_fn(m.nrows(), |i, _| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum())
}

/// A value with a flag telling whether a grid was involved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub grid_truncated: bool,
}

/// `phi(x) + psi(Lx + y) - psi(Lx)`.
pub fn coupling_value(
    phi: &Quadratic,
    psi: &Quadratic,
    x: &DVector<f64>,
    y: &DVector<f64>,
    l: &LinearMap,
) -> Result<f64> {
    check_dim("coupling phi", l.cols(), phi.dim())?;
    check_dim("coupling psi", l.rows(), psi.dim())?;
    let lx = l.apply(x)?;
    check_dim("coupling y", l.rows(), y.len())?;
    let shifted = &lx + y;
    Ok(phi.value_at(x.as_slice()) + psi.value_at(shifted.as_slice()) - psi.value_at(lx.as_slice()))
}

/// `(f + psi o L)*(phi)`.
pub fn composite_conjugate(inst: &ProblemInstance, psi: &Quadratic, phi: &Quadratic) -> Result<ConjugateValue> {
    check_dim("psi", inst.m(), psi.dim())?;
    inst.x_conjugate(true, Tail::Psi(psi), phi)
}

/// `g*(psi)`.
pub fn g_conjugate(inst: &ProblemInstance, psi: &Quadratic) -> Result<ConjugateValue> {
    inst.g_conjugator()?.conjugate(psi)
}

fn add_extended(a: f64, b: f64) -> f64 {
    if a == f64::INFINITY || b == f64::INFINITY {
        f64::INFINITY
    } else {
        a + b
    }
}

/// `beta^c(0, psi) = sup_x {-psi(Lx) - f(x)} + g*(psi)`; the dual objective is its negation.
pub fn beta_conjugate_zero(inst: &ProblemInstance, psi: &Quadratic) -> Result<Estimate> {
    let zero = Quadratic::zero(inst.n());
    let inner = composite_conjugate(inst, psi, &zero)?;
    let gs = g_conjugate(inst, psi)?;
    Ok(Estimate {
        value: add_extended(inner.value, gs.value),
        grid_truncated: inner.grid_truncated() || gs.grid_truncated(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimalValue {
    pub value: f64,
    pub point: Option<DVector<f64>>,
    pub grid_truncated: bool,
    pub unbounded: bool,
}

/// `inf_x f(x) + g(Lx + y)`; `y = None` is the unperturbed problem.
pub(crate) fn perturbed_infimum(inst: &ProblemInstance, y: Option<&DVector<f64>>) -> Result<PrimalValue> {
    if let Some(y) = y {
        check_dim("perturbation", inst.m(), y.len())?;
    }
    if let (Some(f), Some(g)) = (inst.f.as_full_quadratic(), inst.g.as_full_quadratic()) {
        let g = match y {
            Some(y) => g.translated(y)?,
            None => g.clone(),
        };
        let h = f.add(&g.pullback(&inst.l)?)?;
        let ext = h.infimum(tolerance::global());
        return Ok(PrimalValue {
            unbounded: ext.value == f64::NEG_INFINITY,
            value: ext.value,
            point: ext.point,
            grid_truncated: false,
        });
    }
    let out = grid::minimize_validated(&inst.x_search, |x| {
        let fx = inst.f.value(x);
        if fx == f64::INFINITY {
            return fx;
        }
        let mut lx = apply(&inst.l, x);
        if let Some(y) = y {
            lx += y;
        }
        fx + inst.g.value(lx.as_slice())
    });
    Ok(PrimalValue {
        value: out.value,
        point: out.argmax.map(DVector::from_vec),
        grid_truncated: true,
        unbounded: false,
    })
}

/// Optimal value of the composite problem.
pub fn primal_value(inst: &ProblemInstance) -> Result<PrimalValue> {
    perturbed_infimum(inst, None)
}

/// Evaluates the dual objective on isotropic `psi = a|y|^2 + v'y`.
pub(crate) struct DualEvaluator<'a> {
    inst: &'a ProblemInstance,
    g_conj: Conjugator,
    f_quad: Option<Quadratic>,
    ltl: DMatrix<f64>,
    lt: DMatrix<f64>,
    tol: f64,
}

impl<'a> DualEvaluator<'a> {
    pub(crate) fn new(inst: &'a ProblemInstance) -> Result<Self> {
        let lt = inst.l.matrix().transpose();
        Ok(Self {
            g_conj: inst.g_conjugator()?,
            f_quad: inst.f.as_full_quadratic().cloned(),
            ltl: &lt * inst.l.matrix(),
            lt,
            inst,
            tol: tolerance::global(),
        })
    }

    pub(crate) fn exact(&self) -> bool {
        self.f_quad.is_some() && self.g_conj.is_exact()
    }

    pub(crate) fn gstar(&self, a: f64, v: &[f64]) -> f64 {
        self.g_conj.isotropic(a, v, 0.0)
    }

    /// `f + psi o L - phi` as a quadratic, for quadratic `f`.
    fn shifted(&self, f: &Quadratic, a: f64, v: &[f64], phi: Option<&Quadratic>) -> Quadratic {
        let mut am = f.a() + &self.ltl * a;
        let mut u = f.u() + &self.lt * DVector::from_column_slice(v);
        let mut c = f.c();
        if let Some(phi) = phi {
            am -= phi.a();
            u -= phi.u();
            c -= phi.c();
        }
        Quadratic::symmetrized(am, u, c)
    }

    fn psi_at(&self, a: f64, v: &[f64], x: &[f64]) -> f64 {
        let y = apply(&self.inst.l, x);
        a * y.norm_squared() + y.iter().zip(v).map(|(y, v)| y * v).sum::<f64>()
    }

    /// `inf_x f(x) + psi(Lx)`.
    pub(crate) fn inner_inf(&self, a: f64, v: &[f64]) -> f64 {
        match &self.f_quad {
            Some(f) => self.shifted(f, a, v, None).infimum(self.tol).value,
            None => {
                grid::minimize_validated(&self.inst.x_search, |x| {
                    let fx = self.inst.f.value(x);
                    if fx == f64::INFINITY {
                        fx
                    } else {
                        fx + self.psi_at(a, v, x)
                    }
                })
                .value
            }
        }
    }

    /// `(f + psi o L)*(phi)`.
    pub(crate) fn composite_conj(&self, a: f64, v: &[f64], phi: &Quadratic) -> f64 {
        match &self.f_quad {
            Some(f) => -self.shifted(f, a, v, Some(phi)).infimum(self.tol).value,
            None => {
                grid::maximize_validated(&self.inst.x_search, |x| {
                    let fx = self.inst.f.value(x);
                    if fx == f64::INFINITY {
                        f64::NEG_INFINITY
                    } else {
                        phi.value_at(x) - fx - self.psi_at(a, v, x)
                    }
                })
                .value
            }
        }
    }

    /// Dual objective given a precomputed `g*(psi)`; `-inf` when it is `+inf`.
    pub(crate) fn objective_with(&self, a: f64, v: &[f64], gstar: f64) -> f64 {
        if gstar == f64::INFINITY {
            return f64::NEG_INFINITY;
        }
        self.inner_inf(a, v) - gstar
    }
}

/// `inf_x (f + psi o L)(x) - g*(psi)` at one isotropic `psi`; its constant term is ignored.
pub fn dual_objective(inst: &ProblemInstance, psi: &Quadratic) -> Result<f64> {
    check_dim("psi", inst.m(), psi.dim())?;
    let tol = tolerance::global();
    let a = psi
        .isotropic_curvature(tol)
        .ok_or_else(|| Error::InvalidArgument("psi must have isotropic curvature".into()))?;
    let eval = DualEvaluator::new(inst)?;
    let v = psi.u().as_slice().to_vec();
    Ok(eval.objective_with(a, &v, eval.gstar(a, &v)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsiChoice {
    pub params: Vec<f64>,
    pub psi: Quadratic,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DualityFlags {
    pub grid_truncated: bool,
    pub unbounded_suspected: bool,
    pub weak_duality_violated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualityReport {
    pub primal: f64,
    pub primal_point: Option<DVector<f64>>,
    pub dual_conjugate: f64,
    pub gap: f64,
    pub attaining_psi: Option<PsiChoice>,
    pub flags: DualityFlags,
}

/// `primal - dual`, with equal infinities giving zero.
pub fn gap(primal: f64, dual: f64) -> f64 {
    if primal == dual {
        0.0
    } else {
        primal - dual
    }
}

pub(crate) fn on_slope_boundary(search: &ParamSearch, params: &[f64]) -> bool {
    let (_, slopes) = search.split(params);
    slopes
        .iter()
        .any(|&s| s <= search.slope_lower || s >= search.slope_upper)
}

pub(crate) fn assemble_report(
    search: &ParamSearch,
    primal: PrimalValue,
    dual: f64,
    argmax: Option<Vec<f64>>,
) -> DualityReport {
    let attaining_psi = argmax.map(|params| PsiChoice {
        psi: search.element(&params),
        params,
    });
    let boundary = dual.is_finite()
        && attaining_psi
            .as_ref()
            .is_some_and(|p| on_slope_boundary(search, &p.params));
    let flags = DualityFlags {
        grid_truncated: true,
        unbounded_suspected: primal.unbounded || dual == f64::INFINITY || boundary,
        weak_duality_violated: dual > primal.value + WEAK_DUALITY_TOL,
    };
    DualityReport {
        gap: gap(primal.value, dual),
        primal: primal.value,
        primal_point: primal.point,
        dual_conjugate: dual,
        attaining_psi,
        flags,
    }
}

/// Conjugate dual value `sup_psi -beta^c(0, psi)` over the psi search grid.
pub fn dcp_value(inst: &ProblemInstance) -> Result<DualityReport> {
    let primal = primal_value(inst)?;
    let eval = DualEvaluator::new(inst)?;
    let search = &inst.psi_search;
    let spec = search.grid()?;
    let out = grid::maximize_validated(&spec, |p| {
        let (a, v) = search.split(p);
        eval.objective_with(a, v, eval.gstar(a, v))
    });
    Ok(assemble_report(search, primal, out.value, out.argmax))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakDualityCheck {
    /// `(f + g o L)*(phi)`.
    pub left: f64,
    /// `inf_psi (f + psi o L)*(phi) + g*(psi)` over the search grid.
    pub right: f64,
    pub holds: bool,
}

/// Compares both sides of the weak-duality inequality at `phi`.
pub fn weak_duality_check(inst: &ProblemInstance, phi: &Quadratic) -> Result<WeakDualityCheck> {
    check_dim("phi", inst.n(), phi.dim())?;
    let left = inst.x_conjugate(true, Tail::G, phi)?.value;
    let eval = DualEvaluator::new(inst)?;
    let search = &inst.psi_search;
    let out = grid::minimize_validated(&search.grid()?, |p| {
        let (a, v) = search.split(p);
        let gs = eval.gstar(a, v);
        if gs == f64::INFINITY {
            return f64::INFINITY;
        }
        add_extended(eval.composite_conj(a, v, phi), gs)
    });
    let right = out.value;
    Ok(WeakDualityCheck {
        left,
        right,
        holds: right == f64::INFINITY || left <= right + WEAK_DUALITY_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateKind {
    /// `psi` is an eps-subgradient of `g` at `Lx` and bounds `(f + psi o L)*(0)`.
    ConjugateBound,
    /// The four-part system with both subgradients and the sandwich on `phi + psi o L`.
    ZeroGapSystem,
    /// A zero-gap system at a point fixed across a decreasing eps ladder.
    FixedPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapCertificate {
    pub eps: f64,
    pub x: DVector<f64>,
    pub phi: Quadratic,
    pub psi: Quadratic,
    pub kind: CertificateKind,
}

impl GapCertificate {
    fn validate(&self, inst: &ProblemInstance) -> Result<()> {
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(Error::InvalidArgument(format!("certificate eps must be positive, got {}", self.eps)));
        }
        check_dim("certificate x", inst.n(), self.x.len())?;
        check_dim("certificate phi", inst.n(), self.phi.dim())?;
        check_dim("certificate psi", inst.m(), self.psi.dim())
    }
}

/// Whether `psi` is an eps-subgradient of `g` at `Lx`; false when `g(Lx) = +inf`.
fn psi_subgradient(inst: &ProblemInstance, psi: &Quadratic, lx: &DVector<f64>, eps: f64) -> Result<bool> {
    let glx = inst.g.value(lx.as_slice());
    if !glx.is_finite() {
        return Ok(false);
    }
    let gs = g_conjugate(inst, psi)?.value;
    Ok(fenchel_young_gap_ok(glx, gs, psi.value_at(lx.as_slice()), eps))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateBoundCheck {
    pub psi_subgradient: bool,
    /// `(f + psi o L)*(0)`.
    pub conjugate: f64,
    /// `-f(x) - psi(Lx) + eps`.
    pub bound: f64,
    pub bound_holds: bool,
    pub valid: bool,
}

/// Checks the conjugate-bound certificate: `psi` in the eps-subdifferential of
/// `g` at `Lx` and `(f + psi o L)*(0) <= -f(x) - psi(Lx) + eps`.
pub fn verify_conjugate_bound(inst: &ProblemInstance, cert: &GapCertificate) -> Result<ConjugateBoundCheck> {
    cert.validate(inst)?;
    let fx = inst.f.eval_extended(&cert.x)?;
    if !fx.is_finite() {
        return Err(Error::NotInDomain("certificate point is outside dom f"));
    }
    let lx = inst.l.apply(&cert.x)?;
    let psi_subgradient = psi_subgradient(inst, &cert.psi, &lx, cert.eps)?;
    let conjugate = composite_conjugate(inst, &cert.psi, &Quadratic::zero(inst.n()))?.value;
    let bound = -fx - cert.psi.value_at(lx.as_slice()) + cert.eps;
    let bound_holds = conjugate <= bound + MEMBERSHIP_SLACK;
    Ok(ConjugateBoundCheck {
        psi_subgradient,
        conjugate,
        bound,
        bound_holds,
        valid: psi_subgradient && bound_holds,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroGapCheck {
    pub in_families: bool,
    /// `phi` is an eps-subgradient of `f` at `x`.
    pub phi_subgradient: bool,
    /// `psi` is an eps-subgradient of `g` at `Lx`.
    pub psi_subgradient: bool,
    /// `inf_z phi(z) + psi(Lz) >= -eps`, decided in closed form.
    pub lower_bound: bool,
    /// `phi(x) + psi(Lx) <= eps`.
    pub upper_bound: bool,
    /// `phi + psi o L` vanishes identically.
    pub exact_zero: bool,
    pub valid: bool,
}

/// Checks the zero-gap system of a certificate.
pub fn verify_zero_gap_system(inst: &ProblemInstance, cert: &GapCertificate) -> Result<ZeroGapCheck> {
    cert.validate(inst)?;
    let tol = tolerance::global();
    let in_families = inst.phi.contains(&cert.phi, tol) && inst.psi.contains(&cert.psi, tol);
    let fx = inst.f.eval_extended(&cert.x)?;
    let lx = inst.l.apply(&cert.x)?;
    let phi_subgradient = fx.is_finite() && {
        let fs = inst.f_conjugator()?.conjugate(&cert.phi)?.value;
        fenchel_young_gap_ok(fx, fs, cert.phi.value_at(cert.x.as_slice()), cert.eps)
    };
    let psi_subgradient = psi_subgradient(inst, &cert.psi, &lx, cert.eps)?;
    let sum = cert.phi.add(&cert.psi.pullback(&inst.l)?)?;
    let lower_bound = sum.infimum(tol).value >= -cert.eps - MEMBERSHIP_SLACK;
    let upper_bound = sum.value_at(cert.x.as_slice()) <= cert.eps + MEMBERSHIP_SLACK;
    let exact_zero = sum.is_zero(tol);
    Ok(ZeroGapCheck {
        valid: in_families && phi_subgradient && psi_subgradient && lower_bound && upper_bound,
        in_families,
        phi_subgradient,
        psi_subgradient,
        lower_bound,
        upper_bound,
        exact_zero,
    })
}

/// Certificates with fixed `x`, `phi`, `psi` along [`EPS_LADDER`].
pub fn fixed_point_certificates(x: &DVector<f64>, phi: &Quadratic, psi: &Quadratic) -> Vec<GapCertificate> {
    EPS_LADDER
        .iter()
        .map(|&eps| GapCertificate {
            eps,
            x: x.clone(),
            phi: phi.clone(),
            psi: psi.clone(),
            kind: CertificateKind::FixedPoint,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalityCheck {
    pub per_eps: Vec<(f64, bool)>,
    pub objective_at_x: f64,
    pub primal: f64,
    /// `|primal - (f(x) + g(Lx))| <= WEAK_DUALITY_TOL`.
    pub attains_primal: bool,
    pub valid: bool,
}

/// Optimality of `x` from zero-gap systems holding at `x` for every eps in a decreasing list.
pub fn verify_optimality(inst: &ProblemInstance, x: &DVector<f64>, certs: &[GapCertificate]) -> Result<OptimalityCheck> {
    check_dim("candidate point", inst.n(), x.len())?;
    if certs.iter().any(|c| c.x != *x) {
        return Err(Error::InvalidArgument("all certificates must share the candidate point".into()));
    }
    if certs.windows(2).any(|w| w[1].eps > w[0].eps) {
        return Err(Error::InvalidArgument("certificate eps values must decrease".into()));
    }
    let mut per_eps = Vec::with_capacity(certs.len());
    for cert in certs {
        per_eps.push((cert.eps, verify_zero_gap_system(inst, cert)?.valid));
    }
    let objective_at_x = inst.objective_at(x.as_slice());
    let primal = primal_value(inst)?.value;
    let attains_primal = objective_at_x.is_finite() && (primal - objective_at_x).abs() <= WEAK_DUALITY_TOL;
    Ok(OptimalityCheck {
        valid: !per_eps.is_empty() && per_eps.iter().all(|(_, ok)| *ok) && attains_primal,
        per_eps,
        objective_at_x,
        primal,
        attains_primal,
    })
}

/// A point `(phi, r)` of `Phi x R`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpiPoint {
    pub phi: Quadratic,
    pub r: f64,
}

/// The conjugate whose epigraph is queried.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpiTarget {
    F,
    G,
    GComposedL,
    FPlusGComposedL,
}

pub fn target_conjugate(inst: &ProblemInstance, target: EpiTarget, phi: &Quadratic) -> Result<ConjugateValue> {
    match target {
        EpiTarget::F => inst.f_conjugator()?.conjugate(phi),
        EpiTarget::G => g_conjugate(inst, phi),
        EpiTarget::GComposedL => inst.x_conjugate(false, Tail::G, phi),
        EpiTarget::FPlusGComposedL => inst.x_conjugate(true, Tail::G, phi),
    }
}

/// `conjugate(phi) <= r` up to the membership slack.
pub fn epi_contains(inst: &ProblemInstance, target: EpiTarget, p: &EpiPoint) -> Result<bool> {
    let v = target_conjugate(inst, target, &p.phi)?.value;
    Ok(v < f64::INFINITY && v <= p.r + MEMBERSHIP_SLACK)
}

/// `(phi, r) = (phi_f + psi o L, r_f + r_g)` with `(phi_f, r_f)` in epi f* and `(psi, r_g)` in epi g*.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub f_part: EpiPoint,
    pub g_part: EpiPoint,
}

/// `phi - psi o L` lies in Phi.
pub fn difference_in_family(inst: &ProblemInstance, phi: &Quadratic, psi: &Quadratic) -> Result<bool> {
    let diff = phi.sub(&psi.pullback(&inst.l)?)?;
    Ok(inst.phi.contains(&diff, tolerance::global()))
}

/// Splits `p` using a given `psi`; `None` when `phi - psi o L` leaves Phi or a
/// membership fails.
pub fn epi_decompose_with(inst: &ProblemInstance, p: &EpiPoint, psi: &Quadratic) -> Result<Option<Decomposition>> {
    check_dim("epigraph point", inst.n(), p.phi.dim())?;
    check_dim("psi", inst.m(), psi.dim())?;
    let tol = tolerance::global();
    let rest = p.phi.sub(&psi.pullback(&inst.l)?)?;
    if !inst.phi.contains(&rest, tol) || !inst.psi.contains(psi, tol) {
        return Ok(None);
    }
    let r_g = g_conjugate(inst, psi)?.value;
    if !r_g.is_finite() {
        return Ok(None);
    }
    let f_part = EpiPoint { phi: rest, r: p.r - r_g };
    let g_part = EpiPoint { phi: psi.clone(), r: r_g };
    if epi_contains(inst, EpiTarget::F, &f_part)? && epi_contains(inst, EpiTarget::G, &g_part)? {
        Ok(Some(Decomposition { f_part, g_part }))
    } else {
        Ok(None)
    }
}

/// Searches Psi for the split minimizing `f*(phi - psi o L) + g*(psi)`.
/// `Ok(None)` means the search was inconclusive, not that no split exists.
pub fn epi_decompose(inst: &ProblemInstance, p: &EpiPoint) -> Result<Option<Decomposition>> {
    if !epi_contains(inst, EpiTarget::FPlusGComposedL, p)? {
        return Err(Error::InvalidArgument(
            "point is not in the epigraph of (f + g o L)*".into(),
        ));
    }
    let tol = tolerance::global();
    let f_conj = inst.f_conjugator()?;
    let g_conj = inst.g_conjugator()?;
    let search = &inst.psi_search;
    let out = grid::minimize_validated(&search.grid()?, |params| {
        let (a, v) = search.split(params);
        let psi = search.element(params);
        let Ok(pulled) = psi.pullback(&inst.l) else {
            return f64::INFINITY;
        };
        let Ok(rest) = p.phi.sub(&pulled) else {
            return f64::INFINITY;
        };
        if !inst.phi.contains(&rest, tol) {
            return f64::INFINITY;
        }
        let gs = g_conj.isotropic(a, v, 0.0);
        if gs == f64::INFINITY {
            return gs;
        }
        f_conj.conjugate(&rest).map_or(f64::INFINITY, |c| add_extended(c.value, gs))
    });
    match out.argmax {
        Some(params) => epi_decompose_with(inst, p, &search.element(&params)),
        None => Ok(None),
    }
}

/// Witnesses for the four sufficient conditions relating epigraph additivity
/// and attainment of the infimal split.
#[derive(Debug, Clone, PartialEq)]
pub enum DecompositionWitness {
    /// `phi <= psi o L` and `g*(psi) <= r`.
    Minorant { phi: Quadratic, r: f64, psi: Quadratic },
    /// `g*(psi) <= 0` and `g o L <= psi o L`.
    Majorant { psi: Quadratic },
    /// `phi - psi o L >= phi1` and `psi o L >= phi2` with `phi1, phi2` in Phi.
    Splitting {
        phi: Quadratic,
        psi: Quadratic,
        phi1: Quadratic,
        phi2: Quadratic,
    },
    /// Phi closed under differences, `phi_eps` an eps2-subgradient of `g o L` at `x`,
    /// and `psi(Lx) - phi_eps(x) + eps1 > sup_z psi(Lz) - phi_eps(z)`.
    Approximate {
        psi: Quadratic,
        x: DVector<f64>,
        phi_eps: Quadratic,
        eps1: f64,
        eps2: f64,
    },
}

fn nonnegative(q: &Quadratic) -> bool {
    q.infimum(tolerance::global()).value >= -MEMBERSHIP_SLACK
}

/// Decides a witness; pointwise inequalities between quadratics are settled by
/// closed-form global minimization.
pub fn decomposition_condition_check(inst: &ProblemInstance, witness: &DecompositionWitness) -> Result<bool> {
    let tol = tolerance::global();
    let in_phi = |q: &Quadratic| inst.phi.contains(q, tol);
    let in_psi = |q: &Quadratic| inst.psi.contains(q, tol);
    match witness {
        DecompositionWitness::Minorant { phi, r, psi } => {
            let gap = psi.pullback(&inst.l)?.sub(phi)?;
            let gs = g_conjugate(inst, psi)?.value;
            Ok(in_phi(phi) && in_psi(psi) && nonnegative(&gap) && gs <= r + MEMBERSHIP_SLACK)
        }
        DecompositionWitness::Majorant { psi } => {
            let g = inst.g.as_full_quadratic().ok_or_else(|| {
                Error::InvalidArgument("majorant condition needs a quadratic g".into())
            })?;
            let gap = psi.pullback(&inst.l)?.sub(&g.pullback(&inst.l)?)?;
            let gs = g_conjugate(inst, psi)?.value;
            Ok(in_psi(psi) && gs <= MEMBERSHIP_SLACK && nonnegative(&gap))
        }
        DecompositionWitness::Splitting { phi, psi, phi1, phi2 } => {
            let pulled = psi.pullback(&inst.l)?;
            let first = phi.sub(&pulled)?.sub(phi1)?;
            let second = pulled.sub(phi2)?;
            Ok(in_psi(psi) && in_phi(phi1) && in_phi(phi2) && nonnegative(&first) && nonnegative(&second))
        }
        DecompositionWitness::Approximate { psi, x, phi_eps, eps1, eps2 } => {
            if !(*eps1 > 0.0 && *eps2 > 0.0) {
                return Err(Error::InvalidArgument("eps1 and eps2 must be positive".into()));
            }
            check_dim("witness x", inst.n(), x.len())?;
            if !inst.phi.is_difference_closed() || !in_psi(psi) || !in_phi(phi_eps) {
                return Ok(false);
            }
            let glx = inst.g.value(inst.l.apply(x)?.as_slice());
            let subgradient = glx.is_finite() && {
                let cs = target_conjugate(inst, EpiTarget::GComposedL, phi_eps)?.value;
                fenchel_young_gap_ok(glx, cs, phi_eps.value_at(x.as_slice()), *eps2)
            };
            let diff = psi.pullback(&inst.l)?.sub(phi_eps)?;
            let sup = diff.supremum(tol).value;
            Ok(subgradient && diff.value_at(x.as_slice()) + eps1 > sup)
        }
    }
}
