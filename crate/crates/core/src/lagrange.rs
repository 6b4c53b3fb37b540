//! Lagrangian duality: `L(x, psi) = f(x) + psi(Lx) - g*(psi)`.
//!
//! The Lagrange dual `sup_psi inf_x L` is the same expression as the conjugate
//! dual and is computed on the same grid. The Lagrange primal
//! `inf_x sup_psi L = inf_x f(x) + g**(Lx)` uses the closed-form biconjugate
//! when `g` is a full quadratic.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::RwLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::conjugate::{biconjugate_closed_form, has_quadratic_minorant, is_phi_convex_at, ParamSearch, MEMBERSHIP_SLACK};
use crate::duality::{apply, assemble_report, perturbed_infimum, DualEvaluator, DualityReport, PrimalValue, ProblemInstance, WEAK_DUALITY_TOL};
use crate::elementary::Quadratic;
use crate::error::{check_dim, Error, Result};
use crate::grid::{self, GridSpec};
use crate::tolerance;

/// Number of interior `t` values scanned before golden-section refinement.
pub const T_SCAN_POINTS: usize = 1001;
const GOLDEN_TOL: f64 = 1e-10;
const INTERSECTION_SLACK: f64 = 1e-9;
const OPTIMALITY_TOL: f64 = 1e-6;

/// Instance plus a search grid over Psi and a write-once memo of `g*` values.
#[derive(Debug)]
pub struct LagrangianContext {
    pub instance: ProblemInstance,
    pub psi_search: ParamSearch,
    gstar_cache: RwLock<HashMap<Vec<u64>, f64>>,
}

fn cache_key(a: f64, v: &[f64]) -> Vec<u64> {
    std::iter::once(a).chain(v.iter().copied()).map(f64::to_bits).collect()
}

/// Lagrange dual value with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct LdValue {
    pub report: DualityReport,
    /// Evaluations skipped because `g*(psi) = +inf`.
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpValue {
    pub value: f64,
    pub point: Option<DVector<f64>>,
    /// False when the closed-form biconjugate was used and `f` is quadratic too.
    pub grid_truncated: bool,
    /// `g**` is identically `-inf`.
    pub biconjugate_degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CondCheck {
    pub lp: f64,
    pub primal: f64,
    pub holds: bool,
    pub grid_truncated: bool,
}

/// The perturbed condition checked on a finite set of `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCondCheck {
    pub per_y: Vec<(DVector<f64>, CondCheck)>,
    pub holds: bool,
    pub sampled: bool,
}

fn same_extended(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol
}

impl LagrangianContext {
    pub fn new(instance: ProblemInstance) -> Self {
        Self {
            psi_search: instance.psi_search.clone(),
            instance,
            gstar_cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn with_psi_search(mut self, search: ParamSearch) -> Result<Self> {
        if search.family != self.instance.psi {
            return Err(Error::InvalidArgument("psi search must range over Psi".into()));
        }
        search.grid()?;
        self.psi_search = search;
        Ok(self)
    }

    pub fn cached_entries(&self) -> usize {
        self.gstar_cache.read().map_or(0, |c| c.len())
    }

    fn evaluator(&self) -> Result<DualEvaluator<'_>> {
        DualEvaluator::new(&self.instance)
    }

    /// `g*(a|y|^2 + v'y)` through the memo.
    fn gstar(&self, eval: &DualEvaluator<'_>, a: f64, v: &[f64]) -> f64 {
        let key = cache_key(a, v);
        if let Some(&hit) = self.gstar_cache.read().expect("gstar cache poisoned").get(&key) {
            return hit;
        }
        let value = eval.gstar(a, v);
        *self
            .gstar_cache
            .write()
            .expect("gstar cache poisoned")
            .entry(key)
            .or_insert(value)
    }

    fn psi_params(&self, psi: &Quadratic) -> Result<(f64, Vec<f64>)> {
        check_dim("psi", self.instance.m(), psi.dim())?;
        let tol = tolerance::global();
        if !self.instance.psi.contains(psi, tol) {
            return Err(Error::InvalidArgument("psi is not a member of Psi".into()));
        }
        let a = psi.isotropic_curvature(tol).unwrap_or(0.0);
        Ok((a, psi.u().iter().copied().collect()))
    }

    /// `f(x) + psi(Lx) - g*(psi)`; `+inf` off dom f and `-inf` when `g*(psi) = +inf`.
    pub fn lagrangian_value(&self, x: &DVector<f64>, psi: &Quadratic) -> Result<f64> {
        check_dim("x", self.instance.n(), x.len())?;
        let (a, v) = self.psi_params(psi)?;
        let fx = self.instance.f.value(x.as_slice());
        if fx == f64::INFINITY {
            return Ok(fx);
        }
        let eval = self.evaluator()?;
        let gs = self.gstar(&eval, a, &v);
        if gs == f64::INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        let lx = apply(&self.instance.l, x.as_slice());
        let psi0 = psi.with_constant(0.0);
        Ok(fx + psi0.value_at(lx.as_slice()) - gs)
    }

    /// `sup_psi inf_x L(x, psi)` over the psi grid.
    pub fn ld_value(&self) -> Result<LdValue> {
        let inst = &self.instance;
        let primal = perturbed_infimum(inst, None)?;
        let eval = self.evaluator()?;
        let search = &self.psi_search;
        let excluded = AtomicUsize::new(0);
        let out = grid::maximize_validated(&search.grid()?, |p| {
            let (a, v) = search.split(p);
            let gs = self.gstar(&eval, a, v);
            if gs == f64::INFINITY {
                excluded.fetch_add(1, Ordering::Relaxed);
            }
            eval.objective_with(a, v, gs)
        });
        Ok(LdValue {
            report: assemble_report(search, primal, out.value, out.argmax),
            excluded: excluded.into_inner(),
        })
    }

    /// `inf_x f(x) + g**(Lx + y)`; `y = None` is the unperturbed problem.
    fn lp_at(&self, y: Option<&DVector<f64>>) -> Result<LpValue> {
        let inst = &self.instance;
        if let Some(g) = inst.g.as_full_quadratic() {
            if has_quadratic_minorant(g, inst.psi.curvature, tolerance::global()) {
                let p = perturbed_infimum(inst, y)?;
                return Ok(LpValue {
                    value: p.value,
                    point: p.point,
                    grid_truncated: p.grid_truncated,
                    biconjugate_degenerate: false,
                });
            }
            return Ok(LpValue {
                value: f64::NEG_INFINITY,
                point: None,
                grid_truncated: inst.f.as_full_quadratic().is_none(),
                biconjugate_degenerate: true,
            });
        }
        let eval = self.evaluator()?;
        let search = &self.psi_search;
        let members: Vec<(f64, Vec<f64>, f64)> = search
            .candidates()?
            .into_par_iter()
            .filter_map(|p| {
                let (a, v) = search.split(&p);
                let gs = self.gstar(&eval, a, v);
                gs.is_finite().then(|| (a, v.to_vec(), gs))
            })
            .collect();
        let shift = y.cloned();
        let out = grid::minimize_validated(&inst.x_search, |x| {
            let fx = inst.f.value(x);
            if fx == f64::INFINITY {
                return fx;
            }
            let mut lx = apply(&inst.l, x);
            if let Some(s) = &shift {
                lx += s;
            }
            let sq = lx.norm_squared();
            let bic = members
                .iter()
                .map(|(a, v, gs)| a * sq + v.iter().zip(lx.iter()).map(|(v, y)| v * y).sum::<f64>() - gs)
                .fold(f64::NEG_INFINITY, f64::max);
            fx + bic
        });
        Ok(LpValue {
            value: out.value,
            point: out.argmax.map(DVector::from_vec),
            grid_truncated: true,
            biconjugate_degenerate: members.is_empty(),
        })
    }

    /// `inf_x sup_psi L(x, psi)`.
    pub fn lp_value(&self) -> Result<LpValue> {
        self.lp_at(None)
    }

    fn cond_at(&self, y: Option<&DVector<f64>>, tol: f64) -> Result<CondCheck> {
        let lp = self.lp_at(y)?;
        let primal = perturbed_infimum(&self.instance, y)?;
        Ok(CondCheck {
            holds: same_extended(lp.value, primal.value, tol),
            grid_truncated: lp.grid_truncated || primal.grid_truncated,
            lp: lp.value,
            primal: primal.value,
        })
    }

    /// `inf f + g** o L = inf f + g o L` within `tol`.
    pub fn check_cond_cp_lp(&self, tol: f64) -> Result<CondCheck> {
        self.cond_at(None, tol)
    }

    /// The same identity with `g` shifted by each sampled `y`.
    pub fn check_cond_cp_lp_perturbed(&self, ys: &[DVector<f64>], tol: f64) -> Result<SampledCondCheck> {
        let mut per_y = Vec::with_capacity(ys.len());
        for y in ys {
            check_dim("perturbation", self.instance.m(), y.len())?;
            per_y.push((y.clone(), self.cond_at(Some(y), tol)?));
        }
        Ok(SampledCondCheck {
            holds: per_y.iter().all(|(_, c)| c.holds),
            per_y,
            sampled: true,
        })
    }

    /// Whether `g` is Psi-convex at `Lx0` for a near-optimal `x0`.
    pub fn psi_convexity_at_optimum(&self, x0: &DVector<f64>) -> Result<bool> {
        let inst = &self.instance;
        check_dim("x0", inst.n(), x0.len())?;
        let primal = perturbed_infimum(inst, None)?.value;
        let at = inst.objective_at(x0.as_slice());
        if !at.is_finite() || !(at - primal).abs().le(&OPTIMALITY_TOL) {
            return Err(Error::InvalidArgument(format!(
                "x0 is not optimal: objective {at} versus infimum {primal}"
            )));
        }
        let lx0 = inst.l.apply(x0)?;
        match inst.g.as_full_quadratic() {
            Some(g) => {
                let tol = tolerance::global();
                let bic = biconjugate_closed_form(g, &inst.psi, &lx0, tol)?;
                Ok(bic.is_finite() && (bic - g.value_at(lx0.as_slice())).abs() <= OPTIMALITY_TOL)
            }
            None => is_phi_convex_at(&inst.g, &self.psi_search, &lx0, &inst.y_search, OPTIMALITY_TOL),
        }
    }

    /// `V(y) = inf_x f(x) + g(Lx + y)`.
    pub fn value_function(&self, y: &DVector<f64>) -> Result<PrimalValue> {
        check_dim("perturbation", self.instance.m(), y.len())?;
        if y.iter().all(|v| *v == 0.0) {
            perturbed_infimum(&self.instance, None)
        } else {
            perturbed_infimum(&self.instance, Some(y))
        }
    }

    /// Samples `V` on spheres of decreasing radius around 0. The verdict is taken
    /// at the smallest radius; larger radii are reported for context.
    pub fn lsc_probe_at_zero(&self, probe: &ValueFunctionProbe) -> Result<LscReport> {
        probe.validate()?;
        let m = self.instance.m();
        let v0 = self.value_function(&DVector::zeros(m))?.value;
        if !v0.is_finite() {
            return Err(Error::InvalidArgument(format!("V(0) must be finite, got {v0}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(probe.seed);
        let mut per_radius = Vec::with_capacity(probe.radius_ladder.len());
        for &r in &probe.radius_ladder {
            let mut violations = 0;
            let mut min_value = f64::INFINITY;
            for y in sphere_samples(m, r, probe.samples_per_radius, &mut rng) {
                let v = self.value_function(&y)?.value;
                min_value = min_value.min(v);
                if !(v > v0 - probe.eps) {
                    violations += 1;
                }
            }
            per_radius.push(RadiusResult { radius: r, violations, min_value });
        }
        let holds = per_radius.last().is_some_and(|r| r.violations == 0);
        Ok(LscReport { holds, v0, per_radius })
    }
}

/// `t0*phi1 + (1 - t0)*phi2 >= alpha` everywhere, with the attained minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntersectionWitness {
    pub t0: f64,
    pub alpha: f64,
    pub min_value: f64,
}

impl IntersectionWitness {
    pub fn holds(&self) -> bool {
        self.min_value >= self.alpha - INTERSECTION_SLACK
    }
}

/// `m(t) = inf_x t*phi1(x) + (1 - t)*phi2(x)`, concave in `t`.
pub fn combination_minimum(phi1: &Quadratic, phi2: &Quadratic, t: f64) -> Result<f64> {
    Ok(Quadratic::combine(phi1, phi2, t, 1.0 - t)?.infimum(tolerance::global()).value)
}

fn lambda_min(phi1: &Quadratic, phi2: &Quadratic, t: f64) -> f64 {
    let a = phi1.a() * t + phi2.a() * (1.0 - t);
    SymmetricEigen::new(a).eigenvalues.min()
}

/// Maximizes a concave function on `[lo, hi]`; ties move toward smaller `t`.
fn golden_section(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > GOLDEN_TOL {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Endpoints of `{t in [0,1] : A(t) is PSD}`; `lambda_min(A(t))` is concave in `t`.
fn psd_interval(phi1: &Quadratic, phi2: &Quadratic) -> Option<(f64, f64)> {
    let tol = tolerance::global();
    let lm = |t: f64| lambda_min(phi1, phi2, t);
    let peak = golden_section(0.0, 1.0, lm);
    let slack = |t: f64| tol * (phi1.a() * t + phi2.a() * (1.0 - t)).amax().max(1.0);
    if lm(peak) < -slack(peak) {
        return None;
    }
    let edge = |mut inside: f64, mut outside: f64| {
        if lm(outside) >= -slack(outside) {
            return outside;
        }
        while (inside - outside).abs() > GOLDEN_TOL {
            let mid = 0.5 * (inside + outside);
            if lm(mid) >= -slack(mid) {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };
    Some((edge(peak, 0.0), edge(peak, 1.0)))
}

/// The `t` where the linear term `t*u1 + (1-t)*u2` has the least component in the
/// common kernel of both matrices.
fn kernel_root(phi1: &Quadratic, phi2: &Quadratic) -> Option<f64> {
    let n = phi1.dim();
    let mut stacked = DMatrix::zeros(2 * n, n);
    stacked.rows_mut(0, n).copy_from(phi1.a());
    stacked.rows_mut(n, n).copy_from(phi2.a());
    let svd = stacked.svd(false, true);
    let vt = svd.v_t?;
    let scale = svd.singular_values.amax().max(1.0);
    let tol = tolerance::global() * scale;
    let mut num = 0.0;
    let mut den = 0.0;
    let d = phi1.u() - phi2.u();
    for i in 0..n {
        let sigma = svd.singular_values.get(i).copied().unwrap_or(0.0);
        if sigma > tol {
            continue;
        }
        let v = vt.row(i).transpose();
        let (pd, pu) = (v.dot(&d), v.dot(phi2.u()));
        num -= pu * pd;
        den += pd * pd;
    }
    (den > 0.0).then(|| num / den).filter(|t| (0.0..=1.0).contains(t))
}

/// Decides whether some convex combination of `phi1` and `phi2` stays at or above
/// `alpha`, returning the best combination found.
pub fn intersection_property(phi1: &Quadratic, phi2: &Quadratic, alpha: f64) -> Result<Option<IntersectionWitness>> {
    check_dim("intersection pair", phi1.dim(), phi2.dim())?;
    let m = |t: f64| combination_minimum(phi1, phi2, t).unwrap_or(f64::NEG_INFINITY);
    let mut candidates: Vec<f64> = (0..T_SCAN_POINTS)
        .map(|i| i as f64 / (T_SCAN_POINTS - 1) as f64)
        .collect();
    candidates.extend(kernel_root(phi1, phi2));
    if let Some((lo, hi)) = psd_interval(phi1, phi2) {
        candidates.extend([lo, hi, 0.5 * (lo + hi)]);
        if hi > lo {
            candidates.push(golden_section(lo, hi, m));
        }
    }
    let step = 1.0 / (T_SCAN_POINTS - 1) as f64;
    let scanned: Vec<(f64, f64)> = candidates.par_iter().map(|&t| (t, m(t))).collect();
    let (t_scan, m_scan) = best_t(&scanned);
    let mut best = (t_scan, m_scan);
    if m_scan.is_finite() {
        let t = golden_section((t_scan - step).max(0.0), (t_scan + step).min(1.0), m);
        best = best_t(&[best, (t, m(t))]);
    }
    let witness = IntersectionWitness { t0: best.0, alpha, min_value: best.1 };
    Ok(witness.holds().then_some(witness))
}

/// Largest value; ties go to the smaller `t`.
fn best_t(values: &[(f64, f64)]) -> (f64, f64) {
    values
        .iter()
        .copied()
        .fold((f64::NAN, f64::NEG_INFINITY), |acc, (t, v)| {
            if acc.0.is_nan() || v > acc.1 || (v == acc.1 && t < acc.0) {
                (t, v)
            } else {
                acc
            }
        })
}

/// Definition-level check on the nodes of `x_grid`: for every `t` in a
/// 1001-point grid, the sublevel set of the combination misses the sublevel
/// set of `phi1` or that of `phi2`.
pub fn intersection_property_bruteforce(phi1: &Quadratic, phi2: &Quadratic, alpha: f64, x_grid: &GridSpec) -> Result<bool> {
    check_dim("intersection pair", phi1.dim(), phi2.dim())?;
    check_dim("intersection grid", phi1.dim(), x_grid.dim())?;
    x_grid.validate()?;
    let values: Vec<(f64, f64)> = x_grid
        .nodes()
        .iter()
        .map(|x| (phi1.value_at(x), phi2.value_at(x)))
        .collect();
    Ok((0..T_SCAN_POINTS).into_par_iter().all(|i| {
        let t = i as f64 / (T_SCAN_POINTS - 1) as f64;
        let mut meets_first = false;
        let mut meets_second = false;
        for &(p1, p2) in &values {
            if t * p1 + (1.0 - t) * p2 < alpha {
                meets_first |= p1 < alpha;
                meets_second |= p2 < alpha;
                if meets_first && meets_second {
                    return false;
                }
            }
        }
        true
    }))
}

/// Sampling plan for the lower-semicontinuity probe of `V` at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunctionProbe {
    /// Strictly decreasing positive radii.
    pub radius_ladder: Vec<f64>,
    pub samples_per_radius: usize,
    pub eps: f64,
    pub seed: u64,
}

impl Default for ValueFunctionProbe {
    fn default() -> Self {
        Self {
            radius_ladder: vec![1.0, 1e-1, 1e-2, 1e-3, 1e-4],
            samples_per_radius: 32,
            eps: 1e-3,
            seed: 0x5eed,
        }
    }
}

impl ValueFunctionProbe {
    pub fn validate(&self) -> Result<()> {
        if self.radius_ladder.is_empty()
            || self.radius_ladder.iter().any(|r| !(*r > 0.0) || !r.is_finite())
            || self.radius_ladder.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(Error::InvalidArgument("radius ladder must be positive and strictly decreasing".into()));
        }
        if self.samples_per_radius < 8 {
            return Err(Error::InvalidArgument("need at least 8 samples per radius".into()));
        }
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(Error::InvalidArgument("probe eps must be positive".into()));
        }
        Ok(())
    }
}

/// Axis points `+-r e_i` first, then normalized Gaussian draws, which are uniform
/// on the sphere of radius `r`.
fn sphere_samples(m: usize, r: f64, count: usize, rng: &mut ChaCha8Rng) -> Vec<DVector<f64>> {
    let mut out = Vec::with_capacity(count);
    'axes: for i in 0..m {
        for s in [r, -r] {
            if out.len() == count {
                break 'axes;
            }
            let mut y = DVector::zeros(m);
            y[i] = s;
            out.push(y);
        }
    }
    while out.len() < count {
        let y = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = y.norm();
        if norm > 0.0 {
            out.push(y * (r / norm));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiusResult {
    pub radius: f64,
    /// Samples with `V(y) <= V(0) - eps`.
    pub violations: usize,
    pub min_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LscReport {
    pub holds: bool,
    pub v0: f64,
    pub per_radius: Vec<RadiusResult>,
}

/// Parts of the support-based zero-gap test.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportCheck {
    /// `psi` in Psi and `g - psi >= 0` everywhere.
    pub in_support: bool,
    /// `alpha <= inf_x f(x) + psi(Lx)`.
    pub below_infimum: bool,
    /// `f(x0) <= alpha <= psi(Lx0)`.
    pub sandwich: bool,
    /// `psi'(Lx0) <= g*(psi')` for all psi', i.e. `g**(Lx0) <= 0`.
    pub x0_via_support_set: bool,
    /// `g(Lx0) <= 0`.
    pub x0_via_g_value: bool,
    pub x0_condition: bool,
    /// All conditions hold, certifying equal Lagrange primal and dual values.
    pub holds: bool,
    pub grid_truncated: bool,
}

/// Checks a support function `psi` of `g`, a level `alpha` and a point `x0`
/// against the sufficient condition for a zero Lagrangian gap.
pub fn support_zero_gap_check(ctx: &LagrangianContext, psi: &Quadratic, x0: &DVector<f64>, alpha: f64) -> Result<SupportCheck> {
    let inst = &ctx.instance;
    check_dim("x0", inst.n(), x0.len())?;
    let (a, v) = ctx.psi_params(psi)?;
    let tol = tolerance::global();
    let mut truncated = false;

    let support_gap = match inst.g.as_full_quadratic() {
        Some(g) => g.sub(psi)?.infimum(tol).value,
        None => {
            truncated = true;
            grid::minimize_validated(&inst.y_search, |y| inst.g.value(y) - psi.value_at(y)).value
        }
    };
    let in_support = support_gap >= -MEMBERSHIP_SLACK;

    let eval = ctx.evaluator()?;
    truncated |= !eval.exact();
    let inner = eval.inner_inf(a, &v) + psi.c();
    let below_infimum = alpha <= inner + MEMBERSHIP_SLACK;

    let lx0 = inst.l.apply(x0)?;
    let fx0 = inst.f.value(x0.as_slice());
    let psi_lx0 = psi.value_at(lx0.as_slice());
    let sandwich = fx0 <= alpha + MEMBERSHIP_SLACK && alpha <= psi_lx0 + MEMBERSHIP_SLACK;

    let bic = match inst.g.as_full_quadratic() {
        Some(g) => biconjugate_closed_form(g, &inst.psi, &lx0, tol)?,
        None => {
            truncated = true;
            crate::conjugate::biconjugate_at(&inst.g, &ctx.psi_search, &lx0, &inst.y_search)?.value
        }
    };
    let x0_via_support_set = bic <= MEMBERSHIP_SLACK;
    let x0_via_g_value = inst.g.value(lx0.as_slice()) <= MEMBERSHIP_SLACK;
    let x0_condition = x0_via_support_set || x0_via_g_value;

    Ok(SupportCheck {
        holds: in_support && below_infimum && sandwich && x0_condition,
        in_support,
        below_infimum,
        sandwich,
        x0_via_support_set,
        x0_via_g_value,
        x0_condition,
        grid_truncated: truncated,
    })
}

/// `ld <= lp + WEAK_DUALITY_TOL`, with `-inf` on either side treated exactly.
pub fn lagrange_weak_duality_holds(ld: f64, lp: f64) -> bool {
    ld == f64::NEG_INFINITY || lp == f64::INFINITY || ld <= lp + WEAK_DUALITY_TOL
}
