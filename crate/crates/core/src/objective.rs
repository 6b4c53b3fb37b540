//! Extended-valued objectives `f: R^n -> (-inf, +inf]` and weak-convexity moduli.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::elementary::{LinearMap, Quadratic};
use crate::error::{check_dim, Error, Result};

/// Pure evaluator for black-box objectives. Must not return `-inf`.
pub type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Axis-aligned box; the objective is `+inf` outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl DomainBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::InvalidArgument("domain box bounds disagree".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u) || l.is_nan()) {
            return Err(Error::InvalidArgument("domain box needs lower <= upper".into()));
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    /// A finite representative point (midpoint, clamped when a side is infinite).
    fn anchor(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| match (lo.is_finite(), hi.is_finite()) {
                (true, true) => 0.5 * (lo + hi),
                (true, false) => lo,
                (false, true) => hi,
                (false, false) => 0.0,
            })
            .collect()
    }
}

#[derive(Clone)]
pub enum Body {
    Quadratic(Quadratic),
    /// `source` records a quadratic formula behind the evaluator, used only for
    /// serialization; the engines still treat the body as opaque.
    BlackBox {
        eval: Evaluator,
        source: Option<Quadratic>,
    },
}

impl fmt::Debug for Body {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Body::Quadratic(q) => f.debug_tuple("Quadratic").field(q).finish(),
            Body::BlackBox { source, .. } => f
                .debug_struct("BlackBox")
                .field("source", source)
                .finish_non_exhaustive(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Objective {
    dim: usize,
    body: Body,
    domain: Option<DomainBox>,
}

const PROPER_SAMPLES: usize = 4096;

impl Objective {
    pub fn quadratic(q: Quadratic) -> Self {
        Self {
            dim: q.dim(),
            body: Body::Quadratic(q),
            domain: None,
        }
    }

    /// Wraps an opaque evaluator. Properness is checked by sampling the domain box
    /// (or `[-10, 10]^dim` when no box is given).
    pub fn black_box(dim: usize, eval: Evaluator, domain: Option<DomainBox>) -> Result<Self> {
        let obj = Self {
            dim,
            body: Body::BlackBox { eval, source: None },
            domain,
        };
        obj.validate()?;
        Ok(obj)
    }

    /// A quadratic formula evaluated through the black-box path.
    pub fn sampled_quadratic(q: Quadratic, domain: Option<DomainBox>) -> Result<Self> {
        let dim = q.dim();
        let inner = q.clone();
        let eval: Evaluator = Arc::new(move |x: &[f64]| inner.value_at(x));
        let obj = Self {
            dim,
            body: Body::BlackBox {
                eval,
                source: Some(q),
            },
            domain,
        };
        obj.validate()?;
        Ok(obj)
    }

    /// Black box built internally from already-validated parts.
    pub(crate) fn from_evaluator_unchecked(dim: usize, eval: Evaluator, domain: Option<DomainBox>) -> Self {
        Self {
            dim,
            body: Body::BlackBox { eval, source: None },
            domain,
        }
    }

    pub fn with_domain(mut self, domain: DomainBox) -> Result<Self> {
        self.domain = Some(domain);
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidArgument("objective dimension must be positive".into()));
        }
        if let Some(d) = &self.domain {
            check_dim("domain box", self.dim, d.dim())?;
        }
        if !self.has_finite_point() {
            return Err(Error::NotProper("no finite value found in the domain".into()));
        }
        Ok(())
    }

    fn has_finite_point(&self) -> bool {
        let anchor = self
            .domain
            .as_ref()
            .map_or_else(|| vec![0.0; self.dim], DomainBox::anchor);
        if self.value(&anchor).is_finite() {
            return true;
        }
        if let Body::Quadratic(_) = self.body {
            // finite everywhere on a non-empty box
            return true;
        }
        let (lo, hi) = self.sampling_box(10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut x = vec![0.0; self.dim];
        (0..PROPER_SAMPLES).any(|_| {
            for i in 0..self.dim {
                x[i] = rng.gen_range(lo[i]..=hi[i]);
            }
            self.value(&x).is_finite()
        })
    }

    /// The domain box intersected with `[-radius, radius]^dim`.
    pub fn sampling_box(&self, radius: f64) -> (Vec<f64>, Vec<f64>) {
        match &self.domain {
            Some(d) => (
                d.lower.iter().map(|v| v.max(-radius)).collect(),
                d.upper.iter().map(|v| v.min(radius)).collect(),
            ),
            None => (vec![-radius; self.dim], vec![radius; self.dim]),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    pub fn domain(&self) -> Option<&DomainBox> {
        self.domain.as_ref()
    }

    /// The quadratic body when it is defined on all of R^n, i.e. eligible for the
    /// closed-form engine.
    pub fn as_full_quadratic(&self) -> Option<&Quadratic> {
        match (&self.body, &self.domain) {
            (Body::Quadratic(q), None) => Some(q),
            _ => None,
        }
    }

    /// Value in `(-inf, +inf]`; `+inf` outside the domain box.
    pub fn eval_extended(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim("objective", self.dim, x.len())?;
        Ok(self.value(x.as_slice()))
    }

    /// Unchecked evaluation. A NaN or `-inf` from a black box is reported as `+inf`
    /// so that it can never win a supremum of `phi - f`.
    pub fn value(&self, x: &[f64]) -> f64 {
        if let Some(d) = &self.domain {
            if !d.contains(x) {
                return f64::INFINITY;
            }
        }
        let v = match &self.body {
            Body::Quadratic(q) => q.value_at(x),
            Body::BlackBox { eval, .. } => eval(x),
        };
        if v.is_nan() || v == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            v
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModulusMethod {
    Analytic,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakConvexityReport {
    pub modulus: f64,
    pub certified: bool,
    pub method: ModulusMethod,
}

const MODULUS_TRIPLES: usize = 1000;

/// Smallest `rho >= 0` with `f + rho |x|^2` convex. Quadratic bodies are exact;
/// black boxes get a sampled lower estimate from midpoint-type three-point tests.
pub fn weak_convexity_modulus(f: &Objective) -> WeakConvexityReport {
    match &f.body {
        Body::Quadratic(q) => {
            let lambda_min = SymmetricEigen::new(q.a().clone()).eigenvalues.min();
            WeakConvexityReport {
                modulus: (-lambda_min).max(0.0),
                certified: true,
                method: ModulusMethod::Analytic,
            }
        }
        Body::BlackBox { .. } => WeakConvexityReport {
            modulus: sampled_modulus(f, MODULUS_TRIPLES, 0x03c0_ffee),
            certified: false,
            method: ModulusMethod::Sampled,
        },
    }
}

fn sampled_modulus(f: &Objective, triples: usize, seed: u64) -> f64 {
    let (lo, hi) = f.sampling_box(10.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = f.dim();
    let mut x1 = vec![0.0; n];
    let mut x2 = vec![0.0; n];
    let mut xl = vec![0.0; n];
    let mut rho: f64 = 0.0;
    for _ in 0..triples {
        for i in 0..n {
            x1[i] = rng.gen_range(lo[i]..=hi[i]);
            x2[i] = rng.gen_range(lo[i]..=hi[i]);
        }
        let lambda: f64 = rng.gen_range(0.05..0.95);
        for i in 0..n {
            xl[i] = lambda * x1[i] + (1.0 - lambda) * x2[i];
        }
        let (f1, f2, fl) = (f.value(&x1), f.value(&x2), f.value(&xl));
        if !(f1.is_finite() && f2.is_finite() && fl.is_finite()) {
            continue;
        }
        let dist2: f64 = x1.iter().zip(&x2).map(|(a, b)| (a - b) * (a - b)).sum();
        if dist2 < 1e-12 {
            continue;
        }
        let excess = fl - lambda * f1 - (1.0 - lambda) * f2;
        rho = rho.max(excess / (lambda * (1.0 - lambda) * dist2));
    }
    rho
}

/// Modulus bound `a + b|L|^2` for `x -> f(x) - b|Lx|^2` when `f` has modulus `a`.
pub fn shifted_modulus(modulus: f64, b: f64, map: &LinearMap) -> Result<f64> {
    if !(b >= 0.0) {
        return Err(Error::InvalidArgument(format!("shift b must be >= 0, got {b}")));
    }
    if !(modulus >= 0.0) {
        return Err(Error::InvalidArgument(format!("modulus must be >= 0, got {modulus}")));
    }
    let norm = map.operator_norm();
    Ok(modulus + b * norm * norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn extended_evaluation() {
        let f = Objective::quadratic(Quadratic::scalar(1.0, 2.0, 1.0));
        assert_eq!(f.eval_extended(&dvector![-1.0]).unwrap(), 0.0);

        let boxed = Objective::quadratic(Quadratic::scalar(1.0, 0.0, 0.0))
            .with_domain(DomainBox::new(vec![0.0], vec![1.0]).unwrap())
            .unwrap();
        assert_eq!(boxed.eval_extended(&dvector![2.0]).unwrap(), f64::INFINITY);
        assert!(boxed.as_full_quadratic().is_none());

        let g = Objective::black_box(1, Arc::new(|x: &[f64]| 2.0 * x[0] + 1.0), None).unwrap();
        assert_eq!(g.eval_extended(&dvector![3.0]).unwrap(), 7.0);
        assert!(g.eval_extended(&dvector![3.0, 1.0]).is_err());
    }

    #[test]
    fn improper_black_box_is_rejected() {
        let r = Objective::black_box(1, Arc::new(|_: &[f64]| f64::INFINITY), None);
        assert!(matches!(r, Err(Error::NotProper(_))));
    }

    #[test]
    fn negative_infinity_is_never_returned() {
        let g = Objective::black_box(
            1,
            Arc::new(|x: &[f64]| if x[0] > 5.0 { f64::NEG_INFINITY } else { 0.0 }),
            None,
        )
        .unwrap();
        assert_eq!(g.value(&[6.0]), f64::INFINITY);
    }

    #[test]
    fn analytic_moduli() {
        let report = weak_convexity_modulus(&Objective::quadratic(Quadratic::scalar(1.0, 2.0, 1.0)));
        assert_eq!(report.modulus, 0.0);
        assert!(report.certified);
        let report =
            weak_convexity_modulus(&Objective::quadratic(Quadratic::scalar(-1.0, 2.0, -1.0)));
        assert_eq!(report.modulus, 1.0);
        let report = weak_convexity_modulus(&Objective::quadratic(Quadratic::scalar(-3.0, 0.0, 0.0)));
        assert_eq!(report.modulus, 3.0);
    }

    #[test]
    fn sampled_modulus_is_uncertified_lower_estimate() {
        let q = Quadratic::scalar(-2.0, 1.0, 0.0);
        let f = Objective::sampled_quadratic(q, None).unwrap();
        let report = weak_convexity_modulus(&f);
        assert!(!report.certified);
        assert_eq!(report.method, ModulusMethod::Sampled);
        assert!((report.modulus - 2.0).abs() < 1e-6, "{}", report.modulus);
    }

    #[test]
    fn shifted_modulus_formula() {
        let diff = LinearMap::from_rows(&[&[1.0, -1.0]]).unwrap();
        assert_eq!(shifted_modulus(1.0, 0.0, &diff).unwrap(), 1.0);
        assert!((shifted_modulus(0.0, 1.0, &diff).unwrap() - 2.0).abs() < 1e-12);
        assert!((shifted_modulus(2.0, 3.0, &LinearMap::identity(1)).unwrap() - 5.0).abs() < 1e-12);
        assert!(shifted_modulus(1.0, -0.5, &diff).is_err());
    }
}
