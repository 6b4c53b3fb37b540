//! Elementary functions: generalized quadratics `x'Ax + u'x + c` on R^n,
//! parameterized families of them, and linear maps used for pullbacks.
//!
//! The matrix `A` is stored unhalved, so `a*I` encodes `a*|x|^2`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{check_dim, Error, Result};

/// Symmetry threshold on `max |A - A^T|` accepted at construction.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// `q(x) = x'Ax + u'x + c` with symmetric `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    a: DMatrix<f64>,
    u: DVector<f64>,
    c: f64,
}

/// Optimal value of an unconstrained quadratic problem and an optimizer when one exists.
#[derive(Debug, Clone, PartialEq)]
pub struct Extremum {
    pub value: f64,
    pub point: Option<DVector<f64>>,
}

impl Quadratic {
    pub fn new(a: DMatrix<f64>, u: DVector<f64>, c: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidArgument(format!(
                "quadratic matrix must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        check_dim("quadratic linear term", a.nrows(), u.len())?;
        if a.nrows() == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        let deviation = (&a - a.transpose()).amax();
        if !(deviation <= SYMMETRY_TOL) {
            return Err(Error::Asymmetric { deviation });
        }
        if a.iter().chain(u.iter()).any(|v| !v.is_finite()) || !c.is_finite() {
            return Err(Error::InvalidArgument("coefficients must be finite".into()));
        }
        Ok(Self::symmetrized(a, u, c))
    }

    /// Builds from parts that are symmetric up to rounding (e.g. `L'AL`).
    pub(crate) fn symmetrized(a: DMatrix<f64>, u: DVector<f64>, c: f64) -> Self {
        let a = (&a + a.transpose()) * 0.5;
        Self { a, u, c }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            a: DMatrix::zeros(dim, dim),
            u: DVector::zeros(dim),
            c: 0.0,
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self {
            c,
            ..Self::zero(dim)
        }
    }

    pub fn affine(u: DVector<f64>, c: f64) -> Self {
        let n = u.len();
        Self {
            a: DMatrix::zeros(n, n),
            u,
            c,
        }
    }

    /// `a|x|^2 + u'x + c`.
    pub fn isotropic(a: f64, u: DVector<f64>, c: f64) -> Self {
        let n = u.len();
        Self {
            a: DMatrix::identity(n, n) * a,
            u,
            c,
        }
    }

    /// One-dimensional `a x^2 + b x + c`.
    pub fn scalar(a: f64, b: f64, c: f64) -> Self {
        Self::isotropic(a, DVector::from_element(1, b), c)
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn u(&self) -> &DVector<f64> {
        &self.u
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn evaluate(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim("evaluate", self.dim(), x.len())?;
        Ok(self.value_at(x.as_slice()))
    }

    /// Evaluation without a dimension check; `x.len()` must equal `dim()`.
    pub fn value_at(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        debug_assert_eq!(x.len(), n);
        let mut quad = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.a[(i, j)] * x[j];
            }
            quad += x[i] * row;
        }
        let lin: f64 = self.u.iter().zip(x).map(|(u, x)| u * x).sum();
        quad + lin + self.c
    }

    /// Gradient `2Ax + u`.
    pub fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("gradient", self.dim(), x.len())?;
        Ok(&self.a * x * 2.0 + &self.u)
    }

    /// `x -> self(Lx)`.
    pub fn pullback(&self, map: &LinearMap) -> Result<Quadratic> {
        check_dim("pullback", self.dim(), map.rows())?;
        let m = map.matrix();
        let a = m.transpose() * &self.a * m;
        let u = m.transpose() * &self.u;
        Ok(Self::symmetrized(a, u, self.c))
    }

    /// `s1*q1 + s2*q2`.
    pub fn combine(q1: &Quadratic, q2: &Quadratic, s1: f64, s2: f64) -> Result<Quadratic> {
        check_dim("combine", q1.dim(), q2.dim())?;
        Ok(Self {
            a: &q1.a * s1 + &q2.a * s2,
            u: &q1.u * s1 + &q2.u * s2,
            c: q1.c * s1 + q2.c * s2,
        })
    }

    pub fn add(&self, other: &Quadratic) -> Result<Quadratic> {
        Self::combine(self, other, 1.0, 1.0)
    }

    pub fn sub(&self, other: &Quadratic) -> Result<Quadratic> {
        Self::combine(self, other, 1.0, -1.0)
    }

    pub fn scaled(&self, s: f64) -> Quadratic {
        Self {
            a: &self.a * s,
            u: &self.u * s,
            c: self.c * s,
        }
    }

    pub fn with_constant(&self, c: f64) -> Quadratic {
        Self {
            c,
            ..self.clone()
        }
    }

    /// `x -> self(x + y)`.
    pub fn translated(&self, y: &DVector<f64>) -> Result<Quadratic> {
        check_dim("translate", self.dim(), y.len())?;
        let u = &self.u + &self.a * y * 2.0;
        let c = self.value_at(y.as_slice());
        Ok(Self {
            a: self.a.clone(),
            u,
            c,
        })
    }

    /// Returns `a` when `A = aI` within `tol` on every entry.
    pub fn isotropic_curvature(&self, tol: f64) -> Option<f64> {
        let n = self.dim();
        let diag = self.a.diagonal();
        let a = 0.5 * (diag.max() + diag.min());
        let dev = (&self.a - DMatrix::identity(n, n) * a).amax();
        (dev <= tol).then_some(a)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.a.amax() <= tol && self.u.amax() <= tol && self.c.abs() <= tol
    }

    /// Largest entrywise distance between two quadratics of equal dimension.
    pub fn max_coefficient_gap(&self, other: &Quadratic) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        (&self.a - &other.a)
            .amax()
            .max((&self.u - &other.u).amax())
            .max((self.c - other.c).abs())
    }

    /// `inf_x q(x)` in closed form. Eigenvalues below `-tol*max(1,|A|)` or a
    /// linear term with a component above `tol*max(1,|u|)` in the numerical
    /// kernel of `A` make the problem unbounded below.
    pub fn infimum(&self, tol: f64) -> Extremum {
        let eig = SymmetricEigen::new(self.a.clone());
        infimum_spectral(&eig.eigenvalues, &eig.eigenvectors, &self.u, self.c, tol)
    }

    /// `sup_x q(x)`, via `-inf_x (-q)(x)`.
    pub fn supremum(&self, tol: f64) -> Extremum {
        let inf = self.scaled(-1.0).infimum(tol);
        Extremum {
            value: -inf.value,
            point: inf.point,
        }
    }
}

/// Closed-form infimum of `x'Ax + u'x + c` given the eigen-decomposition
/// `A = V diag(values) V'`.
pub(crate) fn infimum_spectral(
    values: &DVector<f64>,
    vectors: &DMatrix<f64>,
    u: &DVector<f64>,
    c: f64,
    tol: f64,
) -> Extremum {
    let scale = values.amax().max(1.0);
    let eig_tol = tol * scale;
    if values.iter().any(|&l| l < -eig_tol) {
        return Extremum {
            value: f64::NEG_INFINITY,
            point: None,
        };
    }
    let kernel_tol = tol * u.norm().max(1.0);
    let n = u.len();
    let mut value = c;
    let mut point = DVector::zeros(n);
    for (i, &lambda) in values.iter().enumerate() {
        let v = vectors.column(i);
        let w = v.dot(u);
        if lambda <= eig_tol {
            if w.abs() > kernel_tol {
                return Extremum {
                    value: f64::NEG_INFINITY,
                    point: None,
                };
            }
            continue;
        }
        value -= w * w / (4.0 * lambda);
        point -= v * (w / (2.0 * lambda));
    }
    Extremum {
        value,
        point: Some(point),
    }
}

/// Admissible curvature for a family of isotropic quadratics `a|x|^2 + u'x + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurvatureSpec {
    /// Affine functions only.
    Zero,
    NonNegative,
    NonPositive,
    Fixed(f64),
    Any,
}

impl CurvatureSpec {
    pub fn admits(&self, a: f64, tol: f64) -> bool {
        match *self {
            CurvatureSpec::Zero => a.abs() <= tol,
            CurvatureSpec::NonNegative => a >= -tol,
            CurvatureSpec::NonPositive => a <= tol,
            CurvatureSpec::Fixed(f) => (a - f).abs() <= tol,
            CurvatureSpec::Any => true,
        }
    }

    fn project(&self, a: f64) -> f64 {
        match *self {
            CurvatureSpec::Zero => 0.0,
            CurvatureSpec::NonNegative => a.max(0.0),
            CurvatureSpec::NonPositive => a.min(0.0),
            CurvatureSpec::Fixed(f) => f,
            CurvatureSpec::Any => a,
        }
    }

    /// Whether the curvature is a free search parameter.
    pub fn is_free(&self) -> bool {
        matches!(
            self,
            CurvatureSpec::NonNegative | CurvatureSpec::NonPositive | CurvatureSpec::Any
        )
    }

    /// The curvature value used when it is not free.
    pub fn pinned(&self) -> f64 {
        match *self {
            CurvatureSpec::Fixed(f) => f,
            _ => 0.0,
        }
    }

    /// Admissible range intersected with `[-clip, clip]`.
    pub fn search_range(&self, clip: f64) -> (f64, f64) {
        match *self {
            CurvatureSpec::Zero => (0.0, 0.0),
            CurvatureSpec::NonNegative => (0.0, clip),
            CurvatureSpec::NonPositive => (-clip, 0.0),
            CurvatureSpec::Fixed(f) => (f, f),
            CurvatureSpec::Any => (-clip, clip),
        }
    }
}

/// A class of elementary functions on R^dim.
#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    pub dim: usize,
    pub curvature: CurvatureSpec,
    pub includes_constants: bool,
}

impl Family {
    pub fn new(dim: usize, curvature: CurvatureSpec) -> Self {
        Self {
            dim,
            curvature,
            includes_constants: true,
        }
    }

    pub fn affine(dim: usize) -> Self {
        Self::new(dim, CurvatureSpec::Zero)
    }

    /// Membership within `tol`: the quadratic part must be within `tol` of the
    /// nearest admissible `aI`. The zero function is always a member.
    pub fn contains(&self, q: &Quadratic, tol: f64) -> bool {
        if q.dim() != self.dim {
            return false;
        }
        if q.is_zero(tol) {
            return true;
        }
        let n = q.dim();
        let diag = q.a().diagonal();
        let mid = 0.5 * (diag.max() + diag.min());
        let a = self.curvature.project(mid);
        let dev = (q.a() - DMatrix::identity(n, n) * a).amax();
        dev <= tol && (self.includes_constants || q.c().abs() <= tol)
    }

    /// Element with curvature `a`, linear term `u` and no constant.
    pub fn element(&self, a: f64, u: DVector<f64>) -> Quadratic {
        Quadratic::isotropic(a, u, 0.0)
    }

    /// Whether `Phi - Phi` stays inside the family.
    pub fn is_difference_closed(&self) -> bool {
        matches!(
            self.curvature,
            CurvatureSpec::Zero | CurvatureSpec::Any | CurvatureSpec::Fixed(0.0)
        )
    }
}

/// A linear map R^n -> R^m stored as an m x n matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    matrix: DMatrix<f64>,
}

impl LinearMap {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(Error::InvalidArgument("linear map must be non-empty".into()));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("linear map entries must be finite".into()));
        }
        Ok(Self { matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n, n),
        }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("ragged linear map rows".into()));
        }
        Self::new(DMatrix::from_fn(m, n, |i, j| rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("linear map", self.cols(), x.len())?;
        Ok(&self.matrix * x)
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.matrix
            .clone()
            .singular_values()
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn evaluates_catalog_objectives() {
        let zero = Quadratic::zero(2);
        assert_eq!(zero.evaluate(&dvector![1.0, 2.0]).unwrap(), 0.0);

        let shifted = Quadratic::scalar(1.0, 2.0, 1.0);
        assert_eq!(shifted.evaluate(&dvector![-1.0]).unwrap(), 0.0);

        let f = Quadratic::new(DMatrix::from_diagonal(&dvector![3.0, 2.0]), dvector![0.0, 0.0], 0.0)
            .unwrap();
        assert_eq!(f.evaluate(&dvector![1.0, 1.0]).unwrap(), 5.0);
    }

    #[test]
    fn rejects_bad_input() {
        let q = Quadratic::zero(2);
        assert!(matches!(
            q.evaluate(&dvector![1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(
            Quadratic::new(asym, dvector![0.0, 0.0], 0.0),
            Err(Error::Asymmetric { .. })
        ));
        let l = LinearMap::identity(3);
        assert!(q.pullback(&l).is_err());
        assert!(Quadratic::combine(&q, &Quadratic::zero(1), 1.0, 1.0).is_err());
    }

    #[test]
    fn pullback_matches_composition() {
        let psi = Quadratic::scalar(0.0, 3.0, 0.0);
        let pulled = psi.pullback(&LinearMap::identity(1)).unwrap();
        assert_eq!(pulled, psi);

        // psi(y) = -y^2 + 2y along L(x,y) = x - y
        let psi = Quadratic::scalar(-1.0, 2.0, 0.0);
        let l = LinearMap::from_rows(&[&[1.0, -1.0]]).unwrap();
        let q = psi.pullback(&l).unwrap();
        for &(x, y) in &[(0.0, 0.0), (1.0, 2.0), (-3.0, 0.5)] {
            let d: f64 = x - y;
            let expected = -d * d + 2.0 * d;
            assert!((q.evaluate(&dvector![x, y]).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn combine_endpoints_and_cancellation() {
        let q1 = Quadratic::scalar(-1.0, 0.5, 2.0);
        let q2 = Quadratic::scalar(3.0, -1.0, 0.0);
        assert!(Quadratic::combine(&q1, &q1, 1.0, -1.0).unwrap().is_zero(0.0));
        assert_eq!(Quadratic::combine(&q1, &q2, 1.0, 0.0).unwrap(), q1);
    }

    #[test]
    fn membership_by_curvature() {
        let tol = 1e-9;
        let affine = Family::affine(1);
        let cy = Quadratic::scalar(0.0, 2.5, 0.0).pullback(&LinearMap::identity(1)).unwrap();
        assert!(affine.contains(&cy, tol));

        let nonpos = Family::new(2, CurvatureSpec::NonPositive);
        let bowl = Quadratic::isotropic(1.0, dvector![0.0, 0.0], 0.0);
        assert!(!nonpos.contains(&bowl, tol));

        // b L'L with L = [1, -1] is not a multiple of the identity.
        let l = LinearMap::from_rows(&[&[1.0, -1.0]]).unwrap();
        let q = Quadratic::scalar(2.0, 0.0, 0.0).pullback(&l).unwrap();
        assert!(!Family::affine(2).contains(&q, tol));
        assert!(!Family::new(2, CurvatureSpec::Any).contains(&q, tol));
    }

    #[test]
    fn zero_is_in_every_family() {
        for spec in [
            CurvatureSpec::Zero,
            CurvatureSpec::NonNegative,
            CurvatureSpec::NonPositive,
            CurvatureSpec::Fixed(-2.0),
            CurvatureSpec::Any,
        ] {
            for dim in 1..4 {
                assert!(Family::new(dim, spec).contains(&Quadratic::zero(dim), 0.0));
            }
        }
    }

    #[test]
    fn infimum_branches() {
        let tol = 1e-9;
        // (x+1)^2 + 4x^2 = 5x^2 + 2x + 1, min 4/5 at -1/5
        let q = Quadratic::scalar(5.0, 2.0, 1.0);
        let inf = q.infimum(tol);
        assert!((inf.value - 0.8).abs() < 1e-15);
        assert!((inf.point.unwrap()[0] + 0.2).abs() < 1e-15);

        assert_eq!(Quadratic::scalar(-1.0, 0.0, 0.0).infimum(tol).value, f64::NEG_INFINITY);
        assert_eq!(Quadratic::scalar(0.0, 1.0, 0.0).infimum(tol).value, f64::NEG_INFINITY);
        assert_eq!(Quadratic::scalar(0.0, 0.0, 3.0).infimum(tol).value, 3.0);
    }

    #[test]
    fn operator_norm_of_difference_map() {
        let l = LinearMap::from_rows(&[&[1.0, -1.0]]).unwrap();
        assert!((l.operator_norm() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn translation_shifts_argument() {
        let q = Quadratic::scalar(-1.0, 2.0, -1.0);
        let t = q.translated(&dvector![0.5]).unwrap();
        for x in [-2.0, 0.0, 1.3] {
            let lhs = t.value_at(&[x]);
            let rhs = q.value_at(&[x + 0.5]);
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
