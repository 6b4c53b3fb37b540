//! Duality reports and the catalog comparison tables.

use std::fmt::{self, Write as _};

use nalgebra::dvector;
use serde::{Serialize, Serializer};

use super::catalog::catalog;
pub use super::io::ElementJson;
use crate::conjugate::conjugate_closed_form;
use crate::duality::{
    composite_conjugate, dcp_value, difference_in_family, dual_objective, epi_decompose, epi_decompose_with, fixed_point_certificates,
    g_conjugate, target_conjugate, verify_conjugate_bound, verify_optimality, verify_zero_gap_system, CertificateKind,
    DualityReport, EpiPoint, EpiTarget, GapCertificate, ProblemInstance, WEAK_DUALITY_TOL,
};
use crate::elementary::Quadratic;
use crate::error::Result;
use crate::lagrange::{lagrange_weak_duality_holds, support_zero_gap_check, LagrangianContext};

/// Serializes an extended real as a JSON number, or as `"inf"`, `"-inf"`, `"nan"`.
pub fn extended<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str(&format_extended(*v))
    }
}

pub fn format_extended(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else if v.is_nan() {
        "nan".into()
    } else if v != 0.0 && !(1e-4..1e15).contains(&v.abs()) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReportFlags {
    pub grid_truncated: bool,
    pub unbounded_suspected: bool,
    pub weak_duality_violated: bool,
    pub lagrange_weak_duality_violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateEntry {
    pub kind: &'static str,
    pub eps: f64,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    #[serde(serialize_with = "extended")]
    pub primal: f64,
    pub primal_point: Option<Vec<f64>>,
    #[serde(serialize_with = "extended")]
    pub dcp: f64,
    #[serde(serialize_with = "extended")]
    pub ld: f64,
    #[serde(serialize_with = "extended")]
    pub lp: f64,
    #[serde(serialize_with = "extended")]
    pub gap: f64,
    pub flags: ReportFlags,
    pub attaining_psi: Option<ElementJson>,
    /// Lagrangian evaluations skipped because `g*(psi) = +inf`.
    pub ld_excluded: usize,
    pub certificates: Vec<CertificateEntry>,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn weak_duality_holds(&self) -> bool {
        !self.flags.weak_duality_violated && !self.flags.lagrange_weak_duality_violated
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    /// Fixed-width human-readable summary.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let mut row = |k: &str, v: String| {
            let _ = writeln!(out, "{k:<28}{v:>24}");
        };
        row("primal", format_extended(self.primal));
        row("conjugate dual", format_extended(self.dcp));
        row("lagrange dual", format_extended(self.ld));
        row("lagrange primal", format_extended(self.lp));
        row("gap", format_extended(self.gap));
        if let Some(p) = &self.attaining_psi {
            row("attaining psi curvature", format_extended(p.a));
            for (i, u) in p.u.iter().enumerate() {
                row(&format!("attaining psi slope[{i}]"), format_extended(*u));
            }
        }
        row("grid truncated", self.flags.grid_truncated.to_string());
        row("unbounded suspected", self.flags.unbounded_suspected.to_string());
        row("weak duality violated", (!self.weak_duality_holds()).to_string());
        for c in &self.certificates {
            row(&format!("{} eps={:e}", c.kind, c.eps), c.valid.to_string());
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

pub fn kind_name(kind: CertificateKind) -> &'static str {
    match kind {
        CertificateKind::ConjugateBound => "conjugate-bound",
        CertificateKind::ZeroGapSystem => "zero-gap",
        CertificateKind::FixedPoint => "optimality",
    }
}

const SCAN_EPS: [f64; 3] = [1e-1, 1e-3, 1e-6];

/// Checks the certificates suggested by the primal minimizer and the attaining
/// psi, with `phi = -psi o L`.
fn certificate_scan(inst: &ProblemInstance, dual: &DualityReport) -> Result<Vec<CertificateEntry>> {
    let (Some(x), Some(choice)) = (&dual.primal_point, &dual.attaining_psi) else {
        return Ok(Vec::new());
    };
    if !inst.objective_at(x.as_slice()).is_finite() {
        return Ok(Vec::new());
    }
    let psi = choice.psi.clone();
    let phi = psi.pullback(&inst.l)?.scaled(-1.0);
    let mut out = Vec::new();
    for eps in SCAN_EPS {
        let mut cert = GapCertificate {
            eps,
            x: x.clone(),
            phi: phi.clone(),
            psi: psi.clone(),
            kind: CertificateKind::ConjugateBound,
        };
        out.push(CertificateEntry {
            kind: kind_name(cert.kind),
            eps,
            valid: verify_conjugate_bound(inst, &cert)?.valid,
        });
        cert.kind = CertificateKind::ZeroGapSystem;
        out.push(CertificateEntry {
            kind: kind_name(cert.kind),
            eps,
            valid: verify_zero_gap_system(inst, &cert)?.valid,
        });
    }
    let certs = fixed_point_certificates(x, &phi, &psi);
    out.push(CertificateEntry {
        kind: kind_name(CertificateKind::FixedPoint),
        eps: certs.last().map_or(0.0, |c| c.eps),
        valid: verify_optimality(inst, x, &certs)?.valid,
    });
    Ok(out)
}

/// Primal, conjugate dual, Lagrange dual and primal, and a certificate scan.
pub fn run_report(inst: &ProblemInstance) -> Result<RunReport> {
    let dual = dcp_value(inst)?;
    let ctx = LagrangianContext::new(inst.clone());
    let ld = ctx.ld_value()?;
    let lp = ctx.lp_value()?;
    let certificates = certificate_scan(inst, &dual)?;
    let ld_value = ld.report.dual_conjugate;
    Ok(RunReport {
        primal: dual.primal,
        primal_point: dual.primal_point.as_ref().map(|p| p.iter().copied().collect()),
        dcp: dual.dual_conjugate,
        ld: ld_value,
        lp: lp.value,
        gap: dual.gap,
        flags: ReportFlags {
            grid_truncated: dual.flags.grid_truncated || lp.grid_truncated,
            unbounded_suspected: dual.flags.unbounded_suspected,
            weak_duality_violated: dual.flags.weak_duality_violated,
            lagrange_weak_duality_violated: !lagrange_weak_duality_holds(ld_value, lp.value),
        },
        attaining_psi: dual.attaining_psi.as_ref().and_then(|c| ElementJson::from_quadratic(&c.psi)),
        ld_excluded: ld.excluded,
        certificates,
        warnings: inst.domain_warnings(),
    })
}

/// One line of a comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub quantity: String,
    pub expected: String,
    pub computed: String,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reproduction {
    pub name: String,
    pub rows: Vec<ComparisonRow>,
    pub report: RunReport,
}

impl Reproduction {
    pub fn all_match(&self) -> bool {
        self.rows.iter().all(|r| r.matches)
    }

    pub fn row(&self, quantity: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }
}

impl fmt::Display for Reproduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "instance {}", self.name)?;
        writeln!(f, "{:<44}{:>22}{:>22}  status", "quantity", "expected", "computed")?;
        for r in &self.rows {
            let status = if r.matches { "ok" } else { "MISMATCH" };
            writeln!(f, "{:<44}{:>22}{:>22}  {}", r.quantity, r.expected, r.computed, status)?;
        }
        let ok = self.rows.iter().filter(|r| r.matches).count();
        write!(f, "{ok}/{} rows match", self.rows.len())
    }
}

/// Absolute tolerance for numeric rows.
pub const REPRODUCE_TOL: f64 = 1e-6;

#[derive(Default)]
struct Rows(Vec<ComparisonRow>);

impl Rows {
    fn value(&mut self, quantity: &str, expected: f64, computed: f64) {
        let matches = expected == computed || (expected - computed).abs() <= REPRODUCE_TOL;
        self.0.push(ComparisonRow {
            quantity: quantity.into(),
            expected: format_extended(expected),
            computed: format_extended(computed),
            matches,
        });
    }

    fn at_most(&mut self, quantity: &str, bound: f64, computed: f64) {
        self.0.push(ComparisonRow {
            quantity: quantity.into(),
            expected: format!("<= {bound:e}"),
            computed: if computed.is_finite() { format!("{computed:.3e}") } else { format_extended(computed) },
            matches: computed <= bound,
        });
    }

    fn flag(&mut self, quantity: &str, expected: bool, computed: bool) {
        self.0.push(ComparisonRow {
            quantity: quantity.into(),
            expected: expected.to_string(),
            computed: computed.to_string(),
            matches: expected == computed,
        });
    }

    fn duality(&mut self, report: &RunReport, value: f64) {
        self.value("primal value", value, report.primal);
        self.value("conjugate dual value", value, report.dcp);
        self.at_most("|gap|", REPRODUCE_TOL, report.gap.abs());
        self.value("lagrange dual value", value, report.ld);
        self.value("lagrange primal value", value, report.lp);
    }
}

fn q1(a: f64, b: f64, c: f64) -> Quadratic {
    Quadratic::scalar(a, b, c)
}

/// Runs a catalog instance and compares against its known closed-form values.
pub fn reproduce(name: &str) -> Result<Reproduction> {
    let inst = catalog(name)?;
    let report = run_report(&inst)?;
    let mut rows = Rows::default();
    let f_quad = inst.f.as_full_quadratic().cloned().expect("catalog data are quadratic");
    let g_conj = |psi: &Quadratic| g_conjugate(&inst, psi).map(|v| v.value);
    match name {
        "ex4.7" => {
            rows.duality(&report, 0.8);
            let x = report.primal_point.as_ref().map_or(f64::NAN, |p| p[0]);
            rows.value("primal minimizer", -0.2, x);
            rows.value("f* at 1.6x", -0.96, conjugate_closed_form(&f_quad, &q1(0.0, 1.6, 0.0))?.value);
            rows.value("g* at -1.6x", 0.16, g_conj(&q1(0.0, -1.6, 0.0))?);
            let x0 = dvector![-0.2];
            let certs = fixed_point_certificates(&x0, &q1(0.0, 1.6, 0.0), &q1(0.0, -1.6, 0.0));
            rows.flag("optimality certificate at -0.2", true, verify_optimality(&inst, &x0, &certs)?.valid);
        }
        "ex4.7-reversed" => {
            rows.duality(&report, 0.8);
            rows.value("f* at 1.6x", -0.96, conjugate_closed_form(&f_quad, &q1(0.0, 1.6, 0.0))?.value);
            rows.value("g* at -x^2 + x", 0.05, g_conj(&q1(-1.0, 1.0, 0.0))?);
            let zero = Quadratic::zero(1);
            rows.flag("0 - psi in Phi for psi = -x^2 + x", false, difference_in_family(&inst, &zero, &q1(-1.0, 1.0, 0.0))?);
            rows.flag("0 - psi in Phi for psi = -1.6x", true, difference_in_family(&inst, &zero, &q1(0.0, -1.6, 0.0))?);
        }
        "ex4.8" => {
            rows.duality(&report, -6.0);
            rows.value("g* at -0.5y^2", f64::INFINITY, g_conj(&q1(-0.5, 0.0, 0.0))?);
            rows.value("g* at -y^2 + 3y", f64::INFINITY, g_conj(&q1(-1.0, 3.0, 0.0))?);
            rows.value("g* at -y^2 + 2y", 1.0, g_conj(&q1(-1.0, 2.0, 0.0))?);
            rows.value("g* at -2y^2 + 3y", 1.25, g_conj(&q1(-2.0, 3.0, 0.0))?);
            let psi = q1(-1.0, 2.0, 0.0);
            rows.value("(f + psi o L)*(0) for psi = -y^2 + 2y", 5.0, composite_conjugate(&inst, &psi, &Quadratic::zero(2))?.value);
            let cert = GapCertificate {
                eps: 1e-3,
                x: dvector![-2.0, 3.0],
                phi: Quadratic::zero(2),
                psi,
                kind: CertificateKind::ConjugateBound,
            };
            rows.flag("conjugate-bound certificate, eps 1e-3", true, verify_conjugate_bound(&inst, &cert)?.valid);
        }
        "ex5.6" => {
            rows.duality(&report, 0.0);
            let phi = Quadratic::isotropic(0.0, dvector![1.0, 1.0], 0.0);
            rows.value("(f + g o L)* at x + y", 0.1, target_conjugate(&inst, EpiTarget::FPlusGComposedL, &phi)?.value);
            rows.value("f* at x + y", 0.5, target_conjugate(&inst, EpiTarget::F, &phi)?.value);
            rows.value("g* at 0", 0.0, g_conj(&Quadratic::zero(1))?);
            let p = EpiPoint { phi, r: 1.0 };
            rows.flag("split of (x + y, 1) with psi = 0", true, epi_decompose_with(&inst, &p, &Quadratic::zero(1))?.is_some());
            rows.flag("searched split of (x + y, 1)", true, epi_decompose(&inst, &p)?.is_some());
        }
        "ex6.10" => {
            rows.duality(&report, -19.0);
            rows.value("dual objective at psi = -2y^2 + y", -19.0, dual_objective(&inst, &q1(-2.0, 1.0, 0.0))?);
            let found = match &report.attaining_psi {
                Some(p) => dual_objective(&inst, &p.to_quadratic())?,
                None => f64::NAN,
            };
            rows.value("dual objective at the attaining psi", -19.0, found);
        }
        "ex6.11" => {
            rows.duality(&report, -9.25);
            let ctx = LagrangianContext::new(inst.clone());
            let psi = q1(0.0, 2.0, 1.0);
            rows.value("lagrangian at (0.5, 2y + 1)", -9.25, ctx.lagrangian_value(&dvector![0.5], &psi)?);
            let check = support_zero_gap_check(&ctx, &psi, &dvector![1.5], -9.5)?;
            rows.flag("support zero-gap check, psi = 2y + 1", true, check.holds);
        }
        "zero" => rows.duality(&report, 0.0),
        _ => unreachable!("catalog accepted the name"),
    }
    Ok(Reproduction {
        name: name.into(),
        rows: rows.0,
        report,
    })
}

/// True when `dcp <= primal + tol` and `ld <= lp + tol`.
pub fn weak_duality_ok(report: &RunReport) -> bool {
    (report.dcp == f64::NEG_INFINITY || report.primal == f64::INFINITY || report.dcp <= report.primal + WEAK_DUALITY_TOL)
        && lagrange_weak_duality_holds(report.ld, report.lp)
}
