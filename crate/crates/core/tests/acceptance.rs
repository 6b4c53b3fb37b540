//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
//! when a criterion outside `KNOWN_UNATTAINABLE` fails.

mod common;

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use abconv::conjugate::{
    biconjugate_at, conjugate_closed_form, conjugate_grid, eps_subdiff_contains, Engine, ParamSearch,
};
use abconv::duality::{
    difference_in_family, epi_contains, epi_decompose, epi_decompose_with, verify_conjugate_bound, CertificateKind,
    EpiPoint, EpiTarget, GapCertificate, ProblemInstance,
};
use abconv::harness::io::{PointsPerAxis, SearchDescriptor};
use abconv::harness::{catalog, random_instance, run_report, RandomSpec};
use abconv::lagrange::{
    combination_minimum, intersection_property, intersection_property_bruteforce, support_zero_gap_check,
    LagrangianContext,
};
use abconv::{CurvatureSpec, Family, GridSpec, LinearMap, Objective, Quadratic};
use common::{close_rel, isotropic, lambda_min, quadratic, uniform, vector};
use nalgebra::dvector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

/// Criteria that cannot be met as stated; they must keep failing.
const KNOWN_UNATTAINABLE: &[&str] = &["6b"];

const GAP_TOL: f64 = 1e-6;
const ORACLE_REL_TOL: f64 = 1e-3;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn reproduce_json(name: &str) -> (bool, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_abconv"))
        .args(["reproduce", name, "--json"])
        .output()
        .expect("binary runs");
    let json = serde_json::from_slice(&out.stdout).expect("reproduce prints JSON");
    (out.status.success(), json)
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn row_computed<'a>(rep: &'a Value, quantity: &str) -> Option<&'a str> {
    rep["rows"]
        .as_array()?
        .iter()
        .find(|r| r["quantity"] == quantity)
        .and_then(|r| r["computed"].as_str())
}

fn closed_form_pair_matches() -> Outcome {
    let (ok, rep) = reproduce_json("ex4.7");
    let r = &rep["report"];
    let (p, d, gap) = (num(&r["primal"]), num(&r["dcp"]), num(&r["gap"]));
    let pass = ok && (p - 0.8).abs() <= GAP_TOL && (d - 0.8).abs() <= GAP_TOL && gap.abs() <= GAP_TOL;
    outcome(pass, format!("primal={p} dcp={d} gap={gap:e}"))
}

fn reversed_roles() -> Outcome {
    let (ok, rep) = reproduce_json("ex4.7-reversed");
    let r = &rep["report"];
    let (p, d) = (num(&r["primal"]), num(&r["dcp"]));
    let mut pass = ok && (p - 0.8).abs() <= GAP_TOL && (d - 0.8).abs() <= GAP_TOL;
    pass &= row_computed(&rep, "0 - psi in Phi for psi = -x^2 + x") == Some("false");

    let inst = catalog("ex4.7-reversed").expect("catalog");
    let zero = Quadratic::zero(1);
    let mut rejected = 0;
    let mut total = 0;
    for i in 1..=20 {
        for b in [-2.0, 0.0, 1.0, 3.5] {
            let psi = Quadratic::scalar(-0.25 * i as f64, b, 0.0);
            total += 1;
            if !difference_in_family(&inst, &zero, &psi).expect("dims") {
                rejected += 1;
            }
        }
    }
    let affine_ok = difference_in_family(&inst, &zero, &Quadratic::scalar(0.0, -1.6, 0.0)).expect("dims");
    pass &= rejected == total && affine_ok;
    outcome(pass, format!("primal={p} dcp={d}; condition rejected for {rejected}/{total} curved psi"))
}

fn gstar_branches() -> Outcome {
    let inst = catalog("ex4.8").expect("catalog");
    let g = inst.g.as_full_quadratic().expect("quadratic g").clone();
    let g_obj = Objective::quadratic(g.clone());
    let near = GridSpec::cube(1, -10.0, 10.0, 201, 2).expect("grid");
    let far = GridSpec::cube(1, -100.0, 100.0, 201, 2).expect("grid");

    let mut points: Vec<(f64, f64)> = Vec::new();
    for c in [0.0, 0.25, 0.5, 0.75, 0.9] {
        for d in [0.0, 3.0] {
            points.push((c, d));
        }
    }
    for d in [-2.0, 0.0, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0] {
        points.push((1.0, d));
    }
    for c in [1.5, 2.0, 3.0, 4.0, 5.0] {
        for d in [-1.0, 0.0, 1.0, 2.0, 3.0, 4.0] {
            points.push((c, d));
        }
    }
    assert_eq!(points.len(), 50);

    let mut failures = Vec::new();
    let mut branches = [0usize; 3];
    for &(c, d) in &points {
        let psi = Quadratic::scalar(-c, d, 0.0);
        let closed = conjugate_closed_form(&g, &psi).expect("dims").value;
        let expected = if c < 1.0 || (c == 1.0 && d != 2.0) {
            branches[0] += 1;
            f64::INFINITY
        } else if c == 1.0 {
            branches[1] += 1;
            1.0
        } else {
            branches[2] += 1;
            (d - 2.0).powi(2) / (4.0 * (c - 1.0)) + 1.0
        };
        let ok = if expected.is_infinite() {
            let grow_near = conjugate_grid(&g_obj, &psi, &near).expect("grid").value;
            let grow_far = conjugate_grid(&g_obj, &psi, &far).expect("grid").value;
            closed == f64::INFINITY && grow_far > grow_near + 10.0
        } else {
            let oracle = conjugate_grid(&g_obj, &psi, &near).expect("grid").value;
            close_rel(closed, expected, ORACLE_REL_TOL) && close_rel(closed, oracle, ORACLE_REL_TOL)
        };
        if !ok {
            failures.push(format!("(c={c}, d={d})"));
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "50 points; branches inf/one/formula = {}/{}/{}; mismatches: {}",
            branches[0],
            branches[1],
            branches[2],
            if failures.is_empty() { "none".to_string() } else { failures.join(" ") }
        ),
    )
}

fn conjugate_bound_certificate() -> Outcome {
    let inst = catalog("ex4.8").expect("catalog");
    let cert = GapCertificate {
        eps: 1e-3,
        x: dvector![-2.0, 3.0],
        phi: Quadratic::zero(2),
        psi: Quadratic::scalar(-1.0, 2.0, 0.0),
        kind: CertificateKind::ConjugateBound,
    };
    let check = verify_conjugate_bound(&inst, &cert).expect("certificate");
    outcome(
        check.valid,
        format!("(f + psi o L)*(0)={} bound={} subgradient={}", check.conjugate, check.bound, check.psi_subgradient),
    )
}

fn epigraph_split() -> Outcome {
    let inst = catalog("ex5.6").expect("catalog");
    let p = EpiPoint { phi: Quadratic::isotropic(0.0, dvector![1.0, 1.0], 0.0), r: 1.0 };
    let given = epi_decompose_with(&inst, &p, &Quadratic::zero(1)).expect("decompose");
    let searched = epi_decompose(&inst, &p).expect("decompose");
    let verify = |d: &abconv::duality::Decomposition| {
        epi_contains(&inst, EpiTarget::F, &d.f_part).expect("membership")
            && epi_contains(&inst, EpiTarget::G, &d.g_part).expect("membership")
    };
    let pass = given.as_ref().is_some_and(verify) && searched.as_ref().is_some_and(verify);
    outcome(pass, format!("witness split: {}, searched split: {}", given.is_some(), searched.is_some()))
}

fn lagrange_values() -> Outcome {
    let inst = catalog("ex6.11").expect("catalog");
    let r = run_report(&inst).expect("report");
    let pass = [r.primal, r.ld, r.lp].iter().all(|v| (v + 9.25).abs() <= GAP_TOL);
    outcome(pass, format!("primal={} ld={} lp={}", r.primal, r.ld, r.lp))
}

fn support_certificate() -> Outcome {
    let inst = catalog("ex6.11").expect("catalog");
    let ctx = LagrangianContext::new(inst);
    let psi = Quadratic::scalar(0.0, 2.0, 1.0);
    let alpha = -9.5;
    let mut holding = 0;
    let mut sandwich = 0;
    let mut point_condition = 0;
    for i in 0..=2000 {
        let x0 = dvector![-10.0 + 0.01 * i as f64];
        let c = support_zero_gap_check(&ctx, &psi, &x0, alpha).expect("check");
        holding += usize::from(c.holds);
        sandwich += usize::from(c.sandwich);
        point_condition += usize::from(c.x0_condition);
    }
    let at = support_zero_gap_check(&ctx, &psi, &dvector![1.5], alpha).expect("check");
    outcome(
        holding > 0,
        format!(
            "alpha={alpha}: support={} below_inf={}; over 2001 x0 in [-10,10]: sandwich {sandwich}, point condition {point_condition}, both {holding}",
            at.in_support, at.below_infimum
        ),
    )
}

fn coarse_search() -> SearchDescriptor {
    SearchDescriptor {
        psi_curv_grid: 11,
        points_per_axis: PointsPerAxis { psi_slope: Some(11), x: Some(21), y: Some(21) },
        refine_rounds: 1,
        ..SearchDescriptor::default()
    }
}

fn weak_duality_fuzz() -> Outcome {
    let mut violations = Vec::new();
    for seed in 0..200u64 {
        let spec = RandomSpec {
            n: 1 + (seed % 3) as usize,
            m: 1 + (seed / 3 % 3) as usize,
            f_modulus: [0.0, 1.0],
            g_modulus: [0.0, 1.0],
            seed,
            search: coarse_search(),
            ..RandomSpec::default()
        };
        let inst = random_instance(&spec).expect("random instance");
        let r = run_report(&inst).expect("report");
        let dcp_ok = r.dcp == f64::NEG_INFINITY || r.dcp <= r.primal + GAP_TOL;
        let ld_ok = r.ld == f64::NEG_INFINITY || r.lp == f64::INFINITY || r.ld <= r.lp + GAP_TOL;
        if !(dcp_ok && ld_ok) {
            violations.push(seed);
        }
    }
    outcome(violations.is_empty(), format!("200 instances, violating seeds: {violations:?}"))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0AC1E);
    let mut mismatches = 0;
    let mut cases = 0;
    let mut worst: f64 = 0.0;
    while cases < 200 {
        let dim = rng.gen_range(1..=2);
        let f = quadratic(&mut rng, dim, 2.0);
        let a = lambda_min(f.a()) - uniform(&mut rng, 0.3, 2.0);
        let phi = Quadratic::isotropic(a, vector(&mut rng, dim, 3.0), uniform(&mut rng, -1.0, 1.0));
        let closed = conjugate_closed_form(&f, &phi).expect("dims");
        let Some(x) = closed.maximizer.as_ref() else { continue };
        if !closed.value.is_finite() || x.amax() > 7.0 {
            continue;
        }
        cases += 1;
        let grid = GridSpec::cube(dim, -10.0, 10.0, 201, 2).expect("grid");
        let oracle = conjugate_grid(&Objective::quadratic(f.clone()), &phi, &grid).expect("grid").value;
        worst = worst.max((closed.value - oracle).abs() / closed.value.abs().max(1.0));
        if !close_rel(closed.value, oracle, ORACLE_REL_TOL) {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("200 cases, {mismatches} mismatches, worst relative error {worst:.2e}"))
}

fn intersection_cross_oracle() -> Outcome {
    const MARGIN: f64 = 0.05;
    let mut rng = ChaCha8Rng::seed_from_u64(0x1D7E);
    let grid = GridSpec::cube(1, -50.0, 50.0, 1001, 0).expect("grid");
    let fine_t: Vec<f64> = (0..=10_000).map(|i| i as f64 / 10_000.0).collect();
    let (mut cases, mut resampled, mut disagreements, mut holding) = (0, 0, 0, 0);
    while cases < 200 {
        let phi1 = isotropic(&mut rng, 1, (-1.0, 2.0), 3.0);
        let phi2 = isotropic(&mut rng, 1, (-1.0, 2.0), 3.0);
        let alpha = uniform(&mut rng, -5.0, 3.0);
        let m_star = fine_t
            .iter()
            .map(|&t| combination_minimum(&phi1, &phi2, t).expect("dims"))
            .fold(f64::NEG_INFINITY, f64::max);
        if (m_star - alpha).abs() < MARGIN {
            resampled += 1;
            continue;
        }
        cases += 1;
        let fast = intersection_property(&phi1, &phi2, alpha).expect("dims").is_some();
        let brute = intersection_property_bruteforce(&phi1, &phi2, alpha, &grid).expect("grid");
        holding += usize::from(fast);
        if fast != brute {
            disagreements += 1;
        }
    }
    outcome(
        disagreements == 0,
        format!("200 triples ({holding} holding), {disagreements} disagreements, {resampled} resampled within {MARGIN} of the threshold"),
    )
}

fn fenchel_young(rng: &mut ChaCha8Rng) -> (usize, usize) {
    let mut bad = 0;
    for _ in 0..10_000 {
        let dim = rng.gen_range(1..=3);
        let f = quadratic(rng, dim, 2.0);
        let phi = isotropic(rng, dim, (-3.0, 3.0), 3.0);
        let x = vector(rng, dim, 5.0);
        let fstar = conjugate_closed_form(&f, &phi).expect("dims").value;
        let (fx, phix) = (f.value_at(x.as_slice()), phi.value_at(x.as_slice()));
        if fstar != f64::INFINITY && fx + fstar < phix - 1e-9 * (fx.abs() + phix.abs()).max(1.0) {
            bad += 1;
        }
    }
    (10_000, bad)
}

fn biconjugate_minorization(rng: &mut ChaCha8Rng) -> (usize, usize) {
    let mut bad = 0;
    let grid = GridSpec::cube(1, -10.0, 10.0, 201, 2).expect("grid");
    for _ in 0..20 {
        let f = quadratic(rng, 1, 2.0);
        let curvature = [CurvatureSpec::Any, CurvatureSpec::NonPositive, CurvatureSpec::Zero][rng.gen_range(0..3)];
        let search = ParamSearch::new(Family::new(1, curvature)).with_points(11, 41, 1);
        let obj = Objective::quadratic(f.clone());
        for _ in 0..50 {
            let x = vector(rng, 1, 5.0);
            let b = biconjugate_at(&obj, &search, &x, &grid).expect("biconjugate").value;
            if b > f.value_at(x.as_slice()) + 1e-9 {
                bad += 1;
            }
        }
    }
    (1000, bad)
}

fn eps_nesting(rng: &mut ChaCha8Rng) -> (usize, usize) {
    const LADDER: [f64; 5] = [1e-4, 1e-3, 1e-2, 1e-1, 1.0];
    let mut memberships = 0;
    let mut bad = 0;
    while memberships < 1000 {
        let dim = rng.gen_range(1..=2);
        let f = quadratic(rng, dim, 2.0);
        let a = lambda_min(f.a()) - uniform(rng, 0.2, 2.0);
        let x = vector(rng, dim, 3.0);
        let shift = (f.a() - nalgebra::DMatrix::identity(dim, dim) * a) * &x * 2.0;
        let u = f.u() + shift + vector(rng, dim, 0.5);
        let phi = Quadratic::isotropic(a, u, 0.0);
        let obj = Objective::quadratic(f);
        let member: Vec<bool> = LADDER
            .iter()
            .map(|&eps| eps_subdiff_contains(&obj, &phi, &x, eps, &Engine::ClosedForm).expect("membership"))
            .collect();
        if let Some(first) = member.iter().position(|&m| m) {
            memberships += 1;
            if member[first..].iter().any(|&m| !m) {
                bad += 1;
            }
        }
    }
    (memberships, bad)
}

fn psi_concavity(rng: &mut ChaCha8Rng) -> (usize, usize, usize) {
    let mut bad = 0;
    let mut finite = 0;
    for _ in 0..10 {
        let (n, m) = (rng.gen_range(1..=2), rng.gen_range(1..=2));
        let l = LinearMap::new(nalgebra::DMatrix::from_fn(m, n, |_, _| uniform(rng, -1.0, 1.0))).expect("map");
        let g = quadratic(rng, m, 1.0);
        let inst = ProblemInstance::new(
            Objective::quadratic(quadratic(rng, n, 2.0)),
            Objective::quadratic(g),
            l,
            Family::new(n, CurvatureSpec::Any),
            Family::new(m, CurvatureSpec::Any),
        )
        .expect("instance");
        let ctx = LagrangianContext::new(inst);
        for _ in 0..100 {
            let x = vector(rng, n, 3.0);
            let psi1 = isotropic(rng, m, (-3.0, 0.5), 3.0);
            let psi2 = isotropic(rng, m, (-3.0, 0.5), 3.0);
            let t = uniform(rng, 0.0, 1.0);
            let mix = Quadratic::combine(&psi1, &psi2, t, 1.0 - t).expect("dims");
            let l1 = ctx.lagrangian_value(&x, &psi1).expect("lagrangian");
            let l2 = ctx.lagrangian_value(&x, &psi2).expect("lagrangian");
            let lt = ctx.lagrangian_value(&x, &mix).expect("lagrangian");
            let rhs = if l1 == f64::NEG_INFINITY || l2 == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                t * l1 + (1.0 - t) * l2
            };
            finite += usize::from(rhs.is_finite());
            if rhs.is_finite() && lt < rhs - 1e-9 * rhs.abs().max(1.0) {
                bad += 1;
            }
        }
    }
    (1000, bad, finite)
}

fn property_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9_20_9E);
    let fy = fenchel_young(&mut rng);
    let bic = biconjugate_minorization(&mut rng);
    let nest = eps_nesting(&mut rng);
    let conc = psi_concavity(&mut rng);
    let pass = [fy, bic, nest, (conc.0, conc.1)].iter().all(|&(_, bad)| bad == 0);
    outcome(
        pass,
        format!(
            "fenchel-young {}/{} ok, minorization {}/{} ok, eps nesting {}/{} ok, psi concavity {}/{} ok ({} with finite values)",
            fy.0 - fy.1,
            fy.0,
            bic.0 - bic.1,
            bic.0,
            nest.0 - nest.1,
            nest.0,
            conc.0 - conc.1,
            conc.0,
            conc.2
        ),
    )
}

type Criterion = (&'static str, &'static str, u64, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("1", "closed-form pair reproduces 0.8 / 0.8", 1, closed_form_pair_matches),
        ("2", "reversed roles reproduce 0.8 and reject the difference condition", 1, reversed_roles),
        ("3", "g* closed form matches the grid oracle on three branches", 5, gstar_branches),
        ("4", "conjugate-bound certificate accepted at eps 1e-3", 1, conjugate_bound_certificate),
        ("5", "epigraph point splits and both parts verify", 1, epigraph_split),
        ("6a", "primal = LD = LP = -9.25", 1, lagrange_values),
        ("6b", "support check certifies zero gap for psi = 2y + 1", 1, support_certificate),
        ("7", "weak duality on 200 random instances", 60, weak_duality_fuzz),
        ("8", "closed-form and grid conjugates agree on 200 cases", 30, oracle_equivalence),
        ("9", "intersection search agrees with brute force on 200 triples", 30, intersection_cross_oracle),
        ("10", "property suites", 60, property_suites),
    ];
    let mut unexpected = Vec::new();
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let pass = out.pass && in_time;
        let status = if pass { "PASS" } else { "FAIL" };
        println!(
            "{status} criterion {id}: {name} [{:.3}s of {budget}s] {}",
            elapsed.as_secs_f64(),
            out.detail
        );
        let known = KNOWN_UNATTAINABLE.contains(&id);
        if pass == known {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: all criteria as expected; known unattainable: {KNOWN_UNATTAINABLE:?}");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected outcome for {unexpected:?}");
        ExitCode::FAILURE
    }
}
