use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::Deserialize;

use abconv::conjugate::{conjugate, Engine};
use abconv::duality::{
    epi_contains, epi_decompose, verify_conjugate_bound, verify_optimality, verify_zero_gap_system, CertificateKind,
    EpiPoint, EpiTarget, GapCertificate, ProblemInstance, EPS_LADDER,
};
use abconv::harness::catalog::resolve_reference;
use abconv::harness::io::{load_instance, parse_element, save_instance, ElementJson};
use abconv::harness::random::random_instance;
use abconv::harness::report::format_extended;
use abconv::harness::{catalog, reproduce, run_report, RandomSpec};
use abconv::lagrange::{intersection_property, LagrangianContext, ValueFunctionProbe};
use abconv::{Error, Result};

const EXIT_FAILURE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_INVARIANT: u8 = 3;
const EXIT_UNKNOWN_CATALOG: u8 = 4;

/// Conjugates, duality gaps and certificates for `inf_x f(x) + g(Lx)` over
/// quadratic elementary families.
#[derive(Parser)]
#[command(name = "abconv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a conjugate at one elementary function.
    Conjugate {
        /// Instance file, or `catalog:<name>`.
        instance: String,
        /// `a=<a>,u=<u1>:<u2>...,c=<c>`.
        #[arg(long, allow_hyphen_values = true)]
        phi: String,
        #[arg(long, value_enum, default_value_t = EngineArg::Auto)]
        engine: EngineArg,
        /// Which function to conjugate.
        #[arg(long, value_enum, default_value_t = TargetArg::F)]
        target: TargetArg,
    },
    /// Primal, conjugate dual, Lagrange dual and primal values with the gap.
    Gap {
        instance: String,
        /// Also write the machine-readable report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Verify a certificate file.
    Certify {
        instance: String,
        #[arg(long)]
        cert: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
    },
    /// Try to split a point of the composite conjugate epigraph.
    Strong {
        instance: String,
        /// `a=<a>,u=<u1>:<u2>...,c=<c>,r=<r>`.
        #[arg(long, allow_hyphen_values = true)]
        epi_point: String,
    },
    /// Lagrange values, with optional lsc probe and intersection test.
    Lagrange {
        instance: String,
        #[arg(long)]
        lsc_probe: bool,
        /// Two elementary functions and a level.
        #[arg(long, num_args = 3, value_names = ["PHI1", "PHI2", "ALPHA"], allow_hyphen_values = true)]
        intersection: Option<Vec<String>>,
    },
    /// Compare a catalog instance against its known values.
    Reproduce {
        name: String,
        /// Print JSON instead of the table.
        #[arg(long)]
        json: bool,
    },
    /// Draw a random weakly convex instance.
    Random {
        #[arg(long)]
        seed: u64,
        /// RandomSpec JSON; its seed is replaced by `--seed`.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write a catalog instance as an instance file.
    Export {
        name: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Auto,
    Closed,
    Grid,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    F,
    G,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    ConjugateBound,
    ZeroGap,
    Optimality,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CertificateFile {
    #[serde(default)]
    eps: Option<f64>,
    #[serde(default)]
    eps_ladder: Option<Vec<f64>>,
    x: Vec<f64>,
    phi: ElementJson,
    psi: ElementJson,
}

fn load(spec: &str) -> Result<ProblemInstance> {
    if let Some(inst) = resolve_reference(spec) {
        return inst;
    }
    let loaded = load_instance(spec)?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    Ok(loaded.instance)
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
        field: e.path().to_string(),
        message: e.into_inner().to_string(),
    })
}

fn element(text: &str, dim: usize, name: &'static str) -> Result<abconv::Quadratic> {
    let (e, _) = parse_element(text)?;
    if e.u.len() != dim {
        return Err(Error::DimensionMismatch { context: name, expected: dim, found: e.u.len() });
    }
    Ok(e.to_quadratic())
}

fn write_or_print(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(p) => fs::write(p, format!("{text}\n"))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Conjugate { instance, phi, engine, target } => {
            let inst = load(&instance)?;
            let (f, grid) = match target {
                TargetArg::F => (&inst.f, &inst.x_search),
                TargetArg::G => (&inst.g, &inst.y_search),
            };
            let phi = element(&phi, f.dim(), "phi")?;
            let engine = match engine {
                EngineArg::Auto => Engine::auto(f, grid),
                EngineArg::Closed => Engine::ClosedForm,
                EngineArg::Grid => Engine::Grid(grid.clone()),
            };
            let v = conjugate(f, &phi, &engine)?;
            println!("{:<20}{:>24}", "value", format_extended(v.value));
            println!("{:<20}{:>24}", "engine", format!("{:?}", v.engine));
            println!("{:<20}{:>24}", "grid truncated", v.grid_truncated());
            println!("{:<20}{:>24}", "improper window", v.improper_window);
            if let Some(x) = v.maximizer {
                println!("{:<20}{:>24}", "maximizer", format!("{:?}", x.as_slice()));
            }
            Ok(0)
        }
        Command::Gap { instance, json } => {
            let inst = load(&instance)?;
            let report = run_report(&inst)?;
            print!("{}", report.table());
            if let Some(path) = json {
                fs::write(path, format!("{}\n", report.to_json()))?;
            }
            Ok(if report.weak_duality_holds() { 0 } else { EXIT_INVARIANT })
        }
        Command::Certify { instance, cert, kind } => {
            let inst = load(&instance)?;
            let file: CertificateFile = parse_json(&cert)?;
            let x = DVector::from_vec(file.x);
            let phi = file.phi.to_quadratic();
            let psi = file.psi.to_quadratic();
            let need_eps = || {
                file.eps.ok_or_else(|| Error::Parse { field: "eps".into(), message: "required for this kind".into() })
            };
            let valid = match kind {
                KindArg::ConjugateBound => {
                    let c = GapCertificate { eps: need_eps()?, x, phi, psi, kind: CertificateKind::ConjugateBound };
                    let r = verify_conjugate_bound(&inst, &c)?;
                    println!("{:<28}{:>24}", "psi subgradient", r.psi_subgradient);
                    println!("{:<28}{:>24}", "(f + psi o L)*(0)", format_extended(r.conjugate));
                    println!("{:<28}{:>24}", "bound", format_extended(r.bound));
                    r.valid
                }
                KindArg::ZeroGap => {
                    let c = GapCertificate { eps: need_eps()?, x, phi, psi, kind: CertificateKind::ZeroGapSystem };
                    let r = verify_zero_gap_system(&inst, &c)?;
                    println!("{:<28}{:>24}", "in families", r.in_families);
                    println!("{:<28}{:>24}", "phi subgradient", r.phi_subgradient);
                    println!("{:<28}{:>24}", "psi subgradient", r.psi_subgradient);
                    println!("{:<28}{:>24}", "lower bound", r.lower_bound);
                    println!("{:<28}{:>24}", "upper bound", r.upper_bound);
                    println!("{:<28}{:>24}", "phi + psi o L = 0", r.exact_zero);
                    r.valid
                }
                KindArg::Optimality => {
                    let ladder = file.eps_ladder.clone().unwrap_or_else(|| EPS_LADDER.to_vec());
                    let certs: Vec<_> = ladder
                        .iter()
                        .map(|&eps| GapCertificate {
                            eps,
                            x: x.clone(),
                            phi: phi.clone(),
                            psi: psi.clone(),
                            kind: CertificateKind::FixedPoint,
                        })
                        .collect();
                    let r = verify_optimality(&inst, &x, &certs)?;
                    for (eps, ok) in &r.per_eps {
                        println!("{:<28}{:>24}", format!("zero-gap system eps={eps:e}"), ok);
                    }
                    println!("{:<28}{:>24}", "objective at x", format_extended(r.objective_at_x));
                    println!("{:<28}{:>24}", "primal", format_extended(r.primal));
                    r.valid
                }
            };
            println!("{:<28}{:>24}", "valid", valid);
            Ok(if valid { 0 } else { EXIT_FAILURE })
        }
        Command::Strong { instance, epi_point } => {
            let inst = load(&instance)?;
            let (e, r) = parse_element(&epi_point)?;
            let r = r.ok_or_else(|| Error::Parse { field: "r".into(), message: "missing epigraph level".into() })?;
            if e.u.len() != inst.n() {
                return Err(Error::DimensionMismatch { context: "epigraph point", expected: inst.n(), found: e.u.len() });
            }
            let p = EpiPoint { phi: e.to_quadratic(), r };
            match epi_decompose(&inst, &p)? {
                Some(d) => {
                    let show = |q: &abconv::Quadratic| {
                        ElementJson::from_quadratic(q).map_or_else(|| format!("{q:?}"), |e| e.to_string())
                    };
                    println!("f part: {} r={}", show(&d.f_part.phi), format_extended(d.f_part.r));
                    println!("g part: {} r={}", show(&d.g_part.phi), format_extended(d.g_part.r));
                    println!("f part in epi f*: {}", epi_contains(&inst, EpiTarget::F, &d.f_part)?);
                    println!("g part in epi g*: {}", epi_contains(&inst, EpiTarget::G, &d.g_part)?);
                    Ok(0)
                }
                None => {
                    println!("no decomposition found on the search grid");
                    Ok(EXIT_FAILURE)
                }
            }
        }
        Command::Lagrange { instance, lsc_probe, intersection } => {
            let inst = load(&instance)?;
            let n = inst.n();
            let ctx = LagrangianContext::new(inst);
            let ld = ctx.ld_value()?;
            let lp = ctx.lp_value()?;
            let cond = ctx.check_cond_cp_lp(1e-6)?;
            println!("{:<28}{:>24}", "lagrange dual", format_extended(ld.report.dual_conjugate));
            println!("{:<28}{:>24}", "lagrange primal", format_extended(lp.value));
            println!("{:<28}{:>24}", "primal", format_extended(cond.primal));
            println!("{:<28}{:>24}", "excluded psi evaluations", ld.excluded);
            println!("{:<28}{:>24}", "lp equals primal", cond.holds);
            if let Some(x0) = &ld.report.primal_point {
                if let Ok(ok) = ctx.psi_convexity_at_optimum(x0) {
                    println!("{:<28}{:>24}", "g psi-convex at L x0", ok);
                }
            }
            if lsc_probe {
                let report = ctx.lsc_probe_at_zero(&ValueFunctionProbe::default())?;
                println!("{:<28}{:>24}", "V(0)", format_extended(report.v0));
                for r in &report.per_radius {
                    println!(
                        "{:<28}{:>24}",
                        format!("radius {:e} violations", r.radius),
                        format!("{} (min {})", r.violations, format_extended(r.min_value))
                    );
                }
                println!("{:<28}{:>24}", "lsc at 0", report.holds);
            }
            if let Some(args) = intersection {
                let phi1 = element(&args[0], n, "phi1")?;
                let phi2 = element(&args[1], n, "phi2")?;
                let alpha: f64 = args[2].trim().parse().map_err(|_| Error::Parse {
                    field: "alpha".into(),
                    message: format!("`{}` is not a number", args[2]),
                })?;
                match intersection_property(&phi1, &phi2, alpha)? {
                    Some(w) => println!("intersection property holds: t0={} min={}", w.t0, format_extended(w.min_value)),
                    None => println!("intersection property fails at level {alpha}"),
                }
            }
            let ok = abconv::lagrange::lagrange_weak_duality_holds(ld.report.dual_conjugate, lp.value);
            Ok(if ok { 0 } else { EXIT_INVARIANT })
        }
        Command::Reproduce { name, json } => {
            let rep = reproduce(&name)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&rep).expect("serializable"));
            } else {
                println!("{rep}");
            }
            Ok(if rep.report.weak_duality_holds() { 0 } else { EXIT_INVARIANT })
        }
        Command::Random { seed, spec, output } => {
            let mut spec: RandomSpec = match spec {
                Some(path) => parse_json(&path)?,
                None => RandomSpec::default(),
            };
            spec.seed = seed;
            let inst = random_instance(&spec)?;
            match output {
                Some(path) => save_instance(&inst, path)?,
                None => println!("{}", abconv::harness::io::instance_to_json(&inst)?),
            }
            Ok(0)
        }
        Command::Export { name, output } => {
            let inst = catalog(&name)?;
            write_or_print(&abconv::harness::io::instance_to_json(&inst)?, output.as_deref())?;
            Ok(0)
        }
    }
}

fn configure_threads() {
    let threads = std::env::var("ABCONV_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok());
    if let Some(n) = threads.filter(|n| *n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Parse { .. } | Error::Io(_) | Error::Asymmetric { .. } => EXIT_PARSE,
                Error::UnknownCatalog(_) => EXIT_UNKNOWN_CATALOG,
                _ => EXIT_FAILURE,
            })
        }
    }
}
