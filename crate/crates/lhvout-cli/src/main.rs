//! Command-line front end: Bell bounds, polytope membership, Frank-Wolfe
//! model construction, certification, hull radii, the LHV+Out-to-LHV
//! conversion, and antipodal-symmetry sweeps.
//!
//! Every subcommand is deterministic given its flags; all randomness is
//! seeded and the seed in effect is printed. Numeric report lines use the
//! machine-parsable form `KEY value`. Exit codes: 0 on success, 1 on domain
//! errors, 2 on usage errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lhvout::behaviour::{read_behaviour, write_behaviour, Scenario};
use lhvout::bounds::{
    local_bound, local_bound_heuristic, out_bound, out_bound_heuristic, read_bellm,
    symmetrize, EXACT_M_CAP,
};
use lhvout::conversion::{convert, find_deterministic_input};
use lhvout::fw::{build, fix_marginals, nu_scaling, FwConfig, LmoMode};
use lhvout::geometry::{hemisphere_radius, hull_facets, sphere_radius};
use lhvout::model::{read_model, write_corr_model, write_model, OutStrategy, Strategies};
use lhvout::openq::{exhaustive_vertex_scan, sweep, write_inequality};
use lhvout::polytope::{membership, MembershipResult, PolytopeKind};
use lhvout::quantum::{
    double_set, hemisphere_grid, pr_box, read_measurements, state_behaviour, werner_state,
    write_measurements,
};
use lhvout::verifier::{certify, NONLOCALITY_THRESHOLD};
use lhvout::{Error, Model};

#[derive(Parser)]
#[command(name = "lhvout", version, about = "Local hidden variable models with outcome communication")]
struct Cli {
    /// Cap the worker thread pool (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Local and outcome-communication bounds of a coefficient matrix.
    Bound(BoundArgs),
    /// LP membership of a behaviour in the LHV or LHV+Out polytope.
    Membership(MembershipArgs),
    /// Frank-Wolfe construction of an LHV+Out model for a Werner state.
    Build(BuildArgs),
    /// Independent certification of a model file.
    Verify(VerifyArgs),
    /// Inscribed-(hemi)sphere radius of a measurement set.
    Geometry(GeometryArgs),
    /// Convert an LHV+Out model with a deterministic Alice input to LHV.
    Convert(ConvertArgs),
    /// Randomized and exhaustive antipodal-symmetry scans.
    Openq(OpenqArgs),
    /// Emit the PR box and its two-strategy LHV+Out model.
    Prbox(PrboxArgs),
    /// Generate a hemisphere measurement grid file.
    Grid(GridArgs),
}

#[derive(Args)]
struct BoundArgs {
    /// Coefficient matrix file ("BELLM 1" format).
    #[arg(long)]
    matrix: PathBuf,
    /// Restarts for the heuristic fallback beyond the exact cap.
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Lhv,
    Out,
}

impl From<KindArg> for PolytopeKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Lhv => PolytopeKind::Lhv,
            KindArg::Out => PolytopeKind::Out,
        }
    }
}

#[derive(Args)]
struct MembershipArgs {
    /// Behaviour file ("BEHAVIOUR 1" format).
    #[arg(long)]
    behaviour: PathBuf,
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long, default_value_t = lhvout::DEFAULT_TOL)]
    tol: f64,
    /// Write the member decomposition here.
    #[arg(long)]
    model_out: Option<PathBuf>,
    /// Write the separating inequality here.
    #[arg(long)]
    inequality_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LmoArg {
    Exact,
    Heuristic,
}

#[derive(Args)]
struct BuildArgs {
    /// State family; only the two-qubit Werner family is implemented.
    #[arg(long, default_value = "werner")]
    state: String,
    #[arg(long)]
    visibility: f64,
    /// Alice measurement file (Bloch vectors, one per line).
    #[arg(long)]
    alice: PathBuf,
    /// Bob measurement file.
    #[arg(long)]
    bob: PathBuf,
    /// Target Frobenius distance.
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    #[arg(long, default_value_t = 100_000)]
    iters: usize,
    #[arg(long, value_enum, default_value_t = LmoArg::Heuristic)]
    lmo: LmoArg,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output model file (marginal-fixed, correlator form).
    #[arg(long)]
    out: PathBuf,
    /// Accept measurement files with non-unit rows by normalizing them.
    #[arg(long)]
    normalize: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    alice: PathBuf,
    #[arg(long)]
    bob: PathBuf,
    /// Werner visibility the model was built for.
    #[arg(long)]
    visibility: f64,
    /// Nonlocality threshold the certified visibility is compared against.
    #[arg(long, default_value_t = NONLOCALITY_THRESHOLD)]
    threshold: f64,
    #[arg(long)]
    normalize: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum GeometryMode {
    Sphere,
    Hemisphere,
}

#[derive(Args)]
struct GeometryArgs {
    #[arg(long)]
    measurements: PathBuf,
    #[arg(long, value_enum)]
    mode: GeometryMode,
    /// Adjoin the antipode of every direction first.
    #[arg(long)]
    double: bool,
    #[arg(long)]
    normalize: bool,
}

#[derive(Args)]
struct ConvertArgs {
    /// LHV+Out model file.
    #[arg(long)]
    model: PathBuf,
    /// Behaviour the model reproduces; supplies the deterministic input.
    #[arg(long)]
    behaviour: PathBuf,
    /// Output LHV model file.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
}

#[derive(Args)]
struct OpenqArgs {
    /// Half the Alice setting count: settings come in antipodal pairs.
    #[arg(long)]
    mx: usize,
    #[arg(long)]
    my: usize,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Enumerate all LHV+Out vertices and LP-test each for LHV membership.
    #[arg(long)]
    exhaustive_vertices: bool,
    /// Directory for counterexample bundles.
    #[arg(long, default_value = "openq-artifacts")]
    artifacts: PathBuf,
    #[arg(long, default_value_t = lhvout::DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args)]
struct PrboxArgs {
    /// Run the membership LPs and print both verdicts.
    #[arg(long)]
    check: bool,
    #[arg(long)]
    behaviour_out: Option<PathBuf>,
    #[arg(long)]
    model_out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    rings: usize,
    #[arg(long)]
    points: usize,
    /// Align rings azimuthally instead of the default half-step stagger.
    #[arg(long)]
    aligned: bool,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    #[cfg(feature = "parallel")]
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: could not configure {n} worker threads: {e}");
            return ExitCode::from(1);
        }
    }
    #[cfg(not(feature = "parallel"))]
    if let Some(n) = cli.threads {
        eprintln!("note: built without the 'parallel' feature; --threads {n} has no effect");
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Bound(args) => cmd_bound(args),
        Command::Membership(args) => cmd_membership(args),
        Command::Build(args) => cmd_build(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Geometry(args) => cmd_geometry(args),
        Command::Convert(args) => cmd_convert(args),
        Command::Openq(args) => cmd_openq(args),
        Command::Prbox(args) => cmd_prbox(args),
        Command::Grid(args) => cmd_grid(args),
    }
}

fn cmd_bound(args: BoundArgs) -> Result<(), Error> {
    let m = read_bellm(&fs::read_to_string(&args.matrix)?)?;
    let sym = symmetrize(&m);
    if m.m() <= EXACT_M_CAP && sym.m() <= EXACT_M_CAP {
        println!("L {}", local_bound(&m)?);
        println!("L_OUT {}", out_bound(&m)?);
        println!("L_OUT_SYM {}", out_bound(&sym)?);
    } else {
        println!("SEED {}", args.seed);
        println!("L_LOWER {}", local_bound_heuristic(&m, args.restarts, args.seed));
        println!("L_OUT_LOWER {}", out_bound_heuristic(&m, args.restarts, args.seed));
        println!("L_OUT_SYM_LOWER {}", out_bound_heuristic(&sym, args.restarts, args.seed));
        println!("EXACT false");
    }
    Ok(())
}

fn cmd_membership(args: MembershipArgs) -> Result<(), Error> {
    let b = read_behaviour(&fs::read_to_string(&args.behaviour)?)?;
    match membership(&b, args.kind.into(), args.tol)? {
        MembershipResult::Member(model) => {
            println!("MEMBER true");
            println!("STRATEGIES {}", model.len());
            if let Some(path) = args.model_out {
                fs::write(path, write_model(&model))?;
            }
        }
        MembershipResult::NonMember(cert) => {
            println!("MEMBER false");
            println!("BOUND {}", cert.polytope_bound);
            println!("VALUE {}", cert.behaviour_value);
            if let Some(path) = args.inequality_out {
                fs::write(path, write_inequality(b.scenario, &cert))?;
            }
        }
    }
    Ok(())
}

fn cmd_build(args: BuildArgs) -> Result<(), Error> {
    if args.state != "werner" {
        return Err(Error::InvalidInput(format!(
            "unsupported state family '{}'; only 'werner' is implemented",
            args.state
        )));
    }
    let alice = read_measurements(&fs::read_to_string(&args.alice)?, args.normalize)?;
    let bob = read_measurements(&fs::read_to_string(&args.bob)?, args.normalize)?;
    let target = state_behaviour(&werner_state(args.visibility)?, &alice, &bob)?;
    let cfg = FwConfig {
        max_iters: args.iters,
        eps_target: args.eps,
        lmo_mode: match args.lmo {
            LmoArg::Exact => LmoMode::Exact,
            LmoArg::Heuristic => LmoMode::Heuristic,
        },
        restarts: args.restarts,
        seed: args.seed,
    };
    let result = build(&target, &cfg)?;
    let fixed = fix_marginals(&result.model);
    fs::write(&args.out, write_corr_model(&fixed))?;
    println!("SEED {}", args.seed);
    println!("EPSILON {:.17e}", result.epsilon);
    println!("ITERATIONS {}", result.iterations);
    println!("FW_GAP {:.17e}", result.fw_gap);
    println!("NU {:.17e}", nu_scaling(result.epsilon)?);
    println!("STRATEGIES {}", fixed.len());
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Error> {
    let model = read_model(&fs::read_to_string(&args.model)?)?.into_out_corr()?;
    let alice = read_measurements(&fs::read_to_string(&args.alice)?, args.normalize)?;
    let bob = read_measurements(&fs::read_to_string(&args.bob)?, args.normalize)?;
    let report = certify(&model, &alice, &bob, args.visibility, args.threshold)?;
    let c = report.certificate;
    println!("V_MODEL {:.17e}", c.v_model);
    println!("EPSILON {:.17e}", c.epsilon);
    println!("NU {:.17e}", c.nu);
    println!("ETA_A {:.17e}", c.eta_a);
    println!("ETA_B {:.17e}", c.eta_b);
    println!("V_FINAL {:.17e}", c.v_final);
    println!("THRESHOLD {}", report.threshold);
    println!(
        "VERDICT {}",
        if report.nonlocal_but_out { "nonlocal-but-LHV+Out" } else { "below-threshold" }
    );
    Ok(())
}

fn cmd_geometry(args: GeometryArgs) -> Result<(), Error> {
    let mut set = read_measurements(&fs::read_to_string(&args.measurements)?, args.normalize)?;
    if args.double {
        set = double_set(&set);
    }
    println!("POINTS {}", set.len());
    let (radius, include_origin) = match args.mode {
        GeometryMode::Sphere => (sphere_radius(&set)?, false),
        GeometryMode::Hemisphere => (hemisphere_radius(&set)?, true),
    };
    let facets = hull_facets(set.vectors(), include_origin)?;
    println!("FACETS {}", facets.len());
    println!("RADIUS {:.17e}", radius);
    Ok(())
}

fn cmd_convert(args: ConvertArgs) -> Result<(), Error> {
    let model = read_model(&fs::read_to_string(&args.model)?)?.into_model()?;
    let b = read_behaviour(&fs::read_to_string(&args.behaviour)?)?;
    let reproduced = model.behaviour();
    let model_residual = reproduced
        .table()
        .iter()
        .zip(b.table())
        .map(|(p, q)| (p - q).abs())
        .fold(0.0f64, f64::max);
    if model_residual > args.tol {
        return Err(Error::InvalidInput(format!(
            "model does not reproduce the behaviour file (max deviation {model_residual:.3e})"
        )));
    }
    let witness = find_deterministic_input(&b, args.tol)?.ok_or_else(|| {
        Error::InvalidInput("behaviour has no deterministic Alice input".into())
    })?;
    let outcome = convert(&model, witness, args.tol)?;
    fs::write(&args.out, write_model(&outcome.model))?;
    println!("WITNESS_X {}", witness.x_prime);
    println!("WITNESS_OUTCOME {:+}", witness.sign());
    println!("RESIDUAL {:.17e}", outcome.residual);
    Ok(())
}

fn cmd_openq(args: OpenqArgs) -> Result<(), Error> {
    let scenario = Scenario::new(2 * args.mx, args.my, 2, 2)?;
    println!("MX {} MY {}", 2 * args.mx, args.my);
    if args.exhaustive_vertices {
        let summary = exhaustive_vertex_scan(scenario, args.tol)?;
        println!("VERTICES {}", summary.vertices);
        println!("NONSIGNALLING {}", summary.nonsignalling);
        println!("LHV_MEMBERS {}", summary.lhv_members);
        return Ok(());
    }
    println!("SEED {}", args.seed);
    let summary = sweep(scenario, args.samples, args.seed, args.tol, Some(&args.artifacts))?;
    println!("TESTED {}", summary.tested);
    println!("OUT_MEMBERS {}", summary.out_members);
    println!("COUNTEREXAMPLES {}", summary.counterexamples);
    if summary.counterexamples > 0 {
        return Err(Error::InvalidInput(format!(
            "found {} counterexample(s); bundles persisted under {}",
            summary.counterexamples,
            args.artifacts.display()
        )));
    }
    Ok(())
}

/// The explicit two-strategy LHV+Out decomposition of the PR box:
/// `a = x xor l` and `b = (a xor l)(y xor 1) xor l` for `l in {0, 1}`.
fn pr_box_model() -> Model {
    let s = Scenario::chsh();
    let mut strategies = Vec::new();
    for lambda in 0..2u8 {
        let a: Vec<u8> = (0..2u8).map(|x| x ^ lambda).collect();
        let mut b = vec![vec![0u8; 2]; 2];
        for (a_out, row) in b.iter_mut().enumerate() {
            for (y, slot) in row.iter_mut().enumerate() {
                *slot = (((a_out as u8) ^ lambda) * ((y as u8) ^ 1)) ^ lambda;
            }
        }
        strategies.push(OutStrategy { a, b });
    }
    Model::new(s, vec![0.5, 0.5], Strategies::Out(strategies)).expect("static model is valid")
}

fn cmd_prbox(args: PrboxArgs) -> Result<(), Error> {
    let pr = pr_box();
    let model = pr_box_model();
    if let Some(path) = &args.behaviour_out {
        fs::write(path, write_behaviour(&pr))?;
    }
    if let Some(path) = &args.model_out {
        fs::write(path, write_model(&model))?;
    }
    if args.behaviour_out.is_none() && args.model_out.is_none() && !args.check {
        print!("{}", write_behaviour(&pr));
    }
    if args.check {
        let reproduced = model.behaviour();
        let exact = reproduced.table() == pr.table();
        println!("MODEL_REPRODUCES_PR {exact}");
        let out = membership(&pr, PolytopeKind::Out, lhvout::DEFAULT_TOL)?;
        println!("OUT_MEMBER {}", out.is_member());
        match membership(&pr, PolytopeKind::Lhv, lhvout::DEFAULT_TOL)? {
            MembershipResult::NonMember(cert) => {
                println!("LHV_MEMBER false");
                let scaled = cert.normalized_to(2.0)?;
                println!("LHV_BOUND {}", scaled.polytope_bound);
                println!("LHV_VALUE {}", scaled.behaviour_value);
            }
            MembershipResult::Member(_) => println!("LHV_MEMBER true"),
        }
    }
    Ok(())
}

fn cmd_grid(args: GridArgs) -> Result<(), Error> {
    let offsets = if args.aligned { Some(vec![0.0; args.rings]) } else { None };
    let set = hemisphere_grid(args.rings, args.points, offsets.as_deref())?;
    fs::write(&args.out, write_measurements(&set))?;
    println!("POINTS {}", set.len());
    Ok(())
}
