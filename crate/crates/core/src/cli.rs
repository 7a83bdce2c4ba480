//! Command-line front end and randomized target corpus.
//!
//! Subcommands mirror the library surface: `partition`, `evolve`,
//! `construct`, `member`, `face`, `spoiler`, `oracle` and `corpus`. All
//! numeric output is emitted with 17 significant digits so identical inputs
//! and seeds produce byte-identical artifacts.
//!
//! Exit codes: 0 success, 1 malformed input, 2 inadmissible target (the
//! decay-condition witness is printed), 3 membership refuted under
//! `--expect-member`, 4 corpus suite failure.

use crate::flux::{ConvexFlux, FluxSpec};
use crate::inverse::{self, InverseProblem, MembershipReport, Uniqueness};
use crate::laxhopf;
use crate::oleinik::{self, PMap};
use crate::oracle;
use crate::piecewise::{l1_distance, PiecewisePrimitive, PiecewiseProfile};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const SCHEMA: &str = "backtrace/1";

#[derive(Debug, Parser)]
#[command(
    name = "backtrace",
    version,
    about = "Inverse design for 1D scalar conservation laws: attainability, \
             initial-data reconstruction, membership checks and forward solvers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EvolveMode {
    Cl,
    Hj,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OutFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ConstructKind {
    Extremal,
    ExtremalReverse,
    Sharp,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MemberRoute {
    Cl,
    Hj,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SpoilerKind {
    Gap,
    Bump,
}

/// Grid specification `lo:hi:dx`.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub dx: f64,
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected lo:hi:dx, got {s:?}"));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.parse::<f64>().map_err(|e| format!("bad number {p:?}: {e}")))
            .collect::<Result<_, _>>()?;
        let spec = GridSpec {
            lo: nums[0],
            hi: nums[1],
            dx: nums[2],
        };
        if !(spec.lo < spec.hi) || !(spec.dx > 0.0) {
            return Err(format!("degenerate grid {s:?}: need lo < hi and dx > 0"));
        }
        Ok(spec)
    }
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.dx).ceil().max(1.0) as usize;
        (0..=n)
            .map(|k| self.lo + (self.hi - self.lo) * k as f64 / n as f64)
            .collect()
    }
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Target profile JSON.
    #[arg(long)]
    pub target: PathBuf,
    /// Flux JSON ({"type":"burgers"} or {"type":"poly",...}).
    #[arg(long)]
    pub flux: PathBuf,
    /// Horizon T > 0.
    #[arg(long = "T", visible_alias = "t")]
    pub horizon: f64,
    /// Override the membership tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Override the construction sampling step for non-quadratic fluxes.
    #[arg(long)]
    pub dx_out: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Attainability verdict and the forced/free partition of the target.
    Partition {
        /// Target profile JSON.
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        flux: PathBuf,
        #[arg(long = "T", visible_alias = "t")]
        horizon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Forward evolution sampled on a grid (state or potential form).
    Evolve {
        #[arg(long, value_enum)]
        mode: EvolveMode,
        /// Initial datum profile JSON.
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        flux: PathBuf,
        #[arg(long)]
        t: f64,
        /// Sample grid lo:hi:dx.
        #[arg(long, allow_hyphen_values = true)]
        grid: GridSpec,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a distinguished member of the solution set.
    Construct {
        #[arg(long, value_enum)]
        kind: ConstructKind,
        #[command(flatten)]
        problem: ProblemArgs,
        /// Jump location (required for kind = sharp).
        #[arg(long, allow_negative_numbers = true)]
        jump_x: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide membership of a candidate datum.
    Member {
        /// Candidate datum profile JSON.
        #[arg(long)]
        candidate: PathBuf,
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, value_enum, default_value = "both")]
        route: MemberRoute,
        /// Exit with status 3 when the candidate is refuted.
        #[arg(long)]
        expect_member: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Span a finite face through a member: N+1 profiles averaging to it.
    Face {
        #[arg(long)]
        candidate: PathBuf,
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Directory receiving v_0.json .. v_N.json plus a summary.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Build a small non-member perturbation of a member.
    Spoiler {
        #[arg(long)]
        candidate: PathBuf,
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, value_enum, default_value = "gap")]
        kind: SpoilerKind,
        /// Jump location (required for kind = gap).
        #[arg(long, allow_negative_numbers = true)]
        jump_x: Option<f64>,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reference finite-volume evolution.
    Oracle {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        flux: PathBuf,
        #[arg(long = "T", visible_alias = "t")]
        horizon: f64,
        #[arg(long, default_value_t = 1e-3)]
        dx: f64,
        #[arg(long, default_value_t = 0.9)]
        cfl: f64,
        /// Output window lo:hi:dx_sample for the emitted profile.
        #[arg(long, default_value = "-5:5:0.01", allow_hyphen_values = true)]
        grid: GridSpec,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a seeded corpus of admissible targets and run the full
    /// construction / membership battery over it.
    Corpus {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long = "T", visible_alias = "t", default_value_t = 1.0)]
        horizon: f64,
    },
}

/// Entry point for the binary: parse, run, map errors to exit codes.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid JSON in {path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("invalid flux: {0}")]
    Flux(#[from] crate::flux::FluxError),
    #[error("invalid profile: {0}")]
    Profile(#[from] crate::piecewise::ProfileError),
    #[error("{0}")]
    Oleinik(#[from] oleinik::OleinikError),
    #[error("{0}")]
    Inverse(#[from] inverse::InverseError),
    #[error("{0}")]
    Solver(#[from] laxhopf::LaxHopfError),
    #[error("{0}")]
    Oracle(#[from] oracle::OracleError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Oleinik(oleinik::OleinikError::NotAttainable { .. }) => 2,
            CliError::Inverse(inverse::InverseError::Oleinik(
                oleinik::OleinikError::NotAttainable { .. },
            )) => 2,
            _ => 1,
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.display().to_string(),
        source,
    })
}

fn load_flux(path: &Path) -> Result<ConvexFlux, CliError> {
    let spec: FluxSpec = read_json(path)?;
    Ok(ConvexFlux::from_spec(&spec)?)
}

fn load_profile(path: &Path) -> Result<PiecewiseProfile, CliError> {
    let raw: serde_json::Value = read_json(path)?;
    let profile: PiecewiseProfile =
        serde_json::from_value(raw).map_err(|source| CliError::Json {
            path: path.display().to_string(),
            source,
        })?;
    // Re-validate the structural invariants after deserialization.
    PiecewiseProfile::new(
        profile.pieces().to_vec(),
        profile.ext_left,
        profile.ext_right,
    )
    .map_err(CliError::from)
}

/// Serialize with 17 significant digits on every float.
pub fn to_json_17<T: Serialize>(value: &T) -> String {
    struct SigDigits;
    impl serde_json::ser::Formatter for SigDigits {
        fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
        where
            W: ?Sized + std::io::Write,
        {
            write!(writer, "{value:.16e}")
        }
    }
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigits);
    value.serialize(&mut ser).expect("serialization is infallible");
    String::from_utf8(out).expect("JSON is UTF-8")
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        None => {
            println!("{content}");
            Ok(())
        }
        Some(path) => std::fs::write(path, format!("{content}\n")).map_err(|source| {
            CliError::Write {
                path: path.display().to_string(),
                source,
            }
        }),
    }
}

fn profile_csv(profile: &PiecewiseProfile, grid: &GridSpec) -> String {
    let mut s = String::from("x,value_left,value_right\n");
    for x in grid.points() {
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{:.16e}",
            x,
            profile.eval_left(x),
            profile.eval_right(x)
        );
    }
    s
}

fn build_problem(args: &ProblemArgs) -> Result<InverseProblem, CliError> {
    let flux = load_flux(&args.flux)?;
    let target = load_profile(&args.target)?;
    let mut tol = inverse::Tolerances::for_flux(&flux);
    if let Some(t) = args.tol {
        tol.membership = t;
        tol.no_face = 100.0 * t;
    }
    if let Some(dx) = args.dx_out {
        tol.dx_out = dx;
    }
    Ok(InverseProblem::with_tolerances(
        target,
        flux,
        args.horizon,
        tol,
    )?)
}

pub fn run(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Partition {
            profile,
            flux,
            horizon,
            out,
        } => {
            let f = load_flux(&flux)?;
            let w = load_profile(&profile)?;
            let pmap = PMap::build(&w, &f, horizon)?;
            let verdict = oleinik::check_oleinik(&pmap);
            if !verdict.admissible {
                let doc = json!({
                    "schema": SCHEMA,
                    "verdict": false,
                    "witness": verdict.witness,
                });
                emit(&out, &to_json_17(&doc))?;
                let w = verdict.witness.unwrap();
                eprintln!("target not attainable: {w}");
                return Ok(2);
            }
            let part = oleinik::partition(&pmap)?;
            let doc = json!({
                "schema": SCHEMA,
                "verdict": true,
                "xi": part.xi,
                "xii": part.xii,
                "exceptional": part.exceptional,
            });
            emit(&out, &to_json_17(&doc))?;
            Ok(0)
        }
        Command::Evolve {
            mode,
            profile,
            flux,
            t,
            grid,
            format,
            out,
        } => {
            let f = load_flux(&flux)?;
            let u0 = load_profile(&profile)?;
            let xs = grid.points();
            match mode {
                EvolveMode::Cl => {
                    let traces = laxhopf::evolve_cl_grid(&u0, &f, t, &xs)?;
                    match format {
                        OutFormat::Csv => {
                            let mut s = String::from("x,value_left,value_right\n");
                            for (x, (l, r)) in xs.iter().zip(&traces) {
                                let _ = writeln!(s, "{x:.16e},{l:.16e},{r:.16e}");
                            }
                            emit(&out, s.trim_end())?;
                        }
                        OutFormat::Json => {
                            let rows: Vec<_> = xs
                                .iter()
                                .zip(&traces)
                                .map(|(x, (l, r))| json!({"x": x, "left": l, "right": r}))
                                .collect();
                            let doc = json!({"schema": SCHEMA, "mode": "cl", "t": t, "rows": rows});
                            emit(&out, &to_json_17(&doc))?;
                        }
                    }
                }
                EvolveMode::Hj => {
                    let prim = u0.primitive(0.0);
                    let vals = laxhopf::evolve_hj_grid(&prim, &f, t, &xs)?;
                    match format {
                        OutFormat::Csv => {
                            let mut s = String::from("x,U\n");
                            for (x, v) in xs.iter().zip(&vals) {
                                let _ = writeln!(s, "{x:.16e},{v:.16e}");
                            }
                            emit(&out, s.trim_end())?;
                        }
                        OutFormat::Json => {
                            let rows: Vec<_> = xs
                                .iter()
                                .zip(&vals)
                                .map(|(x, v)| json!({"x": x, "u": v}))
                                .collect();
                            let doc = json!({"schema": SCHEMA, "mode": "hj", "t": t, "rows": rows});
                            emit(&out, &to_json_17(&doc))?;
                        }
                    }
                }
            }
            Ok(0)
        }
        Command::Construct {
            kind,
            problem,
            jump_x,
            out,
        } => {
            let prob = build_problem(&problem)?;
            let built = match kind {
                ConstructKind::Extremal => prob.extremal_pullback(),
                ConstructKind::ExtremalReverse => prob.extremal_reverse()?,
                ConstructKind::Sharp => {
                    let x = jump_x.ok_or_else(|| {
                        CliError::Usage("--jump-x is required for kind = sharp".into())
                    })?;
                    prob.sharp(x)?
                }
            };
            emit(&out, &to_json_17(&built))?;
            Ok(0)
        }
        Command::Member {
            candidate,
            problem,
            route,
            expect_member,
            out,
        } => {
            let prob = build_problem(&problem)?;
            let u0 = load_profile(&candidate)?;
            let mut reports: Vec<MembershipReport> = Vec::new();
            if matches!(route, MemberRoute::Cl | MemberRoute::Both) {
                reports.push(prob.membership_cl(&u0));
            }
            if matches!(route, MemberRoute::Hj | MemberRoute::Both) {
                let w_pot = prob.target().primitive(0.0);
                let offset = prob.consistent_offset(&u0, &w_pot)?;
                let u_pot = PiecewisePrimitive::new(u0.clone(), 0.0, offset);
                reports.push(prob.membership_hj(&u_pot, &w_pot));
            }
            let verdict = reports.iter().all(|r| r.verdict);
            let doc = json!({
                "schema": SCHEMA,
                "verdict": verdict,
                "reports": reports,
            });
            emit(&out, &to_json_17(&doc))?;
            if expect_member && !verdict {
                return Ok(3);
            }
            Ok(0)
        }
        Command::Face {
            candidate,
            problem,
            n,
            out_dir,
        } => {
            let prob = build_problem(&problem)?;
            let u0 = load_profile(&candidate)?;
            let family = prob.tent_family(&u0, n)?;
            std::fs::create_dir_all(&out_dir).map_err(|source| CliError::Write {
                path: out_dir.display().to_string(),
                source,
            })?;
            for (k, v) in family.iter().enumerate() {
                let path = out_dir.join(format!("v_{k}.json"));
                std::fs::write(&path, format!("{}\n", to_json_17(v))).map_err(|source| {
                    CliError::Write {
                        path: path.display().to_string(),
                        source,
                    }
                })?;
            }
            // Summary: average-identity residual and Gram spectrum.
            let mut acc = PiecewiseProfile::constant(0.0);
            for v in &family {
                acc = acc.add(v);
            }
            let avg = acc.scale(1.0 / (n + 1) as f64);
            let window = 2.0 + u0
                .breakpoints()
                .iter()
                .fold(0.0f64, |m, &x| m.max(x.abs()));
            let residual = l1_distance(&avg, &u0, -window, window);
            let gram = inverse::difference_gram(&family, -window, window);
            let eig = inverse::symmetric_eigenvalues(&gram);
            let doc = json!({
                "schema": SCHEMA,
                "n": n,
                "average_identity_l1": residual,
                "gram_eigenvalues": eig,
            });
            let path = out_dir.join("summary.json");
            std::fs::write(&path, format!("{}\n", to_json_17(&doc))).map_err(|source| {
                CliError::Write {
                    path: path.display().to_string(),
                    source,
                }
            })?;
            println!("{}", to_json_17(&doc));
            Ok(0)
        }
        Command::Spoiler {
            candidate,
            problem,
            kind,
            jump_x,
            n,
            out,
        } => {
            let prob = build_problem(&problem)?;
            let u0 = load_profile(&candidate)?;
            let spoiled = match kind {
                SpoilerKind::Gap => {
                    let x = jump_x.ok_or_else(|| {
                        CliError::Usage("--jump-x is required for kind = gap".into())
                    })?;
                    prob.spoiler_negative(&u0, x, n)?.0
                }
                SpoilerKind::Bump => prob.spoiler_bump(&u0, n),
            };
            emit(&out, &to_json_17(&spoiled))?;
            Ok(0)
        }
        Command::Oracle {
            profile,
            flux,
            horizon,
            dx,
            cfl,
            grid,
            format,
            out,
        } => {
            let f = load_flux(&flux)?;
            let u0 = load_profile(&profile)?;
            let evolved = oracle::evolve_fv(&u0, &f, horizon, grid.lo, grid.hi, dx, cfl)?;
            match format {
                OutFormat::Csv => emit(&out, profile_csv(&evolved, &grid).trim_end())?,
                OutFormat::Json => emit(&out, &to_json_17(&evolved))?,
            }
            Ok(0)
        }
        Command::Corpus {
            seed,
            count,
            horizon,
        } => {
            let summary = run_corpus(seed, count, horizon)?;
            print!("{}", summary.table);
            if summary.all_pass {
                Ok(0)
            } else {
                Ok(4)
            }
        }
    }
}

/// Shape parameters of the random target generator.
#[derive(Debug, Clone, Copy)]
pub struct CorpusConfig {
    pub horizon: f64,
    /// Structures live inside [−window, window].
    pub window: f64,
    pub max_pieces: usize,
    /// Characteristic speeds stay within ±speed_span.
    pub speed_span: f64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            horizon: 1.0,
            window: 4.0,
            max_pieces: 6,
            speed_span: 1.5,
        }
    }
}

/// Random attainable targets: the speed profile f'(w) gets positive slopes
/// capped at 0.95/T and only downward jumps, which enforces the decay
/// condition by construction. Continuous targets are mixed in (about one in
/// three) so the uniqueness criterion sees both cases.
pub fn corpus_generate(
    seed: u64,
    count: usize,
    flux: &ConvexFlux,
    cfg: &CorpusConfig,
) -> Vec<PiecewiseProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let continuous = k % 3 == 2;
            random_target(&mut rng, flux, cfg, continuous)
        })
        .collect()
}

/// Random targets that deliberately violate the decay condition, either by
/// an overly steep speed ramp or by an upward jump. Violations span a
/// visible stretch so that pairwise sampling oracles detect them reliably.
pub fn corpus_generate_violating(
    seed: u64,
    count: usize,
    flux: &ConvexFlux,
    cfg: &CorpusConfig,
) -> Vec<PiecewiseProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x05ee_dbad);
    let t = cfg.horizon;
    (0..count)
        .map(|k| {
            let lambda0 = rng.random_range(-1.0..0.2);
            let x0 = rng.random_range(-2.0..1.0);
            let speed_nodes: Vec<(f64, f64, f64)> = if k % 2 == 0 {
                // Speed ramp steeper than 1/T over a visible stretch.
                let len = rng.random_range(0.5..1.5);
                let rise = rng.random_range(1.3..2.0) / t * len;
                vec![
                    (x0 - 1.0, lambda0, lambda0),
                    (x0, lambda0, lambda0),
                    (x0 + len, lambda0 + rise, lambda0 + rise),
                    (x0 + len + 1.0, lambda0 + rise, lambda0 + rise),
                ]
            } else {
                // Upward speed jump.
                let up = rng.random_range(0.4..1.0);
                vec![
                    (x0 - 1.0, lambda0, lambda0),
                    (x0, lambda0, lambda0 + up),
                    (x0 + 1.0, lambda0 + up, lambda0 + up),
                ]
            };
            speeds_to_profile(&speed_nodes, flux)
        })
        .collect()
}

fn random_target(
    rng: &mut ChaCha8Rng,
    flux: &ConvexFlux,
    cfg: &CorpusConfig,
    continuous: bool,
) -> PiecewiseProfile {
    let t = cfg.horizon;
    let slope_cap = 0.95 / t;
    let n_pieces = rng.random_range(2..=cfg.max_pieces);
    let mut xs = vec![-cfg.window];
    for _ in 0..n_pieces {
        xs.push(rng.random_range(-cfg.window..cfg.window));
    }
    xs.push(cfg.window);
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup_by(|a, b| (*a - *b).abs() < 0.2);
    if xs.len() < 2 {
        xs = vec![-cfg.window, cfg.window];
    }

    // Work in speed space: λ(x) = f'(w(x)). Positive slopes capped below
    // 1/T and only downward jumps keep the target attainable.
    let span = cfg.speed_span;
    let mut lambda = rng.random_range(-0.5 * span..0.5 * span);
    let mut samples: Vec<(f64, f64, f64)> = vec![(xs[0], lambda, lambda)];
    for i in 0..xs.len() - 1 {
        let len = xs[i + 1] - xs[i];
        let slope = rng.random_range(-1.2..slope_cap * 0.999);
        let next = (lambda + slope * len).clamp(-span, span);
        samples.push((xs[i + 1], next, next));
        lambda = next;
        let jump_allowed = !continuous && i + 2 < xs.len();
        if jump_allowed && rng.random_range(0..100) < 45 {
            let down = rng.random_range(0.4..1.3);
            let jumped = (lambda - down).max(-span);
            if lambda - jumped > 0.3 {
                let last = samples.last_mut().unwrap();
                last.2 = jumped;
                lambda = jumped;
            }
        }
    }
    speeds_to_profile(&samples, flux)
}

/// Map (x, λ_left, λ_right) speed samples to a state profile. Quadratic
/// fluxes keep pieces exactly affine; other fluxes get a refining sub-grid
/// before linearization so the capped speed slopes survive the mapping.
fn speeds_to_profile(samples: &[(f64, f64, f64)], flux: &ConvexFlux) -> PiecewiseProfile {
    let g = |lam: f64| {
        let (lo, hi) = flux.speed_range();
        flux.g(lam.clamp(lo, hi)).expect("clamped speed is in range")
    };
    let state_samples: Vec<(f64, f64, f64)> = if flux.is_quadratic() {
        samples.iter().map(|&(x, l, r)| (x, g(l), g(r))).collect()
    } else {
        let mut refined = Vec::new();
        for (i, &(x, l, r)) in samples.iter().enumerate() {
            refined.push((x, g(l), g(r)));
            if i + 1 < samples.len() {
                let (x1, l1, _) = samples[i + 1];
                for k in 1..16 {
                    let theta = k as f64 / 16.0;
                    let xm = x + theta * (x1 - x);
                    let vm = g(r + theta * (l1 - r));
                    refined.push((xm, vm, vm));
                }
            }
        }
        refined
    };
    PiecewiseProfile::from_samples(&state_samples).expect("generator emits ascending samples")
}

struct CorpusSummary {
    table: String,
    all_pass: bool,
}

fn run_corpus(seed: u64, count: usize, horizon: f64) -> Result<CorpusSummary, CliError> {
    let flux = ConvexFlux::burgers();
    let cfg = CorpusConfig {
        horizon,
        ..CorpusConfig::default()
    };
    let targets = corpus_generate(seed, count, &flux, &cfg);
    let violating = corpus_generate_violating(seed, count.div_ceil(2), &flux, &cfg);

    let mut rows: Vec<(String, usize, usize, f64)> = Vec::new();
    let mut pass_counts = |name: &str, ok: usize, total: usize, worst: f64| {
        rows.push((name.to_string(), ok, total, worst));
    };

    // Attainability against the brute-force pair oracle.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x00c0_ffee);
    let mut ok = 0;
    let total = targets.len() + violating.len();
    for (w, expect) in targets
        .iter()
        .map(|w| (w, true))
        .chain(violating.iter().map(|w| (w, false)))
    {
        let pmap = PMap::build(w, &flux, horizon)?;
        let verdict = oleinik::check_oleinik(&pmap).admissible;
        let brute = brute_force_monotone(&pmap, &mut rng, 10_000, cfg.window + 1.0);
        if verdict == expect && brute == expect {
            ok += 1;
        }
    }
    pass_counts("attainability gate", ok, total, 0.0);

    // Constructions, round trips and membership on admissible targets.
    let mut rt_ok = 0;
    let mut rt_worst = 0.0f64;
    let mut eq_ok = 0;
    let mut eq_worst = 0.0f64;
    let mut mem_ok = 0;
    let mut mem_total = 0;
    let mut spoil_ok = 0;
    let mut spoil_total = 0;
    let mut unique_ok = 0;
    for w in &targets {
        let prob = InverseProblem::new(w.clone(), flux.clone(), horizon)?;
        let u_star = prob.extremal_pullback();
        let rt = prob.roundtrip_l1(&u_star, cfg.window + 1.0, 1e-3)?;
        rt_worst = rt_worst.max(rt);
        if rt <= 1e-4 {
            rt_ok += 1;
        }
        let u_rev = prob.extremal_reverse()?;
        let eq = l1_distance(&u_star, &u_rev, -cfg.window - 1.0, cfg.window + 1.0);
        eq_worst = eq_worst.max(eq);
        if eq <= 1e-6 {
            eq_ok += 1;
        }

        let mut members = vec![u_star.clone()];
        let jumps: Vec<f64> = prob
            .pmap()
            .jumps()
            .iter()
            .filter(|j| j.gap_width() > 0.0)
            .map(|j| j.x)
            .collect();
        if let Some(&jx) = jumps.first() {
            let u_sharp = prob.sharp(jx)?;
            for theta in [0.5, 3.0] {
                members.push(prob.cone_combination(&u_sharp, theta)?);
            }
            members.extend(prob.tent_family(&u_sharp, 2)?);
            members.push(u_sharp);
        }
        let w_pot = prob.target().primitive(0.0);
        for m in &members {
            mem_total += 1;
            let cl = prob.membership_cl(m);
            let offset = prob.consistent_offset(m, &w_pot)?;
            let hj =
                prob.membership_hj(&PiecewisePrimitive::new(m.clone(), 0.0, offset), &w_pot);
            if cl.verdict && hj.verdict {
                mem_ok += 1;
            }
        }
        // Spoilers must be refuted with certified margins.
        spoil_total += 1;
        if prob
            .membership_cl(&prob.spoiler_bump(&u_star, 10))
            .certified_fail()
        {
            spoil_ok += 1;
        }
        if let Some(&jx) = jumps.first() {
            spoil_total += 1;
            let (sp, _) = prob.spoiler_negative(&u_star, jx, 10)?;
            if prob.membership_cl(&sp).certified_fail() {
                spoil_ok += 1;
            }
        }
        let singleton = matches!(prob.uniqueness_probe(), Uniqueness::Singleton);
        if singleton == jumps.is_empty() {
            unique_ok += 1;
        }
    }
    pass_counts("extremal round trip <= 1e-4", rt_ok, targets.len(), rt_worst);
    pass_counts(
        "construction equality <= 1e-6",
        eq_ok,
        targets.len(),
        eq_worst,
    );
    pass_counts("membership cl & hj", mem_ok, mem_total, 0.0);
    pass_counts("spoilers refuted", spoil_ok, spoil_total, 0.0);
    pass_counts("uniqueness probe", unique_ok, targets.len(), 0.0);

    let mut table = String::new();
    let _ = writeln!(table, "corpus seed={seed} count={count} T={horizon}");
    let _ = writeln!(table, "{:<34} {:>9} {:>14}", "criterion", "pass", "worst");
    let mut all_pass = true;
    for (name, ok, total, worst) in &rows {
        let status = if ok == total { "" } else { "  FAIL" };
        if ok != total {
            all_pass = false;
        }
        let _ = writeln!(
            table,
            "{:<34} {:>4}/{:<4} {:>14.3e}{}",
            name, ok, total, worst, status
        );
    }
    Ok(CorpusSummary { table, all_pass })
}

/// Brute-force check of p(x) ≤ p(y) on mixed global and local random pairs.
pub fn brute_force_monotone(
    pmap: &PMap,
    rng: &mut ChaCha8Rng,
    pairs: usize,
    window: f64,
) -> bool {
    let tol = 1e-10;
    for k in 0..pairs {
        let (x, y) = if k % 2 == 0 {
            let x = rng.random_range(-window..window);
            let y = rng.random_range(-window..window);
            if x < y {
                (x, y)
            } else {
                (y, x + 1e-9)
            }
        } else {
            // Local pairs catch slope violations and jump straddles.
            let x = rng.random_range(-window..window);
            let d: f64 = rng.random_range(1e-6..0.2);
            (x, x + d)
        };
        if pmap.eval_left(x) > pmap.eval_left(y) + tol
            || pmap.eval_right(x) > pmap.eval_right(y) + tol
            || pmap.eval_left(x) > pmap.eval_right(x) + tol
        {
            return false;
        }
    }
    true
}
