//! `vanalogy`: generate, solve, ablate, calibrate, evaluate and render
//! part-whole analogy problem sets.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 internal invariant
//! violation, 4 calibration target not reached.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use vanalogy::baselines::{ablate_set, Similarity};
use vanalogy::eval::{compare, evaluate, write_results_csv, EvalConfig, EvaluationReport, HumanReference, Solver};
use vanalogy::perception::{calibrate_noise, NoiseProfile};
use vanalogy::problem::{build_corpus, build_test_set, read_problem_set, write_problem_set, ProblemSet, FORMAT_VERSION};
use vanalogy::scene::{write_png, LabelMap};
use vanalogy::Error;

const REPORT_FILE: &str = "report.json";
const RESULTS_FILE: &str = "results.csv";

#[derive(Parser)]
#[command(name = "vanalogy", version, about = "Part-whole visual analogy benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a problem set directory.
    Generate(GenerateArgs),
    /// Run a solver over a problem set.
    Solve(SolveArgs),
    /// Blank the whole-car terms of every problem.
    Ablate(AblateArgs),
    /// Fit the segmentation flip rate to a target mIoU.
    Calibrate(CalibrateArgs),
    /// Compare a solve report with human reference accuracies.
    Eval(EvalArgs),
    /// Export every label map of a set as PNG.
    Render(RenderArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Test,
    Corpus,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Number of problems (corpus only; the test set always has 128).
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum SimilarityArg {
    Cosine,
    Hamming,
}

#[derive(Args, Serialize)]
struct SolveArgs {
    /// One of: pcm, shortcut, random.
    #[arg(long)]
    solver: String,
    #[arg(long)]
    problems: PathBuf,
    /// Use ground-truth maps and car types.
    #[arg(long, conflicts_with = "noise", required_unless_present = "noise")]
    no_noise: bool,
    /// Noise profile JSON (as written by `calibrate`).
    #[arg(long)]
    noise: Option<PathBuf>,
    /// Override the profile's base flip rate.
    #[arg(long, requires = "noise")]
    flip_rate: Option<f64>,
    /// Override the profile's noise seed.
    #[arg(long, requires = "noise")]
    noise_seed: Option<u64>,
    /// Seed for solver-side randomness.
    #[arg(long)]
    seed: u64,
    /// Independent perception draws per problem.
    #[arg(long, default_value_t = 1)]
    replicates: usize,
    /// Similarity used by the shortcut solver.
    #[arg(long, value_enum, default_value = "cosine")]
    similarity: SimilarityArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AblateArgs {
    #[arg(long)]
    problems: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    target_miou: f64,
    /// Problem set whose whole-car maps form the calibration sample.
    #[arg(long)]
    problems: PathBuf,
    /// Profile supplying every field except the flip rate (defaults otherwise).
    #[arg(long)]
    template: Option<PathBuf>,
    /// Noise seed stored in the fitted profile.
    #[arg(long)]
    seed: u64,
    /// Output profile JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// `report.json` written by `solve`.
    #[arg(long)]
    report: PathBuf,
    /// Human reference CSV (`condition,accuracy`).
    #[arg(long)]
    human: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    problems: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
    Internal(String),
    Warning(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Internal(_) => 3,
            Failure::Warning(_) => 4,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidArgument(_) => Failure::Usage(msg),
            Error::InvalidMap(_)
            | Error::Malformed { .. }
            | Error::ChecksumMismatch { .. }
            | Error::DanglingMapRef(_)
            | Error::HumanReference(_)
            | Error::Io { .. }
            | Error::Json(_) => Failure::Data(msg),
            Error::DimensionMismatch { .. }
            | Error::ComponentAbsent(_)
            | Error::PieceCoverage(_)
            | Error::SolverFailed { .. } => Failure::Internal(msg),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn io_failure(path: &Path) -> impl FnOnce(io::Error) -> Failure + '_ {
    move |e| Failure::Data(format!("{}: {e}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CmdResult {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Internal(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(io_failure(path))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(io_failure(path))?;
    serde_json::from_str(&text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

/// Resolved configuration embedded in every run record.
#[derive(Serialize, Deserialize)]
struct RunConfig {
    command: String,
    solver: String,
    problems: PathBuf,
    problem_set_hash: String,
    seed: u64,
    replicates: usize,
    similarity: Similarity,
    noise_profile: Option<NoiseProfile>,
}

#[derive(Serialize, Deserialize)]
struct RunRecord {
    format_version: u32,
    config: RunConfig,
    report: EvaluationReport,
}

fn cmd_generate(args: GenerateArgs) -> CmdResult {
    let set = match (args.kind, args.count) {
        (Kind::Test, Some(n)) if n != 128 => {
            return Err(Failure::Usage(format!("the test set has 128 problems, not {n}")))
        }
        (Kind::Test, _) => build_test_set(args.seed)?,
        (Kind::Corpus, None) => return Err(Failure::Usage("--count is required for a corpus".into())),
        (Kind::Corpus, Some(0)) => return Err(Failure::Usage("--count must be at least 1".into())),
        (Kind::Corpus, Some(n)) => build_corpus(n, args.seed)?,
    };
    let manifest = write_problem_set(&set, &args.out)?;
    println!("{}", manifest.content_hash);
    Ok(())
}

fn load_noise(args: &SolveArgs) -> Result<Option<NoiseProfile>, Failure> {
    let Some(path) = &args.noise else {
        return Ok(None);
    };
    let mut profile: NoiseProfile = read_json(path)?;
    if let Some(rate) = args.flip_rate {
        profile.flip_rate_base = rate;
    }
    if let Some(seed) = args.noise_seed {
        profile.seed = seed;
    }
    profile.validate()?;
    Ok(Some(profile))
}

fn cmd_solve(args: SolveArgs) -> CmdResult {
    let similarity = match args.similarity {
        SimilarityArg::Cosine => Similarity::Cosine,
        SimilarityArg::Hamming => Similarity::Hamming,
    };
    let solver = match args.solver.parse::<Solver>()? {
        Solver::Shortcut(_) => Solver::Shortcut(similarity),
        s => s,
    };
    let noise = load_noise(&args)?;
    let set = read_problem_set(&args.problems)?;
    let config = EvalConfig {
        noise,
        replicates: args.replicates,
        seed: args.seed,
    };
    let evaluation = evaluate(solver, &set, &config)?;
    fs::create_dir_all(&args.out).map_err(io_failure(&args.out))?;

    let csv_path = args.out.join(RESULTS_FILE);
    let file = fs::File::create(&csv_path).map_err(io_failure(&csv_path))?;
    let mut w = BufWriter::new(file);
    write_results_csv(&mut w, solver.id(), &evaluation.trials)
        .and_then(|()| w.flush())
        .map_err(io_failure(&csv_path))?;

    let report = evaluation.report;
    println!(
        "{} on {} problems: overall accuracy {:.4}",
        report.solver_id, report.problem_count, report.overall_accuracy
    );
    let record = RunRecord {
        format_version: FORMAT_VERSION,
        config: RunConfig {
            command: "solve".into(),
            solver: solver.id().into(),
            problems: args.problems.clone(),
            problem_set_hash: report.problem_set_hash.clone(),
            seed: args.seed,
            replicates: args.replicates,
            similarity,
            noise_profile: noise,
        },
        report,
    };
    write_json(&args.out.join(REPORT_FILE), &record)
}

fn cmd_ablate(args: AblateArgs) -> CmdResult {
    let set = read_problem_set(&args.problems)?;
    let manifest = write_problem_set(&ablate_set(&set), &args.out)?;
    println!("{}", manifest.content_hash);
    Ok(())
}

/// Distinct non-blank whole-car maps of a set, in first-seen order.
fn whole_maps(set: &ProblemSet) -> Vec<&LabelMap> {
    let mut seen = std::collections::HashSet::new();
    set.problems
        .iter()
        .flat_map(|p| [&*p.a, &*p.c])
        .filter(|m| m.foreground_count() > 0 && seen.insert(*m))
        .collect()
}

fn cmd_calibrate(args: CalibrateArgs) -> CmdResult {
    let template = match &args.template {
        Some(path) => read_json(path)?,
        None => NoiseProfile::default(),
    };
    let template = NoiseProfile {
        seed: args.seed,
        ..template
    };
    let set = read_problem_set(&args.problems)?;
    let maps = whole_maps(&set);
    if maps.is_empty() {
        return Err(Failure::Usage("the problem set has no non-blank whole-car maps".into()));
    }
    let cal = calibrate_noise(args.target_miou, &maps, &template)?;
    write_json(&args.out, &cal.profile)?;
    println!(
        "flip_rate_base {:.6} gives mean mIoU {:.4} over {} maps (target {}, {} iterations)",
        cal.profile.flip_rate_base,
        cal.achieved_miou,
        maps.len(),
        cal.target_miou,
        cal.iterations
    );
    if cal.reached {
        Ok(())
    } else {
        Err(Failure::Warning(format!(
            "target mIoU {} is unreachable; closest was {:.4}",
            cal.target_miou, cal.achieved_miou
        )))
    }
}

fn load_report(path: &Path) -> Result<EvaluationReport, Failure> {
    let value: serde_json::Value = read_json(path)?;
    let report = match value.get("report") {
        Some(inner) => inner.clone(),
        None => value,
    };
    serde_json::from_value(report).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn cmd_eval(args: EvalArgs) -> CmdResult {
    let report = load_report(&args.report)?;
    let human = HumanReference::load(&args.human)?;
    let cmp = compare(&report, &human)?;
    println!("RMSD vs human: {:.4}", cmp.rmsd);
    let r = cmp.reference_rmsd;
    println!(
        "published reference RMSDs: siamese {:.2}, relation {:.2}, pcm {:.2}",
        r.siamese, r.relation, r.pcm
    );
    let e = cmp.model_main_effects;
    println!(
        "main effects (same-diff, vis-invis, part-piece): {:+.4} {:+.4} {:+.4}",
        e.orientation, e.visibility, e.granularity
    );
    write_json(&args.out, &cmp)
}

fn cmd_render(args: RenderArgs) -> CmdResult {
    const ROLES: [&str; 7] = ["A", "B", "C", "D1", "D2", "D3", "D4"];
    let set = read_problem_set(&args.problems)?;
    let mut written = 0usize;
    for p in &set.problems {
        let dir = args.out.join(&p.problem_id);
        fs::create_dir_all(&dir).map_err(io_failure(&dir))?;
        for (role, map) in ROLES.iter().zip(p.maps()) {
            let path = dir.join(format!("{role}.png"));
            let file = fs::File::create(&path).map_err(io_failure(&path))?;
            write_png(map, BufWriter::new(file))?;
            written += 1;
        }
    }
    println!("wrote {written} images to {}", args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Ablate(a) => cmd_ablate(a),
        Command::Calibrate(a) => cmd_calibrate(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Render(a) => cmd_render(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (label, msg) = match &f {
                Failure::Usage(m) => ("usage error", m),
                Failure::Data(m) => ("data error", m),
                Failure::Internal(m) => ("internal error", m),
                Failure::Warning(m) => ("warning", m),
            };
            eprintln!("vanalogy: {label}: {msg}");
            ExitCode::from(f.code())
        }
    }
}
