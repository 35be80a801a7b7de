//! Solver evaluation: per-problem perception, per-condition aggregation,
//! response-type breakdowns and comparison with human reference cells.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{solve_random, solve_shortcut, solve_shortcut_hamming, Similarity};
use crate::error::{Error, Result};
use crate::pcm::{extract_features, format_sig9, solve_pcm, CarTypePrediction, ProblemFeatures};
use crate::perception::{corrupt_segmentation, simulate_classifier, ImageKind, NoiseProfile};
use crate::problem::{content_hash, AnalogyProblem, Condition, OptionKind, ProblemSet};
use crate::rng::{salt, Stream};
use crate::scalar::Scalar;
use crate::scene::{Granularity, SharedMap};

/// Published model-vs-human RMSDs, shown as reference lines only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRmsd {
    pub siamese: f64,
    pub relation: f64,
    pub pcm: f64,
}

pub const REFERENCE_RMSD: ReferenceRmsd = ReferenceRmsd {
    siamese: 0.24,
    relation: 0.17,
    pcm: 0.07,
};

pub const BLANK_MAP_NOTE: &str = "two-term ablation: A and C are blank maps (zero part block, \
uniform type block); this blank-map convention is a declared stand-in for withholding the \
whole-car images";

pub const NOISE_NOTE: &str = "accuracies under simulated perception are conditional on the \
parametric noise profile embedded in this report";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Solver {
    Pcm,
    Shortcut(Similarity),
    Random,
}

impl Solver {
    pub const IDS: [&'static str; 3] = ["pcm", "shortcut", "random"];

    pub fn id(self) -> &'static str {
        match self {
            Solver::Pcm => "pcm",
            Solver::Shortcut(_) => "shortcut",
            Solver::Random => "random",
        }
    }

    pub fn needs_features(self) -> bool {
        !matches!(self, Solver::Random)
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pcm" => Ok(Solver::Pcm),
            "shortcut" => Ok(Solver::Shortcut(Similarity::Cosine)),
            "random" => Ok(Solver::Random),
            _ => Err(Error::InvalidArgument(format!(
                "unknown solver `{s}` (valid: {})",
                Solver::IDS.join(", ")
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    /// `None` means ground-truth maps and classification.
    pub noise: Option<NoiseProfile>,
    /// Independent perception draws per problem.
    pub replicates: usize,
    /// Seed for solver-side randomness.
    pub seed: u64,
}

impl EvalConfig {
    pub fn ground_truth(seed: u64) -> Self {
        Self {
            noise: None,
            replicates: 1,
            seed,
        }
    }
}

/// What a solver sees of one problem.
#[derive(Debug, Clone)]
pub struct Percept {
    /// A, B, C, D1..D4, possibly corrupted.
    pub maps: [SharedMap; 7],
    pub features: ProblemFeatures<f64>,
}

/// Perceive all seven images of problem `index` for replicate `replicate`.
pub fn perceive(
    problem: &AnalogyProblem,
    index: usize,
    replicate: usize,
    noise: Option<&NoiseProfile>,
) -> Percept {
    let truth = problem.maps();
    let cars = [
        problem.source_car,
        problem.source_car,
        problem.target_car,
        problem.option_cars[0],
        problem.option_cars[1],
        problem.option_cars[2],
        problem.option_cars[3],
    ];
    let view = |role: usize| {
        let Some(profile) = noise else {
            let m = truth[role].clone();
            let f = extract_features(&m, &CarTypePrediction::one_hot(cars[role]));
            return (m, f);
        };
        let path = [index as u64, replicate as u64, role as u64];
        let mut seg = Stream::derived(profile.seed, &[&[salt::SEGMENTATION][..], &path].concat());
        let mut cls = Stream::derived(profile.seed, &[&[salt::CLASSIFIER][..], &path].concat());
        let kind = if role == 0 || role == 2 {
            ImageKind::Whole
        } else {
            ImageKind::Subregion
        };
        let m = SharedMap::new(corrupt_segmentation(
            truth[role],
            profile,
            problem.condition,
            &mut seg,
        ));
        let f = extract_features(&m, &simulate_classifier(cars[role], kind, profile, &mut cls));
        (m, f)
    };
    let views: [_; 7] = std::array::from_fn(view);
    let [a, b, c, d0, d1, d2, d3] = views;
    Percept {
        maps: [a.0, b.0, c.0, d0.0, d1.0, d2.0, d3.0],
        features: ProblemFeatures {
            a: a.1,
            b: b.1,
            c: c.1,
            options: [d0.1, d1.1, d2.1, d3.1],
        },
    }
}

/// One solver response.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub problem_id: String,
    pub replicate: usize,
    pub condition: Condition,
    pub chosen: usize,
    pub kind: OptionKind,
    pub distances: Option<[f64; 4]>,
}

pub fn run_solver(
    solver: Solver,
    problem: &AnalogyProblem,
    percept: Option<&Percept>,
    stream: &mut Stream,
) -> Result<(usize, Option<[f64; 4]>)> {
    let percept = || {
        percept.ok_or_else(|| Error::SolverFailed {
            solver: solver.id().into(),
            problem_id: problem.problem_id.clone(),
            reason: "no perceived features supplied".into(),
        })
    };
    Ok(match solver {
        Solver::Random => (solve_random(stream), None),
        Solver::Pcm => {
            let d = solve_pcm(&percept()?.features);
            (d.chosen, Some(d.distances))
        }
        Solver::Shortcut(Similarity::Cosine) => {
            let f = &percept()?.features;
            let d = solve_shortcut(problem, &f.b, &f.options)?;
            (d.chosen, Some(d.distances))
        }
        Solver::Shortcut(Similarity::Hamming) => {
            let m = &percept()?.maps;
            let d = solve_shortcut_hamming(problem, &m[1], [&*m[3], &*m[4], &*m[5], &*m[6]])?;
            (d.chosen, Some(d.distances))
        }
    })
}

/// Share of responses per option kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ResponseDistribution {
    pub correct: f64,
    pub wrong_subregion: f64,
    pub wrong_car: f64,
    pub both_wrong: f64,
    pub corpus_random: f64,
}

impl ResponseDistribution {
    fn from_counts(counts: &[usize; 5]) -> Option<Self> {
        let total: usize = counts.iter().sum();
        if total == 0 {
            return None;
        }
        let f = |k: OptionKind| counts[k.index()] as f64 / total as f64;
        Some(Self {
            correct: f(OptionKind::Correct),
            wrong_subregion: f(OptionKind::WrongSubregion),
            wrong_car: f(OptionKind::WrongCar),
            both_wrong: f(OptionKind::BothWrong),
            corpus_random: f(OptionKind::CorpusRandom),
        })
    }

    pub fn total(&self) -> f64 {
        self.correct + self.wrong_subregion + self.wrong_car + self.both_wrong + self.corpus_random
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub condition: String,
    pub trials: usize,
    pub correct: usize,
    pub accuracy: Option<f64>,
    pub responses: Option<ResponseDistribution>,
}

/// Marginal accuracy differences: same - different, visible - invisible,
/// part - piece.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MainEffects<T> {
    pub orientation: T,
    pub visibility: T,
    pub granularity: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub solver_id: String,
    pub shortcut_similarity: Option<Similarity>,
    pub problem_set_hash: String,
    pub problem_count: usize,
    pub ablated: bool,
    pub seed: u64,
    pub replicates: usize,
    pub noise_profile: Option<NoiseProfile>,
    pub overall_accuracy: f64,
    pub cells: Vec<CellSummary>,
    pub main_effects: Option<MainEffects<f64>>,
    pub rmsd_vs_human: Option<f64>,
    pub reference_rmsd: ReferenceRmsd,
    pub notes: Vec<String>,
}

impl EvaluationReport {
    /// Accuracy per cell in canonical condition order (`None` for empty cells).
    pub fn cell_accuracy(&self) -> [Option<f64>; 8] {
        std::array::from_fn(|i| self.cells[i].accuracy)
    }

    /// All eight cell accuracies, or `None` when some cell has no trials.
    pub fn full_cells(&self) -> Option<[f64; 8]> {
        let cells = self.cell_accuracy();
        cells.iter().all(Option::is_some).then(|| cells.map(Option::unwrap))
    }
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub report: EvaluationReport,
    pub trials: Vec<Trial>,
}

/// Run `solver` over every problem (and replicate) of `set`.
pub fn evaluate(solver: Solver, set: &ProblemSet, config: &EvalConfig) -> Result<Evaluation> {
    if config.replicates == 0 {
        return Err(Error::InvalidArgument("replicates must be at least 1".into()));
    }
    if let Some(noise) = &config.noise {
        noise.validate()?;
    }
    let jobs: Vec<(usize, usize)> = (0..set.problems.len())
        .flat_map(|i| (0..config.replicates).map(move |r| (i, r)))
        .collect();
    let trials: Vec<Trial> = jobs
        .par_iter()
        .map(|&(index, replicate)| {
            let problem = &set.problems[index];
            let percept = solver
                .needs_features()
                .then(|| perceive(problem, index, replicate, config.noise.as_ref()));
            let mut stream =
                Stream::derived(config.seed, &[salt::SOLVER, index as u64, replicate as u64]);
            let (chosen, distances) = run_solver(solver, problem, percept.as_ref(), &mut stream)?;
            Ok(Trial {
                problem_id: problem.problem_id.clone(),
                replicate,
                condition: problem.condition,
                chosen,
                kind: problem.option_kinds[chosen],
                distances,
            })
        })
        .collect::<Result<_>>()?;
    let report = summarize(solver, set, config, &trials)?;
    Ok(Evaluation { report, trials })
}

fn summarize(
    solver: Solver,
    set: &ProblemSet,
    config: &EvalConfig,
    trials: &[Trial],
) -> Result<EvaluationReport> {
    let mut counts = [[0usize; 5]; 8];
    for t in trials {
        counts[t.condition.cell_index()][t.kind.index()] += 1;
    }
    let cells: Vec<CellSummary> = Condition::ALL
        .iter()
        .zip(&counts)
        .map(|(c, k)| {
            let n: usize = k.iter().sum();
            let correct = k[OptionKind::Correct.index()];
            CellSummary {
                condition: c.key(),
                trials: n,
                correct,
                accuracy: (n > 0).then(|| correct as f64 / n as f64),
                responses: ResponseDistribution::from_counts(k),
            }
        })
        .collect();
    let total_correct: usize = cells.iter().map(|c| c.correct).sum();
    let mut notes = Vec::new();
    if set.ablated {
        notes.push(BLANK_MAP_NOTE.to_string());
    }
    if config.noise.is_some() {
        notes.push(NOISE_NOTE.to_string());
    }
    let mut report = EvaluationReport {
        solver_id: solver.id().to_string(),
        shortcut_similarity: match solver {
            Solver::Shortcut(s) => Some(s),
            _ => None,
        },
        problem_set_hash: content_hash(set)?,
        problem_count: set.problems.len(),
        ablated: set.ablated,
        seed: config.seed,
        replicates: config.replicates,
        noise_profile: config.noise,
        overall_accuracy: if trials.is_empty() {
            0.0
        } else {
            total_correct as f64 / trials.len() as f64
        },
        cells,
        main_effects: None,
        rmsd_vs_human: None,
        reference_rmsd: REFERENCE_RMSD,
        notes,
    };
    report.main_effects = report.full_cells().map(|c| main_effects(&c));
    Ok(report)
}

/// Root mean squared deviation between two 8-cell accuracy vectors.
pub fn rmsd<T: Scalar>(model: &[T], human: &[T]) -> Result<T> {
    if model.len() != human.len() || model.len() != Condition::COUNT {
        return Err(Error::DimensionMismatch {
            left: model.len().to_string(),
            right: human.len().to_string(),
        });
    }
    let sum: T = model.iter().zip(human).map(|(&m, &h)| (m - h) * (m - h)).sum();
    Ok((sum / T::of_count(model.len())).sqrt())
}

pub fn main_effects<T: Scalar>(cells: &[T; 8]) -> MainEffects<T> {
    let four = T::of_count(4);
    let contrast = |on_high_side: fn(Condition) -> bool| {
        let (mut high, mut low) = (T::zero(), T::zero());
        for (c, &v) in Condition::ALL.iter().zip(cells) {
            if on_high_side(*c) {
                high = high + v;
            } else {
                low = low + v;
            }
        }
        high / four - low / four
    };
    MainEffects {
        orientation: contrast(|c| c.orientation_same),
        visibility: contrast(|c| c.visible),
        granularity: contrast(|c| c.granularity == Granularity::Part),
    }
}

/// Per-condition human accuracies supplied by the user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanReference {
    pub cells: [f64; 8],
    pub overall: f64,
    pub source_note: String,
}

impl HumanReference {
    /// Parse `condition,accuracy` CSV with one row per condition key and an
    /// `overall` row. Lines starting with `#` form the source note.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::HumanReference(msg);
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let mut note = Vec::new();
        let header = loop {
            match lines.next() {
                Some(l) if l.starts_with('#') => note.push(l.trim_start_matches('#').trim()),
                Some(l) => break l,
                None => return Err(bad("empty file".into())),
            }
        };
        if header.replace(' ', "") != "condition,accuracy" {
            return Err(bad(format!("expected header `condition,accuracy`, got `{header}`")));
        }
        let mut cells = [None; 8];
        let mut overall = None;
        for line in lines {
            if let Some(rest) = line.strip_prefix('#') {
                note.push(rest.trim());
                continue;
            }
            let (key, value) = line
                .split_once(',')
                .ok_or_else(|| bad(format!("row `{line}` has no comma")))?;
            let (key, value) = (key.trim(), value.trim());
            let v: f64 = value
                .parse()
                .map_err(|_| bad(format!("`{value}` for {key} is not a number")))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(bad(format!("{key} = {v} is outside [0, 1]")));
            }
            let slot = if key == "overall" {
                &mut overall
            } else {
                let c = Condition::from_key(key)
                    .ok_or_else(|| bad(format!("unknown condition `{key}`")))?;
                &mut cells[c.cell_index()]
            };
            if slot.replace(v).is_some() {
                return Err(bad(format!("duplicate row for {key}")));
            }
        }
        let mut out = [0.0; 8];
        for (i, c) in Condition::ALL.iter().enumerate() {
            out[i] = cells[i].ok_or_else(|| bad(format!("missing cell {}", c.key())))?;
        }
        Ok(Self {
            cells: out,
            overall: overall.ok_or_else(|| bad("missing overall row".into()))?,
            source_note: note.join(" "),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
        Self::parse(&text)
    }
}

/// Model cells against a human reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub solver_id: String,
    pub problem_set_hash: String,
    pub model_overall: f64,
    pub human_overall: f64,
    pub model_cells: [f64; 8],
    pub human_cells: [f64; 8],
    pub rmsd: f64,
    pub model_main_effects: MainEffects<f64>,
    pub human_main_effects: MainEffects<f64>,
    pub reference_rmsd: ReferenceRmsd,
    pub human_source_note: String,
}

pub fn compare(report: &EvaluationReport, human: &HumanReference) -> Result<Comparison> {
    let model = report.full_cells().ok_or_else(|| {
        Error::InvalidArgument("report has empty condition cells; RMSD needs all eight".into())
    })?;
    Ok(Comparison {
        solver_id: report.solver_id.clone(),
        problem_set_hash: report.problem_set_hash.clone(),
        model_overall: report.overall_accuracy,
        human_overall: human.overall,
        model_cells: model,
        human_cells: human.cells,
        rmsd: rmsd(&model, &human.cells)?,
        model_main_effects: main_effects(&model),
        human_main_effects: main_effects(&human.cells),
        reference_rmsd: REFERENCE_RMSD,
        human_source_note: human.source_note.clone(),
    })
}

pub const RESULTS_HEADER: &str =
    "problem_id,solver,replicate,chosen_index,option_kind_chosen,distance_1,distance_2,distance_3,distance_4";

/// One CSV row per trial; distances are empty for solvers without them.
pub fn write_results_csv<W: Write>(out: &mut W, solver: &str, trials: &[Trial]) -> std::io::Result<()> {
    writeln!(out, "{RESULTS_HEADER}")?;
    for t in trials {
        let d = match t.distances {
            Some(d) => d.map(format_sig9).join(","),
            None => ",,,".to_string(),
        };
        writeln!(
            out,
            "{},{solver},{},{},{},{d}",
            t.problem_id, t.replicate, t.chosen, t.kind
        )?;
    }
    Ok(())
}
