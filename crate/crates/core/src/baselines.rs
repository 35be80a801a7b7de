//! Non-analogical reference solvers and the two-term ablation.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pcm::{argmin, cosine_distance_unchecked, FeatureVector};
use crate::problem::{AnalogyProblem, ProblemSet};
use crate::rng::Stream;
use crate::scalar::Scalar;
use crate::scene::LabelMap;

/// How the shortcut solver measures B-to-option similarity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Similarity {
    /// Cosine distance between feature vectors.
    #[default]
    Cosine,
    /// Fraction of differing cells between label maps (1 when sizes differ).
    Hamming,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShortcutDecision<T> {
    pub chosen: usize,
    pub distances: [T; 4],
}

/// Options whose label map is cell-identical to B; those can never be chosen.
pub fn identical_to_b(problem: &AnalogyProblem) -> [bool; 4] {
    problem.options.each_ref().map(|d| **d == *problem.b)
}

fn pick<T: Scalar>(
    problem: &AnalogyProblem,
    distances: [T; 4],
) -> Result<ShortcutDecision<T>> {
    let excluded = identical_to_b(problem);
    let masked: Vec<T> = (0..4)
        .map(|i| if excluded[i] { T::infinity() } else { distances[i] })
        .collect();
    if excluded.iter().all(|&e| e) {
        return Err(Error::SolverFailed {
            solver: "shortcut".into(),
            problem_id: problem.problem_id.clone(),
            reason: "every option is identical to B".into(),
        });
    }
    Ok(ShortcutDecision {
        chosen: argmin(&masked),
        distances,
    })
}

/// The option most similar to B by feature cosine distance, skipping options
/// identical to B. Ties go to the lowest index.
pub fn solve_shortcut<T: Scalar>(
    problem: &AnalogyProblem,
    b: &FeatureVector<T>,
    options: &[FeatureVector<T>; 4],
) -> Result<ShortcutDecision<T>> {
    let fb = b.to_array();
    let distances = options
        .each_ref()
        .map(|d| cosine_distance_unchecked(&fb, &d.to_array()));
    pick(problem, distances)
}

pub fn hamming_distance(a: &LabelMap, b: &LabelMap) -> f64 {
    if !a.same_dims(b) {
        return 1.0;
    }
    let differing = a.cells().iter().zip(b.cells()).filter(|(x, y)| x != y).count();
    differing as f64 / a.cells().len() as f64
}

/// Shortcut on raw label maps: smallest Hamming distance to B.
pub fn solve_shortcut_hamming(
    problem: &AnalogyProblem,
    b: &LabelMap,
    options: [&LabelMap; 4],
) -> Result<ShortcutDecision<f64>> {
    pick(problem, options.map(|d| hamming_distance(b, d)))
}

/// Uniform choice among the four options.
pub fn solve_random(stream: &mut Stream) -> usize {
    stream.index(4)
}

/// Replace A and C by all-background maps of the same size.
pub fn ablate_two_term(problem: &AnalogyProblem) -> AnalogyProblem {
    let blank = |m: &LabelMap| Arc::new(LabelMap::blank(m.width(), m.height()));
    AnalogyProblem {
        a: blank(&problem.a),
        c: blank(&problem.c),
        ..problem.clone()
    }
}

pub fn ablate_set(set: &ProblemSet) -> ProblemSet {
    ProblemSet {
        kind: set.kind,
        seed: set.seed,
        ablated: true,
        problems: set.problems.iter().map(ablate_two_term).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcm::{extract_features, CarTypePrediction};
    use crate::problem::{build_test_set, OptionKind};
    use crate::scene::{CarType, FinePart};

    fn features(m: &LabelMap) -> FeatureVector<f64> {
        extract_features(m, &CarTypePrediction::one_hot(CarType::Sedan))
    }

    #[test]
    fn shortcut_skips_the_copy_of_b() {
        let set = build_test_set(3).unwrap();
        for p in &set.problems {
            let b = features(&p.b);
            let opts = p.options.each_ref().map(|d| features(d));
            let d = solve_shortcut(p, &b, &opts).unwrap();
            assert_ne!(p.option_kinds[d.chosen], OptionKind::WrongCar);
            assert_ne!(*p.options[d.chosen], *p.b);
            let h = solve_shortcut_hamming(p, &p.b, p.options.each_ref().map(|m| &**m)).unwrap();
            assert_ne!(*p.options[h.chosen], *p.b);
        }
    }

    #[test]
    fn hamming_counts_differing_cells() {
        let door = FinePart::FrontLeftDoor.id();
        let a = LabelMap::new(2, 2, vec![door, door, 0, 0]).unwrap();
        let b = LabelMap::new(2, 2, vec![door, 0, 0, 0]).unwrap();
        assert_eq!(hamming_distance(&a, &b), 0.25);
        assert_eq!(hamming_distance(&a, &LabelMap::blank(3, 1)), 1.0);
    }

    #[test]
    fn random_is_reproducible() {
        let draw = |seed| {
            let mut s = Stream::new(seed);
            (0..64).map(|_| solve_random(&mut s)).collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
        assert!(draw(5).iter().all(|&i| i < 4));
    }

    #[test]
    fn ablation_blanks_wholes_and_is_idempotent() {
        let set = build_test_set(3).unwrap();
        let once = ablate_set(&set);
        assert!(once.ablated);
        for (p, q) in set.problems.iter().zip(&once.problems) {
            assert_eq!(q.a.foreground_count(), 0);
            assert_eq!(q.c.foreground_count(), 0);
            assert!(q.a.same_dims(&p.a));
            assert_eq!((&q.b, &q.options, q.correct_index), (&p.b, &p.options, p.correct_index));
            assert_eq!(q.condition, p.condition);
            assert_eq!(ablate_two_term(q), *q);
        }
    }
}
