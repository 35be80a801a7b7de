use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problem::catalog::SceneCatalog;
use crate::problem::types::{AnalogyProblem, Condition, OptionKind, ProblemSet, SetKind};
use crate::rng::{salt, Stream};
use crate::scene::{CarType, Component, Granularity, Orientation, SceneSpec, SharedMap};

pub const TEST_SET_SIZE: usize = 128;

/// Source -> target pairs of the human experiment.
pub const TEST_CAR_PAIRS: [(CarType, CarType); 4] = [
    (CarType::Sedan, CarType::Suv),
    (CarType::Suv, CarType::Wagon),
    (CarType::Wagon, CarType::Truck),
    (CarType::Truck, CarType::Sedan),
];

/// Candidates from which corpus foils are sampled.
pub const CORPUS_FOIL_POOL: usize = 7;

#[derive(Debug, Clone)]
pub struct OptionSpec {
    pub map: SharedMap,
    pub kind: OptionKind,
    pub car: CarType,
}

/// The four test-set options in kind order: correct, wrong subregion,
/// wrong car, both wrong.
pub fn make_distractors(
    catalog: &SceneCatalog,
    source_car: CarType,
    target_car: CarType,
    component: Component,
    granularity: Granularity,
    source_facing: Orientation,
    target_facing: Orientation,
) -> [OptionSpec; 4] {
    let opt = |car, facing, g, kind| OptionSpec {
        map: catalog.subregion(car, facing, component, g),
        kind,
        car,
    };
    let swapped = granularity.swapped();
    [
        opt(target_car, target_facing, granularity, OptionKind::Correct),
        opt(target_car, target_facing, swapped, OptionKind::WrongSubregion),
        opt(source_car, source_facing, granularity, OptionKind::WrongCar),
        opt(source_car, source_facing, swapped, OptionKind::BothWrong),
    ]
}

fn assemble(
    problem_id: String,
    condition: Condition,
    (source_car, target_car): (CarType, CarType),
    component: Component,
    (source_facing, target_facing): (Orientation, Orientation),
    [a, b, c]: [SharedMap; 3],
    options: [OptionSpec; 4],
) -> AnalogyProblem {
    let correct_index = options
        .iter()
        .position(|o| o.kind == OptionKind::Correct)
        .expect("one correct option");
    let [o0, o1, o2, o3] = options;
    AnalogyProblem {
        problem_id,
        condition,
        source_car,
        target_car,
        component,
        source_facing,
        target_facing,
        a,
        b,
        c,
        option_kinds: [o0.kind, o1.kind, o2.kind, o3.kind],
        option_cars: [o0.car, o1.car, o2.car, o3.car],
        options: [o0.map, o1.map, o2.map, o3.map],
        correct_index,
    }
}

/// The 128-problem experimental set. Problem content is fixed by its cell;
/// the seed only permutes each problem's options.
pub fn build_test_set(seed: u64) -> Result<ProblemSet> {
    let catalog = SceneCatalog::build()?;
    build_test_set_with(&catalog, seed)
}

pub fn build_test_set_with(catalog: &SceneCatalog, seed: u64) -> Result<ProblemSet> {
    let mut problems = Vec::with_capacity(TEST_SET_SIZE);
    for condition in Condition::ALL {
        for &(source, target) in &TEST_CAR_PAIRS {
            for component in Component::ALL {
                let index = problems.len() as u64;
                let source_facing = Orientation::Left;
                let target_facing = if condition.orientation_same {
                    source_facing
                } else {
                    source_facing.mirror()
                };
                let whole = |car, facing| {
                    let mut spec = SceneSpec::new(car, facing);
                    if !condition.visible {
                        spec = spec.occluding(component);
                    }
                    catalog.whole(&spec)
                };
                let a = whole(source, source_facing);
                let c = whole(target, target_facing);
                let b = catalog.subregion(source, source_facing, component, condition.granularity);
                let mut options = make_distractors(
                    catalog,
                    source,
                    target,
                    component,
                    condition.granularity,
                    source_facing,
                    target_facing,
                );
                Stream::derived(seed, &[salt::OPTION_ORDER, index]).shuffle(&mut options);
                let id = format!("test-{}-{source}-{target}-{component}", condition.key());
                problems.push(assemble(
                    id,
                    condition,
                    (source, target),
                    component,
                    (source_facing, target_facing),
                    [a, b, c],
                    options,
                ));
            }
        }
    }
    Ok(ProblemSet {
        kind: SetKind::Test128,
        seed,
        ablated: false,
        problems,
    })
}

const SUBREGIONS: usize = 8;

fn subregion_at(i: usize) -> (Component, Granularity) {
    (Component::ALL[i / 2], Granularity::ALL[i % 2])
}

fn random_facing(rng: &mut Stream) -> Orientation {
    if rng.index(2) == 0 {
        Orientation::Left
    } else {
        Orientation::Right
    }
}

/// Index in `0..SUBREGIONS` other than `exclude`.
fn other_subregion(rng: &mut Stream, exclude: usize) -> usize {
    let k = rng.index(SUBREGIONS - 1);
    if k >= exclude {
        k + 1
    } else {
        k
    }
}

/// Training-style problem number `index` of a corpus drawn from `seed`.
pub fn corpus_problem(catalog: &SceneCatalog, seed: u64, index: u64) -> AnalogyProblem {
    let mut rng = Stream::derived(seed, &[salt::CORPUS_PROBLEM, index]);

    let source = CarType::ALL[rng.index(CarType::COUNT)];
    let others: Vec<CarType> = CarType::ALL.into_iter().filter(|&c| c != source).collect();
    let target = others[rng.index(others.len())];
    let sub = rng.index(SUBREGIONS);
    let (component, granularity) = subregion_at(sub);
    let source_facing = random_facing(&mut rng);
    let target_facing = random_facing(&mut rng);

    let crop = |car, facing, i: usize| {
        let (c, g) = subregion_at(i);
        catalog.subregion(car, facing, c, g)
    };
    let option = |car, facing, i, kind| OptionSpec {
        map: crop(car, facing, i),
        kind,
        car,
    };

    let mut pool = Vec::with_capacity(CORPUS_FOIL_POOL);
    let c_other = other_subregion(&mut rng, sub);
    pool.push(option(target, target_facing, c_other, OptionKind::WrongSubregion));
    pool.push(option(source, source_facing, sub, OptionKind::WrongCar));
    let a_other = other_subregion(&mut rng, sub);
    pool.push(option(source, source_facing, a_other, OptionKind::BothWrong));

    let rest: Vec<CarType> = CarType::ALL
        .into_iter()
        .filter(|&c| c != source && c != target)
        .collect();
    for pick in rng.sample_indices(rest.len() * SUBREGIONS, 4) {
        let facing = random_facing(&mut rng);
        let car = rest[pick / SUBREGIONS];
        pool.push(option(car, facing, pick % SUBREGIONS, OptionKind::CorpusRandom));
    }
    debug_assert_eq!(pool.len(), CORPUS_FOIL_POOL);

    let foils = rng.sample_indices(CORPUS_FOIL_POOL, 3);
    let mut options = [
        option(target, target_facing, sub, OptionKind::Correct),
        pool[foils[0]].clone(),
        pool[foils[1]].clone(),
        pool[foils[2]].clone(),
    ];
    rng.shuffle(&mut options);

    let condition = Condition {
        orientation_same: source_facing == target_facing,
        visible: true,
        granularity,
    };
    assemble(
        format!("corpus-{index:06}"),
        condition,
        (source, target),
        component,
        (source_facing, target_facing),
        [
            catalog.whole(&SceneSpec::new(source, source_facing)),
            crop(source, source_facing, sub),
            catalog.whole(&SceneSpec::new(target, target_facing)),
        ],
        options,
    )
}

/// `n` training-style problems over all five car types.
pub fn build_corpus(n: usize, seed: u64) -> Result<ProblemSet> {
    if n == 0 {
        return Err(Error::InvalidArgument("corpus size must be at least 1".into()));
    }
    let catalog = SceneCatalog::build()?;
    let problems = (0..n as u64)
        .into_par_iter()
        .map(|i| corpus_problem(&catalog, seed, i))
        .collect();
    Ok(ProblemSet {
        kind: SetKind::Corpus,
        seed,
        ablated: false,
        problems,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn test_set_is_balanced() {
        let set = build_test_set(7).unwrap();
        assert_eq!(set.problems.len(), TEST_SET_SIZE);
        let mut per_cell = HashMap::new();
        let mut per_pair_component = HashMap::new();
        for p in &set.problems {
            p.validate().unwrap();
            *per_cell.entry(p.condition).or_insert(0) += 1;
            *per_pair_component
                .entry((p.source_car, p.target_car, p.component))
                .or_insert(0) += 1;
        }
        assert_eq!(per_cell.len(), 8);
        assert!(per_cell.values().all(|&n| n == 16));
        assert_eq!(per_pair_component.len(), 16);
        assert!(per_pair_component.values().all(|&n| n == 8));
        assert_eq!(
            (set.problems[0].source_car, set.problems[0].target_car),
            (CarType::Sedan, CarType::Suv)
        );
    }

    #[test]
    fn wrong_subregion_swaps_granularity() {
        let catalog = SceneCatalog::build().unwrap();
        for g in Granularity::ALL {
            let opts = make_distractors(
                &catalog,
                CarType::Sedan,
                CarType::Suv,
                Component::DoorWindow,
                g,
                Orientation::Left,
                Orientation::Left,
            );
            let expect = |car, g| catalog.subregion(car, Orientation::Left, Component::DoorWindow, g);
            assert_eq!(opts[0].map, expect(CarType::Suv, g));
            assert_eq!(opts[1].map, expect(CarType::Suv, g.swapped()));
            assert_eq!(opts[2].map, expect(CarType::Sedan, g));
            assert_eq!(opts[3].map, expect(CarType::Sedan, g.swapped()));
            for i in 0..4 {
                for j in i + 1..4 {
                    assert_ne!(opts[i].map, opts[j].map);
                }
            }
        }
    }

    #[test]
    fn corpus_rejects_zero() {
        assert!(matches!(build_corpus(0, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn corpus_problems_are_valid_and_index_local() {
        let catalog = SceneCatalog::build().unwrap();
        for i in 0..300 {
            let p = corpus_problem(&catalog, 42, i);
            p.validate().unwrap();
            assert_eq!(p.options[p.correct_index], catalog.subregion(
                p.target_car, p.target_facing, p.component, p.condition.granularity));
            assert_eq!(corpus_problem(&catalog, 42, i), p);
        }
        assert_ne!(corpus_problem(&catalog, 42, 5), corpus_problem(&catalog, 43, 5));
    }
}
