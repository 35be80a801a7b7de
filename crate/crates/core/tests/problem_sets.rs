use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use tempfile::TempDir;
use vanalogy::problem::{
    build_corpus, build_test_set, read_manifest, read_problem_set, write_problem_set, OptionKind, SetKind,
    MANIFEST_FILE, PROBLEMS_FILE,
};
use vanalogy::scene::{AggregatePart, CarType, Component, Granularity, LabelMap, Orientation};
use vanalogy::Error;

fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut acc = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                acc.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    acc
}

fn written(seed: u64) -> (TempDir, PathBuf) {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("set");
    write_problem_set(&build_test_set(seed).unwrap(), &out).unwrap();
    (dir, out)
}

fn first_map_ref(set_dir: &Path) -> String {
    let text = fs::read_to_string(set_dir.join(PROBLEMS_FILE)).unwrap();
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    first["maps"]["a"].as_str().unwrap().to_owned()
}

#[test]
fn test_set_round_trips() {
    let set = build_test_set(7).unwrap();
    let dir = TempDir::new().unwrap();
    let manifest = write_problem_set(&set, dir.path()).unwrap();
    assert_eq!(manifest.count, 128);
    assert_eq!(manifest.kind, SetKind::Test128);
    assert_eq!(read_manifest(dir.path()).unwrap(), manifest);
    assert_eq!(read_problem_set(dir.path()).unwrap(), set);
}

#[test]
fn corpus_round_trips() {
    let set = build_corpus(300, 5).unwrap();
    let dir = TempDir::new().unwrap();
    write_problem_set(&set, dir.path()).unwrap();
    assert_eq!(read_problem_set(dir.path()).unwrap(), set);
}

#[test]
fn serialization_is_byte_identical_across_runs() {
    let (_a, first) = written(7);
    let (_b, second) = written(7);
    assert_eq!(snapshot(&first), snapshot(&second));
}

#[test]
fn seeds_only_permute_options() {
    let a = build_test_set(1).unwrap();
    let b = build_test_set(2).unwrap();
    let mut permuted = 0;
    for (p, q) in a.problems.iter().zip(&b.problems) {
        assert_eq!(p.problem_id, q.problem_id);
        assert_eq!((&p.a, &p.b, &p.c), (&q.a, &q.b, &q.c));
        let mut left: Vec<_> = p.options.iter().zip(p.option_kinds).map(|(m, k)| (k.index(), m)).collect();
        let mut right: Vec<_> = q.options.iter().zip(q.option_kinds).map(|(m, k)| (k.index(), m)).collect();
        left.sort_by_key(|(k, _)| *k);
        right.sort_by_key(|(k, _)| *k);
        assert_eq!(left, right);
        permuted += usize::from(p.correct_index != q.correct_index);
    }
    assert!(permuted > 0);
}

#[test]
fn visibility_and_orientation_semantics() {
    let set = build_test_set(3).unwrap();
    for p in &set.problems {
        let members = p.component.members();
        for whole in [&p.a, &p.c] {
            let agg = whole.aggregate();
            let count: usize = members.iter().map(|&m| agg.count(m)).sum();
            assert_eq!(count > 0, p.condition.visible, "{}", p.problem_id);
        }
        assert_eq!(p.source_facing, Orientation::Left);
        assert_eq!(p.source_facing == p.target_facing, p.condition.orientation_same);
        let shown: usize = members.iter().map(|&m| p.b.aggregate().count(m)).sum();
        assert!(shown > 0, "subregion B must show the probed component");
    }
}

#[test]
fn test_set_uses_the_four_fixed_car_pairs() {
    let set = build_test_set(0).unwrap();
    let pairs: Vec<(CarType, CarType)> = {
        let mut v: Vec<_> = set.problems.iter().map(|p| (p.source_car, p.target_car)).collect();
        v.dedup();
        v.sort_by_key(|&(s, t)| (s.index(), t.index()));
        v.dedup();
        v
    };
    assert_eq!(
        pairs,
        vec![
            (CarType::Sedan, CarType::Suv),
            (CarType::Suv, CarType::Wagon),
            (CarType::Wagon, CarType::Truck),
            (CarType::Truck, CarType::Sedan),
        ]
    );
    assert_eq!((set.problems[0].source_car, set.problems[0].target_car), (CarType::Sedan, CarType::Suv));
    for component in Component::ALL {
        assert_eq!(set.problems.iter().filter(|p| p.component == component).count(), 32);
    }
}

#[test]
fn distractor_kinds_follow_car_and_granularity() {
    let set = build_test_set(11).unwrap();
    let catalog = vanalogy::problem::SceneCatalog::build().unwrap();
    for p in &set.problems {
        for i in 0..4 {
            let (car, facing) = match p.option_kinds[i] {
                OptionKind::Correct | OptionKind::WrongSubregion => (p.target_car, p.target_facing),
                _ => (p.source_car, p.source_facing),
            };
            let granularity = match p.option_kinds[i] {
                OptionKind::Correct | OptionKind::WrongCar => p.condition.granularity,
                _ => p.condition.granularity.swapped(),
            };
            assert_eq!(p.option_cars[i], car);
            assert_eq!(p.options[i], catalog.subregion(car, facing, p.component, granularity));
        }
        assert_eq!(p.b, catalog.subregion(p.source_car, p.source_facing, p.component, p.condition.granularity));
        assert!(matches!(p.condition.granularity, Granularity::Part | Granularity::Piece));
    }
}

#[test]
fn corpus_problems_depend_only_on_their_index() {
    let short = build_corpus(40, 9).unwrap();
    let long = build_corpus(120, 9).unwrap();
    assert_eq!(short.problems[..], long.problems[..40]);
    let other = build_corpus(40, 10).unwrap();
    assert_ne!(short.problems, other.problems);
    for p in &long.problems {
        assert_ne!(p.source_car, p.target_car);
        p.validate().unwrap();
    }
    assert!(matches!(build_corpus(0, 1), Err(Error::InvalidArgument(_))));
}

#[test]
fn malformed_manifest_is_an_error() {
    let (_d, set) = written(7);
    fs::write(set.join(MANIFEST_FILE), "{ not json").unwrap();
    assert!(matches!(read_problem_set(&set), Err(Error::Malformed { .. })));

    let (_d, set) = written(7);
    let text = fs::read_to_string(set.join(MANIFEST_FILE)).unwrap();
    fs::write(set.join(MANIFEST_FILE), text.replace("\"format_version\": 1", "\"format_version\": 99")).unwrap();
    assert!(matches!(read_problem_set(&set), Err(Error::Malformed { .. })));
}

#[test]
fn malformed_problem_lines_are_an_error() {
    let (_d, set) = written(7);
    let path = set.join(PROBLEMS_FILE);
    let text = fs::read_to_string(&path).unwrap();
    fs::write(&path, text.replacen("{", "[", 1)).unwrap();
    assert!(matches!(read_problem_set(&set), Err(Error::Malformed { .. })));

    let (_d, set) = written(7);
    let path = set.join(PROBLEMS_FILE);
    let text = fs::read_to_string(&path).unwrap();
    let fewer: String = text.lines().skip(1).map(|l| format!("{l}\n")).collect();
    fs::write(&path, fewer).unwrap();
    assert!(matches!(read_problem_set(&set), Err(Error::Malformed { .. })));
}

#[test]
fn tampered_map_fails_the_checksum() {
    let (_d, set) = written(7);
    let map_path = set.join(first_map_ref(&set));
    let text = fs::read_to_string(&map_path).unwrap();
    fs::write(&map_path, text.replacen(" 0 ", " 1 ", 1)).unwrap();
    assert!(matches!(read_problem_set(&set), Err(Error::ChecksumMismatch { .. })));
}

#[test]
fn missing_map_is_a_dangling_reference() {
    let (_d, set) = written(7);
    let rel = first_map_ref(&set);
    fs::remove_file(set.join(&rel)).unwrap();
    match read_problem_set(&set) {
        Err(Error::DanglingMapRef(r)) => assert_eq!(r, rel),
        other => panic!("expected a dangling reference, got {other:?}"),
    }
}

#[test]
fn corrupted_map_header_is_an_error_not_a_crash() {
    let text = LabelMap::blank(3, 2).to_valm();
    assert!(LabelMap::from_valm(&text.replace("VALM1", "VALM2")).is_err());
    assert!(LabelMap::from_valm(&text.replace("3 2", "3 5")).is_err());
    assert!(LabelMap::from_valm("").is_err());
}

#[test]
fn missing_directory_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    assert!(matches!(read_problem_set(&dir.path().join("nope")), Err(Error::Io { .. })));
}

#[test]
fn probed_component_members_are_two_aggregates() {
    for c in Component::ALL {
        let [x, y] = c.members();
        assert_ne!(x, y);
        assert!(AggregatePart::ALL.contains(&x) && AggregatePart::ALL.contains(&y));
    }
}
