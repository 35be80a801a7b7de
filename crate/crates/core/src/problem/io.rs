//! Problem-set directory format:
//!
//! ```text
//! <dir>/manifest.json    kind, seed, count, format version, content hash
//! <dir>/problems.jsonl   one record per problem
//! <dir>/maps/<h>.valm    label maps, named by the first 16 hex digits of
//!                        the SHA-256 of their VALM1 text
//! ```
//!
//! The content hash is the SHA-256 of `"problems.jsonl\n"`, the JSONL bytes,
//! then for every referenced map in path order `"<path>\n"` followed by the
//! map bytes.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::problem::types::{AnalogyProblem, Condition, OptionKind, ProblemSet, SetKind};
use crate::scene::{CarType, Component, LabelMap, Orientation, SharedMap};

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const PROBLEMS_FILE: &str = "problems.jsonl";
pub const MAPS_DIR: &str = "maps";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub kind: SetKind,
    pub seed: u64,
    pub count: usize,
    pub ablated: bool,
    pub content_hash: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct MapRefs {
    a: String,
    b: String,
    c: String,
    options: [String; 4],
}

#[derive(Debug, Serialize, Deserialize)]
struct ProblemRecord {
    problem_id: String,
    condition: Condition,
    source_car: CarType,
    target_car: CarType,
    component: Component,
    source_facing: Orientation,
    target_facing: Orientation,
    correct_index: usize,
    option_kinds: [OptionKind; 4],
    option_cars: [CarType; 4],
    maps: MapRefs,
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    use std::fmt::Write;
    bytes.iter().fold(String::with_capacity(bytes.len() * 2), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

struct Encoded {
    jsonl: String,
    /// Relative path -> VALM1 text.
    maps: BTreeMap<String, String>,
}

fn encode(set: &ProblemSet) -> Result<Encoded> {
    let mut maps = BTreeMap::new();
    // Keyed by allocation so shared maps are hashed once.
    let mut by_ptr: HashMap<*const LabelMap, String> = HashMap::new();
    let mut reference = |m: &SharedMap| -> String {
        by_ptr
            .entry(Arc::as_ptr(m))
            .or_insert_with(|| {
                let text = m.to_valm();
                let digest = Sha256::digest(text.as_bytes());
                let path = format!("{MAPS_DIR}/{}.valm", &hex(&digest)[..16]);
                maps.entry(path.clone()).or_insert(text);
                path
            })
            .clone()
    };

    let mut jsonl = String::new();
    for p in &set.problems {
        let record = ProblemRecord {
            problem_id: p.problem_id.clone(),
            condition: p.condition,
            source_car: p.source_car,
            target_car: p.target_car,
            component: p.component,
            source_facing: p.source_facing,
            target_facing: p.target_facing,
            correct_index: p.correct_index,
            option_kinds: p.option_kinds,
            option_cars: p.option_cars,
            maps: MapRefs {
                a: reference(&p.a),
                b: reference(&p.b),
                c: reference(&p.c),
                options: p.options.each_ref().map(&mut reference),
            },
        };
        jsonl.push_str(&serde_json::to_string(&record)?);
        jsonl.push('\n');
    }
    Ok(Encoded { jsonl, maps })
}

fn hash_content<'a>(jsonl: &[u8], maps: impl Iterator<Item = (&'a str, &'a [u8])>) -> String {
    let mut h = Sha256::new();
    h.update(PROBLEMS_FILE.as_bytes());
    h.update(b"\n");
    h.update(jsonl);
    for (path, bytes) in maps {
        h.update(path.as_bytes());
        h.update(b"\n");
        h.update(bytes);
    }
    hex(&h.finalize())
}

/// Hash the set would carry in its manifest.
pub fn content_hash(set: &ProblemSet) -> Result<String> {
    let enc = encode(set)?;
    Ok(hash_content(
        enc.jsonl.as_bytes(),
        enc.maps.iter().map(|(p, t)| (p.as_str(), t.as_bytes())),
    ))
}

pub fn write_problem_set(set: &ProblemSet, dir: &Path) -> Result<Manifest> {
    let enc = encode(set)?;
    let maps_dir = dir.join(MAPS_DIR);
    fs::create_dir_all(&maps_dir).map_err(Error::io(&maps_dir))?;
    for (rel, text) in &enc.maps {
        let path = dir.join(rel);
        fs::write(&path, text).map_err(Error::io(&path))?;
    }
    let problems_path = dir.join(PROBLEMS_FILE);
    fs::write(&problems_path, &enc.jsonl).map_err(Error::io(&problems_path))?;

    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        kind: set.kind,
        seed: set.seed,
        count: set.problems.len(),
        ablated: set.ablated,
        content_hash: hash_content(
            enc.jsonl.as_bytes(),
            enc.maps.iter().map(|(p, t)| (p.as_str(), t.as_bytes())),
        ),
    };
    let manifest_path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&manifest_path, text).map_err(Error::io(&manifest_path))?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(Error::io(&path))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| Error::malformed("manifest", e.to_string()))?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::malformed(
            "manifest",
            format!("unsupported format version {}", manifest.format_version),
        ));
    }
    Ok(manifest)
}

pub fn read_problem_set(dir: &Path) -> Result<ProblemSet> {
    let manifest = read_manifest(dir)?;
    let problems_path = dir.join(PROBLEMS_FILE);
    let jsonl = fs::read_to_string(&problems_path).map_err(Error::io(&problems_path))?;

    let mut records = Vec::with_capacity(manifest.count);
    for (n, line) in jsonl.lines().enumerate() {
        let record: ProblemRecord = serde_json::from_str(line)
            .map_err(|e| Error::malformed("problems.jsonl", format!("line {}: {e}", n + 1)))?;
        records.push(record);
    }
    if records.len() != manifest.count {
        return Err(Error::malformed(
            "problems.jsonl",
            format!("{} records, manifest says {}", records.len(), manifest.count),
        ));
    }

    let mut paths: Vec<&str> = records
        .iter()
        .flat_map(|r| {
            [&r.maps.a, &r.maps.b, &r.maps.c]
                .into_iter()
                .chain(r.maps.options.iter())
                .map(String::as_str)
        })
        .collect();
    paths.sort_unstable();
    paths.dedup();

    let mut raw: Vec<(&str, String)> = Vec::with_capacity(paths.len());
    for rel in paths {
        if rel.contains("..") || Path::new(rel).is_absolute() {
            return Err(Error::DanglingMapRef(rel.to_string()));
        }
        let text = fs::read_to_string(dir.join(rel))
            .map_err(|_| Error::DanglingMapRef(rel.to_string()))?;
        raw.push((rel, text));
    }
    let actual = hash_content(
        jsonl.as_bytes(),
        raw.iter().map(|(p, t)| (*p, t.as_bytes())),
    );
    if actual != manifest.content_hash {
        return Err(Error::ChecksumMismatch {
            expected: manifest.content_hash,
            actual,
        });
    }

    let mut maps: HashMap<&str, SharedMap> = HashMap::with_capacity(raw.len());
    for (rel, text) in &raw {
        maps.insert(rel, Arc::new(LabelMap::from_valm(text)?));
    }
    let get = |rel: &String| Arc::clone(&maps[rel.as_str()]);

    let problems = records
        .iter()
        .map(|r| {
            let p = AnalogyProblem {
                problem_id: r.problem_id.clone(),
                condition: r.condition,
                source_car: r.source_car,
                target_car: r.target_car,
                component: r.component,
                source_facing: r.source_facing,
                target_facing: r.target_facing,
                a: get(&r.maps.a),
                b: get(&r.maps.b),
                c: get(&r.maps.c),
                options: r.maps.options.each_ref().map(get),
                option_kinds: r.option_kinds,
                option_cars: r.option_cars,
                correct_index: r.correct_index,
            };
            if p.correct_index > 3 {
                return Err(Error::malformed(
                    "problems.jsonl",
                    format!("{}: correct_index {} out of range", p.problem_id, p.correct_index),
                ));
            }
            p.validate()?;
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ProblemSet {
        kind: manifest.kind,
        seed: manifest.seed,
        ablated: manifest.ablated,
        problems,
    })
}
