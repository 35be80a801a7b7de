use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::{CarType, Component, Granularity, Orientation, SharedMap};

/// One of the eight experimental cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Condition {
    pub orientation_same: bool,
    pub visible: bool,
    pub granularity: Granularity,
}

impl Condition {
    pub const COUNT: usize = 8;

    /// Canonical cell order used by every 8-cell vector: orientation
    /// (same, diff), then visibility (vis, invis), then granularity (part, piece).
    pub const ALL: [Condition; 8] = {
        let mut out = [Condition {
            orientation_same: true,
            visible: true,
            granularity: Granularity::Part,
        }; 8];
        let mut i = 0;
        while i < 8 {
            out[i] = Condition {
                orientation_same: i & 4 == 0,
                visible: i & 2 == 0,
                granularity: if i & 1 == 0 {
                    Granularity::Part
                } else {
                    Granularity::Piece
                },
            };
            i += 1;
        }
        out
    };

    pub fn cell_index(self) -> usize {
        (usize::from(!self.orientation_same) << 2)
            | (usize::from(!self.visible) << 1)
            | usize::from(self.granularity == Granularity::Piece)
    }

    /// `same|diff`-`vis|invis`-`part|piece`.
    pub fn key(self) -> String {
        format!(
            "{}-{}-{}",
            if self.orientation_same { "same" } else { "diff" },
            if self.visible { "vis" } else { "invis" },
            self.granularity
        )
    }

    pub fn from_key(key: &str) -> Option<Condition> {
        Condition::ALL.into_iter().find(|c| c.key() == key)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptionKind {
    Correct,
    WrongSubregion,
    WrongCar,
    BothWrong,
    CorpusRandom,
}

impl OptionKind {
    pub const ALL: [OptionKind; 5] = [
        OptionKind::Correct,
        OptionKind::WrongSubregion,
        OptionKind::WrongCar,
        OptionKind::BothWrong,
        OptionKind::CorpusRandom,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            OptionKind::Correct => "correct",
            OptionKind::WrongSubregion => "wrong_subregion",
            OptionKind::WrongCar => "wrong_car",
            OptionKind::BothWrong => "both_wrong",
            OptionKind::CorpusRandom => "corpus_random",
        }
    }
}

impl fmt::Display for OptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A four-term `A:B::C:?` problem with four answer options.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogyProblem {
    pub problem_id: String,
    pub condition: Condition,
    pub source_car: CarType,
    pub target_car: CarType,
    pub component: Component,
    pub source_facing: Orientation,
    pub target_facing: Orientation,
    pub a: SharedMap,
    pub b: SharedMap,
    pub c: SharedMap,
    pub options: [SharedMap; 4],
    pub option_kinds: [OptionKind; 4],
    /// Car each option was cut from.
    pub option_cars: [CarType; 4],
    pub correct_index: usize,
}

impl AnalogyProblem {
    pub fn validate(&self) -> Result<()> {
        let bad = |why: String| Error::malformed("analogy problem", format!("{}: {why}", self.problem_id));
        let correct: Vec<usize> = (0..4)
            .filter(|&i| self.option_kinds[i] == OptionKind::Correct)
            .collect();
        if correct.len() != 1 {
            return Err(bad(format!("{} options marked correct", correct.len())));
        }
        if correct[0] != self.correct_index {
            return Err(bad(format!(
                "correct_index {} but option {} is correct",
                self.correct_index, correct[0]
            )));
        }
        if self.source_car == self.target_car {
            return Err(bad("source and target car are the same".into()));
        }
        for i in 0..4 {
            for j in i + 1..4 {
                if self.options[i] == self.options[j] {
                    return Err(bad(format!("options {i} and {j} are identical")));
                }
            }
        }
        Ok(())
    }

    /// The three whole/subregion terms followed by the four options.
    pub fn maps(&self) -> [&SharedMap; 7] {
        [
            &self.a,
            &self.b,
            &self.c,
            &self.options[0],
            &self.options[1],
            &self.options[2],
            &self.options[3],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetKind {
    Test128,
    Corpus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSet {
    pub kind: SetKind,
    pub seed: u64,
    /// Whole-car terms replaced by blank maps.
    pub ablated: bool,
    pub problems: Vec<AnalogyProblem>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eight_distinct_cells_in_canonical_order() {
        let keys: Vec<String> = Condition::ALL.iter().map(|c| c.key()).collect();
        assert_eq!(
            keys,
            [
                "same-vis-part",
                "same-vis-piece",
                "same-invis-part",
                "same-invis-piece",
                "diff-vis-part",
                "diff-vis-piece",
                "diff-invis-part",
                "diff-invis-piece"
            ]
        );
        for (i, c) in Condition::ALL.iter().enumerate() {
            assert_eq!(c.cell_index(), i);
            assert_eq!(Condition::from_key(&c.key()), Some(*c));
        }
        assert_eq!(Condition::from_key("same-vis"), None);
    }
}
