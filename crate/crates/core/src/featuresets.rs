//! The ten natural feature sets: groups of similarly shaped letters that
//! act as the output classes of the second experiment.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::glyphs::{builtin_alphabet, Glyph};

/// Class labels and their letters, in fixed class-index order.
const TABLE: [(char, &[char]); 10] = [
    ('A', &['A', 'H']),
    ('B', &['B', 'R', 'P']),
    ('C', &['C', 'G']),
    ('E', &['E', 'F', 'S']),
    ('I', &['Z', 'T', 'I', 'J']),
    ('K', &['Y', 'K', 'X']),
    ('L', &['L', 'U']),
    ('M', &['N', 'M']),
    ('O', &['O', 'Q', 'D']),
    ('V', &['V', 'W']),
];

pub const CLASS_COUNT: usize = TABLE.len();
pub const LETTER_COUNT: usize = 26;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSet {
    pub label: char,
    pub letters: Vec<char>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSetTable {
    sets: Vec<FeatureSet>,
}

/// One training pattern: the letter it came from, its 81 inputs and a one-hot target.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub letter: char,
    pub input: Vec<f64>,
    pub target: Vec<f64>,
}

impl Sample {
    /// Index of the 1.0 entry in the target.
    pub fn hot_index(&self) -> usize {
        self.target
            .iter()
            .position(|&t| t == 1.0)
            .expect("one-hot target")
    }
}

pub fn builtin_feature_sets() -> FeatureSetTable {
    FeatureSetTable {
        sets: TABLE
            .iter()
            .map(|&(label, letters)| FeatureSet {
                label,
                letters: letters.to_vec(),
            })
            .collect(),
    }
}

impl FeatureSetTable {
    pub fn sets(&self) -> &[FeatureSet] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Index of the class containing `letter`, in the order A B C E I K L M O V.
    pub fn class_of(&self, letter: char) -> Result<usize> {
        if !letter.is_ascii_uppercase() {
            return Err(Error::Argument(format!(
                "expected an uppercase letter, got {letter:?}"
            )));
        }
        self.sets
            .iter()
            .position(|s| s.letters.contains(&letter))
            .ok_or_else(|| Error::Argument(format!("letter {letter} is in no feature set")))
    }

    pub fn get(&self, label: char) -> Option<&FeatureSet> {
        self.sets.iter().find(|s| s.label == label)
    }

    /// One line per class, `label: L1, L2, ...`.
    pub fn report(&self) -> String {
        let mut out = String::new();
        for set in &self.sets {
            let letters: Vec<String> = set.letters.iter().map(char::to_string).collect();
            writeln!(out, "{}: {}", set.label, letters.join(", ")).unwrap();
        }
        out
    }
}

pub fn one_hot(len: usize, hot: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    v[hot] = 1.0;
    v
}

/// Letter-identity dataset: 26 outputs, A=0 through Z=25.
pub fn targets_experiment1() -> Vec<Sample> {
    letter_samples(&builtin_alphabet())
}

/// Feature-set dataset: 10 outputs, one per class.
pub fn targets_experiment2() -> Vec<Sample> {
    feature_set_samples(&builtin_alphabet(), &builtin_feature_sets())
        .expect("built-in alphabet is covered by the built-in table")
}

/// Letter-identity samples for an arbitrary alphabet (each glyph's target
/// is indexed by its letter's alphabet position).
pub fn letter_samples(glyphs: &[Glyph]) -> Vec<Sample> {
    glyphs
        .iter()
        .map(|g| Sample {
            letter: g.letter(),
            input: g.flatten(),
            target: one_hot(LETTER_COUNT, (g.letter() as u8 - b'A') as usize),
        })
        .collect()
}

pub fn feature_set_samples(glyphs: &[Glyph], table: &FeatureSetTable) -> Result<Vec<Sample>> {
    glyphs
        .iter()
        .map(|g| {
            Ok(Sample {
                letter: g.letter(),
                input: g.flatten(),
                target: one_hot(table.len(), table.class_of(g.letter())?),
            })
        })
        .collect()
}
