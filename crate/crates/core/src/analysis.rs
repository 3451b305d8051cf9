//! Heatmaps and activation tables for reading what hidden nodes respond to.
//!
//! Node indices are zero-based in the API. Text reports number nodes from 1.

use std::fmt::Write as _;

use crate::error::{check_len, Error, Result};
use crate::glyphs::{reshape, Glyph, GRID_SIDE, INPUT_COUNT};
use crate::mlp::Mlp;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap9x9 {
    pub values: [[f64; GRID_SIDE]; GRID_SIDE],
    pub node_index: usize,
    pub letter: Option<char>,
    pub tag: String,
}

impl Heatmap9x9 {
    pub fn new(values: [[f64; GRID_SIDE]; GRID_SIDE], node_index: usize) -> Self {
        Heatmap9x9 {
            values,
            node_index,
            letter: None,
            tag: String::new(),
        }
    }

    pub fn from_flat(values: &[f64], node_index: usize) -> Result<Self> {
        Ok(Self::new(reshape(values)?, node_index))
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().flatten().copied()
    }
}

fn node_weights(net: &Mlp, node: usize) -> Result<&[f64]> {
    check_len("network inputs", INPUT_COUNT, net.inputs())?;
    net.hidden_weights(node)
}

/// The node's 81 input weights laid out on the 9x9 pixel grid.
pub fn weight_heatmap(net: &Mlp, node: usize) -> Result<Heatmap9x9> {
    Heatmap9x9::from_flat(node_weights(net, node)?, node)
}

/// The node's weights masked by the glyph's on-pixels: the weight mass the
/// node puts on that letter's strokes.
pub fn letter_overlay_heatmap(net: &Mlp, node: usize, glyph: &Glyph) -> Result<Heatmap9x9> {
    let weights = node_weights(net, node)?;
    let masked: Vec<f64> = weights
        .iter()
        .zip(glyph.flatten())
        .map(|(w, p)| w * p)
        .collect();
    let mut map = Heatmap9x9::from_flat(&masked, node)?;
    map.letter = Some(glyph.letter());
    Ok(map)
}

/// Hidden activations per letter, rows sorted by letter.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationTable {
    nodes: usize,
    rows: Vec<(char, Vec<f64>)>,
}

impl ActivationTable {
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn rows(&self) -> &[(char, Vec<f64>)] {
        &self.rows
    }

    pub fn row(&self, letter: char) -> Option<&[f64]> {
        self.rows
            .iter()
            .find(|(l, _)| *l == letter)
            .map(|(_, r)| r.as_slice())
    }

    /// Letters as rows, nodes as columns, four decimals.
    pub fn report(&self) -> String {
        let mut out = String::from("letter");
        for j in 1..=self.nodes {
            write!(out, " {:>7}", format!("node{j}")).unwrap();
        }
        out.push('\n');
        for (letter, acts) in &self.rows {
            write!(out, "{letter:<6}").unwrap();
            for a in acts {
                write!(out, " {a:>7.4}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

pub fn activation_table(net: &Mlp, glyphs: &[Glyph]) -> Result<ActivationTable> {
    check_len("network inputs", INPUT_COUNT, net.inputs())?;
    let mut rows = Vec::with_capacity(glyphs.len());
    for g in glyphs {
        if rows.iter().any(|(l, _)| *l == g.letter()) {
            return Err(Error::Argument(format!(
                "letter {} supplied twice",
                g.letter()
            )));
        }
        rows.push((g.letter(), net.forward(&g.flatten())?.hidden_act));
    }
    rows.sort_by_key(|(l, _)| *l);
    Ok(ActivationTable {
        nodes: net.hidden(),
        rows,
    })
}

/// Letters whose activation at `node` is strictly above `threshold`, A to Z.
pub fn strongly_activating_letters(
    table: &ActivationTable,
    node: usize,
    threshold: f64,
) -> Result<Vec<char>> {
    if node >= table.nodes {
        return Err(Error::Argument(format!(
            "hidden node {node} out of range (table has {})",
            table.nodes
        )));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Argument(format!(
            "threshold must be in (0, 1), got {threshold}"
        )));
    }
    Ok(table
        .rows
        .iter()
        .filter(|(_, acts)| acts[node] > threshold)
        .map(|(l, _)| *l)
        .collect())
}

/// One line per node: `node J (N): A, B, ...`.
pub fn strong_letters_report(table: &ActivationTable, threshold: f64) -> Result<String> {
    let mut out = format!("threshold {threshold}\n");
    for node in 0..table.nodes {
        let letters = strongly_activating_letters(table, node, threshold)?;
        let names: Vec<String> = letters.iter().map(char::to_string).collect();
        writeln!(
            out,
            "node {} ({}): {}",
            node + 1,
            letters.len(),
            names.join(", ")
        )
        .unwrap();
    }
    Ok(out)
}
