//! The 9x9 binary alphabet.
//!
//! Font files are plain text. Each letter is a header line `letter X`
//! followed by exactly nine rows of nine characters, `#` for an on-pixel
//! and `.` for an off-pixel, and a blank line:
//!
//! ```text
//! letter T
//! #########
//! ....#....
//! ...
//! ```

use std::collections::HashSet;
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

pub const GRID_SIDE: usize = 9;
pub const INPUT_COUNT: usize = GRID_SIDE * GRID_SIDE;

/// Row-major 9x9 pixel grid, entries 0 or 1.
pub type Grid = [[u8; GRID_SIDE]; GRID_SIDE];

const BUILTIN_FONT: &str = include_str!("../data/alphabet.txt");

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Glyph {
    letter: char,
    pixels: Grid,
}

impl Glyph {
    /// Validates the letter, the binary pixel values and the full-grid extent
    /// (an on-pixel in row 0, row 8, column 0 and column 8).
    pub fn new(letter: char, pixels: Grid) -> Result<Self> {
        if !letter.is_ascii_uppercase() {
            return Err(Error::Argument(format!(
                "glyph label must be A-Z, got {letter:?}"
            )));
        }
        if pixels.iter().flatten().any(|&p| p > 1) {
            return Err(Error::Argument(format!(
                "glyph {letter} has non-binary pixels"
            )));
        }
        if let Some(edge) = missing_extent(&pixels) {
            return Err(Error::Argument(format!(
                "glyph {letter} does not reach {edge}"
            )));
        }
        Ok(Glyph { letter, pixels })
    }

    pub fn letter(&self) -> char {
        self.letter
    }

    pub fn pixels(&self) -> &Grid {
        &self.pixels
    }

    pub fn flatten(&self) -> Vec<f64> {
        flatten(&self.pixels)
    }

    pub fn on_count(&self) -> usize {
        self.pixels.iter().flatten().filter(|&&p| p == 1).count()
    }
}

impl fmt::Debug for Glyph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Glyph({})", self.letter)?;
        for row in &self.pixels {
            let line: String = row.iter().map(|&p| pixel_char(p)).collect();
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

fn pixel_char(p: u8) -> char {
    if p == 1 {
        '#'
    } else {
        '.'
    }
}

fn missing_extent(pixels: &Grid) -> Option<&'static str> {
    let last = GRID_SIDE - 1;
    let row_on = |r: usize| pixels[r].contains(&1);
    let col_on = |c: usize| pixels.iter().any(|row| row[c] == 1);
    if !row_on(0) {
        Some("row 0")
    } else if !row_on(last) {
        Some("row 8")
    } else if !col_on(0) {
        Some("column 0")
    } else if !col_on(last) {
        Some("column 8")
    } else {
        None
    }
}

/// Row-major flattening: index `9 * row + col`, values exactly 0.0 or 1.0.
pub fn flatten(grid: &Grid) -> Vec<f64> {
    grid.iter().flatten().map(|&p| f64::from(p)).collect()
}

/// Inverse of [`flatten`] for real-valued data.
pub fn reshape(values: &[f64]) -> Result<[[f64; GRID_SIDE]; GRID_SIDE]> {
    crate::error::check_len("9x9 grid", INPUT_COUNT, values.len())?;
    let mut out = [[0.0; GRID_SIDE]; GRID_SIDE];
    for (i, &v) in values.iter().enumerate() {
        out[i / GRID_SIDE][i % GRID_SIDE] = v;
    }
    Ok(out)
}

/// The canonical 26-letter alphabet, A to Z.
pub fn builtin_alphabet() -> Vec<Glyph> {
    let mut glyphs = parse_font(BUILTIN_FONT).expect("built-in font is valid");
    glyphs.sort_by_key(Glyph::letter);
    glyphs
}

/// The text of the built-in font file.
pub fn builtin_font_text() -> &'static str {
    BUILTIN_FONT
}

/// Parse a font file. Glyphs are returned in file order.
pub fn parse_font(text: &str) -> Result<Vec<Glyph>> {
    let err = |line: usize, message: String| Error::Parse { line, message };
    let lines: Vec<&str> = text.lines().map(|l| l.trim_end_matches('\r')).collect();
    let mut seen = HashSet::new();
    let mut glyphs = Vec::new();
    let mut i = 0;

    while i < lines.len() {
        if lines[i].trim().is_empty() {
            i += 1;
            continue;
        }
        let header_line = i + 1;
        let letter = parse_header(lines[i]).ok_or_else(|| {
            err(
                header_line,
                format!("expected header `letter X`, found {:?}", lines[i]),
            )
        })?;
        if !seen.insert(letter) {
            return Err(err(header_line, format!("duplicate letter {letter}")));
        }
        i += 1;

        let mut pixels = [[0u8; GRID_SIDE]; GRID_SIDE];
        for row in pixels.iter_mut() {
            let line_no = i + 1;
            let Some(line) = lines.get(i) else {
                return Err(err(line_no, format!("truncated block for letter {letter}")));
            };
            let chars: Vec<char> = line.chars().collect();
            if chars.len() != GRID_SIDE {
                return Err(err(
                    line_no,
                    format!(
                        "line length {} for letter {letter}, expected {GRID_SIDE}",
                        chars.len()
                    ),
                ));
            }
            for (cell, ch) in row.iter_mut().zip(chars) {
                *cell = match ch {
                    '#' => 1,
                    '.' => 0,
                    other => {
                        return Err(err(
                            line_no,
                            format!("invalid character {other:?}, expected '.' or '#'"),
                        ))
                    }
                };
            }
            i += 1;
        }
        if let Some(line) = lines.get(i) {
            if !line.trim().is_empty() {
                return Err(err(
                    i + 1,
                    format!("expected blank line after letter {letter}"),
                ));
            }
        }
        if let Some(edge) = missing_extent(&pixels) {
            return Err(err(
                header_line,
                format!("missing extent: letter {letter} does not reach {edge}"),
            ));
        }
        glyphs.push(Glyph { letter, pixels });
    }
    Ok(glyphs)
}

fn parse_header(line: &str) -> Option<char> {
    let rest = line.trim().strip_prefix("letter ")?;
    let mut chars = rest.trim().chars();
    let letter = chars.next()?;
    (letter.is_ascii_uppercase() && chars.next().is_none()).then_some(letter)
}

/// Serialise glyphs in the font file format. [`parse_font`] inverts this.
pub fn render_font(glyphs: &[Glyph]) -> String {
    let mut out = String::with_capacity(glyphs.len() * 110);
    for glyph in glyphs {
        out.push_str("letter ");
        out.push(glyph.letter);
        out.push('\n');
        for row in &glyph.pixels {
            out.extend(row.iter().map(|&p| pixel_char(p)));
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// Flip each entry independently with probability `rate`.
///
/// Exactly one uniform `f64` draw is taken from `rng` per entry, in index
/// order, whatever the rate; an entry flips when its draw is `< rate`.
pub fn apply_noise<R: Rng + ?Sized>(input: &[f64], rate: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::Argument(format!(
            "noise rate must be in [0, 1], got {rate}"
        )));
    }
    input
        .iter()
        .map(|&v| {
            if v != 0.0 && v != 1.0 {
                return Err(Error::Argument(format!(
                    "noise input must be binary, got {v}"
                )));
            }
            let draw: f64 = rng.gen();
            Ok(if draw < rate { 1.0 - v } else { v })
        })
        .collect()
}
