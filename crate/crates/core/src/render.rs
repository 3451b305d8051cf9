//! Heatmap rendering to binary PPM (P6, maxval 255).
//!
//! Output is byte-for-byte deterministic: each map is min-max normalised on
//! its own, channels are interpolated linearly between the palette's two
//! colours and rounded half-up.

use crate::analysis::Heatmap9x9;
use crate::error::{Error, Result};
use crate::glyphs::GRID_SIDE;

pub type Rgb = [u8; 3];

pub const YELLOW: Rgb = [255, 255, 0];
pub const RED: Rgb = [255, 0, 0];
pub const WHITE: Rgb = [255, 255, 255];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Palette {
    pub name: String,
    /// Colour at normalised value 0.
    pub low: Rgb,
    /// Colour at normalised value 1.
    pub high: Rgb,
}

impl Palette {
    pub fn new(name: impl Into<String>, low: Rgb, high: Rgb) -> Result<Self> {
        if low == high {
            return Err(Error::Argument("palette colours must differ".into()));
        }
        Ok(Palette {
            name: name.into(),
            low,
            high,
        })
    }

    /// Channel-wise linear blend, rounded half-up. `t` is clamped to [0, 1].
    pub fn color_at(&self, t: f64) -> Rgb {
        let t = t.clamp(0.0, 1.0);
        let mut out = [0u8; 3];
        for (c, (&lo, &hi)) in out.iter_mut().zip(self.low.iter().zip(&self.high)) {
            let v = f64::from(lo) + (f64::from(hi) - f64::from(lo)) * t;
            *c = (v + 0.5).floor().clamp(0.0, 255.0) as u8;
        }
        out
    }
}

impl Default for Palette {
    /// Yellow for low values, red for high.
    fn default() -> Self {
        Palette {
            name: "yellow-red".into(),
            low: YELLOW,
            high: RED,
        }
    }
}

/// Per-map min-max scaling into [0, 1]; a constant map becomes all 0.5.
pub fn normalize(map: &Heatmap9x9) -> [[f64; GRID_SIDE]; GRID_SIDE] {
    let (min, max) = map
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    let range = max - min;
    map.values
        .map(|row| row.map(|v| if range > 0.0 { (v - min) / range } else { 0.5 }))
}

/// Row-major RGB raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Raster {
    pub fn filled(width: usize, height: usize, color: Rgb) -> Self {
        let pixels = color
            .iter()
            .copied()
            .cycle()
            .take(width * height * 3)
            .collect();
        Raster {
            width,
            height,
            pixels,
        }
    }

    pub fn put(&mut self, x: usize, y: usize, color: Rgb) {
        let at = (y * self.width + x) * 3;
        self.pixels[at..at + 3].copy_from_slice(&color);
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        let at = (y * self.width + x) * 3;
        [self.pixels[at], self.pixels[at + 1], self.pixels[at + 2]]
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let header = format!("P6\n{} {}\n255\n", self.width, self.height);
        let mut out = Vec::with_capacity(header.len() + self.pixels.len());
        out.extend_from_slice(header.as_bytes());
        out.extend_from_slice(&self.pixels);
        out
    }

    /// Parse the P6 layout written by [`Raster::to_ppm`].
    pub fn from_ppm(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::Argument(format!("invalid PPM: {m}"));
        let mut fields = Vec::with_capacity(4);
        let mut pos = 0;
        while fields.len() < 4 {
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos >= bytes.len() || pos == start {
                return Err(bad("truncated header"));
            }
            fields.push(
                std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("header is not ASCII"))?,
            );
            pos += 1;
        }
        if fields[0] != "P6" {
            return Err(bad("magic is not P6"));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad("bad number"));
        let (width, height, maxval) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
        if maxval != 255 {
            return Err(bad("maxval is not 255"));
        }
        let payload = &bytes[pos..];
        if payload.len() != width * height * 3 {
            return Err(bad("payload size does not match dimensions"));
        }
        Ok(Raster {
            width,
            height,
            pixels: payload.to_vec(),
        })
    }
}

fn check_cell(cell_size: usize) -> Result<()> {
    if cell_size == 0 {
        return Err(Error::Argument("cell size must be at least 1".into()));
    }
    Ok(())
}

fn paint(raster: &mut Raster, map: &Heatmap9x9, palette: &Palette, cell: usize, x0: usize) {
    for (r, row) in normalize(map).iter().enumerate() {
        for (c, &t) in row.iter().enumerate() {
            let color = palette.color_at(t);
            for y in r * cell..(r + 1) * cell {
                for x in c * cell..(c + 1) * cell {
                    raster.put(x0 + x, y, color);
                }
            }
        }
    }
}

pub fn render_raster(map: &Heatmap9x9, palette: &Palette, cell_size: usize) -> Result<Raster> {
    render_montage_raster(std::slice::from_ref(map), palette, cell_size, 0)
}

/// One map as a `9·cell_size` square PPM.
pub fn render_ppm(map: &Heatmap9x9, palette: &Palette, cell_size: usize) -> Result<Vec<u8>> {
    Ok(render_raster(map, palette, cell_size)?.to_ppm())
}

pub fn render_montage_raster(
    maps: &[Heatmap9x9],
    palette: &Palette,
    cell_size: usize,
    gap: usize,
) -> Result<Raster> {
    check_cell(cell_size)?;
    if maps.is_empty() {
        return Err(Error::Argument("montage needs at least one map".into()));
    }
    let side = GRID_SIDE * cell_size;
    let width = maps.len() * side + (maps.len() - 1) * gap;
    let mut raster = Raster::filled(width, side, WHITE);
    for (i, map) in maps.iter().enumerate() {
        paint(&mut raster, map, palette, cell_size, i * (side + gap));
    }
    Ok(raster)
}

/// Maps side by side, each normalised on its own, separated by `gap`
/// white columns.
pub fn render_montage(
    maps: &[Heatmap9x9],
    palette: &Palette,
    cell_size: usize,
    gap: usize,
) -> Result<Vec<u8>> {
    Ok(render_montage_raster(maps, palette, cell_size, gap)?.to_ppm())
}
