//! Single-hidden-layer sigmoid network trained on a 26-letter 9x9 binary
//! alphabet, with tools to inspect what each hidden unit responds to.
//!
//! The crate is organised bottom-up:
//!
//! * [`glyphs`]: the alphabet, its text font format and pixel-flip noise.
//! * [`featuresets`]: the ten groups of similarly shaped letters and one-hot targets.
//! * [`mlp`]: the 81-H-K network, sigmoid transfer and the forward pass.
//! * [`trainer`]: SSE, backpropagation, a finite-difference oracle and online training.
//! * [`analysis`]: weight and letter-overlay heatmaps, hidden activation tables.
//! * [`render`]: bit-exact binary PPM output with a yellow to red palette.

pub mod analysis;
pub mod error;
pub mod featuresets;
pub mod glyphs;
pub mod mlp;
pub mod render;
pub mod trainer;

pub use analysis::{ActivationTable, Heatmap9x9};
pub use error::{Error, Result};
pub use featuresets::{FeatureSetTable, Sample};
pub use glyphs::{Glyph, Grid, GRID_SIDE, INPUT_COUNT};
pub use mlp::{ForwardTrace, Mlp};
pub use render::Palette;
pub use trainer::{Gradients, TrainConfig, TrainReport};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The random source used for every seeded operation in the crate.
pub type Rng = ChaCha8Rng;

/// Build the crate's deterministic random source from an integer seed.
pub fn seeded_rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
