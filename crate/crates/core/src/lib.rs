//! Falsification testing for black-box dynamical models, with an optional
//! surrogate-assisted mode for models that are expensive to execute.
//!
//! The pieces, bottom up:
//!
//! - [`signals`]: sampled signals, input profiles and control-point encoding
//! - [`stl`]: requirement formulas and robustness (the test objective)
//! - [`model`]: the executable-model abstraction, an RK4 integrator and the
//!   benchmark catalog
//! - [`search`]: the baseline falsification loop and its search strategies
//! - [`sysid`]: ARX / ARMAX / Box-Jenkins / state-space surrogate fitting
//! - [`refinement`]: the loop that falsifies a surrogate and validates
//!   candidates on the real model
//! - [`experiment`]: campaigns, sweeps and CSV reporting behind the CLI

pub mod error;
pub mod experiment;
pub mod model;
pub mod refinement;
pub mod search;
pub mod signals;
pub mod stl;
pub mod sysid;

use rand::SeedableRng;

pub use error::{Error, Result};

/// The random source used everywhere. ChaCha keeps streams reproducible
/// across platforms for a given seed.
pub type Rng = rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}
