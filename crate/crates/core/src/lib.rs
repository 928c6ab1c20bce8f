//! Optimal prediction of the time at which a positive self-similar Markov
//! process attains its ultimate maximum or minimum.
//!
//! The process is described through the spectrally negative Lévy process of
//! its Lamperti representation. Thresholds and value functions are computed
//! from scale functions; [`sim`] provides a Monte Carlo engine that checks
//! them on simulated paths.

pub mod error;
pub mod levy;
pub mod quad;
pub mod root;
pub mod presets;
pub mod scale;
pub mod sim;
pub mod threshold;
pub mod value;

pub use error::{Error, Result};
pub use levy::{assess, classify, ClassReport, Direction, Family, LevyModel, MeanFiniteness, PredictionProblem};
pub use presets::preset;
pub use scale::{Backend, ScaleFunction};
pub use sim::{PathConfig, SimulationReport};
pub use threshold::{kstar_closed_form_bm, solve_kstar, ThresholdSolution};
pub use value::{ValueFunction, ValueQuery};
