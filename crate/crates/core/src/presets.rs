//! Named problems used by the command line and the test suites.

use crate::error::{Error, Result};
use crate::levy::{Direction, LevyModel, PredictionProblem};

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 4] = ["bm-max", "bessel3", "bessel5", "cramer"];

/// Killing rate of the `cramer` preset. The unkilled model drifts upward,
/// so the maximum problem needs `q > 3/2`; above `10/3` the clock at the
/// killing time also has a finite second moment (`ψ(2α) < 0`), which keeps
/// Monte Carlo errors meaningful.
pub const CRAMER_KILLING: f64 = 4.0;

/// Brownian model of the dual of a Bessel process of dimension `dim > 2`
/// observed through `X²`: `ξ̂ = −ξ` with unit volatility and drift
/// `−(dim/2 − 1)`, self-similarity index 2.
pub fn bessel_min(dim: f64) -> Result<PredictionProblem> {
    if !(dim > 2.0) || !dim.is_finite() {
        return Err(Error::InvalidParameter {
            name: "dim",
            value: dim,
            reason: "Bessel dimension must be finite and > 2",
        });
    }
    let model = LevyModel::brownian(1.0, dim / 2.0 - 1.0, 0.0)?;
    PredictionProblem::new(model, 2.0, Direction::Min)
}

pub fn preset(name: &str) -> Result<PredictionProblem> {
    match name {
        "bm-max" => PredictionProblem::new(LevyModel::brownian(1.0, 1.0, 0.0)?, 1.0, Direction::Max),
        "bessel3" => bessel_min(3.0),
        "bessel5" => bessel_min(5.0),
        "cramer" => PredictionProblem::new(
            LevyModel::cramer_lundberg(2.0, 1.0, 1.0, CRAMER_KILLING)?,
            1.0,
            Direction::Max,
        ),
        other => Err(Error::Config(format!(
            "unknown preset {other:?}; expected one of {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{classify, Family};

    #[test]
    fn every_preset_passes_the_gate() {
        for name in PRESET_NAMES {
            let p = preset(name).unwrap();
            classify(&p).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn cramer_objective_has_finite_variance() {
        let p = preset("cramer").unwrap();
        assert!(p.model.laplace_exponent(2.0 * p.alpha).unwrap() < 0.0);
    }

    #[test]
    fn bessel_drifts() {
        let p = preset("bessel3").unwrap();
        assert_eq!(p.model.family(), Family::BrownianDrift { sigma: 1.0, mu: 0.5 });
        let p = preset("bessel5").unwrap();
        assert_eq!(p.model.family(), Family::BrownianDrift { sigma: 1.0, mu: 1.5 });
        assert!(bessel_min(2.0).is_err());
        assert!(preset("nope").is_err());
    }
}
