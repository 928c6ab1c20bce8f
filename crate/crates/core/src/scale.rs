//! Scale functions `W^(η)` of the implemented families.
//!
//! For both families the Laplace transform `1/(φ(θ) − η)` is a rational
//! function `p(θ) / (a(θ − r₁)(θ − r₂))`, where `r₁ ≥ r₂` solve `φ(θ) = η`.
//! Partial fractions give
//!
//! ```text
//! W(x) = [p(r₁)e^{r₁x} − p(r₂)e^{r₂x}] / (a(r₁ − r₂))
//! ```
//!
//! with `a = σ²/2, p ≡ 1` (Brownian drift) and `a = d, p(θ) = ρ + θ`
//! (Cramér–Lundberg). The closed forms are checked against a fixed-contour
//! Talbot inversion that only uses the complex exponent.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::levy::{Family, LevyModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Backend {
    ClosedForm,
    NumericInversion,
}

/// `W^(η)` of an unkilled base model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleFunction {
    model: LevyModel,
    eta: f64,
    backend: Backend,
    r1: f64,
    r2: f64,
}

impl ScaleFunction {
    /// Scale function of superscript `eta` for the unkilled version of `model`.
    /// Fails with [`Error::ComplexRoots`] when `φ(θ) = η` has no real root.
    pub fn new(model: &LevyModel, eta: f64, backend: Backend) -> Result<Self> {
        let model = model.unkilled();
        let (r1, r2) = model
            .exponent_level_roots(eta)
            .ok_or(Error::ComplexRoots { eta })?;
        Ok(Self {
            model,
            eta,
            backend,
            r1,
            r2,
        })
    }

    /// `W^(q)` where `q` is the killing rate of `model`.
    pub fn killed(model: &LevyModel) -> Result<Self> {
        Self::new(model, model.killing_rate(), Backend::ClosedForm)
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// Real roots `(r₁, r₂)` of `φ(θ) = η`, largest first.
    pub fn roots(&self) -> (f64, f64) {
        (self.r1, self.r2)
    }

    /// `W(0+)`: `0` for unbounded variation, `1/d` for bounded variation.
    pub fn value_at_origin(&self) -> f64 {
        match self.model.family() {
            Family::BrownianDrift { .. } => 0.0,
            Family::CramerLundberg { d, .. } => 1.0 / d,
        }
    }

    /// `W'(0+)`: `2/σ²`, or `(η + λ)/d²`.
    pub fn derivative_at_origin(&self) -> f64 {
        match self.model.family() {
            Family::BrownianDrift { sigma, .. } => 2.0 / (sigma * sigma),
            Family::CramerLundberg { d, jump_rate, .. } => (self.eta + jump_rate) / (d * d),
        }
    }

    /// `W(x)`; zero for `x < 0` and the right limit at `x = 0`.
    pub fn value(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::Domain {
                value: x,
                bound: f64::NEG_INFINITY,
            });
        }
        if x < 0.0 {
            return Ok(0.0);
        }
        if x == 0.0 {
            return Ok(self.value_at_origin());
        }
        match self.backend {
            Backend::ClosedForm => Ok(self.closed_value(x)),
            Backend::NumericInversion => {
                let shift = self.r1.max(0.0) + 1.0;
                let model = self.model;
                let eta = self.eta;
                invert_laplace(|s| 1.0 / (model.laplace_exponent_complex(s) - eta), x, shift)
                    .map(|r| r.value)
            }
        }
    }

    /// `W'(x)` for `x > 0`.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x <= 0.0 {
            return Err(Error::Domain { value: x, bound: 0.0 });
        }
        match self.backend {
            Backend::ClosedForm => Ok(self.closed_derivative(x)),
            Backend::NumericInversion => {
                let shift = self.r1.max(0.0) + 1.0;
                let model = self.model;
                let eta = self.eta;
                let w0 = self.value_at_origin();
                invert_laplace(
                    |s| s / (model.laplace_exponent_complex(s) - eta) - w0,
                    x,
                    shift,
                )
                .map(|r| r.value)
            }
        }
    }

    /// Closed-form `W(x)` for `x ≥ 0` (right limit at 0).
    pub(crate) fn closed_value(&self, x: f64) -> f64 {
        match self.model.family() {
            Family::BrownianDrift { .. } => self.combine(x, |_| 1.0, 0.0),
            Family::CramerLundberg { .. } => {
                let rho = self.rho();
                self.combine(x, |t| rho + t, 1.0)
            }
        }
    }

    /// Closed-form `W'(x)` for `x ≥ 0` (right limit at 0).
    pub(crate) fn closed_derivative(&self, x: f64) -> f64 {
        match self.model.family() {
            Family::BrownianDrift { .. } => self.combine(x, |t| t, 1.0),
            Family::CramerLundberg { .. } => {
                let rho = self.rho();
                self.combine(x, |t| t * (rho + t), rho + self.r1 + self.r2)
            }
        }
    }

    fn rho(&self) -> f64 {
        match self.model.family() {
            Family::CramerLundberg { jump_mean_inv, .. } => jump_mean_inv,
            Family::BrownianDrift { .. } => 0.0,
        }
    }

    fn leading(&self) -> f64 {
        match self.model.family() {
            Family::BrownianDrift { sigma, .. } => 0.5 * sigma * sigma,
            Family::CramerLundberg { d, .. } => d,
        }
    }

    /// `[g(r₁)e^{r₁x} − g(r₂)e^{r₂x}] / (a(r₁ − r₂))` for a numerator `g`
    /// with divided difference `dd = (g(r₁) − g(r₂))/(r₁ − r₂)`.
    fn combine(&self, x: f64, g: impl Fn(f64) -> f64, dd: f64) -> f64 {
        let a = self.leading();
        let delta = self.r1 - self.r2;
        if delta * x > 1.0 {
            (g(self.r1) * (self.r1 * x).exp() - g(self.r2) * (self.r2 * x).exp()) / (a * delta)
        } else {
            // e^{r₁x}[g(r₂)(1 − e^{−δx})/δ + dd], stable as δx → 0
            let ratio = if delta == 0.0 { x } else { -(-delta * x).exp_m1() / delta };
            (self.r1 * x).exp() * (g(self.r2) * ratio + dd) / a
        }
    }
}

/// `W(x)` of `sf`.
pub fn scale_w(sf: &ScaleFunction, x: f64) -> Result<f64> {
    sf.value(x)
}

/// `W'(x)` of `sf`, `x > 0`.
pub fn scale_w_prime(sf: &ScaleFunction, x: f64) -> Result<f64> {
    sf.derivative(x)
}

/// Tilted scale function `W_v^(η − φ(v))(x)`, evaluated as `e^{−vx} W^(η)(x)`
/// of the unkilled base model.
pub fn scale_w_tilted(model: &LevyModel, v: f64, eta: f64, x: f64) -> Result<f64> {
    model.laplace_exponent_unkilled(v)?;
    let sf = ScaleFunction::new(model, eta, Backend::ClosedForm)?;
    Ok((-v * x).exp() * sf.value(x)?)
}

/// Derivative of [`scale_w_tilted`] in `x`: `e^{−vx}(W'(x) − vW(x))`, `x > 0`.
pub fn scale_w_tilted_prime(model: &LevyModel, v: f64, eta: f64, x: f64) -> Result<f64> {
    model.laplace_exponent_unkilled(v)?;
    let sf = ScaleFunction::new(model, eta, Backend::ClosedForm)?;
    Ok((-v * x).exp() * (sf.derivative(x)? - v * sf.value(x)?))
}

/// Talbot inversion result at two resolutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion {
    pub value: f64,
    pub coarse: f64,
    pub fine: f64,
}

const TALBOT_NODES: usize = 64;
// Contour scale; fixed so refining the nodes only changes the quadrature error.
const TALBOT_SCALE: f64 = 32.0;
const TALBOT_AGREEMENT: f64 = 1e-9;

fn talbot(transform: &impl Fn(Complex64) -> Complex64, t: f64, shift: f64, nodes: usize) -> f64 {
    let scale = TALBOT_SCALE / t;
    let h = std::f64::consts::PI / nodes as f64;
    let mut acc = 0.0;
    for k in 0..nodes {
        let theta = (k as f64 + 0.5) * h;
        let nu = 0.6407 * theta;
        let cot = nu.cos() / nu.sin();
        let s = Complex64::new(
            scale * (-0.6122 + 0.5017 * theta * cot),
            scale * 0.2645 * theta,
        );
        let ds = Complex64::new(
            scale * 0.5017 * (cot - nu / (nu.sin() * nu.sin())),
            scale * 0.2645,
        );
        acc += ((s * t).exp() * transform(s + shift) * ds).im;
    }
    (shift * t).exp() * acc / nodes as f64
}

/// Invert a Laplace transform at `t > 0` on a Weideman-type Talbot contour.
/// `shift` must exceed the real part of every singularity of `transform`.
/// The value is accepted when 64 and 128 nodes agree to 1e-9 relative.
pub fn invert_laplace(transform: impl Fn(Complex64) -> Complex64, t: f64, shift: f64) -> Result<Inversion> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain { value: t, bound: 0.0 });
    }
    let coarse = talbot(&transform, t, shift, TALBOT_NODES);
    let fine = talbot(&transform, t, shift, 2 * TALBOT_NODES);
    let scale = fine.abs().max(1e-300);
    if !fine.is_finite() || (fine - coarse).abs() > TALBOT_AGREEMENT * scale.max(1.0) {
        return Err(Error::Inversion { x: t, coarse, fine });
    }
    Ok(Inversion {
        value: fine,
        coarse,
        fine,
    })
}

/// Numeric `W^(η)(x)` from any complex exponent `φ`: inverts `1/(φ(s) − η)`.
/// `shift` must lie to the right of the largest root of `φ = η`.
pub fn invert_laplace_numeric(
    exponent: impl Fn(Complex64) -> Complex64,
    eta: f64,
    x: f64,
    shift: f64,
) -> Result<Inversion> {
    invert_laplace(|s| 1.0 / (exponent(s) - eta), x, shift)
}

/// One row of the closed-form versus inversion comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleRow {
    pub x: f64,
    pub closed_form: f64,
    pub inverted: f64,
    pub abs_err: f64,
}

/// Closed form against numeric inversion on a grid of `x > 0`.
pub fn oracle_rows(model: &LevyModel, eta: f64, xs: &[f64]) -> Result<Vec<OracleRow>> {
    let closed = ScaleFunction::new(model, eta, Backend::ClosedForm)?;
    let numeric = ScaleFunction::new(model, eta, Backend::NumericInversion)?;
    xs.iter()
        .map(|&x| {
            let c = closed.value(x)?;
            let n = numeric.value(x)?;
            Ok(OracleRow {
                x,
                closed_form: c,
                inverted: n,
                abs_err: (c - n).abs(),
            })
        })
        .collect()
}
