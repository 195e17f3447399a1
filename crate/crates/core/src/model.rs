//! Angles, folding conventions, and single-polarizer response laws.
//!
//! A polarizer axis is a line, not a direction, so axis angles live on a
//! period of π. Axis angles are stored canonically in `[0, π)`; a
//! deviation (difference of two axis angles) folds to `(−π/2, π/2]`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A polarizer axis angle, stored canonically in `[0, π)` radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle(f64);

impl Angle {
    /// Builds an axis angle from radians, reducing modulo π into `[0, π)`.
    pub fn from_radians(radians: f64) -> Result<Self> {
        if !radians.is_finite() {
            return Err(Error::invalid(format!("non-finite angle: {radians}")));
        }
        let mut r = radians.rem_euclid(PI);
        // rem_euclid can land exactly on π through rounding
        if r >= PI {
            r = 0.0;
        }
        Ok(Angle(r))
    }

    /// Builds an axis angle from degrees.
    pub fn from_degrees(degrees: f64) -> Result<Self> {
        Self::from_radians(degrees.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }
}

/// Folds any finite angle into the canonical deviation range `(−π/2, π/2]`.
///
/// The result is congruent to the input modulo π and the fold is
/// idempotent.
pub fn fold_deviation(angle: f64) -> Result<f64> {
    if !angle.is_finite() {
        return Err(Error::invalid(format!("non-finite deviation: {angle}")));
    }
    let mut d = angle.rem_euclid(PI);
    if d > PI / 2.0 {
        d -= PI;
    }
    // map the open endpoint −π/2 to +π/2
    if d <= -PI / 2.0 {
        d += PI;
    }
    Ok(d)
}

/// Parameters of the hidden-variable step response
/// `p(λ) = 1 − (1 − exp(−a|λ|^e)) / (1 + c·exp(−a|λ|^e))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HvResponseParams {
    pub a: f64,
    pub e: f64,
    pub c: f64,
}

impl HvResponseParams {
    pub fn new(a: f64, e: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::invalid(format!("hv.a must be > 0, got {a}")));
        }
        if !(e.is_finite() && e > 0.0) {
            return Err(Error::invalid(format!("hv.e must be > 0, got {e}")));
        }
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::invalid(format!("hv.c must be >= 0, got {c}")));
        }
        Ok(HvResponseParams { a, e, c })
    }
}

impl Default for HvResponseParams {
    fn default() -> Self {
        HvResponseParams {
            a: 1.95,
            e: 3.56,
            c: 500.0,
        }
    }
}

/// Generalized Malus law `M(d) = (1−ε)·cos²d + ε` for `ε ∈ [0, 1]`.
///
/// The deviation is folded before evaluation; the result lies in `[ε, 1]`.
pub fn malus(deviation: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon.is_finite() && (0.0..=1.0).contains(&epsilon)) {
        return Err(Error::invalid(format!(
            "epsilon must be in [0, 1], got {epsilon}"
        )));
    }
    let d = fold_deviation(deviation)?;
    let c = d.cos();
    Ok((1.0 - epsilon) * c * c + epsilon)
}

/// The hidden-variable step response at a folded deviation.
///
/// Equals 1 at zero deviation and, for the default parameters, is
/// non-increasing in |λ| up to π/2.
pub fn hv_response(deviation: f64, params: &HvResponseParams) -> Result<f64> {
    let lambda = fold_deviation(deviation)?;
    let t = (-params.a * lambda.abs().powf(params.e)).exp();
    Ok(1.0 - (1.0 - t) / (1.0 + params.c * t))
}

/// A single polarizer's transmission probability as a function of the
/// deviation between the photon polarization and the polarizer axis.
///
/// Every variant evaluates to a probability in `[0, 1]`, even and
/// π-periodic in the deviation.
#[derive(Debug, Clone, PartialEq)]
pub enum ResponseLaw {
    /// `cos²` — the ideal Malus law.
    IdealMalus,
    /// `(1−ε)cos² + ε` — Malus with a pedestal for imperfect polarizers.
    GeneralizedMalus { epsilon: f64 },
    /// The steep hidden-variable step response.
    HvStep(HvResponseParams),
    /// Piecewise-linear interpolation of a measured response on `[0, π/2]`.
    Tabulated(Vec<(f64, f64)>),
}

impl ResponseLaw {
    pub fn generalized_malus(epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && (0.0..=1.0).contains(&epsilon)) {
            return Err(Error::invalid(format!(
                "epsilon must be in [0, 1], got {epsilon}"
            )));
        }
        Ok(ResponseLaw::GeneralizedMalus { epsilon })
    }

    pub fn hv_default() -> Self {
        ResponseLaw::HvStep(HvResponseParams::default())
    }

    /// Validates a tabulated grid: strictly increasing deviations in
    /// `[0, π/2]`, probabilities in `[0, 1]`, at least two points.
    pub fn tabulated(grid: Vec<(f64, f64)>) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::invalid("tabulated law needs at least 2 points"));
        }
        for (i, &(d, p)) in grid.iter().enumerate() {
            if !(d.is_finite() && (0.0..=PI / 2.0 + 1e-12).contains(&d)) {
                return Err(Error::invalid(format!(
                    "tabulated deviation {i} out of [0, pi/2]: {d}"
                )));
            }
            if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
                return Err(Error::invalid(format!(
                    "tabulated probability {i} out of [0, 1]: {p}"
                )));
            }
            if i > 0 && d <= grid[i - 1].0 {
                return Err(Error::invalid(format!(
                    "tabulated deviations must be strictly increasing at index {i}"
                )));
            }
        }
        Ok(ResponseLaw::Tabulated(grid))
    }

    /// Evaluates the law at a deviation, folding first.
    ///
    /// Tabulated evaluation outside the grid clamps to the nearest
    /// endpoint; use [`ResponseLaw::evaluate_flagged`] to observe the
    /// clamp.
    pub fn evaluate(&self, deviation: f64) -> Result<f64> {
        self.evaluate_flagged(deviation).map(|(p, _)| p)
    }

    /// Like [`ResponseLaw::evaluate`] but also reports whether a
    /// tabulated lookup had to clamp to a grid endpoint.
    pub fn evaluate_flagged(&self, deviation: f64) -> Result<(f64, bool)> {
        match self {
            ResponseLaw::IdealMalus => Ok((malus(deviation, 0.0)?, false)),
            ResponseLaw::GeneralizedMalus { epsilon } => {
                Ok((malus(deviation, *epsilon)?, false))
            }
            ResponseLaw::HvStep(params) => Ok((hv_response(deviation, params)?, false)),
            ResponseLaw::Tabulated(grid) => {
                let d = fold_deviation(deviation)?.abs();
                let first = grid[0];
                let last = grid[grid.len() - 1];
                if d <= first.0 {
                    return Ok((first.1, d < first.0));
                }
                if d >= last.0 {
                    return Ok((last.1, d > last.0));
                }
                let idx = grid.partition_point(|&(x, _)| x < d);
                let (x0, y0) = grid[idx - 1];
                let (x1, y1) = grid[idx];
                let t = (d - x0) / (x1 - x0);
                Ok((y0 + t * (y1 - y0), false))
            }
        }
    }
}
