//! Transmission through N-polarizer cascades under both theories, and
//! the minimum-transmission sweep over the middle-polarizer angle.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{malus, Angle, ResponseLaw};
use crate::numerics::{integrate_period, minimize_scalar};

/// How the light entering the first polarizer is prepared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputConvention {
    /// Hidden polarization λ uniform over one axis period (unpolarized).
    UnpolarizedUniformLambda,
    /// Input already polarized along the first axis; the first polarizer
    /// transmits with certainty and the cascade is conditioned on it.
    PolarizedAlongFirstAxis,
}

/// An ordered polarizer cascade: axis angles (first fixed at 0 as the
/// reference), one response law per polarizer, and the input convention.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeSpec {
    axes: Vec<Angle>,
    responses: Vec<ResponseLaw>,
    input: InputConvention,
}

impl CascadeSpec {
    pub fn new(
        axes: Vec<Angle>,
        responses: Vec<ResponseLaw>,
        input: InputConvention,
    ) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::invalid("cascade needs at least one polarizer"));
        }
        if axes[0].radians() != 0.0 {
            return Err(Error::invalid(format!(
                "first axis is the reference and must be 0, got {}",
                axes[0].radians()
            )));
        }
        if responses.len() != axes.len() {
            return Err(Error::invalid(format!(
                "{} axes but {} response laws",
                axes.len(),
                responses.len()
            )));
        }
        Ok(CascadeSpec {
            axes,
            responses,
            input,
        })
    }

    pub fn axes(&self) -> &[Angle] {
        &self.axes
    }

    pub fn responses(&self) -> &[ResponseLaw] {
        &self.responses
    }

    pub fn input(&self) -> InputConvention {
        self.input
    }
}

/// Hidden-variable two-polarizer transmission
/// `P₂(α) = (1/π)·∫₀^π p₁(λ)·p₂(λ−α) dλ`.
///
/// The same expression covers both one photon through two polarizers in
/// series and the coincidence arrangement with one analyzer per arm.
pub fn hv_two(alpha: Angle, p1: &ResponseLaw, p2: &ResponseLaw, tol: f64) -> Result<f64> {
    let a = alpha.radians();
    let r = integrate_period(
        |lam| p1.evaluate(lam).unwrap() * p2.evaluate(lam - a).unwrap(),
        tol,
    )?;
    Ok(r.value.clamp(0.0, 1.0))
}

/// Hidden-variable N-polarizer transmission under the persistent-λ
/// convention: the photon keeps its hidden polarization through every
/// polarizer, so the per-polarizer responses multiply under one integral.
pub fn hv_cascade(spec: &CascadeSpec, tol: f64) -> Result<f64> {
    if spec.input != InputConvention::UnpolarizedUniformLambda {
        return Err(Error::invalid(
            "hv_cascade requires the unpolarized uniform-lambda input convention",
        ));
    }
    let r = integrate_period(
        |lam| {
            spec.axes
                .iter()
                .zip(&spec.responses)
                .map(|(axis, law)| law.evaluate(lam - axis.radians()).unwrap())
                .product()
        },
        tol,
    )?;
    Ok(r.value.clamp(0.0, 1.0))
}

/// Ideal three-polarizer transmission `P(α, β) = cos²α · cos²(α−β)`
/// for axes (0, α, β), input polarized along the first axis.
pub fn qm_three(alpha: f64, beta: f64) -> f64 {
    let ca = alpha.cos();
    let cab = (alpha - beta).cos();
    ca * ca * cab * cab
}

/// Malus-chain transmission for a cascade with input polarized along the
/// first axis: the product of `M(θ_i − θ_{i−1})` over successive links,
/// evaluated with each downstream polarizer's own Malus law.
pub fn qm_cascade(spec: &CascadeSpec) -> Result<f64> {
    if spec.input != InputConvention::PolarizedAlongFirstAxis {
        return Err(Error::invalid(
            "qm_cascade requires input polarized along the first axis",
        ));
    }
    for law in &spec.responses {
        match law {
            ResponseLaw::IdealMalus | ResponseLaw::GeneralizedMalus { .. } => {}
            other => {
                return Err(Error::invalid(format!(
                    "qm_cascade accepts only Malus-family laws, got {other:?}"
                )))
            }
        }
    }
    let mut p = 1.0;
    for i in 1..spec.axes.len() {
        let link = spec.axes[i].radians() - spec.axes[i - 1].radians();
        let eps = match &spec.responses[i] {
            ResponseLaw::IdealMalus => 0.0,
            ResponseLaw::GeneralizedMalus { epsilon } => *epsilon,
            _ => unreachable!(),
        };
        p *= malus(link, eps)?;
    }
    Ok(p)
}

/// Which theory a sweep row was computed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Qm,
    Hv,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelKind::Qm => write!(f, "qm"),
            ModelKind::Hv => write!(f, "hv"),
        }
    }
}

/// The three-polarizer model used by [`min_beta_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub enum SweepModel {
    /// Malus chain with pedestal ε: `T(β) = M(α)·M(β−α)`.
    Qm { epsilon: f64 },
    /// Hidden-variable cascade with axes (0, α, β) and the given laws.
    Hv {
        laws: [ResponseLaw; 3],
        quad_tol: f64,
    },
}

/// One record of the minimum-transmission sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub alpha: Angle,
    pub beta_star: Angle,
    pub p_min: f64,
    pub model: ModelKind,
}

const SWEEP_COARSE_POINTS: usize = 181;

/// For each α, finds the β ∈ [0, π) minimizing the three-polarizer
/// transmission with axes (0, α, β): a 181-point coarse scan over the
/// period followed by golden-section refinement of the best bracket.
pub fn min_beta_sweep(
    alpha_grid: &[Angle],
    model: &SweepModel,
    tol: f64,
) -> Result<Vec<SweepRow>> {
    if alpha_grid.is_empty() {
        return Err(Error::invalid("empty alpha grid"));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::invalid(format!("tol must be > 0, got {tol}")));
    }
    if let SweepModel::Qm { epsilon } = model {
        if !(0.0..=1.0).contains(epsilon) {
            return Err(Error::invalid(format!(
                "epsilon must be in [0, 1], got {epsilon}"
            )));
        }
    }
    alpha_grid
        .par_iter()
        .map(|&alpha| sweep_one(alpha, model, tol))
        .collect()
}

fn sweep_one(alpha: Angle, model: &SweepModel, tol: f64) -> Result<SweepRow> {
    let a = alpha.radians();
    let (kind, transmission): (ModelKind, Box<dyn Fn(f64) -> Result<f64>>) = match model {
        SweepModel::Qm { epsilon } => {
            let eps = *epsilon;
            (
                ModelKind::Qm,
                Box::new(move |beta: f64| Ok(malus(a, eps)? * malus(beta - a, eps)?)),
            )
        }
        SweepModel::Hv { laws, quad_tol } => {
            let laws = laws.clone();
            let qt = *quad_tol;
            (
                ModelKind::Hv,
                Box::new(move |beta: f64| {
                    let r = integrate_period(
                        |lam| {
                            laws[0].evaluate(lam).unwrap()
                                * laws[1].evaluate(lam - a).unwrap()
                                * laws[2].evaluate(lam - beta).unwrap()
                        },
                        qt,
                    )?;
                    Ok(r.value.clamp(0.0, 1.0))
                }),
            )
        }
    };

    // coarse scan over one period; a steep response can create several
    // local minima, so the global pick happens here
    let n = SWEEP_COARSE_POINTS;
    let mut best_i = 0usize;
    let mut best_v = f64::INFINITY;
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let beta = PI * i as f64 / n as f64;
        let v = transmission(beta)?;
        values.push(v);
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    let step = PI / n as f64;
    let center = best_i as f64 * step;
    let refined = minimize_scalar(
        |beta| transmission(beta).unwrap_or(f64::INFINITY),
        center - step,
        center + step,
        tol,
    )?;
    let (beta_star, p_min) = if refined.min_value <= best_v {
        (refined.argmin, refined.min_value)
    } else {
        (center, best_v)
    };
    Ok(SweepRow {
        alpha,
        beta_star: Angle::from_radians(beta_star)?,
        p_min,
        model: kind,
    })
}
