//! The four-term Bell combination in three regimes: classical {0,1}
//! vertices, quantum correlations, and operator-norm maximization of
//! `B = a₁b₁ + a₂b₁ + a₁b₂ − a₂b₂` under a commutation scenario.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::Angle;
use crate::numerics::mix_seed;

/// The four analyzer settings (α, α′, β, β′).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellSettings {
    pub alpha: Angle,
    pub alpha_prime: Angle,
    pub beta: Angle,
    pub beta_prime: Angle,
}

/// Which operators are required to commute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommutationScenario {
    /// All four observables jointly diagonal.
    Classical,
    /// a's and b's act on separate tensor factors.
    TensorLocal,
    /// No commutation constraint, a single space.
    Free,
}

impl std::fmt::Display for CommutationScenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CommutationScenario::Classical => write!(f, "classical"),
            CommutationScenario::TensorLocal => write!(f, "tensor"),
            CommutationScenario::Free => write!(f, "free"),
        }
    }
}

/// The four-term combination `pa·pb + pa·pb2 + pa2·pb − pa2·pb2`.
///
/// The caller chooses the regime: probabilities in [0,1] or
/// correlations in [−1,1].
pub fn bell_combination(pa: f64, pa2: f64, pb: f64, pb2: f64) -> f64 {
    pa * pb + pa * pb2 + pa2 * pb - pa2 * pb2
}

/// Maximum of the combination over the 16 vertices of {0,1}⁴.
///
/// The combination is multilinear, so its maximum over [0,1]⁴ is
/// attained at a vertex; the enumeration returns exactly 2.
pub fn classical_max() -> f64 {
    let mut max = f64::MIN;
    for bits in 0..16u8 {
        let v = |k: u8| f64::from((bits >> k) & 1);
        max = max.max(bell_combination(v(0), v(1), v(2), v(3)));
    }
    max
}

/// Pair correlation `E(θ) = cos 2θ` for equally polarized photon pairs
/// behind analyzers at relative axis angle θ.
pub fn qm_pair_correlation(relative_angle: Angle) -> f64 {
    (2.0 * relative_angle.radians()).cos()
}

/// Evaluates the combination on correlations at the four setting pairs,
/// with the last term negative.
pub fn chsh_from_correlations(
    settings: &BellSettings,
    correlation: impl Fn(Angle) -> f64,
) -> Result<f64> {
    let rel = |x: f64, y: f64| Angle::from_radians(x - y);
    let a = settings.alpha.radians();
    let a2 = settings.alpha_prime.radians();
    let b = settings.beta.radians();
    let b2 = settings.beta_prime.radians();
    let e_ab = correlation(rel(a, b)?);
    let e_ab2 = correlation(rel(a, b2)?);
    let e_a2b = correlation(rel(a2, b)?);
    let e_a2b2 = correlation(rel(a2, b2)?);
    Ok(e_ab + e_ab2 + e_a2b - e_a2b2)
}

const INVOLUTION_TOL: f64 = 1e-10;

/// A self-adjoint matrix with spectrum in {+1, −1} (a dichotomic
/// observable): `H = H†` and `H² = I`, both within 1e-10.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianInvolution {
    dim: usize,
    entries: DMatrix<Complex64>,
}

impl HermitianInvolution {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::invalid("involution must be a nonempty square matrix"));
        }
        let herm_defect = (&entries - entries.adjoint()).norm();
        if herm_defect > INVOLUTION_TOL {
            return Err(Error::invalid(format!(
                "matrix is not Hermitian (defect {herm_defect:.3e})"
            )));
        }
        let dim = entries.nrows();
        let sq_defect = (&entries * &entries - DMatrix::<Complex64>::identity(dim, dim)).norm();
        if sq_defect > INVOLUTION_TOL {
            return Err(Error::invalid(format!(
                "matrix does not square to identity (defect {sq_defect:.3e})"
            )));
        }
        Ok(HermitianInvolution { dim, entries })
    }

    /// `U · diag(signs) · U†` for a unitary `U`.
    pub fn from_signature(unitary: &DMatrix<Complex64>, signs: &[i8]) -> Result<Self> {
        let dim = unitary.nrows();
        if signs.len() != dim {
            return Err(Error::invalid("signature length must match dimension"));
        }
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            dim,
            signs.iter().map(|&s| Complex64::new(f64::from(s), 0.0)),
        ));
        Self::new(unitary * d * unitary.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }
}

/// Assembles `B = a₁b₁ + a₂b₁ + a₁b₂ − a₂b₂` and returns its operator
/// norm, the largest singular value, via the top eigenvalue of `B†B`.
pub fn bell_operator_norm(
    a1: &HermitianInvolution,
    a2: &HermitianInvolution,
    b1: &HermitianInvolution,
    b2: &HermitianInvolution,
) -> Result<f64> {
    let d = a1.dim();
    if a2.dim() != d || b1.dim() != d || b2.dim() != d {
        return Err(Error::invalid("involution dimensions do not match"));
    }
    Ok(bell_norm_raw(
        a1.matrix(),
        a2.matrix(),
        b1.matrix(),
        b2.matrix(),
    ))
}

fn bell_norm_raw(
    a1: &DMatrix<Complex64>,
    a2: &DMatrix<Complex64>,
    b1: &DMatrix<Complex64>,
    b2: &DMatrix<Complex64>,
) -> f64 {
    let b = a1 * b1 + a2 * b1 + a1 * b2 - a2 * b2;
    let btb = b.adjoint() * &b;
    let eigs = btb.symmetric_eigenvalues();
    eigs.max().max(0.0).sqrt()
}

/// Outcome of a derivative-free maximization of the Bell operator norm.
#[derive(Debug, Clone)]
pub struct BellSearchResult {
    pub scenario: CommutationScenario,
    pub dimension: usize,
    pub achieved_max: f64,
    /// (a1, a2, b1, b2) at the optimum.
    pub witness: [HermitianInvolution; 4],
    pub restarts_used: usize,
}

/// Builds a unitary as a complete product of two-level complex rotations.
///
/// `params` holds `(θ, φ)` per index pair `(i, j)` with `i < j`, so its
/// length is `dim·(dim−1)`.
fn givens_unitary(dim: usize, params: &[f64]) -> DMatrix<Complex64> {
    debug_assert_eq!(params.len(), dim * (dim - 1));
    let mut u = DMatrix::<Complex64>::identity(dim, dim);
    let mut k = 0;
    for i in 0..dim {
        for j in (i + 1)..dim {
            let (theta, phi) = (params[2 * k], params[2 * k + 1]);
            let (ct, st) = (theta.cos(), theta.sin());
            let mut g = DMatrix::<Complex64>::identity(dim, dim);
            g[(i, i)] = Complex64::new(ct, 0.0);
            g[(j, j)] = Complex64::new(ct, 0.0);
            g[(i, j)] = -Complex64::from_polar(st, phi);
            g[(j, i)] = Complex64::from_polar(st, -phi);
            u *= g;
            k += 1;
        }
    }
    u
}

fn involution_matrix(dim: usize, params: &[f64], signs: &[i8]) -> DMatrix<Complex64> {
    let u = givens_unitary(dim, params);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        dim,
        signs.iter().map(|&s| Complex64::new(f64::from(s), 0.0)),
    ));
    &u * d * u.adjoint()
}

/// Random ±1 signature; balanced signatures (equal sign counts) are
/// drawn half the time, fully random ones otherwise.
fn random_signature(rng: &mut ChaCha8Rng, dim: usize) -> Vec<i8> {
    if rng.random::<bool>() {
        let mut s: Vec<i8> = (0..dim).map(|i| if i < dim / 2 { 1 } else { -1 }).collect();
        s.shuffle(rng);
        s
    } else {
        (0..dim)
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect()
    }
}

/// Downhill-simplex minimization of `f`; returns the best vertex.
fn nelder_mead(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    x0: &[f64],
    step: f64,
    max_iter: usize,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let fx = f(&x);
        simplex.push((x, fx));
    }
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if (simplex[n].1 - simplex[0].1).abs() < 1e-12 {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let reflect: Vec<f64> = (0..n)
            .map(|j| centroid[j] + alpha * (centroid[j] - worst.0[j]))
            .collect();
        let fr = f(&reflect);
        if fr < simplex[0].1 {
            let expand: Vec<f64> = (0..n)
                .map(|j| centroid[j] + gamma * (reflect[j] - centroid[j]))
                .collect();
            let fe = f(&expand);
            simplex[n] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflect, fr);
        } else {
            let contract: Vec<f64> = (0..n)
                .map(|j| centroid[j] + rho * (worst.0[j] - centroid[j]))
                .collect();
            let fc = f(&contract);
            if fc < worst.1 {
                simplex[n] = (contract, fc);
            } else {
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    for j in 0..n {
                        v.0[j] = best[j] + sigma * (v.0[j] - best[j]);
                    }
                    v.1 = f(&v.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

fn check_dimension(dimension: usize) -> Result<()> {
    if ![2, 4, 8].contains(&dimension) {
        return Err(Error::invalid(format!(
            "unsupported dimension {dimension}; expected 2, 4, or 8"
        )));
    }
    Ok(())
}

/// Maximizes the Bell operator norm over involutions admissible in the
/// given scenario, by seeded Nelder-Mead restarts over a two-level
/// rotation parametrization (the ±1 signature is randomized per
/// restart). The result is the deterministic maximum over restarts with
/// ties broken by restart index, independent of execution order.
pub fn search_operator_max(
    scenario: CommutationScenario,
    dimension: usize,
    restarts: usize,
    seed: u64,
) -> Result<BellSearchResult> {
    check_dimension(dimension)?;
    if restarts == 0 {
        return Err(Error::invalid("restarts must be >= 1"));
    }
    match scenario {
        CommutationScenario::Classical => classical_operator_max(dimension),
        CommutationScenario::TensorLocal => {
            if dimension != 4 {
                return Err(Error::invalid(
                    "tensor-local scenario acts on 2x2 factors and requires dimension 4",
                ));
            }
            tensor_search(restarts, seed)
        }
        CommutationScenario::Free => free_search(dimension, restarts, seed),
    }
}

/// Diagonal involutions make B diagonal, so the norm is optimized
/// entry-wise: enumerate the 16 sign patterns for one entry.
fn classical_operator_max(dimension: usize) -> Result<BellSearchResult> {
    let mut best = (f64::MIN, [1i8; 4]);
    for bits in 0..16u8 {
        let s = |k: u8| if (bits >> k) & 1 == 1 { 1i8 } else { -1i8 };
        let signs = [s(0), s(1), s(2), s(3)];
        let v = bell_combination(
            f64::from(signs[0]),
            f64::from(signs[1]),
            f64::from(signs[2]),
            f64::from(signs[3]),
        )
        .abs();
        if v > best.0 {
            best = (v, signs);
        }
    }
    let witness: Vec<HermitianInvolution> = (0..4)
        .map(|k| {
            // put the optimal pattern in the first diagonal slot and the
            // identity elsewhere
            let mut m = DMatrix::<Complex64>::identity(dimension, dimension);
            m[(0, 0)] = Complex64::new(f64::from(best.1[k]), 0.0);
            HermitianInvolution::new(m)
        })
        .collect::<Result<_>>()?;
    let witness: [HermitianInvolution; 4] = witness.try_into().expect("length 4");
    let achieved = bell_operator_norm(&witness[0], &witness[1], &witness[2], &witness[3])?;
    Ok(BellSearchResult {
        scenario: CommutationScenario::Classical,
        dimension,
        achieved_max: achieved,
        witness,
        restarts_used: 1,
    })
}

struct RestartOutcome {
    value: f64,
    index: usize,
    witness: [HermitianInvolution; 4],
}

fn best_outcome(outcomes: Vec<Result<RestartOutcome>>) -> Result<RestartOutcome> {
    let mut best: Option<RestartOutcome> = None;
    for o in outcomes {
        let o = o?;
        let better = match &best {
            None => true,
            Some(b) => o.value > b.value || (o.value == b.value && o.index < b.index),
        };
        if better {
            best = Some(o);
        }
    }
    best.ok_or_else(|| Error::invalid("no restart produced a result"))
}

fn tensor_search(restarts: usize, seed: u64) -> Result<BellSearchResult> {
    let eye2 = DMatrix::<Complex64>::identity(2, 2);
    let outcomes: Vec<Result<RestartOutcome>> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, r as u64));
            let sigs: Vec<Vec<i8>> = (0..4).map(|_| random_signature(&mut rng, 2)).collect();
            let x0: Vec<f64> = (0..8).map(|_| rng.random_range(-PI..PI)).collect();
            let eye2o = eye2.clone();
            let sigs_obj = sigs.clone();
            let objective = move |x: &[f64]| -> f64 {
                let a1 = involution_matrix(2, &x[0..2], &sigs_obj[0]).kronecker(&eye2o);
                let a2 = involution_matrix(2, &x[2..4], &sigs_obj[1]).kronecker(&eye2o);
                let b1 = eye2o.kronecker(&involution_matrix(2, &x[4..6], &sigs_obj[2]));
                let b2 = eye2o.kronecker(&involution_matrix(2, &x[6..8], &sigs_obj[3]));
                -bell_norm_raw(&a1, &a2, &b1, &b2)
            };
            let (x, fx) = nelder_mead(&objective, &x0, 0.7, 4000);
            let eye2 = DMatrix::<Complex64>::identity(2, 2);
            let witness = [
                HermitianInvolution::new(
                    involution_matrix(2, &x[0..2], &sigs[0]).kronecker(&eye2),
                )?,
                HermitianInvolution::new(
                    involution_matrix(2, &x[2..4], &sigs[1]).kronecker(&eye2),
                )?,
                HermitianInvolution::new(
                    eye2.kronecker(&involution_matrix(2, &x[4..6], &sigs[2])),
                )?,
                HermitianInvolution::new(
                    eye2.kronecker(&involution_matrix(2, &x[6..8], &sigs[3])),
                )?,
            ];
            Ok(RestartOutcome {
                value: -fx,
                index: r,
                witness,
            })
        })
        .collect();
    let best = best_outcome(outcomes)?;
    Ok(BellSearchResult {
        scenario: CommutationScenario::TensorLocal,
        dimension: 4,
        achieved_max: best.value,
        witness: best.witness,
        restarts_used: restarts,
    })
}

/// The explicit tensor-product witness reaching 2√2: a₁ = Z⊗I,
/// a₂ = X⊗I, b₁ = I⊗(Z+X)/√2, b₂ = I⊗(Z−X)/√2.
pub fn tensor_witness() -> [HermitianInvolution; 4] {
    let z = DMatrix::from_row_slice(2, 2, &[
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(-1.0, 0.0),
    ]);
    let x = DMatrix::from_row_slice(2, 2, &[
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
    ]);
    let eye2 = DMatrix::<Complex64>::identity(2, 2);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = (&z + &x).map(|v| v * s);
    let minus = (&z - &x).map(|v| v * s);
    [
        HermitianInvolution::new(z.kronecker(&eye2)).expect("Z⊗I"),
        HermitianInvolution::new(x.kronecker(&eye2)).expect("X⊗I"),
        HermitianInvolution::new(eye2.kronecker(&plus)).expect("I⊗(Z+X)/√2"),
        HermitianInvolution::new(eye2.kronecker(&minus)).expect("I⊗(Z−X)/√2"),
    ]
}

fn free_search(dimension: usize, restarts: usize, seed: u64) -> Result<BellSearchResult> {
    let nrot = dimension * (dimension - 1); // params per involution
    let outcomes: Vec<Result<RestartOutcome>> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, r as u64));
            let sigs: Vec<Vec<i8>> =
                (0..4).map(|_| random_signature(&mut rng, dimension)).collect();
            let x0: Vec<f64> = (0..4 * nrot).map(|_| rng.random_range(-PI..PI)).collect();
            let sigs_obj = sigs.clone();
            let objective = move |x: &[f64]| -> f64 {
                let mats: Vec<DMatrix<Complex64>> = (0..4)
                    .map(|k| {
                        involution_matrix(dimension, &x[k * nrot..(k + 1) * nrot], &sigs_obj[k])
                    })
                    .collect();
                -bell_norm_raw(&mats[0], &mats[1], &mats[2], &mats[3])
            };
            let iters = if dimension <= 4 { 3000 } else { 1500 };
            let (x, fx) = nelder_mead(&objective, &x0, 0.7, iters);
            let witness: Vec<HermitianInvolution> = (0..4)
                .map(|k| {
                    HermitianInvolution::new(involution_matrix(
                        dimension,
                        &x[k * nrot..(k + 1) * nrot],
                        &sigs[k],
                    ))
                })
                .collect::<Result<_>>()?;
            Ok(RestartOutcome {
                value: -fx,
                index: r,
                witness: witness.try_into().expect("length 4"),
            })
        })
        .collect();
    let mut best = best_outcome(outcomes)?;

    // the tensor witness is a feasible point of the unconstrained
    // scenario; keep it as a floor at dimension 4
    if dimension == 4 {
        let w = tensor_witness();
        let v = bell_operator_norm(&w[0], &w[1], &w[2], &w[3])?;
        if v > best.value {
            best = RestartOutcome {
                value: v,
                index: restarts,
                witness: w,
            };
        }
    }
    Ok(BellSearchResult {
        scenario: CommutationScenario::Free,
        dimension,
        achieved_max: best.value,
        witness: best.witness,
        restarts_used: restarts,
    })
}
