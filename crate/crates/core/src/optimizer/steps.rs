//! The two ascent moves of the optimizer: a closed-form reweighting of the
//! probabilities and a derivative-free local search over the pure inputs.

use num_complex::Complex64;
use rand::Rng;

use crate::bits::Bits;
use crate::channels::KrausChannel;
use crate::ensembles::{check_distribution, chi_from_entropies};
use crate::error::{Error, Result};
use crate::opalg::{relative_entropy, von_neumann_entropy, CVector, DensityOperator};
use crate::random::complex_gaussian;

use super::PureState;

/// Probability given to a member that lies outside the current average's
/// support before renormalizing.
pub const SUPPORT_FLOOR: f64 = 1e-6;
/// Allowed per-step decrease of χ from rounding.
pub const ASCENT_SLACK: f64 = 1e-9;

const MAX_HALVINGS: usize = 30;
const STEP_GROW: f64 = 1.5;
const STEP_SHRINK: f64 = 0.9036; // 1.5^(-1/4), balances at a 1/5 success rate
const STEP_MAX: f64 = 1.0;
const STEP_MIN: f64 = 1e-13;

/// Initial tangent step for the input local search.
pub const INITIAL_STEP: f64 = 0.2;

/// Channel outputs of the current inputs with their entropies cached.
#[derive(Debug, Clone)]
pub(crate) struct Signals {
    pub inputs: Vec<PureState>,
    pub outputs: Vec<DensityOperator>,
    pub entropies: Vec<f64>,
}

impl Signals {
    pub fn new(ch: &KrausChannel, inputs: Vec<PureState>) -> Result<Self> {
        let outputs = inputs
            .iter()
            .map(|psi| ch.apply_pure(psi.vector()))
            .collect::<Result<Vec<_>>>()?;
        let entropies = outputs.iter().map(von_neumann_entropy).collect();
        Ok(Self {
            inputs,
            outputs,
            entropies,
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn average(&self, probs: &[f64]) -> Result<DensityOperator> {
        let dim = self.outputs[0].dim();
        DensityOperator::mixture(dim, probs.iter().copied().zip(&self.outputs))
    }

    pub fn chi(&self, probs: &[f64]) -> Result<f64> {
        let avg = self.average(probs)?;
        Ok(chi_from_entropies(
            von_neumann_entropy(&avg),
            probs.iter().copied().zip(self.entropies.iter().copied()),
        ))
    }

    /// χ with member `k`'s output replaced.
    fn chi_replacing(&self, probs: &[f64], k: usize, output: &DensityOperator, entropy: f64) -> Result<f64> {
        let dim = output.dim();
        let avg = DensityOperator::mixture(
            dim,
            probs
                .iter()
                .copied()
                .zip(&self.outputs)
                .enumerate()
                .map(|(j, (p, o))| (p, if j == k { output } else { o })),
        )?;
        Ok(chi_from_entropies(
            von_neumann_entropy(&avg),
            probs
                .iter()
                .copied()
                .zip(self.entropies.iter().copied())
                .enumerate()
                .map(|(j, (p, s))| (p, if j == k { entropy } else { s })),
        ))
    }
}

fn normalized(weights: Vec<f64>) -> Result<Vec<f64>> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::InvalidDistribution("all reweighting weights vanished".into()));
    }
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// One reweighting step on cached signals; returns the new probabilities
/// and their χ.
pub(crate) fn reweight(signals: &Signals, probs: &[f64]) -> Result<(Vec<f64>, f64)> {
    let avg = signals.average(probs)?;
    let chi_old = signals.chi(probs)?;
    let distances = signals
        .outputs
        .iter()
        .map(|o| relative_entropy(o, &avg))
        .collect::<Result<Vec<Bits>>>()?;

    let shift = distances
        .iter()
        .zip(probs)
        .filter(|(_, p)| **p > 0.0)
        .filter_map(|(d, _)| d.finite())
        .fold(f64::NEG_INFINITY, f64::max);
    let shift = if shift.is_finite() { shift } else { 0.0 };

    let mut proposal = normalized(
        distances
            .iter()
            .zip(probs)
            .map(|(d, p)| match d {
                Bits::Finite(v) => p * (v - shift).exp2(),
                Bits::Infinite => 0.0,
            })
            .collect(),
    )?;
    if distances.iter().any(|d| d.is_infinite()) {
        for (w, d) in proposal.iter_mut().zip(&distances) {
            if d.is_infinite() {
                *w = SUPPORT_FLOOR;
            }
        }
        proposal = normalized(proposal)?;
    }

    // Geometric mixing with the old distribution, halving the step until χ
    // does not decrease.
    let mut t = 1.0;
    for _ in 0..MAX_HALVINGS {
        let candidate = if t == 1.0 {
            proposal.clone()
        } else {
            normalized(
                probs
                    .iter()
                    .zip(&proposal)
                    .map(|(a, b)| a.powf(1.0 - t) * b.powf(t))
                    .collect(),
            )?
        };
        let chi_new = signals.chi(&candidate)?;
        if chi_new >= chi_old - ASCENT_SLACK {
            return Ok((candidate, chi_new));
        }
        t *= 0.5;
    }
    Ok((probs.to_vec(), chi_old))
}

/// Multiplies each probability by `2^{D(ℰ(ψ_k)‖ρ)}` and renormalizes, where
/// `ρ` is the current average output. χ does not decrease.
pub fn reweight_step(inputs: &[PureState], probs: &[f64], ch: &KrausChannel) -> Result<Vec<f64>> {
    check_distribution(probs, "probabilities")?;
    if inputs.len() != probs.len() {
        return Err(Error::DimensionMismatch {
            expected: inputs.len(),
            got: probs.len(),
        });
    }
    let signals = Signals::new(ch, inputs.to_vec())?;
    Ok(reweight(&signals, probs)?.0)
}

/// Random direction in the tangent space of the projective state at `psi`.
fn tangent_proposal<R: Rng + ?Sized>(psi: &CVector, step: f64, rng: &mut R) -> CVector {
    let xi = CVector::from_fn(psi.len(), |_, _| complex_gaussian(rng));
    let overlap = psi.dotc(&xi);
    let xi_perp = &xi - psi * overlap;
    let moved = psi + xi_perp * Complex64::from(step);
    let norm = moved.norm();
    moved / Complex64::from(norm)
}

/// One proposal per positively weighted member; a proposal is kept only if
/// χ strictly increases. Returns the updated χ.
pub(crate) fn improve<R: Rng + ?Sized>(
    ch: &KrausChannel,
    signals: &mut Signals,
    probs: &[f64],
    steps: &mut [f64],
    rng: &mut R,
) -> Result<f64> {
    let mut chi = signals.chi(probs)?;
    for k in 0..signals.len() {
        if probs[k] == 0.0 {
            continue;
        }
        let candidate = tangent_proposal(signals.inputs[k].vector(), steps[k], rng);
        let output = ch.apply_pure(&candidate)?;
        let entropy = von_neumann_entropy(&output);
        let chi_new = signals.chi_replacing(probs, k, &output, entropy)?;
        if chi_new > chi {
            chi = chi_new;
            signals.inputs[k] = PureState::new(candidate)?;
            signals.outputs[k] = output;
            signals.entropies[k] = entropy;
            steps[k] = (steps[k] * STEP_GROW).min(STEP_MAX);
        } else {
            steps[k] = (steps[k] * STEP_SHRINK).max(STEP_MIN);
        }
    }
    Ok(chi)
}

/// Perturbs each input along a random tangent direction of size `steps[k]`,
/// keeping moves that increase χ and adapting the step sizes.
pub fn state_improvement_step<R: Rng + ?Sized>(
    inputs: &[PureState],
    probs: &[f64],
    ch: &KrausChannel,
    rng: &mut R,
    steps: &mut [f64],
) -> Result<Vec<PureState>> {
    check_distribution(probs, "probabilities")?;
    if inputs.len() != probs.len() || steps.len() != probs.len() {
        return Err(Error::DimensionMismatch {
            expected: inputs.len(),
            got: probs.len().min(steps.len()),
        });
    }
    let mut signals = Signals::new(ch, inputs.to_vec())?;
    improve(ch, &mut signals, probs, steps, rng)?;
    Ok(signals.inputs)
}

/// Local ascent of `f` over pure states from `start`; returns the best state
/// and value. Ties keep the earlier state.
pub(crate) fn ascend<R, F>(start: PureState, start_value: Bits, iters: usize, rng: &mut R, f: F) -> Result<(PureState, Bits)>
where
    R: Rng + ?Sized,
    F: Fn(&CVector) -> Result<Bits>,
{
    let mut best = start;
    let mut best_value = start_value;
    let mut step = INITIAL_STEP;
    for _ in 0..iters {
        if best_value.is_infinite() {
            break;
        }
        let candidate = tangent_proposal(best.vector(), step, rng);
        let value = f(&candidate)?;
        if value > best_value {
            best = PureState::new(candidate)?;
            best_value = value;
            step = (step * STEP_GROW).min(STEP_MAX);
        } else {
            step = (step * STEP_SHRINK).max(STEP_MIN);
        }
    }
    Ok((best, best_value))
}
