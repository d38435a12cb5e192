//! Numerical optimality certificates.
//!
//! An ensemble of channel outputs with average `ρ` is optimal exactly when no
//! available output lies farther than χ from `ρ` in relative entropy. The
//! certificate estimates `max_ψ D(ℰ(ψ)‖ρ)` by Haar probing followed by local
//! ascent from the best probe, and also checks that every weighted member
//! sits at distance χ and that `ρ` spans the whole output support.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::channels::{sample_pure_inputs, KrausChannel};
use crate::ensembles::{average_state, holevo_chi, Ensemble, DEFAULT_P_MIN};
use crate::error::{Error, Result};
use crate::opalg::{relative_entropy, DensityOperator};
use crate::random::rng_for_stream;

use super::steps::ascend;
use super::{OptimizerConfig, PureState};

const ASCENT_STREAM: u64 = 0x5eed_a5ce;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub chi_star: f64,
    /// `max_ψ D(ℰ(ψ)‖ρ) - χ` over the probes and their refinement.
    pub max_distance_residual: Bits,
    pub worst_probe: PureState,
    /// `max_{p_k > p_min} |D(ρ_k‖ρ) - χ|`.
    pub equal_distance_deviation: Bits,
    pub support_rank_avg: usize,
    pub support_rank_set: usize,
    /// The largest distance found, i.e. the inner maximum of the min-max
    /// formula evaluated at the ensemble's average.
    pub minmax_value: Bits,
    pub tol_cert: f64,
    pub valid: bool,
}

impl Certificate {
    pub fn is_valid(&self) -> bool {
        self.valid
    }
}

/// Farthest channel output from `sigma` found by probing and local ascent.
#[derive(Debug, Clone, PartialEq)]
pub struct FarthestOutput {
    pub input: PureState,
    pub distance: Bits,
}

/// Estimates `max_ψ D(ℰ(ψ)‖σ)`. The first probe attaining the maximum is
/// refined; an infinite distance stops the search immediately.
pub fn farthest_output(ch: &KrausChannel, sigma: &DensityOperator, cfg: &OptimizerConfig) -> Result<FarthestOutput> {
    if sigma.dim() != ch.dim() {
        return Err(Error::DimensionMismatch {
            expected: ch.dim(),
            got: sigma.dim(),
        });
    }
    let distance = |psi: &crate::opalg::CVector| -> Result<Bits> { relative_entropy(&ch.apply_pure(psi)?, sigma) };

    let probes = sample_pure_inputs(ch.dim(), cfg.probe_count, cfg.seed);
    let values = probes.par_iter().map(&distance).collect::<Result<Vec<Bits>>>()?;
    let (best_idx, best_value) = values
        .iter()
        .enumerate()
        .fold((0, values[0]), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    let start = PureState::new(probes[best_idx].clone())?;
    if best_value.is_infinite() {
        return Ok(FarthestOutput {
            input: start,
            distance: best_value,
        });
    }
    let mut rng = rng_for_stream(cfg.seed, ASCENT_STREAM);
    let (input, distance) = ascend(start, best_value, cfg.local_refine_iters, &mut rng, distance)?;
    Ok(FarthestOutput { input, distance })
}

/// Checks the maximal-distance, equal-distance and maximal-support
/// conditions for `e`, whose members are taken as given.
pub fn certify(ch: &KrausChannel, e: &Ensemble, cfg: &OptimizerConfig) -> Result<Certificate> {
    if e.dim() != ch.dim() {
        return Err(Error::DimensionMismatch {
            expected: ch.dim(),
            got: e.dim(),
        });
    }
    let chi = holevo_chi(e)?;
    let avg = average_state(e);
    let farthest = farthest_output(ch, &avg, cfg)?;
    let max_distance_residual = farthest.distance - chi;

    let mut equal_distance_deviation = Bits::ZERO;
    for (p, s) in e.members() {
        if *p <= DEFAULT_P_MIN {
            continue;
        }
        let dev = match relative_entropy(s, &avg)? {
            Bits::Finite(d) => Bits::Finite((d - chi).abs()),
            Bits::Infinite => Bits::Infinite,
        };
        equal_distance_deviation = equal_distance_deviation.max(dev);
    }

    let support_rank_avg = avg.rank();
    let support_rank_set = ch.output_support_rank();
    let tol = Bits::Finite(cfg.tol_cert);
    let valid = max_distance_residual <= tol && equal_distance_deviation <= tol && support_rank_avg == support_rank_set;
    Ok(Certificate {
        chi_star: chi,
        max_distance_residual,
        worst_probe: farthest.input,
        equal_distance_deviation,
        support_rank_avg,
        support_rank_set,
        minmax_value: farthest.distance,
        tol_cert: cfg.tol_cert,
        valid,
    })
}

/// `min_σ max_ψ D(ℰ(ψ)‖σ)` over the candidate averages.
pub fn evaluate_minmax(ch: &KrausChannel, candidate_sigmas: &[DensityOperator], cfg: &OptimizerConfig) -> Result<Bits> {
    if candidate_sigmas.is_empty() {
        return Err(Error::Empty("candidate list"));
    }
    candidate_sigmas
        .iter()
        .map(|sigma| farthest_output(ch, sigma, cfg).map(|f| f.distance))
        .try_fold(Bits::Infinite, |acc, d| d.map(|d| acc.min(d)))
}
