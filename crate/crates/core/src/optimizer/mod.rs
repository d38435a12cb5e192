//! Maximization of χ over pure-input ensembles of a channel.
//!
//! Each restart alternates [`reweight_step`] (optimal probabilities for the
//! current signals) with [`state_improvement_step`] (local search on the
//! pure inputs). Both moves never decrease χ. A restart stops once χ has
//! stalled and its ensemble passes [`certify`], or after `max_iters`.
//! Restarts run in parallel on the current rayon pool and the best one wins.

mod certify;
mod steps;

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::ensembles::{prune, Ensemble, DEFAULT_P_MIN};
use crate::error::{Error, Result};
use crate::opalg::{max_abs_diff, CVector, DensityOperator};
use crate::random::{haar_vector, rng_from_seed};

pub use certify::{certify, evaluate_minmax, farthest_output, Certificate, FarthestOutput};
pub use steps::{reweight_step, state_improvement_step, ASCENT_SLACK, INITIAL_STEP, SUPPORT_FLOOR};

use steps::{improve, reweight, Signals};

/// Consecutive sub-`tol_chi` iterations before a restart may stop.
const STALL_WINDOW: usize = 10;
/// Minimum iterations between two in-loop certification attempts.
const CERT_INTERVAL: usize = 25;
/// Members whose outputs agree to this entrywise are merged in the result.
const MERGE_TOL: f64 = 1e-9;

/// A unit vector with its global phase fixed so that the first
/// non-negligible component is real and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState(CVector);

impl PureState {
    pub fn new(v: CVector) -> Result<Self> {
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        let mut v = v / Complex64::from(norm);
        if let Some(lead) = v.iter().copied().find(|z| z.norm() > 1e-12) {
            let phase = lead.conj() / lead.norm();
            v *= phase;
        }
        Ok(Self(v))
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[index] = Complex64::from(1.0);
        Self(v)
    }

    pub fn vector(&self) -> &CVector {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Angle `arccos |⟨a|b⟩|` in degrees.
    pub fn hilbert_angle_deg(&self, other: &PureState) -> f64 {
        self.0.dotc(&other.0).norm().min(1.0).acos().to_degrees()
    }

    /// Bloch vector `(x, y, z)` of a qubit state, `|↑⟩ = |0⟩` at `z = +1`.
    pub fn bloch_vector(&self) -> Option<[f64; 3]> {
        if self.dim() != 2 {
            return None;
        }
        let (a, b) = (self.0[0], self.0[1]);
        let off = a.conj() * b;
        Some([2.0 * off.re, 2.0 * off.im, a.norm_sqr() - b.norm_sqr()])
    }

    /// Qubit state at Bloch polar angle `theta` and azimuth `phi` (radians).
    pub fn from_bloch_angles(theta: f64, phi: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Self(CVector::from_vec(vec![
            Complex64::from(c),
            Complex64::from_polar(s, phi),
        ]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Members per restart; `None` means `d²`.
    pub max_members: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
    pub tol_chi: f64,
    pub tol_cert: f64,
    pub max_iters: usize,
    pub probe_count: usize,
    pub local_refine_iters: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_members: None,
            restarts: 16,
            seed: 0,
            tol_chi: 1e-7,
            tol_cert: 1e-5,
            max_iters: 2000,
            probe_count: 512,
            local_refine_iters: 200,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(m) = self.max_members {
            if m < 2 {
                return Err(Error::OutOfRange { name: "max_members", value: m as f64 });
            }
        }
        for (name, v) in [
            ("restarts", self.restarts),
            ("max_iters", self.max_iters),
            ("probe_count", self.probe_count),
            ("local_refine_iters", self.local_refine_iters),
        ] {
            if v == 0 {
                return Err(Error::OutOfRange { name, value: 0.0 });
            }
        }
        for (name, v) in [("tol_chi", self.tol_chi), ("tol_cert", self.tol_cert)] {
            if !(v > 0.0) {
                return Err(Error::OutOfRange { name, value: v });
            }
        }
        Ok(())
    }

    pub fn members_for(&self, dim: usize) -> usize {
        self.max_members.unwrap_or(dim * dim)
    }
}

/// One weighted pure input and its channel output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    pub probability: f64,
    pub input: PureState,
    pub output: DensityOperator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub index: usize,
    pub chi: f64,
    pub iterations: usize,
    pub members: usize,
    pub certified: bool,
    pub monotone: bool,
}

/// Angles between the two inputs of a two-member qubit ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairGeometry {
    /// `arccos |⟨φ₀|φ₁⟩|`.
    pub hilbert_angle_deg: f64,
    /// Angle between the Bloch vectors, twice the Hilbert angle.
    pub bloch_angle_deg: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub chi_star: f64,
    pub ensemble: Vec<Signal>,
    pub certificate: Certificate,
    pub iterations: usize,
    pub trace: Vec<(usize, f64)>,
    pub converged: bool,
    /// Bound on the χ change from dropping members below `p_min`.
    pub prune_shift_bound: f64,
    pub geometry: Option<PairGeometry>,
    pub restarts: Vec<RestartSummary>,
}

impl CapacityReport {
    pub fn output_ensemble(&self) -> Ensemble {
        Ensemble::new(self.ensemble.iter().map(|s| (s.probability, s.output.clone())).collect())
            .expect("report ensemble is valid")
    }

    pub fn average_output(&self) -> DensityOperator {
        self.output_ensemble().average_state()
    }

    pub fn inputs(&self) -> Vec<&PureState> {
        self.ensemble.iter().map(|s| &s.input).collect()
    }
}

impl fmt::Display for CapacityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "chi* = {:.6} bits, {} members, certificate {}",
            self.chi_star,
            self.ensemble.len(),
            if self.certificate.valid { "VALID" } else { "INVALID" }
        )
    }
}

struct RestartOutcome {
    index: usize,
    signals: Signals,
    probs: Vec<f64>,
    chi: f64,
    trace: Vec<(usize, f64)>,
    iterations: usize,
    certified: bool,
}

impl RestartOutcome {
    fn significant_members(&self) -> usize {
        self.probs.iter().filter(|&&p| p > DEFAULT_P_MIN).count()
    }

    fn monotone(&self) -> bool {
        self.trace.windows(2).all(|w| w[1].1 >= w[0].1 - ASCENT_SLACK)
    }
}

fn initial_inputs(dim: usize, members: usize, restart: usize, seed: u64) -> Vec<PureState> {
    if restart == 0 {
        (0..dim.min(members)).map(|i| PureState::basis(dim, i)).collect()
    } else {
        let mut rng = rng_from_seed(seed);
        (0..members)
            .map(|_| PureState::new(haar_vector(dim, &mut rng)).expect("unit vector"))
            .collect()
    }
}

fn output_ensemble(signals: &Signals, probs: &[f64]) -> Result<Ensemble> {
    Ensemble::new(probs.iter().copied().zip(signals.outputs.iter().cloned()).collect())
}

fn run_restart(ch: &KrausChannel, cfg: &OptimizerConfig, index: usize) -> Result<RestartOutcome> {
    let dim = ch.dim();
    let seed = cfg.seed.wrapping_add(index as u64);
    let inputs = initial_inputs(dim, cfg.members_for(dim), index, seed);
    let n = inputs.len();
    let mut signals = Signals::new(ch, inputs)?;
    let mut probs = vec![1.0 / n as f64; n];
    let mut steps = vec![INITIAL_STEP; n];
    let mut rng = crate::random::rng_for_stream(seed, 1);

    let mut chi = signals.chi(&probs)?;
    let mut trace = vec![(0, chi)];
    let mut stalled = 0;
    let mut last_cert: Option<usize> = None;
    let mut certified = false;
    let mut iterations = 0;

    for iter in 1..=cfg.max_iters {
        iterations = iter;
        let (new_probs, _) = reweight(&signals, &probs)?;
        probs = new_probs;
        let chi_new = improve(ch, &mut signals, &probs, &mut steps, &mut rng)?;
        trace.push((iter, chi_new));
        if chi_new - chi < cfg.tol_chi {
            stalled += 1;
        } else {
            stalled = 0;
        }
        chi = chi_new;

        let due = last_cert.is_none_or(|at| iter - at >= CERT_INTERVAL);
        if stalled >= STALL_WINDOW && due {
            last_cert = Some(iter);
            if certify(ch, &output_ensemble(&signals, &probs)?, cfg)?.valid {
                certified = true;
                break;
            }
        }
    }

    Ok(RestartOutcome {
        index,
        signals,
        probs,
        chi,
        trace,
        iterations,
        certified,
    })
}

/// Combines members with coincident outputs, keeping the input of the
/// heavier one, and drops zero-weight members.
fn merge_coincident(signals: &Signals, probs: &[f64]) -> Vec<(f64, PureState, DensityOperator)> {
    let mut merged: Vec<(f64, PureState, DensityOperator)> = Vec::new();
    #[allow(clippy::needless_range_loop)]
    for k in 0..signals.len() {
        if probs[k] == 0.0 {
            continue;
        }
        let output = &signals.outputs[k];
        match merged
            .iter_mut()
            .find(|(_, _, o)| max_abs_diff(o.matrix(), output.matrix()) <= MERGE_TOL)
        {
            Some(slot) => {
                if probs[k] > slot.0 {
                    slot.1 = signals.inputs[k].clone();
                }
                slot.0 += probs[k];
            }
            None => merged.push((probs[k], signals.inputs[k].clone(), output.clone())),
        }
    }
    merged
}

fn pair_geometry(ensemble: &[Signal]) -> Option<PairGeometry> {
    match ensemble {
        [a, b] if a.input.dim() == 2 => {
            let hilbert = a.input.hilbert_angle_deg(&b.input);
            Some(PairGeometry {
                hilbert_angle_deg: hilbert,
                bloch_angle_deg: 2.0 * hilbert,
                note: "angle between the inputs is reported both in Hilbert space and on the Bloch sphere; \
                       which reading a quoted angle refers to needs human review"
                    .into(),
            })
        }
        _ => None,
    }
}

/// Maximizes χ over ensembles of channel outputs of pure inputs.
///
/// The winning restart has the largest χ; restarts within `tol_chi` of it
/// are ranked by fewer significant members, then lower index.
pub fn optimize_capacity(ch: &KrausChannel, cfg: &OptimizerConfig) -> Result<CapacityReport> {
    cfg.validate()?;
    let outcomes = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| run_restart(ch, cfg, i))
        .collect::<Result<Vec<_>>>()?;

    let best_chi = outcomes.iter().map(|o| o.chi).fold(f64::NEG_INFINITY, f64::max);
    let winner = outcomes
        .iter()
        .filter(|o| o.chi >= best_chi - cfg.tol_chi)
        .min_by_key(|o| (o.significant_members(), o.index))
        .expect("at least one restart");

    let restarts = outcomes
        .iter()
        .map(|o| RestartSummary {
            index: o.index,
            chi: o.chi,
            iterations: o.iterations,
            members: o.significant_members(),
            certified: o.certified,
            monotone: o.monotone(),
        })
        .collect();

    let merged = merge_coincident(&winner.signals, &winner.probs);
    let with_outputs = Ensemble::new(merged.iter().map(|(p, _, o)| (*p, o.clone())).collect())?;
    let pruned = prune(&with_outputs, DEFAULT_P_MIN)?;
    let kept_mass: f64 = merged.iter().filter(|(p, _, _)| *p >= DEFAULT_P_MIN).map(|(p, _, _)| p).sum();
    let ensemble: Vec<Signal> = merged
        .into_iter()
        .filter(|(p, _, _)| *p >= DEFAULT_P_MIN)
        .map(|(p, input, output)| Signal {
            probability: p / kept_mass,
            input,
            output,
        })
        .collect();

    let certificate = certify(ch, &pruned.ensemble, cfg)?;
    Ok(CapacityReport {
        chi_star: certificate.chi_star,
        geometry: pair_geometry(&ensemble),
        ensemble,
        converged: certificate.valid,
        certificate,
        iterations: winner.iterations,
        trace: winner.trace.clone(),
        prune_shift_bound: pruned.chi_shift_bound,
        restarts,
    })
}
