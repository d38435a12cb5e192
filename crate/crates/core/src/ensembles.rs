//! Signal ensembles and the Holevo quantity.
//!
//! χ is evaluated in two independent ways, `S(ρ) - Σ p_k S(ρ_k)` and
//! `Σ p_k D(ρ_k‖ρ)`, and the two must agree to [`EPS_CHI`]. The same
//! relative-entropy bookkeeping gives the decomposition
//! `Σ p_k D(ρ_k‖σ) = χ + D(ρ‖σ)` and two-sided bounds on the change of χ when
//! new members are mixed in.

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::opalg::{max_abs_diff, relative_entropy, von_neumann_entropy, CMatrix, DensityOperator};

/// Tolerance on the sum of probabilities.
pub const EPS_PROB: f64 = 1e-10;
/// Required agreement between the entropic and relative-entropy forms of χ.
pub const EPS_CHI: f64 = 1e-8;
/// Default pruning threshold for optimizer-facing ensembles.
pub const DEFAULT_P_MIN: f64 = 1e-9;

// Members lighter than this may register as leaking out of the average's
// support through eigenvalue thresholding; their term in the cross-check is
// at most p·log₂(1/p) and is dropped.
const NEGLIGIBLE_WEIGHT: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    dim: usize,
    members: Vec<(f64, DensityOperator)>,
}

pub(crate) fn check_distribution(probs: &[f64], what: &str) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution(format!("{what} is empty")));
    }
    if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::InvalidDistribution(format!("{what} has entry {p}")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > EPS_PROB {
        return Err(Error::InvalidDistribution(format!("{what} sums to {total}")));
    }
    Ok(())
}

fn check_dims(dim: usize, states: &[&DensityOperator]) -> Result<()> {
    for s in states {
        if s.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: s.dim(),
            });
        }
    }
    Ok(())
}

impl Ensemble {
    pub fn new(members: Vec<(f64, DensityOperator)>) -> Result<Self> {
        let first = members.first().ok_or(Error::Empty("ensemble"))?;
        let dim = first.1.dim();
        let probs: Vec<f64> = members.iter().map(|(p, _)| *p).collect();
        check_distribution(&probs, "ensemble probabilities")?;
        check_dims(dim, &members.iter().map(|(_, s)| s).collect::<Vec<_>>())?;
        Ok(Self { dim, members })
    }

    /// Equal-weight ensemble over `states`.
    pub fn uniform(states: Vec<DensityOperator>) -> Result<Self> {
        let n = states.len() as f64;
        Self::new(states.into_iter().map(|s| (1.0 / n, s)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[(f64, DensityOperator)] {
        &self.members
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.members.iter().map(|(p, _)| *p).collect()
    }

    pub fn states(&self) -> impl Iterator<Item = &DensityOperator> {
        self.members.iter().map(|(_, s)| s)
    }

    pub fn into_members(self) -> Vec<(f64, DensityOperator)> {
        self.members
    }

    pub fn average_state(&self) -> DensityOperator {
        average_state(self)
    }
}

/// `Σ p_k ρ_k`.
pub fn average_state(e: &Ensemble) -> DensityOperator {
    DensityOperator::mixture(e.dim, e.members.iter().map(|(p, s)| (*p, s)))
        .expect("convex mixture of valid states is valid")
}

/// `S(ρ) - Σ p_k S(ρ_k)` for precomputed member entropies.
pub(crate) fn chi_from_entropies(avg_entropy: f64, weighted: impl Iterator<Item = (f64, f64)>) -> f64 {
    let inner: f64 = weighted.filter(|(p, _)| *p > 0.0).map(|(p, s)| p * s).sum();
    (avg_entropy - inner).max(0.0)
}

/// `Σ p_k D(ρ_k‖ρ)` against the ensemble's own average.
fn chi_relative_form(e: &Ensemble, avg: &DensityOperator) -> Result<f64> {
    let mut total = 0.0;
    for (p, s) in &e.members {
        if *p == 0.0 {
            continue;
        }
        match relative_entropy(s, avg)? {
            Bits::Finite(d) => total += p * d,
            Bits::Infinite if *p <= NEGLIGIBLE_WEIGHT => {}
            Bits::Infinite => {
                return Err(Error::Numerics(format!(
                    "member with weight {p} lies outside the support of the average state"
                )))
            }
        }
    }
    Ok(total)
}

/// Holevo quantity in bits, cross-checked against its relative-entropy form.
pub fn holevo_chi(e: &Ensemble) -> Result<f64> {
    let avg = average_state(e);
    let chi = chi_from_entropies(
        von_neumann_entropy(&avg),
        e.members.iter().map(|(p, s)| (*p, von_neumann_entropy(s))),
    );
    let relative = chi_relative_form(e, &avg)?;
    if (chi - relative).abs() > EPS_CHI {
        return Err(Error::Numerics(format!(
            "entropic chi {chi} disagrees with relative-entropy chi {relative}"
        )));
    }
    Ok(chi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DonaldDecomposition {
    /// `Σ p_k D(ρ_k‖σ)`.
    pub avg_distance: Bits,
    pub chi: f64,
    /// `D(ρ‖σ)` for the average state `ρ`.
    pub gap: Bits,
}

/// Splits the average distance of the members from `sigma` into χ plus the
/// distance of the average state from `sigma`, verifying the identity.
pub fn donald_decomposition(e: &Ensemble, sigma: &DensityOperator) -> Result<DonaldDecomposition> {
    if sigma.dim() != e.dim {
        return Err(Error::DimensionMismatch {
            expected: e.dim,
            got: sigma.dim(),
        });
    }
    let chi = holevo_chi(e)?;
    let avg = average_state(e);
    let gap = relative_entropy(&avg, sigma)?;
    let avg_distance: Bits = e
        .members
        .iter()
        .map(|(p, s)| relative_entropy(s, sigma).map(|d| d.scale(*p)))
        .sum::<Result<Bits>>()?;
    match (avg_distance, gap) {
        (Bits::Finite(lhs), Bits::Finite(g)) if (lhs - chi - g).abs() <= EPS_CHI => {}
        (Bits::Infinite, Bits::Infinite) => {}
        _ => {
            return Err(Error::Numerics(format!(
                "average distance {avg_distance} != chi {chi} + gap {gap}"
            )))
        }
    }
    Ok(DonaldDecomposition {
        avg_distance,
        chi,
        gap,
    })
}

fn check_additions(dim: usize, additions: &[(f64, DensityOperator)]) -> Result<()> {
    let q: Vec<f64> = additions.iter().map(|(q, _)| *q).collect();
    check_distribution(&q, "addition weights")?;
    check_dims(dim, &additions.iter().map(|(_, s)| s).collect::<Vec<_>>())
}

/// `{((1-η)p_k, ρ_k)} ∪ {(η q_a, ρ_0a)}`.
pub fn modify_ensemble(e: &Ensemble, additions: &[(f64, DensityOperator)], eta: f64) -> Result<Ensemble> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::OutOfRange { name: "eta", value: eta });
    }
    check_additions(e.dim, additions)?;
    let members = e
        .members
        .iter()
        .map(|(p, s)| ((1.0 - eta) * p, s.clone()))
        .chain(additions.iter().map(|(q, s)| (eta * q, s.clone())))
        .collect();
    Ensemble::new(members)
}

/// Lower and upper bounds on `χ(modified) - χ(original)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaChiBounds {
    /// `η (Σ q_a D(ρ_0a‖ρ') - χ)`, always finite.
    pub lower: f64,
    /// `η (Σ q_a D(ρ_0a‖ρ) - χ)`, infinite when an addition leaks outside
    /// the support of the original average.
    pub upper: Bits,
}

impl DeltaChiBounds {
    /// Whether `lower - slack ≤ delta ≤ upper + slack`.
    pub fn contains(&self, delta: f64, slack: f64) -> bool {
        self.lower - slack <= delta && Bits::Finite(delta) <= self.upper + slack
    }
}

pub fn delta_chi_bounds(e: &Ensemble, additions: &[(f64, DensityOperator)], eta: f64) -> Result<DeltaChiBounds> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::OutOfRange { name: "eta", value: eta });
    }
    check_additions(e.dim, additions)?;
    let chi = holevo_chi(e)?;
    let avg = average_state(e);
    let added = DensityOperator::mixture(e.dim, additions.iter().map(|(q, s)| (*q, s)))?;
    let modified_avg = DensityOperator::mixture(e.dim, [(1.0 - eta, &avg), (eta, &added)])?;

    let mut to_modified = Bits::ZERO;
    let mut to_original = Bits::ZERO;
    for (q, s) in additions {
        to_modified = to_modified + relative_entropy(s, &modified_avg)?.scale(*q);
        to_original = to_original + relative_entropy(s, &avg)?.scale(*q);
    }
    let lower = match to_modified {
        Bits::Finite(v) => eta * (v - chi),
        Bits::Infinite => {
            return Err(Error::Numerics(
                "addition weight too small to resolve its support in the modified average".into(),
            ))
        }
    };
    let upper = (to_original - chi).scale(eta);
    Ok(DeltaChiBounds { lower, upper })
}

/// `χ(modified) - χ(original)` by direct recomputation.
pub fn delta_chi_actual(e: &Ensemble, additions: &[(f64, DensityOperator)], eta: f64) -> Result<f64> {
    Ok(holevo_chi(&modify_ensemble(e, additions, eta)?)? - holevo_chi(e)?)
}

/// Replaces member `k` by the parts `(p_k q_j, ρ_kj)` of a convex
/// decomposition of `ρ_k`.
pub fn refine_member(e: &Ensemble, k: usize, parts: &[(f64, DensityOperator)]) -> Result<Ensemble> {
    let (pk, target) = e.members.get(k).ok_or(Error::IndexOutOfBounds {
        index: k,
        len: e.members.len(),
    })?;
    let q: Vec<f64> = parts.iter().map(|(q, _)| *q).collect();
    check_distribution(&q, "refinement weights")?;
    check_dims(e.dim, &parts.iter().map(|(_, s)| s).collect::<Vec<_>>())?;
    let mut recombined = CMatrix::zeros(e.dim, e.dim);
    for (q, s) in parts {
        recombined += s.matrix() * num_complex::Complex64::from(*q);
    }
    let deviation = max_abs_diff(&recombined, target.matrix());
    if deviation > 1e-8 {
        return Err(Error::BadDecomposition { deviation });
    }
    let mut members = Vec::with_capacity(e.members.len() + parts.len() - 1);
    members.extend(e.members[..k].iter().cloned());
    members.extend(parts.iter().map(|(q, s)| (pk * q, s.clone())));
    members.extend(e.members[k + 1..].iter().cloned());
    Ensemble::new(members)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pruned {
    pub ensemble: Ensemble,
    pub removed_mass: f64,
    /// Upper bound on `|χ(pruned) - χ(original)|`.
    pub chi_shift_bound: f64,
}

fn binary_entropy(m: f64) -> f64 {
    [m, 1.0 - m]
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum()
}

/// Drops members with `p_k < p_min` and renormalizes.
///
/// Writing the original ensemble as a two-way mixture of the kept part
/// (weight `1-m`) and the removed part (weight `m`), χ splits into the
/// weighted χ of each part plus the χ of the two part-averages. The latter is
/// at most `h₂(m)` and each part's χ is at most `log₂ d`, so
/// `|Δχ| ≤ m log₂ d + h₂(m)`.
pub fn prune(e: &Ensemble, p_min: f64) -> Result<Pruned> {
    if !(p_min >= 0.0) {
        return Err(Error::OutOfRange { name: "p_min", value: p_min });
    }
    let kept: Vec<&(f64, DensityOperator)> = e.members.iter().filter(|(p, _)| *p >= p_min).collect();
    if kept.is_empty() {
        return Err(Error::Empty("pruned ensemble"));
    }
    if kept.len() == e.members.len() {
        return Ok(Pruned {
            ensemble: e.clone(),
            removed_mass: 0.0,
            chi_shift_bound: 0.0,
        });
    }
    let kept_mass: f64 = kept.iter().map(|(p, _)| p).sum();
    let removed_mass = (1.0 - kept_mass).max(0.0);
    let ensemble = Ensemble::new(kept.into_iter().map(|(p, s)| (p / kept_mass, s.clone())).collect())?;
    Ok(Pruned {
        ensemble,
        removed_mass,
        chi_shift_bound: removed_mass * (e.dim as f64).log2() + binary_entropy(removed_mass),
    })
}
