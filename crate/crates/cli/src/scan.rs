//! Bloch-sphere scan data for qubit channels.
//!
//! Two CSV sections separated by a blank line:
//!
//! 1. `theta_bloch_deg,phi_deg,relative_entropy_bits`: the distance
//!    `D(ℰ(ψ)‖ρ*)` of each pure-input output from the certified average
//!    output, over a polar/azimuth grid. Preceded by a `# chi_star_bits=` line.
//! 2. `hilbert_angle_deg,chi_bits`: the best equal-weight two-state χ for
//!    each angle `arccos |⟨φ₀|φ₁⟩|` between the inputs. Pairs are searched on
//!    great circles through the z axis.

use std::fmt::Write as _;

use holevo::ensembles::holevo_chi;
use holevo::opalg::relative_entropy;
use holevo::optimizer::PureState;
use holevo::{Bits, CapacityReport, Ensemble, KrausChannel};
use rayon::prelude::*;

use crate::{CliError, CliResult};

/// Azimuths of the great circles searched for the pair landscape.
const PLANE_AZIMUTHS_DEG: [f64; 6] = [0.0, 30.0, 60.0, 90.0, 120.0, 150.0];

/// `0, step, 2·step, …` up to `limit` (inclusive or not).
pub fn grid(step: f64, limit: f64, inclusive: bool) -> Vec<f64> {
    let mut out = Vec::new();
    let mut i = 0usize;
    loop {
        let x = step * i as f64;
        let beyond = if inclusive { x > limit + 1e-9 } else { x >= limit - 1e-9 };
        if beyond {
            return out;
        }
        out.push(x);
        i += 1;
    }
}

fn format_bits(b: Bits) -> String {
    match b {
        Bits::Finite(v) => format!("{v:.17e}"),
        Bits::Infinite => "infinite".into(),
    }
}

fn cli_err(context: &str) -> impl FnOnce(holevo::Error) -> CliError + '_ {
    move |source| CliError::Holevo {
        context: context.to_string(),
        source,
    }
}

/// Best equal-weight two-state χ with inputs at Hilbert angle `alpha_deg`.
pub fn pair_chi(ch: &KrausChannel, alpha_deg: f64, resolution: f64) -> holevo::Result<f64> {
    let separation = 2.0 * alpha_deg.to_radians();
    let mut best = 0.0f64;
    for &plane in &PLANE_AZIMUTHS_DEG {
        let phi = plane.to_radians();
        for theta0 in grid(resolution, 360.0, false) {
            let t0 = theta0.to_radians();
            let a = PureState::from_bloch_angles(t0, phi);
            let b = PureState::from_bloch_angles(t0 + separation, phi);
            let e = Ensemble::uniform(vec![ch.apply_pure(a.vector())?, ch.apply_pure(b.vector())?])?;
            best = best.max(holevo_chi(&e)?);
        }
    }
    Ok(best)
}

pub fn bloch_scan_csv(ch: &KrausChannel, report: &CapacityReport, resolution: f64) -> CliResult<String> {
    if !(resolution > 0.0 && resolution <= 180.0) {
        return Err(CliError::Usage(format!("--resolution must lie in (0, 180], got {resolution}")));
    }
    let rho_star = report.average_output();
    let thetas = grid(resolution, 180.0, true);
    let phis = grid(resolution, 360.0, false);

    let mut out = String::new();
    let _ = writeln!(out, "# chi_star_bits={:.17e}", report.chi_star);
    out.push_str("theta_bloch_deg,phi_deg,relative_entropy_bits\n");
    for &theta in &thetas {
        for &phi in &phis {
            let psi = PureState::from_bloch_angles(theta.to_radians(), phi.to_radians());
            let output = ch.apply_pure(psi.vector()).map_err(cli_err("scan"))?;
            let d = relative_entropy(&output, &rho_star).map_err(cli_err("scan"))?;
            let _ = writeln!(out, "{theta},{phi},{}", format_bits(d));
        }
    }

    out.push('\n');
    out.push_str("hilbert_angle_deg,chi_bits\n");
    let angles = grid(resolution, 90.0, true);
    let values = angles
        .par_iter()
        .map(|&alpha| pair_chi(ch, alpha, resolution))
        .collect::<holevo::Result<Vec<f64>>>()
        .map_err(cli_err("pair landscape"))?;
    for (alpha, chi) in angles.iter().zip(values) {
        let _ = writeln!(out, "{alpha},{chi:.17e}");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use holevo::channels::amplitude_damping;

    #[test]
    fn grid_sizes() {
        assert_eq!(grid(10.0, 180.0, true).len(), 19);
        assert_eq!(grid(10.0, 360.0, false).len(), 36);
        assert_eq!(grid(1.0, 90.0, true).len(), 91);
        assert_eq!(grid(7.0, 180.0, true).last().copied(), Some(175.0));
    }

    #[test]
    fn orthogonal_pair_value() {
        let ch = amplitude_damping(0.5).unwrap();
        let chi = pair_chi(&ch, 90.0, 1.0).unwrap();
        assert!((chi - 0.4567).abs() < 5e-4, "{chi}");
    }
}
