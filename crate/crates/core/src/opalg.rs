//! Dense complex operator algebra for density operators.
//!
//! Every [`DensityOperator`] carries its spectral decomposition, computed once
//! at construction, so entropy and relative entropy are spectral sums with no
//! further factorization.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::bits::Bits;
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Max entrywise anti-Hermitian part accepted for a density operator.
pub const EPS_HERM: f64 = 1e-10;
/// Max deviation of the trace from one.
pub const EPS_TRACE: f64 = 1e-10;
/// Most negative eigenvalue accepted as positive semidefinite.
pub const EPS_PSD: f64 = 1e-10;
/// Support threshold, relative to the largest eigenvalue. Also the largest
/// leakage `Tr[(I - Π_σ) ρ]` treated as zero.
pub const EPS_SUPP: f64 = 1e-12;

/// Reconstruction tolerance for a `dim`-dimensional eigensystem.
pub fn eps_recon(dim: usize) -> f64 {
    1e-9 * dim as f64
}

const EIGEN_MAX_SWEEPS: usize = 10_000;

/// Eigenvalues in descending order with matching orthonormal eigenvectors
/// stored as the columns of `eigenvectors`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, j: usize) -> CVector {
        self.eigenvectors.column(j).into_owned()
    }

    /// `Σ f(λ_j) v_j v_j†`.
    pub fn apply_function(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let d = self.dim();
        let mut out = CMatrix::zeros(d, d);
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let v = self.eigenvectors.column(j);
            out += (v * v.adjoint()) * Complex64::from(f(lambda));
        }
        out
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply_function(|x| x)
    }
}

pub fn ensure_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest entrywise `|M - M†|`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::from(0.5)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Eigensystem of a Hermitian matrix. The input is symmetrized as
/// `(M + M†)/2` before solving.
pub fn hermitian_eigensystem(m: &CMatrix) -> Result<SpectralDecomposition> {
    let d = ensure_square(m)?;
    if d == 0 {
        return Err(Error::Empty("matrix"));
    }
    let sym = hermitian_part(m);
    let eig = SymmetricEigen::try_new(sym.clone(), f64::EPSILON, EIGEN_MAX_SWEEPS).ok_or_else(
        || {
            let off_diag: f64 = sym
                .iter()
                .enumerate()
                .filter(|(idx, _)| idx % d != idx / d)
                .map(|(_, z)| z.norm_sqr())
                .sum();
            Error::EigenNoConvergence {
                residual: off_diag.sqrt(),
            }
        },
    )?;

    let mut order: Vec<usize> = (0..d).collect();
    // Stable sort keeps the solver's index order for ties.
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let eigenvalues = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let mut eigenvectors = CMatrix::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// A validated density operator together with its spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
    spectrum: SpectralDecomposition,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and positivity. The stored matrix is
    /// the Hermitian part of `matrix`.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        ensure_square(&matrix)?;
        let deviation = hermiticity_defect(&matrix);
        if deviation > EPS_HERM {
            return Err(Error::NotHermitian { deviation });
        }
        let matrix = hermitian_part(&matrix);
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > EPS_TRACE {
            return Err(Error::BadTrace { trace });
        }
        let spectrum = hermitian_eigensystem(&matrix)?;
        let min_eigenvalue = *spectrum.eigenvalues.last().expect("nonempty spectrum");
        if min_eigenvalue < -EPS_PSD {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(Self { matrix, spectrum })
    }

    /// Diagonal density operator from a probability vector.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        let d = probs.len();
        let mut m = CMatrix::zeros(d, d);
        for (i, &p) in probs.iter().enumerate() {
            m[(i, i)] = Complex64::from(p);
        }
        Self::new(m)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::diagonal(&vec![1.0 / dim as f64; dim]).expect("I/d is a valid state")
    }

    /// `Σ w_i ρ_i` for nonnegative weights summing to one.
    pub fn mixture<'a>(
        dim: usize,
        parts: impl IntoIterator<Item = (f64, &'a DensityOperator)>,
    ) -> Result<Self> {
        let mut m = CMatrix::zeros(dim, dim);
        for (w, rho) in parts {
            if rho.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: rho.dim(),
                });
            }
            if w != 0.0 {
                m += rho.matrix() * Complex64::from(w);
            }
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    /// Eigenvalues clipped to `[0, 1]`.
    pub fn clipped_eigenvalues(&self) -> impl Iterator<Item = f64> + '_ {
        self.spectrum.eigenvalues.iter().map(|&l| l.clamp(0.0, 1.0))
    }

    fn support_threshold(&self) -> f64 {
        EPS_SUPP * self.spectrum.eigenvalues[0].max(0.0)
    }

    pub fn rank(&self) -> usize {
        let threshold = self.support_threshold();
        self.spectrum
            .eigenvalues
            .iter()
            .filter(|&&l| l > threshold)
            .count()
    }

    /// `log₂` of the operator restricted to its support (zero on the kernel).
    pub fn log2_on_support(&self) -> CMatrix {
        let threshold = self.support_threshold();
        self.spectrum
            .apply_function(|l| if l > threshold { l.log2() } else { 0.0 })
    }

    /// `⟨v|ρ|v⟩`, real for Hermitian `ρ`.
    pub fn expectation(&self, v: &CVector) -> f64 {
        (v.adjoint() * &self.matrix * v)[(0, 0)].re
    }
}

/// `v v† / ‖v‖²`.
pub fn density_from_pure(v: &CVector) -> Result<DensityOperator> {
    let norm_sqr = v.norm_squared();
    if norm_sqr == 0.0 || !norm_sqr.is_finite() {
        return Err(Error::ZeroVector);
    }
    DensityOperator::new((v * v.adjoint()) / Complex64::from(norm_sqr))
}

/// `-Σ λ log₂ λ` with `0 log 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    let s: f64 = rho
        .clipped_eigenvalues()
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.log2())
        .sum();
    s.max(0.0)
}

/// Projector onto the span of eigenvectors whose eigenvalue exceeds
/// `EPS_SUPP` times the largest eigenvalue.
pub fn support_projector(rho: &DensityOperator) -> (CMatrix, usize) {
    let threshold = rho.support_threshold();
    let proj = rho
        .spectrum
        .apply_function(|l| if l > threshold { 1.0 } else { 0.0 });
    (proj, rho.rank())
}

/// `D(ρ‖σ) = Tr ρ log₂ ρ - Tr ρ log₂ σ`, infinite when the support of `ρ`
/// leaks outside the support of `σ` by more than `EPS_SUPP`.
pub fn relative_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<Bits> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: sigma.dim(),
        });
    }
    let threshold = sigma.support_threshold();
    let mut leakage = 0.0;
    let mut cross = 0.0;
    for (j, &mu) in sigma.spectrum.eigenvalues.iter().enumerate() {
        let weight = rho.expectation(&sigma.spectrum.eigenvector(j));
        if mu > threshold {
            cross += weight * mu.log2();
        } else {
            leakage += weight;
        }
    }
    if leakage > EPS_SUPP {
        return Ok(Bits::Infinite);
    }
    let d = -von_neumann_entropy(rho) - cross;
    Ok(Bits::Finite(d.max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_hermitian, random_unitary, rng_from_seed};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn diag(p: &[f64]) -> DensityOperator {
        DensityOperator::diagonal(p).unwrap()
    }

    #[test]
    fn eigensystem_identity() {
        let e = hermitian_eigensystem(&identity(2)).unwrap();
        assert_eq!(e.eigenvalues.len(), 2);
        for l in &e.eigenvalues {
            assert!((l - 1.0).abs() < 1e-14);
        }
        let gram = e.eigenvectors.adjoint() * &e.eigenvectors;
        assert!(max_abs_diff(&gram, &identity(2)) < 1e-12);
    }

    #[test]
    fn eigensystem_diagonal() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.25, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.75, 0.0)]);
        let e = hermitian_eigensystem(&m).unwrap();
        assert!((e.eigenvalues[0] - 0.75).abs() < 1e-15);
        assert!((e.eigenvalues[1] - 0.25).abs() < 1e-15);
        // Descending order puts e₁ first.
        assert!((e.eigenvectors[(1, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((e.eigenvectors[(0, 1)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigensystem_pauli_x() {
        let x = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let e = hermitian_eigensystem(&x).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] + 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = e.eigenvector(0);
        let minus = e.eigenvector(1);
        // Equal up to a global phase.
        assert!((plus[0].norm() - s).abs() < 1e-12 && (plus[1].norm() - s).abs() < 1e-12);
        assert!((plus[0] - plus[1]).norm() < 1e-12);
        assert!((minus[0] + minus[1]).norm() < 1e-12);
    }

    #[test]
    fn eigensystem_pauli_y_is_complex() {
        let y = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
        let e = hermitian_eigensystem(&y).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!(max_abs_diff(&e.reconstruct(), &y) < 1e-13);
    }

    #[test]
    fn eigensystem_rejects_non_square() {
        let m = CMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eigensystem(&m), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn eigensystem_reconstruction_random() {
        let mut rng = rng_from_seed(11);
        for d in 1..=8 {
            for _ in 0..20 {
                let h = random_hermitian(d, &mut rng);
                let e = hermitian_eigensystem(&h).unwrap();
                assert!(max_abs_diff(&e.reconstruct(), &h) <= eps_recon(d));
                let gram = e.eigenvectors.adjoint() * &e.eigenvectors;
                assert!(max_abs_diff(&gram, &identity(d)) <= eps_recon(d));
                assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }

    #[test]
    fn eigensystem_is_deterministic() {
        let mut rng = rng_from_seed(5);
        let h = random_hermitian(4, &mut rng);
        assert_eq!(hermitian_eigensystem(&h).unwrap(), hermitian_eigensystem(&h).unwrap());
    }

    #[test]
    fn pure_densities() {
        let rho = density_from_pure(&CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)])).unwrap();
        assert!(max_abs_diff(rho.matrix(), diag(&[1.0, 0.0]).matrix()) < 1e-15);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let rho = density_from_pure(&CVector::from_vec(vec![c(s, 0.0), c(s, 0.0)])).unwrap();
        for z in rho.matrix().iter() {
            assert!((z - c(0.5, 0.0)).norm() < 1e-15);
        }

        let theta = std::f64::consts::PI / 8.0;
        let (sn, cs) = theta.sin_cos();
        let rho = density_from_pure(&CVector::from_vec(vec![c(cs, 0.0), c(sn, 0.0)])).unwrap();
        assert!((rho.matrix()[(0, 0)].re - cs * cs).abs() < 1e-15);
        assert!((rho.matrix()[(0, 1)].re - sn * cs).abs() < 1e-15);
        assert!((rho.matrix()[(1, 1)].re - sn * sn).abs() < 1e-15);
        assert_eq!(rho.rank(), 1);
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-15);

        // Unnormalized input is normalized.
        let rho = density_from_pure(&CVector::from_vec(vec![c(3.0, 0.0), c(0.0, 4.0)])).unwrap();
        assert!((rho.matrix()[(0, 0)].re - 0.36).abs() < 1e-15);

        let zero = CVector::zeros(2);
        assert_eq!(density_from_pure(&zero), Err(Error::ZeroVector));
    }

    #[test]
    fn density_validation() {
        let not_herm = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        assert!(matches!(DensityOperator::new(not_herm), Err(Error::NotHermitian { .. })));
        assert!(matches!(DensityOperator::diagonal(&[0.5, 0.6]), Err(Error::BadTrace { .. })));
        assert!(matches!(DensityOperator::diagonal(&[1.5, -0.5]), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn entropy_examples() {
        assert!(von_neumann_entropy(&diag(&[1.0, 0.0])).abs() < 1e-15);
        assert!((von_neumann_entropy(&DensityOperator::maximally_mixed(2)) - 1.0).abs() < 1e-14);
        // Binary entropy of 0.25 evaluated as a scalar.
        let h = -0.75f64 * 0.75f64.log2() - 0.25 * 0.25f64.log2();
        assert!((h - 0.811278).abs() < 1e-6);
        assert!((von_neumann_entropy(&diag(&[0.75, 0.25])) - h).abs() < 1e-14);
    }

    #[test]
    fn entropy_bounds_and_unitary_invariance() {
        let mut rng = rng_from_seed(3);
        for i in 0..200 {
            let d = 2 + i % 4;
            let rho = random_density(d, &mut rng);
            let s = von_neumann_entropy(&rho);
            assert!(s >= 0.0 && s <= (d as f64).log2() + 1e-9);
            let u = random_unitary(d, &mut rng);
            let rotated = DensityOperator::new(&u * rho.matrix() * u.adjoint()).unwrap();
            assert!((von_neumann_entropy(&rotated) - s).abs() <= 1e-9);
        }
    }

    #[test]
    fn relative_entropy_examples() {
        let up = diag(&[1.0, 0.0]);
        let down = diag(&[0.0, 1.0]);
        let mixed = DensityOperator::maximally_mixed(2);
        assert_eq!(relative_entropy(&mixed, &mixed).unwrap(), Bits::ZERO);
        let d = relative_entropy(&up, &mixed).unwrap().finite().unwrap();
        assert!((d - 1.0).abs() < 1e-14);
        assert_eq!(relative_entropy(&up, &down).unwrap(), Bits::Infinite);
        // Mixed state against a pure one also leaks.
        assert_eq!(relative_entropy(&mixed, &up).unwrap(), Bits::Infinite);
        // Contained support is finite.
        assert_eq!(relative_entropy(&up, &up).unwrap(), Bits::ZERO);
        let three = DensityOperator::maximally_mixed(3);
        assert!(matches!(relative_entropy(&up, &three), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn relative_entropy_matches_matrix_logarithm_route() {
        let mut rng = rng_from_seed(17);
        for i in 0..50 {
            let d = 2 + i % 3;
            let rho = random_density(d, &mut rng);
            let sigma = random_density(d, &mut rng);
            let via_logs = (rho.matrix() * (rho.log2_on_support() - sigma.log2_on_support()))
                .trace()
                .re;
            let d_rel = relative_entropy(&rho, &sigma).unwrap().finite().unwrap();
            assert!((d_rel - via_logs).abs() < 1e-9, "{d_rel} vs {via_logs}");
        }
    }

    #[test]
    fn support_projector_examples() {
        let (p, r) = support_projector(&diag(&[1.0, 0.0]));
        assert_eq!(r, 1);
        assert!(max_abs_diff(&p, diag(&[1.0, 0.0]).matrix()) < 1e-15);

        let (p, r) = support_projector(&DensityOperator::maximally_mixed(2));
        assert_eq!(r, 2);
        assert!(max_abs_diff(&p, &identity(2)) < 1e-14);

        let delta = 1e-15;
        let (_, r) = support_projector(&diag(&[1.0 - delta, delta]));
        assert_eq!(r, 1);
    }

    #[test]
    fn support_projector_is_idempotent() {
        let mut rng = rng_from_seed(23);
        for _ in 0..20 {
            let v = crate::random::haar_vector(3, &mut rng);
            let w = crate::random::haar_vector(3, &mut rng);
            let a = density_from_pure(&v).unwrap();
            let b = density_from_pure(&w).unwrap();
            let rho = DensityOperator::mixture(3, [(0.3, &a), (0.7, &b)]).unwrap();
            let (p, r) = support_projector(&rho);
            assert_eq!(r, 2);
            assert!(max_abs_diff(&(&p * &p), &p) < 1e-12);
            assert!(max_abs_diff(&(&p * rho.matrix() * &p), rho.matrix()) < 1e-12);
        }
    }
}
