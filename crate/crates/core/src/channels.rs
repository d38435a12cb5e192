//! Quantum channels in Kraus form.
//!
//! Basis convention for qubits: index 0 is `|↑⟩`, index 1 is `|↓⟩`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::opalg::{ensure_square, identity, max_abs_diff, CMatrix, CVector, DensityOperator};
use crate::random::{haar_vector, rng_from_seed};

/// Tolerance on `Σ A_i†A_i = I`.
pub const EPS_TP: f64 = 1e-10;

/// A trace-preserving completely positive map `ρ ↦ Σ A_i ρ A_i†`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim: usize,
    kraus_ops: Vec<CMatrix>,
}

/// Max entrywise deviation of `Σ A_i†A_i` from the identity.
pub fn completeness_residual(ops: &[CMatrix]) -> Result<f64> {
    let first = ops.first().ok_or(Error::Empty("Kraus operator list"))?;
    let dim = ensure_square(first)?;
    let mut sum = CMatrix::zeros(dim, dim);
    for a in ops {
        let d = ensure_square(a)?;
        if d != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: d });
        }
        sum += a.adjoint() * a;
    }
    Ok(max_abs_diff(&sum, &identity(dim)))
}

/// Builds a channel, rejecting operator sets that are not trace preserving.
pub fn validate_kraus(ops: Vec<CMatrix>) -> Result<KrausChannel> {
    let residual = completeness_residual(&ops)?;
    if residual > EPS_TP {
        return Err(Error::NotTracePreserving { residual });
    }
    Ok(KrausChannel {
        dim: ops[0].nrows(),
        kraus_ops: ops,
    })
}

impl KrausChannel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.kraus_ops
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: rho.dim(),
            });
        }
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for a in &self.kraus_ops {
            out += a * rho.matrix() * a.adjoint();
        }
        DensityOperator::new(out)
    }

    /// Output for the pure input `|ψ⟩`, computed as `Σ (A_i ψ)(A_i ψ)†`.
    pub fn apply_pure(&self, psi: &CVector) -> Result<DensityOperator> {
        if psi.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: psi.len(),
            });
        }
        let norm_sqr = psi.norm_squared();
        if norm_sqr == 0.0 {
            return Err(Error::ZeroVector);
        }
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for a in &self.kraus_ops {
            let v = a * psi;
            out += &v * v.adjoint();
        }
        DensityOperator::new(out / Complex64::from(norm_sqr))
    }

    /// Rank of the support of the whole output set, which equals the support
    /// of the image of the maximally mixed input.
    pub fn output_support_rank(&self) -> usize {
        self.apply(&DensityOperator::maximally_mixed(self.dim))
            .expect("channel maps I/d to a valid state")
            .rank()
    }
}

pub fn apply_channel(ch: &KrausChannel, rho: &DensityOperator) -> Result<DensityOperator> {
    ch.apply(rho)
}

pub fn identity_channel(dim: usize) -> Result<KrausChannel> {
    if dim == 0 {
        return Err(Error::OutOfRange { name: "dim", value: 0.0 });
    }
    validate_kraus(vec![identity(dim)])
}

/// Qubit amplitude damping: `A₁ = √(1-λ)|↑⟩⟨↑| + |↓⟩⟨↓|`, `A₂ = √λ |↓⟩⟨↑|`.
pub fn amplitude_damping(lambda: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::OutOfRange { name: "lambda", value: lambda });
    }
    let mut a1 = CMatrix::zeros(2, 2);
    a1[(0, 0)] = Complex64::from((1.0 - lambda).sqrt());
    a1[(1, 1)] = Complex64::from(1.0);
    let mut a2 = CMatrix::zeros(2, 2);
    a2[(1, 0)] = Complex64::from(lambda.sqrt());
    validate_kraus(vec![a1, a2])
}

/// `ρ ↦ (1-p)ρ + p I/d`, realized as `√(1-p) I` together with the
/// matrix units `√(p/d) |i⟩⟨j|`. Zero-weight operators are omitted.
pub fn depolarizing(p: f64, dim: usize) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange { name: "p", value: p });
    }
    if dim == 0 {
        return Err(Error::OutOfRange { name: "dim", value: 0.0 });
    }
    let mut ops = Vec::with_capacity(dim * dim + 1);
    if p < 1.0 {
        ops.push(identity(dim) * Complex64::from((1.0 - p).sqrt()));
    }
    if p > 0.0 {
        let w = Complex64::from((p / dim as f64).sqrt());
        for i in 0..dim {
            for j in 0..dim {
                let mut e = CMatrix::zeros(dim, dim);
                e[(i, j)] = w;
                ops.push(e);
            }
        }
    }
    validate_kraus(ops)
}

/// Channel with the single Kraus operator `u`, which must be unitary.
pub fn unitary_channel(u: CMatrix) -> Result<KrausChannel> {
    validate_kraus(vec![u])
}

/// `n` Haar-random pure inputs drawn from `seed`.
pub fn sample_pure_inputs(dim: usize, n: usize, seed: u64) -> Vec<CVector> {
    let mut rng = rng_from_seed(seed);
    (0..n).map(|_| haar_vector(dim, &mut rng)).collect()
}

/// Channel outputs of `n` Haar-random pure inputs drawn from `seed`.
pub fn sample_pure_outputs(ch: &KrausChannel, n: usize, seed: u64) -> Result<Vec<DensityOperator>> {
    if n == 0 {
        return Err(Error::Empty("sample"));
    }
    sample_pure_inputs(ch.dim(), n, seed)
        .iter()
        .map(|psi| ch.apply_pure(psi))
        .collect()
}
