//! JSON file formats and canonical channel serialization.
//!
//! Matrices are lists of `[re, im]` pairs in row-major order. Readers accept
//! either a flat list of `d²` pairs or `d` rows of `d` pairs; writers emit the
//! flat form.
//!
//! Channel file: `{ "dim": d, "kraus": [ matrix, ... ] }`
//!
//! Ensemble file: `{ "dim": d, "members": [ { "p": float, "rho": matrix }, ... ] }`

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::channels::{validate_kraus, KrausChannel};
use crate::ensembles::Ensemble;
use crate::error::{Error, Result};
use crate::opalg::{CMatrix, CVector, DensityOperator};
use crate::optimizer::PureState;

pub type ComplexPair = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixJson {
    Flat(Vec<ComplexPair>),
    Nested(Vec<Vec<ComplexPair>>),
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let mut out = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                out.push([z.re, z.im]);
            }
        }
        MatrixJson::Flat(out)
    }

    /// Parses a `dim × dim` matrix; `dim = None` infers it from the entry count.
    pub fn to_matrix(&self, dim: Option<usize>) -> Result<CMatrix> {
        let entries: Vec<ComplexPair> = match self {
            MatrixJson::Flat(v) => v.clone(),
            MatrixJson::Nested(rows) => {
                let n = rows.len();
                if let Some(bad) = rows.iter().find(|r| r.len() != n) {
                    return Err(Error::Format(format!("row of length {} in a {n}-row matrix", bad.len())));
                }
                rows.concat()
            }
        };
        let d = match dim {
            Some(d) => d,
            None => (entries.len() as f64).sqrt().round() as usize,
        };
        if d == 0 || entries.len() != d * d {
            return Err(Error::Format(format!("{} entries do not form a {d}x{d} matrix", entries.len())));
        }
        if entries.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Format("non-finite matrix entry".into()));
        }
        Ok(CMatrix::from_row_iterator(
            d,
            d,
            entries.iter().map(|[re, im]| Complex64::new(*re, *im)),
        ))
    }
}

impl Serialize for DensityOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_matrix(self.matrix()).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let m = MatrixJson::deserialize(deserializer)?;
        m.to_matrix(None)
            .and_then(DensityOperator::new)
            .map_err(serde::de::Error::custom)
    }
}

impl Serialize for PureState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<ComplexPair> = self.vector().iter().map(|z| [z.re, z.im]).collect();
        v.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PureState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<ComplexPair> = Vec::deserialize(deserializer)?;
        let v = CVector::from_iterator(v.len(), v.iter().map(|[re, im]| Complex64::new(*re, *im)));
        PureState::new(v).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub dim: usize,
    pub kraus: Vec<MatrixJson>,
}

impl ChannelFile {
    pub fn from_channel(ch: &KrausChannel) -> Self {
        Self {
            dim: ch.dim(),
            kraus: ch.kraus_ops().iter().map(MatrixJson::from_matrix).collect(),
        }
    }

    pub fn into_channel(self) -> Result<KrausChannel> {
        let ops = self
            .kraus
            .iter()
            .map(|m| m.to_matrix(Some(self.dim)))
            .collect::<Result<Vec<_>>>()?;
        validate_kraus(ops)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberJson {
    pub p: f64,
    pub rho: MatrixJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleFile {
    pub dim: usize,
    pub members: Vec<MemberJson>,
}

impl EnsembleFile {
    pub fn from_members(dim: usize, members: &[(f64, DensityOperator)]) -> Self {
        Self {
            dim,
            members: members
                .iter()
                .map(|(p, s)| MemberJson {
                    p: *p,
                    rho: MatrixJson::from_matrix(s.matrix()),
                })
                .collect(),
        }
    }

    pub fn from_ensemble(e: &Ensemble) -> Self {
        Self::from_members(e.dim(), e.members())
    }

    /// Weighted states without checking that the weights form a distribution.
    pub fn into_members(self) -> Result<Vec<(f64, DensityOperator)>> {
        self.members
            .iter()
            .map(|m| Ok((m.p, DensityOperator::new(m.rho.to_matrix(Some(self.dim))?)?)))
            .collect()
    }

    pub fn into_ensemble(self) -> Result<Ensemble> {
        Ensemble::new(self.into_members()?)
    }
}

pub fn parse_channel(json: &str) -> Result<KrausChannel> {
    serde_json::from_str::<ChannelFile>(json)
        .map_err(|e| Error::Format(e.to_string()))?
        .into_channel()
}

pub fn parse_ensemble(json: &str) -> Result<Ensemble> {
    parse_members(json).and_then(Ensemble::new)
}

pub fn parse_members(json: &str) -> Result<Vec<(f64, DensityOperator)>> {
    serde_json::from_str::<EnsembleFile>(json)
        .map_err(|e| Error::Format(e.to_string()))?
        .into_members()
}

fn canonical_float(x: f64) -> String {
    // Collapse -0.0 so equal channels hash equally.
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

/// Canonical text form: `dim=<d>` followed by one `re,im` line per entry,
/// operators in order, entries row-major, 17 significant digits.
pub fn canonical_channel_text(ch: &KrausChannel) -> String {
    let mut out = format!("dim={}\n", ch.dim());
    for (k, a) in ch.kraus_ops().iter().enumerate() {
        let _ = writeln!(out, "op={k}");
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                let z = a[(i, j)];
                let _ = writeln!(out, "{},{}", canonical_float(z.re), canonical_float(z.im));
            }
        }
    }
    out
}

/// Lowercase hex SHA-256 of [`canonical_channel_text`].
pub fn channel_digest(ch: &KrausChannel) -> String {
    let digest = Sha256::digest(canonical_channel_text(ch).as_bytes());
    hex::encode(digest.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::amplitude_damping;

    #[test]
    fn channel_file_round_trip() {
        let ch = amplitude_damping(0.5).unwrap();
        let json = serde_json::to_string(&ChannelFile::from_channel(&ch)).unwrap();
        let back = parse_channel(&json).unwrap();
        assert_eq!(back, ch);
    }

    #[test]
    fn nested_and_flat_forms_agree() {
        let flat = r#"{"dim":2,"kraus":[[[1,0],[0,0],[0,0],[1,0]]]}"#;
        let nested = r#"{"dim":2,"kraus":[[[[1,0],[0,0]],[[0,0],[1,0]]]]}"#;
        assert_eq!(parse_channel(flat).unwrap(), parse_channel(nested).unwrap());
    }

    #[test]
    fn malformed_files() {
        assert!(matches!(parse_channel("{"), Err(Error::Format(_))));
        assert!(matches!(
            parse_channel(r#"{"dim":2,"kraus":[[[1,0],[0,0],[0,0]]]}"#),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            parse_channel(r#"{"dim":2,"kraus":[[[0.5,0],[0,0],[0,0],[0.5,0]]]}"#),
            Err(Error::NotTracePreserving { .. })
        ));
        let short = r#"{"dim":2,"members":[{"p":0.9,"rho":[[1,0],[0,0],[0,0],[0,0]]}]}"#;
        assert!(matches!(parse_ensemble(short), Err(Error::InvalidDistribution(_))));
    }

    #[test]
    fn digest_is_stable() {
        let a = channel_digest(&amplitude_damping(0.5).unwrap());
        let b = channel_digest(&amplitude_damping(0.5).unwrap());
        let c = channel_digest(&amplitude_damping(0.25).unwrap());
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 64);
        assert!(a.chars().all(|ch| ch.is_ascii_hexdigit() && !ch.is_ascii_uppercase()));
        assert!(canonical_channel_text(&amplitude_damping(0.5).unwrap()).contains("7.0710678118654757e-1,0.0000000000000000e0"));
    }

    #[test]
    fn density_json_round_trip() {
        let rho = DensityOperator::diagonal(&[0.3, 0.7]).unwrap();
        let json = serde_json::to_string(&rho).unwrap();
        assert_eq!(serde_json::from_str::<DensityOperator>(&json).unwrap(), rho);
        assert!(serde_json::from_str::<DensityOperator>("[[0.5,0],[0,0],[0,0],[0.6,0]]").is_err());
    }
}
