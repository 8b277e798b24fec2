use serde::{Deserialize, Serialize};

use super::tensor::ProbTensor;
use super::{U, V};
use crate::error::{Error, Result};

/// A nonnegative distortion matrix `d(source symbol, reconstruction symbol)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Distortion {
    rows: Vec<Vec<f64>>,
}

impl TryFrom<Vec<Vec<f64>>> for Distortion {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Distortion::new(rows)
    }
}

impl From<Distortion> for Vec<Vec<f64>> {
    fn from(d: Distortion) -> Self {
        d.rows
    }
}

impl Distortion {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || width == 0 {
            return Err(Error::InvalidArgument("distortion matrix is empty".into()));
        }
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::InvalidArgument("distortion matrix is ragged".into()));
        }
        if let Some((index, &value)) = rows
            .iter()
            .flatten()
            .enumerate()
            .find(|(_, d)| !(d.is_finite() && **d >= 0.0))
        {
            return Err(Error::InvalidEntry { index, value });
        }
        Ok(Distortion { rows })
    }

    /// Hamming distortion on an alphabet of size `n` (reconstruction alphabet equal to source).
    pub fn hamming(n: usize) -> Self {
        Distortion {
            rows: (0..n)
                .map(|a| (0..n).map(|b| if a == b { 0.0 } else { 1.0 }).collect())
                .collect(),
        }
    }

    pub fn get(&self, source: usize, reconstruction: usize) -> f64 {
        self.rows[source][reconstruction]
    }

    pub fn source_size(&self) -> usize {
        self.rows.len()
    }

    pub fn reconstruction_size(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// The source `p(u, v)` together with the two distortion measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SourceRepr", into = "SourceRepr")]
pub struct SourceModel {
    joint: ProbTensor,
    d1: Distortion,
    d2: Distortion,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SourceRepr {
    joint: ProbTensor,
    d1: Distortion,
    d2: Distortion,
}

impl TryFrom<SourceRepr> for SourceModel {
    type Error = Error;

    fn try_from(r: SourceRepr) -> Result<Self> {
        SourceModel::new(r.joint, r.d1, r.d2)
    }
}

impl From<SourceModel> for SourceRepr {
    fn from(s: SourceModel) -> Self {
        SourceRepr {
            joint: s.joint,
            d1: s.d1,
            d2: s.d2,
        }
    }
}

impl SourceModel {
    /// The joint must have exactly two axes; they are relabeled `U` and `V`.
    pub fn new(joint: ProbTensor, d1: Distortion, d2: Distortion) -> Result<Self> {
        if joint.rank() != 2 {
            return Err(Error::InvalidArgument(format!(
                "source joint must have 2 axes, found {}",
                joint.rank()
            )));
        }
        let (a, b) = (joint.axes()[0].clone(), joint.axes()[1].clone());
        let joint = if a == V {
            // avoid a transient clash while renaming
            joint.rename(&a, "__u")?.rename(&b, V)?.rename("__u", U)?
        } else {
            joint.rename(&b, V)?.rename(&a, U)?
        };
        if d1.source_size() != joint.sizes()[0] {
            return Err(Error::SizeMismatch(format!(
                "d1 has {} rows but |U| = {}",
                d1.source_size(),
                joint.sizes()[0]
            )));
        }
        if d2.source_size() != joint.sizes()[1] {
            return Err(Error::SizeMismatch(format!(
                "d2 has {} rows but |V| = {}",
                d2.source_size(),
                joint.sizes()[1]
            )));
        }
        Ok(SourceModel { joint, d1, d2 })
    }

    /// Hamming distortion on both components.
    pub fn with_hamming(joint: ProbTensor) -> Result<Self> {
        if joint.rank() != 2 {
            return Err(Error::InvalidArgument("source joint must have 2 axes".into()));
        }
        let (nu, nv) = (joint.sizes()[0], joint.sizes()[1]);
        Self::new(joint, Distortion::hamming(nu), Distortion::hamming(nv))
    }

    /// Doubly symmetric binary source: `U` uniform, `V = U` flipped with
    /// probability `p`; Hamming distortions.
    pub fn dsbs(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("crossover {p} not in [0, 1]")));
        }
        let joint = ProbTensor::from_matrix(
            U,
            V,
            &[vec![(1.0 - p) / 2.0, p / 2.0], vec![p / 2.0, (1.0 - p) / 2.0]],
        )?;
        Self::with_hamming(joint)
    }

    pub fn joint(&self) -> &ProbTensor {
        &self.joint
    }

    pub fn d1(&self) -> &Distortion {
        &self.d1
    }

    pub fn d2(&self) -> &Distortion {
        &self.d2
    }

    pub fn u_size(&self) -> usize {
        self.joint.sizes()[0]
    }

    pub fn v_size(&self) -> usize {
        self.joint.sizes()[1]
    }

    pub fn u_hat_size(&self) -> usize {
        self.d1.reconstruction_size()
    }

    pub fn v_hat_size(&self) -> usize {
        self.d2.reconstruction_size()
    }

    /// Stable 64-bit digest of the joint and both distortion matrices.
    pub fn fingerprint(&self) -> u64 {
        let mut h = super::Fnv64::default();
        h.write_usizes(self.joint.sizes());
        h.write_f64s(self.joint.values());
        for d in [&self.d1, &self.d2] {
            h.write_usizes(&[d.source_size(), d.reconstruction_size()]);
            for r in d.rows() {
                h.write_f64s(r);
            }
        }
        h.finish()
    }
}
