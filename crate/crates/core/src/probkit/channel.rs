use serde::{Deserialize, Serialize};

use super::kernel::Kernel;
use super::tensor::{ProbTensor, ARITHMETIC_TOLERANCE, INPUT_TOLERANCE};
use super::{Fnv64, X1, X2};
use crate::error::{Error, Result};

/// Alphabet sizes of an auxiliary channel `p(x1, x2 | u, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChannelSizes {
    pub u: usize,
    pub v: usize,
    pub x1: usize,
    pub x2: usize,
}

impl ChannelSizes {
    pub fn new(u: usize, v: usize, x1: usize, x2: usize) -> Self {
        ChannelSizes { u, v, x1, x2 }
    }

    pub fn slice_len(&self) -> usize {
        self.x1 * self.x2
    }

    pub fn len(&self) -> usize {
        self.u * self.v * self.x1 * self.x2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn validate(&self) -> Result<()> {
        if self.u == 0 || self.v == 0 || self.x1 == 0 || self.x2 == 0 {
            return Err(Error::InvalidArgument(format!("alphabet sizes must be positive: {self:?}")));
        }
        Ok(())
    }
}

/// Auxiliary channel `p(x1, x2 | u, v)`, stored row-major over `(u, v, x1, x2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelRepr", into = "ChannelRepr")]
pub struct AuxChannel {
    sizes: ChannelSizes,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelRepr {
    sizes: ChannelSizes,
    values: Vec<f64>,
}

impl TryFrom<ChannelRepr> for AuxChannel {
    type Error = Error;

    fn try_from(r: ChannelRepr) -> Result<Self> {
        AuxChannel::new(r.sizes, r.values)
    }
}

impl From<AuxChannel> for ChannelRepr {
    fn from(c: AuxChannel) -> Self {
        ChannelRepr {
            sizes: c.sizes,
            values: c.values,
        }
    }
}

fn check_slices(sizes: &ChannelSizes, values: &[f64], tol: f64) -> Result<()> {
    sizes.validate()?;
    if values.len() != sizes.len() {
        return Err(Error::ShapeMismatch {
            expected: sizes.len(),
            found: values.len(),
        });
    }
    if let Some((index, &value)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
    {
        return Err(Error::InvalidEntry { index, value });
    }
    for slice in values.chunks(sizes.slice_len()) {
        let sum: f64 = slice.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::NotNormalized { sum });
        }
    }
    Ok(())
}

impl AuxChannel {
    /// Each `(u, v)` slice must sum to one within `1e-12`.
    pub fn new(sizes: ChannelSizes, values: Vec<f64>) -> Result<Self> {
        check_slices(&sizes, &values, INPUT_TOLERANCE)?;
        Ok(AuxChannel { sizes, values })
    }

    /// Divides every `(u, v)` slice by its total.
    pub fn from_weights(sizes: ChannelSizes, mut values: Vec<f64>) -> Result<Self> {
        sizes.validate()?;
        if values.len() != sizes.len() {
            return Err(Error::ShapeMismatch {
                expected: sizes.len(),
                found: values.len(),
            });
        }
        for slice in values.chunks_mut(sizes.slice_len()) {
            let total: f64 = slice.iter().sum();
            if !(total > 0.0 && total.is_finite()) {
                return Err(Error::EmptySupport);
            }
            slice.iter_mut().for_each(|x| *x /= total);
        }
        check_slices(&sizes, &values, ARITHMETIC_TOLERANCE)?;
        Ok(AuxChannel { sizes, values })
    }

    pub fn from_fn(sizes: ChannelSizes, f: impl Fn(usize, usize, usize, usize) -> f64) -> Result<Self> {
        sizes.validate()?;
        let mut values = Vec::with_capacity(sizes.len());
        for u in 0..sizes.u {
            for v in 0..sizes.v {
                for x1 in 0..sizes.x1 {
                    for x2 in 0..sizes.x2 {
                        values.push(f(u, v, x1, x2));
                    }
                }
            }
        }
        Self::from_weights(sizes, values)
    }

    /// The long-chain channel `p(x1|u) p(x2|v)` from two row-stochastic kernels.
    pub fn product(k1: &[Vec<f64>], k2: &[Vec<f64>]) -> Result<Self> {
        let x1 = k1.first().map_or(0, Vec::len);
        let x2 = k2.first().map_or(0, Vec::len);
        if k1.iter().any(|r| r.len() != x1) || k2.iter().any(|r| r.len() != x2) {
            return Err(Error::InvalidArgument("ragged kernel".into()));
        }
        for row in k1.iter().chain(k2) {
            check_slices(&ChannelSizes::new(1, 1, row.len(), 1), row, INPUT_TOLERANCE)?;
        }
        let sizes = ChannelSizes::new(k1.len(), k2.len(), x1, x2);
        Self::from_fn(sizes, |u, v, a, b| k1[u][a] * k2[v][b])
    }

    /// Deterministic encoders `x1 = f1(u)`, `x2 = f2(v)`.
    pub fn deterministic(f1: &[usize], f2: &[usize], x1: usize, x2: usize) -> Result<Self> {
        if f1.iter().any(|&a| a >= x1) || f2.iter().any(|&b| b >= x2) {
            return Err(Error::InvalidArgument("encoder map leaves its alphabet".into()));
        }
        let sizes = ChannelSizes::new(f1.len(), f2.len(), x1, x2);
        Self::from_fn(sizes, |u, v, a, b| if f1[u] == a && f2[v] == b { 1.0 } else { 0.0 })
    }

    /// Both outputs constant at symbol 0.
    pub fn trivial(sizes: ChannelSizes) -> Result<Self> {
        Self::from_fn(sizes, |_, _, a, b| if a == 0 && b == 0 { 1.0 } else { 0.0 })
    }

    pub fn sizes(&self) -> ChannelSizes {
        self.sizes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, u: usize, v: usize, x1: usize, x2: usize) -> f64 {
        let s = &self.sizes;
        self.values[((u * s.v + v) * s.x1 + x1) * s.x2 + x2]
    }

    /// The `(u, v)` slice, row-major over `(x1, x2)`.
    pub fn slice(&self, u: usize, v: usize) -> &[f64] {
        let len = self.sizes.slice_len();
        let start = (u * self.sizes.v + v) * len;
        &self.values[start..start + len]
    }

    /// `p(x1 | u, v)`.
    pub fn x1_marginal(&self, u: usize, v: usize) -> Vec<f64> {
        self.slice(u, v)
            .chunks(self.sizes.x2)
            .map(|row| row.iter().sum())
            .collect()
    }

    /// `p(x2 | u, v)`.
    pub fn x2_marginal(&self, u: usize, v: usize) -> Vec<f64> {
        let slice = self.slice(u, v);
        (0..self.sizes.x2)
            .map(|b| (0..self.sizes.x1).map(|a| slice[a * self.sizes.x2 + b]).sum())
            .collect()
    }

    /// The channel as a kernel with target `(X1, X2)` given `(U, V)`.
    pub fn to_kernel(&self) -> Kernel {
        let s = self.sizes;
        let slices = self
            .values
            .chunks(s.slice_len())
            .map(|c| {
                Some(
                    ProbTensor::with_tolerance([X1, X2], vec![s.x1, s.x2], c.to_vec(), ARITHMETIC_TOLERANCE)
                        .expect("channel slices are normalized"),
                )
            })
            .collect();
        Kernel::from_slices(
            vec![X1.into(), X2.into()],
            vec![s.x1, s.x2],
            vec![super::U.into(), super::V.into()],
            vec![s.u, s.v],
            slices,
        )
    }

    /// Swaps the roles of `X1` and `X2` symbols through two permutations.
    pub fn relabel(&self, perm1: &[usize], perm2: &[usize]) -> Result<Self> {
        let s = self.sizes;
        if perm1.len() != s.x1 || perm2.len() != s.x2 {
            return Err(Error::SizeMismatch("permutation length".into()));
        }
        Self::from_fn(s, |u, v, a, b| self.get(u, v, perm1[a], perm2[b]))
    }

    /// Stable 64-bit digest of sizes and values.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv64::default();
        let s = self.sizes;
        h.write_usizes(&[s.u, s.v, s.x1, s.x2]);
        h.write_f64s(&self.values);
        h.finish()
    }
}
