//! Finite-alphabet probability calculus: dense named-axis tensors, marginals,
//! conditionals, i.i.d. extensions and information measures in bits.

mod channel;
mod info;
mod kernel;
mod source;
mod tensor;

pub use channel::{AuxChannel, ChannelSizes};
pub use info::{binary_entropy, entropy_bits, info_measure, joint_entropy, InfoMeasure, NEGATIVE_FLOOR};
pub use kernel::Kernel;
pub use source::{Distortion, SourceModel};
pub use tensor::{
    letter_axis, ProbTensor, ARITHMETIC_TOLERANCE, DEFAULT_ENTRY_CAP, INPUT_TOLERANCE, MASS_FLOOR,
};

use crate::error::{Error, Result};

/// Steps a row-major multi-index; returns false once every assignment has been visited.
pub fn advance_index(index: &mut [usize], sizes: &[usize]) -> bool {
    tensor::advance(index, sizes)
}

pub const U: &str = "U";
pub const V: &str = "V";
pub const X1: &str = "X1";
pub const X2: &str = "X2";
pub const Q: &str = "Q";

/// Composes a two-axis source `p(u, v)` with a channel into `p(u, v, x1, x2)`.
///
/// The result keeps the source's axis labels and appends `X1`, `X2`.
pub fn join(source: &ProbTensor, ch: &AuxChannel) -> Result<ProbTensor> {
    if source.rank() != 2 {
        return Err(Error::InvalidArgument("source must have exactly two axes".into()));
    }
    let s = ch.sizes();
    if source.sizes() != [s.u, s.v] {
        return Err(Error::SizeMismatch(format!(
            "source is {:?} but channel expects ({}, {})",
            source.sizes(),
            s.u,
            s.v
        )));
    }
    if source.has_axis(X1) || source.has_axis(X2) {
        return Err(Error::DuplicateAxis("X1/X2".into()));
    }
    let slice_len = s.slice_len();
    let mut values = Vec::with_capacity(s.len());
    for (uv, &p) in source.values().iter().enumerate() {
        values.extend(ch.values()[uv * slice_len..(uv + 1) * slice_len].iter().map(|c| p * c));
    }
    ProbTensor::with_tolerance(
        [source.axes()[0].as_str(), source.axes()[1].as_str(), X1, X2],
        vec![s.u, s.v, s.x1, s.x2],
        values,
        ARITHMETIC_TOLERANCE,
    )
}

/// FNV-1a over little-endian words; stable across platforms and releases.
#[derive(Debug, Clone)]
pub(crate) struct Fnv64(u64);

impl Default for Fnv64 {
    fn default() -> Self {
        Fnv64(0xcbf2_9ce4_8422_2325)
    }
}

impl Fnv64 {
    pub(crate) fn write_bytes(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    pub(crate) fn write_usizes(&mut self, xs: &[usize]) {
        for &x in xs {
            self.write_bytes(&(x as u64).to_le_bytes());
        }
    }

    pub(crate) fn write_f64s(&mut self, xs: &[f64]) {
        for &x in xs {
            // +0.0 and -0.0 hash alike
            let x = if x == 0.0 { 0.0 } else { x };
            self.write_bytes(&x.to_bits().to_le_bytes());
        }
    }

    pub(crate) fn finish(&self) -> u64 {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn join_identity_channel_on_dsbs() {
        let src = SourceModel::dsbs(0.1).unwrap();
        let ch = AuxChannel::deterministic(&[0, 1], &[0, 1], 2, 2).unwrap();
        let joint = join(src.joint(), &ch).unwrap();
        assert_eq!(joint.axes(), &["U", "V", "X1", "X2"]);
        assert_abs_diff_eq!(joint.get(&[0, 0, 0, 0]), 0.45, epsilon = 1e-15);
        assert_eq!(joint.marginal(&[U, V]).unwrap().values(), src.joint().values());
    }

    #[test]
    fn join_uniform_channel_is_independent() {
        let src = SourceModel::dsbs(0.1).unwrap();
        let ch = AuxChannel::from_fn(ChannelSizes::new(2, 2, 2, 3), |_, _, _, _| 1.0).unwrap();
        let joint = join(src.joint(), &ch).unwrap();
        let i = info_measure(&joint, &InfoMeasure::mutual(&[U, V], &[X1, X2])).unwrap();
        assert_abs_diff_eq!(i, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn join_checks_sizes() {
        let src = SourceModel::dsbs(0.1).unwrap();
        let ch = AuxChannel::trivial(ChannelSizes::new(3, 2, 2, 2)).unwrap();
        assert!(matches!(join(src.joint(), &ch), Err(Error::SizeMismatch(_))));
    }
}
