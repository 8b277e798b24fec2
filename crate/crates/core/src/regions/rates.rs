use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::probkit::{joint_entropy, ProbTensor, Q, U, V, X1, X2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    pub r1: f64,
    pub r2: f64,
}

impl RatePair {
    pub fn weighted(&self, w: [f64; 2]) -> f64 {
        w[0] * self.r1 + w[1] * self.r2
    }
}

/// The two minimal corners of `{R1 >= I(UV;X1|X2), R2 >= I(UV;X2|X1), R1 + R2 >= I(UV;X1X2)}`
/// for a `(U, V, X1, X2)` joint. Corner A minimizes `R2`, corner B minimizes `R1`.
///
/// When `X1` and `X2` are more dependent given `UV` than marginally, the sum
/// constraint is slack and both corners coincide.
///
/// If the joint carries a `Q` axis every term is conditioned on it.
pub fn rate_vertices(joint: &ProbTensor) -> Result<[RatePair; 2]> {
    let q: &[&str] = if joint.has_axis(Q) { &[Q] } else { &[] };
    let h = |axes: &[&str]| -> Result<f64> {
        let mut all: Vec<&str> = axes.to_vec();
        all.extend_from_slice(q);
        joint_entropy(joint, &all)
    };
    let h_q = h(&[])?;
    let h_uv = h(&[U, V])?;
    let h_x1 = h(&[X1])?;
    let h_x2 = h(&[X2])?;
    let h_x1x2 = h(&[X1, X2])?;
    let h_uvx1 = h(&[U, V, X1])?;
    let h_uvx2 = h(&[U, V, X2])?;
    let h_all = h(&[U, V, X1, X2])?;
    let nonneg = |x: f64| if x < 0.0 && x > -crate::probkit::NEGATIVE_FLOOR { 0.0 } else { x };
    let r1_min = nonneg(h_uvx2 + h_x1x2 - h_all - h_x2);
    let r2_min = nonneg(h_uvx1 + h_x1x2 - h_all - h_x1);
    let sum = nonneg(h_uv + h_x1x2 - h_all - h_q);
    Ok([
        RatePair {
            r1: r1_min.max(sum - r2_min),
            r2: r2_min,
        },
        RatePair {
            r1: r1_min,
            r2: r2_min.max(sum - r1_min),
        },
    ])
}
