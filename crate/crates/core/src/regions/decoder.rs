use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probkit::{Distortion, ProbTensor, SourceModel, U, V, X1, X2};

/// Reconstruction maps on the `X1 × X2` grid, indexed `x1 * |X2| + x2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoderPair {
    pub x2_size: usize,
    pub u_hat: Vec<usize>,
    pub v_hat: Vec<usize>,
}

impl DecoderPair {
    pub fn u_hat_at(&self, x1: usize, x2: usize) -> usize {
        self.u_hat[x1 * self.x2_size + x2]
    }

    pub fn v_hat_at(&self, x1: usize, x2: usize) -> usize {
        self.v_hat[x1 * self.x2_size + x2]
    }
}

/// Optimal decoders together with the expected distortions they attain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decoded {
    pub decoders: DecoderPair,
    pub ed1: f64,
    pub ed2: f64,
}

/// `cost[cell][r] = Σ_s p(s, cell) d(s, r)` for every `(x1, x2)` cell.
///
/// `p` must be laid out `(x1, x2, s)` row-major.
pub fn cell_costs(p: &[f64], n_cells: usize, d: &Distortion) -> Vec<Vec<f64>> {
    let (n_src, n_rec) = (d.source_size(), d.reconstruction_size());
    (0..n_cells)
        .map(|cell| {
            let mass = &p[cell * n_src..(cell + 1) * n_src];
            (0..n_rec)
                .map(|r| mass.iter().enumerate().map(|(s, &m)| m * d.get(s, r)).sum())
                .collect()
        })
        .collect()
}

/// Per-cell argmin, lowest symbol on ties; returns the map and the total cost.
fn argmin_map(costs: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let mut map = Vec::with_capacity(costs.len());
    let mut total = 0.0;
    for row in costs {
        let (best, cost) = row
            .iter()
            .enumerate()
            .fold((0, row[0]), |(bi, bc), (i, &c)| if c < bc { (i, c) } else { (bi, bc) });
        map.push(best);
        total += cost;
    }
    (map, total)
}

/// Marginals `p(x1, x2, u)` and `p(x1, x2, v)` of a `(U, V, X1, X2)` joint.
pub(crate) fn decoder_marginals(joint: &ProbTensor, src: &SourceModel) -> Result<(Vec<f64>, Vec<f64>, usize, usize)> {
    let (x1, x2) = (joint.axis_size(X1)?, joint.axis_size(X2)?);
    if joint.axis_size(U)? != src.u_size() || joint.axis_size(V)? != src.v_size() {
        return Err(Error::SizeMismatch("joint and source alphabets differ".into()));
    }
    let pu = joint.marginal(&[X1, X2, U])?.values().to_vec();
    let pv = joint.marginal(&[X1, X2, V])?.values().to_vec();
    Ok((pu, pv, x1, x2))
}

/// Decoders minimizing `E d1(U, Û)` and `E d2(V, V̂)` for a fixed joint.
///
/// The two objectives separate over `(x1, x2)` cells, so the per-cell
/// posterior argmin is exactly optimal for both at once. Zero-mass cells get
/// symbol 0.
pub fn optimal_decoders(joint: &ProbTensor, src: &SourceModel) -> Result<Decoded> {
    let (pu, pv, x1, x2) = decoder_marginals(joint, src)?;
    let n_cells = x1 * x2;
    let (u_hat, ed1) = argmin_map(&cell_costs(&pu, n_cells, src.d1()));
    let (v_hat, ed2) = argmin_map(&cell_costs(&pv, n_cells, src.d2()));
    Ok(Decoded {
        decoders: DecoderPair {
            x2_size: x2,
            u_hat,
            v_hat,
        },
        ed1,
        ed2,
    })
}

/// Expected distortions of arbitrary decoders, summed cell by cell.
pub fn expected_distortions(joint: &ProbTensor, src: &SourceModel, dec: &DecoderPair) -> Result<(f64, f64)> {
    let (pu, pv, x1, x2) = decoder_marginals(joint, src)?;
    let n_cells = x1 * x2;
    if dec.u_hat.len() != n_cells || dec.v_hat.len() != n_cells {
        return Err(Error::SizeMismatch("decoder maps do not cover the X1 × X2 grid".into()));
    }
    let c1 = cell_costs(&pu, n_cells, src.d1());
    let c2 = cell_costs(&pv, n_cells, src.d2());
    let ed1 = (0..n_cells).map(|c| c1[c][dec.u_hat[c]]).sum();
    let ed2 = (0..n_cells).map(|c| c2[c][dec.v_hat[c]]).sum();
    Ok((ed1, ed2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probkit::{join, AuxChannel, ChannelSizes};
    use approx::assert_abs_diff_eq;

    #[test]
    fn lossless_channel_decodes_exactly() {
        let src = SourceModel::dsbs(0.1).unwrap();
        let ch = AuxChannel::deterministic(&[0, 1], &[0, 1], 2, 2).unwrap();
        let d = optimal_decoders(&join(src.joint(), &ch).unwrap(), &src).unwrap();
        assert_eq!(d.decoders.u_hat, vec![0, 0, 1, 1]);
        assert_eq!(d.decoders.v_hat, vec![0, 1, 0, 1]);
        assert_eq!((d.ed1, d.ed2), (0.0, 0.0));
    }

    #[test]
    fn uninformative_channel_gives_half() {
        let uniform = ProbTensor::new(["U", "V"], vec![2, 2], vec![0.25; 4]).unwrap();
        let src = SourceModel::with_hamming(uniform).unwrap();
        let ch = AuxChannel::trivial(ChannelSizes::new(2, 2, 2, 2)).unwrap();
        let d = optimal_decoders(&join(src.joint(), &ch).unwrap(), &src).unwrap();
        assert_abs_diff_eq!(d.ed1, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.ed2, 0.5, epsilon = 1e-15);
        assert!(d.decoders.u_hat.iter().all(|&x| x == 0));
    }

    #[test]
    fn side_information_decoding() {
        // X1 = U, X2 trivial: V is decoded from U with error 0.1
        let src = SourceModel::dsbs(0.1).unwrap();
        let ch = AuxChannel::deterministic(&[0, 1], &[0, 0], 2, 1).unwrap();
        let d = optimal_decoders(&join(src.joint(), &ch).unwrap(), &src).unwrap();
        assert_eq!(d.decoders.u_hat, vec![0, 1]);
        assert_eq!(d.decoders.v_hat, vec![0, 1]);
        assert_eq!(d.ed1, 0.0);
        assert_abs_diff_eq!(d.ed2, 0.1, epsilon = 1e-15);
        let (e1, e2) = expected_distortions(&join(src.joint(), &ch).unwrap(), &src, &d.decoders).unwrap();
        assert_eq!((e1, e2), (d.ed1, d.ed2));
    }
}
