use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::feasibility::{check_membership, in_s_out3, SetId, DEFAULT_TOLERANCE};
use crate::probkit::{AuxChannel, ChannelSizes, SourceModel};
use crate::rng::{dirichlet, one_hot};

pub const IPF_MAX_ITERATIONS: usize = 500;
pub const IPF_TOLERANCE: f64 = 1e-13;
const COUPLING_ATTEMPTS: usize = 8;
const REJECTION_ATTEMPTS: usize = 64;

/// How kernel rows are drawn from the simplex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelDraw {
    /// Symmetric Dirichlet with the given concentration.
    Dirichlet(f64),
    /// Uniformly chosen vertex of the simplex.
    Deterministic,
}

impl KernelDraw {
    fn row<R: Rng + ?Sized>(self, rng: &mut R, k: usize) -> Vec<f64> {
        match self {
            KernelDraw::Dirichlet(alpha) => dirichlet(rng, k, alpha),
            KernelDraw::Deterministic => one_hot(k, rng.random_range(0..k)),
        }
    }
}

/// Draws a channel from `set` with Dirichlet(1) rows.
pub fn sample_channel<R: Rng + ?Sized>(set: SetId, sizes: ChannelSizes, src: &SourceModel, rng: &mut R) -> Result<AuxChannel> {
    sample_channel_with(set, sizes, src, KernelDraw::Dirichlet(1.0), DEFAULT_TOLERANCE, rng)
}

/// Draws a channel that passes the membership test of `set` at `tol`.
///
/// The spectral sets are reached by rejection; when every attempt is refused
/// the draw falls back to the long-chain set, which they contain.
pub fn sample_channel_with<R: Rng + ?Sized>(
    set: SetId,
    sizes: ChannelSizes,
    src: &SourceModel,
    draw: KernelDraw,
    tol: f64,
    rng: &mut R,
) -> Result<AuxChannel> {
    let accepted = |ch: &AuxChannel| -> Result<bool> { Ok(check_membership(set, ch, src, tol)?.is_accepted()) };
    match set {
        SetId::In => {
            let ch = sample_long_chain(sizes, draw, rng)?;
            debug_assert!(accepted(&ch)?);
            Ok(ch)
        }
        SetId::Out1 => sample_short_chains(sizes, draw, rng),
        SetId::Out3 | SetId::Cap13 => {
            for attempt in 0..REJECTION_ATTEMPTS {
                let ch = if set == SetId::Out3 && attempt % 2 == 0 {
                    sample_unconstrained(sizes, draw, rng)?
                } else {
                    sample_short_chains(sizes, draw, rng)?
                };
                if in_s_out3(&ch, src, tol)?.is_accepted() {
                    return Ok(ch);
                }
            }
            log::debug!("{set}: rejection budget exhausted, drawing from the long-chain set");
            for _ in 0..REJECTION_ATTEMPTS {
                let ch = sample_long_chain(sizes, draw, rng)?;
                if accepted(&ch)? {
                    return Ok(ch);
                }
            }
            log::warn!("{set}: no accepted draw, returning the trivial channel");
            AuxChannel::trivial(sizes)
        }
    }
}

fn kernel<R: Rng + ?Sized>(rows: usize, width: usize, draw: KernelDraw, rng: &mut R) -> Vec<Vec<f64>> {
    (0..rows).map(|_| draw.row(rng, width)).collect()
}

fn sample_long_chain<R: Rng + ?Sized>(sizes: ChannelSizes, draw: KernelDraw, rng: &mut R) -> Result<AuxChannel> {
    let k1 = kernel(sizes.u, sizes.x1, draw, rng);
    let k2 = kernel(sizes.v, sizes.x2, draw, rng);
    AuxChannel::product(&k1, &k2)
}

/// Marginal kernels `p(x1|u)`, `p(x2|v)` joined per `(u, v)` by a random coupling.
fn sample_short_chains<R: Rng + ?Sized>(sizes: ChannelSizes, draw: KernelDraw, rng: &mut R) -> Result<AuxChannel> {
    let k1 = kernel(sizes.u, sizes.x1, draw, rng);
    let k2 = kernel(sizes.v, sizes.x2, draw, rng);
    let mut values = Vec::with_capacity(sizes.len());
    for a in &k1 {
        for b in &k2 {
            values.extend(random_coupling(a, b, draw, rng));
        }
    }
    AuxChannel::from_weights(sizes, values)
}

fn sample_unconstrained<R: Rng + ?Sized>(sizes: ChannelSizes, draw: KernelDraw, rng: &mut R) -> Result<AuxChannel> {
    let values = (0..sizes.u * sizes.v).flat_map(|_| draw.row(rng, sizes.slice_len())).collect();
    AuxChannel::from_weights(sizes, values)
}

fn random_coupling<R: Rng + ?Sized>(a: &[f64], b: &[f64], draw: KernelDraw, rng: &mut R) -> Vec<f64> {
    let seed_draw = match draw {
        KernelDraw::Deterministic => KernelDraw::Dirichlet(1.0),
        other => other,
    };
    for attempt in 0..COUPLING_ATTEMPTS {
        let seed = seed_draw.row(rng, a.len() * b.len());
        match ipf_coupling(a, b, &seed) {
            Some(c) => return c,
            None => log::debug!("coupling attempt {attempt} did not converge, resampling"),
        }
    }
    log::debug!("falling back to the independent coupling");
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}

/// Iterative proportional fitting of `seed` (row-major `|a| × |b|`) to the
/// marginals `a` and `b`. Returns `None` when it has not converged to
/// [`IPF_TOLERANCE`] within [`IPF_MAX_ITERATIONS`] sweeps.
pub fn ipf_coupling(a: &[f64], b: &[f64], seed: &[f64]) -> Option<Vec<f64>> {
    let (n, m) = (a.len(), b.len());
    assert_eq!(seed.len(), n * m);
    let mut c: Vec<f64> = seed.to_vec();
    for i in 0..n {
        for j in 0..m {
            if a[i] == 0.0 || b[j] == 0.0 {
                c[i * m + j] = 0.0;
            }
        }
    }
    for _ in 0..IPF_MAX_ITERATIONS {
        for i in 0..n {
            let row = &mut c[i * m..(i + 1) * m];
            let total: f64 = row.iter().sum();
            if total > 0.0 {
                row.iter_mut().for_each(|x| *x *= a[i] / total);
            } else if a[i] > 0.0 {
                return None;
            }
        }
        let mut worst: f64 = 0.0;
        for j in 0..m {
            let total: f64 = (0..n).map(|i| c[i * m + j]).sum();
            if total > 0.0 {
                (0..n).for_each(|i| c[i * m + j] *= b[j] / total);
            } else if b[j] > 0.0 {
                return None;
            }
        }
        for i in 0..n {
            let total: f64 = c[i * m..(i + 1) * m].iter().sum();
            worst = worst.max((total - a[i]).abs());
        }
        if worst <= IPF_TOLERANCE {
            return Some(c);
        }
    }
    None
}
