//! Bounds for the two-encoder multi-terminal rate-distortion region.
//!
//! Two encoders observe correlated discrete memoryless sources `U` and `V`
//! and describe them separately to one decoder. Every bound handled here has
//! the same shape: a feasible set `S` of auxiliary channels
//! `p(x1, x2 | u, v)`, the rate polytope `C(p)` built from
//! `I(U,V; X1 | X2)`, `I(U,V; X2 | X1)` and `I(U,V; X1, X2)`, distortion
//! constraints met by a decoder `(û(x1,x2), v̂(x1,x2))`, and time sharing.
//! The bounds differ only in `S`:
//!
//! | set | constraint on `p(x1, x2 \| u, v)` |
//! |-----|-----------------------------------|
//! | [`SetId::In`] | long chain `X1 - U - V - X2` (Berger–Tung inner bound) |
//! | [`SetId::Out1`] | short chains `X1 - U - V` and `U - V - X2` (Berger–Tung outer bound) |
//! | [`SetId::Out3`] | spectral conditions: every `λ_i`, `i ≥ 2`, of the normalized `X1X2` joint (also given `u`, `v`, `(u,v)`) is at most the maximal correlation of `(U, V)` |
//! | [`SetId::Cap13`] | both of the above |
//!
//! Modules:
//!
//! - [`probkit`]: named-axis probability tensors, kernels, information measures in bits.
//! - [`spectral`]: normalized joint matrices, singular spectra, the spectral data-processing check.
//! - [`feasibility`]: membership tests for the four sets with defect and margin reporting.
//! - [`regions`]: optimal decoders, rate vertices, channel sampling, weighted-rate minimization,
//!   region tracing with time sharing, and nesting comparison.
//! - [`oracle`]: brute-force and constructive validators independent of the optimizer.
//! - [`cli`]: JSON run configs and the `region`, `dpi`, `feasible`, `validate` commands.

pub mod cli;
pub mod error;
pub mod feasibility;
pub mod oracle;
pub mod probkit;
pub mod regions;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
pub use feasibility::{MembershipReport, SetId, Verdict};
pub use probkit::{AuxChannel, ChannelSizes, InfoMeasure, Kernel, ProbTensor, SourceModel};
pub use spectral::{Spectrum, TildeMatrix};

/// Tool version embedded in every artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
