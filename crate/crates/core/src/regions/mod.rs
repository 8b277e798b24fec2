//! Inner and outer rate-distortion bounds traced over auxiliary channels.

pub mod compare;
pub mod decoder;
pub mod optimize;
pub mod rates;
pub mod sampler;
pub mod trace;

pub use compare::{compare_regions, NestingReport, Violation, WeightComparison, DEFAULT_EPSILON};
pub use decoder::{expected_distortions, optimal_decoders, Decoded, DecoderPair};
pub use optimize::{
    evaluate, minimize_weighted_rate, minimize_weighted_rate_with, ArchiveEntry, Evaluation, Minimum, OperatingPoint,
    Outcome, ParetoArchive, RegionProblem, SearchOptions, SearchResult, Vertex, DISTORTION_SLACK,
};
pub use rates::{rate_vertices, RatePair};
pub use sampler::{ipf_coupling, sample_channel, sample_channel_with, KernelDraw};
pub use trace::{
    format_g12, lower_hull, time_shared_minimum, trace_region, trace_regions, weight_grid, FrontierPoint,
    RegionBoundary, RegionMetadata, SweepEntry, TraceConfig, CSV_HEADER,
};
