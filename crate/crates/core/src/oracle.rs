//! Brute-force and constructive checks that run independently of the optimizer.

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::{in_s_in, in_s_out1, in_s_out3, DEFAULT_TOLERANCE};
use crate::probkit::{info_measure, join, AuxChannel, ChannelSizes, InfoMeasure, ProbTensor, SourceModel, U, V, X1, X2};
use crate::regions::{optimal_decoders, Decoded, DISTORTION_SLACK};
use crate::rng::{derive_seed, dirichlet, rng_from_seed};

pub const MAX_LETTERS: usize = 3;
pub const MAX_LETTER_ALPHABET: usize = 3;

/// A Dirichlet(1) joint over the given axes.
pub fn random_joint<R: Rng + ?Sized, S: Into<String>>(rng: &mut R, axes: impl IntoIterator<Item = S>, sizes: Vec<usize>) -> Result<ProbTensor> {
    let len = sizes.iter().product();
    ProbTensor::new(axes, sizes, dirichlet(rng, len, 1.0))
}

/// A joint `p(x) p(y|x) p(z|y)` over axes `X, Y, Z` with Dirichlet(1) rows.
pub fn random_markov_triple<R: Rng + ?Sized>(rng: &mut R, sizes: [usize; 3]) -> Result<ProbTensor> {
    let [nx, ny, nz] = sizes;
    let px = dirichlet(rng, nx, 1.0);
    let py: Vec<Vec<f64>> = (0..nx).map(|_| dirichlet(rng, ny, 1.0)).collect();
    let pz: Vec<Vec<f64>> = (0..ny).map(|_| dirichlet(rng, nz, 1.0)).collect();
    let mut values = Vec::with_capacity(nx * ny * nz);
    for x in 0..nx {
        for y in 0..ny {
            for z in 0..nz {
                values.push(px[x] * py[x][y] * pz[y][z]);
            }
        }
    }
    ProbTensor::from_weights(["X", "Y", "Z"], sizes.to_vec(), values)
}

/// One draw of a multi-letter scheme `p(x1|u^n) p(x2|v^n) ∏ p(u_i, v_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NLetterSample {
    /// Induced first-letter channel `p(x1, x2 | u_1, v_1)`.
    pub channel: AuxChannel,
    /// Joint over `(U_1..U_n, V_1..V_n, X1, X2)`.
    pub joint: ProbTensor,
}

/// Samples Dirichlet(1) encoders of `n` source letters and the channel they
/// induce on the first letter.
pub fn sample_nletter_channel<R: Rng + ?Sized>(src: &SourceModel, n: usize, x1: usize, x2: usize, rng: &mut R) -> Result<NLetterSample> {
    if n == 0 || n > MAX_LETTERS {
        return Err(Error::InvalidArgument(format!("block length {n} outside 1..={MAX_LETTERS}")));
    }
    let (su, sv) = (src.u_size(), src.v_size());
    if su > MAX_LETTER_ALPHABET || sv > MAX_LETTER_ALPHABET {
        return Err(Error::CapExceeded {
            size: su.max(sv),
            cap: MAX_LETTER_ALPHABET,
        });
    }
    if x1 == 0 || x2 == 0 {
        return Err(Error::InvalidArgument("auxiliary alphabets must be nonempty".into()));
    }
    let (nu, nv) = (su.pow(n as u32), sv.pow(n as u32));
    let k1: Vec<Vec<f64>> = (0..nu).map(|_| dirichlet(rng, x1, 1.0)).collect();
    let k2: Vec<Vec<f64>> = (0..nv).map(|_| dirichlet(rng, x2, 1.0)).collect();

    let blocks = src.joint().iid_extend(n)?;
    let mut axes: Vec<String> = blocks.axes().to_vec();
    axes.extend([X1.to_string(), X2.to_string()]);
    let mut sizes: Vec<usize> = blocks.sizes().to_vec();
    sizes.extend([x1, x2]);
    let mut values = Vec::with_capacity(blocks.len() * x1 * x2);
    for (flat, &p) in blocks.values().iter().enumerate() {
        let (un, vn) = (flat / nv, flat % nv);
        for a in 0..x1 {
            for b in 0..x2 {
                values.push(p * k1[un][a] * k2[vn][b]);
            }
        }
    }
    let joint = ProbTensor::from_weights(axes, sizes, values)?;

    // The first-letter kernel averages the encoders over the remaining
    // letters, so it stays defined where p(u_1, v_1) = 0.
    let (tail_u, tail_v) = (nu / su, nv / sv);
    let puv = src.joint().values();
    let ch_sizes = ChannelSizes::new(su, sv, x1, x2);
    let mut induced = vec![0.0; ch_sizes.len()];
    for u1 in 0..su {
        for v1 in 0..sv {
            let slice = &mut induced[(u1 * sv + v1) * x1 * x2..(u1 * sv + v1 + 1) * x1 * x2];
            for tu in 0..tail_u {
                for tv in 0..tail_v {
                    let mut weight = 1.0;
                    let (mut ru, mut rv) = (tu, tv);
                    for _ in 1..n {
                        weight *= puv[(ru % su) * sv + rv % sv];
                        ru /= su;
                        rv /= sv;
                    }
                    if weight == 0.0 {
                        continue;
                    }
                    let (un, vn) = (u1 * tail_u + tu, v1 * tail_v + tv);
                    for a in 0..x1 {
                        for b in 0..x2 {
                            slice[a * x2 + b] += weight * k1[un][a] * k2[vn][b];
                        }
                    }
                }
            }
        }
    }
    Ok(NLetterSample {
        channel: AuxChannel::from_weights(ch_sizes, induced)?,
        joint,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationConfig {
    pub n: usize,
    pub x1: usize,
    pub x2: usize,
    pub trials: usize,
    pub seed: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationFailure {
    /// Trial number, or `None` for an injected channel.
    pub trial: Option<usize>,
    pub seed: Option<u64>,
    /// Which test refused the channel: `out1` or `out3`.
    pub test: String,
    pub defect: f64,
    pub channel: AuxChannel,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub artifact: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub n: usize,
    pub trials: usize,
    pub injected: usize,
    pub tolerance: f64,
    /// Smallest spectral margin seen; negative means a condition was broken.
    pub worst_margin: f64,
    pub worst_out1_defect: f64,
    /// Largest long-chain defect, tracked only for `n = 1`.
    pub worst_in_defect: Option<f64>,
    pub failures: Vec<ValidationFailure>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

struct TrialOutcome {
    margin: f64,
    out1_defect: f64,
    in_defect: f64,
    failures: Vec<ValidationFailure>,
}

fn check_induced(src: &SourceModel, ch: &AuxChannel, tol: f64, trial: Option<usize>, seed: Option<u64>) -> Result<TrialOutcome> {
    let out3 = in_s_out3(ch, src, tol)?;
    let out1 = in_s_out1(ch, tol);
    let margin = out3.margins.as_ref().map_or(f64::INFINITY, |m| m.worst());
    let mut failures = Vec::new();
    for (test, report) in [("out3", &out3), ("out1", &out1)] {
        if !report.is_accepted() {
            failures.push(ValidationFailure {
                trial,
                seed,
                test: test.into(),
                defect: report.defect,
                channel: ch.clone(),
                artifact: None,
            });
        }
    }
    Ok(TrialOutcome {
        margin,
        out1_defect: out1.defect,
        in_defect: in_s_in(ch, tol).defect,
        failures,
    })
}

/// Samples `trials` multi-letter schemes and checks that every induced
/// first-letter channel passes the spectral and short-chain tests. Injected
/// channels are checked the same way; the self-test uses this to make sure
/// a bad channel is caught.
pub fn validate_single_letter_conditions(src: &SourceModel, cfg: &ValidationConfig, inject: &[AuxChannel]) -> Result<ValidationReport> {
    if cfg.trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let seed = derive_seed(cfg.seed, &[cfg.n as u64, t as u64]);
            let sample = sample_nletter_channel(src, cfg.n, cfg.x1, cfg.x2, &mut rng_from_seed(seed))?;
            check_induced(src, &sample.channel, cfg.tolerance, Some(t), Some(seed))
        })
        .collect::<Result<_>>()?;
    let injected: Vec<TrialOutcome> = inject
        .iter()
        .map(|ch| check_induced(src, ch, cfg.tolerance, None, None))
        .collect::<Result<_>>()?;

    let mut report = ValidationReport {
        n: cfg.n,
        trials: cfg.trials,
        injected: inject.len(),
        tolerance: cfg.tolerance,
        worst_margin: f64::INFINITY,
        worst_out1_defect: 0.0,
        worst_in_defect: (cfg.n == 1).then_some(0.0),
        failures: Vec::new(),
    };
    for o in outcomes.into_iter().chain(injected) {
        report.worst_margin = report.worst_margin.min(o.margin);
        report.worst_out1_defect = report.worst_out1_defect.max(o.out1_defect);
        if let Some(w) = report.worst_in_defect.as_mut() {
            *w = w.max(o.in_defect);
        }
        report.failures.extend(o.failures);
    }
    Ok(report)
}

/// Writes each failing channel to `dir` as JSON and records the path in the report.
pub fn write_failure_artifacts(report: &mut ValidationReport, dir: &Path) -> Result<Vec<PathBuf>> {
    if report.failures.is_empty() {
        return Ok(Vec::new());
    }
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (i, f) in report.failures.iter_mut().enumerate() {
        let name = match (f.trial, f.seed) {
            (Some(t), Some(s)) => format!("failure_n{}_trial{t}_seed{s}_{}.json", report.n, f.test),
            _ => format!("failure_n{}_injected{i}_{}.json", report.n, f.test),
        };
        let path = dir.join(name);
        fs::write(&path, serde_json::to_string_pretty(&f.channel)?)?;
        f.artifact = Some(path.clone());
        paths.push(path);
    }
    Ok(paths)
}

/// `X1 = (f1(U), S)`, `X2 = (f2(V), S)` with `S` uniform on `s_size` symbols and
/// independent of the source. Symbols are encoded as `label * s_size + s`.
pub fn common_info_channel(f1: &[usize], f2: &[usize], s_size: usize) -> Result<AuxChannel> {
    if f1.is_empty() || f2.is_empty() || s_size == 0 {
        return Err(Error::InvalidArgument("labels and the common part must be nonempty".into()));
    }
    let l1 = f1.iter().max().expect("nonempty") + 1;
    let l2 = f2.iter().max().expect("nonempty") + 1;
    let sizes = ChannelSizes::new(f1.len(), f2.len(), l1 * s_size, l2 * s_size);
    AuxChannel::from_fn(sizes, |u, v, a, b| {
        let s = a % s_size;
        if a / s_size == f1[u] && b / s_size == f2[v] && b % s_size == s {
            1.0
        } else {
            0.0
        }
    })
}

/// Rows of the grid `{0, step, 2 step, ..., 1}` simplex of dimension `k`.
fn grid_rows(k: usize, m: usize) -> Vec<Vec<f64>> {
    fn fill(k: usize, left: usize, m: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if prefix.len() == k - 1 {
            prefix.push(left);
            out.push(prefix.iter().map(|&c| c as f64 / m as f64).collect());
            prefix.pop();
            return;
        }
        for c in 0..=left {
            prefix.push(c);
            fill(k, left - c, m, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    fill(k, m, m, &mut Vec::new(), &mut out);
    out
}

fn grid_steps(step: f64) -> Result<usize> {
    let m = (1.0 / step).round();
    if !(step > 0.0) || (m * step - 1.0).abs() > 1e-12 || !(1.0..=8.0).contains(&m) {
        return Err(Error::InvalidArgument(format!("grid step {step} must be 1/m for m in 1..=8")));
    }
    Ok(m as usize)
}

/// Every product channel whose kernel rows lie on the grid.
pub fn grid_channels(sizes: ChannelSizes, step: f64) -> Result<Vec<AuxChannel>> {
    if sizes.x1 > 2 || sizes.x2 > 2 || sizes.u > 2 || sizes.v > 2 {
        return Err(Error::CapExceeded {
            size: sizes.u.max(sizes.v).max(sizes.x1).max(sizes.x2),
            cap: 2,
        });
    }
    let m = grid_steps(step)?;
    let r1 = grid_rows(sizes.x1, m);
    let r2 = grid_rows(sizes.x2, m);
    let rows = sizes.u + sizes.v;
    let counts: Vec<usize> = (0..rows).map(|r| if r < sizes.u { r1.len() } else { r2.len() }).collect();
    let mut idx = vec![0usize; rows];
    let mut out = Vec::new();
    loop {
        let k1: Vec<Vec<f64>> = (0..sizes.u).map(|u| r1[idx[u]].clone()).collect();
        let k2: Vec<Vec<f64>> = (0..sizes.v).map(|v| r2[idx[sizes.u + v]].clone()).collect();
        out.push(AuxChannel::product(&k1, &k2)?);
        if !crate::probkit::advance_index(&mut idx, &counts) {
            break;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridOutcome {
    Found {
        value: f64,
        r1: f64,
        r2: f64,
        ed1: f64,
        ed2: f64,
        channel: AuxChannel,
    },
    /// No grid channel meets the distortion target.
    Infeasible,
}

impl GridOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            GridOutcome::Found { value, .. } => Some(*value),
            GridOutcome::Infeasible => None,
        }
    }
}

/// Exhaustive minimum of `w1 R1 + w2 R2` over long-chain channels with
/// kernel rows on the grid, among those whose optimal decoders meet `d`.
/// Rates come from the information-measure calculus on the joined tensor.
pub fn grid_search_weighted_rate(src: &SourceModel, d: [f64; 2], x1: usize, x2: usize, w: [f64; 2], step: f64) -> Result<GridOutcome> {
    let sizes = ChannelSizes::new(src.u_size(), src.v_size(), x1, x2);
    let uv = [U, V];
    let mut best = GridOutcome::Infeasible;
    for ch in grid_channels(sizes, step)? {
        let joint = join(src.joint(), &ch)?;
        let (ed1, ed2) = min_distortions(&joint, src)?;
        if ed1 > d[0] + DISTORTION_SLACK || ed2 > d[1] + DISTORTION_SLACK {
            continue;
        }
        let i = |m: InfoMeasure| info_measure(&joint, &m);
        let lo1 = i(InfoMeasure::mutual(&uv, &[X1]).given(&[X2]))?;
        let lo2 = i(InfoMeasure::mutual(&uv, &[X2]).given(&[X1]))?;
        let sum = i(InfoMeasure::mutual(&uv, &[X1, X2]))?;
        let a = (lo1.max(sum - lo2), lo2);
        let b = (lo1, lo2.max(sum - lo1));
        let (r1, r2) = if w[0] * b.0 + w[1] * b.1 < w[0] * a.0 + w[1] * a.1 { b } else { a };
        let value = w[0] * r1 + w[1] * r2;
        if best.value().is_none_or(|v| value < v) {
            best = GridOutcome::Found {
                value,
                r1,
                r2,
                ed1,
                ed2,
                channel: ch,
            };
        }
    }
    Ok(best)
}

/// Smallest achievable `E d1`, `E d2` by brute force over reconstruction symbols per cell.
fn min_distortions(joint: &ProbTensor, src: &SourceModel) -> Result<(f64, f64)> {
    let side = |axis: &str, d: &crate::probkit::Distortion| -> Result<f64> {
        let m = joint.marginal(&[X1, X2, axis])?;
        let (a, b, s) = (m.sizes()[0], m.sizes()[1], m.sizes()[2]);
        let mut total = 0.0;
        for x1 in 0..a {
            for x2 in 0..b {
                let mut best = f64::INFINITY;
                for r in 0..d.reconstruction_size() {
                    let mut cost = 0.0;
                    for x in 0..s {
                        cost += m.get(&[x1, x2, x]) * d.get(x, r);
                    }
                    best = best.min(cost);
                }
                total += best;
            }
        }
        Ok(total)
    };
    Ok((side(U, src.d1())?, side(V, src.d2())?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoderCheck {
    pub min_ed1: f64,
    pub min_ed2: f64,
    /// Lexicographically first maps attaining the minima.
    pub u_hat: Vec<usize>,
    pub v_hat: Vec<usize>,
    pub optimal: Decoded,
    pub matches: bool,
}

/// Enumerates every decoder map on the `X1 × X2` grid and compares the best
/// with [`optimal_decoders`]: distortions and maps must agree exactly.
pub fn exhaustive_decoder_check(joint: &ProbTensor, src: &SourceModel) -> Result<DecoderCheck> {
    let (x1, x2) = (joint.axis_size(X1)?, joint.axis_size(X2)?);
    let cells = x1 * x2;
    if cells > 4 || src.u_hat_size() > 3 || src.v_hat_size() > 3 {
        return Err(Error::CapExceeded {
            size: cells.max(src.u_hat_size()).max(src.v_hat_size()),
            cap: 4,
        });
    }
    let search = |axis: &str, d: &crate::probkit::Distortion| -> Result<(f64, Vec<usize>)> {
        let m = joint.marginal(&[X1, X2, axis])?;
        let s = m.sizes()[2];
        let nr = d.reconstruction_size();
        let cost = |cell: usize, r: usize| -> f64 {
            let mut c = 0.0;
            for x in 0..s {
                c += m.get(&[cell / x2, cell % x2, x]) * d.get(x, r);
            }
            c
        };
        let mut map = vec![0usize; cells];
        let mut best: Option<(f64, Vec<usize>)> = None;
        loop {
            let mut total = 0.0;
            for (cell, &r) in map.iter().enumerate() {
                total += cost(cell, r);
            }
            if best.as_ref().is_none_or(|(b, _)| total < *b) {
                best = Some((total, map.clone()));
            }
            if !crate::probkit::advance_index(&mut map, &vec![nr; cells]) {
                break;
            }
        }
        Ok(best.expect("at least one map"))
    };
    let (min_ed1, u_hat) = search(U, src.d1())?;
    let (min_ed2, v_hat) = search(V, src.d2())?;
    let optimal = optimal_decoders(joint, src)?;
    let matches = optimal.ed1 == min_ed1 && optimal.ed2 == min_ed2 && optimal.decoders.u_hat == u_hat && optimal.decoders.v_hat == v_hat;
    Ok(DecoderCheck {
        min_ed1,
        min_ed2,
        u_hat,
        v_hat,
        optimal,
        matches,
    })
}
