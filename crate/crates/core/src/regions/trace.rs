use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::optimize::{
    minimize_weighted_rate_with, OperatingPoint, ParetoArchive, RegionProblem, SearchOptions, Vertex,
    DISTORTION_SLACK,
};
use crate::error::{Error, Result};
use crate::feasibility::{check_membership, SetId};
use crate::probkit::{AuxChannel, ChannelSizes};
use crate::rng::derive_seed;

/// Slack in the dominance test that decides hull membership.
const HULL_SLACK: f64 = 1e-12;

/// `count` weights `(cos θ, sin θ)` with `θ` uniform on `[0, π/2]`; the
/// endpoints are exactly `(1, 0)` and `(0, 1)`.
pub fn weight_grid(count: usize) -> Result<Vec<(f64, [f64; 2])>> {
    if count < 2 {
        return Err(Error::InvalidArgument("weight count must be at least 2".into()));
    }
    Ok((0..count)
        .map(|k| {
            if k == 0 {
                (0.0, [1.0, 0.0])
            } else if k == count - 1 {
                (FRAC_PI_2, [0.0, 1.0])
            } else {
                let theta = FRAC_PI_2 * k as f64 / (count - 1) as f64;
                (theta, [theta.cos(), theta.sin()])
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceConfig {
    pub weights: usize,
    pub budget: usize,
    pub seed: u64,
    #[serde(default)]
    pub options: SearchOptions,
}

impl TraceConfig {
    pub fn new(weights: usize, budget: usize, seed: u64) -> Self {
        TraceConfig {
            weights,
            budget,
            seed,
            options: SearchOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMetadata {
    pub set: SetId,
    pub source_fingerprint: String,
    pub d: [f64; 2],
    pub sizes: ChannelSizes,
    pub seed: u64,
    pub budget: usize,
    pub weights: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub index: usize,
    pub theta: f64,
    pub w: [f64; 2],
    /// Value reported by the search at this weight.
    pub search_value: Option<f64>,
    /// Best single archived point meeting the target, as an index into `points`.
    pub best: Option<usize>,
    pub best_value: Option<f64>,
    /// Scalarized value with time sharing: the minimum of `w·R` over the hull sliced at `D`.
    pub value: Option<f64>,
    pub channel: Option<AuxChannel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub index: usize,
    pub point: OperatingPoint,
    pub on_frontier: bool,
}

/// Operating points of one set, their lower convex hull and the `D`-sliced frontier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionBoundary {
    pub metadata: RegionMetadata,
    pub points: Vec<OperatingPoint>,
    /// Sweep index at which each point was found.
    pub point_sweep: Vec<usize>,
    /// Indices into `points` of the vertices of the lower hull.
    pub hull: Vec<usize>,
    pub sweep: Vec<SweepEntry>,
    pub frontier: Vec<FrontierPoint>,
}

/// Traces one set.
pub fn trace_region(problem: &RegionProblem, set: SetId, cfg: &TraceConfig) -> Result<RegionBoundary> {
    Ok(trace_regions(problem, &[set], cfg)?.remove(0))
}

/// Traces several sets with a shared weight grid and shared per-weight seeds.
///
/// Sets are processed subsets first. Each set's search is seeded with the
/// best channels its known subsets found at the same weight, and its archive
/// absorbs their archived channels after a membership check, so a larger set
/// never reports a worse value merely because its own draws were unlucky.
pub fn trace_regions(problem: &RegionProblem, sets: &[SetId], cfg: &TraceConfig) -> Result<Vec<RegionBoundary>> {
    if cfg.budget == 0 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    let grid = weight_grid(cfg.weights)?;
    let mut order: Vec<SetId> = sets.to_vec();
    order.sort_by_key(|s| s.nesting_rank());
    order.dedup();

    let mut done: Vec<(SetId, ParetoArchive, Vec<Option<AuxChannel>>, RegionBoundary)> = Vec::new();
    for &set in &order {
        let subsets: Vec<usize> = (0..done.len()).filter(|&i| set.contains(done[i].0) && done[i].0 != set).collect();
        let runs: Vec<_> = grid
            .par_iter()
            .enumerate()
            .map(|(k, &(_, w))| {
                let inject: Vec<AuxChannel> = subsets.iter().filter_map(|&i| done[i].2[k].clone()).collect();
                minimize_weighted_rate_with(problem, set, w, cfg.budget, derive_seed(cfg.seed, &[k as u64]), &inject, &cfg.options)
            })
            .collect::<Result<_>>()?;

        let mut archive = ParetoArchive::default();
        for (k, run) in runs.iter().enumerate() {
            archive.merge_as(&run.archive, k);
        }
        let mut verdicts: HashMap<u64, bool> = HashMap::new();
        for &i in &subsets {
            for e in done[i].1.entries() {
                let fp = e.point.fingerprint;
                let member = match verdicts.get(&fp) {
                    Some(&m) => m,
                    None => {
                        let m = check_membership(set, &e.channel, &problem.source, problem.tolerance)?.is_accepted();
                        if !m {
                            log::warn!("{set}: a channel from {} fails membership and is not shared", done[i].0);
                        }
                        verdicts.insert(fp, m);
                        m
                    }
                };
                if member {
                    archive.insert_tagged(e.point, &e.channel, e.tag);
                }
            }
        }
        let best_channels: Vec<Option<AuxChannel>> =
            runs.iter().map(|r| r.outcome.minimum().map(|m| m.channel.clone())).collect();
        let search_values: Vec<Option<f64>> = runs.iter().map(|r| r.outcome.value()).collect();
        let boundary = build_boundary(problem, set, cfg, &grid, &archive, &search_values)?;
        done.push((set, archive, best_channels, boundary));
    }
    sets.iter()
        .map(|s| {
            done.iter()
                .find(|d| d.0 == *s)
                .map(|d| d.3.clone())
                .ok_or_else(|| Error::InvalidArgument(format!("set {s} was not traced")))
        })
        .collect()
}

fn build_boundary(
    problem: &RegionProblem,
    set: SetId,
    cfg: &TraceConfig,
    grid: &[(f64, [f64; 2])],
    archive: &ParetoArchive,
    search_values: &[Option<f64>],
) -> Result<RegionBoundary> {
    let points = archive.points();
    let point_sweep: Vec<usize> = archive.entries().iter().map(|e| e.tag).collect();
    let hull = lower_hull(&points)?;
    let hull_points: Vec<OperatingPoint> = hull.iter().map(|&i| points[i]).collect();

    let mut sweep = Vec::with_capacity(grid.len());
    let mut frontier = Vec::new();
    for (k, &(theta, w)) in grid.iter().enumerate() {
        let best = points
            .iter()
            .enumerate()
            .filter(|(_, p)| p.meets(problem.d))
            .fold(None::<(usize, f64)>, |acc, (i, p)| {
                let v = p.weighted_rate(w);
                match acc {
                    Some((_, bv)) if bv <= v => acc,
                    _ => Some((i, v)),
                }
            });
        let mixed = time_shared_minimum(&hull_points, w, problem.d)?;
        if let Some(p) = mixed {
            frontier.push(FrontierPoint {
                index: k,
                point: p,
                on_frontier: false,
            });
        }
        sweep.push(SweepEntry {
            index: k,
            theta,
            w,
            search_value: search_values[k],
            best: best.map(|b| b.0),
            best_value: best.map(|b| b.1),
            value: mixed.map(|p| p.weighted_rate(w)),
            channel: best.map(|b| (*archive.entries()[b.0].channel).clone()),
        });
    }
    mark_frontier(&mut frontier);
    Ok(RegionBoundary {
        metadata: RegionMetadata {
            set,
            source_fingerprint: format!("{:016x}", problem.source.fingerprint()),
            d: problem.d,
            sizes: problem.sizes,
            seed: cfg.seed,
            budget: cfg.budget,
            weights: cfg.weights,
            tolerance: problem.tolerance,
        },
        points,
        point_sweep,
        hull,
        sweep,
        frontier,
    })
}

/// Flags frontier rows that are not weakly dominated in `(R1, R2)` by an earlier-kept row.
fn mark_frontier(frontier: &mut [FrontierPoint]) {
    for i in 0..frontier.len() {
        let p = frontier[i].point;
        let dominated = frontier.iter().enumerate().any(|(j, q)| {
            let q = q.point;
            let weakly = q.r1 <= p.r1 + HULL_SLACK && q.r2 <= p.r2 + HULL_SLACK;
            let strictly = q.r1 < p.r1 - HULL_SLACK || q.r2 < p.r2 - HULL_SLACK;
            j != i && weakly && (strictly || j < i)
        });
        frontier[i].on_frontier = !dominated;
    }
}

fn lp_error(e: microlp::Error) -> Error {
    Error::LinearProgram(e.to_string())
}

/// Vertices of the dominance-closed hull `conv(points) + R^4_+`: a point is
/// kept unless some convex combination of the others is at most it in
/// every coordinate.
pub fn lower_hull(points: &[OperatingPoint]) -> Result<Vec<usize>> {
    let coords: Vec<[f64; 4]> = points.iter().map(|p| p.coords()).collect();
    let keep: Vec<bool> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            if points.len() == 1 {
                return Ok(true);
            }
            let mut lp = Problem::new(OptimizationDirection::Minimize);
            let vars: Vec<_> = (0..points.len())
                .filter(|&j| j != i)
                .map(|j| (j, lp.add_var(0.0, (0.0, f64::INFINITY))))
                .collect();
            let all: Vec<_> = vars.iter().map(|&(_, v)| (v, 1.0)).collect();
            lp.add_constraint(&all, ComparisonOp::Eq, 1.0);
            for c in 0..4 {
                let row: Vec<_> = vars.iter().map(|&(j, v)| (v, coords[j][c])).collect();
                lp.add_constraint(&row, ComparisonOp::Le, coords[i][c] + HULL_SLACK);
            }
            match lp.solve() {
                Ok(_) => Ok(false),
                Err(microlp::Error::Infeasible) => Ok(true),
                Err(e) => {
                    // keeping a non-vertex is harmless: the frontier LP sees one more column
                    log::debug!("hull test for point {i} failed ({e}); keeping it");
                    Ok(true)
                }
            }
        })
        .collect::<Result<_>>()?;
    Ok((0..points.len()).filter(|&i| keep[i]).collect())
}

/// Best time-sharing mixture of `points` under `w` subject to `(Ed1, Ed2) ≤ D`.
pub fn time_shared_minimum(points: &[OperatingPoint], w: [f64; 2], d: [f64; 2]) -> Result<Option<OperatingPoint>> {
    match solve_mixture(points, w, d) {
        Ok(found) => return Ok(found),
        Err(e) => log::debug!("mixture LP failed ({e}); retrying on rounded points"),
    }
    let mut distinct: Vec<OperatingPoint> = Vec::new();
    for p in points {
        let key = p.coords().map(|x| (x * 1e9).round());
        if !distinct.iter().any(|q| q.coords().map(|x| (x * 1e9).round()) == key) {
            distinct.push(*p);
        }
    }
    match solve_mixture(&distinct, w, d) {
        Ok(found) => Ok(found),
        Err(e) => {
            log::warn!("mixture LP failed twice ({e}); using the best single point");
            Ok(points
                .iter()
                .filter(|p| p.meets(d))
                .min_by(|a, b| a.weighted_rate(w).total_cmp(&b.weighted_rate(w)))
                .copied())
        }
    }
}

fn solve_mixture(points: &[OperatingPoint], w: [f64; 2], d: [f64; 2]) -> Result<Option<OperatingPoint>> {
    if points.is_empty() {
        return Ok(None);
    }
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = points.iter().map(|p| lp.add_var(p.weighted_rate(w), (0.0, f64::INFINITY))).collect();
    let all: Vec<_> = vars.iter().map(|&v| (v, 1.0)).collect();
    lp.add_constraint(&all, ComparisonOp::Eq, 1.0);
    let ed1: Vec<_> = vars.iter().zip(points).map(|(&v, p)| (v, p.ed1)).collect();
    lp.add_constraint(&ed1, ComparisonOp::Le, d[0] + DISTORTION_SLACK);
    let ed2: Vec<_> = vars.iter().zip(points).map(|(&v, p)| (v, p.ed2)).collect();
    lp.add_constraint(&ed2, ComparisonOp::Le, d[1] + DISTORTION_SLACK);
    let sol = match lp.solve() {
        Ok(sol) => sol,
        Err(microlp::Error::Infeasible) => return Ok(None),
        Err(e) => return Err(lp_error(e)),
    };
    let lambda: Vec<f64> = vars.iter().map(|&v| sol[v].max(0.0)).collect();
    let total: f64 = lambda.iter().sum();
    let mix = |f: fn(&OperatingPoint) -> f64| points.iter().zip(&lambda).map(|(p, l)| f(p) * l).sum::<f64>() / total;
    let support: Vec<usize> = (0..points.len()).filter(|&i| lambda[i] > 1e-12).collect();
    if support.len() == 1 {
        return Ok(Some(points[support[0]]));
    }
    Ok(Some(OperatingPoint {
        r1: mix(|p| p.r1),
        r2: mix(|p| p.r2),
        ed1: mix(|p| p.ed1),
        ed2: mix(|p| p.ed2),
        vertex: Vertex::Mixture,
        fingerprint: 0,
    }))
}

/// Formats like C's `%.12g`.
pub fn format_g12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub const CSV_HEADER: &str = "set_id,theta,w1,w2,R1,R2,Ed1,Ed2,vertex,on_frontier";

impl RegionBoundary {
    /// Archived points first, then the time-shared frontier rows in sweep order.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        let set = self.metadata.set.as_str();
        let mut row = |theta: f64, w: [f64; 2], p: &OperatingPoint, on: bool| -> std::io::Result<()> {
            let nums = [theta, w[0], w[1], p.r1, p.r2, p.ed1, p.ed2].map(format_g12);
            writeln!(out, "{set},{},{},{}", nums.join(","), p.vertex.as_str(), u8::from(on))
        };
        for (p, &k) in self.points.iter().zip(&self.point_sweep) {
            let e = &self.sweep[k];
            row(e.theta, e.w, p, false)?;
        }
        for f in &self.frontier {
            let e = &self.sweep[f.index];
            row(e.theta, e.w, &f.point, f.on_frontier)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("ascii output"))
    }

    pub fn values(&self) -> Vec<Option<f64>> {
        self.sweep.iter().map(|e| e.value).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probkit::{binary_entropy, ProbTensor, SourceModel};

    fn pt(r1: f64, r2: f64, ed1: f64, ed2: f64) -> OperatingPoint {
        OperatingPoint {
            r1,
            r2,
            ed1,
            ed2,
            vertex: Vertex::A,
            fingerprint: 0,
        }
    }

    #[test]
    fn grid_endpoints_are_exact() {
        let g = weight_grid(17).unwrap();
        assert_eq!(g[0].1, [1.0, 0.0]);
        assert_eq!(g[16].1, [0.0, 1.0]);
        assert!((g[8].0 - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!(weight_grid(1).is_err());
    }

    #[test]
    fn g12_formatting() {
        assert_eq!(format_g12(0.0), "0");
        assert_eq!(format_g12(-0.0), "0");
        assert_eq!(format_g12(1.0), "1");
        assert_eq!(format_g12(1.0 + binary_entropy(0.1)), "1.46899559359");
        assert_eq!(format_g12(0.05), "0.05");
        assert_eq!(format_g12(1.5e-7), "1.5e-07");
        assert_eq!(format_g12(123456789012345.0), "1.23456789012e+14");
        assert_eq!(format_g12(0.99999999999999), "1");
        assert_eq!(format_g12(-2.5), "-2.5");
    }

    #[test]
    fn hull_drops_dominated_mixtures() {
        let pts = [pt(0.0, 1.0, 0.0, 0.0), pt(1.0, 0.0, 0.0, 0.0), pt(0.6, 0.6, 0.0, 0.0), pt(0.4, 0.4, 0.0, 0.0)];
        // (0.6, 0.6) lies above the midpoint of the first two
        assert_eq!(lower_hull(&pts).unwrap(), vec![0, 1, 3]);
    }

    #[test]
    fn time_sharing_meets_distortion_by_mixing() {
        let pts = [pt(1.0, 1.0, 0.0, 0.2), pt(0.0, 0.0, 0.2, 0.0)];
        let m = time_shared_minimum(&pts, [1.0, 1.0], [0.1, 0.1]).unwrap().unwrap();
        assert!((m.r1 - 0.5).abs() < 1e-8 && (m.ed1 - 0.1).abs() < 1e-8);
        assert_eq!(m.vertex, Vertex::Mixture);
        assert!(time_shared_minimum(&pts, [1.0, 1.0], [0.05, 0.05]).unwrap().is_none());
    }

    #[test]
    fn uniform_source_frontier_reaches_origin() {
        let uniform = ProbTensor::new(["U", "V"], vec![2, 2], vec![0.25; 4]).unwrap();
        let problem = RegionProblem::new(SourceModel::with_hamming(uniform).unwrap(), [0.5, 0.5], 2, 2).unwrap();
        let b = trace_region(&problem, SetId::In, &TraceConfig::new(3, 10, 1)).unwrap();
        assert!(b.frontier.iter().any(|f| f.point.r1 == 0.0 && f.point.r2 == 0.0));
        assert!(b.hull.iter().all(|&i| i < b.points.len()));
    }

    #[test]
    fn frontier_is_monotone_and_csv_is_stable() {
        let problem = RegionProblem::new(SourceModel::dsbs(0.1).unwrap(), [0.05, 0.05], 2, 2).unwrap();
        let cfg = TraceConfig::new(5, 30, 3);
        let b = trace_region(&problem, SetId::In, &cfg).unwrap();
        let kept: Vec<_> = b.frontier.iter().filter(|f| f.on_frontier).map(|f| f.point).collect();
        for pair in kept.windows(2) {
            assert!(pair[0].r1 <= pair[1].r1 + 1e-12 && pair[0].r2 >= pair[1].r2 - 1e-12);
        }
        for e in &b.sweep {
            if let (Some(v), Some(s)) = (e.value, e.best_value) {
                assert!(v <= s + 1e-9);
            }
        }
        let again = trace_region(&problem, SetId::In, &cfg).unwrap();
        assert_eq!(b.to_csv_string().unwrap(), again.to_csv_string().unwrap());
        assert!(b.to_csv_string().unwrap().starts_with(CSV_HEADER));
    }
}
