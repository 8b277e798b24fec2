use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rates::RatePair;
use super::sampler::{sample_channel_with, KernelDraw};
use crate::error::{Error, Result};
use crate::feasibility::{averaged_marginal_kernels, check_membership, SetId, DEFAULT_TOLERANCE};
use crate::probkit::{AuxChannel, ChannelSizes, SourceModel};
use crate::rng::{derive_seed, rng_from_seed};

/// Slack on the distortion constraint `(Ed1, Ed2) ≤ D`.
pub const DISTORTION_SLACK: f64 = 1e-9;

/// Improvements smaller than this are treated as numerical noise.
const IMPROVEMENT: f64 = 1e-14;

/// A source, a distortion target and auxiliary alphabet sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionProblem {
    pub source: SourceModel,
    pub d: [f64; 2],
    pub sizes: ChannelSizes,
    pub tolerance: f64,
}

impl RegionProblem {
    pub fn new(source: SourceModel, d: [f64; 2], x1: usize, x2: usize) -> Result<Self> {
        if d.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidArgument(format!("distortion target {d:?} must be finite and nonnegative")));
        }
        if x1 == 0 || x2 == 0 {
            return Err(Error::InvalidArgument("auxiliary alphabets must be nonempty".into()));
        }
        let sizes = ChannelSizes::new(source.u_size(), source.v_size(), x1, x2);
        Ok(RegionProblem {
            source,
            d,
            sizes,
            tolerance: DEFAULT_TOLERANCE,
        })
    }

    /// Auxiliary sizes `|U| + 1`, `|V| + 1`.
    pub fn with_default_sizes(source: SourceModel, d: [f64; 2]) -> Result<Self> {
        let (x1, x2) = (source.u_size() + 1, source.v_size() + 1);
        Self::new(source, d, x1, x2)
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn with_d(&self, d: [f64; 2]) -> Self {
        RegionProblem { d, ..self.clone() }
    }
}

/// Which corner of the rate polytope a point sits on; `Mixture` marks time-shared points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Vertex {
    A,
    B,
    #[serde(rename = "TS")]
    Mixture,
}

impl Vertex {
    pub fn as_str(self) -> &'static str {
        match self {
            Vertex::A => "A",
            Vertex::B => "B",
            Vertex::Mixture => "TS",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub r1: f64,
    pub r2: f64,
    pub ed1: f64,
    pub ed2: f64,
    pub vertex: Vertex,
    /// Fingerprint of the generating channel; 0 for mixtures.
    pub fingerprint: u64,
}

impl OperatingPoint {
    pub fn coords(&self) -> [f64; 4] {
        [self.r1, self.r2, self.ed1, self.ed2]
    }

    pub fn weighted_rate(&self, w: [f64; 2]) -> f64 {
        w[0] * self.r1 + w[1] * self.r2
    }

    pub fn meets(&self, d: [f64; 2]) -> bool {
        self.ed1 <= d[0] + DISTORTION_SLACK && self.ed2 <= d[1] + DISTORTION_SLACK
    }
}

/// Both rate vertices and the optimal-decoder distortions of one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub vertices: [RatePair; 2],
    pub ed1: f64,
    pub ed2: f64,
    pub fingerprint: u64,
}

impl Evaluation {
    pub fn points(&self) -> [OperatingPoint; 2] {
        let at = |i: usize, vertex| OperatingPoint {
            r1: self.vertices[i].r1,
            r2: self.vertices[i].r2,
            ed1: self.ed1,
            ed2: self.ed2,
            vertex,
            fingerprint: self.fingerprint,
        };
        [at(0, Vertex::A), at(1, Vertex::B)]
    }

    /// The better corner under `w`, vertex A on ties.
    pub fn best_point(&self, w: [f64; 2]) -> OperatingPoint {
        let [a, b] = self.points();
        if b.weighted_rate(w) < a.weighted_rate(w) {
            b
        } else {
            a
        }
    }

    pub fn value(&self, w: [f64; 2]) -> f64 {
        self.best_point(w).weighted_rate(w)
    }

    /// Total excess distortion over `d` beyond the slack.
    pub fn violation(&self, d: [f64; 2]) -> f64 {
        (self.ed1 - d[0] - DISTORTION_SLACK).max(0.0) + (self.ed2 - d[1] - DISTORTION_SLACK).max(0.0)
    }
}

fn plogp_sum(xs: impl Iterator<Item = f64>) -> f64 {
    -xs.filter(|&p| p > 0.0).map(|p| p * p.log2()).sum::<f64>()
}

/// Rates and optimal-decoder distortions of `ch` driven by `src`.
///
/// Works on flat arrays; agrees with [`super::rate_vertices`] and
/// [`super::optimal_decoders`] applied to the joined tensor.
pub fn evaluate(src: &SourceModel, ch: &AuxChannel) -> Result<Evaluation> {
    let s = ch.sizes();
    if (s.u, s.v) != (src.u_size(), src.v_size()) {
        return Err(Error::SizeMismatch("channel and source alphabets differ".into()));
    }
    let puv = src.joint().values();
    let cells = s.x1 * s.x2;
    let mut p_x1x2 = vec![0.0; cells];
    let mut p_uvx1 = vec![0.0; s.u * s.v * s.x1];
    let mut p_uvx2 = vec![0.0; s.u * s.v * s.x2];
    let mut p_cell_u = vec![0.0; cells * s.u];
    let mut p_cell_v = vec![0.0; cells * s.v];
    let mut h_all = 0.0;
    for u in 0..s.u {
        for v in 0..s.v {
            let m = puv[u * s.v + v];
            if m == 0.0 {
                continue;
            }
            let slice = ch.slice(u, v);
            for (c, &k) in slice.iter().enumerate() {
                let p = m * k;
                if p == 0.0 {
                    continue;
                }
                let (a, b) = (c / s.x2, c % s.x2);
                h_all -= p * p.log2();
                p_x1x2[c] += p;
                p_uvx1[(u * s.v + v) * s.x1 + a] += p;
                p_uvx2[(u * s.v + v) * s.x2 + b] += p;
                p_cell_u[c * s.u + u] += p;
                p_cell_v[c * s.v + v] += p;
            }
        }
    }
    let p_x1: Vec<f64> = (0..s.x1).map(|a| p_x1x2[a * s.x2..(a + 1) * s.x2].iter().sum()).collect();
    let p_x2: Vec<f64> = (0..s.x2).map(|b| (0..s.x1).map(|a| p_x1x2[a * s.x2 + b]).sum()).collect();
    let h_uv = plogp_sum(puv.iter().copied());
    let h_x1 = plogp_sum(p_x1.iter().copied());
    let h_x2 = plogp_sum(p_x2.iter().copied());
    let h_x1x2 = plogp_sum(p_x1x2.iter().copied());
    let h_uvx1 = plogp_sum(p_uvx1.iter().copied());
    let h_uvx2 = plogp_sum(p_uvx2.iter().copied());
    let floor = |x: f64| x.max(0.0);
    let r1_min = floor(h_uvx2 + h_x1x2 - h_all - h_x2);
    let r2_min = floor(h_uvx1 + h_x1x2 - h_all - h_x1);
    let sum = floor(h_uv + h_x1x2 - h_all);
    let vertices = [
        RatePair {
            r1: r1_min.max(sum - r2_min),
            r2: r2_min,
        },
        RatePair {
            r1: r1_min,
            r2: r2_min.max(sum - r1_min),
        },
    ];
    let best_cost = |p_cell: &[f64], n_src: usize, d: &crate::probkit::Distortion| -> f64 {
        (0..cells)
            .map(|c| {
                let mass = &p_cell[c * n_src..(c + 1) * n_src];
                (0..d.reconstruction_size())
                    .map(|r| mass.iter().enumerate().map(|(x, &m)| m * d.get(x, r)).sum::<f64>())
                    .fold(f64::INFINITY, f64::min)
            })
            .sum()
    };
    Ok(Evaluation {
        vertices,
        ed1: best_cost(&p_cell_u, s.u, src.d1()),
        ed2: best_cost(&p_cell_v, s.v, src.d2()),
        fingerprint: ch.fingerprint(),
    })
}

/// Nondominated operating points in `(R1, R2, Ed1, Ed2)` with their channels.
#[derive(Debug, Clone, Default)]
pub struct ParetoArchive {
    entries: Vec<ArchiveEntry>,
}

/// An archived point, its channel and a caller-defined tag (the sweep index in traces).
#[derive(Debug, Clone)]
pub struct ArchiveEntry {
    pub point: OperatingPoint,
    pub channel: Arc<AuxChannel>,
    pub tag: usize,
}

fn weakly_dominates(a: &[f64; 4], b: &[f64; 4]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

impl ParetoArchive {
    pub fn insert(&mut self, point: OperatingPoint, channel: &Arc<AuxChannel>) -> bool {
        self.insert_tagged(point, channel, 0)
    }

    /// Adds `point` unless an archived point is at least as good in every coordinate.
    pub fn insert_tagged(&mut self, point: OperatingPoint, channel: &Arc<AuxChannel>, tag: usize) -> bool {
        let c = point.coords();
        if self.entries.iter().any(|e| weakly_dominates(&e.point.coords(), &c)) {
            return false;
        }
        self.entries.retain(|e| !weakly_dominates(&c, &e.point.coords()));
        self.entries.push(ArchiveEntry {
            point,
            channel: Arc::clone(channel),
            tag,
        });
        true
    }

    pub fn insert_evaluation(&mut self, eval: &Evaluation, channel: &Arc<AuxChannel>) {
        for p in eval.points() {
            self.insert(p, channel);
        }
    }

    pub fn merge(&mut self, other: &ParetoArchive) {
        for e in &other.entries {
            self.insert_tagged(e.point, &e.channel, e.tag);
        }
    }

    /// Merges `other`, overwriting its tags with `tag`.
    pub fn merge_as(&mut self, other: &ParetoArchive, tag: usize) {
        for e in &other.entries {
            self.insert_tagged(e.point, &e.channel, tag);
        }
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn points(&self) -> Vec<OperatingPoint> {
        self.entries.iter().map(|e| e.point).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Tuning knobs of the multistart search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Row distributions cycled through by successive restarts.
    pub draws: Vec<KernelDraw>,
    /// Number of best starts handed to local refinement.
    pub refine_top: usize,
    pub step_levels: Vec<f64>,
    pub max_passes: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            draws: vec![KernelDraw::Deterministic, KernelDraw::Dirichlet(1.0), KernelDraw::Dirichlet(0.3)],
            refine_top: 3,
            step_levels: vec![1.0, 0.3, 0.1, 0.03, 0.01, 0.003, 0.001, 1e-4],
            max_passes: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Minimum {
    pub value: f64,
    pub point: OperatingPoint,
    pub channel: AuxChannel,
    pub evaluations: usize,
}

/// Result of one scalarized search. `InfeasibleAtBudget` only means the
/// search found nothing within the distortion target, not that nothing exists.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Found(Minimum),
    InfeasibleAtBudget { evaluations: usize, least_violation: f64 },
}

impl Outcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            Outcome::Found(m) => Some(m.value),
            Outcome::InfeasibleAtBudget { .. } => None,
        }
    }

    pub fn minimum(&self) -> Option<&Minimum> {
        match self {
            Outcome::Found(m) => Some(m),
            Outcome::InfeasibleAtBudget { .. } => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub outcome: Outcome,
    pub archive: ParetoArchive,
}

#[derive(Debug, Clone)]
struct Candidate {
    channel: Arc<AuxChannel>,
    eval: Evaluation,
    violation: f64,
    value: f64,
}

impl Candidate {
    fn new(problem: &RegionProblem, w: [f64; 2], channel: AuxChannel) -> Result<Self> {
        let eval = evaluate(&problem.source, &channel)?;
        Ok(Candidate {
            channel: Arc::new(channel),
            violation: eval.violation(problem.d),
            value: eval.value(w),
            eval,
        })
    }

    fn improves_on(&self, other: &Candidate) -> bool {
        if other.violation > 0.0 {
            self.violation < other.violation - IMPROVEMENT
                || (self.violation == 0.0 && other.violation == 0.0)
        } else {
            self.violation == 0.0 && self.value < other.value - IMPROVEMENT
        }
    }

    fn rank_key(&self) -> (f64, f64) {
        (self.violation, self.value)
    }
}

/// Minimizes `w1 R1 + w2 R2` over channels in `set` meeting the distortion target.
pub fn minimize_weighted_rate(problem: &RegionProblem, set: SetId, w: [f64; 2], budget: usize, seed: u64) -> Result<Outcome> {
    Ok(minimize_weighted_rate_with(problem, set, w, budget, seed, &[], &SearchOptions::default())?.outcome)
}

/// Structural starting points: every combination of an identity-like and a
/// constant encoder on each side.
fn structural_starts(sizes: ChannelSizes) -> Result<Vec<AuxChannel>> {
    let id1: Vec<usize> = (0..sizes.u).map(|u| u % sizes.x1).collect();
    let id2: Vec<usize> = (0..sizes.v).map(|v| v % sizes.x2).collect();
    let c1 = vec![0; sizes.u];
    let c2 = vec![0; sizes.v];
    [(&c1, &c2), (&id1, &id2), (&id1, &c2), (&c1, &id2)]
        .into_iter()
        .map(|(f1, f2)| AuxChannel::deterministic(f1, f2, sizes.x1, sizes.x2))
        .collect()
}

/// Full search with extra starting channels. Injected channels that fail the
/// membership test of `set` are dropped.
pub fn minimize_weighted_rate_with(
    problem: &RegionProblem,
    set: SetId,
    w: [f64; 2],
    budget: usize,
    seed: u64,
    inject: &[AuxChannel],
    options: &SearchOptions,
) -> Result<SearchResult> {
    if !(w.iter().all(|x| x.is_finite() && *x >= 0.0) && w.iter().any(|&x| x > 0.0)) {
        return Err(Error::InvalidArgument(format!("weight {w:?} must be nonnegative and nonzero")));
    }
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    if options.draws.is_empty() {
        return Err(Error::InvalidArgument("search needs at least one kernel draw".into()));
    }
    let src = &problem.source;
    let member = |ch: &AuxChannel| -> Result<bool> { Ok(check_membership(set, ch, src, problem.tolerance)?.is_accepted()) };

    let mut fixed = Vec::new();
    for ch in structural_starts(problem.sizes)?.into_iter().chain(inject.iter().cloned()) {
        if ch.sizes() != problem.sizes {
            return Err(Error::SizeMismatch("injected channel has the wrong sizes".into()));
        }
        if member(&ch)? {
            fixed.push(Candidate::new(problem, w, ch)?);
        } else {
            log::debug!("{set}: dropping a starting channel outside the set");
        }
    }
    let sampled: Vec<Candidate> = (0..budget)
        .into_par_iter()
        .map(|r| {
            let draw = options.draws[r % options.draws.len()];
            let mut rng = rng_from_seed(derive_seed(seed, &[r as u64]));
            let ch = sample_channel_with(set, problem.sizes, src, draw, problem.tolerance, &mut rng)?;
            Candidate::new(problem, w, ch)
        })
        .collect::<Result<_>>()?;

    let mut archive = ParetoArchive::default();
    let starts: Vec<Candidate> = fixed.into_iter().chain(sampled).collect();
    for c in &starts {
        archive.insert_evaluation(&c.eval, &c.channel);
    }
    let mut evaluations = starts.len();

    let mut order: Vec<usize> = (0..starts.len()).collect();
    order.sort_by(|&i, &j| {
        starts[i]
            .rank_key()
            .partial_cmp(&starts[j].rank_key())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let mut chosen: Vec<usize> = Vec::new();
    for i in order {
        if chosen.len() == options.refine_top {
            break;
        }
        if chosen.iter().all(|&j| starts[j].eval.fingerprint != starts[i].eval.fingerprint) {
            chosen.push(i);
        }
    }
    let refined: Vec<(Candidate, ParetoArchive, usize)> = chosen
        .par_iter()
        .map(|&i| refine(problem, set, w, starts[i].clone(), options))
        .collect::<Result<_>>()?;

    let mut best: Option<Candidate> = None;
    for (c, local, evals) in refined {
        archive.merge(&local);
        evaluations += evals;
        if best.as_ref().is_none_or(|b| c.improves_on(b)) {
            best = Some(c);
        }
    }
    let best = best.expect("at least one start");
    let outcome = if best.violation == 0.0 {
        Outcome::Found(Minimum {
            value: best.value,
            point: best.eval.best_point(w),
            channel: (*best.channel).clone(),
            evaluations,
        })
    } else {
        Outcome::InfeasibleAtBudget {
            evaluations,
            least_violation: best.violation,
        }
    };
    Ok(SearchResult { outcome, archive })
}

/// A candidate perturbation, applied to the channel values.
#[derive(Debug, Clone, Copy)]
enum Move {
    /// Shift kernel mass `p(x1 = from | u) → to`, uniformly over `v`.
    Shift1 { u: usize, from: usize, to: usize },
    Shift2 { v: usize, from: usize, to: usize },
    /// `±δ` around the rectangle `(i, k), (j, l)` of one coupling; keeps both marginals.
    Cycle { u: usize, v: usize, i: usize, j: usize, k: usize, l: usize, sign: f64 },
    /// Move mass between two cells of one slice.
    Cell { u: usize, v: usize, from: usize, to: usize },
}

fn moves_for(set: SetId, s: ChannelSizes) -> Vec<Move> {
    let mut moves = Vec::new();
    for u in 0..s.u {
        for from in 0..s.x1 {
            for to in 0..s.x1 {
                if from != to {
                    moves.push(Move::Shift1 { u, from, to });
                }
            }
        }
    }
    for v in 0..s.v {
        for from in 0..s.x2 {
            for to in 0..s.x2 {
                if from != to {
                    moves.push(Move::Shift2 { v, from, to });
                }
            }
        }
    }
    if set == SetId::In {
        return moves;
    }
    for u in 0..s.u {
        for v in 0..s.v {
            for i in 0..s.x1 {
                for j in i + 1..s.x1 {
                    for k in 0..s.x2 {
                        for l in k + 1..s.x2 {
                            for sign in [1.0, -1.0] {
                                moves.push(Move::Cycle { u, v, i, j, k, l, sign });
                            }
                        }
                    }
                }
            }
        }
    }
    if set == SetId::Out3 {
        for u in 0..s.u {
            for v in 0..s.v {
                for from in 0..s.slice_len() {
                    for to in 0..s.slice_len() {
                        if from != to {
                            moves.push(Move::Cell { u, v, from, to });
                        }
                    }
                }
            }
        }
    }
    moves
}

/// Applies `mv` with step `delta`; `None` if it would not change anything.
fn apply_move(set: SetId, ch: &AuxChannel, mv: Move, delta: f64) -> Result<Option<AuxChannel>> {
    let s = ch.sizes();
    if set == SetId::In {
        // move within the averaged kernels and rebuild the product
        let (mut k1, mut k2) = averaged_marginal_kernels(ch);
        let (row, from, to) = match mv {
            Move::Shift1 { u, from, to } => (&mut k1[u], from, to),
            Move::Shift2 { v, from, to } => (&mut k2[v], from, to),
            _ => unreachable!("long-chain search only shifts kernels"),
        };
        let amount = delta.min(row[from]);
        if amount <= 0.0 {
            return Ok(None);
        }
        row[from] -= amount;
        row[to] += amount;
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x = x.max(0.0) / total);
        return Ok(Some(AuxChannel::product(&k1, &k2)?));
    }
    let mut values = ch.values().to_vec();
    let slice_start = |u: usize, v: usize| (u * s.v + v) * s.slice_len();
    let mut changed = false;
    match mv {
        Move::Shift1 { u, from, to } => {
            for v in 0..s.v {
                let base = slice_start(u, v);
                let row_mass: f64 = (0..s.x2).map(|b| values[base + from * s.x2 + b]).sum();
                if row_mass <= 0.0 {
                    continue;
                }
                let frac = (delta / row_mass).min(1.0);
                for b in 0..s.x2 {
                    let t = values[base + from * s.x2 + b] * frac;
                    values[base + from * s.x2 + b] -= t;
                    values[base + to * s.x2 + b] += t;
                }
                changed = true;
            }
        }
        Move::Shift2 { v, from, to } => {
            for u in 0..s.u {
                let base = slice_start(u, v);
                let col_mass: f64 = (0..s.x1).map(|a| values[base + a * s.x2 + from]).sum();
                if col_mass <= 0.0 {
                    continue;
                }
                let frac = (delta / col_mass).min(1.0);
                for a in 0..s.x1 {
                    let t = values[base + a * s.x2 + from] * frac;
                    values[base + a * s.x2 + from] -= t;
                    values[base + a * s.x2 + to] += t;
                }
                changed = true;
            }
        }
        Move::Cycle { u, v, i, j, k, l, sign } => {
            let base = slice_start(u, v);
            let at = |a: usize, b: usize| base + a * s.x2 + b;
            let (plus, minus) = if sign > 0.0 {
                ([at(i, k), at(j, l)], [at(i, l), at(j, k)])
            } else {
                ([at(i, l), at(j, k)], [at(i, k), at(j, l)])
            };
            let amount = delta.min(values[minus[0]]).min(values[minus[1]]);
            if amount > 0.0 {
                minus.iter().for_each(|&c| values[c] -= amount);
                plus.iter().for_each(|&c| values[c] += amount);
                changed = true;
            }
        }
        Move::Cell { u, v, from, to } => {
            let base = slice_start(u, v);
            let amount = delta.min(values[base + from]);
            if amount > 0.0 {
                values[base + from] -= amount;
                values[base + to] += amount;
                changed = true;
            }
        }
    }
    if !changed {
        return Ok(None);
    }
    values.iter_mut().for_each(|x| *x = x.max(0.0));
    Ok(Some(AuxChannel::from_weights(s, values)?))
}

/// Coordinate-wise descent over `moves_for(set)` at decreasing step sizes;
/// a move is kept when the result stays in the set and strictly improves.
fn refine(
    problem: &RegionProblem,
    set: SetId,
    w: [f64; 2],
    start: Candidate,
    options: &SearchOptions,
) -> Result<(Candidate, ParetoArchive, usize)> {
    let moves = moves_for(set, problem.sizes);
    let mut current = start;
    let mut archive = ParetoArchive::default();
    let mut evaluations = 0;
    for &delta in &options.step_levels {
        for _ in 0..options.max_passes {
            let mut improved = false;
            for &mv in &moves {
                let Some(ch) = apply_move(set, &current.channel, mv, delta)? else {
                    continue;
                };
                evaluations += 1;
                let cand = Candidate::new(problem, w, ch)?;
                if !cand.improves_on(&current) {
                    continue;
                }
                if set != SetId::In && !check_membership(set, &cand.channel, &problem.source, problem.tolerance)?.is_accepted() {
                    continue;
                }
                archive.insert_evaluation(&cand.eval, &cand.channel);
                current = cand;
                improved = true;
            }
            if !improved {
                break;
            }
        }
    }
    Ok((current, archive, evaluations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probkit::{binary_entropy, join, ProbTensor};
    use crate::regions::{optimal_decoders, rate_vertices};
    use crate::rng::rng_from_seed;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fast_evaluation_agrees_with_tensor_path() {
        let joint = ProbTensor::from_matrix("U", "V", &[vec![0.3, 0.05, 0.05], vec![0.02, 0.2, 0.08], vec![0.1, 0.05, 0.15]]).unwrap();
        let src = SourceModel::with_hamming(joint).unwrap();
        let mut rng = rng_from_seed(4);
        for set in SetId::ALL {
            for _ in 0..10 {
                let ch = crate::regions::sample_channel(set, ChannelSizes::new(3, 3, 2, 4), &src, &mut rng).unwrap();
                let e = evaluate(&src, &ch).unwrap();
                let j = join(src.joint(), &ch).unwrap();
                let r = rate_vertices(&j).unwrap();
                let d = optimal_decoders(&j, &src).unwrap();
                for k in 0..2 {
                    assert_abs_diff_eq!(e.vertices[k].r1, r[k].r1, epsilon = 1e-12);
                    assert_abs_diff_eq!(e.vertices[k].r2, r[k].r2, epsilon = 1e-12);
                }
                assert_abs_diff_eq!(e.ed1, d.ed1, epsilon = 1e-14);
                assert_abs_diff_eq!(e.ed2, d.ed2, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn uniform_source_at_half_distortion_is_free() {
        let uniform = ProbTensor::new(["U", "V"], vec![2, 2], vec![0.25; 4]).unwrap();
        let problem = RegionProblem::new(SourceModel::with_hamming(uniform).unwrap(), [0.5, 0.5], 2, 2).unwrap();
        let out = minimize_weighted_rate(&problem, SetId::In, [1.0, 1.0], 10, 0).unwrap();
        assert_eq!(out.value(), Some(0.0));
    }

    #[test]
    fn lossless_sum_rate() {
        let problem = RegionProblem::new(SourceModel::dsbs(0.1).unwrap(), [0.0, 0.0], 2, 2).unwrap();
        let target = 1.0 + binary_entropy(0.1);
        let v_in = minimize_weighted_rate(&problem, SetId::In, [1.0, 1.0], 30, 1).unwrap().value().unwrap();
        assert_abs_diff_eq!(v_in, target, epsilon = 1e-3);
        for set in [SetId::Out1, SetId::Out3, SetId::Cap13] {
            let v = minimize_weighted_rate(&problem, set, [1.0, 1.0], 30, 1).unwrap().value().unwrap();
            assert!(v <= target + 1e-6, "{set}: {v}");
        }
    }

    #[test]
    fn unreachable_target_is_reported() {
        // |X1| = |X2| = 1 carries nothing, so zero distortion is out of reach
        let problem = RegionProblem::new(SourceModel::dsbs(0.1).unwrap(), [0.0, 0.0], 1, 1).unwrap();
        let out = minimize_weighted_rate(&problem, SetId::Out1, [1.0, 0.0], 5, 0).unwrap();
        assert!(matches!(out, Outcome::InfeasibleAtBudget { .. }));
    }

    #[test]
    fn search_is_deterministic() {
        let problem = RegionProblem::with_default_sizes(SourceModel::dsbs(0.1).unwrap(), [0.05, 0.05]).unwrap();
        for set in SetId::ALL {
            let a = minimize_weighted_rate(&problem, set, [0.6, 0.8], 20, 7).unwrap();
            let b = minimize_weighted_rate(&problem, set, [0.6, 0.8], 20, 7).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn archive_keeps_only_nondominated_points() {
        let ch = Arc::new(AuxChannel::trivial(ChannelSizes::new(1, 1, 1, 1)).unwrap());
        let pt = |r1, r2, ed1, ed2| OperatingPoint {
            r1,
            r2,
            ed1,
            ed2,
            vertex: Vertex::A,
            fingerprint: 0,
        };
        let mut a = ParetoArchive::default();
        assert!(a.insert(pt(1.0, 1.0, 0.1, 0.1), &ch));
        assert!(!a.insert(pt(1.0, 1.0, 0.2, 0.1), &ch));
        assert!(!a.insert(pt(1.0, 1.0, 0.1, 0.1), &ch));
        assert!(a.insert(pt(0.5, 2.0, 0.1, 0.1), &ch));
        assert!(a.insert(pt(0.5, 1.0, 0.1, 0.1), &ch));
        assert_eq!(a.len(), 1);
    }
}
