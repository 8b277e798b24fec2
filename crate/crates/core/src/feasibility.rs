//! Membership tests for the feasible sets of auxiliary channels.
//!
//! Every test returns a [`MembershipReport`] whose `defect` is the largest
//! constraint violation found; a channel is accepted iff `defect ≤ tol`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probkit::{join, AuxChannel, ProbTensor, SourceModel, MASS_FLOOR, U, V, X1, X2};
use crate::spectral::{maximal_correlation, tilde};

/// Default membership tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-7;

/// The feasible sets of `p(x1, x2 | u, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetId {
    /// Long Markov chain `X1 - U - V - X2`.
    In,
    /// Short chains `X1 - U - V` and `U - V - X2`.
    Out1,
    /// Spectral conditions on the `X1X2` joint, unconditionally and given `u`, `v`, `(u, v)`.
    Out3,
    /// Intersection of `Out1` and `Out3`.
    Cap13,
}

impl SetId {
    pub const ALL: [SetId; 4] = [SetId::In, SetId::Cap13, SetId::Out1, SetId::Out3];

    pub fn as_str(self) -> &'static str {
        match self {
            SetId::In => "in",
            SetId::Out1 => "out1",
            SetId::Out3 => "out3",
            SetId::Cap13 => "cap13",
        }
    }

    /// Known inclusions: `In ⊆ Cap13 ⊆ Out1, Out3`. Nothing is claimed
    /// between `Out1` and `Out3`.
    pub fn contains(self, other: SetId) -> bool {
        use SetId::*;
        match (self, other) {
            (a, b) if a == b => true,
            (Cap13, In) => true,
            (Out1 | Out3, In | Cap13) => true,
            _ => false,
        }
    }

    /// Position in an order where every set comes after all of its known subsets.
    pub fn nesting_rank(self) -> usize {
        match self {
            SetId::In => 0,
            SetId::Cap13 => 1,
            SetId::Out1 => 2,
            SetId::Out3 => 3,
        }
    }
}

impl fmt::Display for SetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "in" => Ok(SetId::In),
            "out1" => Ok(SetId::Out1),
            "out3" => Ok(SetId::Out3),
            "cap13" => Ok(SetId::Cap13),
            other => Err(Error::InvalidArgument(format!(
                "unknown set `{other}` (expected in, out1, out3 or cap13)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accepted,
    Rejected,
}

impl Verdict {
    fn from_defect(defect: f64, tol: f64) -> Self {
        if defect <= tol {
            Verdict::Accepted
        } else {
            Verdict::Rejected
        }
    }

    pub fn is_accepted(self) -> bool {
        self == Verdict::Accepted
    }
}

/// Worst slack `λ_2(UV) - max_i λ_i(...)` of each spectral condition.
/// Negative values are violations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMargins {
    pub lambda2_uv: f64,
    /// Unconditional `X1X2` joint.
    pub cond1: f64,
    /// Given each `u`.
    pub cond2: f64,
    /// Given each `v`.
    pub cond3: f64,
    /// Given each `(u, v)`.
    pub cond4: f64,
    /// Conditioning slices skipped for having (near) zero mass.
    pub skipped_slices: usize,
}

impl SpectralMargins {
    pub fn worst(&self) -> f64 {
        self.cond1.min(self.cond2).min(self.cond3).min(self.cond4)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub set: SetId,
    pub verdict: Verdict,
    pub defect: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub margins: Option<SpectralMargins>,
}

impl MembershipReport {
    pub fn is_accepted(&self) -> bool {
        self.verdict.is_accepted()
    }
}

/// `max |p(c | a, b) - p(c | b)|` over assignments with `p(a, b) ≥ 1e-12`;
/// zero iff `A - B - C` holds on the support.
pub fn markov_defect<A: AsRef<str>, B: AsRef<str>, C: AsRef<str>>(
    t: &ProbTensor,
    a: &[A],
    b: &[B],
    c: &[C],
) -> Result<f64> {
    let all = union(&[&names_of(a), &names_of(b), &names_of(c)]);
    let ab = union(&[&names_of(a), &names_of(b)]);
    let bc = union(&[&names_of(b), &names_of(c)]);
    let b = names_of(b);
    let joint = t.marginal(&all)?;
    let (m_ab, m_bc, m_b) = (t.marginal(&ab)?, t.marginal(&bc)?, t.marginal(&b)?);
    let pick = |group: &[String], index: &[usize]| -> Vec<usize> {
        group
            .iter()
            .map(|g| index[all.iter().position(|x| x == g).expect("subset of union")])
            .collect()
    };
    let mut defect: f64 = 0.0;
    let mut index = vec![0usize; all.len()];
    loop {
        let p_ab = m_ab.get(&pick(&ab, &index));
        if p_ab >= MASS_FLOOR {
            let p_b = m_b.get(&pick(&b, &index));
            let gap = (joint.get(&index) / p_ab - m_bc.get(&pick(&bc, &index)) / p_b).abs();
            defect = defect.max(gap);
        }
        if !crate::probkit::advance_index(&mut index, joint.sizes()) {
            break;
        }
    }
    Ok(defect)
}

fn union(groups: &[&[String]]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for g in groups {
        for a in g.iter() {
            if !out.contains(a) {
                out.push(a.clone());
            }
        }
    }
    out
}

fn names_of<S: AsRef<str>>(g: &[S]) -> Vec<String> {
    g.iter().map(|x| x.as_ref().to_string()).collect()
}

/// Marginal kernels `p(x1|u)` and `p(x2|v)` obtained by averaging the
/// channel's marginals uniformly over the other source symbol.
pub fn averaged_marginal_kernels(ch: &AuxChannel) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let s = ch.sizes();
    let k1 = (0..s.u)
        .map(|u| {
            let mut row = vec![0.0; s.x1];
            for v in 0..s.v {
                for (r, m) in row.iter_mut().zip(ch.x1_marginal(u, v)) {
                    *r += m / s.v as f64;
                }
            }
            row
        })
        .collect();
    let k2 = (0..s.v)
        .map(|v| {
            let mut row = vec![0.0; s.x2];
            for u in 0..s.u {
                for (r, m) in row.iter_mut().zip(ch.x2_marginal(u, v)) {
                    *r += m / s.u as f64;
                }
            }
            row
        })
        .collect();
    (k1, k2)
}

/// Long chain: the channel must factor as `p(x1|u) p(x2|v)`. The defect is
/// the largest entrywise gap to the product of its averaged marginal kernels.
pub fn in_s_in(ch: &AuxChannel, tol: f64) -> MembershipReport {
    let s = ch.sizes();
    let (k1, k2) = averaged_marginal_kernels(ch);
    let mut defect: f64 = 0.0;
    for u in 0..s.u {
        for v in 0..s.v {
            for (i, &p) in ch.slice(u, v).iter().enumerate() {
                let (a, b) = (i / s.x2, i % s.x2);
                defect = defect.max((p - k1[u][a] * k2[v][b]).abs());
            }
        }
    }
    MembershipReport {
        set: SetId::In,
        verdict: Verdict::from_defect(defect, tol),
        defect,
        tolerance: tol,
        margins: None,
    }
}

/// Short chains: `p(x1|u,v)` must not depend on `v` and `p(x2|u,v)` must not
/// depend on `u`. The defect is the largest such variation.
pub fn in_s_out1(ch: &AuxChannel, tol: f64) -> MembershipReport {
    let s = ch.sizes();
    let mut defect: f64 = 0.0;
    for u in 0..s.u {
        let rows: Vec<Vec<f64>> = (0..s.v).map(|v| ch.x1_marginal(u, v)).collect();
        defect = defect.max(max_spread(&rows));
    }
    for v in 0..s.v {
        let rows: Vec<Vec<f64>> = (0..s.u).map(|u| ch.x2_marginal(u, v)).collect();
        defect = defect.max(max_spread(&rows));
    }
    MembershipReport {
        set: SetId::Out1,
        verdict: Verdict::from_defect(defect, tol),
        defect,
        tolerance: tol,
        margins: None,
    }
}

fn max_spread(rows: &[Vec<f64>]) -> f64 {
    let width = rows[0].len();
    (0..width)
        .map(|j| {
            let (lo, hi) = rows
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r[j]), hi.max(r[j])));
            hi - lo
        })
        .fold(0.0, f64::max)
}

/// Largest `λ_i`, `2 ≤ i ≤ max_index`, of the normalized `X1X2` joint.
fn worst_lambda(joint_x1x2: &ProbTensor, max_index: usize) -> Result<f64> {
    if max_index < 2 {
        return Ok(0.0);
    }
    let spectrum = tilde(joint_x1x2)?.spectrum()?;
    Ok((2..=max_index).map(|i| spectrum.lambda(i)).fold(0.0, f64::max))
}

fn check_sizes(ch: &AuxChannel, src: &SourceModel) -> Result<()> {
    let s = ch.sizes();
    if (s.u, s.v) != (src.u_size(), src.v_size()) {
        return Err(Error::SizeMismatch(format!(
            "channel expects ({}, {}) source symbols, source has ({}, {})",
            s.u,
            s.v,
            src.u_size(),
            src.v_size()
        )));
    }
    Ok(())
}

/// Spectral margins of the four conditions for `i = 2..=min(|X1|, |X2|)`.
pub fn spectral_margins(ch: &AuxChannel, src: &SourceModel) -> Result<SpectralMargins> {
    check_sizes(ch, src)?;
    let s = ch.sizes();
    let max_index = s.x1.min(s.x2);
    let lambda2_uv = maximal_correlation(src.joint())?;
    let joint = join(src.joint(), ch)?;
    let mut skipped = 0usize;

    let cond1 = lambda2_uv - worst_lambda(&joint.marginal(&[X1, X2])?, max_index)?;

    let conditioned = |axis: &str, size: usize, skipped: &mut usize| -> Result<f64> {
        let m = joint.marginal(&[axis, X1, X2])?;
        let mut worst: f64 = 0.0;
        for value in 0..size {
            match m.condition_on(&[(axis, value)])? {
                Some(slice) => worst = worst.max(worst_lambda(&slice, max_index)?),
                None => {
                    log::debug!("skipping zero-mass slice {axis}={value}");
                    *skipped += 1;
                }
            }
        }
        Ok(lambda2_uv - worst)
    };
    let cond2 = conditioned(U, s.u, &mut skipped)?;
    let cond3 = conditioned(V, s.v, &mut skipped)?;

    let mut worst4: f64 = 0.0;
    for u in 0..s.u {
        for v in 0..s.v {
            match joint.condition_on(&[(U, u), (V, v)])? {
                Some(slice) => worst4 = worst4.max(worst_lambda(&slice, max_index)?),
                None => {
                    log::debug!("skipping zero-mass slice (U, V)=({u}, {v})");
                    skipped += 1;
                }
            }
        }
    }
    Ok(SpectralMargins {
        lambda2_uv,
        cond1,
        cond2,
        cond3,
        cond4: lambda2_uv - worst4,
        skipped_slices: skipped,
    })
}

/// Spectral outer set: accepted iff every `λ_i` (`i ≥ 2`) of the `X1X2`
/// joint, and of its conditionals given each realized `u`, `v` and `(u, v)`,
/// is at most `λ_2(UV) + tol`.
pub fn in_s_out3(ch: &AuxChannel, src: &SourceModel, tol: f64) -> Result<MembershipReport> {
    let margins = spectral_margins(ch, src)?;
    let defect = (-margins.worst()).max(0.0);
    Ok(MembershipReport {
        set: SetId::Out3,
        verdict: Verdict::from_defect(defect, tol),
        defect,
        tolerance: tol,
        margins: Some(margins),
    })
}

/// Both the short-chain and the spectral conditions.
pub fn in_intersection(ch: &AuxChannel, src: &SourceModel, tol: f64) -> Result<MembershipReport> {
    let out1 = in_s_out1(ch, tol);
    let out3 = in_s_out3(ch, src, tol)?;
    let defect = out1.defect.max(out3.defect);
    Ok(MembershipReport {
        set: SetId::Cap13,
        verdict: Verdict::from_defect(defect, tol),
        defect,
        tolerance: tol,
        margins: out3.margins,
    })
}

/// Dispatches to the membership test for `set`.
pub fn check_membership(set: SetId, ch: &AuxChannel, src: &SourceModel, tol: f64) -> Result<MembershipReport> {
    check_sizes(ch, src)?;
    match set {
        SetId::In => Ok(in_s_in(ch, tol)),
        SetId::Out1 => Ok(in_s_out1(ch, tol)),
        SetId::Out3 => in_s_out3(ch, src, tol),
        SetId::Cap13 => in_intersection(ch, src, tol),
    }
}
