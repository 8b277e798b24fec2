use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::trace::RegionBoundary;
use crate::error::{Error, Result};
use crate::feasibility::SetId;

/// Default optimization slack allowed in the ordering checks.
pub const DEFAULT_EPSILON: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightComparison {
    pub index: usize,
    pub theta: f64,
    pub w: [f64; 2],
    /// `None` means nothing feasible was found at this weight.
    pub values: BTreeMap<SetId, Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub index: usize,
    pub theta: f64,
    pub subset: SetId,
    pub superset: SetId,
    pub subset_value: Option<f64>,
    pub superset_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestingReport {
    pub epsilon: f64,
    pub weights: Vec<WeightComparison>,
    pub violations: Vec<Violation>,
    pub ok: bool,
}

/// Checks that no set scores better than a known superset, up to `epsilon`:
/// `value(subset) ≥ value(superset) − epsilon` at every shared weight.
pub fn compare_regions(boundaries: &[RegionBoundary], epsilon: f64) -> Result<NestingReport> {
    let Some(first) = boundaries.first() else {
        return Err(Error::InvalidArgument("nothing to compare".into()));
    };
    let m0 = &first.metadata;
    for b in boundaries {
        let m = &b.metadata;
        if m.source_fingerprint != m0.source_fingerprint || m.d != m0.d || m.sizes != m0.sizes || m.weights != m0.weights {
            return Err(Error::MetadataMismatch(format!(
                "{} and {} differ in source, D, sizes or weight grid",
                m0.set, m.set
            )));
        }
    }
    let mut weights = Vec::with_capacity(m0.weights);
    let mut violations = Vec::new();
    for (k, entry) in first.sweep.iter().enumerate() {
        let values: BTreeMap<SetId, Option<f64>> = boundaries.iter().map(|b| (b.metadata.set, b.sweep[k].value)).collect();
        for (&sub, &sv) in &values {
            for (&sup, &pv) in &values {
                if sub == sup || !sup.contains(sub) {
                    continue;
                }
                let sv_inf = sv.unwrap_or(f64::INFINITY);
                let pv_inf = pv.unwrap_or(f64::INFINITY);
                if sv_inf < pv_inf - epsilon {
                    violations.push(Violation {
                        index: k,
                        theta: entry.theta,
                        subset: sub,
                        superset: sup,
                        subset_value: sv,
                        superset_value: pv,
                    });
                }
            }
        }
        weights.push(WeightComparison {
            index: k,
            theta: entry.theta,
            w: entry.w,
            values,
        });
    }
    Ok(NestingReport {
        epsilon,
        ok: violations.is_empty(),
        weights,
        violations,
    })
}
