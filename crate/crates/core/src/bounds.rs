//! Worst-case factors between the unrestricted optimum and its restricted
//! variants, a furthest-node lower bound and a solution-dependent cap on the
//! cost of forbidding arc repeats.

use serde::Serialize;
use thiserror::Error;

use crate::model::Instance;
use crate::schedule::{classify, Solution};
use crate::sortie::SortieCatalog;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AprioriFactors {
    /// `1 + alpha * m`; meaningful only when the truck may visit every node.
    pub one_plus_alpha_m: f64,
    pub one_plus_alpha_m_applicable: bool,
    /// `1 + 2m`, always valid.
    pub one_plus_2m: f64,
    /// `1 + m`, present when every sortie is a loop or serves one customer.
    pub one_plus_m: Option<f64>,
}

pub fn a_priori_factors(alpha: f64, m: usize, truck_visits_all: bool, loops_or_single: bool) -> AprioriFactors {
    let mf = m as f64;
    AprioriFactors {
        one_plus_alpha_m: 1.0 + alpha * mf,
        one_plus_alpha_m_applicable: truck_visits_all,
        one_plus_2m: 1.0 + 2.0 * mf,
        one_plus_m: loops_or_single.then_some(1.0 + mf),
    }
}

pub fn a_priori_bounds(inst: &Instance, catalog: &SortieCatalog) -> AprioriFactors {
    let alpha = inst.effective_alpha().unwrap_or(1.0);
    a_priori_factors(alpha, inst.drones(), inst.truck_visits_all(), catalog.only_loops_or_single_customer())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FurthestNodeBound {
    pub value: f64,
    /// Furthest node from the depot (lowest index among ties).
    pub node: usize,
    /// Sortie attaining the minimum, or `None` when the truck visit does.
    pub via: Option<Vec<usize>>,
    /// Single drone and every node truck-visitable.
    pub preconditions_met: bool,
}

/// The furthest node must be reached by the truck (out and back) or by a
/// sortie launched at `i` and retrieved at `j`, which costs at least
/// `l(0,i) + max(l(i,j), flight) + l(j,0)`.
pub fn furthest_node_lower_bound(inst: &Instance, catalog: &SortieCatalog) -> FurthestNodeBound {
    let n = inst.n();
    let mut f = 0;
    for i in 1..n {
        if inst.truck(0, i) > inst.truck(0, f) {
            f = i;
        }
    }
    let mut best = f64::INFINITY;
    let mut via = None;
    if inst.is_truck_node(f) {
        best = 2.0 * inst.truck(0, f);
    }
    for &p in catalog.serving(f) {
        let s = catalog.get(p);
        let (i, j) = (s.start(), s.end());
        let v = inst.truck(0, i) + inst.truck(i, j).max(catalog.duration(p)) + inst.truck(j, 0);
        if v < best - 1e-12 {
            best = v;
            via = Some(s.nodes().to_vec());
        }
    }
    FurthestNodeBound {
        value: best,
        node: f,
        via,
        preconditions_met: inst.drones() == 1 && inst.truck_visits_all(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PosterioriCaps {
    pub excess_traversals: usize,
    pub additive_cap: f64,
    /// In percent of the lower bound.
    pub percentage_cap: f64,
}

/// `excess * (alpha - 1) * L`, and the same relative to `lb` in percent.
pub fn a_posteriori_caps(excess: usize, alpha: f64, max_duration: f64, lb: f64) -> PosterioriCaps {
    let additive = excess as f64 * (alpha - 1.0) * max_duration;
    PosterioriCaps { excess_traversals: excess, additive_cap: additive, percentage_cap: 100.0 * additive / lb }
}

/// Cap on how much worse the best solution without repeated arcs can be
/// than `sol`. Requires one drone, a truck that may visit every node and
/// speedup at least 1, unless `force` is set.
pub fn a_posteriori_bound(inst: &Instance, sol: &Solution, lb: f64, force: bool) -> Result<PosterioriCaps, BoundError> {
    let alpha = inst.effective_alpha().unwrap_or(1.0);
    let l = inst
        .max_sortie_duration()
        .ok_or_else(|| BoundError::PreconditionViolated("no finite maximum sortie duration".into()))?;
    if !force {
        if inst.drones() != 1 {
            return Err(BoundError::PreconditionViolated(format!("{} drones, need 1", inst.drones())));
        }
        if !inst.truck_visits_all() {
            return Err(BoundError::PreconditionViolated("some nodes are not truck-visitable".into()));
        }
        if alpha < 1.0 {
            return Err(BoundError::PreconditionViolated(format!("speedup {alpha} below 1")));
        }
    }
    Ok(a_posteriori_caps(classify(sol).excess_traversals, alpha, l, lb))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LbSource {
    FurthestNode,
    UserSupplied,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub a_priori: AprioriFactors,
    pub lb: f64,
    pub lb_source: LbSource,
    pub furthest_node: FurthestNodeBound,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_posteriori: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub percentage_cap: Option<f64>,
    pub warnings: Vec<String>,
}

pub fn bound_report(
    inst: &Instance,
    catalog: &SortieCatalog,
    sol: Option<&Solution>,
    user_lb: Option<f64>,
    force: bool,
) -> BoundReport {
    let fnb = furthest_node_lower_bound(inst, catalog);
    let mut warnings = Vec::new();
    if !fnb.preconditions_met {
        warnings.push("furthest-node bound assumes one drone and a truck that may visit every node".to_string());
    }
    let (lb, lb_source) = match user_lb {
        Some(v) => (v, LbSource::UserSupplied),
        None => (fnb.value, LbSource::FurthestNode),
    };
    let (mut add, mut pct) = (None, None);
    if let Some(s) = sol {
        match a_posteriori_bound(inst, s, lb, force) {
            Ok(c) => {
                add = Some(c.additive_cap);
                pct = Some(c.percentage_cap);
            }
            Err(e) => warnings.push(e.to_string()),
        }
    }
    BoundReport {
        a_priori: a_priori_bounds(inst, catalog),
        lb,
        lb_source,
        furthest_node: fnb,
        a_posteriori: add,
        percentage_cap: pct,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_cap() {
        let c = a_posteriori_caps(3, 4.0 / 3.0, 43.04, 866.18);
        assert!((c.percentage_cap - 4.97).abs() < 0.01);
        assert_eq!(a_posteriori_caps(5, 1.0, 10.0, 1.0).additive_cap, 0.0);
    }

    #[test]
    fn degenerate_factors() {
        let f = a_priori_factors(2.0, 0, true, true);
        assert_eq!((f.one_plus_alpha_m, f.one_plus_2m, f.one_plus_m), (1.0, 1.0, Some(1.0)));
    }
}
