//! Time-indexed solutions: a truck route as a sequence of arcs (with `(i,i)`
//! meaning a wait at `i`) plus drone operations pinned to route positions.
//! Minimal-wait evaluation, validation and classification.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Instance;
use crate::sortie::{is_feasible, sortie_energy, Sortie};

/// Slack allowed on synchronization checks.
pub const SYNC_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("operation {op}: {detail}")]
    DanglingOperation { op: usize, detail: String },
    #[error("route is empty")]
    EmptyRoute,
    #[error("route arc {pos} references an unknown node")]
    BadNode { pos: usize },
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("bad sortie: {0}")]
    BadSortie(String),
}

/// A drone flying `sortie`, launched at the tail of route arc `start_pos`
/// and retrieved at the head of route arc `end_pos` (positions are 1-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DroneOperation {
    /// Drone index in `1..=m`.
    pub drone: usize,
    pub sortie: Sortie,
    pub start_pos: usize,
    pub end_pos: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Solution {
    pub route: Vec<(usize, usize)>,
    pub operations: Vec<DroneOperation>,
}

impl Solution {
    pub fn truck_only(route: Vec<(usize, usize)>) -> Self {
        Solution { route, operations: Vec::new() }
    }

    /// Route from a node walk `v0, v1, ..., vk`.
    pub fn from_walk(walk: &[usize]) -> Self {
        Solution::truck_only(walk.windows(2).map(|w| (w[0], w[1])).collect())
    }

    /// Sum of truck travel over non-wait arcs.
    pub fn truck_travel(&self, inst: &Instance) -> f64 {
        self.route.iter().map(|&(i, j)| inst.truck(i, j)).sum()
    }

    /// Nodes the truck stands on at some point (depot included).
    pub fn truck_visited(&self, n: usize) -> Vec<bool> {
        let mut seen = vec![false; n];
        seen[0] = true;
        for &(i, j) in &self.route {
            if i < n {
                seen[i] = true;
            }
            if j < n {
                seen[j] = true;
            }
        }
        seen
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// `waits[t-1]`: truck wait at the head of arc `t`.
    pub waits: Vec<f64>,
    /// `departure_times[t-1]`: clock when the truck starts arc `t`.
    pub departure_times: Vec<f64>,
    pub completion_time: f64,
}

impl Schedule {
    pub fn arrival_time(&self, inst: &Instance, sol: &Solution, t: usize) -> f64 {
        let (i, j) = sol.route[t - 1];
        self.departure_times[t - 1] + inst.truck(i, j)
    }
    pub fn launch_time(&self, op: &DroneOperation) -> f64 {
        self.departure_times[op.start_pos - 1]
    }
    pub fn total_wait(&self) -> f64 {
        self.waits.iter().sum()
    }
}

/// Minimal waits for the given route and operations, without checking that
/// operations sit where the truck is. Operations are processed in order of
/// their end position; each adds its remaining deficit to the wait at that
/// position, so several operations ending together cost their maximum deficit.
pub(crate) fn greedy_waits(arc_len: &[f64], ops: &[(usize, usize, f64)]) -> Vec<f64> {
    let t_len = arc_len.len();
    let mut waits = vec![0.0; t_len];
    let mut prefix = vec![0.0; t_len + 1];
    let mut by_end: Vec<Vec<(usize, f64)>> = vec![Vec::new(); t_len + 1];
    for &(a, b, d) in ops {
        if a >= 1 && b <= t_len && a <= b {
            by_end[b].push((a, d));
        }
    }
    for t in 1..=t_len {
        prefix[t] = prefix[t - 1] + arc_len[t - 1];
        for &(a, d) in &by_end[t] {
            let have = prefix[t] - prefix[a - 1];
            if d > have {
                waits[t - 1] += d - have;
                prefix[t] += d - have;
            }
        }
    }
    waits
}

fn schedule_from_waits(arc_len: &[f64], waits: Vec<f64>) -> Schedule {
    let mut departure_times = Vec::with_capacity(arc_len.len());
    let mut clock = 0.0;
    for (l, w) in arc_len.iter().zip(&waits) {
        departure_times.push(clock);
        clock += l + w;
    }
    Schedule { waits, departure_times, completion_time: clock }
}

fn check_operation(inst: &Instance, sol: &Solution, idx: usize, op: &DroneOperation) -> Result<(), ScheduleError> {
    let t_len = sol.route.len();
    let dangling = |detail: String| ScheduleError::DanglingOperation { op: idx, detail };
    if op.start_pos < 1 || op.end_pos > t_len || op.start_pos > op.end_pos {
        return Err(dangling(format!(
            "positions {}..{} outside route of length {t_len}",
            op.start_pos, op.end_pos
        )));
    }
    if op.sortie.nodes().iter().any(|&v| v >= inst.n()) {
        return Err(dangling("sortie references an unknown node".into()));
    }
    let (tail, _) = sol.route[op.start_pos - 1];
    let (_, head) = sol.route[op.end_pos - 1];
    if tail != op.sortie.start() {
        return Err(dangling(format!(
            "launch node {} differs from truck position {} at arc {}",
            inst.label(op.sortie.start()),
            inst.label(tail),
            op.start_pos
        )));
    }
    if head != op.sortie.end() {
        return Err(dangling(format!(
            "landing node {} differs from truck position {} at arc {}",
            inst.label(op.sortie.end()),
            inst.label(head),
            op.end_pos
        )));
    }
    Ok(())
}

/// Minimal-wait schedule of `sol`.
pub fn evaluate(inst: &Instance, sol: &Solution) -> Result<Schedule, ScheduleError> {
    if sol.route.is_empty() {
        return Err(ScheduleError::EmptyRoute);
    }
    if let Some(pos) = sol.route.iter().position(|&(i, j)| i >= inst.n() || j >= inst.n()) {
        return Err(ScheduleError::BadNode { pos: pos + 1 });
    }
    for (idx, op) in sol.operations.iter().enumerate() {
        check_operation(inst, sol, idx, op)?;
    }
    Ok(evaluate_unchecked(inst, sol))
}

pub(crate) fn evaluate_unchecked(inst: &Instance, sol: &Solution) -> Schedule {
    let arc_len: Vec<f64> = sol.route.iter().map(|&(i, j)| inst.truck(i, j)).collect();
    let ops: Vec<(usize, usize, f64)> = sol
        .operations
        .iter()
        .map(|op| (op.start_pos, op.end_pos, op.sortie.duration(inst)))
        .collect();
    let waits = greedy_waits(&arc_len, &ops);
    schedule_from_waits(&arc_len, waits)
}

/// Which rule a violation breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    RouteEmpty,
    RouteStart,
    RouteEnd,
    RouteChain,
    RouteLength,
    TruckEligibility,
    DroneIndex,
    PositionRange,
    LaunchColocation,
    LandingColocation,
    DroneBusy,
    Coverage,
    SortieStructure,
    SortieEnergy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
    /// Present whenever the solution could be evaluated.
    pub completion_time: Option<f64>,
}

impl ValidationReport {
    pub fn has(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

/// Check every feasibility rule and report each violation with a witness.
pub fn validate(inst: &Instance, sol: &Solution) -> ValidationReport {
    let n = inst.n();
    let mut v = Vec::new();
    let mut push = |rule: Rule, detail: String| v.push(Violation { rule, detail });
    let lbl = |i: usize| -> String {
        if i < n {
            inst.label(i).to_string()
        } else {
            format!("#{i}")
        }
    };
    let route = &sol.route;
    let t_len = route.len();
    if route.is_empty() {
        push(Rule::RouteEmpty, "route has no arcs".into());
    } else {
        if route[0].0 != 0 {
            push(Rule::RouteStart, format!("route starts at {}", lbl(route[0].0)));
        }
        if route[t_len - 1].1 != 0 {
            push(Rule::RouteEnd, format!("route ends at {}", lbl(route[t_len - 1].1)));
        }
    }
    for t in 1..t_len {
        if route[t - 1].1 != route[t].0 {
            push(
                Rule::RouteChain,
                format!("arc {} ends at {} but arc {} starts at {}", t, lbl(route[t - 1].1), t + 1, lbl(route[t].0)),
            );
        }
    }
    if t_len > 2 * n {
        push(Rule::RouteLength, format!("route has {t_len} arcs, limit is {}", 2 * n));
    }
    let mut nodes_ok = true;
    for (t, &(i, j)) in route.iter().enumerate() {
        for node in [i, j] {
            if node >= n {
                push(Rule::TruckEligibility, format!("arc {} uses unknown node {node}", t + 1));
                nodes_ok = false;
            } else if !inst.is_truck_node(node) {
                push(Rule::TruckEligibility, format!("arc {} visits {}, which the truck may not visit", t + 1, lbl(node)));
            }
        }
    }

    let mut ops_ok = true;
    for (idx, op) in sol.operations.iter().enumerate() {
        let name = if op.sortie.nodes().iter().all(|&x| x < n) { op.sortie.display(inst) } else { format!("{:?}", op.sortie.nodes()) };
        if op.drone < 1 || op.drone > inst.drones() {
            push(Rule::DroneIndex, format!("operation {idx} ({name}) uses drone {} of {}", op.drone, inst.drones()));
        }
        if op.start_pos < 1 || op.end_pos > t_len || op.start_pos > op.end_pos {
            push(Rule::PositionRange, format!("operation {idx} ({name}) has positions {}..{}", op.start_pos, op.end_pos));
            ops_ok = false;
            continue;
        }
        if let Err(e) = op.sortie.check(inst) {
            push(Rule::SortieStructure, format!("operation {idx} ({name}): {e}"));
            ops_ok = false;
            continue;
        }
        let (tail, _) = route[op.start_pos - 1];
        let (_, head) = route[op.end_pos - 1];
        if tail != op.sortie.start() {
            push(
                Rule::LaunchColocation,
                format!("operation {idx} ({name}) launches at {} but the truck leaves {} at arc {}", lbl(op.sortie.start()), lbl(tail), op.start_pos),
            );
            ops_ok = false;
        }
        if head != op.sortie.end() {
            push(
                Rule::LandingColocation,
                format!("operation {idx} ({name}) lands at {} but the truck reaches {} at arc {}", lbl(op.sortie.end()), lbl(head), op.end_pos),
            );
            ops_ok = false;
        }
        if !is_feasible(inst, &op.sortie) {
            push(
                Rule::SortieEnergy,
                format!("operation {idx} ({name}) needs energy {:.4} > {:.4}", sortie_energy(inst, &op.sortie), inst.battery()),
            );
        }
    }
    for a in 0..sol.operations.len() {
        for b in (a + 1)..sol.operations.len() {
            let (x, y) = (&sol.operations[a], &sol.operations[b]);
            if x.drone == y.drone && x.start_pos <= y.end_pos && y.start_pos <= x.end_pos {
                push(
                    Rule::DroneBusy,
                    format!("drone {} flies operations {a} and {b} over overlapping positions", x.drone),
                );
            }
        }
    }
    if nodes_ok {
        let mut covered = sol.truck_visited(n);
        for op in &sol.operations {
            for &k in op.sortie.served() {
                if k < n {
                    covered[k] = true;
                }
            }
        }
        for (k, &c) in covered.iter().enumerate() {
            if !c {
                push(Rule::Coverage, format!("node {} is neither visited nor served", lbl(k)));
            }
        }
    }
    let completion_time = if nodes_ok && ops_ok && !route.is_empty() {
        Some(evaluate_unchecked(inst, sol).completion_time)
    } else {
        None
    };
    ValidationReport { valid: v.is_empty(), violations: v, completion_time }
}

/// Traversal count per non-wait arc.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RetraversingVector {
    pub counts: BTreeMap<(usize, usize), usize>,
}

impl RetraversingVector {
    pub fn count(&self, i: usize, j: usize) -> usize {
        self.counts.get(&(i, j)).copied().unwrap_or(0)
    }
    /// Sum over arcs of `(count - 1)^+`.
    pub fn excess(&self) -> usize {
        self.counts.values().map(|&c| c.saturating_sub(1)).sum()
    }
}

impl Serialize for RetraversingVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.counts.len()))?;
        for (&(from, to), &count) in &self.counts {
            seq.serialize_element(&ArcCount { from, to, count })?;
        }
        seq.end()
    }
}

#[derive(Serialize)]
struct ArcCount {
    from: usize,
    to: usize,
    count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub retraversing_vector: RetraversingVector,
    pub is_arc_retraversing: bool,
    pub is_node_revisiting: bool,
    pub excess_traversals: usize,
}

pub fn retraversing_vector(sol: &Solution) -> RetraversingVector {
    let mut counts = BTreeMap::new();
    for &(i, j) in &sol.route {
        if i != j {
            *counts.entry((i, j)).or_insert(0) += 1;
        }
    }
    RetraversingVector { counts }
}

/// Arc-retraversal and node-revisit flags of a route.
pub fn classify(sol: &Solution) -> Classification {
    let h = retraversing_vector(sol);
    let is_arc_retraversing = h.counts.values().any(|&c| c >= 2);
    let moves: Vec<(usize, usize)> = sol.route.iter().copied().filter(|&(i, j)| i != j).collect();
    let mut heads = std::collections::HashSet::new();
    let mut revisit = false;
    for (p, &(_, j)) in moves.iter().enumerate() {
        if j == 0 {
            if p + 1 < moves.len() {
                revisit = true;
            }
        } else if !heads.insert(j) {
            revisit = true;
        }
    }
    let excess = h.excess();
    Classification { retraversing_vector: h, is_arc_retraversing, is_node_revisiting: revisit, excess_traversals: excess }
}

/// JSON form of a drone operation, with node labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperationFile {
    pub drone: usize,
    pub nodes: Vec<String>,
    pub start_pos: usize,
    pub end_pos: usize,
}

/// JSON form of a solution, with node labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<String>,
    pub route: Vec<[String; 2]>,
    pub operations: Vec<OperationFile>,
    /// Reference completion time the solution is known to achieve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub published: Option<f64>,
}

impl SolutionFile {
    pub fn from_solution(inst: &Instance, sol: &Solution) -> Self {
        SolutionFile {
            instance: Some(inst.name().to_string()),
            route: sol
                .route
                .iter()
                .map(|&(i, j)| [inst.label(i).to_string(), inst.label(j).to_string()])
                .collect(),
            operations: sol
                .operations
                .iter()
                .map(|op| OperationFile {
                    drone: op.drone,
                    nodes: op.sortie.to_labels(inst),
                    start_pos: op.start_pos,
                    end_pos: op.end_pos,
                })
                .collect(),
            published: None,
        }
    }

    pub fn to_solution(&self, inst: &Instance) -> Result<Solution, ScheduleError> {
        let idx = |l: &String| inst.node_index(l).ok_or_else(|| ScheduleError::UnknownLabel(l.clone()));
        let route = self
            .route
            .iter()
            .map(|[a, b]| Ok((idx(a)?, idx(b)?)))
            .collect::<Result<Vec<_>, ScheduleError>>()?;
        let operations = self
            .operations
            .iter()
            .map(|o| {
                let sortie = Sortie::from_labels(inst, &o.nodes).map_err(|e| ScheduleError::BadSortie(e.to_string()))?;
                Ok(DroneOperation { drone: o.drone, sortie, start_pos: o.start_pos, end_pos: o.end_pos })
            })
            .collect::<Result<Vec<_>, ScheduleError>>()?;
        Ok(Solution { route, operations })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn greedy_takes_max_for_common_end() {
        // two operations ending at position 2
        let w = greedy_waits(&[1.0, 1.0], &[(1, 2, 5.0), (2, 2, 4.0)]);
        assert_eq!(w, vec![0.0, 3.0]);
        let w = greedy_waits(&[1.0, 1.0], &[(2, 2, 4.0), (1, 2, 5.0)]);
        assert_eq!(w, vec![0.0, 3.0]);
    }

    #[test]
    fn greedy_nested() {
        let w = greedy_waits(&[1.0, 1.0, 1.0], &[(2, 2, 2.0), (1, 3, 6.0)]);
        assert_eq!(w, vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn classify_walks() {
        let s = Solution::from_walk(&[0, 1, 2, 1, 2, 0]);
        let c = classify(&s);
        assert!(c.is_arc_retraversing);
        assert!(c.is_node_revisiting);
        assert_eq!(c.retraversing_vector.count(1, 2), 2);
        assert_eq!(c.excess_traversals, 1);
        let s = Solution::from_walk(&[0, 1, 1, 2, 2, 0]);
        let c = classify(&s);
        assert!(!c.is_arc_retraversing && !c.is_node_revisiting);
        let s = Solution::from_walk(&[0, 1, 0, 2, 0]);
        assert!(classify(&s).is_node_revisiting);
        assert!(!classify(&s).is_arc_retraversing);
    }
}
