//! Route surgery on solutions: dropping redundant visits, removing repeated
//! arcs for a single drone, and flattening any solution into a simple cycle
//! with loop sorties.

use thiserror::Error;

use crate::model::Instance;
use crate::schedule::{classify, evaluate, validate, DroneOperation, Solution};
use crate::sortie::{is_feasible, is_invertible, split_sortie, Sortie, SortieError};

const GROWTH_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("internal check failed: {0}")]
    Diagnostic(String),
    #[error(transparent)]
    Sortie(#[from] SortieError),
}

fn require_valid(inst: &Instance, sol: &Solution) -> Result<f64, TransformError> {
    let rep = validate(inst, sol);
    if !rep.valid {
        let why: Vec<String> = rep.violations.iter().map(|v| v.detail.clone()).collect();
        return Err(TransformError::PreconditionViolated(format!("invalid input solution: {}", why.join("; "))));
    }
    Ok(rep.completion_time.unwrap_or(f64::NAN))
}

fn check_result(inst: &Instance, before: f64, sol: &Solution, step: &str) -> Result<f64, TransformError> {
    let rep = validate(inst, sol);
    if !rep.valid {
        let why: Vec<String> = rep.violations.iter().map(|v| v.detail.clone()).collect();
        return Err(TransformError::Diagnostic(format!("{step} produced an invalid solution: {}", why.join("; "))));
    }
    let after = rep.completion_time.unwrap();
    if after > before + GROWTH_TOL * before.abs().max(1.0) {
        return Err(TransformError::Diagnostic(format!("{step} increased the completion time from {before} to {after}")));
    }
    Ok(after)
}

/// `v[0] = tail of arc 1`, `v[t] = head of arc t`.
fn walk(sol: &Solution) -> Vec<usize> {
    let mut v = Vec::with_capacity(sol.route.len() + 1);
    v.push(sol.route[0].0);
    v.extend(sol.route.iter().map(|a| a.1));
    v
}

fn remap(ops: &[DroneOperation], f: impl Fn(usize) -> usize) -> Vec<DroneOperation> {
    ops.iter()
        .map(|o| DroneOperation { start_pos: f(o.start_pos), end_pos: f(o.end_pos), ..o.clone() })
        .collect()
}

fn covered_by_ops(sol: &Solution, k: usize) -> bool {
    sol.operations.iter().any(|o| o.sortie.served().contains(&k))
}

/// One pass; returns `None` when nothing can be removed.
fn shortcut_once(sol: &Solution) -> Option<Solution> {
    let v = walk(sol);
    let p_len = sol.route.len();
    let starts_at = |t: usize| sol.operations.iter().any(|o| o.start_pos == t);
    let ends_at = |t: usize| sol.operations.iter().any(|o| o.end_pos == t);

    // a visit spans walk indices a..=b at one node
    let mut a = 0;
    while a <= p_len {
        let mut b = a;
        while b < p_len && v[b + 1] == v[a] {
            b += 1;
        }
        let node = v[a];
        let interior = a > 0 && b < p_len;
        if interior {
            let touched = (a..=b).any(&ends_at) || (a + 1..=b + 1).any(&starts_at);
            let elsewhere = v[..a].contains(&node) || v[b + 1..].contains(&node) || covered_by_ops(sol, node);
            if !touched && elsewhere {
                let removed = b + 1 - a;
                let mut route = sol.route[..a - 1].to_vec();
                route.push((v[a - 1], v[b + 1]));
                route.extend_from_slice(&sol.route[b + 1..]);
                let ops = remap(&sol.operations, |t| if t <= a { t } else { t - removed });
                return Some(Solution { route, operations: ops });
            }
        }
        a = b + 1;
    }
    if p_len > 1 {
        for t in 1..=p_len {
            let (i, j) = sol.route[t - 1];
            if i == j && !ends_at(t) && !starts_at(t) {
                let mut route = sol.route.clone();
                route.remove(t - 1);
                let ops = remap(&sol.operations, |x| if x < t { x } else { x - 1 });
                return Some(Solution { route, operations: ops });
            }
        }
    }
    None
}

/// Drop intermediate visits where no drone is launched or retrieved and the
/// node is covered anyway, splicing in the direct arc, and drop wait arcs
/// without a launch or landing. The depot's first and last visits stay.
pub fn shortcut_redundant(inst: &Instance, sol: &Solution) -> Result<Solution, TransformError> {
    let before = require_valid(inst, sol)?;
    let mut cur = sol.clone();
    while let Some(next) = shortcut_once(&cur) {
        cur = next;
    }
    check_result(inst, before, &cur, "shortcut")?;
    Ok(cur)
}

/// First repeated non-wait arc: positions `p < q` of two consecutive traversals.
fn first_repeat(sol: &Solution) -> Option<(usize, usize)> {
    for q in 1..=sol.route.len() {
        let arc = sol.route[q - 1];
        if arc.0 == arc.1 {
            continue;
        }
        if let Some(p) = (1..q).rev().find(|&p| sol.route[p - 1] == arc) {
            return Some((p, q));
        }
    }
    None
}

#[derive(Clone, Copy, PartialEq)]
enum Segment {
    Before,
    AtP,
    Between,
    AtQ,
    After,
}

fn segment_of(op: &DroneOperation, p: usize, q: usize) -> Result<Segment, TransformError> {
    let (a, b) = (op.start_pos, op.end_pos);
    let seg = if b < p {
        Segment::Before
    } else if a == p && b == p {
        Segment::AtP
    } else if a > p && b < q {
        Segment::Between
    } else if a == q && b == q {
        Segment::AtQ
    } else if a > q {
        Segment::After
    } else {
        return Err(TransformError::Diagnostic(format!(
            "operation on positions {a}..{b} straddles a repeated arc at {p} or {q}"
        )));
    };
    Ok(seg)
}

fn reverse_between(sol: &Solution, p: usize, q: usize) -> Vec<(usize, usize)> {
    sol.route[p..q - 1].iter().rev().map(|&(a, b)| (b, a)).collect()
}

fn check_single_drone(inst: &Instance) -> Result<(), TransformError> {
    if inst.drones() != 1 {
        return Err(TransformError::PreconditionViolated(format!("{} drones, need exactly 1", inst.drones())));
    }
    Ok(())
}

/// One surgery step for the single-drone, single-customer setting.
fn single_drone_step(inst: &Instance, sol: &Solution, p: usize, q: usize) -> Result<Solution, TransformError> {
    let (i, j) = sol.route[p - 1];
    let mut at_i: Vec<Sortie> = Vec::new();
    let mut at_j: Vec<Sortie> = Vec::new();
    let mut segs = Vec::new();
    for op in &sol.operations {
        let seg = segment_of(op, p, q)?;
        if matches!(seg, Segment::AtP | Segment::AtQ) {
            let nodes = op.sortie.nodes();
            if nodes.len() != 3 {
                return Err(TransformError::PreconditionViolated("sortie over a repeated arc serves more than one customer".into()));
            }
            let k = nodes[1];
            if inst.drone(i, k) <= inst.drone(k, j) {
                at_i.push(Sortie::new(vec![i, k, i])?);
            } else {
                at_j.push(Sortie::new(vec![j, k, j])?);
            }
        }
        segs.push(seg);
    }
    let li = at_i.len();
    let lj = at_j.len();
    let mut route = sol.route[..p - 1].to_vec();
    route.extend(std::iter::repeat_n((i, i), li));
    route.extend(reverse_between(sol, p, q));
    route.extend(std::iter::repeat_n((j, j), lj));
    route.extend_from_slice(&sol.route[q..]);

    let base = p - 1 + li;
    let mut ops = Vec::new();
    for (op, seg) in sol.operations.iter().zip(&segs) {
        let moved = match seg {
            Segment::Before => op.clone(),
            Segment::Between => DroneOperation {
                drone: op.drone,
                sortie: op.sortie.reversed(),
                start_pos: base + (q - op.end_pos),
                end_pos: base + (q - op.start_pos),
            },
            Segment::After => DroneOperation {
                start_pos: op.start_pos - 2 + li + lj,
                end_pos: op.end_pos - 2 + li + lj,
                ..op.clone()
            },
            Segment::AtP | Segment::AtQ => continue,
        };
        ops.push(moved);
    }
    for (x, s) in at_i.into_iter().enumerate() {
        ops.push(DroneOperation { drone: 1, sortie: s, start_pos: p + x, end_pos: p + x });
    }
    let after_rev = base + (q - p - 1);
    for (x, s) in at_j.into_iter().enumerate() {
        ops.push(DroneOperation { drone: 1, sortie: s, start_pos: after_rev + 1 + x, end_pos: after_rev + 1 + x });
    }
    ops.sort_by_key(|o| (o.start_pos, o.end_pos));
    Ok(Solution { route, operations: ops })
}

/// With one drone and invertible single-customer sorties, remove repeated
/// arcs one pair at a time: the stretch between two traversals of `(i, j)`
/// is driven backwards and sorties flown over `(i, j)` become loops at `i`
/// or `j`. A solution without repeated arcs is returned as is.
pub fn remove_retraversal_single_drone(inst: &Instance, sol: &Solution) -> Result<Solution, TransformError> {
    check_single_drone(inst)?;
    let mut obj = require_valid(inst, sol)?;
    if !classify(sol).is_arc_retraversing {
        return Ok(sol.clone());
    }
    for op in &sol.operations {
        if op.sortie.served().len() > 1 {
            return Err(TransformError::PreconditionViolated(format!("sortie {} serves several customers", op.sortie.display(inst))));
        }
        if !is_invertible(inst, &op.sortie) {
            return Err(TransformError::PreconditionViolated(format!("sortie {} is not invertible", op.sortie.display(inst))));
        }
    }
    let mut cur = shortcut_redundant(inst, sol)?;
    while let Some((p, q)) = first_repeat(&cur) {
        let next = single_drone_step(inst, &cur, p, q)?;
        obj = check_result(inst, obj, &next, "repeated-arc removal")?;
        cur = shortcut_redundant(inst, &next)?;
    }
    Ok(cur)
}

fn arc_total(sol: &Solution) -> usize {
    let truck = sol.route.iter().filter(|a| a.0 != a.1).count();
    let drone: usize = sol.operations.iter().map(|o| o.sortie.nodes().len() - 1).sum();
    truck + drone
}

/// One surgery step for one drone of truck speed with every node
/// truck-visitable.
fn equal_speed_step(sol: &Solution, p: usize, q: usize) -> Result<Solution, TransformError> {
    let mut segs = Vec::new();
    for op in &sol.operations {
        segs.push(segment_of(op, p, q)?);
    }
    let flown = segs
        .iter()
        .position(|s| *s == Segment::AtP)
        .or_else(|| segs.iter().position(|s| *s == Segment::AtQ));
    if let Some(idx) = flown {
        // the truck drives the drone's path instead
        let op = &sol.operations[idx];
        let at = if segs[idx] == Segment::AtP { p } else { q };
        let path: Vec<(usize, usize)> = op.sortie.nodes().windows(2).map(|w| (w[0], w[1])).collect();
        let grow = path.len() - 1;
        let mut route = sol.route[..at - 1].to_vec();
        route.extend(path);
        route.extend_from_slice(&sol.route[at..]);
        let mut ops = Vec::new();
        for (k, o) in sol.operations.iter().enumerate() {
            if k == idx {
                continue;
            }
            let shift = |t: usize| if t > at { t + grow } else { t };
            ops.push(DroneOperation { start_pos: shift(o.start_pos), end_pos: shift(o.end_pos), ..o.clone() });
        }
        return Ok(Solution { route, operations: ops });
    }
    let mut route = sol.route[..p - 1].to_vec();
    route.extend(reverse_between(sol, p, q));
    route.extend_from_slice(&sol.route[q..]);
    let base = p - 1;
    let ops = sol
        .operations
        .iter()
        .zip(&segs)
        .map(|(op, seg)| match seg {
            Segment::Between => DroneOperation {
                drone: op.drone,
                sortie: op.sortie.reversed(),
                start_pos: base + (q - op.end_pos),
                end_pos: base + (q - op.start_pos),
            },
            Segment::After => DroneOperation { start_pos: op.start_pos - 2, end_pos: op.end_pos - 2, ..op.clone() },
            _ => op.clone(),
        })
        .collect();
    Ok(Solution { route, operations: ops })
}

/// With one drone no faster than the truck, every node truck-visitable and
/// invertible sorties: while some arc is repeated, either let the truck
/// drive the path of a sortie flown over one traversal, or drop both
/// traversals and drive the stretch between them backwards.
pub fn remove_retraversal_equal_speed(inst: &Instance, sol: &Solution) -> Result<Solution, TransformError> {
    check_single_drone(inst)?;
    if !inst.truck_visits_all() {
        return Err(TransformError::PreconditionViolated("some nodes are not truck-visitable".into()));
    }
    let alpha = inst.effective_alpha().unwrap_or(1.0);
    if (alpha - 1.0).abs() > 1e-9 {
        return Err(TransformError::PreconditionViolated(format!("speedup is {alpha}, need 1")));
    }
    let mut obj = require_valid(inst, sol)?;
    if !classify(sol).is_arc_retraversing {
        return Ok(sol.clone());
    }
    for op in &sol.operations {
        if !is_invertible(inst, &op.sortie) {
            return Err(TransformError::PreconditionViolated(format!("sortie {} is not invertible", op.sortie.display(inst))));
        }
    }
    let mut cur = shortcut_redundant(inst, sol)?;
    while let Some((p, q)) = first_repeat(&cur) {
        let before = arc_total(&cur);
        let next = equal_speed_step(&cur, p, q)?;
        if arc_total(&next) >= before {
            return Err(TransformError::Diagnostic("surgery did not reduce the number of traversed arcs".into()));
        }
        obj = check_result(inst, obj, &next, "repeated-arc removal")?;
        cur = shortcut_redundant(inst, &next)?;
    }
    Ok(cur)
}

/// Replace every sortie by loops, drive the truck once around the nodes in
/// order of first visit and let it wait at each loop's anchor while the
/// loops are flown. The result never revisits a node.
pub fn to_m_cycle(inst: &Instance, sol: &Solution) -> Result<Solution, TransformError> {
    let before = require_valid(inst, sol)?;
    let m = inst.drones();
    let n = inst.n();
    let mut loops: Vec<Sortie> = Vec::new();
    for op in &sol.operations {
        if op.sortie.is_loop() {
            loops.push(op.sortie.clone());
        } else {
            let split = split_sortie(inst, &op.sortie)?;
            loops.extend(split.loops());
        }
    }
    let mut order: Vec<usize> = Vec::new();
    for v in walk(sol) {
        if !order.contains(&v) {
            order.push(v);
        }
    }
    let mut covered = vec![false; n];
    for &v in &order {
        covered[v] = true;
    }
    let mut per_node: Vec<Vec<Sortie>> = vec![Vec::new(); n];
    // anchors in visiting order keep the drone assignment deterministic
    for &anchor in &order {
        for s in loops.iter().filter(|s| s.start() == anchor) {
            if s.served().iter().any(|&k| !covered[k]) {
                for &k in s.served() {
                    covered[k] = true;
                }
                per_node[anchor].push(s.clone());
            }
        }
    }
    let mut route: Vec<(usize, usize)> = Vec::new();
    let mut ops: Vec<DroneOperation> = Vec::new();
    let mut place = |route: &mut Vec<(usize, usize)>, node: usize, list: &[Sortie]| {
        let a = route.len() + 1;
        for (q, s) in list.iter().enumerate() {
            route.push((node, node));
            let start = if q < m { a } else { a + q - m + 1 };
            ops.push(DroneOperation { drone: q % m + 1, sortie: s.clone(), start_pos: start, end_pos: a + q });
        }
    };
    place(&mut route, order[0], &per_node[order[0]]);
    for w in 1..order.len() {
        route.push((order[w - 1], order[w]));
        place(&mut route, order[w], &per_node[order[w]]);
    }
    let last = *order.last().unwrap();
    if last != 0 || route.is_empty() {
        route.push((last, 0));
    }
    ops.sort_by_key(|o| (o.start_pos, o.end_pos, o.drone));
    let out = Solution { route, operations: ops };
    let rep = validate(inst, &out);
    if !rep.valid {
        let why: Vec<String> = rep.violations.iter().map(|v| v.detail.clone()).collect();
        return Err(TransformError::Diagnostic(format!("cycle conversion produced an invalid solution: {}", why.join("; "))));
    }
    if classify(&out).is_node_revisiting {
        return Err(TransformError::Diagnostic("cycle conversion revisits a node".into()));
    }
    let after = evaluate(inst, &out).map_err(|e| TransformError::Diagnostic(e.to_string()))?.completion_time;
    let factor = 1.0 + 2.0 * m as f64;
    if after > factor * before + 1e-9 {
        return Err(TransformError::Diagnostic(format!("cycle conversion exceeded {factor} times the input value")));
    }
    Ok(out)
}

/// Whether every sortie of `sol` is a loop or serves a single customer.
pub fn loops_or_single_customer(sol: &Solution) -> bool {
    sol.operations.iter().all(|o| o.sortie.is_loop() || o.sortie.served().len() == 1)
}

/// Whether the loop `s` is feasible; loops produced here always are.
pub fn loop_is_feasible(inst: &Instance, s: &Sortie) -> bool {
    s.is_loop() && is_feasible(inst, s)
}
