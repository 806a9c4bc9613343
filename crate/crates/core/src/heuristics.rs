//! Christofides tours, exact brute-force oracles and recovery of a set cover
//! from a routing solution on a reduced instance.

use serde::Serialize;
use thiserror::Error;

use crate::forge::MscInstance;
use crate::model::Instance;
use crate::schedule::Solution;

pub const MAX_ODD_VERTICES: usize = 20;
pub const MAX_BRUTEFORCE_NODES: usize = 11;
pub const MAX_BRUTEFORCE_SETS: usize = 15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeuristicError {
    #[error("the truck cannot visit node {0}")]
    TruckCannotVisitAll(usize),
    #[error("{0} odd-degree vertices exceed the exact matching budget of {MAX_ODD_VERTICES}")]
    MatchingBudgetExceeded(usize),
    #[error("{size} exceeds the brute-force limit of {max}")]
    TooLarge { size: usize, max: usize },
    #[error("infeasible input: {0}")]
    InfeasibleInput(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Christofides,
    TruckOnlyExact,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tour {
    /// Starts and ends at the depot.
    pub nodes: Vec<usize>,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicResult {
    pub solution: Solution,
    pub tour: Tour,
    /// Worst-case ratio to the multi-drone optimum.
    pub guarantee: f64,
    pub basis: Basis,
}

fn tour_length(inst: &Instance, nodes: &[usize]) -> f64 {
    nodes.windows(2).map(|w| inst.truck(w[0], w[1])).sum()
}

fn require_truck_all(inst: &Instance) -> Result<(), HeuristicError> {
    match (0..inst.n()).find(|&v| !inst.is_truck_node(v)) {
        Some(v) => Err(HeuristicError::TruckCannotVisitAll(v)),
        None => Ok(()),
    }
}

fn minimum_spanning_tree(inst: &Instance) -> Vec<(usize, usize)> {
    let n = inst.n();
    let mut in_tree = vec![false; n];
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![0; n];
    dist[0] = 0.0;
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    for _ in 0..n {
        let u = (0..n)
            .filter(|&v| !in_tree[v])
            .min_by(|&a, &b| dist[a].total_cmp(&dist[b]))
            .unwrap();
        in_tree[u] = true;
        if u != 0 {
            edges.push((parent[u], u));
        }
        for v in 0..n {
            // undirected weight; the truck matrix may be asymmetric
            let w = inst.truck(u, v).min(inst.truck(v, u));
            if !in_tree[v] && w < dist[v] {
                dist[v] = w;
                parent[v] = u;
            }
        }
    }
    edges
}

/// Exact minimum-weight perfect matching over `odd` by a subset program.
fn perfect_matching(inst: &Instance, odd: &[usize]) -> Vec<(usize, usize)> {
    let k = odd.len();
    let full = (1usize << k) - 1;
    let w = |a: usize, b: usize| inst.truck(odd[a], odd[b]).min(inst.truck(odd[b], odd[a]));
    let mut best = vec![f64::INFINITY; 1 << k];
    let mut pick = vec![(0usize, 0usize); 1 << k];
    best[0] = 0.0;
    for mask in 1..=full {
        if (mask as u32).count_ones() % 2 == 1 {
            continue;
        }
        let a = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << a);
        let mut r = rest;
        while r != 0 {
            let b = r.trailing_zeros() as usize;
            r &= r - 1;
            let v = best[rest & !(1 << b)] + w(a, b);
            if v < best[mask] {
                best[mask] = v;
                pick[mask] = (a, b);
            }
        }
    }
    let mut out = Vec::with_capacity(k / 2);
    let mut mask = full;
    while mask != 0 {
        let (a, b) = pick[mask];
        out.push((odd[a], odd[b]));
        mask &= !(1 << a) & !(1 << b);
    }
    out
}

fn euler_circuit(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (id, &(a, b)) in edges.iter().enumerate() {
        adj[a].push((b, id));
        adj[b].push((a, id));
    }
    let mut used = vec![false; edges.len()];
    let mut next = vec![0usize; n];
    let mut stack = vec![0usize];
    let mut circuit = Vec::with_capacity(edges.len() + 1);
    while let Some(&u) = stack.last() {
        while next[u] < adj[u].len() && used[adj[u][next[u]].1] {
            next[u] += 1;
        }
        if next[u] == adj[u].len() {
            circuit.push(u);
            stack.pop();
        } else {
            let (v, id) = adj[u][next[u]];
            used[id] = true;
            stack.push(v);
        }
    }
    circuit.reverse();
    circuit
}

/// Hamiltonian cycle from the depot over every node: spanning tree plus an
/// exact matching of its odd-degree vertices, walked as an Euler circuit
/// with repeated nodes skipped.
pub fn christofides_cycle(inst: &Instance) -> Result<Tour, HeuristicError> {
    require_truck_all(inst)?;
    let n = inst.n();
    if n == 1 {
        return Ok(Tour { nodes: vec![0, 0], length: 0.0 });
    }
    let mut edges = minimum_spanning_tree(inst);
    let mut degree = vec![0usize; n];
    for &(a, b) in &edges {
        degree[a] += 1;
        degree[b] += 1;
    }
    let odd: Vec<usize> = (0..n).filter(|&v| degree[v] % 2 == 1).collect();
    if odd.len() > MAX_ODD_VERTICES {
        return Err(HeuristicError::MatchingBudgetExceeded(odd.len()));
    }
    edges.extend(perfect_matching(inst, &odd));
    let mut seen = vec![false; n];
    let mut nodes = Vec::with_capacity(n + 1);
    for v in euler_circuit(n, &edges) {
        if !seen[v] {
            seen[v] = true;
            nodes.push(v);
        }
    }
    nodes.push(0);
    let length = tour_length(inst, &nodes);
    Ok(Tour { nodes, length })
}

/// Truck-only solution along the Christofides cycle.
pub fn heuristic_solution(inst: &Instance) -> Result<HeuristicResult, HeuristicError> {
    let tour = christofides_cycle(inst)?;
    let factor = 1.0 + inst.effective_alpha().unwrap_or(1.0) * inst.drones() as f64;
    let route = if inst.n() == 1 {
        vec![(0, 0)]
    } else {
        tour.nodes.windows(2).map(|w| (w[0], w[1])).collect()
    };
    // with at most two customers every cycle is optimal for the truck
    let (basis, guarantee) = if inst.n() <= 3 {
        (Basis::TruckOnlyExact, factor)
    } else {
        (Basis::Christofides, 1.5 * factor)
    };
    Ok(HeuristicResult { solution: Solution { route, operations: Vec::new() }, tour, guarantee, basis })
}

/// Optimal truck tour over every node by enumeration with prefix pruning.
pub fn tsp_bruteforce(inst: &Instance) -> Result<Tour, HeuristicError> {
    require_truck_all(inst)?;
    let n = inst.n();
    if n > MAX_BRUTEFORCE_NODES {
        return Err(HeuristicError::TooLarge { size: n, max: MAX_BRUTEFORCE_NODES });
    }
    if n == 1 {
        return Ok(Tour { nodes: vec![0, 0], length: 0.0 });
    }
    struct Search<'a> {
        inst: &'a Instance,
        path: Vec<usize>,
        used: Vec<bool>,
        best: f64,
        best_path: Vec<usize>,
    }
    fn go(s: &mut Search, len: f64) {
        if len >= s.best {
            return;
        }
        let n = s.used.len();
        let last = *s.path.last().unwrap();
        if s.path.len() == n {
            let total = len + s.inst.truck(last, 0);
            if total < s.best {
                s.best = total;
                s.best_path = s.path.clone();
            }
            return;
        }
        for v in 1..n {
            if !s.used[v] {
                s.used[v] = true;
                s.path.push(v);
                go(s, len + s.inst.truck(last, v));
                s.path.pop();
                s.used[v] = false;
            }
        }
    }
    let mut s = Search { inst, path: vec![0], used: vec![false; n], best: f64::INFINITY, best_path: Vec::new() };
    s.used[0] = true;
    go(&mut s, 0.0);
    let mut nodes = s.best_path;
    nodes.push(0);
    Ok(Tour { length: tour_length(inst, &nodes), nodes })
}

/// Sets picked from a solution on a reduced set-cover instance: every set
/// whose node the truck visits, then for each element node the truck visits
/// but no chosen set contains, the lowest-index set containing it. Elements
/// reached only by drone are covered through the set node they were flown
/// from.
pub fn msc_from_solution(msc: &MscInstance, sol: &Solution) -> Result<Vec<usize>, HeuristicError> {
    let s_count = msc.sets.len();
    let x_count = msc.universe.len();
    let n = 1 + s_count + x_count;
    let mut visited = vec![false; n];
    for &(a, b) in &sol.route {
        if a >= n || b >= n {
            return Err(HeuristicError::InfeasibleInput(format!("route node outside the reduced instance of {n} nodes")));
        }
        visited[a] = true;
        visited[b] = true;
    }
    let members: Vec<Vec<usize>> = (0..s_count).map(|s| msc.members(s)).collect();
    let mut chosen: Vec<usize> = (0..s_count).filter(|&s| visited[msc.set_node(s)]).collect();
    let mut covered = vec![false; x_count];
    for &s in &chosen {
        for &x in &members[s] {
            covered[x] = true;
        }
    }
    let add = |s: usize, chosen: &mut Vec<usize>, covered: &mut Vec<bool>| {
        if !chosen.contains(&s) {
            chosen.push(s);
            for &x in &members[s] {
                covered[x] = true;
            }
        }
    };
    for x in 0..x_count {
        if visited[msc.element_node(x)] && !covered[x] {
            let s = (0..s_count).find(|&s| members[s].contains(&x)).unwrap();
            add(s, &mut chosen, &mut covered);
        }
    }
    for op in &sol.operations {
        for &k in op.sortie.served() {
            let Some(x) = k.checked_sub(1 + s_count).filter(|&x| x < x_count) else { continue };
            if covered[x] {
                continue;
            }
            let anchor = [op.sortie.start(), op.sortie.end()]
                .into_iter()
                .filter_map(|v| v.checked_sub(1).filter(|&s| s < s_count))
                .find(|&s| members[s].contains(&x));
            if let Some(s) = anchor {
                add(s, &mut chosen, &mut covered);
            }
        }
    }
    if let Some(x) = covered.iter().position(|&c| !c) {
        return Err(HeuristicError::InfeasibleInput(format!("element {} is not covered", msc.universe[x])));
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// Smallest cover by exhaustive search over subsets.
pub fn msc_bruteforce(msc: &MscInstance) -> Result<Vec<usize>, HeuristicError> {
    let s_count = msc.sets.len();
    if s_count > MAX_BRUTEFORCE_SETS {
        return Err(HeuristicError::TooLarge { size: s_count, max: MAX_BRUTEFORCE_SETS });
    }
    let masks: Vec<u64> = (0..s_count).map(|s| msc.members(s).iter().fold(0u64, |m, &x| m | 1 << x)).collect();
    let full = (1u64 << msc.universe.len()) - 1;
    let mut best: Option<u32> = None;
    for pick in 0u32..(1 << s_count) {
        if best.is_some_and(|b| pick.count_ones() >= b.count_ones()) {
            continue;
        }
        let hit = (0..s_count).filter(|&s| pick >> s & 1 == 1).fold(0u64, |m, s| m | masks[s]);
        if hit == full {
            best = Some(pick);
        }
    }
    let pick = best.ok_or_else(|| HeuristicError::InfeasibleInput("the sets do not cover the universe".into()))?;
    Ok((0..s_count).filter(|&s| pick >> s & 1 == 1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn small_covers() {
        let msc = MscInstance::new(sv(&["1", "2", "3"]), vec![sv(&["1", "2"]), sv(&["2", "3"]), sv(&["3"])]).unwrap();
        assert_eq!(msc_bruteforce(&msc).unwrap().len(), 2);
        let whole = MscInstance::new(sv(&["a", "b"]), vec![sv(&["a", "b"])]).unwrap();
        assert_eq!(msc_bruteforce(&whole).unwrap(), vec![0]);
    }

    #[test]
    fn unit_square_matching_and_tour() {
        use crate::model::{build_instance, InstanceFile};
        let pts = [(0.0f64, 0.0f64), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        let t: Vec<Vec<f64>> = pts.iter().map(|a| pts.iter().map(|b| (a.0 - b.0).hypot(a.1 - b.1)).collect()).collect();
        let inst = build_instance(&InstanceFile::proportional("sq", t, 1.0, 1.0, 1)).unwrap();
        let pairs = perfect_matching(&inst, &[0, 1, 2, 3]);
        assert_eq!(pairs.len(), 2);
        assert!((christofides_cycle(&inst).unwrap().length - 4.0).abs() < 1e-9);
        assert!((tsp_bruteforce(&inst).unwrap().length - 4.0).abs() < 1e-9);
    }
}
