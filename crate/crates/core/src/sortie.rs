//! Drone sorties: energy accounting, feasibility, catalog enumeration and
//! splitting of non-loop sorties into loops.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Instance;

/// Slack on the battery threshold.
pub const ENERGY_TOL: f64 = 1e-9;
/// Default ceiling on the number of enumerated sorties.
pub const DEFAULT_CATALOG_CEILING: usize = 5_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SortieError {
    #[error("malformed sortie: {0}")]
    Malformed(String),
    #[error("sortie is a loop; splitting needs distinct launch and landing nodes")]
    LoopInput,
    #[error("sortie is not battery-feasible")]
    Infeasible,
    #[error("no split index exists for this sortie")]
    NoSplitIndex,
    #[error("sortie catalog exceeds {0} entries; lower max_sortie_customers")]
    CatalogExplosion(usize),
}

/// Ordered node tuple `(launch, served..., landing)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Sortie {
    nodes: Vec<usize>,
}

impl Sortie {
    /// At least three nodes; interior nodes distinct from each other and from both ends.
    pub fn new(nodes: Vec<usize>) -> Result<Self, SortieError> {
        if nodes.len() < 3 {
            return Err(SortieError::Malformed("a sortie needs at least three nodes".into()));
        }
        let r = nodes.len();
        for p in 1..r - 1 {
            let k = nodes[p];
            if k == nodes[0] || k == nodes[r - 1] || nodes[1..p].contains(&k) {
                return Err(SortieError::Malformed(format!("served node {k} repeats")));
            }
        }
        Ok(Sortie { nodes })
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }
    pub fn start(&self) -> usize {
        self.nodes[0]
    }
    pub fn end(&self) -> usize {
        *self.nodes.last().unwrap()
    }
    pub fn served(&self) -> &[usize] {
        &self.nodes[1..self.nodes.len() - 1]
    }
    pub fn is_loop(&self) -> bool {
        self.start() == self.end()
    }
    pub fn reversed(&self) -> Sortie {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        Sortie { nodes }
    }

    /// Flight time along the drone metric.
    pub fn duration(&self, inst: &Instance) -> f64 {
        self.nodes.windows(2).map(|w| inst.drone(w[0], w[1])).sum()
    }

    /// Eligibility of endpoints and served nodes for `inst`.
    pub fn check(&self, inst: &Instance) -> Result<(), SortieError> {
        let n = inst.n();
        if self.nodes.iter().any(|&v| v >= n) {
            return Err(SortieError::Malformed("node index out of range".into()));
        }
        if !inst.is_truck_node(self.start()) || !inst.is_truck_node(self.end()) {
            return Err(SortieError::Malformed("launch and landing nodes must be truck-visitable".into()));
        }
        if let Some(&k) = self.served().iter().find(|&&k| !inst.is_drone_node(k)) {
            return Err(SortieError::Malformed(format!("node {k} cannot be served by a drone")));
        }
        Ok(())
    }

    pub fn to_labels(&self, inst: &Instance) -> Vec<String> {
        self.nodes.iter().map(|&v| inst.label(v).to_string()).collect()
    }

    pub fn from_labels(inst: &Instance, labels: &[String]) -> Result<Sortie, SortieError> {
        let nodes = labels
            .iter()
            .map(|l| inst.node_index(l).ok_or_else(|| SortieError::Malformed(format!("unknown label {l:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        Sortie::new(nodes)
    }

    pub fn display(&self, inst: &Instance) -> String {
        self.to_labels(inst).concat()
    }
}

/// Energy needed to fly `s`: the drone weight times the total distance plus,
/// for every served node, its payload times the distance flown to reach it.
pub fn sortie_energy(inst: &Instance, s: &Sortie) -> f64 {
    let nodes = s.nodes();
    let mut flown = 0.0;
    let mut payload_term = 0.0;
    for p in 1..nodes.len() {
        flown += inst.drone(nodes[p - 1], nodes[p]);
        if p < nodes.len() - 1 {
            payload_term += inst.payload(nodes[p]) * flown;
        }
    }
    inst.drone_weight() * flown + payload_term
}

pub fn is_feasible(inst: &Instance, s: &Sortie) -> bool {
    sortie_energy(inst, s) <= inst.battery() + ENERGY_TOL
}

pub fn is_invertible(inst: &Instance, s: &Sortie) -> bool {
    is_feasible(inst, &s.reversed())
}

/// The set of feasible sorties, sorted lexicographically, with lookup indexes.
#[derive(Debug, Clone)]
pub struct SortieCatalog {
    sorties: Vec<Sortie>,
    durations: Vec<f64>,
    energies: Vec<f64>,
    by_served: Vec<Vec<usize>>,
    by_endpoints: HashMap<(usize, usize), Vec<usize>>,
    by_start: Vec<Vec<usize>>,
    position: HashMap<Sortie, usize>,
    unservable: Vec<usize>,
}

impl SortieCatalog {
    /// Catalog holding exactly `sorties` (deduplicated and sorted).
    pub fn from_sorties(inst: &Instance, mut sorties: Vec<Sortie>) -> Self {
        sorties.sort();
        sorties.dedup();
        let n = inst.n();
        let mut by_served = vec![Vec::new(); n];
        let mut by_start = vec![Vec::new(); n];
        let mut by_endpoints: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        let mut position = HashMap::with_capacity(sorties.len());
        let mut durations = Vec::with_capacity(sorties.len());
        let mut energies = Vec::with_capacity(sorties.len());
        for (idx, s) in sorties.iter().enumerate() {
            for &k in s.served() {
                by_served[k].push(idx);
            }
            by_start[s.start()].push(idx);
            by_endpoints.entry((s.start(), s.end())).or_default().push(idx);
            position.insert(s.clone(), idx);
            durations.push(s.duration(inst));
            energies.push(sortie_energy(inst, s));
        }
        let unservable = (0..n)
            .filter(|&k| !inst.is_truck_node(k) && by_served[k].is_empty())
            .collect();
        SortieCatalog { sorties, durations, energies, by_served, by_endpoints, by_start, position, unservable }
    }

    pub fn empty(inst: &Instance) -> Self {
        Self::from_sorties(inst, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.sorties.len()
    }
    pub fn is_empty(&self) -> bool {
        self.sorties.is_empty()
    }
    pub fn sorties(&self) -> &[Sortie] {
        &self.sorties
    }
    pub fn get(&self, idx: usize) -> &Sortie {
        &self.sorties[idx]
    }
    pub fn duration(&self, idx: usize) -> f64 {
        self.durations[idx]
    }
    pub fn energy(&self, idx: usize) -> f64 {
        self.energies[idx]
    }
    /// Indexes of sorties whose served set contains `k`.
    pub fn serving(&self, k: usize) -> &[usize] {
        &self.by_served[k]
    }
    pub fn starting_at(&self, i: usize) -> &[usize] {
        &self.by_start[i]
    }
    pub fn between(&self, start: usize, end: usize) -> &[usize] {
        self.by_endpoints.get(&(start, end)).map(|v| v.as_slice()).unwrap_or(&[])
    }
    pub fn index_of(&self, s: &Sortie) -> Option<usize> {
        self.position.get(s).copied()
    }
    /// Drone-only nodes that no sortie serves; nonempty means no solution exists.
    pub fn unservable(&self) -> &[usize] {
        &self.unservable
    }
    pub fn covers_instance(&self) -> bool {
        self.unservable.is_empty()
    }
    pub fn only_loops_or_single_customer(&self) -> bool {
        self.sorties.iter().all(|s| s.is_loop() || s.served().len() == 1)
    }

    /// One sortie per line: labels, duration, energy.
    pub fn dump(&self, inst: &Instance) -> String {
        let mut out = String::new();
        for (i, s) in self.sorties.iter().enumerate() {
            let _ = writeln!(out, "{}\t{:.4}\t{:.4}", s.to_labels(inst).join(","), self.durations[i], self.energies[i]);
        }
        out
    }
}

/// Enumerate every feasible sortie with at most `max_sortie_customers` served nodes.
pub fn enumerate_sorties(inst: &Instance) -> Result<SortieCatalog, SortieError> {
    enumerate_sorties_with_ceiling(inst, DEFAULT_CATALOG_CEILING)
}

pub fn enumerate_sorties_with_ceiling(inst: &Instance, ceiling: usize) -> Result<SortieCatalog, SortieError> {
    let n = inst.n();
    let landings: Vec<usize> = inst.truck_nodes().collect();
    let servable: Vec<usize> = inst.drone_nodes().collect();
    // cheapest hop from each node to some landing node other than itself
    let nearest_landing: Vec<f64> = (0..n)
        .map(|v| {
            landings
                .iter()
                .filter(|&&e| e != v)
                .map(|&e| inst.drone(v, e))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let budget = inst.battery() + ENERGY_TOL;
    let cap = inst.max_sortie_customers();
    let mut out = Vec::new();

    struct Ctx<'a> {
        inst: &'a Instance,
        landings: &'a [usize],
        servable: &'a [usize],
        nearest: &'a [f64],
        budget: f64,
        cap: usize,
        ceiling: usize,
    }

    fn extend(ctx: &Ctx, path: &mut Vec<usize>, flown: f64, payload: f64, out: &mut Vec<Sortie>) -> Result<(), SortieError> {
        let inst = ctx.inst;
        let last = *path.last().unwrap();
        let w = inst.drone_weight();
        if path.len() >= 2 {
            for &e in ctx.landings {
                if e == last || path[1..].contains(&e) {
                    continue;
                }
                let energy = w * (flown + inst.drone(last, e)) + payload;
                if energy <= ctx.budget {
                    let mut nodes = path.clone();
                    nodes.push(e);
                    out.push(Sortie { nodes });
                    if out.len() > ctx.ceiling {
                        return Err(SortieError::CatalogExplosion(ctx.ceiling));
                    }
                }
            }
        }
        if path.len() > ctx.cap {
            return Ok(());
        }
        for &k in ctx.servable {
            if path.contains(&k) {
                continue;
            }
            let f = flown + inst.drone(last, k);
            let p = payload + inst.payload(k) * f;
            if w * (f + ctx.nearest[k]) + p > ctx.budget {
                continue;
            }
            path.push(k);
            extend(ctx, path, f, p, out)?;
            path.pop();
        }
        Ok(())
    }

    let ctx = Ctx {
        inst,
        landings: &landings,
        servable: &servable,
        nearest: &nearest_landing,
        budget,
        cap,
        ceiling,
    };
    for &s in &landings {
        let mut path = vec![s];
        extend(&ctx, &mut path, 0.0, 0.0, &mut out)?;
    }
    Ok(SortieCatalog::from_sorties(inst, out))
}

/// Result of splitting a non-loop sortie.
#[derive(Debug, Clone, PartialEq)]
pub enum Split {
    /// A single loop serving every node of the original sortie.
    Loop(Sortie),
    /// Two loops, one anchored at each end. `candidates` lists every split
    /// index that satisfied the selection rule; the smallest was used.
    Pair { first: Sortie, second: Sortie, candidates: Vec<usize> },
}

impl Split {
    pub fn loops(&self) -> Vec<Sortie> {
        match self {
            Split::Loop(s) => vec![s.clone()],
            Split::Pair { first, second, .. } => vec![first.clone(), second.clone()],
        }
    }

    /// True when more than one split index qualified.
    pub fn is_ambiguous(&self) -> bool {
        matches!(self, Split::Pair { candidates, .. } if candidates.len() > 1)
    }
}

/// Replace a feasible non-loop sortie by feasible loops serving the same nodes.
///
/// Single-customer sorties become the loop over the shorter leg. Otherwise the
/// loop returning to the launch node, or the reversed loop returning to the
/// landing node, is used when feasible; failing both, the sortie is cut at the
/// first index `t` where the prefix loop stops being feasible.
pub fn split_sortie(inst: &Instance, s: &Sortie) -> Result<Split, SortieError> {
    if s.is_loop() {
        return Err(SortieError::LoopInput);
    }
    if !is_feasible(inst, s) {
        return Err(SortieError::Infeasible);
    }
    let v = s.nodes();
    let r = v.len();
    let (first, last) = (v[0], v[r - 1]);
    if r == 3 {
        let k = v[1];
        let lp = if inst.drone(first, k) <= inst.drone(k, last) {
            Sortie { nodes: vec![first, k, first] }
        } else {
            Sortie { nodes: vec![last, k, last] }
        };
        return Ok(Split::Loop(lp));
    }
    let mut forward = v[..r - 1].to_vec();
    forward.push(first);
    let forward = Sortie { nodes: forward };
    if is_feasible(inst, &forward) {
        return Ok(Split::Loop(forward));
    }
    let mut backward: Vec<usize> = v[1..].iter().rev().copied().collect();
    backward.push(last);
    let backward = Sortie { nodes: backward };
    if is_feasible(inst, &backward) {
        return Ok(Split::Loop(backward));
    }
    // prefix loop over v[0..t] (1-based t counts nodes i_1..i_t)
    let prefix_loop = |t: usize| {
        let mut nodes = v[..t].to_vec();
        nodes.push(first);
        Sortie { nodes }
    };
    let candidates: Vec<usize> = (2..=r - 2)
        .filter(|&t| is_feasible(inst, &prefix_loop(t)) && !is_feasible(inst, &prefix_loop(t + 1)))
        .collect();
    let Some(&t) = candidates.first() else {
        return Err(SortieError::NoSplitIndex);
    };
    let mut second: Vec<usize> = v[t..].iter().rev().copied().collect();
    second.push(last);
    Ok(Split::Pair { first: prefix_loop(t), second: Sortie { nodes: second }, candidates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_instance, InstanceFile};

    /// Three collinear nodes A, B, C with the drone metric of the energy example.
    fn energy_example(battery: f64) -> Instance {
        // A-C = 10, C-B = 20, A-B = 30
        let d = vec![vec![0.0, 30.0, 10.0], vec![30.0, 0.0, 20.0], vec![10.0, 20.0, 0.0]];
        let f = InstanceFile {
            name: "energy".into(),
            labels: None,
            truck_matrix: d.clone(),
            drone_matrix: Some(d),
            alpha: None,
            m: 1,
            max_sortie_duration: None,
            battery: Some(battery),
            drone_weight: Some(10.0),
            payloads: Some(vec![0.0, 0.0, 5.0]),
            truck_nodes: Some(vec!["A".into(), "B".into()]),
            drone_nodes: Some(vec!["C".into()]),
            max_sortie_customers: None,
            coords: None,
        };
        build_instance(&f).unwrap()
    }

    #[test]
    fn energy_matches_worked_pair() {
        let inst = energy_example(350.0);
        let acb = Sortie::new(vec![0, 2, 1]).unwrap();
        assert_eq!(sortie_energy(&inst, &acb), 350.0);
        assert_eq!(sortie_energy(&inst, &acb.reversed()), 400.0);
        assert!(is_feasible(&inst, &acb));
        assert!(!is_invertible(&inst, &acb));
        let inst = energy_example(400.0);
        assert!(is_invertible(&inst, &acb));
    }

    #[test]
    fn split_of_worked_pair() {
        let inst = energy_example(350.0);
        let acb = Sortie::new(vec![0, 2, 1]).unwrap();
        let split = split_sortie(&inst, &acb).unwrap();
        let aca = Sortie::new(vec![0, 2, 0]).unwrap();
        assert_eq!(split, Split::Loop(aca.clone()));
        assert_eq!(sortie_energy(&inst, &aca), 250.0);
        assert_eq!(sortie_energy(&inst, &Sortie::new(vec![1, 2, 1]).unwrap()), 500.0);
        assert_eq!(split_sortie(&inst, &aca), Err(SortieError::LoopInput));
    }

    #[test]
    fn malformed_sorties() {
        assert!(Sortie::new(vec![0, 1]).is_err());
        assert!(Sortie::new(vec![0, 1, 1, 0]).is_err());
        assert!(Sortie::new(vec![0, 0, 1]).is_err());
        assert!(Sortie::new(vec![0, 1, 0]).is_ok());
    }

    #[test]
    fn zero_battery_empty_catalog() {
        let inst = energy_example(0.0);
        let cat = enumerate_sorties(&inst).unwrap();
        assert!(cat.is_empty());
        assert_eq!(cat.unservable(), &[2]);
    }

    #[test]
    fn catalog_indexes() {
        let inst = energy_example(350.0);
        let cat = enumerate_sorties(&inst).unwrap();
        let names: Vec<String> = cat.sorties().iter().map(|s| s.display(&inst)).collect();
        assert_eq!(names, vec!["ACA", "ACB"]);
        assert_eq!(cat.serving(2).len(), 2);
        assert_eq!(cat.between(0, 1), &[1]);
        assert!(cat.covers_instance());
        assert!(cat.dump(&inst).starts_with("A,C,A\t"));
    }

    #[test]
    fn ceiling_triggers() {
        let inst = energy_example(1000.0);
        assert_eq!(
            enumerate_sorties_with_ceiling(&inst, 1).unwrap_err(),
            SortieError::CatalogExplosion(1)
        );
    }
}
