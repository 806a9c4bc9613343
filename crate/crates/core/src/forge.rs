//! Bundled fixtures and instance generators.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{build_instance, metric_closure, Instance, InstanceFile, Matrix, ModelError};
use crate::schedule::{DroneOperation, ScheduleError, Solution, SolutionFile};
use crate::sortie::Sortie;

#[derive(Debug, Error)]
pub enum ForgeError {
    #[error("unknown fixture {0:?}")]
    UnknownFixture(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("fixture data: {0}")]
    Data(#[from] serde_json::Error),
}

const INSTANCES: [(&str, &str); 3] = [
    ("fig2", include_str!("../fixtures/fig2.instance.json")),
    ("fig3", include_str!("../fixtures/fig3.instance.json")),
    ("fig4", include_str!("../fixtures/fig4.instance.json")),
];

const SOLUTIONS: [(&str, &str); 5] = [
    ("fig2", include_str!("../fixtures/fig2.solution.json")),
    ("fig3", include_str!("../fixtures/fig3.solution.json")),
    ("fig8", include_str!("../fixtures/fig8.solution.json")),
    ("fig4", include_str!("../fixtures/fig4.solution.json")),
    ("fig5", include_str!("../fixtures/fig5.solution.json")),
];

pub const FIXTURE_NAMES: [&str; 3] = ["fig2", "fig3", "fig4"];
pub const SOLUTION_NAMES: [&str; 5] = ["fig2", "fig3", "fig8", "fig4", "fig5"];

pub fn fixture_file(name: &str) -> Result<InstanceFile, ForgeError> {
    let (_, text) = INSTANCES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| ForgeError::UnknownFixture(name.to_string()))?;
    Ok(serde_json::from_str(text)?)
}

pub fn load_fixture(name: &str) -> Result<Instance, ForgeError> {
    Ok(build_instance(&fixture_file(name)?)?)
}

/// A bundled solution together with the completion time it is published with.
#[derive(Debug, Clone)]
pub struct FixtureSolution {
    pub name: String,
    pub instance: String,
    pub solution: Solution,
    pub published: f64,
}

/// Solution fixture `name` and the instance it belongs to.
pub fn fixture_solution(name: &str) -> Result<(Instance, FixtureSolution), ForgeError> {
    let (_, text) = SOLUTIONS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| ForgeError::UnknownFixture(name.to_string()))?;
    let file: SolutionFile = serde_json::from_str(text)?;
    let inst_name = file.instance.clone().unwrap_or_else(|| name.to_string());
    let inst = load_fixture(&inst_name)?;
    let solution = file.to_solution(&inst)?;
    let published = file.published.unwrap_or(f64::NAN);
    Ok((inst, FixtureSolution { name: name.to_string(), instance: inst_name, solution, published }))
}

/// All bundled solutions on fixture instance `instance`.
pub fn fixture_solutions(instance: &str) -> Result<Vec<FixtureSolution>, ForgeError> {
    load_fixture(instance)?;
    let mut out = Vec::new();
    for name in SOLUTION_NAMES {
        let (_, fs) = fixture_solution(name)?;
        if fs.instance == instance {
            out.push(fs);
        }
    }
    Ok(out)
}

/// A generated instance plus the optimal values claimed for it in the
/// unrestricted problem and with node revisits forbidden.
#[derive(Debug, Clone)]
pub struct FamilyInstance {
    pub instance: Instance,
    pub claimed_unrestricted: f64,
    pub claimed_cycle: f64,
}

/// Sparse symmetric edge list completed by shortest paths.
struct Sketch {
    labels: Vec<String>,
    edges: Vec<(usize, usize, f64)>,
}

impl Sketch {
    fn new() -> Self {
        Sketch { labels: Vec::new(), edges: Vec::new() }
    }
    fn node(&mut self, label: String) -> usize {
        self.labels.push(label);
        self.labels.len() - 1
    }
    fn edge(&mut self, a: usize, b: usize, len: f64) {
        self.edges.push((a, b, len));
    }
    fn closed_rows(&self) -> Result<Vec<Vec<f64>>, ForgeError> {
        let n = self.labels.len();
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m.set(i, j, f64::INFINITY);
                }
            }
        }
        for &(a, b, len) in &self.edges {
            m.set(a, b, len.min(m.get(a, b)));
            m.set(b, a, len.min(m.get(b, a)));
        }
        let c = metric_closure(&m);
        if c.rows().iter().flatten().any(|v| !v.is_finite()) {
            return Err(ForgeError::InvalidParameter("disconnected construction".into()));
        }
        Ok(c.rows())
    }
    fn file(&self, name: String, alpha: f64, max_duration: f64, m: usize) -> Result<InstanceFile, ForgeError> {
        let mut f = InstanceFile::proportional(&name, self.closed_rows()?, alpha, max_duration, m);
        f.labels = Some(self.labels.clone());
        Ok(f)
    }
}

fn check_eps(eps: f64) -> Result<(), ForgeError> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(ForgeError::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    Ok(())
}

/// Depot `0` and hub `1` at distance `eps`; for each of `2k` pairs a spoke
/// from the depot to `i_q` and from the hub to `j_q` with `i_q`, `j_q` only
/// `eps` apart and drone-only; `k` truck-only spokes `v_q` off the depot and
/// `w_q` off the hub. One drone of speedup 1 and range `2 + eps`.
pub fn shuttle_family(k: usize, eps: f64) -> Result<FamilyInstance, ForgeError> {
    if k == 0 {
        return Err(ForgeError::InvalidParameter("k must be at least 1".into()));
    }
    check_eps(eps)?;
    let mut s = Sketch::new();
    let depot = s.node("0".into());
    let hub = s.node("1".into());
    s.edge(depot, hub, eps);
    let is: Vec<usize> = (1..=2 * k).map(|q| s.node(format!("i{q}"))).collect();
    let js: Vec<usize> = (1..=2 * k).map(|q| s.node(format!("j{q}"))).collect();
    let vs: Vec<usize> = (1..=k).map(|q| s.node(format!("v{q}"))).collect();
    let ws: Vec<usize> = (1..=k).map(|q| s.node(format!("w{q}"))).collect();
    for q in 0..2 * k {
        s.edge(depot, is[q], 1.0);
        s.edge(hub, js[q], 1.0);
        s.edge(is[q], js[q], eps);
    }
    for q in 0..k {
        s.edge(depot, vs[q], 1.0);
        s.edge(hub, ws[q], 1.0);
    }
    let mut f = s.file(format!("shuttle_k{k}_eps{eps}"), 1.0, 2.0 + eps, 1)?;
    let lab = |v: &[usize]| v.iter().map(|&x| s.labels[x].clone()).collect::<Vec<_>>();
    let mut truck = vec!["0".to_string(), "1".to_string()];
    truck.extend(lab(&vs));
    truck.extend(lab(&ws));
    let mut drone = lab(&is);
    drone.extend(lab(&js));
    f.truck_nodes = Some(truck);
    f.drone_nodes = Some(drone);
    let kf = k as f64;
    Ok(FamilyInstance {
        instance: build_instance(&f)?,
        claimed_unrestricted: 2.0 * kf * (2.0 + eps),
        claimed_cycle: 2.0 * (2.0 + eps) + 4.0 * (kf - 1.0) + 4.0 * (2.0 * kf - 2.0),
    })
}

/// Depot `0`, hub `1` at distance `eps`, and `k` drone-only spokes `j_q`
/// plus `k` truck-only spokes `w_q` of length 1 off the hub. One drone,
/// speedup 1, range 2.
pub fn loop_family(k: usize, eps: f64) -> Result<FamilyInstance, ForgeError> {
    if k == 0 {
        return Err(ForgeError::InvalidParameter("k must be at least 1".into()));
    }
    check_eps(eps)?;
    let mut s = Sketch::new();
    let depot = s.node("0".into());
    let hub = s.node("1".into());
    s.edge(depot, hub, eps);
    let js: Vec<usize> = (1..=k).map(|q| s.node(format!("j{q}"))).collect();
    let ws: Vec<usize> = (1..=k).map(|q| s.node(format!("w{q}"))).collect();
    for q in 0..k {
        s.edge(hub, js[q], 1.0);
        s.edge(hub, ws[q], 1.0);
    }
    let mut f = s.file(format!("loop_k{k}_eps{eps}"), 1.0, 2.0, 1)?;
    let mut truck = vec!["0".to_string(), "1".to_string()];
    truck.extend(ws.iter().map(|&x| s.labels[x].clone()));
    f.truck_nodes = Some(truck);
    f.drone_nodes = Some(js.iter().map(|&x| s.labels[x].clone()).collect());
    let kf = k as f64;
    Ok(FamilyInstance {
        instance: build_instance(&f)?,
        claimed_unrestricted: 2.0 * eps + 2.0 * kf,
        claimed_cycle: 2.0 * eps + 4.0 * kf,
    })
}

/// `m` hubs pairwise `eps` apart, each with a pendant at truck distance 1;
/// depot is the first hub. `m` drones of speedup 2 and range 1.
pub fn mtope_family(m: usize, eps: f64) -> Result<FamilyInstance, ForgeError> {
    if m < 2 {
        return Err(ForgeError::InvalidParameter("m must be at least 2".into()));
    }
    check_eps(eps)?;
    let mut s = Sketch::new();
    let hubs: Vec<usize> = (1..=m).map(|q| s.node(format!("i{q}"))).collect();
    let pend: Vec<usize> = (1..=m).map(|q| s.node(format!("j{q}"))).collect();
    for a in 0..m {
        for b in a + 1..m {
            s.edge(hubs[a], hubs[b], eps);
        }
        s.edge(hubs[a], pend[a], 1.0);
    }
    let f = s.file(format!("mtope_m{m}_eps{eps}"), 2.0, 1.0, m)?;
    let mf = m as f64;
    Ok(FamilyInstance {
        instance: build_instance(&f)?,
        claimed_unrestricted: 1.0 + mf * eps,
        claimed_cycle: mf * (1.0 + eps),
    })
}

/// Set cover input: a universe of labels and a collection of subsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MscInstance {
    pub universe: Vec<String>,
    pub sets: Vec<Vec<String>>,
}

impl MscInstance {
    pub fn new(universe: Vec<String>, sets: Vec<Vec<String>>) -> Result<Self, ForgeError> {
        let msc = MscInstance { universe, sets };
        msc.check()?;
        Ok(msc)
    }

    pub fn check(&self) -> Result<(), ForgeError> {
        let bad = |s: String| Err(ForgeError::InvalidParameter(s));
        if self.universe.is_empty() {
            return bad("empty universe".into());
        }
        let uniq: BTreeSet<&String> = self.universe.iter().collect();
        if uniq.len() != self.universe.len() {
            return bad("duplicate universe element".into());
        }
        let mut seen = BTreeSet::new();
        for s in &self.sets {
            for x in s {
                if !uniq.contains(x) {
                    return bad(format!("set element {x:?} not in universe"));
                }
                seen.insert(x);
            }
        }
        if seen.len() != uniq.len() {
            return bad("sets do not cover the universe".into());
        }
        Ok(())
    }

    /// Element indices of set `s`, sorted and deduplicated.
    pub fn members(&self, s: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self.sets[s]
            .iter()
            .map(|x| self.universe.iter().position(|u| u == x).unwrap())
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn set_node(&self, s: usize) -> usize {
        1 + s
    }

    pub fn element_node(&self, x: usize) -> usize {
        1 + self.sets.len() + x
    }

    pub fn is_cover(&self, chosen: &[usize]) -> bool {
        let mut hit = vec![false; self.universe.len()];
        for &s in chosen {
            for x in self.members(s) {
                hit[x] = true;
            }
        }
        hit.iter().all(|&h| h)
    }
}

/// Depot, one node per set at 1/2 from the depot, one node per element at
/// 1/2 from each set containing it. Every node is truck and drone eligible;
/// the drone range is `1 / alpha`.
pub fn msc_reduce(msc: &MscInstance, alpha: f64, m: usize) -> Result<Instance, ForgeError> {
    msc.check()?;
    if !(alpha >= 1.0) || !alpha.is_finite() {
        return Err(ForgeError::InvalidParameter(format!("alpha must be at least 1, got {alpha}")));
    }
    let mut s = Sketch::new();
    let depot = s.node("0".into());
    let set_nodes: Vec<usize> = (0..msc.sets.len()).map(|q| s.node(format!("S{}", q + 1))).collect();
    let elem_nodes: Vec<usize> = msc.universe.iter().map(|x| s.node(format!("x{x}"))).collect();
    for (q, &sn) in set_nodes.iter().enumerate() {
        s.edge(depot, sn, 0.5);
        for x in msc.members(q) {
            s.edge(sn, elem_nodes[x], 0.5);
        }
    }
    let f = s.file("msc".into(), alpha, 1.0 / alpha, m)?;
    Ok(build_instance(&f)?)
}

/// Solution built from a set cover: the truck makes a round trip to each
/// chosen set node and waits there while drones serve that set's elements
/// with loops; the other set nodes are served by loops from the depot.
/// Completion time is `(1 + 1/alpha)` per chosen set.
pub fn msc_cover_solution(msc: &MscInstance, inst: &Instance, cover: &[usize]) -> Result<Solution, ForgeError> {
    if !msc.is_cover(cover) {
        return Err(ForgeError::InvalidParameter("not a cover".into()));
    }
    let mut chosen: Vec<usize> = cover.to_vec();
    chosen.sort_unstable();
    chosen.dedup();
    let mut route = Vec::new();
    let mut ops = Vec::new();
    let mut served = vec![false; msc.universe.len()];
    for &c in &chosen {
        let hub = msc.set_node(c);
        route.push((0, hub));
        let mine: Vec<usize> = msc.members(c).into_iter().filter(|&x| !served[x]).collect();
        let first = route.len() + 1;
        for (q, &x) in mine.iter().enumerate() {
            served[x] = true;
            route.push((hub, hub));
            let sortie = Sortie::new(vec![hub, msc.element_node(x), hub]).map_err(|e| ForgeError::InvalidParameter(e.to_string()))?;
            ops.push(DroneOperation { drone: 0, sortie, start_pos: first, end_pos: first + q });
        }
        route.push((hub, 0));
    }
    for s in 0..msc.sets.len() {
        if chosen.binary_search(&s).is_err() {
            route.push((0, 0));
            let sortie = Sortie::new(vec![0, msc.set_node(s), 0]).map_err(|e| ForgeError::InvalidParameter(e.to_string()))?;
            ops.push(DroneOperation { drone: 0, sortie, start_pos: 1, end_pos: route.len() });
        }
    }
    // interval colouring for drone ids
    let mut order: Vec<usize> = (0..ops.len()).collect();
    order.sort_by_key(|&i| (ops[i].start_pos, ops[i].end_pos));
    let mut free_after: Vec<usize> = Vec::new();
    for i in order {
        let d = match free_after.iter().position(|&f| f < ops[i].start_pos) {
            Some(d) => d,
            None => {
                free_after.push(0);
                free_after.len() - 1
            }
        };
        free_after[d] = ops[i].end_pos;
        ops[i].drone = d + 1;
    }
    if free_after.len() > inst.drones() {
        return Err(ForgeError::InvalidParameter(format!(
            "construction needs {} drones, instance has {}",
            free_after.len(),
            inst.drones()
        )));
    }
    ops.sort_by_key(|o| (o.start_pos, o.end_pos));
    Ok(Solution { route, operations: ops })
}

/// Random set cover input with `1..=max_universe` elements and
/// `1..=max_sets` sets; every element lands in at least one set.
pub fn random_msc(seed: u64, max_universe: usize, max_sets: usize) -> MscInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nx = rng.gen_range(1..=max_universe.max(1));
    let ns = rng.gen_range(1..=max_sets.max(1));
    let universe: Vec<String> = (1..=nx).map(|x| x.to_string()).collect();
    let mut sets: Vec<BTreeSet<usize>> = (0..ns)
        .map(|_| (0..nx).filter(|_| rng.gen_bool(0.4)).collect())
        .collect();
    for x in 0..nx {
        if !sets.iter().any(|s| s.contains(&x)) {
            let s = rng.gen_range(0..ns);
            sets[s].insert(x);
        }
    }
    for s in sets.iter_mut() {
        if s.is_empty() {
            s.insert(rng.gen_range(0..nx));
        }
    }
    let sets = sets.into_iter().map(|s| s.into_iter().map(|x| universe[x].clone()).collect()).collect();
    MscInstance { universe, sets }
}

/// Uniform points in a 50 x 50 square; distances rounded to two decimals and
/// closed under shortest paths; proportional drone metric.
pub fn random_euclidean_file(n: usize, seed: u64, alpha: f64, max_duration: f64, m: usize) -> Result<InstanceFile, ForgeError> {
    if n < 2 {
        return Err(ForgeError::InvalidParameter("need at least 2 nodes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen::<f64>() * 50.0, rng.gen::<f64>() * 50.0]).collect();
    let mut d = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let v = ((pts[i][0] - pts[j][0]).hypot(pts[i][1] - pts[j][1]) * 100.0).round() / 100.0;
            d.set(i, j, v);
        }
    }
    let mut f = InstanceFile::proportional(&format!("euclid_n{n}_s{seed}"), metric_closure(&d).rows(), alpha, max_duration, m);
    f.coords = Some(pts);
    Ok(f)
}

pub fn random_euclidean(n: usize, seed: u64, alpha: f64, max_duration: f64, m: usize) -> Result<Instance, ForgeError> {
    Ok(build_instance(&random_euclidean_file(n, seed, alpha, max_duration, m)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_load() {
        assert_eq!(load_fixture("fig3").unwrap().n(), 5);
        assert_eq!(load_fixture("fig2").unwrap().drones(), 3);
        assert!(matches!(load_fixture("fig9"), Err(ForgeError::UnknownFixture(_))));
        assert_eq!(fixture_solutions("fig4").unwrap().len(), 2);
    }

    #[test]
    fn family_sizes() {
        assert_eq!(shuttle_family(2, 0.5).unwrap().instance.n(), 14);
        assert_eq!(loop_family(3, 0.1).unwrap().instance.n(), 8);
        assert_eq!(mtope_family(3, 0.1).unwrap().instance.n(), 6);
        assert!(loop_family(0, 0.1).is_err());
    }

    #[test]
    fn msc_distances() {
        let msc = MscInstance::new(vec!["a".into(), "b".into()], vec![vec!["a".into()], vec!["b".into()]]).unwrap();
        let inst = msc_reduce(&msc, 1.0, 1).unwrap();
        assert_eq!(inst.n(), 5);
        assert_eq!(inst.truck(msc.element_node(0), msc.element_node(1)), 2.0);
    }

    #[test]
    fn euclid_deterministic() {
        let a = random_euclidean(6, 3, 2.0, 30.0, 1).unwrap();
        let b = random_euclidean(6, 3, 2.0, 30.0, 1).unwrap();
        assert_eq!(a, b);
    }
}
