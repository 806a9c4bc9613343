//! Exact depth-first branch-and-bound over time-indexed routes.
//!
//! A search state is the truck's node and clock, the positions used so far,
//! the covered node set and the drones in the air. At each arrival the search
//! decides which airborne drone (if any) lands, then which sorties start here,
//! then which arc comes next. At most one drone lands per position and routes
//! have at most `2|N|` arcs.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Instance, OBJ_TOL};
use crate::schedule::{classify, evaluate, validate, DroneOperation, Schedule, Solution};
use crate::sortie::SortieCatalog;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Mode {
    /// Unrestricted: arcs and nodes may be repeated.
    TspMd,
    /// No directed arc is traversed twice.
    MCircuit,
    /// No node is revisited; the depot is reached once, at the end.
    MCycle,
    /// The truck serves every node alone.
    TspTruckOnly,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::TspMd, Mode::MCircuit, Mode::MCycle, Mode::TspTruckOnly];

    pub fn name(self) -> &'static str {
        match self {
            Mode::TspMd => "TSP_MD",
            Mode::MCircuit => "M_CIRCUIT",
            Mode::MCycle => "M_CYCLE",
            Mode::TspTruckOnly => "TSP_TRUCK_ONLY",
        }
    }

    /// Whether a solution's shape is allowed in this mode.
    pub fn admits(self, sol: &Solution) -> bool {
        let c = classify(sol);
        match self {
            Mode::TspMd => true,
            Mode::MCircuit => !c.is_arc_retraversing,
            Mode::MCycle => !c.is_node_revisiting,
            Mode::TspTruckOnly => sol.operations.is_empty(),
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "TSP_MD" => Ok(Mode::TspMd),
            "M_CIRCUIT" => Ok(Mode::MCircuit),
            "M_CYCLE" => Ok(Mode::MCycle),
            "TSP_TRUCK_ONLY" | "TSP" => Ok(Mode::TspTruckOnly),
            _ => Err(format!("unknown mode {s:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub mode: Mode,
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
    /// Single worker, fixed branching order.
    pub deterministic: bool,
    pub incumbent: Option<Solution>,
}

impl SolveConfig {
    pub fn new(mode: Mode) -> Self {
        SolveConfig { mode, time_limit: None, node_limit: None, deterministic: true, incumbent: None }
    }
    pub fn with_time_limit(mut self, secs: f64) -> Self {
        self.time_limit = Some(Duration::from_secs_f64(secs));
        self
    }
    pub fn with_node_limit(mut self, nodes: u64) -> Self {
        self.node_limit = Some(nodes);
        self
    }
    pub fn with_incumbent(mut self, sol: Solution) -> Self {
        self.incumbent = Some(sol);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    /// A limit stopped the search; the best solution is not proven optimal.
    Feasible,
    Infeasible,
    /// A limit stopped the search before any solution was found.
    NoSolutionFound,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveStats {
    pub nodes: u64,
    pub wall_seconds: f64,
    pub memo_labels: usize,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: Status,
    pub best: Option<(Solution, Schedule)>,
    pub best_bound: f64,
    pub stats: SolveStats,
}

impl SolveResult {
    pub fn objective(&self) -> Option<f64> {
        self.best.as_ref().map(|(_, s)| s.completion_time)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("the search supports at most {limit} nodes in this mode, instance has {n}")]
    TooLarge { n: usize, limit: usize },
    #[error("time and node limits must be positive")]
    BadLimits,
    #[error("warm start is not a valid solution for this mode: {0}")]
    BadIncumbent(String),
    #[error("mode {mode} returned {value:.6}, below the previous mode's {previous:.6}")]
    ChainViolated { mode: &'static str, value: f64, previous: f64 },
    #[error("mode {0} did not reach proven optimality")]
    NotOptimal(&'static str),
}

#[derive(Clone)]
struct Air {
    sortie: usize,
    launch_pos: usize,
    ready: f64,
}

#[derive(Clone)]
struct Label {
    covered: u64,
    visited: u64,
    arcs: [u64; 4],
    pos: usize,
    clock: f64,
    readys: Vec<f64>,
}

impl Label {
    fn dominates(&self, o: &Label) -> bool {
        self.covered & o.covered == o.covered
            && self.visited & o.visited == self.visited
            && (0..4).all(|w| self.arcs[w] & o.arcs[w] == self.arcs[w])
            && self.pos <= o.pos
            && self.clock <= o.clock + 1e-12
            && self.readys.iter().zip(&o.readys).all(|(a, b)| *a <= *b + 1e-12)
    }
}

const MEMO_CAP: usize = 4_000_000;

struct Search {
    mode: Mode,
    n: usize,
    m: usize,
    t_max: usize,
    full: u64,
    dist: Vec<f64>,
    truck_ok: Vec<bool>,
    must_visit: u64,
    // catalog data
    s_end: Vec<usize>,
    s_dur: Vec<f64>,
    s_mask: Vec<u64>,
    by_start: Vec<Vec<usize>>,
    serve_lb: Vec<f64>,
    // search state
    node: usize,
    clock: f64,
    pos: usize,
    covered: u64,
    visited: u64,
    arcs: [u64; 4],
    air: Vec<Air>,
    route: Vec<(usize, usize)>,
    ops: Vec<(usize, usize, usize)>,
    // results
    best: f64,
    best_route: Vec<(usize, usize)>,
    best_ops: Vec<(usize, usize, usize)>,
    found: bool,
    memo: HashMap<(usize, Vec<usize>), Vec<Label>>,
    memo_labels: usize,
    nodes: u64,
    node_limit: u64,
    deadline: Option<Instant>,
    stopped: bool,
}

impl Search {
    #[inline]
    fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    /// Admissible estimate of the remaining time from the current state.
    fn estimate(&self, node: usize, clock: f64, covered: u64, air: &[Air]) -> f64 {
        let mut h = self.d(node, 0);
        for a in air {
            let e = self.s_end[a.sortie];
            let t = self.d(node, e).max(a.ready - clock) + self.d(e, 0);
            h = h.max(t);
        }
        let mut open = self.full & !covered;
        while open != 0 {
            let k = open.trailing_zeros() as usize;
            open &= open - 1;
            h = h.max(self.serve_lb[node * self.n + k]);
        }
        let must = self.must_visit & !covered;
        if must.count_ones() >= 2 {
            let list: Vec<usize> = (0..self.n).filter(|&k| must >> k & 1 == 1).collect();
            for (x, &a) in list.iter().enumerate() {
                for &b in &list[x + 1..] {
                    let ab = self.d(node, a) + self.d(a, b) + self.d(b, 0);
                    let ba = self.d(node, b) + self.d(b, a) + self.d(a, 0);
                    h = h.max(ab.min(ba));
                }
            }
        }
        h
    }

    fn positions_suffice(&self, node: usize, pos: usize, covered: u64, airborne: usize) -> bool {
        let left = self.t_max - pos;
        let must = (self.must_visit & !covered).count_ones() as usize;
        let arrivals = must + usize::from(node != 0);
        left >= airborne && left >= arrivals
    }

    fn out_of_budget(&mut self) -> bool {
        if self.stopped {
            return true;
        }
        self.nodes += 1;
        if self.nodes >= self.node_limit {
            self.stopped = true;
        } else if self.nodes.is_multiple_of(1024) {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.stopped = true;
                }
            }
        }
        self.stopped
    }

    fn memo_check(&mut self) -> bool {
        let mut ids: Vec<(usize, f64)> = self.air.iter().map(|a| (a.sortie, a.ready)).collect();
        ids.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let key = (self.node, ids.iter().map(|x| x.0).collect::<Vec<_>>());
        let label = Label {
            covered: self.covered,
            visited: if self.mode == Mode::MCycle { self.visited } else { 0 },
            arcs: if self.mode == Mode::MCircuit { self.arcs } else { [0; 4] },
            pos: self.pos,
            clock: self.clock,
            readys: ids.iter().map(|x| x.1).collect(),
        };
        let bucket = self.memo.entry(key).or_default();
        if bucket.iter().any(|l| l.dominates(&label)) {
            return true;
        }
        if self.memo_labels < MEMO_CAP {
            let before = bucket.len();
            bucket.retain(|l| !label.dominates(l));
            let removed = before - bucket.len();
            bucket.push(label);
            self.memo_labels = self.memo_labels + 1 - removed;
        }
        false
    }

    /// Called on arrival at `self.node` after traversing route arc `self.pos`
    /// (or at the root before any arc).
    fn arrive(&mut self, via_wait: bool, newly_covered: bool) {
        if self.out_of_budget() {
            return;
        }
        let node = self.node;
        let mut options: Vec<Option<usize>> = Vec::new();
        if !via_wait {
            options.push(None);
        }
        if self.pos > 0 {
            let mut seen: Vec<(usize, u64)> = Vec::new();
            for (idx, a) in self.air.iter().enumerate() {
                if self.s_end[a.sortie] == node {
                    let sig = (a.sortie, a.ready.to_bits());
                    if !seen.contains(&sig) {
                        seen.push(sig);
                        options.push(Some(idx));
                    }
                }
            }
        }
        for opt in options {
            let saved_clock = self.clock;
            let mut landed: Option<(usize, Air)> = None;
            if let Some(idx) = opt {
                let a = self.air.remove(idx);
                self.clock = self.clock.max(a.ready);
                self.ops.push((a.sortie, a.launch_pos, self.pos));
                landed = Some((idx, a));
            }
            self.after_landing(landed.is_some(), newly_covered);
            if let Some((idx, a)) = landed {
                self.ops.pop();
                self.air.insert(idx, a);
            }
            self.clock = saved_clock;
            if self.stopped {
                return;
            }
        }
    }

    fn after_landing(&mut self, landed: bool, newly_covered: bool) {
        let node = self.node;
        if node == 0 && self.pos > 0 && self.air.is_empty() && self.covered == self.full {
            if self.clock < self.best - 1e-9 {
                self.best = self.clock;
                self.best_route = self.route.clone();
                self.best_ops = self.ops.clone();
                self.found = true;
            }
            return;
        }
        if self.clock + self.estimate(node, self.clock, self.covered, &self.air) >= self.best - 1e-9 {
            return;
        }
        let must_launch = self.pos > 0 && !landed && !newly_covered && self.mode != Mode::MCircuit;
        let idle = self.m - self.air.len();
        let mut chosen: Vec<usize> = Vec::new();
        self.launch_sets(0, idle, must_launch, &mut chosen);
    }

    fn launch_sets(&mut self, from: usize, idle: usize, must_launch: bool, chosen: &mut Vec<usize>) {
        if !(must_launch && chosen.is_empty()) {
            self.choose_arc();
            if self.stopped {
                return;
            }
        }
        if chosen.len() == idle || self.mode == Mode::TspTruckOnly {
            return;
        }
        let node = self.node;
        let count = self.by_start[node].len();
        for x in from..count {
            let s = self.by_start[node][x];
            if self.s_mask[s] & self.covered != 0 {
                continue;
            }
            self.covered |= self.s_mask[s];
            self.air.push(Air { sortie: s, launch_pos: self.pos + 1, ready: self.clock + self.s_dur[s] });
            chosen.push(s);
            self.launch_sets(x + 1, idle, must_launch, chosen);
            chosen.pop();
            self.air.pop();
            self.covered &= !self.s_mask[s];
            if self.stopped {
                return;
            }
        }
    }

    fn choose_arc(&mut self) {
        if self.pos >= self.t_max {
            return;
        }
        if !self.positions_suffice(self.node, self.pos, self.covered, self.air.len()) {
            return;
        }
        if self.clock + self.estimate(self.node, self.clock, self.covered, &self.air) >= self.best - 1e-9 {
            return;
        }
        if self.memo_check() {
            return;
        }
        let node = self.node;
        let ends_here = self.air.iter().any(|a| self.s_end[a.sortie] == node);
        let depot_closed = self.mode == Mode::MCycle && node == 0 && self.visited & 1 == 1;
        let mut children: Vec<(f64, usize)> = Vec::new();
        for u in 0..self.n {
            if u == node {
                if !ends_here {
                    continue;
                }
            } else {
                if !self.truck_ok[u] || depot_closed {
                    continue;
                }
                match self.mode {
                    Mode::MCircuit => {
                        let a = node * self.n + u;
                        if self.arcs[a / 64] >> (a % 64) & 1 == 1 {
                            continue;
                        }
                    }
                    Mode::MCycle
                        if self.visited >> u & 1 == 1 => {
                            continue;
                        }
                    _ => {}
                }
            }
            let clock = self.clock + self.d(node, u);
            let covered = self.covered | (1u64 << u);
            let f = clock + self.estimate(u, clock, covered, &self.air);
            if f < self.best - 1e-9 {
                children.push((f, u));
            }
        }
        children.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (_, u) in children {
            if self.stopped {
                return;
            }
            let saved = (self.node, self.clock, self.covered, self.visited, self.arcs);
            let wait = u == node;
            let newly = self.covered >> u & 1 == 0;
            self.clock += self.d(node, u);
            self.covered |= 1u64 << u;
            if !wait {
                self.visited |= 1u64 << u;
                let a = node * self.n + u;
                self.arcs[a / 64] |= 1u64 << (a % 64);
            }
            self.node = u;
            self.pos += 1;
            self.route.push((node, u));
            self.arrive(wait, newly);
            self.route.pop();
            self.pos -= 1;
            (self.node, self.clock, self.covered, self.visited, self.arcs) = saved;
        }
    }
}

/// Assign drone numbers to operations by interval colouring over positions.
fn assign_drones(ops: &mut [(usize, usize, usize)], m: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..ops.len()).collect();
    order.sort_by_key(|&i| (ops[i].1, ops[i].2, ops[i].0));
    let mut free_after = vec![0usize; m];
    let mut drone = vec![0usize; ops.len()];
    for i in order {
        let (_, a, b) = ops[i];
        let d = (0..m).find(|&d| free_after[d] < a).expect("more simultaneous flights than drones");
        free_after[d] = b;
        drone[i] = d + 1;
    }
    drone
}

pub(crate) fn build_solution(catalog: &SortieCatalog, route: Vec<(usize, usize)>, mut ops: Vec<(usize, usize, usize)>, m: usize) -> Solution {
    let drones = assign_drones(&mut ops, m);
    let mut operations: Vec<DroneOperation> = ops
        .iter()
        .zip(drones)
        .map(|(&(s, a, b), d)| DroneOperation { drone: d, sortie: catalog.get(s).clone(), start_pos: a, end_pos: b })
        .collect();
    operations.sort_by_key(|o| (o.start_pos, o.end_pos, o.drone));
    Solution { route, operations }
}

/// Exact search in the given mode.
pub fn solve(inst: &Instance, catalog: &SortieCatalog, cfg: &SolveConfig) -> Result<SolveResult, SolveError> {
    let started = Instant::now();
    let n = inst.n();
    let limit = if cfg.mode == Mode::MCircuit { 16 } else { 64 };
    if n > limit {
        return Err(SolveError::TooLarge { n, limit });
    }
    if cfg.time_limit.is_some_and(|t| t.is_zero()) || cfg.node_limit == Some(0) {
        return Err(SolveError::BadLimits);
    }
    let m = inst.drones();
    let use_catalog = cfg.mode != Mode::TspTruckOnly;
    let (mut s_start, mut s_end, mut s_dur, mut s_mask) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut by_start = vec![Vec::new(); n];
    if use_catalog {
        for (idx, s) in catalog.sorties().iter().enumerate() {
            s_start.push(s.start());
            s_end.push(s.end());
            s_dur.push(catalog.duration(idx));
            s_mask.push(s.served().iter().fold(0u64, |acc, &k| acc | 1u64 << k));
            by_start[s.start()].push(idx);
        }
    }
    let dist: Vec<f64> = (0..n * n).map(|x| inst.truck(x / n, x % n)).collect();
    let truck_ok: Vec<bool> = (0..n).map(|i| inst.is_truck_node(i)).collect();
    let must_visit = (0..n)
        .filter(|&k| k != 0 && (!inst.is_drone_node(k) || !use_catalog))
        .fold(0u64, |acc, k| acc | 1u64 << k);
    let mut serve_lb = vec![f64::INFINITY; n * n];
    for cur in 0..n {
        for k in 0..n {
            let mut best = f64::INFINITY;
            if truck_ok[k] {
                best = dist[cur * n + k] + dist[k * n];
            }
            serve_lb[cur * n + k] = best;
        }
    }
    if use_catalog {
        for idx in 0..s_start.len() {
            let (s, e) = (s_start[idx], s_end[idx]);
            let leg = dist[s * n + e].max(s_dur[idx]) + dist[e * n];
            for cur in 0..n {
                let v = dist[cur * n + s] + leg;
                let mut mask = s_mask[idx];
                while mask != 0 {
                    let k = mask.trailing_zeros() as usize;
                    mask &= mask - 1;
                    let slot = &mut serve_lb[cur * n + k];
                    if v < *slot {
                        *slot = v;
                    }
                }
            }
        }
    }
    for cur in 0..n {
        serve_lb[cur * n] = 0.0;
    }

    let mut best = f64::INFINITY;
    let mut best_route = Vec::new();
    let mut best_ops = Vec::new();
    let mut found = false;
    if let Some(inc) = &cfg.incumbent {
        let rep = validate(inst, inc);
        if !rep.valid {
            let why = rep.violations.iter().map(|v| v.detail.clone()).collect::<Vec<_>>().join("; ");
            return Err(SolveError::BadIncumbent(why));
        }
        if !cfg.mode.admits(inc) {
            return Err(SolveError::BadIncumbent(format!("shape not allowed in {}", cfg.mode.name())));
        }
        let mut ops = Vec::new();
        for op in &inc.operations {
            let idx = catalog
                .index_of(&op.sortie)
                .ok_or_else(|| SolveError::BadIncumbent("sortie missing from catalog".into()))?;
            ops.push((idx, op.start_pos, op.end_pos));
        }
        best = evaluate(inst, inc).map_err(|e| SolveError::BadIncumbent(e.to_string()))?.completion_time;
        best_route = inc.route.clone();
        best_ops = ops;
        found = true;
    }

    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut search = Search {
        mode: cfg.mode,
        n,
        m,
        t_max: 2 * n,
        full,
        dist,
        truck_ok,
        must_visit,
        s_end,
        s_dur,
        s_mask,
        by_start,
        serve_lb,
        node: 0,
        clock: 0.0,
        pos: 0,
        covered: 1,
        visited: 0,
        arcs: [0; 4],
        air: Vec::new(),
        route: Vec::new(),
        ops: Vec::new(),
        best,
        best_route,
        best_ops,
        found,
        memo: HashMap::new(),
        memo_labels: 0,
        nodes: 0,
        node_limit: cfg.node_limit.unwrap_or(u64::MAX),
        deadline: cfg.time_limit.map(|t| started + t),
        stopped: false,
    };
    let root_bound = search.estimate(0, 0.0, 1, &[]);
    search.arrive(false, true);

    let status = match (search.stopped, search.found) {
        (false, true) => Status::Optimal,
        (false, false) => Status::Infeasible,
        (true, true) => Status::Feasible,
        (true, false) => Status::NoSolutionFound,
    };
    let best_sol = if search.found {
        let sol = build_solution(catalog, search.best_route.clone(), search.best_ops.clone(), m);
        let sched = evaluate(inst, &sol).expect("search produced an inconsistent solution");
        Some((sol, sched))
    } else {
        None
    };
    let best_bound = match status {
        Status::Optimal => search.best,
        Status::Infeasible => f64::INFINITY,
        _ => root_bound.min(search.best),
    };
    Ok(SolveResult {
        status,
        best: best_sol,
        best_bound,
        stats: SolveStats { nodes: search.nodes, wall_seconds: started.elapsed().as_secs_f64(), memo_labels: search.memo_labels },
    })
}

/// Optimal values in the four modes, checked to be nondecreasing.
#[derive(Debug, Clone, Serialize)]
pub struct ChainReport {
    pub tsp_md: f64,
    pub m_circuit: f64,
    pub m_cycle: f64,
    pub tsp_truck_only: f64,
}

impl ChainReport {
    pub fn values(&self) -> [f64; 4] {
        [self.tsp_md, self.m_circuit, self.m_cycle, self.tsp_truck_only]
    }
}

pub fn objective_chain_check(inst: &Instance, catalog: &SortieCatalog, cfg: &SolveConfig) -> Result<ChainReport, SolveError> {
    let mut vals = [0.0; 4];
    for (x, mode) in Mode::ALL.iter().enumerate() {
        let c = SolveConfig { mode: *mode, incumbent: None, ..cfg.clone() };
        let r = solve(inst, catalog, &c)?;
        if r.status != Status::Optimal {
            return Err(SolveError::NotOptimal(mode.name()));
        }
        vals[x] = r.objective().unwrap();
        if x > 0 && vals[x] < vals[x - 1] - OBJ_TOL {
            return Err(SolveError::ChainViolated { mode: mode.name(), value: vals[x], previous: vals[x - 1] });
        }
    }
    Ok(ChainReport { tsp_md: vals[0], m_circuit: vals[1], m_cycle: vals[2], tsp_truck_only: vals[3] })
}
