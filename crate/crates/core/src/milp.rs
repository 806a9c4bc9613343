//! Time-indexed integer program: row generation, LP text export, a reader
//! for the same LP subset, and a sparse checker for concrete solutions.
//!
//! Naming contract: `x_i_j_t` (0-based nodes, 1-based position), `w_t`,
//! `z_h` where `h = (d * |P| + p) * T(T+1)/2 + pair(t1, t2)` with `d`
//! 0-based, `p` the catalog index and pairs ordered by `t1` then `t2`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::model::{Instance, OBJ_TOL};
use crate::schedule::{greedy_waits, Solution};
use crate::sortie::SortieCatalog;

const ROW_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MilpError {
    #[error("route needs {needed} positions, the model has {available}")]
    EncodingOverflow { needed: usize, available: usize },
    #[error("LP parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Onearcpertime,
    Start,
    Flow,
    End,
    DroneBusy,
    Launch,
    Land,
    Cover,
    Sync,
    EligTruck,
    EligDrone,
}

impl Family {
    pub const ALL: [Family; 11] = [
        Family::Onearcpertime,
        Family::Start,
        Family::Flow,
        Family::End,
        Family::DroneBusy,
        Family::Launch,
        Family::Land,
        Family::Cover,
        Family::Sync,
        Family::EligTruck,
        Family::EligDrone,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Onearcpertime => "onearcpertime",
            Family::Start => "start",
            Family::Flow => "flow",
            Family::End => "end",
            Family::DroneBusy => "drone_busy",
            Family::Launch => "launch",
            Family::Land => "land",
            Family::Cover => "cover",
            Family::Sync => "sync",
            Family::EligTruck => "elig_truck",
            Family::EligDrone => "elig_drone",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowId {
    OneArc(usize),
    Start(usize),
    Flow(usize, usize),
    End(usize),
    Busy(usize, usize),
    Launch(usize, usize),
    Land(usize, usize),
    Cover(usize),
    Sync(usize, usize),
    EligTruck(usize),
    EligDrone(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
    fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Sense::Le => lhs <= rhs + ROW_TOL,
            Sense::Ge => lhs >= rhs - ROW_TOL,
            Sense::Eq => (lhs - rhs).abs() <= ROW_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X { i: usize, j: usize, t: usize },
    W { t: usize },
    Z { d: usize, p: usize, t1: usize, t2: usize },
}

#[derive(Debug, Clone)]
pub struct Row {
    pub id: RowId,
    pub terms: Vec<(Var, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// The integer program for one instance and sortie catalog. Rows are
/// generated on demand.
#[derive(Debug, Clone)]
pub struct MilpModel {
    n: usize,
    m: usize,
    t_max: usize,
    dist: Vec<f64>,
    truck_ok: Vec<bool>,
    drone_ok: Vec<bool>,
    s_start: Vec<usize>,
    s_end: Vec<usize>,
    s_served: Vec<Vec<usize>>,
    s_dur: Vec<f64>,
    catalog: SortieCatalog,
}

pub fn build_model(inst: &Instance, catalog: &SortieCatalog) -> MilpModel {
    let n = inst.n();
    let s = catalog.sorties();
    MilpModel {
        n,
        m: inst.drones(),
        t_max: 2 * n,
        dist: (0..n * n).map(|x| inst.truck(x / n, x % n)).collect(),
        truck_ok: (0..n).map(|i| inst.is_truck_node(i)).collect(),
        drone_ok: (0..n).map(|i| inst.is_drone_node(i)).collect(),
        s_start: s.iter().map(|x| x.start()).collect(),
        s_end: s.iter().map(|x| x.end()).collect(),
        s_served: s.iter().map(|x| x.served().to_vec()).collect(),
        s_dur: (0..s.len()).map(|p| catalog.duration(p)).collect(),
        catalog: catalog.clone(),
    }
}

impl MilpModel {
    pub fn positions(&self) -> usize {
        self.t_max
    }
    pub fn nodes(&self) -> usize {
        self.n
    }
    pub fn drones(&self) -> usize {
        self.m
    }
    pub fn sorties(&self) -> usize {
        self.s_start.len()
    }
    fn pairs(&self) -> usize {
        self.t_max * (self.t_max + 1) / 2
    }
    fn pair_index(&self, t1: usize, t2: usize) -> usize {
        (t1 - 1) * self.t_max - (t1 - 1) * (t1.saturating_sub(2)) / 2 + (t2 - t1)
    }
    fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn z_index(&self, d: usize, p: usize, t1: usize, t2: usize) -> usize {
        (d * self.sorties() + p) * self.pairs() + self.pair_index(t1, t2)
    }

    pub fn num_x(&self) -> usize {
        self.n * self.n * self.t_max
    }
    pub fn num_w(&self) -> usize {
        self.t_max
    }
    pub fn num_z(&self) -> usize {
        self.m * self.sorties() * self.pairs()
    }

    pub fn var_name(&self, v: Var) -> String {
        match v {
            Var::X { i, j, t } => format!("x_{i}_{j}_{t}"),
            Var::W { t } => format!("w_{t}"),
            Var::Z { d, p, t1, t2 } => format!("z_{}", self.z_index(d, p, t1, t2)),
        }
    }

    pub fn row_name(&self, r: RowId) -> String {
        match r {
            RowId::OneArc(t) => format!("onearcpertime_{t}"),
            RowId::Start(i) => format!("start_{i}"),
            RowId::Flow(i, t) => format!("flow_{i}_{t}"),
            RowId::End(t) => format!("end_{t}"),
            RowId::Busy(d, t) => format!("drone_busy_{}_{t}", d + 1),
            RowId::Launch(i, t) => format!("launch_{i}_{t}"),
            RowId::Land(j, t) => format!("land_{j}_{t}"),
            RowId::Cover(k) => format!("cover_{k}"),
            RowId::Sync(a, b) => format!("sync_{a}_{b}"),
            RowId::EligTruck(i) => format!("elig_truck_{i}"),
            RowId::EligDrone(j) => format!("elig_drone_{j}"),
        }
    }

    pub fn family(r: RowId) -> Family {
        match r {
            RowId::OneArc(_) => Family::Onearcpertime,
            RowId::Start(_) => Family::Start,
            RowId::Flow(..) => Family::Flow,
            RowId::End(_) => Family::End,
            RowId::Busy(..) => Family::DroneBusy,
            RowId::Launch(..) => Family::Launch,
            RowId::Land(..) => Family::Land,
            RowId::Cover(_) => Family::Cover,
            RowId::Sync(..) => Family::Sync,
            RowId::EligTruck(_) => Family::EligTruck,
            RowId::EligDrone(_) => Family::EligDrone,
        }
    }

    fn sense_rhs(&self, r: RowId) -> (Sense, f64) {
        match r {
            RowId::OneArc(_) => (Sense::Le, 1.0),
            RowId::Start(i) => (Sense::Eq, if i == 0 { 1.0 } else { 0.0 }),
            RowId::Cover(_) | RowId::EligDrone(_) => (Sense::Ge, 1.0),
            RowId::Sync(..) => (Sense::Ge, 0.0),
            _ => (Sense::Le, 0.0),
        }
    }

    /// Closed-form row counts per family.
    pub fn family_counts(&self) -> BTreeMap<Family, usize> {
        let (n, t, m) = (self.n, self.t_max, self.m);
        let not_truck = self.truck_ok.iter().filter(|&&b| !b).count();
        let not_drone = self.drone_ok.iter().filter(|&&b| !b).count();
        BTreeMap::from([
            (Family::Onearcpertime, t),
            (Family::Start, n),
            (Family::Flow, n * (t - 1)),
            (Family::End, t),
            (Family::DroneBusy, m * t),
            (Family::Launch, n * t),
            (Family::Land, n * t),
            (Family::Cover, n),
            (Family::Sync, t * (t + 1) / 2),
            (Family::EligTruck, not_truck),
            (Family::EligDrone, not_drone),
        ])
    }

    /// Row identifiers in export order.
    pub fn row_ids(&self) -> Vec<RowId> {
        let (n, tm, m) = (self.n, self.t_max, self.m);
        let mut ids = Vec::new();
        ids.extend((1..=tm).map(RowId::OneArc));
        ids.extend((0..n).map(RowId::Start));
        for t in 2..=tm {
            ids.extend((0..n).map(|i| RowId::Flow(i, t)));
        }
        ids.extend((1..=tm).map(RowId::End));
        for d in 0..m {
            ids.extend((1..=tm).map(|t| RowId::Busy(d, t)));
        }
        for t in 1..=tm {
            ids.extend((0..n).map(|i| RowId::Launch(i, t)));
        }
        for t in 1..=tm {
            ids.extend((0..n).map(|j| RowId::Land(j, t)));
        }
        ids.extend((0..n).map(RowId::Cover));
        for t1 in 1..=tm {
            ids.extend((t1..=tm).map(|t2| RowId::Sync(t1, t2)));
        }
        ids.extend((0..n).filter(|&i| !self.truck_ok[i]).map(RowId::EligTruck));
        ids.extend((0..n).filter(|&j| !self.drone_ok[j]).map(RowId::EligDrone));
        ids
    }

    fn arcs_at(&self, t: usize) -> impl Iterator<Item = Var> + '_ {
        let n = self.n;
        (0..n * n).map(move |a| Var::X { i: a / n, j: a % n, t })
    }

    fn zs(&self, keep: impl Fn(usize, usize, usize, usize) -> bool) -> Vec<(Var, f64)> {
        let mut out = Vec::new();
        for d in 0..self.m {
            for p in 0..self.sorties() {
                for t1 in 1..=self.t_max {
                    for t2 in t1..=self.t_max {
                        if keep(d, p, t1, t2) {
                            out.push((Var::Z { d, p, t1, t2 }, 1.0));
                        }
                    }
                }
            }
        }
        out
    }

    /// Full row, written directly from the family definitions.
    pub fn row(&self, id: RowId) -> Row {
        let n = self.n;
        let m = self.m as f64;
        let mut terms: Vec<(Var, f64)> = Vec::new();
        match id {
            RowId::OneArc(t) => terms.extend(self.arcs_at(t).map(|v| (v, 1.0))),
            RowId::Start(i) => terms.extend((0..n).map(|j| (Var::X { i, j, t: 1 }, 1.0))),
            RowId::Flow(i, t) => {
                terms.extend((0..n).map(|j| (Var::X { i, j, t }, 1.0)));
                terms.extend((0..n).map(|j| (Var::X { i: j, j: i, t: t - 1 }, -1.0)));
            }
            RowId::End(t) => {
                for i in 0..n {
                    terms.extend((1..n).map(|j| (Var::X { i, j, t }, 1.0)));
                }
                if t < self.t_max {
                    terms.extend(self.arcs_at(t + 1).map(|v| (v, -1.0)));
                }
            }
            RowId::Busy(dd, t) => {
                terms.extend(self.zs(|d, _, t1, t2| d == dd && t1 <= t && t <= t2));
                terms.extend(self.arcs_at(t).map(|v| (v, -1.0)));
            }
            RowId::Launch(i, t) => {
                terms.extend(self.zs(|_, p, t1, _| t1 == t && self.s_start[p] == i));
                terms.extend((0..n).map(|j| (Var::X { i, j, t }, -m)));
            }
            RowId::Land(j, t) => {
                terms.extend(self.zs(|_, p, _, t2| t2 == t && self.s_end[p] == j));
                terms.extend((0..n).map(|i| (Var::X { i, j, t }, -1.0)));
            }
            RowId::Cover(k) => {
                for t in 1..=self.t_max {
                    terms.extend((0..n).map(|j| (Var::X { i: k, j, t }, 1.0)));
                }
                terms.extend(self.zs(|_, p, _, _| self.s_served[p].contains(&k)));
            }
            RowId::Sync(a, b) => {
                for t in a..=b {
                    terms.push((Var::W { t }, 1.0));
                    for i in 0..n {
                        for j in 0..n {
                            if i != j {
                                terms.push((Var::X { i, j, t }, self.d(i, j)));
                            }
                        }
                    }
                }
                let mut zs = self.zs(|_, _, t1, t2| t1 == a && t2 == b);
                for (v, c) in zs.iter_mut() {
                    if let Var::Z { p, .. } = *v {
                        *c = -self.s_dur[p];
                    }
                }
                terms.extend(zs);
            }
            RowId::EligTruck(i) => {
                for t in 1..=self.t_max {
                    terms.extend((0..n).filter(|&j| j != i).map(|j| (Var::X { i, j, t }, 1.0)));
                }
            }
            RowId::EligDrone(j) => {
                for t in 1..=self.t_max {
                    terms.extend((0..n).filter(|&i| i != j).map(|i| (Var::X { i, j, t }, 1.0)));
                }
            }
        }
        let (sense, rhs) = self.sense_rhs(id);
        Row { id, terms, sense, rhs }
    }

    /// Rows in which `v` appears, with its coefficient.
    pub fn rows_of_var(&self, v: Var) -> Vec<(RowId, f64)> {
        let mut out = Vec::new();
        match v {
            Var::X { i, j, t } => {
                out.push((RowId::OneArc(t), 1.0));
                if t == 1 {
                    out.push((RowId::Start(i), 1.0));
                }
                if t >= 2 {
                    out.push((RowId::Flow(i, t), 1.0));
                }
                if t < self.t_max {
                    out.push((RowId::Flow(j, t + 1), -1.0));
                }
                if j != 0 {
                    out.push((RowId::End(t), 1.0));
                }
                if t >= 2 {
                    out.push((RowId::End(t - 1), -1.0));
                }
                for d in 0..self.m {
                    out.push((RowId::Busy(d, t), -1.0));
                }
                out.push((RowId::Launch(i, t), -(self.m as f64)));
                out.push((RowId::Land(j, t), -1.0));
                out.push((RowId::Cover(i), 1.0));
                if i != j {
                    let len = self.d(i, j);
                    for t1 in 1..=t {
                        for t2 in t..=self.t_max {
                            out.push((RowId::Sync(t1, t2), len));
                        }
                    }
                    if !self.truck_ok[i] {
                        out.push((RowId::EligTruck(i), 1.0));
                    }
                    if !self.drone_ok[j] {
                        out.push((RowId::EligDrone(j), 1.0));
                    }
                }
            }
            Var::W { t } => {
                for t1 in 1..=t {
                    for t2 in t..=self.t_max {
                        out.push((RowId::Sync(t1, t2), 1.0));
                    }
                }
            }
            Var::Z { d, p, t1, t2 } => {
                for t in t1..=t2 {
                    out.push((RowId::Busy(d, t), 1.0));
                }
                out.push((RowId::Launch(self.s_start[p], t1), 1.0));
                out.push((RowId::Land(self.s_end[p], t2), 1.0));
                for &k in &self.s_served[p] {
                    out.push((RowId::Cover(k), 1.0));
                }
                out.push((RowId::Sync(t1, t2), -self.s_dur[p]));
            }
        }
        out
    }

    fn objective(&self) -> Vec<(Var, f64)> {
        let mut obj = Vec::new();
        for t in 1..=self.t_max {
            obj.push((Var::W { t }, 1.0));
            for i in 0..self.n {
                for j in 0..self.n {
                    if i != j {
                        obj.push((Var::X { i, j, t }, self.d(i, j)));
                    }
                }
            }
        }
        obj
    }

    fn write_terms(&self, out: &mut impl Write, terms: &[(Var, f64)]) -> io::Result<()> {
        let mut line = String::new();
        for (k, &(v, c)) in terms.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let sign = if c < 0.0 { '-' } else { '+' };
            let _ = write!(line, " {sign} {} {}", fmt_num(c.abs()), self.var_name(v));
            if (k + 1) % 8 == 0 {
                writeln!(out, "{line}")?;
                line.clear();
                line.push(' ');
            }
        }
        if terms.iter().all(|t| t.1 == 0.0) {
            line.push_str(" 0 w_1");
        }
        write!(out, "{line}")
    }

    /// Stream the model in CPLEX LP syntax.
    pub fn write_lp(&self, out: &mut impl Write) -> io::Result<()> {
        writeln!(out, "\\ truck and multi-drone time-indexed model")?;
        writeln!(out, "\\ nodes {} drones {} positions {} sorties {}", self.n, self.m, self.t_max, self.sorties())?;
        writeln!(out, "Minimize")?;
        write!(out, " obj:")?;
        self.write_terms(out, &self.objective())?;
        writeln!(out)?;
        writeln!(out, "Subject To")?;
        for id in self.row_ids() {
            let row = self.row(id);
            write!(out, " {}:", self.row_name(id))?;
            self.write_terms(out, &row.terms)?;
            writeln!(out, " {} {}", row.sense.symbol(), fmt_num(row.rhs))?;
        }
        writeln!(out, "Bounds")?;
        for t in 1..=self.t_max {
            writeln!(out, " w_{t} >= 0")?;
        }
        writeln!(out, "Binaries")?;
        for t in 1..=self.t_max {
            for i in 0..self.n {
                for j in 0..self.n {
                    writeln!(out, " x_{i}_{j}_{t}")?;
                }
            }
        }
        for h in 0..self.num_z() {
            writeln!(out, " z_{h}")?;
        }
        writeln!(out, "End")
    }

    pub fn export_lp(&self) -> String {
        let mut buf = Vec::new();
        self.write_lp(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("LP text is ASCII")
    }
}

fn fmt_num(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// Parsed contents of an LP file (the subset this module writes).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LpFile {
    pub objective: Vec<(String, f64)>,
    pub rows: Vec<LpRow>,
    pub bounds: Vec<String>,
    pub binaries: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub name: String,
    pub terms: Vec<(String, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl LpFile {
    pub fn variables(&self) -> usize {
        let mut names: Vec<&String> = self.objective.iter().map(|t| &t.0).collect();
        for r in &self.rows {
            names.extend(r.terms.iter().map(|t| &t.0));
        }
        names.extend(self.binaries.iter());
        names.sort();
        names.dedup();
        names.len()
    }
}

fn parse_terms(tokens: &[&str], line: usize) -> Result<Vec<(String, f64)>, MilpError> {
    let err = |msg: &str| MilpError::Parse { line, msg: msg.to_string() };
    let mut out = Vec::new();
    let mut k = 0;
    while k < tokens.len() {
        let sign = match tokens[k] {
            "+" => 1.0,
            "-" => -1.0,
            _ => return Err(err("expected sign")),
        };
        let coef: f64 = tokens.get(k + 1).ok_or_else(|| err("missing coefficient"))?.parse().map_err(|_| err("bad coefficient"))?;
        let name = tokens.get(k + 2).ok_or_else(|| err("missing variable"))?;
        out.push((name.to_string(), sign * coef));
        k += 3;
    }
    Ok(out)
}

/// Read LP text in the shape produced by [`MilpModel::write_lp`].
pub fn parse_lp(text: &str) -> Result<LpFile, MilpError> {
    #[derive(PartialEq)]
    enum Sec {
        None,
        Obj,
        Rows,
        Bounds,
        Bin,
        End,
    }
    let mut sec = Sec::None;
    let mut lp = LpFile::default();
    let mut pending: Option<(String, Vec<String>, usize)> = None;
    let flush = |pending: &mut Option<(String, Vec<String>, usize)>, sec: &Sec, lp: &mut LpFile| -> Result<(), MilpError> {
        if let Some((name, toks, line)) = pending.take() {
            let toks: Vec<&str> = toks.iter().map(|s| s.as_str()).collect();
            if *sec == Sec::Obj {
                lp.objective = parse_terms(&toks, line)?;
            } else {
                let n = toks.len();
                if n < 2 {
                    return Err(MilpError::Parse { line, msg: "row without sense".into() });
                }
                let sense = match toks[n - 2] {
                    "<=" => Sense::Le,
                    ">=" => Sense::Ge,
                    "=" => Sense::Eq,
                    _ => return Err(MilpError::Parse { line, msg: "bad sense".into() }),
                };
                let rhs = toks[n - 1].parse().map_err(|_| MilpError::Parse { line, msg: "bad rhs".into() })?;
                lp.rows.push(LpRow { name, terms: parse_terms(&toks[..n - 2], line)?, sense, rhs });
            }
        }
        Ok(())
    };
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('\\') {
            continue;
        }
        let next = match s {
            "Minimize" => Some(Sec::Obj),
            "Subject To" => Some(Sec::Rows),
            "Bounds" => Some(Sec::Bounds),
            "Binaries" => Some(Sec::Bin),
            "End" => Some(Sec::End),
            _ => None,
        };
        if let Some(nx) = next {
            flush(&mut pending, &sec, &mut lp)?;
            sec = nx;
            continue;
        }
        match sec {
            Sec::Obj | Sec::Rows => {
                if let Some((head, rest)) = s.split_once(':') {
                    flush(&mut pending, &sec, &mut lp)?;
                    pending = Some((head.trim().to_string(), rest.split_whitespace().map(String::from).collect(), line));
                } else if let Some((_, toks, _)) = pending.as_mut() {
                    toks.extend(s.split_whitespace().map(String::from));
                } else {
                    return Err(MilpError::Parse { line, msg: "continuation without a row".into() });
                }
            }
            Sec::Bounds => lp.bounds.push(s.to_string()),
            Sec::Bin => lp.binaries.extend(s.split_whitespace().map(String::from)),
            Sec::None | Sec::End => return Err(MilpError::Parse { line, msg: format!("unexpected {s:?}") }),
        }
    }
    flush(&mut pending, &sec, &mut lp)?;
    if sec != Sec::End {
        return Err(MilpError::Parse { line: text.lines().count(), msg: "missing End".into() });
    }
    Ok(lp)
}

/// Outcome of checking a concrete solution against every model row.
#[derive(Debug, Clone, Serialize)]
pub struct MilpCheck {
    pub satisfied: bool,
    pub objective: f64,
    /// Row names (or encoding problems) that fail.
    pub violated: Vec<String>,
    /// Wait arcs inserted so that at most one drone lands per position.
    pub inserted_waits: usize,
}

/// Encoded solution: nonzero variables with values.
pub fn encode_solution(model: &MilpModel, sol: &Solution) -> Result<(Vec<(Var, f64)>, Vec<String>, usize), MilpError> {
    let mut problems = Vec::new();
    let mut route = sol.route.clone();
    let mut ops: Vec<(usize, Option<usize>, usize, usize)> = Vec::new();
    for op in &sol.operations {
        let p = model.catalog.index_of(&op.sortie);
        if p.is_none() {
            problems.push(format!("sortie {:?} is not in the catalog", op.sortie.nodes()));
        }
        if op.drone < 1 || op.drone > model.m {
            problems.push(format!("drone index {} outside 1..={}", op.drone, model.m));
        }
        if op.start_pos < 1 || op.start_pos > op.end_pos {
            problems.push(format!("positions {}..{} are not an interval", op.start_pos, op.end_pos));
        }
        ops.push((op.drone, p, op.start_pos, op.end_pos));
    }
    // one landing per position: later landings move onto inserted wait arcs
    let mut inserted = 0;
    let mut t = 1;
    while t <= route.len() {
        let mut here: Vec<usize> = (0..ops.len()).filter(|&k| ops[k].3 == t).collect();
        if here.len() > 1 {
            here.sort_by_key(|&k| (ops[k].2, ops[k].0, k));
            let extra = here.len() - 1;
            let node = route[t - 1].1;
            for op in ops.iter_mut() {
                if op.2 > t {
                    op.2 += extra;
                }
                if op.3 > t {
                    op.3 += extra;
                }
            }
            for (q, &k) in here.iter().enumerate().skip(1) {
                ops[k].3 = t + q;
            }
            for _ in 0..extra {
                route.insert(t, (node, node));
            }
            inserted += extra;
            t += extra;
        }
        t += 1;
    }
    if route.len() > model.t_max {
        return Err(MilpError::EncodingOverflow { needed: route.len(), available: model.t_max });
    }
    let n = model.n;
    let mut vals = Vec::new();
    for (k, &(i, j)) in route.iter().enumerate() {
        if i >= n || j >= n {
            problems.push(format!("arc {} uses an unknown node", k + 1));
            continue;
        }
        vals.push((Var::X { i, j, t: k + 1 }, 1.0));
    }
    let arc_len: Vec<f64> = route.iter().map(|&(i, j)| if i < n && j < n { model.d(i, j) } else { 0.0 }).collect();
    let timed: Vec<(usize, usize, f64)> = ops
        .iter()
        .filter_map(|&(_, p, a, b)| p.map(|p| (a, b, model.s_dur[p])))
        .collect();
    let waits = greedy_waits(&arc_len, &timed);
    for (k, &w) in waits.iter().enumerate() {
        if w > 0.0 {
            vals.push((Var::W { t: k + 1 }, w));
        }
    }
    for &(d, p, a, b) in &ops {
        if let Some(p) = p {
            if d >= 1 && d <= model.m && a >= 1 && a <= b && b <= model.t_max {
                vals.push((Var::Z { d: d - 1, p, t1: a, t2: b }, 1.0));
            } else if b > model.t_max {
                problems.push(format!("operation ends at position {b} beyond {}", model.t_max));
            }
        }
    }
    Ok((vals, problems, inserted))
}

/// Encode `sol` as a variable assignment and evaluate every row it touches
/// plus every row with a nonzero right-hand side.
pub fn check_solution_against_model(model: &MilpModel, sol: &Solution) -> Result<MilpCheck, MilpError> {
    let (vals, mut violated, inserted) = encode_solution(model, sol)?;
    let mut activity: HashMap<RowId, f64> = HashMap::new();
    let mut objective = 0.0;
    for &(v, x) in &vals {
        match v {
            Var::W { .. } => objective += x,
            Var::X { i, j, .. } if i != j => objective += model.d(i, j) * x,
            _ => {}
        }
        for (r, c) in model.rows_of_var(v) {
            *activity.entry(r).or_insert(0.0) += c * x;
        }
    }
    let mut rows: Vec<RowId> = activity.keys().copied().collect();
    rows.push(RowId::Start(0));
    rows.extend((0..model.n).map(RowId::Cover));
    rows.extend((0..model.n).filter(|&j| !model.drone_ok[j]).map(RowId::EligDrone));
    rows.sort();
    rows.dedup();
    for r in rows {
        let (sense, rhs) = model.sense_rhs(r);
        let lhs = activity.get(&r).copied().unwrap_or(0.0);
        if !sense.holds(lhs, rhs) {
            violated.push(model.row_name(r));
        }
    }
    Ok(MilpCheck { satisfied: violated.is_empty(), objective, violated, inserted_waits: inserted })
}

/// Whether a model objective agrees with an evaluated completion time.
pub fn objectives_agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= OBJ_TOL
}
