//! Instance data model: node set, truck and drone metrics, fleet and energy
//! parameters, node eligibility, plus validation and derived quantities.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used for symmetry and triangle-inequality checks.
pub const METRIC_TOL: f64 = 1e-9;
/// Tolerance used when comparing objective values.
pub const OBJ_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{matrix} matrix is not square or does not have {expected} rows/columns")]
    BadShape { matrix: &'static str, expected: usize },
    #[error("instance needs at least 2 nodes")]
    TooFewNodes,
    #[error("{matrix} matrix has a negative or non-finite entry at ({i},{j})")]
    BadEntry { matrix: &'static str, i: usize, j: usize },
    #[error("{matrix} matrix has a nonzero diagonal entry at {i}")]
    NonzeroDiagonal { matrix: &'static str, i: usize },
    #[error("{matrix} matrix is asymmetric at ({i},{j})")]
    AsymmetricMetric { matrix: &'static str, i: usize, j: usize },
    #[error("{matrix} matrix violates the triangle inequality: d({i},{j}) > d({i},{k}) + d({k},{j})")]
    TriangleViolation { matrix: &'static str, i: usize, k: usize, j: usize },
    #[error("the depot must be truck-visitable")]
    DepotNotTruckVisitable,
    #[error("node {0} is neither truck-visitable nor drone-servable")]
    UncoveredNode(usize),
    #[error("unknown node label {0:?}")]
    UnknownLabel(String),
    #[error("speedup factor must be positive, got {0}")]
    NonpositiveAlpha(f64),
    #[error("fewer than two nodes are both truck- and drone-eligible; speedup is undefined")]
    EmptyIntersection,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Dense square matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![0.0; n * n] }
    }

    pub fn from_rows(rows: &[Vec<f64>], name: &'static str) -> Result<Self, ModelError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(ModelError::BadShape { matrix: name, expected: n });
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix { n, data })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).map(|c| c.to_vec()).collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix { n: self.n, data: self.data.iter().map(|&v| f(v)).collect() }
    }
}

/// All-pairs shortest path closure (Floyd-Warshall).
pub fn metric_closure(m: &Matrix) -> Matrix {
    let n = m.n();
    let mut d = m.clone();
    for k in 0..n {
        for i in 0..n {
            let dik = d.get(i, k);
            for j in 0..n {
                let via = dik + d.get(k, j);
                if via < d.get(i, j) {
                    d.set(i, j, via);
                }
            }
        }
    }
    d
}

/// Spreadsheet-style labels: A..Z, AA, AB, ...
pub fn default_label(mut i: usize) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'A' + (i % 26) as u8);
        if i < 26 {
            break;
        }
        i = i / 26 - 1;
    }
    out.reverse();
    String::from_utf8(out).unwrap()
}

/// On-disk description of an instance.
///
/// Either `drone_matrix` or `alpha` defines the drone metric; either `L` or
/// the triple `battery`/`drone_weight`/`payloads` defines the energy model.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct InstanceFile {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub truck_matrix: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drone_matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub m: usize,
    #[serde(default, rename = "L", skip_serializing_if = "Option::is_none")]
    pub max_sortie_duration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub battery: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drone_weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payloads: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truck_nodes: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drone_nodes: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_sortie_customers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<[f64; 2]>>,
}

impl InstanceFile {
    /// Proportional-form description: drone metric is `truck / alpha`, zero payloads.
    pub fn proportional(name: &str, truck: Vec<Vec<f64>>, alpha: f64, max_duration: f64, m: usize) -> Self {
        InstanceFile {
            name: name.to_string(),
            labels: None,
            truck_matrix: truck,
            drone_matrix: None,
            alpha: Some(alpha),
            m,
            max_sortie_duration: Some(max_duration),
            battery: None,
            drone_weight: None,
            payloads: None,
            truck_nodes: None,
            drone_nodes: None,
            max_sortie_customers: None,
            coords: None,
        }
    }
}

/// A validated instance. Node 0 is the depot.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    name: String,
    labels: Vec<String>,
    truck: Matrix,
    drone: Matrix,
    drones: usize,
    drone_weight: f64,
    battery: f64,
    payloads: Vec<f64>,
    truck_nodes: Vec<bool>,
    drone_nodes: Vec<bool>,
    max_sortie_customers: usize,
    declared_alpha: Option<f64>,
    coords: Option<Vec<[f64; 2]>>,
}

/// Speedup and duration limit derived from an instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub alpha: f64,
    /// `None` when the drone weight is zero, i.e. flight duration is unbounded.
    pub max_sortie_duration: Option<f64>,
}

fn resolve_nodes(labels: &[String], given: &Option<Vec<String>>) -> Result<Vec<bool>, ModelError> {
    let n = labels.len();
    match given {
        None => Ok(vec![true; n]),
        Some(list) => {
            let mut set = vec![false; n];
            for l in list {
                let idx = labels
                    .iter()
                    .position(|x| x == l)
                    .ok_or_else(|| ModelError::UnknownLabel(l.clone()))?;
                set[idx] = true;
            }
            Ok(set)
        }
    }
}

fn check_metric(m: &Matrix, name: &'static str) -> Result<(), ModelError> {
    let n = m.n();
    for i in 0..n {
        for j in 0..n {
            let v = m.get(i, j);
            if !v.is_finite() || v < 0.0 {
                return Err(ModelError::BadEntry { matrix: name, i, j });
            }
        }
        if m.get(i, i) != 0.0 {
            return Err(ModelError::NonzeroDiagonal { matrix: name, i });
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (m.get(i, j) - m.get(j, i)).abs() > METRIC_TOL {
                return Err(ModelError::AsymmetricMetric { matrix: name, i, j });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let dij = m.get(i, j);
            for k in 0..n {
                if dij > m.get(i, k) + m.get(k, j) + METRIC_TOL {
                    return Err(ModelError::TriangleViolation { matrix: name, i, k, j });
                }
            }
        }
    }
    Ok(())
}

/// Validate and build an instance from its file description.
pub fn build_instance(raw: &InstanceFile) -> Result<Instance, ModelError> {
    build(raw, false)
}

/// Like [`build_instance`] but repairs triangle violations by replacing both
/// metrics with their shortest-path closures.
pub fn build_instance_with_closure(raw: &InstanceFile) -> Result<Instance, ModelError> {
    build(raw, true)
}

fn build(raw: &InstanceFile, close: bool) -> Result<Instance, ModelError> {
    let n = raw.truck_matrix.len();
    if n < 2 {
        return Err(ModelError::TooFewNodes);
    }
    let mut truck = Matrix::from_rows(&raw.truck_matrix, "truck")?;
    let mut drone = match (&raw.drone_matrix, raw.alpha) {
        (Some(rows), _) => {
            if rows.len() != n {
                return Err(ModelError::BadShape { matrix: "drone", expected: n });
            }
            Matrix::from_rows(rows, "drone")?
        }
        (None, Some(a)) => {
            if !(a > 0.0) || !a.is_finite() {
                return Err(ModelError::NonpositiveAlpha(a));
            }
            truck.map(|v| v / a)
        }
        (None, None) => {
            return Err(ModelError::InvalidParameter("either drone_matrix or alpha is required".into()))
        }
    };
    if let Some(a) = raw.alpha {
        if !(a > 0.0) {
            return Err(ModelError::NonpositiveAlpha(a));
        }
    }
    if close {
        truck = metric_closure(&truck);
        drone = metric_closure(&drone);
    }
    check_metric(&truck, "truck")?;
    check_metric(&drone, "drone")?;

    let (drone_weight, battery, payloads) = match raw.max_sortie_duration {
        Some(l) => {
            if raw.battery.is_some() || raw.drone_weight.is_some() {
                return Err(ModelError::InvalidParameter("give either L or battery/drone_weight, not both".into()));
            }
            if raw.payloads.as_ref().is_some_and(|p| p.iter().any(|&w| w != 0.0)) {
                return Err(ModelError::InvalidParameter("the L form implies zero payloads".into()));
            }
            if !(l >= 0.0) || !l.is_finite() {
                return Err(ModelError::InvalidParameter(format!("L must be finite and nonnegative, got {l}")));
            }
            (1.0, l, vec![0.0; n])
        }
        None => {
            let b = raw
                .battery
                .ok_or_else(|| ModelError::InvalidParameter("battery or L is required".into()))?;
            let w = raw
                .drone_weight
                .ok_or_else(|| ModelError::InvalidParameter("drone_weight or L is required".into()))?;
            if !(b >= 0.0) || !b.is_finite() {
                return Err(ModelError::InvalidParameter(format!("battery must be finite and nonnegative, got {b}")));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(ModelError::InvalidParameter(format!("drone_weight must be finite and nonnegative, got {w}")));
            }
            let p = raw.payloads.clone().unwrap_or_else(|| vec![0.0; n]);
            if p.len() != n {
                return Err(ModelError::InvalidParameter(format!("payloads must have {n} entries")));
            }
            if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                return Err(ModelError::InvalidParameter("payloads must be nonnegative".into()));
            }
            (w, b, p)
        }
    };

    if raw.m == 0 {
        return Err(ModelError::InvalidParameter("at least one drone is required".into()));
    }

    let labels = match &raw.labels {
        Some(l) => {
            if l.len() != n {
                return Err(ModelError::InvalidParameter(format!("labels must have {n} entries")));
            }
            let mut sorted = l.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != n {
                return Err(ModelError::InvalidParameter("labels must be distinct".into()));
            }
            l.clone()
        }
        None => (0..n).map(default_label).collect(),
    };
    let truck_nodes = resolve_nodes(&labels, &raw.truck_nodes)?;
    let drone_nodes = resolve_nodes(&labels, &raw.drone_nodes)?;
    if !truck_nodes[0] {
        return Err(ModelError::DepotNotTruckVisitable);
    }
    if let Some(k) = (0..n).find(|&k| !truck_nodes[k] && !drone_nodes[k]) {
        return Err(ModelError::UncoveredNode(k));
    }
    let drone_count = drone_nodes.iter().filter(|&&b| b).count();
    let cap = match raw.max_sortie_customers {
        Some(0) => return Err(ModelError::InvalidParameter("max_sortie_customers must be positive".into())),
        Some(c) => c,
        None => drone_count.max(1),
    };
    if let Some(c) = &raw.coords {
        if c.len() != n {
            return Err(ModelError::InvalidParameter(format!("coords must have {n} entries")));
        }
    }
    Ok(Instance {
        name: raw.name.clone(),
        labels,
        truck,
        drone,
        drones: raw.m,
        drone_weight,
        battery,
        payloads,
        truck_nodes,
        drone_nodes,
        max_sortie_customers: cap,
        declared_alpha: raw.alpha,
        coords: raw.coords.clone(),
    })
}

/// Build an instance whose drone metric is the truck metric divided by
/// `alpha`, with zero payloads and the canonical energy encoding
/// `drone_weight = 1`, `battery = max_duration`.
pub fn proportional_instance(raw: &InstanceFile, alpha: f64, max_duration: f64) -> Result<Instance, ModelError> {
    if !(alpha > 0.0) {
        return Err(ModelError::NonpositiveAlpha(alpha));
    }
    if alpha < 1.0 {
        return Err(ModelError::InvalidParameter(format!("proportional speedup must be at least 1, got {alpha}")));
    }
    let mut f = raw.clone();
    f.drone_matrix = None;
    f.alpha = Some(alpha);
    f.max_sortie_duration = Some(max_duration);
    f.battery = None;
    f.drone_weight = None;
    f.payloads = None;
    build_instance(&f)
}

/// Speedup over arcs joining truck- and drone-eligible nodes, and `L = B / w`.
pub fn compute_derived(inst: &Instance) -> Result<DerivedParams, ModelError> {
    let both: Vec<usize> = (0..inst.n())
        .filter(|&i| inst.truck_nodes[i] && inst.drone_nodes[i])
        .collect();
    if both.len() < 2 {
        return Err(ModelError::EmptyIntersection);
    }
    let mut alpha: f64 = 0.0;
    for &i in &both {
        for &j in &both {
            let dp = inst.drone(i, j);
            if i != j && dp > 0.0 {
                alpha = alpha.max(inst.truck(i, j) / dp);
            }
        }
    }
    Ok(DerivedParams { alpha, max_sortie_duration: inst.max_sortie_duration() })
}

impl Instance {
    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn n(&self) -> usize {
        self.truck.n()
    }
    pub fn labels(&self) -> &[String] {
        &self.labels
    }
    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }
    pub fn node_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
    #[inline]
    pub fn truck(&self, i: usize, j: usize) -> f64 {
        self.truck.get(i, j)
    }
    #[inline]
    pub fn drone(&self, i: usize, j: usize) -> f64 {
        self.drone.get(i, j)
    }
    pub fn truck_matrix(&self) -> &Matrix {
        &self.truck
    }
    pub fn drone_matrix(&self) -> &Matrix {
        &self.drone
    }
    /// Number of drones.
    pub fn drones(&self) -> usize {
        self.drones
    }
    pub fn drone_weight(&self) -> f64 {
        self.drone_weight
    }
    pub fn battery(&self) -> f64 {
        self.battery
    }
    pub fn payload(&self, i: usize) -> f64 {
        self.payloads[i]
    }
    pub fn payloads(&self) -> &[f64] {
        &self.payloads
    }
    pub fn has_zero_payloads(&self) -> bool {
        self.payloads.iter().skip(1).all(|&w| w == 0.0)
    }
    pub fn is_truck_node(&self, i: usize) -> bool {
        self.truck_nodes[i]
    }
    pub fn is_drone_node(&self, i: usize) -> bool {
        self.drone_nodes[i]
    }
    pub fn truck_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(|&i| self.truck_nodes[i])
    }
    pub fn drone_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(|&i| self.drone_nodes[i])
    }
    pub fn truck_visits_all(&self) -> bool {
        self.truck_nodes.iter().all(|&b| b)
    }
    pub fn max_sortie_customers(&self) -> usize {
        self.max_sortie_customers
    }
    pub fn declared_alpha(&self) -> Option<f64> {
        self.declared_alpha
    }
    pub fn coords(&self) -> Option<&[[f64; 2]]> {
        self.coords.as_deref()
    }

    /// `B / w`, or `None` when the drone weight is zero.
    pub fn max_sortie_duration(&self) -> Option<f64> {
        if self.drone_weight == 0.0 {
            None
        } else {
            Some(self.battery / self.drone_weight)
        }
    }

    /// Speedup from the metrics when defined, else the declared proportional factor.
    pub fn effective_alpha(&self) -> Option<f64> {
        compute_derived(self).ok().map(|d| d.alpha).or(self.declared_alpha)
    }

    /// Serializable form; `build_instance(&inst.to_file())` reproduces `inst`.
    pub fn to_file(&self) -> InstanceFile {
        let n = self.n();
        let pick = |set: &[bool]| -> Option<Vec<String>> {
            if set.iter().all(|&b| b) {
                None
            } else {
                Some((0..n).filter(|&i| set[i]).map(|i| self.labels[i].clone()).collect())
            }
        };
        let default_labels = (0..n).all(|i| self.labels[i] == default_label(i));
        let default_cap = self.drone_nodes.iter().filter(|&&b| b).count().max(1);
        InstanceFile {
            name: self.name.clone(),
            labels: if default_labels { None } else { Some(self.labels.clone()) },
            truck_matrix: self.truck.rows(),
            drone_matrix: Some(self.drone.rows()),
            alpha: self.declared_alpha,
            m: self.drones,
            max_sortie_duration: None,
            battery: Some(self.battery),
            drone_weight: Some(self.drone_weight),
            payloads: Some(self.payloads.clone()),
            truck_nodes: pick(&self.truck_nodes),
            drone_nodes: pick(&self.drone_nodes),
            max_sortie_customers: if self.max_sortie_customers == default_cap {
                None
            } else {
                Some(self.max_sortie_customers)
            },
            coords: self.coords.clone(),
        }
    }

    /// Copy with a different drone count.
    pub fn with_drones(&self, m: usize) -> Result<Instance, ModelError> {
        let mut f = self.to_file();
        f.m = m;
        build_instance(&f)
    }

    /// Copy with a different battery capacity.
    pub fn with_battery(&self, battery: f64) -> Result<Instance, ModelError> {
        let mut f = self.to_file();
        f.battery = Some(battery);
        build_instance(&f)
    }

    /// Copy with a different customer cap per sortie.
    pub fn with_max_sortie_customers(&self, cap: usize) -> Result<Instance, ModelError> {
        let mut f = self.to_file();
        f.max_sortie_customers = Some(cap);
        build_instance(&f)
    }
}
