//! Nodes, EV parameters and derived travel matrices.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::charging::ChargingFunction;

/// Feasibility tolerance used across the crate.
pub const TOL: f64 = 1e-6;

/// Label of a station technology (for example `"slow"` or `"22kW"`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TechId(pub String);

impl From<&str> for TechId {
    fn from(s: &str) -> Self {
        TechId(s.to_string())
    }
}

impl From<String> for TechId {
    fn from(s: String) -> Self {
        TechId(s)
    }
}

impl fmt::Display for TechId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NodeKind {
    Depot,
    Customer { service_time: f64 },
    Station { tech: TechId },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    /// Dense index; node 0 is the depot.
    pub id: usize,
    pub kind: NodeKind,
    pub x: f64,
    pub y: f64,
}

impl Node {
    pub fn depot(x: f64, y: f64) -> Self {
        Node { id: 0, kind: NodeKind::Depot, x, y }
    }

    pub fn customer(id: usize, x: f64, y: f64, service_time: f64) -> Self {
        Node { id, kind: NodeKind::Customer { service_time }, x, y }
    }

    pub fn station(id: usize, x: f64, y: f64, tech: impl Into<TechId>) -> Self {
        Node { id, kind: NodeKind::Station { tech: tech.into() }, x, y }
    }

    pub fn is_customer(&self) -> bool {
        matches!(self.kind, NodeKind::Customer { .. })
    }

    pub fn is_station(&self) -> bool {
        matches!(self.kind, NodeKind::Station { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvParams {
    /// Battery capacity Q (kWh).
    pub battery_capacity: f64,
    /// Maximum route duration T (h).
    pub max_route_duration: f64,
    /// Energy per kilometre (kWh/km).
    pub consumption_rate: f64,
    /// Travel speed (km/h).
    pub speed: f64,
}

impl EvParams {
    fn validate(&self) -> Result<(), InstanceError> {
        for (name, v) in [
            ("battery_capacity", self.battery_capacity),
            ("max_route_duration", self.max_route_duration),
            ("consumption_rate", self.consumption_rate),
            ("speed", self.speed),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(InstanceError::BadEvParam { name, value: v });
            }
        }
        Ok(())
    }
}

/// Dense square matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![0.0; n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// First triple `(i, j, k)` with `m[i][k] > m[i][j] + m[j][k] + tol`.
    pub fn triangle_violation(&self, tol: f64) -> Option<(usize, usize, usize)> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.get(i, k) > self.get(i, j) + self.get(j, k) + tol {
                        return Some((i, j, k));
                    }
                }
            }
        }
        None
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("an instance needs at least two nodes")]
    TooFewNodes,
    #[error("node at position {position} has id {id}; ids must be dense and ordered")]
    BadNodeId { position: usize, id: usize },
    #[error("node 0 must be the depot and it must be the only one")]
    DepotPlacement,
    #[error("node {0} has a non-finite coordinate")]
    NonFiniteCoordinate(usize),
    #[error("customer {0} has a negative or non-finite service time")]
    BadServiceTime(usize),
    #[error("EV parameter {name} must be positive and finite, got {value}")]
    BadEvParam { name: &'static str, value: f64 },
    #[error("station {node} uses unknown technology {tech}")]
    UnknownTech { node: usize, tech: TechId },
    #[error("charging function {tech} ends at {capacity} kWh but the battery holds {battery} kWh")]
    CapacityMismatch { tech: TechId, capacity: f64, battery: f64 },
    #[error("station limit {limit} must lie in 1..={stations}")]
    BadStationLimit { limit: usize, stations: usize },
    #[error("route limit must be at least 1")]
    BadRouteLimit,
    #[error("{which} matrix is invalid: {reason}")]
    BadMatrix { which: &'static str, reason: String },
}

/// A complete ELRP instance. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    nodes: Vec<Node>,
    ev: EvParams,
    time: Matrix,
    energy: Matrix,
    max_stations: usize,
    max_routes: usize,
    charging_functions: BTreeMap<TechId, ChargingFunction>,
    customers: Vec<usize>,
    stations: Vec<usize>,
}

/// Euclidean travel-time and energy matrices (`t = d / speed`, `e = rate * d`).
pub fn build_matrices(nodes: &[Node], ev: &EvParams) -> Result<(Matrix, Matrix), InstanceError> {
    if nodes.len() < 2 {
        return Err(InstanceError::TooFewNodes);
    }
    ev.validate()?;
    for (i, n) in nodes.iter().enumerate() {
        if !n.x.is_finite() || !n.y.is_finite() {
            return Err(InstanceError::NonFiniteCoordinate(i));
        }
    }
    let dist = Matrix::from_fn(nodes.len(), |i, j| {
        if i == j {
            0.0
        } else {
            (nodes[i].x - nodes[j].x).hypot(nodes[i].y - nodes[j].y)
        }
    });
    let n = nodes.len();
    let t = Matrix::from_fn(n, |i, j| dist.get(i, j) / ev.speed);
    let e = Matrix::from_fn(n, |i, j| dist.get(i, j) * ev.consumption_rate);
    Ok((t, e))
}

impl Instance {
    /// Builds an instance with Euclidean matrices derived from node coordinates.
    pub fn new(
        name: impl Into<String>,
        nodes: Vec<Node>,
        ev: EvParams,
        max_stations: usize,
        max_routes: usize,
        charging_functions: BTreeMap<TechId, ChargingFunction>,
    ) -> Result<Self, InstanceError> {
        let (time, energy) = build_matrices(&nodes, &ev)?;
        Self::with_matrices(
            name,
            nodes,
            ev,
            time,
            energy,
            max_stations,
            max_routes,
            charging_functions,
        )
    }

    /// Builds an instance from explicit matrices (checked for the metric properties).
    #[allow(clippy::too_many_arguments)]
    pub fn with_matrices(
        name: impl Into<String>,
        nodes: Vec<Node>,
        ev: EvParams,
        time: Matrix,
        energy: Matrix,
        max_stations: usize,
        max_routes: usize,
        charging_functions: BTreeMap<TechId, ChargingFunction>,
    ) -> Result<Self, InstanceError> {
        if nodes.len() < 2 {
            return Err(InstanceError::TooFewNodes);
        }
        ev.validate()?;
        for (position, node) in nodes.iter().enumerate() {
            if node.id != position {
                return Err(InstanceError::BadNodeId { position, id: node.id });
            }
            if !node.x.is_finite() || !node.y.is_finite() {
                return Err(InstanceError::NonFiniteCoordinate(position));
            }
            let is_depot = matches!(node.kind, NodeKind::Depot);
            if is_depot != (position == 0) {
                return Err(InstanceError::DepotPlacement);
            }
            match &node.kind {
                NodeKind::Customer { service_time } => {
                    if !(service_time.is_finite() && *service_time >= 0.0) {
                        return Err(InstanceError::BadServiceTime(position));
                    }
                }
                NodeKind::Station { tech } => {
                    if !charging_functions.contains_key(tech) {
                        return Err(InstanceError::UnknownTech {
                            node: position,
                            tech: tech.clone(),
                        });
                    }
                }
                NodeKind::Depot => {}
            }
        }
        for (tech, f) in &charging_functions {
            if (f.capacity() - ev.battery_capacity).abs() > 1e-9 {
                return Err(InstanceError::CapacityMismatch {
                    tech: tech.clone(),
                    capacity: f.capacity(),
                    battery: ev.battery_capacity,
                });
            }
        }
        check_matrix("time", &time, nodes.len())?;
        check_matrix("energy", &energy, nodes.len())?;
        let customers: Vec<usize> = nodes.iter().filter(|n| n.is_customer()).map(|n| n.id).collect();
        let stations: Vec<usize> = nodes.iter().filter(|n| n.is_station()).map(|n| n.id).collect();
        if max_stations < 1 || max_stations > stations.len() {
            return Err(InstanceError::BadStationLimit {
                limit: max_stations,
                stations: stations.len(),
            });
        }
        if max_routes < 1 {
            return Err(InstanceError::BadRouteLimit);
        }
        Ok(Instance {
            name: name.into(),
            nodes,
            ev,
            time,
            energy,
            max_stations,
            max_routes,
            charging_functions,
            customers,
            stations,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn ev(&self) -> &EvParams {
        &self.ev
    }

    /// Battery capacity Q.
    pub fn q_max(&self) -> f64 {
        self.ev.battery_capacity
    }

    /// Route duration limit T.
    pub fn t_max(&self) -> f64 {
        self.ev.max_route_duration
    }

    #[inline]
    pub fn t(&self, i: usize, j: usize) -> f64 {
        self.time.get(i, j)
    }

    #[inline]
    pub fn e(&self, i: usize, j: usize) -> f64 {
        self.energy.get(i, j)
    }

    pub fn time_matrix(&self) -> &Matrix {
        &self.time
    }

    pub fn energy_matrix(&self) -> &Matrix {
        &self.energy
    }

    pub fn max_stations(&self) -> usize {
        self.max_stations
    }

    pub fn max_routes(&self) -> usize {
        self.max_routes
    }

    pub fn charging_functions(&self) -> &BTreeMap<TechId, ChargingFunction> {
        &self.charging_functions
    }

    /// Customer node indices in increasing order.
    pub fn customers(&self) -> &[usize] {
        &self.customers
    }

    /// Station candidate node indices in increasing order.
    pub fn stations(&self) -> &[usize] {
        &self.stations
    }

    pub fn is_customer(&self, i: usize) -> bool {
        self.nodes[i].is_customer()
    }

    pub fn is_station(&self, i: usize) -> bool {
        self.nodes[i].is_station()
    }

    /// Service time of node `i` (zero for the depot and stations).
    pub fn service_time(&self, i: usize) -> f64 {
        match self.nodes[i].kind {
            NodeKind::Customer { service_time } => service_time,
            _ => 0.0,
        }
    }

    /// Technology of station `i`.
    pub fn tech(&self, i: usize) -> Option<&TechId> {
        match &self.nodes[i].kind {
            NodeKind::Station { tech } => Some(tech),
            _ => None,
        }
    }

    /// Charging function of station `i`. Panics if `i` is not a station.
    pub fn station_function(&self, i: usize) -> &ChargingFunction {
        let tech = self
            .tech(i)
            .unwrap_or_else(|| panic!("node {i} is not a charging station"));
        &self.charging_functions[tech]
    }

    /// Copy of the instance with every charging function replaced by its secant.
    pub fn linearized(&self) -> Instance {
        let mut out = self.clone();
        out.charging_functions = self
            .charging_functions
            .iter()
            .map(|(k, f)| (k.clone(), f.linearize()))
            .collect();
        out
    }

    /// Copy of the instance with a different station limit.
    pub fn with_limits(&self, max_stations: usize, max_routes: usize) -> Result<Instance, InstanceError> {
        Instance::with_matrices(
            self.name.clone(),
            self.nodes.clone(),
            self.ev,
            self.time.clone(),
            self.energy.clone(),
            max_stations,
            max_routes,
            self.charging_functions.clone(),
        )
    }
}

fn check_matrix(which: &'static str, m: &Matrix, n: usize) -> Result<(), InstanceError> {
    let bad = |reason: String| InstanceError::BadMatrix { which, reason };
    if m.size() != n {
        return Err(bad(format!("size {} for {} nodes", m.size(), n)));
    }
    for i in 0..n {
        for j in 0..n {
            let v = m.get(i, j);
            if !v.is_finite() || v < 0.0 {
                return Err(bad(format!("entry ({i}, {j}) = {v}")));
            }
            if i == j && v != 0.0 {
                return Err(bad(format!("diagonal entry {i} is {v}")));
            }
        }
    }
    if let Some((i, j, k)) = m.triangle_violation(1e-9) {
        return Err(bad(format!("triangle inequality fails for ({i}, {j}, {k})")));
    }
    Ok(())
}
