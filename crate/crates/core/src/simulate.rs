//! Route semantics shared by every formulation: tracing, fixed-route charging,
//! solution validation and re-evaluation of linear-charging decisions.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::charging::ChargingFunction;
use crate::instance::{Instance, TOL};

/// Charge taken at one station visit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Charge {
    pub q_in: f64,
    pub q_out: f64,
}

/// A complete solution: routes, opened stations and per-visit charges.
///
/// Each route starts and ends at the depot (node 0). `charges[r]` holds one
/// entry per station visit of route `r`, in visiting order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RouteSolution {
    pub routes: Vec<Vec<usize>>,
    pub open_stations: Vec<usize>,
    pub charges: Vec<Vec<Charge>>,
}

impl RouteSolution {
    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serialises")
    }

    /// Station nodes visited by the solution, sorted and deduplicated.
    pub fn used_stations(&self, inst: &Instance) -> Vec<usize> {
        let set: BTreeSet<usize> = self
            .routes
            .iter()
            .flatten()
            .copied()
            .filter(|&v| v < inst.n() && inst.is_station(v))
            .collect();
        set.into_iter().collect()
    }
}

/// Arrival and departure state at one route position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StopTrace {
    pub node: usize,
    pub arrival_time: f64,
    pub departure_time: f64,
    pub arrival_soc: f64,
    pub departure_soc: f64,
}

/// Forward pass over one route.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteTrace {
    pub stops: Vec<StopTrace>,
    pub travel_time: f64,
    pub service_time: f64,
    pub charging_time: f64,
    /// Charging time of each station visit, in order.
    pub deltas: Vec<f64>,
}

impl RouteTrace {
    /// Objective contribution: travel plus charging time.
    pub fn cost(&self) -> f64 {
        self.travel_time + self.charging_time
    }

    pub fn duration(&self) -> f64 {
        self.travel_time + self.service_time + self.charging_time
    }
}

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
pub enum RouteViolation {
    #[error("route must start and end at the depot and contain at least one other node")]
    NotDepotBounded,
    #[error("node {0} is not a customer or station (or appears at an interior depot position)")]
    BadNode(usize),
    #[error("route visits {visits} stations but lists {charges} charges")]
    ChargeCount { visits: usize, charges: usize },
    #[error("arrival SoC at station {node} is {actual:.6} kWh but the charge lists {listed:.6}")]
    EntrySoc { node: usize, actual: f64, listed: f64 },
    #[error("charge at station {node} lowers SoC from {q_in:.6} to {q_out:.6}")]
    ChargeOrder { node: usize, q_in: f64, q_out: f64 },
    #[error("charge at station {node} exceeds capacity: {q_out:.6} kWh")]
    Overcharge { node: usize, q_out: f64 },
    #[error("SoC drops to {soc:.6} kWh on arc ({from}, {to})")]
    NegativeSoc { from: usize, to: usize, soc: f64 },
    #[error("route duration {duration:.6} h exceeds limit {limit} h")]
    Duration { duration: f64, limit: f64 },
}

/// Traces a route with the given charges; reports the first violation.
pub fn simulate_route(
    inst: &Instance,
    route: &[usize],
    charges: &[Charge],
) -> Result<RouteTrace, RouteViolation> {
    check_route_shape(inst, route)?;
    let visits = route.iter().filter(|&&v| inst.is_station(v)).count();
    if visits != charges.len() {
        return Err(RouteViolation::ChargeCount { visits, charges: charges.len() });
    }
    let q_max = inst.q_max();
    let mut stops = Vec::with_capacity(route.len());
    let mut deltas = Vec::with_capacity(visits);
    let (mut time, mut soc) = (0.0, q_max);
    let (mut travel, mut service, mut charging) = (0.0, 0.0, 0.0);
    let mut next_charge = charges.iter();
    stops.push(StopTrace {
        node: route[0],
        arrival_time: 0.0,
        departure_time: 0.0,
        arrival_soc: q_max,
        departure_soc: q_max,
    });
    for w in route.windows(2) {
        let (from, to) = (w[0], w[1]);
        soc -= inst.e(from, to);
        time += inst.t(from, to);
        travel += inst.t(from, to);
        if soc < -TOL {
            return Err(RouteViolation::NegativeSoc { from, to, soc });
        }
        let (arrival_time, arrival_soc) = (time, soc);
        if inst.is_station(to) {
            let c = next_charge.next().expect("charge count checked");
            if (c.q_in - soc).abs() > TOL {
                return Err(RouteViolation::EntrySoc { node: to, actual: soc, listed: c.q_in });
            }
            if c.q_out < c.q_in - TOL {
                return Err(RouteViolation::ChargeOrder { node: to, q_in: c.q_in, q_out: c.q_out });
            }
            if c.q_out > q_max + TOL {
                return Err(RouteViolation::Overcharge { node: to, q_out: c.q_out });
            }
            let f = inst.station_function(to);
            let delta = (f.time_at_soc_unchecked(c.q_out) - f.time_at_soc_unchecked(c.q_in)).max(0.0);
            deltas.push(delta);
            charging += delta;
            time += delta;
            soc = c.q_out;
        } else {
            let sv = inst.service_time(to);
            service += sv;
            time += sv;
        }
        stops.push(StopTrace {
            node: to,
            arrival_time,
            departure_time: time,
            arrival_soc,
            departure_soc: soc,
        });
    }
    if time > inst.t_max() + TOL {
        return Err(RouteViolation::Duration { duration: time, limit: inst.t_max() });
    }
    Ok(RouteTrace {
        stops,
        travel_time: travel,
        service_time: service,
        charging_time: charging,
        deltas,
    })
}

fn check_route_shape(inst: &Instance, route: &[usize]) -> Result<(), RouteViolation> {
    if route.len() < 3 || route[0] != 0 || route[route.len() - 1] != 0 {
        return Err(RouteViolation::NotDepotBounded);
    }
    for &v in &route[1..route.len() - 1] {
        if v == 0 || v >= inst.n() {
            return Err(RouteViolation::BadNode(v));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChargingPlanError {
    #[error("no charging plan keeps the SoC nonnegative")]
    EnergyInfeasible,
    #[error("cheapest charging plan needs {duration:.6} h, limit is {limit} h")]
    TooLong { duration: f64, limit: f64 },
    #[error(transparent)]
    Route(#[from] RouteViolation),
}

/// Optimal charging for a chain of stops.
///
/// `consumption[k]` is the energy used between stop `k - 1` (or the start, for
/// `k = 0`) and stop `k`; the final entry covers the leg from the last stop to the
/// end, so `consumption.len() == funcs.len() + 1`. The vehicle starts with
/// `q_start`. Returns exit SoC per stop and the minimum total charging time.
pub fn plan_charging(
    funcs: &[&ChargingFunction],
    consumption: &[f64],
    q_start: f64,
    q_max: f64,
) -> Option<(Vec<Charge>, f64)> {
    assert_eq!(consumption.len(), funcs.len() + 1);
    let k_stops = funcs.len();
    // Exit-SoC candidates per stop: values that can pin a vertex of the
    // piecewise-linear program (own breakpoints, capacity, downstream
    // breakpoints or empty arrivals shifted by the energy spent in between).
    let candidates: Vec<Vec<f64>> = (0..k_stops)
        .map(|k| {
            let mut c = vec![q_max];
            c.extend(funcs[k].breakpoints().iter().map(|p| p.0));
            let mut spent = 0.0;
            for m in k..k_stops {
                spent += consumption[m + 1];
                c.push(spent);
                if m + 1 < k_stops {
                    c.extend(funcs[m + 1].breakpoints().iter().map(|p| spent + p.0));
                }
            }
            c.retain(|&v| v <= q_max + 1e-12);
            c.iter_mut().for_each(|v| *v = v.min(q_max));
            c.sort_by(f64::total_cmp);
            c.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
            c
        })
        .collect();

    // (arrival SoC, cost, back pointer into the previous layer, exit SoC)
    struct State {
        soc: f64,
        cost: f64,
        parent: usize,
        exit: f64,
    }
    let first = q_start - consumption[0];
    if first < -TOL {
        return None;
    }
    let mut layers: Vec<Vec<State>> = vec![vec![State {
        soc: first.max(0.0),
        cost: 0.0,
        parent: usize::MAX,
        exit: f64::NAN,
    }]];
    for k in 0..k_stops {
        let f = funcs[k];
        let r = consumption[k + 1];
        let mut next: Vec<State> = Vec::new();
        for (idx, s) in layers[k].iter().enumerate() {
            let base = f.time_at_soc_unchecked(s.soc);
            let options = std::iter::once(s.soc)
                .chain(candidates[k].iter().copied().filter(|&c| c > s.soc + 1e-12));
            for out in options {
                let arrive = out - r;
                if arrive < -TOL {
                    continue;
                }
                let cost = s.cost + (f.time_at_soc_unchecked(out) - base).max(0.0);
                next.push(State { soc: arrive.max(0.0), cost, parent: idx, exit: out });
            }
        }
        if next.is_empty() {
            return None;
        }
        next.sort_by(|a, b| a.soc.total_cmp(&b.soc).then(a.cost.total_cmp(&b.cost)));
        let mut merged: Vec<State> = Vec::with_capacity(next.len());
        for s in next {
            match merged.last_mut() {
                Some(last) if (last.soc - s.soc).abs() <= 1e-12 => {
                    if s.cost < last.cost {
                        *last = s;
                    }
                }
                _ => merged.push(s),
            }
        }
        layers.push(merged);
    }
    if k_stops == 0 {
        return Some((Vec::new(), 0.0));
    }
    let last = &layers[k_stops];
    let (mut idx, best) = last
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.cost.total_cmp(&b.1.cost).then(a.0.cmp(&b.0)))
        .map(|(i, s)| (i, s.cost))?;
    let mut charges = vec![Charge { q_in: 0.0, q_out: 0.0 }; k_stops];
    for k in (0..k_stops).rev() {
        let s = &layers[k + 1][idx];
        let prev = &layers[k][s.parent];
        charges[k] = Charge { q_in: prev.soc, q_out: s.exit };
        idx = s.parent;
    }
    Some((charges, best))
}

/// Cheapest charges for a route whose station stops are fixed.
pub fn optimize_fixed_route_charging(
    inst: &Instance,
    route: &[usize],
) -> Result<(Vec<Charge>, f64), ChargingPlanError> {
    check_route_shape(inst, route)?;
    let mut funcs = Vec::new();
    let mut consumption = vec![0.0];
    let mut fixed_time = 0.0;
    for w in route.windows(2) {
        *consumption.last_mut().unwrap() += inst.e(w[0], w[1]);
        fixed_time += inst.t(w[0], w[1]) + inst.service_time(w[1]);
        if inst.is_station(w[1]) {
            funcs.push(inst.station_function(w[1]));
            consumption.push(0.0);
        }
    }
    // every arc must be individually traversable
    let (charges, total) = plan_charging(&funcs, &consumption, inst.q_max(), inst.q_max())
        .ok_or(ChargingPlanError::EnergyInfeasible)?;
    let duration = fixed_time + total;
    if duration > inst.t_max() + TOL {
        return Err(ChargingPlanError::TooLong { duration, limit: inst.t_max() });
    }
    Ok((charges, total))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    Coverage { customer: usize, visits: usize },
    TooManyRoutes { routes: usize, limit: usize },
    TooManyStations { open: usize, limit: usize },
    NotAStation(usize),
    StationNotOpen { station: usize },
    ChargeRoutes { routes: usize, charges: usize },
    Route { route: usize, violation: RouteViolation },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Coverage { customer, visits } => {
                write!(f, "customer {customer} visited {visits} times")
            }
            Violation::TooManyRoutes { routes, limit } => {
                write!(f, "{routes} routes exceed the limit {limit}")
            }
            Violation::TooManyStations { open, limit } => {
                write!(f, "{open} open stations exceed the limit {limit}")
            }
            Violation::NotAStation(v) => write!(f, "open node {v} is not a station candidate"),
            Violation::StationNotOpen { station } => {
                write!(f, "station {station} is visited but not open")
            }
            Violation::ChargeRoutes { routes, charges } => {
                write!(f, "{routes} routes but {charges} charge lists")
            }
            Violation::Route { route, violation } => write!(f, "route {route}: {violation}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Total travel plus charging time over the routes that trace cleanly.
    pub objective: f64,
    pub traces: Vec<Option<RouteTrace>>,
}

impl ValidationReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks coverage, limits, station use and every route.
pub fn validate_solution(inst: &Instance, sol: &RouteSolution) -> ValidationReport {
    let mut violations = Vec::new();
    let mut visits = vec![0usize; inst.n()];
    for route in &sol.routes {
        for &v in route {
            if v < inst.n() {
                visits[v] += 1;
            }
        }
    }
    for &c in inst.customers() {
        if visits[c] != 1 {
            violations.push(Violation::Coverage { customer: c, visits: visits[c] });
        }
    }
    if sol.routes.len() > inst.max_routes() {
        violations.push(Violation::TooManyRoutes {
            routes: sol.routes.len(),
            limit: inst.max_routes(),
        });
    }
    let open: BTreeSet<usize> = sol.open_stations.iter().copied().collect();
    if open.len() > inst.max_stations() {
        violations.push(Violation::TooManyStations {
            open: open.len(),
            limit: inst.max_stations(),
        });
    }
    for &s in &open {
        if s >= inst.n() || !inst.is_station(s) {
            violations.push(Violation::NotAStation(s));
        }
    }
    for s in sol.used_stations(inst) {
        if !open.contains(&s) {
            violations.push(Violation::StationNotOpen { station: s });
        }
    }
    if sol.charges.len() != sol.routes.len() {
        violations.push(Violation::ChargeRoutes {
            routes: sol.routes.len(),
            charges: sol.charges.len(),
        });
    }
    let mut objective = 0.0;
    let mut traces = Vec::with_capacity(sol.routes.len());
    for (r, route) in sol.routes.iter().enumerate() {
        let charges = sol.charges.get(r).map(Vec::as_slice).unwrap_or(&[]);
        match simulate_route(inst, route, charges) {
            Ok(trace) => {
                objective += trace.cost();
                traces.push(Some(trace));
            }
            Err(violation) => {
                violations.push(Violation::Route { route: r, violation });
                traces.push(None);
            }
        }
    }
    ValidationReport { violations, objective, traces }
}

/// Objective of a solution that is assumed feasible: travel plus charging time.
pub fn solution_objective(inst: &Instance, sol: &RouteSolution) -> f64 {
    validate_solution(inst, sol).objective
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReevaluationError {
    #[error("route {route} cannot be operated under nonlinear charging: {source}")]
    Infeasible { route: usize, source: ChargingPlanError },
}

/// Keeps routes and open stations of `sol` and re-optimises every charge under
/// the instance's (nonlinear) charging functions. Returns the updated solution
/// and its objective.
pub fn reevaluate_under_nonlinear(
    inst: &Instance,
    sol: &RouteSolution,
) -> Result<(RouteSolution, f64), ReevaluationError> {
    let mut out = sol.clone();
    out.charges.clear();
    let mut objective = 0.0;
    for (route_idx, route) in sol.routes.iter().enumerate() {
        let (charges, delta) = optimize_fixed_route_charging(inst, route)
            .map_err(|source| ReevaluationError::Infeasible { route: route_idx, source })?;
        objective += route.windows(2).map(|w| inst.t(w[0], w[1])).sum::<f64>() + delta;
        out.charges.push(charges);
    }
    Ok((out, objective))
}

/// Percentage degradation `100 (obj_star - obj) / obj`; `None` when `obj == 0`.
pub fn nl_gap(obj: f64, obj_star: f64) -> Option<f64> {
    if obj == 0.0 {
        None
    } else {
        Some(100.0 * (obj_star - obj) / obj)
    }
}
