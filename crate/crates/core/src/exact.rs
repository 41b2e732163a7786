//! Exact search over route solutions: an exhaustive oracle for tiny instances
//! and a depth-first branch-and-bound.

use std::collections::{BTreeSet, HashMap};
use std::time::Duration;

use serde::Serialize;
use thiserror::Error;
use web_time::Instant;

use crate::instance::{Instance, TOL};
use crate::mip::mip_gap;
use crate::paths::{enumerate_paths, prune_dominated, PathSet, RechargePath};
use crate::preprocess::{infeasible_arcs, soc_floors};
use crate::simulate::{optimize_fixed_route_charging, simulate_route, Charge, RouteSolution};

/// Objective differences below this are treated as ties.
const TIE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SearchLimits {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathChoice {
    /// Every path up to the station limit.
    Full,
    /// Paths surviving dominance pruning.
    Pruned,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactOptions {
    pub paths: PathChoice,
    /// Cap on stations per leg; defaults to the station limit.
    pub max_path_stations: Option<usize>,
    /// Skip direct customer arcs flagged by preprocessing.
    pub use_infeasible_arcs: bool,
    pub limits: SearchLimits,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            paths: PathChoice::Pruned,
            max_path_stations: None,
            use_infeasible_arcs: true,
            limits: SearchLimits::default(),
        }
    }
}

/// Builds the leg set for the given options.
pub fn leg_paths(inst: &Instance, choice: PathChoice, max_stations: Option<usize>) -> PathSet {
    let k = max_stations.unwrap_or(inst.max_stations()).min(inst.max_stations());
    let all = enumerate_paths(inst, k);
    match choice {
        PathChoice::Full => all,
        PathChoice::Pruned => prune_dominated(inst, &all).0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExactStatus {
    Optimal,
    /// Budget exhausted with an incumbent.
    Feasible,
    Infeasible,
    /// Budget exhausted without an incumbent.
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactOutcome {
    pub status: ExactStatus,
    pub solution: Option<RouteSolution>,
    pub objective: Option<f64>,
    /// Valid lower bound on the optimum.
    pub bound: f64,
    pub nodes: u64,
    pub elapsed: Duration,
}

impl ExactOutcome {
    /// Relative gap in percent between incumbent and bound.
    pub fn gap(&self) -> Option<f64> {
        self.objective.and_then(|o| mip_gap(o, self.bound).ok())
    }
}

/// Counts of the reasons branches failed, returned when no solution exists.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct InfeasibilityCertificate {
    pub branches: u64,
    pub energy: u64,
    pub duration: u64,
    /// Customers that no single route can serve under any station choice.
    pub unservable: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BruteForceError {
    #[error("instance has no feasible solution ({} branches: {} energy, {} duration failures)", .0.branches, .0.energy, .0.duration)]
    Infeasible(InfeasibilityCertificate),
    #[error("brute force supports at most {max} customers, got {got}")]
    TooLarge { max: usize, got: usize },
}

pub const BRUTE_FORCE_MAX_CUSTOMERS: usize = 8;

/// Cost, chain and charges of one route.
type RoutePlan = (f64, Vec<usize>, Vec<Charge>);
/// Objective, routes and their charges.
type Plan = (f64, Vec<Vec<usize>>, Vec<Vec<Charge>>);
/// A plan with its open station set.
type OpenPlan = (f64, Vec<Vec<usize>>, Vec<Vec<Charge>>, Vec<usize>);

/// Orders solutions: lower objective first, ties broken by the route encoding.
fn better(obj: f64, routes: &[Vec<usize>], best: Option<(f64, &[Vec<usize>])>) -> bool {
    match best {
        None => true,
        Some((b, r)) => obj < b - TIE || (obj <= b + TIE && routes < r),
    }
}

fn route_travel(inst: &Instance, chain: &[usize]) -> f64 {
    chain.windows(2).map(|w| inst.t(w[0], w[1])).sum()
}

/// Per-node checks applied when the preprocessing artefacts are enabled.
fn respects_floors(inst: &Instance, chain: &[usize], charges: &[Charge], floors: &[f64]) -> bool {
    match simulate_route(inst, chain, charges) {
        Ok(trace) => trace.stops.iter().all(|s| {
            if inst.is_customer(s.node) {
                s.arrival_soc >= floors[s.node] - TOL
            } else if inst.is_station(s.node) {
                s.departure_soc >= floors[s.node] - TOL
            } else {
                true
            }
        }),
        Err(_) => false,
    }
}

/// Exhaustive oracle using every recharge path up to the station limit.
pub fn brute_force(inst: &Instance) -> Result<(RouteSolution, f64), BruteForceError> {
    let paths = enumerate_paths(inst, inst.max_stations());
    brute_force_with(inst, &paths, false)
}

/// Exhaustive search over station subsets, set partitions of the customers into
/// at most `R̄` routes, customer orders and path choices per leg. With
/// `preprocess`, direct arcs in the infeasible set are skipped and SoC floors
/// are enforced on every candidate route.
pub fn brute_force_with(
    inst: &Instance,
    paths: &PathSet,
    preprocess: bool,
) -> Result<(RouteSolution, f64), BruteForceError> {
    let customers = inst.customers().to_vec();
    let n = customers.len();
    if n > BRUTE_FORCE_MAX_CUSTOMERS {
        return Err(BruteForceError::TooLarge { max: BRUTE_FORCE_MAX_CUSTOMERS, got: n });
    }
    let banned = if preprocess { infeasible_arcs(inst) } else { BTreeSet::new() };
    let floors = if preprocess { Some(soc_floors(inst)) } else { None };
    let stations = inst.stations();
    let k = inst.max_stations().min(stations.len());
    let mut cert = InfeasibilityCertificate::default();
    let mut best: Option<OpenPlan> = None;
    let mut ever_served = vec![false; n];
    // a larger open set never hurts, so only subsets of maximal size are needed
    for open in subsets_of_size(stations, k) {
        let mut eval = RouteEvaluator {
            inst,
            paths,
            open: &open,
            banned: &banned,
            floors: floors.as_deref(),
            cert: &mut cert,
        };
        // best route for every customer subset
        let mut block: Vec<Option<RoutePlan>> = vec![None; 1 << n];
        for mask in 1usize..(1 << n) {
            let members: Vec<usize> = (0..n).filter(|b| mask & (1 << b) != 0).map(|b| customers[b]).collect();
            for perm in permutations(&members) {
                if let Some((cost, chain, charges)) = eval.best_route(&perm) {
                    let cur = block[mask].as_ref().map(|b| (b.0, std::slice::from_ref(&b.1)));
                    if better(cost, std::slice::from_ref(&chain), cur) {
                        block[mask] = Some((cost, chain, charges));
                    }
                }
            }
            if mask.count_ones() == 1 && block[mask].is_some() {
                ever_served[mask.trailing_zeros() as usize] = true;
            }
        }
        for partition in set_partitions(n, inst.max_routes()) {
            let mut total = 0.0;
            let mut routes = Vec::new();
            let mut charges = Vec::new();
            let mut ok = true;
            for &m in &partition {
                match &block[m] {
                    Some((c, chain, ch)) => {
                        total += c;
                        routes.push(chain.clone());
                        charges.push(ch.clone());
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            let mut order: Vec<usize> = (0..routes.len()).collect();
            order.sort_by(|&a, &b| routes[a].cmp(&routes[b]));
            let routes: Vec<Vec<usize>> = order.iter().map(|&i| routes[i].clone()).collect();
            let charges: Vec<Vec<Charge>> = order.iter().map(|&i| charges[i].clone()).collect();
            if better(total, &routes, best.as_ref().map(|b| (b.0, b.1.as_slice()))) {
                best = Some((total, routes, charges, open.clone()));
            }
        }
    }
    match best {
        Some((obj, routes, charges, _)) => {
            let sol = RouteSolution { open_stations: Vec::new(), routes, charges };
            let open = sol.used_stations(inst);
            Ok((RouteSolution { open_stations: open, ..sol }, obj))
        }
        None => {
            cert.unservable = (0..n).filter(|&b| !ever_served[b]).map(|b| customers[b]).collect();
            Err(BruteForceError::Infeasible(cert))
        }
    }
}

struct RouteEvaluator<'a> {
    inst: &'a Instance,
    paths: &'a PathSet,
    open: &'a [usize],
    banned: &'a BTreeSet<(usize, usize)>,
    floors: Option<&'a [f64]>,
    cert: &'a mut InfeasibilityCertificate,
}

impl RouteEvaluator<'_> {
    /// Cheapest route serving `seq` in order, over all leg path choices.
    fn best_route(&mut self, seq: &[usize]) -> Option<RoutePlan> {
        let stops: Vec<usize> = std::iter::once(0).chain(seq.iter().copied()).chain(std::iter::once(0)).collect();
        let legs: Vec<Vec<&RechargePath>> = stops
            .windows(2)
            .map(|w| {
                let mut v: Vec<&RechargePath> = self.paths.get(&(w[0], w[1])).map(|l| l.iter().collect()).unwrap_or_default();
                v.retain(|p| p.stations.iter().all(|s| self.open.contains(s)));
                if self.inst.is_customer(w[0]) && self.inst.is_customer(w[1]) && self.banned.contains(&(w[0], w[1])) {
                    v.retain(|p| !p.is_direct());
                }
                v.sort_by(|a, b| a.ct.total_cmp(&b.ct).then_with(|| a.stations.cmp(&b.stations)));
                v
            })
            .collect();
        if legs.iter().any(|l| l.is_empty()) {
            return None;
        }
        // minimum remaining travel after each leg
        let mut rest = vec![0.0; legs.len() + 1];
        for i in (0..legs.len()).rev() {
            rest[i] = rest[i + 1] + legs[i][0].ct;
        }
        let service: f64 = seq.iter().map(|&c| self.inst.service_time(c)).sum();
        let mut best: Option<RoutePlan> = None;
        let mut chain = vec![0usize];
        self.dfs(&legs, &rest, 0, 0.0, self.inst.q_max(), service, &mut chain, &mut best);
        best
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &mut self,
        legs: &[Vec<&RechargePath>],
        rest: &[f64],
        leg: usize,
        travel: f64,
        soc: f64,
        service: f64,
        chain: &mut Vec<usize>,
        best: &mut Option<RoutePlan>,
    ) {
        let inst = self.inst;
        if leg == legs.len() {
            self.cert.branches += 1;
            match optimize_fixed_route_charging(inst, chain) {
                Ok((charges, delta)) => {
                    if let Some(floors) = self.floors {
                        if !respects_floors(inst, chain, &charges, floors) {
                            return;
                        }
                    }
                    let cost = travel + delta;
                    let cur = best.as_ref().map(|b| (b.0, std::slice::from_ref(&b.1)));
                    if better(cost, std::slice::from_ref(chain), cur) {
                        *best = Some((cost, chain.clone(), charges));
                    }
                }
                Err(crate::simulate::ChargingPlanError::TooLong { .. }) => self.cert.duration += 1,
                Err(_) => self.cert.energy += 1,
            }
            return;
        }
        for p in &legs[leg] {
            let lb = travel + p.ct + rest[leg + 1];
            if let Some(b) = best {
                if lb > b.0 + TIE {
                    break;
                }
            }
            if lb + service > inst.t_max() + TOL {
                self.cert.branches += 1;
                self.cert.duration += 1;
                break;
            }
            // SoC relaxation: stations refill completely
            let mut s = soc;
            let mut prev = p.from;
            let mut ok = true;
            for &h in &p.stations {
                if s - inst.e(prev, h) < -TOL {
                    ok = false;
                    break;
                }
                s = inst.q_max();
                prev = h;
            }
            s -= inst.e(prev, p.to);
            if !ok || s < -TOL {
                self.cert.branches += 1;
                self.cert.energy += 1;
                continue;
            }
            let len = chain.len();
            chain.extend(&p.stations);
            chain.push(p.to);
            self.dfs(legs, rest, leg + 1, travel + p.ct, s, service, chain, best);
            chain.truncate(len);
        }
    }
}

fn subsets_of_size(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(items, k, 0, &mut cur, &mut out);
    out
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Set partitions of `{0..n}` into at most `max_blocks` blocks, as bit masks.
fn set_partitions(n: usize, max_blocks: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut blocks: Vec<usize> = Vec::new();
    fn rec(i: usize, n: usize, max: usize, blocks: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(blocks.clone());
            return;
        }
        for b in 0..blocks.len() {
            blocks[b] |= 1 << i;
            rec(i + 1, n, max, blocks, out);
            blocks[b] &= !(1 << i);
        }
        if blocks.len() < max {
            blocks.push(1 << i);
            rec(i + 1, n, max, blocks, out);
            blocks.pop();
        }
    }
    rec(0, n, max_blocks, &mut blocks, &mut out);
    out
}

/// Branch-and-bound over partial routes with the default leg set (dominance
/// pruned paths up to the station limit).
pub fn solve_exact(inst: &Instance, opts: &ExactOptions) -> ExactOutcome {
    let paths = leg_paths(inst, opts.paths, opts.max_path_stations);
    solve_exact_with_paths(inst, &paths, opts)
}

/// Branch-and-bound over partial routes. Routes are built leg by leg; a route
/// is priced exactly (optimal charging) when it returns to the depot. The
/// bound adds, for every unserved customer, its cheapest incoming arc, plus the
/// cheapest return to the depot for an open route.
pub fn solve_exact_with_paths(inst: &Instance, paths: &PathSet, opts: &ExactOptions) -> ExactOutcome {
    let start = Instant::now();
    let banned = if opts.use_infeasible_arcs { infeasible_arcs(inst) } else { BTreeSet::new() };
    let customers = inst.customers().to_vec();
    let n = customers.len();
    let pos: HashMap<usize, usize> = customers.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    // leg options sorted by travel time, banned direct arcs removed
    let mut legs: HashMap<(usize, usize), Vec<&RechargePath>> = HashMap::new();
    for (&(a, b), list) in paths {
        let mut v: Vec<&RechargePath> = list
            .iter()
            .filter(|p| !(p.is_direct() && banned.contains(&(a, b))))
            .collect();
        v.sort_by(|x, y| x.ct.total_cmp(&y.ct).then_with(|| x.stations.cmp(&y.stations)));
        legs.insert((a, b), v);
    }
    let min_in: Vec<f64> = customers
        .iter()
        .map(|&c| {
            std::iter::once(0)
                .chain(customers.iter().copied())
                .filter(|&p| p != c)
                .map(|p| inst.t(p, c))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mut search = BranchAndBound {
        inst,
        legs,
        pos,
        customers,
        min_in,
        limits: opts.limits,
        start,
        nodes: 0,
        aborted: false,
        abort_bound: f64::INFINITY,
        best: None,
    };
    let mut state = SearchState {
        visited: 0,
        routes: Vec::new(),
        charges: Vec::new(),
        chain: vec![0],
        closed_cost: 0.0,
        open_travel: 0.0,
        open_service: 0.0,
        soc: inst.q_max(),
        stations: Vec::new(),
        anchor: 0,
    };
    if n > 0 {
        state.anchor = 0;
        search.expand(&mut state);
    }
    let elapsed = start.elapsed();
    let nodes = search.nodes;
    let aborted = search.aborted;
    let abort_bound = search.abort_bound;
    match search.best.take() {
        Some((obj, routes, charges)) => {
            let sol = RouteSolution { open_stations: Vec::new(), routes, charges };
            let open = sol.used_stations(inst);
            let sol = RouteSolution { open_stations: open, ..sol };
            let (status, bound) = if aborted {
                (ExactStatus::Feasible, abort_bound.min(obj))
            } else {
                (ExactStatus::Optimal, obj)
            };
            ExactOutcome { status, solution: Some(sol), objective: Some(obj), bound, nodes, elapsed }
        }
        None => ExactOutcome {
            status: if aborted { ExactStatus::Unknown } else { ExactStatus::Infeasible },
            solution: None,
            objective: None,
            bound: if aborted { abort_bound } else { f64::INFINITY },
            nodes,
            elapsed,
        },
    }
}

struct SearchState {
    visited: u64,
    routes: Vec<Vec<usize>>,
    charges: Vec<Vec<Charge>>,
    /// Node chain of the open route (starts with the depot).
    chain: Vec<usize>,
    closed_cost: f64,
    open_travel: f64,
    open_service: f64,
    /// Relaxed SoC at the end of the chain (stations refill completely).
    soc: f64,
    /// Stations used so far, sorted.
    stations: Vec<usize>,
    /// Lowest customer position unserved when the open route started; the
    /// route must serve it (routes are unordered).
    anchor: usize,
}

struct BranchAndBound<'a> {
    inst: &'a Instance,
    legs: HashMap<(usize, usize), Vec<&'a RechargePath>>,
    pos: HashMap<usize, usize>,
    customers: Vec<usize>,
    min_in: Vec<f64>,
    limits: SearchLimits,
    start: Instant,
    nodes: u64,
    aborted: bool,
    abort_bound: f64,
    best: Option<Plan>,
}

impl BranchAndBound<'_> {
    fn lower_bound(&self, st: &SearchState) -> f64 {
        let n = self.customers.len();
        let mut lb = st.closed_cost + st.open_travel;
        let last = *st.chain.last().unwrap();
        let mut ret = if st.chain.len() > 1 { self.inst.t(last, 0) } else { f64::INFINITY };
        for i in 0..n {
            if st.visited & (1 << i) == 0 {
                lb += self.min_in[i];
                ret = ret.min(self.inst.t(self.customers[i], 0));
            }
        }
        if st.chain.len() > 1 && ret.is_finite() {
            lb += ret;
        }
        lb
    }

    fn out_of_budget(&mut self) -> bool {
        if self.aborted {
            return true;
        }
        let over_nodes = self.limits.node_limit.is_some_and(|l| self.nodes >= l);
        let over_time = self.nodes.is_multiple_of(256)
            && self.limits.time_limit.is_some_and(|l| self.start.elapsed() >= l);
        if over_nodes || over_time {
            self.aborted = true;
        }
        self.aborted
    }

    fn pruned(&self, lb: f64) -> bool {
        matches!(&self.best, Some((b, _, _)) if lb > b + TIE)
    }

    fn expand(&mut self, st: &mut SearchState) {
        self.nodes += 1;
        let lb = self.lower_bound(st);
        if self.out_of_budget() {
            self.abort_bound = self.abort_bound.min(lb);
            return;
        }
        if self.pruned(lb) {
            return;
        }
        let inst = self.inst;
        let n = self.customers.len();
        let all = (1u64 << n) - 1;
        let last = *st.chain.last().unwrap();
        let mut moves: Vec<(usize, &RechargePath)> = Vec::new();
        if st.chain.len() > 1 && st.visited & (1 << st.anchor) != 0 {
            if let Some(list) = self.legs.get(&(last, 0)) {
                moves.extend(list.iter().map(|p| (0, *p)));
            }
        }
        for i in 0..n {
            if st.visited & (1 << i) == 0 {
                if let Some(list) = self.legs.get(&(last, self.customers[i])) {
                    moves.extend(list.iter().map(|p| (self.customers[i], *p)));
                }
            }
        }
        moves.sort_by(|a, b| a.1.ct.total_cmp(&b.1.ct).then(a.0.cmp(&b.0)).then_with(|| a.1.stations.cmp(&b.1.stations)));
        for (to, p) in moves {
            if self.aborted {
                self.abort_bound = self.abort_bound.min(lb);
                return;
            }
            // station limit
            let mut stations = st.stations.clone();
            for &s in &p.stations {
                if let Err(k) = stations.binary_search(&s) {
                    stations.insert(k, s);
                }
            }
            if stations.len() > inst.max_stations() {
                continue;
            }
            // relaxed energy and duration checks
            let mut soc = st.soc;
            let mut prev = last;
            let mut ok = true;
            for &h in &p.stations {
                if soc - inst.e(prev, h) < -TOL {
                    ok = false;
                    break;
                }
                soc = inst.q_max();
                prev = h;
            }
            soc -= inst.e(prev, to);
            if !ok || soc < -TOL {
                continue;
            }
            let sv = inst.service_time(to);
            let travel = st.open_travel + p.ct;
            if travel + st.open_service + sv > inst.t_max() + TOL {
                continue;
            }
            let saved_chain = st.chain.len();
            let saved = (st.open_travel, st.open_service, st.soc, std::mem::replace(&mut st.stations, stations));
            st.chain.extend(&p.stations);
            st.chain.push(to);
            if to == 0 {
                if let Ok((charges, delta)) = optimize_fixed_route_charging(inst, &st.chain) {
                    let route_cost = travel + delta;
                    let saved_visited = st.visited;
                    let saved_anchor = st.anchor;
                    st.routes.push(st.chain.clone());
                    st.charges.push(charges);
                    st.closed_cost += route_cost;
                    let chain = std::mem::replace(&mut st.chain, vec![0]);
                    (st.open_travel, st.open_service, st.soc) = (0.0, 0.0, inst.q_max());
                    if st.visited == all {
                        self.nodes += 1;
                        self.offer(st);
                    } else if st.routes.len() < inst.max_routes() {
                        st.anchor = (0..n).find(|&i| st.visited & (1 << i) == 0).unwrap();
                        self.expand(st);
                    }
                    st.chain = chain;
                    st.closed_cost -= route_cost;
                    st.routes.pop();
                    st.charges.pop();
                    st.visited = saved_visited;
                    st.anchor = saved_anchor;
                }
            } else {
                let bit = 1u64 << self.pos[&to];
                st.visited |= bit;
                (st.open_travel, st.open_service, st.soc) = (travel, st.open_service + sv, soc);
                self.expand(st);
                st.visited &= !bit;
            }
            st.chain.truncate(saved_chain);
            (st.open_travel, st.open_service, st.soc, st.stations) = saved;
        }
    }

    fn offer(&mut self, st: &SearchState) {
        let mut order: Vec<usize> = (0..st.routes.len()).collect();
        order.sort_by(|&a, &b| st.routes[a].cmp(&st.routes[b]));
        let routes: Vec<Vec<usize>> = order.iter().map(|&i| st.routes[i].clone()).collect();
        let charges: Vec<Vec<Charge>> = order.iter().map(|&i| st.charges[i].clone()).collect();
        let obj = st.closed_cost;
        if better(obj, &routes, self.best.as_ref().map(|b| (b.0, b.1.as_slice()))) {
            self.best = Some((obj, routes, charges));
        }
    }
}

/// Travel time of a route (objective part without charging).
pub fn travel_time(inst: &Instance, route: &[usize]) -> f64 {
    route_travel(inst, route)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charging::ChargingFunction;
    use crate::instance::{EvParams, Node};
    use crate::instanceio::generate_synthetic;
    use crate::simulate::validate_solution;

    fn ev() -> EvParams {
        EvParams {
            battery_capacity: 16.0,
            max_route_duration: 10.0,
            consumption_rate: 0.125,
            speed: 40.0,
        }
    }

    fn base(nodes: Vec<Node>, routes: usize) -> Instance {
        let f = ChargingFunction::new("m", vec![(0.0, 0.0), (10.0, 0.5), (16.0, 1.25)]).unwrap();
        let funcs = [("m".into(), f)].into_iter().collect();
        Instance::new("x", nodes, ev(), 1, routes, funcs).unwrap()
    }

    #[test]
    fn single_customer_in_range() {
        let inst = base(
            vec![
                Node::depot(0.0, 0.0),
                Node::customer(1, 40.0, 0.0, 0.1),
                Node::station(2, 0.0, 100.0, "m"),
            ],
            1,
        );
        let (sol, obj) = brute_force(&inst).unwrap();
        assert!((obj - 2.0).abs() < 1e-12);
        assert_eq!(sol.routes, vec![vec![0, 1, 0]]);
        assert!(sol.open_stations.is_empty());
        let out = solve_exact(&inst, &ExactOptions::default());
        assert_eq!(out.status, ExactStatus::Optimal);
        assert!((out.objective.unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn station_needed_for_far_customer() {
        // customer 72 km away: 18 kWh round trip, station halfway
        let inst = base(
            vec![
                Node::depot(0.0, 0.0),
                Node::customer(1, 72.0, 0.0, 0.1),
                Node::station(2, 36.0, 0.0, "m"),
            ],
            1,
        );
        let (sol, obj) = brute_force(&inst).unwrap();
        assert_eq!(sol.open_stations, vec![2]);
        let rep = validate_solution(&inst, &sol);
        assert!(rep.is_feasible());
        assert!((rep.objective - obj).abs() < 1e-9);
        // exactly the 2 kWh deficit is charged
        let charged: f64 = sol.charges.iter().flatten().map(|c| c.q_out - c.q_in).sum();
        assert!((charged - 2.0).abs() < 1e-9, "{sol:?}");
    }

    #[test]
    fn infeasible_instance_gives_certificate() {
        let inst = base(
            vec![
                Node::depot(0.0, 0.0),
                Node::customer(1, 200.0, 0.0, 0.1),
                Node::station(2, 0.0, 1.0, "m"),
            ],
            1,
        );
        match brute_force(&inst) {
            Err(BruteForceError::Infeasible(c)) => assert_eq!(c.unservable, vec![1]),
            other => panic!("{other:?}"),
        }
        assert_eq!(solve_exact(&inst, &ExactOptions::default()).status, ExactStatus::Infeasible);
    }

    #[test]
    fn partitions_are_counted_by_bell_numbers() {
        assert_eq!(set_partitions(4, 4).len(), 15);
        assert_eq!(set_partitions(5, 5).len(), 52);
        assert_eq!(set_partitions(4, 1).len(), 1);
        assert_eq!(permutations(&[1, 2, 3]).len(), 6);
        assert_eq!(subsets_of_size(&[1, 2, 3, 4], 2).len(), 6);
    }

    #[test]
    fn branch_and_bound_matches_brute_force() {
        for seed in 0..6 {
            let inst = generate_synthetic(4, 2, seed).unwrap();
            let (_, bf) = brute_force(&inst).unwrap();
            let full = ExactOptions { paths: PathChoice::Full, ..Default::default() };
            let out = solve_exact(&inst, &full);
            assert_eq!(out.status, ExactStatus::Optimal);
            assert!((out.objective.unwrap() - bf).abs() < 1e-6, "seed {seed}: {} vs {bf}", out.objective.unwrap());
            let sol = out.solution.unwrap();
            assert!(validate_solution(&inst, &sol).is_feasible());
        }
    }

    #[test]
    fn budget_exhaustion_reports_a_valid_bound() {
        let inst = generate_synthetic(5, 2, 1).unwrap();
        let opts = ExactOptions {
            limits: SearchLimits { node_limit: Some(50), time_limit: None },
            ..Default::default()
        };
        let out = solve_exact(&inst, &opts);
        let best = solve_exact(&inst, &ExactOptions::default()).objective.unwrap();
        assert!(out.bound <= best + 1e-9);
        if let Some(o) = out.objective {
            assert!(out.bound <= o + 1e-9);
            assert!(out.gap().unwrap() >= 0.0);
        }
    }

    #[test]
    fn deterministic_across_runs() {
        let inst = generate_synthetic(5, 2, 9).unwrap();
        let a = solve_exact(&inst, &ExactOptions::default());
        let b = solve_exact(&inst, &ExactOptions::default());
        assert_eq!(a.solution, b.solution);
    }
}
