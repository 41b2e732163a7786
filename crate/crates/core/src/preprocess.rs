//! Model strengthening: escape energies, infeasible customer arcs, SoC floors and
//! subtour cut separation.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::instance::Instance;

/// Summary of the static strengthening data of an instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreprocessReport {
    /// Customer pairs `(i, j)` that no feasible route can traverse directly.
    pub infeasible_arcs: BTreeSet<(usize, usize)>,
    /// Minimum energy to reach the depot or a station from each customer.
    pub min_escape_energy: BTreeMap<usize, f64>,
    /// Minimum energy needed on leaving each station.
    pub station_escape: BTreeMap<usize, f64>,
}

pub fn preprocess(inst: &Instance) -> PreprocessReport {
    PreprocessReport {
        infeasible_arcs: infeasible_arcs(inst),
        min_escape_energy: inst
            .customers()
            .iter()
            .map(|&c| (c, min_escape_energy(inst, c)))
            .collect(),
        station_escape: inst
            .stations()
            .iter()
            .map(|&s| (s, station_escape_energy(inst, s)))
            .collect(),
    }
}

/// Energy from `i` to the nearest station or the depot.
pub fn min_escape_energy(inst: &Instance, i: usize) -> f64 {
    std::iter::once(0)
        .chain(inst.stations().iter().copied())
        .filter(|&k| k != i)
        .map(|k| inst.e(i, k))
        .fold(f64::INFINITY, f64::min)
}

/// Lower bound on the SoC with which a vehicle may leave station `s`: it either
/// heads to another station or the depot, or visits a customer and then has to
/// escape from there.
pub fn station_escape_energy(inst: &Instance, s: usize) -> f64 {
    let other = std::iter::once(0)
        .chain(inst.stations().iter().copied())
        .filter(|&k| k != s)
        .map(|k| inst.e(s, k))
        .fold(f64::INFINITY, f64::min);
    let via_customer = inst
        .customers()
        .iter()
        .map(|&j| inst.e(s, j) + min_escape_energy(inst, j))
        .fold(f64::INFINITY, f64::min);
    other.min(via_customer)
}

/// Customer arcs `(i, j)` with `ē_i + e_ij + ē_j > Q`.
pub fn infeasible_arcs(inst: &Instance) -> BTreeSet<(usize, usize)> {
    let esc: Vec<(usize, f64)> = inst
        .customers()
        .iter()
        .map(|&c| (c, min_escape_energy(inst, c)))
        .collect();
    let mut out = BTreeSet::new();
    for &(i, ei) in &esc {
        for &(j, ej) in &esc {
            if i != j && ei + inst.e(i, j) + ej > inst.q_max() {
                out.insert((i, j));
            }
        }
    }
    out
}

/// Per-node SoC lower bounds: `ē_i` at customers, `ē′_s` on leaving stations, 0 at the depot.
pub fn soc_floors(inst: &Instance) -> Vec<f64> {
    (0..inst.n())
        .map(|i| {
            if inst.is_customer(i) {
                min_escape_energy(inst, i)
            } else if inst.is_station(i) {
                station_escape_energy(inst, i)
            } else {
                0.0
            }
        })
        .collect()
}

/// Subtour elimination cut `Σ_{i,j ∈ S} x_ij ≤ |S| − 1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SubtourCut {
    /// Sorted node set, never containing the depot.
    pub nodes: Vec<usize>,
}

impl SubtourCut {
    pub fn rhs(&self) -> f64 {
        self.nodes.len() as f64 - 1.0
    }

    /// Arc flow inside the node set.
    pub fn lhs(&self, x: &BTreeMap<(usize, usize), f64>) -> f64 {
        let set: BTreeSet<usize> = self.nodes.iter().copied().collect();
        x.iter()
            .filter(|((i, j), _)| set.contains(i) && set.contains(j))
            .map(|(_, v)| *v)
            .sum()
    }

    pub fn violation(&self, x: &BTreeMap<(usize, usize), f64>) -> f64 {
        self.lhs(x) - self.rhs()
    }
}

const CUT_EPS: f64 = 1e-6;

/// Finds subtour cuts violated by more than `1e-6` in the arc values `x` over
/// nodes `0..n`, node 0 being the depot. Output is sorted and deduplicated.
pub fn separate_sec(n: usize, x: &BTreeMap<(usize, usize), f64>) -> Vec<SubtourCut> {
    let integral = x.values().all(|v| (v - v.round()).abs() < 1e-9);
    if integral {
        let cuts = integral_components(n, x);
        if !cuts.is_empty() {
            return cuts;
        }
    }
    min_cut_separation(n, x)
}

fn integral_components(n: usize, x: &BTreeMap<(usize, usize), f64>) -> Vec<SubtourCut> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], a: usize) -> usize {
        let mut r = a;
        while p[r] != r {
            r = p[r];
        }
        let mut a = a;
        while p[a] != r {
            let nx = p[a];
            p[a] = r;
            a = nx;
        }
        r
    }
    for (&(i, j), &v) in x {
        if v > 0.5 && i != 0 && j != 0 && i != j {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 1..n {
        let r = find(&mut parent, v);
        groups.entry(r).or_default().push(v);
    }
    let mut cuts: Vec<SubtourCut> = groups
        .into_values()
        .filter(|g| g.len() >= 2)
        .map(|nodes| SubtourCut { nodes })
        .filter(|c| c.violation(x) > CUT_EPS)
        .collect();
    cuts.sort();
    cuts
}

/// Exact separation. With `y` the symmetrised arc values and `d_i` the weighted
/// degree, a set `S` is violated iff `y(δ(S)) + Σ_{i∈S} (2 − d_i) < 2`; this is
/// minimised for every forced member `k` with one s-t minimum cut.
fn min_cut_separation(n: usize, x: &BTreeMap<(usize, usize), f64>) -> Vec<SubtourCut> {
    let mut y = vec![vec![0.0; n]; n];
    for (&(i, j), &v) in x {
        if i != j && i < n && j < n {
            y[i][j] += v;
            y[j][i] += v;
        }
    }
    let degree: Vec<f64> = y.iter().map(|row| row.iter().sum()).collect();
    let (src, sink) = (n, n + 1);
    let big = 1e9;
    let mut found = BTreeSet::new();
    for k in 1..n {
        let mut net = FlowNetwork::new(n + 2);
        for i in 0..n {
            for j in 0..n {
                if y[i][j] > 0.0 {
                    net.add(i, j, y[i][j]);
                }
            }
        }
        for i in 1..n {
            let w = 2.0 - degree[i];
            if w >= 0.0 {
                net.add(i, sink, w);
            } else {
                net.add(src, i, -w);
            }
        }
        net.add(0, sink, big);
        net.add(src, k, big);
        net.max_flow(src, sink);
        let side = net.source_side(src);
        let nodes: Vec<usize> = (1..n).filter(|&i| side[i]).collect();
        if nodes.len() >= 2 {
            let cut = SubtourCut { nodes };
            if cut.violation(x) > CUT_EPS {
                found.insert(cut);
            }
        }
    }
    found.into_iter().collect()
}

/// Dense Edmonds–Karp max-flow for the small graphs handled here.
struct FlowNetwork {
    cap: Vec<Vec<f64>>,
}

impl FlowNetwork {
    fn new(n: usize) -> Self {
        FlowNetwork { cap: vec![vec![0.0; n]; n] }
    }

    fn add(&mut self, a: usize, b: usize, c: f64) {
        self.cap[a][b] += c;
    }

    fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let n = self.cap.len();
        let mut total = 0.0;
        loop {
            let mut prev = vec![usize::MAX; n];
            prev[s] = s;
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for v in 0..n {
                    if prev[v] == usize::MAX && self.cap[u][v] > 1e-12 {
                        prev[v] = u;
                        queue.push_back(v);
                    }
                }
            }
            if prev[t] == usize::MAX {
                return total;
            }
            let mut push = f64::INFINITY;
            let mut v = t;
            while v != s {
                push = push.min(self.cap[prev[v]][v]);
                v = prev[v];
            }
            let mut v = t;
            while v != s {
                let u = prev[v];
                self.cap[u][v] -= push;
                self.cap[v][u] += push;
                v = u;
            }
            total += push;
        }
    }

    fn source_side(&self, s: usize) -> Vec<bool> {
        let n = self.cap.len();
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if !seen[v] && self.cap[u][v] > 1e-12 {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::charging::ChargingFunction;
    use crate::instance::{EvParams, Node, TechId};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn inst() -> Instance {
        let f = ChargingFunction::new("m", vec![(0.0, 0.0), (16.0, 1.0)]).unwrap();
        let funcs: BTreeMap<TechId, _> = [("m".into(), f)].into_iter().collect();
        let nodes = vec![
            Node::depot(0.0, 0.0),
            Node::customer(1, 0.0, 0.0, 0.0),
            Node::customer(2, 100.0, 0.0, 0.0),
            Node::station(3, 140.0, 0.0, "m"),
            Node::customer(4, 100.0, 40.0, 0.0),
        ];
        let ev = EvParams {
            battery_capacity: 16.0,
            max_route_duration: 10.0,
            consumption_rate: 0.125,
            speed: 40.0,
        };
        Instance::new("p", nodes, ev, 1, 3, funcs).unwrap()
    }

    #[test]
    fn escape_energies() {
        let inst = inst();
        assert_eq!(min_escape_energy(&inst, 1), 0.0);
        assert!((min_escape_energy(&inst, 2) - 5.0).abs() < 1e-12);
        // brute force over every escape target
        for &c in inst.customers() {
            let mut best = inst.e(c, 0);
            for &s in inst.stations() {
                best = best.min(inst.e(c, s));
            }
            assert_eq!(min_escape_energy(&inst, c), best);
        }
    }

    #[test]
    fn infeasible_arc_rule() {
        let inst = inst();
        let arcs = infeasible_arcs(&inst);
        // ē_2 = 5, e_24 = 5, ē_4 = e(4,3) = 7.07: 17.07 > 16
        assert!(arcs.contains(&(2, 4)) && arcs.contains(&(4, 2)));
        // ē_1 = 0, e_12 = 12.5, ē_2 = 5: 17.5 > 16
        assert!(arcs.contains(&(1, 2)));
        assert!(arcs.iter().all(|&(i, j)| inst.is_customer(i) && inst.is_customer(j)));
    }

    #[test]
    fn boundary_sum_stays_feasible() {
        let f = ChargingFunction::new("m", vec![(0.0, 0.0), (16.0, 1.0)]).unwrap();
        let funcs: BTreeMap<TechId, _> = [("m".into(), f)].into_iter().collect();
        let nodes = vec![
            Node::depot(0.0, 0.0),
            Node::customer(1, 32.0, 0.0, 0.0),
            Node::customer(2, 96.0, 0.0, 0.0),
            Node::station(3, 128.0, 0.0, "m"),
        ];
        let ev = EvParams {
            battery_capacity: 16.0,
            max_route_duration: 10.0,
            consumption_rate: 0.125,
            speed: 40.0,
        };
        let inst = Instance::new("b", nodes, ev, 1, 1, funcs).unwrap();
        // 4 + 8 + 4 = 16
        assert!(infeasible_arcs(&inst).is_empty());
    }

    #[test]
    fn station_floor_at_depot_is_zero() {
        let f = ChargingFunction::new("m", vec![(0.0, 0.0), (16.0, 1.0)]).unwrap();
        let funcs: BTreeMap<TechId, _> = [("m".into(), f)].into_iter().collect();
        let nodes = vec![
            Node::depot(0.0, 0.0),
            Node::customer(1, 40.0, 0.0, 0.0),
            Node::station(2, 0.0, 0.0, "m"),
        ];
        let ev = EvParams {
            battery_capacity: 16.0,
            max_route_duration: 10.0,
            consumption_rate: 0.125,
            speed: 40.0,
        };
        let inst = Instance::new("b", nodes, ev, 1, 1, funcs).unwrap();
        let floors = soc_floors(&inst);
        assert_eq!(floors[2], 0.0);
        assert!((floors[1] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn integral_two_cycle() {
        let x: BTreeMap<_, _> = [((1, 2), 1.0), ((2, 1), 1.0), ((0, 3), 1.0), ((3, 0), 1.0)]
            .into_iter()
            .collect();
        let cuts = separate_sec(4, &x);
        assert_eq!(cuts, vec![SubtourCut { nodes: vec![1, 2] }]);
        assert_eq!(cuts[0].rhs(), 1.0);
    }

    #[test]
    fn depot_tour_has_no_cut() {
        let x: BTreeMap<_, _> = [((0, 1), 1.0), ((1, 2), 1.0), ((2, 3), 1.0), ((3, 0), 1.0)]
            .into_iter()
            .collect();
        assert!(separate_sec(4, &x).is_empty());
    }

    /// Exhaustive scan over all depot-free node subsets.
    pub(crate) fn best_subset_violation(n: usize, x: &BTreeMap<(usize, usize), f64>) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for mask in 1u32..(1 << (n - 1)) {
            let nodes: Vec<usize> = (1..n).filter(|i| mask & (1 << (i - 1)) != 0).collect();
            if nodes.len() >= 2 {
                best = best.max(SubtourCut { nodes }.violation(x));
            }
        }
        best
    }

    pub(crate) fn random_fractional(rng: &mut ChaCha8Rng, n: usize) -> BTreeMap<(usize, usize), f64> {
        let mut x = BTreeMap::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && rng.gen_bool(0.35) {
                    let v: f64 = if rng.gen_bool(0.3) { 1.0 } else { rng.gen_range(0.0..1.0) };
                    x.insert((i, j), (v * 100.0).round() / 100.0);
                }
            }
        }
        x
    }

    #[test]
    fn fractional_separation_matches_exhaustive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut violated_seen = 0;
        for _ in 0..300 {
            let x = random_fractional(&mut rng, 6);
            let cuts = separate_sec(6, &x);
            for c in &cuts {
                assert!(c.violation(&x) > 1e-6);
                assert!(!c.nodes.contains(&0) && c.nodes.len() >= 2);
            }
            if best_subset_violation(6, &x) > 1e-6 {
                violated_seen += 1;
                assert!(!cuts.is_empty(), "missed cut for {x:?}");
            }
        }
        assert!(violated_seen > 20);
    }
}
