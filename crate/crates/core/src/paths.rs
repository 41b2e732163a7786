//! Recharge paths between non-station nodes and their dominance pruning.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::charging::ChargingFunction;
use crate::instance::{Instance, TechId};

/// Ordered sequence of distinct stations between two non-station nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RechargePath {
    pub from: usize,
    pub to: usize,
    /// Stations in visiting order; empty for the direct arc.
    pub stations: Vec<usize>,
    /// Total travel time (h).
    pub ct: f64,
    /// Total travel energy (kWh).
    pub ce: f64,
    /// Energy of the first arc.
    pub cf: f64,
    /// Energy of the last arc.
    pub cl: f64,
    /// Slowest station technology on the path (by time to full charge).
    pub sp: Option<TechId>,
}

impl RechargePath {
    pub fn new(inst: &Instance, from: usize, to: usize, stations: Vec<usize>) -> Self {
        let chain: Vec<usize> = std::iter::once(from)
            .chain(stations.iter().copied())
            .chain(std::iter::once(to))
            .collect();
        let ct = chain.windows(2).map(|w| inst.t(w[0], w[1])).sum();
        let ce = chain.windows(2).map(|w| inst.e(w[0], w[1])).sum();
        let cf = inst.e(chain[0], chain[1]);
        let cl = inst.e(chain[chain.len() - 2], chain[chain.len() - 1]);
        let sp = stations
            .iter()
            .max_by(|&&a, &&b| {
                let (fa, fb) = (inst.station_function(a), inst.station_function(b));
                fa.time_to_full()
                    .total_cmp(&fb.time_to_full())
                    .then(b.cmp(&a))
            })
            .and_then(|&s| inst.tech(s).cloned());
        RechargePath { from, to, stations, ct, ce, cf, cl, sp }
    }

    pub fn is_direct(&self) -> bool {
        self.stations.is_empty()
    }

    /// Full node chain `from, stations.., to`.
    pub fn chain(&self) -> Vec<usize> {
        let mut v = Vec::with_capacity(self.stations.len() + 2);
        v.push(self.from);
        v.extend(&self.stations);
        v.push(self.to);
        v
    }

    /// Compact label such as `p3.5` (stations 3 then 5) or `p` for the direct arc.
    pub fn label(&self) -> String {
        let s: Vec<String> = self.stations.iter().map(|s| s.to_string()).collect();
        format!("p{}", s.join("."))
    }
}

pub type PathSet = BTreeMap<(usize, usize), Vec<RechargePath>>;

/// Every path with at most `max_stations` distinct stations whose arcs each
/// need at most `Q`, for all ordered pairs of distinct depot/customer nodes.
/// Paths are in lexicographic order of their station sequences.
pub fn enumerate_paths(inst: &Instance, max_stations: usize) -> PathSet {
    let q = inst.q_max() + 1e-9;
    let ends: Vec<usize> = std::iter::once(0).chain(inst.customers().iter().copied()).collect();
    let mut out = PathSet::new();
    for &i in &ends {
        for &j in &ends {
            if i == j {
                continue;
            }
            let mut found = Vec::new();
            let mut seq = Vec::new();
            extend(inst, i, j, q, max_stations, &mut seq, &mut found);
            out.insert((i, j), found);
        }
    }
    out
}

fn extend(
    inst: &Instance,
    i: usize,
    j: usize,
    q: f64,
    max: usize,
    seq: &mut Vec<usize>,
    found: &mut Vec<RechargePath>,
) {
    let last = seq.last().copied().unwrap_or(i);
    if inst.e(last, j) <= q {
        found.push(RechargePath::new(inst, i, j, seq.clone()));
    }
    if seq.len() == max {
        return;
    }
    for &s in inst.stations() {
        if !seq.contains(&s) && inst.e(last, s) <= q {
            seq.push(s);
            extend(inst, i, j, q, max, seq, found);
            seq.pop();
        }
    }
}

/// Worst-case extra charging time and energy shortfall of a slower path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapBounds {
    pub dt_bar: f64,
    pub dq_bar: f64,
    /// Set when the SoC window of the compared path is empty.
    pub empty_window: bool,
}

/// First/last arc energies of the two compared single-station paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapWindow {
    /// First and last arc energy of the path through the slower station.
    pub cf: f64,
    pub cl: f64,
    /// First and last arc energy of the path through the faster station.
    pub cf_other: f64,
    pub cl_other: f64,
    pub q_max: f64,
}

/// Largest extra charging time of `slow` over `fast` when both paths take the
/// vehicle from entry SoC `q_i ∈ [cf_other, Q]` to exit SoC `q_j ∈ [0, Q − cl_other]`.
/// Returns `(gap, empty_window)`.
pub fn max_time_gap(slow: &ChargingFunction, fast: &ChargingFunction, w: GapWindow) -> (f64, bool) {
    let q = w.q_max;
    let (qi_lo, qi_hi) = (w.cf_other, q);
    let (qj_lo, qj_hi) = (0.0, q - w.cl_other);
    if qi_lo > qi_hi + 1e-12 || qj_hi < qj_lo - 1e-12 {
        return (0.0, true);
    }
    let value = |qi: f64, qj: f64| time_gap_at(slow, fast, &w, qi, qj);
    // lines a*qi + b*qj = c where g changes slope
    let mut lines: Vec<(f64, f64, f64)> = vec![
        (1.0, 0.0, qi_lo),
        (1.0, 0.0, qi_hi),
        (0.0, 1.0, qj_lo),
        (0.0, 1.0, qj_hi),
        (1.0, -1.0, w.cf + w.cl),
        (1.0, -1.0, w.cf_other + w.cl_other),
    ];
    for &(e, _) in slow.breakpoints() {
        lines.push((1.0, 0.0, w.cf + e));
        lines.push((0.0, 1.0, e - w.cl));
    }
    for &(e, _) in fast.breakpoints() {
        lines.push((1.0, 0.0, w.cf_other + e));
        lines.push((0.0, 1.0, e - w.cl_other));
    }
    let mut best = f64::NEG_INFINITY;
    for (k, l1) in lines.iter().enumerate() {
        for l2 in &lines[k + 1..] {
            let det = l1.0 * l2.1 - l1.1 * l2.0;
            if det.abs() < 1e-12 {
                continue;
            }
            let qi = (l1.2 * l2.1 - l1.1 * l2.2) / det;
            let qj = (l1.0 * l2.2 - l1.2 * l2.0) / det;
            if qi < qi_lo - 1e-9 || qi > qi_hi + 1e-9 || qj < qj_lo - 1e-9 || qj > qj_hi + 1e-9 {
                continue;
            }
            best = best.max(value(qi.clamp(qi_lo, qi_hi), qj.clamp(qj_lo, qj_hi)));
        }
    }
    (best, false)
}

fn time_gap_at(slow: &ChargingFunction, fast: &ChargingFunction, w: &GapWindow, qi: f64, qj: f64) -> f64 {
    let charge = |f: &ChargingFunction, a: f64, b: f64| {
        let a = a.clamp(0.0, w.q_max);
        let b = b.clamp(0.0, w.q_max);
        f.time_at_soc_unchecked(a.max(b)) - f.time_at_soc_unchecked(a)
    };
    charge(slow, qi - w.cf, qj + w.cl) - charge(fast, qi - w.cf_other, qj + w.cl_other)
}

/// Energy gained by charging for `x` hours from SoC `a`.
fn gain(f: &ChargingFunction, a: f64, x: f64) -> f64 {
    let t = (f.time_at_soc_unchecked(a) + x).min(f.time_to_full());
    f.soc_at_time_unchecked(t) - a
}

/// Largest extra energy `fast` collects over `slow` in the same charging time,
/// over entry SoC `q_i ∈ [cf_other, Q]`. Returns `(gap, empty_window)`.
pub fn max_energy_gap(slow: &ChargingFunction, fast: &ChargingFunction, w: GapWindow) -> (f64, bool) {
    let q = w.q_max;
    if w.cf_other > q + 1e-12 || w.cl_other > q + 1e-12 {
        return (0.0, true);
    }
    let value = |qi: f64, x: f64| {
        gain(fast, (qi - w.cf_other).clamp(0.0, q), x) - gain(slow, (qi - w.cf).clamp(0.0, q), x)
    };
    // strips in q_i where both entry times are linear
    let mut cuts = vec![w.cf_other, q];
    for &(e, _) in slow.breakpoints() {
        cuts.push(w.cf + e);
    }
    for &(e, _) in fast.breakpoints() {
        cuts.push(w.cf_other + e);
    }
    cuts.retain(|&c| c >= w.cf_other - 1e-12 && c <= q + 1e-12);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut best = 0.0f64;
    for strip in cuts.windows(2).map(|s| (s[0], s[1])).chain(std::iter::once((q, q))) {
        let (u, v) = strip;
        // each kink line x = c - T(a(q_i)) is affine on the strip: x = alpha + beta q_i
        let mut lines: Vec<(f64, f64)> = vec![(0.0, 0.0)];
        for (f, cf) in [(slow, w.cf), (fast, w.cf_other)] {
            let tu = f.time_at_soc_unchecked((u - cf).clamp(0.0, q));
            let tv = f.time_at_soc_unchecked((v - cf).clamp(0.0, q));
            let beta = if v > u { (tv - tu) / (v - u) } else { 0.0 };
            for &(_, tb) in f.breakpoints() {
                // x(q_i) = tb - T(q_i - cf)
                let alpha = tb - tu + beta * u;
                lines.push((alpha, -beta));
            }
        }
        let mut points: Vec<(f64, f64)> = Vec::new();
        for &(a, b) in &lines {
            points.push((u, a + b * u));
            points.push((v, a + b * v));
        }
        for (k, &(a1, b1)) in lines.iter().enumerate() {
            for &(a2, b2) in &lines[k + 1..] {
                if (b1 - b2).abs() > 1e-15 {
                    let qi = (a2 - a1) / (b1 - b2);
                    if qi >= u - 1e-12 && qi <= v + 1e-12 {
                        points.push((qi, a1 + b1 * qi));
                    }
                }
            }
        }
        for (qi, x) in points {
            if x >= -1e-12 {
                best = best.max(value(qi.clamp(u, v), x.max(0.0)));
            }
        }
    }
    (best, false)
}

#[derive(Debug, Error, PartialEq)]
pub enum DominanceError {
    #[error("paths connect different endpoints: ({0}, {1}) vs ({2}, {3})")]
    Endpoints(usize, usize, usize, usize),
}

/// Which dominance rule applied to a pair of paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DominanceCase {
    /// Single station at least as fast at every SoC.
    FasterStation,
    /// Single slower station, compensated by the gap bounds.
    SlowerStation,
    /// Multi-station paths whose stations are uniformly faster.
    UniformlyFaster,
}

/// `true` when `p` dominates `p_other` (same endpoints, both through stations).
pub fn dominates(inst: &Instance, p: &RechargePath, p_other: &RechargePath) -> Result<bool, DominanceError> {
    Ok(dominance_case(inst, p, p_other)?.is_some())
}

pub fn dominance_case(
    inst: &Instance,
    p: &RechargePath,
    p_other: &RechargePath,
) -> Result<Option<DominanceCase>, DominanceError> {
    if (p.from, p.to) != (p_other.from, p_other.to) {
        return Err(DominanceError::Endpoints(p.from, p.to, p_other.from, p_other.to));
    }
    if p.is_direct() || p_other.is_direct() || p.stations.len() != p_other.stations.len() {
        return Ok(None);
    }
    let base = p.cf < p_other.cf && p.cl < p_other.cl && p.ct < p_other.ct;
    if !base {
        return Ok(None);
    }
    if p.stations.len() == 1 {
        let f = inst.station_function(p.stations[0]);
        let g = inst.station_function(p_other.stations[0]);
        if f.is_pointwise_at_least_as_fast_as(g) {
            return Ok(Some(DominanceCase::FasterStation));
        }
        if p.ce >= p_other.ce {
            return Ok(None);
        }
        let w = GapWindow {
            cf: p.cf,
            cl: p.cl,
            cf_other: p_other.cf,
            cl_other: p_other.cl,
            q_max: inst.q_max(),
        };
        let (dt, _) = max_time_gap(f, g, w);
        let (dq, _) = max_energy_gap(f, g, w);
        if p.ct + dt < p_other.ct && p.ce + dq < p_other.ce {
            return Ok(Some(DominanceCase::SlowerStation));
        }
        return Ok(None);
    }
    let slowest_p = p
        .stations
        .iter()
        .map(|&s| inst.station_function(s).max_marginal_time())
        .fold(0.0, f64::max);
    let fastest_other = p_other
        .stations
        .iter()
        .map(|&s| inst.station_function(s).min_marginal_time())
        .fold(f64::INFINITY, f64::min);
    if slowest_p <= fastest_other && p.ce < p_other.ce {
        return Ok(Some(DominanceCase::UniformlyFaster));
    }
    Ok(None)
}

/// Path counts of one endpoint pair before and after pruning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PruneCount {
    pub from: usize,
    pub to: usize,
    pub before: usize,
    pub after: usize,
}

/// Removes dominated paths. For each station count `k = 1..=S̄`, the paths of a
/// pair are sorted by travel time and every surviving path is compared with the
/// later ones. Direct paths are never removed.
pub fn prune_dominated(inst: &Instance, paths: &PathSet) -> (PathSet, Vec<PruneCount>) {
    let mut out = PathSet::new();
    let mut counts = Vec::new();
    for (&(i, j), list) in paths {
        let mut removed = vec![false; list.len()];
        for k in 1..=inst.max_stations() {
            let mut idx: Vec<usize> = (0..list.len()).filter(|&a| list[a].stations.len() == k).collect();
            idx.sort_by(|&a, &b| {
                list[a]
                    .ct
                    .total_cmp(&list[b].ct)
                    .then_with(|| list[a].stations.cmp(&list[b].stations))
            });
            for (pos, &a) in idx.iter().enumerate() {
                if removed[a] {
                    continue;
                }
                for &b in &idx[pos + 1..] {
                    if !removed[b] && dominates(inst, &list[a], &list[b]).expect("same endpoints") {
                        removed[b] = true;
                    }
                }
            }
        }
        let kept: Vec<RechargePath> = list
            .iter()
            .zip(&removed)
            .filter(|(_, &r)| !r)
            .map(|(p, _)| p.clone())
            .collect();
        counts.push(PruneCount { from: i, to: j, before: list.len(), after: kept.len() });
        out.insert((i, j), kept);
    }
    (out, counts)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::instance::{EvParams, Node};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ev() -> EvParams {
        EvParams {
            battery_capacity: 16.0,
            max_route_duration: 10.0,
            consumption_rate: 0.125,
            speed: 40.0,
        }
    }

    fn two_station_instance(extra: Option<(f64, f64, &str)>) -> Instance {
        let fast = ChargingFunction::new("fast", vec![(0.0, 0.0), (13.0, 0.4), (16.0, 0.8)]).unwrap();
        let slow = ChargingFunction::new("slow", vec![(0.0, 0.0), (13.0, 1.3), (16.0, 2.2)]).unwrap();
        let funcs = [("fast".into(), fast), ("slow".into(), slow)].into_iter().collect();
        let mut nodes = vec![
            Node::depot(0.0, 0.0),
            Node::customer(1, 60.0, 0.0, 0.0),
            Node::customer(2, 0.0, 60.0, 0.0),
            Node::station(3, 30.0, 30.0, "slow"),
            Node::station(4, 60.0, 60.0, "fast"),
        ];
        if let Some((x, y, t)) = extra {
            nodes.push(Node::station(5, x, y, t));
        }
        let s = nodes.len() - 3;
        Instance::new("p", nodes, ev(), s, 2, funcs).unwrap()
    }

    #[test]
    fn enumeration_counts() {
        let inst = two_station_instance(None);
        let one = enumerate_paths(&inst, 1);
        assert_eq!(one.len(), 6);
        for list in one.values() {
            assert!(list.len() <= 3);
            assert_eq!(list.iter().filter(|p| p.is_direct()).count(), 1);
        }
        let two = enumerate_paths(&inst, 2);
        for (k, list) in &two {
            let extra = list.iter().filter(|p| p.stations.len() == 2).count();
            assert!(extra <= 2);
            assert_eq!(list.len() - extra, one[k].len());
        }
    }

    #[test]
    fn enumeration_matches_permutation_count() {
        // all nodes close together: every arc feasible
        let f = ChargingFunction::new("m", vec![(0.0, 0.0), (16.0, 1.0)]).unwrap();
        let funcs = [("m".into(), f)].into_iter().collect();
        let nodes = vec![
            Node::depot(0.0, 0.0),
            Node::customer(1, 1.0, 0.0, 0.0),
            Node::station(2, 0.0, 1.0, "m"),
            Node::station(3, 1.0, 1.0, "m"),
            Node::station(4, 2.0, 1.0, "m"),
        ];
        let inst = Instance::new("c", nodes, ev(), 3, 1, funcs).unwrap();
        for max in 0..=3 {
            let paths = enumerate_paths(&inst, max);
            // sum over k of 3!/(3-k)!
            let expected: usize = [1, 3, 6, 6][..=max].iter().sum();
            assert_eq!(paths[&(0, 1)].len(), expected);
            let seqs: Vec<&Vec<usize>> = paths[&(0, 1)].iter().map(|p| &p.stations).collect();
            let mut sorted = seqs.clone();
            sorted.sort();
            assert_eq!(seqs, sorted);
        }
    }

    #[test]
    fn path_summaries() {
        let inst = two_station_instance(None);
        let p = RechargePath::new(&inst, 1, 2, vec![3, 4]);
        assert!((p.ce - (inst.e(1, 3) + inst.e(3, 4) + inst.e(4, 2))).abs() < 1e-12);
        assert_eq!(p.cf, inst.e(1, 3));
        assert_eq!(p.cl, inst.e(4, 2));
        assert_eq!(p.sp, Some("slow".into()));
        let d = RechargePath::new(&inst, 1, 2, vec![]);
        assert_eq!((d.cf, d.cl), (d.ce, d.ce));
        assert_eq!(p.label(), "p3.4");
    }

    fn linear(label: &str, rate: f64) -> ChargingFunction {
        ChargingFunction::new(label, vec![(0.0, 0.0), (16.0, 16.0 / rate)]).unwrap()
    }

    fn window(cf: f64, cl: f64, cf_other: f64, cl_other: f64) -> GapWindow {
        GapWindow { cf, cl, cf_other, cl_other, q_max: 16.0 }
    }

    #[test]
    fn gaps_of_identical_functions_are_zero() {
        let f = ChargingFunction::new("m", vec![(0.0, 0.0), (10.0, 0.5), (16.0, 1.25)]).unwrap();
        let w = window(2.0, 2.0, 2.0, 2.0);
        assert!(max_time_gap(&f, &f, w).0.abs() < 1e-12);
        assert!(max_energy_gap(&f, &f, w).0.abs() < 1e-12);
    }

    #[test]
    fn linear_pair_closed_forms() {
        let (r, w) = (20.0, window(0.0, 0.0, 0.0, 0.0));
        let slow = linear("s", r / 2.0);
        let fast = linear("f", r);
        assert!((max_time_gap(&slow, &fast, w).0 - 16.0 / r).abs() < 1e-12);
        // over the fast station's full-charge window W = 16 / r
        let big_w = 16.0 / r;
        assert!((max_energy_gap(&slow, &fast, w).0 - (r - r / 2.0) * big_w).abs() < 1e-12);
    }

    #[test]
    fn empty_window_is_flagged() {
        let f = linear("f", 20.0);
        assert_eq!(max_time_gap(&f, &f, window(1.0, 1.0, 17.0, 1.0)), (0.0, true));
        assert_eq!(max_energy_gap(&f, &f, window(1.0, 1.0, 17.0, 1.0)), (0.0, true));
    }

    /// Concave function on a lattice: energies in steps of 0.16 kWh and
    /// marginal times of 1, 2 or 3 sixteenths of an hour per kWh. Every vertex
    /// of the time-gap arrangement then lies on the 0.16 kWh grid and every
    /// vertex of the energy-gap arrangement on the (0.08 kWh, 0.005 h) grid.
    pub(crate) fn lattice_function(rng: &mut ChaCha8Rng, label: &str) -> ChargingFunction {
        let mut cuts = [rng.gen_range(10..60), rng.gen_range(60..95)];
        cuts.sort();
        let mut slopes = [rng.gen_range(1..4), rng.gen_range(1..4), rng.gen_range(1..4)];
        slopes.sort();
        let e = [0.0, cuts[0] as f64 * 0.16, cuts[1] as f64 * 0.16, 16.0];
        let mut bp = vec![(0.0, 0.0)];
        let mut t = 0.0;
        for k in 0..3 {
            t += (e[k + 1] - e[k]) * slopes[k] as f64 / 16.0;
            bp.push((e[k + 1], t));
        }
        ChargingFunction::new(label, bp).unwrap()
    }

    pub(crate) fn grid_time_gap(slow: &ChargingFunction, fast: &ChargingFunction, w: GapWindow) -> f64 {
        let mut best = f64::NEG_INFINITY;
        let qi_steps = ((w.q_max - w.cf_other) / 0.16).round() as usize;
        let qj_steps = ((w.q_max - w.cl_other) / 0.16).round() as usize;
        for a in 0..=qi_steps {
            let qi = w.cf_other + a as f64 * 0.16;
            for b in 0..=qj_steps {
                best = best.max(time_gap_at(slow, fast, &w, qi, b as f64 * 0.16));
            }
        }
        best
    }

    pub(crate) fn grid_energy_gap(slow: &ChargingFunction, fast: &ChargingFunction, w: GapWindow) -> f64 {
        let mut best = 0.0f64;
        let x_max = slow.time_to_full().max(fast.time_to_full());
        let qi_steps = ((w.q_max - w.cf_other) / 0.08).round() as usize;
        let x_steps = (x_max / 0.005).round() as usize;
        for a in 0..=qi_steps {
            let qi = w.cf_other + a as f64 * 0.08;
            for b in 0..=x_steps {
                let x = b as f64 * 0.005;
                let v = gain(fast, (qi - w.cf_other).clamp(0.0, 16.0), x)
                    - gain(slow, (qi - w.cf).clamp(0.0, 16.0), x);
                best = best.max(v);
            }
        }
        best
    }

    pub(crate) fn lattice_window(rng: &mut ChaCha8Rng) -> GapWindow {
        let cf = rng.gen_range(0..20) as f64 * 0.16;
        let cl = rng.gen_range(0..20) as f64 * 0.16;
        GapWindow {
            cf,
            cl,
            cf_other: cf + rng.gen_range(1..10) as f64 * 0.16,
            cl_other: cl + rng.gen_range(1..10) as f64 * 0.16,
            q_max: 16.0,
        }
    }

    #[test]
    fn gaps_match_grid_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let slow = lattice_function(&mut rng, "s");
            let fast = lattice_function(&mut rng, "f");
            let w = lattice_window(&mut rng);
            let (dt, _) = max_time_gap(&slow, &fast, w);
            assert!((dt - grid_time_gap(&slow, &fast, w)).abs() < 1e-6);
            let (dq, _) = max_energy_gap(&slow, &fast, w);
            assert!((dq - grid_energy_gap(&slow, &fast, w)).abs() < 1e-6);
        }
    }

    #[test]
    fn dominance_is_irreflexive() {
        let inst = two_station_instance(None);
        for list in enumerate_paths(&inst, 2).values() {
            for p in list {
                assert!(!dominates(&inst, p, p).unwrap());
            }
        }
    }

    #[test]
    fn faster_closer_station_prunes_slower() {
        // fast station just below the slow one, closer to both the depot and customer 1
        let inst = two_station_instance(Some((30.0, 29.0, "fast")));
        let p_fast = RechargePath::new(&inst, 0, 1, vec![5]);
        let p_slow = RechargePath::new(&inst, 0, 1, vec![3]);
        assert_eq!(
            dominance_case(&inst, &p_fast, &p_slow).unwrap(),
            Some(DominanceCase::FasterStation)
        );
        assert!(!dominates(&inst, &p_slow, &p_fast).unwrap());
        let (pruned, counts) = prune_dominated(&inst, &enumerate_paths(&inst, 1));
        assert!(!pruned[&(0, 1)].iter().any(|p| p.stations == vec![3]));
        assert!(pruned.values().all(|l| l.iter().filter(|p| p.is_direct()).count() <= 1));
        assert!(counts.iter().all(|c| c.after <= c.before));
    }

    #[test]
    fn mismatched_endpoints_are_rejected() {
        let inst = two_station_instance(None);
        let a = RechargePath::new(&inst, 1, 2, vec![3]);
        let b = RechargePath::new(&inst, 2, 1, vec![3]);
        assert!(dominates(&inst, &a, &b).is_err());
    }

    #[test]
    fn single_station_prunes_nothing() {
        let fast = ChargingFunction::new("fast", vec![(0.0, 0.0), (16.0, 0.8)]).unwrap();
        let funcs = [("fast".into(), fast)].into_iter().collect();
        let nodes = vec![
            Node::depot(0.0, 0.0),
            Node::customer(1, 60.0, 0.0, 0.0),
            Node::customer(2, 0.0, 60.0, 0.0),
            Node::station(3, 30.0, 30.0, "fast"),
        ];
        let inst = Instance::new("one", nodes, ev(), 1, 2, funcs).unwrap();
        let all = enumerate_paths(&inst, 1);
        let (pruned, _) = prune_dominated(&inst, &all);
        assert_eq!(pruned, all);
    }

    proptest::proptest! {
        #[test]
        fn dominance_is_asymmetric(seed in 0u64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let fast = lattice_function(&mut rng, "fast");
            let slow = lattice_function(&mut rng, "slow");
            let funcs = [("fast".into(), fast), ("slow".into(), slow)].into_iter().collect();
            let mut nodes = vec![Node::depot(60.0, 60.0)];
            for i in 1..=2 {
                nodes.push(Node::customer(i, rng.gen_range(0.0..120.0), rng.gen_range(0.0..120.0), 0.0));
            }
            for i in 3..=5 {
                let tech = if rng.gen_bool(0.5) { "fast" } else { "slow" };
                nodes.push(Node::station(i, rng.gen_range(0.0..120.0), rng.gen_range(0.0..120.0), tech));
            }
            let inst = Instance::new("a", nodes, ev(), 3, 2, funcs).unwrap();
            for list in enumerate_paths(&inst, 2).values() {
                for p in list {
                    for p2 in list {
                        let ab = dominates(&inst, p, p2).unwrap();
                        let ba = dominates(&inst, p2, p).unwrap();
                        proptest::prop_assert!(!(ab && ba));
                    }
                }
            }
        }
    }
}
