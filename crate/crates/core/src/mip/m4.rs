//! Recharge-path formulation over a given set of station paths.

use std::collections::BTreeMap;

use crate::instance::Instance;
use crate::paths::{PathSet, RechargePath};

use super::blocks::{charge_block, ChargeVars};
use super::{Formulation, MipModel, Sense, VarId, VarKind};

/// Key of path `p` between its end nodes, e.g. `0,3,p5.7`.
pub(super) fn path_key(p: &RechargePath) -> String {
    format!("{},{},{}", p.from, p.to, p.label())
}

struct PathVars<'a> {
    p: &'a RechargePath,
    key: String,
    x: VarId,
    tau: VarId,
    q: VarId,
    delta: Option<VarId>,
    blocks: Vec<ChargeVars>,
}

/// Builds the recharge-path model over `paths`. Pairs without paths are
/// simply unusable.
pub fn build_m4(inst: &Instance, paths: &PathSet) -> MipModel {
    let mut m = MipModel::new(format!("{}-m4", inst.name), Formulation::M4);
    let q_max = inst.q_max();
    let t_max = inst.t_max();
    let mut y = BTreeMap::new();
    for &s in inst.stations() {
        y.insert(s, m.add_var(format!("y[{s}]"), VarKind::Binary, 0.0, 1.0));
    }
    let mut pv: Vec<PathVars> = Vec::new();
    for p in paths.values().flatten() {
        if p.from == p.to {
            continue;
        }
        let key = path_key(p);
        let x = m.add_var(format!("x[{key}]"), VarKind::Binary, 0.0, 1.0);
        let tau = m.add_var(format!("tau[{key}]"), VarKind::Continuous, 0.0, t_max);
        let q = m.add_var(format!("q[{key}]"), VarKind::Continuous, 0.0, q_max);
        let mut blocks = Vec::new();
        let mut delta = None;
        if !p.is_direct() {
            let t_bar: f64 = p
                .stations
                .iter()
                .map(|&s| inst.station_function(s).max_charge_duration())
                .sum();
            for (pos, &s) in p.stations.iter().enumerate() {
                let f = inst.station_function(s);
                blocks.push(charge_block(&mut m, &format!("{key},{}", pos + 1), f, q_max, 103, &[x]));
            }
            let dl = m.add_var(format!("delta[{key}]"), VarKind::Continuous, 0.0, t_bar);
            let mut terms = vec![(dl, 1.0)];
            for b in &blocks {
                terms.push((b.d, -1.0));
                terms.push((b.s, 1.0));
            }
            m.add_row(format!("c113[{key}]"), terms, Sense::Eq, 0.0);
            m.add_row(
                format!("c100[{key}]"),
                vec![(dl, 1.0), (x, -t_bar)],
                Sense::Le,
                0.0,
            );
            delta = Some(dl);
        }
        pv.push(PathVars { p, key, x, tau, q, delta, blocks });
    }

    let mut obj = Vec::new();
    for v in &pv {
        obj.push((v.x, v.p.ct));
        if let Some(dl) = v.delta {
            obj.push((dl, 1.0));
        }
    }
    m.set_objective(obj);

    let co: Vec<usize> = std::iter::once(0).chain(inst.customers().iter().copied()).collect();
    for &i in inst.customers() {
        let terms = pv.iter().filter(|v| v.p.from == i).map(|v| (v.x, 1.0)).collect();
        m.add_row(format!("c91[{i}]"), terms, Sense::Eq, 1.0);
    }
    for &i in &co {
        let mut terms: Vec<(VarId, f64)> = pv.iter().filter(|v| v.p.from == i).map(|v| (v.x, 1.0)).collect();
        terms.extend(pv.iter().filter(|v| v.p.to == i).map(|v| (v.x, -1.0)));
        m.add_row(format!("c92[{i}]"), terms, Sense::Eq, 0.0);
    }
    for v in &pv {
        let p = v.p;
        if p.from == 0 {
            m.add_row(
                format!("c93[{}]", v.key),
                vec![(v.q, 1.0), (v.x, -q_max)],
                Sense::Eq,
                0.0,
            );
        }
        if let Some(first) = v.blocks.first() {
            let e_first = inst.e(p.from, p.stations[0]);
            if p.from == 0 {
                m.add_row(
                    format!("c94[{}]", v.key),
                    vec![(first.qp, 1.0), (v.x, -(q_max - e_first))],
                    Sense::Eq,
                    0.0,
                );
            } else {
                m.add_row(
                    format!("c95[{}]", v.key),
                    vec![(first.qp, 1.0), (v.q, -1.0), (v.x, e_first)],
                    Sense::Eq,
                    0.0,
                );
            }
        }
        for pos in 1..v.blocks.len() {
            let e_hop = inst.e(p.stations[pos - 1], p.stations[pos]);
            m.add_row(
                format!("c96[{},{}]", v.key, pos + 1),
                vec![(v.blocks[pos].qp, 1.0), (v.blocks[pos - 1].qm, -1.0), (v.x, e_hop)],
                Sense::Eq,
                0.0,
            );
        }
    }
    for &i in inst.customers() {
        let mut terms: Vec<(VarId, f64)> = pv.iter().filter(|v| v.p.from == i).map(|v| (v.q, 1.0)).collect();
        for v in pv.iter().filter(|v| v.p.to == i) {
            terms.push((v.q, -1.0));
            terms.push((v.x, v.p.ce));
            for b in &v.blocks {
                terms.push((b.qm, -1.0));
                terms.push((b.qp, 1.0));
            }
        }
        m.add_row(format!("c97[{i}]"), terms, Sense::Eq, 0.0);
    }
    for v in &pv {
        m.add_row(
            format!("c98[{}]", v.key),
            vec![(v.q, 1.0), (v.x, -q_max)],
            Sense::Le,
            0.0,
        );
        for (pos, b) in v.blocks.iter().enumerate() {
            m.add_row(
                format!("c99[{},{}]", v.key, pos + 1),
                vec![(b.qp, 1.0), (v.x, -q_max)],
                Sense::Le,
                0.0,
            );
        }
    }
    for v in pv.iter().filter(|v| v.p.to == 0 && v.p.from != 0) {
        let mut terms = vec![(v.q, 1.0), (v.x, -v.p.ce)];
        for b in &v.blocks {
            terms.push((b.qm, 1.0));
            terms.push((b.qp, -1.0));
        }
        m.add_row(format!("c101[{}]", v.key), terms, Sense::Ge, 0.0);
    }
    for v in &pv {
        for &h in &v.p.stations {
            m.add_row(
                format!("c102[{},{h}]", v.key),
                vec![(v.q, 1.0), (y[&h], -q_max)],
                Sense::Le,
                0.0,
            );
        }
    }
    for v in pv.iter().filter(|v| v.p.from == 0) {
        m.add_row(format!("c114[{}]", v.key), vec![(v.tau, 1.0)], Sense::Eq, 0.0);
    }
    for &i in inst.customers() {
        let mut terms: Vec<(VarId, f64)> = pv.iter().filter(|v| v.p.from == i).map(|v| (v.tau, 1.0)).collect();
        for v in pv.iter().filter(|v| v.p.to == i) {
            terms.push((v.tau, -1.0));
            terms.push((v.x, -v.p.ct));
            if let Some(dl) = v.delta {
                terms.push((dl, -1.0));
            }
        }
        m.add_row(format!("c115[{i}]"), terms, Sense::Eq, inst.service_time(i));
    }
    for v in &pv {
        m.add_row(
            format!("c116[{}]", v.key),
            vec![(v.tau, 1.0), (v.x, -t_max)],
            Sense::Le,
            0.0,
        );
    }
    for v in pv.iter().filter(|v| v.p.to == 0 && v.p.from != 0) {
        let mut terms = vec![(v.tau, 1.0), (v.x, v.p.ct - t_max)];
        if let Some(dl) = v.delta {
            terms.push((dl, 1.0));
        }
        m.add_row(format!("c117[{}]", v.key), terms, Sense::Le, 0.0);
    }
    for v in &pv {
        for &h in &v.p.stations {
            m.add_row(
                format!("c118[{},{h}]", v.key),
                vec![(v.x, 1.0), (y[&h], -1.0)],
                Sense::Le,
                0.0,
            );
        }
    }
    let ys: Vec<(VarId, f64)> = y.values().map(|&v| (v, 1.0)).collect();
    m.add_row("c119", ys, Sense::Le, inst.max_stations() as f64);
    let out: Vec<(VarId, f64)> = pv.iter().filter(|v| v.p.from == 0).map(|v| (v.x, 1.0)).collect();
    m.add_row("c120", out, Sense::Le, inst.max_routes() as f64);
    m
}
