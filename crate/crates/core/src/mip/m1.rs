//! Node-copy formulations: node-based tracking and arc-based tracking.

use crate::instance::Instance;
use crate::preprocess::{infeasible_arcs, min_escape_energy, station_escape_energy};

use super::blocks::charge_block;
use super::{ArcGraph, Formulation, MipModel, Sense, VarId, VarKind};

/// A vertex of the copy graph: depot, customer, or copy `copy` of a station.
#[derive(Debug, Clone)]
pub(super) struct CopyNode {
    pub label: String,
    pub orig: usize,
    pub copy: usize,
}

/// Label of copy `r` of station `s`: `5`, `5c1`, `5c2`, ...
pub(super) fn copy_label(s: usize, r: usize) -> String {
    if r == 0 {
        s.to_string()
    } else {
        format!("{s}c{r}")
    }
}

/// Depot, customers, then `beta + 1` copies of each station.
pub(super) fn copy_nodes(inst: &Instance, beta: usize) -> Vec<CopyNode> {
    let mut v = vec![CopyNode { label: "0".into(), orig: 0, copy: 0 }];
    for &c in inst.customers() {
        v.push(CopyNode { label: c.to_string(), orig: c, copy: 0 });
    }
    for &s in inst.stations() {
        for r in 0..=beta {
            v.push(CopyNode { label: copy_label(s, r), orig: s, copy: r });
        }
    }
    v
}

/// Whether the copy graph has arc `a -> b`: no loops and no arcs between
/// copies of one station.
pub(super) fn has_arc(nodes: &[CopyNode], a: usize, b: usize) -> bool {
    a != b && nodes[a].orig != nodes[b].orig
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Tracking {
    Node,
    Arc,
}

/// Node-based model with `beta` extra copies of every station. With
/// `strengthen`, adds infeasible-arc rows `c36`, customer SoC floors `c37`
/// and station departure floors `c38`.
pub fn build_m1(inst: &Instance, beta: usize, strengthen: bool) -> MipModel {
    build(inst, beta, strengthen, Tracking::Node)
}

/// Arc-based variant of [`build_m1`]: time and SoC live on arcs.
pub fn build_m2(inst: &Instance, beta: usize, strengthen: bool) -> MipModel {
    build(inst, beta, strengthen, Tracking::Arc)
}

fn build(inst: &Instance, beta: usize, strengthen: bool, tracking: Tracking) -> MipModel {
    let (formulation, tag) = match tracking {
        Tracking::Node => (Formulation::M1 { beta }, "m1"),
        Tracking::Arc => (Formulation::M2 { beta }, "m2"),
    };
    let mut m = MipModel::new(format!("{}-{tag}-b{beta}", inst.name), formulation);
    let nodes = copy_nodes(inst, beta);
    let nv = nodes.len();
    let q_max = inst.q_max();
    let t_max = inst.t_max();
    let is_cust = |a: usize| inst.is_customer(nodes[a].orig);
    let is_stat = |a: usize| inst.is_station(nodes[a].orig);
    let t = |a: usize, b: usize| inst.t(nodes[a].orig, nodes[b].orig);
    let e = |a: usize, b: usize| inst.e(nodes[a].orig, nodes[b].orig);
    let sv = |a: usize| inst.service_time(nodes[a].orig);
    let l = |a: usize| nodes[a].label.clone();

    let mut x: Vec<Vec<Option<VarId>>> = vec![vec![None; nv]; nv];
    let mut arcs = Vec::new();
    for a in 0..nv {
        for b in 0..nv {
            if has_arc(&nodes, a, b) {
                let id = m.add_var(format!("x[{},{}]", l(a), l(b)), VarKind::Binary, 0.0, 1.0);
                x[a][b] = Some(id);
                arcs.push((a, b, id));
            }
        }
    }
    let out_arcs = |a: usize| -> Vec<(usize, VarId)> {
        (0..nv).filter_map(|b| x[a][b].map(|v| (b, v))).collect()
    };
    let in_arcs = |b: usize| -> Vec<(usize, VarId)> {
        (0..nv).filter_map(|a| x[a][b].map(|v| (a, v))).collect()
    };
    let stations: Vec<usize> = (0..nv).filter(|&a| is_stat(a)).collect();
    let mut y = vec![None; nv];
    for &a in &stations {
        y[a] = Some(m.add_var(format!("y[{}]", l(a)), VarKind::Binary, 0.0, 1.0));
    }

    let mut tau = vec![None; nv];
    let mut q = vec![None; nv];
    let mut tau_arc: Vec<Vec<Option<VarId>>> = vec![vec![None; nv]; nv];
    let mut q_arc: Vec<Vec<Option<VarId>>> = vec![vec![None; nv]; nv];
    match tracking {
        Tracking::Node => {
            for a in 0..nv {
                tau[a] = Some(m.add_var(format!("tau[{}]", l(a)), VarKind::Continuous, 0.0, t_max));
                q[a] = Some(m.add_var(format!("q[{}]", l(a)), VarKind::Continuous, 0.0, q_max));
            }
        }
        Tracking::Arc => {
            for &(a, b, _) in &arcs {
                tau_arc[a][b] = Some(m.add_var(
                    format!("tau[{},{}]", l(a), l(b)),
                    VarKind::Continuous,
                    0.0,
                    t_max,
                ));
                q_arc[a][b] = Some(m.add_var(
                    format!("q[{},{}]", l(a), l(b)),
                    VarKind::Continuous,
                    0.0,
                    q_max,
                ));
            }
        }
    }

    let mut delta = vec![None; nv];
    let mut qp = vec![None; nv];
    let mut qm = vec![None; nv];
    for &a in &stations {
        let f = inst.station_function(nodes[a].orig);
        let block = charge_block(&mut m, &l(a), f, q_max, 10, &[]);
        let dl = m.add_var(format!("delta[{}]", l(a)), VarKind::Continuous, 0.0, f.time_to_full());
        m.add_row(
            format!("c20[{}]", l(a)),
            vec![(dl, 1.0), (block.d, -1.0), (block.s, 1.0)],
            Sense::Eq,
            0.0,
        );
        delta[a] = Some(dl);
        qp[a] = Some(block.qp);
        qm[a] = Some(block.qm);
    }

    let mut obj: Vec<(VarId, f64)> = arcs.iter().map(|&(a, b, v)| (v, t(a, b))).collect();
    obj.extend(stations.iter().map(|&a| (delta[a].unwrap(), 1.0)));
    m.set_objective(obj);

    for a in 0..nv {
        let out: Vec<(VarId, f64)> = out_arcs(a).into_iter().map(|(_, v)| (v, 1.0)).collect();
        if is_cust(a) {
            m.add_row(format!("c2[{}]", l(a)), out, Sense::Eq, 1.0);
        } else if is_stat(a) {
            m.add_row(format!("c3[{}]", l(a)), out, Sense::Le, 1.0);
        }
    }
    for a in 0..nv {
        let mut terms: Vec<(VarId, f64)> = out_arcs(a).into_iter().map(|(_, v)| (v, 1.0)).collect();
        terms.extend(in_arcs(a).into_iter().map(|(_, v)| (v, -1.0)));
        m.add_row(format!("c4[{}]", l(a)), terms, Sense::Eq, 0.0);
    }

    match tracking {
        Tracking::Node => {
            let q = |a: usize| q[a].unwrap();
            let tau = |a: usize| tau[a].unwrap();
            for &(a, b, xv) in &arcs {
                if is_cust(b) {
                    m.add_row(
                        format!("c5[{},{}]", l(a), l(b)),
                        vec![(q(b), 1.0), (q(a), -1.0), (xv, e(a, b) + q_max)],
                        Sense::Le,
                        q_max,
                    );
                } else if is_stat(b) {
                    m.add_row(
                        format!("c6[{},{}]", l(a), l(b)),
                        vec![(qp[b].unwrap(), 1.0), (q(a), -1.0), (xv, e(a, b) + q_max)],
                        Sense::Le,
                        q_max,
                    );
                }
            }
            for a in 1..nv {
                if let Some(xv) = x[a][0] {
                    m.add_row(
                        format!("c7[{}]", l(a)),
                        vec![(q(a), 1.0), (xv, -e(a, 0))],
                        Sense::Ge,
                        0.0,
                    );
                }
            }
            m.add_row("c8", vec![(q(0), 1.0)], Sense::Eq, q_max);
            for &a in &stations {
                m.add_row(
                    format!("c9[{}]", l(a)),
                    vec![(q(a), 1.0), (qm[a].unwrap(), -1.0)],
                    Sense::Eq,
                    0.0,
                );
            }
            for &(a, b, xv) in &arcs {
                if is_cust(b) {
                    m.add_row(
                        format!("c21[{},{}]", l(a), l(b)),
                        vec![(tau(b), 1.0), (tau(a), -1.0), (xv, -(t(a, b) + sv(b) + t_max))],
                        Sense::Ge,
                        -t_max,
                    );
                } else if is_stat(b) {
                    m.add_row(
                        format!("c22[{},{}]", l(a), l(b)),
                        vec![
                            (tau(b), 1.0),
                            (tau(a), -1.0),
                            (delta[b].unwrap(), -1.0),
                            (xv, -(t(a, b) + t_max)),
                        ],
                        Sense::Ge,
                        -t_max,
                    );
                }
            }
            for a in 1..nv {
                m.add_row(format!("c23[{}]", l(a)), vec![(tau(a), 1.0)], Sense::Le, t_max - t(a, 0));
            }
            m.add_row("c24", vec![(tau(0), 1.0)], Sense::Le, t_max);
        }
        Tracking::Arc => {
            let qa = |a: usize, b: usize| q_arc[a][b].unwrap();
            let ta = |a: usize, b: usize| tau_arc[a][b].unwrap();
            for a in 0..nv {
                if is_cust(a) {
                    let mut terms: Vec<(VarId, f64)> =
                        out_arcs(a).into_iter().map(|(b, _)| (qa(a, b), 1.0)).collect();
                    for (g, xv) in in_arcs(a) {
                        terms.push((qa(g, a), -1.0));
                        terms.push((xv, e(g, a)));
                    }
                    m.add_row(format!("c41[{}]", l(a)), terms, Sense::Eq, 0.0);
                }
            }
            for &a in &stations {
                let mut terms: Vec<(VarId, f64)> =
                    out_arcs(a).into_iter().map(|(b, _)| (qa(a, b), 1.0)).collect();
                terms.push((qm[a].unwrap(), -1.0));
                m.add_row(format!("c42[{}]", l(a)), terms, Sense::Eq, 0.0);
            }
            for &a in &stations {
                let mut terms = vec![(qp[a].unwrap(), 1.0)];
                for (g, xv) in in_arcs(a) {
                    terms.push((qa(g, a), -1.0));
                    terms.push((xv, e(g, a)));
                }
                m.add_row(format!("c43[{}]", l(a)), terms, Sense::Eq, 0.0);
            }
            for (b, xv) in out_arcs(0) {
                m.add_row(
                    format!("c44[{}]", l(b)),
                    vec![(qa(0, b), 1.0), (xv, -q_max)],
                    Sense::Eq,
                    0.0,
                );
            }
            for &(a, b, xv) in &arcs {
                m.add_row(
                    format!("c45[{},{}]", l(a), l(b)),
                    vec![(qa(a, b), 1.0), (xv, -q_max)],
                    Sense::Le,
                    0.0,
                );
            }
            for a in 1..nv {
                if let Some(xv) = x[a][0] {
                    m.add_row(
                        format!("c7a[{}]", l(a)),
                        vec![(qa(a, 0), 1.0), (xv, -e(a, 0))],
                        Sense::Ge,
                        0.0,
                    );
                }
            }
            for (b, _) in out_arcs(0) {
                m.add_row(format!("c46[{}]", l(b)), vec![(ta(0, b), 1.0)], Sense::Eq, 0.0);
            }
            for a in 1..nv {
                let mut terms: Vec<(VarId, f64)> =
                    out_arcs(a).into_iter().map(|(b, _)| (ta(a, b), 1.0)).collect();
                for (g, xv) in in_arcs(a) {
                    terms.push((ta(g, a), -1.0));
                    terms.push((xv, -(t(g, a) + sv(g))));
                }
                if is_stat(a) {
                    terms.push((delta[a].unwrap(), -1.0));
                }
                m.add_row(format!("c47[{}]", l(a)), terms, Sense::Eq, 0.0);
            }
            for a in 1..nv {
                let Some(xv) = x[a][0] else { continue };
                if is_stat(a) {
                    m.add_row(
                        format!("c48[{}]", l(a)),
                        vec![(ta(a, 0), 1.0), (xv, t(a, 0))],
                        Sense::Le,
                        t_max,
                    );
                } else {
                    m.add_row(
                        format!("c49[{}]", l(a)),
                        vec![(ta(a, 0), 1.0), (xv, t(a, 0) + sv(a))],
                        Sense::Le,
                        t_max,
                    );
                }
            }
            for &(a, b, xv) in &arcs {
                m.add_row(
                    format!("c50[{},{}]", l(a), l(b)),
                    vec![(ta(a, b), 1.0), (xv, -t_max)],
                    Sense::Le,
                    0.0,
                );
            }
        }
    }

    for &a in &stations {
        let ya = y[a].unwrap();
        m.add_row(
            format!("c25[{}]", l(a)),
            vec![(qm[a].unwrap(), 1.0), (qp[a].unwrap(), -1.0), (ya, -q_max)],
            Sense::Le,
            0.0,
        );
        let mut terms: Vec<(VarId, f64)> = out_arcs(a).into_iter().map(|(_, v)| (v, 1.0)).collect();
        terms.push((ya, -1.0));
        m.add_row(format!("c26[{}]", l(a)), terms, Sense::Le, 0.0);
    }
    let originals: Vec<(VarId, f64)> = stations
        .iter()
        .filter(|&&a| nodes[a].copy == 0)
        .map(|&a| (y[a].unwrap(), 1.0))
        .collect();
    m.add_row("c27", originals, Sense::Le, inst.max_stations() as f64);
    let depot_out: Vec<(VarId, f64)> = out_arcs(0).into_iter().map(|(_, v)| (v, 1.0)).collect();
    m.add_row("c28", depot_out, Sense::Le, inst.max_routes() as f64);
    for &a in &stations {
        if nodes[a].copy > 0 {
            let prev = a - 1;
            m.add_row(
                format!("c29[{},{}]", l(prev), l(a)),
                vec![(y[prev].unwrap(), 1.0), (y[a].unwrap(), -1.0)],
                Sense::Ge,
                0.0,
            );
        }
    }

    if strengthen {
        let bad = infeasible_arcs(inst);
        for &(a, b, xv) in &arcs {
            if bad.contains(&(nodes[a].orig, nodes[b].orig)) {
                m.add_row(format!("c36[{},{}]", l(a), l(b)), vec![(xv, 1.0)], Sense::Eq, 0.0);
            }
        }
        for a in 0..nv {
            if !is_cust(a) {
                continue;
            }
            let floor = min_escape_energy(inst, nodes[a].orig);
            let terms = match tracking {
                Tracking::Node => vec![(q[a].unwrap(), 1.0)],
                Tracking::Arc => out_arcs(a)
                    .into_iter()
                    .map(|(b, _)| (q_arc[a][b].unwrap(), 1.0))
                    .collect(),
            };
            m.add_row(format!("c37[{}]", l(a)), terms, Sense::Ge, floor);
        }
        for &a in &stations {
            let floor = station_escape_energy(inst, nodes[a].orig);
            m.add_row(
                format!("c38[{}]", l(a)),
                vec![(qm[a].unwrap(), 1.0), (y[a].unwrap(), -floor)],
                Sense::Ge,
                0.0,
            );
        }
    }

    m.graph = Some(ArcGraph {
        nodes: nodes.iter().map(|n| n.label.clone()).collect(),
        arcs,
    });
    m
}
