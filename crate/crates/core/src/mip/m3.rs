//! Recharge-arc formulation: a leg between two depot/customer nodes passes
//! through at most one station.

use std::collections::BTreeMap;

use crate::instance::Instance;

use super::blocks::charge_block;
use super::{Formulation, MipModel, Sense, VarId, VarKind};

/// Label of the pass-through index of a leg: a station id or `d` for none.
pub(super) fn hop_label(h: Option<usize>) -> String {
    h.map_or_else(|| "d".to_string(), |s| s.to_string())
}

struct Leg {
    i: usize,
    h: Option<usize>,
    j: usize,
    key: String,
    x: VarId,
    tau: VarId,
    q: VarId,
    qp: Option<VarId>,
    qm: Option<VarId>,
    delta: Option<VarId>,
}

/// Builds the recharge-arc model. Legs with `i = j` are omitted.
pub fn build_m3(inst: &Instance) -> MipModel {
    let mut m = MipModel::new(format!("{}-m3", inst.name), Formulation::M3);
    let q_max = inst.q_max();
    let t_max = inst.t_max();
    let co: Vec<usize> = std::iter::once(0).chain(inst.customers().iter().copied()).collect();
    let hops: Vec<Option<usize>> = std::iter::once(None)
        .chain(inst.stations().iter().map(|&s| Some(s)))
        .collect();
    let mut y = BTreeMap::new();
    for &s in inst.stations() {
        y.insert(s, m.add_var(format!("y[{s}]"), VarKind::Binary, 0.0, 1.0));
    }
    let mut legs = Vec::new();
    for &i in &co {
        for &h in &hops {
            for &j in &co {
                if i == j {
                    continue;
                }
                let key = format!("{i},{},{j}", hop_label(h));
                let x = m.add_var(format!("x[{key}]"), VarKind::Binary, 0.0, 1.0);
                let tau = m.add_var(format!("tau[{key}]"), VarKind::Continuous, 0.0, t_max);
                let q = m.add_var(format!("q[{key}]"), VarKind::Continuous, 0.0, q_max);
                let (mut qp, mut qm, mut delta) = (None, None, None);
                if let Some(s) = h {
                    let f = inst.station_function(s);
                    let block = charge_block(&mut m, &key, f, q_max, 65, &[x]);
                    let dl = m.add_var(format!("delta[{key}]"), VarKind::Continuous, 0.0, f.time_to_full());
                    m.add_row(
                        format!("c75[{key}]"),
                        vec![(dl, 1.0), (block.d, -1.0), (block.s, 1.0)],
                        Sense::Eq,
                        0.0,
                    );
                    qp = Some(block.qp);
                    qm = Some(block.qm);
                    delta = Some(dl);
                }
                legs.push(Leg { i, h, j, key, x, tau, q, qp, qm, delta });
            }
        }
    }

    let mut obj = Vec::new();
    for leg in &legs {
        match leg.h {
            None => obj.push((leg.x, inst.t(leg.i, leg.j))),
            Some(s) => {
                obj.push((leg.x, inst.t(leg.i, s) + inst.t(s, leg.j)));
                obj.push((leg.delta.unwrap(), 1.0));
            }
        }
    }
    m.set_objective(obj);

    let leg_energy = |leg: &Leg| match leg.h {
        None => inst.e(leg.i, leg.j),
        Some(s) => inst.e(leg.i, s) + inst.e(s, leg.j),
    };
    let leg_time = |leg: &Leg| match leg.h {
        None => inst.t(leg.i, leg.j),
        Some(s) => inst.t(leg.i, s) + inst.t(s, leg.j),
    };

    for &i in inst.customers() {
        let terms = legs.iter().filter(|l| l.i == i).map(|l| (l.x, 1.0)).collect();
        m.add_row(format!("c53[{i}]"), terms, Sense::Eq, 1.0);
    }
    for &i in &co {
        let mut terms: Vec<(VarId, f64)> = legs.iter().filter(|l| l.i == i).map(|l| (l.x, 1.0)).collect();
        terms.extend(legs.iter().filter(|l| l.j == i).map(|l| (l.x, -1.0)));
        m.add_row(format!("c54[{i}]"), terms, Sense::Eq, 0.0);
    }
    for leg in legs.iter().filter(|l| l.i == 0) {
        m.add_row(
            format!("c55[{}]", leg.key),
            vec![(leg.q, 1.0), (leg.x, -q_max)],
            Sense::Eq,
            0.0,
        );
        if let Some(s) = leg.h {
            m.add_row(
                format!("c56[{}]", leg.key),
                vec![(leg.qp.unwrap(), 1.0), (leg.x, -(q_max - inst.e(0, s)))],
                Sense::Eq,
                0.0,
            );
        }
    }
    for leg in legs.iter().filter(|l| l.i != 0) {
        if let Some(s) = leg.h {
            m.add_row(
                format!("c57[{}]", leg.key),
                vec![(leg.qp.unwrap(), 1.0), (leg.q, -1.0), (leg.x, inst.e(leg.i, s))],
                Sense::Eq,
                0.0,
            );
        }
    }
    for leg in &legs {
        match leg.h {
            Some(s) => {
                m.add_row(
                    format!("c58[{}]", leg.key),
                    vec![(leg.qp.unwrap(), 1.0), (leg.x, -q_max)],
                    Sense::Le,
                    0.0,
                );
                m.add_row(
                    format!("c60[{}]", leg.key),
                    vec![
                        (leg.delta.unwrap(), 1.0),
                        (leg.x, -inst.station_function(s).max_charge_duration()),
                    ],
                    Sense::Le,
                    0.0,
                );
            }
            None => m.add_row(
                format!("c59[{},{}]", leg.i, leg.j),
                vec![(leg.q, 1.0), (leg.x, -q_max)],
                Sense::Le,
                0.0,
            ),
        }
    }
    for &i in inst.customers() {
        let mut terms: Vec<(VarId, f64)> = legs.iter().filter(|l| l.i == i).map(|l| (l.q, 1.0)).collect();
        for leg in legs.iter().filter(|l| l.j == i) {
            terms.push((leg.q, -1.0));
            terms.push((leg.x, leg_energy(leg)));
            if leg.h.is_some() {
                terms.push((leg.qm.unwrap(), -1.0));
                terms.push((leg.qp.unwrap(), 1.0));
            }
        }
        m.add_row(format!("c61[{i}]"), terms, Sense::Eq, 0.0);
    }
    for leg in legs.iter().filter(|l| l.j == 0 && l.i != 0) {
        match leg.h {
            Some(s) => m.add_row(
                format!("c62[{},{s}]", leg.i),
                vec![
                    (leg.q, 1.0),
                    (leg.x, -leg_energy(leg)),
                    (leg.qm.unwrap(), 1.0),
                    (leg.qp.unwrap(), -1.0),
                ],
                Sense::Ge,
                0.0,
            ),
            None => m.add_row(
                format!("c63[{}]", leg.i),
                vec![(leg.q, 1.0), (leg.x, -leg_energy(leg))],
                Sense::Ge,
                0.0,
            ),
        }
    }
    for leg in &legs {
        if let Some(s) = leg.h {
            m.add_row(
                format!("c64[{}]", leg.key),
                vec![(leg.q, 1.0), (y[&s], -q_max)],
                Sense::Le,
                0.0,
            );
        }
    }
    for &i in inst.customers() {
        let mut terms: Vec<(VarId, f64)> = legs.iter().filter(|l| l.i == i).map(|l| (l.tau, 1.0)).collect();
        for leg in legs.iter().filter(|l| l.j == i) {
            terms.push((leg.tau, -1.0));
            terms.push((leg.x, -leg_time(leg)));
            if let Some(dl) = leg.delta {
                terms.push((dl, -1.0));
            }
        }
        m.add_row(format!("c76[{i}]"), terms, Sense::Eq, inst.service_time(i));
    }
    for leg in &legs {
        m.add_row(
            format!("c77[{}]", leg.key),
            vec![(leg.tau, 1.0), (leg.x, -t_max)],
            Sense::Le,
            0.0,
        );
    }
    for leg in legs.iter().filter(|l| l.j == 0 && l.i != 0) {
        match leg.h {
            Some(s) => m.add_row(
                format!("c78[{},{s}]", leg.i),
                vec![(leg.tau, 1.0), (leg.delta.unwrap(), 1.0), (leg.x, -(t_max - leg_time(leg)))],
                Sense::Le,
                0.0,
            ),
            None => m.add_row(
                format!("c79[{}]", leg.i),
                vec![(leg.tau, 1.0), (leg.x, -(t_max - leg_time(leg)))],
                Sense::Le,
                0.0,
            ),
        }
    }
    for leg in &legs {
        if let Some(s) = leg.h {
            m.add_row(
                format!("c80[{}]", leg.key),
                vec![(leg.x, 1.0), (y[&s], -1.0)],
                Sense::Le,
                0.0,
            );
        }
    }
    let ys: Vec<(VarId, f64)> = y.values().map(|&v| (v, 1.0)).collect();
    m.add_row("c81", ys, Sense::Le, inst.max_stations() as f64);
    let out: Vec<(VarId, f64)> = legs.iter().filter(|l| l.i == 0).map(|l| (l.x, 1.0)).collect();
    m.add_row("c82", out, Sense::Le, inst.max_routes() as f64);
    m
}
