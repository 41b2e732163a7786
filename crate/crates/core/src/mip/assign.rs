//! Conversion of route solutions into model assignments.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::instance::Instance;
use crate::simulate::{Charge, RouteSolution};

use super::blocks::{block_delta, set_charge_values};
use super::m1::copy_label;
use super::m3::hop_label;
use super::{Assignment, Formulation, MipModel, VarId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssignError {
    #[error("route {route}: {message}")]
    Structure { route: usize, message: String },
    #[error("station {station} is visited {visits} times but the model has {copies} copies")]
    Capacity { station: usize, visits: usize, copies: usize },
    #[error("the model has no variable {0}; the solution is not expressible in it")]
    NotExpressible(String),
    #[error("cannot convert solutions for an imported model")]
    Unsupported,
}

/// Raw state at one route position. Values are not clamped, so an infeasible
/// solution shows up as rows the assignment violates.
struct Stop {
    node: usize,
    arrival_time: f64,
    departure_time: f64,
    arrival_soc: f64,
    departure_soc: f64,
    charge: Option<Charge>,
}

fn trace(inst: &Instance, ri: usize, route: &[usize], charges: &[Charge]) -> Result<Vec<Stop>, AssignError> {
    let err = |message: String| AssignError::Structure { route: ri, message };
    if route.len() < 3 || route[0] != 0 || route[route.len() - 1] != 0 {
        return Err(err("route must start and end at the depot and visit a node".into()));
    }
    if let Some(&v) = route[1..route.len() - 1].iter().find(|&&v| v == 0 || v >= inst.n()) {
        return Err(err(format!("bad interior node {v}")));
    }
    let visits = route.iter().filter(|&&v| inst.is_station(v)).count();
    if visits != charges.len() {
        return Err(err(format!("{visits} station visits but {} charges", charges.len())));
    }
    let q_max = inst.q_max();
    let mut stops = vec![Stop {
        node: 0,
        arrival_time: 0.0,
        departure_time: 0.0,
        arrival_soc: q_max,
        departure_soc: q_max,
        charge: None,
    }];
    let mut next = charges.iter();
    for w in route.windows(2) {
        let prev = stops.last().unwrap();
        let (from, to) = (w[0], w[1]);
        let arrival_time = prev.departure_time + inst.t(from, to);
        let arrival_soc = prev.departure_soc - inst.e(from, to);
        let (departure_time, departure_soc, charge) = if inst.is_station(to) {
            let c = *next.next().unwrap();
            let f = inst.station_function(to);
            let c = Charge { q_in: arrival_soc, q_out: c.q_out };
            (arrival_time + block_delta(f, c.q_in, c.q_out), c.q_out, Some(c))
        } else {
            (arrival_time + inst.service_time(to), arrival_soc, None)
        };
        stops.push(Stop { node: to, arrival_time, departure_time, arrival_soc, departure_soc, charge });
    }
    Ok(stops)
}

struct Writer<'a> {
    m: &'a MipModel,
    a: Assignment,
}

impl Writer<'_> {
    fn id(&self, name: &str) -> Result<VarId, AssignError> {
        self.m.var(name).ok_or_else(|| AssignError::NotExpressible(name.to_string()))
    }

    fn put(&mut self, name: &str, v: f64) -> Result<(), AssignError> {
        let id = self.id(name)?;
        self.a.set(id, v);
        Ok(())
    }
}

/// Inverts the variable semantics of `model` for `sol`. Every variable gets a
/// value (unused ones 0) and values are clamped to their bounds. For a
/// feasible solution the result satisfies every row of the model; an
/// infeasible one yields at least one violated row.
pub fn solution_to_assignment(
    model: &MipModel,
    inst: &Instance,
    sol: &RouteSolution,
) -> Result<Assignment, AssignError> {
    let mut stops_all = Vec::with_capacity(sol.routes.len());
    for (ri, route) in sol.routes.iter().enumerate() {
        let charges = sol.charges.get(ri).map(Vec::as_slice).unwrap_or(&[]);
        stops_all.push(trace(inst, ri, route, charges)?);
    }
    let mut w = Writer { m: model, a: Assignment::default() };
    for i in 0..model.variables.len() {
        w.a.set(VarId(i), 0.0);
    }
    match model.formulation {
        Formulation::M1 { beta } => node_copy(&mut w, inst, &stops_all, beta, false)?,
        Formulation::M2 { beta } => node_copy(&mut w, inst, &stops_all, beta, true)?,
        Formulation::M3 => recharge_legs(&mut w, inst, &stops_all, true)?,
        Formulation::M4 => recharge_legs(&mut w, inst, &stops_all, false)?,
        Formulation::Imported => return Err(AssignError::Unsupported),
    }
    let mut a = w.a;
    for (id, v) in a.values.iter_mut() {
        let var = model.variable(*id);
        *v = v.clamp(var.lower, var.upper);
    }
    Ok(a)
}

fn node_copy(
    w: &mut Writer,
    inst: &Instance,
    routes: &[Vec<Stop>],
    beta: usize,
    arc_tracking: bool,
) -> Result<(), AssignError> {
    let mut used: BTreeMap<usize, usize> = BTreeMap::new();
    let q_max = inst.q_max();
    if !arc_tracking {
        w.put("q[0]", q_max)?;
        w.put("tau[0]", 0.0)?;
    }
    for stops in routes {
        let mut labels = Vec::with_capacity(stops.len());
        for st in stops {
            if inst.is_station(st.node) {
                let r = used.entry(st.node).or_insert(0);
                if *r > beta {
                    let visits = routes.iter().flatten().filter(|s| s.node == st.node).count();
                    return Err(AssignError::Capacity { station: st.node, visits, copies: beta + 1 });
                }
                labels.push(copy_label(st.node, *r));
                *r += 1;
            } else {
                labels.push(st.node.to_string());
            }
        }
        for k in 0..stops.len() - 1 {
            let (la, lb) = (&labels[k], &labels[k + 1]);
            w.put(&format!("x[{la},{lb}]"), 1.0)?;
            if arc_tracking {
                let st = &stops[k];
                let time = if inst.is_customer(st.node) { st.arrival_time } else { st.departure_time };
                w.put(&format!("tau[{la},{lb}]"), time)?;
                w.put(&format!("q[{la},{lb}]"), st.departure_soc)?;
            }
        }
        for (st, label) in stops.iter().zip(&labels).skip(1) {
            if st.node == 0 {
                continue;
            }
            if !arc_tracking {
                w.put(&format!("tau[{label}]"), st.departure_time)?;
                let soc = if inst.is_station(st.node) { st.departure_soc } else { st.arrival_soc };
                w.put(&format!("q[{label}]"), soc)?;
            }
            if let Some(c) = st.charge {
                let f = inst.station_function(st.node);
                w.put(&format!("y[{label}]"), 1.0)?;
                w.put(&format!("delta[{label}]"), block_delta(f, c.q_in, c.q_out))?;
                set_charge_values(w.m, &mut w.a, label, f, c.q_in, c.q_out);
            }
        }
    }
    Ok(())
}

/// Splits a route at its depot and customer positions.
fn legs(inst: &Instance, stops: &[Stop]) -> Vec<(usize, usize)> {
    let ends: Vec<usize> = (0..stops.len()).filter(|&k| !inst.is_station(stops[k].node)).collect();
    ends.windows(2).map(|w| (w[0], w[1])).collect()
}

fn recharge_legs(
    w: &mut Writer,
    inst: &Instance,
    routes: &[Vec<Stop>],
    single_station: bool,
) -> Result<(), AssignError> {
    for stops in routes {
        for (k0, k1) in legs(inst, stops) {
            let (i, j) = (stops[k0].node, stops[k1].node);
            let mid = &stops[k0 + 1..k1];
            let key = if single_station {
                match mid {
                    [] => format!("{i},{},{j}", hop_label(None)),
                    [h] => format!("{i},{},{j}", hop_label(Some(h.node))),
                    _ => {
                        let hops: Vec<String> = mid.iter().map(|s| s.node.to_string()).collect();
                        return Err(AssignError::NotExpressible(format!(
                            "x[{i},{},{j}]",
                            hops.join("+")
                        )));
                    }
                }
            } else {
                let hops: Vec<String> = mid.iter().map(|s| s.node.to_string()).collect();
                format!("{i},{j},p{}", hops.join("."))
            };
            w.put(&format!("x[{key}]"), 1.0)?;
            w.put(&format!("tau[{key}]"), stops[k0].departure_time)?;
            w.put(&format!("q[{key}]"), stops[k0].departure_soc)?;
            let mut total = 0.0;
            for (pos, st) in mid.iter().enumerate() {
                let c = st.charge.expect("station stop carries a charge");
                let f = inst.station_function(st.node);
                let block_key = if single_station { key.clone() } else { format!("{key},{}", pos + 1) };
                set_charge_values(w.m, &mut w.a, &block_key, f, c.q_in, c.q_out);
                total += block_delta(f, c.q_in, c.q_out);
                w.put(&format!("y[{}]", st.node), 1.0)?;
            }
            if !mid.is_empty() {
                w.put(&format!("delta[{key}]"), total)?;
            }
        }
    }
    Ok(())
}
