//! Linear versus nonlinear charging comparison.
//!
//! For one instance: solve with the nonlinear charging functions, solve with
//! their linearizations, then keep the linear decisions (routes and opened
//! stations), re-optimize the charges under the true functions and report the
//! relative degradation NL-G.

use serde::Serialize;

use crate::exact::{solve_exact, ExactOptions, ExactStatus};
use crate::instance::Instance;
use crate::simulate::{nl_gap, reevaluate_under_nonlinear, RouteSolution};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub instance: String,
    /// `ok`, `timeout` or `infeasible`.
    pub status: String,
    pub obj: Option<f64>,
    pub routes: Option<usize>,
    pub stations: Vec<usize>,
    pub obj_linear: Option<f64>,
    pub routes_linear: Option<usize>,
    pub stations_linear: Vec<usize>,
    /// Objective of the linear decisions re-evaluated under nonlinear charging.
    pub obj_star: Option<f64>,
    pub nl_g: Option<f64>,
    pub stations_differ: bool,
    pub routes_differ: bool,
}

pub const CSV_HEADER: &str = "instance,status,obj,routes,stations,obj_linear,routes_linear,stations_linear,obj_star,nl_g,stations_differ,routes_differ";

fn opt_num(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn opt_count(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn station_list(v: &[usize]) -> String {
    v.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(";")
}

impl StudyRow {
    /// One CSV line matching [`CSV_HEADER`], without a trailing newline.
    pub fn to_csv(&self) -> String {
        [
            self.instance.replace(',', "_"),
            self.status.clone(),
            opt_num(self.obj),
            opt_count(self.routes),
            station_list(&self.stations),
            opt_num(self.obj_linear),
            opt_count(self.routes_linear),
            station_list(&self.stations_linear),
            opt_num(self.obj_star),
            opt_num(self.nl_g),
            self.stations_differ.to_string(),
            self.routes_differ.to_string(),
        ]
        .join(",")
    }
}

fn solve(inst: &Instance, opts: &ExactOptions) -> (Option<RouteSolution>, Option<f64>, ExactStatus) {
    let out = solve_exact(inst, opts);
    (out.solution, out.objective, out.status)
}

/// Runs the comparison on one instance with the exact solver.
pub fn compare_charging(inst: &Instance, opts: &ExactOptions) -> StudyRow {
    let (sol, obj, st) = solve(inst, opts);
    let linear = inst.linearized();
    let (sol_l, obj_l, st_l) = solve(&linear, opts);
    let mut row = StudyRow {
        instance: inst.name.clone(),
        status: "ok".into(),
        obj,
        routes: sol.as_ref().map(|s| s.routes.len()),
        stations: sol.as_ref().map(|s| s.used_stations(inst)).unwrap_or_default(),
        obj_linear: obj_l,
        routes_linear: sol_l.as_ref().map(|s| s.routes.len()),
        stations_linear: sol_l.as_ref().map(|s| s.used_stations(inst)).unwrap_or_default(),
        obj_star: None,
        nl_g: None,
        stations_differ: false,
        routes_differ: false,
    };
    let statuses = [st, st_l];
    if statuses.contains(&ExactStatus::Infeasible) {
        row.status = "infeasible".into();
    } else if statuses.iter().any(|s| *s != ExactStatus::Optimal) {
        row.status = "timeout".into();
    }
    if let Some(sl) = &sol_l {
        if let Ok((_, star)) = reevaluate_under_nonlinear(inst, sl) {
            row.obj_star = Some(star);
            row.nl_g = obj.and_then(|o| nl_gap(o, star));
        }
    }
    if sol.is_some() && sol_l.is_some() {
        row.stations_differ = row.stations != row.stations_linear;
        row.routes_differ = row.routes != row.routes_linear;
    }
    row
}
