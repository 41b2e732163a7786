//! Browser bindings: charging curves, slow-versus-fast gap bounds and small
//! exact solves with the linear charging comparison. Each operation has a
//! plain Rust entry point returning JSON and a `wasm_bindgen` wrapper.

use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use elrp_core::exact::{solve_exact, ExactOptions, SearchLimits};
use elrp_core::instanceio::{generate_synthetic, random_charging_function};
use elrp_core::paths::{max_energy_gap, max_time_gap, GapWindow};
use elrp_core::study::compare_charging;
use elrp_core::{ChargingFunction, NodeKind};

const CAPACITY: f64 = 16.0;
const SAMPLES: usize = 64;
const MAX_CUSTOMERS: usize = 6;
const MAX_STATIONS: usize = 3;

#[derive(Serialize)]
struct CurvePoint {
    soc: f64,
    time: f64,
    linear_time: f64,
}

#[derive(Serialize)]
struct Curve {
    breakpoints: Vec<(f64, f64)>,
    time_to_full: f64,
    points: Vec<CurvePoint>,
}

fn draw_function(label: &str, power_kw: f64, seed: u64) -> Result<ChargingFunction, String> {
    if !(power_kw.is_finite() && power_kw > 0.0) {
        return Err(format!("power must be positive, got {power_kw}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(random_charging_function(&mut rng, label, power_kw, CAPACITY))
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("plain data serialises")
}

/// Random three-segment charging function with its linearization, sampled on
/// an even SoC grid.
pub fn charging_curve_json(power_kw: f64, seed: u64) -> Result<String, String> {
    let f = draw_function("demo", power_kw, seed)?;
    let lin = f.linearize();
    let points = (0..=SAMPLES)
        .map(|k| {
            let soc = CAPACITY * k as f64 / SAMPLES as f64;
            CurvePoint {
                soc,
                time: f.time_at_soc(soc).unwrap(),
                linear_time: lin.time_at_soc(soc).unwrap(),
            }
        })
        .collect();
    Ok(to_json(&Curve { breakpoints: f.breakpoints().to_vec(), time_to_full: f.time_to_full(), points }))
}

#[derive(Serialize)]
struct Gaps {
    dt_bar: f64,
    dq_bar: f64,
    empty_window: bool,
}

/// Worst-case extra charging time and energy shortfall of the slow station's
/// path over the fast one's, given first/last arc energies of both paths.
pub fn gap_bounds_json(
    slow_kw: f64,
    fast_kw: f64,
    seed: u64,
    cf: f64,
    cl: f64,
    cf_other: f64,
    cl_other: f64,
) -> Result<String, String> {
    if [cf, cl, cf_other, cl_other].iter().any(|e| !(0.0..=CAPACITY).contains(e)) {
        return Err(format!("arc energies must lie in [0, {CAPACITY}]"));
    }
    let slow = draw_function("slow", slow_kw, seed)?;
    let fast = draw_function("fast", fast_kw, seed.wrapping_add(1))?;
    let w = GapWindow { cf, cl, cf_other, cl_other, q_max: CAPACITY };
    let (dt_bar, empty) = max_time_gap(&slow, &fast, w);
    let (dq_bar, _) = max_energy_gap(&slow, &fast, w);
    Ok(to_json(&Gaps { dt_bar, dq_bar, empty_window: empty }))
}

#[derive(Serialize)]
struct MapNode {
    id: usize,
    x: f64,
    y: f64,
    kind: &'static str,
    tech: Option<String>,
}

#[derive(Serialize)]
struct SmallSolve {
    name: String,
    nodes: Vec<MapNode>,
    status: String,
    objective: Option<f64>,
    routes: Vec<Vec<usize>>,
    open_stations: Vec<usize>,
    objective_linear: Option<f64>,
    stations_linear: Vec<usize>,
    objective_star: Option<f64>,
    nl_gap: Option<f64>,
}

/// Generates a random instance, solves it exactly and compares it with the
/// linearized charging model.
pub fn solve_small_json(customers: usize, stations: usize, seed: u64) -> Result<String, String> {
    if customers == 0 || customers > MAX_CUSTOMERS || stations == 0 || stations > MAX_STATIONS {
        return Err(format!("use 1..={MAX_CUSTOMERS} customers and 1..={MAX_STATIONS} stations"));
    }
    let inst = generate_synthetic(customers, stations, seed).map_err(|e| e.to_string())?;
    let opts = ExactOptions {
        limits: SearchLimits { time_limit: Some(Duration::from_secs(5)), node_limit: None },
        ..Default::default()
    };
    let out = solve_exact(&inst, &opts);
    let row = compare_charging(&inst, &opts);
    let nodes = inst
        .nodes()
        .iter()
        .map(|n| {
            let (kind, tech) = match &n.kind {
                NodeKind::Depot => ("depot", None),
                NodeKind::Customer { .. } => ("customer", None),
                NodeKind::Station { tech } => ("station", Some(tech.0.clone())),
            };
            MapNode { id: n.id, x: n.x, y: n.y, kind, tech }
        })
        .collect();
    let (routes, open_stations) = match &out.solution {
        Some(s) => (s.routes.clone(), s.used_stations(&inst)),
        None => (Vec::new(), Vec::new()),
    };
    Ok(to_json(&SmallSolve {
        name: inst.name.clone(),
        nodes,
        status: format!("{:?}", out.status).to_lowercase(),
        objective: out.objective,
        routes,
        open_stations,
        objective_linear: row.obj_linear,
        stations_linear: row.stations_linear,
        objective_star: row.obj_star,
        nl_gap: row.nl_g,
    }))
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn charging_curve(power_kw: f64, seed: u32) -> Result<String, JsValue> {
    js(charging_curve_json(power_kw, seed.into()))
}

#[wasm_bindgen]
pub fn gap_bounds(
    slow_kw: f64,
    fast_kw: f64,
    seed: u32,
    cf: f64,
    cl: f64,
    cf_other: f64,
    cl_other: f64,
) -> Result<String, JsValue> {
    js(gap_bounds_json(slow_kw, fast_kw, seed.into(), cf, cl, cf_other, cl_other))
}

#[wasm_bindgen]
pub fn solve_small(customers: u32, stations: u32, seed: u32) -> Result<String, JsValue> {
    js(solve_small_json(customers as usize, stations as usize, seed.into()))
}
