//! Canonical JSON instance format, EVRP-NL importer, ELRP extension and a
//! synthetic instance generator.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::charging::{ChargingError, ChargingFunction};
use crate::instance::{EvParams, Instance, InstanceError, Node, NodeKind, TechId};
use crate::simulate::optimize_fixed_route_charging;

/// Version written to and expected in canonical files.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported schema version {0} (expected {SCHEMA_VERSION})")]
    Version(u32),
    #[error("charging function {tech}: {source}")]
    Charging { tech: String, source: ChargingError },
    #[error("node {index}: {message}")]
    Node { index: usize, message: String },
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("XML: {0}")]
    Xml(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum GenerationError {
    #[error("cannot co-locate {stations} new stations with only {customers} customers")]
    TooFewCustomers { stations: usize, customers: usize },
    #[error("instance has no station to extend from")]
    NoStations,
    #[error("need at least one customer and one station")]
    BadCounts,
    #[error("no feasible layout found after {0} attempts")]
    Exhausted(usize),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileEv {
    battery_capacity_kwh: f64,
    max_route_duration_h: f64,
    consumption_kwh_per_km: f64,
    speed_kmh: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileLimits {
    max_stations: usize,
    max_routes: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum FileKind {
    Depot,
    Customer,
    Station,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileNode {
    id: usize,
    kind: FileKind,
    x_km: f64,
    y_km: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    service_time_h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tech: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileFunction {
    breakpoints: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileInstance {
    schema_version: u32,
    name: String,
    ev: FileEv,
    limits: FileLimits,
    nodes: Vec<FileNode>,
    charging_functions: BTreeMap<String, FileFunction>,
}

/// Parses a canonical instance file.
pub fn parse_instance(bytes: &[u8]) -> Result<Instance, ParseError> {
    let file: FileInstance = serde_json::from_slice(bytes).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(ParseError::Version(file.schema_version));
    }
    let mut funcs = BTreeMap::new();
    for (tech, f) in file.charging_functions {
        let bp = f.breakpoints.iter().map(|p| (p[0], p[1])).collect();
        let cf = ChargingFunction::new(tech.as_str(), bp)
            .map_err(|source| ParseError::Charging { tech: tech.clone(), source })?;
        funcs.insert(TechId(tech), cf);
    }
    let mut nodes = Vec::with_capacity(file.nodes.len());
    for (index, n) in file.nodes.into_iter().enumerate() {
        let kind = match n.kind {
            FileKind::Depot => NodeKind::Depot,
            FileKind::Customer => NodeKind::Customer {
                service_time: n.service_time_h.unwrap_or(0.0),
            },
            FileKind::Station => NodeKind::Station {
                tech: TechId(n.tech.ok_or_else(|| ParseError::Node {
                    index,
                    message: "station without tech".into(),
                })?),
            },
        };
        nodes.push(Node { id: n.id, kind, x: n.x_km, y: n.y_km });
    }
    if !nodes.iter().any(|n| matches!(n.kind, NodeKind::Depot)) {
        return Err(ParseError::Node { index: 0, message: "missing depot".into() });
    }
    let ev = EvParams {
        battery_capacity: file.ev.battery_capacity_kwh,
        max_route_duration: file.ev.max_route_duration_h,
        consumption_rate: file.ev.consumption_kwh_per_km,
        speed: file.ev.speed_kmh,
    };
    Ok(Instance::new(
        file.name,
        nodes,
        ev,
        file.limits.max_stations,
        file.limits.max_routes,
        funcs,
    )?)
}

/// Serialises an instance in the canonical format (pretty JSON, trailing newline).
pub fn serialize_instance(inst: &Instance) -> String {
    let ev = inst.ev();
    let file = FileInstance {
        schema_version: SCHEMA_VERSION,
        name: inst.name.clone(),
        ev: FileEv {
            battery_capacity_kwh: ev.battery_capacity,
            max_route_duration_h: ev.max_route_duration,
            consumption_kwh_per_km: ev.consumption_rate,
            speed_kmh: ev.speed,
        },
        limits: FileLimits {
            max_stations: inst.max_stations(),
            max_routes: inst.max_routes(),
        },
        nodes: inst
            .nodes()
            .iter()
            .map(|n| {
                let (kind, service_time_h, tech) = match &n.kind {
                    NodeKind::Depot => (FileKind::Depot, None, None),
                    NodeKind::Customer { service_time } => (FileKind::Customer, Some(*service_time), None),
                    NodeKind::Station { tech } => (FileKind::Station, None, Some(tech.0.clone())),
                };
                FileNode { id: n.id, kind, x_km: n.x, y_km: n.y, service_time_h, tech }
            })
            .collect(),
        charging_functions: inst
            .charging_functions()
            .iter()
            .map(|(k, f)| {
                let breakpoints = f.breakpoints().iter().map(|&(e, t)| [e, t]).collect();
                (k.0.clone(), FileFunction { breakpoints })
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("instance serialises");
    s.push('\n');
    s
}

fn child<'a, 'i>(n: roxmltree::Node<'a, 'i>, name: &str) -> Option<roxmltree::Node<'a, 'i>> {
    n.children().find(|c| c.has_tag_name(name))
}

/// Best-effort importer for the VRP-REP XML layout of the EVRP-NL benchmark.
///
/// Node `type` 0/1/2 maps to depot/customer/station, stations carry
/// `custom/cs_type`, the vehicle profile carries `speed_factor`,
/// `max_travel_time` and a `custom` block with `consumption_rate`,
/// `battery_capacity` and the `charging_functions`. Requests provide service
/// times. The station limit is set to the number of stations and the route
/// limit to the number of customers.
pub fn import_evrp_xml(text: &str) -> Result<Instance, ParseError> {
    let doc = roxmltree::Document::parse(text).map_err(|e| ParseError::Xml(e.to_string()))?;
    let root = doc.root_element();
    let xml_err = |m: &str| ParseError::Xml(m.to_string());
    let num = |n: Option<roxmltree::Node<'_, '_>>, what: &str| -> Result<f64, ParseError> {
        n.and_then(|n| n.text())
            .and_then(|t| t.trim().parse::<f64>().ok())
            .ok_or_else(|| ParseError::Xml(format!("missing or invalid {what}")))
    };
    let name = root
        .descendants()
        .find(|n| n.has_tag_name("name"))
        .and_then(|n| n.text())
        .unwrap_or("evrp")
        .trim()
        .to_string();
    let profile = root
        .descendants()
        .find(|n| n.has_tag_name("vehicle_profile"))
        .ok_or_else(|| xml_err("no vehicle_profile"))?;
    let custom = child(profile, "custom").ok_or_else(|| xml_err("vehicle_profile without custom"))?;
    let ev = EvParams {
        battery_capacity: num(child(custom, "battery_capacity"), "battery_capacity")?,
        max_route_duration: num(child(profile, "max_travel_time"), "max_travel_time")?,
        consumption_rate: num(child(custom, "consumption_rate"), "consumption_rate")?,
        speed: num(child(profile, "speed_factor"), "speed_factor")?,
    };
    let mut funcs = BTreeMap::new();
    if let Some(cfs) = child(custom, "charging_functions") {
        for f in cfs.children().filter(|c| c.has_tag_name("function")) {
            let tech = f.attribute("cs_type").ok_or_else(|| xml_err("function without cs_type"))?;
            let mut bp = Vec::new();
            for b in f.children().filter(|c| c.has_tag_name("breakpoint")) {
                bp.push((
                    num(child(b, "battery_level"), "battery_level")?,
                    num(child(b, "charging_time"), "charging_time")?,
                ));
            }
            let cf = ChargingFunction::new(tech, bp)
                .map_err(|source| ParseError::Charging { tech: tech.to_string(), source })?;
            funcs.insert(TechId::from(tech), cf);
        }
    }
    let mut service: BTreeMap<String, f64> = BTreeMap::new();
    for r in root.descendants().filter(|n| n.has_tag_name("request")) {
        if let Some(node) = r.attribute("node") {
            service.insert(node.to_string(), num(child(r, "service_time"), "service_time").unwrap_or(0.0));
        }
    }
    let xml_nodes: Vec<_> = root
        .descendants()
        .filter(|n| n.has_tag_name("node") && n.attribute("type").is_some())
        .collect();
    // depot first, then customers, then stations, each in file order
    let mut nodes = Vec::new();
    for wanted in ["0", "1", "2"] {
        for n in xml_nodes.iter().filter(|n| n.attribute("type") == Some(wanted)) {
            let (x, y) = (num(child(*n, "cx"), "cx")?, num(child(*n, "cy"), "cy")?);
            let id = nodes.len();
            let node = match wanted {
                "0" => Node::depot(x, y),
                "1" => {
                    let key = n.attribute("id").unwrap_or_default();
                    Node::customer(id, x, y, service.get(key).copied().unwrap_or(0.0))
                }
                _ => {
                    let tech = child(*n, "custom")
                        .and_then(|c| child(c, "cs_type"))
                        .and_then(|c| c.text())
                        .ok_or_else(|| xml_err("station without cs_type"))?;
                    Node::station(id, x, y, tech.trim())
                }
            };
            nodes.push(node);
        }
    }
    if nodes.first().map(|n| !matches!(n.kind, NodeKind::Depot)).unwrap_or(true) {
        return Err(xml_err("no depot node"));
    }
    let stations = nodes.iter().filter(|n| n.is_station()).count();
    let customers = nodes.iter().filter(|n| n.is_customer()).count();
    Ok(Instance::new(name, nodes, ev, stations, customers.max(1), funcs)?)
}

/// Technology with the longest full-charge time among the instance's stations.
fn slowest_tech(inst: &Instance) -> Option<TechId> {
    inst.stations()
        .iter()
        .filter_map(|&s| inst.tech(s))
        .max_by(|a, b| {
            let (fa, fb) = (&inst.charging_functions()[*a], &inst.charging_functions()[*b]);
            fa.time_to_full().total_cmp(&fb.time_to_full()).then(b.cmp(a))
        })
        .cloned()
}

/// Adds one station candidate per existing station, each co-located with a
/// distinct random customer and using the slowest existing technology. The
/// station limit stays at the original station count.
pub fn extend_to_elrp(evrp: &Instance, seed: u64) -> Result<Instance, GenerationError> {
    let k = evrp.stations().len();
    if k == 0 {
        return Err(GenerationError::NoStations);
    }
    let customers = evrp.customers();
    if customers.len() < k {
        return Err(GenerationError::TooFewCustomers { stations: k, customers: customers.len() });
    }
    let tech = slowest_tech(evrp).ok_or(GenerationError::NoStations)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<usize> = sample(&mut rng, customers.len(), k)
        .into_iter()
        .map(|i| customers[i])
        .collect();
    chosen.sort_unstable();
    let mut nodes = evrp.nodes().to_vec();
    for c in chosen {
        let (x, y) = (evrp.node(c).x, evrp.node(c).y);
        nodes.push(Node::station(nodes.len(), x, y, tech.clone()));
    }
    Ok(Instance::new(
        format!("{}-elrp", evrp.name),
        nodes,
        *evrp.ev(),
        k,
        evrp.max_routes(),
        evrp.charging_functions().clone(),
    )?)
}

/// Parameters of [`generate_synthetic`].
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticParams {
    pub side_km: f64,
    pub ev: EvParams,
    /// Nominal first-segment charging power per technology (kW).
    pub tech_powers: Vec<(String, f64)>,
    pub service_time_h: f64,
    /// Route limit; `None` means one route per customer.
    pub max_routes: Option<usize>,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        SyntheticParams {
            side_km: 120.0,
            ev: EvParams {
                battery_capacity: 16.0,
                max_route_duration: 10.0,
                consumption_rate: 0.125,
                speed: 40.0,
            },
            tech_powers: vec![
                ("fast".into(), 44.0),
                ("moderate".into(), 22.0),
                ("slow".into(), 11.0),
            ],
            service_time_h: 0.5,
            max_routes: None,
        }
    }
}

/// Random concave three-segment function: the power drops after roughly 85 %
/// and again after roughly 95 % of the capacity.
pub fn random_charging_function(rng: &mut impl Rng, label: &str, power_kw: f64, q: f64) -> ChargingFunction {
    let p1 = power_kw * rng.gen_range(0.9..1.1);
    let p2 = p1 * rng.gen_range(0.4..0.6);
    let p3 = p2 * rng.gen_range(0.3..0.6);
    let e1 = q * rng.gen_range(0.80..0.88);
    let e2 = q * rng.gen_range(0.92..0.97);
    let t1 = e1 / p1;
    let t2 = t1 + (e2 - e1) / p2;
    let t3 = t2 + (q - e2) / p3;
    ChargingFunction::new(label, vec![(0.0, 0.0), (e1, t1), (e2, t2), (q, t3)])
        .expect("decreasing powers give a concave function")
}

/// Uniform random instance on a square; regenerates customer positions until
/// every customer can be served by a dedicated route, directly or through a
/// single station.
pub fn generate_synthetic(n_customers: usize, n_stations: usize, seed: u64) -> Result<Instance, GenerationError> {
    generate_synthetic_with(n_customers, n_stations, seed, &SyntheticParams::default())
}

pub fn generate_synthetic_with(
    n_customers: usize,
    n_stations: usize,
    seed: u64,
    params: &SyntheticParams,
) -> Result<Instance, GenerationError> {
    if n_customers == 0 || n_stations == 0 || params.tech_powers.is_empty() {
        return Err(GenerationError::BadCounts);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = params.ev.battery_capacity;
    let funcs: BTreeMap<TechId, ChargingFunction> = params
        .tech_powers
        .iter()
        .map(|(label, p)| (TechId::from(label.as_str()), random_charging_function(&mut rng, label, *p, q)))
        .collect();
    let techs: Vec<&String> = params.tech_powers.iter().map(|(l, _)| l).collect();
    let side = params.side_km;
    let point = |rng: &mut ChaCha8Rng| (rng.gen_range(0.0..side), rng.gen_range(0.0..side));
    const ATTEMPTS: usize = 10_000;
    'layout: for _ in 0..100 {
        let (dx, dy) = point(&mut rng);
        let mut nodes = vec![Node::depot(dx, dy)];
        let mut stations = Vec::new();
        for s in 0..n_stations {
            let (x, y) = point(&mut rng);
            let tech = techs[rng.gen_range(0..techs.len())].as_str();
            stations.push(Node::station(n_customers + 1 + s, x, y, tech));
        }
        let mut customers = Vec::new();
        for c in 1..=n_customers {
            let mut placed = None;
            for _ in 0..ATTEMPTS / 100 {
                let (x, y) = point(&mut rng);
                let mut trial = nodes.clone();
                trial.push(Node::customer(1, x, y, params.service_time_h));
                trial.extend(stations.iter().enumerate().map(|(k, s)| Node {
                    id: 2 + k,
                    ..s.clone()
                }));
                let probe = Instance::new("probe", trial, params.ev, n_stations, 1, funcs.clone())?;
                if servable_alone(&probe, 1) {
                    placed = Some(Node::customer(c, x, y, params.service_time_h));
                    break;
                }
            }
            match placed {
                Some(n) => customers.push(n),
                None => continue 'layout,
            }
        }
        nodes.extend(customers);
        nodes.extend(stations);
        let routes = params.max_routes.unwrap_or(n_customers);
        return Ok(Instance::new(
            format!("syn-c{n_customers}-s{n_stations}-{seed}"),
            nodes,
            params.ev,
            n_stations,
            routes,
            funcs,
        )?);
    }
    Err(GenerationError::Exhausted(ATTEMPTS))
}

/// Whether customer `c` can be served by a route of its own, visiting at most
/// one station on each side.
fn servable_alone(inst: &Instance, c: usize) -> bool {
    let mut routes = vec![vec![0, c, 0]];
    for &s in inst.stations() {
        routes.push(vec![0, s, c, 0]);
        routes.push(vec![0, c, s, 0]);
        routes.push(vec![0, s, c, s, 0]);
    }
    routes.iter().any(|r| optimize_fixed_route_charging(inst, r).is_ok())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
  "schema_version": 1,
  "name": "tiny",
  "ev": {
    "battery_capacity_kwh": 16.0,
    "max_route_duration_h": 10.0,
    "consumption_kwh_per_km": 0.125,
    "speed_kmh": 40.0
  },
  "limits": {
    "max_stations": 1,
    "max_routes": 1
  },
  "nodes": [
    {
      "id": 0,
      "kind": "depot",
      "x_km": 0.0,
      "y_km": 0.0
    },
    {
      "id": 1,
      "kind": "customer",
      "x_km": 30.0,
      "y_km": 40.0,
      "service_time_h": 0.5
    },
    {
      "id": 2,
      "kind": "station",
      "x_km": 10.0,
      "y_km": 0.0,
      "tech": "slow"
    }
  ],
  "charging_functions": {
    "slow": {
      "breakpoints": [
        [
          0.0,
          0.0
        ],
        [
          13.0,
          1.2
        ],
        [
          16.0,
          2.0
        ]
      ]
    }
  }
}
"#;

    #[test]
    fn parses_minimal_file() {
        let inst = parse_instance(MINIMAL.as_bytes()).unwrap();
        assert_eq!(inst.n(), 3);
        assert!((inst.e(0, 1) - 6.25).abs() < 1e-12);
        assert_eq!(inst.service_time(1), 0.5);
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let inst = parse_instance(MINIMAL.as_bytes()).unwrap();
        assert_eq!(serialize_instance(&inst), MINIMAL);
        let gen = generate_synthetic(5, 2, 7).unwrap();
        let text = serialize_instance(&gen);
        let back = parse_instance(text.as_bytes()).unwrap();
        assert_eq!(serialize_instance(&back), text);
        assert_eq!(back, gen);
    }

    #[test]
    fn rejects_decreasing_times() {
        let bad = MINIMAL.replace("1.2\n", "2.5\n");
        assert!(matches!(
            parse_instance(bad.as_bytes()),
            Err(ParseError::Charging { .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let bad = MINIMAL.replace("\"name\": \"tiny\",", "\"name\": tiny,");
        match parse_instance(bad.as_bytes()) {
            Err(ParseError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_depot_is_rejected() {
        let bad = MINIMAL.replace("\"kind\": \"depot\"", "\"kind\": \"customer\"");
        assert!(parse_instance(bad.as_bytes()).is_err());
    }

    #[test]
    fn synthetic_defaults_and_determinism() {
        let a = generate_synthetic(5, 2, 7).unwrap();
        let b = generate_synthetic(5, 2, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.q_max(), 16.0);
        assert_eq!(a.t_max(), 10.0);
        assert_eq!(a.ev().consumption_rate, 0.125);
        assert_eq!(a.customers().len(), 5);
        assert_eq!(a.stations().len(), 2);
        for n in a.nodes() {
            assert!((0.0..120.0).contains(&n.x) && (0.0..120.0).contains(&n.y));
        }
    }

    #[test]
    fn generated_functions_are_concave() {
        for seed in 0..100 {
            let inst = generate_synthetic(3, 2, seed).unwrap();
            for f in inst.charging_functions().values() {
                // re-validating from raw breakpoints runs the concavity check
                ChargingFunction::new(f.label().clone(), f.breakpoints().to_vec()).unwrap();
                let m = f.marginal_times();
                assert!(m.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    fn two_tech_instance() -> Instance {
        let fast = ChargingFunction::new("fast", vec![(0.0, 0.0), (13.0, 0.3), (16.0, 0.6)]).unwrap();
        let slow = ChargingFunction::new("slow", vec![(0.0, 0.0), (13.0, 1.2), (16.0, 2.0)]).unwrap();
        let funcs = [("fast".into(), fast), ("slow".into(), slow)].into_iter().collect();
        let mut nodes = vec![Node::depot(60.0, 60.0)];
        for i in 1..=10 {
            nodes.push(Node::customer(i, 10.0 * i as f64, 50.0, 0.2));
        }
        nodes.push(Node::station(11, 30.0, 30.0, "fast"));
        nodes.push(Node::station(12, 90.0, 90.0, "slow"));
        let ev = SyntheticParams::default().ev;
        Instance::new("ten", nodes, ev, 2, 10, funcs).unwrap()
    }

    #[test]
    fn extension_doubles_candidates_with_slowest_tech() {
        let base = two_tech_instance();
        let ext = extend_to_elrp(&base, 3).unwrap();
        assert_eq!(ext.stations().len(), 4);
        assert_eq!(ext.max_stations(), 2);
        for &s in &ext.stations()[2..] {
            assert_eq!(ext.tech(s), Some(&TechId::from("slow")));
            let twin = ext
                .customers()
                .iter()
                .find(|&&c| ext.node(c).x == ext.node(s).x && ext.node(c).y == ext.node(s).y);
            assert!(twin.is_some());
        }
        assert_eq!(&ext.nodes()[..base.n()], base.nodes());
        assert_eq!(ext.ev(), base.ev());
        assert_eq!(extend_to_elrp(&base, 3).unwrap(), ext);
    }

    #[test]
    fn extension_needs_enough_customers() {
        let f = ChargingFunction::new("m", vec![(0.0, 0.0), (16.0, 1.0)]).unwrap();
        let funcs = [("m".into(), f)].into_iter().collect();
        let nodes = vec![
            Node::depot(0.0, 0.0),
            Node::customer(1, 1.0, 0.0, 0.0),
            Node::station(2, 2.0, 0.0, "m"),
            Node::station(3, 3.0, 0.0, "m"),
        ];
        let inst = Instance::new("few", nodes, SyntheticParams::default().ev, 2, 1, funcs).unwrap();
        assert_eq!(
            extend_to_elrp(&inst, 0),
            Err(GenerationError::TooFewCustomers { stations: 2, customers: 1 })
        );
    }

    #[test]
    fn imports_evrp_xml() {
        let xml = r#"<?xml version="1.0"?>
<instance>
  <info><dataset>EVRP-NL</dataset><name>tc0c2s1</name></info>
  <network>
    <nodes>
      <node id="0" type="0"><cx>0</cx><cy>0</cy></node>
      <node id="1" type="1"><cx>10</cx><cy>0</cy></node>
      <node id="2" type="1"><cx>0</cx><cy>10</cy></node>
      <node id="3" type="2"><cx>5</cx><cy>5</cy><custom><cs_type>fast</cs_type></custom></node>
    </nodes>
    <euclidean/>
  </network>
  <fleet>
    <vehicle_profile type="0">
      <departure_node>0</departure_node>
      <arrival_node>0</arrival_node>
      <speed_factor>40</speed_factor>
      <max_travel_time>10</max_travel_time>
      <custom>
        <consumption_rate>0.125</consumption_rate>
        <battery_capacity>16</battery_capacity>
        <charging_functions>
          <function cs_type="fast">
            <breakpoint><battery_level>0</battery_level><charging_time>0</charging_time></breakpoint>
            <breakpoint><battery_level>13.6</battery_level><charging_time>0.31</charging_time></breakpoint>
            <breakpoint><battery_level>16</battery_level><charging_time>0.71</charging_time></breakpoint>
          </function>
        </charging_functions>
      </custom>
    </vehicle_profile>
  </fleet>
  <requests>
    <request id="1" node="1"><service_time>0.5</service_time></request>
    <request id="2" node="2"><service_time>0.25</service_time></request>
  </requests>
</instance>"#;
        let inst = import_evrp_xml(xml).unwrap();
        assert_eq!(inst.name, "tc0c2s1");
        assert_eq!(inst.customers(), &[1, 2]);
        assert_eq!(inst.stations(), &[3]);
        assert_eq!(inst.service_time(2), 0.25);
        assert_eq!(inst.max_stations(), 1);
        assert_eq!(inst.max_routes(), 2);
        assert!((inst.e(0, 1) - 1.25).abs() < 1e-12);
    }
}
