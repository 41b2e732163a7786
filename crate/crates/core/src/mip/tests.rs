use std::collections::BTreeMap;

use super::*;
use crate::charging::ChargingFunction;
use crate::exact::{leg_paths, PathChoice};
use crate::instance::{EvParams, Node, TechId};
use crate::paths::enumerate_paths;
use crate::simulate::{optimize_fixed_route_charging, validate_solution, Charge, RouteSolution};

fn line_instance() -> Instance {
    // depot at 0, customer at 40 km, station at 80 km, customer at 120 km
    let f = ChargingFunction::new("m", vec![(0.0, 0.0), (10.0, 0.5), (16.0, 1.25)]).unwrap();
    let funcs: BTreeMap<TechId, _> = [("m".into(), f)].into_iter().collect();
    let nodes = vec![
        Node::depot(0.0, 0.0),
        Node::customer(1, 40.0, 0.0, 0.25),
        Node::station(2, 80.0, 0.0, "m"),
        Node::customer(3, 120.0, 0.0, 0.25),
    ];
    let ev = EvParams {
        battery_capacity: 16.0,
        max_route_duration: 10.0,
        consumption_rate: 0.125,
        speed: 40.0,
    };
    Instance::new("line", nodes, ev, 1, 2, funcs).unwrap()
}

/// Two routes; the second charges twice at the same station.
fn line_solution(inst: &Instance) -> RouteSolution {
    let route = vec![0, 2, 3, 2, 0];
    let (charges, _) = optimize_fixed_route_charging(inst, &route).unwrap();
    RouteSolution {
        routes: vec![vec![0, 1, 0], route],
        open_stations: vec![2],
        charges: vec![vec![], charges],
    }
}

fn all_models(inst: &Instance) -> Vec<MipModel> {
    vec![
        build_m1(inst, 1, false),
        build_m1(inst, 1, true),
        build_m2(inst, 1, false),
        build_m2(inst, 1, true),
        build_m3(inst),
        build_m4(inst, &enumerate_paths(inst, inst.max_stations())),
    ]
}

#[test]
fn copy_graph_arc_counts() {
    let inst = line_instance();
    for beta in 0..3 {
        let m = build_m1(&inst, beta, false);
        // depot, two customers, beta + 1 copies of one station
        let n = 3 + beta + 1;
        let same_station_pairs = (beta + 1) * beta;
        let expected = n * (n - 1) - same_station_pairs;
        let xs = m.variables.iter().filter(|v| v.name.starts_with("x[")).count();
        assert_eq!(xs, expected, "beta {beta}");
        let ys = m.variables.iter().filter(|v| v.name.starts_with("y[")).count();
        assert_eq!(ys, beta + 1);
        assert!(m.var("x[2,2c1]").is_none());
    }
}

#[test]
fn m3_and_m4_index_sets() {
    let inst = line_instance();
    let m3 = build_m3(&inst);
    // Co = {0, 1, 3}: 6 ordered pairs, each direct or through station 2
    let xs = m3.variables.iter().filter(|v| v.name.starts_with("x[")).count();
    assert_eq!(xs, 12);
    assert_eq!(m3.family("c64").count(), 6);
    let c64 = m3.constraint("c64[1,2,3]").unwrap();
    let y = m3.var("y[2]").unwrap();
    assert!(c64.terms.contains(&(y, -16.0)));

    let paths = enumerate_paths(&inst, 1);
    let m4 = build_m4(&inst, &paths);
    let n_paths: usize = paths.values().map(Vec::len).sum();
    let xs = m4.variables.iter().filter(|v| v.name.starts_with("x[")).count();
    assert_eq!(xs, n_paths);
    assert!(m4.var("x[0,3,p2]").is_some());
}

#[test]
fn feasible_solution_satisfies_every_formulation() {
    let inst = line_instance();
    let sol = line_solution(&inst);
    let report = validate_solution(&inst, &sol);
    assert!(report.is_feasible());
    for m in all_models(&inst) {
        let a = solution_to_assignment(&m, &inst, &sol).unwrap();
        let ev = evaluate_assignment(&m, &a);
        assert!(ev.feasible, "{}: {:?}", m.name, &ev.violations[..ev.violations.len().min(5)]);
        assert!((ev.objective - report.objective).abs() < 1e-6, "{}", m.name);
        assert_eq!(ev.missing, 0);
    }
}

#[test]
fn no_charge_route_has_zero_deltas() {
    let base = line_instance();
    let mut nodes = base.nodes().to_vec();
    nodes[3] = Node::customer(3, 60.0, 0.0, 0.25);
    let inst = Instance::new("near", nodes, *base.ev(), 1, 2, base.charging_functions().clone()).unwrap();
    let sol = RouteSolution {
        routes: vec![vec![0, 1, 0], vec![0, 3, 0]],
        open_stations: vec![],
        charges: vec![vec![], vec![]],
    };
    let m = build_m1(&inst, 0, false);
    let a = solution_to_assignment(&m, &inst, &sol).unwrap();
    for v in m.variables.iter().filter(|v| v.name.starts_with("delta[") || v.name.starts_with("z")) {
        assert_eq!(a.get(m.var(&v.name).unwrap()), 0.0);
    }
    assert!(evaluate_assignment(&m, &a).feasible);
}

#[test]
fn too_few_copies_is_a_capacity_error() {
    let inst = line_instance();
    let sol = line_solution(&inst);
    let m = build_m1(&inst, 0, false);
    assert_eq!(
        solution_to_assignment(&m, &inst, &sol),
        Err(AssignError::Capacity { station: 2, visits: 2, copies: 1 })
    );
}

#[test]
fn battery_dip_is_located() {
    let inst = line_instance();
    // 0 -> 3 -> 0 without charging needs 30 kWh
    let sol = RouteSolution {
        routes: vec![vec![0, 1, 0], vec![0, 3, 1, 0]],
        open_stations: vec![],
        charges: vec![vec![], vec![]],
    };
    assert!(!validate_solution(&inst, &sol).is_feasible());
    for m in all_models(&inst) {
        let a = solution_to_assignment(&m, &inst, &sol);
        let Ok(a) = a else { continue };
        let ev = evaluate_assignment(&m, &a);
        assert!(!ev.feasible, "{}", m.name);
    }
}

#[test]
fn overlong_route_is_located() {
    let base = line_instance();
    let ev = EvParams { max_route_duration: 6.0, ..*base.ev() };
    let inst = Instance::new("short", base.nodes().to_vec(), ev, 1, 2, base.charging_functions().clone()).unwrap();
    let sol = RouteSolution {
        routes: vec![vec![0, 1, 2, 3, 2, 0]],
        open_stations: vec![2],
        charges: vec![vec![Charge { q_in: 6.0, q_out: 16.0 }, Charge { q_in: 6.0, q_out: 16.0 }]],
    };
    assert!(!validate_solution(&inst, &sol).is_feasible());
    for m in all_models(&inst) {
        let a = solution_to_assignment(&m, &inst, &sol).unwrap();
        assert!(!evaluate_assignment(&m, &a).feasible, "{}", m.name);
    }
}

#[test]
fn all_zero_assignment_names_assignment_rows() {
    let inst = line_instance();
    let m = build_m1(&inst, 0, false);
    let ev = evaluate_assignment(&m, &Assignment::default());
    let names: Vec<&str> = ev.violations.iter().map(|v| v.name.as_str()).collect();
    assert!(names.contains(&"c2[1]") && names.contains(&"c2[3]"));
    assert!(names.contains(&"c8"));
    assert_eq!(ev.objective, 0.0);
    assert_eq!(ev.missing, m.variables.len());
}

#[test]
fn gap_formula() {
    assert_eq!(mip_gap(20.0, 15.0).unwrap(), 25.0);
    assert_eq!(mip_gap(7.5, 7.5).unwrap(), 0.0);
    assert!((mip_gap(10.466, 7.912).unwrap() - 24.4).abs() < 0.05);
    assert_eq!(mip_gap(0.0, 1.0), Err(GapError::ZeroObjective));
}

#[test]
fn linear_variant_has_single_segment_blocks() {
    let inst = line_instance();
    let m = build_linear_variant(&inst, |i| build_m1(i, 0, false));
    assert!(m.var("ap[2,1]").is_some());
    assert!(m.var("ap[2,2]").is_none());
    let nl = build_m1(&inst, 0, false);
    assert!(nl.var("ap[2,2]").is_some());
    let again = build_linear_variant(&inst.linearized(), |i| build_m1(i, 0, false));
    assert_eq!(again.variables, m.variables);
    assert_eq!(again.constraints, m.constraints);
}

#[test]
fn linear_objective_follows_secant_direction() {
    // the secant lies above the concave curve's time, so a charge costs more
    let inst = line_instance();
    let sol = line_solution(&inst);
    let lin = inst.linearized();
    let m_nl = build_m1(&inst, 1, false);
    let m_l = build_m1(&lin, 1, false);
    let a_nl = solution_to_assignment(&m_nl, &inst, &sol).unwrap();
    let a_l = solution_to_assignment(&m_l, &lin, &sol).unwrap();
    let (o_nl, o_l) = (evaluate_assignment(&m_nl, &a_nl).objective, evaluate_assignment(&m_l, &a_l).objective);
    assert!(o_l >= o_nl - 1e-9);
    assert!((o_l - validate_solution(&lin, &sol).objective).abs() < 1e-6);
}

#[test]
fn mps_round_trip_and_determinism() {
    let inst = line_instance();
    for m in all_models(&inst) {
        let bytes = export_mps(&m).unwrap();
        assert_eq!(bytes, export_mps(&m).unwrap());
        let back = read_mps(std::str::from_utf8(&bytes).unwrap()).unwrap();
        assert_eq!(back.variables, m.variables, "{}", m.name);
        assert_eq!(back.constraints, m.constraints, "{}", m.name);
        assert_eq!(back.objective, m.objective);
        let sol = line_solution(&inst);
        let a = solution_to_assignment(&m, &inst, &sol).unwrap();
        let named = a.to_named(&m);
        let b = Assignment::from_named(&back, named.iter().map(|(k, v)| (k.as_str(), *v))).unwrap();
        assert_eq!(evaluate_assignment(&back, &b).feasible, evaluate_assignment(&m, &a).feasible);
    }
}

#[test]
fn empty_model_round_trips() {
    let m = MipModel::new("empty", Formulation::Imported);
    let back = read_mps(std::str::from_utf8(&export_mps(&m).unwrap()).unwrap()).unwrap();
    assert!(back.variables.is_empty() && back.constraints.is_empty());
    let lp = String::from_utf8(export_lp(&m).unwrap()).unwrap();
    assert!(lp.contains("Minimize") && lp.ends_with("End\n"));
}

#[test]
fn lp_export_sections() {
    let inst = line_instance();
    let m = build_m3(&inst);
    let lp = String::from_utf8(export_lp(&m).unwrap()).unwrap();
    for s in ["Minimize", "Subject To", "Bounds", "Binary", "End"] {
        assert!(lp.contains(s));
    }
    assert!(lp.contains(" c53(1):"));
    assert!(lp.lines().all(|l| l.len() <= 255));
}

#[test]
fn mangling_collisions_are_reported() {
    let mut m = MipModel::new("c", Formulation::Imported);
    m.add_var("a[1]", VarKind::Continuous, 0.0, 1.0);
    m.add_var("a(1)", VarKind::Continuous, 0.0, 1.0);
    assert!(matches!(export_mps(&m), Err(ExportError::NameCollision(_))));
    assert!(matches!(export_lp(&m), Err(ExportError::NameCollision(_))));
}

#[test]
fn external_reader_parses_exports() {
    let inst = line_instance();
    for m in all_models(&inst) {
        let text = String::from_utf8(export_mps(&m).unwrap()).unwrap();
        let parsed = mps::Parser::<f64>::parse(&text);
        assert!(parsed.is_ok(), "{}: {:?}", m.name, parsed.err());
    }
}

#[test]
fn registry_covers_symbols() {
    let inst = line_instance();
    let m = build_m1(&inst, 1, false);
    for prefix in ["x[", "y[", "tau[", "q[", "qp[", "qm[", "s[", "d[", "delta[", "ap[", "am[", "zp[", "zm["] {
        assert!(m.registry.keys().any(|k| k.starts_with(prefix)), "{prefix}");
    }
    let m2 = build_m2(&inst, 0, false);
    assert!(m2.var("tau[0,1]").is_some() && m2.var("q[1,0]").is_some());
    assert!(m2.var("tau[1]").is_none());
}

#[test]
fn pruned_path_is_not_expressible() {
    let inst = line_instance();
    let sol = line_solution(&inst);
    let paths = leg_paths(&inst, PathChoice::Full, None);
    let mut only_direct = paths.clone();
    for list in only_direct.values_mut() {
        list.retain(|p| p.is_direct());
    }
    let m = build_m4(&inst, &only_direct);
    assert!(matches!(
        solution_to_assignment(&m, &inst, &sol),
        Err(AssignError::NotExpressible(_))
    ));
}

#[cfg(unix)]
mod backend_tests {
    use super::*;
    use std::os::unix::fs::PermissionsExt;

    fn script(dir: &std::path::Path, body: &str) -> BackendConfig {
        let p = dir.join("solver.sh");
        std::fs::write(&p, format!("#!/bin/sh\n{body}\n")).unwrap();
        std::fs::set_permissions(&p, std::fs::Permissions::from_mode(0o755)).unwrap();
        BackendConfig::new(p)
    }

    #[test]
    fn absent_backend_is_unknown() {
        let m = build_m3(&line_instance());
        let r = backend_solve(&m, None, 1.0);
        assert_eq!(r.status, SolveStatus::Unknown);
        assert!(r.assignment.is_none());
    }

    #[test]
    fn echo_backend_returns_the_assignment() {
        let inst = line_instance();
        let m = build_m1(&inst, 1, false);
        let a = solution_to_assignment(&m, &inst, &line_solution(&inst)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let sol_text: String = a
            .to_named(&m)
            .iter()
            .map(|(k, v)| format!("{} {v}\n", mangle(k)))
            .collect();
        std::fs::write(dir.path().join("fixed.sol"), sol_text).unwrap();
        let cfg = script(dir.path(), &format!("cp {} \"$2\"", dir.path().join("fixed.sol").display()));
        let r = backend_solve(&m, Some(&cfg), 5.0);
        assert_eq!(r.status, SolveStatus::Feasible);
        let back = r.assignment.unwrap();
        assert!(evaluate_assignment(&m, &back).feasible);
        assert!((r.objective.unwrap() - evaluate_assignment(&m, &a).objective).abs() < 1e-9);
    }

    #[test]
    fn status_lines_are_mapped() {
        let m = build_m3(&line_instance());
        let dir = tempfile::tempdir().unwrap();
        let cfg = script(dir.path(), "printf '@status infeasible\\n' > \"$2\"");
        assert_eq!(backend_solve(&m, Some(&cfg), 5.0).status, SolveStatus::Infeasible);
        let cfg = script(dir.path(), "printf '@status optimal\\n@objective 4.5\\n' > \"$2\"");
        let r = backend_solve(&m, Some(&cfg), 5.0);
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.bound, r.objective);
        assert_eq!(r.gap(), Some(0.0));
    }

    #[test]
    fn crash_and_timeout_are_unknown() {
        let m = build_m3(&line_instance());
        let dir = tempfile::tempdir().unwrap();
        let cfg = script(dir.path(), "echo boom >&2; exit 3");
        let r = backend_solve(&m, Some(&cfg), 5.0);
        assert_eq!(r.status, SolveStatus::Unknown);
        assert!(r.diagnostics.contains("boom"));
        let cfg = script(dir.path(), "sleep 30");
        let start = std::time::Instant::now();
        let r = backend_solve(&m, Some(&cfg), 0.0);
        assert_eq!(r.status, SolveStatus::Unknown);
        assert!(r.diagnostics.contains("timed out"));
        assert!(start.elapsed().as_secs() < 20);
    }

    #[test]
    fn beta_escalation_stops_when_no_improvement() {
        // scripted: beta 0 infeasible, beta 1 objective 9, beta 2 objective 9
        let inst = line_instance();
        let dir = tempfile::tempdir().unwrap();
        let body = "if grep -q 'x(2c2,' \"$1\"; then printf '@status feasible\\n@objective 9\\n' > \"$2\"; \
                    elif grep -q 'x(2c1,' \"$1\"; then printf '@status feasible\\n@objective 9\\n' > \"$2\"; \
                    else printf '@status infeasible\\n' > \"$2\"; fi";
        let cfg = script(dir.path(), body);
        let (r, beta, steps) =
            solve_with_beta_escalation(&inst, Formulation::M1 { beta: 0 }, Some(&cfg), 5.0, false, 5).unwrap();
        assert_eq!(beta, 1);
        assert_eq!(r.objective, Some(9.0));
        let seq: Vec<usize> = steps.iter().map(|s| s.beta).collect();
        assert_eq!(seq, vec![0, 1, 2]);
        assert!(matches!(
            solve_with_beta_escalation(&inst, Formulation::M1 { beta: 0 }, None, 5.0, false, 5),
            Err(BackendError::Unsupported)
        ));
    }

    #[test]
    fn sec_loop_adds_cuts_for_subtours() {
        let inst = line_instance();
        let mut m = build_m1(&inst, 0, false);
        let dir = tempfile::tempdir().unwrap();
        // first call: depot-free cycle 1 <-> 3; afterwards a valid tour
        let body = "if grep -q 'c39' \"$1\"; then printf 'x(0,1) 1\\nx(1,3) 1\\nx(3,0) 1\\n' > \"$2\"; \
                    else printf 'x(1,3) 1\\nx(3,1) 1\\n' > \"$2\"; fi";
        let cfg = script(dir.path(), body);
        let (_, rounds) = solve_with_sec_loop(&mut m, Some(&cfg), 5.0);
        assert_eq!(rounds, 1);
        assert_eq!(m.family("c39").count(), 1);
        let cut = &m.family("c39").next().unwrap();
        assert_eq!(cut.rhs, 1.0);
        assert_eq!(cut.terms.len(), 2);
    }
}
