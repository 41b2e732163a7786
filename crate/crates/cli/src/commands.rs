use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use elrp_core::exact::{self, leg_paths, ExactOptions, ExactOutcome, PathChoice, SearchLimits};
use elrp_core::instanceio::{extend_to_elrp, generate_synthetic, import_evrp_xml, parse_instance, serialize_instance};
use elrp_core::mip::{
    backend_solve, build_linear_variant, build_m1, build_m2, build_m3, build_m4, export_lp, export_mps,
    solve_with_beta_escalation, solve_with_sec_loop, BackendConfig, Formulation, MipModel, SolveResult,
};
use elrp_core::paths::{enumerate_paths, prune_dominated};
use elrp_core::preprocess;
use elrp_core::simulate::validate_solution;
use elrp_core::study::{self, CSV_HEADER};
use elrp_core::{Instance, RouteSolution};

use crate::{
    BuildMipArgs, CompareArgs, Engine, ExportFormat, GenArgs, ImportArgs, InstanceArgs, ModelArgs, ModelKind, PathsArgs,
    SolveExactArgs, SolveMipArgs, ValidateArgs,
};

fn usage(message: &str) -> Result<ExitCode> {
    eprintln!("error: {message}");
    Ok(ExitCode::from(2))
}

fn load_instance(path: &Path) -> Result<Instance> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let inst = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("xml")) {
        import_evrp_xml(&String::from_utf8_lossy(&bytes))
    } else {
        parse_instance(&bytes)
    };
    inst.with_context(|| format!("parsing {}", path.display()))
}

/// Files as given; directories contribute their `.json` files in name order.
fn expand_instances(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("listing {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|e| e == "json"))
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialises");
    s.push('\n');
    s
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?)
}

pub fn gen(a: GenArgs) -> Result<ExitCode> {
    if a.count == 0 {
        return usage("--count must be at least 1");
    }
    if a.count > 1 && a.out.is_none() {
        return usage("--out must name a directory when --count is above 1");
    }
    let mut instances = Vec::new();
    for seed in a.seed..a.seed + a.count {
        instances.push(generate_synthetic(a.customers, a.stations, seed)?);
    }
    if a.count == 1 {
        return write_output(a.out.as_deref(), serialize_instance(&instances[0]).as_bytes()).map(|_| ExitCode::SUCCESS);
    }
    let dir = a.out.unwrap();
    fs::create_dir_all(&dir)?;
    for inst in &instances {
        fs::write(dir.join(format!("{}.json", inst.name)), serialize_instance(inst))?;
    }
    Ok(ExitCode::SUCCESS)
}

pub fn import(a: ImportArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(&a.instance).with_context(|| format!("reading {}", a.instance.display()))?;
    let mut inst = import_evrp_xml(&text).with_context(|| format!("parsing {}", a.instance.display()))?;
    if let Some(seed) = a.seed {
        inst = extend_to_elrp(&inst, seed)?;
    }
    write_output(a.out.as_deref(), serialize_instance(&inst).as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

pub fn preprocess(a: InstanceArgs) -> Result<ExitCode> {
    let inst = load_instance(&a.instance)?;
    let report = preprocess::preprocess(&inst);
    write_output(a.out.as_deref(), to_json(&report).as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct PairPaths {
    from: usize,
    to: usize,
    before: usize,
    after: usize,
    kept: Vec<String>,
}

pub fn paths(a: PathsArgs) -> Result<ExitCode> {
    let inst = load_instance(&a.instance)?;
    let k = a.max_stations.unwrap_or(inst.max_stations());
    let all = enumerate_paths(&inst, k);
    let (pruned, counts) = prune_dominated(&inst, &all);
    let pairs: Vec<PairPaths> = counts
        .iter()
        .map(|c| PairPaths {
            from: c.from,
            to: c.to,
            before: c.before,
            after: c.after,
            kept: pruned.get(&(c.from, c.to)).into_iter().flatten().map(|p| p.label()).collect(),
        })
        .collect();
    write_output(a.out.as_deref(), to_json(&pairs).as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

fn build_model(inst: &Instance, m: &ModelArgs) -> MipModel {
    let (kind, beta, strengthen) = (m.model, m.beta, m.strengthen);
    let build = move |i: &Instance| match kind {
        ModelKind::M1 => build_m1(i, beta, strengthen),
        ModelKind::M2 => build_m2(i, beta, strengthen),
        ModelKind::M3 => build_m3(i),
        ModelKind::M4 => build_m4(i, &leg_paths(i, PathChoice::Pruned, None)),
    };
    if m.linear {
        build_linear_variant(inst, build)
    } else {
        build(inst)
    }
}

pub fn build_mip(a: BuildMipArgs) -> Result<ExitCode> {
    let inst = load_instance(&a.model.instance)?;
    let model = build_model(&inst, &a.model);
    let from_ext = a
        .out
        .as_deref()
        .and_then(|p| p.extension())
        .filter(|e| e.eq_ignore_ascii_case("lp"))
        .map(|_| ExportFormat::Lp);
    let bytes = match a.format.or(from_ext).unwrap_or(ExportFormat::Mps) {
        ExportFormat::Mps => export_mps(&model)?,
        ExportFormat::Lp => export_lp(&model)?,
    };
    write_output(a.out.as_deref(), &bytes)?;
    eprintln!(
        "{}: {} variables ({} binary), {} rows, {} nonzeros",
        model.name,
        model.variables.len(),
        model.binary_count(),
        model.constraints.len(),
        model.nonzero_count()
    );
    Ok(ExitCode::SUCCESS)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

pub fn solve_mip(a: SolveMipArgs) -> Result<ExitCode> {
    let config = match &a.backend_config {
        Some(p) => Some(BackendConfig::from_file(p)?),
        None => BackendConfig::from_env(),
    };
    let Some(config) = config else {
        bail!("no MIP backend configured; set ELRP_BACKEND or pass --backend-config");
    };
    let mut inst = load_instance(&a.model.instance)?;
    if a.model.linear {
        inst = inst.linearized();
    }
    let (result, beta, rounds, model): (SolveResult, usize, usize, Option<MipModel>) = if a.escalate_beta {
        let formulation = match a.model.model {
            ModelKind::M1 => Formulation::M1 { beta: 0 },
            ModelKind::M2 => Formulation::M2 { beta: 0 },
            _ => return usage("--escalate-beta applies to m1 and m2 only"),
        };
        let (r, beta, _) =
            solve_with_beta_escalation(&inst, formulation, Some(&config), a.time_limit, a.model.strengthen, a.max_beta)?;
        let args = ModelArgs { beta, linear: false, ..a.model };
        (r, beta, 0, Some(build_model(&inst, &args)))
    } else {
        let args = ModelArgs { linear: false, ..a.model };
        let mut model = build_model(&inst, &args);
        let (r, rounds) = if model.graph.is_some() {
            solve_with_sec_loop(&mut model, Some(&config), a.time_limit)
        } else {
            (backend_solve(&model, Some(&config), a.time_limit), 0)
        };
        (r, a.model.beta, rounds, Some(model))
    };
    println!("instance,model,beta,status,objective,bound,gap,sec_rounds");
    println!(
        "{},{},{beta},{},{},{},{},{rounds}",
        inst.name,
        model.as_ref().map_or("", |m| m.formulation.tag()),
        serde_json::to_value(result.status)?.as_str().unwrap_or(""),
        fmt_opt(result.objective),
        fmt_opt(result.bound),
        fmt_opt(result.gap()),
    );
    if !result.diagnostics.is_empty() {
        eprintln!("{}", result.diagnostics);
    }
    if let (Some(out), Some(assignment), Some(model)) = (&a.out, &result.assignment, &model) {
        let text: String = assignment.to_named(model).iter().map(|(k, v)| format!("{k} {v}\n")).collect();
        fs::write(out, text)?;
    }
    Ok(ExitCode::SUCCESS)
}

const SUMMARY_HEADER: &str = "instance,status,objective,bound,gap,nodes,time_s";

fn summary_line(name: &str, o: &ExactOutcome) -> String {
    format!(
        "{},{},{},{:.6},{},{},{:.3}",
        name,
        format!("{:?}", o.status).to_lowercase(),
        fmt_opt(o.objective),
        o.bound,
        fmt_opt(o.gap()),
        o.nodes,
        o.elapsed.as_secs_f64()
    )
}

fn exact_options(time_limit: Option<f64>, no_prune: bool) -> ExactOptions {
    ExactOptions {
        paths: if no_prune { PathChoice::Full } else { PathChoice::Pruned },
        limits: SearchLimits { time_limit: time_limit.map(Duration::from_secs_f64), node_limit: None },
        ..Default::default()
    }
}

pub fn solve_exact(a: SolveExactArgs) -> Result<ExitCode> {
    let files = expand_instances(&a.instance)?;
    if files.len() > 1 && a.out.as_ref().is_some_and(|p| p.is_file()) {
        return usage("--out must name a directory when solving several instances");
    }
    let opts = exact_options(a.time_limit, a.no_prune);
    let pool = thread_pool(a.jobs)?;
    let results: Vec<Result<(Instance, ExactOutcome)>> = pool.install(|| {
        files
            .par_iter()
            .map(|f| {
                let mut inst = load_instance(f)?;
                if a.linear {
                    inst = inst.linearized();
                }
                let out = exact::solve_exact(&inst, &opts);
                Ok((inst, out))
            })
            .collect()
    });
    let several = files.len() > 1;
    if several {
        if let Some(dir) = &a.out {
            fs::create_dir_all(dir)?;
        }
    }
    println!("{SUMMARY_HEADER}");
    let mut failed = false;
    for (file, r) in files.iter().zip(results) {
        match r {
            Ok((inst, out)) => {
                println!("{}", summary_line(&inst.name, &out));
                if let (Some(target), Some(sol)) = (&a.out, &out.solution) {
                    let path = if several { target.join(format!("{}.solution.json", inst.name)) } else { target.clone() };
                    fs::write(&path, sol.to_json() + "\n")?;
                }
            }
            Err(e) => {
                eprintln!("error: {}: {e:#}", file.display());
                failed = true;
            }
        }
    }
    Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

pub fn validate(a: ValidateArgs) -> Result<ExitCode> {
    let inst = load_instance(&a.instance)?;
    let text = fs::read_to_string(&a.solution).with_context(|| format!("reading {}", a.solution.display()))?;
    let sol = RouteSolution::from_json(&text).with_context(|| format!("parsing {}", a.solution.display()))?;
    let report = validate_solution(&inst, &sol);
    if report.is_feasible() {
        println!("feasible objective {:.6}", report.objective);
        Ok(ExitCode::SUCCESS)
    } else {
        println!("infeasible: {} violation(s)", report.violations.len());
        for v in &report.violations {
            println!("  {v}");
        }
        Ok(ExitCode::from(1))
    }
}

pub fn compare_charging(a: CompareArgs) -> Result<ExitCode> {
    if a.engine == Engine::Backend {
        bail!("the comparison needs route decisions, which only the exact engine reports");
    }
    let files = expand_instances(&a.instance)?;
    let opts = exact_options(a.time_limit, false);
    let pool = thread_pool(a.jobs)?;
    let rows: Vec<Result<study::StudyRow>> = pool.install(|| {
        files
            .par_iter()
            .map(|f| Ok(study::compare_charging(&load_instance(f)?, &opts)))
            .collect()
    });
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for row in rows {
        csv.push_str(&row?.to_csv());
        csv.push('\n');
    }
    write_output(a.out.as_deref(), csv.as_bytes())?;
    Ok(ExitCode::SUCCESS)
}
