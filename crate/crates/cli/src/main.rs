use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use tspmd::bounds::bound_report;
use tspmd::forge::{self, MscInstance};
use tspmd::heuristics::{heuristic_solution, msc_bruteforce, msc_from_solution};
use tspmd::model::build_instance_with_closure;
use tspmd::milp::{build_model, check_solution_against_model, objectives_agree};
use tspmd::schedule::classify;
use tspmd::sortie::enumerate_sorties;
use tspmd::transform;
use tspmd::{
    build_instance, evaluate, solve, validate, Instance, InstanceFile, Mode, SolveConfig,
    SolutionFile, Status,
};

const REPRO_TOL: f64 = 0.01;

#[derive(Parser)]
#[command(name = "tspmd", version, about = "Truck and multi-drone routing toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Output {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Indented JSON.
    #[arg(long, global = true)]
    pretty: bool,
}

#[derive(Args, Clone)]
struct InstanceArg {
    #[arg(long)]
    instance: PathBuf,
    /// Replace the matrices by their shortest-path closure before checking.
    #[arg(long)]
    closure: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance file and print its derived parameters.
    ValidateInstance {
        #[command(flatten)]
        inst: InstanceArg,
        #[command(flatten)]
        out: Output,
    },
    /// Solve exactly (or until a limit) in one mode.
    Solve {
        #[command(flatten)]
        inst: InstanceArg,
        #[arg(long, default_value = "TSP_MD")]
        mode: Mode,
        /// Seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        node_limit: Option<u64>,
        /// Solution file used as the starting incumbent.
        #[arg(long)]
        warm_start: Option<PathBuf>,
        /// Accepted for symmetry with other subcommands; the search is always deterministic.
        #[arg(long)]
        deterministic: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Minimal-wait schedule and completion time of a solution.
    Evaluate {
        #[command(flatten)]
        inst: InstanceArg,
        #[arg(long)]
        solution: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Full feasibility report for a solution.
    Validate {
        #[command(flatten)]
        inst: InstanceArg,
        #[arg(long)]
        solution: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Arc-repeat and node-revisit structure of a route.
    Classify {
        #[command(flatten)]
        inst: InstanceArg,
        #[arg(long)]
        solution: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Worst-case factors, the furthest-node lower bound and the repeat cap.
    Bounds {
        #[command(flatten)]
        inst: InstanceArg,
        #[arg(long)]
        solution: Option<PathBuf>,
        /// Lower bound to measure the cap against.
        #[arg(long)]
        lb: Option<f64>,
        /// Compute the cap even when its premises fail.
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Rewrite a solution.
    Transform {
        #[command(flatten)]
        inst: InstanceArg,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long, value_enum)]
        op: TransformOp,
        #[command(flatten)]
        out: Output,
    },
    /// Emit a generated instance.
    Generate {
        #[arg(long, value_enum)]
        kind: GenKind,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value_t = 100.0)]
        max_duration: f64,
        #[arg(long, default_value_t = 1)]
        drones: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Set cover input for `--kind msc`.
        #[arg(long)]
        msc: Option<PathBuf>,
        #[arg(long)]
        deterministic: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Write the time-indexed model as an LP file.
    ExportMilp {
        #[command(flatten)]
        inst: InstanceArg,
        /// LP destination; without it the LP text is embedded in the JSON.
        #[arg(long)]
        lp: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Check a solution row by row against the time-indexed model.
    CheckMilp {
        #[command(flatten)]
        inst: InstanceArg,
        #[arg(long)]
        solution: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Christofides truck tour, or a set cover recovered from a solution.
    Heuristic {
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long)]
        closure: bool,
        /// Set cover input; with `--solution`, recover a cover from it.
        #[arg(long)]
        msc: Option<PathBuf>,
        #[arg(long)]
        solution: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// SVG timeline of truck and drones.
    Gantt {
        #[command(flatten)]
        inst: InstanceArg,
        #[arg(long)]
        solution: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Recompute a reference result from the bundled fixtures.
    Repro {
        #[arg(long, value_enum)]
        target: Target,
        /// Seconds per solve for the large fixtures.
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformOp {
    Shortcut,
    SingleDrone,
    EqualSpeed,
    MCycle,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Euclidean,
    Shuttle,
    Loop,
    Mtope,
    Msc,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Fig3,
    Fig8,
    Fig2,
    Fig4,
    Fig5,
    Prop7Small,
    Chain,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_instance(arg: &InstanceArg) -> Result<Instance> {
    load_instance_path(&arg.instance, arg.closure)
}

fn load_instance_path(path: &Path, closure: bool) -> Result<Instance> {
    let file: InstanceFile = read_json(path)?;
    let inst = if closure { build_instance_with_closure(&file)? } else { build_instance(&file)? };
    Ok(inst)
}

fn load_solution(inst: &Instance, path: &Path) -> Result<tspmd::Solution> {
    let file: SolutionFile = read_json(path)?;
    Ok(file.to_solution(inst)?)
}

fn emit_text(out: &Output, text: &str) -> Result<()> {
    match &out.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn emit(out: &Output, v: &Value) -> Result<()> {
    let mut text = if out.pretty { serde_json::to_string_pretty(v)? } else { serde_json::to_string(v)? };
    text.push('\n');
    emit_text(out, &text)
}

fn solution_json(inst: &Instance, sol: &tspmd::Solution) -> Value {
    serde_json::to_value(SolutionFile::from_solution(inst, sol)).unwrap()
}

fn check(published: f64, got: f64) -> Value {
    json!({ "published": published, "value": got, "pass": (got - published).abs() <= REPRO_TOL })
}

fn repro(target: Target, time_limit: f64) -> Result<Value> {
    let fixture_eval = |name: &str| -> Result<Value> {
        let (inst, fs) = forge::fixture_solution(name)?;
        let rep = validate(&inst, &fs.solution);
        let got = evaluate(&inst, &fs.solution)?.completion_time;
        let mut v = check(fs.published, got);
        v["valid"] = json!(rep.valid);
        v["pass"] = json!(v["pass"].as_bool().unwrap() && rep.valid);
        Ok(v)
    };
    let exact = |fixture: &str, mode: Mode, published: f64| -> Result<Value> {
        let inst = forge::load_fixture(fixture)?;
        let cat = enumerate_sorties(&inst)?;
        let r = solve(&inst, &cat, &SolveConfig::new(mode))?;
        let got = r.objective().ok_or_else(|| anyhow!("no solution found"))?;
        let mut v = check(published, got);
        v["mode"] = json!(mode.name());
        v["status"] = json!(r.status);
        v["pass"] = json!(v["pass"].as_bool().unwrap() && r.status == Status::Optimal);
        Ok(v)
    };
    let warm = |name: &str, mode: Mode| -> Result<Value> {
        let (inst, fs) = forge::fixture_solution(name)?;
        let cat = enumerate_sorties(&inst)?;
        let cfg = SolveConfig::new(mode).with_time_limit(time_limit).with_incumbent(fs.solution.clone());
        let r = solve(&inst, &cat, &cfg)?;
        Ok(json!({
            "fixture": fixture_eval(name)?,
            "search": {
                "mode": mode.name(),
                "status": r.status,
                "value": r.objective(),
                "best_bound": r.best_bound,
                "nodes": r.stats.nodes,
                "seconds": r.stats.wall_seconds,
                "optimality_certified": r.status == Status::Optimal,
            }
        }))
    };
    let v = match target {
        Target::Fig3 => json!({ "solver": exact("fig3", Mode::TspMd, 62.42)?, "fixture": fixture_eval("fig3")? }),
        Target::Fig8 => {
            let inst = forge::load_fixture("fig3")?;
            let cat = enumerate_sorties(&inst)?;
            let circuit = solve(&inst, &cat, &SolveConfig::new(Mode::MCircuit))?;
            json!({
                "solver": exact("fig3", Mode::MCycle, 76.14)?,
                "fixture": fixture_eval("fig8")?,
                "m_circuit": { "status": circuit.status, "value": circuit.objective() },
            })
        }
        Target::Fig2 => json!({ "fixture": fixture_eval("fig2")? }),
        Target::Fig4 => warm("fig4", Mode::MCircuit)?,
        Target::Fig5 => warm("fig5", Mode::TspMd)?,
        Target::Prop7Small => {
            let fams = [
                ("loop_k1_eps0.1", forge::loop_family(1, 0.1)?),
                ("mtope_m2_eps0.1", forge::mtope_family(2, 0.1)?),
                ("shuttle_k1_eps1", forge::shuttle_family(1, 1.0)?),
            ];
            let mut rows = Vec::new();
            for (name, fam) in fams {
                let cat = enumerate_sorties(&fam.instance)?;
                let un = solve(&fam.instance, &cat, &SolveConfig::new(Mode::TspMd))?;
                let cy = solve(&fam.instance, &cat, &SolveConfig::new(Mode::MCycle))?;
                rows.push(json!({
                    "family": name,
                    "unrestricted": check(fam.claimed_unrestricted, un.objective().unwrap_or(f64::NAN)),
                    "cycle": check(fam.claimed_cycle, cy.objective().unwrap_or(f64::NAN)),
                }));
            }
            json!({ "families": rows })
        }
        Target::Chain => {
            let inst = forge::load_fixture("fig3")?;
            let cat = enumerate_sorties(&inst)?;
            let chain = tspmd::solver::objective_chain_check(&inst, &cat, &SolveConfig::new(Mode::TspMd))?;
            let m = inst.drones() as f64;
            json!({
                "chain": chain,
                "nondecreasing": true,
                "cycle_within_factor": chain.m_cycle <= (1.0 + 2.0 * m) * chain.tsp_md + 1e-9,
            })
        }
    };
    Ok(v)
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::ValidateInstance { inst, out } => {
            let i = load_instance(&inst)?;
            let d = tspmd::model::compute_derived(&i).ok();
            emit(&out, &json!({
                "valid": true,
                "name": i.name(),
                "n": i.n(),
                "drones": i.drones(),
                "labels": i.labels(),
                "alpha": d.map(|d| d.alpha),
                "max_sortie_duration": i.max_sortie_duration(),
                "truck_visits_all": i.truck_visits_all(),
            }))
        }
        Command::Solve { inst, mode, time_limit, node_limit, warm_start, deterministic: _, out } => {
            let i = load_instance(&inst)?;
            let cat = enumerate_sorties(&i)?;
            let mut cfg = SolveConfig::new(mode);
            if let Some(t) = time_limit {
                cfg = cfg.with_time_limit(t);
            }
            if let Some(nl) = node_limit {
                cfg = cfg.with_node_limit(nl);
            }
            if let Some(p) = warm_start {
                cfg = cfg.with_incumbent(load_solution(&i, &p)?);
            }
            let r = solve(&i, &cat, &cfg)?;
            let (sol, sched) = match &r.best {
                Some((s, sc)) => (Some(solution_json(&i, s)), Some(serde_json::to_value(sc)?)),
                None => (None, None),
            };
            emit(&out, &json!({
                "mode": mode.name(),
                "status": r.status,
                "objective": r.objective(),
                "best_bound": r.best_bound,
                "stats": r.stats,
                "sorties": cat.len(),
                "solution": sol,
                "schedule": sched,
            }))
        }
        Command::Evaluate { inst, solution, out } => {
            let i = load_instance(&inst)?;
            let s = load_solution(&i, &solution)?;
            emit(&out, &serde_json::to_value(evaluate(&i, &s)?)?)
        }
        Command::Validate { inst, solution, out } => {
            let i = load_instance(&inst)?;
            let s = load_solution(&i, &solution)?;
            let rep = validate(&i, &s);
            emit(&out, &serde_json::to_value(&rep)?)?;
            if !rep.valid {
                bail!("solution is not valid");
            }
            Ok(())
        }
        Command::Classify { inst, solution, out } => {
            let i = load_instance(&inst)?;
            let s = load_solution(&i, &solution)?;
            emit(&out, &serde_json::to_value(classify(&s))?)
        }
        Command::Bounds { inst, solution, lb, force, out } => {
            let i = load_instance(&inst)?;
            let cat = enumerate_sorties(&i)?;
            let s = solution.map(|p| load_solution(&i, &p)).transpose()?;
            emit(&out, &serde_json::to_value(bound_report(&i, &cat, s.as_ref(), lb, force))?)
        }
        Command::Transform { inst, solution, op, out } => {
            let i = load_instance(&inst)?;
            let s = load_solution(&i, &solution)?;
            let before = evaluate(&i, &s)?.completion_time;
            let t = match op {
                TransformOp::Shortcut => transform::shortcut_redundant(&i, &s)?,
                TransformOp::SingleDrone => transform::remove_retraversal_single_drone(&i, &s)?,
                TransformOp::EqualSpeed => transform::remove_retraversal_equal_speed(&i, &s)?,
                TransformOp::MCycle => transform::to_m_cycle(&i, &s)?,
            };
            let after = evaluate(&i, &t)?.completion_time;
            emit(&out, &json!({
                "objective_before": before,
                "objective_after": after,
                "classification": classify(&t),
                "solution": solution_json(&i, &t),
            }))
        }
        Command::Generate { kind, n, seed, alpha, max_duration, drones, k, eps, msc, deterministic: _, out } => {
            let file = match kind {
                GenKind::Euclidean => forge::random_euclidean_file(n, seed, alpha, max_duration, drones)?,
                GenKind::Shuttle => forge::shuttle_family(k, eps)?.instance.to_file(),
                GenKind::Loop => forge::loop_family(k, eps)?.instance.to_file(),
                GenKind::Mtope => forge::mtope_family(drones, eps)?.instance.to_file(),
                GenKind::Msc => {
                    let m: MscInstance = match msc {
                        Some(p) => read_json(&p)?,
                        None => forge::random_msc(seed, 4, 5),
                    };
                    forge::msc_reduce(&m, alpha.max(1.0), drones)?.to_file()
                }
            };
            emit(&out, &serde_json::to_value(file)?)
        }
        Command::ExportMilp { inst, lp, out } => {
            let i = load_instance(&inst)?;
            let cat = enumerate_sorties(&i)?;
            let model = build_model(&i, &cat);
            let text = model.export_lp();
            let counts: serde_json::Map<String, Value> =
                model.family_counts().into_iter().map(|(f, c)| (f.name().to_string(), json!(c))).collect();
            let mut v = json!({
                "positions": model.positions(),
                "variables": model.num_x() + model.num_w() + model.num_z(),
                "rows_by_family": counts,
            });
            match lp {
                Some(p) => {
                    fs::write(&p, &text).with_context(|| format!("writing {}", p.display()))?;
                    v["lp_path"] = json!(p);
                }
                None => v["lp"] = json!(text),
            }
            emit(&out, &v)
        }
        Command::CheckMilp { inst, solution, out } => {
            let i = load_instance(&inst)?;
            let s = load_solution(&i, &solution)?;
            let cat = enumerate_sorties(&i)?;
            let model = build_model(&i, &cat);
            let chk = check_solution_against_model(&model, &s)?;
            let rep = validate(&i, &s);
            let agrees = chk.satisfied == rep.valid
                && rep.completion_time.is_none_or(|t| !chk.satisfied || objectives_agree(t, chk.objective));
            emit(&out, &json!({ "milp": chk, "validate": rep, "agrees": agrees }))
        }
        Command::Heuristic { instance, closure, msc, solution, out } => match (msc, instance) {
            (Some(mp), _) => {
                let m: MscInstance = read_json(&mp)?;
                m.check()?;
                let best = msc_bruteforce(&m).ok();
                let mut v = json!({ "optimum": best.as_ref().map(|b| b.len()), "optimal_cover": best });
                if let Some(sp) = solution {
                    let inst = forge::msc_reduce(&m, 1.0, 1)?;
                    let file: SolutionFile = read_json(&sp)?;
                    let sol = file.to_solution(&inst)?;
                    let cover = msc_from_solution(&m, &sol)?;
                    v["cover"] = json!(cover);
                    v["cover_size"] = json!(cover.len());
                }
                emit(&out, &v)
            }
            (None, Some(ip)) => {
                let i = load_instance_path(&ip, closure)?;
                let h = heuristic_solution(&i)?;
                let obj = evaluate(&i, &h.solution)?.completion_time;
                emit(&out, &json!({
                    "basis": h.basis,
                    "guarantee": h.guarantee,
                    "objective": obj,
                    "tour": h.tour.nodes.iter().map(|&v| i.label(v)).collect::<Vec<_>>(),
                    "solution": solution_json(&i, &h.solution),
                }))
            }
            (None, None) => bail!("heuristic needs --instance or --msc"),
        },
        Command::Gantt { inst, solution, out } => {
            let i = load_instance(&inst)?;
            let s = load_solution(&i, &solution)?;
            let sched = evaluate(&i, &s)?;
            emit_text(&out, &tspmd::gantt::gantt_svg(&i, &s, &sched))
        }
        Command::Repro { target, time_limit, out } => {
            let v = repro(target, time_limit)?;
            emit(&out, &v)?;
            if !all_pass(&v) {
                bail!("reproduction did not match the reference values");
            }
            Ok(())
        }
    }
}

/// Every `pass` field in the report is true.
fn all_pass(v: &Value) -> bool {
    match v {
        Value::Object(m) => m.iter().all(|(k, x)| if k == "pass" { x.as_bool() == Some(true) } else { all_pass(x) }),
        Value::Array(a) => a.iter().all(all_pass),
        _ => true,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
