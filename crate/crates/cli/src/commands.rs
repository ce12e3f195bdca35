//! Implementations of the subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use stmdp::gridworld::{self, GridSpec, StateIndexing, BENCH_WIND};
use stmdp::mdp::{self, MdpModel, SolverConfig};
use stmdp::sim;
use stmdp::trigger::{self, LookaheadSolution, TriggerConfig};

use crate::args::{
    ExportArgs, GuaranteeArgs, ImportArgs, MapArgs, RenderArgs, SimulateArgs, SolveArgs,
};
use crate::document::{self, PolicyDocument, PolicyRecord, ProblemKind};
use crate::render::render_policy;
use crate::CliError;

const DEFAULT_BETA: f64 = 0.95;
const DEFAULT_T_BAR: usize = 6;

/// Map document plus resolved solver parameters (flag > map header >
/// default).
pub struct Scene {
    pub spec: GridSpec,
    pub model: MdpModel,
    pub indexing: StateIndexing,
    pub beta: f64,
    pub t_bar: usize,
    pub tolerance: f64,
}

impl Scene {
    pub fn load(map: &MapArgs) -> Result<Self, CliError> {
        let text = fs::read_to_string(&map.map)
            .map_err(|e| CliError::Io(format!("{}: {e}", map.map.display())))?;
        let mut spec = gridworld::parse_map(&text).map_err(|e| CliError::Parse(e.to_string()))?;
        if map.windy {
            spec = spec
                .with_wind(BENCH_WIND, BENCH_WIND)
                .map_err(|e| CliError::Parse(e.to_string()))?;
        }
        let beta = map.beta.or(spec.beta()).unwrap_or(DEFAULT_BETA);
        let t_bar = map.tbar.or(spec.t_bar()).unwrap_or(DEFAULT_T_BAR);
        let tolerance = map.tolerance;
        let (model, indexing) = gridworld::build_mdp(&spec);
        Ok(Self {
            spec,
            model,
            indexing,
            beta,
            t_bar,
            tolerance,
        })
    }

    fn trigger_config(&self) -> TriggerConfig {
        TriggerConfig::new(self.beta, self.t_bar).with_tolerance(self.tolerance)
    }

    fn describe(&self) -> String {
        format!(
            "wind ({}, {}), beta {}, t_bar {}, tolerance {}",
            self.spec.wind_north(),
            self.spec.wind_west(),
            self.beta,
            self.t_bar,
            self.tolerance
        )
    }
}

fn policy_document(
    scene: &Scene,
    problem: ProblemKind,
    solution_values: &stmdp::ValueFunction,
    policy: &stmdp::SelfTriggeredPolicy,
    iterations: usize,
    residual: f64,
) -> PolicyDocument {
    let records = (0..scene.model.num_states())
        .map(|x| PolicyRecord {
            display: x + 1,
            tau: policy.waiting_time(x),
            action: scene.model.action_label(policy.action(x)),
            value: solution_values.value(x),
        })
        .collect();
    PolicyDocument {
        fingerprint: document::fingerprint(&scene.model),
        problem,
        beta: scene.beta,
        t_bar: scene.t_bar,
        iterations,
        residual,
        records,
    }
}

fn write_or_print(out: &Option<PathBuf>, name: &str, text: &str) -> Result<(), CliError> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            println!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// Formats a parameter for file names: `0.1` -> `0.1`, `40` -> `40`.
fn param_slug(value: f64) -> String {
    value.to_string()
}

pub fn cmd_solve(args: &SolveArgs) -> Result<(), CliError> {
    let scene = Scene::load(&args.map)?;
    let mut penalties = args.penalty.clone();
    if penalties.is_empty() {
        penalties.push(0.0);
    }
    penalties.sort_by(|a, b| a.partial_cmp(b).expect("finite penalties"));
    penalties.dedup();

    let tables = trigger::build_lookahead_tables(&scene.model, &scene.trigger_config())?;
    let jobs = args.jobs.max(1);
    let solutions: Vec<Result<LookaheadSolution, trigger::TriggerError>> = if jobs == 1 {
        penalties
            .iter()
            .map(|&o| {
                trigger::solve_penalized_with_tables(
                    &tables,
                    &scene.trigger_config().with_penalty(o),
                )
            })
            .collect()
    } else {
        // Independent solves; results are collected back in parameter order.
        std::thread::scope(|scope| {
            let handles: Vec<_> = penalties
                .iter()
                .map(|&o| {
                    let tables = &tables;
                    let scene = &scene;
                    scope.spawn(move || {
                        trigger::solve_penalized_with_tables(
                            tables,
                            &scene.trigger_config().with_penalty(o),
                        )
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("solver thread"))
                .collect()
        })
    };

    println!("map {} ({})", args.map.map.display(), scene.describe());
    for (&penalty, solution) in penalties.iter().zip(solutions) {
        let solution = solution?;
        println!(
            "penalty {penalty}: converged in {} iterations, residual {:.3e}",
            solution.iterations, solution.residual
        );
        let doc = policy_document(
            &scene,
            ProblemKind::Penalty(penalty),
            &solution.values,
            &solution.policy,
            solution.iterations,
            solution.residual,
        );
        print!(
            "{}",
            render_policy(&scene.spec, &scene.indexing, &doc, args.unicode)
        );
        write_or_print(
            &args.out,
            &format!("penalty-{}.policy", param_slug(penalty)),
            &doc.to_text(),
        )?;
    }
    Ok(())
}

pub fn cmd_guarantee(args: &GuaranteeArgs) -> Result<(), CliError> {
    let scene = Scene::load(&args.map)?;
    let mut alphas = args.alpha.clone();
    alphas.sort_by(|a, b| a.partial_cmp(b).expect("finite alphas"));
    alphas.dedup();
    for &alpha in &alphas {
        if alpha < 1.0 || alpha.is_nan() {
            return Err(CliError::Usage(format!(
                "suboptimality factor must be at least 1, got {alpha}"
            )));
        }
    }

    let classic = mdp::value_iteration(
        &scene.model,
        &SolverConfig::new(scene.beta)
            .with_tolerance(scene.tolerance)
            .with_max_iterations(100_000),
    )?;
    println!(
        "map {} ({}); classic solve: {} iterations, residual {:.3e}",
        args.map.map.display(),
        scene.describe(),
        classic.iterations,
        classic.residual
    );

    let per_alpha = |alpha: f64| -> Result<
        (
            trigger::GreedySynthesis,
            trigger::GuaranteeReport,
            stmdp::ValueFunction,
        ),
        trigger::TriggerError,
    > {
        let config = scene.trigger_config().with_alpha(alpha);
        let synthesis = trigger::synthesize_guaranteed(&scene.model, &classic.values, &config)?;
        let report =
            trigger::verify_guarantee(&scene.model, &synthesis.policy, &classic.values, &config)?;
        let realized = trigger::evaluate_policy(&scene.model, &synthesis.policy, &config, false)?;
        Ok((synthesis, report, realized))
    };
    let results: Vec<_> = if args.jobs <= 1 {
        alphas.iter().map(|&alpha| per_alpha(alpha)).collect()
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = alphas
                .iter()
                .map(|&alpha| scope.spawn(move || per_alpha(alpha)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("synthesis thread"))
                .collect()
        })
    };

    let mut any_violation = false;
    for (&alpha, result) in alphas.iter().zip(results) {
        let (synthesis, report, realized) = result?;
        let doc = policy_document(
            &scene,
            ProblemKind::Guarantee(alpha),
            &realized,
            &synthesis.policy,
            classic.iterations,
            classic.residual,
        );
        let updates_saved: usize = synthesis.policy.waiting_times().iter().sum();
        println!(
            "alpha {alpha}: waits sum to {updates_saved} over {} states; held-action test {}; \
             realized bound {}",
            scene.model.num_states(),
            if report.all_holding_ok() {
                "holds"
            } else {
                "FAILS"
            },
            if report.all_realized_ok() {
                "holds"
            } else {
                "FAILS"
            },
        );
        for failure in report.failures() {
            any_violation = true;
            println!(
                "  state {}: held-action cost {:.6}, realized {:.6}, bound {:.6}",
                scene.indexing.display_index(failure.state).unwrap(),
                failure.holding_cost,
                failure.realized_cost,
                failure.bound
            );
        }
        print!(
            "{}",
            render_policy(&scene.spec, &scene.indexing, &doc, args.unicode)
        );
        write_or_print(
            &args.out,
            &format!("alpha-{}.policy", param_slug(alpha)),
            &doc.to_text(),
        )?;
    }
    if any_violation {
        return Err(CliError::Guarantee(
            "at least one state violates the suboptimality bound".into(),
        ));
    }
    Ok(())
}

fn load_policy(
    scene: &Scene,
    path: &Path,
) -> Result<(PolicyDocument, stmdp::SelfTriggeredPolicy), CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let doc = PolicyDocument::parse(&text).map_err(|e| CliError::Parse(e.to_string()))?;
    doc.check_model(&scene.model)
        .map_err(|e| CliError::Parse(e.to_string()))?;
    let policy = doc
        .to_policy(&scene.model)
        .map_err(|e| CliError::Parse(e.to_string()))?;
    Ok((doc, policy))
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let scene = Scene::load(&args.map)?;
    let (doc, policy) = load_policy(&scene, &args.policy)?;
    let penalty = match doc.problem {
        ProblemKind::Penalty(o) => o,
        ProblemKind::Guarantee(_) => 0.0,
    };
    let config = TriggerConfig::new(doc.beta, doc.t_bar)
        .with_penalty(penalty)
        .with_tolerance(scene.tolerance);
    let start = match args.start {
        Some(display) => scene
            .indexing
            .state_from_display(display)
            .ok_or_else(|| CliError::Usage(format!("no state with display index {display}")))?,
        None => scene.indexing.start_state(),
    };
    let horizon = args.horizon.unwrap_or_else(|| {
        sim::default_horizon(config.beta, scene.model.max_cost() + penalty, 1e-4)
    });
    let goal = [
        scene.indexing.target_state(),
        scene.indexing.absorbing_state(),
    ];
    let stats = sim::estimate_cost(
        &scene.model,
        &policy,
        start,
        horizon,
        args.seeds,
        args.seed,
        &goal,
        &config,
    )?;
    println!(
        "simulate {} ({}, problem {} {})",
        args.policy.display(),
        scene.describe(),
        doc.problem.name(),
        doc.problem.parameter()
    );
    println!(
        "episodes {}, horizon {horizon}, seed {}, start state {}",
        stats.num_episodes,
        args.seed,
        scene.indexing.display_index(start).unwrap()
    );
    println!(
        "mean discounted cost {:.6} (stderr {:.6})",
        stats.mean_cost, stats.stderr_cost
    );
    println!(
        "mean update penalty {:.6} (stderr {:.6})",
        stats.mean_penalty, stats.stderr_penalty
    );
    println!(
        "mean total {:.6} (stderr {:.6})",
        stats.mean_total, stats.stderr_total
    );
    println!(
        "mean steps to goal {:.4}, mean updates {:.4}",
        stats.mean_steps, stats.mean_updates
    );
    println!(
        "savings {:.4} ({:.2}%)",
        stats.savings_ratio,
        stats.savings_ratio * 100.0
    );
    if let Some(trace) = &args.trace {
        let traj = sim::rollout(&scene.model, &policy, start, horizon, args.seed, &config)?;
        let mut out = String::new();
        for t in 0..traj.len() {
            let state = traj.states[t];
            let action = traj.actions[t];
            let triggered = traj.trigger_times.contains(&t);
            out.push_str(&format!(
                "{t}\t{}\t{}\t{}\t{}\n",
                scene.indexing.display_index(state).unwrap(),
                scene.model.action_label(action),
                u8::from(triggered),
                scene.model.cost(state, action)
            ));
        }
        fs::write(trace, out).map_err(|e| CliError::Io(format!("{}: {e}", trace.display())))?;
        println!("wrote trace {}", trace.display());
    }
    Ok(())
}

pub fn cmd_render(args: &RenderArgs) -> Result<(), CliError> {
    let scene = Scene::load(&args.map)?;
    let (doc, _) = load_policy(&scene, &args.policy)?;
    print!(
        "{}",
        render_policy(&scene.spec, &scene.indexing, &doc, args.unicode)
    );
    Ok(())
}

pub fn cmd_export(args: &ExportArgs) -> Result<(), CliError> {
    let scene = Scene::load(&args.map)?;
    let text = document::model_to_text(&scene.model);
    match &args.out {
        Some(path) => {
            fs::write(path, &text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            println!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

pub fn cmd_import(args: &ImportArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.file)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.file.display())))?;
    let first = text.lines().next().unwrap_or_default();
    match first {
        document::MODEL_HEADER => {
            let model =
                document::model_from_text(&text).map_err(|e| CliError::Parse(e.to_string()))?;
            if let Some(map) = &args.map {
                let scene = Scene::load(&MapArgs {
                    map: map.clone(),
                    windy: args.windy,
                    beta: None,
                    tbar: None,
                    tolerance: 1e-5,
                })?;
                if document::fingerprint(&model) != document::fingerprint(&scene.model) {
                    return Err(CliError::Parse(
                        "model document does not match the map-derived model".into(),
                    ));
                }
            }
            println!(
                "ok: model document, {} states, {} actions, fingerprint {}",
                model.num_states(),
                model.num_actions(),
                document::fingerprint(&model)
            );
        }
        document::POLICY_HEADER => {
            let doc = PolicyDocument::parse(&text).map_err(|e| CliError::Parse(e.to_string()))?;
            if let Some(map) = &args.map {
                let scene = Scene::load(&MapArgs {
                    map: map.clone(),
                    windy: args.windy,
                    beta: None,
                    tbar: None,
                    tolerance: 1e-5,
                })?;
                doc.check_model(&scene.model)
                    .map_err(|e| CliError::Parse(e.to_string()))?;
            }
            println!(
                "ok: policy document, {} states, problem {} {}, fingerprint {}",
                doc.records.len(),
                doc.problem.name(),
                doc.problem.parameter(),
                doc.fingerprint
            );
        }
        other => {
            return Err(CliError::Parse(format!(
                "unrecognised document header {other:?}"
            )))
        }
    }
    Ok(())
}
