use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use spillover_core::analysis::{balance_config, find_crossover, linspace, participation_check, CrossoverMetric};
use spillover_core::closed_forms::{oracle_errors, oracle_for};
use spillover_core::equilibrium::{solve as solve_eq, verify as verify_eq, Equilibrium};
use spillover_core::export::{equilibrium_csv, summary, sweep_csv};
use spillover_core::model::{ContestConfig, MultiConfig};
use spillover_core::vie::method_agreement;
use spillover_core::Player;

use crate::{Common, Format, MultiArgs, SweepArgs};

fn read_config(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))
}

fn load(path: &Path) -> Result<ContestConfig> {
    ContestConfig::from_json_str(&read_config(path)?).with_context(|| format!("config {}", path.display()))
}

/// Writes `text` to `out`, or to standard output.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// `eq.csv` → `eq.json`; `eq.json` → `eq.summary.json`.
fn summary_path(out: &Path) -> PathBuf {
    if out.extension().is_some_and(|e| e == "json") {
        out.with_extension("summary.json")
    } else {
        out.with_extension("json")
    }
}

fn run_header(args: &Common, cfg: &ContestConfig, eq: &Equilibrium) -> Value {
    json!({
        "config": cfg.to_json(),
        "grid_n": eq.grid.n(),
        "horizon": eq.grid.horizon(),
        "method": eq.method.name(),
        "atom_rule": eq.atom_rule,
        "tol": args.tol,
    })
}

fn solved(args: &Common) -> Result<(ContestConfig, Equilibrium)> {
    let cfg = load(&args.config)?;
    let spec = cfg.build()?;
    let eq = solve_eq(&spec, &args.solve_options()).with_context(|| format!("solving {}", args.config.display()))?;
    Ok((cfg, eq))
}

pub fn solve(args: &Common) -> Result<()> {
    let (cfg, eq) = solved(args)?;
    let mut doc = run_header(args, &cfg, &eq);
    doc["summary"] = json!(summary(&eq));
    doc["exit_scores"] = json!(eq.validation.exit_scores);
    match args.format {
        Format::Csv => {
            emit(args.out.as_deref(), &equilibrium_csv(&eq))?;
            match &args.out {
                Some(p) => emit(Some(&summary_path(p)), &pretty(&doc)),
                None => {
                    eprintln!("{}", serde_json::to_string(&doc)?);
                    Ok(())
                }
            }
        }
        Format::Json => {
            let [a, b] = &eq.strategies;
            doc["nodes"] = json!(eq.grid.nodes());
            doc["G1"] = json!(a.cdf);
            doc["G2"] = json!(b.cdf);
            doc["g1"] = json!(a.density);
            doc["g2"] = json!(b.density);
            emit(args.out.as_deref(), &pretty(&doc))
        }
    }
}

pub fn verify(args: &Common) -> Result<()> {
    let (cfg, eq) = solved(args)?;
    let report = verify_eq(&eq, args.tol)?;
    let agreement = method_agreement(&eq.spec, &eq.grid, eq.upper_bound, args.picard_tol, args.max_iter)?;
    let oracle = match oracle_for(&cfg, &eq.grid)? {
        Some(sol) => Some((sol.source, oracle_errors(&sol, &eq)?)),
        None => None,
    };

    let mut failures = Vec::new();
    if !report.passed {
        failures.push("equilibrium conditions");
    }
    if agreement.max() > args.tol {
        failures.push("method agreement");
    }
    let oracle_worst = oracle.as_ref().map(|(_, e)| e.iter().flatten().fold(0.0, |a: f64, b| a.max(*b)));
    if oracle_worst.is_some_and(|w| w > args.tol) {
        failures.push("oracle agreement");
    }
    let passed = failures.is_empty();

    let mut doc = run_header(args, &cfg, &eq);
    doc["summary"] = json!(summary(&eq));
    doc["verification"] = json!(report);
    doc["method_agreement"] = json!(agreement);
    doc["oracle"] = match &oracle {
        Some((source, errors)) => json!({"source": source, "sup_error": errors}),
        None => Value::Null,
    };
    doc["passed"] = json!(passed);

    let text = match args.format {
        Format::Json => pretty(&doc),
        Format::Csv => {
            let mut rows = vec!["check,value,limit,passed".to_string()];
            let mut row = |name: String, value: f64, limit: f64| {
                rows.push(format!("{name},{value:.16e},{limit:.16e},{}", value <= limit));
            };
            let scaled = report.tol * report.cost_scale;
            for (i, p) in report.players.iter().enumerate() {
                row(format!("residual_{}", i + 1), p.residual_sup, scaled);
                row(format!("best_gain_{}", i + 1), p.best_gain, scaled);
            }
            row("method_agreement".into(), agreement.max(), args.tol);
            if let Some(w) = oracle_worst {
                row("oracle_agreement".into(), w, args.tol);
            }
            rows.push(String::new());
            rows.join("\n")
        }
    };
    emit(args.out.as_deref(), &text)?;
    if !passed {
        bail!("verification failed: {}", failures.join(", "));
    }
    Ok(())
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    let c = &args.common;
    let cfg = load(&c.config)?;
    let values = linspace(args.from, args.to, args.steps)?;
    let opts = c.solve_options();
    let result = if args.crossover {
        let metric = match args.win_prob_target {
            Some(target) => CrossoverMetric::WinProb { player: Player::One, target },
            None => CrossoverMetric::PayoffDiff,
        };
        let cross = find_crossover(&cfg, &args.param, &values, metric, &opts)?;
        eprintln!(
            "crossover {} = {:.6} (bracket [{:.6}, {:.6}], {} bisections)",
            args.param, cross.value, cross.bracket[0], cross.bracket[1], cross.bisections
        );
        cross.sweep
    } else {
        spillover_core::analysis::sweep(&cfg, &args.param, &values, &opts)?
    };
    let text = match c.format {
        Format::Csv => sweep_csv(&result),
        Format::Json => pretty(&json!(result)),
    };
    emit(c.out.as_deref(), &text)
}

pub fn multi(args: &MultiArgs) -> Result<()> {
    let c = &args.common;
    let path = &c.config;
    let cfg = MultiConfig::from_json_str(&read_config(path)?).with_context(|| format!("config {}", path.display()))?;
    let n = cfg.spec.len();
    if let Some(k) = args.duo.iter().find(|k| **k >= n) {
        bail!("player {} does not exist; the contest has {n} players", k + 1);
    }
    let mut opts = c.solve_options();
    opts.horizon = opts.horizon.or(cfg.horizon);
    let report = participation_check(&cfg.spec, args.duo, &opts, c.tol)?;
    let text = match c.format {
        Format::Json => pretty(&json!(report)),
        Format::Csv => {
            let mut out = String::from("player,label,best_deviation,best_deviation_at,condition_holds,certified\n");
            for o in &report.outsiders {
                out.push_str(&format!(
                    "{},{},{:.16e},{:.16e},{},{}\n",
                    o.player + 1,
                    o.label,
                    o.best_deviation,
                    o.best_deviation_at,
                    o.condition_holds,
                    report.certified
                ));
            }
            out
        }
    };
    emit(c.out.as_deref(), &text)
}

pub fn balance(args: &Common) -> Result<()> {
    let cfg = load(&args.config)?;
    let (result, balanced) = balance_config(&cfg, &args.solve_options())?;
    let doc = json!({
        "gamma": result.gamma,
        "atom_player": result.atom_player,
        "scaled_player": result.scaled_player,
        "horizon": result.horizon,
        "balanced_config": balanced.to_json(),
    });
    emit(args.out.as_deref(), &pretty(&doc))
}
