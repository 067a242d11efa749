//! Subcommand orchestration.

use std::path::Path;

use cascade_core::carleman::{default_l, eval_weights};
use cascade_core::hum::{mean_square, CgOptions};
use cascade_core::{
    assemble_gramian, build_psi, carleman_lambda_sweep, check_gronwall, compute_k, compute_lambda0, cost_sweep,
    energy_history, estimate_observability_constant, solve_adjoint, solve_backward, synthesize_control,
    unique_continuation_probe, validate_structure, Observability, Scheme,
};
use serde_json::{json, Value};

use crate::artifacts::{json_num, json_opt, num, opt, ArtifactSink, Table};
use crate::config::{to_canonical, ExperimentConfig, SchemeName};
use crate::error::CliError;
use crate::problem::{build_problem, initial_state, sample_states, terminal_energy, terminal_state, Problem};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    SolveAdjoint,
    Synthesize,
    Observability,
    UcProbe,
    Carleman,
    CostSweep,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::SolveAdjoint,
        Command::Synthesize,
        Command::Observability,
        Command::UcProbe,
        Command::Carleman,
        Command::CostSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::SolveAdjoint => "solve-adjoint",
            Command::Synthesize => "synthesize",
            Command::Observability => "observability",
            Command::UcProbe => "uc-probe",
            Command::Carleman => "carleman",
            Command::CostSweep => "cost-sweep",
        }
    }
}

/// Outcome summary printed by the binary.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub command: Command,
    pub artifacts: Vec<String>,
    pub headline: String,
}

fn scheme(name: SchemeName) -> Scheme {
    match name {
        SchemeName::Direct => Scheme::Direct,
        SchemeName::Transpose => Scheme::Transpose,
    }
}

/// Runs one subcommand and writes its artifacts under `out`.
pub fn run(command: Command, cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary, CliError> {
    let problem = build_problem(cfg)?;
    let mut sink = ArtifactSink::new(out, &cfg.output.formats)?;
    sink.text("config.toml", &to_canonical(cfg))?;
    let headline = match command {
        Command::SolveAdjoint => solve_adjoint_cmd(cfg, &problem, &mut sink)?,
        Command::Synthesize => synthesize_cmd(cfg, &problem, &mut sink)?,
        Command::Observability => observability_cmd(cfg, &problem, &mut sink)?,
        Command::UcProbe => uc_probe_cmd(cfg, &problem, &mut sink)?,
        Command::Carleman => carleman_cmd(cfg, &problem, &mut sink)?,
        Command::CostSweep => cost_sweep_cmd(cfg, &problem, &mut sink)?,
    };
    let report = validate_structure(&problem.coeffs, &problem.subdomains.coupling);
    let manifest = json!({
        "subcommand": command.name(),
        "seed": cfg.seed,
        "admissible": report.is_admissible(),
        "violations": report.violations.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "artifacts": sink.written().to_vec(),
        "summary": headline,
    });
    sink.jsonl("manifest.jsonl", &[manifest])?;
    Ok(RunSummary { command, artifacts: sink.written().to_vec(), headline })
}

fn solve_adjoint_cmd(cfg: &ExperimentConfig, p: &Problem, sink: &mut ArtifactSink) -> Result<String, CliError> {
    let z0 = initial_state(cfg, &p.grid);
    let traj = solve_adjoint(&z0, &p.coeffs, &p.tree, &p.grid, None)?;
    let (n, nx, h) = (cfg.n(), p.grid.nx(), p.grid.h());
    let total = energy_history(&traj, &p.grid);

    let mut header = vec!["level".to_string(), "time".into(), "energy".into()];
    header.extend((1..=n).map(|i| format!("energy_{i}")));
    let mut table = Table::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    for (m, e) in total.iter().enumerate() {
        let level = traj.field().level(m)?;
        let nodes = if level.is_uniform() { 1 } else { p.tree.nodes_at(m) };
        let weight = 1.0 / nodes as f64;
        let mut parts = vec![0.0; n];
        for k in 0..nodes {
            let v = level.node(k, n * nx);
            for (i, part) in parts.iter_mut().enumerate() {
                *part += weight * h * v[i * nx..(i + 1) * nx].iter().map(|x| x * x).sum::<f64>();
            }
        }
        let mut row = vec![m.to_string(), num(p.tree.time(m)), num(*e)];
        row.extend(parts.into_iter().map(num));
        table.push(row);
    }
    sink.csv("adjoint_norms.csv", &table)?;

    let g = check_gronwall(&traj, &p.coeffs, &p.grid, &p.tree, cfg.solver.gronwall_fit);
    let record = json!({
        "scheme": traj.scheme(),
        "initial_energy": json_num(total[0]),
        "terminal_energy": json_num(total[total.len() - 1]),
        "gronwall_growth": json_opt(g.growth),
        "gronwall_bound": json_num(g.bound),
        "gronwall_fit_constant": json_num(g.fit_constant),
        "gronwall_fitted": json_opt(g.fitted),
        "gronwall_pass": g.pass,
        "gronwall_undefined_ratio": g.undefined_ratio,
    });
    sink.jsonl("adjoint_report.jsonl", &[record])?;
    Ok(format!("terminal energy {} (gronwall {})", num(total[total.len() - 1]), if g.pass { "pass" } else { "fail" }))
}

fn synthesize_cmd(cfg: &ExperimentConfig, p: &Problem, sink: &mut ArtifactSink) -> Result<String, CliError> {
    let y_t = terminal_state(cfg, &p.grid, &p.tree)?;
    let terminal = terminal_energy(&y_t, &p.tree, &p.grid)?;
    let options = CgOptions { tol: cfg.solver.cg_tol, max_iter: cfg.solver.cg_max_iter };
    let rerun_scheme = scheme(cfg.solver.scheme);
    let mut table = Table::new(&[
        "epsilon",
        "residual",
        "cost",
        "residual_rerun",
        "cg_iterations",
        "cg_relative_residual",
        "optimality_defect",
    ]);
    let mut records = Vec::new();
    for &eps in &cfg.solver.epsilons {
        let r = synthesize_control(&y_t, eps, &p.coeffs, &p.tree, &p.grid, &p.subdomains.control, options)?;
        let rerun = solve_backward(rerun_scheme, &y_t, &r.control, &p.coeffs, &p.tree, &p.grid)?;
        let residual_rerun = mean_square(rerun.y(), 0, &p.grid)?;
        table.push(vec![
            num(eps),
            num(r.residual),
            num(r.cost),
            num(residual_rerun),
            r.cg_iterations.to_string(),
            num(r.cg_relative_residual),
            num(r.optimality_defect),
        ]);
        let z0_norm = (p.grid.h() * r.z0.iter().map(|v| v * v).sum::<f64>()).sqrt();
        records.push(json!({
            "epsilon": json_num(eps),
            "residual": json_num(r.residual),
            "cost": json_num(r.cost),
            "penalized_objective": json_num(0.5 * r.cost + 0.5 / eps * r.residual),
            "residual_rerun": json_num(residual_rerun),
            "rerun_scheme": rerun_scheme.tag(),
            "terminal_energy": json_num(terminal),
            "free_norm": json_num(r.free_norm),
            "z0_norm": json_num(z0_norm),
            "cg_iterations": r.cg_iterations,
            "cg_relative_residual": json_num(r.cg_relative_residual),
            "cg_tol": json_num(r.cg_tol),
            "optimality_defect": json_num(r.optimality_defect),
        }));
    }
    sink.csv("hum_sweep.csv", &table)?;
    sink.jsonl("hum.jsonl", &records)?;
    Ok(format!("{} penalty values, terminal energy {}", records.len(), num(terminal)))
}

fn spectrum_table(values: &[f64]) -> Table {
    let top = values.last().copied().unwrap_or(0.0);
    let mut table = Table::new(&["index", "eigenvalue", "relative"]);
    for (i, &v) in values.iter().enumerate() {
        table.push(vec![i.to_string(), num(v), num(if top > 0.0 { v / top } else { 0.0 })]);
    }
    table
}

fn observability_cmd(cfg: &ExperimentConfig, p: &Problem, sink: &mut ArtifactSink) -> Result<String, CliError> {
    let gram = assemble_gramian(&p.coeffs, &p.tree, &p.grid, &p.subdomains.control)?;
    sink.csv("gramian_spectrum.csv", &spectrum_table(&gram.spectrum.values))?;
    let est = estimate_observability_constant(&gram, cfg.solver.rank_tol)?;
    let k = compute_k(&p.coeffs, p.tree.horizon())?;
    let s = est.spectrum();
    let (status, c_obs, energy) = match &est {
        Observability::Observable { c_obs, .. } => ("observable", Some(*c_obs), None),
        Observability::NotObservable { energy, .. } => ("not-observable", None, Some(*energy)),
    };
    let record = json!({
        "status": status,
        "order": gram.order(),
        "asymmetry": json_num(gram.asymmetry),
        "min_relative_eigenvalue": json_num(gram.min_relative_eigenvalue),
        "lambda_max": json_num(s.lambda_max),
        "lambda_min": json_num(s.lambda_min),
        "rank": s.rank,
        "discarded": s.discarded,
        "rank_tol": json_num(s.rank_tol),
        "c_obs": json_opt(c_obs),
        "witness_energy": json_opt(energy),
        "k": json_num(k),
        "log_c_over_k": json_opt(c_obs.filter(|c| *c > 0.0).map(|c| c.ln() / k)),
    });
    sink.jsonl("observability.jsonl", &[record])?;
    Ok(match c_obs {
        Some(c) => format!("C_obs = {}", num(c)),
        None => format!("not observable (witness energy {})", opt(energy)),
    })
}

fn uc_probe_cmd(cfg: &ExperimentConfig, p: &Problem, sink: &mut ArtifactSink) -> Result<String, CliError> {
    let gram = assemble_gramian(&p.coeffs, &p.tree, &p.grid, &p.subdomains.control)?;
    let report = unique_continuation_probe(&gram, cfg.solver.rank_tol)?;
    let record = json!({
        "outcome": if report.pass { "pass" } else { "fail" },
        "kernel_dim": report.kernel_dim,
        "max_energy": json_num(report.max_energy),
        "rank_tol": json_num(report.rank_tol),
        "energy_over_tol": json_num(report.max_energy / report.rank_tol),
        "witness": report.witness.is_some(),
    });
    sink.jsonl("uc_probe.jsonl", &[record])?;
    if let Some(w) = &report.witness {
        let nx = p.grid.nx();
        let mut table = Table::new(&["component", "point", "x", "value"]);
        for (idx, v) in w.iter().enumerate() {
            table.push(vec![(idx / nx + 1).to_string(), (idx % nx + 1).to_string(), num(p.grid.x(idx % nx)), num(*v)]);
        }
        sink.csv("uc_witness.csv", &table)?;
    }
    Ok(format!(
        "unique continuation {} (max kernel energy {})",
        if report.pass { "pass" } else { "fail" },
        num(report.max_energy)
    ))
}

fn carleman_cmd(cfg: &ExperimentConfig, p: &Problem, sink: &mut ArtifactSink) -> Result<String, CliError> {
    let c = &cfg.carleman;
    let horizon = p.tree.horizon();
    let lambda0 = compute_lambda0(&p.coeffs, horizon, c.c0_cal)?;
    let psi = build_psi(&p.grid, &p.subdomains.weight)?;
    let lambdas: Vec<f64> = c.lambda_multipliers.iter().map(|m| m * lambda0).collect();
    let base = eval_weights(lambdas[0], c.mu, &psi, &p.grid, &p.tree)?;
    let l = cfg.l() as f64;
    let samples = sample_states(cfg, &p.grid);
    let checks =
        carleman_lambda_sweep(&p.coeffs, &p.tree, &p.grid, &base, &lambdas, l, &samples, &p.subdomains.coupling)?;

    let mut table = Table::new(&["sample", "lambda", "lhs", "rhs", "ratio", "ln_lhs", "ln_rhs"]);
    let mut records = Vec::new();
    for check in &checks {
        for row in &check.rows {
            table.push(vec![
                row.sample.to_string(),
                num(row.lambda),
                num(row.lhs.value()),
                num(row.rhs.value()),
                opt(row.ratio),
                num(row.lhs.ln()),
                num(row.rhs.ln()),
            ]);
        }
        records.push(json!({
            "lambda": json_num(check.rows.first().map_or(f64::NAN, |r| r.lambda)),
            "max_ratio": json_opt(check.max_ratio),
            "violations": check.violations,
            "skipped": check.skipped,
            "l": json_num(check.l),
        }));
    }
    let finite: Vec<f64> = checks.iter().filter_map(|c| c.max_ratio).collect();
    let spread = match (finite.iter().copied().reduce(f64::max), finite.iter().copied().reduce(f64::min)) {
        (Some(hi), Some(lo)) if lo > 0.0 && finite.len() == checks.len() => Some(hi / lo),
        _ => None,
    };
    records.push(json!({
        "lambda0": json_num(lambda0),
        "mu": json_num(c.mu),
        "c0_cal": json_num(c.c0_cal),
        "l": cfg.l(),
        "default_l": default_l(cfg.n()),
        "samples": samples.len(),
        "psi_sup": json_num(base.psi_sup),
        "alpha_time_constant": json_opt(base.alpha_time_constant(&p.tree)),
        "ratio_spread": json_opt(spread),
    }));
    sink.csv("carleman.csv", &table)?;
    sink.jsonl("carleman_summary.jsonl", &records)?;
    Ok(format!("lambda0 = {}, max-ratio spread across the sweep {}", num(lambda0), opt(spread)))
}

fn cost_sweep_cmd(cfg: &ExperimentConfig, p: &Problem, sink: &mut ArtifactSink) -> Result<String, CliError> {
    let rows = cost_sweep(
        &cfg.sweep.horizons,
        &p.coeffs,
        cfg.problem.depth,
        &p.grid,
        &p.subdomains.control,
        cfg.solver.rank_tol,
    )?;
    let mut table = Table::new(&["horizon", "c_obs", "k", "log_c", "c0_fit"]);
    let mut records: Vec<Value> = Vec::new();
    for r in &rows {
        table.push(vec![num(r.horizon), opt(r.c_obs), num(r.k), opt(r.log_c), opt(r.c0_fit)]);
        records.push(json!({
            "horizon": json_num(r.horizon),
            "c_obs": json_opt(r.c_obs),
            "k": json_num(r.k),
            "log_c": json_opt(r.log_c),
            "c0_fit": json_opt(r.c0_fit),
        }));
    }
    sink.csv("cost_sweep.csv", &table)?;
    sink.jsonl("cost_sweep.jsonl", &records)?;
    Ok(format!("{} horizons, C0_fit {}", rows.len(), opt(rows.first().and_then(|r| r.c0_fit))))
}
