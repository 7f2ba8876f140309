//! Command-line front end: `smartbeam <check|tune|simulate|bounds|sweep>`.
//!
//! Exit codes: 0 success, 1 negative placement check, 2 configuration or
//! input error, 3 infeasible placement or gains, 4 divergence, 5 anything else.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::analysis::{
    check_bounds, error_bound_curve, performance_metrics, residual_bounds, state_bound_curve, Metrics,
};
use crate::config::{load_config, preset, ExperimentConfig, GainStrategy};
use crate::error::{Error, Result};
use crate::modal_system::ModalSystem;
use crate::simulator::{simulate, SimConfig, SimulationResult};
use crate::synthesis::{check_placement, tune_gains_with, GainSet, PlacementVerdict, TuneOutcome};

#[derive(Debug, Parser)]
#[command(name = "smartbeam", version, about = "Observer-based vibration control of a piezo-patched beam")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Observability/controllability verdict for the configured placement.
    Check(CommonArgs),
    /// Design or load gains and write gains.csv.
    Tune(CommonArgs),
    /// Run the closed loop and write trajectory.csv and metrics.csv.
    Simulate(CommonArgs),
    /// Evaluate error, state and residual bounds against a run.
    Bounds(CommonArgs),
    /// One summary row per value of the configured sweep.
    Sweep(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML experiment file.
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in preset instead of a file (fig1..fig7, residual-smooth, residual-uniform).
    #[arg(long)]
    pub preset: Option<String>,
    /// Output directory.
    #[arg(long, env = "SMARTBEAM_OUT")]
    pub out: Option<PathBuf>,
    /// Seed for the initial state and measurement noise.
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::InvalidInput(_) | Error::Domain { .. } => 2,
        Error::Uncontrollable(_) | Error::Unobservable(_) | Error::NoFeasibleGain(_) | Error::UnstableMatrix { .. } => 3,
        Error::Divergence { .. } => 4,
        _ => 5,
    }
}

/// `%.12g`.
pub fn fmt_num(x: f64) -> String {
    const P: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= P {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv_row(out: &mut String, cells: &[f64]) {
    let row: Vec<String> = cells.iter().map(|&v| fmt_num(v)).collect();
    out.push_str(&row.join(","));
    out.push('\n');
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, body)?;
    Ok(path)
}

/// Placement check, gains and (optionally) the tuning record for one config.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: ExperimentConfig,
    pub system: ModalSystem,
    pub verdict: PlacementVerdict,
    pub gains: GainSet,
    pub tune: Option<TuneOutcome>,
}

pub fn verdict_error(verdict: &PlacementVerdict) -> Error {
    let list = |m: &[usize]| m.iter().map(|k| format!("mode {k}")).collect::<Vec<_>>().join(", ");
    if !verdict.observable {
        Error::Unobservable(format!("{} not observable: {}", list(&verdict.unobservable_modes), verdict.closed_form_reason))
    } else {
        Error::Uncontrollable(format!(
            "{} not controllable: {}",
            list(&verdict.uncontrollable_modes),
            verdict.closed_form_reason
        ))
    }
}

pub fn prepare(config: &ExperimentConfig) -> Result<Prepared> {
    let system = config.system()?;
    let verdict = check_placement(&system)?;
    if !verdict.is_feasible() {
        return Err(verdict_error(&verdict));
    }
    let (gains, tune) = match &config.gains {
        GainStrategy::Explicit { k, l } => (GainSet::new(&system, k.clone(), l.clone())?, None),
        GainStrategy::Tune {
            observer_grid,
            controller_grid,
            pattern,
        } => {
            let out = tune_gains_with(
                &system,
                config.force_bound(),
                config.eps_bound(),
                observer_grid,
                controller_grid.as_deref(),
                pattern,
            )?;
            (out.gains.clone(), Some(out))
        }
    };
    Ok(Prepared {
        config: config.clone(),
        system,
        verdict,
        gains,
        tune,
    })
}

pub fn run_simulation(p: &Prepared) -> Result<(SimConfig, SimulationResult)> {
    let sim = p.config.sim_config(&p.system, &p.gains)?;
    let noise = p.config.noise_spec(sim.dt);
    let res = simulate(&p.system, &p.gains, &p.config.disturbance, &noise, &sim)?;
    Ok((sim, res))
}

pub fn trajectory_csv(res: &SimulationResult) -> String {
    let mut s = String::from("t,norm_e,norm_z,V,y,norm_residual\n");
    for i in 0..res.times.len() {
        csv_row(
            &mut s,
            &[
                res.times[i],
                res.norm_e[i],
                res.norm_z[i],
                res.control[i],
                res.output[i],
                res.norm_residual[i],
            ],
        );
    }
    s
}

pub fn gains_csv(p: &Prepared) -> String {
    let g = &p.gains;
    let mut s = String::from("quantity,index,value\n");
    for (i, v) in g.k.iter().enumerate() {
        let _ = writeln!(s, "K,{},{}", i + 1, fmt_num(*v));
    }
    for (i, v) in g.l.iter().enumerate() {
        let _ = writeln!(s, "L,{},{}", i + 1, fmt_num(*v));
    }
    let mut scalars = vec![
        ("lambda_K", g.lambda_k),
        ("lambda_L", g.lambda_l),
        ("K_norm", g.k_norm),
        ("L_norm", g.l_norm),
        ("BK_norm", g.bk_norm(&p.system)),
    ];
    if let Some(t) = &p.tune {
        scalars.push(("e_steady_bound", t.e_steady));
        scalars.push(("z_steady_bound", t.z_steady));
    }
    for (name, v) in scalars {
        let _ = writeln!(s, "{name},,{}", fmt_num(v));
    }
    s
}

fn key_value_csv(rows: &[(&str, f64)]) -> String {
    let mut s = String::from("key,value\n");
    for (k, v) in rows {
        let _ = writeln!(s, "{k},{}", fmt_num(*v));
    }
    s
}

pub fn metrics_csv(m: &Metrics) -> String {
    key_value_csv(&[
        ("peak_e", m.peak_e),
        ("peak_e_time", m.peak_e_time),
        ("settling_time", m.settling_time),
        ("steady_band", m.steady_band),
        ("steady_e", m.steady_e),
        ("steady_z", m.steady_z),
        ("force_sup", m.force_sup),
        ("attenuation", m.attenuation),
    ])
}

fn load(args: &CommonArgs) -> Result<ExperimentConfig> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => load_config(path)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => {
            return Err(Error::Config {
                key: "config".into(),
                line: None,
                msg: "either --config or --preset is required".into(),
            })
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn out_dir(args: &CommonArgs, cfg: &ExperimentConfig) -> PathBuf {
    args.out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

fn print_verdict(v: &PlacementVerdict) {
    let modes = |m: &[usize]| m.iter().map(|k| format!("mode {k}")).collect::<Vec<_>>().join(", ");
    if v.observable {
        println!("observable: yes");
    } else {
        println!("observable: no ({})", modes(&v.unobservable_modes));
    }
    if v.controllable {
        println!("controllable: yes");
    } else {
        println!("controllable: no ({})", modes(&v.uncontrollable_modes));
    }
    if !v.closed_form_reason.is_empty() {
        println!("reason: {}", v.closed_form_reason);
    }
    for w in &v.warnings {
        println!("warning: {w}");
    }
}

fn cmd_check(args: &CommonArgs) -> Result<i32> {
    let cfg = load(args)?;
    let v = check_placement(&cfg.system()?)?;
    print_verdict(&v);
    Ok(if v.is_feasible() { 0 } else { 1 })
}

fn cmd_tune(args: &CommonArgs) -> Result<i32> {
    let cfg = load(args)?;
    let p = prepare(&cfg)?;
    let path = write_file(&out_dir(args, &cfg), "gains.csv", &gains_csv(&p))?;
    println!(
        "lambda_K = {}, lambda_L = {}, |K| = {}, |L| = {}",
        fmt_num(p.gains.lambda_k),
        fmt_num(p.gains.lambda_l),
        fmt_num(p.gains.k_norm),
        fmt_num(p.gains.l_norm)
    );
    println!("wrote {}", path.display());
    Ok(0)
}

fn cmd_simulate(args: &CommonArgs) -> Result<i32> {
    let cfg = load(args)?;
    let dir = out_dir(args, &cfg);
    let p = prepare(&cfg)?;
    let (sim, res) = run_simulation(&p)?;
    let path = write_file(&dir, "trajectory.csv", &trajectory_csv(&res))?;
    println!("dt = {}, steps = {}", fmt_num(sim.dt), res.steps);
    println!("wrote {}", path.display());
    match performance_metrics(&res, p.gains.lambda_k) {
        Ok(m) => {
            let path = write_file(&dir, "metrics.csv", &metrics_csv(&m))?;
            println!(
                "peak |e| = {} at t = {}, settling = {}, attenuation = {}",
                fmt_num(m.peak_e),
                fmt_num(m.peak_e_time),
                fmt_num(m.settling_time),
                fmt_num(m.attenuation)
            );
            println!("wrote {}", path.display());
        }
        Err(Error::InsufficientHorizon(msg)) => println!("metrics skipped: {msg}"),
        Err(e) => return Err(e),
    }
    Ok(0)
}

fn cmd_bounds(args: &CommonArgs) -> Result<i32> {
    let cfg = load(args)?;
    let dir = out_dir(args, &cfg);
    let p = prepare(&cfg)?;
    let (_, res) = run_simulation(&p)?;
    let check = check_bounds(&p.system, &p.gains, &res)?;
    let r = &check.report;
    let rows = [
        ("lambda_L", r.lambda_l),
        ("lambda_K", r.lambda_k),
        ("L_norm", r.l_norm),
        ("BK_norm", r.bk_norm),
        ("F_bound", r.f_bound),
        ("eps_bound", r.eps_bound),
        ("e_steady_bound", r.e_steady_bound),
        ("e_bound_used", r.e_bound_used),
        ("z_steady_bound", r.z_steady_bound),
        ("kappa_L", r.kappa_l),
        ("kappa_K", r.kappa_k),
        ("e_ratio", check.e_ratio),
        ("z_ratio", check.z_ratio),
    ];
    let bounds = write_file(&dir, "bounds.csv", &key_value_csv(&rows))?;

    let e0 = res.norm_e.first().copied().unwrap_or(0.0);
    let z0 = res.norm_z.first().copied().unwrap_or(0.0);
    let ec = error_bound_curve(&p.gains, r.f_bound, r.eps_bound, e0, &res.times);
    let zc = state_bound_curve(&p.system, &p.gains, r.f_bound, r.e_bound_used, z0, &res.times);
    let mut curves = String::from("t,norm_e,e_bound,norm_z,z_bound\n");
    for i in 0..res.times.len() {
        csv_row(
            &mut curves,
            &[res.times[i], res.norm_e[i], r.kappa_l * ec[i], res.norm_z[i], r.kappa_k * zc[i]],
        );
    }
    let curves_path = write_file(&dir, "bound_curves.csv", &curves)?;

    let modes = cfg.modes;
    let k_max = modes + cfg.simulation.residual_modes.max(1);
    let report = residual_bounds(&cfg.params, cfg.disturbance.amplitude_bound(), modes, k_max)?
        .with_simulated(res.residual_first_mode, &res.residual_sup);
    let mut resid = String::from("mode,uniform,smooth,uniform_corrected,smooth_corrected,simulated_sup\n");
    for (i, m) in report.per_mode.iter().enumerate() {
        let sim = res.residual_sup.get(i).copied().unwrap_or(f64::NAN);
        csv_row(
            &mut resid,
            &[m.mode as f64, m.uniform, m.smooth, m.uniform_corrected, m.smooth_corrected, sim],
        );
    }
    let resid_path = write_file(&dir, "residual.csv", &resid)?;

    println!(
        "kappa_L = {}, kappa_K = {}, max |e|/bound = {}, max |z|/bound = {}",
        fmt_num(r.kappa_l),
        fmt_num(r.kappa_k),
        fmt_num(check.e_ratio),
        fmt_num(check.z_ratio)
    );
    println!(
        "tail (uniform) = {}, tail (smooth) = {}",
        fmt_num(report.tail_sum_uniform),
        fmt_num(report.tail_sum_smooth)
    );
    for p in [bounds, curves_path, resid_path] {
        println!("wrote {}", p.display());
    }
    if !check.holds() {
        println!("bound violated");
    }
    Ok(0)
}

/// Summary of one sweep point: either metrics or the reason it failed.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub outcome: std::result::Result<(GainSet, Option<Metrics>), Error>,
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let sweep = cfg.sweep.as_ref().ok_or_else(|| Error::Config {
        key: "sweep".into(),
        line: None,
        msg: "the sweep subcommand needs a [sweep] table".into(),
    })?;
    let rows = sweep
        .values
        .par_iter()
        .map(|&value| {
            let outcome = cfg.with_sweep_value(sweep.parameter, value).and_then(|c| {
                let p = prepare(&c)?;
                let (_, res) = run_simulation(&p)?;
                let m = match performance_metrics(&res, p.gains.lambda_k) {
                    Ok(m) => Some(m),
                    Err(Error::InsufficientHorizon(_)) => None,
                    Err(e) => return Err(e),
                };
                Ok((p.gains, m))
            });
            SweepRow { value, outcome }
        })
        .collect();
    Ok(rows)
}

pub fn sweep_csv(cfg: &ExperimentConfig, rows: &[SweepRow]) -> String {
    let param = cfg.sweep.as_ref().map_or("value", |s| s.parameter.name());
    let mut s = format!("{param},status,lambda_L,lambda_K,L_norm,K_norm,peak_e,settling_time,steady_e,steady_z,attenuation\n");
    for row in rows {
        match &row.outcome {
            Ok((g, m)) => {
                let mut cells = vec![g.lambda_l, g.lambda_k, g.l_norm, g.k_norm];
                match m {
                    Some(m) => cells.extend([m.peak_e, m.settling_time, m.steady_e, m.steady_z, m.attenuation]),
                    None => cells.extend([f64::NAN; 5]),
                }
                let nums: Vec<String> = cells.iter().map(|&v| fmt_num(v)).collect();
                let _ = writeln!(s, "{},ok,{}", fmt_num(row.value), nums.join(","));
            }
            Err(e) => {
                let status = match e {
                    Error::Unobservable(_) => "unobservable",
                    Error::Uncontrollable(_) => "uncontrollable",
                    Error::Divergence { .. } => "diverged",
                    _ => "failed",
                };
                let _ = writeln!(s, "{},{status},,,,,,,,,", fmt_num(row.value));
            }
        }
    }
    s
}

fn cmd_sweep(args: &CommonArgs) -> Result<i32> {
    let cfg = load(args)?;
    let rows = run_sweep(&cfg)?;
    for row in &rows {
        match &row.outcome {
            Ok((_, Some(m))) => println!("{}: attenuation = {}", fmt_num(row.value), fmt_num(m.attenuation)),
            Ok((_, None)) => println!("{}: horizon too short for metrics", fmt_num(row.value)),
            Err(e) => println!("{}: {e}", fmt_num(row.value)),
        }
    }
    let path = write_file(&out_dir(args, &cfg), "sweep.csv", &sweep_csv(&cfg, &rows))?;
    println!("wrote {}", path.display());
    Ok(0)
}

pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Check(a) => cmd_check(a),
        Command::Tune(a) => cmd_tune(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
