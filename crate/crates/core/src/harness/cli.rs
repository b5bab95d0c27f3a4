//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::{ExperimentConfig, Settings};
use super::output::{fmt_f64, write_plot_script, PlotKind, Table};
use super::studies::{self, Component};
use crate::error::{Error, Result};
use crate::integrator::{run, Method, MethodConfig, Trajectory};
use crate::systems::{Builtin, MechanicalSystem};

const DEFAULT_H_LIST: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

#[derive(Debug, Parser)]
#[command(name = "pcvi", version, about = "Prolongation-collocation variational integrators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one trajectory and write t, q, p, energy and diagnostics.
    Integrate(SharedArgs),
    /// Global error at t-end for each step size, with a fitted slope.
    Converge(SharedArgs),
    /// |L_d - L_d^E| for each step size, with a fitted slope.
    Ldorder(SharedArgs),
    /// Energy error over a long run.
    Energy(SharedArgs),
    /// Wall time against global error for a method and a baseline.
    Wp(SharedArgs),
    /// List the builtin systems.
    Systems,
}

#[derive(Debug, Args, Default)]
struct SharedArgs {
    /// sho, pendulum or duffing
    #[arg(long)]
    system: Option<String>,
    /// hem, hem(n,m), gauss2 or midpoint
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Initial positions, comma separated
    #[arg(long, allow_hyphen_values = true)]
    q0: Option<String>,
    /// Initial momenta, comma separated
    #[arg(long, allow_hyphen_values = true)]
    p0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    h: Option<f64>,
    /// Step sizes, comma separated and strictly decreasing
    #[arg(long)]
    h_list: Option<String>,
    #[arg(long, conflicts_with = "t_end")]
    steps: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Output CSV path (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a matplotlib script next to the CSV
    #[arg(long)]
    plot: bool,
    /// Newton tolerance
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// hem solver: nested or combined
    #[arg(long)]
    mode: Option<String>,
    /// Error component for converge: phase or q
    #[arg(long)]
    component: Option<String>,
    /// Baseline method for wp
    #[arg(long)]
    baseline: Option<String>,
    /// key=value file with the same keys as the flags; flags win
    #[arg(long)]
    config: Option<PathBuf>,
}

impl SharedArgs {
    fn settings(&self) -> Result<Settings> {
        let mut flags = Settings::default();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                flags.set(k, v);
            }
        };
        put("system", self.system.clone());
        put("method", self.method.clone());
        put("n", self.n.map(|x| x.to_string()));
        put("m", self.m.map(|x| x.to_string()));
        put("q0", self.q0.clone());
        put("p0", self.p0.clone());
        put("h", self.h.map(fmt_f64));
        put("h-list", self.h_list.clone());
        put("steps", self.steps.map(|x| x.to_string()));
        put("t-end", self.t_end.map(fmt_f64));
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put("plot", self.plot.then(|| "true".to_string()));
        put("tol", self.tol.map(fmt_f64));
        put("max-iter", self.max_iter.map(|x| x.to_string()));
        put("mode", self.mode.clone());
        put("component", self.component.clone());
        put("baseline", self.baseline.clone());
        let file = match &self.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::default(),
        };
        Ok(file.overlay(flags))
    }

    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut s = self.settings()?;
        if self.steps.is_some() {
            s = drop_key(s, "t-end");
        } else if self.t_end.is_some() {
            s = drop_key(s, "steps");
        }
        ExperimentConfig::resolve(&s)
    }
}

fn drop_key(s: Settings, key: &str) -> Settings {
    let mut out = Settings::default();
    for k in super::config::KEYS {
        if *k != key {
            if let Some(v) = s.get(k) {
                out.set(k, v);
            }
        }
    }
    out
}

/// Where tables and summary lines go.
struct Sink<'a> {
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Sink<'_> {
    /// Write the table to `--out` (summary on stdout) or to stdout (summary
    /// on stderr), plus the plot script when asked.
    fn emit(&mut self, cfg: &ExperimentConfig, table: &Table, summary: &[String], plot: PlotKind, title: &str) -> Result<()> {
        match &cfg.out {
            Some(path) => {
                table.write_file(path)?;
                if cfg.plot {
                    let script = write_plot_script(path, &plot, title)?;
                    writeln!(self.stdout, "plot script: {}", script.display())?;
                }
                for line in summary {
                    writeln!(self.stdout, "{line}")?;
                }
            }
            None => {
                if cfg.plot {
                    return Err(Error::usage("--plot needs --out"));
                }
                table.write_to(&mut *self.stdout)?;
                for line in summary {
                    writeln!(self.stderr, "{line}")?;
                }
            }
        }
        Ok(())
    }
}

fn slope_summary(label: &str, fit: &studies::SlopeFit) -> String {
    let mut s = format!(
        "{label} slope={:.4} max_residual={:.4}",
        fit.slope, fit.max_residual
    );
    if fit.non_asymptotic {
        s.push_str(" non-asymptotic");
    }
    s
}

fn trajectory_table(system: &MechanicalSystem, traj: &Trajectory) -> Table {
    let d = system.dim();
    let names = |prefix: &str| -> Vec<String> {
        if d == 1 {
            vec![prefix.to_string()]
        } else {
            (1..=d).map(|i| format!("{prefix}{i}")).collect()
        }
    };
    let mut header = vec!["t".to_string()];
    header.extend(names("q"));
    header.extend(names("p"));
    header.extend(["energy", "energy_error", "newton_iters", "v_defect"].map(String::from));
    let mut table = Table {
        header,
        rows: Vec::with_capacity(traj.points.len()),
    };
    let h0 = system.hamiltonian(&traj.points[0].q, &traj.points[0].p);
    for (k, x) in traj.points.iter().enumerate() {
        let e = system.hamiltonian(&x.q, &x.p);
        let diag = if k == 0 { Default::default() } else { traj.diagnostics[k - 1] };
        let mut row = vec![fmt_f64(x.t)];
        row.extend(x.q.iter().chain(&x.p).map(|v| fmt_f64(*v)));
        row.push(fmt_f64(e));
        row.push(fmt_f64(e - h0));
        row.push(diag.newton_iters.to_string());
        row.push(fmt_f64(diag.v_defect));
        table.rows.push(row);
    }
    table
}

fn integrate(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let system = cfg.system.system();
    let h = cfg.h.unwrap_or(0.1);
    let steps = cfg.step_count(h, 10.0)?;
    let traj = run(&system, &cfg.method, &cfg.initial, h, steps)?;
    let table = trajectory_table(&system, &traj);
    let mut summary = vec![format!(
        "integrate system={} method={} h={} steps={}",
        system.name(),
        cfg.method.method,
        fmt_f64(h),
        traj.steps()
    )];
    if let Some(e) = &traj.truncated {
        summary.push(format!("truncated after {} steps: {e}", traj.steps()));
    }
    sink.emit(cfg, &table, &summary, PlotKind::Trajectory, &format!("{} {}", system.name(), cfg.method.method))?;
    match traj.truncated {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn h_list(cfg: &ExperimentConfig) -> Vec<f64> {
    cfg.h_list.clone().unwrap_or_else(|| DEFAULT_H_LIST.to_vec())
}

fn converge(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let system = cfg.system.system();
    let t_end = t_end_of(cfg, 10.0)?;
    let report = studies::convergence(&system, &cfg.method, &cfg.initial, &h_list(cfg), t_end, cfg.component)?;
    let mut table = Table::new(&["h", "steps", "error"]);
    for r in &report.rows {
        table.push(vec![fmt_f64(r.h), r.steps.to_string(), fmt_f64(r.error)]);
    }
    let component = match cfg.component {
        Component::Phase => "phase",
        Component::Position => "q",
    };
    let label = format!(
        "converge system={} method={} component={component} t_end={}",
        system.name(),
        cfg.method.method,
        fmt_f64(t_end)
    );
    let order = cfg.method.method.nominal_order() as f64;
    sink.emit(
        cfg,
        &table,
        &[slope_summary(&label, &report.fit)],
        PlotKind::Order { x: "h".into(), reference_order: order },
        &label,
    )
}

fn t_end_of(cfg: &ExperimentConfig, default: f64) -> Result<f64> {
    if cfg.steps.is_some() {
        return Err(Error::usage("this study takes t-end, not steps"));
    }
    Ok(cfg.t_end.unwrap_or(default))
}

fn ldorder(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let system = cfg.system.system();
    let (n, m) = match cfg.method.method {
        Method::Hem { n, m } => (n, m),
        other => return Err(Error::usage(format!("ldorder needs a hem method, got {other}"))),
    };
    let report = studies::ld_order(&system, n, m, &cfg.initial, &h_list(cfg))?;
    let mut table = Table::new(&["h", "q1", "ld", "ld_exact", "error"]);
    for r in &report.rows {
        table.push(vec![fmt_f64(r.h), fmt_f64(r.q1[0]), fmt_f64(r.ld), fmt_f64(r.exact), fmt_f64(r.error)]);
    }
    let label = format!("ldorder system={} n={n} m={m}", system.name());
    let expected = (2 * m + 3).min(2 * n) as f64;
    sink.emit(
        cfg,
        &table,
        &[slope_summary(&label, &report.fit)],
        PlotKind::Order { x: "h".into(), reference_order: expected },
        &label,
    )
}

fn energy(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let system = cfg.system.system();
    let h = cfg.h.unwrap_or(0.2);
    let steps = cfg.step_count(h, 1000.0)?;
    let report = studies::energy_study(&system, &cfg.method, &cfg.initial, h, steps)?;
    let mut table = Table::new(&["t", "energy_error"]);
    for (t, e) in report.times.iter().zip(&report.energy_error) {
        table.push(vec![fmt_f64(*t), fmt_f64(*e)]);
    }
    let label = format!("energy system={} method={} h={}", system.name(), cfg.method.method, fmt_f64(h));
    let summary = format!(
        "{label} max_abs_energy_error={:e} drift_slope={:e}",
        report.max_abs_error, report.drift_slope
    );
    sink.emit(cfg, &table, &[summary], PlotKind::Energy, &label)
}

fn default_baseline(system: Builtin) -> Method {
    match system {
        Builtin::Duffing => Method::Midpoint,
        _ => Method::Gauss2,
    }
}

fn wp(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let system = cfg.system.system();
    let t_end = t_end_of(cfg, 10.0)?;
    let baseline = cfg.baseline.unwrap_or_else(|| default_baseline(cfg.system));
    let mut configs = vec![cfg.method];
    if baseline != cfg.method.method {
        configs.push(MethodConfig { method: baseline, ..cfg.method });
    }
    let rows = studies::work_precision(&system, &configs, &cfg.initial, &h_list(cfg), t_end)?;
    let mut table = Table::new(&["method", "h", "wall_time", "error"]);
    for r in &rows {
        table.push(vec![r.method.to_string(), fmt_f64(r.h), fmt_f64(r.wall_time), fmt_f64(r.error)]);
    }
    let label = format!("wp system={} t_end={}", system.name(), fmt_f64(t_end));
    sink.emit(cfg, &table, std::slice::from_ref(&label), PlotKind::WorkPrecision, &label)
}

fn systems(out: &mut dyn Write) -> Result<()> {
    for b in Builtin::ALL {
        writeln!(out, "{:<10} {}", b.name(), b.description())?;
    }
    Ok(())
}

/// Run the CLI on `args` (including the program name) and return the exit
/// code: 0 on success, 2 for usage errors, 3 for solver failures.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    let mut sink = Sink { stdout, stderr };
    let result = match &cli.command {
        Command::Systems => systems(sink.stdout),
        Command::Integrate(a) => a.resolve().and_then(|c| integrate(&c, &mut sink)),
        Command::Converge(a) => a.resolve().and_then(|c| converge(&c, &mut sink)),
        Command::Ldorder(a) => a.resolve().and_then(|c| ldorder(&c, &mut sink)),
        Command::Energy(a) => a.resolve().and_then(|c| energy(&c, &mut sink)),
        Command::Wp(a) => a.resolve().and_then(|c| wp(&c, &mut sink)),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(sink.stderr, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_cli(std::iter::once("pcvi").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn integrate_writes_contract_header() {
        let (code, out, _) = call(&["integrate", "--system", "sho", "--method", "hem", "--n", "3", "--m", "1", "--h", "0.1", "--t-end", "1"]);
        assert_eq!(code, 0);
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some("t,q,p,energy,energy_error,newton_iters,v_defect"));
        assert_eq!(lines.count(), 11);
    }

    #[test]
    fn usage_errors_exit_with_two() {
        assert_eq!(call(&["integrate", "--system", "kepler"]).0, 2);
        assert_eq!(call(&["integrate", "--bogus"]).0, 2);
        assert_eq!(call(&["converge", "--h-list", "0.1,0.2,0.05"]).0, 2);
        assert_eq!(call(&["ldorder", "--method", "gauss2"]).0, 2);
        assert_eq!(call(&["integrate", "--plot"]).0, 2);
    }

    #[test]
    fn solver_failure_exits_with_three() {
        let (code, _, err) = call(&["integrate", "--method", "midpoint", "--max-iter", "1", "--tol", "1e-16", "--q0", "2", "--p0", "3", "--h", "0.5", "--steps", "3", "--system", "duffing"]);
        assert_eq!(code, 3, "{err}");
    }

    #[test]
    fn systems_lists_builtins() {
        let (code, out, _) = call(&["systems"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 3);
        assert!(out.starts_with("sho"));
    }

    #[test]
    fn negative_initial_values_parse() {
        let (code, out, _) = call(&["integrate", "--q0", "-0.5", "--p0", "-0.1", "--steps", "2", "--method", "gauss2"]);
        assert_eq!(code, 0);
        assert!(out.lines().nth(1).unwrap().starts_with("0.0,-0.5,-0.1,"));
    }
}
