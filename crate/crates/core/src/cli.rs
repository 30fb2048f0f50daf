//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on a computational failure or a failing
//! validation report, 2 on usage and configuration errors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evans::{self, LeftMode, SolveOptions};
use crate::hotzone::{principal_sigma, HotProblem};
use crate::model::{params_from_config, ModelParams};
use crate::oracle;
use crate::wave::{self, WaveSolution};

/// Environment variable that redirects relative output paths.
pub const OUT_DIR_ENV: &str = "ABLATION_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "ablation", about = "Travelling waves and transverse stability of ablation fronts")]
struct Cli {
    #[command(flatten)]
    model: ModelFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ModelFlags {
    /// Config file with `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    m: Option<f64>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    theta: Option<f64>,
    #[arg(long, global = true)]
    g0: Option<f64>,
    #[arg(long, global = true)]
    eta: Option<f64>,
    #[arg(long, global = true)]
    k0: Option<f64>,
    #[arg(long, global = true)]
    delta0: Option<f64>,
    /// Worker threads, 0 for all cores.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Integrate,
    Expansion,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Travelling wave profile.
    Wave {
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Principal eigenvalue of the asymptotic problem.
    Sigma0 {
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Evans function scan and root at one (epsilon, k).
    Evans {
        #[arg(long)]
        k: f64,
        #[arg(long)]
        sigma_min: Option<f64>,
        #[arg(long)]
        sigma_max: Option<f64>,
        /// Number of scan points of E between sigma-min and sigma-max.
        #[arg(long, default_value_t = 0)]
        scan: usize,
        #[arg(long, value_enum, default_value = "integrate")]
        mode: ModeArg,
        #[arg(long)]
        allow_outside_regime: bool,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Dispersion sweep along k = eps^(-rho/(m-2)).
    Dispersion {
        /// Comma-separated epsilon values.
        #[arg(long, value_delimiter = ',', required = true)]
        eps_list: Vec<f64>,
        /// Exponent rho in (0, 1).
        #[arg(long)]
        k_rule: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        allow_outside_regime: bool,
    },
    /// Cross-checks against the oracles.
    Validate {
        /// Multiplies every acceptance tolerance.
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

/// Column table written as CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str], comments: Vec<String>) -> Self {
        Table {
            comments,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

/// Formats with 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn render_csv(table: &Table) -> String {
    let mut out = String::new();
    for c in &table.comments {
        let _ = writeln!(out, "# {c}");
    }
    let _ = writeln!(out, "{}", table.header.join(","));
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_num(x)).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// Parses a CSV produced by [`render_csv`].
pub fn parse_csv(text: &str) -> Result<Table> {
    let mut comments = Vec::new();
    let mut header = None;
    let mut rows = Vec::new();
    for line in text.lines() {
        if let Some(c) = line.strip_prefix("# ") {
            comments.push(c.to_string());
        } else if header.is_none() {
            header = Some(line.split(',').map(str::to_string).collect());
        } else {
            let row = line
                .split(',')
                .map(|c| c.parse::<f64>().map_err(|_| Error::Config(format!("bad number `{c}`"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
    }
    Ok(Table {
        comments,
        header: header.ok_or_else(|| Error::Config("missing header".into()))?,
        rows,
    })
}

/// Resolves a relative output path under the override directory, if set.
pub fn output_path(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    let path = output_path(path);
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(&path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn emit_csv(table: &Table, path: &Path) -> Result<()> {
    write_file(path, &render_csv(table))
}

/// One polyline of a plot.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Self-contained SVG line plot with labeled axes.
pub fn render_svg(series: &[Series], x_label: &str, y_label: &str) -> Result<String> {
    let pts: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().copied()).filter(|p| p.0.is_finite() && p.1.is_finite()).collect();
    if pts.is_empty() {
        return Err(Error::Parameter("nothing to plot".into()));
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let (w, h, pad) = (640.0, 420.0, 60.0);
    let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<path d="M{pad} {} H{} M{pad} {} V{pad}" stroke="black" fill="none"/>"#,
        h - pad,
        w - pad,
        h - pad
    );
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{x_label}</text>"#, w / 2.0, h - 15.0);
    let _ = writeln!(
        out,
        r#"<text x="18" y="{}" text-anchor="middle" font-size="14" transform="rotate(-90 18 {})">{y_label}</text>"#,
        h / 2.0,
        h / 2.0
    );
    for (v, anchor, x, y) in [
        (x0, "start", pad, h - pad + 18.0),
        (x1, "end", w - pad, h - pad + 18.0),
    ] {
        let _ = writeln!(out, r#"<text x="{x}" y="{y}" text-anchor="{anchor}" font-size="11">{v:.4e}</text>"#);
    }
    for (v, y) in [(y0, h - pad), (y1, pad)] {
        let _ = writeln!(out, r#"<text x="{}" y="{y}" text-anchor="end" font-size="11">{v:.4e}</text>"#, pad - 4.0);
    }
    for (i, s) in series.iter().enumerate() {
        let color = colors[i % colors.len()];
        let coords: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.3},{:.3}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(out, r#"<polyline points="{}" stroke="{color}" fill="none" stroke-width="1.5"/>"#, coords.join(" "));
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="12" fill="{color}">{}</text>"#,
            w - pad - 120.0,
            pad + 16.0 * i as f64,
            s.label
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn emit_svg(series: &[Series], x_label: &str, y_label: &str, path: &Path) -> Result<()> {
    write_file(path, &render_svg(series, x_label, y_label)?)
}

/// Effective configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub subcommand: String,
    pub threads: usize,
    /// Subcommand settings echoed into output headers.
    pub settings: Vec<(String, String)>,
}

impl RunConfig {
    pub fn header(&self) -> Vec<String> {
        let mut out = vec![format!("command = {}", self.subcommand)];
        out.extend(self.params.entries().iter().map(|(k, v)| format!("{k} = {}", fmt_num(*v))));
        out.extend(self.settings.iter().map(|(k, v)| format!("{k} = {v}")));
        out
    }
}

fn merged_params(flags: &ModelFlags) -> Result<ModelParams> {
    let mut p = ModelParams::default();
    if let Some(path) = &flags.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        p = params_from_config(&text, p)?;
    }
    let overrides = [
        ("m", flags.m),
        ("epsilon", flags.epsilon),
        ("theta", flags.theta),
        ("g0", flags.g0),
        ("eta", flags.eta),
        ("k0", flags.k0),
        ("delta0", flags.delta0),
    ];
    for (k, v) in overrides {
        if let Some(v) = v {
            p.set(k, v)?;
        }
    }
    p.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(p)
}

/// Parses `argv` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let params = match merged_params(&cli.model) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.model.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let threads = cli.model.threads;
    match pool.install(|| dispatch(cli.command, params, threads)) {
        Ok(code) => code,
        Err(e @ (Error::Config(_) | Error::Parameter(_))) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn config(params: ModelParams, name: &str, threads: usize, settings: Vec<(&str, String)>) -> RunConfig {
    RunConfig {
        params,
        subcommand: name.into(),
        threads,
        settings: settings.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
    }
}

fn path_setting(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "-".into())
}

fn dispatch(cmd: Command, params: ModelParams, threads: usize) -> Result<i32> {
    match cmd {
        Command::Wave { csv, svg } => {
            let cfg = config(params, "wave", threads, vec![]);
            let w = wave::solve_wave(&params)?;
            let lm = w.landmarks();
            println!(
                "c = {}  x_theta = {}  x_eps = {}  A = {}",
                fmt_num(w.c),
                fmt_num(w.x_theta),
                fmt_num(lm.x_eps),
                fmt_num(lm.big_a)
            );
            let mut t = Table::new(&["x", "p", "dp", "ddp"], cfg.header());
            for i in 0..w.grid.len() {
                t.rows.push(vec![w.grid[i], w.p[i], w.dp[i], w.ddp[i]]);
            }
            if let Some(path) = csv {
                emit_csv(&t, &path)?;
            }
            if let Some(path) = svg {
                let pts = w.grid.iter().zip(&w.p).map(|(&x, &p)| (x, p)).filter(|p| p.0 > -2.0 && p.0 < 3.0 * w.x_theta).collect();
                emit_svg(&[Series { label: "p".into(), points: pts }], "x", "p", &path)?;
            }
            Ok(0)
        }
        Command::Sigma0 { tol, csv, svg } => {
            let cfg = config(params, "sigma0", threads, vec![("tol", fmt_num(tol))]);
            if !(tol > 0.0) {
                return Err(Error::Config(format!("tol = {tol} must be positive")));
            }
            let c0 = wave::limit_speed(&params)?;
            let hp = HotProblem::from_speed(params.m, c0)?;
            let e = principal_sigma(&hp, tol)?;
            println!("sigma0 = {}", fmt_num(e.sigma0));
            println!("gamma0 = {}", fmt_num(e.gamma0.unwrap_or(f64::NAN)));
            println!("c0 = {}  B = {}", fmt_num(c0), fmt_num(hp.big_b));
            let f = &e.eigenfunction;
            let mut t = Table::new(&["zeta", "v", "dv"], cfg.header());
            for i in 0..f.zeta.len() {
                t.rows.push(vec![f.zeta[i], f.v[i], f.dv[i]]);
            }
            if let Some(path) = csv {
                emit_csv(&t, &path)?;
            }
            if let Some(path) = svg {
                let pts = f.zeta.iter().zip(&f.v).map(|(&z, &v)| (z, v)).collect();
                emit_svg(&[Series { label: "v0".into(), points: pts }], "zeta", "v", &path)?;
            }
            Ok(0)
        }
        Command::Evans {
            k,
            sigma_min,
            sigma_max,
            scan,
            mode,
            allow_outside_regime,
            csv,
        } => {
            let mode = match mode {
                ModeArg::Integrate => LeftMode::Integrate,
                ModeArg::Expansion => LeftMode::Expansion,
            };
            let w = wave::solve_wave(&params)?;
            let sigma0 = evans::hot_sigma0(params.m, w.c0)?;
            let lo = sigma_min.unwrap_or(0.25 * sigma0);
            let hi = sigma_max.unwrap_or(4.0 * sigma0);
            if !(hi > lo && lo > 0.0) {
                return Err(Error::Config(format!("need 0 < sigma-min < sigma-max, got {lo}, {hi}")));
            }
            let cfg = config(
                params,
                "evans",
                threads,
                vec![
                    ("k", fmt_num(k)),
                    ("sigma_min", fmt_num(lo)),
                    ("sigma_max", fmt_num(hi)),
                    ("scan", scan.to_string()),
                    ("mode", format!("{mode:?}")),
                ],
            );
            let opts = SolveOptions {
                window: (lo / sigma0, hi / sigma0),
                enforce_regime: !allow_outside_regime,
                mode,
                ..SolveOptions::default()
            };
            let d = evans::solve_s_with(&w, &params, k, sigma0, &opts)?;
            println!("sigma_bar = {}", fmt_num(d.sigma_bar));
            println!("s = {}", fmt_num(d.s));
            println!("gamma_estimate = {}  simplicity = {}", fmt_num(d.gamma_estimate), fmt_num(d.simplicity));
            if scan >= 2 {
                let mut setup = evans::EvansSetup::with_sigma0(&w, &params, k, sigma0)?;
                setup.mode = mode;
                let rows: Vec<Vec<f64>> = (0..scan)
                    .into_par_iter()
                    .map(|i| {
                        let s = lo + (hi - lo) * i as f64 / (scan - 1) as f64;
                        evans::evans(&setup, s).map(|e| vec![s, e.e])
                    })
                    .collect::<Result<_>>()?;
                let mut t = Table::new(&["sigma", "E"], cfg.header());
                t.rows = rows;
                match csv {
                    Some(path) => emit_csv(&t, &path)?,
                    None => print!("{}", render_csv(&t)),
                }
            }
            Ok(0)
        }
        Command::Dispersion {
            eps_list,
            k_rule,
            out,
            svg,
            allow_outside_regime,
        } => {
            if !(k_rule > 0.0 && k_rule < 1.0) {
                return Err(Error::Config(format!("k-rule exponent {k_rule} outside (0, 1)")));
            }
            let list: Vec<String> = eps_list.iter().map(|e| fmt_num(*e)).collect();
            let cfg = config(
                params,
                "dispersion",
                threads,
                vec![
                    ("eps_list", list.join(" ")),
                    ("k_rule", fmt_num(k_rule)),
                    ("window", "0.25 4".into()),
                    ("out", path_setting(&out)),
                ],
            );
            let table = dispersion_table(&params, &eps_list, k_rule, !allow_outside_regime, cfg.header())?;
            for line in &table.report {
                println!("{line}");
            }
            match out {
                Some(path) => emit_csv(&table.csv, &path)?,
                None => print!("{}", render_csv(&table.csv)),
            }
            if let Some(path) = svg {
                let pts = table.csv.rows.iter().map(|r| (r[1], r[5])).collect();
                emit_svg(&[Series { label: "gamma estimate".into(), points: pts }], "k", "s / k^(1-1/(m-1))", &path)?;
            }
            Ok(if table.failures > 0 { 1 } else { 0 })
        }
        Command::Validate { tolerance_scale, report } => {
            let cfg = config(params, "validate", threads, vec![("tolerance_scale", fmt_num(tolerance_scale))]);
            let checks = validate(tolerance_scale)?;
            let mut t = Table::new(&["check", "measured", "tolerance", "pass"], cfg.header());
            let mut failed = 0;
            for (i, c) in checks.iter().enumerate() {
                println!(
                    "{} {}: measured {} tolerance {}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    fmt_num(c.measured),
                    fmt_num(c.tolerance)
                );
                t.comments.push(format!("check {i} = {}", c.name));
                t.rows.push(vec![i as f64, c.measured, c.tolerance, if c.pass { 1.0 } else { 0.0 }]);
                if !c.pass {
                    failed += 1;
                }
            }
            if let Some(path) = report {
                emit_csv(&t, &path)?;
            }
            Ok(if failed > 0 { 1 } else { 0 })
        }
    }
}

/// Dispersion sweep rendered as a table.
pub struct DispersionOutput {
    pub csv: Table,
    pub report: Vec<String>,
    pub failures: usize,
}

pub fn dispersion_table(params: &ModelParams, eps_list: &[f64], rho: f64, enforce_regime: bool, header: Vec<String>) -> Result<DispersionOutput> {
    let c0 = wave::limit_speed(params)?;
    let waves: Vec<WaveSolution> = eps_list
        .par_iter()
        .map(|&e| wave::solve_wave_with_c0(&params.with_epsilon(e), c0))
        .collect::<Result<_>>()?;
    let points: Vec<(f64, f64)> = eps_list.iter().map(|&e| (e, e.powf(-rho / (params.m - 2.0)))).collect();
    let opts = SolveOptions {
        enforce_regime,
        ..SolveOptions::default()
    };
    let table = evans::dispersion_sweep(&points, &waves, params, &opts)?;
    let mut csv = Table::new(&["epsilon", "k", "delta", "sigma_bar", "s", "gamma_estimate", "simplicity"], header);
    let mut report = Vec::new();
    let mut failures = 0;
    for (row, (e, k)) in table.rows.iter().zip(&points) {
        match row {
            Ok(p) => csv.rows.push(vec![p.epsilon, p.k, p.delta, p.sigma_bar, p.s, p.gamma_estimate, p.simplicity]),
            Err(err) => {
                failures += 1;
                report.push(format!("error at epsilon = {}, k = {}: {err}", fmt_num(*e), fmt_num(*k)));
            }
        }
    }
    report.push(format!("gamma0 (asymptotic) = {}", fmt_num(table.gamma0)));
    if let Some(g) = table.gamma_fit {
        report.push(format!("gamma0 (fitted, last tier) = {}", fmt_num(g)));
    }
    Ok(DispersionOutput { csv, report, failures })
}

/// One line of the validation report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn check(name: &str, measured: f64, tolerance: f64) -> Check {
    Check {
        name: name.into(),
        measured,
        tolerance,
        pass: measured.is_finite() && measured.abs() <= tolerance,
    }
}

/// Cross-checks of the primary solvers against the oracles. Tolerances are
/// multiplied by `scale`.
pub fn validate(scale: f64) -> Result<Vec<Check>> {
    let base = ModelParams::default();
    let w3 = wave::solve_wave(&base.with_epsilon(1e-3))?;
    let inv = wave::check_invariants(&w3)?;
    let mut out = vec![
        check("wave first integral", inv.first_integral_error, 1e-8 * scale),
        check("wave left tail rate", inv.left_rate_ratio - 1.0, 1e-2 * scale),
    ];
    for (m, b) in [(3.5, ((1.5 * w3.c0).powf(2.0 / 1.5))), (4.0, 1.0)] {
        let shoot = principal_sigma(&HotProblem::new(m, b)?, 1e-10)?.sigma0;
        let fd = oracle::richardson(|n| oracle::fd_hotzone_sigma0(m, b, 30.0 * HotProblem::new(m, b)?.length_scale(), n), 1000)?;
        out.push(check(&format!("sigma0 shooting vs fd (m = {m})"), shoot / fd.extrapolated - 1.0, 1e-5 * scale));
    }
    let p4 = base.with_m(4.0).with_epsilon(1e-3);
    let w4 = wave::solve_wave(&p4)?;
    let opts = SolveOptions {
        enforce_regime: false,
        ..SolveOptions::default()
    };
    let d = evans::solve_s_with(&w4, &p4, 30.0, evans::hot_sigma0(4.0, w4.c0)?, &opts)?;
    let fd = oracle::fd_full_smallest(1e-3, 30.0, &w4, oracle::FullDomain::auto(&w4, 30.0), 20000)?;
    out.push(check("evans vs fd (m = 4, eps = 1e-3, k = 30)", d.s / fd - 1.0, 1e-3 * scale));
    let r = oracle::relaxation_rate(1e-3, 30.0, &w4, 40.0)?;
    out.push(check("evans vs relaxation (m = 4, eps = 1e-3, k = 30)", d.s / r - 1.0, 2e-2 * scale));
    let c = oracle::nonlinear_front_speed(1e-3, &base, 300.0)?;
    out.push(check("front speed vs wave speed (eps = 1e-3)", c / w3.c - 1.0, 5e-3 * scale));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let mut t = Table::new(&["a", "b"], vec!["m = 3.5".into()]);
        t.rows.push(vec![0.1 + 0.2, std::f64::consts::PI]);
        t.rows.push(vec![-1e-300, 6.02214076e23]);
        let back = parse_csv(&render_csv(&t)).unwrap();
        assert_eq!(back, t);
        for (a, b) in back.rows.iter().flatten().zip(t.rows.iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        let empty = Table::new(&["x"], vec![]);
        assert_eq!(render_csv(&empty), "x\n");
    }

    #[test]
    fn svg_is_deterministic_and_needs_data() {
        let s = [Series {
            label: "p".into(),
            points: vec![(0.0, 0.0), (1.0, 2.0)],
        }];
        let a = render_svg(&s, "x", "y").unwrap();
        assert_eq!(a, render_svg(&s, "x", "y").unwrap());
        assert!(a.contains("<polyline") && a.contains(">x</text>"));
        assert!(render_svg(&[], "x", "y").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["ablation", "--bogus", "wave"]), 2);
        assert_eq!(run(["ablation"]), 2);
        assert_eq!(run(["ablation", "--m", "1.5", "sigma0"]), 2);
        assert_eq!(run(["ablation", "dispersion", "--eps-list", "1e-3", "--k-rule", "1.5"]), 2);
    }

    #[test]
    fn sigma0_happy_path() {
        assert_eq!(run(["ablation", "sigma0", "--m", "3.5"]), 0);
    }

    #[test]
    fn config_file_and_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("good.cfg");
        std::fs::write(&good, "# model\nm = 4\n").unwrap();
        let bad = dir.path().join("bad.cfg");
        std::fs::write(&bad, "mass = 4\n").unwrap();
        let out = dir.path().join("v.csv");
        assert_eq!(
            run(["ablation", "--config", good.to_str().unwrap(), "sigma0", "--csv", out.to_str().unwrap()]),
            0
        );
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.starts_with("# command = sigma0\n# m = 4.0000000000000000e0\n"));
        assert_eq!(run(["ablation", "--config", bad.to_str().unwrap(), "sigma0"]), 2);
    }

    #[test]
    fn broken_tolerance_fails_validation() {
        let checks = validate(1e-12).unwrap();
        assert!(checks.iter().any(|c| !c.pass));
        assert_eq!(run(["ablation", "validate", "--tolerance-scale", "1e-12"]), 1);
    }
}
