//! `latgreen`: exact lattice heat kernels, their asymptotic expansions, the
//! lattice term `Omega`, the constant `S_0`, and the bound dashboard.
//!
//! Exit status: 0 success or PASS, 1 computation error, 2 verification FAIL
//! (including a run with no suites), 3 usage error.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use latgreen_core::constants::s0_quadrature;
use latgreen_core::expansion::{
    u_expansion, v_expansion_offorigin, v_expansion_origin, ExpansionOptions, ExpansionReport,
};
use latgreen_core::kernel::{u_exact, u_sweep, v_exact, v_sweep, KernelQuery, KernelRow, LatticePoint};
use latgreen_core::omega::{omega_batch, omega_leading, OmegaDecomposition, OmegaOptions};
use latgreen_core::verify::{bound_dashboard, fit_decay, suite_names, DashboardConfig, DecayFit};

use output::{Cell, Csv, Usage};

/// Version of the CSV and JSON layouts written by this binary.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "latgreen", version, about = "Discrete heat kernels on eps Z^2 and their asymptotics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact kernel values by the spectral and product routes.
    Kernel(KernelArgs),
    /// Truncated asymptotic expansions against the exact kernels.
    Expansion(ExpansionArgs),
    /// The lattice term Omega and its far-field residual.
    Omega(OmegaArgs),
    /// The constant S_0 and its parts.
    Constants(ConstantsArgs),
    /// Run the bound dashboard.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    U,
    V,
}

impl Kind {
    fn as_str(self) -> &'static str {
        match self {
            Kind::U => "u",
            Kind::V => "v",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct KernelArgs {
    #[arg(long, value_enum, default_value = "u")]
    kind: Kind,
    #[arg(long, default_value_t = 0)]
    s1: i64,
    #[arg(long, default_value_t = 0)]
    s2: i64,
    /// Sweep every site with |s1|, |s2| <= R instead of a single site.
    #[arg(long, value_name = "R", conflicts_with_all = ["s1", "s2"])]
    radius: Option<i64>,
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    /// One or more times, comma separated.
    #[arg(long, required = true, value_delimiter = ',')]
    t: Vec<f64>,
    /// Order of the time derivative (u only).
    #[arg(long = "J", default_value_t = 0)]
    j: u32,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct ExpansionArgs {
    #[arg(long, value_enum, default_value = "u")]
    kind: Kind,
    #[arg(long, default_value_t = 0)]
    s1: i64,
    #[arg(long, default_value_t = 0)]
    s2: i64,
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    #[arg(long, required = true, value_delimiter = ',')]
    t: Vec<f64>,
    #[arg(long = "J", default_value_t = 0)]
    j: u32,
    /// Number of expansion terms.
    #[arg(long = "N", default_value_t = 1)]
    n: u32,
    /// Regime start in units of eps^2.
    #[arg(long, default_value_t = 1.0)]
    t0: f64,
    /// Leave Omega out of the v expansion off the origin.
    #[arg(long)]
    no_omega: bool,
    /// Override the coefficient of d1^4 + d2^4 in the first correction.
    #[arg(long)]
    h01: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct OmegaArgs {
    #[arg(long, requires = "s2", conflicts_with_all = ["r_min", "r"])]
    s1: Option<i64>,
    #[arg(long, requires = "s1")]
    s2: Option<i64>,
    /// Lattice sites with r_min <= |s| <= r_max, one per symmetry orbit.
    #[arg(long, requires = "r_max", conflicts_with = "r")]
    r_min: Option<f64>,
    #[arg(long, requires = "r_min")]
    r_max: Option<f64>,
    /// Radii of a polar grid, comma separated.
    #[arg(long, value_delimiter = ',', requires = "psi")]
    r: Vec<f64>,
    /// Angles of a polar grid, comma separated.
    #[arg(long, value_delimiter = ',', requires = "r")]
    psi: Vec<f64>,
    #[arg(long, default_value_t = latgreen_core::omega::DEFAULT_TOLERANCE)]
    tolerance: f64,
    /// Also evaluate the direct representation.
    #[arg(long)]
    cross_check: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ConstantsArgs {
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite names, comma separated, or `all`.
    #[arg(long, value_delimiter = ',', default_value = "all", conflicts_with = "config")]
    suite: Vec<String>,
    /// JSON file with `suites` and optional `coefficients`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for report.json and the per-suite CSV tables.
    #[arg(long, env = "LATGREEN_OUT", default_value = "latgreen-report")]
    out: PathBuf,
    /// Print the suite names and exit.
    #[arg(long)]
    list: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("latgreen: {e:#}");
            ExitCode::from(output::exit_code(&e))
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Kernel(a) => kernel(a),
        Command::Expansion(a) => expansion(a),
        Command::Omega(a) => omega(a),
        Command::Constants(a) => constants(a),
        Command::Verify(a) => verify(a),
    }
}

fn kernel(a: KernelArgs) -> Result<u8> {
    if a.kind == Kind::V && a.j != 0 {
        return Err(Usage::new("--J applies to the u kernel only").into());
    }
    let sites: Vec<[i64; 2]> = match a.radius {
        Some(r) if r < 0 => return Err(Usage::new(format!("--radius must be >= 0, got {r}")).into()),
        Some(r) => (-r..=r).flat_map(|s1| (-r..=r).map(move |s2| [s1, s2])).collect(),
        None => vec![[a.s1, a.s2]],
    };
    let text = match a.format {
        Format::Text => {
            let mut out = String::new();
            for &t in &a.t {
                for s in &sites {
                    let p = LatticePoint::new(s[0], s[1], a.eps)?;
                    let value = match a.kind {
                        Kind::U => u_exact(&KernelQuery::new(p, t, a.j))?,
                        Kind::V => v_exact(&p, t)?,
                    };
                    out.push_str(&format!("{value:?}\n"));
                }
            }
            out
        }
        Format::Csv | Format::Json => {
            let mut rows: Vec<KernelRow> = Vec::new();
            for &t in &a.t {
                rows.extend(match a.kind {
                    Kind::U => u_sweep(&sites, t, a.eps, a.j)?,
                    Kind::V => v_sweep(&sites, t, a.eps)?,
                });
            }
            if a.format == Format::Csv {
                kernel_csv(&rows)
            } else {
                output::json(&serde_json::json!({
                    "version": SCHEMA_VERSION,
                    "kind": a.kind.as_str(),
                    "rows": rows,
                }))?
            }
        }
    };
    output::emit(&text, a.output.as_deref())?;
    Ok(0)
}

fn kernel_csv(rows: &[KernelRow]) -> String {
    let mut csv = Csv::new(&["s1", "s2", "eps", "t", "J", "value_spectral", "value_product", "abs_diff"]);
    for r in rows {
        csv.row(vec![
            Cell::Int(r.s1),
            Cell::Int(r.s2),
            Cell::Float(r.eps),
            Cell::Float(r.t),
            Cell::Int(r.j as i64),
            Cell::Float(r.value_spectral),
            Cell::Float(r.value_product),
            Cell::Float(r.abs_diff),
        ]);
    }
    csv.finish()
}

/// Power-law fit of `|residual|` against `scale`, or the reason it failed.
fn fit_summary(samples: &[(f64, f64)]) -> serde_json::Value {
    let samples: Vec<(f64, f64)> = samples.iter().map(|&(s, r)| (s, r.abs())).collect();
    match fit_decay(&samples) {
        Ok(DecayFit { slope, prefactor, r_squared, filtered, .. }) => serde_json::json!({
            "slope": slope,
            "prefactor": prefactor,
            "r_squared": r_squared,
            "filtered": filtered,
            "error": null,
        }),
        Err(e) => serde_json::json!({ "error": e.to_string() }),
    }
}

fn expansion(a: ExpansionArgs) -> Result<u8> {
    if a.format == Format::Text {
        return Err(Usage::new("expansion writes csv or json").into());
    }
    if a.kind == Kind::V && a.j != 0 {
        return Err(Usage::new("--J applies to the u kernel only").into());
    }
    let mut opts = ExpansionOptions {
        t0: a.t0,
        include_omega: !a.no_omega,
        ..ExpansionOptions::default()
    };
    if let Some(h01) = a.h01 {
        if !h01.is_finite() {
            return Err(Usage::new(format!("--h01 must be finite, got {h01}")).into());
        }
        opts.coefficients.h01 = h01;
    }
    let point = LatticePoint::new(a.s1, a.s2, a.eps)?;
    let rows = a
        .t
        .iter()
        .map(|&t| match a.kind {
            Kind::U => u_expansion(&KernelQuery::new(point, t, a.j), a.n, &opts),
            Kind::V if point.is_origin() => v_expansion_origin(t, a.eps, a.n, &opts),
            Kind::V => v_expansion_offorigin(&point, t, a.n, &opts),
        })
        .collect::<latgreen_core::Result<Vec<_>>>()?;
    let text = if a.format == Format::Csv {
        expansion_csv(&rows)
    } else {
        let samples: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.residual)).collect();
        output::json(&serde_json::json!({
            "version": SCHEMA_VERSION,
            "rows": rows,
            "fit": fit_summary(&samples),
        }))?
    };
    output::emit(&text, a.output.as_deref())?;
    Ok(0)
}

fn expansion_csv(rows: &[ExpansionReport]) -> String {
    let mut csv = Csv::new(&[
        "kind", "s1", "s2", "eps", "t", "J", "N", "t0", "value", "exact", "residual", "bound_check",
        "omega", "log_part", "s0",
    ]);
    for r in rows {
        let kind = match r.kind {
            latgreen_core::expansion::ExpansionKind::U => "u",
            latgreen_core::expansion::ExpansionKind::VOffOrigin => "v",
            latgreen_core::expansion::ExpansionKind::VOrigin => "v_origin",
        };
        csv.row(vec![
            Cell::Text(kind.into()),
            Cell::Int(r.s[0]),
            Cell::Int(r.s[1]),
            Cell::Float(r.eps),
            Cell::Float(r.t),
            Cell::Int(r.j as i64),
            Cell::Int(r.n_terms as i64),
            Cell::Float(r.t0),
            Cell::Float(r.value),
            Cell::Float(r.exact),
            Cell::Float(r.residual),
            Cell::Float(r.bound_check),
            Cell::opt(r.omega),
            Cell::opt(r.log_part),
            Cell::opt(r.s0),
        ]);
    }
    csv.finish()
}

/// Orbit representatives `0 <= s2 <= s1` of the sites in the annulus.
fn annulus_sites(r_min: f64, r_max: f64) -> Result<Vec<[i64; 2]>> {
    if !(r_min > 0.0 && r_max >= r_min && r_max.is_finite()) {
        return Err(Usage::new(format!("need 0 < r_min <= r_max, got {r_min}, {r_max}")).into());
    }
    if r_max > 1e4 {
        return Err(Usage::new(format!("--r-max must be <= 1e4, got {r_max}")).into());
    }
    let m = r_max.floor() as i64;
    let mut sites = Vec::new();
    for s1 in 0..=m {
        for s2 in 0..=s1 {
            let r = (s1 as f64).hypot(s2 as f64);
            if r >= r_min && r <= r_max {
                sites.push([s1, s2]);
            }
        }
    }
    sites.sort_by(|a, b| {
        let ra = a[0] * a[0] + a[1] * a[1];
        let rb = b[0] * b[0] + b[1] * b[1];
        ra.cmp(&rb).then(a.cmp(b))
    });
    Ok(sites)
}

fn omega(a: OmegaArgs) -> Result<u8> {
    if a.format == Format::Text {
        return Err(Usage::new("omega writes csv or json").into());
    }
    if a.tolerance.is_nan() || a.tolerance <= 0.0 {
        return Err(Usage::new(format!("--tolerance must be > 0, got {}", a.tolerance)).into());
    }
    let sites: Vec<Option<[i64; 2]>>;
    let points: Vec<(f64, f64)>;
    if let (Some(s1), Some(s2)) = (a.s1, a.s2) {
        if s1 == 0 && s2 == 0 {
            return Err(Usage::new("Omega is defined off the origin").into());
        }
        sites = vec![Some([s1, s2])];
        points = vec![((s1 as f64).hypot(s2 as f64), (s2 as f64).atan2(s1 as f64))];
    } else if let (Some(lo), Some(hi)) = (a.r_min, a.r_max) {
        let s = annulus_sites(lo, hi)?;
        points = s
            .iter()
            .map(|p| ((p[0] as f64).hypot(p[1] as f64), (p[1] as f64).atan2(p[0] as f64)))
            .collect();
        sites = s.into_iter().map(Some).collect();
    } else if !a.r.is_empty() {
        points = a.r.iter().flat_map(|&r| a.psi.iter().map(move |&p| (r, p))).collect();
        sites = vec![None; points.len()];
    } else {
        return Err(Usage::new("give --s1/--s2, --r-min/--r-max, or --r with --psi").into());
    }
    let opts = OmegaOptions {
        tolerance: a.tolerance,
        cross_check: a.cross_check,
    };
    let rows = omega_batch(&points, &opts)?;
    let text = if a.format == Format::Csv {
        omega_csv(&sites, &rows)
    } else {
        let samples: Vec<(f64, f64)> = rows
            .iter()
            .filter(|d| d.r >= latgreen_core::omega::ASYMPTOTIC_MIN_RADIUS)
            .map(|d| (d.r, d.omega - omega_leading(d.r, d.psi)))
            .collect();
        let json_rows: Vec<serde_json::Value> = sites
            .iter()
            .zip(&rows)
            .map(|(s, d)| {
                let leading = omega_leading(d.r, d.psi);
                serde_json::json!({
                    "site": s,
                    "decomposition": d,
                    "leading": leading,
                    "residual": d.omega - leading,
                })
            })
            .collect();
        output::json(&serde_json::json!({
            "version": SCHEMA_VERSION,
            "rows": json_rows,
            "far_field_fit": fit_summary(&samples),
        }))?
    };
    output::emit(&text, a.output.as_deref())?;
    Ok(0)
}

fn omega_csv(sites: &[Option<[i64; 2]>], rows: &[OmegaDecomposition]) -> String {
    let mut csv = Csv::new(&[
        "s1", "s2", "r", "psi", "omega", "i1", "i3", "i4", "error_estimate", "leading", "residual",
        "residual_r52", "i2", "omega_direct",
    ]);
    for (s, d) in sites.iter().zip(rows) {
        let leading = omega_leading(d.r, d.psi);
        let residual = d.omega - leading;
        csv.row(vec![
            s.map_or(Cell::Empty, |s| Cell::Int(s[0])),
            s.map_or(Cell::Empty, |s| Cell::Int(s[1])),
            Cell::Float(d.r),
            Cell::Float(d.psi),
            Cell::Float(d.omega),
            Cell::Float(d.i1),
            Cell::Float(d.i3),
            Cell::Float(d.i4),
            Cell::Float(d.error_estimate),
            Cell::Float(leading),
            Cell::Float(residual),
            Cell::Float(d.r.powf(2.5) * residual.abs()),
            Cell::opt(d.i2),
            Cell::opt(d.omega_direct),
        ]);
    }
    csv.finish()
}

fn constants(a: ConstantsArgs) -> Result<u8> {
    let b = s0_quadrature()?;
    let text = match a.format {
        Format::Json => output::json(&b)?,
        Format::Text => {
            let value = serde_json::to_value(&b)?;
            let map = value.as_object().context("breakdown serialises to an object")?;
            map.iter()
                .map(|(k, v)| format!("{k} {:?}\n", v.as_f64().unwrap_or(f64::NAN)))
                .collect()
        }
        Format::Csv => {
            let value = serde_json::to_value(&b)?;
            let map = value.as_object().context("breakdown serialises to an object")?;
            let mut csv = Csv::new(&["name", "value"]);
            for (k, v) in map {
                csv.row(vec![Cell::Text(k.clone()), Cell::Float(v.as_f64().unwrap_or(f64::NAN))]);
            }
            csv.finish()
        }
    };
    output::emit(&text, a.output.as_deref())?;
    Ok(0)
}

fn verify(a: VerifyArgs) -> Result<u8> {
    if a.list {
        for name in suite_names() {
            println!("{name}");
        }
        return Ok(0);
    }
    let config = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<DashboardConfig>(&text)
                .map_err(|e| Usage::new(format!("{}: {e}", path.display())))?
        }
        None if a.suite.iter().any(|s| s == "all") => DashboardConfig::all(),
        None => DashboardConfig::only(&a.suite),
    };
    config.validate().map_err(|e| Usage::new(e.to_string()))?;
    let report = bound_dashboard(&config)?;
    report
        .write_to(&a.out)
        .with_context(|| format!("writing to {}", a.out.display()))?;
    for s in &report.suites {
        println!("{} {}", s.verdict, s.name);
    }
    println!(
        "passed {} failed {} errors {} -> {}",
        report.passed,
        report.failed,
        report.errors,
        a.out.join("report.json").display()
    );
    if report.suites.is_empty() {
        eprintln!("latgreen: no suites selected");
    }
    Ok(if report.all_pass() { 0 } else { 2 })
}
