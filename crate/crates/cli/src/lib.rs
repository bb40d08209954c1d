//! Command-line driver: each subcommand runs one experiment and writes CSV,
//! a metadata JSON document and, with `--plot`, SVG figures.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 usage or configuration error.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use nonlocal_trefftz::bvp1d::{refine_until, ApplyConvIn, BvpConfig, ConvVariant, Refinement};
use nonlocal_trefftz::csv;
use nonlocal_trefftz::metrics::{convergence_study, ConvergenceReport, StudyConfig};
use nonlocal_trefftz::nlconv::{conv_gaussian_analytic, conv_restricted, DEFAULT_QUAD_POINTS_PER_SIGMA};
use nonlocal_trefftz::trefftz::{
    build_trefftz_bulk, build_trefftz_interface_2d, evaluate_trefftz, padded_conv_domain, ConstraintIndexing,
    FieldKind, TrefftzOptions, TrefftzSet, PADDING_TOL,
};
use nonlocal_trefftz::{ConvConfig, ConvDomain, Dim, Kernel, Point, Polynomial, Rect};

pub mod params;
pub mod svg;

use params::*;

#[derive(Debug, Parser)]
#[command(name = "ntrefftz", version, about = "Nonlocal electrostatics: pseudoharmonic bases and the 1D two-point problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// 1D two-point problem: u, E profiles and the constant D.
    Bvp1d {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = VariantArg::Both)]
        variant: VariantArg,
        #[arg(long, value_enum)]
        apply_conv_in: Option<ApplyArg>,
    },
    /// 1D bulk pseudoharmonic functions sampled on a line.
    Trefftz1d {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        indexing: Option<IndexingArg>,
    },
    /// 2D bulk pseudoharmonic functions sampled on a grid.
    Trefftz2d {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        indexing: Option<IndexingArg>,
    },
    /// 2D functions glued across a local/nonlocal interface at x = 0.
    Interface2d {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        indexing: Option<IndexingArg>,
    },
    /// Trefftz vs Taylor approximation error of a divergence-free test field.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Include eps_loc E in the fitted fields.
        #[arg(long)]
        include_local_term: bool,
    },
    /// Finite-domain convolution identities and closed-form cross-checks.
    Selftest {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Parameter preset.
    #[arg(long, value_enum, default_value_t = Preset::Paper)]
    preset: Preset,
    /// JSON document overriding preset keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write SVG figures.
    #[arg(long)]
    plot: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    Paper,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum VariantArg {
    WholeDomain,
    NonlocalOnly,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ApplyArg {
    Everywhere,
    NonlocalRegionOnly,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum IndexingArg {
    ZeroThroughM,
    OneThroughM,
}

impl From<ApplyArg> for ApplyConvIn {
    fn from(a: ApplyArg) -> Self {
        match a {
            ApplyArg::Everywhere => ApplyConvIn::Everywhere,
            ApplyArg::NonlocalRegionOnly => ApplyConvIn::NonlocalRegionOnly,
        }
    }
}

impl From<IndexingArg> for ConstraintIndexing {
    fn from(a: IndexingArg) -> Self {
        match a {
            IndexingArg::ZeroThroughM => ConstraintIndexing::ZeroThroughM,
            IndexingArg::OneThroughM => ConstraintIndexing::OneThroughM,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 1,
            CliError::Usage(_) | CliError::Config(_) | CliError::Io(_) => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Numerical(_) => "numerical",
            CliError::Io(_) => "io",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            CliError::Usage(m) | CliError::Config(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        };
        let one_line = msg.lines().map(str::trim).filter(|l| !l.is_empty()).collect::<Vec<_>>().join(" ");
        write!(f, "error kind={} reason={:?}", self.kind(), one_line)
    }
}

impl From<nonlocal_trefftz::Error> for CliError {
    fn from(e: nonlocal_trefftz::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Files produced by one run, written together once the run has finished.
struct Outputs {
    dir: PathBuf,
    plot: bool,
    /// Written as XML comments at the top of every SVG.
    svg_meta: Vec<(String, String)>,
    files: Vec<(String, String)>,
}

impl Outputs {
    fn add(&mut self, name: impl Into<String>, body: String) {
        self.files.push((name.into(), body));
    }

    fn add_svg(&mut self, name: impl Into<String>, body: impl FnOnce() -> String) {
        if self.plot {
            let body = body();
            let (decl, rest) = body.split_once('\n').unwrap_or(("", &body));
            let mut doc = format!("{decl}\n");
            for (k, v) in &self.svg_meta {
                doc.push_str(&format!("<!-- {k}: {} -->\n", v.replace("--", "- -")));
            }
            doc.push_str(rest);
            self.add(name, doc);
        }
    }

    fn flush(&self) -> CliResult<Vec<PathBuf>> {
        std::fs::create_dir_all(&self.dir).map_err(|e| CliError::Io(format!("{}: {e}", self.dir.display())))?;
        self.files
            .iter()
            .map(|(name, body)| {
                let path = self.dir.join(name);
                std::fs::write(&path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                Ok(path)
            })
            .collect()
    }
}

fn load<T: serde::de::DeserializeOwned + Default>(config: &Option<PathBuf>) -> CliResult<T> {
    match config {
        None => Ok(T::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        }
    }
}

fn preset_name(common: &Common) -> String {
    match (&common.preset, &common.config) {
        (Preset::Paper, None) => "paper".into(),
        (Preset::Paper, Some(p)) => format!("paper+{}", file_name(p)),
    }
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON value serializes");
    s.push('\n');
    s
}

/// `# key: value` lines shared by CSV outputs.
fn meta_lines(subcommand: &str, preset: &str, switches: &Value, extra: &[(&str, String)]) -> Vec<(String, String)> {
    let mut m = vec![("subcommand".to_string(), subcommand.to_string()), ("preset".to_string(), preset.to_string())];
    if let Value::Object(map) = switches {
        for (k, v) in map {
            m.push((k.clone(), v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string())));
        }
    }
    m.extend(extra.iter().map(|(k, v)| (k.to_string(), v.clone())));
    m
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Parses `argv` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprintln!("{}", CliError::Usage(e.to_string()));
            return 2;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    let (outputs, status) = match &cli.command {
        Command::Bvp1d {
            common,
            variant,
            apply_conv_in,
        } => cmd_bvp1d(common, *variant, *apply_conv_in),
        Command::Trefftz1d { common, indexing } => cmd_trefftz1d(common, *indexing),
        Command::Trefftz2d { common, indexing } => cmd_trefftz2d(common, *indexing),
        Command::Interface2d { common, indexing } => cmd_interface2d(common, *indexing),
        Command::Converge {
            common,
            include_local_term,
        } => cmd_converge(common, *include_local_term),
        Command::Selftest { common } => cmd_selftest(common),
    }?;
    for p in outputs.flush()? {
        println!("wrote {}", p.display());
    }
    status
}

/// Outputs to write plus the run's final status; files are written even when
/// the status is a numerical failure.
type Run = CliResult<(Outputs, CliResult<()>)>;

fn outputs(common: &Common, subcommand: &str, switches: &Value) -> Outputs {
    Outputs {
        dir: common.out.clone(),
        plot: common.plot,
        svg_meta: meta_lines(subcommand, &preset_name(common), switches, &[]),
        files: Vec::new(),
    }
}

const NOT_APPLICABLE: &str = "not_applicable";

/// Every model-ambiguity switch, named in all outputs; those that do not
/// affect a subcommand are marked not applicable.
fn switches(apply: Option<ApplyConvIn>, include_local_term: Option<bool>, indexing: Option<ConstraintIndexing>) -> Value {
    json!({
        "apply_conv_in": apply.map_or(NOT_APPLICABLE, ApplyConvIn::as_str),
        "include_local_term": include_local_term.map_or(NOT_APPLICABLE.to_string(), |b| b.to_string()),
        "constraint_indexing": indexing.map_or(NOT_APPLICABLE, ConstraintIndexing::as_str),
    })
}

const BVP_REFERENCE: [(ConvVariant, f64); 2] = [(ConvVariant::WholeDomain, -0.3944), (ConvVariant::NonlocalOnly, -0.6553)];

fn cmd_bvp1d(common: &Common, variant: VariantArg, apply: Option<ApplyArg>) -> Run {
    let mut p: BvpParams = load(&common.config)?;
    if let Some(a) = apply {
        p.apply_conv_in = a.into();
    }
    let variants: Vec<ConvVariant> = match variant {
        VariantArg::WholeDomain => vec![ConvVariant::WholeDomain],
        VariantArg::NonlocalOnly => vec![ConvVariant::NonlocalOnly],
        VariantArg::Both => vec![ConvVariant::WholeDomain, ConvVariant::NonlocalOnly],
    };
    let kernel = Kernel::gaussian(Dim::One, p.sigma)?;
    let preset = preset_name(common);
    let switches = switches(Some(p.apply_conv_in), None, None);
    let mut out = outputs(common, "bvp1d", &switches);
    let mut results = serde_json::Map::new();
    let mut solved: Vec<(ConvVariant, Refinement)> = Vec::new();
    for v in variants {
        let cfg = BvpConfig {
            domain: (p.domain[0], p.domain[1]),
            local_region: (p.local_region[0], p.local_region[1]),
            kernel: kernel.clone(),
            eps_loc: p.eps_loc,
            eps_nl: p.eps_nl,
            variant: v,
            apply_conv_in: p.apply_conv_in,
            n_cells: p.n_cells,
            u_a: p.u_a,
            u_b: p.u_b,
        };
        let r = refine_until(&cfg, p.target_rel_change, p.max_cells)?;
        let s = &r.solution;
        let reference = BVP_REFERENCE.iter().find(|(rv, _)| *rv == v).map(|x| x.1);
        let within = reference.map(|d_ref| (s.d - d_ref).abs() <= 0.05 * d_ref.abs());
        let meta = meta_lines(
            "bvp1d",
            &preset,
            &switches,
            &[
                ("variant", v.as_str().into()),
                ("D", format!("{:e}", s.d)),
                ("n_cells", s.n_cells().to_string()),
                ("converged", r.converged.to_string()),
                ("rel_change", format!("{:e}", r.rel_change)),
            ],
        );
        out.add(format!("bvp1d_{}.csv", v.as_str()), csv::render(&meta, &["x", "u", "E"], &s.profile_rows()));
        results.insert(
            v.as_str().into(),
            json!({
                "D": s.d,
                "n_cells": s.n_cells(),
                "converged": r.converged,
                "rel_change": r.rel_change,
                "history": r.history,
                "local_region": [s.local_region.0, s.local_region.1],
                "local_region_snapped": s.snapped,
                "pivot_ratio": s.pivot_ratio,
                "residual": s.residual,
                "reference_D": reference,
                "within_5_percent_of_reference": within,
            }),
        );
        solved.push((v, r));
    }
    if let [(_, a), (_, b)] = solved.as_slice() {
        results.insert("ratio_nonlocal_only_to_whole_domain".into(), json!(b.solution.d / a.solution.d));
    }
    let doc = json!({
        "subcommand": "bvp1d",
        "preset": preset,
        "config": p,
        "switches": switches,
        "results": results,
    });
    out.add("bvp1d.json", pretty(&doc));
    out.add_svg("bvp1d_u.svg", || {
        let series: Vec<svg::Series> = solved
            .iter()
            .map(|(v, r)| svg::Series {
                label: v.as_str(),
                points: r.solution.nodes.iter().copied().zip(r.solution.u.iter().copied()).collect(),
            })
            .collect();
        svg::line_plot("potential", "x", "u", &series, false)
    });
    out.add_svg("bvp1d_e.svg", || {
        let series: Vec<svg::Series> = solved
            .iter()
            .map(|(v, r)| svg::Series {
                label: v.as_str(),
                points: r.solution.midpoints.iter().copied().zip(r.solution.e.iter().copied()).collect(),
            })
            .collect();
        svg::line_plot("field", "x", "E", &series, false)
    });
    let unconverged: Vec<&str> = solved.iter().filter(|(_, r)| !r.converged).map(|(v, _)| v.as_str()).collect();
    let status = if unconverged.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "refinement did not reach {:e} within {} cells for {}",
            p.target_rel_change,
            p.max_cells,
            unconverged.join(",")
        )))
    };
    Ok((out, status))
}

fn opts(indexing: ConstraintIndexing) -> TrefftzOptions {
    TrefftzOptions {
        indexing,
        ..TrefftzOptions::default()
    }
}

fn set_summary(ts: &TrefftzSet) -> Value {
    json!({
        "n_funcs": ts.n_funcs(),
        "n_basis": ts.n_basis(),
        "rank": ts.rank,
        "residuals": ts.residuals,
        "residual_scale": ts.residual_scale,
        "max_relative_residual": ts.max_relative_residual(),
        "dropped_rows": ts.dropped_rows,
        "x0": ts.x0,
        "trefftz_domain": ts.trefftz_domain,
    })
}

/// The full function set under `set`, reloadable with `TrefftzSet` deserialization.
fn set_document(subcommand: &str, preset: &str, switches: &Value, ts: &TrefftzSet) -> String {
    pretty(&json!({
        "subcommand": subcommand,
        "preset": preset,
        "switches": switches,
        "set": serde_json::to_value(ts).expect("TrefftzSet serializes"),
    }))
}

const FIELD_NAMES_1D: [(FieldKind, &str); 4] =
    [(FieldKind::U, "u"), (FieldKind::E, "E"), (FieldKind::D, "D"), (FieldKind::DivD, "divD")];

fn cmd_trefftz1d(common: &Common, indexing: Option<IndexingArg>) -> Run {
    let mut p: Trefftz1dParams = load(&common.config)?;
    if let Some(i) = indexing {
        p.indexing = i.into();
    }
    let kernel = Kernel::gaussian(Dim::One, p.sigma)?;
    let tdom = Rect::interval(p.x0 - p.trefftz_half_width, p.x0 + p.trefftz_half_width);
    let delta = kernel.truncation_radius(PADDING_TOL)?;
    let conv = ConvDomain::interval(p.conv_lo, tdom.hi[0] + delta)?;
    let cfg = ConvConfig::new(p.eps_loc, p.eps_nl, kernel, conv)?;
    let ts = build_trefftz_bulk(&cfg, p.n_max, [p.x0, 0.0], p.m, tdom, &opts(p.indexing))?;
    if p.samples < 2 {
        return Err(CliError::Config("samples must be ≥ 2".into()));
    }
    let lo = (p.x0 - p.sample_half_width).max(p.conv_lo);
    let hi = p.x0 + p.sample_half_width;
    let xs = linspace(lo, hi, p.samples);
    let pts: Vec<Point> = xs.iter().map(|&x| [x, 0.0]).collect();
    let mut header = vec!["x".to_string()];
    let mut columns: Vec<Vec<f64>> = vec![xs.clone()];
    for k in 0..ts.n_funcs() {
        for (kind, name) in FIELD_NAMES_1D {
            header.push(format!("{name}_{k}"));
            columns.push(evaluate_trefftz(&ts, k, kind, &pts)?.into_iter().map(|v| v[0]).collect());
        }
    }
    let rows: Vec<Vec<f64>> = (0..xs.len()).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
    let preset = preset_name(common);
    let switches = switches(None, None, Some(p.indexing));
    let meta = meta_lines(
        "trefftz1d",
        &preset,
        &switches,
        &[
            ("n_funcs", ts.n_funcs().to_string()),
            ("max_relative_residual", format!("{:e}", ts.max_relative_residual())),
        ],
    );
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut out = outputs(common, "trefftz1d", &switches);
    out.add("trefftz1d.csv", csv::render(&meta, &header_refs, &rows));
    out.add("trefftz1d_set.json", set_document("trefftz1d", &preset, &switches, &ts));
    out.add(
        "trefftz1d.json",
        pretty(&json!({
            "subcommand": "trefftz1d",
            "preset": preset,
            "config": p,
            "switches": switches,
            "results": set_summary(&ts),
        })),
    );
    for (f, (_, name)) in FIELD_NAMES_1D.iter().enumerate() {
        out.add_svg(format!("trefftz1d_{name}.svg"), || {
            let labels: Vec<String> = (0..ts.n_funcs()).map(|k| format!("function {k}")).collect();
            let series: Vec<svg::Series> = (0..ts.n_funcs())
                .map(|k| svg::Series {
                    label: &labels[k],
                    points: xs.iter().copied().zip(columns[1 + 4 * k + f].iter().copied()).collect(),
                })
                .collect();
            svg::line_plot(name, "x", name, &series, false)
        });
    }
    Ok((out, Ok(())))
}

const FIELD_NAMES_2D: [&str; 6] = ["u", "Ex", "Ey", "Dx", "Dy", "divD"];

/// Samples every field of every function on a `grid × grid` lattice.
fn grid_outputs(
    name: &str,
    common: &Common,
    ts: &TrefftzSet,
    center: Point,
    half_width: f64,
    grid: usize,
    which: usize,
    config: Value,
    switches: Value,
) -> Run {
    if grid < 2 {
        return Err(CliError::Config("grid must be ≥ 2".into()));
    }
    if which >= ts.n_funcs() {
        return Err(CliError::Config(format!("which = {which} but only {} functions", ts.n_funcs())));
    }
    let xs = linspace(center[0] - half_width, center[0] + half_width, grid);
    let ys = linspace(center[1] - half_width, center[1] + half_width, grid);
    let pts: Vec<Point> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| [x, y])).collect();
    let mut header = vec!["x".to_string(), "y".to_string()];
    let mut columns: Vec<Vec<f64>> = vec![pts.iter().map(|p| p[0]).collect(), pts.iter().map(|p| p[1]).collect()];
    for k in 0..ts.n_funcs() {
        let u = evaluate_trefftz(ts, k, FieldKind::U, &pts)?;
        let e = evaluate_trefftz(ts, k, FieldKind::E, &pts)?;
        let d = evaluate_trefftz(ts, k, FieldKind::D, &pts)?;
        let div = evaluate_trefftz(ts, k, FieldKind::DivD, &pts)?;
        columns.push(u.iter().map(|v| v[0]).collect());
        columns.push(e.iter().map(|v| v[0]).collect());
        columns.push(e.iter().map(|v| v[1]).collect());
        columns.push(d.iter().map(|v| v[0]).collect());
        columns.push(d.iter().map(|v| v[1]).collect());
        columns.push(div.iter().map(|v| v[0]).collect());
        header.extend(FIELD_NAMES_2D.iter().map(|f| format!("{f}_{k}")));
    }
    let rows: Vec<Vec<f64>> = (0..pts.len()).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
    let preset = preset_name(common);
    let meta = meta_lines(
        name,
        &preset,
        &switches,
        &[
            ("x0", format!("{} {}", ts.x0[0], ts.x0[1])),
            ("n_funcs", ts.n_funcs().to_string()),
            ("max_relative_residual", format!("{:e}", ts.max_relative_residual())),
        ],
    );
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut out = outputs(common, name, &switches);
    out.add(format!("{name}.csv"), csv::render(&meta, &header_refs, &rows));
    out.add(format!("{name}_set.json"), set_document(name, &preset, &switches, ts));
    out.add(
        format!("{name}.json"),
        pretty(&json!({
            "subcommand": name,
            "preset": preset,
            "config": config,
            "switches": switches,
            "results": set_summary(ts),
        })),
    );
    for (f, field) in FIELD_NAMES_2D.iter().enumerate() {
        if matches!(*field, "Ex" | "Ey") {
            continue;
        }
        out.add_svg(format!("{name}_{field}_{which}.svg"), || {
            let col = &columns[2 + 6 * which + f];
            let values: Vec<Vec<f64>> = col.chunks(grid).map(<[f64]>::to_vec).collect();
            svg::heatmap(&format!("{field} of function {which}"), &xs, &ys, &values)
        });
    }
    Ok((out, Ok(())))
}

fn cmd_trefftz2d(common: &Common, indexing: Option<IndexingArg>) -> Run {
    let mut p: Trefftz2dParams = load(&common.config)?;
    if let Some(i) = indexing {
        p.indexing = i.into();
    }
    let kernel = Kernel::gaussian(Dim::Two, p.sigma)?;
    let conv = ConvDomain::single(Dim::Two, Rect::centered(Dim::Two, [0.0, 0.0], p.omega_a_half_width))?;
    let cfg = ConvConfig::new(p.eps_loc, p.eps_nl, kernel, conv)?;
    let tdom = Rect::centered(Dim::Two, [0.0, 0.0], p.trefftz_half_width);
    let ts = build_trefftz_bulk(&cfg, p.n_max, [0.0, 0.0], p.m, tdom, &opts(p.indexing))?;
    let switches = switches(None, None, Some(p.indexing));
    grid_outputs(
        "trefftz2d",
        common,
        &ts,
        [0.0, 0.0],
        p.sample_half_width,
        p.grid,
        p.which,
        serde_json::to_value(&p).expect("params serialize"),
        switches,
    )
}

fn cmd_interface2d(common: &Common, indexing: Option<IndexingArg>) -> Run {
    let mut p: InterfaceParams = load(&common.config)?;
    if let Some(i) = indexing {
        p.indexing = i.into();
    }
    let kernel = Kernel::gaussian(Dim::Two, p.sigma)?;
    let tdom = Rect::centered(Dim::Two, [0.0, 0.0], p.trefftz_half_width);
    let padded = padded_conv_domain(&kernel, Dim::Two, &tdom)?.hull();
    let right = ConvDomain::single(Dim::Two, Rect::new([0.0, padded.lo[1]], padded.hi))?;
    let cfg = ConvConfig::new(p.eps_loc, p.eps_nl, kernel, right)?;
    let ts = build_trefftz_interface_2d(&cfg, p.eps_local, p.n_max, p.m, p.p_max, p.x0, tdom, &opts(p.indexing))?;
    let switches = switches(None, None, Some(p.indexing));
    grid_outputs(
        "interface2d",
        common,
        &ts,
        [0.0, 0.0],
        p.sample_half_width,
        p.grid,
        p.which,
        serde_json::to_value(&p).expect("params serialize"),
        switches,
    )
}

pub fn study_config(p: &ConvergeParams) -> CliResult<StudyConfig> {
    let kernel = Kernel::gaussian(Dim::Two, p.sigma)?;
    let conv = ConvDomain::single(Dim::Two, Rect::centered(Dim::Two, [0.0, 0.0], p.omega_a_half_width))?;
    Ok(StudyConfig {
        cfg: ConvConfig::new(p.eps_loc, p.eps_nl, kernel, conv)?,
        n_max_list: p.n_max_list.clone(),
        m: p.m,
        omega_t: Rect::centered(Dim::Two, [0.0, 0.0], p.omega_t_half_width),
        x0: [0.0, 0.0],
        include_local_term: p.include_local_term,
        options: opts(p.indexing),
        quad_points: p.quad_points,
    })
}

fn report_summary(r: &ConvergenceReport) -> Value {
    json!({
        "rows": r.rows,
        "slope_trefftz": r.trefftz_slope(),
        "slope_taylor": r.taylor_slope(),
        "matched_counts": r.matched_counts(5),
        "trefftz_strictly_decreasing_n_max_1_to_4": r.trefftz_strictly_decreasing(1..=4),
        "target": r.target,
        "norm": r.norm,
        "omega_t": r.omega_t,
    })
}

fn cmd_converge(common: &Common, include_local_term: bool) -> Run {
    let mut p: ConvergeParams = load(&common.config)?;
    if include_local_term {
        p.include_local_term = true;
    }
    if p.n_max_list.is_empty() {
        return Err(CliError::Config("n_max_list must not be empty".into()));
    }
    let report = convergence_study(&study_config(&p)?)?;
    let preset = preset_name(common);
    let switches = switches(None, Some(p.include_local_term), Some(p.indexing));
    let fmt_opt = |s: Option<f64>| s.map(|v| format!("{v:e}")).unwrap_or_else(|| "none".into());
    let meta = meta_lines(
        "converge",
        &preset,
        &switches,
        &[
            ("slope_trefftz", fmt_opt(report.trefftz_slope())),
            ("slope_taylor", fmt_opt(report.taylor_slope())),
        ],
    );
    let mut out = outputs(common, "converge", &switches);
    out.add(
        "converge.csv",
        csv::render(&meta, &ConvergenceReport::CSV_HEADER, &report.csv_rows()),
    );
    out.add(
        "converge.json",
        pretty(&json!({
            "subcommand": "converge",
            "preset": preset,
            "config": p,
            "switches": switches,
            "results": report_summary(&report),
        })),
    );
    out.add_svg("converge.svg", || {
        let series = [
            svg::Series {
                label: "Trefftz",
                points: report.rows.iter().map(|r| (r.n_funcs_trefftz as f64, r.error_trefftz)).collect(),
            },
            svg::Series {
                label: "Taylor",
                points: report.rows.iter().map(|r| (r.n_funcs_taylor as f64, r.error_taylor)).collect(),
            },
        ];
        svg::line_plot("approximation error", "number of functions", "error", &series, true)
    });
    Ok((out, Ok(())))
}

/// One selftest check: name, worst absolute error, tolerance.
pub struct Check {
    pub name: &'static str,
    pub error: f64,
    pub tol: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.error <= self.tol
    }
}

/// Restricted-convolution identities on `[0, 1]` and closed-form cross-checks.
pub fn selftest_checks() -> CliResult<Vec<Check>> {
    let one = Polynomial::constant(Dim::One, [0.0, 0.0], 1.0);
    let x = Polynomial::monomial(Dim::One, [0.0, 0.0], [1, 0]);
    let unit = ConvDomain::interval(0.0, 1.0)?;
    let k_one = Kernel::poly_test(one.clone())?;
    let k_x = Kernel::poly_test(x.clone())?;
    let samples = linspace(-2.0, 3.0, 20);
    let worst = |f: &dyn Fn(f64) -> CliResult<f64>| -> CliResult<f64> {
        samples.iter().try_fold(0.0f64, |a, &s| Ok(a.max(f(s)?)))
    };
    let q = DEFAULT_QUAD_POINTS_PER_SIGMA;
    let e1 = worst(&|s| Ok((conv_restricted(&k_one, &x, &unit, [s, 0.0], [0, 0], q)? - 0.5).abs()))?;
    let e2 = worst(&|s| Ok((conv_restricted(&k_x, &one, &unit, [s, 0.0], [0, 0], q)? - (s - 0.5)).abs()))?;
    let e3 = worst(&|s| Ok((conv_restricted(&k_x, &one, &unit, [s, 0.0], [1, 0], q)? - 1.0).abs()))?;
    // differentiating the field first: x * (d/dx 1) = x * 0
    let zero = one.partial([1, 0]);
    let e4 = worst(&|s| Ok(conv_restricted(&k_x, &zero, &unit, [s, 0.0], [0, 0], q)?.abs()))?;
    let mut oracle = 0.0f64;
    for (i, &sigma) in [0.25, 0.5, 1.0].iter().enumerate() {
        for p in 0..=6usize {
            for &(a, b, xe, c) in &[(-1.0, 0.5, 0.1, 0.0), (0.0, 2.0, 1.7, 0.3), (-2.0, -0.5, -0.3, -1.0)] {
                let shift = 0.1 * i as f64;
                let (a, b, xe) = (a + shift, b + shift, xe + shift);
                let f = Polynomial::monomial(Dim::One, [c, 0.0], [p, 0]);
                let k = Kernel::gaussian(Dim::One, sigma)?;
                let quad = conv_restricted(&k, &f, &ConvDomain::interval(a, b)?, [xe, 0.0], [0, 0], q)?;
                let exact = conv_gaussian_analytic(sigma, p, c, (a, b), xe)?;
                oracle = oracle.max((quad - exact).abs() / exact.abs().max(1e-300));
            }
        }
    }
    Ok(vec![
        Check { name: "1 *_[0,1] x = 0.5", error: e1, tol: 1e-12 },
        Check { name: "(x *_[0,1] 1)(x) = x - 0.5", error: e2, tol: 1e-12 },
        Check { name: "d/dx (x *_[0,1] 1) = 1", error: e3, tol: 1e-12 },
        Check { name: "x *_[0,1] (d/dx 1) = 0", error: e4, tol: 1e-12 },
        Check { name: "quadrature vs closed form (relative)", error: oracle, tol: 1e-10 },
    ])
}

fn cmd_selftest(common: &Common) -> Run {
    if common.config.is_some() {
        return Err(CliError::Config("selftest takes no config document".into()));
    }
    let checks = selftest_checks()?;
    for (i, c) in checks.iter().enumerate() {
        println!(
            "check {i} {}: {} (error {:e}, tol {:e})",
            c.name,
            if c.passed() { "pass" } else { "FAIL" },
            c.error,
            c.tol
        );
    }
    let preset = preset_name(common);
    let switches = switches(None, None, None);
    let meta: Vec<(String, String)> = meta_lines("selftest", &preset, &switches, &[])
        .into_iter()
        .chain(checks.iter().enumerate().map(|(i, c)| (format!("check_{i}"), c.name.to_string())))
        .collect();
    let rows: Vec<Vec<f64>> = checks
        .iter()
        .enumerate()
        .map(|(i, c)| vec![i as f64, c.error, c.tol, if c.passed() { 1.0 } else { 0.0 }])
        .collect();
    let mut out = outputs(common, "selftest", &switches);
    out.add("selftest.csv", csv::render(&meta, &["check", "error", "tolerance", "passed"], &rows));
    let results: Vec<Value> = checks
        .iter()
        .map(|c| json!({ "name": c.name, "error": c.error, "tolerance": c.tol, "passed": c.passed() }))
        .collect();
    out.add(
        "selftest.json",
        pretty(&json!({ "subcommand": "selftest", "preset": preset, "switches": switches, "results": results })),
    );
    let failed = checks.iter().filter(|c| !c.passed()).count();
    let status = if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("{failed} selftest checks failed")))
    };
    Ok((out, status))
}

#[cfg(test)]
mod tests;
