//! Command-line front end. The `degenbif` binary only calls [`run`].
//!
//! Every subcommand produces an [`Output`]: a JSON document, a flat table for
//! `--format csv`, and warnings. Exit status is 0 on success, 2 when the input
//! violates a structural hypothesis (or the run produced warnings) and 1 on
//! any other error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::applications::chemnet::{
    chem_branch_function, chem_pipeline_branch_points, chem_regularity, ChemNetworkModel, PerturbationFn, RateFn,
};
use crate::applications::hamiltonian::{
    degenerate_energies, jacobi_reduced_quartic, kernel_dimension, RadialPotential, RadialPotentialModel,
};
use crate::blowup::classify::default_tol;
use crate::blowup::curves::solve_on_torus;
use crate::blowup::{
    bifurcation_arcs_m, bifurcation_arcs_m2, classify_point_m, direction, extract_expansion,
    find_special_points_m2, ArcOptions, ClassifiedPoint, ExpansionData, PointKind, TorusDomain,
};
use crate::branching::{find_branch_points, BranchDataSource, BranchOptions, ExtractedSource, ModelSource, Variant};
use crate::deformation::{DeformationParams, Field2, VersalFamily};
use crate::error::Error;
use crate::expr::Expr;
use crate::lyapunov_schmidt::{build_reduction, extract_branch_data, LSReduction};
use crate::model::ModelDoc;
use crate::oracle::{
    count_solutions, region_count_map, trace_branch, CountMapOptions, CountOptions, TraceOptions, Window,
};
use crate::resultant::{is_on_discriminant, resultant, verify_structure};

#[derive(Debug, Parser)]
#[command(name = "degenbif", version, about = "Bifurcation analysis near curves of degenerate equilibria")]
pub struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for randomised checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Cap on worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Resultant of versal parameter vectors, or a randomised structure check.
    #[command(subcommand)]
    Discriminant(DiscriminantCmd),
    /// End and intersection points of the tangent cone of a versal model.
    Classify(ClassifyArgs),
    /// Bifurcation arcs of a versal model traced in the blown-up parameter plane.
    Arcs(ArcsArgs),
    /// Numerical reduction of an ambient system and its Taylor data.
    Reduce(ReduceArgs),
    /// Branch points of a reduced or ambient model.
    BranchPoints(BranchPointsArgs),
    /// Brute-force zero count at fixed parameters, or a count map on a circle.
    Count(CountArgs),
    /// Trace the solution branch emanating from a branch point.
    Trace(TraceArgs),
    /// Degenerate energy levels of circular orbits in the Mexican hat potential.
    Hamiltonian(HamiltonianArgs),
    /// Degenerate steady states of the three-species reaction network.
    Chemnet(ChemnetArgs),
}

#[derive(Debug, Subcommand)]
pub enum DiscriminantCmd {
    /// Evaluate `R_m` at one or more parameter vectors.
    Eval {
        #[arg(long)]
        m: usize,
        /// `a0,..,a_{m-1},abar0,..,abar_{m-2}`; repeat for several vectors.
        #[arg(long, required = true, value_delimiter = ',', num_args = 1.., action = clap::ArgAction::Append)]
        params: Vec<f64>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Randomised check of the low-order structure of `R_m`.
    Structure {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 64)]
        trials: usize,
    },
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct ArcsArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    /// A `system` model document.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    /// Number of chart points at which Taylor data is extracted.
    #[arg(long, default_value_t = 16)]
    pub points: usize,
    #[arg(long, default_value_t = 0.05)]
    pub y_box: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub eps_probe: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    General,
    Uniform,
}

#[derive(Debug, Args)]
pub struct BranchPointsArgs {
    /// A `reduced` or `system` model document.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value_t = VariantArg::General)]
    pub variant: VariantArg,
    /// Parameter direction `s` (defaults to the first axis).
    #[arg(long, value_delimiter = ',')]
    pub direction: Option<Vec<f64>>,
    #[arg(long, default_value_t = 2048)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Parameter vector for a single count.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub eps: Option<Vec<f64>>,
    /// Radius of a count map over `eps = rho (cos t, sin t)` (needs `q = 2`).
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, default_value_t = 360)]
    pub angles: usize,
    #[arg(long, default_value_t = 0.5)]
    pub y_half: f64,
    #[arg(long, default_value_t = 200)]
    pub nx: usize,
    #[arg(long, default_value_t = 200)]
    pub ny: usize,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub direction: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    pub y_sign: Option<f64>,
    #[arg(long, default_value_t = 1e-5)]
    pub t_min: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub t_max: f64,
}

#[derive(Debug, Args)]
pub struct HamiltonianArgs {
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 2)]
    pub n_min: i32,
    #[arg(long, default_value_t = 10)]
    pub n_max: i32,
    #[arg(long, default_value_t = 32)]
    pub modes: u32,
    /// Also fit the reduced Jacobi quartic at every level inside the Hill band.
    #[arg(long)]
    pub quartic: bool,
}

#[derive(Debug, Args)]
pub struct ChemnetArgs {
    /// Rate `v(x1)` of the inflow reaction.
    #[arg(long, default_value = "(x1-1)^2")]
    pub rate: String,
    /// Perturbation field `f1;f2;f3` in `z1,z2,z3`; repeat for several.
    #[arg(long, default_values_t = vec!["cos(z3);1;0".to_string()])]
    pub phi: Vec<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub direction: Option<Vec<f64>>,
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    /// Skip the numerical reduction cross-check.
    #[arg(long)]
    pub no_pipeline: bool,
}

/// Result of one subcommand.
#[derive(Debug, Clone, Default)]
pub struct Output {
    pub json: Value,
    /// Print each element of a top-level JSON array on its own line.
    pub json_lines: bool,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub warnings: Vec<String>,
}

impl Output {
    fn new(json: Value, header: &[&str]) -> Self {
        Self {
            json,
            header: header.iter().map(|s| s.to_string()).collect(),
            ..Self::default()
        }
    }

    fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    pub fn render(&self, format: Format) -> anyhow::Result<Vec<u8>> {
        match format {
            Format::Json => {
                let mut s = match (&self.json, self.json_lines) {
                    (Value::Array(items), true) => items
                        .iter()
                        .map(serde_json::to_string)
                        .collect::<Result<Vec<_>, _>>()?
                        .join("\n"),
                    _ => serde_json::to_string_pretty(&self.json)?,
                };
                s.push('\n');
                Ok(s.into_bytes())
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.header)?;
                for r in &self.rows {
                    w.write_record(r)?;
                }
                Ok(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)
            }
        }
    }
}

fn f(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(f).unwrap_or_default()
}

/// Errors that signal a violated modelling hypothesis rather than bad input.
pub fn is_hypothesis_violation(e: &Error) -> bool {
    matches!(
        e,
        Error::ConstantCorankViolation { .. }
            | Error::NontrivialBundle
            | Error::FlatComponent { .. }
            | Error::VariantMismatch(_)
            | Error::DegeneracyCheck(_)
            | Error::OutsideValidity { .. }
    )
}

/// Parse `args`, run the subcommand and write its output. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    if cli.threads > 0 {
        // a second call in the same process fails harmlessly
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    match execute(&cli) {
        Ok(out) => {
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            let written = out.render(cli.format).and_then(|bytes| write_out(cli.out.as_deref(), &bytes));
            match written {
                Err(e) => {
                    eprintln!("error: {e:#}");
                    1
                }
                Ok(()) if out.warnings.is_empty() => 0,
                Ok(()) => 2,
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(inner) if is_hypothesis_violation(inner) => 2,
                _ => 1,
            }
        }
    }
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(bytes)?;
            Ok(so.flush()?)
        }
    }
}

pub fn execute(cli: &Cli) -> anyhow::Result<Output> {
    match &cli.command {
        Command::Discriminant(c) => discriminant(c, cli.seed),
        Command::Classify(a) => classify(a),
        Command::Arcs(a) => arcs(a),
        Command::Reduce(a) => reduce(a),
        Command::BranchPoints(a) => branch_points(a),
        Command::Count(a) => count(a),
        Command::Trace(a) => trace(a),
        Command::Hamiltonian(a) => hamiltonian(a),
        Command::Chemnet(a) => chemnet(a),
    }
}

fn discriminant(cmd: &DiscriminantCmd, seed: u64) -> anyhow::Result<Output> {
    match cmd {
        DiscriminantCmd::Eval { m, params, tol } => {
            let len = 2 * m - 1;
            if *m < 2 || params.is_empty() || params.len() % len != 0 {
                anyhow::bail!(Error::InvalidParams(format!(
                    "m = {m} needs parameter vectors of length {len}, got {} values",
                    params.len()
                )));
            }
            let mut out = Output::new(Value::Null, &["params", "resultant", "on_discriminant"]);
            out.json_lines = true;
            let mut lines = Vec::new();
            for chunk in params.chunks(len) {
                let p = DeformationParams::from_flat(*m, chunk)?;
                let r = resultant(&p);
                let on = is_on_discriminant(&p, *tol);
                lines.push(json!({"m": m, "params": chunk, "resultant": r, "on_discriminant": on}));
                let joined = chunk.iter().map(|v| f(*v)).collect::<Vec<_>>().join(" ");
                out.row(vec![joined, f(r), on.to_string()]);
            }
            out.json = Value::Array(lines);
            Ok(out)
        }
        DiscriminantCmd::Structure { m, trials } => {
            let rep = verify_structure(*m, *trials, seed)?;
            let mut out = Output::new(serde_json::to_value(&rep)?, &["all_pass", "max_residual"]);
            out.row(vec![rep.all_pass().to_string(), f(rep.max_residual())]);
            if !rep.all_pass() {
                out.warnings.push("resultant structure check failed".into());
            }
            Ok(out)
        }
    }
}

fn load_versal(path: &Path) -> anyhow::Result<VersalFamily> {
    match ModelDoc::load(path)? {
        ModelDoc::Versal(d) => Ok(d.build()?),
        _ => anyhow::bail!(Error::InvalidParams("this command needs a `versal` model document".into())),
    }
}

fn expansion_of(fam: &VersalFamily) -> anyhow::Result<ExpansionData> {
    let [lo, hi] = fam.chart.range;
    let xs: Vec<f64> = (0..16).map(|i| lo + (hi - lo) * i as f64 / 16.0).collect();
    Ok(extract_expansion(fam.a.clone(), fam.q, 2 * fam.m - 1, 1e-4, &xs)?)
}

fn torus_of(fam: &VersalFamily) -> TorusDomain {
    if fam.chart.periodic() {
        TorusDomain::periodic(fam.chart.range)
    } else {
        TorusDomain::interval(fam.chart.range)
    }
}

fn classify(a: &ClassifyArgs) -> anyhow::Result<Output> {
    let fam = load_versal(&a.model)?;
    if fam.q != 2 {
        anyhow::bail!(Error::UnsupportedDimension(format!("classification needs q = 2, got {}", fam.q)));
    }
    let data = expansion_of(&fam)?;
    let points: Vec<ClassifiedPoint> = if fam.m == 2 {
        find_special_points_m2(&data, fam.chart.range, a.grid)
    } else {
        let m = fam.m;
        let rows = |th: f64, x: f64| {
            let v = data.bs(&direction(th), x);
            [v[0], v[m]]
        };
        solve_on_torus(&rows, &torus_of(&fam), a.grid, 1e-12)
            .into_iter()
            .map(|(th, x)| classify_point_m(m, &data, &direction(th), x, default_tol(&data, x)))
            .filter(|p| p.kind == PointKind::End)
            .collect()
    };
    let mut out = Output::new(serde_json::to_value(&points)?, &["theta", "x", "kind", "stratum", "residuals"]);
    for p in &points {
        let th = p.s[1].atan2(p.s[0]).rem_euclid(std::f64::consts::TAU);
        let res = p.residuals.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(" ");
        out.row(vec![f(th), f(p.x), format!("{:?}", p.kind), format!("{:?}", p.stratum), res]);
    }
    Ok(out)
}

fn arcs(a: &ArcsArgs) -> anyhow::Result<Output> {
    let fam = load_versal(&a.model)?;
    if fam.q != 2 {
        anyhow::bail!(Error::UnsupportedDimension(format!("arcs need q = 2, got {}", fam.q)));
    }
    let data = expansion_of(&fam)?;
    let opts = ArcOptions {
        grid: a.grid,
        domain: torus_of(&fam),
        ..ArcOptions::default()
    };
    let arcs = if fam.m == 2 {
        bifurcation_arcs_m2(&data, &opts)?
    } else {
        bifurcation_arcs_m(fam.m, &data, &opts)?
    };
    let mut out = Output::new(
        serde_json::to_value(&arcs)?,
        &["arc", "kind", "group", "branch", "rho", "theta", "x", "eps1", "eps2"],
    );
    for (k, arc) in arcs.iter().enumerate() {
        for (b, branch) in arc.branches.iter().enumerate() {
            for s in branch {
                out.row(vec![
                    k.to_string(),
                    format!("{:?}", arc.kind),
                    arc.group.to_string(),
                    b.to_string(),
                    f(s.rho),
                    f(s.theta),
                    f(s.x),
                    f(s.eps[0]),
                    f(s.eps[1]),
                ]);
            }
        }
        out.warnings.extend(arc.annotations.iter().map(|n| format!("arc {k}: {n}")));
    }
    Ok(out)
}

fn load_reduction(doc: &crate::model::SystemDoc, samples: usize) -> anyhow::Result<LSReduction> {
    let sys = doc.build()?;
    Ok(build_reduction(&sys, samples, 1e-8)?)
}

fn reduce(a: &ReduceArgs) -> anyhow::Result<Output> {
    let doc = match ModelDoc::load(&a.model)? {
        ModelDoc::System(d) => d,
        _ => anyhow::bail!(Error::InvalidParams("reduce needs a `system` model document".into())),
    };
    let red = load_reduction(&doc, a.samples)?;
    let [lo, hi] = red.system.chart.range;
    let n = a.points.max(1);
    let xs: Vec<f64> = if red.system.chart.periodic() {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
    } else {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n.max(2) - 1) as f64).collect()
    };
    let mut header = vec!["x".to_string(), "m1".into(), "m2".into(), "r1".into(), "r2".into()];
    for i in 1..=2 {
        header.extend((1..=red.system.q).map(|j| format!("g{i}{j}")));
    }
    let mut out = Output {
        header,
        warnings: red.warnings.clone(),
        ..Output::default()
    };
    let mut data = Vec::new();
    for x in xs {
        match extract_branch_data(&red, x, a.y_box, a.eps_probe) {
            Ok(e) => {
                let mut row = vec![f(e.x), e.m[0].to_string(), e.m[1].to_string(), f(e.r[0]), f(e.r[1])];
                row.extend(e.g.iter().flatten().map(|v| f(*v)));
                out.row(row);
                data.push(e);
            }
            Err(e) => out.warnings.push(format!("x = {x}: {e}")),
        }
    }
    out.json = json!({
        "samples": red.samples.len(),
        "validity": red.validity,
        "branch_data": data,
    });
    Ok(out)
}

fn default_direction(q: usize, given: &Option<Vec<f64>>) -> anyhow::Result<Vec<f64>> {
    match given {
        Some(d) if d.len() == q => Ok(d.clone()),
        Some(d) => anyhow::bail!(Error::InvalidParams(format!("direction has {} entries, model has q = {q}", d.len()))),
        None => {
            let mut d = vec![0.0; q];
            d[0] = 1.0;
            Ok(d)
        }
    }
}

fn branch_points(a: &BranchPointsArgs) -> anyhow::Result<Output> {
    let variant = match a.variant {
        VariantArg::General => Variant::General,
        VariantArg::Uniform => Variant::Uniform,
    };
    let opts = BranchOptions { grid: a.grid, tol: a.tol };
    let mut warnings = Vec::new();
    let points = match ModelDoc::load(&a.model)? {
        ModelDoc::Reduced(d) => {
            let model = d.build()?;
            let dir = default_direction(d.q, &a.direction)?;
            let src = ModelSource::with_direction(&model, dir)?;
            find_branch_points(&src as &dyn BranchDataSource, variant, &opts)?
        }
        ModelDoc::System(d) => {
            let red = load_reduction(&d, 64)?;
            warnings.extend(red.warnings.iter().cloned());
            let src = ExtractedSource {
                reduction: &red,
                direction: default_direction(d.q, &a.direction)?,
                y_box: 0.05,
                eps_probe: 1e-3,
            };
            find_branch_points(&src as &dyn BranchDataSource, variant, &opts)?
        }
        ModelDoc::Versal(_) => {
            anyhow::bail!(Error::InvalidParams("branch-points needs a `reduced` or `system` model".into()))
        }
    };
    let mut out = Output::new(
        serde_json::to_value(&points)?,
        &["x0", "eps_sign", "status", "condition", "jacobian", "residual"],
    );
    out.warnings = warnings;
    for p in &points {
        out.row(vec![
            f(p.x0),
            opt(p.eps_sign),
            format!("{:?}", p.status),
            format!("{:?}", p.condition),
            f(p.jacobian),
            f(p.residual),
        ]);
    }
    Ok(out)
}

/// Any model document as a planar field in `(x, y)`.
fn load_field(path: &Path) -> anyhow::Result<(Arc<dyn Field2>, Vec<String>)> {
    Ok(match ModelDoc::load(path)? {
        ModelDoc::Reduced(d) => (Arc::new(d.build()?), Vec::new()),
        ModelDoc::Versal(d) => (Arc::new(d.build()?), Vec::new()),
        ModelDoc::System(d) => {
            let red = load_reduction(&d, 64)?;
            let w = red.warnings.clone();
            (Arc::new(red), w)
        }
    })
}

fn count(a: &CountArgs) -> anyhow::Result<Output> {
    let (field, warnings) = load_field(&a.model)?;
    let window = Window::for_chart(&field.chart(), a.y_half);
    let copts = CountOptions {
        nx: a.nx,
        ny: a.ny,
        ..CountOptions::default()
    };
    let mut out = match (&a.eps, a.rho) {
        (Some(eps), None) => {
            let set = count_solutions(&*field, eps, &window, &copts)?;
            let mut out = Output::new(serde_json::to_value(&set)?, &["x", "y", "residual", "basin_ok"]);
            for z in &set.zeros {
                out.row(vec![f(z.x), f(z.y), f(z.residual), z.basin_ok.to_string()]);
            }
            out.warnings.extend(set.warnings.iter().cloned());
            out
        }
        (None, Some(rho)) => {
            let opts = CountMapOptions {
                n_angles: a.angles,
                count: copts,
                ..CountMapOptions::default()
            };
            let map = region_count_map(&*field, rho, &window, &opts)?;
            let mut out = Output::new(serde_json::to_value(&map)?, &["theta", "count"]);
            for (t, c) in map.angles.iter().zip(&map.counts) {
                out.row(vec![f(*t), c.to_string()]);
            }
            out.warnings.extend(map.inconsistencies.iter().cloned());
            out
        }
        _ => anyhow::bail!(Error::InvalidParams("give exactly one of --eps and --rho".into())),
    };
    out.warnings.extend(warnings);
    Ok(out)
}

fn trace(a: &TraceArgs) -> anyhow::Result<Output> {
    let (field, warnings) = load_field(&a.model)?;
    let dir = default_direction(field.q(), &a.direction)?;
    let opts = TraceOptions {
        t_min: a.t_min,
        t_max: a.t_max,
        y_sign: a.y_sign,
        ..TraceOptions::default()
    };
    let tr = trace_branch(&*field, a.x0, &dir, &opts)?;
    let mut out = Output::new(serde_json::to_value(&tr)?, &["t", "eps_norm", "x", "y"]);
    for s in &tr.samples {
        out.row(vec![f(s.t), f(s.eps_norm), f(s.x), f(s.y)]);
    }
    out.warnings = warnings;
    Ok(out)
}

fn hamiltonian(a: &HamiltonianArgs) -> anyhow::Result<Output> {
    if a.lambda <= 0.0 {
        anyhow::bail!(Error::InvalidParams("lambda must be positive".into()));
    }
    let pot = RadialPotential::mexican_hat(a.lambda);
    let levels = degenerate_energies(&pot, a.n_min..=a.n_max);
    let mut out = Output::new(
        Value::Null,
        &["n", "r0", "energy", "in_hill_region", "kernel_dimension", "quartic", "omitted"],
    );
    let mut items = Vec::new();
    for lv in &levels {
        let mut kernel = None;
        let mut quartic = None;
        if let Some(r0) = lv.r0 {
            let model = RadialPotentialModel::new(pot.clone(), r0)?;
            let k = kernel_dimension(&model, a.modes);
            if a.quartic && lv.in_hill_region && k.dimension == 2 {
                match jacobi_reduced_quartic(&model, lv.n as u32, &[1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2], 512) {
                    Ok(q) => quartic = Some(q),
                    Err(e) => out.warnings.push(format!("n = {}: {e}", lv.n)),
                }
            }
            kernel = Some(k);
        }
        out.row(vec![
            lv.n.to_string(),
            opt(lv.r0),
            opt(lv.energy),
            lv.in_hill_region.to_string(),
            kernel.as_ref().map(|k| k.dimension.to_string()).unwrap_or_default(),
            opt(quartic.as_ref().map(|q| q.j0)),
            lv.omitted.clone().unwrap_or_default(),
        ]);
        items.push(json!({"level": lv, "kernel": kernel, "quartic": quartic}));
    }
    out.json = json!({"lambda": a.lambda, "hill_band": pot.hill_band(), "levels": items});
    Ok(out)
}

fn chem_model(a: &ChemnetArgs) -> anyhow::Result<ChemNetworkModel> {
    let v = Arc::new(Expr::compile(&a.rate, &["x1"])?);
    let rate: RateFn = Arc::new(move |x| v.eval(&[x]));
    let mut phi: Vec<PerturbationFn> = Vec::new();
    for src in &a.phi {
        let parts: Vec<&str> = src.split(';').collect();
        if parts.len() != 3 {
            anyhow::bail!(Error::InvalidParams(format!("perturbation `{src}` needs three `;`-separated entries")));
        }
        let exprs = parts
            .iter()
            .map(|p| Expr::compile(p, &["z1", "z2", "z3"]))
            .collect::<crate::error::Result<Vec<_>>>()?;
        phi.push(Arc::new(move |z: &[f64]| [exprs[0].eval(z), exprs[1].eval(z), exprs[2].eval(z)]));
    }
    Ok(ChemNetworkModel::new(rate, phi)?)
}

fn chemnet(a: &ChemnetArgs) -> anyhow::Result<Output> {
    let model = chem_model(a)?;
    let dir = match &a.direction {
        Some(d) => d.clone(),
        None => vec![1.0; model.phi.len()],
    };
    let reg = chem_regularity(&model);
    let mut out = Output::new(Value::Null, &["lambda", "source", "status"]);
    if reg.regular {
        out.warnings.push(format!(
            "v'(x1*) = {:.3e}: the steady-state line is regular, no degenerate bifurcation",
            reg.v_prime
        ));
    }
    let (_, bf) = chem_branch_function(&model, &dir, a.grid)?;
    for z in &bf.zeros {
        out.row(vec![f(*z), "branch_function".into(), "simple_zero".into()]);
    }
    let pipeline = if a.no_pipeline {
        None
    } else {
        let p = chem_pipeline_branch_points(&model, &dir, a.grid)?;
        for bp in &p.branch_points {
            out.row(vec![f(bp.x0), "pipeline".into(), format!("{:?}", bp.status)]);
        }
        out.warnings.extend(p.reduction_warnings.iter().cloned());
        Some(p)
    };
    out.json = json!({
        "x1_star": model.x1_star,
        "regularity": reg,
        "branch_function": {"zeros": bf.zeros, "degenerate": bf.degenerate},
        "pipeline": pipeline,
    });
    Ok(out)
}
