//! The reproduction runs: pure convection (tables 1 and the Gibbs run),
//! classical expansions (table 2), convection-diffusion pseudomodes (tables
//! 3-5, figures 1-2) and user-specified propagation jobs.
//!
//! Every run returns plain [`Table`]s; writing them is left to the caller.
//! Independent cells are evaluated in parallel and collected in order, so the
//! output does not depend on scheduling.

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use log::{info, warn};
use rayon::prelude::*;

use crate::bounds::GrowthBound;
use crate::bundle::{fmt_f64, load_family_on, save_family};
use crate::error::{Error, Result};
use crate::families::{
    certify_family, convdiff_eigens, convdiff_family, convdiff_mu, convection_family, eigen_lambda, CutoffSpec,
    FamilyKind, Operator, PseudomodeFamily,
};
use crate::grid::{Grid, NormKind, SampledFunction};
use crate::oracle::{convection_exact, gaussian_free_max, ReferenceSolver};
use crate::spectral::SpectralExpansion;
use crate::transform::{PropagationReport, Transform};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Table1,
    Table2,
    Table3,
    Table4,
    Table5,
    Figure1,
    Figure2,
    Gibbs,
    Custom,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::Table1,
        Experiment::Table2,
        Experiment::Table3,
        Experiment::Table4,
        Experiment::Table5,
        Experiment::Figure1,
        Experiment::Figure2,
        Experiment::Gibbs,
        Experiment::Custom,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Table1 => "table1",
            Experiment::Table2 => "table2",
            Experiment::Table3 => "table3",
            Experiment::Table4 => "table4",
            Experiment::Table5 => "table5",
            Experiment::Figure1 => "figure1",
            Experiment::Figure2 => "figure2",
            Experiment::Gibbs => "gibbs",
            Experiment::Custom => "custom",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown experiment {s:?}")))
    }
}

/// Initial data for a propagation run.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialFunction {
    /// `2 e^{-10 (x-5)^2} - e^{-(x-5)^2 / 10}`.
    GaussPair,
    /// `e^{-(x - a/2)^2}`.
    Gauss,
    ConstantOne,
    /// Samples read from a CSV file with a `value` column, or `re` and
    /// optionally `im` columns, one row per grid point.
    CustomCsv(PathBuf),
}

impl FromStr for InitialFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gauss_pair" => Ok(InitialFunction::GaussPair),
            "gauss" => Ok(InitialFunction::Gauss),
            "constant_one" | "one" => Ok(InitialFunction::ConstantOne),
            _ => match s.strip_prefix("custom_csv:") {
                Some(path) if !path.is_empty() => Ok(InitialFunction::CustomCsv(PathBuf::from(path))),
                _ => Err(Error::invalid(format!(
                    "unknown initial function {s:?} (expected gauss_pair, gauss, constant_one or custom_csv:PATH)"
                ))),
            },
        }
    }
}

impl InitialFunction {
    /// Closed form on `[0, a]`, if there is one.
    pub fn closed_form(&self, a: f64) -> Option<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
        match self {
            InitialFunction::GaussPair => Some(Box::new(|x: f64| {
                let d = (x - 5.0) * (x - 5.0);
                2.0 * (-10.0 * d).exp() - (-d / 10.0).exp()
            })),
            InitialFunction::Gauss => Some(Box::new(move |x: f64| (-(x - a / 2.0).powi(2)).exp())),
            InitialFunction::ConstantOne => Some(Box::new(|_| 1.0)),
            InitialFunction::CustomCsv(_) => None,
        }
    }

    pub fn sample(&self, grid: &Arc<Grid>) -> Result<SampledFunction> {
        if let Some(f) = self.closed_form(grid.a()) {
            return Ok(SampledFunction::from_real_fn(grid, f));
        }
        let InitialFunction::CustomCsv(path) = self else {
            unreachable!("only custom data lacks a closed form")
        };
        read_samples(path, grid)
    }
}

fn read_samples(path: &Path, grid: &Arc<Grid>) -> Result<SampledFunction> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let find = |name: &str| header.iter().position(|h| h.trim() == name);
    let (re_col, im_col) = match (find("value"), find("re"), find("im")) {
        (Some(v), _, _) => (v, None),
        (None, Some(re), im) => (re, im),
        _ if header.len() == 1 => (0, None),
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!("{}: expected a `value` or `re` column", path.display()),
            })
        }
    };
    let mut values = Vec::with_capacity(grid.len());
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .unwrap_or("")
                .trim()
                .parse()
                .map_err(|e| Error::Parse {
                    line,
                    message: format!("{}: {e}", path.display()),
                })
        };
        let im = match im_col {
            Some(i) => num(i)?,
            None => 0.0,
        };
        values.push(C64::new(num(re_col)?, im));
    }
    if values.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "{} holds {} samples, the grid has {} points",
            path.display(),
            values.len(),
            grid.len()
        )));
    }
    SampledFunction::new(Arc::clone(grid), values)
}

/// Parameter overrides. Unset fields fall back to each experiment's defaults;
/// setting a swept parameter (such as `c` for table 1) restricts the sweep to
/// that value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub n: Option<usize>,
    pub alpha: Option<f64>,
    pub ppu: Option<usize>,
    pub endpoints: Option<bool>,
    pub times: Option<Vec<f64>>,
    pub f: Option<InitialFunction>,
    pub norm: Option<NormKind>,
    pub family_cache: Option<PathBuf>,
}

impl Params {
    pub const KEYS: [&'static str; 11] = [
        "a", "b", "c", "N", "alpha", "ppu", "endpoints", "t", "f", "norm", "family_cache",
    ];

    /// Sets one parameter from its textual form. Unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let bad = |e: &dyn fmt::Display| Error::invalid(format!("bad value {value:?} for {key}: {e}"));
        match key {
            "a" => self.a = Some(value.parse().map_err(|e| bad(&e))?),
            "b" => self.b = Some(value.parse().map_err(|e| bad(&e))?),
            "c" => self.c = Some(value.parse().map_err(|e| bad(&e))?),
            "N" | "n" => self.n = Some(value.parse().map_err(|e| bad(&e))?),
            "alpha" => self.alpha = Some(value.parse().map_err(|e| bad(&e))?),
            "ppu" => self.ppu = Some(value.parse().map_err(|e| bad(&e))?),
            "endpoints" => self.endpoints = Some(value.parse().map_err(|e| bad(&e))?),
            "t" => {
                let times = value
                    .split(',')
                    .map(|t| t.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| bad(&e))?;
                if times.is_empty() {
                    return Err(Error::invalid("empty time list"));
                }
                self.times = Some(times);
            }
            "f" => self.f = Some(value.parse()?),
            "norm" => self.norm = Some(value.parse()?),
            "family_cache" | "family-cache" => self.family_cache = Some(PathBuf::from(value)),
            _ => {
                return Err(Error::invalid(format!(
                    "unknown parameter {key:?} (known: {})",
                    Params::KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    fn grid(&self, a: f64, ppu: usize, endpoints: bool) -> Result<Arc<Grid>> {
        Grid::new(
            self.a.unwrap_or(a),
            self.ppu.unwrap_or(ppu),
            self.endpoints.unwrap_or(endpoints),
        )
    }
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) => f.write_str(&fmt_f64(*v)),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Float(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Table {
            name: name.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Numeric values of a column, by header name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        self.rows.iter().map(|r| r[i].as_f64()).collect()
    }

    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs an experiment and returns its tables.
pub fn run(experiment: Experiment, params: &Params) -> Result<Vec<Table>> {
    info!("running {experiment}");
    match experiment {
        Experiment::Table1 => table1(params).map(|t| vec![t]),
        Experiment::Table2 => table2(params).map(|t| vec![t]),
        Experiment::Table3 => table3(params).map(|t| vec![t]),
        Experiment::Table4 => table4(params).map(|t| vec![t]),
        Experiment::Table5 => table5(params).map(|t| vec![t]),
        Experiment::Figure1 => figure(params, "figure1", InitialFunction::Gauss).map(|t| vec![t]),
        Experiment::Figure2 => figure(params, "figure2", InitialFunction::ConstantOne).map(|t| vec![t]),
        Experiment::Gibbs => gibbs(params).map(|t| vec![t]),
        Experiment::Custom => custom(params),
    }
}

fn sweep<T: Copy>(value: Option<T>, defaults: &[T]) -> Vec<T> {
    match value {
        Some(v) => vec![v],
        None => defaults.to_vec(),
    }
}

/// A certified pure-convection family (linear cutoff).
pub fn certified_convection(grid: &Arc<Grid>, c: f64, n: usize, alpha: f64) -> Result<PseudomodeFamily> {
    let fam = convection_family(grid, c, n)?;
    certify_family(
        &fam,
        CutoffSpec::linear(alpha),
        Operator::Convection,
        GrowthBound::contraction(),
    )
}

/// A certified convection-diffusion family (exponential cutoff).
pub fn certified_convdiff(grid: &Arc<Grid>, b: f64, c: f64, n: usize, alpha: f64) -> Result<PseudomodeFamily> {
    let fam = convdiff_family(grid, b, c, n)?;
    certify_family(
        &fam,
        CutoffSpec::exponential(alpha),
        Operator::ConvDiff { b },
        GrowthBound::contraction(),
    )
}

/// Loads a family from `cache` if it holds a matching one, otherwise builds it
/// and stores it there.
fn cached_family(
    cache: Option<&Path>,
    key: String,
    grid: &Arc<Grid>,
    build: impl FnOnce() -> Result<PseudomodeFamily>,
) -> Result<PseudomodeFamily> {
    let Some(root) = cache else {
        return build();
    };
    let dir = root.join(&key);
    if dir.join("params.csv").exists() {
        info!("loading family {key} from {}", dir.display());
        let fam = load_family_on(&dir, grid)?;
        if !fam.is_certified() {
            return Err(Error::invalid(format!("cached family {} is not certified", dir.display())));
        }
        return Ok(fam);
    }
    let fam = build()?;
    save_family(&dir, &fam)?;
    info!("stored family {key} in {}", dir.display());
    Ok(fam)
}

fn family_key(fam: &str, grid: &Grid, parts: &[(&str, f64)]) -> String {
    let mut key = format!(
        "{fam}_a{}_ppu{}_{}",
        grid.a(),
        grid.points_per_unit(),
        if grid.include_endpoints() { "ends" } else { "mid" }
    );
    for (k, v) in parts {
        key.push_str(&format!("_{k}{v}"));
    }
    key
}

/// Pure convection, one cell of table 1.
#[derive(Debug, Clone)]
pub struct ConvectionRun {
    pub c: f64,
    pub n: usize,
    pub f: SampledFunction,
    pub exact: SampledFunction,
    pub report: PropagationReport,
    /// `|f - f_0|`.
    pub p: f64,
    /// `|T_t f - f_t|`.
    pub q: f64,
    pub error_l2: f64,
}

pub fn convection_run(
    grid: &Arc<Grid>,
    c: f64,
    n: usize,
    alpha: f64,
    f: &SampledFunction,
    t: f64,
    norm: NormKind,
) -> Result<ConvectionRun> {
    let fam = certified_convection(grid, c, n, alpha)?;
    let transform = Transform::build_allowing_singular_gram(&fam)?;
    let mut reports = transform.propagate(f, &[0.0, t], GrowthBound::contraction())?;
    let report = reports.pop().expect("two times requested");
    let f0 = reports.pop().expect("two times requested").f_t;
    let exact = convection_exact(f, t)?;
    Ok(ConvectionRun {
        c,
        n,
        p: f.distance(&f0, norm)?,
        q: exact.distance(&report.f_t, norm)?,
        error_l2: exact.distance(&report.f_t, NormKind::L2)?,
        f: f.clone(),
        exact,
        report,
    })
}

pub const TABLE1_CELLS: [(f64, usize); 7] = [(5.0, 30), (10.0, 30), (5.0, 40), (10.0, 40), (3.0, 50), (5.0, 50), (10.0, 50)];

fn table1(params: &Params) -> Result<Table> {
    let grid = params.grid(20.0, 50, false)?;
    let t = params.times.as_ref().map_or(5.0, |t| t[0]);
    let alpha = params.alpha.unwrap_or(1.0);
    let norm = params.norm.unwrap_or(NormKind::Sup);
    let f = params.f.clone().unwrap_or(InitialFunction::GaussPair).sample(&grid)?;
    let cells: Vec<(f64, usize)> = match (params.c, params.n) {
        (None, None) => TABLE1_CELLS.to_vec(),
        (c, n) => {
            let cs = sweep(c, &[3.0, 5.0, 10.0]);
            let ns = sweep(n, &[30, 40, 50]);
            cs.iter().flat_map(|&c| ns.iter().map(move |&n| (c, n))).collect()
        }
    };
    let runs = cells
        .par_iter()
        .map(|&(c, n)| convection_run(&grid, c, n, alpha, &f, t, norm))
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new("table1", &["c", "N", "t", "p", "q", "error_l2", "bound"]);
    for r in runs {
        table.push(vec![
            r.c.into(),
            r.n.into(),
            t.into(),
            r.p.into(),
            r.q.into(),
            r.error_l2.into(),
            r.report.bound.into(),
        ]);
    }
    Ok(table)
}

fn table2(params: &Params) -> Result<Table> {
    let grid = params.grid(20.0, 10, true)?;
    let f = params.f.clone().unwrap_or(InitialFunction::Gauss).sample(&grid)?;
    let norm = params.norm.unwrap_or(NormKind::L2);
    let bs = sweep(params.b, &[2.5, 5.0]);
    let ns = sweep(params.n, &[10, 20, 30, 40, 50, 60, 70, 80, 90, 100]);
    let n_max = *ns.iter().max().expect("non-empty sweep");
    let mut table = Table::new("table2", &["b", "N", "p", "q", "gram_condition"]);
    for b in bs {
        let eigens = convdiff_eigens(&grid, b, n_max)?;
        let rows = ns
            .par_iter()
            .map(|&n| {
                let exp = SpectralExpansion::new(&eigens, n)?;
                let proj = exp.ortho_project(&f)?;
                let q = exp.biorthogonal_expand(&f)?.distance(&f, norm)?;
                let p = proj.pf.distance(&f, norm)?;
                Ok(vec![b.into(), n.into(), p.into(), q.into(), proj.gram_condition.into()])
            })
            .collect::<Result<Vec<_>>>()?;
        rows.into_iter().for_each(|r| table.push(r));
    }
    Ok(table)
}

fn table3(params: &Params) -> Result<Table> {
    let grid = params.grid(20.0, 10, true)?;
    let b = params.b.unwrap_or(20.0);
    let c = params.c.unwrap_or(5.0);
    let norm = params.norm.unwrap_or(NormKind::L2);
    let f = params.f.clone().unwrap_or(InitialFunction::Gauss).sample(&grid)?;
    let ns = sweep(params.n, &[5, 10, 15, 20, 25, 30, 35]);
    let rows = ns
        .par_iter()
        .map(|&n| {
            let fam = convdiff_family(&grid, b, c, n)?;
            let transform = Transform::build_allowing_singular_gram(&fam)?;
            let proj = transform.project(&f)?;
            let p = proj.pf.distance(&f, norm)?;
            Ok(vec![
                (2 * n + 1).into(),
                n.into(),
                p.into(),
                transform.gram_condition().into(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new("table3", &["dim", "N", "p", "gram_condition"]);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

/// Convection-diffusion propagation checked against the finite-difference reference.
#[derive(Debug, Clone)]
pub struct DiffusionRun {
    pub family: PseudomodeFamily,
    pub f: SampledFunction,
    pub reports: Vec<PropagationReport>,
    pub reference: Vec<SampledFunction>,
}

impl DiffusionRun {
    pub fn errors(&self, kind: NormKind) -> Result<Vec<f64>> {
        self.reports
            .iter()
            .zip(&self.reference)
            .map(|(r, u)| r.f_t.distance(u, kind))
            .collect()
    }
}

/// Reference solver settings used by every diffusion run.
pub const REFERENCE_REFINE: usize = 4;
pub const REFERENCE_DT: f64 = 0.005;

#[allow(clippy::too_many_arguments)]
pub fn diffusion_run(
    grid: &Arc<Grid>,
    b: f64,
    c: f64,
    n: usize,
    alpha: f64,
    init: &InitialFunction,
    times: &[f64],
    cache: Option<&Path>,
) -> Result<DiffusionRun> {
    let key = family_key("convdiff", grid, &[("b", b), ("c", c), ("N", n as f64), ("alpha", alpha)]);
    let family = cached_family(cache, key, grid, || certified_convdiff(grid, b, c, n, alpha))?;
    match family.kind() {
        FamilyKind::ConvDiff { b: fb, c: fc } if fb == b && fc == c && family.truncation() == n as i64 => {}
        _ => return Err(Error::invalid("cached family does not match the requested parameters")),
    }
    let f = init.sample(grid)?;
    let transform = Transform::build_allowing_singular_gram(&family)?;
    let reports = transform.propagate(&f, times, GrowthBound::contraction())?;
    let solver = ReferenceSolver::new(b, REFERENCE_REFINE, REFERENCE_DT)?;
    let reference = match init.closed_form(grid.a()) {
        Some(g) => solver.solve_fn(grid, g, times)?,
        None => solver.solve(&f, times)?,
    };
    Ok(DiffusionRun {
        family,
        f,
        reports,
        reference,
    })
}

fn table4(params: &Params) -> Result<Table> {
    let grid = params.grid(20.0, 10, true)?;
    let b = params.b.unwrap_or(20.0);
    let n = params.n.unwrap_or(15);
    let alpha = params.alpha.unwrap_or(1.0);
    let init = params.f.clone().unwrap_or(InitialFunction::Gauss);
    let times = params
        .times
        .clone()
        .unwrap_or_else(|| (0..=8).map(|k| 2.0 * k as f64).collect());
    let cs = sweep(params.c, &[5.0, 10.0]);
    let runs = cs
        .par_iter()
        .map(|&c| diffusion_run(&grid, b, c, n, alpha, &init, &times, params.family_cache.as_deref()))
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(
        "table4",
        &["c", "t", "m", "m_inf", "m_reference", "min_f_t", "error_l2", "bound"],
    );
    for (c, run) in cs.iter().zip(&runs) {
        let errors = run.errors(NormKind::L2)?;
        for ((r, u), e) in run.reports.iter().zip(&run.reference).zip(errors) {
            table.push(vec![
                (*c).into(),
                r.t.into(),
                r.max_f_t().into(),
                gaussian_free_max(r.t, b).into(),
                u.max_re().into(),
                r.min_f_t().into(),
                e.into(),
                r.bound.into(),
            ]);
        }
    }
    Ok(table)
}

fn table5(params: &Params) -> Result<Table> {
    let a = params.a.unwrap_or(20.0);
    let b = params.b.unwrap_or(20.0);
    let c = params.c.unwrap_or(5.0);
    let count = params.n.unwrap_or(8);
    if !(a > 0.0 && b > 0.0 && c > 0.0 && c < a * b / 2.0) {
        return Err(Error::invalid(format!(
            "need a, b > 0 and 0 < c < a b / 2 (delta in (0, 1/2)); got a = {a}, b = {b}, c = {c}"
        )));
    }
    let mut table = Table::new("table5", &["n", "lambda_n", "s", "mu_re", "mu_im"]);
    for k in 0..count {
        let mu = convdiff_mu(a, b, c, k as i64);
        table.push(vec![
            (k + 1).into(),
            eigen_lambda(a, b, k + 1).into(),
            k.into(),
            mu.re.into(),
            mu.im.into(),
        ]);
    }
    Ok(table)
}

fn figure(params: &Params, name: &str, default_f: InitialFunction) -> Result<Table> {
    let grid = params.grid(20.0, 10, true)?;
    let b = params.b.unwrap_or(20.0);
    let c = params.c.unwrap_or(5.0);
    let n = params.n.unwrap_or(15);
    let alpha = params.alpha.unwrap_or(1.0);
    let init = params.f.clone().unwrap_or(default_f);
    let times = params.times.clone().unwrap_or_else(|| vec![4.0, 8.0, 12.0]);
    let run = diffusion_run(&grid, b, c, n, alpha, &init, &times, params.family_cache.as_deref())?;
    let mut header = vec!["x".to_string(), "f".to_string()];
    header.extend(times.iter().map(|t| format!("f_{t}")));
    let mut table = Table {
        name: name.into(),
        header,
        rows: Vec::new(),
    };
    for (i, &x) in grid.x().iter().enumerate() {
        let mut row: Vec<Cell> = vec![x.into(), run.f.values()[i].re.into()];
        row.extend(run.reports.iter().map(|r| Cell::from(r.f_t.values()[i].re)));
        table.rows.push(row);
    }
    Ok(table)
}

fn gibbs(params: &Params) -> Result<Table> {
    let grid = params.grid(20.0, 50, false)?;
    let c = params.c.unwrap_or(10.0);
    let alpha = params.alpha.unwrap_or(1.0);
    let t = params.times.as_ref().map_or(5.0, |t| t[0]);
    let norm = params.norm.unwrap_or(NormKind::L2);
    let f = params.f.clone().unwrap_or(InitialFunction::ConstantOne).sample(&grid)?;
    let ns = sweep(params.n, &[50, 100]);
    let runs = ns
        .par_iter()
        .map(|&n| convection_run(&grid, c, n, alpha, &f, t, norm))
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new("gibbs", &["c", "N", "t", "max_f_t", "min_f_t", "error", "error_l2", "bound"]);
    for r in runs {
        table.push(vec![
            c.into(),
            r.n.into(),
            t.into(),
            r.report.max_f_t().into(),
            r.report.min_f_t().into(),
            r.q.into(),
            r.error_l2.into(),
            r.report.bound.into(),
        ]);
    }
    Ok(table)
}

/// A user-specified propagation job: the convection-diffusion family if `b` is
/// set, otherwise the pure-convection family.
fn custom(params: &Params) -> Result<Vec<Table>> {
    let diffusive = params.b.is_some();
    let grid = if diffusive {
        params.grid(20.0, 10, true)?
    } else {
        params.grid(20.0, 50, false)?
    };
    let c = params.c.unwrap_or(5.0);
    let n = params.n.unwrap_or(15);
    let alpha = params.alpha.unwrap_or(1.0);
    let norm = params.norm.unwrap_or(NormKind::Sup);
    let times = params.times.clone().unwrap_or_else(|| vec![0.0, 4.0, 8.0, 12.0]);
    let init = params.f.clone().unwrap_or(InitialFunction::Gauss);
    let cache = params.family_cache.as_deref();

    let (reports, oracle, f) = if let Some(b) = params.b {
        let run = diffusion_run(&grid, b, c, n, alpha, &init, &times, cache)?;
        (run.reports, run.reference, run.f)
    } else {
        let key = family_key("convection", &grid, &[("c", c), ("N", n as f64), ("alpha", alpha)]);
        let family = cached_family(cache, key, &grid, || certified_convection(&grid, c, n, alpha))?;
        let f = init.sample(&grid)?;
        let transform = Transform::build_allowing_singular_gram(&family)?;
        let reports = transform.propagate(&f, &times, GrowthBound::contraction())?;
        let oracle = times
            .iter()
            .map(|&t| convection_exact(&f, t))
            .collect::<Result<Vec<_>>>()?;
        (reports, oracle, f)
    };

    let mut report = Table::new(
        "report",
        &[
            "t",
            "residual_l2",
            "residual_sup",
            "phi_l1",
            "mu",
            "epsilon",
            "bound",
            "max_f_t",
            "min_f_t",
            "error_l2",
            "error",
        ],
    );
    for (r, u) in reports.iter().zip(&oracle) {
        let err_l2 = r.f_t.distance(u, NormKind::L2)?;
        if err_l2 > r.bound {
            warn!("t = {}: measured error {err_l2:e} exceeds the bound {:e}", r.t, r.bound);
        }
        if r.bound_uninformative {
            warn!("t = {}: the error bound {:e} carries no information", r.t, r.bound);
        }
        report.push(vec![
            r.t.into(),
            r.residual.into(),
            r.residual_sup.into(),
            r.phi_l1.into(),
            r.mu.into(),
            r.epsilon.into(),
            r.bound.into(),
            r.max_f_t().into(),
            r.min_f_t().into(),
            err_l2.into(),
            r.f_t.distance(u, norm)?.into(),
        ]);
    }

    let mut header = vec!["x".to_string(), "f".to_string()];
    header.extend(times.iter().map(|t| format!("f_{t}")));
    let mut profile = Table {
        name: "profile".into(),
        header,
        rows: Vec::new(),
    };
    for (i, &x) in grid.x().iter().enumerate() {
        let mut row: Vec<Cell> = vec![x.into(), f.values()[i].re.into()];
        row.extend(reports.iter().map(|r| Cell::from(r.f_t.values()[i].re)));
        profile.rows.push(row);
    }
    Ok(vec![report, profile])
}
