//! CSV persistence for certified families and propagation reports.
//!
//! A family bundle is a directory holding three files:
//!
//! - `params.csv`: `key,value` rows describing the family, its grid and certificate;
//! - `eigenvalues.csv`: `label,re,im,defect`;
//! - `modes.csv`: `x` followed by `re_<s>,im_<s>` for every label `s`.
//!
//! Floats are written with 17 significant digits, which round-trips every `f64`.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use crate::bounds::GrowthBound;
use crate::error::{Error, Result};
use crate::families::{Certificate, CutoffShape, CutoffSpec, FamilyKind, Operator, PseudomodeFamily};
use crate::grid::{Grid, SampledFunction};
use crate::transform::PropagationReport;
use crate::C64;

const PARAMS: &str = "params.csv";
const EIGENVALUES: &str = "eigenvalues.csv";
const MODES: &str = "modes.csv";

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn save_family(dir: &Path, family: &PseudomodeFamily) -> Result<()> {
    fs::create_dir_all(dir)?;
    let grid = family.grid();

    let mut params: Vec<(&str, String)> = vec![
        ("format", "pseudoprop-family-1".into()),
        ("kind", family.kind().name().into()),
        ("a", fmt_f64(grid.a())),
        ("points_per_unit", grid.points_per_unit().to_string()),
        ("include_endpoints", grid.include_endpoints().to_string()),
        ("modes", family.len().to_string()),
    ];
    match family.kind() {
        FamilyKind::Convection { c } => params.push(("c", fmt_f64(c))),
        FamilyKind::Fourier => {}
        FamilyKind::ConvDiff { b, c } => {
            params.push(("b", fmt_f64(b)));
            params.push(("c", fmt_f64(c)));
        }
        FamilyKind::Eigen { b } => params.push(("b", fmt_f64(b))),
    }
    if let Some(cert) = family.certificate() {
        let (op, op_b) = match cert.operator {
            Operator::Convection => ("convection", None),
            Operator::PeriodicConvection => ("periodic_convection", None),
            Operator::ConvDiff { b } => ("convdiff", Some(b)),
        };
        params.push(("operator", op.into()));
        if let Some(b) = op_b {
            params.push(("operator_b", fmt_f64(b)));
        }
        let shape = match cert.cutoff.shape {
            CutoffShape::Linear => "linear",
            CutoffShape::Exponential => "exponential",
        };
        params.push(("cutoff", shape.into()));
        params.push(("alpha", fmt_f64(cert.cutoff.alpha)));
        params.push(("growth_m", fmt_f64(cert.growth.m())));
        params.push(("growth_gamma", fmt_f64(cert.growth.gamma())));
        params.push(("epsilon", fmt_f64(cert.epsilon)));
        if let Some(bound) = cert.closed_form_bound {
            params.push(("closed_form_bound", fmt_f64(bound)));
        }
        params.push(("clipped", cert.clipped.to_string()));
    }
    let mut w = csv::Writer::from_path(dir.join(PARAMS))?;
    w.write_record(["key", "value"])?;
    for (k, v) in &params {
        w.write_record([*k, v.as_str()])?;
    }
    w.flush()?;

    let defects = family.certificate().map(|c| c.defects.as_slice());
    let mut w = csv::Writer::from_path(dir.join(EIGENVALUES))?;
    w.write_record(["label", "re", "im", "defect"])?;
    for (i, (s, l)) in family.labels().iter().zip(family.eigenvalues()).enumerate() {
        let defect = defects.map(|d| fmt_f64(d[i])).unwrap_or_default();
        w.write_record([s.to_string(), fmt_f64(l.re), fmt_f64(l.im), defect])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join(MODES))?;
    let mut header = vec!["x".to_string()];
    for s in family.labels() {
        header.push(format!("re_{s}"));
        header.push(format!("im_{s}"));
    }
    w.write_record(&header)?;
    for (i, &x) in grid.x().iter().enumerate() {
        let mut row = Vec::with_capacity(header.len());
        row.push(fmt_f64(x));
        for m in family.modes() {
            row.push(fmt_f64(m.values()[i].re));
            row.push(fmt_f64(m.values()[i].im));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Loads a bundle, rebuilding the grid it was saved on.
pub fn load_family(dir: &Path) -> Result<PseudomodeFamily> {
    let params = read_params(dir)?;
    let grid = Grid::new(
        params.float("a")?,
        params.parse("points_per_unit")?,
        params.parse("include_endpoints")?,
    )?;
    load_family_on(dir, &grid)
}

/// Loads a bundle onto an existing grid, failing with a grid mismatch if the
/// bundle was saved on a different one.
pub fn load_family_on(dir: &Path, grid: &Arc<Grid>) -> Result<PseudomodeFamily> {
    let params = read_params(dir)?;
    let a: f64 = params.float("a")?;
    let ppu: usize = params.parse("points_per_unit")?;
    let endpoints: bool = params.parse("include_endpoints")?;
    if a != grid.a() || ppu != grid.points_per_unit() || endpoints != grid.include_endpoints() {
        return Err(Error::GridMismatch(format!(
            "bundle grid (a = {a}, {ppu} points per unit, endpoints {endpoints}) differs from {grid}"
        )));
    }
    let kind = match params.get("kind")? {
        "convection" => FamilyKind::Convection { c: params.float("c")? },
        "fourier" => FamilyKind::Fourier,
        "convdiff" => FamilyKind::ConvDiff {
            b: params.float("b")?,
            c: params.float("c")?,
        },
        "eigen" => FamilyKind::Eigen { b: params.float("b")? },
        other => return Err(params.bad("kind", format!("unknown family kind {other:?}"))),
    };
    let count: usize = params.parse("modes")?;

    let mut labels = Vec::with_capacity(count);
    let mut eigenvalues = Vec::with_capacity(count);
    let mut defects = Vec::with_capacity(count);
    let mut r = csv::Reader::from_path(dir.join(EIGENVALUES))?;
    for rec in r.records() {
        let rec = rec?;
        let line = line_of(&rec);
        if rec.len() != 4 {
            return Err(parse_err(line, format!("expected 4 fields, found {}", rec.len())));
        }
        labels.push(field::<i64>(&rec, 0, line)?);
        eigenvalues.push(C64::new(field(&rec, 1, line)?, field(&rec, 2, line)?));
        if !rec[3].is_empty() {
            defects.push(field::<f64>(&rec, 3, line)?);
        }
    }
    if labels.len() != count {
        return Err(parse_err(0, format!("{EIGENVALUES}: expected {count} rows, found {}", labels.len())));
    }

    let mut r = csv::Reader::from_path(dir.join(MODES))?;
    let width = 1 + 2 * count;
    let header = r.headers()?.clone();
    if header.len() != width {
        return Err(parse_err(1, format!("{MODES}: expected {width} columns, found {}", header.len())));
    }
    let mut columns = vec![Vec::with_capacity(grid.len()); count];
    let mut row = 0;
    for rec in r.records() {
        let rec = rec?;
        let line = line_of(&rec);
        if rec.len() != width {
            return Err(parse_err(line, format!("expected {width} fields, found {}", rec.len())));
        }
        if row >= grid.len() {
            return Err(Error::GridMismatch(format!(
                "{MODES} has more rows than the {} grid points",
                grid.len()
            )));
        }
        let x: f64 = field(&rec, 0, line)?;
        if (x - grid.x()[row]).abs() > 1e-12 * grid.a() {
            return Err(Error::GridMismatch(format!(
                "abscissa {x} at line {line} does not match grid point {}",
                grid.x()[row]
            )));
        }
        for (j, col) in columns.iter_mut().enumerate() {
            col.push(C64::new(field(&rec, 1 + 2 * j, line)?, field(&rec, 2 + 2 * j, line)?));
        }
        row += 1;
    }
    if row != grid.len() {
        return Err(Error::GridMismatch(format!(
            "{MODES} has {row} rows, grid has {} points",
            grid.len()
        )));
    }
    let modes = columns
        .into_iter()
        .map(|v| SampledFunction::new(Arc::clone(grid), v))
        .collect::<Result<Vec<_>>>()?;

    let mut family = PseudomodeFamily::from_parts(kind, Arc::clone(grid), labels, modes, eigenvalues)?;
    if params.map.contains_key("epsilon") {
        let operator = match params.get("operator")? {
            "convection" => Operator::Convection,
            "periodic_convection" => Operator::PeriodicConvection,
            "convdiff" => Operator::ConvDiff {
                b: params.float("operator_b")?,
            },
            other => return Err(params.bad("operator", format!("unknown operator {other:?}"))),
        };
        let shape = match params.get("cutoff")? {
            "linear" => CutoffShape::Linear,
            "exponential" => CutoffShape::Exponential,
            other => return Err(params.bad("cutoff", format!("unknown cutoff {other:?}"))),
        };
        if defects.len() != count {
            return Err(parse_err(0, format!("{EIGENVALUES}: certified bundle lacks per-label defects")));
        }
        let closed_form_bound = if params.map.contains_key("closed_form_bound") {
            Some(params.float("closed_form_bound")?)
        } else {
            None
        };
        family.set_certificate(Certificate {
            operator,
            cutoff: CutoffSpec {
                shape,
                alpha: params.float("alpha")?,
            },
            growth: GrowthBound::new(params.float("growth_m")?, params.float("growth_gamma")?)?,
            epsilon: params.float("epsilon")?,
            defects,
            closed_form_bound,
            clipped: params.parse("clipped")?,
        });
    }
    Ok(family)
}

/// Writes one row per report: `t,residual_l2,residual_sup,phi_l1,mu,epsilon,bound,max_f_t,min_f_t`.
pub fn write_reports(path: &Path, reports: &[PropagationReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "t",
        "residual_l2",
        "residual_sup",
        "phi_l1",
        "mu",
        "epsilon",
        "bound",
        "max_f_t",
        "min_f_t",
    ])?;
    for r in reports {
        w.write_record([
            fmt_f64(r.t),
            fmt_f64(r.residual),
            fmt_f64(r.residual_sup),
            fmt_f64(r.phi_l1),
            fmt_f64(r.mu),
            fmt_f64(r.epsilon),
            fmt_f64(r.bound),
            fmt_f64(r.max_f_t()),
            fmt_f64(r.min_f_t()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

struct Params {
    map: HashMap<String, (String, u64)>,
}

impl Params {
    fn get(&self, key: &str) -> Result<&str> {
        self.map
            .get(key)
            .map(|(v, _)| v.as_str())
            .ok_or_else(|| parse_err(0, format!("{PARAMS}: missing key {key:?}")))
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let (raw, line) = self
            .map
            .get(key)
            .ok_or_else(|| parse_err(0, format!("{PARAMS}: missing key {key:?}")))?;
        raw.parse()
            .map_err(|e| parse_err(*line, format!("{PARAMS}: bad value {raw:?} for {key}: {e}")))
    }

    fn float(&self, key: &str) -> Result<f64> {
        self.parse(key)
    }

    fn bad(&self, key: &str, message: String) -> Error {
        let line = self.map.get(key).map(|(_, l)| *l).unwrap_or(0);
        parse_err(line, format!("{PARAMS}: {message}"))
    }
}

fn read_params(dir: &Path) -> Result<Params> {
    let mut r = csv::Reader::from_path(dir.join(PARAMS))?;
    let mut map = HashMap::new();
    for rec in r.records() {
        let rec = rec?;
        let line = line_of(&rec);
        if rec.len() != 2 {
            return Err(parse_err(line, format!("{PARAMS}: expected key,value")));
        }
        map.insert(rec[0].to_string(), (rec[1].to_string(), line));
    }
    Ok(Params { map })
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map(|p| p.line()).unwrap_or(0)
}

fn parse_err(line: u64, message: String) -> Error {
    Error::Parse { line, message }
}

fn field<T: FromStr>(rec: &csv::StringRecord, i: usize, line: u64) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    rec[i]
        .trim()
        .parse()
        .map_err(|e| parse_err(line, format!("field {} ({:?}): {e}", i + 1, &rec[i])))
}
