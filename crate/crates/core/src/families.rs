//! Analytic pseudomode families, exact eigenpairs of the convection-diffusion
//! operator, and certification of the pseudomode defect.
//!
//! A pseudomode family is a finite set of unit vectors `u_s` with complex
//! numbers `lambda_s` such that for each label some `w_s` in the operator
//! domain satisfies
//!
//! ```text
//! |u_s - w_s| + |A w_s - lambda_s w_s| <= eps.
//! ```
//!
//! The families here are built from closed forms and certified by building
//! `w_s = u_s v` with a cutoff `v` that enforces the boundary condition at
//! `x = a`, then evaluating both terms on the grid with analytic derivatives.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::bounds::{clip_eigenvalue, GrowthBound};
use crate::error::{Error, Result};
use crate::grid::{Grid, NormKind, SampledFunction};
use crate::C64;

/// Which closed form generated a family. Carries the parameters needed to
/// re-evaluate modes and their derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyKind {
    /// `u_s = k exp(-c x / a + 2 pi i s x / a)`.
    Convection { c: f64 },
    /// `u_s = a^{-1/2} exp(2 pi i s x / a)`.
    Fourier,
    /// `u_s = k (exp(p x) - exp(q x))` with `p = -c/a + i sigma`, `q = -b - p`.
    ConvDiff { b: f64, c: f64 },
    /// Exact eigenfunctions `e_n` of the convection-diffusion operator.
    Eigen { b: f64 },
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::Convection { .. } => "convection",
            FamilyKind::Fourier => "fourier",
            FamilyKind::ConvDiff { .. } => "convdiff",
            FamilyKind::Eigen { .. } => "eigen",
        }
    }
}

/// Generator against which a family is certified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Operator {
    /// `A f = f'` on `L^2(0, a)` with `f(a) = 0`.
    Convection,
    /// `A f = f'` with periodic boundary conditions.
    PeriodicConvection,
    /// `A f = f''/b + f'` with Dirichlet conditions at both ends.
    ConvDiff { b: f64 },
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operator::Convection => write!(f, "convection"),
            Operator::PeriodicConvection => write!(f, "periodic convection"),
            Operator::ConvDiff { b } => write!(f, "convection-diffusion (b = {b})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutoffShape {
    /// `1` up to `a - alpha`, then a linear ramp to zero at `a`.
    Linear,
    /// `1 - exp((x - a) / alpha)`.
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSpec {
    pub shape: CutoffShape,
    pub alpha: f64,
}

impl CutoffSpec {
    pub fn linear(alpha: f64) -> Self {
        CutoffSpec { shape: CutoffShape::Linear, alpha }
    }

    pub fn exponential(alpha: f64) -> Self {
        CutoffSpec { shape: CutoffShape::Exponential, alpha }
    }

    fn validate(&self, a: f64) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < a) {
            return Err(Error::invalid(format!(
                "cutoff length alpha = {} must lie in (0, a = {a})",
                self.alpha
            )));
        }
        Ok(())
    }

    /// `(v, v', v'')` at `x`.
    pub fn eval(&self, a: f64, x: f64) -> (f64, f64, f64) {
        let alpha = self.alpha;
        match self.shape {
            CutoffShape::Linear => {
                if x < a - alpha {
                    (1.0, 0.0, 0.0)
                } else {
                    ((a - x) / alpha, -1.0 / alpha, 0.0)
                }
            }
            CutoffShape::Exponential => {
                let e = ((x - a) / alpha).exp();
                (1.0 - e, -e / alpha, -e / (alpha * alpha))
            }
        }
    }
}

/// Result of [`certify_family`].
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub operator: Operator,
    pub cutoff: CutoffSpec,
    pub growth: GrowthBound,
    /// `max_s (|u_s - w_s| + |A w_s - lambda_s w_s|)`, inflated by clipping if any
    /// eigenvalue had to be moved.
    pub epsilon: f64,
    /// Per-label defect before clipping.
    pub defects: Vec<f64>,
    /// Analytic upper bound for the defect, where one is available.
    pub closed_form_bound: Option<f64>,
    pub clipped: usize,
}

/// A finite pseudomode family on a grid.
#[derive(Debug, Clone)]
pub struct PseudomodeFamily {
    kind: FamilyKind,
    grid: Arc<Grid>,
    labels: Vec<i64>,
    modes: Vec<SampledFunction>,
    eigenvalues: Vec<C64>,
    certificate: Option<Certificate>,
}

impl PseudomodeFamily {
    pub(crate) fn from_parts(
        kind: FamilyKind,
        grid: Arc<Grid>,
        labels: Vec<i64>,
        modes: Vec<SampledFunction>,
        eigenvalues: Vec<C64>,
    ) -> Result<Self> {
        if labels.len() != modes.len() || labels.len() != eigenvalues.len() {
            return Err(Error::invalid("labels, modes and eigenvalues differ in length"));
        }
        if labels.is_empty() {
            return Err(Error::invalid("a family needs at least one mode"));
        }
        for m in &modes {
            grid.check_same(m.grid())?;
        }
        Ok(PseudomodeFamily {
            kind,
            grid,
            labels,
            modes,
            eigenvalues,
            certificate: None,
        })
    }

    pub(crate) fn set_certificate(&mut self, certificate: Certificate) {
        self.certificate = Some(certificate);
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn modes(&self) -> &[SampledFunction] {
        &self.modes
    }

    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Largest label magnitude.
    pub fn truncation(&self) -> i64 {
        self.labels.iter().map(|s| s.abs()).max().unwrap_or(0)
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        self.certificate.as_ref()
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.certificate.as_ref().map(|c| c.epsilon)
    }

    pub fn is_certified(&self) -> bool {
        self.certificate.is_some()
    }

    /// `sup_s Re(lambda_s)`.
    pub fn mu(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn symmetric_labels(grid: &Grid, n: usize) -> Result<Vec<i64>> {
    if 2 * n >= grid.len() {
        return Err(Error::invalid(format!(
            "truncation N = {n} aliases on a grid of {} points (need N < {})",
            grid.len(),
            grid.len().div_ceil(2)
        )));
    }
    let n = n as i64;
    Ok((-n..=n).collect())
}

/// `int_0^a exp(z x) dx`.
fn exp_integral(z: C64, a: f64) -> C64 {
    let za = z * a;
    if z.im == 0.0 {
        return if z.re == 0.0 {
            C64::new(a, 0.0)
        } else {
            C64::new(za.re.exp_m1() / z.re, 0.0)
        };
    }
    if za.norm() < 1e-4 {
        // a (1 + za/2 + za^2/6 + za^3/24)
        return (C64::new(1.0, 0.0) + za / 2.0 + za * za / 6.0 + za * za * za / 24.0) * a;
    }
    (za.exp() - 1.0) / z
}

fn convection_k(a: f64, c: f64) -> f64 {
    // k^{-2} = (a / 2c)(1 - e^{-2c})
    ((2.0 * c / a) / -(-2.0 * c).exp_m1()).sqrt()
}

/// Exponents `(p, q)` of the convection-diffusion pseudomode with frequency `sigma`.
fn convdiff_exponents(a: f64, b: f64, c: f64, sigma: f64) -> (C64, C64) {
    let p = C64::new(-c / a, sigma);
    let q = C64::new(-b + c / a, -sigma);
    (p, q)
}

/// Normalizer of `exp(p x) - exp(q x)` from the exact antiderivative.
fn convdiff_k(a: f64, b: f64, c: f64, sigma: f64) -> f64 {
    let (p, q) = convdiff_exponents(a, b, c, sigma);
    let norm_sq = exp_integral(C64::new(2.0 * p.re, 0.0), a).re
        + exp_integral(C64::new(2.0 * q.re, 0.0), a).re
        - 2.0 * exp_integral(p + q.conj(), a).re;
    norm_sq.sqrt().recip()
}

/// Asymptotic normalizer `k^{-2} ~ a (1 - e^{-2c}) / 2c`, for comparison only.
pub fn convdiff_k_asymptotic(a: f64, c: f64) -> f64 {
    convection_k(a, c)
}

/// `mu_sigma = -sigma^2/b + i sigma - c/a + c^2/(a^2 b) - 2 i sigma c/(a b)`.
pub fn convdiff_mu(a: f64, b: f64, c: f64, s: i64) -> C64 {
    let sigma = 2.0 * PI * s as f64 / a;
    C64::new(
        -sigma * sigma / b - c / a + c * c / (a * a * b),
        sigma - 2.0 * sigma * c / (a * b),
    )
}

/// `(u, u', u'')` of the mode with label `s`.
fn mode_derivatives(kind: FamilyKind, a: f64, s: i64, x: f64) -> Result<(C64, C64, C64)> {
    let sigma = 2.0 * PI * s as f64 / a;
    match kind {
        FamilyKind::Convection { c } => {
            let k = convection_k(a, c);
            let z = C64::new(-c / a, sigma);
            let u = (z * x).exp() * k;
            Ok((u, z * u, z * z * u))
        }
        FamilyKind::Fourier => {
            let z = C64::new(0.0, sigma);
            let u = (z * x).exp() / a.sqrt();
            Ok((u, z * u, z * z * u))
        }
        FamilyKind::ConvDiff { b, c } => {
            let k = convdiff_k(a, b, c, sigma);
            let (p, q) = convdiff_exponents(a, b, c, sigma);
            let ep = (p * x).exp();
            let eq = (q * x).exp();
            Ok(((ep - eq) * k, (p * ep - q * eq) * k, (p * p * ep - q * q * eq) * k))
        }
        FamilyKind::Eigen { .. } => Err(Error::invalid(
            "eigenfunction families are exact and are not certified with a cutoff",
        )),
    }
}

fn sample_family(grid: &Arc<Grid>, kind: FamilyKind, labels: &[i64]) -> Result<Vec<SampledFunction>> {
    let a = grid.a();
    labels
        .iter()
        .map(|&s| {
            let values = grid
                .x()
                .iter()
                .map(|&x| mode_derivatives(kind, a, s, x).map(|d| d.0))
                .collect::<Result<Vec<_>>>()?;
            SampledFunction::new(Arc::clone(grid), values)
        })
        .collect()
}

/// Pure-convection pseudomodes `u_s = k exp(-c x/a + 2 pi i s x/a)` with
/// `lambda_s = -c/a + 2 pi i s/a`, `s = -N..=N`.
pub fn convection_family(grid: &Arc<Grid>, c: f64, n: usize) -> Result<PseudomodeFamily> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::invalid(format!(
            "decay parameter c must be positive, got {c} (c = 0 is the Fourier family)"
        )));
    }
    let a = grid.a();
    let labels = symmetric_labels(grid, n)?;
    let kind = FamilyKind::Convection { c };
    let modes = sample_family(grid, kind, &labels)?;
    let eigenvalues = labels
        .iter()
        .map(|&s| C64::new(-c / a, 2.0 * PI * s as f64 / a))
        .collect();
    PseudomodeFamily::from_parts(kind, Arc::clone(grid), labels, modes, eigenvalues)
}

/// Orthonormal Fourier modes with `lambda_s = 2 pi i s / a`.
pub fn fourier_family(grid: &Arc<Grid>, n: usize) -> Result<PseudomodeFamily> {
    let a = grid.a();
    let labels = symmetric_labels(grid, n)?;
    let modes = sample_family(grid, FamilyKind::Fourier, &labels)?;
    let eigenvalues = labels
        .iter()
        .map(|&s| C64::new(0.0, 2.0 * PI * s as f64 / a))
        .collect();
    PseudomodeFamily::from_parts(FamilyKind::Fourier, Arc::clone(grid), labels, modes, eigenvalues)
}

/// Convection-diffusion pseudomodes
/// `u = k (exp((-b/2 + b delta + i sigma) x) - exp((-b/2 - b delta - i sigma) x))`
/// with `delta = 1/2 - c/(a b)` and `sigma = 2 pi s / a`.
pub fn convdiff_family(grid: &Arc<Grid>, b: f64, c: f64, n: usize) -> Result<PseudomodeFamily> {
    let a = grid.a();
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::invalid(format!("b must be positive, got {b}")));
    }
    if !(c > 0.0 && c < a * b / 2.0) {
        return Err(Error::invalid(format!(
            "need 0 < c < a b / 2 = {} so that 0 < delta = 1/2 - c/(a b) < 1/2, got c = {c}",
            a * b / 2.0
        )));
    }
    let labels = symmetric_labels(grid, n)?;
    let kind = FamilyKind::ConvDiff { b, c };
    let modes = sample_family(grid, kind, &labels)?;
    let eigenvalues = labels.iter().map(|&s| convdiff_mu(a, b, c, s)).collect();
    PseudomodeFamily::from_parts(kind, Arc::clone(grid), labels, modes, eigenvalues)
}

/// Builds `w_s = u_s v`, evaluates `|u_s - w_s| + |A w_s - lambda_s w_s|` on the
/// grid with analytic derivatives, and clips eigenvalues into `Re <= gamma`.
pub fn certify_family(
    family: &PseudomodeFamily,
    cutoff: CutoffSpec,
    operator: Operator,
    growth: GrowthBound,
) -> Result<PseudomodeFamily> {
    let grid = family.grid();
    let a = grid.a();
    let kind = family.kind;

    match (operator, kind) {
        (Operator::Convection, FamilyKind::Convection { .. }) => {
            if cutoff.shape != CutoffShape::Linear {
                return Err(Error::invalid("convection certification uses the linear cutoff"));
            }
        }
        (Operator::ConvDiff { b }, FamilyKind::ConvDiff { b: fb, .. }) => {
            if b != fb {
                return Err(Error::invalid(format!(
                    "operator b = {b} does not match family b = {fb}"
                )));
            }
            if cutoff.shape != CutoffShape::Exponential {
                return Err(Error::invalid(
                    "convection-diffusion certification uses the exponential cutoff",
                ));
            }
        }
        (Operator::PeriodicConvection, FamilyKind::Fourier) => {}
        _ => {
            return Err(Error::invalid(format!(
                "cannot certify a {} family against the {operator} operator",
                kind.name()
            )))
        }
    }
    if operator != Operator::PeriodicConvection {
        cutoff.validate(a)?;
    }

    let mut defects = Vec::with_capacity(family.len());
    for (&s, &lambda) in family.labels.iter().zip(&family.eigenvalues) {
        let mut u_minus_w = Vec::with_capacity(grid.len());
        let mut generator_defect = Vec::with_capacity(grid.len());
        for &x in grid.x() {
            let (u, du, d2u) = mode_derivatives(kind, a, s, x)?;
            // Periodic modes are already in the domain: w = u.
            let (v, dv, d2v) = match operator {
                Operator::PeriodicConvection => (1.0, 0.0, 0.0),
                _ => cutoff.eval(a, x),
            };
            let w = u * v;
            let dw = du * v + u * dv;
            let aw = match operator {
                Operator::Convection | Operator::PeriodicConvection => dw,
                Operator::ConvDiff { b } => {
                    let d2w = d2u * v + du * (2.0 * dv) + u * d2v;
                    d2w / b + dw
                }
            };
            u_minus_w.push(u - w);
            generator_defect.push(aw - lambda * w);
        }
        let d1 = SampledFunction::new(Arc::clone(grid), u_minus_w)?.norm(NormKind::L2);
        let d2 = SampledFunction::new(Arc::clone(grid), generator_defect)?.norm(NormKind::L2);
        defects.push(d1 + d2);
    }
    let raw_eps = defects.iter().copied().fold(0.0, f64::max);

    let mut eigenvalues = family.eigenvalues.clone();
    let mut eps = raw_eps;
    let mut clipped = 0;
    if raw_eps > 0.0 {
        let mut inflated = raw_eps;
        for lambda in eigenvalues.iter_mut() {
            let r = clip_eigenvalue(*lambda, growth, raw_eps)?;
            if r.was_clipped {
                clipped += 1;
                inflated = inflated.max(r.eps);
            }
            *lambda = r.lambda;
        }
        eps = inflated;
    } else if let Some(bad) = eigenvalues.iter().find(|l| l.re > growth.gamma()) {
        return Err(Error::invalid(format!(
            "exact eigenvalue {bad} exceeds the growth rate {}",
            growth.gamma()
        )));
    }

    let closed_form_bound = closed_form_defect_bound(family, cutoff, operator);

    let mut certified = family.clone();
    certified.eigenvalues = eigenvalues;
    certified.certificate = Some(Certificate {
        operator,
        cutoff,
        growth,
        epsilon: eps,
        defects,
        closed_form_bound,
        clipped,
    });
    Ok(certified)
}

/// Analytic bound on the defect.
///
/// Convection: `sqrt(a k^2 / 2c) e^{-c(1 - alpha/a)} (1 + 1/alpha)`.
///
/// Convection-diffusion: with `J = 2 k^2 (e^{-2c} - e^{-2a/alpha}) / (1/alpha - c/a)`
/// bounding `int |u|^2 e^{2(x-a)/alpha}`, the defect is at most
/// `sqrt(J) (1 + 1/alpha + 2 max(|p|,|q|)/(b alpha) + 1/(b alpha^2))`, maximized over labels.
fn closed_form_defect_bound(family: &PseudomodeFamily, cutoff: CutoffSpec, operator: Operator) -> Option<f64> {
    let a = family.grid.a();
    let alpha = cutoff.alpha;
    match (operator, family.kind) {
        (Operator::Convection, FamilyKind::Convection { c }) => {
            let k = convection_k(a, c);
            let scale = (a * k * k / (2.0 * c)).sqrt() * (-c * (1.0 - alpha / a)).exp();
            Some(scale * (1.0 + 1.0 / alpha))
        }
        (Operator::ConvDiff { b }, FamilyKind::ConvDiff { c, .. }) => {
            let rate = 1.0 / alpha - c / a;
            if rate <= 0.0 {
                return None;
            }
            family
                .labels
                .iter()
                .map(|&s| {
                    let sigma = 2.0 * PI * s as f64 / a;
                    let k = convdiff_k(a, b, c, sigma);
                    let (p, q) = convdiff_exponents(a, b, c, sigma);
                    let j = 2.0 * k * k * ((-2.0 * c).exp() - (-2.0 * a / alpha).exp()) / rate;
                    let dmax = p.norm().max(q.norm());
                    j.sqrt() * (1.0 + 1.0 / alpha + 2.0 * dmax / (b * alpha) + 1.0 / (b * alpha * alpha))
                })
                .reduce(f64::max)
        }
        (Operator::PeriodicConvection, FamilyKind::Fourier) => Some(0.0),
        _ => None,
    }
}

/// Exact eigenpairs of `A f = f''/b + f'` on `[0, a]` with Dirichlet conditions,
/// together with the adjoint eigenfunctions.
#[derive(Debug, Clone)]
pub struct EigenFamily {
    grid: Arc<Grid>,
    b: f64,
    indices: Vec<usize>,
    eigenfunctions: Vec<SampledFunction>,
    adjoints: Vec<SampledFunction>,
    eigenvalues: Vec<f64>,
    normalizers: Vec<f64>,
}

/// `k_n^2 = b (b^2 a^2 + 4 pi^2 n^2) / (2 pi^2 n^2 (1 - e^{-b a}))`.
pub fn eigen_k_squared(a: f64, b: f64, n: usize) -> f64 {
    let nn = (n * n) as f64;
    b * (b * b * a * a + 4.0 * PI * PI * nn) / (2.0 * PI * PI * nn * -(-b * a).exp_m1())
}

/// `lambda_n = -b/4 - pi^2 n^2 / (b a^2)`.
pub fn eigen_lambda(a: f64, b: f64, n: usize) -> f64 {
    -b / 4.0 - PI * PI * (n * n) as f64 / (b * a * a)
}

/// Largest `b a / 2` for which `e^{b a / 2}` stays representable.
const MAX_HALF_BA: f64 = 700.0;

pub fn convdiff_eigens(grid: &Arc<Grid>, b: f64, n: usize) -> Result<EigenFamily> {
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::invalid(format!("b must be positive, got {b}")));
    }
    if n == 0 {
        return Err(Error::invalid("need at least one eigenpair"));
    }
    let a = grid.a();
    if b * a / 2.0 > MAX_HALF_BA {
        return Err(Error::Overflow(format!(
            "b a / 2 = {} exceeds {MAX_HALF_BA}; adjoint eigenfunctions are not representable",
            b * a / 2.0
        )));
    }
    let indices: Vec<usize> = (1..=n).collect();
    let normalizers: Vec<f64> = indices.iter().map(|&m| eigen_k_squared(a, b, m).sqrt()).collect();
    let eigenvalues = indices.iter().map(|&m| eigen_lambda(a, b, m)).collect();
    let eigenfunctions = indices
        .iter()
        .zip(&normalizers)
        .map(|(&m, &k)| {
            SampledFunction::from_real_fn(grid, |x| k * (-b * x / 2.0).exp() * (PI * m as f64 * x / a).sin())
        })
        .collect();
    let adjoints = indices
        .iter()
        .zip(&normalizers)
        .map(|(&m, &k)| {
            SampledFunction::from_real_fn(grid, |x| {
                k * (b * (x - a) / 2.0).exp() * (PI * m as f64 * x / a).sin()
            })
        })
        .collect();
    Ok(EigenFamily {
        grid: Arc::clone(grid),
        b,
        indices,
        eigenfunctions,
        adjoints,
        eigenvalues,
        normalizers,
    })
}

impl EigenFamily {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn eigenfunctions(&self) -> &[SampledFunction] {
        &self.eigenfunctions
    }

    pub fn adjoints(&self) -> &[SampledFunction] {
        &self.adjoints
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn normalizers(&self) -> &[f64] {
        &self.normalizers
    }

    /// `<e_n, e_n*> = k_n^2 a / (2 e^{b a / 2})` for the `i`-th pair.
    pub fn pairing_closed_form(&self, i: usize) -> f64 {
        let a = self.grid.a();
        let k = self.normalizers[i];
        k * k * a / 2.0 * (-self.b * a / 2.0).exp()
    }

    /// The first `n` eigenfunctions as a (non-certified) mode family.
    pub fn to_family(&self, n: usize) -> Result<PseudomodeFamily> {
        if n == 0 || n > self.len() {
            return Err(Error::invalid(format!(
                "truncation {n} outside 1..={} available eigenpairs",
                self.len()
            )));
        }
        PseudomodeFamily::from_parts(
            FamilyKind::Eigen { b: self.b },
            Arc::clone(&self.grid),
            self.indices[..n].iter().map(|&m| m as i64).collect(),
            self.eigenfunctions[..n].to_vec(),
            self.eigenvalues[..n].iter().map(|&l| C64::new(l, 0.0)).collect(),
        )
    }
}

/// Norm of the spectral projection `P_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionNorm {
    pub n: usize,
    /// `1 / |<e_n, e_n*>|` with the pairing evaluated by quadrature.
    pub discrete: f64,
    /// `2 e^{b a/2} / (k_n^2 a)`.
    pub closed_form: f64,
    /// Large-`b` asymptotic `4 pi^2 n^2 e^{b a/2} / (b^3 a^3)`, from
    /// `k_n^2 ~ b^3 a^2 / (2 pi^2 n^2)` substituted into the closed form.
    pub asymptotic: f64,
}

impl ProjectionNorm {
    pub fn ratio_to_asymptotic(&self) -> f64 {
        self.closed_form / self.asymptotic
    }
}

pub fn projection_norms(eigens: &EigenFamily) -> Result<Vec<ProjectionNorm>> {
    let a = eigens.grid.a();
    let b = eigens.b;
    if b * a / 2.0 > MAX_HALF_BA {
        return Err(Error::Overflow("e^{b a / 2} is not representable".into()));
    }
    let growth = (b * a / 2.0).exp();
    eigens
        .indices
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let pairing = eigens.eigenfunctions[i].inner(&eigens.adjoints[i])?;
            let k2 = eigens.normalizers[i].powi(2);
            Ok(ProjectionNorm {
                n,
                discrete: pairing.norm().recip(),
                closed_form: 2.0 * growth / (k2 * a),
                asymptotic: 4.0 * PI * PI * (n * n) as f64 * growth / (b * b * b * a * a * a),
            })
        })
        .collect()
}
