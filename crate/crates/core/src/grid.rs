//! Uniform grids on `[0, a]` and complex sampled functions.
//!
//! Two quadrature conventions are supported. Grids that include the endpoints
//! use trapezoidal weights; endpoint-free grids place samples at cell midpoints
//! with weight `dx` each. All inner products and norms are quadrature weighted,
//! so analytically normalized functions have unit norm up to quadrature error.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone)]
pub struct Grid {
    a: f64,
    points_per_unit: f64,
    include_endpoints: bool,
    x: Vec<f64>,
    w: Vec<f64>,
}

impl Grid {
    /// Builds a uniform grid with `a * points_per_unit` cells.
    ///
    /// With endpoints the grid has one more point than cells and trapezoidal
    /// weights; without, it has one midpoint per cell.
    pub fn new(a: f64, points_per_unit: usize, include_endpoints: bool) -> Result<Arc<Grid>> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::invalid(format!("interval length must be positive, got {a}")));
        }
        if points_per_unit == 0 {
            return Err(Error::invalid("points per unit must be at least 1"));
        }
        let cells_f = a * points_per_unit as f64;
        let cells = cells_f.round();
        if cells < 1.0 || (cells_f - cells).abs() > 1e-9 * cells.max(1.0) {
            return Err(Error::invalid(format!(
                "a * points_per_unit = {cells_f} is not a whole number of cells"
            )));
        }
        let cells = cells as usize;
        let dx = a / cells as f64;

        let (x, w) = if include_endpoints {
            let x: Vec<f64> = (0..=cells).map(|i| i as f64 * dx).collect();
            let mut w = vec![dx; cells + 1];
            w[0] = dx / 2.0;
            w[cells] = dx / 2.0;
            (x, w)
        } else {
            let x: Vec<f64> = (0..cells).map(|i| (i as f64 + 0.5) * dx).collect();
            (x, vec![dx; cells])
        };

        Ok(Arc::new(Grid {
            a,
            points_per_unit: points_per_unit as f64,
            include_endpoints,
            x,
            w,
        }))
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn include_endpoints(&self) -> bool {
        self.include_endpoints
    }

    pub fn points_per_unit(&self) -> usize {
        self.points_per_unit as usize
    }

    /// Cell width.
    pub fn dx(&self) -> f64 {
        self.a / (self.a * self.points_per_unit).round()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// Structural equality: same interval, density and endpoint convention.
    pub fn same_as(&self, other: &Grid) -> bool {
        self.a == other.a
            && self.points_per_unit == other.points_per_unit
            && self.include_endpoints == other.include_endpoints
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self} vs {other}")))
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[0, {}] with {} points ({})",
            self.a,
            self.len(),
            if self.include_endpoints { "trapezoid" } else { "midpoint" }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// Quadrature-weighted L2 norm.
    L2,
    /// Quadrature-weighted L1 norm.
    L1,
    /// Maximum modulus over the samples.
    Sup,
    /// Raw Euclidean norm of the sample vector (no weights).
    Euclidean,
}

impl std::str::FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" => Ok(NormKind::L2),
            "l1" => Ok(NormKind::L1),
            "sup" | "inf" | "max" => Ok(NormKind::Sup),
            "euclidean" | "raw" => Ok(NormKind::Euclidean),
            other => Err(Error::invalid(format!("unknown norm kind '{other}'"))),
        }
    }
}

/// Complex samples of a function on a [`Grid`].
#[derive(Debug, Clone)]
pub struct SampledFunction {
    grid: Arc<Grid>,
    values: Vec<C64>,
}

impl SampledFunction {
    /// Wraps samples, rejecting wrong lengths and non-finite values.
    pub fn new(grid: Arc<Grid>, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::invalid(format!("non-finite sample at index {i}")));
        }
        Ok(SampledFunction { grid, values })
    }

    pub(crate) fn from_parts_unchecked(grid: Arc<Grid>, values: Vec<C64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        SampledFunction { grid, values }
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64) -> C64) -> Self {
        let values = grid.x().iter().map(|&x| f(x)).collect();
        SampledFunction::from_parts_unchecked(Arc::clone(grid), values)
    }

    pub fn from_real_fn(grid: &Arc<Grid>, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| C64::new(f(x), 0.0))
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self::from_parts_unchecked(Arc::clone(grid), vec![C64::new(0.0, 0.0); grid.len()])
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// `sum_i w_i f_i conj(g_i)`: linear in `self`, conjugate-linear in `other`.
    pub fn inner(&self, other: &SampledFunction) -> Result<C64> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(self.grid.weights())
            .map(|((f, g), &w)| f * g.conj() * w)
            .sum())
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        let w = self.grid.weights();
        match kind {
            NormKind::L2 => self
                .values
                .iter()
                .zip(w)
                .map(|(v, &w)| v.norm_sqr() * w)
                .sum::<f64>()
                .sqrt(),
            NormKind::L1 => self.values.iter().zip(w).map(|(v, &w)| v.norm() * w).sum(),
            NormKind::Sup => self.values.iter().map(|v| v.norm()).fold(0.0, f64::max),
            NormKind::Euclidean => self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt(),
        }
    }

    /// `self + other`.
    pub fn add(&self, other: &SampledFunction) -> Result<SampledFunction> {
        self.grid.check_same(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(f, g)| f + g).collect();
        Ok(SampledFunction::from_parts_unchecked(Arc::clone(&self.grid), values))
    }

    /// `self - other`.
    pub fn sub(&self, other: &SampledFunction) -> Result<SampledFunction> {
        self.grid.check_same(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(f, g)| f - g).collect();
        Ok(SampledFunction::from_parts_unchecked(Arc::clone(&self.grid), values))
    }

    /// Norm of `self - other`.
    pub fn distance(&self, other: &SampledFunction, kind: NormKind) -> Result<f64> {
        Ok(self.sub(other)?.norm(kind))
    }

    pub fn scale(&self, factor: C64) -> SampledFunction {
        let values = self.values.iter().map(|v| v * factor).collect();
        SampledFunction::from_parts_unchecked(Arc::clone(&self.grid), values)
    }

    /// Largest real part over the samples.
    pub fn max_re(&self) -> f64 {
        self.values.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest real part over the samples.
    pub fn min_re(&self) -> f64 {
        self.values.iter().map(|v| v.re).fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn point_counts_match_experiment_grids() {
        assert_eq!(Grid::new(20.0, 10, true).unwrap().len(), 201);
        assert_eq!(Grid::new(20.0, 50, false).unwrap().len(), 1000);
    }

    #[test]
    fn two_point_trapezoid() {
        let g = Grid::new(1.0, 1, true).unwrap();
        assert_eq!(g.x(), &[0.0, 1.0]);
        assert_eq!(g.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(Grid::new(0.0, 10, true), Err(Error::InvalidArgument(_))));
        assert!(matches!(Grid::new(-1.0, 10, true), Err(Error::InvalidArgument(_))));
        assert!(matches!(Grid::new(20.0, 0, true), Err(Error::InvalidArgument(_))));
        assert!(Grid::new(0.25, 2, false).is_err());
    }

    #[test]
    fn grid_invariants() {
        for &(a, ppu, ends) in &[(20.0, 10, true), (20.0, 50, false), (3.5, 4, true), (7.0, 3, false)] {
            let g = Grid::new(a, ppu, ends).unwrap();
            let x = g.x();
            let dx = g.dx();
            for pair in x.windows(2) {
                assert!(pair[1] > pair[0]);
                assert_relative_eq!(pair[1] - pair[0], dx, max_relative = 1e-12);
            }
            assert!(g.weights().iter().all(|&w| w > 0.0));
            let total: f64 = g.weights().iter().sum();
            assert_relative_eq!(total, a, max_relative = 1e-12);
            if ends {
                assert_eq!(x[0], 0.0);
                assert_relative_eq!(*x.last().unwrap(), a, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn constant_norms() {
        let g = Grid::new(20.0, 10, true).unwrap();
        let one = SampledFunction::from_real_fn(&g, |_| 1.0);
        assert_relative_eq!(one.inner(&one).unwrap().re, 20.0, max_relative = 1e-13);
        assert_relative_eq!(one.norm(NormKind::L2), 20f64.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(one.norm(NormKind::L1), 20.0, max_relative = 1e-13);
        let minus_two = SampledFunction::from_real_fn(&g, |_| -2.0);
        assert_eq!(minus_two.norm(NormKind::Sup), 2.0);
        assert_relative_eq!(one.norm(NormKind::Euclidean), 201f64.sqrt(), max_relative = 1e-13);
    }

    #[test]
    fn fourier_orthogonality_on_midpoint_grid() {
        let a = 20.0;
        let g = Grid::new(a, 50, false).unwrap();
        let f = SampledFunction::from_fn(&g, |x| C64::from_polar(1.0 / a.sqrt(), 2.0 * PI * x / a));
        let h = SampledFunction::from_fn(&g, |x| C64::from_polar(1.0 / a.sqrt(), -2.0 * PI * x / a));
        assert!(f.inner(&h).unwrap().norm() < 1e-12);
    }

    #[test]
    fn convection_mode_has_unit_norm() {
        // u_0 for a = 20, c = 10: k^2 = (2c/a) / (1 - e^{-2c}).
        let (a, cc) = (20.0f64, 10.0f64);
        let k = ((2.0 * cc / a) / (-(-2.0 * cc).exp_m1())).sqrt();
        let g = Grid::new(a, 50, false).unwrap();
        let u = SampledFunction::from_real_fn(&g, |x| k * (-cc * x / a).exp());
        assert!((u.inner(&u).unwrap().re - 1.0).abs() < 1e-3);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let g1 = Grid::new(20.0, 10, true).unwrap();
        let g2 = Grid::new(20.0, 10, false).unwrap();
        let f = SampledFunction::zeros(&g1);
        let h = SampledFunction::zeros(&g2);
        assert!(matches!(f.inner(&h), Err(Error::GridMismatch(_))));
        assert!(SampledFunction::new(g1, vec![c(0.0, 0.0); 3]).is_err());
    }

    #[test]
    fn non_finite_samples_are_rejected() {
        let g = Grid::new(1.0, 2, true).unwrap();
        let err = SampledFunction::new(g, vec![c(0.0, 0.0), c(f64::NAN, 0.0), c(1.0, 0.0)]);
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    type Samples = Vec<(f64, f64)>;

    fn sample_pair() -> impl Strategy<Value = (Samples, Samples)> {
        let v = prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 41);
        (v.clone(), v)
    }

    proptest! {
        #[test]
        fn inner_product_properties((fv, gv) in sample_pair()) {
            let grid = Grid::new(4.0, 10, true).unwrap();
            let f = SampledFunction::new(grid.clone(), fv.iter().map(|&(r, i)| c(r, i)).collect()).unwrap();
            let g = SampledFunction::new(grid, gv.iter().map(|&(r, i)| c(r, i)).collect()).unwrap();

            let ff = f.inner(&f).unwrap();
            prop_assert!(ff.re >= 0.0);
            prop_assert!(ff.im.abs() <= 1e-14 * ff.re.max(1.0));

            let fg = f.inner(&g).unwrap();
            let gf = g.inner(&f).unwrap();
            prop_assert_eq!(fg, gf.conj());

            let n = f.norm(NormKind::L2);
            prop_assert!((n * n - ff.re).abs() <= 1e-12 * ff.re.max(1e-300));

            prop_assert!(fg.norm() <= n * g.norm(NormKind::L2) * (1.0 + 1e-12));
        }
    }
}
