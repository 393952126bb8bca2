//! Classical eigenfunction expansions of the convection-diffusion operator:
//! the biorthogonal partial sum `Q_N` and the orthogonal projection `P_N` onto
//! the first `N` eigenfunctions.

use log::debug;

use crate::error::{Error, Result};
use crate::families::EigenFamily;
use crate::grid::{NormKind, SampledFunction};
use crate::transform::Transform;
use crate::C64;

/// Pairings below this are treated as underflowed.
const PAIRING_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy)]
pub struct SpectralExpansion<'a> {
    eigens: &'a EigenFamily,
    n: usize,
}

/// Result of `P_N f`.
#[derive(Debug, Clone)]
pub struct OrthoProjection {
    pub pf: SampledFunction,
    pub residual_l2: f64,
    /// Condition number of the Gram matrix of `e_1..e_N`.
    pub gram_condition: f64,
    pub effective_rank: usize,
}

impl<'a> SpectralExpansion<'a> {
    pub fn new(eigens: &'a EigenFamily, n: usize) -> Result<Self> {
        if n == 0 || n > eigens.len() {
            return Err(Error::invalid(format!(
                "truncation {n} outside 1..={}",
                eigens.len()
            )));
        }
        Ok(SpectralExpansion { eigens, n })
    }

    pub fn truncation(&self) -> usize {
        self.n
    }

    /// `Q_N f = sum_{n <= N} <f, e_n*> / <e_n, e_n*> e_n`, using the closed-form pairing.
    pub fn biorthogonal_expand(&self, f: &SampledFunction) -> Result<SampledFunction> {
        let grid = self.eigens.grid();
        grid.check_same(f.grid())?;
        let mut acc = vec![C64::new(0.0, 0.0); grid.len()];
        for i in 0..self.n {
            let pairing = self.eigens.pairing_closed_form(i);
            if !(pairing.is_finite() && pairing.abs() > PAIRING_FLOOR) {
                return Err(Error::Overflow(format!(
                    "<e_n, e_n*> = {pairing:e} for n = {} is below the representable range",
                    self.eigens.indices()[i]
                )));
            }
            let adj = &self.eigens.adjoints()[i];
            debug!(
                "n = {}: closed-form pairing {pairing:e}, quadrature {:e}",
                self.eigens.indices()[i],
                self.eigens.eigenfunctions()[i].inner(adj)?.re
            );
            let coef = f.inner(adj)? / pairing;
            for (a, e) in acc.iter_mut().zip(self.eigens.eigenfunctions()[i].values()) {
                *a += coef * e;
            }
        }
        if acc.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow("biorthogonal expansion overflowed".into()));
        }
        SampledFunction::new(std::sync::Arc::clone(grid), acc)
    }

    /// Least-squares projection onto `span{e_1..e_N}`. A numerically singular Gram
    /// matrix is reported through `gram_condition`, not raised.
    ///
    /// For large `b` the sampled eigenfunctions span a subspace that a truncated
    /// SVD resolves poorly, while `Q_N f` lies in the same subspace with
    /// accurately computed coefficients. The projection is therefore also formed
    /// as `Q_N f + P_N (f - Q_N f)`, and the candidate in the span with the
    /// smaller residual is returned.
    pub fn ortho_project(&self, f: &SampledFunction) -> Result<OrthoProjection> {
        let family = self.eigens.to_family(self.n)?;
        let transform = Transform::build_allowing_singular_gram(&family)?;
        let mut best = transform.project(f)?.pf;
        let mut best_residual = best.distance(f, NormKind::L2)?;
        if let Ok(seed) = self.biorthogonal_expand(f) {
            let correction = transform.project(&f.sub(&seed)?)?.pf;
            for candidate in [seed.add(&correction)?, seed] {
                let r = candidate.distance(f, NormKind::L2)?;
                if r < best_residual {
                    best = candidate;
                    best_residual = r;
                }
            }
        }
        Ok(OrthoProjection {
            pf: best,
            residual_l2: best_residual,
            gram_condition: transform.gram_condition(),
            effective_rank: transform.effective_rank(),
        })
    }

    /// `(|f - P_N f|, |f - Q_N f|)` in the given norm.
    pub fn residuals(&self, f: &SampledFunction, kind: NormKind) -> Result<(f64, f64)> {
        let p = self.ortho_project(f)?.pf.distance(f, kind)?;
        let q = self.biorthogonal_expand(f)?.distance(f, kind)?;
        Ok((p, q))
    }
}
