//! The pseudospectral transform `G phi = sum_s phi(s) u_s`, its adjoint
//! `(G* f)(s) = <f, u_s>`, the Gram matrix `B = G* G`, least-squares coefficients
//! `phi = G \ f`, and the approximating semigroup `R_t = G e^{lambda t} B^{-1} G*`.
//!
//! Labels carry counting measure, so `B` is the plain matrix of pairings
//! `b(s, t) = <u_t, u_s>` and `|phi|_1 = sum_s |phi(s)|`. All products with grid
//! functions use the grid quadrature weights; the least-squares solve scales rows
//! by `sqrt(w)` so that the discrete minimization is the weighted L2 one.

use std::str::FromStr;
use std::sync::Arc;

use log::{debug, warn};
use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::bounds::{error_bound, usefulness_check, GrowthBound};
use crate::error::{Error, Result};
use crate::families::PseudomodeFamily;
use crate::grid::{Grid, NormKind, SampledFunction};
use crate::C64;

/// Relative singular-value cutoff of the rank-revealing least-squares solve.
pub const SINGULAR_VALUE_CUTOFF: f64 = 1e-12;

/// `B` counts as invertible when `lambda_min(B) > GRAM_FLOOR * lambda_max(B)`.
pub const GRAM_FLOOR: f64 = 1e-14;

/// How `phi = B^{-1} G* f` is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Form `B^{-1}` explicitly and multiply.
    Inverse,
    /// Solve `B phi = G* f` by LU.
    GramSolve,
    /// Minimize `|G phi - f|` directly by a truncated SVD of the weighted matrix.
    #[default]
    DirectLsq,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inverse" => Ok(Method::Inverse),
            "gram_solve" | "gram" => Ok(Method::GramSolve),
            "direct_lsq" | "lsq" => Ok(Method::DirectLsq),
            other => Err(Error::invalid(format!("unknown method '{other}'"))),
        }
    }
}

/// Expansion coefficients `phi(s)`, one per label.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub labels: Vec<i64>,
    pub values: Vec<C64>,
    pub l1_norm: f64,
}

impl Coefficients {
    pub fn new(labels: Vec<i64>, values: Vec<C64>) -> Self {
        let l1_norm = values.iter().map(|v| v.norm()).sum();
        Coefficients { labels, values, l1_norm }
    }

    /// `phi_t(s) = e^{lambda_s t} phi(s)`.
    pub fn evolve(&self, eigenvalues: &[C64], t: f64) -> Coefficients {
        let values = self
            .values
            .iter()
            .zip(eigenvalues)
            .map(|(phi, lambda)| phi * (lambda * t).exp())
            .collect();
        Coefficients::new(self.labels.clone(), values)
    }
}

/// Orthogonal projection of `f` onto the span of the family.
#[derive(Debug, Clone)]
pub struct Projection {
    pub pf: SampledFunction,
    pub coefficients: Coefficients,
    pub residual_l2: f64,
    pub residual_sup: f64,
}

#[derive(Debug, Clone)]
pub struct PropagationReport {
    pub t: f64,
    pub f_t: SampledFunction,
    pub phi_t: Coefficients,
    /// `|f - P f|` in the weighted L2 norm.
    pub residual: f64,
    pub residual_sup: f64,
    /// `|phi|_1` of the initial coefficients.
    pub phi_l1: f64,
    pub epsilon: f64,
    /// `sup_s Re(lambda_s)`.
    pub mu: f64,
    pub growth: GrowthBound,
    /// Right-hand side of the a-priori error estimate.
    pub bound: f64,
    /// Set when the bound exceeds `|phi|_1 e^{mu t}`.
    pub bound_uninformative: bool,
}

impl PropagationReport {
    pub fn max_f_t(&self) -> f64 {
        self.f_t.max_re()
    }

    pub fn min_f_t(&self) -> f64 {
        self.f_t.min_re()
    }

    /// Recomputes the bound from the stored parts.
    pub fn recompute_bound(&self) -> f64 {
        error_bound(self.residual, self.epsilon, self.growth, self.phi_l1, self.t)
    }
}

#[derive(Debug, Clone)]
pub struct Transform {
    family: PseudomodeFamily,
    /// Column `j` holds the samples of mode `j`.
    matrix: DMatrix<C64>,
    sqrt_w: Vec<f64>,
    gram: DMatrix<C64>,
    gram_min: f64,
    gram_max: f64,
    /// Thin SVD of `diag(sqrt w) G`.
    svd_u: DMatrix<C64>,
    svd_s: Vec<f64>,
    svd_v_t: DMatrix<C64>,
    rank: usize,
}

impl Transform {
    /// Assembles `G` and `B` and checks that `B` is invertible.
    pub fn build(family: &PseudomodeFamily) -> Result<Transform> {
        let t = Self::build_allowing_singular_gram(family)?;
        if !t.gram_is_invertible() {
            return Err(Error::IllConditionedGram {
                condition: t.gram_condition(),
            });
        }
        Ok(t)
    }

    /// Like [`Transform::build`] but keeps going when `B` is numerically singular.
    /// Only the direct least-squares route is usable on such a transform.
    pub fn build_allowing_singular_gram(family: &PseudomodeFamily) -> Result<Transform> {
        let grid = family.grid();
        let n = grid.len();
        let m = family.len();
        let matrix = DMatrix::from_fn(n, m, |i, j| family.modes()[j].values()[i]);
        let sqrt_w: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();

        let weighted = DMatrix::from_fn(n, m, |i, j| matrix[(i, j)] * sqrt_w[i]);
        let gram = weighted.adjoint() * &weighted;
        // Exactly Hermitian, so the eigensolver sees a self-adjoint input.
        let gram = (&gram + gram.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(gram.clone());
        let gram_min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let gram_max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);

        let svd = SVD::new(weighted, true, true);
        let svd_u = svd.u.ok_or_else(|| Error::SolverFailure("SVD did not return U".into()))?;
        let svd_v_t = svd.v_t.ok_or_else(|| Error::SolverFailure("SVD did not return V".into()))?;
        let svd_s: Vec<f64> = svd.singular_values.iter().copied().collect();
        let s_max = svd_s.iter().copied().fold(0.0, f64::max);
        let rank = svd_s.iter().filter(|&&s| s > SINGULAR_VALUE_CUTOFF * s_max).count();
        if rank < m {
            warn!("least-squares transform is rank deficient: effective rank {rank} of {m} modes");
        }
        debug!(
            "transform: {n} x {m}, Gram eigenvalues in [{gram_min:.3e}, {gram_max:.3e}], rank {rank}"
        );

        Ok(Transform {
            family: family.clone(),
            matrix,
            sqrt_w,
            gram,
            gram_min,
            gram_max,
            svd_u,
            svd_s,
            svd_v_t,
            rank,
        })
    }

    pub fn family(&self) -> &PseudomodeFamily {
        &self.family
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.family.grid()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// `B[s][t] = <u_t, u_s>`.
    pub fn gram(&self) -> &DMatrix<C64> {
        &self.gram
    }

    /// `lambda_max(B) / lambda_min(B)`; infinite when `B` is not positive definite.
    pub fn gram_condition(&self) -> f64 {
        if self.gram_min > 0.0 {
            self.gram_max / self.gram_min
        } else {
            f64::INFINITY
        }
    }

    pub fn gram_is_invertible(&self) -> bool {
        self.gram_min > GRAM_FLOOR * self.gram_max
    }

    /// Number of singular values kept by the least-squares solve.
    pub fn effective_rank(&self) -> usize {
        self.rank
    }

    fn check_grid(&self, f: &SampledFunction) -> Result<()> {
        self.grid().check_same(f.grid())
    }

    /// `G* f`, i.e. `<f, u_s>` for every label.
    pub fn adjoint_apply(&self, f: &SampledFunction) -> Result<DVector<C64>> {
        self.check_grid(f)?;
        let wf = DVector::from_iterator(
            f.values().len(),
            f.values().iter().zip(self.grid().weights()).map(|(v, &w)| v * w),
        );
        Ok(self.matrix.adjoint() * wf)
    }

    /// `G phi`.
    pub fn synthesize(&self, phi: &Coefficients) -> Result<SampledFunction> {
        if phi.values.len() != self.family.len() {
            return Err(Error::invalid(format!(
                "{} coefficients for {} modes",
                phi.values.len(),
                self.family.len()
            )));
        }
        let v = DVector::from_column_slice(&phi.values);
        let out = &self.matrix * v;
        Ok(SampledFunction::from_parts_unchecked(
            Arc::clone(self.grid()),
            out.iter().copied().collect(),
        ))
    }

    fn require_gram(&self) -> Result<()> {
        if self.gram_is_invertible() {
            Ok(())
        } else {
            Err(Error::IllConditionedGram {
                condition: self.gram_condition(),
            })
        }
    }

    /// Coefficients `phi = B^{-1} G* f` by the selected method.
    pub fn analyze(&self, f: &SampledFunction, method: Method) -> Result<Coefficients> {
        self.check_grid(f)?;
        let labels = self.family.labels().to_vec();
        let values: Vec<C64> = match method {
            Method::Inverse => {
                self.require_gram()?;
                let inv = self.gram.clone().try_inverse().ok_or(Error::IllConditionedGram {
                    condition: self.gram_condition(),
                })?;
                (inv * self.adjoint_apply(f)?).iter().copied().collect()
            }
            Method::GramSolve => {
                self.require_gram()?;
                let rhs = self.adjoint_apply(f)?;
                let sol = self.gram.clone().lu().solve(&rhs).ok_or(Error::IllConditionedGram {
                    condition: self.gram_condition(),
                })?;
                sol.iter().copied().collect()
            }
            Method::DirectLsq => {
                let fw = DVector::from_iterator(
                    f.values().len(),
                    f.values().iter().zip(&self.sqrt_w).map(|(v, &s)| v * s),
                );
                let s_max = self.svd_s.iter().copied().fold(0.0, f64::max);
                let mut uh_f = self.svd_u.adjoint() * fw;
                for (c, &s) in uh_f.iter_mut().zip(&self.svd_s) {
                    *c = if s > SINGULAR_VALUE_CUTOFF * s_max { *c / s } else { C64::new(0.0, 0.0) };
                }
                (self.svd_v_t.adjoint() * uh_f).iter().copied().collect()
            }
        };
        Ok(Coefficients::new(labels, values))
    }

    /// Orthogonal projection `P f = G (G \ f)` and its residual.
    pub fn project(&self, f: &SampledFunction) -> Result<Projection> {
        let coefficients = self.analyze(f, Method::DirectLsq)?;
        let pf = self.synthesize(&coefficients)?;
        let diff = f.sub(&pf)?;
        Ok(Projection {
            pf,
            coefficients,
            residual_l2: diff.norm(NormKind::L2),
            residual_sup: diff.norm(NormKind::Sup),
        })
    }

    /// `f_t = G e^{lambda t} (G \ f)` for each requested time, with the error bound.
    pub fn propagate(
        &self,
        f: &SampledFunction,
        times: &[f64],
        growth: GrowthBound,
    ) -> Result<Vec<PropagationReport>> {
        let epsilon = self.family.epsilon().ok_or(Error::UncertifiedFamily)?;
        if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Error::invalid(format!("propagation times must be >= 0, got {t}")));
        }
        let proj = self.project(f)?;
        let phi = proj.coefficients;
        let mu = self.family.mu();
        times
            .iter()
            .map(|&t| {
                let phi_t = phi.evolve(self.family.eigenvalues(), t);
                let f_t = self.synthesize(&phi_t)?;
                let bound = error_bound(proj.residual_l2, epsilon, growth, phi.l1_norm, t);
                Ok(PropagationReport {
                    t,
                    f_t,
                    phi_t,
                    residual: proj.residual_l2,
                    residual_sup: proj.residual_sup,
                    phi_l1: phi.l1_norm,
                    epsilon,
                    mu,
                    growth,
                    bound,
                    bound_uninformative: usefulness_check(mu, phi.l1_norm, t, bound),
                })
            })
            .collect()
    }

    /// Dense kernel of `R_t`:
    /// `K_t(x, y) = sum_{r,s} u(x, s) e^{lambda_s t} (B^{-1})_{s r} conj(u(y, r))`.
    pub fn kernel(&self, t: f64) -> Result<Kernel> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::invalid(format!("kernel time must be >= 0, got {t}")));
        }
        self.require_gram()?;
        let inv = self.gram.clone().try_inverse().ok_or(Error::IllConditionedGram {
            condition: self.gram_condition(),
        })?;
        let m = self.family.len();
        let decay = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                (self.family.eigenvalues()[i] * t).exp()
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let matrix = &self.matrix * decay * inv * self.matrix.adjoint();
        Ok(Kernel {
            grid: Arc::clone(self.grid()),
            matrix,
        })
    }
}

/// Integral kernel of the approximating semigroup at a fixed time.
#[derive(Debug, Clone)]
pub struct Kernel {
    grid: Arc<Grid>,
    matrix: DMatrix<C64>,
}

impl Kernel {
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// `(R_t f)(x) = sum_y K_t(x, y) f(y) w_y`.
    pub fn apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        self.grid.check_same(f.grid())?;
        let wf = DVector::from_iterator(
            f.values().len(),
            f.values().iter().zip(self.grid.weights()).map(|(v, &w)| v * w),
        );
        let out = &self.matrix * wf;
        Ok(SampledFunction::from_parts_unchecked(
            Arc::clone(&self.grid),
            out.iter().copied().collect(),
        ))
    }
}
