//! Reference solutions that do not share any machinery with the pseudospectral
//! expansion: the exact pure-convection shift, a Crank-Nicolson finite-difference
//! solver for the convection-diffusion semigroup, and the free-space maximum of a
//! diffusing gaussian.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFunction};
use crate::C64;

/// `(T_t f)(x) = f(x + t)` if `x + t < a`, else `0`.
///
/// Grid-aligned shifts move samples exactly; other shifts interpolate linearly.
pub fn convection_exact(f: &SampledFunction, t: f64) -> Result<SampledFunction> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!("time must be >= 0, got {t}")));
    }
    let grid = f.grid();
    let a = grid.a();
    let x = grid.x();
    let dx = grid.dx();
    let v = f.values();
    let n = v.len();
    let zero = C64::new(0.0, 0.0);

    let shift = t / dx;
    let aligned = (shift - shift.round()).abs() < 1e-9;
    let values = x
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            if xi + t >= a {
                return zero;
            }
            if aligned {
                let j = i + shift.round() as usize;
                return if j < n { v[j] } else { zero };
            }
            let pos = (xi + t - x[0]) / dx;
            let j = pos.floor() as usize;
            if j + 1 >= n {
                return v[n - 1];
            }
            let frac = pos - j as f64;
            v[j] * (1.0 - frac) + v[j + 1] * frac
        })
        .collect();
    SampledFunction::new(Arc::clone(grid), values)
}

/// `(1 + 4t/b)^{-1/2}`: peak height at time `t` of `e^{-x^2}` evolved on the
/// whole line by `A f = f''/b + f'`.
pub fn gaussian_free_max(t: f64, b: f64) -> f64 {
    (1.0 + 4.0 * t / b).powf(-0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpatialOrder {
    /// Three-point central differences.
    Second,
    /// Five-point central differences, three-point next to the boundary.
    Fourth,
}

/// Crank-Nicolson solver for `u_t = u_xx / b + u_x` on `[0, a]` with
/// `u(0) = u(a) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSolver {
    pub b: f64,
    /// Fine-grid cells per input-grid cell.
    pub refine: usize,
    pub dt: f64,
    pub order: SpatialOrder,
}

impl ReferenceSolver {
    pub fn new(b: f64, refine: usize, dt: f64) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::invalid(format!("b must be positive, got {b}")));
        }
        if refine == 0 {
            return Err(Error::invalid("refinement factor must be >= 1"));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid(format!("time step must be positive, got {dt}")));
        }
        Ok(ReferenceSolver {
            b,
            refine,
            dt,
            order: SpatialOrder::Fourth,
        })
    }

    pub fn with_order(mut self, order: SpatialOrder) -> Self {
        self.order = order;
        self
    }

    /// Evolves samples on `grid`, interpolating them onto the fine grid with
    /// cubic Lagrange polynomials.
    pub fn solve(&self, f: &SampledFunction, times: &[f64]) -> Result<Vec<SampledFunction>> {
        let grid = f.grid();
        let xs = grid.x().to_vec();
        let re: Vec<f64> = f.values().iter().map(|v| v.re).collect();
        let im: Vec<f64> = f.values().iter().map(|v| v.im).collect();
        let has_im = im.iter().any(|&v| v != 0.0);
        let re_out = self.solve_fn(grid, |x| cubic_interp(&xs, &re, x), times)?;
        if !has_im {
            return Ok(re_out);
        }
        let im_out = self.solve_fn(grid, |x| cubic_interp(&xs, &im, x), times)?;
        re_out
            .into_iter()
            .zip(im_out)
            .map(|(r, i)| {
                let values = r
                    .values()
                    .iter()
                    .zip(i.values())
                    .map(|(r, i)| C64::new(r.re, i.re))
                    .collect();
                SampledFunction::new(Arc::clone(grid), values)
            })
            .collect()
    }

    /// Evolves a real initial function given in closed form, returning the
    /// solution restricted to `grid` at each requested time.
    pub fn solve_fn(
        &self,
        grid: &Arc<Grid>,
        init: impl Fn(f64) -> f64,
        times: &[f64],
    ) -> Result<Vec<SampledFunction>> {
        if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Error::invalid(format!("time must be >= 0, got {t}")));
        }
        let a = grid.a();
        let cells = ((a / grid.dx()).round() as usize) * self.refine;
        let h = a / cells as f64;
        let fine_x: Vec<f64> = (0..=cells).map(|j| j as f64 * h).collect();
        let interior = cells - 1;
        if interior < 3 {
            return Err(Error::invalid("fine grid too small for the stencil"));
        }
        let mut u: Vec<f64> = fine_x[1..cells].iter().map(|&x| init(x)).collect();

        let op = self.stencil_rows(interior, h);
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&i, &j| times[i].total_cmp(&times[j]));

        let mut out = vec![None; times.len()];
        let mut now = 0.0;
        let mut cached: Option<(f64, BandedLu)> = None;
        for idx in order {
            let target = times[idx];
            let span = target - now;
            if span > 0.0 {
                let steps = ((span / self.dt) - 1e-9).ceil().max(1.0) as usize;
                let dt = span / steps as f64;
                let reuse = matches!(&cached, Some((d, _)) if (d - dt).abs() <= 1e-14 * dt);
                if !reuse {
                    cached = Some((dt, op.implicit_matrix(dt)?));
                }
                let lu = &cached.as_ref().expect("factorization cached above").1;
                for _ in 0..steps {
                    let rhs = op.explicit_apply(&u, dt);
                    u = lu.solve(rhs);
                }
                if u.iter().any(|v| !v.is_finite()) {
                    return Err(Error::SolverFailure("non-finite values in Crank-Nicolson step".into()));
                }
                now = target;
            }
            let mut full = Vec::with_capacity(cells + 1);
            full.push(0.0);
            full.extend_from_slice(&u);
            full.push(0.0);
            let values = grid
                .x()
                .iter()
                .map(|&x| C64::new(cubic_interp(&fine_x, &full, x), 0.0))
                .collect();
            out[idx] = Some(SampledFunction::new(Arc::clone(grid), values)?);
        }
        Ok(out.into_iter().map(|o| o.expect("every time visited")).collect())
    }

    fn stencil_rows(&self, n: usize, h: f64) -> Stencil {
        let diff = 1.0 / (self.b * h * h);
        let adv = 1.0 / h;
        // Offsets -2..=2.
        let second = [0.0, diff - adv / 2.0, -2.0 * diff, diff + adv / 2.0, 0.0];
        let fourth = [
            -diff / 12.0 + adv / 12.0,
            16.0 * diff / 12.0 - 8.0 * adv / 12.0,
            -30.0 * diff / 12.0,
            16.0 * diff / 12.0 + 8.0 * adv / 12.0,
            -diff / 12.0 - adv / 12.0,
        ];
        let rows = (0..n)
            .map(|j| match self.order {
                SpatialOrder::Second => second,
                SpatialOrder::Fourth if j == 0 || j + 1 == n => second,
                SpatialOrder::Fourth => fourth,
            })
            .collect();
        Stencil {
            rows,
            bandwidth: match self.order {
                SpatialOrder::Second => 1,
                SpatialOrder::Fourth => 2,
            },
        }
    }
}

/// Finite-difference generator restricted to interior nodes (zero Dirichlet data).
struct Stencil {
    rows: Vec<[f64; 5]>,
    bandwidth: usize,
}

impl Stencil {
    /// `(I + dt/2 A) u`.
    fn explicit_apply(&self, u: &[f64], dt: f64) -> Vec<f64> {
        let n = u.len();
        (0..n)
            .map(|j| {
                let mut acc = u[j];
                for (k, &c) in self.rows[j].iter().enumerate() {
                    if c == 0.0 {
                        continue;
                    }
                    let col = j as isize + k as isize - 2;
                    if col >= 0 && (col as usize) < n {
                        acc += 0.5 * dt * c * u[col as usize];
                    }
                }
                acc
            })
            .collect()
    }

    /// Factorization of `I - dt/2 A`.
    fn implicit_matrix(&self, dt: f64) -> Result<BandedLu> {
        let n = self.rows.len();
        let p = self.bandwidth;
        let mut band = BandedLu::zeros(n, p);
        for j in 0..n {
            for (k, &c) in self.rows[j].iter().enumerate() {
                let col = j as isize + k as isize - 2;
                if col < 0 || col as usize >= n || c == 0.0 {
                    continue;
                }
                let mut v = -0.5 * dt * c;
                if col as usize == j {
                    v += 1.0;
                }
                band.set(j, col as usize, v);
            }
        }
        band.factor()?;
        Ok(band)
    }
}

/// LU factorization without pivoting of a matrix with equal lower and upper
/// bandwidth `p`, stored row-wise as `2p + 1` diagonals.
struct BandedLu {
    n: usize,
    p: usize,
    data: Vec<f64>,
}

impl BandedLu {
    fn zeros(n: usize, p: usize) -> Self {
        BandedLu {
            n,
            p,
            data: vec![0.0; n * (2 * p + 1)],
        }
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * (2 * self.p + 1) + (j + self.p - i)
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.p < i || j > i + self.p {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    fn factor(&mut self) -> Result<()> {
        let (n, p) = (self.n, self.p);
        for k in 0..n {
            let pivot = self.get(k, k);
            if pivot.abs() < 1e-300 || !pivot.is_finite() {
                return Err(Error::SolverFailure(format!("zero pivot at row {k}")));
            }
            for i in (k + 1)..(k + p + 1).min(n) {
                let l = self.get(i, k) / pivot;
                self.set(i, k, l);
                for j in (k + 1)..(k + p + 1).min(n) {
                    let v = self.get(i, j) - l * self.get(k, j);
                    self.set(i, j, v);
                }
            }
        }
        Ok(())
    }

    fn solve(&self, mut rhs: Vec<f64>) -> Vec<f64> {
        let (n, p) = (self.n, self.p);
        for i in 0..n {
            let lo = i.saturating_sub(p);
            let acc: f64 = (lo..i).map(|j| self.get(i, j) * rhs[j]).sum();
            rhs[i] -= acc;
        }
        for i in (0..n).rev() {
            let hi = (i + p + 1).min(n);
            let acc: f64 = ((i + 1)..hi).map(|j| self.get(i, j) * rhs[j]).sum();
            rhs[i] = (rhs[i] - acc) / self.get(i, i);
        }
        rhs
    }
}

/// Cubic Lagrange interpolation on a uniform abscissa; exact at the nodes.
fn cubic_interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if n == 1 {
        return ys[0];
    }
    let h = xs[1] - xs[0];
    let pos = (x - xs[0]) / h;
    let nearest = pos.round();
    if (pos - nearest).abs() < 1e-9 && nearest >= 0.0 && (nearest as usize) < n {
        return ys[nearest as usize];
    }
    if n < 4 {
        let j = (pos.floor().max(0.0) as usize).min(n - 2);
        let frac = pos - j as f64;
        return ys[j] * (1.0 - frac) + ys[j + 1] * frac;
    }
    let j = pos.floor() as isize;
    let start = (j - 1).clamp(0, n as isize - 4) as usize;
    let mut acc = 0.0;
    for k in start..start + 4 {
        let mut basis = 1.0;
        for m in start..start + 4 {
            if m != k {
                basis *= (x - xs[m]) / (xs[k] - xs[m]);
            }
        }
        acc += basis * ys[k];
    }
    acc
}
