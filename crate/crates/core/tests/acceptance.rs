//! Acceptance gate: reproduces the published tables and checks the error
//! bound and the invariant suites. Prints one PASS/FAIL line per criterion,
//! followed by the failing checks, and exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use pseudoprop_core::experiments::{
    certified_convdiff, convection_run, diffusion_run, run, Experiment, InitialFunction, Params, Table,
};
use pseudoprop_core::families::{convdiff_eigens, convdiff_family, convdiff_mu, eigen_lambda, fourier_family};
use pseudoprop_core::oracle::ReferenceSolver;
use pseudoprop_core::transform::Coefficients;
use pseudoprop_core::{GrowthBound, Grid, Method, NormKind, SampledFunction, Transform, C64};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

struct Outcome {
    checks: Vec<(bool, String)>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { checks: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        self.checks.push((ok, what.into()));
    }

    fn passed(&self) -> bool {
        self.checks.iter().all(|(ok, _)| *ok)
    }
}

fn within_factor(got: f64, want: f64, factor: f64) -> bool {
    got <= want * factor && got >= want / factor
}

fn within_decade(got: f64, want: f64) -> bool {
    within_factor(got, want, 10.0)
}

fn table(e: Experiment, params: &Params) -> Table {
    run(e, params).expect("experiment runs").remove(0)
}

fn col(t: &Table, name: &str) -> Vec<f64> {
    t.column(name).unwrap_or_else(|| panic!("column {name}"))
}

fn gauss_on(g: &Arc<Grid>) -> SampledFunction {
    InitialFunction::Gauss.sample(g).unwrap()
}

const TABLE1: [(f64, usize, f64, f64); 7] = [
    (5.0, 30, 0.056, 0.056),
    (10.0, 30, 0.049, 0.049),
    (5.0, 40, 0.0075, 0.0075),
    (10.0, 40, 0.0063, 0.0063),
    (3.0, 50, 0.0040, 0.050),
    (5.0, 50, 0.00063, 0.0067),
    (10.0, 50, 0.00051, 0.00051),
];

fn table1_reproduction() -> Outcome {
    let mut out = Outcome::new();
    let start = Instant::now();
    let t = table(Experiment::Table1, &Params::default());
    let elapsed = start.elapsed();
    let (c, n, p, q) = (col(&t, "c"), col(&t, "N"), col(&t, "p"), col(&t, "q"));
    for (i, &(pc, pn, pp, pq)) in TABLE1.iter().enumerate() {
        out.check(c[i] == pc && n[i] == pn as f64, format!("row {i} is (c, N) = ({pc}, {pn})"));
        out.check(
            within_factor(p[i], pp, 2.0),
            format!("c = {pc}, N = {pn}: p = {:.3e} vs {pp}", p[i]),
        );
        out.check(
            within_factor(q[i], pq, 2.0),
            format!("c = {pc}, N = {pn}: q = {:.3e} vs {pq}", q[i]),
        );
    }
    out.check(elapsed < Duration::from_secs(30), format!("runtime {elapsed:.2?} < 30 s"));
    out
}

const TABLE2_P: [[f64; 10]; 2] = [
    [3.9e-1, 4.6e-2, 1.7e-3, 1.8e-5, 5.3e-8, 4.1e-11, 1.7e-11, 9.0e-12, 1.2e-11, 9.3e-12],
    [7.3e-1, 1.1e-1, 4.8e-3, 1.4e-4, 1.9e-4, 3.4e-5, 4.8e-4, 2.4e-5, 1.4e-5, 1.0e-4],
];
const TABLE2_Q: [[f64; 10]; 2] = [
    [1.8e3, 1.3e3, 5.7e1, 1.4e-1, 2.0e-3, 2.9e-6, 4.4e-10, 1.4e-10, 2.0e-10, 3.4e-10],
    [3.3e9, 1.4e7, 3.3e7, 2.8e5, 8.3e2, 1.7e0, 6.0e-5, 5.9e-5, 9.5e-5, 2.1e-4],
];

/// Values at or below this are treated as the conditioning floor.
const FLOOR: f64 = 1e-10;

fn table2_reproduction() -> Outcome {
    let mut out = Outcome::new();
    let t = table(Experiment::Table2, &Params::default());
    let (b, n, p, q) = (col(&t, "b"), col(&t, "N"), col(&t, "p"), col(&t, "q"));
    let row = |bv: f64, nv: usize| {
        (0..b.len())
            .find(|&i| b[i] == bv && n[i] == nv as f64)
            .expect("row present")
    };
    let p50 = p[row(2.5, 50)];
    let p70 = p[row(2.5, 70)];
    let q10 = q[row(2.5, 10)];
    out.check(p50 < 1e-7, format!("b = 2.5: p(50) = {p50:.2e} < 1e-7"));
    out.check(p70 < 1e-10, format!("b = 2.5: p(70) = {p70:.2e} < 1e-10"));
    out.check(q10 > 1e2, format!("b = 2.5: q(10) = {q10:.2e} > 1e2"));
    for i in 0..b.len() {
        out.check(
            p[i] <= q[i] * (1.0 + 1e-10),
            format!("b = {}, N = {}: p = {:.2e} <= q = {:.2e}", b[i], n[i], p[i], q[i]),
        );
    }
    for (k, bv) in [2.5, 5.0].into_iter().enumerate() {
        // Past the first increase the published p column no longer decreases,
        // which nested subspaces forbid; those entries record the authors'
        // conditioning floor, and only "at least as accurate" is required.
        let mut published_floor = false;
        for j in 0..10 {
            let nv = 10 * (j + 1);
            let i = row(bv, nv);
            let (pp, pq) = (TABLE2_P[k][j], TABLE2_Q[k][j]);
            if j > 0 && pp >= TABLE2_P[k][j - 1] {
                published_floor = true;
            }
            let p_ok = if published_floor {
                p[i] <= pp
            } else {
                within_decade(p[i], pp) || (p[i] <= FLOOR && pp <= FLOOR)
            };
            out.check(p_ok, format!("b = {bv}, N = {nv}: p = {:.2e} vs {pp:.1e}", p[i]));
            let q_ok = within_decade(q[i], pq) || (q[i] <= FLOOR && pq <= FLOOR);
            out.check(q_ok, format!("b = {bv}, N = {nv}: q = {:.2e} vs {pq:.1e}", q[i]));
        }
    }
    out
}

const TABLE3: [f64; 7] = [3.3e-1, 3.4e-2, 1.1e-3, 1.1e-5, 3.4e-8, 2.9e-11, 1.3e-14];

fn table3_reproduction() -> Outcome {
    let mut out = Outcome::new();
    let t = table(Experiment::Table3, &Params::default());
    let (dim, p) = (col(&t, "dim"), col(&t, "p"));
    for i in 0..p.len() {
        out.check(dim[i] == (11 + 10 * i) as f64, format!("row {i} has 2N+1 = {}", 11 + 10 * i));
        out.check(
            within_decade(p[i], TABLE3[i]),
            format!("2N+1 = {}: p = {:.2e} vs {:.1e}", dim[i], p[i], TABLE3[i]),
        );
        if i > 0 {
            out.check(p[i] < p[i - 1], format!("p decreases at 2N+1 = {}", dim[i]));
        }
    }
    out.check(p[4] <= 1e-7, format!("p(51) = {:.2e} <= 1e-7", p[4]));
    out.check(p[6] <= 1e-12, format!("p(71) = {:.2e} <= 1e-12", p[6]));
    out
}

const TABLE4_M: [f64; 9] = [1.0000, 0.8451, 0.7454, 0.6742, 0.6202, 0.5593, 0.1268, 0.0049, 0.0000];

fn table4_reproduction() -> Outcome {
    let mut out = Outcome::new();
    let mut params = Params {
        c: Some(10.0),
        ..Params::default()
    };
    let t15 = table(Experiment::Table4, &params);
    params.n = Some(30);
    let t30 = table(Experiment::Table4, &params);
    let (t, m, minf) = (col(&t15, "t"), col(&t15, "m"), col(&t15, "m_inf"));
    let m30 = col(&t30, "m");
    for i in 0..t.len() {
        let want = TABLE4_M[i];
        if t[i] <= 8.0 {
            out.check(
                (m[i] - want).abs() <= 5e-4,
                format!("t = {}: m = {:.5} vs {want:.4} (+-5e-4)", t[i], m[i]),
            );
            out.check(
                (m[i] - minf[i]).abs() <= 1e-3,
                format!("t = {}: m = {:.5} vs m_inf = {:.5} (+-1e-3)", t[i], m[i], minf[i]),
            );
        } else if t[i] == 10.0 {
            out.check(
                (m[i] - want).abs() <= 2e-2,
                format!("t = 10: m = {:.5} vs {want:.4} (+-2e-2)", m[i]),
            );
        }
        out.check(
            format!("{:.4}", m[i]) == format!("{:.4}", m30[i]),
            format!("t = {}: N = 15 gives {:.4}, N = 30 gives {:.4}", t[i], m[i], m30[i]),
        );
    }
    let last = *m.last().unwrap();
    out.check(last <= 1e-3, format!("t = 16: m = {last:.2e} <= 1e-3"));
    out
}

const TABLE5_LAMBDA: [f64; 8] = [-5.001, -5.005, -5.011, -5.020, -5.031, -5.044, -5.060, -5.079];
const TABLE5_MU: [(f64, f64); 8] = [
    (-0.247, 0.0),
    (-0.252, 0.306),
    (-0.252, 0.306),
    (-0.267, 0.613),
    (-0.291, 0.919),
    (-0.326, 1.225),
    (-0.370, 1.532),
    (-0.425, 1.838),
];

fn table5_reproduction() -> Outcome {
    let mut out = Outcome::new();
    let t = table(Experiment::Table5, &Params::default());
    let lam = col(&t, "lambda_n");
    for (i, &want) in TABLE5_LAMBDA.iter().enumerate() {
        out.check(
            (lam[i] - want).abs() <= 1e-3,
            format!("lambda_{} = {:.4} vs {want}", i + 1, lam[i]),
        );
        let direct = eigen_lambda(20.0, 20.0, i + 1);
        out.check(direct == lam[i], format!("lambda_{} table entry equals the closed form", i + 1));
    }
    let (mre, mim) = (col(&t, "mu_re"), col(&t, "mu_im"));
    for &(re, im) in &TABLE5_MU {
        let hit = (0..mre.len()).any(|s| (mre[s] - re).abs() <= 2e-3 && (mim[s] - im).abs() <= 2e-3);
        out.check(hit, format!("listed mu = {re} +- {im}i is produced by some s"));
    }
    for s in 1..mre.len() {
        out.check(mre[s] < mre[s - 1], format!("Re mu decreases at s = {s}"));
    }
    let span: Vec<f64> = (-15..=15).map(|s| convdiff_mu(20.0, 20.0, 10.0, s).re).collect();
    let hi = span.iter().copied().fold(f64::MIN, f64::max);
    let lo = span.iter().copied().fold(f64::MAX, f64::min);
    out.check(
        (hi + 0.488).abs() <= 2e-3,
        format!("c = 10, |s| <= 15: max Re mu = {hi:.4} vs -0.488"),
    );
    out.check(
        (lo + 0.729).abs() <= 2e-3,
        format!("c = 10, |s| <= 15: min Re mu = {lo:.4} vs -0.729"),
    );
    out
}

fn gibbs_experiment() -> Outcome {
    let mut out = Outcome::new();
    let t = table(Experiment::Gibbs, &Params::default());
    let max = col(&t, "max_f_t");
    out.check((max[0] - 1.21).abs() <= 0.02, format!("N = 50: max f_t = {:.4} vs 1.21", max[0]));
    out.check(
        (max[1] - max[0]).abs() < 0.02,
        format!("N = 100 changes the max by {:.2e}", (max[1] - max[0]).abs()),
    );
    let grid = Grid::new(20.0, 50, false).unwrap();
    let one = InitialFunction::ConstantOne.sample(&grid).unwrap();
    let r = convection_run(&grid, 10.0, 50, 1.0, &one, 5.0, NormKind::Sup).unwrap();
    let mut inside = (f64::MAX, f64::MIN);
    let mut outside: f64 = 0.0;
    for (&x, v) in grid.x().iter().zip(r.report.f_t.values()) {
        if x < 14.0 {
            inside = (inside.0.min(v.re), inside.1.max(v.re));
        } else if x > 16.0 {
            outside = outside.max(v.norm());
        }
    }
    out.check(
        inside.0 >= 0.98 && inside.1 <= 1.02,
        format!("x < 14: f_t in [{:.4}, {:.4}] within [0.98, 1.02]", inside.0, inside.1),
    );
    out.check(outside < 0.02, format!("x > 16: |f_t| <= {outside:.2e} < 0.02"));
    out
}

fn positivity() -> Outcome {
    let mut out = Outcome::new();
    let grid = Grid::new(20.0, 10, true).unwrap();
    let times: Vec<f64> = (0..=16).map(f64::from).collect();
    let r = diffusion_run(&grid, 20.0, 5.0, 15, 1.0, &InitialFunction::Gauss, &times, None).unwrap();
    for rep in &r.reports {
        let min = rep.min_f_t();
        out.check(min >= -5e-4, format!("t = {}: min f_t = {min:.2e} >= -5e-4", rep.t));
    }
    out
}

fn bound_validity() -> Outcome {
    let mut out = Outcome::new();
    let times: Vec<f64> = (1..=10).map(f64::from).collect();

    let grid = Grid::new(20.0, 50, false).unwrap();
    let pair = InitialFunction::GaussPair.sample(&grid).unwrap();
    for &(c, n, _, _) in &TABLE1 {
        for &t in &times {
            let r = convection_run(&grid, c, n, 1.0, &pair, t, NormKind::L2).unwrap();
            out.check(
                r.error_l2 <= r.report.bound,
                format!("convection c = {c}, N = {n}, t = {t}: {:.2e} <= {:.2e}", r.error_l2, r.report.bound),
            );
        }
    }

    let grid = Grid::new(20.0, 10, true).unwrap();
    for c in [5.0, 10.0] {
        for init in [InitialFunction::Gauss, InitialFunction::ConstantOne] {
            let r = diffusion_run(&grid, 20.0, c, 15, 1.0, &init, &times, None).unwrap();
            let errors = r.errors(NormKind::L2).unwrap();
            for (rep, e) in r.reports.iter().zip(errors) {
                out.check(
                    e <= rep.bound,
                    format!("convection-diffusion c = {c}, f = {init:?}, t = {}: {e:.2e} <= {:.2e}", rep.t, rep.bound),
                );
            }
        }
    }
    out
}

fn timed(out: &mut Outcome, name: &str, body: impl FnOnce(&mut Outcome)) {
    let start = Instant::now();
    body(out);
    let elapsed = start.elapsed();
    out.check(elapsed < Duration::from_secs(10), format!("{name} suite ran in {elapsed:.2?} < 10 s"));
}

fn random_real(grid: &Arc<Grid>, rng: &mut StdRng) -> SampledFunction {
    let values = (0..grid.len()).map(|_| C64::new(rng.random_range(-1.0..1.0), 0.0)).collect();
    SampledFunction::new(Arc::clone(grid), values).unwrap()
}

fn invariant_suites() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let g201 = Grid::new(20.0, 10, true).unwrap();
    let g1000 = Grid::new(20.0, 50, false).unwrap();
    let diffusive = Transform::build(&certified_convdiff(&g201, 20.0, 5.0, 15, 1.0).unwrap()).unwrap();

    timed(&mut out, "projection idempotence", |out| {
        for _ in 0..5 {
            let f = random_real(&g201, &mut rng);
            let pf = diffusive.project(&f).unwrap().pf;
            let ppf = diffusive.project(&pf).unwrap().pf;
            let d = ppf.distance(&pf, NormKind::Sup).unwrap();
            out.check(d < 1e-8, format!("|P P f - P f|_sup = {d:.2e} < 1e-8"));
        }
    });

    timed(&mut out, "least-squares optimality", |out| {
        let f = random_real(&g201, &mut rng);
        let phi = diffusive.analyze(&f, Method::DirectLsq).unwrap();
        let best = diffusive.synthesize(&phi).unwrap().distance(&f, NormKind::L2).unwrap();
        let mut worst_gain = f64::MIN;
        for _ in 0..100 {
            let delta: Vec<C64> = (0..phi.values.len())
                .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let scale = 1e-3 / delta.iter().map(|d| d.norm_sqr()).sum::<f64>().sqrt();
            let psi: Vec<C64> = phi.values.iter().zip(&delta).map(|(p, d)| p + d * scale).collect();
            let psi = Coefficients::new(phi.labels.clone(), psi);
            let r = diffusive.synthesize(&psi).unwrap().distance(&f, NormKind::L2).unwrap();
            worst_gain = worst_gain.max(best - r);
        }
        out.check(
            worst_gain <= 1e-12,
            format!("no perturbation improves the residual by more than 1e-12 (max gain {worst_gain:.2e})"),
        );
    });

    timed(&mut out, "semigroup law on the span", |out| {
        let f = diffusive.project(&gauss_on(&g201)).unwrap().pf;
        let gb = GrowthBound::contraction();
        for (t, u) in [(1.0, 2.0), (2.0, 2.0), (3.5, 4.25)] {
            let ft = diffusive.propagate(&f, &[t], gb).unwrap().remove(0).f_t;
            let ftu = diffusive.propagate(&ft, &[u], gb).unwrap().remove(0).f_t;
            let direct = diffusive.propagate(&f, &[t + u], gb).unwrap().remove(0).f_t;
            let d = ftu.distance(&direct, NormKind::Sup).unwrap();
            out.check(d < 1e-8, format!("t = {t}, u = {u}: |R_u R_t f - R_(t+u) f| = {d:.2e} < 1e-8"));
        }
    });

    timed(&mut out, "Fourier Gram identity", |out| {
        let fam = fourier_family(&g1000, 50).unwrap();
        let tr = Transform::build(&fam).unwrap();
        let gram = tr.gram();
        let mut worst: f64 = 0.0;
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - C64::new(want, 0.0)).norm());
            }
        }
        out.check(worst < 1e-10, format!("|B - I|_max = {worst:.2e} < 1e-10"));
    });

    timed(&mut out, "eigenfunction biorthogonality", |out| {
        let eig = convdiff_eigens(&g201, 2.5, 10).unwrap();
        let mut worst: f64 = 0.0;
        for n in 0..10 {
            let diag = eig.eigenfunctions()[n].inner(&eig.adjoints()[n]).unwrap().norm();
            for m in 0..10 {
                if m != n {
                    let off = eig.eigenfunctions()[n].inner(&eig.adjoints()[m]).unwrap().norm();
                    worst = worst.max(off / diag);
                }
            }
        }
        out.check(worst <= 1e-8, format!("max |<e_n, e_m*>| / |<e_n, e_n*>| = {worst:.2e} <= 1e-8"));
    });

    timed(&mut out, "reference solver self-convergence", |out| {
        let gauss = |x: f64| (-(x - 10.0f64).powi(2)).exp();
        let coarse = ReferenceSolver::new(20.0, 4, 0.005).unwrap().solve_fn(&g201, gauss, &[4.0]).unwrap();
        let fine = ReferenceSolver::new(20.0, 8, 0.0025).unwrap().solve_fn(&g201, gauss, &[4.0]).unwrap();
        let d = coarse[0].distance(&fine[0], NormKind::Sup).unwrap();
        out.check(d < 1e-5, format!("refine 4 / dt 0.005 vs refine 8 / dt 0.0025: {d:.2e} < 1e-5"));
    });

    timed(&mut out, "pseudomode unit norms", |out| {
        let fam = convdiff_family(&g201, 20.0, 5.0, 15).unwrap();
        let worst = fam
            .modes()
            .iter()
            .map(|m| (m.norm(NormKind::L2) - 1.0).abs())
            .fold(0.0, f64::max);
        out.check(worst < 5e-3, format!("max | |u_s| - 1 | = {worst:.2e} < 5e-3"));
        let sigma_max = 2.0 * PI * 15.0 / 20.0;
        out.check(sigma_max < PI * 10.0, "highest frequency resolved by 10 points per unit");
    });
    out
}

fn desk_scale() -> Outcome {
    let mut out = Outcome::new();
    for e in Experiment::ALL {
        let start = Instant::now();
        let result = run(e, &Params::default());
        let elapsed = start.elapsed();
        match result {
            Ok(tables) => out.check(
                tables.iter().all(|t| !t.rows.is_empty()),
                format!("{e} produced output in {elapsed:.2?}"),
            ),
            Err(err) => out.check(false, format!("{e} failed: {err}")),
        }
    }
    out
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("pure convection table (c, N, p, q)", table1_reproduction),
        ("biorthogonal vs orthogonal eigenfunction expansions", table2_reproduction),
        ("pseudomode projection residuals", table3_reproduction),
        ("propagated maximum vs free-space gaussian", table4_reproduction),
        ("eigenvalues and approximate eigenvalues", table5_reproduction),
        ("Gibbs overshoot for f = 1", gibbs_experiment),
        ("approximate positivity", positivity),
        ("a-priori error bound never violated", bound_validity),
        ("invariant suites", invariant_suites),
        ("every experiment runs at desk scale", desk_scale),
    ];
    let mut failed = 0;
    for (i, (name, body)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = body();
        let elapsed = start.elapsed();
        let passed = outcome.checks.iter().filter(|(ok, _)| *ok).count();
        let verdict = if outcome.passed() { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {verdict}: {name} ({passed}/{} checks, {elapsed:.2?})",
            i + 1,
            outcome.checks.len()
        );
        if !outcome.passed() {
            failed += 1;
            for (_, what) in outcome.checks.iter().filter(|(ok, _)| !*ok) {
                println!("    failed: {what}");
            }
        }
    }
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
