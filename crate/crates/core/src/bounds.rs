//! Growth bounds `|T_t| <= M e^{gamma t}` and the a-priori error estimate.

use log::warn;

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthBound {
    m: f64,
    gamma: f64,
}

impl GrowthBound {
    pub fn new(m: f64, gamma: f64) -> Result<Self> {
        if !(m.is_finite() && m >= 1.0) {
            return Err(Error::invalid(format!("growth constant M must be >= 1, got {m}")));
        }
        if !gamma.is_finite() {
            return Err(Error::invalid("growth rate gamma must be finite"));
        }
        Ok(GrowthBound { m, gamma })
    }

    /// `M = 1`, `gamma = 0`: a contraction semigroup.
    pub fn contraction() -> Self {
        GrowthBound { m: 1.0, gamma: 0.0 }
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

impl Default for GrowthBound {
    fn default() -> Self {
        Self::contraction()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clipped {
    pub lambda: C64,
    pub eps: f64,
    pub was_clipped: bool,
    /// Set when `Re(lambda) > gamma + 2 M eps`, which no valid certificate allows.
    pub cap_violated: bool,
}

/// Moves an approximate eigenvalue with `Re(lambda) > gamma` onto the line
/// `Re = gamma`, inflating the defect to `eps (3M + 1)`.
pub fn clip_eigenvalue(lambda: C64, gb: GrowthBound, eps: f64) -> Result<Clipped> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::invalid(format!("defect must lie in (0, 1/2), got {eps}")));
    }
    if lambda.re <= gb.gamma {
        return Ok(Clipped {
            lambda,
            eps,
            was_clipped: false,
            cap_violated: false,
        });
    }
    let cap = gb.gamma + 2.0 * gb.m * eps;
    let cap_violated = lambda.re > cap;
    if cap_violated {
        warn!(
            "Re(lambda) = {} exceeds gamma + 2 M eps = {}; the defect certificate is inconsistent",
            lambda.re, cap
        );
    }
    Ok(Clipped {
        lambda: C64::new(gb.gamma, lambda.im),
        eps: eps * (3.0 * gb.m + 1.0),
        was_clipped: true,
        cap_violated,
    })
}

/// `residual M e^{gamma t} + eps (1 + M + M t) |phi|_1 e^{gamma t}`.
pub fn error_bound(residual: f64, eps: f64, gb: GrowthBound, phi_l1: f64, t: f64) -> f64 {
    let growth = (gb.gamma * t).exp();
    residual * gb.m * growth + eps * (1.0 + gb.m + gb.m * t) * phi_l1 * growth
}

/// True when the bound exceeds `|phi|_1 e^{mu t}`, the natural size of the
/// propagated state, so the estimate carries no information.
pub fn usefulness_check(mu: f64, phi_l1: f64, t: f64, bound: f64) -> bool {
    bound > phi_l1 * (mu * t).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn growth_bound_requires_m_at_least_one() {
        assert!(GrowthBound::new(0.5, 0.0).is_err());
        assert!(GrowthBound::new(1.0, -0.3).is_ok());
    }

    #[test]
    fn stable_eigenvalue_is_untouched() {
        let r = clip_eigenvalue(C64::new(-0.25, 1.0), GrowthBound::contraction(), 0.1).unwrap();
        assert_eq!(r.lambda, C64::new(-0.25, 1.0));
        assert_eq!(r.eps, 0.1);
        assert!(!r.was_clipped);
    }

    #[test]
    fn unstable_eigenvalue_is_clipped() {
        let r = clip_eigenvalue(C64::new(0.1, 2.0), GrowthBound::contraction(), 0.1).unwrap();
        assert_eq!(r.lambda, C64::new(0.0, 2.0));
        assert!((r.eps - 0.4).abs() < 1e-15);
        assert!(r.was_clipped);
        assert!(!r.cap_violated);
    }

    #[test]
    fn cap_violation_is_flagged() {
        let r = clip_eigenvalue(C64::new(0.3, 0.0), GrowthBound::contraction(), 0.1).unwrap();
        assert!(r.cap_violated);
        assert_eq!(r.lambda.re, 0.0);
    }

    #[test]
    fn defect_outside_range_is_rejected() {
        for eps in [0.0, 0.5, 0.7, -1.0, f64::NAN] {
            assert!(clip_eigenvalue(C64::new(0.0, 0.0), GrowthBound::contraction(), eps).is_err());
        }
    }

    #[test]
    fn error_bound_values() {
        let gb = GrowthBound::contraction();
        assert_eq!(error_bound(0.0, 0.0, gb, 123.0, 7.0), 0.0);
        assert!((error_bound(1e-3, 1e-4, gb, 10.0, 5.0) - 8e-3).abs() < 1e-15);
    }

    #[test]
    fn usefulness() {
        assert!(!usefulness_check(-0.25, 1.0, 1.0, 1e-6));
        assert!(usefulness_check(-0.25, 1.0, 1.0, 10.0));
    }

    proptest! {
        #[test]
        fn clipping_is_idempotent(re in -2.0..2.0f64, im in -5.0..5.0f64, eps in 0.001..0.1f64, gamma in -1.0..1.0f64) {
            let gb = GrowthBound::new(1.5, gamma).unwrap();
            let once = clip_eigenvalue(C64::new(re, im), gb, eps).unwrap();
            prop_assert!(once.lambda.re <= gamma);
            let twice = clip_eigenvalue(once.lambda, gb, eps).unwrap();
            prop_assert_eq!(twice.lambda, once.lambda);
            prop_assert!(!twice.was_clipped);
        }

        #[test]
        fn error_bound_is_monotone(
            r in 0.0..1.0f64, e in 0.0..0.5f64, p in 0.0..100.0f64, t in 0.0..20.0f64,
            dr in 0.0..1.0f64, de in 0.0..0.1f64, dp in 0.0..10.0f64, dt in 0.0..5.0f64,
            gamma in 0.0..0.5f64,
        ) {
            let gb = GrowthBound::new(1.2, gamma).unwrap();
            let base = error_bound(r, e, gb, p, t);
            prop_assert!(error_bound(r + dr, e, gb, p, t) >= base);
            prop_assert!(error_bound(r, e + de, gb, p, t) >= base);
            prop_assert!(error_bound(r, e, gb, p + dp, t) >= base);
            prop_assert!(error_bound(r, e, gb, p, t + dt) >= base);
        }
    }
}
