//! Bracketed root solvers for the implicit generating-function equations.
//!
//! * `G_p(x)`: the root of `z (1-z)^p = x` in `[0, 1/(p+1)]`.
//! * `H_p(x) = 1 / (1 - G_p(x))`, the smallest positive root of `x y^{p+1} = y - 1`.
//! * `Φ_β(p, 0)`: the smallest positive root of `y^{p+1} - (β+1) y + β = 0`,
//!   solved through the deflated polynomial `y^p + ... + y - β`.
//!
//! Every solver bisects on an a-priori bracket where the defining function is
//! monotone, then takes guarded Newton steps that must stay inside the final
//! bisection bracket.

use crate::error::{domain, Error, Result};
use crate::scalar::Real;

/// Solver settings. `tol` is an absolute tolerance on the root value and also
/// the acceptance threshold for the reported residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootConfig<T> {
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for RootConfig<T> {
    fn default() -> Self {
        Self { tol: T::default_tol(), max_iter: 200 }
    }
}

impl<T: Real> RootConfig<T> {
    pub fn with_tol(tol: T) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootResult<T> {
    pub value: T,
    /// `|f(value)|` for the defining equation.
    pub residual: T,
    pub iterations: usize,
    pub bracket_lo: T,
    pub bracket_hi: T,
}

impl<T: Real> RootResult<T> {
    pub(crate) fn exact(value: T) -> Self {
        Self { value, residual: T::zero(), iterations: 0, bracket_lo: value, bracket_hi: value }
    }
}

/// Convergence domain `0 <= x <= x_max` of `H_p` and `G_p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainBound<T> {
    pub p: u64,
    /// `p^p / (p+1)^{p+1}`
    pub x_max: T,
    /// `1/(p+1)`, where `z (1-z)^p` peaks.
    pub z_star: T,
}

impl<T: Real> DomainBound<T> {
    pub fn new(p: u64) -> Result<Self> {
        if p == 0 {
            return Err(domain("slope p must be >= 1"));
        }
        let pf = T::from_u64_lossy(p);
        let q = pf + T::one();
        // (p/(p+1))^p / (p+1) avoids overflowing p^p
        let x_max = (pf / q).powf(pf) / q;
        Ok(Self { p, x_max, z_star: q.recip() })
    }

    /// Validates `x`, clamping values within `tol` above `x_max` onto it.
    pub fn admit(&self, x: T, tol: T) -> Result<T> {
        if x.is_nan() || x < T::zero() {
            return Err(domain(format!("x = {x} is negative")));
        }
        if x > self.x_max {
            if x <= self.x_max + tol {
                return Ok(self.x_max);
            }
            return Err(domain(format!(
                "x = {x} exceeds the convergence bound {} for p = {}",
                self.x_max, self.p
            )));
        }
        Ok(x)
    }
}

/// Bisection for `f` increasing on `[lo, hi]` with `f(lo) <= 0 <= f(hi)`,
/// followed by guarded Newton polishing.
fn solve_increasing<T: Real>(
    f: impl Fn(T) -> T,
    df: impl Fn(T) -> T,
    mut lo: T,
    mut hi: T,
    cfg: &RootConfig<T>,
) -> Result<RootResult<T>> {
    let two = T::lit(2.0);
    let mut iterations = 0;
    while hi - lo > cfg.tol && iterations < cfg.max_iter {
        let mid = lo + (hi - lo) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }

    let mut x = lo + (hi - lo) / two;
    let mut fx = f(x);
    for _ in 0..8 {
        let slope = df(x);
        if fx == T::zero() || slope == T::zero() || !slope.is_finite() {
            break;
        }
        let next = x - fx / slope;
        if !(next >= lo && next <= hi) {
            break;
        }
        let fnext = f(next);
        if fnext.abs() >= fx.abs() {
            break;
        }
        x = next;
        fx = fnext;
    }
    // endpoints can beat the interior when the bracket has collapsed
    for end in [lo, hi] {
        let fe = f(end);
        if fe.abs() < fx.abs() {
            x = end;
            fx = fe;
        }
    }

    let residual = fx.abs();
    if !(residual <= cfg.tol) {
        return Err(Error::Residual {
            residual: residual.to_f64().unwrap_or(f64::NAN),
            tol: cfg.tol.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(RootResult { value: x, residual, iterations, bracket_lo: lo, bracket_hi: hi })
}

/// `G_p(x)`: the root of `z (1-z)^p = x` on `[0, 1/(p+1)]`.
pub fn solve_g<T: Real>(p: u64, x: T, cfg: &RootConfig<T>) -> Result<RootResult<T>> {
    let bound = DomainBound::<T>::new(p)?;
    let x = bound.admit(x, cfg.tol)?;
    if x == T::zero() {
        return Ok(RootResult::exact(T::zero()));
    }
    let pf = T::from_u64_lossy(p);
    let f = |z: T| z * (T::one() - z).powf(pf) - x;
    let df = |z: T| (T::one() - z).powf(pf - T::one()) * (T::one() - (pf + T::one()) * z);
    solve_increasing(f, df, T::zero(), bound.z_star, cfg)
}

/// `H_p(x) = 1 / (1 - G_p(x))`; the residual reported is that of
/// `x H^{p+1} - (H - 1)`.
pub fn solve_h<T: Real>(p: u64, x: T, cfg: &RootConfig<T>) -> Result<RootResult<T>> {
    let g = solve_g(p, x, cfg)?;
    let bound = DomainBound::<T>::new(p)?;
    let x = bound.admit(x, cfg.tol)?;
    let one = T::one();
    let h = (one - g.value).recip();
    let residual = (x * h.powf(T::from_u64_lossy(p + 1)) - (h - one)).abs();
    if !(residual <= cfg.tol) {
        return Err(Error::Residual {
            residual: residual.to_f64().unwrap_or(f64::NAN),
            tol: cfg.tol.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(RootResult {
        value: h,
        residual,
        iterations: g.iterations,
        bracket_lo: (one - g.bracket_lo).recip(),
        bracket_hi: (one - g.bracket_hi).recip(),
    })
}

/// Smallest positive root of `y^{p+1} - (β+1) y + β = 0`, i.e. `Φ_β(p, 0)`.
///
/// For `β >= p` this is exactly 1. Otherwise the factor `(y - 1)` is removed
/// symbolically and the increasing polynomial `y^p + ... + y - β` is solved
/// on `[0, 1]`.
pub fn solve_phi0<T: Real>(beta: T, p: u64, cfg: &RootConfig<T>) -> Result<RootResult<T>> {
    if !(beta > T::zero()) || !beta.is_finite() {
        return Err(domain(format!("beta = {beta} must be a positive finite number")));
    }
    if p == 0 {
        return Err(domain("slope p must be >= 1"));
    }
    if beta >= T::from_u64_lossy(p) {
        return Ok(RootResult::exact(T::one()));
    }
    let f = |y: T| {
        let mut acc = T::zero();
        for _ in 0..p {
            acc = (acc + T::one()) * y;
        }
        acc - beta
    };
    let df = |y: T| {
        let mut acc = T::zero();
        for i in (1..=p).rev() {
            acc = acc * y + T::from_u64_lossy(i);
        }
        acc
    };
    solve_increasing(f, df, T::zero(), T::one(), cfg)
}

/// For a real slope `alpha > beta`, the root `y in (0, 1)` of
/// `y^{alpha+1} - (β+1) y + β = 0`.
///
/// With gap `g = alpha*a + d - b`, the process `y^g` is a martingale for the
/// walk, so `y^g` bounds the probability of ever crossing `y = alpha x + d`.
/// For integer `alpha` the root coincides with `Φ_β(alpha, 0)`.
pub fn solve_drift_decay<T: Real>(beta: T, alpha: T, cfg: &RootConfig<T>) -> Result<RootResult<T>> {
    if !(beta > T::zero()) || !beta.is_finite() {
        return Err(domain(format!("beta = {beta} must be a positive finite number")));
    }
    if !(alpha > beta) || !alpha.is_finite() {
        return Err(domain(format!("drift decay needs alpha > beta (alpha = {alpha}, beta = {beta})")));
    }
    let one = T::one();
    let e = alpha + one;
    // -g is increasing on [0, argmin g]
    let y_min = ((beta + one) / e).powf(alpha.recip());
    let f = |y: T| -(y.powf(e) - (beta + one) * y + beta);
    let df = |y: T| -(e * y.powf(alpha) - (beta + one));
    solve_increasing(f, df, T::zero(), y_min, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> RootConfig<f64> {
        RootConfig::default()
    }

    #[test]
    fn domain_bound_values() {
        let b = DomainBound::<f64>::new(1).unwrap();
        assert!((b.x_max - 0.25).abs() < 1e-15);
        let b = DomainBound::<f64>::new(2).unwrap();
        assert!((b.x_max - 4.0 / 27.0).abs() < 1e-15);
        for p in 1..20 {
            let b = DomainBound::<f64>::new(p).unwrap();
            let z = b.z_star;
            assert!(b.x_max > 0.0 && b.x_max < 1.0);
            assert!((z * (1.0 - z).powi(p as i32) - b.x_max).abs() < 1e-15);
        }
        assert!(DomainBound::<f64>::new(0).is_err());
    }

    #[test]
    fn g_examples() {
        assert_eq!(solve_g(3, 0.0, &cfg()).unwrap().value, 0.0);
        let r = solve_g(1, 0.25, &cfg()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-6, "{r:?}");
        let r = solve_g(2, 4.0 / 27.0, &cfg()).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-6, "{r:?}");
        assert!(r.residual <= 1e-12);
    }

    #[test]
    fn h_examples() {
        assert_eq!(solve_h(4, 0.0, &cfg()).unwrap().value, 1.0);
        let r = solve_h(1, 0.25, &cfg()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-5);
        let r = solve_h(2, 4.0 / 27.0, &cfg()).unwrap();
        assert!((r.value - 1.5).abs() < 1e-5);
        assert!(r.bracket_lo <= r.value && r.value <= r.bracket_hi);
    }

    #[test]
    fn x_above_bound_is_clamped_or_rejected() {
        let b = DomainBound::<f64>::new(2).unwrap();
        assert!(solve_g(2, b.x_max + 1e-14, &cfg()).is_ok());
        assert!(matches!(solve_g(2, b.x_max + 1e-6, &cfg()), Err(Error::Domain(_))));
        assert!(matches!(solve_h(2, -0.01, &cfg()), Err(Error::Domain(_))));
    }

    #[test]
    fn phi0_examples() {
        assert_eq!(solve_phi0(2.0, 1, &cfg()).unwrap().value, 1.0);
        assert_eq!(solve_phi0(1.0, 1, &cfg()).unwrap().value, 1.0);
        let r = solve_phi0(1.0, 2, &cfg()).unwrap();
        assert!((r.value - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-14);
        assert!(r.iterations <= 200);
        assert!(solve_phi0(0.0, 2, &cfg()).is_err());
        assert!(solve_phi0(-1.0, 2, &cfg()).is_err());
        assert!(solve_phi0(1.0, 0, &cfg()).is_err());
    }

    #[test]
    fn phi0_in_f32() {
        let r = solve_phi0(1.0f32, 2, &RootConfig::default()).unwrap();
        assert!((r.value - 0.618_034).abs() < 1e-5);
    }

    #[test]
    fn drift_decay_matches_phi0_at_integer_slope() {
        for (beta, p) in [(1.0, 2u64), (1.5, 2), (0.3, 1), (2.5, 3)] {
            let a = solve_drift_decay(beta, p as f64, &cfg()).unwrap().value;
            let b = solve_phi0(beta, p, &cfg()).unwrap().value;
            assert!((a - b).abs() < 1e-10, "beta={beta} p={p}: {a} vs {b}");
        }
        assert!(solve_drift_decay(2.0, 1.5, &cfg()).is_err());
    }
}
