//! Crossing and hitting probabilities of the β-biased monotone walk.
//!
//! `Φ_β(p, d)` is the probability that the walk ever reaches a lattice point
//! strictly above `y = p x + d`; `Ψ_β(p, d)` is the probability that it lands
//! on a lattice point of `y = p x + d` after leaving the origin.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{domain, Result};
use crate::exactcomb::{catalan_m, dp_count, CountKind};
use crate::gfroots::{solve_phi0, RootConfig, RootResult};
use crate::scalar::{CompensatedSum, Real};
use crate::{BigCount, Rat};

/// Walk bias: up-step odds `β`. The up step has probability `β/(β+1)`.
///
/// `exact` holds the rational value when `β` was given as a finite decimal
/// or fraction; it drives exact series evaluation and exact step sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasSpec {
    pub beta: f64,
    pub exact: Option<Rat>,
}

impl BiasSpec {
    pub fn from_f64(beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(domain(format!("beta = {beta} must be positive and finite")));
        }
        Ok(Self { beta, exact: None })
    }

    pub fn from_rat(beta: Rat) -> Result<Self> {
        if !beta.is_positive() {
            return Err(domain(format!("beta = {beta} must be positive")));
        }
        let f = rat_to_f64(&beta);
        if !f.is_finite() || f <= 0.0 {
            return Err(domain(format!("beta = {beta} is not representable as a double")));
        }
        Ok(Self { beta: f, exact: Some(beta) })
    }

    /// Parses `"3"`, `"1.25"`, `"7/3"` exactly; anything else `f64` parses
    /// (e.g. `"1e-3"`) is kept as a float.
    pub fn parse(s: &str) -> Result<Self> {
        match parse_rat(s) {
            Some(r) => Self::from_rat(r),
            None => {
                let f: f64 = s
                    .trim()
                    .parse()
                    .map_err(|_| domain(format!("cannot parse beta from {s:?}")))?;
                Self::from_f64(f)
            }
        }
    }

    pub fn up_probability(&self) -> f64 {
        self.beta / (self.beta + 1.0)
    }
}

/// Target line `y = alpha x + d` with `alpha, d >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineSpec {
    pub alpha: Rat,
    pub d: Rat,
}

impl LineSpec {
    pub fn new(alpha: Rat, d: Rat) -> Result<Self> {
        if alpha.is_negative() || d.is_negative() {
            return Err(domain(format!("line y = {alpha} x + {d} needs alpha, d >= 0")));
        }
        Ok(Self { alpha, d })
    }

    pub fn integer(p: u64, d: u64) -> Self {
        Self { alpha: Rat::from_integer(p.into()), d: Rat::from_integer(d.into()) }
    }

    /// The slope as an integer, if it is one.
    pub fn integer_slope(&self) -> Option<u64> {
        if self.alpha.is_integer() {
            self.alpha.to_integer().to_u64()
        } else {
            None
        }
    }

    pub fn floor_slope(&self) -> Option<u64> {
        self.alpha.floor().to_integer().to_u64()
    }

    /// `⌊d⌋`: crossing `y = p x + d` on the lattice is crossing `y = p x + ⌊d⌋`
    /// for integer `p`.
    pub fn floor_intercept(&self) -> Option<u64> {
        self.d.floor().to_integer().to_u64()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbMethod {
    Root,
    Series,
    Asymptotic,
}

impl ProbMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ProbMethod::Root => "root",
            ProbMethod::Series => "series",
            ProbMethod::Asymptotic => "asymptotic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbDetail<T> {
    Root(RootResult<T>),
    Terms(usize),
    /// Asymptotic approximation evaluated at `x1 = β^p/(β+1)^{p+1}`.
    Asymptotic { x1: T },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbResult<T> {
    pub value: T,
    pub method: ProbMethod,
    pub detail: ProbDetail<T>,
}

fn check_beta<T: Real>(beta: T) -> Result<()> {
    if !(beta > T::zero()) || !beta.is_finite() {
        return Err(domain(format!("beta = {beta} must be positive and finite")));
    }
    Ok(())
}

/// `x1 = β^p / (β+1)^{p+1}`, the point where `H_p` yields `Φ_β(p, 0)`.
pub fn evaluation_point<T: Real>(beta: T, p: u64) -> T {
    let q = beta + T::one();
    (beta / q).powf(T::from_u64_lossy(p)) / q
}

/// `Φ_β(p, d) = Φ_β(p, 0)^{d+1}` from the root of the crossing polynomial.
pub fn phi<T: Real>(beta: T, p: u64, d: u64, cfg: &RootConfig<T>) -> Result<ProbResult<T>> {
    let root = solve_phi0(beta, p, cfg)?;
    let value = if root.value == T::one() {
        T::one()
    } else {
        root.value.powf(T::from_u64_lossy(d + 1))
    };
    Ok(ProbResult { value, method: ProbMethod::Root, detail: ProbDetail::Root(root) })
}

/// Horizontal line `y = d`: crossed with probability 1 for every `β > 0`.
pub fn phi_p0<T: Real>(beta: T, d: u64) -> Result<ProbResult<T>> {
    check_beta(beta)?;
    let _ = d;
    Ok(ProbResult {
        value: T::one(),
        method: ProbMethod::Root,
        detail: ProbDetail::Root(RootResult::exact(T::one())),
    })
}

/// `Ψ_β(p, d)`: `Φ_β(p,0)^d` for `d > 0` and
/// `2 (1 - β/(β+1) / Φ_β(p,0))` for `d = 0`.
///
/// `p = 0` with `d = 0` is rejected: the reflection argument behind the
/// factor 2 needs `p > 0`.
pub fn psi<T: Real>(beta: T, p: u64, d: u64, cfg: &RootConfig<T>) -> Result<ProbResult<T>> {
    check_beta(beta)?;
    if p == 0 {
        if d == 0 {
            return Err(domain("psi for p = 0, d = 0 is not defined by the return formula"));
        }
        return phi_p0(beta, d);
    }
    let root = solve_phi0(beta, p, cfg)?;
    let value = if d > 0 {
        if root.value == T::one() {
            T::one()
        } else {
            root.value.powf(T::from_u64_lossy(d))
        }
    } else {
        let up = beta / (beta + T::one());
        T::lit(2.0) * (T::one() - up / root.value)
    };
    let value = clamp_unit(value, cfg.tol)?;
    Ok(ProbResult { value, method: ProbMethod::Root, detail: ProbDetail::Root(root) })
}

fn clamp_unit<T: Real>(v: T, tol: T) -> Result<T> {
    if v < T::zero() {
        if v >= -tol {
            return Ok(T::zero());
        }
    } else if v > T::one() {
        if v <= T::one() + tol {
            return Ok(T::one());
        }
    } else {
        return Ok(v);
    }
    Err(domain(format!("probability {v} fell outside [0, 1]")))
}

/// Counts `S(n, d)` for `n < n_terms`; `S(n, 0) = M(p, n)`.
fn weakly_below_counts(p: u64, d: u64, n_terms: usize) -> Result<Vec<BigCount>> {
    if n_terms == 0 {
        return Ok(Vec::new());
    }
    if d == 0 {
        return Ok((0..n_terms as u64).map(|n| catalan_m(p, n)).collect());
    }
    Ok(dp_count(p, d, n_terms - 1, CountKind::WeaklyBelow)?.entries)
}

fn ln_count(c: &BigUint) -> f64 {
    let bits = c.bits();
    if bits <= 64 {
        return c.to_f64().map_or(f64::NEG_INFINITY, f64::ln);
    }
    let shift = bits - 53;
    let mantissa = (c >> shift).to_f64().expect("53-bit mantissa");
    mantissa.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `Σ_{n < counts.len()} counts[n] · prefactor · x^n` in floating point with
/// compensated summation; falls back to log space when a count or weight
/// leaves the representable range.
fn weighted_count_sum<T: Real>(counts: &[BigCount], prefactor: T, x: T) -> T {
    let max_bits = T::max_value().log2().to_u64().unwrap_or(64).saturating_sub(2);
    let ln_pref = prefactor.ln().to_f64().unwrap_or(f64::NAN);
    let ln_x = x.ln().to_f64().unwrap_or(f64::NAN);
    let mut weight = prefactor;
    let mut sum = CompensatedSum::new();
    for (n, c) in counts.iter().enumerate() {
        if !c.is_zero() {
            let term = if c.bits() <= max_bits && weight.is_normal() {
                T::from_f64(c.to_f64().unwrap_or(f64::INFINITY)).unwrap_or_else(T::infinity) * weight
            } else {
                let ln_term = ln_count(c) + ln_pref + n as f64 * ln_x;
                T::from_f64(ln_term.exp()).unwrap_or_else(T::zero)
            };
            sum.add(term);
        }
        weight = weight * x;
    }
    sum.value()
}

/// Truncated crossing series `Σ_{n<N} S(n,d) β^{pn+d+1} / (β+1)^{pn+n+d+1}`
/// in floating point. All terms are positive, so this is a lower bound of
/// `Φ_β(p, d)` up to rounding.
pub fn phi_series<T: Real>(beta: T, p: u64, d: u64, n_terms: usize) -> Result<ProbResult<T>> {
    check_beta(beta)?;
    if p == 0 {
        return Err(domain("series needs p >= 1"));
    }
    let counts = weakly_below_counts(p, d, n_terms)?;
    let up = beta / (beta + T::one());
    let prefactor = up.powf(T::from_u64_lossy(d + 1));
    let value = weighted_count_sum(&counts, prefactor, evaluation_point(beta, p));
    Ok(ProbResult { value, method: ProbMethod::Series, detail: ProbDetail::Terms(n_terms) })
}

/// Exact-rational version of [`phi_series`].
pub fn phi_series_exact(beta: &Rat, p: u64, d: u64, n_terms: usize) -> Result<Rat> {
    if !beta.is_positive() {
        return Err(domain(format!("beta = {beta} must be positive")));
    }
    if p == 0 {
        return Err(domain("series needs p >= 1"));
    }
    let counts = weakly_below_counts(p, d, n_terms)?;
    let q = beta + Rat::one();
    let up = beta / &q;
    let x1 = num_traits::pow(up.clone(), p as usize) / &q;
    let mut weight = num_traits::pow(up, d as usize + 1);
    let mut total = Rat::zero();
    for c in &counts {
        total += Rat::from_integer(BigInt::from(c.clone())) * &weight;
        weight *= &x1;
    }
    Ok(total)
}

/// Series evaluation driven by a [`BiasSpec`]: exact rational arithmetic when
/// `β` is rational, compensated `f64` summation otherwise.
pub fn phi_series_bias(bias: &BiasSpec, p: u64, d: u64, n_terms: usize) -> Result<ProbResult<f64>> {
    match &bias.exact {
        Some(beta) => {
            let v = phi_series_exact(beta, p, d, n_terms)?;
            Ok(ProbResult {
                value: rat_to_f64(&v),
                method: ProbMethod::Series,
                detail: ProbDetail::Terms(n_terms),
            })
        }
        None => phi_series(bias.beta, p, d, n_terms),
    }
}

/// Truncated generating function `Σ_{n<N} M(p,n) x^n`.
pub fn h_series<T: Real>(p: u64, x: T, n_terms: usize) -> T {
    let counts: Vec<BigCount> = (0..n_terms as u64).map(|n| catalan_m(p, n)).collect();
    weighted_count_sum(&counts, T::one(), x)
}

/// Large-`p` approximation `Φ_β(p,0) ≈ β/(β+1) · (1 + x1)`; only meaningful
/// when `β < p`.
pub fn phi_asymptotic<T: Real>(beta: T, p: u64) -> Result<ProbResult<T>> {
    check_beta(beta)?;
    if p == 0 || beta >= T::from_u64_lossy(p) {
        return Err(domain(format!("asymptotic form needs beta < p (beta = {beta}, p = {p})")));
    }
    let x1 = evaluation_point(beta, p);
    let value = beta / (beta + T::one()) * (T::one() + x1);
    Ok(ProbResult { value, method: ProbMethod::Asymptotic, detail: ProbDetail::Asymptotic { x1 } })
}

/// Integer bracket `(⌊β⌋, ⌊β⌋ + 1)` around the critical slope `α_β`.
pub fn alpha_beta_bounds(bias: &BiasSpec) -> (u64, u64) {
    let lo = match &bias.exact {
        Some(r) => r.floor().to_integer().to_u64().unwrap_or(u64::MAX - 1),
        None => bias.beta.floor() as u64,
    };
    (lo, lo + 1)
}

/// Analytic crossing probability for lines with an integer slope
/// (`None` for fractional slopes, where no closed form is known).
pub fn analytic_crossing(bias: &BiasSpec, line: &LineSpec, cfg: &RootConfig<f64>) -> Result<Option<f64>> {
    let (Some(p), Some(d)) = (line.integer_slope(), line.floor_intercept()) else {
        return Ok(None);
    };
    let r = if p == 0 { phi_p0(bias.beta, d)? } else { phi(bias.beta, p, d, cfg)? };
    Ok(Some(r.value))
}

/// Analytic hitting probability; needs integer slope and intercept.
pub fn analytic_hitting(bias: &BiasSpec, line: &LineSpec, cfg: &RootConfig<f64>) -> Result<Option<f64>> {
    let (Some(p), true) = (line.integer_slope(), line.d.is_integer()) else {
        return Ok(None);
    };
    let d = line.d.to_integer().to_u64().ok_or_else(|| domain("intercept too large"))?;
    Ok(Some(psi(bias.beta, p, d, cfg)?.value))
}

/// Parses an exact rational from `"a"`, `"-a"`, `"a.bcd"` or `"a/b"`.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rat::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let num: BigInt = digits.parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let r = Rat::new(num, den);
    Some(if neg { -r } else { r })
}

/// Nearest-ish `f64` for a big rational, robust to huge numerators and
/// denominators.
pub fn rat_to_f64(r: &Rat) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // scale so that the quotient carries 64 significant bits
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift = 64 - (nb - db);
    let scaled = if shift >= 0 {
        (r.numer() << shift as usize).div_floor(r.denom())
    } else {
        r.numer().div_floor(&(r.denom() << (-shift) as usize))
    };
    let mut v = scaled.to_f64().unwrap_or(f64::NAN);
    let mut e = -shift;
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
    }
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
    }
    v * 2f64.powi(e as i32)
}
