//! Seeded Monte Carlo simulation of the β-biased monotone walk.
//!
//! Each trial ends in one of three states: it succeeded, it was stopped
//! because a proven bound on its remaining success probability fell below
//! `epsilon` (certified failure), or it ran out of budget (unresolved). The
//! aggregate [`SimEstimate`] reports an envelope `[p_low, p_high]` that
//! contains the true probability up to binomial sampling error.
//!
//! # Stream derivation
//!
//! Trial `i` of a run with master seed `s` draws from ChaCha8 keyed by the
//! 32-byte seed `s.to_le_bytes() ++ [0; 24]` on stream number `i`. A trial
//! therefore depends only on `(s, i)`, and results are identical for any
//! thread count or batch split.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;

use crate::crossprob::{rat_to_f64, BiasSpec, LineSpec};
use crate::error::{Error, Result};
use crate::gfroots::{solve_drift_decay, solve_phi0, RootConfig};
use crate::Rat;

/// Two-sided 95% normal quantile used for the Wilson intervals.
pub const CI_Z: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    /// Certified-failure threshold on the remaining success probability.
    pub epsilon: f64,
    pub max_steps: u64,
    /// Hitting trials only: give up once this far above the line.
    pub max_excess: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self { epsilon: 1e-9, max_steps: 1_000_000, max_excess: 64 }
    }
}

impl StopRule {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config(format!("epsilon = {} must lie in (0, 1)", self.epsilon)));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be >= 1".into()));
        }
        if self.max_excess == 0 {
            return Err(Error::Config("max_excess must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Up,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WalkState {
    pub a: u64,
    pub b: u64,
    pub steps: u64,
}

impl WalkState {
    #[inline]
    pub fn advance(&mut self, step: Step) {
        match step {
            Step::Up => self.b += 1,
            Step::Right => self.a += 1,
        }
        self.steps += 1;
        debug_assert_eq!(self.a + self.b, self.steps);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialStatus {
    Success,
    FailureCertified,
    Unresolved,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub status: TrialStatus,
    pub steps_used: u64,
    /// Bound on the remaining success probability when certified, else 0.
    pub bound_at_stop: f64,
}

impl TrialOutcome {
    fn new(status: TrialStatus, steps_used: u64) -> Self {
        Self { status, steps_used, bound_at_stop: 0.0 }
    }
}

/// RNG for trial `trial_index` under `master_seed`.
pub fn trial_rng(master_seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master_seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(trial_index);
    rng
}

/// Up/right step sampler for a fixed bias.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSampler {
    /// `β = up/right` exactly: up iff a uniform integer in `[0, up + right)`
    /// falls below `up`. `zone` is the rejection limit for unbiased reduction.
    Exact { up: u64, total: u64, zone: u64 },
    /// Up iff a 53-bit uniform in `[0, 1)` falls below `threshold`.
    Float { threshold: f64 },
}

impl StepSampler {
    pub fn new(bias: &BiasSpec) -> Self {
        if let Some(r) = &bias.exact {
            if let (Some(up), Some(right)) = (r.numer().to_u64(), r.denom().to_u64()) {
                if let Some(total) = up.checked_add(right) {
                    let zone = (u64::MAX / total) * total;
                    return StepSampler::Exact { up, total, zone };
                }
            }
        }
        StepSampler::Float { threshold: bias.up_probability() }
    }

    #[inline]
    pub fn sample<R: RngCore>(&self, rng: &mut R) -> Step {
        let up = match *self {
            StepSampler::Exact { up, total, zone } => loop {
                let x = rng.next_u64();
                if x < zone {
                    break x % total < up;
                }
            },
            StepSampler::Float { threshold } => {
                let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                u < threshold
            }
        };
        if up {
            Step::Up
        } else {
            Step::Right
        }
    }

    pub fn up_probability(&self) -> f64 {
        match *self {
            StepSampler::Exact { up, total, .. } => up as f64 / total as f64,
            StepSampler::Float { threshold } => threshold,
        }
    }
}

/// Draws one step of the walk.
pub fn sample_step<R: RngCore>(bias: &BiasSpec, rng: &mut R) -> Step {
    StepSampler::new(bias).sample(rng)
}

/// Geometric decay bound `base^(gap + offset)` with a precomputed integer
/// threshold: `gap >= threshold` implies the bound is below epsilon.
#[derive(Debug, Clone, Copy, PartialEq)]
struct DecayBound {
    base: f64,
    threshold: i128,
}

impl DecayBound {
    /// Smallest integer `g` with `base^(g / scale + offset) < epsilon`, padded
    /// by one to absorb rounding in the logarithms.
    fn new(base: f64, offset: f64, scale: f64, epsilon: f64) -> Option<Self> {
        if !(base > 0.0 && base < 1.0) {
            return None;
        }
        let g = (epsilon.ln() / base.ln() - offset) * scale;
        if !g.is_finite() || g > 1e30 {
            return None;
        }
        Some(Self { base, threshold: g.floor() as i128 + 1 })
    }
}

/// Precomputed crossing-trial parameters for `y = alpha x + d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingPlan {
    sampler: StepSampler,
    /// common denominator of alpha and d
    scale: i128,
    alpha_scaled: i128,
    d_scaled: i128,
    /// `⌊alpha⌋`, `⌊d⌋`, with the bound `Φ_β(⌊alpha⌋,0)^(gap+1)`.
    floor_slope: i128,
    floor_d: i128,
    floor_bound: Option<DecayBound>,
    /// Martingale bound `y^(gap)` on the actual line, for fractional slopes.
    drift_bound: Option<DecayBound>,
    stop: StopRule,
}

fn to_i128(x: &BigInt, what: &str) -> Result<i128> {
    x.to_i128().ok_or_else(|| Error::Config(format!("{what} too large for simulation")))
}

impl CrossingPlan {
    pub fn new(bias: &BiasSpec, line: &LineSpec, stop: &StopRule, cfg: &RootConfig<f64>) -> Result<Self> {
        stop.validate()?;
        let scale_big = line.alpha.denom().lcm(line.d.denom());
        let scale = to_i128(&scale_big, "line denominator")?;
        let alpha_scaled = to_i128(&(&line.alpha * Rat::from_integer(scale_big.clone())).to_integer(), "slope")?;
        let d_scaled = to_i128(&(&line.d * Rat::from_integer(scale_big)).to_integer(), "intercept")?;
        let floor_slope = to_i128(&line.alpha.floor().to_integer(), "slope")?;
        let floor_d = to_i128(&line.d.floor().to_integer(), "intercept")?;

        let floor_bound = if floor_slope >= 1 {
            let root = solve_phi0(bias.beta, floor_slope as u64, cfg)?;
            DecayBound::new(root.value, 1.0, 1.0, stop.epsilon)
        } else {
            None
        };
        let alpha = rat_to_f64(&line.alpha);
        let drift_bound = if !line.alpha.is_integer() && alpha > bias.beta {
            let root = solve_drift_decay(bias.beta, alpha, cfg)?;
            DecayBound::new(root.value, 0.0, scale as f64, stop.epsilon)
        } else {
            None
        };

        Ok(Self {
            sampler: StepSampler::new(bias),
            scale,
            alpha_scaled,
            d_scaled,
            floor_slope,
            floor_d,
            floor_bound,
            drift_bound,
            stop: *stop,
        })
    }

    /// Runs one trial. Success at the first lattice point with
    /// `b > alpha a + d`, tested as `b q > (alpha q) a + d q`.
    pub fn run<R: RngCore>(&self, rng: &mut R) -> TrialOutcome {
        let mut state = WalkState::default();
        // gap = alpha*a + d - b scaled by q; crossing iff gap < 0
        let mut gap = self.d_scaled;
        // floor_gap = ⌊alpha⌋ a + ⌊d⌋ - b
        let mut floor_gap = self.floor_d;
        while state.steps < self.stop.max_steps {
            let step = self.sampler.sample(rng);
            state.advance(step);
            match step {
                Step::Up => {
                    gap -= self.scale;
                    floor_gap -= 1;
                }
                Step::Right => {
                    gap += self.alpha_scaled;
                    floor_gap += self.floor_slope;
                }
            }
            if gap < 0 {
                return TrialOutcome::new(TrialStatus::Success, state.steps);
            }
            if let Some(fb) = &self.floor_bound {
                if floor_gap >= fb.threshold {
                    let bound = fb.base.powf((floor_gap + 1) as f64);
                    if bound < self.stop.epsilon {
                        return certified(state.steps, bound);
                    }
                }
            }
            if let Some(db) = &self.drift_bound {
                if gap >= db.threshold {
                    let bound = db.base.powf(gap as f64 / self.scale as f64);
                    if bound < self.stop.epsilon {
                        return certified(state.steps, bound);
                    }
                }
            }
        }
        TrialOutcome::new(TrialStatus::Unresolved, state.steps)
    }
}

fn certified(steps: u64, bound: f64) -> TrialOutcome {
    TrialOutcome { status: TrialStatus::FailureCertified, steps_used: steps, bound_at_stop: bound }
}

/// Precomputed hitting-trial parameters for `y = p x + d`.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingPlan {
    sampler: StepSampler,
    p: i128,
    d: i128,
    below_bound: Option<DecayBound>,
    stop: StopRule,
}

impl HittingPlan {
    pub fn new(bias: &BiasSpec, p: u64, d: u64, stop: &StopRule, cfg: &RootConfig<f64>) -> Result<Self> {
        stop.validate()?;
        if p == 0 {
            return Err(Error::Domain("hitting trials need slope p >= 1".into()));
        }
        let root = solve_phi0(bias.beta, p, cfg)?;
        Ok(Self {
            sampler: StepSampler::new(bias),
            p: p as i128,
            d: d as i128,
            // reaching the line from gap g means crossing y = px + d - 1
            below_bound: DecayBound::new(root.value, 0.0, 1.0, stop.epsilon),
            stop: *stop,
        })
    }

    /// Runs one trial. Success on the first visit to a lattice point
    /// `(n, p n + d)` after the start.
    pub fn run<R: RngCore>(&self, rng: &mut R) -> TrialOutcome {
        let mut state = WalkState::default();
        // excess = b - (p a + d)
        let mut excess = -self.d;
        let max_excess = self.stop.max_excess as i128;
        while state.steps < self.stop.max_steps {
            let step = self.sampler.sample(rng);
            state.advance(step);
            match step {
                Step::Up => excess += 1,
                Step::Right => excess -= self.p,
            }
            if excess == 0 {
                return TrialOutcome::new(TrialStatus::Success, state.steps);
            }
            if excess < 0 {
                if let Some(bb) = &self.below_bound {
                    let gap = -excess;
                    if gap >= bb.threshold {
                        let bound = bb.base.powf(gap as f64);
                        if bound < self.stop.epsilon {
                            return certified(state.steps, bound);
                        }
                    }
                }
            } else if excess > max_excess {
                break;
            }
        }
        TrialOutcome::new(TrialStatus::Unresolved, state.steps)
    }
}

pub fn run_crossing_trial<R: RngCore>(
    bias: &BiasSpec,
    line: &LineSpec,
    stop: &StopRule,
    rng: &mut R,
) -> Result<TrialOutcome> {
    Ok(CrossingPlan::new(bias, line, stop, &RootConfig::default())?.run(rng))
}

pub fn run_hitting_trial<R: RngCore>(
    bias: &BiasSpec,
    p: u64,
    d: u64,
    stop: &StopRule,
    rng: &mut R,
) -> Result<TrialOutcome> {
    Ok(HittingPlan::new(bias, p, d, stop, &RootConfig::default())?.run(rng))
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrialKind {
    Crossing(LineSpec),
    Hitting { p: u64, d: u64 },
}

impl TrialKind {
    pub fn name(&self) -> &'static str {
        match self {
            TrialKind::Crossing(_) => "crossing",
            TrialKind::Hitting { .. } => "hitting",
        }
    }
}

enum Plan {
    Crossing(CrossingPlan),
    Hitting(HittingPlan),
}

impl Plan {
    fn run(&self, rng: &mut ChaCha8Rng) -> TrialOutcome {
        match self {
            Plan::Crossing(p) => p.run(rng),
            Plan::Hitting(p) => p.run(rng),
        }
    }
}

/// Per-run tallies; merging is commutative and associative (integer sums
/// and an exact `max`), so any partition of trials gives the same result.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Tally {
    successes: u64,
    certified: u64,
    unresolved: u64,
    max_bound: f64,
    total_steps: u64,
}

impl Tally {
    fn record(mut self, o: TrialOutcome) -> Self {
        match o.status {
            TrialStatus::Success => self.successes += 1,
            TrialStatus::FailureCertified => {
                self.certified += 1;
                self.max_bound = self.max_bound.max(o.bound_at_stop);
            }
            TrialStatus::Unresolved => self.unresolved += 1,
        }
        self.total_steps += o.steps_used;
        self
    }

    fn merge(self, o: Self) -> Self {
        Self {
            successes: self.successes + o.successes,
            certified: self.certified + o.certified,
            unresolved: self.unresolved + o.unresolved,
            max_bound: self.max_bound.max(o.max_bound),
            total_steps: self.total_steps + o.total_steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimEstimate {
    pub trials: u64,
    pub successes: u64,
    pub certified_failures: u64,
    pub unresolved: u64,
    /// `successes / trials`
    pub p_low: f64,
    /// `(successes + unresolved) / trials` plus the certified-bound mass.
    pub p_high: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub master_seed: u64,
    /// Largest remaining-probability bound among certified failures.
    pub max_certified_bound: f64,
    pub total_steps: u64,
}

impl SimEstimate {
    fn from_tally(t: Tally, trials: u64, master_seed: u64) -> Self {
        let n = trials as f64;
        let certified_mass = t.certified as f64 * t.max_bound / n;
        let p_low = t.successes as f64 / n;
        let p_high = ((t.successes + t.unresolved) as f64 / n + certified_mass).min(1.0);
        let ci_low = wilson(t.successes, trials, CI_Z).0;
        let ci_high = (wilson(t.successes + t.unresolved, trials, CI_Z).1 + certified_mass).min(1.0);
        Self {
            trials,
            successes: t.successes,
            certified_failures: t.certified,
            unresolved: t.unresolved,
            p_low,
            p_high,
            ci_low,
            ci_high,
            master_seed,
            max_certified_bound: t.max_bound,
            total_steps: t.total_steps,
        }
    }

    /// Fraction of trials that succeeded. Unresolved trials are not counted
    /// as successes; their mass shows up only in `p_high`.
    pub fn p_hat(&self) -> f64 {
        self.p_low
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.p_low + self.p_high)
    }

    /// Binomial standard error at the envelope midpoint.
    pub fn sigma(&self) -> f64 {
        let m = self.midpoint();
        (m * (1.0 - m) / self.trials as f64).sqrt()
    }

    /// Distance from `value` to the envelope in units of [`Self::sigma`]
    /// (0 inside the envelope).
    pub fn z_score(&self, value: f64) -> f64 {
        let dist = if value < self.p_low {
            self.p_low - value
        } else if value > self.p_high {
            value - self.p_high
        } else {
            0.0
        };
        if dist == 0.0 {
            0.0
        } else {
            dist / self.sigma()
        }
    }
}

/// Wilson score interval for `k` successes out of `n`.
pub fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    let n_f = n as f64;
    let phat = k as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (phat + z2 / (2.0 * n_f)) / denom;
    let half = z * (phat * (1.0 - phat) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k >= n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Runs `trials` independent trials (in parallel on the current rayon pool).
pub fn estimate(
    bias: &BiasSpec,
    kind: &TrialKind,
    trials: u64,
    master_seed: u64,
    stop: &StopRule,
    cfg: &RootConfig<f64>,
) -> Result<SimEstimate> {
    if trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    stop.validate()?;
    let plan = match kind {
        TrialKind::Crossing(line) => Plan::Crossing(CrossingPlan::new(bias, line, stop, cfg)?),
        TrialKind::Hitting { p, d } => Plan::Hitting(HittingPlan::new(bias, *p, *d, stop, cfg)?),
    };
    let tally = (0..trials)
        .into_par_iter()
        .fold(Tally::default, |t, i| t.record(plan.run(&mut trial_rng(master_seed, i))))
        .reduce(Tally::default, Tally::merge);
    Ok(SimEstimate::from_tally(tally, trials, master_seed))
}

/// One crossing estimate per slope, all sharing `master_seed` so that trial
/// `i` follows the same walk for every slope.
pub fn sweep_alpha(
    bias: &BiasSpec,
    alphas: &[Rat],
    d: &Rat,
    trials: u64,
    master_seed: u64,
    stop: &StopRule,
    cfg: &RootConfig<f64>,
) -> Result<Vec<SimEstimate>> {
    if alphas.is_empty() {
        return Err(Error::Config("alpha list is empty".into()));
    }
    alphas
        .iter()
        .map(|alpha| {
            let line = LineSpec::new(alpha.clone(), d.clone())?;
            estimate(bias, &TrialKind::Crossing(line), trials, master_seed, stop, cfg)
        })
        .collect()
}

/// Evenly spaced rational grid `lo, ..., hi` with `steps >= 2` points.
pub fn rational_grid(lo: &Rat, hi: &Rat, steps: usize) -> Result<Vec<Rat>> {
    if steps < 2 || lo >= hi || lo.is_negative() {
        return Err(Error::Config(format!("invalid grid [{lo}, {hi}] with {steps} steps")));
    }
    let width = (hi - lo) / Rat::from_integer(BigInt::from(steps - 1));
    Ok((0..steps)
        .map(|i| {
            if i + 1 == steps {
                hi.clone()
            } else {
                lo + &width * Rat::from_integer(BigInt::from(i))
            }
        })
        .collect())
}
