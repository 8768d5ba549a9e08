//! Subjective opinions and Beta-distributed random variables.
//!
//! A binary opinion `⟨b, d, u, a⟩` is an equivalent representation of a Beta
//! distribution over the probability of a binary event: `b` and `d` carry the
//! observed support for and against, `u` the remaining uncertainty mass and
//! `a` the prior (base rate). The module provides both families of operators
//! used by the label algebras:
//!
//! * the standard subjective-logic sum, product and division, which combine
//!   the opinion tuples directly;
//! * moment-matched operators, which combine the underlying Beta means and
//!   variances and re-fit a Beta distribution to the result.

use crate::error::{Error, Result};
use statrs::function::beta::beta_reg;

/// Default prior weight `W`: the evidence mass carried by the prior alone.
pub const DEFAULT_PRIOR_WEIGHT: f64 = 2.0;
/// Default base rate: an uninformative, uniformly distributed prior.
pub const DEFAULT_BASE_RATE: f64 = 0.5;
/// Cap on Dirichlet strength; opinions at the cap are treated as point masses.
pub const MAX_STRENGTH: f64 = 1e12;
/// Guard for denominators in the division operators.
pub const EPS_DIV: f64 = 1e-12;

/// Tolerance for clamping components that drift out of `[0, 1]`.
const COMPONENT_TOL: f64 = 1e-9;
/// Floor for Beta parameters so degenerate point masses stay a valid density.
const MIN_ALPHA: f64 = 1e-9;

/// Prior assumption for a binary variable: base rate and prior weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PriorConfig {
    pub base_rate: f64,
    pub weight: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        PriorConfig {
            base_rate: DEFAULT_BASE_RATE,
            weight: DEFAULT_PRIOR_WEIGHT,
        }
    }
}

impl PriorConfig {
    pub fn new(base_rate: f64, weight: f64) -> Result<Self> {
        if !(base_rate > 0.0 && base_rate < 1.0) {
            return Err(Error::Invalid(format!(
                "base rate {base_rate} must lie strictly inside (0, 1)"
            )));
        }
        if !weight.is_finite() || weight <= 0.0 {
            return Err(Error::Invalid(format!(
                "prior weight {weight} must be positive"
            )));
        }
        Ok(PriorConfig { base_rate, weight })
    }
}

/// Positive/negative tallies from a batch of independent observations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ObservationCounts {
    pub positive: u64,
    pub negative: u64,
}

impl ObservationCounts {
    pub fn new(positive: u64, negative: u64) -> Self {
        ObservationCounts { positive, negative }
    }

    pub fn total(&self) -> u64 {
        self.positive + self.negative
    }
}

/// Parameters `⟨α⁺, α⁻⟩` of a Beta distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaParams {
    pub alpha_pos: f64,
    pub alpha_neg: f64,
}

impl BetaParams {
    pub fn new(alpha_pos: f64, alpha_neg: f64) -> Result<Self> {
        if !(alpha_pos > 0.0 && alpha_neg > 0.0) || !alpha_pos.is_finite() || !alpha_neg.is_finite()
        {
            return Err(Error::Invalid(format!(
                "Beta parameters ⟨{alpha_pos}, {alpha_neg}⟩ must be positive and finite"
            )));
        }
        Ok(BetaParams {
            alpha_pos,
            alpha_neg,
        })
    }

    /// Dirichlet strength `s = α⁺ + α⁻`.
    pub fn strength(&self) -> f64 {
        self.alpha_pos + self.alpha_neg
    }

    pub fn mean(&self) -> f64 {
        self.alpha_pos / self.strength()
    }

    /// `μ(1−μ)/(s+1)`.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        m * (1.0 - m) / (self.strength() + 1.0)
    }
}

/// A binary subjective opinion `⟨belief, disbelief, uncertainty, base_rate⟩`.
///
/// Invariants: all components lie in `[0, 1]` and `b + d + u = 1`. Dogmatic
/// opinions (`u = 0`) represent point masses; their Beta form is capped at
/// [`MAX_STRENGTH`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Opinion {
    pub belief: f64,
    pub disbelief: f64,
    pub uncertainty: f64,
    pub base_rate: f64,
}

impl Opinion {
    /// Validates components, clamping violations up to `1e-9` and
    /// renormalising `b + d + u` to one.
    pub fn new(belief: f64, disbelief: f64, uncertainty: f64, base_rate: f64) -> Result<Self> {
        checked_opinion(belief, disbelief, uncertainty, base_rate).map_err(|reason| {
            Error::Invalid(format!(
                "opinion ⟨{belief}, {disbelief}, {uncertainty}, {base_rate}⟩: {reason}"
            ))
        })
    }

    /// The fully uncertain opinion `⟨0, 0, 1, 0.5⟩`.
    pub fn vacuous() -> Self {
        Self::vacuous_with(DEFAULT_BASE_RATE)
    }

    pub fn vacuous_with(base_rate: f64) -> Self {
        Opinion {
            belief: 0.0,
            disbelief: 0.0,
            uncertainty: 1.0,
            base_rate,
        }
    }

    /// Dogmatic opinion pinning the probability at `p` (base rate 0.5).
    pub fn point_mass(p: f64) -> Self {
        Self::dogmatic(p, DEFAULT_BASE_RATE)
    }

    pub fn dogmatic(p: f64, base_rate: f64) -> Self {
        Opinion {
            belief: p,
            disbelief: 1.0 - p,
            uncertainty: 0.0,
            base_rate,
        }
    }

    pub fn is_dogmatic(&self) -> bool {
        self.uncertainty == 0.0
    }

    /// Projected probability `P = b + u·a`, the opinion's point estimate.
    pub fn projected(&self) -> f64 {
        self.belief + self.uncertainty * self.base_rate
    }

    /// `⟨d, b, u, 1−a⟩`; the label of the negated event.
    pub fn complement(&self) -> Self {
        Opinion {
            belief: self.disbelief,
            disbelief: self.belief,
            uncertainty: self.uncertainty,
            base_rate: 1.0 - self.base_rate,
        }
    }

    /// Mean and Dirichlet strength of the equivalent Beta distribution,
    /// with the strength capped at [`MAX_STRENGTH`].
    pub fn mean_strength(&self, prior_weight: f64) -> (f64, f64) {
        let s = if self.uncertainty * MAX_STRENGTH <= prior_weight {
            MAX_STRENGTH
        } else {
            prior_weight / self.uncertainty
        };
        (self.projected(), s)
    }

    /// Mean and variance of the equivalent Beta distribution.
    pub fn mean_variance(&self, prior_weight: f64) -> (f64, f64) {
        let (m, s) = self.mean_strength(prior_weight);
        (m, variance_from(m, s))
    }

    /// Beta parameters `⟨(W/u)·b + W·a, (W/u)·d + W·(1−a)⟩`.
    ///
    /// Dogmatic opinions are mapped to the capped-strength representation
    /// `⟨P·s_max, (1−P)·s_max⟩`, preserving the mean exactly.
    pub fn to_beta(&self, prior_weight: f64) -> BetaParams {
        let (m, s) = self.mean_strength(prior_weight);
        if s >= MAX_STRENGTH {
            BetaParams {
                alpha_pos: (m * s).max(MIN_ALPHA),
                alpha_neg: ((1.0 - m) * s).max(MIN_ALPHA),
            }
        } else {
            BetaParams {
                alpha_pos: s * self.belief + prior_weight * self.base_rate,
                alpha_neg: s * self.disbelief + prior_weight * (1.0 - self.base_rate),
            }
        }
    }

    /// Inverse of [`Opinion::to_beta`]: `b = (α⁺ − W·a)/s`, `d = (α⁻ − W(1−a))/s`,
    /// `u = W/s`. Fails if some component is negative beyond tolerance, i.e.
    /// the distribution carries less evidence than the prior alone.
    pub fn from_beta(beta: &BetaParams, base_rate: f64, prior_weight: f64) -> Result<Self> {
        let s = beta.strength();
        let b = (beta.alpha_pos - prior_weight * base_rate) / s;
        let d = (beta.alpha_neg - prior_weight * (1.0 - base_rate)) / s;
        let u = prior_weight / s;
        Opinion::new(b, d, u, base_rate)
    }

    /// Opinion from observation tallies under a prior:
    /// `α = ⟨n⁺ + W·a, n⁻ + W·(1−a)⟩`.
    pub fn from_counts(counts: ObservationCounts, prior: &PriorConfig) -> Self {
        let beta = BetaParams {
            alpha_pos: counts.positive as f64 + prior.weight * prior.base_rate,
            alpha_neg: counts.negative as f64 + prior.weight * (1.0 - prior.base_rate),
        };
        // n ≥ 0 keeps every component non-negative, so this cannot fail.
        Self::from_beta(&beta, prior.base_rate, prior.weight)
            .expect("counts always yield a valid opinion")
    }
}

impl std::fmt::Display for Opinion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "b={:.6} d={:.6} u={:.6} a={:.6}",
            self.belief, self.disbelief, self.uncertainty, self.base_rate
        )
    }
}

fn checked_opinion(b: f64, d: f64, u: f64, a: f64) -> std::result::Result<Opinion, String> {
    for (name, v) in [
        ("belief", b),
        ("disbelief", d),
        ("uncertainty", u),
        ("base rate", a),
    ] {
        if !v.is_finite() {
            return Err(format!("{name} is not finite"));
        }
        if !(-COMPONENT_TOL..=1.0 + COMPONENT_TOL).contains(&v) {
            return Err(format!("{name} {v} outside [0, 1]"));
        }
    }
    let b = b.clamp(0.0, 1.0);
    let d = d.clamp(0.0, 1.0);
    let u = u.clamp(0.0, 1.0);
    let a = a.clamp(0.0, 1.0);
    let sum = b + d + u;
    if (sum - 1.0).abs() > COMPONENT_TOL {
        return Err(format!("b + d + u = {sum} differs from 1 beyond tolerance"));
    }
    Ok(Opinion {
        belief: b / sum,
        disbelief: d / sum,
        uncertainty: u / sum,
        base_rate: a,
    })
}

fn undefined(op: &'static str, reason: impl Into<String>) -> Error {
    Error::Undefined {
        op,
        reason: reason.into(),
    }
}

pub(crate) fn variance_from(mean: f64, strength: f64) -> f64 {
    mean * (1.0 - mean) / (strength + 1.0)
}

/// Strength recovered from a mean/variance pair, floored so that the fitted
/// Beta parameters stay at or above the prior masses `W·a` and `W·(1−a)`,
/// and capped at [`MAX_STRENGTH`].
fn matched_strength(mean: f64, variance: f64, prior: &PriorConfig) -> f64 {
    let raw = if variance > 0.0 {
        mean * (1.0 - mean) / variance - 1.0
    } else {
        f64::INFINITY
    };
    let floor_pos = prior.weight * prior.base_rate / mean;
    let floor_neg = prior.weight * (1.0 - prior.base_rate) / (1.0 - mean);
    raw.max(floor_pos).max(floor_neg).min(MAX_STRENGTH)
}

/// Opinion with projected probability `mean` and Dirichlet strength
/// `strength`; strengths at the cap become dogmatic opinions.
pub(crate) fn opinion_from_mean_strength(mean: f64, strength: f64, prior: &PriorConfig) -> Opinion {
    if strength >= MAX_STRENGTH {
        return Opinion::dogmatic(mean, prior.base_rate);
    }
    let u = prior.weight / strength;
    let b = (mean - prior.weight * prior.base_rate / strength).max(0.0);
    let d = (1.0 - mean - prior.weight * (1.0 - prior.base_rate) / strength).max(0.0);
    Opinion {
        belief: b,
        disbelief: d,
        uncertainty: u,
        base_rate: prior.base_rate,
    }
}

/// Mean and matched strength for a mean/variance pair; `mean` must already
/// lie in `[0, 1]`. Boundary means become point masses.
pub(crate) fn matched_mean_strength(mean: f64, variance: f64, prior: &PriorConfig) -> (f64, f64) {
    if mean <= 0.0 {
        return (0.0, MAX_STRENGTH);
    }
    if mean >= 1.0 {
        return (1.0, MAX_STRENGTH);
    }
    (mean, matched_strength(mean, variance.max(0.0), prior))
}

/// Mean/variance pair matched to an opinion; `mean` must already lie in `[0, 1]`.
pub(crate) fn match_mean_variance(mean: f64, variance: f64, prior: &PriorConfig) -> Opinion {
    let (m, s) = matched_mean_strength(mean, variance, prior);
    opinion_from_mean_strength(m, s, prior)
}

/// Moment-matched sum in mean/strength space: means and variances add.
pub(crate) fn matched_sum(m1: f64, v1: f64, m2: f64, v2: f64, prior: &PriorConfig) -> (f64, f64) {
    let mut mean = m1 + m2;
    if mean > 1.0 {
        if mean > 1.0 + COMPONENT_TOL {
            log::warn!("moment-matched sum mean {mean} exceeds 1; clamping");
        }
        mean = 1.0;
    }
    matched_mean_strength(mean, v1 + v2, prior)
}

/// Moment-matched product in mean/strength space.
pub(crate) fn matched_product(
    m1: f64,
    v1: f64,
    m2: f64,
    v2: f64,
    prior: &PriorConfig,
) -> (f64, f64) {
    let mean = m1 * m2;
    let var = v1 * m2 * m2 + v2 * m1 * m1 + v1 * v2;
    matched_mean_strength(mean, var, prior)
}

/// Moment-matched conditioning-division in mean/strength space; see
/// [`beta_division`] for the contract. The denominator must not be a point
/// mass at one (callers handle that case as an exact identity).
pub(crate) fn matched_division(
    mx: f64,
    vx: f64,
    my: f64,
    vy: f64,
    prior: &PriorConfig,
) -> Result<(f64, f64)> {
    if my <= EPS_DIV {
        return Err(Error::EvidenceMassVanishes);
    }
    let mean = (mx / my).min(1.0);
    if mx <= EPS_DIV || my - mx <= EPS_DIV {
        return Ok((mean.max(0.0), MAX_STRENGTH));
    }
    let diff = my - mx;
    let dv = (vy - vx).max(0.0);
    let var = mean
        * mean
        * (1.0 - mean)
        * (1.0 - mean)
        * (vx / (mx * mx) + dv / (diff * diff) + 2.0 * vx / (mx * diff));
    Ok(matched_mean_strength(mean, var, prior))
}

/// Fits a Beta-equivalent opinion to a mean and variance by the method of
/// moments. Fails when `mean` leaves `[0, 1]` beyond tolerance; zero variance
/// yields the point mass at `mean`.
pub fn moment_match(mean: f64, variance: f64, prior: &PriorConfig) -> Result<Opinion> {
    if !mean.is_finite() || !(-COMPONENT_TOL..=1.0 + COMPONENT_TOL).contains(&mean) {
        return Err(Error::Invalid(format!(
            "moment-matched mean {mean} outside [0, 1]"
        )));
    }
    if !variance.is_finite() || variance < 0.0 {
        return Err(Error::Invalid(format!(
            "moment-matched variance {variance} is negative"
        )));
    }
    Ok(match_mean_variance(mean.clamp(0.0, 1.0), variance, prior))
}

/// Subjective-logic sum: the opinion about the union of two disjoint events.
pub fn sl_sum(x: &Opinion, y: &Opinion) -> Result<Opinion> {
    let asum = x.base_rate + y.base_rate;
    if asum <= 0.0 {
        return Err(undefined("sum", "both base rates are zero"));
    }
    if asum > 1.0 + COMPONENT_TOL {
        return Err(undefined("sum", format!("base rates add to {asum} > 1")));
    }
    let b = x.belief + y.belief;
    let d =
        (x.base_rate * (x.disbelief - y.belief) + y.base_rate * (y.disbelief - x.belief)) / asum;
    let u = (x.base_rate * x.uncertainty + y.base_rate * y.uncertainty) / asum;
    checked_opinion(b, d, u, asum.min(1.0)).map_err(|reason| undefined("sum", reason))
}

/// Subjective-logic product: the opinion about the conjunction of two
/// independent events.
pub fn sl_product(x: &Opinion, y: &Opinion) -> Result<Opinion> {
    const ONE: Opinion = Opinion {
        belief: 1.0,
        disbelief: 0.0,
        uncertainty: 0.0,
        base_rate: 1.0,
    };
    // Full certainty is the exact identity; the closed form below would
    // otherwise hit the 1 − a_X·a_Y = 0 guard.
    if *x == ONE {
        return Ok(*y);
    }
    if *y == ONE {
        return Ok(*x);
    }
    let denom = 1.0 - x.base_rate * y.base_rate;
    if denom <= EPS_DIV {
        return Err(undefined("product", "base rates multiply to one"));
    }
    let b = x.belief * y.belief
        + ((1.0 - x.base_rate) * y.base_rate * x.belief * y.uncertainty
            + x.base_rate * (1.0 - y.base_rate) * x.uncertainty * y.belief)
            / denom;
    let d = x.disbelief + y.disbelief - x.disbelief * y.disbelief;
    let u = x.uncertainty * y.uncertainty
        + ((1.0 - y.base_rate) * x.belief * y.uncertainty
            + (1.0 - x.base_rate) * x.uncertainty * y.belief)
            / denom;
    let a = x.base_rate * y.base_rate;
    checked_opinion(b, d, u, a).map_err(|reason| undefined("product", reason))
}

/// Subjective-logic division: inverse of the product, defined only under the
/// standard applicability constraints. Callers that need a total operator
/// substitute the vacuous opinion on error.
pub fn sl_division(x: &Opinion, y: &Opinion) -> Result<Opinion> {
    if x.base_rate >= y.base_rate {
        return Err(undefined("division", "requires a_X < a_Y"));
    }
    if x.disbelief < y.disbelief - EPS_DIV {
        return Err(undefined("division", "requires d_X ≥ d_Y"));
    }
    let one_minus_dy = 1.0 - y.disbelief;
    if one_minus_dy <= EPS_DIV {
        return Err(undefined("division", "divisor is full disbelief"));
    }
    let py = y.belief + y.base_rate * y.uncertainty;
    if py <= EPS_DIV {
        return Err(undefined("division", "divisor has zero projected mass"));
    }
    let belief_floor = x.base_rate * (1.0 - y.base_rate) * (1.0 - x.disbelief) * y.belief
        / ((1.0 - x.base_rate) * y.base_rate * one_minus_dy);
    if x.belief < belief_floor - EPS_DIV {
        return Err(undefined("division", "belief constraint violated"));
    }
    let uncertainty_floor = (1.0 - y.base_rate) * (1.0 - x.disbelief) * y.uncertainty
        / ((1.0 - x.base_rate) * one_minus_dy);
    if x.uncertainty < uncertainty_floor - EPS_DIV {
        return Err(undefined("division", "uncertainty constraint violated"));
    }

    let adiff = y.base_rate - x.base_rate;
    let b = y.base_rate * (x.belief + x.base_rate * x.uncertainty) / (adiff * py)
        - x.base_rate * (1.0 - x.disbelief) / (adiff * one_minus_dy);
    let d = (x.disbelief - y.disbelief) / one_minus_dy;
    let u = y.base_rate * (1.0 - x.disbelief) / (adiff * one_minus_dy)
        - y.base_rate * (x.belief + x.base_rate * x.uncertainty) / (adiff * py);
    let a = x.base_rate / y.base_rate;
    checked_opinion(b, d, u, a).map_err(|reason| undefined("division", reason))
}

/// Moment-matched sum of two independent Beta-distributed variables:
/// means and variances add, and the result is re-fit as a Beta distribution.
/// Mean sums beyond one can only arise from degenerate input and are clamped.
pub fn beta_sum(x: &Opinion, y: &Opinion, prior: &PriorConfig) -> Opinion {
    let (mx, vx) = x.mean_variance(prior.weight);
    let (my, vy) = y.mean_variance(prior.weight);
    let (m, s) = matched_sum(mx, vx, my, vy, prior);
    opinion_from_mean_strength(m, s, prior)
}

/// Moment-matched product of two independent Beta-distributed variables.
pub fn beta_product(x: &Opinion, y: &Opinion, prior: &PriorConfig) -> Opinion {
    let (mx, vx) = x.mean_variance(prior.weight);
    let (my, vy) = y.mean_variance(prior.weight);
    let (m, s) = matched_product(mx, vx, my, vy, prior);
    opinion_from_mean_strength(m, s, prior)
}

/// Moment-matched conditioning-division `Z = X ⧸ Y` where `Y` was formed as
/// `X ⊕ V` for the complementary mass `V`. The mean is `μ_X/μ_Y` and the
/// variance the first-order Taylor expansion of `var(X/Y)`; denominators
/// within [`EPS_DIV`] of zero degrade to point masses.
pub fn beta_division(x: &Opinion, y: &Opinion, prior: &PriorConfig) -> Result<Opinion> {
    let (mx, vx) = x.mean_variance(prior.weight);
    let (my, vy) = y.mean_variance(prior.weight);
    if my >= 1.0 && vy == 0.0 {
        // Conditioning on certain evidence leaves the distribution unchanged.
        return Ok(*x);
    }
    let (m, s) = matched_division(mx, vx, my, vy, prior)?;
    Ok(opinion_from_mean_strength(m, s, prior))
}

/// Upper bound on the relative variance error of distributing a
/// moment-matched product over a moment-matched sum:
/// `2·μ_Y·μ_Z·σ²_X / (σ²_X(μ_Y² + μ_Z²) + (μ_X² + σ²_X)(σ²_Y + σ²_Z))`.
pub fn distributivity_error_bound(x: &Opinion, y: &Opinion, z: &Opinion, prior_weight: f64) -> f64 {
    let (mx, vx) = x.mean_variance(prior_weight);
    let (my, vy) = y.mean_variance(prior_weight);
    let (mz, vz) = z.mean_variance(prior_weight);
    let num = 2.0 * my * mz * vx;
    let den = vx * (my * my + mz * mz) + (mx * mx + vx) * (vy + vz);
    if den <= 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Quantile of a Beta distribution by bisection on the regularized
/// incomplete beta function; the returned `x` satisfies
/// `|I_x(α⁺, α⁻) − p| ≤ 1e-10`.
pub fn beta_quantile(beta: &BetaParams, p: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let a = beta.alpha_pos.max(MIN_ALPHA);
    let b = beta.alpha_neg.max(MIN_ALPHA);
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let c = beta_reg(a, b, mid);
        if (c - p).abs() <= 1e-13 {
            return mid;
        }
        if c < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Regularized incomplete beta function `I_x(α⁺, α⁻)`, the CDF of the Beta
/// distribution at `x`.
pub fn beta_cdf(beta: &BetaParams, x: f64) -> f64 {
    beta_reg(
        beta.alpha_pos.max(MIN_ALPHA),
        beta.alpha_neg.max(MIN_ALPHA),
        x.clamp(0.0, 1.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    const TOL: f64 = 1e-9;

    fn prior() -> PriorConfig {
        PriorConfig::default()
    }

    fn assert_opinion_eq(got: &Opinion, want: &Opinion, tol: f64) {
        assert!(
            (got.belief - want.belief).abs() <= tol
                && (got.disbelief - want.disbelief).abs() <= tol
                && (got.uncertainty - want.uncertainty).abs() <= tol
                && (got.base_rate - want.base_rate).abs() <= tol,
            "got {got:?}, want {want:?}"
        );
    }

    fn random_opinion(rng: &mut impl Rng) -> Opinion {
        // Dirichlet-ish draw over (b, d, u) with u bounded away from zero.
        let b: f64 = rng.gen::<f64>();
        let d: f64 = rng.gen::<f64>() * (1.0 - b);
        let u = 1.0 - b - d;
        let a = rng.gen_range(0.05..0.95);
        if u < 1e-6 {
            Opinion::new(b - 1e-6, d, u + 1e-6, a).unwrap()
        } else {
            Opinion::new(b, d, u, a).unwrap()
        }
    }

    #[test]
    fn counts_seven_of_ten() {
        let op = Opinion::from_counts(ObservationCounts::new(7, 3), &prior());
        assert_opinion_eq(
            &op,
            &Opinion::new(7.0 / 12.0, 3.0 / 12.0, 2.0 / 12.0, 0.5).unwrap(),
            TOL,
        );
        let beta = op.to_beta(2.0);
        assert!((beta.alpha_pos - 8.0).abs() < TOL && (beta.alpha_neg - 4.0).abs() < TOL);
    }

    #[test]
    fn counts_zero_evidence_is_vacuous() {
        let op = Opinion::from_counts(ObservationCounts::new(0, 0), &prior());
        assert_opinion_eq(&op, &Opinion::vacuous(), TOL);
    }

    #[test]
    fn counts_all_positive() {
        let op = Opinion::from_counts(ObservationCounts::new(10, 0), &prior());
        assert_opinion_eq(
            &op,
            &Opinion::new(10.0 / 12.0, 0.0, 2.0 / 12.0, 0.5).unwrap(),
            TOL,
        );
    }

    #[test]
    fn beta_to_opinion_examples() {
        let op = Opinion::from_beta(&BetaParams::new(2.0, 2.0).unwrap(), 0.5, 2.0).unwrap();
        assert_opinion_eq(&op, &Opinion::new(0.25, 0.25, 0.5, 0.5).unwrap(), TOL);

        let op = Opinion::from_beta(&BetaParams::new(1.0, 1.0).unwrap(), 0.5, 2.0).unwrap();
        assert_opinion_eq(&op, &Opinion::vacuous(), TOL);

        let op = Opinion::from_beta(&BetaParams::new(8.0, 4.0).unwrap(), 0.5, 2.0).unwrap();
        assert_opinion_eq(
            &op,
            &Opinion::new(7.0 / 12.0, 0.25, 1.0 / 6.0, 0.5).unwrap(),
            TOL,
        );
    }

    #[test]
    fn beta_to_opinion_rejects_sub_prior_evidence() {
        let res = Opinion::from_beta(&BetaParams::new(0.5, 0.5).unwrap(), 0.5, 2.0);
        assert!(res.is_err());
    }

    #[test]
    fn opinion_to_beta_examples() {
        let beta = Opinion::vacuous().to_beta(2.0);
        assert!((beta.alpha_pos - 1.0).abs() < TOL && (beta.alpha_neg - 1.0).abs() < TOL);

        let op = Opinion::new(7.0 / 12.0, 3.0 / 12.0, 2.0 / 12.0, 0.5).unwrap();
        let beta = op.to_beta(2.0);
        assert!((beta.alpha_pos - 8.0).abs() < 1e-8 && (beta.alpha_neg - 4.0).abs() < 1e-8);

        // Dogmatic opinions land on the capped point-mass representation.
        let beta = Opinion::point_mass(0.5).to_beta(2.0);
        assert!((beta.strength() - MAX_STRENGTH).abs() < 1.0);
        assert!((beta.mean() - 0.5).abs() < TOL);
    }

    #[test]
    fn projected_probability_examples() {
        assert!((Opinion::vacuous().projected() - 0.5).abs() < TOL);
        assert!((Opinion::new(1.0, 0.0, 0.0, 1.0).unwrap().projected() - 1.0).abs() < TOL);
        let op = Opinion::new(7.0 / 12.0, 3.0 / 12.0, 2.0 / 12.0, 0.5).unwrap();
        assert!((op.projected() - 2.0 / 3.0).abs() < TOL);
    }

    #[test]
    fn mean_variance_examples() {
        let (m, v) = Opinion::vacuous().mean_variance(2.0);
        assert!((m - 0.5).abs() < TOL && (v - 0.25 / 3.0).abs() < TOL);

        let op = Opinion::from_beta(&BetaParams::new(2.0, 4.0).unwrap(), 0.5, 2.0).unwrap();
        let (m, v) = op.mean_variance(2.0);
        assert!((m - 1.0 / 3.0).abs() < TOL && (v - 2.0 / 63.0).abs() < TOL);

        let (m, v) = Opinion::point_mass(0.3).mean_variance(2.0);
        assert!((m - 0.3).abs() < TOL);
        assert!(v >= 0.0 && v <= 1.0 / MAX_STRENGTH);
    }

    #[test]
    fn mean_matches_beta_mean() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let op = random_opinion(&mut rng);
            let beta = op.to_beta(2.0);
            assert!((op.projected() - beta.mean()).abs() < 1e-12);
        }
    }

    #[test]
    fn moment_match_examples() {
        let op = moment_match(2.0 / 3.0, 4.0 / 63.0, &prior()).unwrap();
        let beta = op.to_beta(2.0);
        assert!((beta.alpha_pos - 2.0).abs() < 1e-8 && (beta.alpha_neg - 1.0).abs() < 1e-8);

        let op = moment_match(0.5, 1.0 / 12.0, &prior()).unwrap();
        assert_opinion_eq(&op, &Opinion::vacuous(), TOL);

        let op = moment_match(0.375, 0.039375, &prior()).unwrap();
        let beta = op.to_beta(2.0);
        assert!((beta.alpha_pos - 1.8571428571).abs() < 1e-6);
        assert!((beta.alpha_neg - 3.0952380952).abs() < 1e-6);
    }

    #[test]
    fn moment_match_errors_and_degeneracies() {
        assert!(moment_match(1.5, 0.1, &prior()).is_err());
        assert!(moment_match(-0.5, 0.1, &prior()).is_err());
        let op = moment_match(0.25, 0.0, &prior()).unwrap();
        assert!(op.is_dogmatic() && (op.projected() - 0.25).abs() < TOL);
    }

    #[test]
    fn moment_match_preserves_mean_and_floors_variance() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        for _ in 0..1000 {
            let mean: f64 = rng.gen_range(0.01..0.99);
            let var: f64 = rng.gen::<f64>() * mean * (1.0 - mean);
            let op = moment_match(mean, var, &prior()).unwrap();
            assert!((op.projected() - mean).abs() < 1e-12);
            let (_, v) = op.mean_variance(2.0);
            // Matched variance never exceeds the requested one beyond the floor.
            assert!(v <= var + 1e-12);
        }
    }

    #[test]
    fn complement_examples() {
        let op = Opinion::new(0.3, 0.5, 0.2, 0.2).unwrap();
        assert_opinion_eq(
            &op.complement(),
            &Opinion::new(0.5, 0.3, 0.2, 0.8).unwrap(),
            TOL,
        );
        assert_opinion_eq(&Opinion::vacuous().complement(), &Opinion::vacuous(), TOL);
        assert_opinion_eq(
            &Opinion::new(1.0, 0.0, 0.0, 1.0).unwrap().complement(),
            &Opinion::new(0.0, 1.0, 0.0, 0.0).unwrap(),
            TOL,
        );
        assert_opinion_eq(&op.complement().complement(), &op, TOL);
    }

    #[test]
    fn sl_sum_example() {
        let x = Opinion::new(0.3, 0.5, 0.2, 0.2).unwrap();
        let y = Opinion::new(0.2, 0.6, 0.2, 0.3).unwrap();
        let z = sl_sum(&x, &y).unwrap();
        assert_opinion_eq(&z, &Opinion::new(0.5, 0.3, 0.2, 0.5).unwrap(), TOL);
    }

    #[test]
    fn sl_sum_impossible_event_limit() {
        let y = Opinion::new(0.2, 0.6, 0.2, 0.3).unwrap();
        let x = Opinion::new(0.0, 1.0, 0.0, 1e-9).unwrap();
        let z = sl_sum(&x, &y).unwrap();
        // As a_X → 0 the aggregate approaches Y's simplex.
        assert!((z.belief - y.belief).abs() < 1e-6);
        assert!((z.disbelief - y.disbelief).abs() < 1e-6);
        assert!((z.uncertainty - y.uncertainty).abs() < 1e-6);
    }

    #[test]
    fn sl_sum_of_vacuous_quarters() {
        let x = Opinion::new(0.0, 0.0, 1.0, 0.25).unwrap();
        let z = sl_sum(&x, &x).unwrap();
        assert_opinion_eq(&z, &Opinion::new(0.0, 0.0, 1.0, 0.5).unwrap(), TOL);
    }

    #[test]
    fn sl_sum_zero_base_rates_is_undefined() {
        let x = Opinion::new(0.1, 0.8, 0.1, 0.0).unwrap();
        assert!(sl_sum(&x, &x).is_err());
    }

    #[test]
    fn sl_product_identity_and_annihilator() {
        let one = Opinion::new(1.0, 0.0, 0.0, 1.0).unwrap();
        let zero = Opinion::new(0.0, 1.0, 0.0, 0.0).unwrap();
        let w = Opinion::new(0.3, 0.5, 0.2, 0.2).unwrap();
        assert_opinion_eq(&sl_product(&one, &w).unwrap(), &w, 0.0);
        assert_opinion_eq(&sl_product(&w, &one).unwrap(), &w, 0.0);
        assert_opinion_eq(&sl_product(&zero, &w).unwrap(), &zero, TOL);
    }

    #[test]
    fn sl_product_example() {
        let x = Opinion::new(0.5, 0.25, 0.25, 0.5).unwrap();
        let z = sl_product(&x, &x).unwrap();
        assert!((z.belief - 1.0 / 3.0).abs() < TOL);
        assert!((z.disbelief - 0.4375).abs() < TOL);
        assert!((z.uncertainty - (1.0 - 1.0 / 3.0 - 0.4375)).abs() < TOL);
        assert!((z.base_rate - 0.25).abs() < TOL);
    }

    #[test]
    fn sl_division_by_certainty_is_identity() {
        let one = Opinion::new(1.0, 0.0, 0.0, 1.0).unwrap();
        let x = Opinion::new(0.3, 0.5, 0.2, 0.2).unwrap();
        let z = sl_division(&x, &one).unwrap();
        assert_opinion_eq(&z, &x, TOL);
    }

    #[test]
    fn sl_division_constraint_violation() {
        // d_X < d_Y violates the applicability constraints.
        let x = Opinion::new(0.5, 0.1, 0.4, 0.2).unwrap();
        let y = Opinion::new(0.3, 0.4, 0.3, 0.5).unwrap();
        assert!(sl_division(&x, &y).is_err());
    }

    #[test]
    fn sl_division_undoes_product_on_projections() {
        let mut rng = ChaCha12Rng::seed_from_u64(37);
        let mut checked = 0;
        while checked < 200 {
            let z = random_opinion(&mut rng);
            let y = random_opinion(&mut rng);
            let x = match sl_product(&z, &y) {
                Ok(x) => x,
                Err(_) => continue,
            };
            let back = match sl_division(&x, &y) {
                Ok(b) => b,
                Err(_) => continue,
            };
            assert!(
                (back.projected() - z.projected()).abs() < 1e-6,
                "projection not recovered: {} vs {}",
                back.projected(),
                z.projected()
            );
            checked += 1;
        }
    }

    #[test]
    fn beta_sum_example() {
        let x = Opinion::from_beta(&BetaParams::new(2.0, 4.0).unwrap(), 0.5, 2.0).unwrap();
        let z = beta_sum(&x, &x, &prior());
        let beta = z.to_beta(2.0);
        assert!((beta.alpha_pos - 2.0).abs() < 1e-8 && (beta.alpha_neg - 1.0).abs() < 1e-8);
    }

    #[test]
    fn beta_sum_identity_and_point_masses() {
        let y = Opinion::from_counts(ObservationCounts::new(7, 3), &prior());
        let z = beta_sum(&Opinion::point_mass(0.0), &y, &prior());
        assert_opinion_eq(&z, &y, 1e-12);

        // Point masses carry variance μ(1−μ)/(s_max+1), so their sum is a
        // point mass up to that resolution.
        let z = beta_sum(
            &Opinion::point_mass(0.25),
            &Opinion::point_mass(0.5),
            &prior(),
        );
        assert!((z.projected() - 0.75).abs() < TOL);
        assert!(z.mean_variance(2.0).1 < 1e-11);
    }

    #[test]
    fn beta_sum_mean_and_variance_are_additive() {
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        for _ in 0..500 {
            let x = random_opinion(&mut rng);
            let y = random_opinion(&mut rng);
            let (mx, vx) = x.mean_variance(2.0);
            let (my, vy) = y.mean_variance(2.0);
            if mx + my > 1.0 {
                continue;
            }
            let z = beta_sum(&x, &y, &prior());
            let zc = beta_sum(&y, &x, &prior());
            assert_opinion_eq(&z, &zc, 1e-12);
            let (mz, vz) = z.mean_variance(2.0);
            assert!((mz - (mx + my)).abs() < 1e-12);
            assert!(vz <= vx + vy + 1e-12);
        }
    }

    #[test]
    fn beta_product_example() {
        let x = Opinion::from_beta(&BetaParams::new(2.0, 2.0).unwrap(), 0.5, 2.0).unwrap();
        let y = Opinion::from_beta(&BetaParams::new(3.0, 1.0).unwrap(), 0.5, 2.0).unwrap();
        let z = beta_product(&x, &y, &prior());
        let (m, v) = z.mean_variance(2.0);
        assert!((m - 0.375).abs() < TOL);
        assert!((v - 0.039375).abs() < TOL);
        let beta = z.to_beta(2.0);
        assert!((beta.alpha_pos - 1.8571428571).abs() < 1e-6);
        assert!((beta.alpha_neg - 3.0952380952).abs() < 1e-6);
    }

    #[test]
    fn beta_product_identity_and_annihilator() {
        let y = Opinion::from_counts(ObservationCounts::new(3, 5), &prior());
        let z = beta_product(&Opinion::point_mass(1.0), &y, &prior());
        assert_opinion_eq(&z, &y, 1e-12);
        let z = beta_product(&Opinion::point_mass(0.0), &y, &prior());
        assert!(z.is_dogmatic() && z.projected() < TOL);
    }

    #[test]
    fn beta_product_commutes_and_mean_associates() {
        let mut rng = ChaCha12Rng::seed_from_u64(43);
        for _ in 0..500 {
            let x = random_opinion(&mut rng);
            let y = random_opinion(&mut rng);
            let z = random_opinion(&mut rng);
            assert_opinion_eq(
                &beta_product(&x, &y, &prior()),
                &beta_product(&y, &x, &prior()),
                1e-12,
            );
            let left = beta_product(&beta_product(&x, &y, &prior()), &z, &prior());
            let right = beta_product(&x, &beta_product(&y, &z, &prior()), &prior());
            assert!((left.projected() - right.projected()).abs() < 1e-12);
        }
    }

    #[test]
    fn beta_division_taylor_example() {
        let x = moment_match(0.3, 0.01, &prior()).unwrap();
        let y = moment_match(0.6, 0.02, &prior()).unwrap();
        let z = beta_division(&x, &y, &prior()).unwrap();
        let (m, v) = z.mean_variance(2.0);
        assert!((m - 0.5).abs() < TOL);
        assert!((v - 1.0 / 36.0).abs() < 1e-9);
    }

    #[test]
    fn beta_division_boundary_cases() {
        let x = Opinion::from_counts(ObservationCounts::new(4, 6), &prior());
        // Query implied by evidence: X = Y degrades to a point mass near one.
        let z = beta_division(&x, &x, &prior()).unwrap();
        assert!(z.is_dogmatic() && (z.projected() - 1.0).abs() < TOL);

        // Certain evidence leaves X unchanged.
        let z = beta_division(&x, &Opinion::point_mass(1.0), &prior()).unwrap();
        assert_opinion_eq(&z, &x, 0.0);

        // Vanishing evidence mass is an error.
        assert!(beta_division(&x, &Opinion::point_mass(0.0), &prior()).is_err());
    }

    #[test]
    fn beta_division_right_inverse_on_means() {
        let mut rng = ChaCha12Rng::seed_from_u64(47);
        for _ in 0..500 {
            let z = random_opinion(&mut rng);
            let y = random_opinion(&mut rng);
            let x = beta_product(&z, &y, &prior());
            let (mx, _) = x.mean_variance(2.0);
            let (my, _) = y.mean_variance(2.0);
            if mx <= EPS_DIV || my - mx <= 1e-6 || my <= 1e-6 {
                continue;
            }
            let back = beta_division(&x, &y, &prior()).unwrap();
            assert!((back.projected() - z.projected()).abs() < TOL);
        }
    }

    #[test]
    fn distributivity_bound_examples() {
        let x = Opinion::from_beta(&BetaParams::new(2.0, 2.0).unwrap(), 0.5, 2.0).unwrap();
        let bound = distributivity_error_bound(&x, &x, &x, 2.0);
        assert!((bound - 0.025 / 0.055).abs() < 1e-9);

        let pm = Opinion::point_mass(0.3);
        let bound = distributivity_error_bound(&pm, &x, &x, 2.0);
        assert!(bound < 1e-9);

        let zero = Opinion::point_mass(0.0);
        let bound = distributivity_error_bound(&x, &zero, &zero, 2.0);
        assert!(bound.abs() < 1e-12);
    }

    #[test]
    fn quantile_examples() {
        let uniform = BetaParams::new(1.0, 1.0).unwrap();
        assert!((beta_quantile(&uniform, 0.25) - 0.25).abs() < 1e-9);
        let sym = BetaParams::new(2.0, 2.0).unwrap();
        assert!((beta_quantile(&sym, 0.5) - 0.5).abs() < 1e-9);
        // CDF of Beta(2, 1) is x².
        let b21 = BetaParams::new(2.0, 1.0).unwrap();
        assert!((beta_quantile(&b21, 0.25) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn quantile_monotone_and_round_trips() {
        let mut rng = ChaCha12Rng::seed_from_u64(53);
        for _ in 0..200 {
            let beta = BetaParams::new(rng.gen_range(0.5..50.0), rng.gen_range(0.5..50.0)).unwrap();
            let p1: f64 = rng.gen_range(0.001..0.999);
            let p2: f64 = rng.gen_range(0.001..0.999);
            let (plo, phi) = if p1 < p2 { (p1, p2) } else { (p2, p1) };
            let qlo = beta_quantile(&beta, plo);
            let qhi = beta_quantile(&beta, phi);
            assert!(qlo <= qhi + 1e-15);
            assert!((beta_cdf(&beta, qlo) - plo).abs() <= 1e-10);
            assert!((beta_cdf(&beta, qhi) - phi).abs() <= 1e-10);
        }
    }

    #[test]
    fn round_trip_opinion_beta() {
        let mut rng = ChaCha12Rng::seed_from_u64(59);
        for _ in 0..1000 {
            let op = random_opinion(&mut rng);
            let back = Opinion::from_beta(&op.to_beta(2.0), op.base_rate, 2.0).unwrap();
            assert_opinion_eq(&back, &op, TOL);
        }
    }
}
