//! Pluggable label algebras ("parametrisations"): a carrier set with sum,
//! product, division, neutral elements and a negation labelling.
//!
//! [`ProbSemiring`] is a genuine commutative semiring. [`SlSemiring`] and
//! [`BetaSemiring`] obey the semiring laws only on projected probabilities;
//! their uncertainty components are order-sensitive, so every fold over
//! labels happens in a canonical order fixed by the engine.

use crate::error::{Error, Result};
use crate::opinion::{self, variance_from, Opinion, PriorConfig, EPS_DIV, MAX_STRENGTH};
use crate::program::LabelExpr;

/// Derived scalar view of a label, for reports and display.
#[derive(Clone, Copy, Debug)]
pub struct LabelSummary {
    pub mean: f64,
    pub variance: f64,
    pub opinion: Option<Opinion>,
}

/// A label algebra: carrier type, operators, neutral elements, negation.
pub trait Parametrisation {
    type Label: Clone + std::fmt::Debug;

    fn name(&self) -> &'static str;
    fn zero(&self) -> Self::Label;
    fn one(&self) -> Self::Label;
    fn plus(&self, x: &Self::Label, y: &Self::Label) -> Result<Self::Label>;
    fn times(&self, x: &Self::Label, y: &Self::Label) -> Result<Self::Label>;
    fn divide(&self, num: &Self::Label, den: &Self::Label) -> Result<Self::Label>;
    /// Label of the negated fact.
    fn negate(&self, l: &Self::Label) -> Self::Label;
    /// Injects a parsed fact label into the carrier.
    fn lift(&self, label: &LabelExpr) -> Self::Label;
    /// Exact equality with the zero element (annihilator of `times`).
    fn is_exact_zero(&self, l: &Self::Label) -> bool;
    /// Exact equality with the one element (neutral for `times`).
    fn is_exact_one(&self, l: &Self::Label) -> bool;
    fn summary(&self, l: &Self::Label) -> LabelSummary;

    /// Conditional label from the three canonical folds: the label of the
    /// query-and-evidence worlds, of all evidence worlds, and of the
    /// negated-query-and-evidence worlds.
    fn conditional(
        &self,
        numer: &Self::Label,
        evidence: &Self::Label,
        rest: &Self::Label,
    ) -> Result<Self::Label> {
        let _ = rest;
        self.divide(numer, evidence)
    }
}

/// Which parametrisation to run; the CLI flag `--semiring`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SemiringKind {
    Prob,
    Sl,
    Beta,
}

impl SemiringKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SemiringKind::Prob => "prob",
            SemiringKind::Sl => "sl",
            SemiringKind::Beta => "beta",
        }
    }
}

impl std::str::FromStr for SemiringKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prob" | "p" => Ok(SemiringKind::Prob),
            "sl" => Ok(SemiringKind::Sl),
            "beta" => Ok(SemiringKind::Beta),
            other => Err(Error::Invalid(format!(
                "unknown semiring '{other}' (expected prob, sl or beta)"
            ))),
        }
    }
}

impl std::fmt::Display for SemiringKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Exact probabilities: `⊕ = +`, `⊗ = ·`, `⊘ = /`, negation `p ↦ 1 − p`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ProbSemiring;

impl Parametrisation for ProbSemiring {
    type Label = f64;

    fn name(&self) -> &'static str {
        "prob"
    }

    fn zero(&self) -> f64 {
        0.0
    }

    fn one(&self) -> f64 {
        1.0
    }

    fn plus(&self, x: &f64, y: &f64) -> Result<f64> {
        Ok(x + y)
    }

    fn times(&self, x: &f64, y: &f64) -> Result<f64> {
        Ok(x * y)
    }

    fn divide(&self, num: &f64, den: &f64) -> Result<f64> {
        if *den <= 0.0 {
            return Err(Error::ZeroEvidence);
        }
        Ok(num / den)
    }

    fn negate(&self, l: &f64) -> f64 {
        1.0 - l
    }

    fn lift(&self, label: &LabelExpr) -> f64 {
        match label {
            LabelExpr::Prob(p) => *p,
            LabelExpr::Opinion(o) => o.projected(),
        }
    }

    fn is_exact_zero(&self, l: &f64) -> bool {
        *l == 0.0
    }

    fn is_exact_one(&self, l: &f64) -> bool {
        *l == 1.0
    }

    fn summary(&self, l: &f64) -> LabelSummary {
        LabelSummary {
            mean: *l,
            variance: 0.0,
            opinion: None,
        }
    }
}

/// Subjective-logic opinions under the standard sum, product and division
/// operators. Division falls back to the vacuous opinion when undefined.
#[derive(Clone, Copy, Debug, Default)]
pub struct SlSemiring;

impl SlSemiring {
    pub const ZERO: Opinion = Opinion {
        belief: 0.0,
        disbelief: 1.0,
        uncertainty: 0.0,
        base_rate: 0.0,
    };
    pub const ONE: Opinion = Opinion {
        belief: 1.0,
        disbelief: 0.0,
        uncertainty: 0.0,
        base_rate: 1.0,
    };
}

impl Parametrisation for SlSemiring {
    type Label = Opinion;

    fn name(&self) -> &'static str {
        "sl"
    }

    fn zero(&self) -> Opinion {
        Self::ZERO
    }

    fn one(&self) -> Opinion {
        Self::ONE
    }

    fn plus(&self, x: &Opinion, y: &Opinion) -> Result<Opinion> {
        // The zero element is neutral by definition; the closed form agrees
        // wherever it is defined but breaks down at a_X + a_Y = 0.
        if *x == Self::ZERO {
            return Ok(*y);
        }
        if *y == Self::ZERO {
            return Ok(*x);
        }
        opinion::sl_sum(x, y)
    }

    fn times(&self, x: &Opinion, y: &Opinion) -> Result<Opinion> {
        opinion::sl_product(x, y)
    }

    fn divide(&self, num: &Opinion, den: &Opinion) -> Result<Opinion> {
        // Undefined divisions take the vacuous fallback rather than failing.
        Ok(opinion::sl_division(num, den).unwrap_or_else(|_| Opinion::vacuous()))
    }

    fn negate(&self, l: &Opinion) -> Opinion {
        l.complement()
    }

    fn lift(&self, label: &LabelExpr) -> Opinion {
        match label {
            // A dogmatic opinion with base rate p; labels 0 and 1 then
            // coincide exactly with the zero and one elements.
            LabelExpr::Prob(p) => Opinion::dogmatic(*p, *p),
            LabelExpr::Opinion(o) => *o,
        }
    }

    fn is_exact_zero(&self, l: &Opinion) -> bool {
        *l == Self::ZERO
    }

    fn is_exact_one(&self, l: &Opinion) -> bool {
        *l == Self::ONE
    }

    fn summary(&self, l: &Opinion) -> LabelSummary {
        let (mean, variance) = l.mean_variance(opinion::DEFAULT_PRIOR_WEIGHT);
        LabelSummary {
            mean,
            variance,
            opinion: Some(*l),
        }
    }
}

/// A label of the moment-matching algebra: the mean and Dirichlet strength
/// of a Beta-distributed probability. Equivalent to an opinion under the
/// parametrisation's prior; strengths at [`MAX_STRENGTH`] are point masses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaLabel {
    pub mean: f64,
    pub strength: f64,
}

impl BetaLabel {
    pub fn point_mass(p: f64) -> Self {
        BetaLabel {
            mean: p,
            strength: MAX_STRENGTH,
        }
    }

    pub fn variance(&self) -> f64 {
        variance_from(self.mean, self.strength)
    }

    pub fn from_opinion(o: &Opinion, prior_weight: f64) -> Self {
        let (mean, strength) = o.mean_strength(prior_weight);
        BetaLabel { mean, strength }
    }

    pub fn to_opinion(&self, prior: &PriorConfig) -> Opinion {
        opinion::opinion_from_mean_strength(self.mean, self.strength, prior)
    }
}

/// Opinions treated as Beta-distributed variables: sum, product and
/// conditioning-division combine means and variances and re-fit a Beta
/// distribution by moment matching.
#[derive(Clone, Copy, Debug, Default)]
pub struct BetaSemiring {
    pub prior: PriorConfig,
}

impl BetaSemiring {
    pub fn new(prior: PriorConfig) -> Self {
        BetaSemiring { prior }
    }
}

impl Parametrisation for BetaSemiring {
    type Label = BetaLabel;

    fn name(&self) -> &'static str {
        "beta"
    }

    fn zero(&self) -> BetaLabel {
        BetaLabel::point_mass(0.0)
    }

    fn one(&self) -> BetaLabel {
        BetaLabel::point_mass(1.0)
    }

    fn plus(&self, x: &BetaLabel, y: &BetaLabel) -> Result<BetaLabel> {
        let (mean, strength) =
            opinion::matched_sum(x.mean, x.variance(), y.mean, y.variance(), &self.prior);
        Ok(BetaLabel { mean, strength })
    }

    fn times(&self, x: &BetaLabel, y: &BetaLabel) -> Result<BetaLabel> {
        let (mean, strength) =
            opinion::matched_product(x.mean, x.variance(), y.mean, y.variance(), &self.prior);
        Ok(BetaLabel { mean, strength })
    }

    fn divide(&self, num: &BetaLabel, den: &BetaLabel) -> Result<BetaLabel> {
        if den.mean >= 1.0 {
            // Certain evidence: the distribution is unchanged.
            return Ok(*num);
        }
        let (mean, strength) = opinion::matched_division(
            num.mean,
            num.variance(),
            den.mean,
            den.variance(),
            &self.prior,
        )?;
        Ok(BetaLabel { mean, strength })
    }

    fn negate(&self, l: &BetaLabel) -> BetaLabel {
        BetaLabel {
            mean: 1.0 - l.mean,
            strength: l.strength,
        }
    }

    fn lift(&self, label: &LabelExpr) -> BetaLabel {
        match label {
            LabelExpr::Prob(p) => BetaLabel::point_mass(*p),
            LabelExpr::Opinion(o) => BetaLabel::from_opinion(o, self.prior.weight),
        }
    }

    fn is_exact_zero(&self, l: &BetaLabel) -> bool {
        l.mean == 0.0
    }

    fn is_exact_one(&self, l: &BetaLabel) -> bool {
        l.mean == 1.0
    }

    fn summary(&self, l: &BetaLabel) -> LabelSummary {
        LabelSummary {
            mean: l.mean,
            variance: l.variance(),
            opinion: Some(l.to_opinion(&self.prior)),
        }
    }

    /// The denominator is reconstructed as `numer ⊕ rest`, so that the
    /// division variance sees the sum decomposition it assumes.
    fn conditional(
        &self,
        numer: &BetaLabel,
        _evidence: &BetaLabel,
        rest: &BetaLabel,
    ) -> Result<BetaLabel> {
        let den = self.plus(numer, rest)?;
        if den.mean <= EPS_DIV {
            return Err(Error::EvidenceMassVanishes);
        }
        self.divide(numer, &den)
    }
}

/// Left fold of labels in the given (canonical) order.
pub fn fold_plus<P: Parametrisation>(
    par: &P,
    labels: impl IntoIterator<Item = P::Label>,
) -> Result<P::Label> {
    let mut acc = par.zero();
    for l in labels {
        acc = par.plus(&acc, &l)?;
    }
    Ok(acc)
}

/// Left fold of labels under the product, in the given (canonical) order.
pub fn fold_times<P: Parametrisation>(
    par: &P,
    labels: impl IntoIterator<Item = P::Label>,
) -> Result<P::Label> {
    let mut acc = par.one();
    for l in labels {
        acc = par.times(&acc, &l)?;
    }
    Ok(acc)
}
