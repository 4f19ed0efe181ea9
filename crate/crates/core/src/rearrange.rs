//! Exact rearrangement calculus on measure-weighted sample collections and
//! step profiles.
//!
//! A [`WeightedSamples`] collection is a nonnegative function given by cell
//! values and positive cell measures. Its decreasing rearrangement, increasing
//! rearrangement and distribution function are all [`StepProfile`]s: right
//! continuous piecewise-constant functions of the measure variable. All
//! integrals of step profiles are evaluated in closed form per interval, so
//! the classical identities (equimeasurability, norm preservation,
//! Hardy-Littlewood, the L^p contraction) hold up to accumulation rounding
//! and are asserted at 1e-12 relative tolerance.

use serde::Serialize;
use thiserror::Error;

use crate::numeric::{csum, CompensatedSum};

#[derive(Debug, Error, PartialEq)]
pub enum RearrangeError {
    #[error("empty domain")]
    EmptyDomain,
    #[error("sample values must be nonnegative and finite (index {0})")]
    InvalidValue(usize),
    #[error("sample weights must be positive and finite (index {0})")]
    InvalidWeight(usize),
    #[error("step lengths must be positive and finite")]
    InvalidStep,
    #[error("profile values violate declared monotonicity")]
    MonotonicityViolation,
    #[error("p must be >= 1, got {0}")]
    InvalidExponent(f64),
    #[error("Lorentz parameters must be positive and finite")]
    InvalidLorentzParams,
    #[error("requires decreasing rearrangement")]
    RequiresDecreasing,
    #[error("mismatched cell structure")]
    MismatchedStructure,
}

/// Monotonicity class of a step profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Monotonicity {
    Nonincreasing,
    Nondecreasing,
    /// Pseudo-rearrangements carry no monotonicity guarantee.
    None,
}

/// Lorentz space indices (p, q), both finite and positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzParams {
    p: f64,
    q: f64,
}

impl LorentzParams {
    pub fn new(p: f64, q: f64) -> Result<Self, RearrangeError> {
        if !(p.is_finite() && q.is_finite() && p > 0.0 && q > 0.0) {
            return Err(RearrangeError::InvalidLorentzParams);
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

/// A nonnegative function sampled on cells of positive measure.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSamples {
    values: Vec<f64>,
    weights: Vec<f64>,
    total_measure: f64,
}

impl WeightedSamples {
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self, RearrangeError> {
        if values.is_empty() || values.len() != weights.len() {
            return Err(RearrangeError::EmptyDomain);
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 {
                return Err(RearrangeError::InvalidValue(i));
            }
        }
        for (i, w) in weights.iter().enumerate() {
            if !w.is_finite() || *w <= 0.0 {
                return Err(RearrangeError::InvalidWeight(i));
            }
        }
        let total_measure = csum(weights.iter().copied());
        Ok(Self { values, weights, total_measure })
    }

    /// All cells share one measure.
    pub fn uniform(values: Vec<f64>, cell_measure: f64) -> Result<Self, RearrangeError> {
        let n = values.len();
        Self::new(values, vec![cell_measure; n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_measure(&self) -> f64 {
        self.total_measure
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Integral of the sampled function: sum of value times cell measure.
    pub fn integral(&self) -> f64 {
        csum(self.values.iter().zip(&self.weights).map(|(v, w)| v * w))
    }

    /// L^p norm evaluated directly on the samples.
    pub fn lp_norm(&self, p: f64) -> Result<f64, RearrangeError> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(RearrangeError::InvalidExponent(p));
        }
        let s = csum(self.values.iter().zip(&self.weights).map(|(v, w)| v.powf(p) * w));
        Ok(s.powf(1.0 / p))
    }

    /// Cells sorted by descending value (ties kept in index order), merged
    /// into groups of equal value with compensated group measures.
    ///
    /// The same grouping backs the decreasing rearrangement and the
    /// distribution function, so the two stay bitwise consistent.
    fn sorted_groups(&self) -> Vec<(f64, f64)> {
        let mut order: Vec<usize> = (0..self.values.len()).collect();
        order.sort_by(|&a, &b| {
            self.values[b]
                .partial_cmp(&self.values[a])
                .unwrap()
                .then(a.cmp(&b))
        });
        let mut groups: Vec<(f64, f64)> = Vec::new();
        let mut i = 0;
        while i < order.len() {
            let v = self.values[order[i]];
            let mut len = CompensatedSum::new();
            while i < order.len() && self.values[order[i]] == v {
                len.add(self.weights[order[i]]);
                i += 1;
            }
            groups.push((v, len.total()));
        }
        groups
    }

    /// The decreasing rearrangement: values sorted descending and laid out
    /// over cumulative measure.
    pub fn decreasing_rearrangement(&self) -> StepProfile {
        StepProfile::from_groups(self.sorted_groups(), Monotonicity::Nonincreasing)
    }

    /// The increasing rearrangement, i.e. the decreasing one reflected about
    /// half the total measure.
    pub fn increasing_rearrangement(&self) -> StepProfile {
        self.decreasing_rearrangement().reflected()
    }

    /// The distribution function `t -> |{ f > t }|` as a nonincreasing step
    /// profile on `[0, max value]`.
    pub fn distribution_function(&self) -> Result<StepProfile, RearrangeError> {
        Ok(distribution_from_groups(self.sorted_groups()))
    }
}

/// One constant piece of a step profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub value: f64,
    pub len: f64,
}

/// Right-continuous piecewise-constant function on `[0, total_measure]`.
///
/// Interval lengths are the primary data; breakpoints are compensated prefix
/// sums cached at construction. Adjacent intervals with equal value are
/// merged, which makes structural equality meaningful.
#[derive(Debug, Clone, PartialEq)]
pub struct StepProfile {
    steps: Vec<Step>,
    breaks: Vec<f64>,
    monotonicity: Monotonicity,
}

impl StepProfile {
    pub fn new(pairs: Vec<(f64, f64)>, monotonicity: Monotonicity) -> Result<Self, RearrangeError> {
        if pairs.is_empty() {
            return Err(RearrangeError::EmptyDomain);
        }
        for &(v, len) in &pairs {
            if !len.is_finite() || len <= 0.0 {
                return Err(RearrangeError::InvalidStep);
            }
            if !v.is_finite() || v < 0.0 {
                return Err(RearrangeError::InvalidValue(0));
            }
        }
        let profile = Self::from_groups(pairs, monotonicity);
        match monotonicity {
            Monotonicity::Nonincreasing if !profile.values_nonincreasing() => {
                Err(RearrangeError::MonotonicityViolation)
            }
            Monotonicity::Nondecreasing if !profile.values_nondecreasing() => {
                Err(RearrangeError::MonotonicityViolation)
            }
            _ => Ok(profile),
        }
    }

    /// Construction from already-validated (value, length) groups.
    fn from_groups(pairs: Vec<(f64, f64)>, monotonicity: Monotonicity) -> Self {
        let mut steps: Vec<Step> = Vec::with_capacity(pairs.len());
        for (value, len) in pairs {
            match steps.last_mut() {
                Some(last) if last.value == value => last.len += len,
                _ => steps.push(Step { value, len }),
            }
        }
        let mut breaks = Vec::with_capacity(steps.len() + 1);
        let mut acc = CompensatedSum::new();
        breaks.push(0.0);
        for s in &steps {
            acc.add(s.len);
            breaks.push(acc.total());
        }
        Self { steps, breaks, monotonicity }
    }

    pub fn constant(value: f64, measure: f64) -> Result<Self, RearrangeError> {
        Self::new(vec![(value, measure)], Monotonicity::Nonincreasing)
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn monotonicity(&self) -> Monotonicity {
        self.monotonicity
    }

    pub fn total_measure(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    pub fn max_value(&self) -> f64 {
        self.steps.iter().map(|s| s.value).fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.steps.iter().map(|s| s.value).fold(f64::INFINITY, f64::min)
    }

    /// Segments as `(lo, hi, value)` triples.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.steps
            .iter()
            .enumerate()
            .map(|(i, s)| (self.breaks[i], self.breaks[i + 1], s.value))
    }

    pub fn values_nonincreasing(&self) -> bool {
        self.steps.windows(2).all(|w| w[1].value <= w[0].value)
    }

    pub fn values_nondecreasing(&self) -> bool {
        self.steps.windows(2).all(|w| w[1].value >= w[0].value)
    }

    /// Right-continuous evaluation. Beyond the total measure a nonincreasing
    /// profile returns 0 and a nondecreasing one its last value.
    pub fn value_at(&self, s: f64) -> f64 {
        let s = s.max(0.0);
        if s >= self.total_measure() {
            return match self.monotonicity {
                Monotonicity::Nondecreasing => self.steps.last().unwrap().value,
                _ => 0.0,
            };
        }
        // partition_point returns the first break > s; the step index is one less.
        let idx = self.breaks.partition_point(|&b| b <= s);
        self.steps[idx.saturating_sub(1).min(self.steps.len() - 1)].value
    }

    /// Integral over the whole domain.
    pub fn integral(&self) -> f64 {
        csum(self.steps.iter().map(|s| s.value * s.len))
    }

    /// Integral over `[0, s]`.
    pub fn cumulative_at(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.total_measure());
        let mut acc = CompensatedSum::new();
        for (lo, hi, v) in self.segments() {
            if s <= lo {
                break;
            }
            acc.add(v * (s.min(hi) - lo));
        }
        acc.total()
    }

    /// `(sum of value^p * length)^(1/p)` for `p >= 1`.
    pub fn lp_norm(&self, p: f64) -> Result<f64, RearrangeError> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(RearrangeError::InvalidExponent(p));
        }
        let s = csum(self.steps.iter().map(|s| s.value.powf(p) * s.len));
        Ok(s.powf(1.0 / p))
    }

    /// Lorentz quasi-norm `( ∫_0^∞ [t^{1/p} g(t)]^q dt/t )^{1/q}` of a
    /// nonincreasing profile, evaluated in closed form per interval.
    pub fn lorentz_norm(&self, params: LorentzParams) -> Result<f64, RearrangeError> {
        if !self.values_nonincreasing() {
            return Err(RearrangeError::RequiresDecreasing);
        }
        let alpha = params.q / params.p;
        let mut acc = CompensatedSum::new();
        for (lo, hi, v) in self.segments() {
            if v == 0.0 {
                continue;
            }
            let piece = if alpha == 1.0 {
                hi - lo
            } else {
                (hi.powf(alpha) - lo.powf(alpha)) / alpha
            };
            acc.add(v.powf(params.q) * piece);
        }
        Ok(acc.total().powf(1.0 / params.q))
    }

    /// Profile with the measure axis reversed; flips the monotonicity class.
    pub fn reflected(&self) -> StepProfile {
        let pairs: Vec<(f64, f64)> = self.steps.iter().rev().map(|s| (s.value, s.len)).collect();
        let mono = match self.monotonicity {
            Monotonicity::Nonincreasing => Monotonicity::Nondecreasing,
            Monotonicity::Nondecreasing => Monotonicity::Nonincreasing,
            Monotonicity::None => Monotonicity::None,
        };
        Self::from_groups(pairs, mono)
    }

    /// Groups of this profile viewed as samples `(value, interval length)`,
    /// sorted by descending value with ties merged.
    fn sorted_value_groups(&self) -> Vec<(f64, f64)> {
        let mut order: Vec<usize> = (0..self.steps.len()).collect();
        order.sort_by(|&a, &b| {
            self.steps[b]
                .value
                .partial_cmp(&self.steps[a].value)
                .unwrap()
                .then(a.cmp(&b))
        });
        let mut groups: Vec<(f64, f64)> = Vec::new();
        let mut i = 0;
        while i < order.len() {
            let v = self.steps[order[i]].value;
            let mut len = CompensatedSum::new();
            while i < order.len() && self.steps[order[i]].value == v {
                len.add(self.steps[order[i]].len);
                i += 1;
            }
            groups.push((v, len.total()));
        }
        groups
    }

    /// Decreasing rearrangement of the profile itself.
    pub fn decreasing_rearrangement(&self) -> StepProfile {
        StepProfile::from_groups(self.sorted_value_groups(), Monotonicity::Nonincreasing)
    }

    /// Distribution function of the profile, `t -> |{ g > t }|`.
    pub fn distribution_function(&self) -> StepProfile {
        distribution_from_groups(self.sorted_value_groups())
    }
}

/// Distribution function from descending (value, measure) groups: measures of
/// superlevel sets laid out over the value axis.
fn distribution_from_groups(groups: Vec<(f64, f64)>) -> StepProfile {
    // Prefix measures over the descending groups.
    let mut prefix = Vec::with_capacity(groups.len());
    let mut acc = CompensatedSum::new();
    for &(_, len) in &groups {
        acc.add(len);
        prefix.push(acc.total());
    }
    // Ascending in t: on [v_{j+1}, v_j) the superlevel measure is prefix_j.
    // Cells of value zero never enter a superlevel set.
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    let mut t_lo = 0.0;
    for j in (0..groups.len()).rev() {
        let (v, _) = groups[j];
        if v <= t_lo {
            continue;
        }
        pairs.push((prefix[j], v - t_lo));
        t_lo = v;
    }
    if pairs.is_empty() {
        // Identically zero function: empty superlevel sets for every t > 0.
        // Represent as the zero profile on a unit value interval.
        pairs.push((0.0, 1.0));
    }
    StepProfile::from_groups(pairs, Monotonicity::Nonincreasing)
}

fn check_same_structure(f: &WeightedSamples, g: &WeightedSamples) -> Result<(), RearrangeError> {
    if f.len() != g.len() || f.weights != g.weights {
        return Err(RearrangeError::MismatchedStructure);
    }
    Ok(())
}

/// `∫ a(s) b(s) ds` over the common domain of two step profiles.
pub fn product_integral(a: &StepProfile, b: &StepProfile) -> f64 {
    let end = a.total_measure().min(b.total_measure());
    let mut acc = CompensatedSum::new();
    let mut i = 0;
    let mut j = 0;
    let mut s = 0.0;
    while s < end && i < a.steps.len() && j < b.steps.len() {
        let hi = a.breaks[i + 1].min(b.breaks[j + 1]).min(end);
        acc.add(a.steps[i].value * b.steps[j].value * (hi - s));
        if a.breaks[i + 1] <= hi {
            i += 1;
        }
        if b.breaks[j + 1] <= hi {
            j += 1;
        }
        s = hi;
    }
    acc.total()
}

fn abs_diff_lp(a: &StepProfile, b: &StepProfile, p: f64) -> f64 {
    let end = a.total_measure().min(b.total_measure());
    let mut acc = CompensatedSum::new();
    let mut i = 0;
    let mut j = 0;
    let mut s = 0.0;
    while s < end && i < a.steps.len() && j < b.steps.len() {
        let hi = a.breaks[i + 1].min(b.breaks[j + 1]).min(end);
        acc.add((a.steps[i].value - b.steps[j].value).abs().powf(p) * (hi - s));
        if a.breaks[i + 1] <= hi {
            i += 1;
        }
        if b.breaks[j + 1] <= hi {
            j += 1;
        }
        s = hi;
    }
    acc.total().powf(1.0 / p)
}

/// Both Hardy-Littlewood integrals around the raw pairing.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HardyLittlewoodCheck {
    /// `∫ f* g_*`, the oppositely ordered pairing.
    pub lower: f64,
    /// `∫ |f g|` in the raw cell pairing.
    pub middle: f64,
    /// `∫ f* g*`, the similarly ordered pairing.
    pub upper: f64,
    pub holds: bool,
}

/// Evaluates `∫ f* g_* <= ∫ |f g| <= ∫ f* g*` for samples on one cell
/// structure. The verdict allows accumulation rounding.
pub fn hardy_littlewood_check(
    f: &WeightedSamples,
    g: &WeightedSamples,
) -> Result<HardyLittlewoodCheck, RearrangeError> {
    check_same_structure(f, g)?;
    let fd = f.decreasing_rearrangement();
    let gd = g.decreasing_rearrangement();
    let gi = gd.reflected();
    let lower = product_integral(&fd, &gi);
    let upper = product_integral(&fd, &gd);
    let middle = csum(
        f.values
            .iter()
            .zip(&g.values)
            .zip(&f.weights)
            .map(|((a, b), w)| a * b * w),
    );
    let tol = 1e-12 * (1.0 + lower.abs().max(middle.abs()).max(upper.abs()));
    let holds = lower <= middle + tol && middle <= upper + tol;
    Ok(HardyLittlewoodCheck { lower, middle, upper, holds })
}

/// Left and right side of the rearrangement contraction inequality in L^p.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ContractionCheck {
    /// `||f* - g*||_p`
    pub lhs: f64,
    /// `||f - g||_p`
    pub rhs: f64,
    pub holds: bool,
}

/// Evaluates `||f* - g*||_p <= ||f - g||_p` on one cell structure.
pub fn contraction_check(
    f: &WeightedSamples,
    g: &WeightedSamples,
    p: f64,
) -> Result<ContractionCheck, RearrangeError> {
    check_same_structure(f, g)?;
    if !(p.is_finite() && p >= 1.0) {
        return Err(RearrangeError::InvalidExponent(p));
    }
    let lhs = abs_diff_lp(&f.decreasing_rearrangement(), &g.decreasing_rearrangement(), p);
    let rhs = csum(
        f.values
            .iter()
            .zip(&g.values)
            .zip(&f.weights)
            .map(|((a, b), w)| (a - b).abs().powf(p) * w),
    )
    .powf(1.0 / p);
    let tol = 1e-12 * (1.0 + lhs.abs().max(rhs.abs()));
    Ok(ContractionCheck { lhs, rhs, holds: lhs <= rhs + tol })
}

/// Pseudo-rearrangement of `f` along the superlevel family of the ordering
/// field `u`.
///
/// The nested family between superlevel sets is completed by sorting cells on
/// descending `u` with ties broken by cell index, so the output is
/// deterministic. The result is the density of `s -> ∫_{D(s)} f`: a step
/// profile of total measure `|Ω|` with no monotonicity guarantee.
pub fn pseudo_rearrangement(
    f: &WeightedSamples,
    ordering: &WeightedSamples,
) -> Result<StepProfile, RearrangeError> {
    check_same_structure(f, ordering)?;
    let mut order: Vec<usize> = (0..f.len()).collect();
    order.sort_by(|&a, &b| {
        ordering.values[b]
            .partial_cmp(&ordering.values[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let pairs: Vec<(f64, f64)> = order
        .into_iter()
        .map(|i| (f.values[i], f.weights[i]))
        .collect();
    Ok(StepProfile::from_groups(pairs, Monotonicity::None))
}
