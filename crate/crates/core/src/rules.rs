//! The corrected three-point rule `F_n` and the even-order perturbation term.
//!
//! ```text
//! F_n = (b-a)[(1-θ) f(m) + θ (f(a)+f(b))/2]
//!     + Σ_{i=1}^{⌊(n-1)/2⌋} [1-θ(2i+1)] (b-a)^{2i+1} / ((2i+1)! 2^{2i}) · f^{(2i)}(m)
//! ```
//!
//! `∫_a^b f - F_n = (-1)^n ∫_a^b G_n f^(n)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{QuadError, Result};
use crate::kernel::{factorial, RuleSpec};
use crate::sum::compensated_sum;

/// A function together with exact derivatives up to a declared order.
///
/// Implementations must be safe to evaluate from several threads at once.
pub trait Integrand: Sync {
    /// Highest derivative order available.
    fn max_order(&self) -> usize;

    /// Interval on which the function is defined (bounds may be infinite).
    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    /// `f^(order)(x)`. Callers guarantee `order <= max_order()` and `x` in the domain.
    fn derivative_unchecked(&self, order: usize, x: f64) -> f64;

    /// `f^(order)(x)` with capability and domain checks.
    fn eval_derivative(&self, order: usize, x: f64) -> Result<f64> {
        self.require_order(order)?;
        let (lo, hi) = self.domain();
        if !(x >= lo && x <= hi) {
            return Err(QuadError::Domain { value: x, lo, hi });
        }
        Ok(self.derivative_unchecked(order, x))
    }

    fn value(&self, x: f64) -> f64 {
        self.derivative_unchecked(0, x)
    }

    fn require_order(&self, order: usize) -> Result<()> {
        if order > self.max_order() {
            return Err(QuadError::Capability {
                requested: order,
                available: self.max_order(),
            });
        }
        Ok(())
    }

    fn require_interval(&self, a: f64, b: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        for x in [a, b] {
            if !(x >= lo && x <= hi) {
                return Err(QuadError::Domain { value: x, lo, hi });
            }
        }
        Ok(())
    }
}

impl<T: Integrand + ?Sized> Integrand for &T {
    fn max_order(&self) -> usize {
        (**self).max_order()
    }
    fn domain(&self) -> (f64, f64) {
        (**self).domain()
    }
    fn derivative_unchecked(&self, order: usize, x: f64) -> f64 {
        (**self).derivative_unchecked(order, x)
    }
}

type DerivFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// An integrand assembled from one closure per derivative order.
pub struct FnIntegrand {
    derivatives: Vec<DerivFn>,
    domain: (f64, f64),
}

impl FnIntegrand {
    /// `f` itself; add derivatives with [`with_derivative`](Self::with_derivative).
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            derivatives: vec![Box::new(f)],
            domain: (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Append the next derivative order.
    pub fn with_derivative(mut self, d: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.derivatives.push(Box::new(d));
        self
    }

    pub fn on_domain(mut self, lo: f64, hi: f64) -> Self {
        self.domain = (lo, hi);
        self
    }
}

impl fmt::Debug for FnIntegrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnIntegrand")
            .field("max_order", &self.max_order())
            .field("domain", &self.domain)
            .finish()
    }
}

impl Integrand for FnIntegrand {
    fn max_order(&self) -> usize {
        self.derivatives.len() - 1
    }

    fn domain(&self) -> (f64, f64) {
        self.domain
    }

    fn derivative_unchecked(&self, order: usize, x: f64) -> f64 {
        (self.derivatives[order])(x)
    }
}

/// Value of one rule application.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureResult {
    pub spec: RuleSpec,
    /// `(b-a)[(1-θ) f(m) + θ (f(a)+f(b))/2]`
    pub base_value: f64,
    /// Correction terms for `i = 1..=⌊(n-1)/2⌋`.
    pub correction_terms: Vec<f64>,
    /// `F_n = base_value + Σ correction_terms`
    pub f_n_value: f64,
    /// Present iff n is even.
    pub perturbation_term: Option<f64>,
}

impl QuadratureResult {
    /// `F_n` plus the perturbation term when there is one.
    pub fn perturbed_value(&self) -> f64 {
        match self.perturbation_term {
            Some(p) => compensated_sum([self.f_n_value, p]),
            None => self.f_n_value,
        }
    }
}

/// Number of midpoint corrections, `⌊(n-1)/2⌋`.
pub fn correction_count(n: usize) -> usize {
    (n - 1) / 2
}

/// Midpoint correction terms of `F_n`.
pub fn correction_sum<F: Integrand + ?Sized>(f: &F, spec: &RuleSpec) -> Result<Vec<f64>> {
    let count = correction_count(spec.n());
    if count == 0 {
        return Ok(Vec::new());
    }
    f.require_order(2 * count)?;
    let m = spec.midpoint();
    f.require_interval(m, m)?;
    let w = spec.width();
    Ok((1..=count)
        .map(|i| {
            let k = 2 * i + 1;
            let coeff = (1.0 - spec.theta() * k as f64) * w.powi(k as i32)
                / (factorial(k) * 4f64.powi(i as i32));
            coeff * f.derivative_unchecked(2 * i, m)
        })
        .collect())
}

/// For `n = 2m`:
/// `(b-a)^{2m+1}/((2m)! 2^{2m}) · (1/(2m+1) - θ) · (f^{(2m-1)}(b) - f^{(2m-1)}(a))/(b-a)`.
pub fn perturbation_term<F: Integrand + ?Sized>(f: &F, spec: &RuleSpec) -> Result<f64> {
    let n = spec.n();
    if !spec.is_even() {
        return Err(QuadError::invalid_argument(format!(
            "perturbation term needs even n, got {n}"
        )));
    }
    f.require_order(n - 1)?;
    f.require_interval(spec.a(), spec.b())?;
    let w = spec.width();
    let rate = (f.derivative_unchecked(n - 1, spec.b()) - f.derivative_unchecked(n - 1, spec.a())) / w;
    let coeff = w.powi(n as i32 + 1) / (factorial(n) * 2f64.powi(n as i32))
        * (1.0 / (n as f64 + 1.0) - spec.theta());
    Ok(coeff * rate)
}

/// Apply `F_n` to `f` on the spec's interval.
pub fn apply_rule<F: Integrand + ?Sized>(f: &F, spec: &RuleSpec) -> Result<QuadratureResult> {
    let (a, b) = (spec.a(), spec.b());
    f.require_interval(a, b)?;
    let m = spec.midpoint();
    let theta = spec.theta();
    let base_value =
        spec.width() * ((1.0 - theta) * f.value(m) + theta * 0.5 * (f.value(a) + f.value(b)));
    let correction_terms = correction_sum(f, spec)?;
    let f_n_value = compensated_sum(std::iter::once(base_value).chain(correction_terms.iter().copied()));
    let perturbation_term = if spec.is_even() {
        Some(perturbation_term(f, spec)?)
    } else {
        None
    };
    Ok(QuadratureResult {
        spec: *spec,
        base_value,
        correction_terms,
        f_n_value,
        perturbation_term,
    })
}

/// Named family members.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RulePreset {
    Midpoint,
    Trapezoid,
    Simpson,
    Averaged,
}

impl RulePreset {
    pub const ALL: [RulePreset; 4] = [
        RulePreset::Midpoint,
        RulePreset::Trapezoid,
        RulePreset::Simpson,
        RulePreset::Averaged,
    ];

    pub fn theta(self) -> f64 {
        match self {
            RulePreset::Midpoint => 0.0,
            RulePreset::Trapezoid => 1.0,
            RulePreset::Simpson => 1.0 / 3.0,
            RulePreset::Averaged => 0.5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RulePreset::Midpoint => "midpoint",
            RulePreset::Trapezoid => "trapezoid",
            RulePreset::Simpson => "simpson",
            RulePreset::Averaged => "averaged",
        }
    }
}

impl FromStr for RulePreset {
    type Err = QuadError;

    fn from_str(s: &str) -> Result<Self> {
        RulePreset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                QuadError::validation(format!(
                    "unknown rule '{s}' (expected midpoint, trapezoid, simpson or averaged)"
                ))
            })
    }
}

/// θ of a named rule.
pub fn preset(name: &str) -> Result<f64> {
    name.parse::<RulePreset>().map(RulePreset::theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(theta: f64, n: usize) -> RuleSpec {
        RuleSpec::new(theta, n, 0.0, 1.0).unwrap()
    }

    fn square() -> FnIntegrand {
        FnIntegrand::new(|x| x * x)
            .with_derivative(|x| 2.0 * x)
            .with_derivative(|_| 2.0)
            .with_derivative(|_| 0.0)
    }

    fn cube() -> FnIntegrand {
        FnIntegrand::new(|x| x * x * x)
            .with_derivative(|x| 3.0 * x * x)
            .with_derivative(|x| 6.0 * x)
            .with_derivative(|_| 6.0)
    }

    #[test]
    fn no_corrections_for_small_n() {
        for theta in [0.0, 0.3, 1.0] {
            assert!(correction_sum(&square(), &spec(theta, 2)).unwrap().is_empty());
            assert!(correction_sum(&square(), &spec(theta, 1)).unwrap().is_empty());
        }
    }

    #[test]
    fn trapezoid_correction_for_cubic() {
        let c = correction_sum(&cube(), &spec(1.0, 3)).unwrap();
        assert_eq!(c.len(), 1);
        assert_relative_eq!(c[0], -0.25, max_relative = 1e-15);
    }

    #[test]
    fn simpson_first_correction_vanishes() {
        let f = FnIntegrand::new(f64::exp)
            .with_derivative(f64::exp)
            .with_derivative(f64::exp)
            .with_derivative(f64::exp);
        let c = correction_sum(&f, &spec(1.0 / 3.0, 4)).unwrap();
        assert!(c[0].abs() < 1e-16);
    }

    #[test]
    fn insufficient_order_is_a_capability_error() {
        let f = FnIntegrand::new(|x| x);
        assert!(matches!(
            correction_sum(&f, &spec(0.0, 3)),
            Err(QuadError::Capability { requested: 2, available: 0 })
        ));
    }

    #[test]
    fn constant_is_reproduced() {
        let f = FnIntegrand::new(|_| 4.5)
            .with_derivative(|_| 0.0)
            .with_derivative(|_| 0.0)
            .with_derivative(|_| 0.0)
            .with_derivative(|_| 0.0)
            .with_derivative(|_| 0.0);
        for n in 1..=5 {
            for theta in [0.0, 0.25, 1.0 / 3.0, 1.0] {
                assert_relative_eq!(apply_rule(&f, &spec(theta, n)).unwrap().f_n_value, 4.5);
            }
        }
    }

    #[test]
    fn midpoint_on_square() {
        let r = apply_rule(&square(), &spec(0.0, 2)).unwrap();
        assert_eq!(r.f_n_value, 0.25);
        assert!(r.correction_terms.is_empty());
        assert_relative_eq!(r.perturbation_term.unwrap(), 1.0 / 12.0, max_relative = 1e-15);
        assert_relative_eq!(r.perturbed_value(), 1.0 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn trapezoid_with_correction_is_exact_for_cubic() {
        let r = apply_rule(&cube(), &spec(1.0, 3)).unwrap();
        assert_eq!(r.base_value, 0.5);
        assert_relative_eq!(r.f_n_value, 0.25, max_relative = 1e-15);
        assert!(r.perturbation_term.is_none());
    }

    #[test]
    fn perturbation_examples() {
        assert_relative_eq!(
            perturbation_term(&square(), &spec(1.0, 2)).unwrap(),
            -1.0 / 6.0,
            max_relative = 1e-15
        );
        assert!(perturbation_term(&square(), &spec(1.0 / 3.0, 2)).unwrap().abs() < 1e-16);
        assert!(matches!(
            perturbation_term(&square(), &spec(0.0, 3)),
            Err(QuadError::InvalidArgument(_))
        ));
    }

    #[test]
    fn presets() {
        assert_eq!(preset("midpoint").unwrap(), 0.0);
        assert_eq!(preset("trapezoid").unwrap(), 1.0);
        assert_eq!(preset("simpson").unwrap(), 1.0 / 3.0);
        assert_eq!(preset("averaged").unwrap(), 0.5);
        assert!(matches!(preset("boole"), Err(QuadError::Validation(_))));
    }

    #[test]
    fn domain_is_enforced() {
        let f = FnIntegrand::new(f64::ln).on_domain(0.0, f64::INFINITY);
        let s = RuleSpec::new(0.5, 1, -1.0, 1.0).unwrap();
        assert!(matches!(apply_rule(&f, &s), Err(QuadError::Domain { .. })));
        assert!(f.eval_derivative(1, 1.0).is_err());
    }
}
