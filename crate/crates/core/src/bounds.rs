//! A-priori error certificates for the corrected rule.
//!
//! Every certificate bounds `|I - F_n|`, or for the even-order perturbed
//! variants `|I - F_{2m} - perturbation|`, in terms of one piece of
//! information about `f^(n)`: an L¹, L² or L∞ norm, a two-sided band
//! `γ ≤ f^(n) ≤ Γ`, one band edge plus the endpoint rate
//! `(f^(n-1)(b) - f^(n-1)(a))/(b-a)`, or the variance functional σ.
//!
//! Certificates never compute norms themselves. The provenance of the inputs
//! travels with the certificate as its [`Rigor`].

use std::fmt;
use std::str::FromStr;

use log::warn;

use crate::error::{QuadError, Result};
use crate::exec::Execution;
use crate::integrate::reference_integral_fn;
use crate::kernel::{centered_bracket, factorial, l2_bracket, RuleSpec};
use crate::rules::Integrand;

/// `γ ≤ f^(order) ≤ Γ` on the interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeBand {
    /// γ
    pub lower: f64,
    /// Γ
    pub upper: f64,
    pub order: usize,
}

impl DerivativeBand {
    pub fn new(lower: f64, upper: f64, order: usize) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) {
            return Err(QuadError::validation("band edges must be finite"));
        }
        if lower > upper {
            return Err(QuadError::validation(format!(
                "band lower edge {lower} exceeds upper edge {upper}"
            )));
        }
        Ok(Self {
            lower,
            upper,
            order,
        })
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Where norm values came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Provenance {
    /// Computed analytically from a known closed form.
    Exact,
    /// Supplied by the caller, who vouches for them.
    #[default]
    UserSupplied,
    /// Estimated by sampling; not a guarantee.
    SampledHeuristic,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::Exact => "exact",
            Provenance::UserSupplied => "user-supplied",
            Provenance::SampledHeuristic => "sampled-heuristic",
        }
    }
}

/// Norm information about `f^(n)` on an interval.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NormData {
    /// `‖f^(n)‖₁`
    pub l1: Option<f64>,
    /// `‖f^(n)‖₂`
    pub l2: Option<f64>,
    /// `‖f^(n)‖∞`
    pub linf: Option<f64>,
    /// `(f^(n-1)(b) - f^(n-1)(a))/(b-a)`, any sign.
    pub endpoint_diff_rate: Option<f64>,
    /// `σ(f^(n))`
    pub sigma: Option<f64>,
    pub provenance: Provenance,
}

impl NormData {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("l1", self.l1),
            ("l2", self.l2),
            ("linf", self.linf),
            ("sigma", self.sigma),
        ] {
            if let Some(v) = v {
                check_norm(name, v)?;
            }
        }
        if let Some(r) = self.endpoint_diff_rate {
            if !r.is_finite() {
                return Err(QuadError::validation("endpoint rate must be finite"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rigor {
    Rigorous,
    HeuristicInputs,
}

impl Rigor {
    pub fn name(self) -> &'static str {
        match self {
            Rigor::Rigorous => "rigorous",
            Rigor::HeuristicInputs => "heuristic-inputs",
        }
    }
}

impl From<Provenance> for Rigor {
    fn from(p: Provenance) -> Self {
        match p {
            Provenance::SampledHeuristic => Rigor::HeuristicInputs,
            Provenance::Exact | Provenance::UserSupplied => Rigor::Rigorous,
        }
    }
}

/// Which band edge a one-sided certificate uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

/// The inequality that produced a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CertificateKind {
    L1,
    L2,
    Linf,
    BandOdd,
    OneSidedOddLower,
    OneSidedOddUpper,
    PerturbedEvenLower,
    PerturbedEvenUpper,
    SharpOdd,
    SharpEven,
}

impl CertificateKind {
    pub const ALL: [CertificateKind; 10] = [
        CertificateKind::L1,
        CertificateKind::L2,
        CertificateKind::Linf,
        CertificateKind::BandOdd,
        CertificateKind::OneSidedOddLower,
        CertificateKind::OneSidedOddUpper,
        CertificateKind::PerturbedEvenLower,
        CertificateKind::PerturbedEvenUpper,
        CertificateKind::SharpOdd,
        CertificateKind::SharpEven,
    ];

    /// True when the certified quantity is `|I - F_{2m} - perturbation|`.
    pub fn covers_perturbed_rule(self) -> bool {
        matches!(
            self,
            CertificateKind::PerturbedEvenLower
                | CertificateKind::PerturbedEvenUpper
                | CertificateKind::SharpEven
        )
    }

    /// Whether the certificate is defined for remainder order `n`.
    pub fn applies_to(self, n: usize) -> bool {
        let odd = n % 2 == 1;
        match self {
            CertificateKind::L1 | CertificateKind::L2 | CertificateKind::Linf => true,
            CertificateKind::BandOdd
            | CertificateKind::OneSidedOddLower
            | CertificateKind::OneSidedOddUpper
            | CertificateKind::SharpOdd => odd,
            CertificateKind::PerturbedEvenLower
            | CertificateKind::PerturbedEvenUpper
            | CertificateKind::SharpEven => !odd,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CertificateKind::L1 => "l1",
            CertificateKind::L2 => "l2",
            CertificateKind::Linf => "linf",
            CertificateKind::BandOdd => "band-odd",
            CertificateKind::OneSidedOddLower => "one-sided-odd-lower",
            CertificateKind::OneSidedOddUpper => "one-sided-odd-upper",
            CertificateKind::PerturbedEvenLower => "perturbed-even-lower",
            CertificateKind::PerturbedEvenUpper => "perturbed-even-upper",
            CertificateKind::SharpOdd => "sharp-odd",
            CertificateKind::SharpEven => "sharp-even",
        }
    }
}

impl fmt::Display for CertificateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CertificateKind {
    type Err = QuadError;

    fn from_str(s: &str) -> Result<Self> {
        CertificateKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| QuadError::validation(format!("unknown certificate kind '{s}'")))
    }
}

/// Certificate kinds defined for order `n`, in [`CertificateKind::ALL`] order.
pub fn applicable_kinds(n: usize) -> Vec<CertificateKind> {
    CertificateKind::ALL
        .into_iter()
        .filter(|k| k.applies_to(n))
        .collect()
}

/// The values a certificate consumed.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CertificateInputs {
    /// Only the fields the certificate actually used are set.
    pub norms: NormData,
    pub band: Option<DerivativeBand>,
    pub band_edge: Option<(Side, f64)>,
}

/// An a-priori bound on the quadrature error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorCertificate {
    pub bound: f64,
    pub kind: CertificateKind,
    pub spec: RuleSpec,
    pub inputs: CertificateInputs,
    pub covers_perturbed_rule: bool,
    pub rigor: Rigor,
}

impl ErrorCertificate {
    fn new(spec: &RuleSpec, kind: CertificateKind, bound: f64, inputs: CertificateInputs) -> Self {
        Self {
            bound: bound.max(0.0),
            kind,
            spec: *spec,
            inputs,
            covers_perturbed_rule: kind.covers_perturbed_rule(),
            rigor: Rigor::from(inputs.norms.provenance),
        }
    }

    fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.inputs.norms.provenance = provenance;
        self.rigor = Rigor::from(provenance);
        self
    }
}

fn check_norm(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(QuadError::validation(format!(
            "{name} must be a finite non-negative number, got {v}"
        )));
    }
    Ok(())
}

fn require_odd(spec: &RuleSpec, what: &str) -> Result<()> {
    if spec.is_even() {
        return Err(QuadError::invalid_argument(format!(
            "{what} needs odd n, got {}",
            spec.n()
        )));
    }
    Ok(())
}

fn require_even(spec: &RuleSpec, what: &str) -> Result<()> {
    if !spec.is_even() {
        return Err(QuadError::invalid_argument(format!(
            "{what} needs even n, got {}",
            spec.n()
        )));
    }
    Ok(())
}

/// `(b-a)^{power} / (n! 2^n)`, with a possibly fractional power.
fn kernel_scale(spec: &RuleSpec, power: f64) -> f64 {
    spec.width().powf(power) / (factorial(spec.n()) * 2f64.powi(spec.n() as i32))
}

/// Dimensionless factor of `max|G_n|` in units of `(b-a)^n/(n! 2^n)`, with the
/// case split written on `1 < θn ≤ θ+1` and `θn ≤ 1`. For n = 1 the factor is
/// `max{1-θ, θ}`.
fn max_kernel_factor(theta: f64, n: usize) -> f64 {
    if n == 1 {
        return (1.0 - theta).max(theta);
    }
    let nf = n as f64;
    let tn = theta * nf;
    let interior = theta.powi(n as i32) * (nf - 1.0).powi(n as i32 - 1);
    if tn > theta + 1.0 {
        tn - 1.0
    } else if tn > 1.0 {
        interior
    } else {
        (1.0 - tn).max(interior)
    }
}

/// Dimensionless factor of `∫|G_n|` in units of `(b-a)^{n+1}/((n+1)! 2^n)`.
fn abs_kernel_factor(theta: f64, n: usize) -> f64 {
    let nf = n as f64;
    if theta * nf >= 1.0 {
        theta * (nf + 1.0) - 1.0
    } else {
        2.0 * theta.powi(n as i32 + 1) * nf.powi(n as i32) - theta * (nf + 1.0) + 1.0
    }
}

/// `√[(θ²n²(2n+1) − θ(4n²−1) + (2n−1)) / ((2n+1)(2n−1))]`
fn l2_factor(theta: f64, n: usize) -> f64 {
    let nf = n as f64;
    (l2_bracket(theta, n) / ((2.0 * nf + 1.0) * (2.0 * nf - 1.0)))
        .max(0.0)
        .sqrt()
}

/// The variance-reduced L² factor for `n = 2m`.
fn sharp_even_factor(theta: f64, m: usize) -> f64 {
    let mf = m as f64;
    let shift = 1.0 / (2.0 * mf + 1.0) - theta;
    let k = 16.0 * mf * mf - 1.0;
    ((l2_bracket(theta, 2 * m) - k * shift * shift) / ((4.0 * mf + 1.0) * (4.0 * mf - 1.0)))
        .max(0.0)
        .sqrt()
}

/// `max|G_n| · ‖f^(n)‖₁`
pub fn bound_l1(spec: &RuleSpec, norm1: f64) -> Result<ErrorCertificate> {
    check_norm("L1 norm", norm1)?;
    let bound = kernel_scale(spec, spec.n() as f64) * max_kernel_factor(spec.theta(), spec.n()) * norm1;
    let inputs = CertificateInputs {
        norms: NormData {
            l1: Some(norm1),
            ..NormData::default()
        },
        ..CertificateInputs::default()
    };
    Ok(ErrorCertificate::new(spec, CertificateKind::L1, bound, inputs))
}

/// `‖G_n‖₂ · ‖f^(n)‖₂`
pub fn bound_l2(spec: &RuleSpec, norm2: f64) -> Result<ErrorCertificate> {
    check_norm("L2 norm", norm2)?;
    let bound = kernel_scale(spec, spec.n() as f64 + 0.5) * l2_factor(spec.theta(), spec.n()) * norm2;
    let inputs = CertificateInputs {
        norms: NormData {
            l2: Some(norm2),
            ..NormData::default()
        },
        ..CertificateInputs::default()
    };
    Ok(ErrorCertificate::new(spec, CertificateKind::L2, bound, inputs))
}

/// `∫|G_n| · ‖f^(n)‖∞`
pub fn bound_linf(spec: &RuleSpec, norminf: f64) -> Result<ErrorCertificate> {
    check_norm("L-infinity norm", norminf)?;
    let bound = abs_kernel_term(spec) * norminf;
    let inputs = CertificateInputs {
        norms: NormData {
            linf: Some(norminf),
            ..NormData::default()
        },
        ..CertificateInputs::default()
    };
    Ok(ErrorCertificate::new(spec, CertificateKind::Linf, bound, inputs))
}

/// `(b-a)^{n+1}/((n+1)! 2^n) × factor`
fn abs_kernel_term(spec: &RuleSpec) -> f64 {
    let n = spec.n();
    spec.width().powi(n as i32 + 1) / (factorial(n + 1) * 2f64.powi(n as i32))
        * abs_kernel_factor(spec.theta(), n)
}

/// Odd n: `(Γ-γ)/2 · ∫|G_n|`.
pub fn bound_band_odd(spec: &RuleSpec, band: &DerivativeBand) -> Result<ErrorCertificate> {
    require_odd(spec, "two-sided band certificate")?;
    let band = DerivativeBand::new(band.lower, band.upper, band.order)?;
    if band.order != spec.n() {
        return Err(QuadError::validation(format!(
            "band is for derivative order {} but n = {}",
            band.order,
            spec.n()
        )));
    }
    let bound = 0.5 * band.width() * abs_kernel_term(spec);
    let inputs = CertificateInputs {
        band: Some(band),
        ..CertificateInputs::default()
    };
    Ok(ErrorCertificate::new(spec, CertificateKind::BandOdd, bound, inputs))
}

/// Checks the side precondition and returns `|rate - edge|`. Violations smaller
/// than 1e-12 relative are treated as rounding.
fn one_sided_gap(side: Side, band_edge: f64, rate: f64) -> Result<f64> {
    if !(band_edge.is_finite() && rate.is_finite()) {
        return Err(QuadError::validation("band edge and rate must be finite"));
    }
    let gap = match side {
        Side::Lower => rate - band_edge,
        Side::Upper => band_edge - rate,
    };
    let slack = 1e-12 * band_edge.abs().max(rate.abs()).max(1.0);
    if gap < -slack {
        let msg = match side {
            Side::Lower => format!("lower edge {band_edge} exceeds the endpoint rate {rate}"),
            Side::Upper => format!("upper edge {band_edge} is below the endpoint rate {rate}"),
        };
        return Err(QuadError::validation(msg));
    }
    Ok(gap.max(0.0))
}

/// Odd n: `max|G_n| · ∫|f^(n) - edge|`, where the integral equals
/// `(b-a)·|rate - edge|` because `f^(n) - edge` has constant sign.
pub fn bound_one_sided_odd(
    spec: &RuleSpec,
    side: Side,
    band_edge: f64,
    endpoint_diff_rate: f64,
) -> Result<ErrorCertificate> {
    require_odd(spec, "one-sided certificate")?;
    let gap = one_sided_gap(side, band_edge, endpoint_diff_rate)?;
    let bound = gap
        * kernel_scale(spec, spec.n() as f64 + 1.0)
        * max_kernel_factor(spec.theta(), spec.n());
    let kind = match side {
        Side::Lower => CertificateKind::OneSidedOddLower,
        Side::Upper => CertificateKind::OneSidedOddUpper,
    };
    let inputs = CertificateInputs {
        norms: NormData {
            endpoint_diff_rate: Some(endpoint_diff_rate),
            ..NormData::default()
        },
        band_edge: Some((side, band_edge)),
        ..CertificateInputs::default()
    };
    Ok(ErrorCertificate::new(spec, kind, bound, inputs))
}

/// Even n = 2m, bounds the perturbed rule:
/// `max|G_{2m} - mean G_{2m}| · (b-a)·|rate - edge|`.
pub fn bound_perturbed_even(
    spec: &RuleSpec,
    side: Side,
    band_edge: f64,
    endpoint_diff_rate: f64,
) -> Result<ErrorCertificate> {
    require_even(spec, "perturbed certificate")?;
    let gap = one_sided_gap(side, band_edge, endpoint_diff_rate)?;
    let bound = gap
        * kernel_scale(spec, spec.n() as f64 + 1.0)
        * centered_bracket(spec.theta(), spec.n() / 2);
    let kind = match side {
        Side::Lower => CertificateKind::PerturbedEvenLower,
        Side::Upper => CertificateKind::PerturbedEvenUpper,
    };
    let inputs = CertificateInputs {
        norms: NormData {
            endpoint_diff_rate: Some(endpoint_diff_rate),
            ..NormData::default()
        },
        band_edge: Some((side, band_edge)),
        ..CertificateInputs::default()
    };
    Ok(ErrorCertificate::new(spec, kind, bound, inputs))
}

/// `√σ(G_n) · √σ(f^(n))`. Odd n bounds `|I - F_n|`; even n bounds the
/// perturbed rule.
pub fn bound_sharp(spec: &RuleSpec, sigma: f64) -> Result<ErrorCertificate> {
    check_norm("sigma", sigma)?;
    let n = spec.n();
    let (factor, kind) = if spec.is_even() {
        (sharp_even_factor(spec.theta(), n / 2), CertificateKind::SharpEven)
    } else {
        (l2_factor(spec.theta(), n), CertificateKind::SharpOdd)
    };
    let bound = kernel_scale(spec, n as f64 + 0.5) * factor * sigma.sqrt();
    let inputs = CertificateInputs {
        norms: NormData {
            sigma: Some(sigma),
            ..NormData::default()
        },
        ..CertificateInputs::default()
    };
    Ok(ErrorCertificate::new(spec, kind, bound, inputs))
}

fn missing(kind: CertificateKind, what: &str) -> QuadError {
    QuadError::validation(format!("{kind} certificate needs {what}"))
}

/// Build a certificate of the requested kind from norm and band data,
/// carrying the data's provenance through to the certificate's rigor.
pub fn certify(
    spec: &RuleSpec,
    kind: CertificateKind,
    norms: &NormData,
    band: Option<&DerivativeBand>,
) -> Result<ErrorCertificate> {
    norms.validate()?;
    if !kind.applies_to(spec.n()) {
        return Err(QuadError::invalid_argument(format!(
            "{kind} certificate is not defined for n = {}",
            spec.n()
        )));
    }
    let rate = || norms.endpoint_diff_rate.ok_or_else(|| missing(kind, "the endpoint rate"));
    let band = || band.ok_or_else(|| missing(kind, "a derivative band"));
    let cert = match kind {
        CertificateKind::L1 => bound_l1(spec, norms.l1.ok_or_else(|| missing(kind, "an L1 norm"))?),
        CertificateKind::L2 => bound_l2(spec, norms.l2.ok_or_else(|| missing(kind, "an L2 norm"))?),
        CertificateKind::Linf => bound_linf(
            spec,
            norms.linf.ok_or_else(|| missing(kind, "an L-infinity norm"))?,
        ),
        CertificateKind::BandOdd => bound_band_odd(spec, band()?),
        CertificateKind::OneSidedOddLower => {
            bound_one_sided_odd(spec, Side::Lower, band()?.lower, rate()?)
        }
        CertificateKind::OneSidedOddUpper => {
            bound_one_sided_odd(spec, Side::Upper, band()?.upper, rate()?)
        }
        CertificateKind::PerturbedEvenLower => {
            bound_perturbed_even(spec, Side::Lower, band()?.lower, rate()?)
        }
        CertificateKind::PerturbedEvenUpper => {
            bound_perturbed_even(spec, Side::Upper, band()?.upper, rate()?)
        }
        CertificateKind::SharpOdd | CertificateKind::SharpEven => {
            bound_sharp(spec, norms.sigma.ok_or_else(|| missing(kind, "sigma"))?)
        }
    }?;
    Ok(cert.with_provenance(norms.provenance))
}

/// Every certificate defined for `spec.n()` that the data supports.
pub fn all_certificates(
    spec: &RuleSpec,
    norms: &NormData,
    band: Option<&DerivativeBand>,
) -> Result<Vec<ErrorCertificate>> {
    applicable_kinds(spec.n())
        .into_iter()
        .map(|k| certify(spec, k, norms, band))
        .collect()
}

/// Sources that know the exact norms of their own derivatives.
pub trait KnownNorms {
    /// Norms of `f^(order)` on `[a, b]`, `order ≥ 1`.
    fn norm_data(&self, order: usize, a: f64, b: f64) -> Result<NormData>;

    /// Tight band `[min f^(order), max f^(order)]` on `[a, b]`.
    fn band(&self, order: usize, a: f64, b: f64) -> Result<DerivativeBand>;
}

impl<T: KnownNorms + ?Sized> KnownNorms for &T {
    fn norm_data(&self, order: usize, a: f64, b: f64) -> Result<NormData> {
        (**self).norm_data(order, a, b)
    }
    fn band(&self, order: usize, a: f64, b: f64) -> Result<DerivativeBand> {
        (**self).band(order, a, b)
    }
}

/// `σ(f^(order)) = ‖g‖₂² - (∫g)²/(b-a)` computed with the reference oracle.
/// Clamped at zero; a clearly negative raw value is logged since it means the
/// oracle tolerance is too loose.
pub fn sigma_functional<F: Integrand + ?Sized>(
    f: &F,
    order: usize,
    a: f64,
    b: f64,
    oracle_tol: f64,
) -> Result<f64> {
    f.require_order(order)?;
    f.require_interval(a, b)?;
    if !(a < b) {
        return Err(QuadError::validation(format!("interval must satisfy a < b, got [{a}, {b}]")));
    }
    let exec = Execution::default();
    let g = |x: f64| f.derivative_unchecked(order, x);
    let sq = reference_integral_fn(|x| g(x).powi(2), a, b, oracle_tol, exec)?;
    let mean_part = reference_integral_fn(g, a, b, oracle_tol, exec)?;
    let raw = sq - mean_part * mean_part / (b - a);
    if raw < -1e-12 * sq {
        warn!("sigma functional evaluated to {raw:e} (< 0); oracle tolerance {oracle_tol:e} is likely too loose");
    }
    Ok(raw.max(0.0))
}

/// Heuristic norms of `f^(order)` from `samples` uniform sub-intervals
/// (trapezoid sums and grid maxima). Marked [`Provenance::SampledHeuristic`].
pub fn sampled_norm_data<F: Integrand + ?Sized>(
    f: &F,
    order: usize,
    a: f64,
    b: f64,
    samples: usize,
) -> Result<NormData> {
    f.require_order(order)?;
    f.require_interval(a, b)?;
    if samples == 0 || !(a < b) {
        return Err(QuadError::validation("sampling needs a < b and at least one sub-interval"));
    }
    let h = (b - a) / samples as f64;
    let g: Vec<f64> = (0..=samples)
        .map(|i| f.derivative_unchecked(order, if i == samples { b } else { a + h * i as f64 }))
        .collect();
    let trap = |vals: &mut dyn Iterator<Item = f64>| {
        let v: Vec<f64> = vals.collect();
        h * (crate::sum::compensated_sum(v.iter().copied()) - 0.5 * (v[0] + v[v.len() - 1]))
    };
    let l1 = trap(&mut g.iter().map(|v| v.abs()));
    let l2_sq = trap(&mut g.iter().map(|v| v * v));
    let mean_part = trap(&mut g.iter().copied());
    let rate = if order >= 1 {
        Some((f.derivative_unchecked(order - 1, b) - f.derivative_unchecked(order - 1, a)) / (b - a))
    } else {
        None
    };
    Ok(NormData {
        l1: Some(l1),
        l2: Some(l2_sq.sqrt()),
        linf: Some(g.iter().fold(0.0, |m: f64, v| m.max(v.abs()))),
        endpoint_diff_rate: rate,
        sigma: Some((l2_sq - mean_part * mean_part / (b - a)).max(0.0)),
        provenance: Provenance::SampledHeuristic,
    })
}
