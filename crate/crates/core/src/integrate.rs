//! Reference oracle, true-error measurement, certified composite integration
//! and the sharpness harness.

use std::sync::OnceLock;

use crate::bounds::{certify, CertificateKind, DerivativeBand, KnownNorms, NormData, Rigor};
use crate::error::{QuadError, Result};
use crate::exec::Execution;
use crate::kernel::{build_kernel, kernel_stats_closed, RuleSpec};
use crate::poly::PiecewisePolynomial;
use crate::rules::{apply_rule, Integrand};
use crate::sum::compensated_sum;

/// Oracle tolerance used when none is given.
pub const DEFAULT_ORACLE_TOL: f64 = 1e-12;

/// Largest panel count the oracle refines to before giving up.
pub const MAX_ORACLE_PANELS: usize = 1 << 16;

const GAUSS_POINTS: usize = 15;

/// Gauss–Legendre nodes and weights on [-1, 1].
fn gauss_legendre() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GAUSS_POINTS;
        let mut rule: Vec<(f64, f64)> = (1..=n)
            .map(|i| {
                let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
                let mut dp = 0.0;
                for _ in 0..100 {
                    let (p, d) = legendre_with_derivative(n, x);
                    dp = d;
                    let dx = p / d;
                    x -= dx;
                    if dx.abs() < 1e-17 {
                        break;
                    }
                }
                let (_, d) = legendre_with_derivative(n, x);
                if d != 0.0 {
                    dp = d;
                }
                (x, 2.0 / ((1.0 - x * x) * dp * dp))
            })
            .collect();
        rule.sort_by(|a, b| a.0.total_cmp(&b.0));
        rule
    })
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

fn gauss_panel<G: Fn(f64) -> f64>(g: &G, lo: f64, hi: f64) -> f64 {
    let c = 0.5 * (lo + hi);
    let r = 0.5 * (hi - lo);
    r * compensated_sum(gauss_legendre().iter().map(|&(x, w)| w * g(c + r * x)))
}

/// Uniform panel endpoints; the last one is exactly `b`.
fn panel_bounds(a: f64, b: f64, panels: usize, i: usize) -> (f64, f64) {
    let h = (b - a) / panels as f64;
    let lo = a + h * i as f64;
    let hi = if i + 1 == panels { b } else { a + h * (i + 1) as f64 };
    (lo, hi)
}

/// `∫_a^b g` by uniform panel halving with a 15-point Gauss–Legendre rule per
/// panel. Stops when two successive levels differ by less than
/// `tol·(1 + |value|)`; the finer value is returned.
pub fn reference_integral_fn<G>(g: G, a: f64, b: f64, tol: f64, exec: Execution) -> Result<f64>
where
    G: Fn(f64) -> f64 + Sync + Send,
{
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(QuadError::validation(format!("oracle tolerance must be positive, got {tol}")));
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(QuadError::validation("oracle interval must be finite"));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return reference_integral_fn(g, b, a, tol, exec).map(|v| -v);
    }
    let level = |panels: usize| {
        let parts = exec.map_indexed(panels, |i| {
            let (lo, hi) = panel_bounds(a, b, panels, i);
            gauss_panel(&g, lo, hi)
        });
        compensated_sum(parts)
    };
    let mut panels = 1;
    let mut prev = level(panels);
    let mut change = f64::INFINITY;
    while panels < MAX_ORACLE_PANELS {
        panels *= 2;
        let cur = level(panels);
        if !cur.is_finite() {
            break;
        }
        change = (cur - prev).abs();
        if change < tol * (1.0 + cur.abs()) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(QuadError::Convergence {
        tol,
        panels,
        last_change: change,
    })
}

/// `∫_a^b f` for an [`Integrand`].
pub fn reference_integral<F: Integrand + ?Sized>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    f.require_interval(a, b)?;
    reference_integral_fn(|x| f.value(x), a, b, tol, Execution::default())
}

/// `|I - F_n|`, or `|I - F_n - perturbation|` when `perturbed` and n is even.
pub fn true_error<F: Integrand + ?Sized>(
    f: &F,
    spec: &RuleSpec,
    perturbed: bool,
    tol: f64,
) -> Result<f64> {
    let rule = apply_rule(f, spec)?;
    let exact = reference_integral(f, spec.a(), spec.b(), tol)?;
    let approx = if perturbed {
        rule.perturbed_value()
    } else {
        rule.f_n_value
    };
    Ok((exact - approx).abs())
}

/// Where composite integration gets its per-panel certificate inputs.
#[derive(Clone, Copy)]
pub enum PanelNorms<'a> {
    /// Norms and band valid on the whole interval, reused on every panel.
    /// Panel sup-norms, L¹/L² norms and bands are dominated by the global ones.
    /// So is σ: the panel values of σ plus a between-panel term sum to the
    /// global one. Endpoint rates are recomputed per panel from the integrand,
    /// and without σ the sharp certificates fall back to `‖f^(n)‖₂²`.
    Global {
        norms: NormData,
        band: Option<DerivativeBand>,
    },
    /// Exact norms recomputed on each panel.
    Known(&'a (dyn KnownNorms + Sync)),
}

impl PanelNorms<'_> {
    fn inputs<F: Integrand + ?Sized>(
        &self,
        f: &F,
        kind: CertificateKind,
        panel: &RuleSpec,
    ) -> Result<(NormData, Option<DerivativeBand>)> {
        let n = panel.n();
        match self {
            PanelNorms::Known(src) => {
                let norms = src.norm_data(n, panel.a(), panel.b())?;
                let band = src.band(n, panel.a(), panel.b())?;
                Ok((norms, Some(band)))
            }
            PanelNorms::Global { norms, band } => {
                let mut norms = *norms;
                if matches!(
                    kind,
                    CertificateKind::OneSidedOddLower
                        | CertificateKind::OneSidedOddUpper
                        | CertificateKind::PerturbedEvenLower
                        | CertificateKind::PerturbedEvenUpper
                ) {
                    f.require_order(n - 1)?;
                    let rate = (f.derivative_unchecked(n - 1, panel.b())
                        - f.derivative_unchecked(n - 1, panel.a()))
                        / panel.width();
                    norms.endpoint_diff_rate = Some(rate);
                }
                if matches!(kind, CertificateKind::SharpOdd | CertificateKind::SharpEven)
                    && norms.sigma.is_none()
                {
                    let l2 = norms.l2.ok_or_else(|| {
                        QuadError::validation("sharp certificate needs sigma or the L2 norm")
                    })?;
                    norms.sigma = Some(l2 * l2);
                }
                Ok((norms, *band))
            }
        }
    }
}

/// Result of certified composite integration.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeResult {
    pub value: f64,
    pub panels: usize,
    pub per_panel_bound: Vec<f64>,
    pub total_bound: f64,
    pub certificate_kind: CertificateKind,
    pub rigor: Rigor,
    /// Whether panel values include the perturbation term.
    pub perturbed: bool,
}

/// Composite rule on `panels` uniform sub-intervals without a certificate.
pub fn composite_value<F: Integrand + ?Sized>(
    f: &F,
    spec: &RuleSpec,
    panels: usize,
    perturbed: bool,
    exec: Execution,
) -> Result<f64> {
    if panels == 0 {
        return Err(QuadError::validation("at least one panel is required"));
    }
    let values = exec.map_indexed(panels, |i| {
        let (lo, hi) = panel_bounds(spec.a(), spec.b(), panels, i);
        let r = apply_rule(f, &spec.with_interval(lo, hi)?)?;
        Ok(if perturbed { r.perturbed_value() } else { r.f_n_value })
    });
    Ok(compensated_sum(values.into_iter().collect::<Result<Vec<_>>>()?))
}

/// Composite rule with a per-panel error budget from certificates of `kind`.
/// Kinds that certify the perturbed rule integrate with the perturbation term.
pub fn composite_integrate<F: Integrand + ?Sized>(
    f: &F,
    spec: &RuleSpec,
    panels: usize,
    kind: CertificateKind,
    norms: &PanelNorms<'_>,
) -> Result<CompositeResult> {
    composite_integrate_with(f, spec, panels, kind, norms, Execution::default())
}

pub fn composite_integrate_with<F: Integrand + ?Sized>(
    f: &F,
    spec: &RuleSpec,
    panels: usize,
    kind: CertificateKind,
    norms: &PanelNorms<'_>,
    exec: Execution,
) -> Result<CompositeResult> {
    if panels == 0 {
        return Err(QuadError::validation("at least one panel is required"));
    }
    if !kind.applies_to(spec.n()) {
        return Err(QuadError::invalid_argument(format!(
            "{kind} certificate is not defined for n = {}",
            spec.n()
        )));
    }
    let perturbed = kind.covers_perturbed_rule();
    let results = exec.map_indexed(panels, |i| -> Result<(f64, f64, Rigor)> {
        let (lo, hi) = panel_bounds(spec.a(), spec.b(), panels, i);
        let panel = spec.with_interval(lo, hi)?;
        let r = apply_rule(f, &panel)?;
        let value = if perturbed { r.perturbed_value() } else { r.f_n_value };
        let (panel_norms, band) = norms.inputs(f, kind, &panel)?;
        let cert = certify(&panel, kind, &panel_norms, band.as_ref())?;
        Ok((value, cert.bound, cert.rigor))
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let value = compensated_sum(results.iter().map(|r| r.0));
    let per_panel_bound: Vec<f64> = results.iter().map(|r| r.1).collect();
    let total_bound = compensated_sum(per_panel_bound.iter().copied());
    let rigor = if results.iter().all(|r| r.2 == Rigor::Rigorous) {
        Rigor::Rigorous
    } else {
        Rigor::HeuristicInputs
    };
    Ok(CompositeResult {
        value,
        panels,
        per_panel_bound,
        total_bound,
        certificate_kind: kind,
        rigor,
        perturbed,
    })
}

/// A piecewise polynomial with its derivatives, as an [`Integrand`].
#[derive(Debug, Clone)]
pub struct PiecewiseIntegrand {
    derivatives: Vec<PiecewisePolynomial>,
}

impl PiecewiseIntegrand {
    pub fn new(p: PiecewisePolynomial, max_order: usize) -> Self {
        let mut derivatives = vec![p];
        for _ in 0..max_order {
            let next = derivatives.last().unwrap().derivative();
            derivatives.push(next);
        }
        Self { derivatives }
    }

    pub fn polynomial(&self) -> &PiecewisePolynomial {
        &self.derivatives[0]
    }
}

impl Integrand for PiecewiseIntegrand {
    fn max_order(&self) -> usize {
        self.derivatives.len() - 1
    }

    fn domain(&self) -> (f64, f64) {
        self.derivatives[0].domain()
    }

    fn derivative_unchecked(&self, order: usize, x: f64) -> f64 {
        self.derivatives[order].eval(x).unwrap_or(f64::NAN)
    }
}

/// Largest n for which the extremal integrand is rebuilt end to end.
pub const END_TO_END_MAX_N: usize = 4;

/// An integrand whose n-th derivative is `G_n`: n continuous antiderivatives
/// of the kernel.
pub fn extremal_integrand(spec: &RuleSpec) -> Result<PiecewiseIntegrand> {
    if spec.n() > END_TO_END_MAX_N {
        return Err(QuadError::invalid_argument(format!(
            "end-to-end reconstruction is limited to n <= {END_TO_END_MAX_N}, got {}",
            spec.n()
        )));
    }
    let mut p = build_kernel(spec);
    for _ in 0..spec.n() {
        p = p.antiderivative(0.0);
    }
    Ok(PiecewiseIntegrand::new(p, spec.n()))
}

/// Direct check of the extremal integrand against the sharp bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndToEndSharpness {
    /// Measured `|I - F_n|` (perturbed for even n) of the extremal integrand.
    pub true_error: f64,
    /// `|true_error - rhs| / rhs`
    pub rel_diff: f64,
}

/// Equality witness of the sharp bound at `f^(n) = G_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharpnessReport {
    pub spec: RuleSpec,
    /// The remainder with `f^(n) = G_n`: `∫G_n²` for odd n,
    /// `∫G_n² - (∫G_n)²/(b-a)` for even n, computed from the kernel polynomial.
    pub lhs: f64,
    /// The sharp bound with `σ(G_n)` taken from the closed-form kernel statistics.
    pub rhs: f64,
    pub ratio: f64,
    pub end_to_end: Option<EndToEndSharpness>,
}

impl SharpnessReport {
    pub fn is_sharp(&self) -> bool {
        (self.ratio - 1.0).abs() <= 1e-10
    }
}

/// Identity-level sharpness check only.
pub fn sharpness_identity(spec: &RuleSpec) -> Result<SharpnessReport> {
    let g = build_kernel(spec);
    let (a, b) = (spec.a(), spec.b());
    let l2_sq = g.norm_stats(a, b)?.l2_sq;
    let lhs = if spec.is_even() {
        let mean_part = g.definite_integral(a, b)?;
        l2_sq - mean_part * mean_part / spec.width()
    } else {
        l2_sq
    };
    let sigma = kernel_stats_closed(spec).sigma(spec.width());
    let rhs = crate::bounds::bound_sharp(spec, sigma.max(0.0))?.bound;
    Ok(SharpnessReport {
        spec: *spec,
        lhs,
        rhs,
        ratio: lhs / rhs,
        end_to_end: None,
    })
}

/// Rebuild the extremal integrand (n ≤ 4) and measure its true error.
pub fn end_to_end_sharpness(spec: &RuleSpec, tol: f64) -> Result<EndToEndSharpness> {
    let f = extremal_integrand(spec)?;
    let err = true_error(&f, spec, spec.is_even(), tol)?;
    let rhs = sharpness_identity(spec)?.rhs;
    Ok(EndToEndSharpness {
        true_error: err,
        rel_diff: (err - rhs).abs() / rhs,
    })
}

/// Identity-level check for every n, plus the end-to-end path for n ≤ 4.
pub fn sharpness_check(spec: &RuleSpec) -> Result<SharpnessReport> {
    let mut report = sharpness_identity(spec)?;
    if spec.n() <= END_TO_END_MAX_N {
        report.end_to_end = Some(end_to_end_sharpness(spec, DEFAULT_ORACLE_TOL)?);
    }
    Ok(report)
}
