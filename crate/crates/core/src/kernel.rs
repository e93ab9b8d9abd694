//! The Peano kernel `G_n` of the θ-family and its closed-form statistics.
//!
//! On `[a, m]` (`m` the midpoint, `h = (b - a)/2`) the kernel is
//! `P_n(x) = (x-a)^{n-1}/n! · (x - a - θ n h)` and on `[m, b]` it is
//! `Q_n(x) = (x-b)^{n-1}/n! · (x - b + θ n h)`. Both halves are Appell
//! sequences (`P_n' = P_{n-1}`), which is what makes the corrected rule's
//! remainder equal `(-1)^n ∫ G_n f^(n)`.
//!
//! The closed forms below are independent of [`build_kernel`]; the
//! `*_brute_force` functions recompute the same statistics from the
//! piecewise polynomial so the two routes can be checked against each other.

use crate::error::{QuadError, Result};
use crate::poly::{multiply, shifted_power, PiecewisePolynomial};

/// One member of the rule family: blend parameter θ, remainder order n and
/// integration interval `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleSpec {
    theta: f64,
    n: usize,
    a: f64,
    b: f64,
}

impl RuleSpec {
    pub fn new(theta: f64, n: usize, a: f64, b: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(QuadError::validation(format!(
                "theta must lie in [0, 1], got {theta}"
            )));
        }
        if n == 0 {
            return Err(QuadError::validation("n must be at least 1"));
        }
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(QuadError::validation(format!(
                "interval must satisfy a < b, got [{a}, {b}]"
            )));
        }
        Ok(Self { theta, n, a, b })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn is_even(&self) -> bool {
        self.n % 2 == 0
    }

    /// Same θ and n on another interval.
    pub fn with_interval(&self, a: f64, b: f64) -> Result<Self> {
        Self::new(self.theta, self.n, a, b)
    }

    /// Same θ and interval, another order.
    pub fn with_order(&self, n: usize) -> Result<Self> {
        Self::new(self.theta, n, self.a, self.b)
    }
}

/// Closed-form statistics of `G_n` over `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelStats {
    /// `∫ G_n`
    pub integral: f64,
    /// `∫ |G_n|`
    pub abs_integral: f64,
    /// `max |G_n|`
    pub max_abs: f64,
    /// `∫ G_n²`
    pub l2_sq: f64,
    /// `max |G_n - mean(G_n)|`, only for even n.
    pub centered_max_abs: Option<f64>,
}

impl KernelStats {
    /// `σ(G_n) = ∫G_n² - (∫G_n)²/(b - a)`.
    pub fn sigma(&self, width: f64) -> f64 {
        self.l2_sq - self.integral * self.integral / width
    }
}

/// `k!` as a floating product (exact through 22!, correctly rounded well beyond).
pub fn factorial(k: usize) -> f64 {
    (2..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// Piecewise representation of `G_n` on `[a, m] ∪ [m, b]`.
pub fn build_kernel(spec: &RuleSpec) -> PiecewisePolynomial {
    let n = spec.n;
    let h = 0.5 * spec.width();
    let shift = spec.theta * n as f64 * h;
    let nf = factorial(n);

    let mut left = vec![0.0; n + 1];
    left[n - 1] = -shift / nf;
    left[n] = 1.0 / nf;

    let right: Vec<f64> = multiply(&shifted_power(-h, n - 1), &[shift - h, 1.0])
        .into_iter()
        .map(|c| c / nf)
        .collect();

    PiecewisePolynomial::new(vec![spec.a, spec.midpoint(), spec.b], vec![left, right])
        .expect("kernel segments are well formed for a valid spec")
}

/// `(b-a)^k / (n! 2^n)`
fn scale(spec: &RuleSpec, power: usize) -> f64 {
    spec.width().powi(power as i32) / (factorial(spec.n) * 2f64.powi(spec.n as i32))
}

/// `∫ G_n`: zero for odd n.
pub fn kernel_integral_closed(spec: &RuleSpec) -> f64 {
    if !spec.is_even() {
        return 0.0;
    }
    let n = spec.n as f64;
    scale(spec, spec.n + 1) * (1.0 / (n + 1.0) - spec.theta)
}

/// `∫ |G_n|`, branching on `θn ≥ 1`.
pub fn kernel_abs_integral_closed(spec: &RuleSpec) -> f64 {
    let n = spec.n as f64;
    let tn = spec.theta * n;
    if tn >= 1.0 {
        scale(spec, spec.n + 1) * (spec.theta - 1.0 / (n + 1.0))
    } else {
        scale(spec, spec.n + 1) / (n * (n + 1.0))
            * (2.0 * tn.powi(spec.n as i32 + 1) - tn * (n + 1.0) + n)
    }
}

/// `max |G_n|`; n = 1 has its own branch.
pub fn kernel_max_abs_closed(spec: &RuleSpec) -> f64 {
    let theta = spec.theta;
    if spec.n == 1 {
        return (1.0 - theta).max(theta) * spec.width() / 2.0;
    }
    let n = spec.n as f64;
    let tn = theta * n;
    let interior = theta.powi(spec.n as i32) * (n - 1.0).powi(spec.n as i32 - 1);
    let factor = if tn > theta + 1.0 {
        tn - 1.0
    } else if tn >= 1.0 {
        interior
    } else {
        (1.0 - tn).max(interior)
    };
    factor * scale(spec, spec.n)
}

/// The bracket `θ²n²(2n+1) − θ(4n²−1) + (2n−1)` shared by the L² results.
pub(crate) fn l2_bracket(theta: f64, n: usize) -> f64 {
    let n = n as f64;
    theta * theta * n * n * (2.0 * n + 1.0) - theta * (4.0 * n * n - 1.0) + (2.0 * n - 1.0)
}

/// `∫ G_n²`
pub fn kernel_l2_sq_closed(spec: &RuleSpec) -> f64 {
    let n = spec.n as f64;
    let nf = factorial(spec.n);
    l2_bracket(spec.theta, spec.n) * spec.width().powi(2 * spec.n as i32 + 1)
        / ((2.0 * n + 1.0) * (2.0 * n - 1.0) * nf * nf * 2f64.powi(2 * spec.n as i32))
}

/// Bracket of the centered maximum for `n = 2m` (multiply by `(b-a)^{2m}/((2m)! 2^{2m})`).
pub(crate) fn centered_bracket(theta: f64, m: usize) -> f64 {
    let two_m = 2.0 * m as f64;
    let edge = theta - 1.0 / (two_m + 1.0);
    let mid = theta * (two_m - 1.0) - two_m / (two_m + 1.0);
    if theta * (two_m - 1.0) >= 1.0 {
        edge.max(mid)
    } else {
        let dip = edge - theta.powi(2 * m as i32) * (two_m - 1.0).powi(2 * m as i32 - 1);
        edge.abs().max(mid.abs()).max(dip.abs())
    }
}

/// `max |G_{2m} - (1/(b-a)) ∫ G_{2m}|`, defined for even n only.
pub fn kernel_centered_max_closed(spec: &RuleSpec) -> Result<f64> {
    if !spec.is_even() {
        return Err(QuadError::invalid_argument(format!(
            "centered kernel maximum needs even n, got {}",
            spec.n
        )));
    }
    Ok(centered_bracket(spec.theta, spec.n / 2) * scale(spec, spec.n))
}

/// All closed-form statistics at once.
pub fn kernel_stats_closed(spec: &RuleSpec) -> KernelStats {
    KernelStats {
        integral: kernel_integral_closed(spec),
        abs_integral: kernel_abs_integral_closed(spec),
        max_abs: kernel_max_abs_closed(spec),
        l2_sq: kernel_l2_sq_closed(spec),
        centered_max_abs: kernel_centered_max_closed(spec).ok(),
    }
}

/// The same statistics recomputed from [`build_kernel`] by exact piecewise
/// integration, root isolation and critical-point search.
pub fn kernel_stats_brute_force(spec: &RuleSpec) -> KernelStats {
    let g = build_kernel(spec);
    let (a, b) = (spec.a, spec.b);
    let integral = g.definite_integral(a, b).expect("kernel domain");
    let norms = g.norm_stats(a, b).expect("kernel domain");
    let centered_max_abs = spec.is_even().then(|| {
        g.add_constant(-integral / spec.width())
            .norm_stats(a, b)
            .expect("kernel domain")
            .max_abs
    });
    KernelStats {
        integral,
        abs_integral: norms.l1,
        max_abs: norms.max_abs,
        l2_sq: norms.l2_sq,
        centered_max_abs,
    }
}

/// Closed forms next to their brute-force counterparts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelCrossCheck {
    pub spec: RuleSpec,
    pub closed: KernelStats,
    pub brute: KernelStats,
    /// Largest relative disagreement over all statistics. Relative to the
    /// statistic itself, or to `abs_integral` for the signed integral (which is
    /// zero for odd n).
    pub max_rel_diff: f64,
}

fn rel_diff(x: f64, y: f64, floor: f64) -> f64 {
    let d = (x - y).abs();
    if d == 0.0 {
        0.0
    } else {
        d / x.abs().max(y.abs()).max(floor)
    }
}

pub fn cross_check(spec: &RuleSpec) -> KernelCrossCheck {
    let closed = kernel_stats_closed(spec);
    let brute = kernel_stats_brute_force(spec);
    let mut worst = [
        rel_diff(closed.integral, brute.integral, closed.abs_integral),
        rel_diff(closed.abs_integral, brute.abs_integral, 0.0),
        rel_diff(closed.max_abs, brute.max_abs, 0.0),
        rel_diff(closed.l2_sq, brute.l2_sq, 0.0),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    if let (Some(c), Some(bf)) = (closed.centered_max_abs, brute.centered_max_abs) {
        worst = worst.max(rel_diff(c, bf, 0.0));
    }
    KernelCrossCheck {
        spec: *spec,
        closed,
        brute,
        max_rel_diff: worst,
    }
}
