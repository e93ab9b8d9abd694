//! Built-in integrands with exact derivatives and exact derivative norms.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use crate::bounds::{DerivativeBand, KnownNorms, NormData, Provenance};
use crate::error::{QuadError, Result};
use crate::kernel::factorial;
use crate::poly::{derivative_coeffs, horner, PiecewisePolynomial};
use crate::rules::Integrand;
use crate::sum::compensated_sum;

/// Highest derivative order offered by the transcendental built-ins.
pub const ANALYTIC_MAX_ORDER: usize = 32;

/// Highest derivative order offered by polynomials (all zero past the degree).
pub const POLYNOMIAL_MAX_ORDER: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    /// `e^x`
    Exp,
    /// `sin(ωx)`
    Sine { omega: f64 },
    /// `1/(1+x²)`
    Runge,
    /// `Σ c_k x^k`, coefficients in ascending order.
    Polynomial(Vec<f64>),
}

impl Builtin {
    /// Parse `exp`, `sin`, `sin:<ω>`, `runge` or `poly:<c0>,<c1>,...`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, tail) = match s.split_once(':') {
            Some((h, t)) => (h, Some(t)),
            None => (s, None),
        };
        let num = |t: &str| -> Result<f64> {
            let v: f64 = t
                .trim()
                .parse()
                .map_err(|_| QuadError::validation(format!("invalid number '{t}' in '{s}'")))?;
            if !v.is_finite() {
                return Err(QuadError::validation(format!("non-finite number in '{s}'")));
            }
            Ok(v)
        };
        match (head.to_ascii_lowercase().as_str(), tail) {
            ("exp", None) => Ok(Builtin::Exp),
            ("sin", None) => Ok(Builtin::Sine { omega: 1.0 }),
            ("sin", Some(t)) => Ok(Builtin::Sine { omega: num(t)? }),
            ("runge", None) => Ok(Builtin::Runge),
            ("poly", Some(t)) => {
                let coeffs = t.split(',').map(num).collect::<Result<Vec<_>>>()?;
                Ok(Builtin::Polynomial(coeffs))
            }
            _ => Err(QuadError::validation(format!(
                "unknown integrand '{s}' (expected exp, sin, sin:<w>, runge or poly:<c0>,<c1>,...)"
            ))),
        }
    }

    fn check(&self, order: usize, a: f64, b: f64) -> Result<()> {
        if order == 0 {
            return Err(QuadError::validation("norms are defined for derivative order >= 1"));
        }
        self.require_order(order)?;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(QuadError::validation(format!("interval must satisfy a < b, got [{a}, {b}]")));
        }
        Ok(())
    }

    /// `∫_a^b f^(order) = f^(order-1)(b) - f^(order-1)(a)`.
    fn signed_integral(&self, order: usize, a: f64, b: f64) -> f64 {
        self.derivative_unchecked(order - 1, b) - self.derivative_unchecked(order - 1, a)
    }

    /// `(‖g‖₁, ‖g‖₂², min g, max g)` for `g = f^(order)` on `[a, b]`.
    fn stats(&self, order: usize, a: f64, b: f64) -> Result<(f64, f64, f64, f64)> {
        match self {
            Builtin::Exp => {
                let (ea, eb) = (a.exp(), b.exp());
                let l2_sq = 0.5 * (2.0 * a).exp() * (2.0 * (b - a)).exp_m1();
                Ok((a.exp() * (b - a).exp_m1(), l2_sq, ea, eb))
            }
            Builtin::Sine { omega } => Ok(sine_stats(*omega, order, a, b)),
            Builtin::Runge => Ok(runge_stats(order, a, b)),
            Builtin::Polynomial(c) => {
                let mut d = c.clone();
                for _ in 0..order {
                    d = derivative_coeffs(&d);
                }
                let p = PiecewisePolynomial::from_global_coeffs(a, b, &d)?;
                let s = p.norm_stats(a, b)?;
                let (lo, hi) = p.value_range(a, b)?;
                Ok((s.l1, s.l2_sq, lo, hi))
            }
        }
    }
}

impl FromStr for Builtin {
    type Err = QuadError;
    fn from_str(s: &str) -> Result<Self> {
        Builtin::parse(s)
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Exp => write!(f, "exp"),
            Builtin::Sine { omega } => write!(f, "sin:{omega}"),
            Builtin::Runge => write!(f, "runge"),
            Builtin::Polynomial(c) => {
                let parts: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                write!(f, "poly:{}", parts.join(","))
            }
        }
    }
}

impl Integrand for Builtin {
    fn max_order(&self) -> usize {
        match self {
            Builtin::Polynomial(_) => POLYNOMIAL_MAX_ORDER,
            _ => ANALYTIC_MAX_ORDER,
        }
    }

    fn derivative_unchecked(&self, order: usize, x: f64) -> f64 {
        match self {
            Builtin::Exp => x.exp(),
            Builtin::Sine { omega } => omega.powi(order as i32) * sine_phase(order, omega * x),
            Builtin::Runge => runge_derivative(order, x),
            Builtin::Polynomial(c) => {
                let mut d = c.clone();
                for _ in 0..order {
                    d = derivative_coeffs(&d);
                }
                horner(&d, x)
            }
        }
    }
}

impl KnownNorms for Builtin {
    fn norm_data(&self, order: usize, a: f64, b: f64) -> Result<NormData> {
        self.check(order, a, b)?;
        let w = b - a;
        let (l1, l2_sq, lo, hi) = self.stats(order, a, b)?;
        let signed = self.signed_integral(order, a, b);
        let sigma = match self {
            Builtin::Exp => (2.0 * a).exp() * (0.5 * (2.0 * w).exp_m1() - w.exp_m1().powi(2) / w),
            _ => l2_sq - signed * signed / w,
        };
        Ok(NormData {
            l1: Some(l1),
            l2: Some(l2_sq.max(0.0).sqrt()),
            linf: Some(lo.abs().max(hi.abs())),
            endpoint_diff_rate: Some(signed / w),
            sigma: Some(sigma.max(0.0)),
            provenance: Provenance::Exact,
        })
    }

    fn band(&self, order: usize, a: f64, b: f64) -> Result<DerivativeBand> {
        self.check(order, a, b)?;
        let (_, _, lo, hi) = self.stats(order, a, b)?;
        DerivativeBand::new(lo, hi, order)
    }
}

/// k-th derivative of `sin` at t.
fn sine_phase(k: usize, t: f64) -> f64 {
    match k % 4 {
        0 => t.sin(),
        1 => t.cos(),
        2 => -t.sin(),
        _ => -t.cos(),
    }
}

/// Whether some `c + 2πj` lies in `[lo, hi]`.
fn hits(c: f64, lo: f64, hi: f64) -> bool {
    let j = ((lo - c) / (2.0 * PI)).ceil();
    c + 2.0 * PI * j <= hi
}

/// Continuous antiderivative of `|sin t|`.
fn abs_sin_antiderivative(t: f64) -> f64 {
    let k = (t / PI).floor();
    2.0 * k + 1.0 - (t - k * PI).cos()
}

fn sine_stats(omega: f64, order: usize, a: f64, b: f64) -> (f64, f64, f64, f64) {
    if omega == 0.0 {
        return (0.0, 0.0, 0.0, 0.0);
    }
    // sin(ωx) = sign · sin(|ω|x), and g = sign · |ω|^n sin(φ(x)).
    let sign = omega.signum();
    let om = omega.abs();
    let amp = om.powi(order as i32);
    let phase = order as f64 * FRAC_PI_2;
    let (pa, pb) = (om * a + phase, om * b + phase);
    let l1 = amp / om * (abs_sin_antiderivative(pb) - abs_sin_antiderivative(pa));
    let sq = |t: f64| 0.5 * t - 0.25 * (2.0 * t).sin();
    let l2_sq = amp * amp / om * (sq(pb) - sq(pa));
    let (ga, gb) = (pa.sin(), pb.sin());
    let hi = if hits(FRAC_PI_2, pa, pb) { 1.0 } else { ga.max(gb) };
    let lo = if hits(-FRAC_PI_2, pa, pb) { -1.0 } else { ga.min(gb) };
    let (lo, hi) = if sign > 0.0 { (lo, hi) } else { (-hi, -lo) };
    (l1, l2_sq, amp * lo, amp * hi)
}

/// `d^k/dx^k 1/(1+x²) = (-1)^k k! sin((k+1)ψ) sin^{k+1}ψ` with `ψ = atan2(1, x)`.
fn runge_derivative(k: usize, x: f64) -> f64 {
    let psi = 1f64.atan2(x);
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    sign * factorial(k) * ((k + 1) as f64 * psi).sin() * psi.sin().powi(k as i32 + 1)
}

/// `cot(j π / d)` for `j = 1..d-1` that fall strictly inside `(a, b)`, ascending.
fn cot_points(d: usize, a: f64, b: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = (1..d)
        .map(|j| {
            let t = j as f64 * PI / d as f64;
            t.cos() / t.sin()
        })
        .filter(|&x| x > a && x < b)
        .collect();
    pts.sort_by(f64::total_cmp);
    pts
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `∫ sin²((n+1)ψ) sin^{2n}ψ dψ` as an antiderivative, from the cosine
/// expansion of both factors.
fn runge_l2_antiderivative(n: usize, psi: f64) -> f64 {
    // sin^{2n}ψ = 4^{-n} [C(2n,n) + 2 Σ_k (-1)^k C(2n,n-k) cos 2kψ]
    let scale = 0.25f64.powi(n as i32);
    let mut c = vec![0.0; 2 * n + 2];
    c[0] = scale * binomial(2 * n, n);
    for k in 1..=n {
        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
        c[k] = 2.0 * scale * s * binomial(2 * n, n - k);
    }
    // times (1 - cos 2(n+1)ψ)/2, using cos p cos q = (cos(p-q) + cos(p+q))/2
    let m = n + 1;
    let mut d = vec![0.0; 2 * n + 2];
    for (k, &ck) in c.iter().enumerate().take(n + 1) {
        d[k] += 0.5 * ck;
        let (lo, hi) = (k.abs_diff(m), k + m);
        d[lo] -= 0.25 * ck;
        d[hi] -= 0.25 * ck;
    }
    let mut terms = vec![d[0] * psi];
    terms.extend((1..d.len()).map(|j| d[j] * (2.0 * j as f64 * psi).sin() / (2.0 * j as f64)));
    compensated_sum(terms)
}

fn runge_stats(order: usize, a: f64, b: f64) -> (f64, f64, f64, f64) {
    let g = |x: f64| runge_derivative(order, x);
    let prim = |x: f64| runge_derivative(order - 1, x);

    let mut knots = vec![a];
    knots.extend(cot_points(order + 1, a, b));
    knots.push(b);
    let l1 = compensated_sum(knots.windows(2).map(|w| (prim(w[1]) - prim(w[0])).abs()));

    let mut lo = g(a).min(g(b));
    let mut hi = g(a).max(g(b));
    for x in cot_points(order + 2, a, b) {
        lo = lo.min(g(x));
        hi = hi.max(g(x));
    }

    // x = cot ψ maps [a, b] to [ψ(b), ψ(a)] with dx = -dψ / sin²ψ.
    let (psi_a, psi_b) = (1f64.atan2(a), 1f64.atan2(b));
    let nf = factorial(order);
    let l2_sq = nf * nf * (runge_l2_antiderivative(order, psi_a) - runge_l2_antiderivative(order, psi_b));
    (l1, l2_sq, lo, hi)
}
