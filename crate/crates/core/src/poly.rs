//! Exact piecewise-polynomial algebra.
//!
//! A [`PiecewisePolynomial`] stores, for every segment `[x_i, x_{i+1}]`, the
//! coefficients of a polynomial in the local variable `u = x - x_i`. Centering
//! each segment at its own left endpoint keeps the conditioning uniform for the
//! moderate degrees (n <= 12) used by the kernels.
//!
//! Segments are half-open on the right except the last, which is closed:
//! evaluation at an interior breakpoint uses the right-hand segment.

use crate::error::{QuadError, Result};
use crate::sum::{compensated_sum, CompensatedSum};

/// Initial sign-scan grid per segment used for root isolation.
const ROOT_GRID: usize = 64;
/// Absolute bisection tolerance for isolated roots (segment-local coordinates).
const ROOT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePolynomial {
    breakpoints: Vec<f64>,
    segments: Vec<Vec<f64>>,
}

/// Brute-force norm statistics of a piecewise polynomial on a sub-interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormStats {
    /// `∫|p|`
    pub l1: f64,
    /// `sup |p|`
    pub max_abs: f64,
    /// `∫p²`
    pub l2_sq: f64,
}

impl PiecewisePolynomial {
    /// Build from breakpoints and per-segment local monomial coefficients.
    pub fn new(breakpoints: Vec<f64>, segments: Vec<Vec<f64>>) -> Result<Self> {
        if breakpoints.len() != segments.len() + 1 {
            return Err(QuadError::validation(format!(
                "{} breakpoints for {} segments",
                breakpoints.len(),
                segments.len()
            )));
        }
        if segments.is_empty() {
            return Err(QuadError::validation("at least one segment is required"));
        }
        if breakpoints.iter().any(|x| !x.is_finite())
            || breakpoints.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(QuadError::validation(
                "breakpoints must be finite and strictly increasing",
            ));
        }
        if segments.iter().any(|c| c.is_empty()) {
            return Err(QuadError::validation(
                "every segment needs at least one coefficient",
            ));
        }
        Ok(Self {
            breakpoints,
            segments,
        })
    }

    /// A single polynomial on `[lo, hi]`, coefficients in powers of `x - lo`.
    pub fn single(lo: f64, hi: f64, coeffs: Vec<f64>) -> Result<Self> {
        Self::new(vec![lo, hi], vec![coeffs])
    }

    pub fn constant(lo: f64, hi: f64, value: f64) -> Result<Self> {
        Self::single(lo, hi, vec![value])
    }

    /// A single polynomial on `[lo, hi]` given by its coefficients in powers of `x`.
    pub fn from_global_coeffs(lo: f64, hi: f64, coeffs: &[f64]) -> Result<Self> {
        Self::single(lo, hi, recenter(coeffs, lo))
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn segments(&self) -> &[Vec<f64>] {
        &self.segments
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().unwrap())
    }

    /// Highest coefficient index over all segments.
    pub fn degree(&self) -> usize {
        self.segments.iter().map(|c| c.len() - 1).max().unwrap_or(0)
    }

    fn check_point(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        let slack = 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(1.0);
        if !(x >= lo - slack && x <= hi + slack) {
            return Err(QuadError::Domain { value: x, lo, hi });
        }
        Ok(x.clamp(lo, hi))
    }

    fn segment_index(&self, x: f64) -> usize {
        // Number of breakpoints <= x, minus one, capped at the last segment.
        let k = self.breakpoints.partition_point(|&bp| bp <= x);
        k.saturating_sub(1).min(self.segments.len() - 1)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let x = self.check_point(x)?;
        let i = self.segment_index(x);
        Ok(horner(&self.segments[i], x - self.breakpoints[i]))
    }

    /// Value of segment `i`'s polynomial at a point (no domain check, may extrapolate).
    pub fn eval_segment(&self, i: usize, x: f64) -> f64 {
        horner(&self.segments[i], x - self.breakpoints[i])
    }

    pub fn derivative(&self) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            segments: self.segments.iter().map(|c| derivative_coeffs(c)).collect(),
        }
    }

    /// Antiderivative equal to `left_value` at the first breakpoint and continuous
    /// across every interior breakpoint.
    pub fn antiderivative(&self, left_value: f64) -> Self {
        let mut running = left_value;
        let mut segments = Vec::with_capacity(self.segments.len());
        for (i, c) in self.segments.iter().enumerate() {
            let mut anti = Vec::with_capacity(c.len() + 1);
            anti.push(running);
            anti.extend(c.iter().enumerate().map(|(k, ck)| ck / (k + 1) as f64));
            running = horner(&anti, self.breakpoints[i + 1] - self.breakpoints[i]);
            segments.push(anti);
        }
        Self {
            breakpoints: self.breakpoints.clone(),
            segments,
        }
    }

    /// The same breakpoints with `c` added to every segment.
    pub fn add_constant(&self, c: f64) -> Self {
        let mut out = self.clone();
        for seg in &mut out.segments {
            seg[0] += c;
        }
        out
    }

    /// The same breakpoints with every segment multiplied by `s`.
    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for seg in &mut out.segments {
            seg.iter_mut().for_each(|c| *c *= s);
        }
        out
    }

    /// Segment-wise square.
    pub fn square(&self) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            segments: self.segments.iter().map(|c| multiply(c, c)).collect(),
        }
    }

    /// Overlap of `[a, b]` with each segment, as `(segment, local_lo, local_hi)`.
    fn pieces(&self, a: f64, b: f64) -> Result<Vec<(usize, f64, f64)>> {
        let a = self.check_point(a)?;
        let b = self.check_point(b)?;
        let mut out = Vec::new();
        for i in 0..self.segments.len() {
            let (x0, x1) = (self.breakpoints[i], self.breakpoints[i + 1]);
            let lo = a.max(x0);
            let hi = b.min(x1);
            if lo < hi {
                out.push((i, lo - x0, hi - x0));
            }
        }
        Ok(out)
    }

    /// Exact integral over `[a, b]` (negated if `a > b`).
    pub fn definite_integral(&self, a: f64, b: f64) -> Result<f64> {
        if a > b {
            return self.definite_integral(b, a).map(|v| -v);
        }
        let pieces = self.pieces(a, b)?;
        Ok(compensated_sum(
            pieces
                .iter()
                .map(|&(i, l, u)| integrate_coeffs(&self.segments[i], l, u)),
        ))
    }

    /// `∫|p|`, `sup|p|` and `∫p²` over `[a, b]`.
    pub fn norm_stats(&self, a: f64, b: f64) -> Result<NormStats> {
        let (a, b) = (a.min(b), a.max(b));
        let pieces = self.pieces(a, b)?;
        let mut l1 = CompensatedSum::new();
        let mut l2 = CompensatedSum::new();
        let mut max_abs = 0.0_f64;
        for &(i, l, u) in &pieces {
            let c = &self.segments[i];
            let mut cuts = vec![l];
            cuts.extend(sign_change_roots(c, l, u));
            cuts.push(u);
            for w in cuts.windows(2) {
                l1.add(integrate_coeffs(c, w[0], w[1]).abs());
            }
            l2.add(integrate_coeffs(&multiply(c, c), l, u));
            for t in extremum_candidates(c, l, u) {
                max_abs = max_abs.max(horner(c, t).abs());
            }
        }
        // A degenerate [a, a] still has a sup-norm at the point itself.
        if pieces.is_empty() {
            max_abs = self.eval(a)?.abs();
        }
        Ok(NormStats {
            l1: l1.value(),
            max_abs,
            l2_sq: l2.value(),
        })
    }

    /// `(inf p, sup p)` over `[a, b]`, with each segment taken as closed.
    pub fn value_range(&self, a: f64, b: f64) -> Result<(f64, f64)> {
        let (a, b) = (a.min(b), a.max(b));
        let pieces = self.pieces(a, b)?;
        if pieces.is_empty() {
            let v = self.eval(a)?;
            return Ok((v, v));
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &(i, l, u) in &pieces {
            let c = &self.segments[i];
            for t in extremum_candidates(c, l, u) {
                let v = horner(c, t);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        Ok((lo, hi))
    }
}

/// Horner evaluation of `Σ c_k t^k`.
pub fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

/// Product of two coefficient vectors.
pub fn multiply(p: &[f64], q: &[f64]) -> Vec<f64> {
    if p.is_empty() || q.is_empty() {
        return vec![0.0];
    }
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, &pi) in p.iter().enumerate() {
        for (j, &qj) in q.iter().enumerate() {
            out[i + j] += pi * qj;
        }
    }
    out
}

/// Coefficients of `(t + shift)^k`.
pub fn shifted_power(shift: f64, k: usize) -> Vec<f64> {
    (0..k).fold(vec![1.0], |acc, _| multiply(&acc, &[shift, 1.0]))
}

/// Re-expand `Σ c_k x^k` in powers of `(x - center)`.
pub fn recenter(coeffs: &[f64], center: f64) -> Vec<f64> {
    // Synthetic division repeated (Taylor shift).
    let mut c = coeffs.to_vec();
    if c.is_empty() {
        return vec![0.0];
    }
    let n = c.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            c[j] += center * c[j + 1];
        }
    }
    c
}

pub fn derivative_coeffs(c: &[f64]) -> Vec<f64> {
    if c.len() <= 1 {
        return vec![0.0];
    }
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, ck)| ck * k as f64)
        .collect()
}

/// `∫_l^u Σ c_k t^k dt`.
fn integrate_coeffs(c: &[f64], l: f64, u: f64) -> f64 {
    let anti = |t: f64| {
        c.iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (k, &ck)| acc * t + ck / (k + 1) as f64)
            * t
    };
    anti(u) - anti(l)
}

/// Roots of the polynomial in `(l, u)` where it changes sign, found by scanning a
/// uniform grid and bisecting each bracket. Exact zeros on the grid are kept.
fn sign_change_roots(c: &[f64], l: f64, u: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    if c.len() <= 1 || u <= l {
        return roots;
    }
    let step = (u - l) / ROOT_GRID as f64;
    let grid = |j: usize| if j == ROOT_GRID { u } else { l + step * j as f64 };
    let mut prev_t = l;
    let mut prev_v = horner(c, l);
    for j in 1..=ROOT_GRID {
        let t = grid(j);
        let v = horner(c, t);
        if v == 0.0 && j < ROOT_GRID {
            roots.push(t);
        } else if prev_v * v < 0.0 {
            roots.push(bisect(c, prev_t, t, prev_v));
        }
        prev_t = t;
        prev_v = v;
    }
    roots
}

fn bisect(c: &[f64], mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let lo_negative = f_lo < 0.0;
    for _ in 0..200 {
        let tol = ROOT_TOL.max(4.0 * f64::EPSILON * hi.abs());
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let v = horner(c, mid);
        if v == 0.0 {
            return mid;
        }
        if (v < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Points at which the extrema of a polynomial on `[l, u]` can occur: the
/// endpoints, the scan grid, and the sign changes of the derivative.
fn extremum_candidates(c: &[f64], l: f64, u: f64) -> Vec<f64> {
    let mut pts = vec![l, u];
    if c.len() > 1 && u > l {
        let step = (u - l) / ROOT_GRID as f64;
        pts.extend((1..ROOT_GRID).map(|j| l + step * j as f64));
        pts.extend(sign_change_roots(&derivative_coeffs(c), l, u));
    }
    pts
}
