//! Modulars and Luxemburg–Nakano norms on weighted variable Lebesgue spaces.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::exponent::ExponentFunction;
use crate::geometry::CurvePath;
use crate::weights::CompositeWeight;

/// Relative tolerance of the norm root solve.
pub const NORM_RTOL: f64 = 1e-10;

/// Distance below which a node counts as coinciding with a weight anchor.
pub const ANCHOR_COINCIDENCE: f64 = 1e-14;

/// Complex nodal values of a function on a curve.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub values: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(invalid("f", format!("value at node {i} is not finite")));
        }
        Ok(SampledFunction { values })
    }

    /// Samples `f` at the nodes of `curve`.
    pub fn from_fn(curve: &CurvePath, f: impl Fn(Complex64) -> Complex64) -> Result<Self> {
        Self::new(curve.points().iter().map(|z| f(*z)).collect())
    }

    /// The constant function.
    pub fn constant(curve: &CurvePath, v: Complex64) -> Self {
        SampledFunction { values: vec![v; curve.node_count()] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A modular `Σ_j m_j (a_j / λ)^{e_j}` held in log form.
///
/// Every quadrature rule in the crate reduces a variable-exponent modular to
/// this shape; terms with `a_j = 0` are dropped.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiscreteModular {
    ln_a: Vec<f64>,
    exps: Vec<f64>,
    ln_m: Vec<f64>,
}

impl DiscreteModular {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds the term `m (a/λ)^e` given `ln a`, `e > 0` and `m ≥ 0`.
    pub fn push(&mut self, ln_a: f64, exponent: f64, measure: f64) {
        if ln_a == f64::NEG_INFINITY || measure <= 0.0 {
            return;
        }
        self.ln_a.push(ln_a);
        self.exps.push(exponent);
        self.ln_m.push(measure.ln());
    }

    pub fn is_empty(&self) -> bool {
        self.ln_a.is_empty()
    }

    /// `ln` of the modular at `ln λ`, evaluated with a log-sum-exp.
    pub fn ln_value(&self, ln_lambda: f64) -> f64 {
        let mut top = f64::NEG_INFINITY;
        for j in 0..self.ln_a.len() {
            top = top.max(self.term(j, ln_lambda));
        }
        if top == f64::NEG_INFINITY || !top.is_finite() {
            return top;
        }
        let s: f64 = (0..self.ln_a.len()).map(|j| (self.term(j, ln_lambda) - top).exp()).sum();
        top + s.ln()
    }

    fn term(&self, j: usize, ln_lambda: f64) -> f64 {
        self.ln_m[j] + self.exps[j] * (self.ln_a[j] - ln_lambda)
    }

    /// Modular value at `λ`.
    pub fn value(&self, lambda: f64) -> f64 {
        self.ln_value(lambda.ln()).exp()
    }

    /// The unique `λ` with modular equal to 1; `0` for an empty modular.
    ///
    /// `ln` of the modular is convex and decreasing in `ln λ`, so Newton's
    /// method started at the left end of an analytic bracket increases
    /// monotonically to the root; a bisection step guards against any
    /// iterate leaving the bracket.
    pub fn solve_unit(&self) -> Result<f64> {
        if self.is_empty() {
            return Ok(0.0);
        }
        let n = self.ln_a.len() as f64;
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in 0..self.ln_a.len() {
            let e = self.exps[j];
            lo = lo.max(self.ln_a[j] + self.ln_m[j] / e);
            hi = hi.max(self.ln_a[j] + (self.ln_m[j] + n.ln()) / e);
        }
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Overflow("modular bracket is not finite".into()));
        }
        let mut x = lo;
        for _ in 0..200 {
            let (f, df) = self.ln_value_and_slope(x);
            if f.abs() < 1e-15 {
                break;
            }
            if f > 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let mut next = x - f / df;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            let done = (next - x).abs() <= 0.1 * NORM_RTOL * (1.0 + x.abs().min(1.0));
            x = next;
            if done || hi - lo <= 1e-15 * (1.0 + x.abs()) {
                break;
            }
        }
        Ok(x.exp())
    }

    fn ln_value_and_slope(&self, ln_lambda: f64) -> (f64, f64) {
        let mut top = f64::NEG_INFINITY;
        for j in 0..self.ln_a.len() {
            top = top.max(self.term(j, ln_lambda));
        }
        let mut s = 0.0;
        let mut ds = 0.0;
        for j in 0..self.ln_a.len() {
            let t = (self.term(j, ln_lambda) - top).exp();
            s += t;
            ds -= self.exps[j] * t;
        }
        (top + s.ln(), ds / s)
    }
}

/// Builds the trapezoidal modular of `|f w|^{p}` on the curve cells.
///
/// `weight_power` raises the weight to a power first (`-1` gives `w⁻¹`).
/// Nodes coinciding with an anchor take the weight at the midpoint of each
/// adjacent cell instead.
pub fn nodal_modular(
    curve: &CurvePath,
    f_abs: &[f64],
    w: &CompositeWeight,
    weight_power: f64,
    p: &ExponentFunction,
) -> Result<DiscreteModular> {
    let n = curve.node_count();
    if f_abs.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: f_abs.len() });
    }
    if p.values().len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.values().len() });
    }
    let anchors = w.anchors();
    let pts = curve.points();
    let singular: Vec<bool> = pts
        .iter()
        .map(|z| anchors.iter().any(|a| (z - a).norm() <= ANCHOR_COINCIDENCE) && !w.factors().is_empty())
        .collect();
    let mut modular = DiscreteModular::new();
    let ln_w_node = |i: usize| w.ln_eval_disp(pts[i], Complex64::new(0.0, 0.0));
    for c in 0..curve.cell_count() {
        let i = c;
        let j = (c + 1) % n;
        let half = 0.5 * curve.cell_length(c);
        let mid = curve.position_at(curve.node_arc(c) + half);
        for k in [i, j] {
            if f_abs[k] == 0.0 {
                continue;
            }
            let ln_w = if singular[k] { w.ln_eval_disp(mid, Complex64::new(0.0, 0.0)) } else { ln_w_node(k) };
            modular.push(f_abs[k].ln() + weight_power * ln_w, p.at_node(k), half);
        }
    }
    Ok(modular)
}

/// `∫_Γ |f w / λ|^{p(τ)} |dτ|` by the trapezoidal rule.
pub fn modular(f: &SampledFunction, w: &CompositeWeight, p: &ExponentFunction, lambda: f64, curve: &CurvePath) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(invalid("lambda", format!("must be positive, got {lambda}")));
    }
    let abs: Vec<f64> = f.values.iter().map(|v| v.norm()).collect();
    Ok(nodal_modular(curve, &abs, w, 1.0, p)?.value(lambda))
}

/// The Luxemburg–Nakano norm `inf{λ > 0 : modular(λ) ≤ 1}`.
pub fn luxemburg_norm(f: &SampledFunction, w: &CompositeWeight, p: &ExponentFunction, curve: &CurvePath) -> Result<f64> {
    let abs: Vec<f64> = f.values.iter().map(|v| v.norm()).collect();
    nodal_modular(curve, &abs, w, 1.0, p)?.solve_unit()
}

/// `sup ∫ f g` bound constant used for the Hölder pairing check.
pub const HOLDER_CONSTANT: f64 = 2.0;

/// Trapezoidal `∫_Γ f g |dτ|` for nonnegative nodal values.
pub fn pairing(curve: &CurvePath, f: &[f64], g: &[f64]) -> f64 {
    let n = curve.node_count();
    (0..curve.cell_count())
        .map(|c| {
            let j = (c + 1) % n;
            0.5 * curve.cell_length(c) * (f[c] * g[c] + f[j] * g[j])
        })
        .sum()
}
