//! Variable exponents `p: Γ → (1, ∞)` sampled at curve nodes and
//! interpolated linearly in arc length.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::geometry::CurvePath;

/// Lower clipping bound for exponents built from config specs.
pub const SPEC_P_MIN: f64 = 1.01;
/// Upper clipping bound for exponents built from config specs.
pub const SPEC_P_MAX: f64 = 100.0;

/// A continuous exponent on a curve, stored as nodal values.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFunction {
    arcs: Vec<f64>,
    values: Vec<f64>,
    total: f64,
    closed: bool,
    p_min: f64,
    p_max: f64,
}

/// Parsed form of the config exponent grammar.
#[derive(Debug, Clone, PartialEq)]
pub enum ExponentSpec {
    /// `constant <value>`
    Constant(f64),
    /// `radial t=<x,y> base=<p0> amplitude=<a>`: `p0 + a / (2 - ln|τ - t|)`.
    Radial { center: Complex64, base: f64, amplitude: f64 },
}

impl ExponentFunction {
    /// Builds an exponent from one value per curve node.
    pub fn from_values(curve: &CurvePath, values: Vec<f64>) -> Result<Self> {
        if values.len() != curve.node_count() {
            return Err(Error::DimensionMismatch { expected: curve.node_count(), got: values.len() });
        }
        if let Some(bad) = values.iter().find(|v| !(**v > 1.0 && v.is_finite())) {
            return Err(invalid("p", format!("exponent values must lie in (1, inf), found {bad}")));
        }
        let p_min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let p_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(ExponentFunction {
            arcs: curve.cumulative_lengths()[..curve.node_count()].to_vec(),
            values,
            total: curve.length(),
            closed: curve.is_closed(),
            p_min,
            p_max,
        })
    }

    /// The constant exponent `p ≡ value`.
    pub fn constant(curve: &CurvePath, value: f64) -> Result<Self> {
        Self::from_values(curve, vec![value; curve.node_count()])
    }

    /// Samples `rule` at every node.
    pub fn from_fn(curve: &CurvePath, rule: impl Fn(Complex64) -> f64) -> Result<Self> {
        Self::from_values(curve, curve.points().iter().map(|z| rule(*z)).collect())
    }

    /// Builds the exponent described by a config spec, clipped to
    /// `[SPEC_P_MIN, SPEC_P_MAX]`.
    pub fn from_spec(curve: &CurvePath, spec: &ExponentSpec) -> Result<Self> {
        let clip = |v: f64| v.clamp(SPEC_P_MIN, SPEC_P_MAX);
        match *spec {
            ExponentSpec::Constant(v) => Self::constant(curve, clip(v)),
            ExponentSpec::Radial { center, base, amplitude } => Self::from_fn(curve, |z| {
                let d = (z - center).norm();
                if d == 0.0 {
                    clip(base)
                } else {
                    clip(base + amplitude / (2.0 - d.ln()))
                }
            }),
        }
    }

    /// Nodal values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn p_min(&self) -> f64 {
        self.p_min
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    /// True when all nodal values coincide.
    pub fn is_constant(&self) -> bool {
        self.p_min == self.p_max
    }

    /// Value at node `i`.
    pub fn at_node(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Value at arc position `s`, interpolated linearly between nodes.
    pub fn at_arc(&self, s: f64) -> f64 {
        let n = self.values.len();
        if self.is_constant() {
            return self.p_min;
        }
        let s = if self.closed { s.rem_euclid(self.total) } else { s.clamp(0.0, self.total) };
        let i = self.arcs.partition_point(|&a| a <= s).saturating_sub(1);
        let (a0, v0) = (self.arcs[i], self.values[i]);
        let (a1, v1) = if i + 1 < n {
            (self.arcs[i + 1], self.values[i + 1])
        } else if self.closed {
            (self.total, self.values[0])
        } else {
            return v0;
        };
        let frac = ((s - a0) / (a1 - a0)).clamp(0.0, 1.0);
        v0 + (v1 - v0) * frac
    }

    /// Value at the curve point nearest to `t`.
    pub fn at_point(&self, curve: &CurvePath, t: Complex64) -> Result<f64> {
        Ok(self.at_arc(curve.locate(t)?))
    }

    /// The conjugate exponent `q = p / (p - 1)`.
    pub fn conjugate(&self) -> Self {
        let values: Vec<f64> = self.values.iter().map(|&p| conjugate_value(p)).collect();
        ExponentFunction {
            arcs: self.arcs.clone(),
            p_min: conjugate_value(self.p_max),
            p_max: conjugate_value(self.p_min),
            values,
            total: self.total,
            closed: self.closed,
        }
    }

    /// Smallest `A` with `|p(τ) - p(t)| ≤ A / (-ln|τ - t|)` over all node
    /// pairs at plane distance at most 1/2.
    pub fn dini_lipschitz_modulus(&self, curve: &CurvePath) -> f64 {
        let all: Vec<usize> = (0..self.values.len()).collect();
        self.dini_lipschitz_modulus_on(curve, &all)
    }

    /// As [`ExponentFunction::dini_lipschitz_modulus`] restricted to the
    /// node indices in `subset`.
    pub fn dini_lipschitz_modulus_on(&self, curve: &CurvePath, subset: &[usize]) -> f64 {
        if self.is_constant() {
            return 0.0;
        }
        let pts = curve.points();
        let mut best: f64 = 0.0;
        for (a, &i) in subset.iter().enumerate() {
            for &j in &subset[a + 1..] {
                let d = (pts[i] - pts[j]).norm();
                if d > 0.0 && d <= 0.5 {
                    best = best.max((self.values[i] - self.values[j]).abs() * -d.ln());
                }
            }
        }
        best
    }
}

/// `p / (p - 1)` computed as `1 + 1/(p - 1)`, which keeps the involution
/// accurate for large and small `p`.
pub fn conjugate_value(p: f64) -> f64 {
    1.0 + 1.0 / (p - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(n: usize) -> CurvePath {
        CurvePath::segment(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), n).unwrap()
    }

    #[test]
    fn conjugate_examples() {
        let c = seg(11);
        assert_eq!(ExponentFunction::constant(&c, 2.0).unwrap().conjugate().values()[0], 2.0);
        let q = ExponentFunction::constant(&c, 4.0).unwrap().conjugate();
        assert!((q.values()[3] - 4.0 / 3.0).abs() < 1e-15);
        let lin = ExponentFunction::from_fn(&c, |z| 1.5 + 1.5 * z.re).unwrap().conjugate();
        assert!((lin.values()[0] - 3.0).abs() < 1e-12);
        assert!((lin.values()[10] - 1.5).abs() < 1e-12);
        assert!((lin.p_min() - 1.5).abs() < 1e-12 && (lin.p_max() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn interpolation_is_linear_in_arc_length() {
        let c = seg(3);
        let p = ExponentFunction::from_values(&c, vec![2.0, 3.0, 5.0]).unwrap();
        assert_eq!(p.at_arc(0.25), 2.5);
        assert_eq!(p.at_arc(0.75), 4.0);
        assert_eq!(p.at_arc(2.0), 5.0);
    }

    #[test]
    fn invalid_values_rejected() {
        let c = seg(3);
        assert!(ExponentFunction::from_values(&c, vec![2.0, 1.0, 2.0]).is_err());
        assert!(ExponentFunction::from_values(&c, vec![2.0, 2.0]).is_err());
    }

    #[test]
    fn constant_modulus_is_zero() {
        let c = seg(65);
        assert_eq!(ExponentFunction::constant(&c, 2.0).unwrap().dini_lipschitz_modulus(&c), 0.0);
    }

    #[test]
    fn radial_spec_is_clipped() {
        let c = seg(65);
        let spec = ExponentSpec::Radial { center: Complex64::new(0.0, 0.0), base: 1.0, amplitude: -5.0 };
        let p = ExponentFunction::from_spec(&c, &spec).unwrap();
        assert_eq!(p.p_min(), SPEC_P_MIN);
    }
}
