//! Radial factors `ρ ∈ 𝕎`, composite weights `w(t) = c ∏ ρ_k(|t - t_k|)`,
//! the dilation function `Φ_ρ⁰` and Matuszewska–Orlicz indices.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::geometry::CurvePath;
use crate::submult::{golden_max, Indices, Provenance, SubmultProfile, DEFAULT_HALF_WIDTH, DEFAULT_STEP};

/// A closed-form or tabulated positive function on `(0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialRule {
    /// `x^γ`
    Power { gamma: f64 },
    /// `x^γ (1 + |ln x|)^β`
    LogPower { gamma: f64, beta: f64 },
    /// `x^γ exp(A sin(B ln x))`
    Oscillating { gamma: f64, amp: f64, freq: f64 },
    /// Log-log linear interpolation of `(ln x, ln ρ)` samples, extended
    /// beyond the table by the end slopes.
    Table { ln_x: Vec<f64>, ln_rho: Vec<f64> },
    /// `ρ^s`
    Scaled { rule: Box<RadialRule>, power: f64 },
    /// Pointwise product.
    Product(Vec<RadialRule>),
}

impl RadialRule {
    /// Builds a table rule from `(x, ρ(x))` samples.
    pub fn table(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(invalid("table", "need at least two samples"));
        }
        let mut pts: Vec<(f64, f64)> = Vec::with_capacity(samples.len());
        for &(x, r) in samples {
            if !(x > 0.0 && r > 0.0 && x.is_finite() && r.is_finite()) {
                return Err(invalid("table", format!("sample ({x}, {r}) is not positive and finite")));
            }
            pts.push((x.ln(), r.ln()));
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pts.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(invalid("table", "abscissae must be distinct"));
        }
        Ok(RadialRule::Table { ln_x: pts.iter().map(|p| p.0).collect(), ln_rho: pts.iter().map(|p| p.1).collect() })
    }

    /// Parses a two-column `x rho(x)` text table.
    pub fn table_from_text(text: &str, source: &str) -> Result<Self> {
        let mut samples = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| Error::Parse {
                    file: source.to_string(),
                    line: idx + 1,
                    message: format!("bad number `{s}`: {e}"),
                })
            };
            if cols.len() != 2 {
                return Err(Error::Parse { file: source.to_string(), line: idx + 1, message: "expected two columns".into() });
            }
            samples.push((parse(cols[0])?, parse(cols[1])?));
        }
        Self::table(&samples)
    }

    /// `ρ^s`, flattening nested powers.
    pub fn powered(&self, s: f64) -> Self {
        match self {
            RadialRule::Power { gamma } => RadialRule::Power { gamma: gamma * s },
            RadialRule::Scaled { rule, power } => RadialRule::Scaled { rule: rule.clone(), power: power * s },
            other => RadialRule::Scaled { rule: Box::new(other.clone()), power: s },
        }
    }

    /// `ln ρ(x)` as a function of `ln x`.
    pub fn ln_eval_log(&self, lx: f64) -> f64 {
        match self {
            RadialRule::Power { gamma } => {
                if *gamma == 0.0 {
                    0.0
                } else {
                    gamma * lx
                }
            }
            RadialRule::LogPower { gamma, beta } => gamma * lx + beta * (1.0 + lx.abs()).ln(),
            RadialRule::Oscillating { gamma, amp, freq } => gamma * lx + amp * (freq * lx).sin(),
            RadialRule::Table { ln_x, ln_rho } => table_interp(ln_x, ln_rho, lx),
            RadialRule::Scaled { rule, power } => power * rule.ln_eval_log(lx),
            RadialRule::Product(rules) => rules.iter().map(|r| r.ln_eval_log(lx)).sum(),
        }
    }

    /// `ln ρ(x)`.
    pub fn ln_eval(&self, x: f64) -> f64 {
        self.ln_eval_log(x.ln())
    }

    /// `ρ(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        self.ln_eval(x).exp()
    }

    /// True for the rule `ρ ≡ 1`.
    pub fn is_trivial(&self) -> bool {
        match self {
            RadialRule::Power { gamma } => *gamma == 0.0,
            RadialRule::Scaled { rule, power } => *power == 0.0 || rule.is_trivial(),
            RadialRule::Product(rules) => rules.iter().all(RadialRule::is_trivial),
            _ => false,
        }
    }

    /// Exact `ln Φ⁰(x)` when the rule is a pure power up to slowly varying
    /// factors whose dilation ratio tends to 1.
    fn exact_ln_phi0(&self, lx: f64) -> Option<f64> {
        match self {
            RadialRule::Power { gamma } | RadialRule::LogPower { gamma, .. } => Some(gamma * lx),
            RadialRule::Scaled { rule, power } if *power >= 0.0 => rule.exact_ln_phi0(lx).map(|v| v * power),
            RadialRule::Product(rules) => rules.iter().map(|r| r.exact_ln_phi0(lx)).sum(),
            _ => None,
        }
    }
}

fn table_interp(ln_x: &[f64], ln_rho: &[f64], lx: f64) -> f64 {
    let n = ln_x.len();
    let i = ln_x.partition_point(|&v| v <= lx).clamp(1, n - 1);
    let (x0, x1, y0, y1) = (ln_x[i - 1], ln_x[i], ln_rho[i - 1], ln_rho[i]);
    y0 + (y1 - y0) * (lx - x0) / (x1 - x0)
}

/// Options of the `Φ⁰` limsup estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phi0Grid {
    /// Smallest `y / cap`.
    pub y_min: f64,
    /// Largest `y / cap`.
    pub y_max: f64,
    /// Number of log-spaced `y` points.
    pub points: usize,
    /// Fraction of the grid, at the small-`y` end, over which the maximum is taken.
    pub tail: f64,
}

impl Default for Phi0Grid {
    /// `y/cap ∈ [1e-60, 1e-2]`, 512 points, tail 25%. The tail then spans
    /// about 33 nepers, several periods of any oscillation with `B ≥ 1`.
    fn default() -> Self {
        Phi0Grid { y_min: 1e-60, y_max: 1e-2, points: 512, tail: 0.25 }
    }
}

/// `ln Φ_ρ⁰(x) = limsup_{y→0} ln(ρ(xy)/ρ(y))`, estimated as the maximum
/// over the tail of a log-spaced `y` grid with golden-section refinement
/// around the best grid point.
pub fn ln_phi0(rho: &RadialRule, ln_x: f64, cap: f64, grid: &Phi0Grid) -> Result<f64> {
    if ln_x == 0.0 {
        return Ok(0.0);
    }
    if let Some(v) = rho.exact_ln_phi0(ln_x) {
        return Ok(v);
    }
    let ln_cap = cap.ln();
    let lo = ln_cap + grid.y_min.ln();
    let hi = ln_cap + grid.y_max.ln();
    let n = grid.points.max(16);
    let tail_end = lo + grid.tail * (hi - lo);
    // keep x*y inside the domain
    let tail_end = tail_end.min(ln_cap - ln_x);
    if tail_end <= lo {
        return Err(invalid("x", "x*y exceeds the domain for every y in the grid"));
    }
    let h = (hi - lo) / (n - 1) as f64;
    let ratio = |ly: f64| rho.ln_eval_log(ly + ln_x) - rho.ln_eval_log(ly);
    let mut best = (f64::NEG_INFINITY, lo);
    let mut ly = lo;
    while ly <= tail_end {
        let v = ratio(ly);
        if v > best.0 {
            best = (v, ly);
        }
        ly += h;
    }
    let a = (best.1 - h).max(lo);
    let b = (best.1 + h).min(tail_end);
    let refined = golden_max(|ly| Ok(ratio(ly)), a, b, 60)?;
    Ok(best.0.max(refined))
}

/// `Φ_ρ⁰(x)` with the default grid.
pub fn phi0(rho: &RadialRule, x: f64, cap: f64) -> Result<f64> {
    Ok(ln_phi0(rho, x.ln(), cap, &Phi0Grid::default())?.exp())
}

/// Profile of `Φ_ρ⁰` on the default lattice.
pub fn phi0_profile(rho: &RadialRule, cap: f64) -> Result<SubmultProfile> {
    let grid = Phi0Grid::default();
    let mut err = None;
    let profile = SubmultProfile::from_ln_fn(DEFAULT_STEP, DEFAULT_HALF_WIDTH, Provenance::Phi0, |lx| {
        ln_phi0(rho, lx, cap, &grid).unwrap_or_else(|e| {
            err = Some(e);
            f64::NAN
        })
    });
    match err {
        Some(e) => Err(e),
        None => Ok(profile),
    }
}

/// Matuszewska–Orlicz indices `(m(ρ), M(ρ))` from the sup/inf
/// characterization of the `Φ⁰` profile, cross-checked against the dyadic
/// tail characterization.
pub fn mo_indices(rho: &RadialRule, cap: f64) -> Result<Indices> {
    phi0_profile(rho, cap)?.checked_indices("Matuszewska-Orlicz indices")
}

/// `max ρ(x)/ρ(y)` over pairs `x ≤ y` of a log grid on `[1e-12·cap, cap]`.
pub fn almost_increasing_constant(rho: &RadialRule, grid_size: usize, cap: f64) -> Result<f64> {
    almost_increasing_constant_on(rho, grid_size, 1e-12 * cap, cap)
}

/// As [`almost_increasing_constant`] on the grid `[lower, upper]`.
pub fn almost_increasing_constant_on(rho: &RadialRule, grid_size: usize, lower: f64, upper: f64) -> Result<f64> {
    if grid_size < 64 {
        return Err(invalid("grid_size", "must be at least 64"));
    }
    if !(lower > 0.0 && upper > lower) {
        return Err(invalid("grid", "need 0 < lower < upper"));
    }
    let (a, b) = (lower.ln(), upper.ln());
    let mut running = f64::NEG_INFINITY;
    let mut worst: f64 = 0.0;
    for k in 0..grid_size {
        let lx = a + (b - a) * k as f64 / (grid_size - 1) as f64;
        let v = rho.ln_eval_log(lx);
        running = running.max(v);
        worst = worst.max(running - v);
    }
    Ok(worst.exp())
}

/// Evidence of membership in the class 𝕎 on a log grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassProbe {
    /// Positive and finite at every grid point.
    pub positive: bool,
    /// Exponent `a` with `x^a ρ(x)` increasing on the grid.
    pub a: f64,
    /// Exponent `b` with `x^b / ρ(x)` increasing on the grid.
    pub b: f64,
}

impl ClassProbe {
    pub fn in_class(&self) -> bool {
        self.positive && self.a.is_finite() && self.b.is_finite()
    }
}

/// Measures the range of log-log slopes of `ρ` on `[1e-12·cap, cap]`; the
/// negated smallest slope and the largest slope are exponents for which
/// both sandwich functions are increasing.
pub fn class_probe(rho: &RadialRule, grid_size: usize, cap: f64) -> ClassProbe {
    let (a, b) = ((1e-12 * cap).ln(), cap.ln());
    let n = grid_size.max(2);
    let h = (b - a) / (n - 1) as f64;
    let vals: Vec<f64> = (0..n).map(|k| rho.ln_eval_log(a + h * k as f64)).collect();
    let positive = vals.iter().all(|v| v.is_finite());
    let slopes = vals.windows(2).map(|w| (w[1] - w[0]) / h);
    let (lo, hi) = slopes.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s), hi.max(s)));
    ClassProbe { positive, a: (-lo).max(0.0), b: hi.max(0.0) }
}

/// One factor `ρ_k(|t - t_k|)` of a composite weight.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFactor {
    pub anchor: Complex64,
    pub rule: RadialRule,
}

/// `w(t) = c ∏_k ρ_k(|t - t_k|)` with pairwise distinct anchors.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeWeight {
    factors: Vec<WeightFactor>,
    ln_scale: f64,
}

impl CompositeWeight {
    pub fn new(factors: Vec<WeightFactor>) -> Result<Self> {
        for (i, f) in factors.iter().enumerate() {
            if factors[..i].iter().any(|g| g.anchor == f.anchor) {
                return Err(invalid("anchors", format!("anchor {} repeats", f.anchor)));
            }
        }
        Ok(CompositeWeight { factors, ln_scale: 0.0 })
    }

    /// The weight `w ≡ 1`.
    pub fn unit() -> Self {
        CompositeWeight { factors: Vec::new(), ln_scale: 0.0 }
    }

    /// A single factor.
    pub fn single(anchor: Complex64, rule: RadialRule) -> Self {
        CompositeWeight { factors: vec![WeightFactor { anchor, rule }], ln_scale: 0.0 }
    }

    /// The Khvedelidze weight `∏ |t - t_k|^{λ_k}`.
    pub fn khvedelidze(terms: &[(Complex64, f64)]) -> Result<Self> {
        Self::new(terms.iter().map(|&(anchor, gamma)| WeightFactor { anchor, rule: RadialRule::Power { gamma } }).collect())
    }

    pub fn factors(&self) -> &[WeightFactor] {
        &self.factors
    }

    pub fn anchors(&self) -> Vec<Complex64> {
        self.factors.iter().map(|f| f.anchor).collect()
    }

    /// The weight multiplied by the constant `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        CompositeWeight { factors: self.factors.clone(), ln_scale: self.ln_scale + c.ln() }
    }

    /// `w^s`.
    pub fn powered(&self, s: f64) -> Self {
        CompositeWeight {
            factors: self.factors.iter().map(|f| WeightFactor { anchor: f.anchor, rule: f.rule.powered(s) }).collect(),
            ln_scale: self.ln_scale * s,
        }
    }

    /// Anchors projected onto `curve`.
    pub fn snapped_to(&self, curve: &CurvePath) -> Result<Self> {
        let mut factors = self.factors.clone();
        for f in &mut factors {
            f.anchor = curve.snap(f.anchor)?;
        }
        Ok(CompositeWeight { factors, ln_scale: self.ln_scale })
    }

    /// Index of a nontrivial factor anchored exactly at `t`, if any.
    pub fn singular_factor_at(&self, t: Complex64) -> Option<usize> {
        self.factors.iter().position(|f| f.anchor == t && !f.rule.is_trivial())
    }

    /// `ln w(t)`.
    pub fn ln_eval(&self, t: Complex64) -> Result<f64> {
        if let Some(anchor) = self.singular_factor_at(t) {
            return Err(Error::SingularPoint { anchor });
        }
        Ok(self.ln_eval_disp(t, Complex64::new(0.0, 0.0)))
    }

    /// `w(t)`.
    pub fn evaluate(&self, t: Complex64) -> Result<f64> {
        Ok(self.ln_eval(t)?.exp())
    }

    /// `ln w(center + disp)`, with each distance formed as
    /// `|(center - t_k) + disp|` so that tiny displacements from an anchor
    /// keep full relative precision.
    pub fn ln_eval_disp(&self, center: Complex64, disp: Complex64) -> f64 {
        let mut acc = self.ln_scale;
        for f in &self.factors {
            if f.rule.is_trivial() {
                continue;
            }
            let d = ((center - f.anchor) + disp).norm();
            acc += f.rule.ln_eval_log(d.ln());
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluate_examples() {
        let o = Complex64::new(0.0, 0.0);
        let w = CompositeWeight::single(o, RadialRule::Power { gamma: 0.0 });
        assert_eq!(w.evaluate(Complex64::new(0.3, 0.1)).unwrap(), 1.0);
        let w = CompositeWeight::khvedelidze(&[(o, 0.25)]).unwrap();
        assert!((w.evaluate(Complex64::new(4.0, 0.0)).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!(matches!(w.evaluate(o), Err(Error::SingularPoint { anchor: 0 })));
        let w = CompositeWeight::khvedelidze(&[(Complex64::new(-1.0, 0.0), 0.25), (Complex64::new(1.0, 0.0), -0.25)]).unwrap();
        assert!((w.evaluate(Complex64::new(0.0, 0.7)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phi0_power_is_exact() {
        let r = RadialRule::Power { gamma: 0.3 };
        assert_eq!(phi0(&r, 0.125, 1.0).unwrap(), (0.3 * 0.125f64.ln()).exp());
        let osc = RadialRule::Oscillating { gamma: 0.5, amp: 0.2, freq: 1.0 };
        assert_eq!(phi0(&osc, 1.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn almost_increasing_examples() {
        let c = almost_increasing_constant(&RadialRule::Power { gamma: 1.0 }, 256, 1.0).unwrap();
        assert_eq!(c, 1.0);
        let inv = RadialRule::Power { gamma: -1.0 };
        let c1 = almost_increasing_constant_on(&inv, 256, 1e-6, 1.0).unwrap();
        let c2 = almost_increasing_constant_on(&inv, 256, 0.5e-6, 1.0).unwrap();
        assert!(c2 >= 2.0 * c1 * (1.0 - 1e-9));
    }

    #[test]
    fn table_rule_interpolates_in_log_coordinates() {
        let r = RadialRule::table(&[(0.01, 0.1), (1.0, 1.0)]).unwrap();
        assert!((r.eval(0.1) - 0.1f64.sqrt()).abs() < 1e-12);
        // end-slope extrapolation keeps the power law
        assert!((r.eval(1e-6) - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn powered_weight_scales_log_values() {
        let o = Complex64::new(0.0, 0.0);
        let w = CompositeWeight::single(o, RadialRule::Oscillating { gamma: 0.5, amp: 0.2, freq: 1.0 }).scaled(3.0);
        let t = Complex64::new(0.37, 0.0);
        let a = w.powered(1.1).ln_eval(t).unwrap();
        assert!((a - 1.1 * w.ln_eval(t).unwrap()).abs() < 1e-12);
    }
}
