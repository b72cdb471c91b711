//! Sampled submultiplicative functions, their indices, and the indices of
//! powerlikeness built from geometric means of a weight over portions.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{CurvePath, LocalFrame};
use crate::quadrature::integrate_graded;
use crate::weights::CompositeWeight;

/// Default lattice step in `ln x`; four samples per octave.
pub const DEFAULT_STEP: f64 = std::f64::consts::LN_2 / 4.0;
/// Default lattice half-width in steps; with the default step this spans
/// `[2^-20, 2^20]`.
pub const DEFAULT_HALF_WIDTH: i32 = 80;
/// Index tolerance shared by every acceptance comparison.
pub const INDEX_TOLERANCE: f64 = 0.02;
/// Disagreement between the two index characterizations that counts as
/// non-convergence.
pub const NONCONVERGENCE_THRESHOLD: f64 = 0.05;
/// Allowed excess of `Φ(xy) / (Φ(x)Φ(y))` over 1.
pub const SUBMULT_SLACK: f64 = 1e-6;
/// Dyadic exponents used by the limit characterization.
pub const LIMIT_DYADIC_RANGE: std::ops::RangeInclusive<i32> = 10..=20;
/// Relative floor of the graded log-weight quadrature.
pub const LOG_QUADRATURE_FLOOR: f64 = 1e-10;

/// Where a profile came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Phi0,
    V0,
    Synthetic,
}

/// Samples of `ln Φ` on the lattice `ln x = k·step`, `k_min ≤ k ≤ k_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubmultProfile {
    step: f64,
    k_min: i32,
    ln_phi: Vec<f64>,
    provenance: Provenance,
}

/// Both characterizations of the indices of a submultiplicative function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Indices {
    /// `sup_{x<1} ln Φ(x) / ln x` over the lattice.
    pub alpha: f64,
    /// `inf_{x>1} ln Φ(x) / ln x` over the lattice.
    pub beta: f64,
    /// Tail estimate of `lim_{x→0} ln Φ(x) / ln x`.
    pub alpha_limit: f64,
    /// Tail estimate of `lim_{x→∞} ln Φ(x) / ln x`.
    pub beta_limit: f64,
    /// Largest disagreement between the two characterizations.
    pub disagreement: f64,
}

impl Indices {
    /// True when both characterizations agree within the non-convergence
    /// threshold.
    pub fn converged(&self) -> bool {
        self.disagreement <= NONCONVERGENCE_THRESHOLD
    }

    /// True when the characterizations differ by more than the index
    /// tolerance.
    pub fn flagged(&self) -> bool {
        self.disagreement > INDEX_TOLERANCE
    }
}

impl SubmultProfile {
    /// Samples `ln Φ` given as a function of `ln x` on the lattice.
    pub fn from_ln_fn(step: f64, half_width: i32, provenance: Provenance, mut ln_phi: impl FnMut(f64) -> f64) -> Self {
        let k_min = -half_width;
        let ln_phi = (k_min..=half_width).map(|k| ln_phi(k as f64 * step)).collect();
        SubmultProfile { step, k_min, ln_phi, provenance }
    }

    /// Samples `Φ` given as a function of `x` on the default lattice.
    pub fn synthetic(phi: impl Fn(f64) -> f64) -> Self {
        Self::from_ln_fn(DEFAULT_STEP, DEFAULT_HALF_WIDTH, Provenance::Synthetic, |lx| phi(lx.exp()).ln())
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn k_range(&self) -> std::ops::RangeInclusive<i32> {
        self.k_min..=self.k_max()
    }

    fn k_max(&self) -> i32 {
        self.k_min + self.ln_phi.len() as i32 - 1
    }

    /// `ln Φ` at lattice index `k`.
    pub fn ln_at(&self, k: i32) -> f64 {
        self.ln_phi[(k - self.k_min) as usize]
    }

    /// Samples as `(x, Φ(x))` pairs.
    pub fn samples(&self) -> Vec<(f64, f64)> {
        self.k_range().map(|k| ((k as f64 * self.step).exp(), self.ln_at(k).exp())).collect()
    }

    /// `ln Φ` at an arbitrary `ln x` inside the lattice, interpolated linearly.
    pub fn ln_interp(&self, ln_x: f64) -> f64 {
        let pos = (ln_x / self.step).clamp(self.k_min as f64, self.k_max() as f64);
        let k0 = pos.floor() as i32;
        let k1 = (k0 + 1).min(self.k_max());
        let frac = pos - k0 as f64;
        self.ln_at(k0) * (1.0 - frac) + self.ln_at(k1) * frac
    }

    /// `Φ(x_k x_l) / (Φ(x_k) Φ(x_l))` for lattice indices with `k + l` in range.
    pub fn pair_ratio(&self, k: i32, l: i32) -> f64 {
        (self.ln_at(k + l) - self.ln_at(k) - self.ln_at(l)).exp()
    }

    /// Largest `Φ` over `x ∈ [1/2, 2]`; finite for regular functions.
    pub fn regularity_bound(&self) -> f64 {
        let reach = (std::f64::consts::LN_2 / self.step).floor() as i32;
        (-reach..=reach)
            .filter(|k| self.k_range().contains(k))
            .map(|k| self.ln_at(k).exp())
            .fold(0.0, f64::max)
    }

    /// Checks all lattice pairs within 8 steps of the origin and
    /// `pair_count` random pairs with the product in range,
    /// reporting whether `Φ(xy) ≤ Φ(x)Φ(y)(1 + 1e-6)` held for all of them,
    /// with the worst observed ratio.
    pub fn check_submultiplicative(&self, pair_count: usize, seed: u64) -> (bool, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = (self.k_min, self.k_max());
        let mut worst: f64 = 0.0;
        let near = 8.min(hi / 2).min(-lo / 2);
        for k in -near..=near {
            for l in -near..=near {
                worst = worst.max(self.pair_ratio(k, l));
            }
        }
        for _ in 0..pair_count.max(1) {
            let k = rng.gen_range(lo..=hi);
            let l_lo = (lo - k).max(lo);
            let l_hi = (hi - k).min(hi);
            let l = rng.gen_range(l_lo..=l_hi);
            worst = worst.max(self.pair_ratio(k, l));
        }
        (worst <= 1.0 + SUBMULT_SLACK, worst)
    }

    /// Lower and upper indices by the sup/inf characterization, together
    /// with the tail characterization over dyadic points `2^{∓j}`,
    /// `j = 10..=20`.
    ///
    /// For a submultiplicative `Φ`, `ln Φ(x)/ln x` never exceeds the lower
    /// index on `(0,1)` and never falls below the upper index on `(1,∞)`, so
    /// the tail estimate takes the extremum of the dyadic quotients.
    pub fn indices(&self) -> Indices {
        let mut alpha = f64::NEG_INFINITY;
        let mut beta = f64::INFINITY;
        for k in self.k_range() {
            let lx = k as f64 * self.step;
            if k < 0 {
                alpha = alpha.max(self.ln_at(k) / lx);
            } else if k > 0 {
                beta = beta.min(self.ln_at(k) / lx);
            }
        }
        let mut alpha_limit = f64::NEG_INFINITY;
        let mut beta_limit = f64::INFINITY;
        for j in LIMIT_DYADIC_RANGE {
            let lx = j as f64 * std::f64::consts::LN_2;
            alpha_limit = alpha_limit.max(self.ln_interp(-lx) / -lx);
            beta_limit = beta_limit.min(self.ln_interp(lx) / lx);
        }
        let disagreement = (alpha - alpha_limit).abs().max((beta - beta_limit).abs());
        Indices { alpha, beta, alpha_limit, beta_limit, disagreement }
    }

    /// As [`SubmultProfile::indices`], failing when the characterizations
    /// disagree beyond the non-convergence threshold.
    pub fn checked_indices(&self, what: &'static str) -> Result<Indices> {
        let idx = self.indices();
        if !idx.converged() {
            return Err(Error::NonConvergence {
                what,
                detail: format!(
                    "sup/inf ({:.4}, {:.4}) vs limit ({:.4}, {:.4})",
                    idx.alpha, idx.beta, idx.alpha_limit, idx.beta_limit
                ),
            });
        }
        Ok(idx)
    }
}

/// Mean of `ln w` over the portion `Γ(t,R)` seen from `frame`.
///
/// Each member arc is split at polyline vertices and at the offsets of
/// anchors lying on it; pieces are integrated by graded Gauss quadrature.
pub fn mean_log_weight(frame: &LocalFrame, w: &CompositeWeight, radius: f64) -> Result<f64> {
    let arcs = frame.portion_arcs(radius);
    let measure: f64 = arcs.iter().map(|(a, b)| b - a).sum();
    if !(measure > 0.0) {
        return Err(Error::InvalidRadius { radius, reason: "empty portion".into() });
    }
    let anchors = anchor_offsets(frame, w, &arcs);
    let mut total = 0.0;
    for piece in &frame.pieces {
        for &(a, b) in &arcs {
            let lo = a.max(piece.off0);
            let hi = b.min(piece.off1);
            if hi <= lo {
                continue;
            }
            let integrand = |s: f64| w.ln_eval_disp(frame.center, piece.disp(s));
            total += integrate_graded(integrand, lo, hi, &anchors, LOG_QUADRATURE_FLOOR, 4);
        }
    }
    Ok(total / measure)
}

/// Arc offsets, within the given arcs, of the points nearest to each anchor.
pub(crate) fn anchor_offsets(frame: &LocalFrame, w: &CompositeWeight, arcs: &[(f64, f64)]) -> Vec<f64> {
    let mut out = Vec::new();
    for f in w.factors() {
        let rel = f.anchor - frame.center;
        for piece in &frame.pieces {
            let along = ((rel - piece.ref_disp) * piece.dir.conj()).re + piece.ref_off;
            let s = along.clamp(piece.off0, piece.off1);
            let miss = (piece.disp(s) - rel).norm();
            let scale = (piece.off1 - piece.off0).max(rel.norm());
            if miss <= 1e-9 * scale.max(f64::MIN_POSITIVE) && arcs.iter().any(|&(a, b)| s >= a && s <= b) {
                out.push(s);
            }
        }
    }
    out
}

/// `H_{w,t}(R1, R2)`: ratio of geometric means of `w` over two portions.
pub fn h_ratio(w: &CompositeWeight, curve: &CurvePath, t: Complex64, r1: f64, r2: f64) -> Result<f64> {
    if r1 == r2 {
        return Ok(1.0);
    }
    let frame = curve.frame_at(t)?;
    let d_t = curve.d_t(frame.center);
    for r in [r1, r2] {
        if !(r > 0.0) || r > d_t * (1.0 + 1e-12) {
            return Err(Error::InvalidRadius { radius: r, reason: format!("must lie in (0, d_t = {d_t}]") });
        }
    }
    Ok((mean_log_weight(&frame, w, r1)? - mean_log_weight(&frame, w, r2)?).exp())
}

/// Settings for the `V_t⁰` limsup estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct V0Window {
    /// `ln(R / d_t)` at the small end of the tail window.
    pub ln_lo: f64,
    /// `ln(R / d_t)` at the large end of the tail window.
    pub ln_hi: f64,
    /// Lattice step in `ln R`.
    pub step: f64,
}

impl Default for V0Window {
    /// The tail window sits at `R ∈ [e^-100, e^-80]·d_t`, far enough down
    /// that `xR ≤ d_t` for every `x ≤ 2^20`.
    fn default() -> Self {
        V0Window { ln_lo: -100.0, ln_hi: -80.0, step: DEFAULT_STEP }
    }
}

/// Evaluator of `V_t⁰w` at a fixed point, caching the mean log-weight on
/// the `ln R` lattice.
pub struct V0Evaluator<'a> {
    w: &'a CompositeWeight,
    frame: LocalFrame,
    ln_dt: f64,
    window: V0Window,
    cache: std::collections::HashMap<i64, f64>,
}

impl<'a> V0Evaluator<'a> {
    pub fn new(w: &'a CompositeWeight, curve: &CurvePath, t: Complex64, window: V0Window) -> Result<Self> {
        let frame = curve.frame_at(t)?;
        let ln_dt = curve.d_t(frame.center).ln();
        Ok(V0Evaluator { w, frame, ln_dt, window, cache: Default::default() })
    }

    fn ml_lattice(&mut self, k: i64) -> Result<f64> {
        if let Some(v) = self.cache.get(&k) {
            return Ok(*v);
        }
        let r = (self.ln_dt + k as f64 * self.window.step).exp();
        let v = mean_log_weight(&self.frame, self.w, r)?;
        self.cache.insert(k, v);
        Ok(v)
    }

    fn ml_at(&self, ln_r: f64) -> Result<f64> {
        mean_log_weight(&self.frame, self.w, (self.ln_dt + ln_r).exp())
    }

    /// `ln V_t⁰w(x)` as the maximum of `ln H(xR, R)` over the tail window.
    ///
    /// The window is scanned on the `ln R` lattice and the best lattice
    /// point is refined by golden-section search.
    pub fn ln_v0(&mut self, ln_x: f64) -> Result<f64> {
        if ln_x == 0.0 {
            return Ok(0.0);
        }
        let step = self.window.step;
        let k_lo = (self.window.ln_lo / step).ceil() as i64;
        let k_hi = (self.window.ln_hi / step).floor() as i64;
        let shift = ln_x / step;
        let shift_is_lattice = (shift - shift.round()).abs() < 1e-9;
        let mut best = (f64::NEG_INFINITY, k_lo);
        for k in k_lo..=k_hi {
            let num = if shift_is_lattice {
                self.ml_lattice(k + shift.round() as i64)?
            } else {
                self.ml_at(k as f64 * step + ln_x)?
            };
            let val = num - self.ml_lattice(k)?;
            if val > best.0 {
                best = (val, k);
            }
        }
        let f = |lr: f64| -> Result<f64> { Ok(self.ml_at(lr + ln_x)? - self.ml_at(lr)?) };
        let (a, b) = ((best.1 - 1) as f64 * step, (best.1 + 1) as f64 * step);
        let refined = golden_max(f, a, b, 40)?;
        Ok(best.0.max(refined))
    }

    /// Profile of `V_t⁰w` on the standard lattice.
    pub fn profile(&mut self, step: f64, half_width: i32) -> Result<SubmultProfile> {
        let k_min = -half_width;
        let mut ln_phi = Vec::with_capacity((2 * half_width + 1) as usize);
        for k in k_min..=half_width {
            ln_phi.push(self.ln_v0(k as f64 * step)?);
        }
        Ok(SubmultProfile { step, k_min, ln_phi, provenance: Provenance::V0 })
    }
}

/// Golden-section maximization of `f` on `[a, b]`.
pub(crate) fn golden_max(mut f: impl FnMut(f64) -> Result<f64>, mut a: f64, mut b: f64, iters: usize) -> Result<f64> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok(fc.max(fd))
}

/// `V_t⁰w(x)` with the default tail window.
pub fn v0(w: &CompositeWeight, curve: &CurvePath, t: Complex64, x: f64) -> Result<f64> {
    Ok(V0Evaluator::new(w, curve, t, V0Window::default())?.ln_v0(x.ln())?.exp())
}

/// Indices of powerlikeness `(α(V_t⁰w), β(V_t⁰w))` with both
/// characterizations.
pub fn powerlikeness_indices(w: &CompositeWeight, curve: &CurvePath, t: Complex64) -> Result<Indices> {
    let mut ev = V0Evaluator::new(w, curve, t, V0Window::default())?;
    ev.profile(DEFAULT_STEP, DEFAULT_HALF_WIDTH)?.checked_indices("powerlikeness indices")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::RadialRule;

    #[test]
    fn power_profile_is_exactly_multiplicative() {
        let p = SubmultProfile::synthetic(|x| x.powf(0.3));
        let (ok, worst) = p.check_submultiplicative(500, 1);
        assert!(ok && (worst - 1.0).abs() < 1e-12);
        let idx = p.indices();
        assert!((idx.alpha - 0.3).abs() < 1e-12 && (idx.beta - 0.3).abs() < 1e-12);
    }

    #[test]
    fn max_of_powers() {
        let p = SubmultProfile::synthetic(|x| x.powf(0.2).max(x.powf(0.7)));
        assert!(p.check_submultiplicative(1000, 3).0);
        let idx = p.indices();
        assert!((idx.alpha - 0.2).abs() < 1e-12 && (idx.beta - 0.7).abs() < 1e-12);
        assert!(idx.converged());
    }

    #[test]
    fn log_square_profile_fails_submultiplicativity() {
        let step = 0.25;
        let p = SubmultProfile::from_ln_fn(step, 80, Provenance::Synthetic, |lx| (1.0 + lx * lx).ln());
        // x = y = e sits at lattice index 4
        assert!((p.pair_ratio(4, 4) - 1.25).abs() < 1e-12);
        let (ok, worst) = p.check_submultiplicative(1000, 9);
        assert!(!ok && worst >= 1.25);
    }

    #[test]
    fn h_ratio_power_weight_on_segment() {
        let seg = CurvePath::segment(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), 101).unwrap();
        let w = CompositeWeight::single(Complex64::new(0.0, 0.0), RadialRule::Power { gamma: 0.3 });
        let h = h_ratio(&w, &seg, Complex64::new(0.0, 0.0), 0.1, 0.2).unwrap();
        assert!((h - 0.5f64.powf(0.3)).abs() < 1e-8, "{h}");
        assert_eq!(h_ratio(&w, &seg, Complex64::new(0.0, 0.0), 0.1, 0.1).unwrap(), 1.0);
        let one = CompositeWeight::unit();
        assert!((h_ratio(&one, &seg, Complex64::new(0.5, 0.0), 0.1, 0.3).unwrap() - 1.0).abs() < 1e-15);
    }
}
