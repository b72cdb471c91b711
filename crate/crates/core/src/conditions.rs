//! Muckenhoupt-type suprema over portions, the Hästö–Diening functional,
//! and the index conditions for boundedness of the singular integral.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::exponent::{conjugate_value, ExponentFunction};
use crate::geometry::{CurvePath, LocalFrame};
use crate::quadrature::graded_rule;
use crate::submult::anchor_offsets;
use crate::vlebesgue::DiscreteModular;
use crate::weights::{mo_indices, CompositeWeight};

/// Relative floor of the portion quadrature around anchors.
pub const PORTION_QUADRATURE_FLOOR: f64 = 1e-10;
/// Per-halving growth at or above which a supremum counts as diverging.
pub const DIVERGING_GROWTH: f64 = 1.03;
/// Per-halving growth at or below which a supremum counts as settled.
pub const FINITE_GROWTH: f64 = 1.01;
/// Margins at or below this value count as zero.
pub const MARGIN_TOLERANCE: f64 = 1e-12;

/// Sampling plan for suprema over `(t, R)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Random curve nodes added to the anchors and endpoints.
    pub t_random: usize,
    /// Radii per octave on the lattice `R = d_t 2^{-k/r}`.
    pub r_per_octave: usize,
    /// Smallest radius at the coarsest level; four mesh widths when unset.
    pub r_min: Option<f64>,
    /// Number of halvings of the smallest radius.
    pub levels: usize,
    pub seed: u64,
    /// Anchor neighborhoods of radius `cutoff · R_min` are left out at each
    /// level, so non-integrable singularities show up as growth.
    pub cutoff: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { t_random: 16, r_per_octave: 3, r_min: None, levels: 5, seed: 0, cutoff: 1e-12 }
    }
}

impl GridSpec {
    /// One-line description used in report headers.
    pub fn describe(&self, curve: &CurvePath) -> String {
        format!(
            "t_random={} r_per_octave={} r_min={:.6e} levels={} seed={} cutoff={:e}",
            self.t_random,
            self.r_per_octave,
            self.resolved_r_min(curve),
            self.levels,
            self.seed,
            self.cutoff
        )
    }

    pub fn resolved_r_min(&self, curve: &CurvePath) -> f64 {
        self.r_min.unwrap_or(4.0 * curve.mesh_width())
    }
}

/// Classification of a sampled supremum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Finite,
    Diverging,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Finite => "finite",
            Verdict::Diverging => "diverging",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Outcome of a grid supremum.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    /// Supremum at the finest level.
    pub constant_estimate: f64,
    /// Supremum at each level, coarse to fine.
    pub per_scale_maxima: Vec<f64>,
    pub verdict: Verdict,
    /// Grid description for reproducibility.
    pub grid: String,
    /// `(t_index, R, value)` at the finest level.
    pub cells: Vec<(usize, f64, f64)>,
    /// Cells evaluated with a quasinorm exponent below 1.
    pub quasinorm_cells: usize,
}

impl ConditionReport {
    /// CSV with columns `t_index,R,value` and a closing verdict line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_index,R,value\n");
        for (t, r, v) in &self.cells {
            let _ = writeln!(out, "{t},{r:.10e},{v:.10e}");
        }
        let _ = writeln!(out, "verdict,{},{:.10e}", self.verdict.as_str(), self.constant_estimate);
        out
    }
}

/// Classifies per-level maxima by the last two growth factors.
pub fn classify_levels(maxima: &[f64]) -> Verdict {
    let g: Vec<f64> = maxima.windows(2).map(|w| w[1] / w[0]).collect();
    if g.len() < 2 {
        return Verdict::Inconclusive;
    }
    let last = &g[g.len() - 2..];
    if last.iter().all(|&x| x >= DIVERGING_GROWTH) {
        Verdict::Diverging
    } else if last.iter().all(|&x| x <= FINITE_GROWTH) {
        Verdict::Finite
    } else {
        Verdict::Inconclusive
    }
}

/// Sample points of the `t` grid: anchors, open-curve endpoints and random
/// nodes, as arc positions.
pub fn t_grid(curve: &CurvePath, w: &CompositeWeight, grid: &GridSpec) -> Result<Vec<f64>> {
    let mut arcs = Vec::new();
    for a in w.anchors() {
        arcs.push(curve.locate(a)?);
    }
    if !curve.is_closed() {
        arcs.push(0.0);
        arcs.push(curve.length());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
    for _ in 0..grid.t_random {
        let i = rng.gen_range(0..curve.node_count());
        arcs.push(curve.node_arc(i));
    }
    Ok(arcs)
}

/// Quadrature point on a portion.
struct PortionPoint {
    ln_w: f64,
    p: f64,
    weight: f64,
}

/// Graded Gauss points on `Γ(t,R)` with anchor neighborhoods of radius
/// `exclusion` removed. Also reports whether any anchor lies in the portion.
fn portion_points(
    frame: &LocalFrame,
    w: &CompositeWeight,
    p: &ExponentFunction,
    radius: f64,
    exclusion: f64,
) -> (Vec<PortionPoint>, bool) {
    let arcs = frame.portion_arcs(radius);
    let anchors = anchor_offsets(frame, w, &arcs);
    let mut out = Vec::new();
    for piece in &frame.pieces {
        for &(a, b) in &arcs {
            let lo = a.max(piece.off0);
            let hi = b.min(piece.off1);
            if hi <= lo {
                continue;
            }
            graded_rule(lo, hi, &anchors, PORTION_QUADRATURE_FLOOR, exclusion, 2, &mut |s, wt| {
                out.push(PortionPoint {
                    ln_w: w.ln_eval_disp(frame.center, piece.disp(s)),
                    p: p.at_arc(frame.center_arc + s),
                    weight: wt,
                });
            });
        }
    }
    (out, !anchors.is_empty())
}

/// `(1/R) ‖w χ‖_{p(·)} ‖w⁻¹ χ‖_{q(·)}` on one portion.
fn ap_value(points: &[PortionPoint], radius: f64) -> Result<(f64, bool)> {
    let mut m1 = DiscreteModular::new();
    let mut m2 = DiscreteModular::new();
    for q in points {
        m1.push(q.ln_w, q.p, q.weight);
        m2.push(-q.ln_w, conjugate_value(q.p), q.weight);
    }
    Ok((m1.solve_unit()? * m2.solve_unit()? / radius, false))
}

/// `R^{-p_Γ} ∫ w^p · ‖w^{-p} χ‖_{q/p}` on one portion, with `p_Γ` the
/// harmonic mean of `p` over the portion. The flag is set when `q/p < 1`
/// somewhere, where the functional is only a quasinorm.
fn hd_value(points: &[PortionPoint], radius: f64) -> Result<(f64, bool)> {
    let mut measure = 0.0;
    let mut inv_p = 0.0;
    let mut ln_terms = Vec::with_capacity(points.len());
    let mut m3 = DiscreteModular::new();
    let mut quasi = false;
    for q in points {
        measure += q.weight;
        inv_p += q.weight / q.p;
        ln_terms.push(q.weight.ln() + q.p * q.ln_w);
        let ratio = conjugate_value(q.p) / q.p;
        quasi |= ratio < 1.0;
        m3.push(-q.p * q.ln_w, ratio, q.weight);
    }
    if ln_terms.is_empty() {
        return Ok((0.0, quasi));
    }
    let p_gamma = measure / inv_p;
    let top = ln_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ln_integral = top + ln_terms.iter().map(|v| (v - top).exp()).sum::<f64>().ln();
    let n3 = m3.solve_unit()?;
    Ok(((ln_integral - p_gamma * radius.ln()).exp() * n3, quasi))
}

fn grid_supremum(
    curve: &CurvePath,
    p: &ExponentFunction,
    w: &CompositeWeight,
    grid: &GridSpec,
    value: fn(&[PortionPoint], f64) -> Result<(f64, bool)>,
) -> Result<ConditionReport> {
    if grid.r_per_octave == 0 {
        return Err(invalid("r_per_octave", "must be positive"));
    }
    let w = w.snapped_to(curve)?;
    let r_min = grid.resolved_r_min(curve);
    let t_arcs = t_grid(curve, &w, grid)?;
    let levels = grid.levels.max(1);
    let mut maxima = vec![0.0f64; levels + 1];
    let mut cells = Vec::new();
    let mut quasinorm_cells = 0;
    let mut r_count = 0;
    for (ti, &s) in t_arcs.iter().enumerate() {
        let frame = LocalFrame::new(curve, s);
        let d_t = curve.d_t(frame.center);
        let mut k = 0usize;
        loop {
            let r = d_t * 2f64.powf(-(k as f64) / grid.r_per_octave as f64);
            let finest = r_min * 2f64.powi(-(levels as i32));
            if r < finest * (1.0 - 1e-12) || r <= 0.0 {
                break;
            }
            k += 1;
            r_count = r_count.max(k);
            let mut cached: Option<(f64, bool)> = None;
            for (lvl, max) in maxima.iter_mut().enumerate() {
                let level_min = r_min * 2f64.powi(-(lvl as i32));
                if r < level_min * (1.0 - 1e-12) {
                    continue;
                }
                let (v, quasi) = match cached {
                    Some(c) => c,
                    None => {
                        let (pts, has_anchor) = portion_points(&frame, &w, p, r, grid.cutoff * level_min);
                        let out = value(&pts, r)?;
                        if !has_anchor {
                            cached = Some(out);
                        }
                        out
                    }
                };
                *max = max.max(v);
                if lvl == levels {
                    cells.push((ti, r, v));
                    quasinorm_cells += usize::from(quasi);
                }
            }
        }
    }
    let verdict = classify_levels(&maxima);
    Ok(ConditionReport {
        constant_estimate: maxima[levels],
        per_scale_maxima: maxima,
        verdict,
        grid: format!("t_count={} r_count={} {}", t_arcs.len(), r_count, grid.describe(curve)),
        cells,
        quasinorm_cells,
    })
}

/// Grid supremum of `(1/R) ‖w χ_{Γ(t,R)}‖_{p(·)} ‖w⁻¹ χ_{Γ(t,R)}‖_{q(·)}`.
///
/// The verdict compares suprema over `R ≥ R_min 2^{-L}` for successive
/// levels `L`: diverging when the last two growth factors are at least
/// [`DIVERGING_GROWTH`], finite when both are at most [`FINITE_GROWTH`].
pub fn ap_constant(curve: &CurvePath, p: &ExponentFunction, w: &CompositeWeight, grid: &GridSpec) -> Result<ConditionReport> {
    grid_supremum(curve, p, w, grid, ap_value)
}

/// Grid supremum of the Hästö–Diening functional
/// `R^{-p_Γ(t,R)} ∫_{Γ(t,R)} w^p |dτ| · ‖w^{-p} χ_{Γ(t,R)}‖_{q(·)/p(·)}`.
pub fn hd_constant(curve: &CurvePath, p: &ExponentFunction, w: &CompositeWeight, grid: &GridSpec) -> Result<ConditionReport> {
    grid_supremum(curve, p, w, grid, hd_value)
}

/// Margins of the index conditions at one anchor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnchorMargins {
    /// `1/p(t_k) + m(w_k)`
    pub lower: f64,
    /// `1 - 1/p(t_k) - M(w_k)`
    pub upper: f64,
    /// `m(w_k)`, the slope of `lower` under `w ↦ w^{1+ε}`.
    pub m: f64,
    /// `M(w_k)`; `upper` has slope `-M`.
    pub big_m: f64,
}

impl AnchorMargins {
    pub fn new(p_at_anchor: f64, m: f64, big_m: f64) -> Self {
        AnchorMargins { lower: 1.0 / p_at_anchor + m, upper: 1.0 - 1.0 / p_at_anchor - big_m, m, big_m }
    }

    /// Margins for `w^{1+ε}`, by the scaling of both indices.
    pub fn scaled(&self, eps: f64) -> (f64, f64) {
        (self.lower + eps * self.m, self.upper - eps * self.big_m)
    }
}

/// Outcome of the sufficient condition.
#[derive(Debug, Clone, PartialEq)]
pub struct KssReport {
    pub satisfied: bool,
    pub margins: Vec<AnchorMargins>,
    pub dini_modulus: f64,
}

/// Margins for every factor: `p` at the anchor and the indices of the factor.
pub fn anchor_margins(curve: &CurvePath, p: &ExponentFunction, w: &CompositeWeight) -> Result<Vec<AnchorMargins>> {
    let cap = curve.length();
    w.factors()
        .iter()
        .map(|f| {
            let idx = mo_indices(&f.rule, cap)?;
            Ok(AnchorMargins::new(p.at_point(curve, f.anchor)?, idx.alpha, idx.beta))
        })
        .collect()
}

/// Sufficient condition: all margins positive and the curve Carleson.
pub fn kss_from_margins(margins: Vec<AnchorMargins>, dini_modulus: f64, carleson: bool) -> KssReport {
    let satisfied = carleson && margins.iter().all(|m| m.lower > MARGIN_TOLERANCE && m.upper > MARGIN_TOLERANCE);
    KssReport { satisfied, margins, dini_modulus }
}

/// Evaluates the sufficient index condition for boundedness.
pub fn kss_sufficient(
    curve: &CurvePath,
    p: &ExponentFunction,
    w: &CompositeWeight,
    dini_modulus: f64,
    carleson_verdict: bool,
) -> Result<KssReport> {
    Ok(kss_from_margins(anchor_margins(curve, p, w)?, dini_modulus, carleson_verdict))
}

/// Outcome of the necessary condition and its stability sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct NecessaryReport {
    pub holds_nonstrict: bool,
    pub holds_strict: bool,
    pub margins: Vec<AnchorMargins>,
    /// Largest `ε₀` such that all nonstrict margins of `w^{1+ε}` stay
    /// nonnegative for `|ε| < ε₀`; infinite when no margin moves with `ε`.
    pub eps0: f64,
    /// `(ε, smallest margin of w^{1+ε})` on the sweep grid.
    pub sweep: Vec<(f64, f64)>,
}

/// Default `ε` sweep grid.
pub const EPS_SWEEP: [f64; 9] = [-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0];

/// Necessary conditions from given margins.
pub fn necessary_from_margins(margins: Vec<AnchorMargins>, eps_grid: &[f64]) -> NecessaryReport {
    let holds_nonstrict = margins.iter().all(|m| m.lower >= -MARGIN_TOLERANCE && m.upper >= -MARGIN_TOLERANCE);
    let holds_strict = margins.iter().all(|m| m.lower > MARGIN_TOLERANCE && m.upper > MARGIN_TOLERANCE);
    let mut eps0 = f64::INFINITY;
    if !holds_nonstrict {
        eps0 = 0.0;
    } else {
        for m in &margins {
            for (value, slope) in [(m.lower, m.m), (m.upper, -m.big_m)] {
                let value = if value.abs() <= MARGIN_TOLERANCE { 0.0 } else { value };
                if slope != 0.0 {
                    eps0 = eps0.min(value / slope.abs());
                }
            }
        }
    }
    let sweep = eps_grid
        .iter()
        .map(|&e| {
            let worst = margins.iter().map(|m| {
                let (a, b) = m.scaled(e);
                a.min(b)
            });
            (e, worst.fold(f64::INFINITY, f64::min))
        })
        .collect();
    NecessaryReport { holds_nonstrict, holds_strict, margins, eps0, sweep }
}

/// Evaluates the necessary index condition and the `ε`-stability sweep.
pub fn necessary_check(curve: &CurvePath, p: &ExponentFunction, w: &CompositeWeight) -> Result<NecessaryReport> {
    Ok(necessary_from_margins(anchor_margins(curve, p, w)?, &EPS_SWEEP))
}

/// Khvedelidze strip membership `0 < 1/p + λ < 1`.
pub fn in_khvedelidze_strip(p: f64, lambda: f64) -> bool {
    let s = 1.0 / p + lambda;
    s > MARGIN_TOLERANCE && s < 1.0 - MARGIN_TOLERANCE
}

/// A point on the curve as a complex number, for callers holding arcs.
pub fn point_at(curve: &CurvePath, arc: f64) -> Complex64 {
    curve.position_at(arc)
}
