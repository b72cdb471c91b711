//! Gauss–Legendre rules and graded composite quadrature for integrands
//! with integrable point singularities (logarithmic or weak power type).

use std::sync::OnceLock;

/// Number of Gauss–Legendre points per panel.
pub const GAUSS_POINTS: usize = 8;

/// Ratio between consecutive cells of a graded refinement.
pub const GRADING_RATIO: f64 = 0.5;

/// Upper bound on uniform panels used for a subinterval free of singular points.
pub const MAX_SMOOTH_PANELS: usize = 16;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn default_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GAUSS_POINTS))
}

/// Applies the default Gauss rule on `[a, b]`.
pub fn gauss_panel(a: f64, b: f64, f: &mut impl FnMut(f64) -> f64) -> f64 {
    let mut acc = 0.0;
    emit_panel(a, b, &mut |x, w| acc += w * f(x));
    acc
}

/// Feeds the nodes and weights of the default Gauss rule on `[a, b]` to `sink`.
fn emit_panel(a: f64, b: f64, sink: &mut impl FnMut(f64, f64)) {
    let (x, w) = default_rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    for (xi, wi) in x.iter().zip(w) {
        sink(mid + half * xi, wi * half);
    }
}

/// Integrates `f` over `[a, b]` with geometric grading toward every point of
/// `singular` lying in the closed interval.
///
/// A subinterval between consecutive breakpoints is covered by cells
/// shrinking by [`GRADING_RATIO`] toward its singular ends (split at the
/// midpoint when both ends are singular) until the innermost cell is below
/// `floor_rel` times the subinterval length. The innermost cell is
/// integrated with the Gauss rule, whose nodes never touch the endpoint.
/// Subintervals without a singular end use `smooth_panels` uniform panels,
/// at most [`MAX_SMOOTH_PANELS`].
pub fn integrate_graded(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    singular: &[f64],
    floor_rel: f64,
    smooth_panels: usize,
) -> f64 {
    let mut acc = 0.0;
    graded_rule(a, b, singular, floor_rel, 0.0, smooth_panels, &mut |x, w| acc += w * f(x));
    acc
}

/// As [`integrate_graded`], but omitting the points within distance
/// `exclusion` of every singular point. With a positive exclusion the
/// graded cells stop at that distance, so integrands that are not
/// integrable at the singular point give finite values that grow as the
/// exclusion shrinks.
pub fn integrate_graded_excluding(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    singular: &[f64],
    floor_rel: f64,
    exclusion: f64,
    smooth_panels: usize,
) -> f64 {
    let mut acc = 0.0;
    graded_rule(a, b, singular, floor_rel, exclusion, smooth_panels, &mut |x, w| acc += w * f(x));
    acc
}

/// Emits the nodes and weights of the graded rule described in
/// [`integrate_graded_excluding`].
pub fn graded_rule(
    a: f64,
    b: f64,
    singular: &[f64],
    floor_rel: f64,
    exclusion: f64,
    smooth_panels: usize,
    sink: &mut impl FnMut(f64, f64),
) {
    if b <= a {
        return;
    }
    let singular_at = |x: f64| singular.iter().any(|&s| s == x);
    let mut cuts: Vec<f64> = singular.iter().copied().filter(|&s| s >= a && s <= b).collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let panels = smooth_panels.clamp(1, MAX_SMOOTH_PANELS);
    for pair in cuts.windows(2) {
        let (u, v) = (pair[0], pair[1]);
        match (singular_at(u), singular_at(v)) {
            (false, false) => {
                let h = (v - u) / panels as f64;
                for k in 0..panels {
                    let lo = u + k as f64 * h;
                    let hi = if k + 1 == panels { v } else { lo + h };
                    emit_panel(lo, hi, sink);
                }
            }
            (true, true) => {
                let mid = 0.5 * (u + v);
                graded_half(u, mid, true, floor_rel, exclusion, sink);
                graded_half(mid, v, false, floor_rel, exclusion, sink);
            }
            (true, false) => graded_half(u, v, true, floor_rel, exclusion, sink),
            (false, true) => graded_half(u, v, false, floor_rel, exclusion, sink),
        }
    }
}

/// Covers `[u, v]` with cells graded toward `u` when `toward_left` and
/// toward `v` otherwise, skipping distances below `exclusion` from that end.
fn graded_half(u: f64, v: f64, toward_left: bool, floor_rel: f64, exclusion: f64, sink: &mut impl FnMut(f64, f64)) {
    let len = v - u;
    if exclusion >= len {
        return;
    }
    let floor = if exclusion > 0.0 { exclusion } else { (floor_rel * len).max(f64::MIN_POSITIVE) };
    let mut outer = len;
    while outer > floor {
        let inner = (outer * GRADING_RATIO).max(exclusion);
        let (lo, hi) = if toward_left { (u + inner, u + outer) } else { (v - outer, v - inner) };
        emit_panel(lo, hi, sink);
        outer = inner;
    }
    if exclusion == 0.0 {
        let (lo, hi) = if toward_left { (u, u + outer) } else { (v - outer, v) };
        emit_panel(lo, hi, sink);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for deg in 0..16 {
            let approx: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((approx - exact).abs() < 1e-13, "degree {deg}: {approx} vs {exact}");
        }
    }

    #[test]
    fn graded_rule_handles_log_singularity() {
        // integral of ln x over (0, 1) is -1
        let v = integrate_graded(|x| x.ln(), 0.0, 1.0, &[0.0], 1e-12, 4);
        assert!((v + 1.0).abs() < 1e-9, "{v}");
        // interior singularity: integral of ln|x - 0.3| over (0, 1)
        let exact = 0.3 * 0.3f64.ln() - 0.3 + 0.7 * 0.7f64.ln() - 0.7;
        let v = integrate_graded(|x| (x - 0.3f64).abs().ln(), 0.0, 1.0, &[0.3], 1e-12, 4);
        assert!((v - exact).abs() < 1e-9, "{v} vs {exact}");
    }

    #[test]
    fn excluded_neighborhood_is_skipped() {
        // integral of x^{-2} over (1e-3, 1) is 999
        let v = integrate_graded_excluding(|x| x.powi(-2), 0.0, 1.0, &[0.0], 1e-12, 1e-3, 4);
        assert!((v - 999.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn graded_rule_handles_weak_power_singularity() {
        // integral of x^{-1/2} over (0, 1) is 2
        let v = integrate_graded(|x| x.powf(-0.5), 0.0, 1.0, &[0.0], 1e-14, 4);
        assert!((v - 2.0).abs() < 1e-6, "{v}");
    }
}
