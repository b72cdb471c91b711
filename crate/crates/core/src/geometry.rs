//! Arc-length polylines in the complex plane: construction, portions
//! `Γ(t,R)`, Carleson constants, the oscillating spiral family and a plain
//! text exchange format.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Relative tolerance (in units of the mesh width) for accepting a point as
/// lying on the curve.
pub const ON_CURVE_TOLERANCE: f64 = 0.05;

/// A rectifiable plane curve stored as a polyline parametrized by arc length.
///
/// For closed curves the closing cell from the last node back to the first
/// is part of the curve and `cumulative_lengths` has one extra entry holding
/// the total length.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePath {
    points: Vec<Complex64>,
    cumulative: Vec<f64>,
    closed: bool,
    label: String,
}

/// The part of a curve inside the open disk `|z - t| < R`.
///
/// Member arcs are stored as arc-length offsets relative to the center, so
/// that very small portions keep full relative precision. On closed curves
/// offsets lie in `[-L/2, L/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePortion {
    pub center: Complex64,
    pub center_arc: f64,
    pub radius: f64,
    pub member_arcs: Vec<(f64, f64)>,
    pub measure: f64,
}

/// One straight piece of a curve seen from a center point.
///
/// The displacement from the center at arc offset `s` is
/// `ref_disp + dir * (s - ref_off)`, where `ref_off` is the end of the piece
/// nearer to the center. Keeping the reference at the near end makes tiny
/// displacements exact on the pieces touching the center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePiece {
    pub off0: f64,
    pub off1: f64,
    pub ref_off: f64,
    pub ref_disp: Complex64,
    pub dir: Complex64,
}

impl FramePiece {
    /// Displacement from the frame center at arc offset `s`.
    pub fn disp(&self, s: f64) -> Complex64 {
        self.ref_disp + self.dir * (s - self.ref_off)
    }

    /// Offsets inside this piece where `|disp| < radius`, if any.
    fn disk_interval(&self, radius: f64) -> Option<(f64, f64)> {
        let proj = self.ref_disp * self.dir.conj();
        let b = proj.re;
        let perp = proj.im;
        let disc = radius * radius - perp * perp;
        if disc <= 0.0 {
            return None;
        }
        let root = disc.sqrt();
        let lo = (self.ref_off - b - root).max(self.off0);
        let hi = (self.ref_off - b + root).min(self.off1);
        (hi > lo).then_some((lo, hi))
    }
}

/// The whole curve unrolled around a center point as ordered straight pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFrame {
    pub center: Complex64,
    pub center_arc: f64,
    pub pieces: Vec<FramePiece>,
}

impl LocalFrame {
    /// Builds the frame of `curve` around arc position `center_arc`.
    pub fn new(curve: &CurvePath, center_arc: f64) -> Self {
        let total = curve.length();
        let s_c = if curve.closed { center_arc.rem_euclid(total) } else { center_arc.clamp(0.0, total) };
        let cells = curve.cell_count();
        let cell = curve.cell_index(s_c);
        let center = curve.position_at(s_c);
        let (lim_lo, lim_hi) = if curve.closed { (-0.5 * total, 0.5 * total) } else { (-s_c, total - s_c) };

        let mut forward = Vec::new();
        let mut backward = Vec::new();
        let dir0 = curve.cell_direction(cell);
        let a0 = curve.cumulative[cell] - s_c;
        let b0 = curve.cumulative[cell + 1] - s_c;
        // the center cell splits into two pieces meeting at offset 0
        if a0 < 0.0 {
            backward.push(FramePiece { off0: a0.max(lim_lo), off1: 0.0, ref_off: 0.0, ref_disp: Complex64::new(0.0, 0.0), dir: dir0 });
        }
        if b0 > 0.0 {
            forward.push(FramePiece { off0: 0.0, off1: b0.min(lim_hi), ref_off: 0.0, ref_disp: Complex64::new(0.0, 0.0), dir: dir0 });
        }

        let mut off = b0;
        let mut disp = dir0 * b0;
        let mut j = cell;
        for _ in 1..cells {
            if off >= lim_hi {
                break;
            }
            j = if curve.closed { (j + 1) % cells } else { j + 1 };
            if j >= cells {
                break;
            }
            let len = curve.cell_length(j);
            let dir = curve.cell_direction(j);
            let end = (off + len).min(lim_hi);
            forward.push(FramePiece { off0: off, off1: end, ref_off: off, ref_disp: disp, dir });
            disp += dir * len;
            off += len;
        }

        let mut off = a0;
        let mut disp = dir0 * a0;
        let mut j = cell;
        for _ in 1..cells {
            if off <= lim_lo {
                break;
            }
            if curve.closed {
                j = (j + cells - 1) % cells;
            } else if j == 0 {
                break;
            } else {
                j -= 1;
            }
            let len = curve.cell_length(j);
            let dir = curve.cell_direction(j);
            let start = (off - len).max(lim_lo);
            backward.push(FramePiece { off0: start, off1: off, ref_off: off, ref_disp: disp, dir });
            disp -= dir * len;
            off -= len;
        }

        backward.reverse();
        backward.extend(forward);
        backward.retain(|p| p.off1 > p.off0);
        LocalFrame { center, center_arc: s_c, pieces: backward }
    }

    /// Merged member arcs of the portion with the given radius.
    pub fn portion_arcs(&self, radius: f64) -> Vec<(f64, f64)> {
        let mut arcs: Vec<(f64, f64)> = Vec::new();
        for piece in &self.pieces {
            if let Some((lo, hi)) = piece.disk_interval(radius) {
                match arcs.last_mut() {
                    Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                    _ => arcs.push((lo, hi)),
                }
            }
        }
        arcs
    }

    /// Total arc measure of the portion with the given radius.
    pub fn portion_measure(&self, radius: f64) -> f64 {
        self.pieces
            .iter()
            .filter_map(|p| p.disk_interval(radius))
            .map(|(lo, hi)| hi - lo)
            .sum()
    }

    /// Displacement from the center at arc offset `s`.
    pub fn disp_at(&self, s: f64) -> Complex64 {
        let idx = self.pieces.partition_point(|p| p.off1 < s).min(self.pieces.len() - 1);
        self.pieces[idx].disp(s)
    }

    /// Arc offsets of the piece boundaries, i.e. polyline vertices, in order.
    pub fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.pieces.iter().map(|p| p.off0).chain(self.pieces.last().map(|p| p.off1))
    }
}

impl CurvePath {
    /// Builds a polyline through `points`; a closed polyline also joins the
    /// last point back to the first.
    pub fn build_polyline(points: Vec<Complex64>, closed: bool) -> Result<Self> {
        Self::build_labeled(points, closed, if closed { "closed polyline" } else { "polyline" })
    }

    /// As [`CurvePath::build_polyline`] with an explicit label.
    pub fn build_labeled(points: Vec<Complex64>, closed: bool, label: &str) -> Result<Self> {
        let min_points = if closed { 3 } else { 2 };
        if points.len() < min_points {
            return Err(Error::InvalidGeometry(format!(
                "need at least {min_points} points, got {}",
                points.len()
            )));
        }
        if let Some(i) = points.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidGeometry(format!("point {i} is not finite")));
        }
        let cells = if closed { points.len() } else { points.len() - 1 };
        let mut cumulative = Vec::with_capacity(cells + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for i in 0..cells {
            let a = points[i];
            let b = points[(i + 1) % points.len()];
            let len = (b - a).norm();
            if len == 0.0 {
                return Err(Error::InvalidGeometry(format!(
                    "consecutive points {i} and {} coincide",
                    (i + 1) % points.len()
                )));
            }
            acc += len;
            cumulative.push(acc);
        }
        Ok(CurvePath { points, cumulative, closed, label: label.to_string() })
    }

    /// Straight segment from `a` to `b` sampled at `nodes` equally spaced points.
    pub fn segment(a: Complex64, b: Complex64, nodes: usize) -> Result<Self> {
        if nodes < 2 {
            return Err(invalid("nodes", "a segment needs at least 2 nodes"));
        }
        let pts = (0..nodes).map(|k| a + (b - a) * (k as f64 / (nodes - 1) as f64)).collect();
        Self::build_labeled(pts, false, "segment")
    }

    /// Circle sampled at `nodes` equally spaced points, counterclockwise from
    /// angle 0.
    pub fn circle(center: Complex64, radius: f64, nodes: usize) -> Result<Self> {
        if nodes < 3 || radius <= 0.0 || !radius.is_finite() {
            return Err(invalid("circle", "need at least 3 nodes and a positive radius"));
        }
        let pts = (0..nodes)
            .map(|k| center + Complex64::from_polar(radius, std::f64::consts::TAU * k as f64 / nodes as f64))
            .collect();
        Self::build_labeled(pts, true, "circle")
    }

    /// The curve `x + i x^alpha sin(1/x)` on `(0, 1]` together with the
    /// point `0`, sampled with steps that resolve every oscillation.
    ///
    /// Nodes run from `x_min = 4 / resolution` up to 1 with step
    /// `min(1/resolution, 2πx²/32)`, so each period of `sin(1/x)` receives
    /// 32 cells. A straight cell joins the node at `0` to the first node.
    pub fn spiral_example(alpha: f64, resolution: usize) -> Result<Self> {
        if !(alpha > 1.0) {
            return Err(Error::NotRectifiable { alpha });
        }
        if resolution < 64 {
            return Err(invalid("resolution", format!("must be at least 64, got {resolution}")));
        }
        const CELLS_PER_PERIOD: f64 = 32.0;
        let res = resolution as f64;
        let x_min = 4.0 / res;
        let z = |x: f64| Complex64::new(x, x.powf(alpha) * (1.0 / x).sin());
        let mut pts = vec![Complex64::new(0.0, 0.0)];
        let mut x = x_min;
        while x < 1.0 {
            pts.push(z(x));
            let dx = (1.0 / res).min(std::f64::consts::TAU * x * x / CELLS_PER_PERIOD);
            x += dx;
        }
        if (1.0 - pts.last().map_or(0.0, |p| p.re)) > 1e-3 / res {
            pts.push(z(1.0));
        }
        Self::build_labeled(pts, false, &format!("spiral alpha={alpha} resolution={resolution}"))
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn node_count(&self) -> usize {
        self.points.len()
    }

    pub fn cumulative_lengths(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Total length `|Γ|`.
    pub fn length(&self) -> f64 {
        *self.cumulative.last().expect("non-empty")
    }

    /// Number of straight cells.
    pub fn cell_count(&self) -> usize {
        self.cumulative.len() - 1
    }

    pub fn cell_length(&self, i: usize) -> f64 {
        self.cumulative[i + 1] - self.cumulative[i]
    }

    /// Unit direction of cell `i`.
    pub fn cell_direction(&self, i: usize) -> Complex64 {
        let a = self.points[i];
        let b = self.points[(i + 1) % self.points.len()];
        let d = b - a;
        d / d.norm()
    }

    /// Largest cell length.
    pub fn mesh_width(&self) -> f64 {
        (0..self.cell_count()).map(|i| self.cell_length(i)).fold(0.0, f64::max)
    }

    /// Largest length among the cells adjacent to node `i`.
    pub fn local_mesh_width(&self, i: usize) -> f64 {
        let cells = self.cell_count();
        let mut w: f64 = 0.0;
        if i < cells {
            w = w.max(self.cell_length(i));
        }
        if i > 0 {
            w = w.max(self.cell_length(i - 1));
        } else if self.closed {
            w = w.max(self.cell_length(cells - 1));
        }
        w
    }

    /// Arc position of node `i`.
    pub fn node_arc(&self, i: usize) -> f64 {
        self.cumulative[i]
    }

    /// Index of the cell containing arc position `s` (clamped or wrapped).
    pub fn cell_index(&self, s: f64) -> usize {
        let s = self.normalize_arc(s);
        let idx = self.cumulative.partition_point(|&c| c <= s);
        idx.saturating_sub(1).min(self.cell_count() - 1)
    }

    /// Wraps arc positions on closed curves and clamps them on open ones.
    pub fn normalize_arc(&self, s: f64) -> f64 {
        let total = self.length();
        if self.closed {
            let r = s.rem_euclid(total);
            if r >= total {
                0.0
            } else {
                r
            }
        } else {
            s.clamp(0.0, total)
        }
    }

    /// Point at arc position `s`.
    pub fn position_at(&self, s: f64) -> Complex64 {
        let s = self.normalize_arc(s);
        let i = self.cell_index(s);
        self.points[i] + self.cell_direction(i) * (s - self.cumulative[i])
    }

    /// Point at normalized parameter `u ∈ [0, 1]`.
    pub fn parametrization(&self, u: f64) -> Complex64 {
        self.position_at(u * self.length())
    }

    /// `d_t = max_τ |τ - t|` evaluated over the nodes.
    pub fn d_t(&self, t: Complex64) -> f64 {
        self.points.iter().map(|p| (p - t).norm()).fold(0.0, f64::max)
    }

    /// Arc position of the projection of `t` onto the polyline; fails when
    /// `t` is farther than [`ON_CURVE_TOLERANCE`] mesh widths from it.
    pub fn locate(&self, t: Complex64) -> Result<f64> {
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..self.cell_count() {
            let a = self.points[i];
            let dir = self.cell_direction(i);
            let len = self.cell_length(i);
            let u = ((t - a) * dir.conj()).re.clamp(0.0, len);
            let dist = (a + dir * u - t).norm();
            if dist < best.0 {
                best = (dist, if u >= len { self.cumulative[i + 1] } else { self.cumulative[i] + u });
            }
        }
        let tol = ON_CURVE_TOLERANCE * self.mesh_width();
        if best.0 > tol {
            return Err(Error::PointNotOnCurve { re: t.re, im: t.im, distance: best.0 });
        }
        Ok(self.normalize_arc(best.1))
    }

    /// Projects `t` onto the curve.
    pub fn snap(&self, t: Complex64) -> Result<Complex64> {
        Ok(self.position_at(self.locate(t)?))
    }

    /// Local frame around the curve point nearest to `t`.
    pub fn frame_at(&self, t: Complex64) -> Result<LocalFrame> {
        let s = self.locate(t)?;
        Ok(LocalFrame::new(self, s))
    }

    /// The portion `Γ(t,R)`.
    pub fn portion(&self, t: Complex64, radius: f64) -> Result<CurvePortion> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidRadius { radius, reason: "must be positive and finite".into() });
        }
        let frame = self.frame_at(t)?;
        let member_arcs = frame.portion_arcs(radius);
        let measure = member_arcs.iter().map(|(a, b)| b - a).sum();
        Ok(CurvePortion { center: frame.center, center_arc: frame.center_arc, radius, member_arcs, measure })
    }

    /// Grid estimate of `sup |Γ(t,R)| / R`.
    ///
    /// `t` runs over `t_samples` evenly spaced node indices; for each `t`,
    /// `R` runs over `r_samples` log-spaced radii from four local mesh widths
    /// up to and including `d_t`.
    pub fn carleson_constant(&self, t_samples: usize, r_samples: usize) -> Result<f64> {
        if t_samples < 8 || r_samples < 8 {
            return Err(invalid("samples", "t_samples and r_samples must be at least 8"));
        }
        let n = self.node_count();
        let count = t_samples.min(n);
        let mut best: f64 = 0.0;
        for k in 0..count {
            let i = if count == 1 { 0 } else { (k * (n - 1)) / (count - 1) };
            let t = self.points[i];
            let frame = LocalFrame::new(self, self.cumulative[i]);
            let d_t = self.d_t(t);
            let r_min = (4.0 * self.local_mesh_width(i)).min(d_t);
            for j in 0..r_samples {
                let frac = j as f64 / (r_samples - 1) as f64;
                let r = if j + 1 == r_samples { d_t } else { r_min * (d_t / r_min).powf(frac) };
                if r > 0.0 {
                    best = best.max(frame.portion_measure(r) / r);
                }
            }
        }
        Ok(best)
    }

    /// Carleson constants of one curve family at increasing resolutions.
    pub fn carleson_study(
        resolutions: &[usize],
        build: impl Fn(usize) -> Result<CurvePath>,
        t_samples: usize,
        r_samples: usize,
    ) -> Result<CarlesonStudy> {
        if resolutions.len() < 2 {
            return Err(invalid("resolutions", "need at least two resolutions"));
        }
        let constants = resolutions
            .iter()
            .map(|&r| build(r)?.carleson_constant(t_samples, r_samples))
            .collect::<Result<Vec<_>>>()?;
        Ok(CarlesonStudy { resolutions: resolutions.to_vec(), constants })
    }

    /// Serializes the curve as `closed 0|1` followed by `x y` lines.
    pub fn to_text(&self) -> String {
        let mut out = format!("closed {}\n", u8::from(self.closed));
        for p in &self.points {
            let _ = writeln!(out, "{:.16e} {:.16e}", p.re, p.im);
        }
        out
    }

    /// Parses the text format written by [`CurvePath::to_text`].
    pub fn from_text(text: &str, source: &str) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse { file: source.to_string(), line, message };
        let mut closed = None;
        let mut pts = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if closed.is_none() {
                closed = Some(match line {
                    "closed 0" => false,
                    "closed 1" => true,
                    _ => return Err(parse_err(idx + 1, format!("expected `closed 0|1`, found `{line}`"))),
                });
                continue;
            }
            let mut it = line.split_whitespace();
            let mut coord = |name: &str| -> Result<f64> {
                it.next()
                    .ok_or_else(|| parse_err(idx + 1, format!("missing {name} coordinate")))?
                    .parse::<f64>()
                    .map_err(|e| parse_err(idx + 1, format!("bad {name} coordinate: {e}")))
            };
            let x = coord("x")?;
            let y = coord("y")?;
            if it.next().is_some() {
                return Err(parse_err(idx + 1, "expected exactly two columns".into()));
            }
            pts.push(Complex64::new(x, y));
        }
        let closed = closed.ok_or_else(|| parse_err(1, "missing `closed 0|1` header".into()))?;
        Self::build_labeled(pts, closed, source)
    }
}

/// Relative change per refinement below which a Carleson constant is stable.
pub const CARLESON_STABLE_DRIFT: f64 = 0.05;
/// Relative growth per refinement from which a Carleson constant diverges.
pub const CARLESON_DIVERGING_GROWTH: f64 = 0.20;

/// Carleson constants of a curve family under refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct CarlesonStudy {
    pub resolutions: Vec<usize>,
    pub constants: Vec<f64>,
}

impl CarlesonStudy {
    /// Relative change of the constant at each refinement.
    pub fn drifts(&self) -> Vec<f64> {
        self.constants.windows(2).map(|w| w[1] / w[0] - 1.0).collect()
    }

    /// Every refinement moves the constant by less than 5%.
    pub fn stable(&self) -> bool {
        self.drifts().iter().all(|d| d.abs() < CARLESON_STABLE_DRIFT)
    }

    /// Every refinement grows the constant by at least 20%.
    pub fn diverging(&self) -> bool {
        self.drifts().iter().all(|&d| d >= CARLESON_DIVERGING_GROWTH)
    }
}
