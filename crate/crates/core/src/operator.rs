//! Dense discretizations of the Cauchy singular integral
//! `(Sf)(t) = (1/πi) PV∫_Γ f(τ)/(τ - t) dτ` and lower-bound estimates of its
//! norm on weighted variable Lebesgue spaces.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::exponent::{conjugate_value, ExponentFunction};
use crate::geometry::{CurvePath, LocalFrame};
use crate::vlebesgue::{DiscreteModular, SampledFunction, ANCHOR_COINCIDENCE};
use crate::weights::CompositeWeight;

/// Smallest admissible node count.
pub const MIN_NODES: usize = 32;

/// Default geometric ratio between consecutive layers of a graded mesh.
pub const DEFAULT_GRADING: f64 = 0.6;

/// A quadrature node `τ = base + offset`.
///
/// Nodes produced by a graded mesh share the anchor point as `base`, so
/// differences between nearby nodes are formed from their small offsets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadNode {
    pub base: Complex64,
    pub offset: Complex64,
    /// Unit tangent at the node.
    pub tangent: Complex64,
    /// Arc-length quadrature weight.
    pub weight: f64,
    /// Arc position on the underlying curve.
    pub arc: f64,
}

impl QuadNode {
    pub fn position(&self) -> Complex64 {
        self.base + self.offset
    }

    /// `self - other`, formed to keep precision for nearby nodes.
    pub fn minus(&self, other: &QuadNode) -> Complex64 {
        (self.base - other.base) + (self.offset - other.offset)
    }
}

/// The discretization scheme behind a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureKind {
    /// Closed curves: targets only see nodes at odd index distance, each
    /// with twice the cell weight, so no target meets its own node.
    Interleaved,
    /// Open curves: the exact principal value of `∫ dτ/(τ - t)` over the
    /// node polyline replaces the singular term, which makes rows exact for
    /// constants.
    SingularitySubtraction,
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Complex(Vec<Complex64>),
    /// `phase * re`, used when every entry shares one phase.
    Phased { phase: Complex64, re: Vec<f64> },
}

/// A dense matrix approximating `S` on curve nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedOperator {
    n: usize,
    storage: Storage,
    nodes: Vec<QuadNode>,
    kind: QuadratureKind,
    mesh_width: f64,
    closed: bool,
}

/// Uniform discretization with `nodes` nodes: interleaved on closed curves,
/// singularity subtraction on open ones.
pub fn discretize(curve: &CurvePath, nodes: usize) -> Result<DiscretizedOperator> {
    if nodes < MIN_NODES {
        return Err(Error::DegenerateStencil(format!("need at least {MIN_NODES} nodes, got {nodes}")));
    }
    let total = curve.length();
    if curve.is_closed() {
        if nodes % 2 == 1 {
            return Err(invalid("nodes", "the interleaved scheme needs an even node count"));
        }
        let h = total / nodes as f64;
        let arcs: Vec<f64> = (0..nodes).map(|k| k as f64 * h).collect();
        let qn = nodes_on_curve(curve, &arcs, true);
        Ok(build_interleaved(qn, h))
    } else {
        let arcs: Vec<f64> = (0..nodes).map(|k| total * k as f64 / (nodes - 1) as f64).collect();
        let qn = nodes_on_curve(curve, &arcs, false);
        Ok(build_subtraction(qn, false))
    }
}

/// Layout of a graded mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradedMesh {
    /// Ratio between consecutive layer distances near an anchor.
    pub ratio: f64,
    /// Largest cell as a multiple of `|Γ| / nodes`; `None` leaves the outer
    /// layers purely geometric.
    pub max_cell: Option<f64>,
}

impl Default for GradedMesh {
    fn default() -> Self {
        GradedMesh { ratio: DEFAULT_GRADING, max_cell: None }
    }
}

/// Discretization on a mesh graded geometrically toward `anchors`.
///
/// The curve is split at arc midpoints between consecutive anchors. Each
/// anchor receives a node of its own and layers at arc distances
/// `D, D·r, D·r², …` on both sides, where `D` is the distance to the
/// region boundary. The node budget is spread evenly over the sides.
pub fn discretize_graded(curve: &CurvePath, anchors: &[Complex64], nodes: usize, mesh: GradedMesh) -> Result<DiscretizedOperator> {
    if anchors.is_empty() {
        return discretize(curve, nodes);
    }
    if nodes < MIN_NODES {
        return Err(Error::DegenerateStencil(format!("need at least {MIN_NODES} nodes, got {nodes}")));
    }
    if !(mesh.ratio > 0.0 && mesh.ratio < 1.0) {
        return Err(invalid("ratio", "grading ratio must lie in (0, 1)"));
    }
    let total = curve.length();
    let closed = curve.is_closed();
    let mut arcs: Vec<f64> = anchors.iter().map(|a| curve.locate(*a)).collect::<Result<_>>()?;
    arcs.sort_by(f64::total_cmp);
    arcs.dedup();
    let count = arcs.len();

    // (left span, right span) of each anchor region
    let mut spans = Vec::with_capacity(count);
    for k in 0..count {
        let left = if k > 0 {
            0.5 * (arcs[k] - arcs[k - 1])
        } else if closed {
            0.5 * (arcs[0] + total - arcs[count - 1])
        } else {
            arcs[0]
        };
        let right = if k + 1 < count {
            0.5 * (arcs[k + 1] - arcs[k])
        } else if closed {
            0.5 * (arcs[0] + total - arcs[count - 1])
        } else {
            total - arcs[k]
        };
        spans.push((left, right));
    }
    let sides: usize = spans.iter().map(|(l, r)| usize::from(*l > 0.0) + usize::from(*r > 0.0)).sum();
    // boundary nodes: region midpoints plus open endpoints not at anchors
    let mut boundaries = if closed { count } else { count - 1 };
    if !closed {
        boundaries += usize::from(spans[0].0 > 0.0) + usize::from(spans[count - 1].1 > 0.0);
    }
    let fixed = count + boundaries;
    if nodes <= fixed + sides {
        return Err(Error::DegenerateStencil("node budget too small for the anchors".into()));
    }
    let layers = (nodes - fixed) / sides;
    let mut extra = (nodes - fixed) % sides;
    let cap = mesh.max_cell.map(|m| m * total / nodes as f64);

    let mut qn: Vec<QuadNode> = Vec::with_capacity(nodes);
    let mut region: Vec<(usize, f64)> = Vec::with_capacity(nodes);
    for k in 0..count {
        let frame = LocalFrame::new(curve, arcs[k]);
        let base = frame.center;
        let mut offsets: Vec<f64> = vec![0.0];
        for (sign, span) in [(-1.0, spans[k].0), (1.0, spans[k].1)] {
            if span <= 0.0 {
                continue;
            }
            let mut m = layers;
            if extra > 0 {
                m += 1;
                extra -= 1;
            }
            let mut d = span;
            // the boundary itself is emitted once, by the region on its left
            let emit_boundary = sign > 0.0 || (!closed && k == 0);
            if emit_boundary {
                offsets.push(sign * d);
            }
            for _ in 0..m {
                let next = match cap {
                    Some(c) => (d * mesh.ratio).max(d - c),
                    None => d * mesh.ratio,
                };
                d = next;
                offsets.push(sign * d);
            }
        }
        offsets.sort_by(f64::total_cmp);
        for off in offsets {
            let disp = if off == 0.0 { Complex64::new(0.0, 0.0) } else { frame.disp_at(off) };
            // arcs stay unwrapped so that they increase along the node list
            let arc = arcs[k] + off;
            qn.push(QuadNode { base, offset: disp, tangent: tangent_at(curve, arc), weight: 0.0, arc });
            region.push((k, off));
        }
    }
    // gaps inside a region come from the exact local offsets, since the
    // unwrapped arcs cannot resolve the innermost layers
    let mut gaps = arc_gaps(&qn, total, closed);
    for i in 0..qn.len().saturating_sub(1) {
        if region[i].0 == region[i + 1].0 {
            gaps[i] = region[i + 1].1 - region[i].1;
        }
    }
    assign_trapezoid_weights(&mut qn, &gaps, closed);
    Ok(build_subtraction(qn, closed))
}

/// Unit tangent of the polyline at arc `s`, averaged at vertices.
fn tangent_at(curve: &CurvePath, s: f64) -> Complex64 {
    let s = curve.normalize_arc(s);
    let i = curve.cell_index(s);
    let cum = curve.cumulative_lengths();
    let dir = curve.cell_direction(i);
    let at_start = s == cum[i];
    if at_start && (i > 0 || curve.is_closed()) {
        let prev = if i > 0 { i - 1 } else { curve.cell_count() - 1 };
        let t = dir + curve.cell_direction(prev);
        if t.norm() > 0.0 {
            return t / t.norm();
        }
    }
    dir
}

fn nodes_on_curve(curve: &CurvePath, arcs: &[f64], closed: bool) -> Vec<QuadNode> {
    let total = curve.length();
    let mut qn: Vec<QuadNode> = arcs
        .iter()
        .map(|&s| QuadNode {
            base: Complex64::new(0.0, 0.0),
            offset: curve.position_at(s),
            tangent: tangent_at(curve, s),
            weight: 0.0,
            arc: s,
        })
        .collect();
    let gaps = arc_gaps(&qn, total, closed);
    assign_trapezoid_weights(&mut qn, &gaps, closed);
    qn
}

/// Gaps between consecutive nodes from their arcs; the closing gap is
/// appended for closed curves.
fn arc_gaps(qn: &[QuadNode], total: f64, closed: bool) -> Vec<f64> {
    let n = qn.len();
    let mut gaps: Vec<f64> = qn.windows(2).map(|p| p[1].arc - p[0].arc).collect();
    if closed && n > 0 {
        gaps.push(qn[0].arc + total - qn[n - 1].arc);
    }
    gaps
}

/// Trapezoid weights from the gaps to the neighbors.
fn assign_trapezoid_weights(qn: &mut [QuadNode], gaps: &[f64], closed: bool) {
    let n = qn.len();
    for i in 0..n {
        let left = if i > 0 {
            gaps[i - 1]
        } else if closed {
            gaps[n - 1]
        } else {
            0.0
        };
        let right = if i + 1 < n || closed { gaps[i] } else { 0.0 };
        qn[i].weight = 0.5 * (left + right);
    }
}

fn mesh_width_of(qn: &[QuadNode], closed: bool, total: f64) -> f64 {
    let n = qn.len();
    let mut w: f64 = 0.0;
    for i in 0..n.saturating_sub(1) {
        w = w.max(qn[i + 1].arc - qn[i].arc);
    }
    if closed && n > 0 {
        w = w.max(qn[0].arc + total - qn[n - 1].arc);
    }
    w
}

/// `1/z` without forming `|z|²`, which underflows for the innermost
/// layers of graded meshes.
fn recip(z: Complex64) -> Complex64 {
    let r = z.norm();
    (z.conj() / r) / r
}

/// Principal `ln(b/a)`, computed from moduli and unit directions.
fn log_ratio(b: Complex64, a: Complex64) -> Complex64 {
    let (rb, ra) = (b.norm(), a.norm());
    Complex64::new((rb / ra).ln(), ((b / rb) * (a / ra).conj()).arg())
}

fn inv_pi_i() -> Complex64 {
    Complex64::new(0.0, -1.0 / PI)
}

fn build_interleaved(qn: Vec<QuadNode>, h: f64) -> DiscretizedOperator {
    let n = qn.len();
    let c = inv_pi_i();
    let mut m = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            if (i + n - j) % 2 == 1 {
                m[i * n + j] = c * qn[j].tangent * (2.0 * h) * recip(qn[j].minus(&qn[i]));
            }
        }
    }
    let total = h * n as f64;
    DiscretizedOperator { n, storage: compress(m), mesh_width: mesh_width_of(&qn, true, total), nodes: qn, kind: QuadratureKind::Interleaved, closed: true }
}

/// Row `i` gets `A[i][j] = w_j τ'_j / (πi (τ_j - t_i))` off the diagonal and
/// `A[i][i] = (P_i - Σ_{j≠i} w_j τ'_j/(τ_j - t_i)) / (πi)`, where `P_i` is the
/// principal value of `∫ dτ/(τ - t_i)` over the node polyline plus the
/// turning angle at `t_i`. Endpoint rows of open curves keep a zero diagonal.
fn build_subtraction(qn: Vec<QuadNode>, closed: bool) -> DiscretizedOperator {
    let n = qn.len();
    let c = inv_pi_i();
    let mut m = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        let mut row_sum = Complex64::new(0.0, 0.0);
        for j in 0..n {
            if j == i {
                continue;
            }
            let k = qn[j].tangent * qn[j].weight * recip(qn[j].minus(&qn[i]));
            row_sum += k;
            m[i * n + j] = c * k;
        }
        let endpoint = !closed && (i == 0 || i + 1 == n);
        if !endpoint {
            m[i * n + i] = c * (polyline_pv(&qn, i, closed) - row_sum);
        }
    }
    let total = if closed { qn.iter().map(|q| q.weight).sum() } else { qn[n - 1].arc - qn[0].arc };
    DiscretizedOperator {
        n,
        storage: compress(m),
        mesh_width: mesh_width_of(&qn, closed, total),
        nodes: qn,
        kind: QuadratureKind::SingularitySubtraction,
        closed,
    }
}

/// `PV∫ dτ/(τ - t_i)` over the polyline through the nodes, corrected by the
/// turning angle at node `i` so that it approximates the smooth curve.
fn polyline_pv(qn: &[QuadNode], i: usize, closed: bool) -> Complex64 {
    let n = qn.len();
    let cells = if closed { n } else { n - 1 };
    let mut acc = Complex64::new(0.0, 0.0);
    let prev = if i > 0 { i - 1 } else { n - 1 };
    let next = (i + 1) % n;
    for c in 0..cells {
        let a = c;
        let b = (c + 1) % n;
        if a == i || b == i {
            continue;
        }
        acc += log_ratio(qn[b].minus(&qn[i]), qn[a].minus(&qn[i]));
    }
    let fwd = qn[next].minus(&qn[i]);
    let back = qn[i].minus(&qn[prev]);
    acc += Complex64::new((fwd.norm() / back.norm()).ln(), 0.0);
    let turning = log_ratio(fwd, back).im;
    acc + Complex64::new(0.0, turning)
}

fn compress(m: Vec<Complex64>) -> Storage {
    if m.iter().all(|z| z.re == 0.0) {
        Storage::Phased { phase: Complex64::new(0.0, 1.0), re: m.iter().map(|z| z.im).collect() }
    } else if m.iter().all(|z| z.im == 0.0) {
        Storage::Phased { phase: Complex64::new(1.0, 0.0), re: m.iter().map(|z| z.re).collect() }
    } else {
        Storage::Complex(m)
    }
}

impl DiscretizedOperator {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[QuadNode] {
        &self.nodes
    }

    pub fn kind(&self) -> QuadratureKind {
        self.kind
    }

    pub fn mesh_width(&self) -> f64 {
        self.mesh_width
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Matrix entry `A[i][j]`.
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        match &self.storage {
            Storage::Complex(m) => m[i * self.n + j],
            Storage::Phased { phase, re } => phase * re[i * self.n + j],
        }
    }

    /// Quadrature weights seen by row `i`; their sum is the arc measure the
    /// row integrates over.
    pub fn row_weights(&self, i: usize) -> Vec<f64> {
        let n = self.n;
        match self.kind {
            QuadratureKind::Interleaved => {
                (0..n).map(|j| if (i + n - j) % 2 == 1 { 2.0 * self.nodes[j].weight } else { 0.0 }).collect()
            }
            QuadratureKind::SingularitySubtraction => {
                (0..n).map(|j| if j == i { 0.0 } else { self.nodes[j].weight }).collect()
            }
        }
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        match &self.storage {
            Storage::Complex(m) => (0..n)
                .map(|i| m[i * n..(i + 1) * n].iter().zip(x).map(|(a, b)| a * b).sum())
                .collect(),
            Storage::Phased { phase, re } => {
                let xr: Vec<f64> = x.iter().map(|z| z.re).collect();
                let xi: Vec<f64> = x.iter().map(|z| z.im).collect();
                (0..n)
                    .map(|i| {
                        let row = &re[i * n..(i + 1) * n];
                        let (mut sr, mut si) = (0.0, 0.0);
                        for j in 0..n {
                            sr += row[j] * xr[j];
                            si += row[j] * xi[j];
                        }
                        phase * Complex64::new(sr, si)
                    })
                    .collect()
            }
        }
    }

    /// `y = A^H x`.
    pub fn adjoint_matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        match &self.storage {
            Storage::Complex(m) => {
                let mut y = vec![Complex64::new(0.0, 0.0); n];
                for i in 0..n {
                    let xi = x[i];
                    for (yj, a) in y.iter_mut().zip(&m[i * n..(i + 1) * n]) {
                        *yj += a.conj() * xi;
                    }
                }
                y
            }
            Storage::Phased { phase, re } => {
                let mut yr = vec![0.0; n];
                let mut yi = vec![0.0; n];
                for i in 0..n {
                    let (a, b) = (x[i].re, x[i].im);
                    let row = &re[i * n..(i + 1) * n];
                    for j in 0..n {
                        yr[j] += row[j] * a;
                        yi[j] += row[j] * b;
                    }
                }
                yr.iter().zip(&yi).map(|(a, b)| phase.conj() * Complex64::new(*a, *b)).collect()
            }
        }
    }

    /// Applies the operator to nodal values.
    pub fn apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        if f.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: f.len() });
        }
        Ok(SampledFunction { values: self.matvec(&f.values) })
    }

    /// Samples `f` at the operator nodes.
    pub fn sample(&self, f: impl Fn(Complex64) -> Complex64) -> SampledFunction {
        SampledFunction { values: self.nodes.iter().map(|q| f(q.position())).collect() }
    }

    /// `ln w` at every node; nodes sitting on an anchor take the mean of
    /// `ln w` at the midpoints of their adjacent cells.
    ///
    /// A node built on an anchor as base sits on it only at zero offset;
    /// other nodes count as coinciding within [`ANCHOR_COINCIDENCE`].
    pub fn log_weights(&self, w: &CompositeWeight) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let q = &self.nodes[i];
                let on_anchor = w.factors().iter().filter(|f| !f.rule.is_trivial()).any(|f| {
                    if f.anchor == q.base {
                        q.offset == Complex64::new(0.0, 0.0)
                    } else {
                        ((q.base - f.anchor) + q.offset).norm() <= ANCHOR_COINCIDENCE
                    }
                });
                if !on_anchor {
                    return w.ln_eval_disp(q.base, q.offset);
                }
                let mut acc = 0.0;
                let mut cnt = 0.0;
                let neighbors = [(i > 0 || self.closed).then(|| (i + n - 1) % n), (i + 1 < n || self.closed).then(|| (i + 1) % n)];
                for j in neighbors.into_iter().flatten() {
                    let mid = q.offset + 0.5 * self.nodes[j].minus(q);
                    acc += w.ln_eval_disp(q.base, mid);
                    cnt += 1.0;
                }
                acc / cnt
            })
            .collect()
    }
}

/// Settings of the norm search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpnormOptions {
    /// Random complex Gaussian starts (at least 50).
    pub trials: usize,
    pub seed: u64,
    /// Stop when the relative improvement of one ascent step falls below this.
    pub tol: f64,
    /// Hard cap on ascent steps per start.
    pub max_iter: usize,
    /// Number of best-scoring candidates that are ascended.
    pub ascend: usize,
}

impl Default for OpnormOptions {
    fn default() -> Self {
        OpnormOptions { trials: 50, seed: 0, tol: 1e-6, max_iter: 2000, ascend: 3 }
    }
}

/// Result of a norm search.
#[derive(Debug, Clone, PartialEq)]
pub struct OpnormEstimate {
    /// Best ratio `‖Sf‖ / ‖f‖` found.
    pub value: f64,
    /// Ascent steps taken, summed over starts.
    pub iterations: usize,
}

/// The problem in the variables `g = f w`: `M = W A W⁻¹` on unweighted
/// `L^{p(·)}` with trapezoid weights `d`.
struct NormProblem<'a> {
    op: &'a DiscretizedOperator,
    ln_w: Vec<f64>,
    p: Vec<f64>,
    d: Vec<f64>,
}

impl NormProblem<'_> {
    fn apply(&self, g: &[Complex64]) -> Vec<Complex64> {
        let f: Vec<Complex64> = g.iter().zip(&self.ln_w).map(|(v, lw)| v * (-lw).exp()).collect();
        let mut y = self.op.matvec(&f);
        for (v, lw) in y.iter_mut().zip(&self.ln_w) {
            *v *= lw.exp();
        }
        y
    }

    fn apply_adjoint(&self, phi: &[Complex64]) -> Vec<Complex64> {
        let scaled: Vec<Complex64> = phi.iter().zip(&self.ln_w).map(|(v, lw)| v * lw.exp()).collect();
        let mut z = self.op.adjoint_matvec(&scaled);
        for (v, lw) in z.iter_mut().zip(&self.ln_w) {
            *v *= (-lw).exp();
        }
        z
    }

    fn norm(&self, g: &[Complex64]) -> f64 {
        let mut m = DiscreteModular::new();
        for ((v, p), d) in g.iter().zip(&self.p).zip(&self.d) {
            let a = v.norm();
            if a > 0.0 {
                m.push(a.ln(), *p, *d);
            }
        }
        m.solve_unit().unwrap_or(f64::INFINITY)
    }

    fn ratio(&self, g: &[Complex64]) -> f64 {
        let ng = self.norm(g);
        if !(ng > 0.0) || !ng.is_finite() {
            return 0.0;
        }
        self.norm(&self.apply(g)) / ng
    }

    /// One generalized power step from `g` with image `y = M g` of norm
    /// `ny`; returns the next iterate, normalized to unit norm.
    fn step(&self, y: &[Complex64], ny: f64) -> Option<Vec<Complex64>> {
        // gradient of the Luxemburg norm at y
        let mut phi = vec![Complex64::new(0.0, 0.0); y.len()];
        for j in 0..y.len() {
            let a = y[j].norm();
            if a > 0.0 {
                let pj = self.p[j];
                phi[j] = y[j] / a * (self.d[j] * pj * (a / ny).powf(pj - 1.0));
            }
        }
        let z = self.apply_adjoint(&phi);
        // dual map: maximize Re<z, g> over the unit sphere
        let mut dual = DiscreteModular::new();
        for j in 0..z.len() {
            let a = z[j].norm();
            if a > 0.0 {
                let pj = self.p[j];
                dual.push((a / (self.d[j] * pj)).ln(), conjugate_value(pj), self.d[j]);
            }
        }
        let mu = dual.solve_unit().ok()?;
        if !(mu > 0.0 && mu.is_finite()) {
            return None;
        }
        Some(
            z.iter()
                .enumerate()
                .map(|(j, zj)| {
                    let a = zj.norm();
                    if a == 0.0 {
                        return Complex64::new(0.0, 0.0);
                    }
                    let pj = self.p[j];
                    zj / a * (a / (mu * self.d[j] * pj)).powf(1.0 / (pj - 1.0))
                })
                .collect(),
        )
    }

    fn ascend(&self, start: Vec<Complex64>, opts: &OpnormOptions) -> (f64, usize) {
        let ng = self.norm(&start);
        if !(ng > 0.0 && ng.is_finite()) {
            return (0.0, 0);
        }
        let mut y = self.apply(&start);
        let mut ny = self.norm(&y) / ng;
        for v in y.iter_mut() {
            *v /= ng;
        }
        let mut best = ny;
        let mut iters = 0;
        while iters < opts.max_iter && ny > 0.0 && ny.is_finite() {
            let Some(g) = self.step(&y, ny) else { break };
            iters += 1;
            let ng = self.norm(&g);
            if !(ng > 0.0 && ng.is_finite()) {
                break;
            }
            y = self.apply(&g);
            ny = self.norm(&y) / ng;
            if !ny.is_finite() {
                break;
            }
            let rel = (ny - best) / best.max(f64::MIN_POSITIVE);
            best = best.max(ny);
            if rel < opts.tol {
                break;
            }
            for v in y.iter_mut() {
                *v /= ng;
            }
        }
        (best, iters)
    }
}

/// Lower bound on `‖S‖` on `L^{p(·)}(Γ, w)`.
///
/// Candidates are `trials` complex Gaussian vectors plus structured
/// functions near each anchor: power bumps `|τ - t_k|^{-1/p(t_k) + δ}` and
/// indicators at several scales, one- and two-sided. The best `ascend`
/// candidates are improved by the generalized power iteration, whose
/// objective never decreases.
pub fn weighted_opnorm(
    op: &DiscretizedOperator,
    w: &CompositeWeight,
    p: &ExponentFunction,
    opts: &OpnormOptions,
) -> Result<OpnormEstimate> {
    if opts.trials < 50 {
        return Err(invalid("trials", format!("need at least 50 random trials, got {}", opts.trials)));
    }
    let n = op.size();
    let problem = NormProblem {
        op,
        ln_w: op.log_weights(w),
        p: op.nodes.iter().map(|q| p.at_arc(q.arc)).collect(),
        d: op.nodes.iter().map(|q| q.weight).collect(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut candidates: Vec<Vec<Complex64>> = Vec::new();
    for _ in 0..opts.trials {
        candidates.push(
            (0..n)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re, im)
                })
                .collect(),
        );
    }
    candidates.extend(structured_candidates(op, w, &problem.p));
    let mut scored: Vec<(f64, usize)> = candidates.iter().enumerate().map(|(i, g)| (problem.ratio(g), i)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut best = scored.first().map_or(0.0, |s| s.0);
    let mut iterations = 0;
    for &(_, idx) in scored.iter().take(opts.ascend.max(1)) {
        let (r, it) = problem.ascend(candidates[idx].clone(), opts);
        iterations += it;
        best = best.max(r);
    }
    Ok(OpnormEstimate { value: best, iterations })
}

fn structured_candidates(op: &DiscretizedOperator, w: &CompositeWeight, p: &[f64]) -> Vec<Vec<Complex64>> {
    let nodes = op.nodes();
    let n = nodes.len();
    let span = nodes.iter().map(|q| q.weight).sum::<f64>().max(f64::MIN_POSITIVE);
    let mut out = Vec::new();
    let mut centers: Vec<Complex64> = w.anchors();
    if centers.is_empty() {
        centers.push(nodes[n / 2].position());
    }
    for center in centers {
        let Some(k) = (0..n).min_by(|&a, &b| (nodes[a].position() - center).norm().total_cmp(&(nodes[b].position() - center).norm())) else {
            continue;
        };
        let pk = p[k];
        let dist = |j: usize| (nodes[j].minus(&nodes[k])).norm();
        let side = |j: usize| (nodes[j].arc - nodes[k].arc).signum();
        for scale in [span / 4.0, span / 64.0, span / 1024.0] {
            for delta in [0.02, 0.1, 0.3] {
                for sided in [0.0, 1.0, -1.0] {
                    out.push(
                        (0..n)
                            .map(|j| {
                                let r = dist(j);
                                let inside = r < scale && (sided == 0.0 || side(j) == sided);
                                if !inside || r == 0.0 {
                                    Complex64::new(0.0, 0.0)
                                } else {
                                    Complex64::new(r.powf(-1.0 / pk + delta), 0.0)
                                }
                            })
                            .collect(),
                    );
                }
            }
            out.push((0..n).map(|j| Complex64::new(if dist(j) < scale { 1.0 } else { 0.0 }, 0.0)).collect());
        }
    }
    out
}

/// Outcome of a refinement probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeVerdict {
    Bounded,
    Blowup,
    Inconclusive,
}

impl ProbeVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProbeVerdict::Bounded => "bounded",
            ProbeVerdict::Blowup => "blowup",
            ProbeVerdict::Inconclusive => "inconclusive",
        }
    }
}

/// Growth factor at or above which the last two refinements signal blowup.
pub const BLOWUP_GROWTH: f64 = 1.3;
/// Growth factor at or below which every refinement counts as stable.
pub const BOUNDED_GROWTH: f64 = 1.05;

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub meshes: Vec<usize>,
    pub estimates: Vec<f64>,
    pub verdict: ProbeVerdict,
}

impl ProbeReport {
    pub fn growths(&self) -> Vec<f64> {
        self.estimates.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

/// Classifies a sequence of estimates on refining meshes.
pub fn classify_growth(estimates: &[f64]) -> ProbeVerdict {
    let g: Vec<f64> = estimates.windows(2).map(|w| w[1] / w[0]).collect();
    if g.len() >= 2 && g[g.len() - 2..].iter().all(|&x| x >= BLOWUP_GROWTH) {
        ProbeVerdict::Blowup
    } else if g.iter().all(|&x| x <= BOUNDED_GROWTH) {
        ProbeVerdict::Bounded
    } else {
        ProbeVerdict::Inconclusive
    }
}

/// Runs [`weighted_opnorm`] on the operators produced by `family` for each
/// mesh size and classifies the growth of the estimates.
pub fn refinement_probe(
    family: impl Fn(usize) -> Result<DiscretizedOperator>,
    w: &CompositeWeight,
    p: &ExponentFunction,
    mesh_sequence: &[usize],
    opts: &OpnormOptions,
) -> Result<ProbeReport> {
    if mesh_sequence.len() < 3 || mesh_sequence.windows(2).any(|m| m[1] <= m[0]) {
        return Err(invalid("mesh_sequence", "need at least three strictly increasing node counts"));
    }
    let mut estimates = Vec::with_capacity(mesh_sequence.len());
    for &m in mesh_sequence {
        let op = family(m)?;
        estimates.push(weighted_opnorm(&op, w, p, opts)?.value);
    }
    let verdict = classify_growth(&estimates);
    Ok(ProbeReport { meshes: mesh_sequence.to_vec(), estimates, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn segment_constant_function_matches_closed_form() {
        let seg = CurvePath::segment(c(-1.0, 0.0), c(1.0, 0.0), 3).unwrap();
        let op = discretize(&seg, 201).unwrap();
        let one = op.sample(|_| c(1.0, 0.0));
        let s = op.apply(&one).unwrap();
        let mid = 100;
        assert!(s.values[mid].norm() < 1e-12);
        // node at t = 1/2
        let i = 150;
        let t = op.nodes()[i].position().re;
        let exact = inv_pi_i() * ((1.0 - t) / (1.0 + t)).ln();
        assert!((s.values[i] - exact).norm() < 1e-12);
    }

    #[test]
    fn circle_reproduces_analytic_boundary_values() {
        let circle = CurvePath::circle(c(0.0, 0.0), 1.0, 8192).unwrap();
        let op = discretize(&circle, 256).unwrap();
        let one = op.sample(|_| c(1.0, 0.0));
        let s = op.apply(&one).unwrap();
        assert!(s.values.iter().all(|v| (v - c(1.0, 0.0)).norm() < 1e-3));
        let f = op.sample(|z| z);
        let s = op.apply(&f).unwrap();
        for (a, b) in s.values.iter().zip(&f.values) {
            assert!((a - b).norm() < 1e-3);
        }
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_growth(&[1.0, 1.01, 1.02]), ProbeVerdict::Bounded);
        assert_eq!(classify_growth(&[1.0, 2.0, 4.0]), ProbeVerdict::Blowup);
        assert_eq!(classify_growth(&[1.0, 1.2, 1.3]), ProbeVerdict::Inconclusive);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let seg = CurvePath::segment(c(-1.0, 0.0), c(1.0, 0.0), 3).unwrap();
        let op = discretize(&seg, 40).unwrap();
        let bad = SampledFunction { values: vec![c(0.0, 0.0); 3] };
        assert!(matches!(op.apply(&bad), Err(Error::DimensionMismatch { expected: 40, got: 3 })));
    }
}
