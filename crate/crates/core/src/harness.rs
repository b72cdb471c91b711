//! Experiment configuration, sweeps and CSV reports for the command line.
//!
//! Configuration files are flat `key = value` lines grouped under
//! `[section]` headers; `#` starts a comment. The `[exponent]` section holds
//! one spec line and `[weight]` holds one `factor ...` line per anchor.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::conditions::{self, ap_constant, hd_constant, kss_sufficient, necessary_check, GridSpec, Verdict};
use crate::error::{Error, Result};
use crate::exponent::{ExponentFunction, ExponentSpec};
use crate::geometry::{CarlesonStudy, CurvePath};
use crate::operator::{
    classify_growth, discretize, discretize_graded, weighted_opnorm, DiscretizedOperator, GradedMesh, OpnormOptions,
    DEFAULT_GRADING,
};
use crate::submult::{V0Evaluator, V0Window, DEFAULT_HALF_WIDTH, DEFAULT_STEP, INDEX_TOLERANCE};
use crate::vlebesgue::{luxemburg_norm, modular, SampledFunction};
use crate::weights::{phi0_profile, CompositeWeight, RadialRule, WeightFactor};

/// Toolkit version written into every report header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Curve description of the `[curve]` section.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveSpec {
    Segment { start: Complex64, end: Complex64, nodes: usize },
    Circle { center: Complex64, radius: f64, nodes: usize },
    Spiral { alpha: f64, resolution: usize },
    File { path: PathBuf },
}

impl CurveSpec {
    pub fn build(&self) -> Result<CurvePath> {
        match self {
            CurveSpec::Segment { start, end, nodes } => CurvePath::segment(*start, *end, *nodes),
            CurveSpec::Circle { center, radius, nodes } => CurvePath::circle(*center, *radius, *nodes),
            CurveSpec::Spiral { alpha, resolution } => CurvePath::spiral_example(*alpha, *resolution),
            CurveSpec::File { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
                CurvePath::from_text(&text, &path.display().to_string())
            }
        }
    }

    /// The resolution parameter of builtin curves.
    pub fn resolution(&self) -> Option<usize> {
        match self {
            CurveSpec::Segment { nodes, .. } | CurveSpec::Circle { nodes, .. } => Some(*nodes),
            CurveSpec::Spiral { resolution, .. } => Some(*resolution),
            CurveSpec::File { .. } => None,
        }
    }

    /// The same curve at another resolution; `None` for file curves.
    pub fn with_resolution(&self, r: usize) -> Option<CurveSpec> {
        let mut out = self.clone();
        match &mut out {
            CurveSpec::Segment { nodes, .. } | CurveSpec::Circle { nodes, .. } => *nodes = r,
            CurveSpec::Spiral { resolution, .. } => *resolution = r,
            CurveSpec::File { .. } => return None,
        }
        Some(out)
    }
}

/// Test function of the `[function]` section, used by `norm`.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    /// `kind = constant`, `value = <c>`
    Constant(f64),
    /// `kind = power`, `anchor = <x,y>`, `exponent = <e>`: `|τ - anchor|^e`
    Power { anchor: Complex64, exponent: f64 },
    /// `kind = monomial`, `power = <k>`: `τ^k`
    Monomial(i32),
}

impl FunctionSpec {
    pub fn sample(&self, curve: &CurvePath) -> Result<SampledFunction> {
        match *self {
            FunctionSpec::Constant(c) => Ok(SampledFunction::constant(curve, Complex64::new(c, 0.0))),
            FunctionSpec::Power { anchor, exponent } => {
                SampledFunction::from_fn(curve, |z| Complex64::new((z - anchor).norm().powf(exponent), 0.0))
            }
            FunctionSpec::Monomial(k) => SampledFunction::from_fn(curve, |z| z.powi(k)),
        }
    }
}

/// Operator settings of the `[operator]` section.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    /// Node counts, increasing.
    pub meshes: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Layer ratio of graded meshes on open curves.
    pub ratio: f64,
    /// Candidates refined by the norm ascent.
    pub ascend: usize,
}

impl Default for OperatorSpec {
    fn default() -> Self {
        OperatorSpec { meshes: vec![512, 1024, 2048], trials: 50, seed: 0, ratio: DEFAULT_GRADING, ascend: 3 }
    }
}

impl OperatorSpec {
    pub fn options(&self) -> OpnormOptions {
        OpnormOptions { trials: self.trials, seed: self.seed, ascend: self.ascend, ..OpnormOptions::default() }
    }
}

/// `(p, λ)` grid of the `[sweep]` section.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub p: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Anchor of the Khvedelidze factor.
    pub anchor: Complex64,
    /// Run the operator refinement probe on every cell.
    pub probe: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            p: vec![1.5, 2.0, 3.0],
            lambda: vec![-0.75, -0.25, 0.0, 0.25, 0.4, 0.6, 0.75],
            anchor: Complex64::new(0.0, 0.0),
            probe: true,
        }
    }
}

/// `ε` grid of the `[stability]` section.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilitySpec {
    pub epsilon: Vec<f64>,
    pub probe: bool,
}

impl Default for StabilitySpec {
    fn default() -> Self {
        StabilitySpec { epsilon: vec![-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5], probe: false }
    }
}

/// Sampling of the `[carleson]` section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarlesonSpec {
    pub t_samples: usize,
    pub r_samples: usize,
    /// Number of resolution doublings in the refinement study.
    pub refinements: usize,
}

impl Default for CarlesonSpec {
    fn default() -> Self {
        CarlesonSpec { t_samples: 64, r_samples: 64, refinements: 2 }
    }
}

/// A parsed configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Source name used in messages.
    pub source: String,
    /// SHA-256 of the configuration text, hex encoded.
    pub hash: String,
    pub curve: CurveSpec,
    pub exponent: ExponentSpec,
    pub weight: Vec<WeightFactor>,
    pub grid: GridSpec,
    pub operator: OperatorSpec,
    pub sweep: SweepSpec,
    pub stability: StabilitySpec,
    pub carleson: CarlesonSpec,
    pub function: FunctionSpec,
    pub output: Option<PathBuf>,
}

struct LineCtx<'a> {
    source: &'a str,
    line: usize,
}

impl LineCtx<'_> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse { file: self.source.to_string(), line: self.line, message: message.into() }
    }

    fn f64(&self, key: &str, v: &str) -> Result<f64> {
        v.trim().parse::<f64>().map_err(|_| self.err(format!("`{key}` expects a number, got `{v}`")))
    }

    fn usize(&self, key: &str, v: &str) -> Result<usize> {
        v.trim().parse::<usize>().map_err(|_| self.err(format!("`{key}` expects a nonnegative integer, got `{v}`")))
    }

    fn u64(&self, key: &str, v: &str) -> Result<u64> {
        v.trim().parse::<u64>().map_err(|_| self.err(format!("`{key}` expects a nonnegative integer, got `{v}`")))
    }

    fn bool(&self, key: &str, v: &str) -> Result<bool> {
        match v.trim() {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => Err(self.err(format!("`{key}` expects true or false, got `{v}`"))),
        }
    }

    fn point(&self, key: &str, v: &str) -> Result<Complex64> {
        let parts: Vec<&str> = v.split(',').collect();
        if parts.len() != 2 {
            return Err(self.err(format!("`{key}` expects a point `x,y`, got `{v}`")));
        }
        Ok(Complex64::new(self.f64(key, parts[0])?, self.f64(key, parts[1])?))
    }

    fn list(&self, key: &str, v: &str) -> Result<Vec<f64>> {
        v.split(',').map(|s| self.f64(key, s)).collect()
    }

    fn usize_list(&self, key: &str, v: &str) -> Result<Vec<usize>> {
        v.split(',').map(|s| self.usize(key, s)).collect()
    }

    /// Splits `word k1=v1 k2=v2` into the leading word and its pairs.
    fn tokens<'s>(&self, text: &'s str) -> Result<(&'s str, Vec<(&'s str, &'s str)>)> {
        let mut it = text.split_whitespace();
        let head = it.next().unwrap_or("");
        let pairs = it
            .map(|tok| tok.split_once('=').ok_or_else(|| self.err(format!("expected `key=value`, got `{tok}`"))))
            .collect::<Result<Vec<_>>>()?;
        Ok((head, pairs))
    }
}

fn lookup<'a>(ctx: &LineCtx, pairs: &[(&'a str, &'a str)], key: &str) -> Result<&'a str> {
    pairs.iter().find(|(k, _)| *k == key).map(|(_, v)| *v).ok_or_else(|| ctx.err(format!("missing `{key}`")))
}

fn check_keys(ctx: &LineCtx, pairs: &[(&str, &str)], allowed: &[&str]) -> Result<()> {
    for (k, _) in pairs {
        if !allowed.contains(k) {
            return Err(ctx.err(format!("unknown key `{k}`")));
        }
    }
    Ok(())
}

impl ExperimentConfig {
    /// Reads and parses a configuration file; relative table paths resolve
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, &path.display().to_string(), base)
    }

    /// Parses configuration text.
    pub fn parse(text: &str, source: &str, base_dir: &Path) -> Result<Self> {
        let hash = hex::encode(Sha256::digest(text.as_bytes()));
        let mut curve_kind: Option<(usize, String)> = None;
        let mut curve_keys: Vec<(usize, String, String)> = Vec::new();
        let mut exponent = None;
        let mut weight = Vec::new();
        let mut grid = GridSpec::default();
        let mut operator = OperatorSpec::default();
        let mut sweep = SweepSpec::default();
        let mut stability = StabilitySpec::default();
        let mut carleson = CarlesonSpec::default();
        let mut function = FunctionSpec::Constant(1.0);
        let mut function_keys: Vec<(usize, String, String)> = Vec::new();
        let mut output = None;
        let mut section = String::new();

        for (idx, raw) in text.lines().enumerate() {
            let ctx = LineCtx { source, line: idx + 1 };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                const SECTIONS: [&str; 11] = [
                    "curve", "exponent", "weight", "grid", "operator", "sweep", "stability", "carleson", "function",
                    "output", "run",
                ];
                if !SECTIONS.contains(&name) {
                    return Err(ctx.err(format!("unknown section `[{name}]`")));
                }
                section = name.to_string();
                continue;
            }
            match section.as_str() {
                "exponent" => {
                    if exponent.is_some() {
                        return Err(ctx.err("only one exponent spec is allowed"));
                    }
                    exponent = Some(parse_exponent(&ctx, line)?);
                    continue;
                }
                "weight" => {
                    weight.push(parse_factor(&ctx, line, base_dir)?);
                    continue;
                }
                "" => return Err(ctx.err("key outside of any section")),
                _ => {}
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ctx.err(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            match (section.as_str(), key) {
                ("curve", "kind") => curve_kind = Some((idx + 1, value.to_string())),
                ("curve", _) => curve_keys.push((idx + 1, key.to_string(), value.to_string())),
                ("grid", "t_random") => grid.t_random = ctx.usize(key, value)?,
                ("grid", "r_per_octave") => grid.r_per_octave = ctx.usize(key, value)?,
                ("grid", "r_min") => grid.r_min = Some(ctx.f64(key, value)?),
                ("grid", "levels") => grid.levels = ctx.usize(key, value)?,
                ("grid", "seed") => grid.seed = ctx.u64(key, value)?,
                ("grid", "cutoff") => grid.cutoff = ctx.f64(key, value)?,
                ("operator", "meshes") => operator.meshes = ctx.usize_list(key, value)?,
                ("operator", "trials") => operator.trials = ctx.usize(key, value)?,
                ("operator", "seed") => operator.seed = ctx.u64(key, value)?,
                ("operator", "ratio") => operator.ratio = ctx.f64(key, value)?,
                ("operator", "ascend") => operator.ascend = ctx.usize(key, value)?,
                ("sweep", "p") => sweep.p = ctx.list(key, value)?,
                ("sweep", "lambda") => sweep.lambda = ctx.list(key, value)?,
                ("sweep", "anchor") => sweep.anchor = ctx.point(key, value)?,
                ("sweep", "probe") => sweep.probe = ctx.bool(key, value)?,
                ("stability", "epsilon") => stability.epsilon = ctx.list(key, value)?,
                ("stability", "probe") => stability.probe = ctx.bool(key, value)?,
                ("carleson", "t_samples") => carleson.t_samples = ctx.usize(key, value)?,
                ("carleson", "r_samples") => carleson.r_samples = ctx.usize(key, value)?,
                ("carleson", "refinements") => carleson.refinements = ctx.usize(key, value)?,
                ("function", _) => function_keys.push((idx + 1, key.to_string(), value.to_string())),
                ("output", "path") => output = Some(PathBuf::from(value)),
                ("run", "seed") => {
                    let s = ctx.u64(key, value)?;
                    grid.seed = s;
                    operator.seed = s;
                }
                (sec, _) => return Err(ctx.err(format!("unknown key `{key}` in [{sec}]"))),
            }
        }

        let curve = build_curve_spec(source, curve_kind, &curve_keys, base_dir)?;
        if !function_keys.is_empty() {
            function = build_function_spec(source, &function_keys)?;
        }
        let end = LineCtx { source, line: text.lines().count() };
        if operator.meshes.is_empty() || operator.meshes.windows(2).any(|m| m[1] <= m[0]) {
            return Err(end.err("`meshes` must be a nonempty increasing list"));
        }
        Ok(ExperimentConfig {
            source: source.to_string(),
            hash,
            curve,
            exponent: exponent.unwrap_or(ExponentSpec::Constant(2.0)),
            weight,
            grid,
            operator,
            sweep,
            stability,
            carleson,
            function,
            output,
        })
    }

    /// Overrides every seed in the configuration.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.grid.seed = seed;
        self.operator.seed = seed;
        self
    }

    pub fn build_curve(&self) -> Result<CurvePath> {
        self.curve.build()
    }

    pub fn build_exponent(&self, curve: &CurvePath) -> Result<ExponentFunction> {
        ExponentFunction::from_spec(curve, &self.exponent)
    }

    /// The composite weight, with anchors snapped onto `curve`.
    pub fn build_weight(&self, curve: &CurvePath) -> Result<CompositeWeight> {
        CompositeWeight::new(self.weight.clone())?.snapped_to(curve)
    }

    fn header(&self, command: &str, extra: &[String]) -> Vec<String> {
        let mut h = vec![
            format!("singint {VERSION} {command}"),
            format!("config {} sha256={}", self.source, self.hash),
            format!("seed grid={} operator={}", self.grid.seed, self.operator.seed),
        ];
        if let Ok(curve) = self.build_curve() {
            h.push(format!("grid {}", self.grid.describe(&curve)));
        }
        h.extend_from_slice(extra);
        h
    }
}

fn parse_exponent(ctx: &LineCtx, line: &str) -> Result<ExponentSpec> {
    let mut words = line.split_whitespace();
    match words.next() {
        Some("constant") => {
            let v = words.next().ok_or_else(|| ctx.err("`constant` needs a value"))?;
            if words.next().is_some() {
                return Err(ctx.err("trailing text after constant exponent"));
            }
            Ok(ExponentSpec::Constant(ctx.f64("constant", v)?))
        }
        Some("radial") => {
            let (_, pairs) = ctx.tokens(line)?;
            check_keys(ctx, &pairs, &["t", "base", "amplitude"])?;
            Ok(ExponentSpec::Radial {
                center: ctx.point("t", lookup(ctx, &pairs, "t")?)?,
                base: ctx.f64("base", lookup(ctx, &pairs, "base")?)?,
                amplitude: ctx.f64("amplitude", lookup(ctx, &pairs, "amplitude")?)?,
            })
        }
        _ => Err(ctx.err(format!("expected `constant <p>` or `radial t=.. base=.. amplitude=..`, got `{line}`"))),
    }
}

fn parse_factor(ctx: &LineCtx, line: &str, base_dir: &Path) -> Result<WeightFactor> {
    let (head, pairs) = ctx.tokens(line)?;
    if head != "factor" {
        return Err(ctx.err(format!("expected `factor anchor=x,y kind=...`, got `{line}`")));
    }
    let anchor = ctx.point("anchor", lookup(ctx, &pairs, "anchor")?)?;
    let rule = match lookup(ctx, &pairs, "kind")? {
        "power" => {
            check_keys(ctx, &pairs, &["anchor", "kind", "gamma"])?;
            RadialRule::Power { gamma: ctx.f64("gamma", lookup(ctx, &pairs, "gamma")?)? }
        }
        "oscillating" => {
            check_keys(ctx, &pairs, &["anchor", "kind", "gamma", "amp", "freq"])?;
            RadialRule::Oscillating {
                gamma: ctx.f64("gamma", lookup(ctx, &pairs, "gamma")?)?,
                amp: ctx.f64("amp", lookup(ctx, &pairs, "amp")?)?,
                freq: ctx.f64("freq", lookup(ctx, &pairs, "freq")?)?,
            }
        }
        "table" => {
            check_keys(ctx, &pairs, &["anchor", "kind", "file"])?;
            let path = base_dir.join(lookup(ctx, &pairs, "file")?);
            let text = std::fs::read_to_string(&path).map_err(|e| ctx.err(format!("cannot read {}: {e}", path.display())))?;
            RadialRule::table_from_text(&text, &path.display().to_string())?
        }
        other => return Err(ctx.err(format!("unknown factor kind `{other}`"))),
    };
    Ok(WeightFactor { anchor, rule })
}

fn build_curve_spec(
    source: &str,
    kind: Option<(usize, String)>,
    keys: &[(usize, String, String)],
    base_dir: &Path,
) -> Result<CurveSpec> {
    let Some((kind_line, kind)) = kind else {
        return Err(Error::Parse { file: source.to_string(), line: 1, message: "missing `kind` in [curve]".into() });
    };
    let mut spec = match kind.as_str() {
        "segment" => CurveSpec::Segment { start: Complex64::new(-1.0, 0.0), end: Complex64::new(1.0, 0.0), nodes: 201 },
        "circle" => CurveSpec::Circle { center: Complex64::new(0.0, 0.0), radius: 1.0, nodes: 256 },
        "spiral" => CurveSpec::Spiral { alpha: 2.0, resolution: 256 },
        "file" => CurveSpec::File { path: PathBuf::new() },
        other => {
            let ctx = LineCtx { source, line: kind_line };
            return Err(ctx.err(format!("unknown curve kind `{other}`")));
        }
    };
    for (line, key, value) in keys {
        let ctx = LineCtx { source, line: *line };
        match (&mut spec, key.as_str()) {
            (CurveSpec::Segment { start, .. }, "start") => *start = ctx.point(key, value)?,
            (CurveSpec::Segment { end, .. }, "end") => *end = ctx.point(key, value)?,
            (CurveSpec::Segment { nodes, .. }, "nodes") | (CurveSpec::Circle { nodes, .. }, "nodes") => {
                *nodes = ctx.usize(key, value)?
            }
            (CurveSpec::Circle { center, .. }, "center") => *center = ctx.point(key, value)?,
            (CurveSpec::Circle { radius, .. }, "radius") => *radius = ctx.f64(key, value)?,
            (CurveSpec::Spiral { alpha, .. }, "alpha") => *alpha = ctx.f64(key, value)?,
            (CurveSpec::Spiral { resolution, .. }, "resolution") => *resolution = ctx.usize(key, value)?,
            (CurveSpec::File { path }, "path") => *path = base_dir.join(value),
            _ => return Err(ctx.err(format!("unknown key `{key}` for curve kind `{kind}`"))),
        }
    }
    if let CurveSpec::File { path } = &spec {
        if path.as_os_str().is_empty() {
            let ctx = LineCtx { source, line: kind_line };
            return Err(ctx.err("curve kind `file` needs `path`"));
        }
    }
    Ok(spec)
}

fn build_function_spec(source: &str, keys: &[(usize, String, String)]) -> Result<FunctionSpec> {
    let find = |k: &str| keys.iter().find(|(_, key, _)| key == k);
    let first = LineCtx { source, line: keys[0].0 };
    let Some((kl, _, kind)) = find("kind") else {
        return Err(first.err("missing `kind` in [function]"));
    };
    let get = |k: &str| -> Result<(LineCtx, &str)> {
        match find(k) {
            Some((l, _, v)) => Ok((LineCtx { source, line: *l }, v.as_str())),
            None => Err(LineCtx { source, line: *kl }.err(format!("missing `{k}` in [function]"))),
        }
    };
    let allowed: &[&str] = match kind.as_str() {
        "constant" => &["kind", "value"],
        "power" => &["kind", "anchor", "exponent"],
        "monomial" => &["kind", "power"],
        other => return Err(LineCtx { source, line: *kl }.err(format!("unknown function kind `{other}`"))),
    };
    for (l, key, _) in keys {
        if !allowed.contains(&key.as_str()) {
            return Err(LineCtx { source, line: *l }.err(format!("unknown key `{key}` for function kind `{kind}`")));
        }
    }
    Ok(match kind.as_str() {
        "constant" => {
            let (c, v) = get("value")?;
            FunctionSpec::Constant(c.f64("value", v)?)
        }
        "power" => {
            let (ca, a) = get("anchor")?;
            let (ce, e) = get("exponent")?;
            FunctionSpec::Power { anchor: ca.point("anchor", a)?, exponent: ce.f64("exponent", e)? }
        }
        _ => {
            let (c, v) = get("power")?;
            let k = v.trim().parse::<i32>().map_err(|_| c.err(format!("`power` expects an integer, got `{v}`")))?;
            FunctionSpec::Monomial(k)
        }
    })
}

/// A CSV report with its `#` header block.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub header: Vec<String>,
    pub csv: String,
    /// Some estimator in the run failed its convergence cross-check.
    pub nonconvergence: bool,
}

impl Report {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for h in &self.header {
            let _ = writeln!(out, "# {h}");
        }
        out.push_str(&self.csv);
        out
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.10e}")
}

/// Per-factor Matuszewska–Orlicz indices against the indices of
/// powerlikeness of the composite weight at the factor's anchor.
///
/// Columns: `factor,anchor_re,anchor_im,m,M,alpha,beta,agree,converged`.
/// For a weight without factors a single `none` row is reported at the
/// middle node of the curve.
pub fn run_indices(config: &ExperimentConfig) -> Result<Report> {
    let curve = config.build_curve()?;
    let w = config.build_weight(&curve)?;
    let cap = curve.length();
    let mut csv = String::from("factor,anchor_re,anchor_im,m,M,alpha,beta,agree,converged\n");
    let mut nonconvergence = false;
    let mut rows: Vec<(String, Complex64, RadialRule)> =
        w.factors().iter().enumerate().map(|(k, f)| (k.to_string(), f.anchor, f.rule.clone())).collect();
    if rows.is_empty() {
        rows.push(("none".into(), curve.points()[curve.node_count() / 2], RadialRule::Power { gamma: 0.0 }));
    }
    for (name, anchor, rule) in rows {
        let mo = phi0_profile(&rule, cap)?.indices();
        let pl = V0Evaluator::new(&w, &curve, anchor, V0Window::default())?.profile(DEFAULT_STEP, DEFAULT_HALF_WIDTH)?.indices();
        let agree = (mo.alpha - pl.alpha).abs() <= INDEX_TOLERANCE && (mo.beta - pl.beta).abs() <= INDEX_TOLERANCE;
        let converged = mo.converged() && pl.converged();
        nonconvergence |= !converged;
        let _ = writeln!(
            csv,
            "{name},{},{},{},{},{},{},{agree},{converged}",
            fmt(anchor.re),
            fmt(anchor.im),
            fmt(mo.alpha),
            fmt(mo.beta),
            fmt(pl.alpha),
            fmt(pl.beta)
        );
    }
    Ok(Report { header: config.header("indices", &[]), csv, nonconvergence })
}

/// Verdict of a Carleson refinement study.
pub fn carleson_verdict(study: &CarlesonStudy) -> &'static str {
    if study.stable() {
        "stable"
    } else if study.diverging() {
        "diverging"
    } else {
        "inconclusive"
    }
}

/// Carleson study of the configured curve at the configured resolution
/// and its successive doublings; `None` for file curves.
pub fn carleson_study(config: &ExperimentConfig) -> Result<Option<CarlesonStudy>> {
    let Some(base) = config.curve.resolution() else {
        return Ok(None);
    };
    let resolutions: Vec<usize> = (0..=config.carleson.refinements.max(1)).map(|k| base << k).collect();
    let spec = &config.curve;
    CurvePath::carleson_study(
        &resolutions,
        |r| spec.with_resolution(r).expect("builtin curve").build(),
        config.carleson.t_samples,
        config.carleson.r_samples,
    )
    .map(Some)
}

/// Whether the configured curve counts as Carleson: a stable refinement
/// study, or a finite constant for file curves.
pub fn carleson_stable(config: &ExperimentConfig) -> Result<bool> {
    match carleson_study(config)? {
        Some(study) => Ok(study.stable()),
        None => Ok(config.build_curve()?.carleson_constant(config.carleson.t_samples, config.carleson.r_samples)?.is_finite()),
    }
}

/// Carleson constants under refinement. Columns: `resolution,constant,drift`.
pub fn run_carleson(config: &ExperimentConfig) -> Result<Report> {
    let mut csv = String::from("resolution,constant,drift\n");
    match carleson_study(config)? {
        Some(study) => {
            let drifts = study.drifts();
            for (k, (r, c)) in study.resolutions.iter().zip(&study.constants).enumerate() {
                let d = if k == 0 { String::new() } else { fmt(drifts[k - 1]) };
                let _ = writeln!(csv, "{r},{},{d}", fmt(*c));
            }
            let _ = writeln!(csv, "verdict,{},{}", carleson_verdict(&study), fmt(*study.constants.last().unwrap_or(&0.0)));
        }
        None => {
            let curve = config.build_curve()?;
            let c = curve.carleson_constant(config.carleson.t_samples, config.carleson.r_samples)?;
            let _ = writeln!(csv, "{},{},", curve.node_count(), fmt(c));
            let _ = writeln!(csv, "verdict,single,{}", fmt(c));
        }
    }
    let extra = [format!(
        "carleson t_samples={} r_samples={} refinements={}",
        config.carleson.t_samples, config.carleson.r_samples, config.carleson.refinements
    )];
    Ok(Report { header: config.header("carleson", &extra), csv, nonconvergence: false })
}

/// Luxemburg–Nakano norm of the configured test function.
/// Columns: `quantity,value`.
pub fn run_norm(config: &ExperimentConfig) -> Result<Report> {
    let curve = config.build_curve()?;
    let p = config.build_exponent(&curve)?;
    let w = config.build_weight(&curve)?;
    let f = config.function.sample(&curve)?;
    let norm = luxemburg_norm(&f, &w, &p, &curve)?;
    let mut csv = String::from("quantity,value\n");
    let _ = writeln!(csv, "norm,{}", fmt(norm));
    if norm > 0.0 {
        let _ = writeln!(csv, "modular_at_norm,{}", fmt(modular(&f, &w, &p, norm, &curve)?));
    }
    Ok(Report { header: config.header("norm", &[]), csv, nonconvergence: false })
}

fn condition_report(config: &ExperimentConfig, command: &str, hd: bool) -> Result<Report> {
    let curve = config.build_curve()?;
    let p = config.build_exponent(&curve)?;
    let w = config.build_weight(&curve)?;
    let report = if hd { hd_constant(&curve, &p, &w, &config.grid)? } else { ap_constant(&curve, &p, &w, &config.grid)? };
    let maxima: Vec<String> = report.per_scale_maxima.iter().map(|v| fmt(*v)).collect();
    let extra = [
        format!("per_scale_maxima {}", maxima.join(" ")),
        format!("quasinorm_cells {}", report.quasinorm_cells),
    ];
    Ok(Report { header: config.header(command, &extra), csv: report.to_csv(), nonconvergence: false })
}

/// Grid supremum of the Muckenhoupt-type constant.
pub fn run_apcheck(config: &ExperimentConfig) -> Result<Report> {
    condition_report(config, "apcheck", false)
}

/// Grid supremum of the Hästö–Diening functional.
pub fn run_hdcheck(config: &ExperimentConfig) -> Result<Report> {
    condition_report(config, "hdcheck", true)
}

/// Discretizes the configured curve with `nodes` nodes: interleaved on
/// closed curves, graded toward the weight anchors on open ones.
pub fn operator_for(config: &ExperimentConfig, curve: &CurvePath, w: &CompositeWeight, nodes: usize) -> Result<DiscretizedOperator> {
    if curve.is_closed() {
        discretize(curve, nodes)
    } else {
        discretize_graded(curve, &w.anchors(), nodes, GradedMesh { ratio: config.operator.ratio, max_cell: None })
    }
}

fn probe(
    config: &ExperimentConfig,
    curve: &CurvePath,
    w: &CompositeWeight,
    p: &ExponentFunction,
) -> Result<(Vec<f64>, Vec<usize>)> {
    let opts = config.operator.options();
    let mut values = Vec::new();
    let mut iterations = Vec::new();
    for &m in &config.operator.meshes {
        let op = operator_for(config, curve, w, m)?;
        let est = weighted_opnorm(&op, w, p, &opts)?;
        values.push(est.value);
        iterations.push(est.iterations);
    }
    Ok((values, iterations))
}

fn probe_verdict(values: &[f64]) -> &'static str {
    if values.len() < 3 {
        "single"
    } else {
        classify_growth(values).as_str()
    }
}

/// Weighted operator norm estimates on the configured meshes.
/// Columns: `nodes,estimate,iterations`, then `verdict,<v>,<last>`.
pub fn run_opnorm(config: &ExperimentConfig) -> Result<Report> {
    let curve = config.build_curve()?;
    let p = config.build_exponent(&curve)?;
    let w = config.build_weight(&curve)?;
    let (values, iterations) = probe(config, &curve, &w, &p)?;
    let mut csv = String::from("nodes,estimate,iterations\n");
    for ((m, v), it) in config.operator.meshes.iter().zip(&values).zip(&iterations) {
        let _ = writeln!(csv, "{m},{},{it}", fmt(*v));
    }
    let _ = writeln!(csv, "verdict,{},{}", probe_verdict(&values), fmt(*values.last().unwrap_or(&0.0)));
    let o = &config.operator;
    let extra = [format!("operator trials={} ascend={} ratio={} seed={}", o.trials, o.ascend, o.ratio, o.seed)];
    Ok(Report { header: config.header("opnorm", &extra), csv, nonconvergence: false })
}

/// Khvedelidze boundary sweep over the `(p, λ)` grid with one factor
/// `|τ - anchor|^λ` and constant `p`.
///
/// Columns: `p,lambda,in_strip,kss_satisfied,ap_verdict,probe_verdict`
/// followed by one `norm_<nodes>` column per mesh.
pub fn run_boundary_sweep(config: &ExperimentConfig) -> Result<Report> {
    let curve = config.build_curve()?;
    let carleson = carleson_stable(config)?;
    let anchor = curve.snap(config.sweep.anchor)?;
    let mut csv = String::from("p,lambda,in_strip,kss_satisfied,ap_verdict,probe_verdict");
    if config.sweep.probe {
        for m in &config.operator.meshes {
            let _ = write!(csv, ",norm_{m}");
        }
    }
    csv.push('\n');
    for &p in &config.sweep.p {
        let pe = ExponentFunction::constant(&curve, p)?;
        for &lambda in &config.sweep.lambda {
            let w = CompositeWeight::khvedelidze(&[(anchor, lambda)])?;
            let kss = kss_sufficient(&curve, &pe, &w, 0.0, carleson)?;
            let ap = ap_constant(&curve, &pe, &w, &config.grid)?;
            let _ = write!(
                csv,
                "{p},{lambda},{},{},{}",
                conditions::in_khvedelidze_strip(p, lambda),
                kss.satisfied,
                ap.verdict.as_str()
            );
            if config.sweep.probe {
                let (values, _) = probe(config, &curve, &w, &pe)?;
                let _ = write!(csv, ",{}", probe_verdict(&values));
                for v in values {
                    let _ = write!(csv, ",{}", fmt(v));
                }
            } else {
                csv.push_str(",skipped");
            }
            csv.push('\n');
        }
    }
    let extra = [format!("carleson_stable {carleson}")];
    Ok(Report { header: config.header("sweep", &extra), csv, nonconvergence: false })
}

/// `ε`-stability probe of `w ↦ w^{1+ε}` for the configured weight.
///
/// Columns: `epsilon`, then `lower_k,upper_k` margins per factor, then
/// `ap_verdict,probe_verdict`. The header reports `ε₀` from the affine
/// margin closure.
pub fn run_stability_probe(config: &ExperimentConfig) -> Result<Report> {
    let curve = config.build_curve()?;
    let p = config.build_exponent(&curve)?;
    let w = config.build_weight(&curve)?;
    let nec = necessary_check(&curve, &p, &w)?;
    let mut csv = String::from("epsilon");
    for k in 0..nec.margins.len() {
        let _ = write!(csv, ",lower_{k},upper_{k}");
    }
    csv.push_str(",ap_verdict,probe_verdict\n");
    let mut ap_verdicts: Vec<Verdict> = Vec::new();
    for &eps in &config.stability.epsilon {
        let _ = write!(csv, "{eps}");
        for m in &nec.margins {
            let (lo, hi) = m.scaled(eps);
            let _ = write!(csv, ",{},{}", fmt(lo), fmt(hi));
        }
        let we = w.powered(1.0 + eps);
        let ap = ap_constant(&curve, &p, &we, &config.grid)?;
        ap_verdicts.push(ap.verdict);
        let probe_v = if config.stability.probe { probe_verdict(&probe(config, &curve, &we, &p)?.0) } else { "skipped" };
        let _ = writeln!(csv, ",{},{probe_v}", ap.verdict.as_str());
    }
    let extra = [
        format!("eps0 {}", fmt(nec.eps0)),
        format!("necessary nonstrict={} strict={}", nec.holds_nonstrict, nec.holds_strict),
    ];
    Ok(Report { header: config.header("stability", &extra), csv, nonconvergence: false })
}
