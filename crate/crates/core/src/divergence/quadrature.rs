//! Adaptive 15-point Gauss–Legendre quadrature over `]0,1[`.
//!
//! The interval is split at dyadic levels `2^-k` and `1 − 2^-k` down to the
//! clipping level, at any forced breakpoints, and then extended geometrically
//! into both tails until the outermost panel is negligible. Panels are then
//! bisected greedily, largest error first, until the summed error meets the
//! tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

const ORDER: usize = 15;
const MAX_PANELS: usize = 20_000;
/// Deepest dyadic tail panels: `2^-LOWER_DEPTH` near 0, `1 − 2^-UPPER_DEPTH` near 1.
const LOWER_DEPTH: i32 = 120;
const UPPER_DEPTH: i32 = 53;
/// Consecutive tail ratios at or above this mark a non-integrable tail.
const DIVERGENT_RATIO: f64 = 0.995;
const DIVERGENT_RUN: usize = 5;

/// Tolerances for [`super::divergence_quadrature`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureOptions {
    #[serde(serialize_with = "crate::report::float")]
    pub rel_tol: f64,
    #[serde(serialize_with = "crate::report::float")]
    pub abs_tol: f64,
    /// Tail panels start at `clip_eps` and `1 − clip_eps`.
    #[serde(serialize_with = "crate::report::float")]
    pub clip_eps: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-8, abs_tol: 1e-10, clip_eps: 1e-9 }
    }
}

impl QuadratureOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite() && self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::Domain(format!(
                "tolerances must be positive, got rel_tol = {}, abs_tol = {}",
                self.rel_tol, self.abs_tol
            )));
        }
        if !(self.clip_eps > 0.0 && self.clip_eps <= 1e-3) {
            return Err(Error::Domain(format!("clip_eps = {} is outside ]0, 1e-3]", self.clip_eps)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Outcome {
    pub value: f64,
    pub error: f64,
    pub nodes: usize,
}

impl Outcome {
    fn infinite(nodes: usize) -> Self {
        Self { value: f64::INFINITY, error: 0.0, nodes }
    }
}

/// Nodes and weights of the Gauss–Legendre rule on `[−1, 1]`.
fn rule() -> &'static ([f64; ORDER], [f64; ORDER]) {
    static RULE: OnceLock<([f64; ORDER], [f64; ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER;
        let mut nodes = [0.0; ORDER];
        let mut weights = [0.0; ORDER];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

/// One rule application: `(∫f, ∫|f|)`, or `None` if `f` is infinite at a node.
fn apply<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64) -> Result<Option<(f64, f64)>> {
    let (nodes, weights) = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let (mut sum, mut abs) = (0.0, 0.0);
    for (x, w) in nodes.iter().zip(weights) {
        let y = f(mid + half * x)?;
        if y.is_nan() {
            return Err(Error::NonFinite(format!("integrand is NaN at x = {}", mid + half * x)));
        }
        if y.is_infinite() {
            return Ok(None);
        }
        sum += w * y;
        abs += w * y.abs();
    }
    Ok(Some((sum * half, abs * half)))
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// Rule on `[a,b]` compared with the rule on both halves.
fn panel<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64) -> Result<Option<Panel>> {
    let m = 0.5 * (a + b);
    let (Some(whole), Some(left), Some(right)) = (apply(f, a, b)?, apply(f, a, m)?, apply(f, m, b)?) else {
        return Ok(None);
    };
    let value = left.0 + right.0;
    let floor = 50.0 * f64::EPSILON * (left.1 + right.1);
    Ok(Some(Panel { a, b, value, error: (whole.0 - value).abs().max(floor) }))
}

const EVALS_PER_PANEL: usize = 3 * ORDER;

/// Splits `[a,b]` at the forced points strictly inside it.
fn split(a: f64, b: f64, forced: &[f64]) -> Vec<(f64, f64)> {
    let mut cuts = vec![a];
    cuts.extend(forced.iter().copied().filter(|x| *x > a && *x < b));
    cuts.push(b);
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

struct Queued {
    error: f64,
    index: usize,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then(other.index.cmp(&self.index))
    }
}

/// Result of extending one tail geometrically.
enum Tail {
    Infinite,
    Finite { panels: Vec<Panel>, extrapolated: f64, truncation: f64 },
}

/// Dyadic panels beyond `edge` toward 0 (`toward_one = false`) or toward 1.
fn extend_tail<F: Fn(f64) -> Result<f64>>(
    f: &F,
    start_depth: i32,
    toward_one: bool,
    forced: &[f64],
    threshold: f64,
    nodes: &mut usize,
) -> Result<Tail> {
    let depth_limit = if toward_one { UPPER_DEPTH } else { LOWER_DEPTH };
    let level = |k: i32| if toward_one { 1.0 - 0.5f64.powi(k) } else { 0.5f64.powi(k) };
    let mut panels = Vec::new();
    let mut contributions: Vec<f64> = Vec::new();
    let mut k = start_depth;
    while k < depth_limit {
        let (inner, outer) = (level(k), level(k + 1));
        let (a, b) = if toward_one { (inner, outer) } else { (outer, inner) };
        let mut contribution = 0.0;
        for (x, y) in split(a, b, forced) {
            *nodes += EVALS_PER_PANEL;
            match panel(f, x, y)? {
                Some(p) => {
                    contribution += p.value;
                    panels.push(p);
                }
                None => return Ok(Tail::Infinite),
            }
        }
        contributions.push(contribution);
        k += 1;
        let n = contributions.len();
        if contribution.abs() < threshold {
            break;
        }
        if n > DIVERGENT_RUN
            && contributions[n - 1 - DIVERGENT_RUN..]
                .windows(2)
                .all(|w| w[1].abs() >= DIVERGENT_RATIO * w[0].abs())
        {
            return Ok(Tail::Infinite);
        }
    }
    // The part beyond the last panel, extrapolated as a geometric series.
    let n = contributions.len();
    let last = contributions[n - 1];
    let ratio = if n >= 2 && contributions[n - 2] != 0.0 { last / contributions[n - 2] } else { 0.0 };
    if last.abs() >= threshold && ratio >= DIVERGENT_RATIO {
        return Ok(Tail::Infinite);
    }
    let extrapolated = if (0.0..DIVERGENT_RATIO).contains(&ratio) { last * ratio / (1.0 - ratio) } else { 0.0 };
    let truncation = if last.abs() < threshold { (last - extrapolated).abs().min(last.abs()) } else { extrapolated.abs() };
    Ok(Tail::Finite { panels, extrapolated, truncation })
}

/// `∫₀¹ f(x) dx` for `f` that may blow up at the endpoints. Returns `+∞` when
/// `f` is infinite at a node or a tail is not integrable.
pub(crate) fn integrate_unit<F>(f: &F, forced: &[f64], opts: &QuadratureOptions) -> Result<Outcome>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    opts.validate()?;
    let clip_depth = (1.0 / opts.clip_eps).log2().ceil() as i32;
    let mut cuts: Vec<f64> = vec![0.5];
    for k in 2..=clip_depth {
        cuts.push(0.5f64.powi(k));
        if k <= UPPER_DEPTH {
            cuts.push(1.0 - 0.5f64.powi(k));
        }
    }
    let (lo, hi) = (0.5f64.powi(clip_depth), 1.0 - 0.5f64.powi(clip_depth.min(UPPER_DEPTH)));
    cuts.extend(forced.iter().copied().filter(|x| *x > lo && *x < hi));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let core: Vec<Option<Panel>> = cuts
        .par_windows(2)
        .map(|w| panel(f, w[0], w[1]))
        .collect::<Result<_>>()?;
    let mut nodes = core.len() * EVALS_PER_PANEL;
    let Some(mut panels) = core.into_iter().collect::<Option<Vec<Panel>>>() else {
        return Ok(Outcome::infinite(nodes));
    };

    let threshold = opts.abs_tol / 10.0;
    let mut tail_error = 0.0;
    let mut tail_value = 0.0;
    for toward_one in [false, true] {
        let start = if toward_one { clip_depth.min(UPPER_DEPTH) } else { clip_depth };
        match extend_tail(f, start, toward_one, forced, threshold, &mut nodes)? {
            Tail::Infinite => return Ok(Outcome::infinite(nodes)),
            Tail::Finite { panels: extra, extrapolated, truncation } => {
                panels.extend(extra);
                tail_value += extrapolated;
                tail_error += truncation;
            }
        }
    }

    let mut heap: BinaryHeap<Queued> =
        panels.iter().enumerate().map(|(index, p)| Queued { error: p.error, index }).collect();
    let mut live = vec![true; panels.len()];
    let mut value: f64 = panels.iter().map(|p| p.value).sum::<f64>() + tail_value;
    let mut error: f64 = panels.iter().map(|p| p.error).sum::<f64>() + tail_error;
    while error > opts.abs_tol.max(opts.rel_tol * value.abs()) && panels.len() < MAX_PANELS {
        let Some(Queued { index, .. }) = heap.pop() else { break };
        let worst = panels[index];
        let m = 0.5 * (worst.a + worst.b);
        if !(m > worst.a && m < worst.b) {
            continue;
        }
        let (left, right) = rayon::join(|| panel(f, worst.a, m), || panel(f, m, worst.b));
        nodes += 2 * EVALS_PER_PANEL;
        let (Some(left), Some(right)) = (left?, right?) else {
            return Ok(Outcome::infinite(nodes));
        };
        live[index] = false;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        for p in [left, right] {
            heap.push(Queued { error: p.error, index: panels.len() });
            panels.push(p);
            live.push(true);
        }
    }

    // Resum in position order so the result does not depend on refinement history.
    let mut kept: Vec<&Panel> = panels.iter().zip(&live).filter(|(_, l)| **l).map(|(p, _)| p).collect();
    kept.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = kept.iter().map(|p| p.value).sum::<f64>() + tail_value;
    let error = kept.iter().map(|p| p.error).sum::<f64>() + tail_error;
    Ok(Outcome { value, error, nodes })
}
