//! Meromorphic inner functions on the upper half-plane.
//!
//! Two families are supported: explicit products `B(z)·e^{iaz}` with a finite
//! Blaschke zero list, and inner functions generated by a discrete Clark
//! measure `Σ ν_k δ_{λ_k}` through the Herglotz-type series
//!
//! ```text
//! G(z) = Σ ν_k (1/(λ_k − z) − λ_k/(λ_k² + 1)),     I = (G − i)/(G + i).
//! ```
//!
//! Both implement [`InnerFunction`], which is all the downstream modules see.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::special::{digamma, trigamma};
use crate::C64;

const I_UNIT: C64 = C64::new(0.0, 1.0);

/// Ratio min/max of `|Θ′|` on a grid above which the profile is reported as
/// two-sided bounded.
pub const COMPARABLE_RATIO_FLOOR: f64 = 0.05;

/// Share of `Σ ν_k/(1+λ_k²)` that the outer half of the window may carry
/// before the weights are declared divergent.
pub const OUTER_MASS_LIMIT: f64 = 0.25;
/// Shorter windows are finite sums and skip the divergence test.
pub const DIVERGENCE_MIN_WINDOW: usize = 16;

const UNWRAP_TOL: f64 = 1e-9;
const STRIP_LEVELS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InnerError {
    #[error("a sequence needs at least two nodes, got {0}")]
    TooShort(usize),
    #[error("{lambdas} nodes but {nus} weights")]
    LengthMismatch { lambdas: usize, nus: usize },
    #[error("node {0} is not a finite real number")]
    NonFinite(usize),
    #[error("nodes {left} and {right} are not separated (gap {gap})")]
    SeparationViolation { left: usize, right: usize, gap: f64 },
    #[error("weight {index} is {value}, weights must be positive and finite")]
    WeightViolation { index: usize, value: f64 },
    #[error("zero {index} at {zero} is not in the open upper half-plane")]
    InvalidZero { index: usize, zero: C64 },
    #[error("negative exponential type {0}")]
    InvalidExpType(f64),
    #[error("z = {z} is the reflection of zero {index}")]
    PoleHit { index: usize, z: C64 },
    #[error("Im z = {im} is below the continuation region (−{limit})")]
    OutsideContinuation { im: f64, limit: f64 },
    #[error(
        "Clark weights look divergent: outer half of the window carries {share:.3} of Σ ν/(1+λ²)"
    )]
    DivergenceDetected { share: f64 },
    #[error("index {index} is outside the window {first}..={last}")]
    IndexOutOfWindow { index: i64, first: i64, last: i64 },
    #[error("phase unwrap failed between grid points {position} and {next}", next = position + 1)]
    UnwrapFailure { position: usize },
    #[error("strip width times sup |Θ′| is {product}, must be < 1")]
    InvalidStrip { product: f64 },
    #[error("lattice tail needs a window of integer-indexed nodes, {0}")]
    TailUnsupported(String),
}

/// A finite, strictly increasing window `(λ_n)` of a separated real sequence,
/// together with its Clark weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatedSequence {
    first_index: i64,
    lambdas: Vec<f64>,
    nus: Vec<f64>,
    delta: f64,
    discrepancy: f64,
    permutation: Vec<usize>,
}

impl SeparatedSequence {
    /// Integer index of the first node; node `j` carries index `first_index + j`.
    pub fn first_index(&self) -> i64 {
        self.first_index
    }

    pub fn last_index(&self) -> i64 {
        self.first_index + self.len() as i64 - 1
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.len()).map(move |j| self.first_index + j as i64)
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn nus(&self) -> &[f64] {
        &self.nus
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Smallest consecutive gap.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `max_n |Σ_{k≠n} (1/(λ_n − λ_k) + λ_k/(λ_k²+1))|` over the window.
    pub fn discrepancy(&self) -> f64 {
        self.discrepancy
    }

    /// `permutation[j]` is the input position of sorted node `j`.
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn was_reordered(&self) -> bool {
        self.permutation.iter().enumerate().any(|(j, &p)| j != p)
    }

    /// Position in the window of the node with integer index `n`.
    pub fn position(&self, n: i64) -> Result<usize, InnerError> {
        if n < self.first_index || n > self.last_index() {
            return Err(InnerError::IndexOutOfWindow {
                index: n,
                first: self.first_index,
                last: self.last_index(),
            });
        }
        Ok((n - self.first_index) as usize)
    }

    pub fn lambda(&self, n: i64) -> Result<f64, InnerError> {
        Ok(self.lambdas[self.position(n)?])
    }

    pub fn nu(&self, n: i64) -> Result<f64, InnerError> {
        Ok(self.nus[self.position(n)?])
    }

    /// `Σ ν_k/(1+λ_k²)` over the window.
    pub fn clark_mass(&self) -> f64 {
        self.lambdas
            .iter()
            .zip(&self.nus)
            .map(|(l, n)| n / (1.0 + l * l))
            .sum()
    }

    /// Nodes sorted by distance to the window centre, used by the
    /// bounded-increment divergence test.
    fn outer_mass_share(&self) -> f64 {
        let mut terms: Vec<(f64, f64)> = self
            .lambdas
            .iter()
            .zip(&self.nus)
            .map(|(l, n)| (l.abs(), n / (1.0 + l * l)))
            .collect();
        terms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = terms.iter().map(|t| t.1).sum();
        let outer: f64 = terms[terms.len() / 2..].iter().map(|t| t.1).sum();
        if total > 0.0 {
            outer / total
        } else {
            0.0
        }
    }
}

/// Validates a node window indexed from 0.
pub fn validate_sequence(lambdas: &[f64], nus: &[f64]) -> Result<SeparatedSequence, InnerError> {
    validate_window(0, lambdas, nus)
}

/// Validates a node window whose first sorted node carries integer index
/// `first_index`. Unsorted input is sorted and the permutation recorded.
pub fn validate_window(
    first_index: i64,
    lambdas: &[f64],
    nus: &[f64],
) -> Result<SeparatedSequence, InnerError> {
    if lambdas.len() != nus.len() {
        return Err(InnerError::LengthMismatch {
            lambdas: lambdas.len(),
            nus: nus.len(),
        });
    }
    if lambdas.len() < 2 {
        return Err(InnerError::TooShort(lambdas.len()));
    }
    if let Some(i) = lambdas.iter().position(|l| !l.is_finite()) {
        return Err(InnerError::NonFinite(i));
    }
    if let Some(i) = nus.iter().position(|n| !(n.is_finite() && *n > 0.0)) {
        return Err(InnerError::WeightViolation {
            index: i,
            value: nus[i],
        });
    }

    let mut permutation: Vec<usize> = (0..lambdas.len()).collect();
    permutation.sort_by(|&a, &b| lambdas[a].total_cmp(&lambdas[b]));
    let sorted: Vec<f64> = permutation.iter().map(|&p| lambdas[p]).collect();
    let weights: Vec<f64> = permutation.iter().map(|&p| nus[p]).collect();

    let mut delta = f64::INFINITY;
    for (j, pair) in sorted.windows(2).enumerate() {
        let gap = pair[1] - pair[0];
        if gap <= 0.0 {
            return Err(InnerError::SeparationViolation {
                left: permutation[j],
                right: permutation[j + 1],
                gap,
            });
        }
        delta = delta.min(gap);
    }

    let discrepancy = discrepancy(&sorted);
    Ok(SeparatedSequence {
        first_index,
        lambdas: sorted,
        nus: weights,
        delta,
        discrepancy,
        permutation,
    })
}

fn discrepancy(lambdas: &[f64]) -> f64 {
    let corrections: Vec<f64> = lambdas.iter().map(|l| l / (l * l + 1.0)).collect();
    let total_correction: f64 = corrections.iter().sum();
    lambdas
        .par_iter()
        .enumerate()
        .map(|(n, &ln)| {
            let mut s = total_correction - corrections[n];
            for (k, &lk) in lambdas.iter().enumerate() {
                if k != n {
                    s += 1.0 / (ln - lk);
                }
            }
            s.abs()
        })
        .reduce(|| 0.0, f64::max)
}

/// An inner function that can be evaluated in the closed upper half-plane
/// and a little below it, and whose boundary derivative modulus is known.
pub trait InnerFunction: Send + Sync {
    fn eval(&self, z: C64) -> Result<C64, InnerError>;

    /// `|Θ′(t)|` for real `t`.
    fn boundary_derivative(&self, t: f64) -> f64;

    /// An analytic upper bound on `‖Θ′‖_∞`, when one is cheap.
    fn derivative_bound(&self) -> Option<f64> {
        None
    }
}

impl<T: InnerFunction + ?Sized> InnerFunction for Arc<T> {
    fn eval(&self, z: C64) -> Result<C64, InnerError> {
        (**self).eval(z)
    }
    fn boundary_derivative(&self, t: f64) -> f64 {
        (**self).boundary_derivative(t)
    }
    fn derivative_bound(&self) -> Option<f64> {
        (**self).derivative_bound()
    }
}

impl<T: InnerFunction + ?Sized> InnerFunction for &T {
    fn eval(&self, z: C64) -> Result<C64, InnerError> {
        (**self).eval(z)
    }
    fn boundary_derivative(&self, t: f64) -> f64 {
        (**self).boundary_derivative(t)
    }
    fn derivative_bound(&self) -> Option<f64> {
        (**self).derivative_bound()
    }
}

/// `Θ(z) = e^{iaz} Π b_k(z)` with finitely many zeros in ℂ₊.
#[derive(Debug, Clone, PartialEq)]
pub struct MeromorphicInner {
    exp_type: f64,
    zeros: Vec<C64>,
    normalizers: Vec<C64>,
}

impl MeromorphicInner {
    pub fn new(exp_type: f64, zeros: Vec<C64>) -> Result<Self, InnerError> {
        if !(exp_type.is_finite() && exp_type >= 0.0) {
            return Err(InnerError::InvalidExpType(exp_type));
        }
        if let Some((index, &zero)) = zeros
            .iter()
            .enumerate()
            .find(|(_, z)| !(z.im > 0.0 && z.re.is_finite() && z.im.is_finite()))
        {
            return Err(InnerError::InvalidZero { index, zero });
        }
        let normalizers = zeros.iter().map(|&z| blaschke_normalizer(z)).collect();
        Ok(Self {
            exp_type,
            zeros,
            normalizers,
        })
    }

    /// `e^{iaz}` with no zeros.
    pub fn exponential(exp_type: f64) -> Result<Self, InnerError> {
        Self::new(exp_type, Vec::new())
    }

    /// The Paley–Wiener inner function `e^{2πiz}`.
    pub fn paley_wiener() -> Self {
        Self::exponential(2.0 * PI).expect("2π is a valid type")
    }

    pub fn exp_type(&self) -> f64 {
        self.exp_type
    }

    pub fn zeros(&self) -> &[C64] {
        &self.zeros
    }

    /// `Σ Im z_k / (1 + |z_k|²)`.
    pub fn blaschke_statistic(&self) -> f64 {
        self.zeros.iter().map(|z| z.im / (1.0 + z.norm_sqr())).sum()
    }

    /// Largest strip depth allowed below the axis.
    pub fn continuation_depth(&self) -> f64 {
        let bound = self.derivative_bound().unwrap_or(0.0);
        if bound > 0.0 {
            0.5 / bound
        } else {
            f64::INFINITY
        }
    }

    fn eval_closed_upper(&self, z: C64) -> C64 {
        let mut value = (I_UNIT * self.exp_type * z).exp();
        for (zk, ck) in self.zeros.iter().zip(&self.normalizers) {
            value *= ck * (z - zk) / (z - zk.conj());
        }
        value
    }
}

/// Unimodular constant making the half-plane factor positive at `i`, so that
/// partial products converge. Zeros inside the unit disc keep the bare factor.
fn blaschke_normalizer(zero: C64) -> C64 {
    if zero.norm() > 1.0 {
        let w = zero * zero + 1.0;
        C64::new(w.norm(), 0.0) / w
    } else {
        C64::new(1.0, 0.0)
    }
}

impl InnerFunction for MeromorphicInner {
    fn eval(&self, z: C64) -> Result<C64, InnerError> {
        if z.im >= 0.0 {
            return Ok(self.eval_closed_upper(z));
        }
        let depth = self.continuation_depth();
        if -z.im > depth {
            return Err(InnerError::OutsideContinuation {
                im: z.im,
                limit: depth,
            });
        }
        if let Some(index) = self.zeros.iter().position(|zk| zk.conj() == z) {
            return Err(InnerError::PoleHit { index, z });
        }
        // Θ(z) = 1 / conj(Θ(conj z)) below the axis.
        Ok(self.eval_closed_upper(z.conj()).conj().inv())
    }

    fn boundary_derivative(&self, t: f64) -> f64 {
        self.exp_type
            + 2.0
                * self
                    .zeros
                    .iter()
                    .map(|z| z.im / C64::new(t - z.re, -z.im).norm_sqr())
                    .sum::<f64>()
    }

    fn derivative_bound(&self) -> Option<f64> {
        Some(self.exp_type + 2.0 * self.zeros.iter().map(|z| 1.0 / z.im).sum::<f64>())
    }
}

/// How the truncated Clark series stands in for the full one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TailPolicy {
    /// Sum the window in index order, nothing beyond it.
    Plain,
    /// Sum mirror pairs from the window edges inward.
    SymmetricPairing,
    /// Mirror pairing plus the closed-form sum over integer nodes beyond the
    /// window, each carrying `weight`. Meant for perturbed lattices whose
    /// node `n` sits near the integer `n`.
    LatticeTail { weight: f64 },
}

impl fmt::Display for TailPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TailPolicy::Plain => write!(f, "plain"),
            TailPolicy::SymmetricPairing => write!(f, "symmetric-pairing"),
            TailPolicy::LatticeTail { weight } => write!(f, "lattice-tail(weight={weight})"),
        }
    }
}

/// The inner function of a discrete Clark measure.
#[derive(Debug, Clone, PartialEq)]
pub struct ClarkInner {
    sequence: SeparatedSequence,
    tail: TailPolicy,
    order: Vec<usize>,
    correction: f64,
}

/// Builds the Clark inner function of `Σ ν_k δ_{λ_k}` over the window.
pub fn clark_inner(seq: &SeparatedSequence, tail: TailPolicy) -> Result<ClarkInner, InnerError> {
    if let TailPolicy::LatticeTail { weight } = tail {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(InnerError::TailUnsupported(format!("weight {weight}")));
        }
        // The closed-form tail sums over integers n > last and n < first.
        if seq.first_index() > 0 || seq.last_index() < 0 {
            return Err(InnerError::TailUnsupported(format!(
                "window {}..={} does not straddle 0",
                seq.first_index(),
                seq.last_index()
            )));
        }
    }
    let share = seq.outer_mass_share();
    if seq.len() >= DIVERGENCE_MIN_WINDOW && share > OUTER_MASS_LIMIT {
        return Err(InnerError::DivergenceDetected { share });
    }
    let n = seq.len();
    let order: Vec<usize> = match tail {
        TailPolicy::Plain => (0..n).collect(),
        _ => {
            let mut order = Vec::with_capacity(n);
            let (mut lo, mut hi) = (0usize, n - 1);
            while lo < hi {
                order.push(lo);
                order.push(hi);
                lo += 1;
                hi -= 1;
            }
            if lo == hi {
                order.push(lo);
            }
            order
        }
    };
    // With a lattice tail the constant is taken from the reference lattice, so
    // that G minus the lattice's G vanishes at infinity instead of tending to
    // a real constant that would rotate I against e^{2πiwz}.
    let correction = match tail {
        TailPolicy::LatticeTail { weight } => order
            .iter()
            .map(|&k| {
                let n = (seq.first_index() + k as i64) as f64;
                weight * n / (n * n + 1.0)
            })
            .sum(),
        _ => order
            .iter()
            .map(|&k| {
                let l = seq.lambdas[k];
                seq.nus[k] * l / (l * l + 1.0)
            })
            .sum(),
    };
    Ok(ClarkInner {
        sequence: seq.clone(),
        tail,
        order,
        correction,
    })
}

impl ClarkInner {
    pub fn sequence(&self) -> &SeparatedSequence {
        &self.sequence
    }

    pub fn tail(&self) -> TailPolicy {
        self.tail
    }

    /// `G(z)`; infinite at the nodes.
    pub fn herglotz(&self, z: C64) -> C64 {
        let (_, g_rest, single) = self.split(z, None);
        g_rest + single
    }

    /// `Im G(z)`, positive throughout ℂ₊ for a valid measure.
    pub fn im_herglotz(&self, z: C64) -> f64 {
        self.herglotz(z).im
    }

    /// `|I′(λ_n)| = 2/ν_n` at the node with integer index `n`.
    pub fn node_derivative(&self, n: i64) -> Result<f64, InnerError> {
        clark_derivative(&self.sequence, n)
    }

    fn nearest(&self, x: f64) -> usize {
        let l = &self.sequence.lambdas;
        match l.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(j) => j,
            Err(0) => 0,
            Err(j) if j >= l.len() => l.len() - 1,
            Err(j) => {
                if (x - l[j - 1]).abs() <= (l[j] - x).abs() {
                    j - 1
                } else {
                    j
                }
            }
        }
    }

    /// Returns (nearest node, G minus its pole term, the pole term), with the
    /// pole term left as zero when `z` is exactly the node.
    fn split(&self, z: C64, skip: Option<usize>) -> (usize, C64, C64) {
        let star = skip.unwrap_or_else(|| self.nearest(z.re));
        let l = &self.sequence.lambdas;
        let nu = &self.sequence.nus;
        let mut rest = C64::new(0.0, 0.0);
        for &k in &self.order {
            if k == star {
                continue;
            }
            // 1/(λ − z) = conj(λ − z)/|λ − z|²
            let d = C64::new(l[k] - z.re, -z.im);
            rest += d.conj() * (nu[k] / d.norm_sqr());
        }
        rest -= self.correction;
        rest += self.tail_sum(z);
        let d = C64::new(l[star] - z.re, -z.im);
        let single = if d.norm_sqr() == 0.0 {
            C64::new(f64::INFINITY, 0.0)
        } else {
            d.conj() * (nu[star] / d.norm_sqr())
        };
        (star, rest, single)
    }

    fn tail_sum(&self, z: C64) -> C64 {
        match self.tail {
            TailPolicy::LatticeTail { weight } => {
                let upper = (self.sequence.last_index() + 1) as f64;
                let lower = (1 - self.sequence.first_index()) as f64;
                let re_psi = |n: f64| digamma(C64::new(n, 1.0)).re;
                // Σ_{n≥N} [1/(n−z) − n/(n²+1)] = Re ψ(N+i) − ψ(N−z), and the
                // mirrored sum over n ≤ −N′ is ψ(N′+z) − Re ψ(N′+i).
                let above = re_psi(upper) - digamma(C64::new(upper, 0.0) - z);
                let below = digamma(C64::new(lower, 0.0) + z) - re_psi(lower);
                (above + below) * weight
            }
            _ => C64::new(0.0, 0.0),
        }
    }

    fn tail_derivative(&self, z: C64) -> C64 {
        match self.tail {
            TailPolicy::LatticeTail { weight } => {
                let upper = (self.sequence.last_index() + 1) as f64;
                let lower = (1 - self.sequence.first_index()) as f64;
                (trigamma(C64::new(upper, 0.0) - z) + trigamma(C64::new(lower, 0.0) + z)) * weight
            }
            _ => C64::new(0.0, 0.0),
        }
    }

    /// `1/G(z)`, computed around the nearest pole so that it is exact (zero)
    /// at the nodes and accurate near them.
    fn reciprocal_herglotz(&self, z: C64) -> C64 {
        let (star, rest, _) = self.split(z, None);
        let offset = C64::new(self.sequence.lambdas[star] - z.re, -z.im);
        let denom = offset * rest + self.sequence.nus[star];
        if denom.norm_sqr() == 0.0 {
            return C64::new(f64::INFINITY, 0.0);
        }
        offset / denom
    }
}

impl InnerFunction for ClarkInner {
    fn eval(&self, z: C64) -> Result<C64, InnerError> {
        // I = (G − i)/(G + i) = (1 − iH)/(1 + iH), H = 1/G
        let h = self.reciprocal_herglotz(z);
        if !h.is_finite() {
            return Ok(C64::new(-1.0, 0.0));
        }
        let denom = C64::new(1.0, 0.0) + I_UNIT * h;
        if denom.norm_sqr() == 0.0 {
            return Err(InnerError::PoleHit { index: 0, z });
        }
        Ok((C64::new(1.0, 0.0) - I_UNIT * h) / denom)
    }

    fn boundary_derivative(&self, t: f64) -> f64 {
        // |I′| = 2G′/(1 + G²) on ℝ, rewritten around the nearest pole.
        let z = C64::new(t, 0.0);
        let (star, rest, _) = self.split(z, None);
        let l = &self.sequence.lambdas;
        let nu = &self.sequence.nus;
        let mut rest_prime = 0.0;
        for (k, (&lk, &nk)) in l.iter().zip(nu).enumerate() {
            if k != star {
                let d = lk - t;
                rest_prime += nk / (d * d);
            }
        }
        rest_prime += self.tail_derivative(z).re;
        let offset = l[star] - t;
        let denom = nu[star] + offset * rest.re;
        let numer = nu[star] + offset * offset * rest_prime;
        2.0 * numer / (denom * denom + offset * offset)
    }
}

/// `|I′(λ_n)| = 2/ν_n` for the Clark inner function of the sequence.
pub fn clark_derivative(seq: &SeparatedSequence, n: i64) -> Result<f64, InnerError> {
    Ok(2.0 / seq.nu(n)?)
}

/// Either family of inner function, as loaded from a spec document.
#[derive(Debug, Clone, PartialEq)]
pub enum InnerFunctionSpec {
    Explicit(MeromorphicInner),
    Clark(ClarkInner),
}

impl InnerFunctionSpec {
    pub fn origin(&self) -> &'static str {
        match self {
            InnerFunctionSpec::Explicit(_) => "explicit",
            InnerFunctionSpec::Clark(_) => "clark",
        }
    }
}

impl InnerFunction for InnerFunctionSpec {
    fn eval(&self, z: C64) -> Result<C64, InnerError> {
        match self {
            InnerFunctionSpec::Explicit(f) => f.eval(z),
            InnerFunctionSpec::Clark(f) => f.eval(z),
        }
    }
    fn boundary_derivative(&self, t: f64) -> f64 {
        match self {
            InnerFunctionSpec::Explicit(f) => f.boundary_derivative(t),
            InnerFunctionSpec::Clark(f) => f.boundary_derivative(t),
        }
    }
    fn derivative_bound(&self) -> Option<f64> {
        match self {
            InnerFunctionSpec::Explicit(f) => f.derivative_bound(),
            InnerFunctionSpec::Clark(f) => f.derivative_bound(),
        }
    }
}

/// Uniform real grid `start + j·step`, `j < len`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl UniformGrid {
    pub fn new(start: f64, step: f64, len: usize) -> Self {
        Self { start, step, len }
    }

    /// Grid over `[lo, hi]` with the largest step satisfying `step·sup < π/4`.
    pub fn for_derivative(lo: f64, hi: f64, sup_derivative: f64) -> Self {
        let max_step = if sup_derivative > 0.0 {
            PI / (4.0 * sup_derivative) * 0.999
        } else {
            hi - lo
        };
        let intervals = ((hi - lo) / max_step).ceil().max(1.0) as usize;
        Self::new(lo, (hi - lo) / intervals as f64, intervals + 1)
    }

    pub fn point(&self, j: usize) -> f64 {
        self.start + j as f64 * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |j| self.point(j))
    }
}

/// Boundary data of an inner function on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryProfile {
    pub grid: UniformGrid,
    pub modulus_derivative: Vec<f64>,
    /// Continuous nondecreasing branch of `arg Θ(t)`.
    pub argument: Vec<f64>,
    pub sup_derivative: f64,
    pub min_derivative: f64,
    /// `min |Θ′| / max |Θ′|` over the grid.
    pub ratio: f64,
    /// Whether the ratio clears [`COMPARABLE_RATIO_FLOOR`].
    pub comparable: bool,
}

fn wrap_phase(d: f64) -> f64 {
    let mut w = d % (2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    } else if w <= -PI {
        w += 2.0 * PI;
    }
    w
}

pub fn boundary_profile<F: InnerFunction + ?Sized>(
    theta: &F,
    grid: UniformGrid,
) -> Result<BoundaryProfile, InnerError> {
    let points: Vec<f64> = grid.points().collect();
    let values: Vec<(f64, f64)> = points
        .par_iter()
        .map(|&t| {
            let v = theta.eval(C64::new(t, 0.0))?;
            Ok((v.arg(), theta.boundary_derivative(t)))
        })
        .collect::<Result<_, InnerError>>()?;

    let mut argument = Vec::with_capacity(values.len());
    let mut phase = values.first().map(|v| v.0).unwrap_or(0.0);
    argument.push(phase);
    for (j, pair) in values.windows(2).enumerate() {
        let expected = 0.5 * grid.step * (pair[0].1 + pair[1].1);
        let d = wrap_phase(pair[1].0 - pair[0].0);
        if expected >= PI || d < -UNWRAP_TOL {
            return Err(InnerError::UnwrapFailure { position: j });
        }
        phase += d;
        argument.push(phase);
    }

    let modulus_derivative: Vec<f64> = values.iter().map(|v| v.1).collect();
    let sup_derivative = modulus_derivative.iter().copied().fold(0.0, f64::max);
    let min_derivative = modulus_derivative
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let ratio = if sup_derivative > 0.0 {
        min_derivative / sup_derivative
    } else {
        0.0
    };
    Ok(BoundaryProfile {
        grid,
        modulus_derivative,
        argument,
        sup_derivative,
        min_derivative,
        ratio,
        comparable: ratio >= COMPARABLE_RATIO_FLOOR,
    })
}

/// Minimum of `|Θ|` over `{x + iy : x on the grid, 0 ≤ y < ε}`.
///
/// The sup of `|Θ′|` used in the admissibility check is the larger of the
/// grid maximum and the analytic bound when the latter is available.
pub fn min_modulus_strip<F: InnerFunction + ?Sized>(
    theta: &F,
    epsilon: f64,
    grid: UniformGrid,
) -> Result<f64, InnerError> {
    let sup = sup_derivative_on(theta, grid);
    let product = epsilon * sup;
    if product >= 1.0 {
        return Err(InnerError::InvalidStrip { product });
    }
    if epsilon <= 0.0 {
        return Ok(grid
            .points()
            .map(|t| theta.eval(C64::new(t, 0.0)).map(|v| v.norm()))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min));
    }
    let mut heights: Vec<f64> = (0..STRIP_LEVELS)
        .map(|k| epsilon * k as f64 / STRIP_LEVELS as f64)
        .collect();
    heights.push(epsilon * (1.0 - 1e-9));
    let points: Vec<f64> = grid.points().collect();
    points
        .par_iter()
        .map(|&t| {
            heights.iter().try_fold(f64::INFINITY, |m, &y| {
                Ok(m.min(theta.eval(C64::new(t, y))?.norm()))
            })
        })
        .try_reduce(|| f64::INFINITY, |a, b| Ok(a.min(b)))
}

/// Grid estimate of `‖Θ′‖_∞`.
pub fn sup_derivative_on<F: InnerFunction + ?Sized>(theta: &F, grid: UniformGrid) -> f64 {
    grid.points()
        .map(|t| theta.boundary_derivative(t))
        .fold(0.0, f64::max)
}
