//! The modified Hilbert transform on ℝ,
//! `b̃(x) = (1/π) p.v.∫ b(t)·(1/(x − t) + t/(1 + t²)) dt`,
//! and unimodular symbols built from it.
//!
//! On the circle `b̃` is the conjugate function of `b∘φ⁻¹` up to an additive
//! constant. The constant is fixed per call by a principal-value quadrature
//! of the line kernel at one anchor point.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::circle::{angle_of, conjugate, CircleTrace, LineFn};
use super::quadrature::{integrate_half_line, QuadOptions, QuadResult};
use super::HardyError;
use crate::C64;

/// How a function on ℝ behaves at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecayClass {
    /// Continuous with equal limits at `±∞`.
    CDotR {
        limit: f64,
    },
    L2,
    /// `∫|b|/(1 + t²) < ∞`.
    L1Pi,
}

#[derive(Clone)]
pub struct LineFunction {
    evaluator: LineFn,
    class: DecayClass,
}

impl fmt::Debug for LineFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LineFunction")
            .field("class", &self.class)
            .finish_non_exhaustive()
    }
}

impl LineFunction {
    pub fn new(class: DecayClass, f: impl Fn(f64) -> C64 + Send + Sync + 'static) -> Self {
        Self {
            evaluator: Arc::new(f),
            class,
        }
    }

    /// A real function with common limit `limit` at `±∞`.
    pub fn c_dot_r(limit: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(DecayClass::CDotR { limit }, move |t| C64::new(f(t), 0.0))
    }

    pub fn l1_pi(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(DecayClass::L1Pi, move |t| C64::new(f(t), 0.0))
    }

    pub fn constant(c: f64) -> Self {
        Self::c_dot_r(c, move |_| c)
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn eval(&self, t: f64) -> C64 {
        (self.evaluator)(t)
    }

    pub fn class(&self) -> DecayClass {
        self.class
    }

    pub fn evaluator(&self) -> LineFn {
        self.evaluator.clone()
    }

    /// Largest distance from the declared limit at `±T`; `None` outside the
    /// `c_dot_r` class.
    pub fn limit_gap(&self, t: f64) -> Option<f64> {
        match self.class {
            DecayClass::CDotR { limit } => {
                let l = C64::new(limit, 0.0);
                Some((self.eval(t) - l).norm().max((self.eval(-t) - l).norm()))
            }
            _ => None,
        }
    }

    /// Every class here lies in `L¹(dt/(1 + t²))`: bounded functions do, and
    /// so does `L²` by Cauchy–Schwarz.
    pub fn admits_hilbert(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HilbertOptions {
    /// First circle size tried.
    pub circle_points: usize,
    /// The circle size stops doubling here.
    pub max_circle_points: usize,
    /// Allowed share of Fourier mass in modes `|k| > N/4`.
    pub tail_share: f64,
    /// Point where the constant is calibrated.
    pub anchor: f64,
    pub quad: QuadOptions,
}

impl Default for HilbertOptions {
    fn default() -> Self {
        Self {
            circle_points: 4096,
            max_circle_points: 65_536,
            tail_share: 1e-8,
            anchor: 0.0,
            quad: QuadOptions {
                target: 1e-10,
                ..QuadOptions::default()
            },
        }
    }
}

/// `b̃` as a circle trace plus the calibrated constant.
#[derive(Debug, Clone)]
pub struct ConjugateFunction {
    trace: CircleTrace,
    constant: C64,
    anchor: f64,
    anchor_error: f64,
    resolved: bool,
}

impl ConjugateFunction {
    pub fn eval(&self, x: f64) -> C64 {
        self.trace.eval_angle(angle_of(x)) + self.constant
    }

    pub fn constant(&self) -> C64 {
        self.constant
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn anchor_error(&self) -> f64 {
        self.anchor_error
    }

    /// Whether the Fourier tail met the requested share before the size cap.
    pub fn resolved(&self) -> bool {
        self.resolved
    }

    pub fn circle_points(&self) -> usize {
        self.trace.len()
    }

    /// `b̃∘φ⁻¹` on an `n`-point circle grid.
    pub fn on_circle(&self, n: usize) -> Result<CircleTrace, HardyError> {
        let c = self.constant;
        self.trace.resample(n)?.map_samples(|v| v + c)
    }

    /// `b̃` as a line function, `c_dot_r` with limit `b̃(∞)`.
    pub fn to_line_function(&self) -> LineFunction {
        let me = self.clone();
        let limit = (self.trace.eval_angle(0.0) + self.constant).re;
        LineFunction::new(DecayClass::CDotR { limit }, move |x| me.eval(x))
    }
}

/// `(1/π) p.v.∫ b(t)(1/(x − t) + t/(1 + t²)) dt`, folded onto `s = |x − t|`.
pub fn pv_hilbert(b: &LineFunction, x: f64, opts: &QuadOptions) -> Result<QuadResult, HardyError> {
    let integrand = |s: f64| {
        let (l, r) = (x - s, x + s);
        let (bl, br) = (b.eval(l), b.eval(r));
        (bl - br) / s + bl * (l / (1.0 + l * l)) + br * (r / (1.0 + r * r))
    };
    let mut res = integrate_half_line(integrand, opts)?;
    res.value /= PI;
    res.error /= PI;
    Ok(res)
}

fn sample_circle(b: &LineFunction, n: usize) -> Result<CircleTrace, HardyError> {
    let trace = CircleTrace::from_line_symbol(n, |t| b.eval(t))?;
    if trace
        .samples()
        .iter()
        .any(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(HardyError::NonFinite(
            "line function on the circle grid".into(),
        ));
    }
    Ok(trace)
}

/// Computes `b̃` once; evaluate it anywhere afterwards.
pub fn conjugate_function(
    b: &LineFunction,
    opts: &HilbertOptions,
) -> Result<ConjugateFunction, HardyError> {
    let mut n = opts.circle_points;
    let mut trace = sample_circle(b, n)?;
    while trace.high_mode_share() > opts.tail_share && n < opts.max_circle_points {
        n *= 2;
        trace = sample_circle(b, n)?;
    }
    let resolved = trace.high_mode_share() <= opts.tail_share;
    let conj = conjugate(&trace);
    let pv = pv_hilbert(b, opts.anchor, &opts.quad)?;
    let constant = pv.value - conj.eval_angle(angle_of(opts.anchor));
    Ok(ConjugateFunction {
        trace: conj,
        constant,
        anchor: opts.anchor,
        anchor_error: pv.error,
        resolved,
    })
}

/// Values of `b̃` on `grid`.
pub fn hilbert_transform(
    b: &LineFunction,
    grid: &[f64],
    opts: &HilbertOptions,
) -> Result<Vec<C64>, HardyError> {
    let conj = conjugate_function(b, opts)?;
    Ok(grid.iter().map(|&x| conj.eval(x)).collect())
}

/// `t ↦ φ(t)ⁿ·e^{i(c + a(t) + b̃(t))}`.
#[derive(Debug, Clone)]
pub struct UnimodularSymbol {
    n: i64,
    c: f64,
    a: LineFunction,
    b_tilde: Option<ConjugateFunction>,
}

impl UnimodularSymbol {
    pub fn winding(&self) -> i64 {
        self.n
    }

    pub fn constant(&self) -> f64 {
        self.c
    }

    fn phase(&self, t: f64, b_tilde: f64) -> f64 {
        self.n as f64 * angle_of(t) + self.c + self.a.eval(t).re + b_tilde
    }

    pub fn eval(&self, t: f64) -> C64 {
        let bt = self.b_tilde.as_ref().map_or(0.0, |b| b.eval(t).re);
        C64::from_polar(1.0, self.phase(t, bt))
    }

    /// The symbol composed with the inverse Cayley map on an `n`-point grid.
    pub fn on_circle(&self, points: usize) -> Result<CircleTrace, HardyError> {
        let nodes = super::circle::line_nodes(points);
        let bt: Vec<f64> = match &self.b_tilde {
            Some(b) => b
                .on_circle(points)?
                .samples()
                .iter()
                .map(|v| v.re)
                .collect(),
            None => vec![0.0; points],
        };
        CircleTrace::from_samples(
            nodes
                .iter()
                .zip(&bt)
                .map(|(&t, &b)| C64::from_polar(1.0, self.phase(t, b)))
                .collect(),
        )
    }

    pub fn to_line_function(&self) -> LineFunction {
        let me = self.clone();
        // φ(±∞) = 1, so the limit exists only for the phase itself
        let class = DecayClass::L1Pi;
        LineFunction::new(class, move |t| me.eval(t))
    }
}

/// Builds `φⁿ·e^{i(c + a + b̃)}` from real `a`, `b`.
pub fn synthesize_unimodular(
    a: &LineFunction,
    b: &LineFunction,
    c: f64,
    n: i64,
    opts: &HilbertOptions,
) -> Result<UnimodularSymbol, HardyError> {
    let b_is_zero = matches!(b.class(), DecayClass::CDotR { limit } if limit == 0.0)
        && sample_circle(b, 64)?
            .samples()
            .iter()
            .all(|v| v.norm() == 0.0);
    let b_tilde = if b_is_zero {
        None
    } else {
        Some(conjugate_function(b, opts)?)
    };
    Ok(UnimodularSymbol {
        n,
        c,
        a: a.clone(),
        b_tilde,
    })
}
