//! Finite sections of Toeplitz and Hankel operators with unimodular
//! symbols, winding numbers, and the invertibility and
//! unitary-plus-compact detectors built on them.
//!
//! With the circle orientation of [`crate::hardy`], `T[j][k] = û(j − k)` and
//! `H[j][k] = û(−1 − j − k)`. The Cayley factor `φ` has `û(1) = 1`, so its
//! section is the shift with ones on the first subdiagonal.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hardy::{line_nodes, CircleTrace, HardyError, LineFunction, UnimodularSymbol};
use crate::inner::{InnerError, InnerFunction};
use crate::linalg::{self, CMatrix};
use crate::C64;

/// Floor on `σ_min` for the invertible verdict.
pub const TAU_INV: f64 = 1e-3;
/// `σ_min` below this on the largest section means not invertible.
pub const SIGMA_ZERO: f64 = 1e-12;
/// Largest relative change of `σ_min` between the last two sizes.
pub const STABLE_CHANGE: f64 = 0.2;
/// Half-width of the singular-value cluster around 1.
pub const CLUSTER_TAU: f64 = 0.1;
/// `(outliers(2N) + 1)/(outliers(N) + 1)` below this counts as bounded.
pub const OUTLIER_GROWTH: f64 = 1.5;
/// Relative size of the Hankel essential tail below which it counts as compact.
pub const HANKEL_TAIL_RATIO: f64 = 0.1;
/// Hankel sections with a smaller norm are treated as zero.
pub const HANKEL_ZERO: f64 = 1e-10;
/// Power-law exponent of `σ_min(N)` below which it is trending to zero.
pub const DECAY_SLOPE: f64 = -0.5;
/// Largest phase step accepted while unwrapping a symbol.
pub const WINDING_JUMP_LIMIT: f64 = 0.9 * PI;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ToeplitzError {
    #[error("{points} circle points cannot resolve a {size}×{size} section (need ≥ {need})", need = 4 * size)]
    ResolutionTooLow { points: usize, size: usize },
    #[error("phase step {jump:.3} at circle point {position} is too large to unwrap")]
    UnwrapFailure { position: usize, jump: f64 },
    #[error("a size sweep needs at least 3 sizes, got {0}")]
    TooFewSizes(usize),
    #[error(transparent)]
    Hardy(#[from] HardyError),
    #[error(transparent)]
    Inner(#[from] InnerError),
}

/// Generators of unimodular symbols on ℝ.
#[derive(Clone)]
pub enum Symbol {
    /// `u = Θ·conj(I)`.
    InnerRatio {
        theta: Arc<dyn InnerFunction>,
        inner: Arc<dyn InnerFunction>,
    },
    /// `u = φⁿ e^{i(c + a + b̃)}`.
    Synthesized(UnimodularSymbol),
    /// Any evaluator on ℝ.
    Line(LineFunction),
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::InnerRatio { .. } => write!(f, "Symbol::InnerRatio"),
            Symbol::Synthesized(u) => write!(f, "Symbol::Synthesized(n={})", u.winding()),
            Symbol::Line(l) => write!(f, "Symbol::Line({:?})", l.class()),
        }
    }
}

impl Symbol {
    pub fn eval(&self, t: f64) -> Result<C64, ToeplitzError> {
        match self {
            Symbol::InnerRatio { theta, inner } => {
                let z = C64::new(t, 0.0);
                Ok(theta.eval(z)? * inner.eval(z)?.conj())
            }
            Symbol::Synthesized(u) => Ok(u.eval(t)),
            Symbol::Line(l) => Ok(l.eval(t)),
        }
    }

    /// The symbol composed with the inverse Cayley map on `points` circle
    /// points.
    pub fn trace(&self, points: usize) -> Result<CircleTrace, ToeplitzError> {
        crate::hardy::circle::check_size(points)?;
        if let Symbol::Synthesized(u) = self {
            return Ok(u.on_circle(points)?);
        }
        let samples: Vec<C64> = line_nodes(points)
            .par_iter()
            .map(|&t| self.eval(t))
            .collect::<Result<_, _>>()?;
        Ok(CircleTrace::from_samples(samples)?)
    }
}

/// Largest `||u| − 1|` over the samples.
pub fn modulus_defect(trace: &CircleTrace) -> f64 {
    trace
        .samples()
        .iter()
        .map(|v| (v.norm() - 1.0).abs())
        .fold(0.0, f64::max)
}

fn check_resolution(trace: &CircleTrace, size: usize) -> Result<(), ToeplitzError> {
    if trace.len() < 4 * size {
        return Err(ToeplitzError::ResolutionTooLow {
            points: trace.len(),
            size,
        });
    }
    Ok(())
}

/// `T[j][k] = û(j − k)`, `0 ≤ j, k < N`.
pub fn toeplitz_section(trace: &CircleTrace, size: usize) -> Result<CMatrix, ToeplitzError> {
    check_resolution(trace, size)?;
    Ok(CMatrix::from_fn(size, size, |j, k| {
        trace.coeff(j as i64 - k as i64)
    }))
}

/// `H[j][k] = û(−1 − j − k − shift)`, `0 ≤ j, k < N`.
fn hankel_shifted(trace: &CircleTrace, size: usize, shift: usize) -> CMatrix {
    CMatrix::from_fn(size, size, |j, k| trace.coeff(-1 - (j + k + shift) as i64))
}

/// `H[j][k] = û(−1 − j − k)`, `0 ≤ j, k < N`.
pub fn hankel_section(trace: &CircleTrace, size: usize) -> Result<CMatrix, ToeplitzError> {
    check_resolution(trace, size)?;
    Ok(hankel_shifted(trace, size, 0))
}

/// Singular-value decay of a Hankel section and the compactness proxy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HankelDecay {
    pub size: usize,
    pub tau: f64,
    pub sigma_max: f64,
    /// Smallest `m` with `σ_m < τ·σ_0`, if any within the section.
    pub m_star: Option<usize>,
    /// `‖[û(−1 − j − k − N)]‖`, the part of the operator beyond the section.
    pub essential_tail: f64,
    pub compact: bool,
}

/// Decay summary of `H_N`; the compact flag asks that the Hankel block
/// shifted by `N` be small next to `H_N` itself.
pub fn hankel_decay(
    trace: &CircleTrace,
    size: usize,
    tau: f64,
) -> Result<HankelDecay, ToeplitzError> {
    if trace.len() < 8 * size {
        return Err(ToeplitzError::ResolutionTooLow {
            points: trace.len() / 2,
            size,
        });
    }
    let sv = linalg::singular_values(&hankel_shifted(trace, size, 0));
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let m_star = sv.iter().position(|&s| s < tau * sigma_max);
    let essential_tail = linalg::operator_norm(&hankel_shifted(trace, size, size));
    let compact = sigma_max < HANKEL_ZERO || essential_tail < HANKEL_TAIL_RATIO * sigma_max;
    Ok(HankelDecay {
        size,
        tau,
        sigma_max,
        m_star,
        essential_tail,
        compact,
    })
}

/// Trace of `conj(u)`.
pub fn conjugate_trace(trace: &CircleTrace) -> Result<CircleTrace, ToeplitzError> {
    Ok(trace.map_samples(|v| v.conj())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Winding {
    pub winding: i64,
    /// Distance of the unwrapped increment over `2π` from the integer.
    pub residual: f64,
    pub max_step: f64,
}

/// Argument increment around the circle over `2π`.
pub fn winding_number(trace: &CircleTrace) -> Result<Winding, ToeplitzError> {
    let s = trace.samples();
    let n = s.len();
    let mut total = 0.0;
    let mut max_step: f64 = 0.0;
    for j in 0..n {
        let a = s[j];
        let b = s[(j + 1) % n];
        if a.norm() == 0.0 || b.norm() == 0.0 {
            return Err(ToeplitzError::UnwrapFailure {
                position: j,
                jump: f64::NAN,
            });
        }
        let step = (b * a.conj()).arg();
        if step.abs() > WINDING_JUMP_LIMIT {
            return Err(ToeplitzError::UnwrapFailure {
                position: j,
                jump: step,
            });
        }
        max_step = max_step.max(step.abs());
        total += step;
    }
    let turns = total / (2.0 * PI);
    let winding = turns.round();
    Ok(Winding {
        winding: winding as i64,
        residual: (turns - winding).abs(),
        max_step,
    })
}

/// Singular values of `T_N(u)` over a size sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionSpectrum {
    pub sizes: Vec<usize>,
    pub sigma_min: Vec<f64>,
    pub singular_values: Vec<Vec<f64>>,
    pub winding: Option<Winding>,
    pub tau: f64,
    /// Share of singular values in `[1 − τ, 1 + τ]`.
    pub cluster_fraction: Vec<f64>,
    /// Number of singular values outside `[1 − τ, 1 + τ]`.
    pub outliers: Vec<usize>,
    pub circle_points: usize,
}

impl SectionSpectrum {
    /// `N,k,sigma_k` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,k,sigma_k\n");
        for (n, sv) in self.sizes.iter().zip(&self.singular_values) {
            for (k, s) in sv.iter().enumerate() {
                out.push_str(&format!("{n},{k},{s:.12e}\n"));
            }
        }
        out
    }
}

pub fn section_spectrum(
    trace: &CircleTrace,
    sizes: &[usize],
    tau: f64,
) -> Result<SectionSpectrum, ToeplitzError> {
    for &n in sizes {
        check_resolution(trace, n)?;
    }
    let singular_values: Vec<Vec<f64>> = sizes
        .par_iter()
        .map(|&n| {
            let t = toeplitz_section(trace, n).expect("resolution checked");
            linalg::singular_values(&t)
        })
        .collect();
    let sigma_min = singular_values
        .iter()
        .map(|sv| sv.last().copied().unwrap_or(0.0))
        .collect();
    let outliers: Vec<usize> = singular_values
        .iter()
        .map(|sv| sv.iter().filter(|s| (*s - 1.0).abs() > tau).count())
        .collect();
    let cluster_fraction = singular_values
        .iter()
        .zip(&outliers)
        .map(|(sv, o)| 1.0 - *o as f64 / sv.len().max(1) as f64)
        .collect();
    Ok(SectionSpectrum {
        sizes: sizes.to_vec(),
        sigma_min,
        singular_values,
        winding: winding_number(trace).ok(),
        tau,
        cluster_fraction,
        outliers,
        circle_points: trace.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    No,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvertibilityEvidence {
    /// `Yes` means invertible.
    pub verdict: Verdict,
    pub spectrum: SectionSpectrum,
    pub sigma_floor: f64,
    pub last_change: f64,
    /// Least-squares slope of `log σ_min` against `log N`.
    pub power_law_slope: f64,
    pub tau_inv: f64,
    pub stable_change: f64,
}

fn log_slope(sizes: &[usize], values: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = sizes
        .iter()
        .zip(values)
        .map(|(&n, &v)| ((n as f64).ln(), v.max(1e-300).ln()))
        .collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx > 0.0 {
        sxy / sxx
    } else {
        0.0
    }
}

fn check_sweep(sizes: &[usize]) -> Result<(), ToeplitzError> {
    if sizes.len() < 3 {
        return Err(ToeplitzError::TooFewSizes(sizes.len()));
    }
    Ok(())
}

/// Invertibility of `T_u` judged from a sweep of finite sections.
pub fn invertibility_verdict(
    trace: &CircleTrace,
    sizes: &[usize],
) -> Result<InvertibilityEvidence, ToeplitzError> {
    check_sweep(sizes)?;
    let spectrum = section_spectrum(trace, sizes, CLUSTER_TAU)?;
    let s = &spectrum.sigma_min;
    let sigma_floor = s.iter().copied().fold(f64::INFINITY, f64::min);
    let (prev, last) = (s[s.len() - 2], s[s.len() - 1]);
    let last_change = (last - prev).abs() / prev.max(f64::MIN_POSITIVE);
    let power_law_slope = log_slope(sizes, s);
    let decreasing = s.windows(2).all(|w| w[1] < w[0]);
    let winding = spectrum.winding.map(|w| w.winding);
    let verdict = if winding.is_some_and(|w| w != 0)
        || last < SIGMA_ZERO
        || (decreasing && power_law_slope < DECAY_SLOPE)
    {
        Verdict::No
    } else if winding == Some(0) && sigma_floor > TAU_INV && last_change < STABLE_CHANGE {
        Verdict::Yes
    } else {
        Verdict::Inconclusive
    };
    Ok(InvertibilityEvidence {
        verdict,
        spectrum,
        sigma_floor,
        last_change,
        power_law_slope,
        tau_inv: TAU_INV,
        stable_change: STABLE_CHANGE,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaryCompactEvidence {
    pub verdict: Verdict,
    pub spectrum: SectionSpectrum,
    pub winding: Option<i64>,
    /// `(N, 2N, ratio)` for each doubling pair in the sweep.
    pub outlier_ratios: Vec<(usize, usize, f64)>,
    pub outliers_bounded: Option<bool>,
    pub hankel_u: HankelDecay,
    pub hankel_conj_u: HankelDecay,
    pub tau: f64,
    pub growth_limit: f64,
}

/// Whether `T_u` is unitary plus compact: winding 0, boundedly many
/// singular values away from 1, and compact Hankel proxies for `u` and
/// `conj(u)`.
pub fn unitary_plus_compact_verdict(
    trace: &CircleTrace,
    sizes: &[usize],
    tau: f64,
) -> Result<UnitaryCompactEvidence, ToeplitzError> {
    check_sweep(sizes)?;
    let spectrum = section_spectrum(trace, sizes, tau)?;
    let mut outlier_ratios = Vec::new();
    for (i, &n) in sizes.iter().enumerate() {
        if let Some(j) = sizes.iter().position(|&m| m == 2 * n) {
            let ratio = (spectrum.outliers[j] as f64 + 1.0) / (spectrum.outliers[i] as f64 + 1.0);
            outlier_ratios.push((n, 2 * n, ratio));
        }
    }
    let outliers_bounded = if outlier_ratios.is_empty() {
        None
    } else {
        Some(outlier_ratios.iter().all(|r| r.2 < OUTLIER_GROWTH))
    };
    let largest = *sizes.iter().max().expect("sweep is nonempty");
    let hankel_size = largest.min(trace.len() / 8).max(1);
    let hankel_u = hankel_decay(trace, hankel_size, tau)?;
    let hankel_conj_u = hankel_decay(&conjugate_trace(trace)?, hankel_size, tau)?;
    let winding = spectrum.winding.map(|w| w.winding);
    let verdict = if winding.is_none_or(|w| w != 0)
        || outliers_bounded == Some(false)
        || !hankel_u.compact
        || !hankel_conj_u.compact
    {
        Verdict::No
    } else if outliers_bounded == Some(true) {
        Verdict::Yes
    } else {
        Verdict::Inconclusive
    };
    Ok(UnitaryCompactEvidence {
        verdict,
        spectrum,
        winding,
        outlier_ratios,
        outliers_bounded,
        hankel_u,
        hankel_conj_u,
        tau,
        growth_limit: OUTLIER_GROWTH,
    })
}
