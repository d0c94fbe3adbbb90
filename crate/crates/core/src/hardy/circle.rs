//! Equispaced circle traces and the Cayley identification of `H²(ℂ₊)` with
//! `H²(𝔻)`.
//!
//! The circle grid is offset by half a step, `θ_j = 2π(j + ½)/N`, so that no
//! sample sits at `θ = 0`, the image of `t = ∞`. Its Cayley pullback is
//! `t_j = −cot(θ_j/2)`, increasing in `j`. Analytic functions on ℂ₊ map to
//! traces with nonnegative Fourier modes; the Cayley factor `(t−i)/(t+i)`
//! maps to `e^{iθ}`.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use rustfft::FftPlanner;

use super::HardyError;
use crate::C64;

/// Samples of a function at `N` circle points together with its Fourier
/// coefficients `c_k`, `−N/2 ≤ k < N/2`. Norms use the measure `dθ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleTrace {
    samples: Vec<C64>,
    // FFT order: position m holds k = m for m < N/2 and k = m − N otherwise.
    coeffs: Vec<C64>,
}

pub fn check_size(n: usize) -> Result<(), HardyError> {
    if n < 2 || !n.is_power_of_two() {
        return Err(HardyError::GridMismatch(format!(
            "{n} circle points, need a power of two ≥ 2"
        )));
    }
    Ok(())
}

/// `θ_j = 2π(j + ½)/N`.
pub fn circle_angle(j: usize, n: usize) -> f64 {
    2.0 * PI * (j as f64 + 0.5) / n as f64
}

/// Cayley pullback `t_j = −cot(θ_j / 2)` of the circle grid.
pub fn line_nodes(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let half = 0.5 * circle_angle(j, n);
            -half.cos() / half.sin()
        })
        .collect()
}

/// Circle angle of the real point `t`.
pub fn angle_of(t: f64) -> f64 {
    // e^{iθ} = (t − i)/(t + i)
    let w = C64::new(t, -1.0) / C64::new(t, 1.0);
    let a = w.arg();
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// The Cayley factor `φ(z) = (z − i)/(z + i)`.
pub fn cayley_factor(z: C64) -> C64 {
    (z - C64::new(0.0, 1.0)) / (z + C64::new(0.0, 1.0))
}

fn signed_mode(m: usize, n: usize) -> i64 {
    if m < n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

impl CircleTrace {
    pub fn from_samples(samples: Vec<C64>) -> Result<Self, HardyError> {
        let n = samples.len();
        check_size(n)?;
        let mut buf = samples.clone();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let scale = 1.0 / n as f64;
        let coeffs = buf
            .into_iter()
            .enumerate()
            .map(|(m, v)| {
                let k = signed_mode(m, n) as f64;
                v * C64::from_polar(scale, -PI * k / n as f64)
            })
            .collect();
        Ok(Self { samples, coeffs })
    }

    /// Builds a trace from coefficients in FFT order.
    pub fn from_coeffs(coeffs: Vec<C64>) -> Result<Self, HardyError> {
        let n = coeffs.len();
        check_size(n)?;
        let mut buf: Vec<C64> = coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| c * C64::from_polar(1.0, PI * signed_mode(m, n) as f64 / n as f64))
            .collect();
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        Ok(Self {
            samples: buf,
            coeffs,
        })
    }

    /// Samples `f(θ)` on the circle grid.
    pub fn from_angle_fn(n: usize, f: impl Fn(f64) -> C64) -> Result<Self, HardyError> {
        check_size(n)?;
        Self::from_samples((0..n).map(|j| f(circle_angle(j, n))).collect())
    }

    /// Composes a multiplier `u` on ℝ with the inverse Cayley map. No
    /// weight is applied: this is how symbols are transferred.
    pub fn from_line_symbol(n: usize, u: impl Fn(f64) -> C64) -> Result<Self, HardyError> {
        check_size(n)?;
        Self::from_samples(line_nodes(n).into_iter().map(u).collect())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    /// Fourier coefficient `c_k`, zero outside `−N/2..N/2`.
    pub fn coeff(&self, k: i64) -> C64 {
        let n = self.len() as i64;
        if k < -n / 2 || k >= n / 2 {
            return C64::new(0.0, 0.0);
        }
        self.coeffs[k.rem_euclid(n) as usize]
    }

    /// `(k, c_k)` pairs in FFT order.
    pub fn modes(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        let n = self.len();
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(m, c)| (signed_mode(m, n), *c))
    }

    /// `(∫|F|² dθ)^{1/2}` by the trapezoid rule.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.samples.iter().map(|v| v.norm_sqr()).sum();
        (2.0 * PI * s / self.len() as f64).sqrt()
    }

    /// `∫ F·conj(G) dθ` through Parseval.
    pub fn inner(&self, other: &CircleTrace) -> C64 {
        let s: C64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b.conj())
            .sum();
        s * (2.0 * PI)
    }

    /// Evaluates the trigonometric interpolant at an arbitrary angle.
    pub fn eval_angle(&self, theta: f64) -> C64 {
        let n = self.len();
        let half = n / 2;
        let step = C64::from_polar(1.0, theta);
        // rotate from k = −N/2 upwards; restart the phase every 64 modes to
        // keep rounding from accumulating
        let mut acc = C64::new(0.0, 0.0);
        let mut phase = C64::new(0.0, 0.0);
        for (i, k) in (-(half as i64)..half as i64).enumerate() {
            if i % 64 == 0 {
                phase = C64::from_polar(1.0, k as f64 * theta);
            }
            acc += self.coeffs[k.rem_euclid(n as i64) as usize] * phase;
            phase *= step;
        }
        acc
    }

    /// Share of `Σ|c_k|²` carried by modes with `|k| > N/4`.
    pub fn high_mode_share(&self) -> f64 {
        let quarter = self.len() as i64 / 4;
        let (mut high, mut total) = (0.0, 0.0);
        for (k, c) in self.modes() {
            total += c.norm_sqr();
            if k.abs() > quarter {
                high += c.norm_sqr();
            }
        }
        if total > 0.0 {
            high / total
        } else {
            0.0
        }
    }

    /// Trace on an `m`-point grid with the same coefficients, zero-padded or
    /// truncated.
    pub fn resample(&self, m: usize) -> Result<CircleTrace, HardyError> {
        check_size(m)?;
        if m == self.len() {
            return Ok(self.clone());
        }
        let mut coeffs = vec![C64::new(0.0, 0.0); m];
        let half = m.min(self.len()) as i64 / 2;
        for k in -half..half {
            coeffs[k.rem_euclid(m as i64) as usize] = self.coeff(k);
        }
        CircleTrace::from_coeffs(coeffs)
    }

    pub fn map_samples(&self, f: impl Fn(C64) -> C64) -> Result<CircleTrace, HardyError> {
        CircleTrace::from_samples(self.samples.iter().map(|v| f(*v)).collect())
    }

    /// Pointwise product on the grid.
    pub fn multiply(&self, other: &CircleTrace) -> Result<CircleTrace, HardyError> {
        if self.len() != other.len() {
            return Err(HardyError::GridMismatch(format!(
                "{} vs {} circle points",
                self.len(),
                other.len()
            )));
        }
        CircleTrace::from_samples(
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a * b)
                .collect(),
        )
    }

    fn with_coeffs(&self, keep: impl Fn(i64, C64) -> C64) -> CircleTrace {
        let n = self.len();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| keep(signed_mode(m, n), *c))
            .collect();
        CircleTrace::from_coeffs(coeffs).expect("size already checked")
    }
}

/// `M⁻¹`: line samples `f(t_j)` to the circle trace `f(t)·(t + i)/√2`.
pub fn cayley_transfer(line_values: &[C64]) -> Result<CircleTrace, HardyError> {
    let n = line_values.len();
    check_size(n)?;
    let nodes = line_nodes(n);
    CircleTrace::from_samples(
        line_values
            .iter()
            .zip(&nodes)
            .map(|(f, &t)| f * C64::new(t, 1.0) / SQRT_2)
            .collect(),
    )
}

/// `M`: circle trace back to line samples `F·√2/(t + i)` at the pullback nodes.
pub fn cayley_inverse(trace: &CircleTrace) -> Vec<C64> {
    line_nodes(trace.len())
        .into_iter()
        .zip(trace.samples())
        .map(|(t, f)| f * SQRT_2 / C64::new(t, 1.0))
        .collect()
}

/// Samples `f` at the pullback nodes and transfers it.
pub fn transfer_fn(n: usize, f: impl Fn(f64) -> C64) -> Result<CircleTrace, HardyError> {
    check_size(n)?;
    let values: Vec<C64> = line_nodes(n).into_iter().map(f).collect();
    cayley_transfer(&values)
}

/// `P₊`: keeps modes `k ≥ 0` (constants belong to the analytic side).
pub fn riesz_project(trace: &CircleTrace) -> CircleTrace {
    trace.with_coeffs(|k, c| if k >= 0 { c } else { C64::new(0.0, 0.0) })
}

/// `P₋ = Id − P₊`: keeps modes `k < 0`.
pub fn co_project(trace: &CircleTrace) -> CircleTrace {
    trace.with_coeffs(|k, c| if k < 0 { c } else { C64::new(0.0, 0.0) })
}

/// Conjugate function: multiplier `−i·sign(k)`, mean sent to zero.
pub fn conjugate(trace: &CircleTrace) -> CircleTrace {
    trace.with_coeffs(|k, c| match k.signum() {
        1 => c * C64::new(0.0, -1.0),
        -1 => c * C64::new(0.0, 1.0),
        _ => C64::new(0.0, 0.0),
    })
}

/// A complex function on ℝ shared across threads.
pub type LineFn = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn nodes_increase_and_match_angles() {
        let nodes = line_nodes(64);
        assert!(nodes.windows(2).all(|p| p[1] > p[0]));
        for (j, t) in nodes.iter().enumerate() {
            assert!((angle_of(*t) - circle_angle(j, 64)).abs() < 1e-12);
            let w = cayley_factor(c(*t, 0.0));
            assert!((w - C64::from_polar(1.0, circle_angle(j, 64))).norm() < 1e-12);
        }
    }

    #[test]
    fn coefficients_of_monomials() {
        let tr = CircleTrace::from_angle_fn(32, |th| C64::from_polar(1.0, 3.0 * th)).unwrap();
        for k in -16..16 {
            let expect = if k == 3 { 1.0 } else { 0.0 };
            assert!((tr.coeff(k) - c(expect, 0.0)).norm() < 1e-13, "{k}");
        }
        let back = CircleTrace::from_coeffs(tr.coeffs.clone()).unwrap();
        for (a, b) in back.samples().iter().zip(tr.samples()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn zero_function_gives_zero_trace() {
        let tr = transfer_fn(16, |_| c(0.0, 0.0)).unwrap();
        assert!(tr.samples().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn cayley_round_trip() {
        let f = |t: f64| c(t, 1.0).inv();
        let values: Vec<C64> = line_nodes(256).into_iter().map(f).collect();
        let tr = cayley_transfer(&values).unwrap();
        // 1/(t+i) is the constant 1/√2 on the circle
        for v in tr.samples() {
            assert!((v - c(1.0 / SQRT_2, 0.0)).norm() < 1e-12);
        }
        let back = cayley_inverse(&tr);
        for (a, b) in back.iter().zip(&values) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn transfer_preserves_norm() {
        // ∫ dt/(1+t²)² = π/2
        let tr = transfer_fn(1024, |t| (c(t, 1.0) * c(t, 1.0)).inv()).unwrap();
        assert!((tr.l2_norm().powi(2) - PI / 2.0).abs() < 1e-10);
        let tr = transfer_fn(1024, |t| c(t, 1.0).inv()).unwrap();
        assert!((tr.l2_norm().powi(2) - PI).abs() < 1e-10);
    }

    #[test]
    fn bad_sizes_are_rejected() {
        assert!(matches!(
            cayley_transfer(&[c(0.0, 0.0); 12]),
            Err(HardyError::GridMismatch(_))
        ));
        assert!(CircleTrace::from_samples(vec![]).is_err());
    }

    #[test]
    fn riesz_projection_of_simple_traces() {
        let n = 64;
        let e_plus = CircleTrace::from_angle_fn(n, |th| C64::from_polar(1.0, th)).unwrap();
        let p = riesz_project(&e_plus);
        for (a, b) in p.samples().iter().zip(e_plus.samples()) {
            assert!((a - b).norm() < 1e-13);
        }
        let e_minus = CircleTrace::from_angle_fn(n, |th| C64::from_polar(1.0, -th)).unwrap();
        assert!(riesz_project(&e_minus).l2_norm() < 1e-13);
        let cos2 = CircleTrace::from_angle_fn(n, |th| c(2.0 * th.cos(), 0.0)).unwrap();
        let p = riesz_project(&cos2);
        for (j, v) in p.samples().iter().enumerate() {
            assert!((v - C64::from_polar(1.0, circle_angle(j, n))).norm() < 1e-13);
        }
    }

    #[test]
    fn conjugate_of_cosine_is_sine() {
        let n = 64;
        let tr = CircleTrace::from_angle_fn(n, |th| c(th.cos(), 0.0)).unwrap();
        let conj = conjugate(&tr);
        for (j, v) in conj.samples().iter().enumerate() {
            assert!((v - c(circle_angle(j, n).sin(), 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn resample_keeps_band_limited_traces() {
        let tr = CircleTrace::from_angle_fn(32, |th| c((2.0 * th).cos(), th.sin())).unwrap();
        let up = tr.resample(128).unwrap();
        for j in 0..128 {
            let th = circle_angle(j, 128);
            assert!((up.samples()[j] - c((2.0 * th).cos(), th.sin())).norm() < 1e-12);
        }
        assert!((up.eval_angle(0.3) - c(0.6f64.cos(), 0.3f64.sin())).norm() < 1e-12);
    }
}
