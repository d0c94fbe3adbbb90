//! Adaptive Gauss–Kronrod quadrature on ℝ and on half-lines.
//!
//! The interval `[−T, T]` grows by doubling. Integrands met here decay like
//! `1/t²`, so the truncated integral behaves like `I − c/T` and the
//! extrapolated value `2·I(2T) − I(T)` converges much faster than `I(T)`.
//! Integrands are vector-valued so a whole Gram matrix can share a single
//! pass of evaluations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::HardyError;
use crate::C64;

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights at the odd-indexed Kronrod nodes (1, 3, 5, 7)
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadOptions {
    /// Absolute error allowed per adaptive panel before bisection stops.
    pub panel_tol: f64,
    /// Bisection depth limit inside a panel.
    pub max_depth: u32,
    /// Half-width of the first interval.
    pub initial_half_width: f64,
    /// Doubling stops here.
    pub max_half_width: f64,
    /// Relative change of the extrapolated value that ends the doubling.
    pub target: f64,
    /// Largest error estimate that is still reported as a result.
    pub accept: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            panel_tol: 1e-13,
            max_depth: 40,
            initial_half_width: 16.0,
            max_half_width: 262_144.0,
            target: 1e-9,
            accept: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadResult {
    pub value: C64,
    pub error: f64,
    pub half_width: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VecQuadResult {
    pub values: Vec<C64>,
    pub error: f64,
    pub half_width: f64,
    pub evaluations: usize,
}

struct Panel {
    kronrod: Vec<C64>,
    error: f64,
    evaluations: usize,
}

fn gk15<F>(f: &F, dim: usize, a: f64, b: f64, buf: &mut [C64]) -> (Vec<C64>, f64)
where
    F: Fn(f64, &mut [C64]) + ?Sized,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = vec![C64::new(0.0, 0.0); dim];
    let mut gauss = vec![C64::new(0.0, 0.0); dim];
    for (i, &x) in GK_NODES.iter().enumerate() {
        let points: &[f64] = if x == 0.0 { &[0.0] } else { &[-1.0, 1.0] };
        for s in points {
            f(center + s * half * x, buf);
            for d in 0..dim {
                kronrod[d] += buf[d] * KRONROD_WEIGHTS[i];
                if i % 2 == 1 {
                    gauss[d] += buf[d] * GAUSS_WEIGHTS[i / 2];
                }
            }
        }
    }
    let mut error: f64 = 0.0;
    for d in 0..dim {
        kronrod[d] *= half;
        gauss[d] *= half;
        error = error.max((kronrod[d] - gauss[d]).norm());
    }
    (kronrod, error)
}

fn adaptive<F>(f: &F, dim: usize, a: f64, b: f64, tol: f64, depth: u32, max_depth: u32) -> Panel
where
    F: Fn(f64, &mut [C64]) + ?Sized,
{
    let mut buf = vec![C64::new(0.0, 0.0); dim];
    let (kronrod, error) = gk15(f, dim, a, b, &mut buf);
    let scale = kronrod.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if error <= tol || error <= 1e-15 * scale || depth >= max_depth || (b - a) < 1e-12 {
        return Panel {
            kronrod,
            error,
            evaluations: 15,
        };
    }
    let mid = 0.5 * (a + b);
    let left = adaptive(f, dim, a, mid, 0.5 * tol, depth + 1, max_depth);
    let right = adaptive(f, dim, mid, b, 0.5 * tol, depth + 1, max_depth);
    Panel {
        kronrod: left
            .kronrod
            .iter()
            .zip(&right.kronrod)
            .map(|(l, r)| l + r)
            .collect(),
        error: left.error + right.error,
        evaluations: 15 + left.evaluations + right.evaluations,
    }
}

/// Integrates over `[a, b]`, split into at most 512 panels processed in
/// parallel and summed in order.
fn integrate_segment<F>(f: &F, dim: usize, a: f64, b: f64, opts: &QuadOptions) -> Panel
where
    F: Fn(f64, &mut [C64]) + Sync + ?Sized,
{
    let pieces = ((b - a).ceil() as usize).clamp(1, 512);
    let width = (b - a) / pieces as f64;
    let panels: Vec<Panel> = (0..pieces)
        .into_par_iter()
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == pieces { b } else { lo + width };
            adaptive(f, dim, lo, hi, opts.panel_tol, 0, opts.max_depth)
        })
        .collect();
    let mut total = Panel {
        kronrod: vec![C64::new(0.0, 0.0); dim],
        error: 0.0,
        evaluations: 0,
    };
    for p in panels {
        for (t, v) in total.kronrod.iter_mut().zip(&p.kronrod) {
            *t += v;
        }
        total.error += p.error;
        total.evaluations += p.evaluations;
    }
    total
}

fn extrapolate<F>(
    f: &F,
    dim: usize,
    opts: &QuadOptions,
    half_line: bool,
) -> Result<VecQuadResult, HardyError>
where
    F: Fn(f64, &mut [C64]) + Sync + ?Sized,
{
    let t0 = opts.initial_half_width;
    let lo = if half_line { 0.0 } else { -t0 };
    let core = integrate_segment(f, dim, lo, t0, opts);
    let mut truncated = core.kronrod;
    let mut panel_error = core.error;
    let mut evaluations = core.evaluations;
    let mut previous: Option<Vec<C64>> = None;
    let mut prev_truncated = truncated.clone();
    let mut t = t0;
    let mut last_change = f64::INFINITY;
    loop {
        let t2 = 2.0 * t;
        let right = integrate_segment(f, dim, t, t2, opts);
        evaluations += right.evaluations;
        panel_error += right.error;
        for (v, r) in truncated.iter_mut().zip(&right.kronrod) {
            *v += r;
        }
        if !half_line {
            let left = integrate_segment(f, dim, -t2, -t, opts);
            evaluations += left.evaluations;
            panel_error += left.error;
            for (v, l) in truncated.iter_mut().zip(&left.kronrod) {
                *v += l;
            }
        }
        let extrapolated: Vec<C64> = truncated
            .iter()
            .zip(&prev_truncated)
            .map(|(now, before)| now * 2.0 - before)
            .collect();
        t = t2;
        if let Some(prev) = &previous {
            let change = extrapolated
                .iter()
                .zip(prev)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            let scale = extrapolated.iter().map(|v| v.norm()).fold(1.0, f64::max);
            last_change = change;
            if change <= opts.target * scale || t >= opts.max_half_width {
                let error = change + panel_error;
                if error > opts.accept * scale {
                    return Err(HardyError::QuadratureNonconvergence {
                        error,
                        half_width: t,
                    });
                }
                return Ok(VecQuadResult {
                    values: extrapolated,
                    error,
                    half_width: t,
                    evaluations,
                });
            }
        }
        if t >= opts.max_half_width {
            return Err(HardyError::QuadratureNonconvergence {
                error: last_change,
                half_width: t,
            });
        }
        prev_truncated = truncated.clone();
        previous = Some(extrapolated);
    }
}

/// `∫_ℝ f(t) dt` for a vector-valued integrand of dimension `dim`.
pub fn integrate_line_vec<F>(
    dim: usize,
    f: &F,
    opts: &QuadOptions,
) -> Result<VecQuadResult, HardyError>
where
    F: Fn(f64, &mut [C64]) + Sync + ?Sized,
{
    extrapolate(f, dim, opts, false)
}

/// `∫_0^∞ f(s) ds` for a vector-valued integrand of dimension `dim`.
pub fn integrate_half_line_vec<F>(
    dim: usize,
    f: &F,
    opts: &QuadOptions,
) -> Result<VecQuadResult, HardyError>
where
    F: Fn(f64, &mut [C64]) + Sync + ?Sized,
{
    extrapolate(f, dim, opts, true)
}

fn scalar(r: VecQuadResult) -> QuadResult {
    QuadResult {
        value: r.values[0],
        error: r.error,
        half_width: r.half_width,
        evaluations: r.evaluations,
    }
}

/// `∫_ℝ f(t) dt`.
pub fn integrate_line(
    f: impl Fn(f64) -> C64 + Sync,
    opts: &QuadOptions,
) -> Result<QuadResult, HardyError> {
    let g = |t: f64, out: &mut [C64]| out[0] = f(t);
    integrate_line_vec(1, &g, opts).map(scalar)
}

/// `∫_0^∞ f(s) ds`.
pub fn integrate_half_line(
    f: impl Fn(f64) -> C64 + Sync,
    opts: &QuadOptions,
) -> Result<QuadResult, HardyError> {
    let g = |t: f64, out: &mut [C64]| out[0] = f(t);
    integrate_half_line_vec(1, &g, opts).map(scalar)
}

/// `⟨f, g⟩ = ∫_ℝ f·conj(g) dt`.
pub fn inner_product_quadrature(
    f: impl Fn(f64) -> C64 + Sync,
    g: impl Fn(f64) -> C64 + Sync,
    opts: &QuadOptions,
) -> Result<QuadResult, HardyError> {
    integrate_line(|t| f(t) * g(t).conj(), opts)
}

/// Gram matrix `G[m][n] = ⟨f_n, f_m⟩` of `count` functions evaluated
/// together by `eval_all(t, out)`.
pub fn quadrature_gram<F>(
    count: usize,
    eval_all: &F,
    opts: &QuadOptions,
) -> Result<(Vec<Vec<C64>>, f64), HardyError>
where
    F: Fn(f64, &mut [C64]) + Sync + ?Sized,
{
    let outer = |t: f64, out: &mut [C64]| {
        let mut values = vec![C64::new(0.0, 0.0); count];
        eval_all(t, &mut values);
        for m in 0..count {
            for n in 0..count {
                out[m * count + n] = values[n] * values[m].conj();
            }
        }
    };
    let r = integrate_line_vec(count * count, &outer, opts)?;
    let rows = (0..count)
        .map(|m| r.values[m * count..(m + 1) * count].to_vec())
        .collect();
    Ok((rows, r.error))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn gk15_is_exact_on_polynomials() {
        let f = |t: f64, out: &mut [C64]| out[0] = c(t.powi(10) - 3.0 * t.powi(3), 0.0);
        let mut buf = [c(0.0, 0.0)];
        let (k, _) = gk15(&f, 1, -1.0, 2.0, &mut buf);
        let exact = (2f64.powi(11) + 1.0) / 11.0 - 0.75 * (16.0 - 1.0);
        assert!((k[0].re - exact).abs() < 1e-10);
    }

    #[test]
    fn cauchy_kernel_norm_is_pi() {
        let r = inner_product_quadrature(
            |t| c(t, 1.0).inv(),
            |t| c(t, 1.0).inv(),
            &QuadOptions::default(),
        )
        .unwrap();
        assert!((r.value.re - PI).abs() < 1e-7, "{:?}", r);
        assert!(r.value.im.abs() < 1e-12);
    }

    #[test]
    fn fast_decay_converges_quickly() {
        let r = integrate_line(|t| c((-t * t).exp(), 0.0), &QuadOptions::default()).unwrap();
        assert!((r.value.re - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn oscillating_sinc_square() {
        // ∫ sin²(πt)/(πt)² dt = 1
        let f = |t: f64| {
            let x = PI * t;
            if x.abs() < 1e-8 {
                c(1.0, 0.0)
            } else {
                c((x.sin() / x).powi(2), 0.0)
            }
        };
        let r = integrate_line(f, &QuadOptions::default()).unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-7, "{:?}", r);
    }

    #[test]
    fn half_line_integral() {
        let r =
            integrate_half_line(|s| c(1.0 / (1.0 + s * s), 0.0), &QuadOptions::default()).unwrap();
        assert!((r.value.re - PI / 2.0).abs() < 1e-7);
    }

    #[test]
    fn non_integrable_reports_nonconvergence() {
        let opts = QuadOptions {
            max_half_width: 1024.0,
            ..QuadOptions::default()
        };
        let r = integrate_line(|t| c(1.0 / (1.0 + t.abs()).sqrt(), 0.0), &opts);
        assert!(matches!(
            r,
            Err(HardyError::QuadratureNonconvergence { .. })
        ));
    }

    #[test]
    fn gram_of_shifted_cauchy_kernels() {
        // residue at the upper pole: ∫ dt/((t − ā_n)(t − a_m)) = 2πi/(a_m − ā_n)
        let pts = [c(0.0, 1.0), c(1.0, 0.5), c(-2.0, 2.0)];
        let eval = |t: f64, out: &mut [C64]| {
            for (o, p) in out.iter_mut().zip(&pts) {
                *o = (c(t, 0.0) - p.conj()).inv();
            }
        };
        let (g, _) = quadrature_gram(3, &eval, &QuadOptions::default()).unwrap();
        for m in 0..3 {
            for n in 0..3 {
                let exact = c(0.0, 2.0 * PI) / (pts[m] - pts[n].conj());
                assert!((g[m][n] - exact).norm() < 1e-7, "{m}{n}");
            }
        }
    }
}
