//! Riesz bounds, asymptotically orthonormal tails, minimality, the lower
//! bound of `T_{1−I}` on `K_Θ`, and the angle between kernel tails and `IH²`.
//!
//! Windows are indexed by integers. A tail starting at `N` is the set of
//! window nodes with `|n| ≥ N`, which for a window of nonnegative indices is
//! the trailing block.

use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hardy::{line_nodes, quadrature_gram, CircleTrace, HardyError, QuadOptions};
use crate::inner::InnerFunction;
use crate::kernels::{gram_closed_form, GramMatrix, KernelError, KernelSystem};
use crate::linalg::{self, CMatrix};
use crate::C64;

/// Largest `|G − G*|` accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Tail Gram matrices below this smallest eigenvalue are not orthonormalized.
pub const TAIL_CONDITION_FLOOR: f64 = 1e-8;
/// Distance from 1 of both tail constants for the asymptotic verdict.
pub const AOB_GAP: f64 = 0.02;
/// Eigenvalues below this times `λ_max` count as singular.
pub const SINGULAR_RATIO: f64 = 1e-12;
/// Relative drop each step of an angle sweep must clear to count as decreasing.
pub const ANGLE_MIN_DROP: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("Gram matrix is not Hermitian: defect {defect:.3e}")]
    NonHermitianInput { defect: f64 },
    #[error("no nodes with |n| ≥ {start} in window {first}..={last}")]
    WindowTooSmall { start: i64, first: i64, last: i64 },
    #[error("tail Gram λ_min = {lambda_min:.3e} is below {floor:.0e}", floor = TAIL_CONDITION_FLOOR)]
    IllConditionedTail { lambda_min: f64 },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Hardy(#[from] HardyError),
}

fn check_hermitian(g: &CMatrix) -> Result<(), BasisError> {
    let defect = linalg::hermitian_defect(g);
    if defect > HERMITIAN_TOL {
        return Err(BasisError::NonHermitianInput { defect });
    }
    Ok(())
}

/// `(c, C) = (λ_min, λ_max)` of the Gram section.
pub fn riesz_bounds(gram: &GramMatrix) -> Result<(f64, f64), BasisError> {
    check_hermitian(gram.entries())?;
    Ok(linalg::extremal_eigenvalues(gram.entries()))
}

/// Tail constants `(c_N, C_N)` of the nodes with `|n| ≥ N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBounds {
    pub start: i64,
    pub size: usize,
    pub lower: f64,
    pub upper: f64,
}

impl TailBounds {
    pub fn gap(&self) -> f64 {
        (1.0 - self.lower).abs().max((self.upper - 1.0).abs())
    }
}

/// Window positions of the nodes with `|n| ≥ start`.
pub fn tail_positions(first: i64, last: i64, start: i64) -> Vec<usize> {
    (first..=last)
        .enumerate()
        .filter(|(_, n)| n.abs() >= start)
        .map(|(p, _)| p)
        .collect()
}

fn select(g: &CMatrix, positions: &[usize]) -> CMatrix {
    CMatrix::from_fn(positions.len(), positions.len(), |i, j| {
        g[(positions[i], positions[j])]
    })
}

/// Extremal eigenvalues of the tail blocks, one per requested start.
pub fn aob_constants(gram: &GramMatrix, starts: &[i64]) -> Result<Vec<TailBounds>, BasisError> {
    check_hermitian(gram.entries())?;
    starts
        .par_iter()
        .map(|&start| {
            let positions = tail_positions(gram.first_index(), gram.last_index(), start);
            if positions.is_empty() {
                return Err(BasisError::WindowTooSmall {
                    start,
                    first: gram.first_index(),
                    last: gram.last_index(),
                });
            }
            let (lower, upper) = linalg::extremal_eigenvalues(&select(gram.entries(), &positions));
            Ok(TailBounds {
                start,
                size: positions.len(),
                lower,
                upper,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AobVerdict {
    pub holds: bool,
    pub last_gap: f64,
    pub decreasing: bool,
    pub threshold: f64,
}

/// Both constants within `AOB_GAP` of 1 at the last tail, with the gap
/// nonincreasing over the last three tails.
pub fn aob_verdict(tails: &[TailBounds]) -> AobVerdict {
    let gaps: Vec<f64> = tails.iter().map(TailBounds::gap).collect();
    let last_gap = gaps.last().copied().unwrap_or(f64::INFINITY);
    let recent = &gaps[gaps.len().saturating_sub(3)..];
    let decreasing = recent.len() == 3 && recent.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    AobVerdict {
        holds: decreasing && last_gap < AOB_GAP,
        last_gap,
        decreasing,
        threshold: AOB_GAP,
    }
}

/// Squared distances of each normalized kernel to the span of the others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalityMargin {
    pub first_index: i64,
    pub distance_sq: Vec<f64>,
    /// Indices whose kernel lies in the span of the others.
    pub flagged: Vec<i64>,
}

impl MinimalityMargin {
    pub fn min(&self) -> f64 {
        self.distance_sq
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// `dist²(k_n, span{k_m : m ≠ n}) = 1/(G⁻¹)_{nn}`; zero and flagged when the
/// Gram matrix is singular along `k_n`.
pub fn minimality_margin(gram: &GramMatrix) -> MinimalityMargin {
    let g = linalg::hermitize(gram.entries());
    let n = g.nrows();
    let eig = g.clone().symmetric_eigen();
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let floor = SINGULAR_RATIO * top.max(1.0);
    let mut in_kernel = vec![false; n];
    for (j, &ev) in eig.eigenvalues.iter().enumerate() {
        if ev < floor {
            for (i, flag) in in_kernel.iter_mut().enumerate() {
                if eig.eigenvectors[(i, j)].norm() > 1e-6 {
                    *flag = true;
                }
            }
        }
    }
    let mut distance_sq = vec![0.0; n];
    if in_kernel.iter().all(|f| !f) {
        if let Some(diag) = linalg::inverse_diagonal(&g) {
            for (d, inv) in distance_sq.iter_mut().zip(diag) {
                *d = 1.0 / inv;
            }
        }
    } else {
        // pseudo-inverse on the span of the regular eigenvectors
        let mut pinv = CMatrix::zeros(n, n);
        for (j, &ev) in eig.eigenvalues.iter().enumerate() {
            if ev >= floor {
                let v = eig.eigenvectors.column(j);
                pinv += v * v.adjoint() * C64::new(1.0 / ev, 0.0);
            }
        }
        for (i, d) in distance_sq.iter_mut().enumerate() {
            if !in_kernel[i] {
                *d = 1.0 / pinv[(i, i)].re;
            }
        }
    }
    let flagged = in_kernel
        .iter()
        .enumerate()
        .filter(|(_, f)| **f)
        .map(|(i, _)| gram.first_index() + i as i64)
        .collect();
    MinimalityMargin {
        first_index: gram.first_index(),
        distance_sq,
        flagged,
    }
}

/// Quadrature Gram of `{m·k_n}`, `entries[j][n] = ⟨m k_n, m k_j⟩`.
pub fn multiplier_gram(
    system: &KernelSystem,
    multiplier: &(dyn Fn(f64) -> C64 + Sync),
    opts: &QuadOptions,
) -> Result<(CMatrix, f64), BasisError> {
    let count = system.len();
    let eval = |t: f64, out: &mut [C64]| {
        let z = C64::new(t, 0.0);
        if system.normalized_all(z, out).is_err() {
            out.iter_mut()
                .for_each(|v| *v = C64::new(f64::NAN, f64::NAN));
            return;
        }
        let m = multiplier(t);
        out.iter_mut().for_each(|v| *v *= m);
    };
    let (rows, error) = quadrature_gram(count, &eval, opts)?;
    Ok((linalg::from_rows(&rows), error))
}

/// Quadrature Gram of `{(1 − I)k_n}`.
pub fn one_minus_i_gram<F: InnerFunction + ?Sized>(
    system: &KernelSystem,
    inner: &F,
    opts: &QuadOptions,
) -> Result<(CMatrix, f64), BasisError> {
    let multiplier = |t: f64| {
        C64::new(1.0, 0.0)
            - inner
                .eval(C64::new(t, 0.0))
                .unwrap_or(C64::new(f64::NAN, 0.0))
    };
    multiplier_gram(system, &multiplier, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub value: f64,
    pub quadrature_error: f64,
}

/// `inf ‖m f‖/‖f‖` over the span of the window kernels.
pub fn multiplier_lower_bound(
    system: &KernelSystem,
    multiplier: &(dyn Fn(f64) -> C64 + Sync),
    opts: &QuadOptions,
) -> Result<LowerBound, BasisError> {
    let (q, quadrature_error) = multiplier_gram(system, multiplier, opts)?;
    let g = gram_closed_form(system);
    let ev = linalg::generalized_eigenvalues(&q, g.entries()).ok_or_else(|| {
        BasisError::IllConditionedTail {
            lambda_min: linalg::extremal_eigenvalues(g.entries()).0,
        }
    })?;
    Ok(LowerBound {
        value: ev.first().copied().unwrap_or(0.0).max(0.0).sqrt(),
        quadrature_error,
    })
}

/// `inf ‖(1 − I)f‖/‖f‖` over the span of the window kernels.
pub fn t_one_minus_i_lower_bound<F: InnerFunction + ?Sized>(
    system: &KernelSystem,
    inner: &F,
    opts: &QuadOptions,
) -> Result<LowerBound, BasisError> {
    let multiplier = |t: f64| {
        C64::new(1.0, 0.0)
            - inner
                .eval(C64::new(t, 0.0))
                .unwrap_or(C64::new(f64::NAN, 0.0))
    };
    multiplier_lower_bound(system, &multiplier, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleOptions {
    /// Circle size; chosen from the window extent when absent.
    pub circle_points: Option<usize>,
    /// Circle points per unit of `1 + T²`, `T` the largest tail node.
    pub density: f64,
    pub max_circle_points: usize,
}

impl Default for AngleOptions {
    fn default() -> Self {
        Self {
            circle_points: None,
            density: 16.0,
            max_circle_points: 1 << 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleReport {
    pub start: i64,
    pub tail_size: usize,
    pub cosine: f64,
    pub tail_lambda_min: f64,
    pub circle_points: usize,
}

/// `cos⟨span(k_n : |n| ≥ N), IH²⟩ = ‖P_{IH²}|span‖` for the Θ-kernels of
/// `system`, whose nodes are points where `I = 1`.
///
/// `Ī k_n` splits into `c_n(Ī − Ī(λ_n))/(t − λ_n)`, the conjugate of an
/// element of `K_I` and so annihilated by `P₊`, plus
/// `c_n(1 − conj(Θ(λ_n))·ΘĪ)/(t − λ_n)`. Only the second part is sent
/// through the circle, which keeps the fast oscillation of `Θ` and `I` out
/// of the FFT.
pub fn subspace_angle_cosine<F: InnerFunction + ?Sized>(
    system: &KernelSystem,
    inner: &F,
    start: i64,
    opts: &AngleOptions,
) -> Result<AngleReport, BasisError> {
    let nodes = system.nodes();
    let positions = tail_positions(nodes.first_index(), nodes.last_index(), start);
    if positions.is_empty() {
        return Err(BasisError::WindowTooSmall {
            start,
            first: nodes.first_index(),
            last: nodes.last_index(),
        });
    }
    let g_full = gram_closed_form(system);
    let g_tail = select(g_full.entries(), &positions);
    let (tail_lambda_min, _) = linalg::extremal_eigenvalues(&g_tail);
    if tail_lambda_min < TAIL_CONDITION_FLOOR {
        return Err(BasisError::IllConditionedTail {
            lambda_min: tail_lambda_min,
        });
    }
    let lambdas = nodes.lambdas();
    let reach = positions
        .iter()
        .map(|&p| lambdas[p].abs())
        .fold(0.0, f64::max);
    let points = match opts.circle_points {
        Some(n) => n,
        None => ((opts.density * (1.0 + reach * reach)).ceil() as usize)
            .next_power_of_two()
            .clamp(4096, opts.max_circle_points),
    };
    let ts = line_nodes(points);
    let u: Vec<C64> = ts
        .par_iter()
        .map(|&t| -> Result<C64, BasisError> {
            let z = C64::new(t, 0.0);
            let theta = system.theta().eval(z).map_err(KernelError::from)?;
            let i = inner.eval(z).map_err(KernelError::from)?;
            Ok(theta * i.conj())
        })
        .collect::<Result<_, _>>()?;
    let values = system.node_values();
    let norms = system.norms();
    // nonnegative modes of P₊ applied to the transferred second part
    let projected: Vec<Vec<C64>> = positions
        .par_iter()
        .map(|&p| -> Result<Vec<C64>, BasisError> {
            let scale = C64::new(0.0, 1.0) / (2.0 * PI * norms[p]);
            let samples = ts
                .iter()
                .zip(&u)
                .map(|(&t, &uv)| {
                    let offset = t - lambdas[p];
                    if offset == 0.0 {
                        return C64::new(0.0, 0.0);
                    }
                    let f = scale * (C64::new(1.0, 0.0) - values[p].conj() * uv) / offset;
                    f * C64::new(t, 1.0) / SQRT_2
                })
                .collect();
            let trace = CircleTrace::from_samples(samples)?;
            Ok((0..points as i64 / 2).map(|k| trace.coeff(k)).collect())
        })
        .collect::<Result<_, _>>()?;
    let m = positions.len();
    let q = CMatrix::from_fn(m, m, |a, b| {
        let s: C64 = projected[b]
            .iter()
            .zip(&projected[a])
            .map(|(x, y)| x * y.conj())
            .sum();
        s * (2.0 * PI)
    });
    let ev =
        linalg::generalized_eigenvalues(&q, &g_tail).ok_or(BasisError::IllConditionedTail {
            lambda_min: tail_lambda_min,
        })?;
    let top = ev.last().copied().unwrap_or(0.0).max(0.0);
    Ok(AngleReport {
        start,
        tail_size: m,
        cosine: top.sqrt(),
        tail_lambda_min,
        circle_points: points,
    })
}

/// Whether cosines over increasing tail starts fall by at least
/// [`ANGLE_MIN_DROP`] at every step.
pub fn angle_decreasing(cosines: &[f64]) -> bool {
    cosines.len() >= 2
        && cosines
            .windows(2)
            .all(|w| w[1] <= (1.0 - ANGLE_MIN_DROP) * w[0])
}

/// Nested windows, tail constants, minimality and verdicts for one system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisReport {
    pub first_index: i64,
    pub last_index: i64,
    pub sizes: Vec<usize>,
    pub riesz_lower: Vec<f64>,
    pub riesz_upper: Vec<f64>,
    pub aob_tails: Vec<TailBounds>,
    pub minimality_min: f64,
    pub minimality_flagged: Vec<i64>,
    pub aob: AobVerdict,
    pub nested_monotone: bool,
}

/// The `size` central indices of a window.
pub fn central_window(first: i64, last: i64, size: usize) -> (i64, i64) {
    let len = (last - first + 1) as usize;
    let size = size.min(len).max(1);
    let lo = first + ((len - size) / 2) as i64;
    (lo, lo + size as i64 - 1)
}

pub fn basis_report(
    gram: &GramMatrix,
    sizes: &[usize],
    starts: &[i64],
) -> Result<BasisReport, BasisError> {
    check_hermitian(gram.entries())?;
    let bounds: Vec<(usize, f64, f64)> = sizes
        .par_iter()
        .map(|&s| {
            let (lo, hi) = central_window(gram.first_index(), gram.last_index(), s);
            let sub = gram
                .principal(lo, hi)
                .expect("window inside the Gram matrix");
            let (c, big_c) = linalg::extremal_eigenvalues(sub.entries());
            (sub.len(), c, big_c)
        })
        .collect();
    let aob_tails = aob_constants(gram, starts)?;
    let minimality = minimality_margin(gram);
    let nested_monotone = bounds
        .windows(2)
        .all(|w| w[1].0 < w[0].0 || (w[1].1 <= w[0].1 + 1e-10 && w[1].2 >= w[0].2 - 1e-10));
    Ok(BasisReport {
        first_index: gram.first_index(),
        last_index: gram.last_index(),
        sizes: bounds.iter().map(|b| b.0).collect(),
        riesz_lower: bounds.iter().map(|b| b.1).collect(),
        riesz_upper: bounds.iter().map(|b| b.2).collect(),
        aob: aob_verdict(&aob_tails),
        aob_tails,
        minimality_min: minimality.min(),
        minimality_flagged: minimality.flagged,
        nested_monotone,
    })
}

impl BasisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `N,c,C` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,c,C\n");
        for ((n, c), big_c) in self
            .sizes
            .iter()
            .zip(&self.riesz_lower)
            .zip(&self.riesz_upper)
        {
            out.push_str(&format!("{n},{c:.12e},{big_c:.12e}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inner::{clark_inner, validate_window, MeromorphicInner, TailPolicy};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pw_system(first: i64, lambdas: &[f64]) -> KernelSystem {
        let nus = vec![1.0 / PI; lambdas.len()];
        KernelSystem::new(
            Arc::new(MeromorphicInner::paley_wiener()),
            validate_window(first, lambdas, &nus).unwrap(),
        )
        .unwrap()
    }

    fn two_by_two(g: f64) -> GramMatrix {
        GramMatrix::new(
            linalg::from_rows(&[vec![c(1.0, 0.0), c(0.0, g)], vec![c(0.0, -g), c(1.0, 0.0)]]),
            0,
        )
    }

    #[test]
    fn identity_gram() {
        let g = GramMatrix::new(CMatrix::identity(5, 5), -2);
        assert_eq!(riesz_bounds(&g).unwrap(), (1.0, 1.0));
        for t in aob_constants(&g, &[0, 1, 2]).unwrap() {
            assert_eq!((t.lower, t.upper), (1.0, 1.0));
        }
        assert!(minimality_margin(&g)
            .distance_sq
            .iter()
            .all(|d| (d - 1.0).abs() < 1e-15));
        assert!(matches!(
            aob_constants(&g, &[3]),
            Err(BasisError::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn half_spaced_pair() {
        let g = two_by_two(2.0 / PI);
        let (lo, hi) = riesz_bounds(&g).unwrap();
        assert!((lo - 0.363_380_227_632_418_4).abs() < 1e-12);
        assert!((hi - 1.636_619_772_367_581_6).abs() < 1e-12);
        let m = minimality_margin(&g);
        assert!((m.distance_sq[0] - (1.0 - 4.0 / (PI * PI))).abs() < 1e-12);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let g = GramMatrix::new(
            linalg::from_rows(&[
                vec![c(1.0, 0.0), c(0.5, 0.0)],
                vec![c(0.0, 0.0), c(1.0, 0.0)],
            ]),
            0,
        );
        assert!(matches!(
            riesz_bounds(&g),
            Err(BasisError::NonHermitianInput { .. })
        ));
    }

    #[test]
    fn duplicated_node_is_flagged() {
        let v = c(0.3, 0.4);
        let rows = vec![
            vec![c(1.0, 0.0), c(1.0, 0.0), v],
            vec![c(1.0, 0.0), c(1.0, 0.0), v],
            vec![v.conj(), v.conj(), c(1.0, 0.0)],
        ];
        let m = minimality_margin(&GramMatrix::new(linalg::from_rows(&rows), 0));
        assert_eq!(m.flagged, vec![0, 1]);
        assert_eq!(m.distance_sq[0], 0.0);
        assert!(m.distance_sq[2] > 0.0);
    }

    #[test]
    fn principal_submatrices_interlace() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let lambdas: Vec<f64> = (0..12)
            .map(|n| n as f64 + rng.gen_range(-0.3..0.3))
            .collect();
        let g = gram_closed_form(&pw_system(0, &lambdas));
        let (c0, c1) = riesz_bounds(&g).unwrap();
        for start in 1..10 {
            let t = &aob_constants(&g, &[start]).unwrap()[0];
            assert!(t.lower >= c0 - 1e-12 && t.upper <= c1 + 1e-12);
            let sub = g.principal(start, 11).unwrap();
            assert_eq!(riesz_bounds(&sub).unwrap(), (t.lower, t.upper));
        }
    }

    #[test]
    fn lower_bound_for_single_kernel() {
        let window: Vec<f64> = (0..4).map(|n| n as f64 * 1.1 + 0.05 * n as f64).collect();
        let nus = [0.3, 0.25, 0.4, 0.35];
        let seq = validate_window(0, &window, &nus).unwrap();
        let clark = clark_inner(&seq, TailPolicy::Plain).unwrap();
        let single = validate_window(1, &window[1..3], &nus[1..3]).unwrap();
        let sys = KernelSystem::new(Arc::new(clark.clone()), single).unwrap();
        let opts = QuadOptions::default();
        let b = t_one_minus_i_lower_bound(&sys, &clark, &opts).unwrap();
        assert!(b.value > 0.1, "{b:?}");
        let zero = |_: f64| c(0.0, 0.0);
        assert_eq!(
            multiplier_lower_bound(&sys, &zero, &opts).unwrap().value,
            0.0
        );
        let (q, _) = one_minus_i_gram(&sys, &clark, &opts).unwrap();
        // ‖(1 − I)k‖² = 2 − 2 Re⟨Ik, k⟩
        let k = sys.normalized_evaluator(1).unwrap();
        let ik = |t: f64| clark.eval(c(t, 0.0)).unwrap() * k(t);
        let r = crate::hardy::inner_product_quadrature(ik, &k, &opts).unwrap();
        assert!((q[(0, 0)].re - (2.0 - 2.0 * r.value.re)).abs() < 1e-6);
    }

    #[test]
    fn angle_vanishes_when_theta_is_i() {
        let lambdas: Vec<f64> = (-8..=8)
            .map(|n| n as f64 + 0.1 * (n as f64).cos())
            .collect();
        let nus = vec![0.3; lambdas.len()];
        let seq = validate_window(-8, &lambdas, &nus).unwrap();
        let clark = clark_inner(&seq, TailPolicy::Plain).unwrap();
        let sys = KernelSystem::new(Arc::new(clark.clone()), seq).unwrap();
        let r = subspace_angle_cosine(&sys, &clark, 4, &AngleOptions::default()).unwrap();
        assert!(r.cosine < 1e-4, "{r:?}");
    }

    #[test]
    fn angle_matches_full_transfer() {
        // Θ = e^{2πiz} with kernels at the nodes of a perturbed lattice
        let half: i64 = 512;
        let lambdas: Vec<f64> = (-half..=half)
            .map(|n| n as f64 + 0.3 * 0.5f64.powi(n.abs() as i32))
            .collect();
        let nus = vec![1.0 / PI; lambdas.len()];
        let clark = clark_inner(
            &validate_window(-half, &lambdas, &nus).unwrap(),
            TailPolicy::LatticeTail { weight: 1.0 / PI },
        )
        .unwrap();
        let w = 6;
        let sys = pw_system(-w, &lambdas[(half - w) as usize..=(half + w) as usize]);
        let start = 5;
        let r = subspace_angle_cosine(&sys, &clark, start, &AngleOptions::default()).unwrap();
        // oracle: P₊ of the whole product Ī k_n on a fine circle
        let points = 1 << 20;
        let ts = line_nodes(points);
        let i_bar: Vec<C64> = ts
            .par_iter()
            .map(|&t| clark.eval(c(t, 0.0)).unwrap().conj())
            .collect();
        let tail = [-6, -5, 5, 6];
        let coeffs: Vec<Vec<C64>> = tail
            .iter()
            .map(|&n| {
                let k = sys.normalized_evaluator(n).unwrap();
                let samples = ts
                    .iter()
                    .zip(&i_bar)
                    .map(|(&t, ib)| ib * k(t) * c(t, 1.0) / SQRT_2)
                    .collect();
                let tr = CircleTrace::from_samples(samples).unwrap();
                (0..points as i64 / 2).map(|k| tr.coeff(k)).collect()
            })
            .collect();
        let q = CMatrix::from_fn(4, 4, |a, b| {
            coeffs[b]
                .iter()
                .zip(&coeffs[a])
                .map(|(x, y)| x * y.conj())
                .sum::<C64>()
                * (2.0 * PI)
        });
        let positions = tail_positions(-w, w, start);
        let g = select(gram_closed_form(&sys).entries(), &positions);
        let ev = linalg::generalized_eigenvalues(&q, &g).unwrap();
        let oracle = ev.last().unwrap().max(0.0).sqrt();
        assert!(
            (r.cosine - oracle).abs() < 1e-3,
            "{} vs {}",
            r.cosine,
            oracle
        );
    }

    #[test]
    fn report_serializes() {
        let lambdas: Vec<f64> = (-10..=10).map(|n| n as f64).collect();
        let g = gram_closed_form(&pw_system(-10, &lambdas));
        let r = basis_report(&g, &[5, 11, 21], &[2, 4, 6]).unwrap();
        assert!(r.aob.holds && r.nested_monotone);
        assert!(r.to_csv().starts_with("N,c,C\n5,"));
        let back: BasisReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
