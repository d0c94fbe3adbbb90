//! Reproducing kernels of model spaces `K_Θ = H² ⊖ ΘH²` at real nodes and
//! their Gram matrices.
//!
//! `K_λ(z) = (i/2π)(1 − conj(Θ(λ))Θ(z))/(z − λ)` with `‖K_λ‖² = |Θ′(λ)|/2π`.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hardy::HardyError;
use crate::inner::{ClarkInner, InnerError, InnerFunction, SeparatedSequence};
use crate::linalg::{self, CMatrix};
use crate::C64;

/// Allowed `||Θ(λ)| − 1|` at a node.
pub const UNIMODULAR_TOL: f64 = 1e-8;
/// Allowed `|I(λ_n) − 1|` for a Clark function paired with the nodes.
pub const NODE_MATCH_TOL: f64 = 1e-8;
/// Closer than this to the node, the kernel takes its diagonal value.
const COINCIDENT: f64 = 1e-12;

const I_UNIT: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("|Θ(λ)| = {modulus} at node {lambda}, not unimodular")]
    NodeNotUnimodular { lambda: f64, modulus: f64 },
    #[error("|Θ′| vanishes at node {lambda}")]
    ZeroNorm { lambda: f64 },
    #[error("index {index} outside window {first}..={last}")]
    IndexOutOfWindow { index: i64, first: i64, last: i64 },
    #[error("Clark function does not equal 1 at node {index}: {value}")]
    NodeMismatch { index: i64, value: C64 },
    #[error("expected {expected} coefficients, got {got}")]
    CoefficientMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Inner(#[from] InnerError),
    #[error(transparent)]
    Hardy(#[from] HardyError),
}

/// `K_λ(z)` for a real node `λ`.
pub fn kernel_eval<F: InnerFunction + ?Sized>(
    theta: &F,
    lambda: f64,
    z: C64,
) -> Result<C64, KernelError> {
    let at_node = theta.eval(C64::new(lambda, 0.0))?;
    let modulus = at_node.norm();
    if (modulus - 1.0).abs() > UNIMODULAR_TOL {
        return Err(KernelError::NodeNotUnimodular { lambda, modulus });
    }
    let offset = z - lambda;
    if offset.norm() < COINCIDENT {
        return Ok(C64::new(
            theta.boundary_derivative(lambda) / (2.0 * PI),
            0.0,
        ));
    }
    let value = theta.eval(z)?;
    Ok(I_UNIT / (2.0 * PI) * (C64::new(1.0, 0.0) - at_node.conj() * value) / offset)
}

/// Kernels at the nodes of a window, with everything that depends only on
/// the node precomputed.
#[derive(Clone)]
pub struct KernelSystem {
    theta: Arc<dyn InnerFunction>,
    nodes: SeparatedSequence,
    values: Vec<C64>,
    derivatives: Vec<f64>,
    norms: Vec<f64>,
}

impl std::fmt::Debug for KernelSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KernelSystem")
            .field(
                "window",
                &(self.nodes.first_index()..=self.nodes.last_index()),
            )
            .field("norms", &self.norms)
            .finish_non_exhaustive()
    }
}

impl KernelSystem {
    pub fn new(
        theta: Arc<dyn InnerFunction>,
        nodes: SeparatedSequence,
    ) -> Result<Self, KernelError> {
        let mut values = Vec::with_capacity(nodes.len());
        let mut derivatives = Vec::with_capacity(nodes.len());
        for &lambda in nodes.lambdas() {
            let v = theta.eval(C64::new(lambda, 0.0))?;
            let modulus = v.norm();
            if (modulus - 1.0).abs() > UNIMODULAR_TOL {
                return Err(KernelError::NodeNotUnimodular { lambda, modulus });
            }
            let d = theta.boundary_derivative(lambda);
            if !(d > 0.0 && d.is_finite()) {
                return Err(KernelError::ZeroNorm { lambda });
            }
            // exact unimodularity keeps the Gram diagonal at one
            values.push(v / modulus);
            derivatives.push(d);
        }
        let norms = derivatives
            .iter()
            .map(|d| (d / (2.0 * PI)).sqrt())
            .collect();
        Ok(Self {
            theta,
            nodes,
            values,
            derivatives,
            norms,
        })
    }

    pub fn theta(&self) -> &Arc<dyn InnerFunction> {
        &self.theta
    }

    pub fn nodes(&self) -> &SeparatedSequence {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Θ(λ_n)` by window position.
    pub fn node_values(&self) -> &[C64] {
        &self.values
    }

    /// `|Θ′(λ_n)|` by window position.
    pub fn derivatives(&self) -> &[f64] {
        &self.derivatives
    }

    /// `‖K_{λ_n}‖` by window position.
    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn position(&self, index: i64) -> Result<usize, KernelError> {
        self.nodes
            .position(index)
            .map_err(|_| KernelError::IndexOutOfWindow {
                index,
                first: self.nodes.first_index(),
                last: self.nodes.last_index(),
            })
    }

    /// `η_n = |I′(λ_n)|^{1/2}|Θ′(λ_n)|^{−1/2}` with `|I′(λ_n)| = 2/ν_n`.
    pub fn etas(&self) -> Vec<f64> {
        self.nodes
            .nus()
            .iter()
            .zip(&self.derivatives)
            .map(|(nu, d)| (2.0 / nu / d).sqrt())
            .collect()
    }

    /// `k_n(z)` at window position `p`, given `Θ(z)`.
    fn normalized_at(&self, p: usize, z: C64, theta_z: C64) -> C64 {
        let offset = z - self.nodes.lambdas()[p];
        if offset.norm() < COINCIDENT {
            return C64::new(self.norms[p], 0.0);
        }
        let scale = I_UNIT / (2.0 * PI * self.norms[p]);
        scale * (C64::new(1.0, 0.0) - self.values[p].conj() * theta_z) / offset
    }

    /// `k_{λ_n}(z)` for node index `n`.
    pub fn normalized_kernel(&self, index: i64, z: C64) -> Result<C64, KernelError> {
        let p = self.position(index)?;
        Ok(self.normalized_at(p, z, self.theta.eval(z)?))
    }

    /// The normalized kernel at node index `n` as a function on ℝ.
    pub fn normalized_evaluator(
        &self,
        index: i64,
    ) -> Result<impl Fn(f64) -> C64 + Send + Sync + '_, KernelError> {
        let p = self.position(index)?;
        Ok(move |t: f64| {
            let z = C64::new(t, 0.0);
            let theta_z = self.theta.eval(z).unwrap_or(C64::new(f64::NAN, f64::NAN));
            self.normalized_at(p, z, theta_z)
        })
    }

    /// All normalized kernels at `z`, by window position. `Θ(z)` is
    /// evaluated once.
    pub fn normalized_all(&self, z: C64, out: &mut [C64]) -> Result<(), KernelError> {
        let theta_z = self.theta.eval(z)?;
        for (p, o) in out.iter_mut().enumerate().take(self.len()) {
            *o = self.normalized_at(p, z, theta_z);
        }
        Ok(())
    }

    /// `Σ a_n k_n(z)` over the window.
    pub fn combination(&self, coefficients: &[C64], z: C64) -> Result<C64, KernelError> {
        self.check_coefficients(coefficients)?;
        let theta_z = self.theta.eval(z)?;
        Ok(coefficients
            .iter()
            .enumerate()
            .map(|(p, a)| a * self.normalized_at(p, z, theta_z))
            .sum())
    }

    fn check_coefficients(&self, coefficients: &[C64]) -> Result<(), KernelError> {
        if coefficients.len() != self.len() {
            return Err(KernelError::CoefficientMismatch {
                expected: self.len(),
                got: coefficients.len(),
            });
        }
        Ok(())
    }

    /// Sub-system on the node indices `first..=last`.
    pub fn restrict(&self, first: i64, last: i64) -> Result<KernelSystem, KernelError> {
        let lo = self.position(first)?;
        let hi = self.position(last)?;
        let lambdas = &self.nodes.lambdas()[lo..=hi];
        let nus = &self.nodes.nus()[lo..=hi];
        let nodes = crate::inner::validate_window(first, lambdas, nus)?;
        Ok(KernelSystem {
            theta: self.theta.clone(),
            nodes,
            values: self.values[lo..=hi].to_vec(),
            derivatives: self.derivatives[lo..=hi].to_vec(),
            norms: self.norms[lo..=hi].to_vec(),
        })
    }
}

/// Gram matrix of normalized kernels, `entries[m][n] = ⟨k_n, k_m⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: CMatrix,
    first_index: i64,
    conditioning: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GramMeta {
    pub first_index: i64,
    pub last_index: i64,
    pub size: usize,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
}

impl GramMatrix {
    pub fn new(entries: CMatrix, first_index: i64) -> Self {
        Self {
            entries,
            first_index,
            conditioning: None,
        }
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn first_index(&self) -> i64 {
        self.first_index
    }

    pub fn last_index(&self) -> i64 {
        self.first_index + self.len() as i64 - 1
    }

    /// Entry for node indices `(m, n)`.
    pub fn entry(&self, m: i64, n: i64) -> Option<C64> {
        let (pm, pn) = (m - self.first_index, n - self.first_index);
        let size = self.len() as i64;
        if pm < 0 || pn < 0 || pm >= size || pn >= size {
            return None;
        }
        Some(self.entries[(pm as usize, pn as usize)])
    }

    /// Computes and stores `(λ_min, λ_max)`.
    pub fn with_conditioning(mut self) -> Self {
        self.conditioning = Some(linalg::extremal_eigenvalues(&self.entries));
        self
    }

    pub fn conditioning(&self) -> Option<(f64, f64)> {
        self.conditioning
    }

    /// Principal submatrix on node indices `first..=last`.
    pub fn principal(&self, first: i64, last: i64) -> Option<GramMatrix> {
        if first < self.first_index || last > self.last_index() || first > last {
            return None;
        }
        let lo = (first - self.first_index) as usize;
        let size = (last - first + 1) as usize;
        Some(GramMatrix::new(
            self.entries.view((lo, lo), (size, size)).into_owned(),
            first,
        ))
    }

    pub fn meta(&self) -> GramMeta {
        GramMeta {
            first_index: self.first_index,
            last_index: self.last_index(),
            size: self.len(),
            lambda_min: self.conditioning.map(|c| c.0),
            lambda_max: self.conditioning.map(|c| c.1),
        }
    }
}

/// Gram matrix from the reproducing property `⟨K_n, K_m⟩ = K_n(λ_m)`.
pub fn gram_closed_form(system: &KernelSystem) -> GramMatrix {
    let n = system.len();
    let lambdas = system.nodes.lambdas();
    let rows: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|m| {
            (0..n)
                .map(|k| {
                    if k == m {
                        return C64::new(1.0, 0.0);
                    }
                    let numer = C64::new(1.0, 0.0) - system.values[k].conj() * system.values[m];
                    I_UNIT * numer
                        / (2.0 * PI * (lambdas[m] - lambdas[k]) * system.norms[k] * system.norms[m])
                })
                .collect()
        })
        .collect();
    let entries = linalg::hermitize(&linalg::from_rows(&rows));
    GramMatrix::new(entries, system.nodes.first_index())
}

/// Normalized Clark kernel `k^I_n(z)` with `I(λ_n) = 1`, `|I′(λ_n)| = 2/ν_n`.
fn clark_kernel(lambda: f64, nu: f64, z: C64, i_z: C64) -> C64 {
    let derivative = 2.0 / nu;
    let offset = z - lambda;
    if offset.norm() < COINCIDENT {
        return C64::new((derivative / (2.0 * PI)).sqrt(), 0.0);
    }
    I_UNIT / (2.0 * PI * derivative).sqrt() * (C64::new(1.0, 0.0) - i_z) / offset
}

/// Largest `|LHS − RHS|` over `samples` in
/// `(1 − I)Σ a_n k^Θ_n = Σ a_n η_n k^I_n − Θ·Σ a_n η_n conj(Θ(λ_n)) k^I_n`.
pub fn verify_key_identity(
    clark: &ClarkInner,
    system: &KernelSystem,
    coefficients: &[C64],
    samples: &[C64],
) -> Result<f64, KernelError> {
    system.check_coefficients(coefficients)?;
    let seq = clark.sequence();
    let mut nus = Vec::with_capacity(system.len());
    for (p, index) in system.nodes.indices().enumerate() {
        let lambda = system.nodes.lambdas()[p];
        let value = clark.eval(C64::new(lambda, 0.0))?;
        let matched = seq
            .lambda(index)
            .map(|l| (l - lambda).abs() <= NODE_MATCH_TOL)
            .unwrap_or(false);
        if !matched || (value - 1.0).norm() > NODE_MATCH_TOL {
            return Err(KernelError::NodeMismatch { index, value });
        }
        nus.push(seq.nu(index)?);
    }
    let etas: Vec<f64> = nus
        .iter()
        .zip(&system.derivatives)
        .map(|(nu, d)| (2.0 / nu / d).sqrt())
        .collect();
    let lambdas = system.nodes.lambdas();
    let residuals: Vec<f64> = samples
        .par_iter()
        .map(|&z| -> Result<f64, KernelError> {
            let theta_z = system.theta.eval(z)?;
            let i_z = clark.eval(z)?;
            let mut lhs = C64::new(0.0, 0.0);
            let mut first = C64::new(0.0, 0.0);
            let mut second = C64::new(0.0, 0.0);
            for (p, a) in coefficients.iter().enumerate() {
                lhs += a * system.normalized_at(p, z, theta_z);
                let k_i = clark_kernel(lambdas[p], nus[p], z, i_z) * (a * etas[p]);
                first += k_i;
                second += k_i * system.values[p].conj();
            }
            lhs *= C64::new(1.0, 0.0) - i_z;
            Ok((lhs - (first - theta_z * second)).norm())
        })
        .collect::<Result<_, _>>()?;
    Ok(residuals.into_iter().fold(0.0, f64::max))
}
