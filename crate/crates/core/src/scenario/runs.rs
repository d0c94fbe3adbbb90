//! The scenario bodies.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{generate, Pattern, ScenarioConfig, SequenceSpec};
use super::{num, Check, Report, ScenarioError, Table};
use crate::basis::{
    angle_decreasing, aob_constants, aob_verdict, minimality_margin, multiplier_gram, riesz_bounds,
    subspace_angle_cosine, AngleOptions, TailBounds,
};
use crate::hardy::{
    conjugate_function, hilbert_transform, integrate_line, pv_hilbert, DecayClass, HilbertOptions,
    LineFunction, QuadOptions,
};
use crate::inner::{
    clark_inner, min_modulus_strip, sup_derivative_on, validate_window, ClarkInner, InnerFunction,
    MeromorphicInner, SeparatedSequence, TailPolicy, UniformGrid,
};
use crate::kernels::{gram_closed_form, kernel_eval, verify_key_identity, KernelSystem};
use crate::linalg;
use crate::toeplitz::{
    invertibility_verdict, section_spectrum, toeplitz_section, unitary_plus_compact_verdict,
    winding_number, Symbol, Verdict, TAU_INV,
};
use crate::C64;

/// Central nodes whose Clark values and derivatives are checked.
const CENTRAL_NODES: i64 = 20;
/// Step of the central difference for `|I′|`.
const DIFF_STEP: f64 = 1e-5;
/// Random nodes in the kernel-norm check.
const KERNEL_LAMBDAS: usize = 10;
/// Random inner functions in the strip check.
const RANDOM_SPECS: usize = 20;
const MAX_RANDOM_ZEROS: usize = 8;
/// Kernels in the identity check.
const IDENTITY_KERNELS: i64 = 20;
/// Largest winding checked on powers of the Cayley factor.
const MAX_POWER: i64 = 5;
/// Size of the shift section whose spectrum is checked.
const SHIFT_SECTION: usize = 16;

fn rng(config: &ScenarioConfig, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(config.seed);
    r.set_stream(stream);
    r
}

fn nodes(
    config: &ScenarioConfig,
    spec: &SequenceSpec,
    first: i64,
    last: i64,
) -> Result<SeparatedSequence, ScenarioError> {
    let lambdas = generate(spec, first, last, config.seed)?;
    let nus = vec![config.clark.weight; lambdas.len()];
    let seq = validate_window(first, &lambdas, &nus)?;
    if seq.was_reordered() {
        return Err(ScenarioError::Config(format!(
            "sequence nodes in {first}..{last} are not increasing in the index"
        )));
    }
    Ok(seq)
}

fn clark(config: &ScenarioConfig, spec: &SequenceSpec) -> Result<Arc<ClarkInner>, ScenarioError> {
    let h = config.clark.half_width;
    let seq = nodes(config, spec, -h, h)?;
    Ok(Arc::new(clark_inner(&seq, config.clark.policy())?))
}

fn theta(config: &ScenarioConfig) -> Result<Arc<dyn InnerFunction>, ScenarioError> {
    Ok(Arc::new(config.theta.build()?))
}

/// Indices `lo..=hi` of a centered window of `size` nodes.
fn centered(size: usize) -> (i64, i64) {
    let lo = -(size as i64 / 2);
    (lo, lo + size as i64 - 1)
}

fn system(
    config: &ScenarioConfig,
    spec: &SequenceSpec,
    first: i64,
    last: i64,
) -> Result<KernelSystem, ScenarioError> {
    Ok(KernelSystem::new(
        theta(config)?,
        nodes(config, spec, first, last)?,
    )?)
}

fn window(first: i64, last: i64) -> String {
    format!("{first}..{last}")
}

fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut r = vec![0.0; values.len()];
    for (rank, &i) in order.iter().enumerate() {
        r[i] = rank as f64;
    }
    r
}

/// Spearman correlation without tie handling.
fn rank_correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    if a.len() < 2 {
        return f64::NAN;
    }
    let d2: f64 = ranks(a)
        .iter()
        .zip(ranks(b))
        .map(|(x, y)| (x - y).powi(2))
        .sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

fn joined<T: ToString>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

pub(super) fn clark_identity(
    config: &ScenarioConfig,
    report: &mut Report,
) -> Result<(), ScenarioError> {
    if !config.sequence.is_lattice() || (config.clark.weight * PI - 1.0).abs() > 1e-12 {
        return Err(ScenarioError::Config(
            "clark-identity compares against e^{2πiz} and needs the lattice with weight 1/π".into(),
        ));
    }
    let inner = clark(config, &config.sequence)?;
    let h = config.clark.half_width;
    let mut r = rng(config, 1);
    let points: Vec<C64> = (0..config.samples)
        .map(|_| C64::new(r.gen_range(-3.0..3.0), r.gen_range(0.0..=1.0)))
        .collect();
    let exact: Vec<C64> = points
        .iter()
        .map(|z| (C64::new(0.0, 2.0 * PI) * z).exp())
        .collect();
    let deviation = |f: &ClarkInner| -> Result<Vec<(C64, f64)>, ScenarioError> {
        Ok(points
            .par_iter()
            .zip(&exact)
            .map(|(&z, e)| f.eval(z).map(|v| (v, (v - e).norm())))
            .collect::<Result<_, _>>()?)
    };
    let values = deviation(&inner)?;
    let mut grid = Table::new(
        "grid",
        &["x", "y", "re", "im", "deviation", "window", "tail"],
    );
    for (z, (v, dev)) in points.iter().zip(&values) {
        grid.push(vec![
            num(z.re),
            num(z.im),
            num(v.re),
            num(v.im),
            num(*dev),
            window(-h, h),
            config.clark.policy().to_string(),
        ]);
    }
    let worst = values.iter().map(|v| v.1).fold(0.0, f64::max);
    // the same window under every tail policy, for comparison
    let mut truncation = Table::new("truncation", &["tail", "window", "max_deviation"]);
    let seq = inner.sequence();
    for policy in [
        TailPolicy::Plain,
        TailPolicy::SymmetricPairing,
        TailPolicy::LatticeTail {
            weight: config.clark.weight,
        },
    ] {
        let other = clark_inner(seq, policy)?;
        let d = deviation(&other)?.iter().map(|v| v.1).fold(0.0, f64::max);
        truncation.push(vec![policy.to_string(), window(-h, h), num(d)]);
    }
    report.checks.push(Check::below(
        "grid_deviation",
        worst,
        config.thresholds.clark_identity,
    ));
    report.tables.push(grid);
    report.tables.push(truncation);
    node_checks(config, &inner, report)
}

/// `I(λ_n) = 1` and `|I′(λ_n)| = 2/ν_n` at the central nodes.
fn node_checks(
    config: &ScenarioConfig,
    inner: &ClarkInner,
    report: &mut Report,
) -> Result<(), ScenarioError> {
    let seq = inner.sequence();
    let half = CENTRAL_NODES / 2;
    let (lo, hi) = (
        (-half).max(seq.first_index()),
        (half - 1).min(seq.last_index()),
    );
    let mut table = Table::new(
        "nodes",
        &[
            "index",
            "lambda",
            "value_deviation",
            "derivative",
            "expected",
            "relative_error",
            "window",
        ],
    );
    let (mut worst_value, mut worst_rel): (f64, f64) = (0.0, 0.0);
    for n in lo..=hi {
        let l = seq.lambda(n)?;
        let v = inner.eval(C64::new(l, 0.0))?;
        let plus = inner.eval(C64::new(l + DIFF_STEP, 0.0))?;
        let minus = inner.eval(C64::new(l - DIFF_STEP, 0.0))?;
        let derivative = (plus - minus).norm() / (2.0 * DIFF_STEP);
        let expected = inner.node_derivative(n)?;
        let rel = (derivative - expected).abs() / expected;
        worst_value = worst_value.max((v - 1.0).norm());
        worst_rel = worst_rel.max(rel);
        table.push(vec![
            n.to_string(),
            num(l),
            num((v - 1.0).norm()),
            num(derivative),
            num(expected),
            num(rel),
            window(seq.first_index(), seq.last_index()),
        ]);
    }
    report.checks.push(Check::below(
        "node_value",
        worst_value,
        config.thresholds.node_value,
    ));
    report.checks.push(Check::below(
        "node_derivative",
        worst_rel,
        config.thresholds.node_derivative_rel,
    ));
    report.tables.push(table);
    Ok(())
}

pub(super) fn lattice_gram(
    config: &ScenarioConfig,
    report: &mut Report,
) -> Result<(), ScenarioError> {
    let (lo, hi) = centered(config.gram_size);
    let sys = system(config, &config.sequence, lo, hi)?;
    let gram = gram_closed_form(&sys);
    let g = gram.entries();
    let (mut offdiag, mut diag): (f64, f64) = (0.0, 0.0);
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            if i == j {
                diag = diag.max((g[(i, j)] - 1.0).norm());
            } else {
                offdiag = offdiag.max(g[(i, j)].norm());
            }
        }
    }
    let (c, big_c) = riesz_bounds(&gram)?;
    let mut table = Table::new(
        "gram",
        &["N", "window", "offdiag_max", "diag_max_deviation", "c", "C"],
    );
    table.push(vec![
        config.gram_size.to_string(),
        window(lo, hi),
        num(offdiag),
        num(diag),
        num(c),
        num(big_c),
    ]);
    report.checks.push(Check::below(
        "offdiag_max",
        offdiag,
        config.thresholds.lattice_offdiag,
    ));
    report.checks.push(Check::below(
        "diag_max_deviation",
        diag,
        config.thresholds.lattice_offdiag,
    ));
    report.tables.push(table);
    Ok(())
}

fn kadets_pattern(config: &ScenarioConfig) -> Pattern {
    match config.sequence {
        SequenceSpec::Perturbed { pattern, .. } => pattern,
        _ => Pattern::Alternating,
    }
}

fn kadets_spec(config: &ScenarioConfig, delta: f64) -> SequenceSpec {
    SequenceSpec::Perturbed {
        delta,
        pattern: kadets_pattern(config),
    }
}

/// `(c, C, min dist²)` of the centered Gram window for each δ.
fn kadets_bounds(config: &ScenarioConfig) -> Result<Vec<(f64, f64, f64)>, ScenarioError> {
    let (lo, hi) = centered(config.gram_size);
    config
        .deltas
        .par_iter()
        .map(|&delta| {
            let sys = system(config, &kadets_spec(config, delta), lo, hi)?;
            let gram = gram_closed_form(&sys);
            let (c, big_c) = riesz_bounds(&gram)?;
            Ok((c, big_c, minimality_margin(&gram).min()))
        })
        .collect()
}

fn sorted_by_delta(config: &ScenarioConfig, values: &[f64]) -> Vec<f64> {
    let mut pairs: Vec<(f64, f64)> = config
        .deltas
        .iter()
        .copied()
        .zip(values.iter().copied())
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().map(|p| p.1).collect()
}

pub(super) fn kadets_sweep(
    config: &ScenarioConfig,
    report: &mut Report,
) -> Result<(), ScenarioError> {
    let (lo, hi) = centered(config.gram_size);
    let bounds = kadets_bounds(config)?;
    let mut table = Table::new(
        "sweep",
        &["delta", "N", "window", "c", "C", "min_distance_sq"],
    );
    for (&delta, b) in config.deltas.iter().zip(&bounds) {
        table.push(vec![
            num(delta),
            config.gram_size.to_string(),
            window(lo, hi),
            num(b.0),
            num(b.1),
            num(b.2),
        ]);
    }
    let c: Vec<f64> = bounds.iter().map(|b| b.0).collect();
    report.checks.push(Check::holds(
        "c_strictly_decreasing",
        strictly_decreasing(&sorted_by_delta(config, &c)),
    ));
    report.tables.push(table);
    Ok(())
}

fn tails_table(name: &str) -> Table {
    Table::new(
        name,
        &["case", "start", "size", "window", "c_N", "C_N", "gap"],
    )
}

/// Tail constants of one sequence over the AOB window, with the largest gap
/// among tails starting at `aob_from` or later.
fn aob_tails(
    config: &ScenarioConfig,
    spec: &SequenceSpec,
    case: &str,
    table: &mut Table,
) -> Result<(Vec<TailBounds>, f64), ScenarioError> {
    let (lo, hi) = config.aob_range()?;
    let sys = system(config, spec, lo, hi)?;
    let gram = gram_closed_form(&sys);
    let tails = aob_constants(&gram, &config.aob_starts)?;
    let mut beyond: f64 = 0.0;
    for t in &tails {
        if t.start >= config.aob_from {
            beyond = beyond.max(t.gap());
        }
        table.push(vec![
            case.into(),
            t.start.to_string(),
            t.size.to_string(),
            window(lo, hi),
            num(t.lower),
            num(t.upper),
            num(t.gap()),
        ]);
    }
    if !config.aob_starts.iter().any(|&s| s >= config.aob_from) {
        beyond = f64::INFINITY;
    }
    Ok((tails, beyond))
}

pub(super) fn aob_decay(config: &ScenarioConfig, report: &mut Report) -> Result<(), ScenarioError> {
    let mut table = tails_table("tails");
    let (tails, beyond) = aob_tails(config, &config.sequence, "sequence", &mut table)?;
    report.checks.push(Check::below(
        "tail_gap_beyond_from",
        beyond,
        config.thresholds.aob_gap,
    ));
    report
        .checks
        .push(Check::holds("aob_verdict", aob_verdict(&tails).holds));
    report.tables.push(table);
    Ok(())
}

fn spectrum_rows(table: &mut Table, case: &str, sizes: &[usize], values: &[Vec<f64>]) {
    for (n, sv) in sizes.iter().zip(values) {
        for (k, s) in sv.iter().enumerate() {
            table.push(vec![case.into(), n.to_string(), k.to_string(), num(*s)]);
        }
    }
}

pub(super) fn riesz_crosscheck(
    config: &ScenarioConfig,
    report: &mut Report,
) -> Result<(), ScenarioError> {
    let bounds = kadets_bounds(config)?;
    let theta = theta(config)?;
    let mut table = Table::new(
        "crosscheck",
        &[
            "delta",
            "N",
            "c",
            "C",
            "sigma_min_N",
            "sections",
            "sigma_min_sections",
            "winding",
            "toeplitz_verdict",
            "gram_verdict",
            "agree",
            "circle_points",
            "clark_window",
        ],
    );
    let mut spectrum = Table::new("spectrum", &["delta", "N", "k", "sigma_k"]);
    let mut sigma_n = Vec::new();
    let mut disagreements = 0;
    let h = config.clark.half_width;
    for (&delta, b) in config.deltas.iter().zip(&bounds) {
        let inner = clark(config, &kadets_spec(config, delta))?;
        let symbol = Symbol::InnerRatio {
            theta: theta.clone(),
            inner,
        };
        let trace = symbol.trace(config.circle_points)?;
        let t_n = toeplitz_section(&trace, config.gram_size)?;
        let s_n = linalg::singular_values(&t_n).last().copied().unwrap_or(0.0);
        sigma_n.push(s_n);
        let evidence = invertibility_verdict(&trace, &config.sections)?;
        let gram_verdict = if b.0 > TAU_INV {
            Verdict::Yes
        } else {
            Verdict::No
        };
        let agree = match evidence.verdict {
            Verdict::Inconclusive => "n/a".to_string(),
            v => {
                if v != gram_verdict {
                    disagreements += 1;
                }
                (v == gram_verdict).to_string()
            }
        };
        table.push(vec![
            num(delta),
            config.gram_size.to_string(),
            num(b.0),
            num(b.1),
            num(s_n),
            joined(&config.sections),
            joined(
                &evidence
                    .spectrum
                    .sigma_min
                    .iter()
                    .map(|s| num(*s))
                    .collect::<Vec<_>>(),
            ),
            evidence
                .spectrum
                .winding
                .map_or("none".to_string(), |w| w.winding.to_string()),
            evidence.verdict.to_string(),
            gram_verdict.to_string(),
            agree,
            config.circle_points.to_string(),
            window(-h, h),
        ]);
        spectrum_rows(
            &mut spectrum,
            &num(delta),
            &evidence.spectrum.sizes,
            &evidence.spectrum.singular_values,
        );
    }
    let c: Vec<f64> = bounds.iter().map(|b| b.0).collect();
    report.checks.push(Check::holds(
        "c_strictly_decreasing",
        strictly_decreasing(&sorted_by_delta(config, &c)),
    ));
    report.checks.push(Check::at_least(
        "rank_correlation",
        rank_correlation(&c, &sigma_n),
        1.0 - 1e-12,
    ));
    report.checks.push(Check::below(
        "verdict_disagreements",
        disagreements as f64,
        0.5,
    ));
    report.tables.push(table);
    report.tables.push(spectrum);
    Ok(())
}

/// The three asymptotic signatures of one sequence.
struct Signatures {
    aob_gap: f64,
    aob: bool,
    upc: Verdict,
    angle_decreasing: bool,
}

impl Signatures {
    fn all(&self) -> bool {
        self.aob && self.upc == Verdict::Yes && self.angle_decreasing
    }
}

fn signatures(
    config: &ScenarioConfig,
    spec: &SequenceSpec,
    case: &str,
    tables: &mut [Table; 4],
) -> Result<Signatures, ScenarioError> {
    let [sig_table, tails, angles, spectrum] = tables;
    let (_, aob_gap) = aob_tails(config, spec, case, tails)?;
    let aob = aob_gap < config.thresholds.aob_gap;

    let inner = clark(config, spec)?;
    let symbol = Symbol::InnerRatio {
        theta: theta(config)?,
        inner: inner.clone(),
    };
    let trace = symbol.trace(config.circle_points)?;
    let evidence = unitary_plus_compact_verdict(&trace, &config.sections, config.cluster_tau)?;
    spectrum_rows(
        spectrum,
        case,
        &evidence.spectrum.sizes,
        &evidence.spectrum.singular_values,
    );

    let w = config.angle_half_width;
    let sys = system(config, spec, -w, w)?;
    let mut cosines = Vec::new();
    for &start in &config.angle_starts {
        let a = subspace_angle_cosine(&sys, inner.as_ref(), start, &AngleOptions::default())?;
        angles.push(vec![
            case.into(),
            start.to_string(),
            a.tail_size.to_string(),
            num(a.cosine),
            a.circle_points.to_string(),
            window(-w, w),
        ]);
        cosines.push(a.cosine);
    }
    let angle_decreasing = angle_decreasing(&cosines);
    let ratio = |h: &crate::toeplitz::HankelDecay| {
        if h.sigma_max > 0.0 {
            h.essential_tail / h.sigma_max
        } else {
            0.0
        }
    };
    let s = Signatures {
        aob_gap,
        aob,
        upc: evidence.verdict,
        angle_decreasing,
    };
    sig_table.push(vec![
        case.into(),
        num(s.aob_gap),
        s.aob.to_string(),
        evidence.winding.map_or("none".into(), |w| w.to_string()),
        joined(&evidence.spectrum.outliers),
        num(ratio(&evidence.hankel_u)),
        num(ratio(&evidence.hankel_conj_u)),
        evidence.hankel_u.compact.to_string(),
        evidence.hankel_conj_u.compact.to_string(),
        s.upc.to_string(),
        joined(&cosines.iter().map(|c| num(*c)).collect::<Vec<_>>()),
        s.angle_decreasing.to_string(),
        s.all().to_string(),
        joined(&config.sections),
        config.circle_points.to_string(),
    ]);
    Ok(s)
}

pub(super) fn aob_crosscheck(
    config: &ScenarioConfig,
    report: &mut Report,
) -> Result<(), ScenarioError> {
    let mut tables = [
        Table::new(
            "signatures",
            &[
                "case",
                "aob_gap",
                "aob",
                "winding",
                "outliers",
                "hankel_u_tail_ratio",
                "hankel_conj_u_tail_ratio",
                "hankel_u_compact",
                "hankel_conj_u_compact",
                "unitary_plus_compact",
                "cosines",
                "angle_decreasing",
                "all_signatures",
                "sections",
                "circle_points",
            ],
        ),
        tails_table("tails"),
        Table::new(
            "angles",
            &[
                "case",
                "start",
                "tail_size",
                "cosine",
                "circle_points",
                "window",
            ],
        ),
        Table::new("spectrum", &["case", "N", "k", "sigma_k"]),
    ];
    let main = signatures(config, &config.sequence, "sequence", &mut tables)?;
    let control = signatures(config, &config.control, "control", &mut tables)?;
    report
        .checks
        .push(Check::holds("sequence_signatures_co_occur", main.all()));
    report
        .checks
        .push(Check::holds("control_signature_fails", !control.all()));
    report.tables.extend(tables);
    Ok(())
}

fn bump(center: f64, width: f64) -> impl Fn(f64) -> f64 + Send + Sync + Copy + 'static {
    move |t| {
        let x = (t - center) / width;
        if x.abs() >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - x * x)).exp()
        }
    }
}

pub(super) fn hilbert_pairs(
    config: &ScenarioConfig,
    report: &mut Report,
) -> Result<(), ScenarioError> {
    let opts = HilbertOptions {
        circle_points: config.circle_points,
        ..HilbertOptions::default()
    };
    let poisson = LineFunction::c_dot_r(0.0, |t| 1.0 / (1.0 + t * t));
    let grid: Vec<f64> = (0..=40).map(|i| -5.0 + 0.25 * i as f64).collect();
    let computed = hilbert_transform(&poisson, &grid, &opts)?;
    let quad = QuadOptions::default();
    let oracle: Vec<C64> = grid
        .par_iter()
        .map(|&x| pv_hilbert(&poisson, x, &quad).map(|r| r.value))
        .collect::<Result<_, _>>()?;
    let mut pair = Table::new(
        "pair",
        &[
            "x",
            "computed",
            "closed_form",
            "pv_quadrature",
            "error_closed",
            "error_pv",
        ],
    );
    let (mut worst_closed, mut worst_pv): (f64, f64) = (0.0, 0.0);
    for ((&x, v), o) in grid.iter().zip(&computed).zip(&oracle) {
        let closed = x / (1.0 + x * x);
        let (ec, ep) = ((v.re - closed).abs(), (v - o).norm());
        worst_closed = worst_closed.max(ec);
        worst_pv = worst_pv.max(ep);
        pair.push(vec![
            num(x),
            num(v.re),
            num(closed),
            num(o.re),
            num(ec),
            num(ep),
        ]);
    }
    report.checks.push(Check::below(
        "pair_vs_pv",
        worst_pv,
        config.thresholds.hilbert_pair,
    ));
    report.checks.push(Check::below(
        "pair_vs_closed_form",
        worst_closed,
        config.thresholds.hilbert_pair,
    ));

    let mut double = Table::new(
        "double",
        &[
            "center",
            "width",
            "grid_points",
            "max_error",
            "circle_points",
        ],
    );
    let interior: Vec<f64> = (0..=60).map(|i| -3.0 + 0.1 * i as f64).collect();
    let mut worst_double: f64 = 0.0;
    for (center, width) in [(1.0, 0.8), (0.5, 0.3), (2.0, 1.5)] {
        let f = bump(center, width);
        let b = LineFunction::c_dot_r(0.0, move |t| f(t) - f(-t));
        let once = conjugate_function(&b, &opts)?;
        let twice = conjugate_function(&once.to_line_function(), &opts)?;
        let err = interior
            .iter()
            .map(|&x| (twice.eval(x) + b.eval(x)).norm())
            .fold(0.0, f64::max);
        worst_double = worst_double.max(err);
        double.push(vec![
            num(center),
            num(width),
            interior.len().to_string(),
            num(err),
            twice.circle_points().to_string(),
        ]);
    }
    report.checks.push(Check::below(
        "double_transform",
        worst_double,
        config.thresholds.hilbert_double,
    ));
    report.tables.push(pair);
    report.tables.push(double);
    Ok(())
}

pub(super) fn verify_lemmas(
    config: &ScenarioConfig,
    report: &mut Report,
) -> Result<(), ScenarioError> {
    kernel_norm_checks(config, report)?;
    key_identity_check(config, report)?;
    strip_check(config, report)?;
    winding_checks(config, report)
}

fn kernel_norm_checks(config: &ScenarioConfig, report: &mut Report) -> Result<(), ScenarioError> {
    let theta = theta(config)?;
    let quad = QuadOptions::default();
    let mut r = rng(config, 2);
    let lambdas: Vec<f64> = (0..KERNEL_LAMBDAS)
        .map(|_| r.gen_range(-5.0..5.0))
        .collect();
    let mut norms = Table::new(
        "kernel_norms",
        &[
            "lambda",
            "norm",
            "deviation",
            "quadrature_error",
            "half_width",
        ],
    );
    let mut worst: f64 = 0.0;
    for &l in &lambdas {
        let scale = theta.boundary_derivative(l) / (2.0 * PI);
        let th = theta.clone();
        let res = integrate_line(
            move |t| {
                let k = kernel_eval(th.as_ref(), l, C64::new(t, 0.0))
                    .unwrap_or(C64::new(f64::NAN, 0.0));
                C64::new(k.norm_sqr(), 0.0)
            },
            &quad,
        )?;
        let norm = (res.value.re / scale).sqrt();
        worst = worst.max((norm - 1.0).abs());
        norms.push(vec![
            num(l),
            num(norm),
            num((norm - 1.0).abs()),
            num(res.error),
            num(res.half_width),
        ]);
    }
    report.checks.push(Check::below(
        "kernel_norm",
        worst,
        config.thresholds.kernel_norm,
    ));
    report.tables.push(norms);

    let mut grams = Table::new(
        "gram_quadrature",
        &["case", "N", "window", "max_entry_error", "quadrature_error"],
    );
    let (lo, hi) = centered(config.gram_size);
    let mut worst: f64 = 0.0;
    for (case, spec) in [("sequence", &config.sequence), ("control", &config.control)] {
        let sys = system(config, spec, lo, hi)?;
        let closed = gram_closed_form(&sys);
        let (q, err) = multiplier_gram(&sys, &|_| C64::new(1.0, 0.0), &quad)?;
        let diff = (q - closed.entries())
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        worst = worst.max(diff);
        grams.push(vec![
            case.into(),
            config.gram_size.to_string(),
            window(lo, hi),
            num(diff),
            num(err),
        ]);
    }
    report.checks.push(Check::below(
        "gram_quadrature",
        worst,
        config.thresholds.gram_quadrature,
    ));
    report.tables.push(grams);
    Ok(())
}

fn key_identity_check(config: &ScenarioConfig, report: &mut Report) -> Result<(), ScenarioError> {
    let inner = clark(config, &config.sequence)?;
    let half = IDENTITY_KERNELS / 2;
    let sys = system(config, &config.sequence, -half, half - 1)?;
    let mut r = rng(config, 3);
    let points: Vec<C64> = (0..config.samples)
        .map(|_| C64::new(r.gen_range(-10.0..10.0), r.gen_range(0.01..2.0)))
        .collect();
    let vectors: Vec<Vec<C64>> = (0..config.samples)
        .map(|_| {
            (0..sys.len())
                .map(|_| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
                .collect()
        })
        .collect();
    let residuals: Vec<f64> = vectors
        .iter()
        .map(|a| verify_key_identity(&inner, &sys, a, &points))
        .collect::<Result<_, _>>()?;
    let h = config.clark.half_width;
    let mut table = Table::new(
        "key_identity",
        &["vector", "points", "kernels", "residual", "clark_window"],
    );
    for (j, res) in residuals.iter().enumerate() {
        table.push(vec![
            j.to_string(),
            points.len().to_string(),
            sys.len().to_string(),
            num(*res),
            window(-h, h),
        ]);
    }
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    report.checks.push(Check::below(
        "key_identity",
        worst,
        config.thresholds.key_identity,
    ));
    report.tables.push(table);
    Ok(())
}

fn strip_check(config: &ScenarioConfig, report: &mut Report) -> Result<(), ScenarioError> {
    let mut r = rng(config, 4);
    let mut table = Table::new(
        "strip",
        &[
            "spec",
            "exp_type",
            "zeros",
            "epsilon",
            "sup_derivative",
            "min_modulus",
            "bound",
            "margin",
        ],
    );
    let mut worst = f64::INFINITY;
    for spec in 0..RANDOM_SPECS {
        let exp_type = r.gen_range(0.0..4.0);
        let count = r.gen_range(0..=MAX_RANDOM_ZEROS);
        let zeros: Vec<C64> = (0..count)
            .map(|_| C64::new(r.gen_range(-4.0..4.0), r.gen_range(0.3..3.0)))
            .collect();
        let theta = MeromorphicInner::new(exp_type, zeros)?;
        let coarse =
            UniformGrid::for_derivative(-12.0, 12.0, theta.derivative_bound().unwrap_or(1.0));
        let sup = sup_derivative_on(&theta, coarse);
        let epsilon = r.gen_range(0.05..=0.5) / sup.max(1e-12);
        let min = min_modulus_strip(&theta, epsilon, coarse)?;
        let bound = 1.0 - epsilon * sup;
        worst = worst.min(min - bound);
        table.push(vec![
            spec.to_string(),
            num(exp_type),
            count.to_string(),
            num(epsilon),
            num(sup),
            num(min),
            num(bound),
            num(min - bound),
        ]);
    }
    report.checks.push(Check::at_least(
        "strip_margin",
        worst,
        -config.thresholds.strip_slack,
    ));
    report.tables.push(table);
    Ok(())
}

fn winding_checks(config: &ScenarioConfig, report: &mut Report) -> Result<(), ScenarioError> {
    let mut table = Table::new("winding", &["k", "winding", "residual", "circle_points"]);
    let mut exact = true;
    let mut worst: f64 = 0.0;
    for k in -MAX_POWER..=MAX_POWER {
        let symbol = Symbol::Line(LineFunction::new(DecayClass::L1Pi, move |t| {
            (C64::new(t, -1.0) / C64::new(t, 1.0)).powi(k as i32)
        }));
        let w = winding_number(&symbol.trace(config.circle_points)?)?;
        exact &= w.winding == k;
        worst = worst.max(w.residual);
        table.push(vec![
            k.to_string(),
            w.winding.to_string(),
            num(w.residual),
            config.circle_points.to_string(),
        ]);
    }
    report.checks.push(Check::holds("winding_exact", exact));
    report.checks.push(Check::below(
        "winding_residual",
        worst,
        config.thresholds.winding_residual,
    ));
    report.tables.push(table);

    let phi = Symbol::Line(LineFunction::new(DecayClass::L1Pi, |t| {
        C64::new(t, -1.0) / C64::new(t, 1.0)
    }));
    let spectrum = section_spectrum(&phi.trace(config.circle_points)?, &[SHIFT_SECTION], 0.5)?;
    let sv = &spectrum.singular_values[0];
    let deviation = sv
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let target = if k + 1 < SHIFT_SECTION { 1.0 } else { 0.0 };
            (s - target).abs()
        })
        .fold(0.0, f64::max);
    let mut shift = Table::new("shift_section", &["N", "k", "sigma_k"]);
    for (k, s) in sv.iter().enumerate() {
        shift.push(vec![SHIFT_SECTION.to_string(), k.to_string(), num(*s)]);
    }
    report
        .checks
        .push(Check::below("shift_section", deviation, 1e-12));
    report.tables.push(shift);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spearman_on_small_inputs() {
        assert_eq!(rank_correlation(&[3.0, 2.0, 1.0], &[0.3, 0.2, 0.1]), 1.0);
        assert_eq!(rank_correlation(&[1.0, 2.0, 3.0], &[0.3, 0.2, 0.1]), -1.0);
        assert!(strictly_decreasing(&[3.0, 2.0, 1.0]));
        assert!(!strictly_decreasing(&[3.0, 3.0]));
    }

    #[test]
    fn centered_windows() {
        assert_eq!(centered(200), (-100, 99));
        assert_eq!(centered(7), (-3, 3));
    }
}
