//! Acceptance criteria, one PASS/FAIL line each. Tolerances are pinned here
//! and do not read the scenario thresholds.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use model_space::basis::multiplier_gram;
use model_space::hardy::{
    conjugate_function, hilbert_transform, integrate_line, pv_hilbert, DecayClass, HilbertOptions,
    LineFunction, QuadOptions,
};
use model_space::inner::{
    clark_inner, min_modulus_strip, sup_derivative_on, validate_window, ClarkInner, InnerFunction,
    MeromorphicInner, TailPolicy, UniformGrid,
};
use model_space::kernels::{gram_closed_form, kernel_eval, verify_key_identity, KernelSystem};
use model_space::linalg;
use model_space::scenario::{self, ScenarioConfig, ScenarioName};
use model_space::toeplitz::{toeplitz_section, winding_number, Symbol};
use model_space::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CLARK_HALF_WIDTH: i64 = 5000;
const CLARK_TOL: f64 = 1e-4;
const CLARK_TIME: Duration = Duration::from_secs(30);
const NODE_VALUE_TOL: f64 = 1e-6;
const NODE_DERIVATIVE_REL: f64 = 1e-3;
const KERNEL_NORM_TOL: f64 = 1e-4;
const GRAM_QUAD_TOL: f64 = 1e-4;
const LATTICE_OFFDIAG_TOL: f64 = 1e-12;
const KEY_IDENTITY_TOL: f64 = 1e-6;
const STRIP_SLACK: f64 = 1e-6;
const DOUBLE_TRANSFORM_TOL: f64 = 1e-4;
const PV_PAIR_TOL: f64 = 1e-3;
const WINDING_RESIDUAL: f64 = 1e-6;
const SHIFT_SIGMA_TOL: f64 = 1e-12;
const KADETS_TIME: Duration = Duration::from_secs(120);
const AOB_GAP: f64 = 0.02;
const AOB_FROM: i64 = 10;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn clark(lambdas: impl Fn(i64) -> f64, half: i64, tail: TailPolicy) -> ClarkInner {
    let l: Vec<f64> = (-half..=half).map(lambdas).collect();
    let seq = validate_window(-half, &l, &vec![1.0 / PI; l.len()]).unwrap();
    clark_inner(&seq, tail).unwrap()
}

fn decaying(n: i64) -> f64 {
    n as f64 + 0.3 * 0.5f64.powi(n.unsigned_abs() as i32)
}

fn pw() -> Arc<dyn InnerFunction> {
    Arc::new(MeromorphicInner::paley_wiener())
}

fn system(lambdas: impl Fn(i64) -> f64, first: i64, last: i64) -> KernelSystem {
    let l: Vec<f64> = (first..=last).map(lambdas).collect();
    let seq = validate_window(first, &l, &vec![1.0 / PI; l.len()]).unwrap();
    KernelSystem::new(pw(), seq).unwrap()
}

fn clark_identity() -> Outcome {
    let start = Instant::now();
    let inner = clark(
        |n| n as f64,
        CLARK_HALF_WIDTH,
        TailPolicy::LatticeTail { weight: 1.0 / PI },
    );
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let z = c(rng.gen_range(-3.0..3.0), rng.gen_range(0.0..=1.0));
        let exact = (c(0.0, 2.0 * PI) * z).exp();
        worst = worst.max((inner.eval(z).unwrap() - exact).norm());
    }
    let elapsed = start.elapsed();
    verdict(
        worst < CLARK_TOL && elapsed < CLARK_TIME,
        format!(
            "max |I − e^(2πiz)| = {worst:.3e} over 200 points, {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn clark_nodes() -> Outcome {
    let inner = clark(
        decaying,
        CLARK_HALF_WIDTH,
        TailPolicy::LatticeTail { weight: 1.0 / PI },
    );
    let h = 1e-5;
    let (mut value, mut rel): (f64, f64) = (0.0, 0.0);
    for n in -10..10 {
        let l = decaying(n);
        value = value.max((inner.eval(c(l, 0.0)).unwrap() - 1.0).norm());
        let d = (inner.eval(c(l + h, 0.0)).unwrap() - inner.eval(c(l - h, 0.0)).unwrap()).norm()
            / (2.0 * h);
        let expected = 2.0 * PI;
        rel = rel.max((d - expected).abs() / expected);
    }
    verdict(
        value < NODE_VALUE_TOL && rel < NODE_DERIVATIVE_REL,
        format!("max |I(λ) − 1| = {value:.3e}, max relative |I′| error = {rel:.3e}"),
    )
}

fn kernel_normalization() -> Outcome {
    let theta = pw();
    let opts = QuadOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_norm: f64 = 0.0;
    for _ in 0..10 {
        let l: f64 = rng.gen_range(-5.0..5.0);
        let th = theta.clone();
        let r = integrate_line(
            move |t| {
                c(
                    kernel_eval(th.as_ref(), l, c(t, 0.0)).unwrap().norm_sqr(),
                    0.0,
                )
            },
            &opts,
        )
        .map_err(|e| e.to_string())?;
        let norm = (r.value.re / (theta.boundary_derivative(l) / (2.0 * PI))).sqrt();
        worst_norm = worst_norm.max((norm - 1.0).abs());
    }
    let mut worst_gram: f64 = 0.0;
    for (first, shape) in [(-4, 0.0), (10, 0.2), (-20, 0.35)] {
        let sys = system(
            move |n| n as f64 + shape * (n as f64 * 0.7).sin(),
            first,
            first + 7,
        );
        let closed = gram_closed_form(&sys);
        let (q, _) = multiplier_gram(&sys, &|_| c(1.0, 0.0), &opts).map_err(|e| e.to_string())?;
        let diff = (q - closed.entries())
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        worst_gram = worst_gram.max(diff);
    }
    verdict(
        worst_norm < KERNEL_NORM_TOL && worst_gram < GRAM_QUAD_TOL,
        format!("max |‖k_λ‖ − 1| = {worst_norm:.3e}, max Gram entry error = {worst_gram:.3e}"),
    )
}

fn lattice_orthonormality() -> Outcome {
    let gram = gram_closed_form(&system(|n| n as f64, -32, 31));
    let g = gram.entries();
    let mut worst: f64 = 0.0;
    for i in 0..64 {
        for j in 0..64 {
            if i != j {
                worst = worst.max(g[(i, j)].norm());
            }
        }
    }
    verdict(
        worst < LATTICE_OFFDIAG_TOL,
        format!("off-diagonal max = {worst:.3e} at N = 64"),
    )
}

fn key_identity() -> Outcome {
    let inner = clark(
        decaying,
        CLARK_HALF_WIDTH,
        TailPolicy::LatticeTail { weight: 1.0 / PI },
    );
    let sys = system(decaying, -10, 9);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let points: Vec<C64> = (0..50)
        .map(|_| c(rng.gen_range(-10.0..10.0), rng.gen_range(0.01..2.0)))
        .collect();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let a: Vec<C64> = (0..sys.len())
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let r = verify_key_identity(&inner, &sys, &a, &points).map_err(|e| e.to_string())?;
        worst = worst.max(r);
    }
    verdict(
        worst < KEY_IDENTITY_TOL,
        format!("max residual = {worst:.3e} over 50 vectors × 50 points"),
    )
}

fn strip_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = f64::INFINITY;
    for _ in 0..20 {
        let zeros: Vec<C64> = (0..rng.gen_range(0..=8))
            .map(|_| c(rng.gen_range(-4.0..4.0), rng.gen_range(0.3..3.0)))
            .collect();
        let theta = MeromorphicInner::new(rng.gen_range(0.0..4.0), zeros).unwrap();
        let grid = UniformGrid::for_derivative(-12.0, 12.0, theta.derivative_bound().unwrap());
        let sup = sup_derivative_on(&theta, grid);
        let eps = rng.gen_range(0.05..=0.5) / sup;
        let min = min_modulus_strip(&theta, eps, grid).map_err(|e| e.to_string())?;
        worst = worst.min(min - (1.0 - eps * sup));
    }
    verdict(
        worst >= -STRIP_SLACK,
        format!("smallest margin over 20 specs = {worst:.3e}"),
    )
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

fn hilbert() -> Outcome {
    let opts = HilbertOptions::default();
    let mut worst_double: f64 = 0.0;
    for (center, width) in [(1.0, 0.8), (0.4, 0.25), (1.7, 1.2)] {
        let f = bump(center, width);
        let b = LineFunction::c_dot_r(0.0, move |t| f(t) - f(-t));
        let once = conjugate_function(&b, &opts).map_err(|e| e.to_string())?;
        let twice =
            conjugate_function(&once.to_line_function(), &opts).map_err(|e| e.to_string())?;
        for i in 0..=60 {
            let x = -3.0 + 0.1 * i as f64;
            worst_double = worst_double.max((twice.eval(x) + b.eval(x)).norm());
        }
    }
    let poisson = LineFunction::c_dot_r(0.0, |t| 1.0 / (1.0 + t * t));
    let grid: Vec<f64> = (0..=20).map(|i| -5.0 + 0.5 * i as f64).collect();
    let computed = hilbert_transform(&poisson, &grid, &opts).map_err(|e| e.to_string())?;
    let mut worst_pair: f64 = 0.0;
    for (&x, v) in grid.iter().zip(&computed) {
        let pv = pv_hilbert(&poisson, x, &QuadOptions::default()).map_err(|e| e.to_string())?;
        worst_pair = worst_pair.max((v - pv.value).norm());
    }
    verdict(
        worst_double < DOUBLE_TRANSFORM_TOL && worst_pair < PV_PAIR_TOL,
        format!("double transform error = {worst_double:.3e}, pair vs PV = {worst_pair:.3e}"),
    )
}

fn winding() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in -5i64..=5 {
        let u = Symbol::Line(LineFunction::new(DecayClass::L1Pi, move |t| {
            (c(t, -1.0) / c(t, 1.0)).powi(k as i32)
        }));
        let w = winding_number(&u.trace(4096).unwrap()).map_err(|e| e.to_string())?;
        if w.winding != k {
            return Err(format!("φ^{k} gave winding {}", w.winding));
        }
        worst = worst.max(w.residual);
    }
    let phi = Symbol::Line(LineFunction::new(DecayClass::L1Pi, |t| {
        c(t, -1.0) / c(t, 1.0)
    }));
    let n = 32;
    let sv = linalg::singular_values(&toeplitz_section(&phi.trace(4096).unwrap(), n).unwrap());
    let shift = sv
        .iter()
        .enumerate()
        .map(|(k, s)| (s - if k + 1 < n { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max);
    verdict(
        worst < WINDING_RESIDUAL && shift < SHIFT_SIGMA_TOL,
        format!("windings exact, max residual = {worst:.3e}, shift σ deviation = {shift:.3e}"),
    )
}

fn ranks(v: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0; v.len()];
    for (rank, i) in order.into_iter().enumerate() {
        r[i] = rank;
    }
    r
}

fn kadets_echo() -> Outcome {
    let start = Instant::now();
    let report = scenario::run(&ScenarioConfig::defaults(ScenarioName::Theorem4Crosscheck))
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let t = report.table("crosscheck").ok_or("no crosscheck table")?;
    let deltas = t.column_f64("delta");
    let cs = t.column_f64("c");
    let sigmas = t.column_f64("sigma_min_N");
    let expected = [0.05, 0.15, 0.25, 0.35, 0.45];
    if deltas.len() != 5
        || deltas
            .iter()
            .zip(expected)
            .any(|(a, b)| (a - b).abs() > 1e-12)
    {
        return Err(format!("unexpected δ grid {deltas:?}"));
    }
    if t.column_f64("N").iter().any(|&n| n != 200.0) {
        return Err("sections not at N = 200".into());
    }
    let decreasing = cs.windows(2).all(|w| w[1] < w[0]);
    let same_rank = ranks(&cs) == ranks(&sigmas);
    verdict(
        decreasing && same_rank && elapsed < KADETS_TIME,
        format!(
            "c(δ) = {:?}, σ_min = {:?}, ranks agree = {same_rank}, {:.1}s",
            cs.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
            sigmas.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
            elapsed.as_secs_f64()
        ),
    )
}

fn aob_echo() -> Outcome {
    let report = scenario::run(&ScenarioConfig::defaults(ScenarioName::Theorem5Crosscheck))
        .map_err(|e| e.to_string())?;
    let tails = report.table("tails").ok_or("no tails table")?;
    let sig = report.table("signatures").ok_or("no signatures table")?;
    let angles = report.table("angles").ok_or("no angles table")?;
    let case_ok = |case: &str| -> Result<[bool; 3], String> {
        let mut aob = true;
        for r in 0..tails.rows.len() {
            if tails.cell(r, "case") == Some(case) {
                let start: i64 = tails.cell(r, "start").unwrap().parse().unwrap();
                let lo: f64 = tails.cell(r, "c_N").unwrap().parse().unwrap();
                let hi: f64 = tails.cell(r, "C_N").unwrap().parse().unwrap();
                if start >= AOB_FROM && ((1.0 - lo).abs() >= AOB_GAP || (hi - 1.0).abs() >= AOB_GAP)
                {
                    aob = false;
                }
            }
        }
        let row = (0..sig.rows.len())
            .find(|&r| sig.cell(r, "case") == Some(case))
            .ok_or(format!("no signature row for {case}"))?;
        let upc = sig.cell(row, "unitary_plus_compact") == Some("yes")
            && sig.cell(row, "winding") == Some("0")
            && sig.cell(row, "hankel_u_compact") == Some("true")
            && sig.cell(row, "hankel_conj_u_compact") == Some("true");
        let cosines: Vec<f64> = (0..angles.rows.len())
            .filter(|&r| angles.cell(r, "case") == Some(case))
            .map(|r| angles.cell(r, "cosine").unwrap().parse().unwrap())
            .collect();
        let falling = cosines.len() == 4 && cosines.windows(2).all(|w| w[1] < 0.95 * w[0]);
        Ok([aob, upc, falling])
    };
    let main = case_ok("sequence")?;
    let control = case_ok("control")?;
    verdict(
        main.iter().all(|&b| b) && !control.iter().all(|&b| b),
        format!("decaying [aob, upc, angle] = {main:?}, control = {control:?}"),
    )
}

fn determinism() -> Outcome {
    let mut config = ScenarioConfig::defaults(ScenarioName::KadetsSweep);
    config.sequence = scenario::SequenceSpec::Perturbed {
        delta: 0.2,
        pattern: scenario::Pattern::Uniform,
    };
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = scenario::run(&config).map_err(|e| e.to_string())?;
    let second = scenario::run(&config).map_err(|e| e.to_string())?;
    let pa = first.write(a.path()).map_err(|e| e.to_string())?;
    let pb = second.write(b.path()).map_err(|e| e.to_string())?;
    let mut compared = 0;
    for (x, y) in pa.iter().zip(&pb) {
        if std::fs::read(x).unwrap() != std::fs::read(y).unwrap() {
            return Err(format!("{} differs", x.display()));
        }
        compared += 1;
    }
    verdict(
        compared == pa.len() && compared > 0,
        format!("{compared} output files byte-identical across two runs"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("01 clark identity on the integers", clark_identity),
        ("02 clark node values and derivatives", clark_nodes),
        (
            "03 kernel normalization and quadrature gram",
            kernel_normalization,
        ),
        ("04 lattice orthonormality", lattice_orthonormality),
        ("05 (1 - I) kernel identity", key_identity),
        ("06 strip bound", strip_bound),
        ("07 hilbert transform", hilbert),
        ("08 winding and shift section", winding),
        ("09 kadets sweep ranking", kadets_echo),
        ("10 decaying perturbation signatures", aob_echo),
        ("11 byte-identical reruns", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome =
            std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
