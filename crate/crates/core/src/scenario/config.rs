//! Scenario configuration and the node sequences it can describe.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ScenarioError;
use crate::inner::{MeromorphicInner, TailPolicy};
use crate::io::{self, NodeList, TailName};
use crate::C64;

/// Seed used when a config or command line gives none.
pub const DEFAULT_SEED: u64 = 20_240_617;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioName {
    ClarkIdentity,
    LatticeGram,
    KadetsSweep,
    AobDecay,
    Theorem4Crosscheck,
    Theorem5Crosscheck,
    HilbertPairs,
    VerifyLemmas,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 8] = [
        ScenarioName::ClarkIdentity,
        ScenarioName::LatticeGram,
        ScenarioName::KadetsSweep,
        ScenarioName::AobDecay,
        ScenarioName::Theorem4Crosscheck,
        ScenarioName::Theorem5Crosscheck,
        ScenarioName::HilbertPairs,
        ScenarioName::VerifyLemmas,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioName::ClarkIdentity => "clark-identity",
            ScenarioName::LatticeGram => "lattice-gram",
            ScenarioName::KadetsSweep => "kadets-sweep",
            ScenarioName::AobDecay => "aob-decay",
            ScenarioName::Theorem4Crosscheck => "theorem4-crosscheck",
            ScenarioName::Theorem5Crosscheck => "theorem5-crosscheck",
            ScenarioName::HilbertPairs => "hilbert-pairs",
            ScenarioName::VerifyLemmas => "verify-lemmas",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScenarioName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| ScenarioError::Config(format!("unknown scenario {s:?}")))
    }
}

/// Shape of a perturbation `λ_n = n + δ·p(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pattern {
    /// `p(n) = (−1)ⁿ`.
    Alternating,
    /// `p(n) = 1`.
    Shift,
    /// `p(n)` uniform on `[−1, 1]`, drawn per index from the scenario seed.
    Uniform,
}

/// How node `n` of a sequence is generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SequenceSpec {
    /// `λ_n = n`.
    Lattice,
    Perturbed {
        delta: f64,
        pattern: Pattern,
    },
    /// `λ_n = n + δ·rate^{|n|}`.
    Decaying {
        delta: f64,
        rate: f64,
    },
    /// Node CSV; indices outside the file are an error.
    File {
        path: String,
    },
}

impl SequenceSpec {
    pub fn is_lattice(&self) -> bool {
        matches!(self, SequenceSpec::Lattice)
            || matches!(self, SequenceSpec::Perturbed { delta, .. } if *delta == 0.0)
            || matches!(self, SequenceSpec::Decaying { delta, .. } if *delta == 0.0)
    }

    fn check(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::Config(m));
        match self {
            SequenceSpec::Perturbed { delta, .. } if !(delta.is_finite() && delta.abs() < 0.5) => {
                bad(format!("perturbation δ = {delta} must satisfy |δ| < 1/2"))
            }
            SequenceSpec::Decaying { delta, rate }
                if !(delta.is_finite() && delta.abs() < 0.5 && *rate >= 0.0 && *rate < 1.0) =>
            {
                bad(format!(
                    "decaying δ = {delta}, rate = {rate} need |δ| < 1/2 and 0 ≤ rate < 1"
                ))
            }
            _ => Ok(()),
        }
    }
}

/// Reads the compact forms `lattice`, `perturbed:δ:pattern`,
/// `decaying:δ:rate` and `file:path`.
impl FromStr for SequenceSpec {
    type Err = ScenarioError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let bad = || ScenarioError::Config(format!("cannot read sequence {text:?}"));
        let float = |s: &str| -> Result<f64, ScenarioError> {
            s.parse()
                .map_err(|_| ScenarioError::Config(format!("{s:?} is not a number")))
        };
        let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
        let spec = match kind {
            "lattice" if rest.is_empty() && !text.contains(':') => SequenceSpec::Lattice,
            "file" if !rest.is_empty() => SequenceSpec::File { path: rest.into() },
            "perturbed" | "decaying" => {
                let (a, b) = rest.split_once(':').ok_or_else(bad)?;
                if kind == "perturbed" {
                    let pattern = match b {
                        "alternating" => Pattern::Alternating,
                        "shift" => Pattern::Shift,
                        "uniform" => Pattern::Uniform,
                        other => {
                            return Err(ScenarioError::Config(format!("unknown pattern {other:?}")))
                        }
                    };
                    SequenceSpec::Perturbed {
                        delta: float(a)?,
                        pattern,
                    }
                } else {
                    SequenceSpec::Decaying {
                        delta: float(a)?,
                        rate: float(b)?,
                    }
                }
            }
            _ => return Err(bad()),
        };
        spec.check()?;
        Ok(spec)
    }
}

/// Materialized nodes `λ_n`, `first ≤ n ≤ last`.
pub fn generate(
    spec: &SequenceSpec,
    first: i64,
    last: i64,
    seed: u64,
) -> Result<Vec<f64>, ScenarioError> {
    spec.check()?;
    if first > last {
        return Err(ScenarioError::Config(format!(
            "empty window {first}..{last}"
        )));
    }
    let jitter = |n: i64| -> f64 {
        use rand::{Rng, SeedableRng};
        // one stream per index, so a window's nodes do not depend on its extent
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ (n as u64).rotate_left(17));
        rng.gen_range(-1.0..=1.0)
    };
    match spec {
        SequenceSpec::Lattice => Ok((first..=last).map(|n| n as f64).collect()),
        SequenceSpec::Perturbed { delta, pattern } => Ok((first..=last)
            .map(|n| {
                let p = match pattern {
                    Pattern::Alternating => {
                        if n.rem_euclid(2) == 0 {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                    Pattern::Shift => 1.0,
                    Pattern::Uniform => jitter(n),
                };
                n as f64 + delta * p
            })
            .collect()),
        SequenceSpec::Decaying { delta, rate } => Ok((first..=last)
            .map(|n| n as f64 + delta * rate.powf(n.unsigned_abs() as f64))
            .collect()),
        SequenceSpec::File { path } => {
            let nodes: NodeList = io::parse_node_csv(&io::read_text(Path::new(path))?)?;
            Ok(nodes.window(first, last)?.values)
        }
    }
}

/// Explicit `Θ = e^{i·exp_type·z}·B(z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaSpec {
    pub exp_type: f64,
    pub zeros: Vec<[f64; 2]>,
}

impl Default for ThetaSpec {
    fn default() -> Self {
        Self {
            exp_type: 2.0 * PI,
            zeros: Vec::new(),
        }
    }
}

impl ThetaSpec {
    pub fn build(&self) -> Result<MeromorphicInner, ScenarioError> {
        let zeros = self.zeros.iter().map(|z| C64::new(z[0], z[1])).collect();
        Ok(MeromorphicInner::new(self.exp_type, zeros)?)
    }

    pub fn is_paley_wiener(&self) -> bool {
        self.exp_type == 2.0 * PI && self.zeros.is_empty()
    }
}

/// Truncation of the Clark series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClarkParams {
    /// Nodes `−half_width..=half_width`.
    pub half_width: i64,
    pub tail: TailName,
    pub weight: f64,
}

impl Default for ClarkParams {
    fn default() -> Self {
        Self {
            half_width: 2048,
            tail: TailName::LatticeTail,
            weight: 1.0 / PI,
        }
    }
}

impl ClarkParams {
    pub fn policy(&self) -> TailPolicy {
        match self.tail {
            TailName::Plain => TailPolicy::Plain,
            TailName::SymmetricPairing => TailPolicy::SymmetricPairing,
            TailName::LatticeTail => TailPolicy::LatticeTail {
                weight: self.weight,
            },
        }
    }
}

/// Pass thresholds of the scenario checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub clark_identity: f64,
    pub node_value: f64,
    pub node_derivative_rel: f64,
    pub lattice_offdiag: f64,
    pub kernel_norm: f64,
    pub gram_quadrature: f64,
    pub key_identity: f64,
    pub strip_slack: f64,
    pub winding_residual: f64,
    pub hilbert_double: f64,
    pub hilbert_pair: f64,
    pub aob_gap: f64,
}

impl Thresholds {
    fn named(&self) -> [(&'static str, f64); 12] {
        [
            ("clark_identity", self.clark_identity),
            ("node_value", self.node_value),
            ("node_derivative_rel", self.node_derivative_rel),
            ("lattice_offdiag", self.lattice_offdiag),
            ("kernel_norm", self.kernel_norm),
            ("gram_quadrature", self.gram_quadrature),
            ("key_identity", self.key_identity),
            ("strip_slack", self.strip_slack),
            ("winding_residual", self.winding_residual),
            ("hilbert_double", self.hilbert_double),
            ("hilbert_pair", self.hilbert_pair),
            ("aob_gap", self.aob_gap),
        ]
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            clark_identity: 1e-4,
            node_value: 1e-6,
            node_derivative_rel: 1e-3,
            lattice_offdiag: 1e-12,
            kernel_norm: 1e-4,
            gram_quadrature: 1e-4,
            key_identity: 1e-6,
            strip_slack: 1e-6,
            winding_residual: 1e-6,
            hilbert_double: 1e-4,
            hilbert_pair: 1e-3,
            aob_gap: crate::basis::AOB_GAP,
        }
    }
}

/// A fully resolved scenario run. Every report embeds it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioName,
    pub seed: u64,
    pub sequence: SequenceSpec,
    /// Second sequence, compared against `sequence` where a scenario needs one.
    pub control: SequenceSpec,
    pub theta: ThetaSpec,
    pub clark: ClarkParams,
    pub circle_points: usize,
    /// Random test points, coefficient vectors or specs per check.
    pub samples: usize,
    pub gram_size: usize,
    /// Kadets sweep grid.
    pub deltas: Vec<f64>,
    pub aob_window: String,
    pub aob_starts: Vec<i64>,
    /// Tail constants from this index on are held to `aob_gap`.
    pub aob_from: i64,
    /// Kernels `−angle_half_width..=angle_half_width` for the angle.
    pub angle_half_width: i64,
    pub angle_starts: Vec<i64>,
    pub sections: Vec<usize>,
    pub cluster_tau: f64,
    pub thresholds: Thresholds,
}

impl ScenarioConfig {
    /// Defaults sized for desk-scale runs.
    pub fn defaults(scenario: ScenarioName) -> Self {
        let mut c = ScenarioConfig {
            scenario,
            seed: DEFAULT_SEED,
            sequence: SequenceSpec::Lattice,
            control: SequenceSpec::Perturbed {
                delta: 0.2,
                pattern: Pattern::Alternating,
            },
            theta: ThetaSpec::default(),
            clark: ClarkParams::default(),
            circle_points: 4096,
            samples: 50,
            gram_size: 200,
            deltas: vec![0.05, 0.15, 0.25, 0.35, 0.45],
            aob_window: "-40..40".into(),
            aob_starts: vec![0, 5, 10, 15, 20, 25, 30],
            aob_from: 10,
            angle_half_width: 64,
            angle_starts: vec![5, 10, 20, 40],
            sections: vec![128, 256, 512],
            cluster_tau: crate::toeplitz::CLUSTER_TAU,
            thresholds: Thresholds::default(),
        };
        match scenario {
            ScenarioName::ClarkIdentity => {
                c.clark.half_width = 5000;
                c.samples = 200;
            }
            ScenarioName::LatticeGram => c.gram_size = 64,
            ScenarioName::KadetsSweep | ScenarioName::Theorem4Crosscheck => {
                c.sequence = SequenceSpec::Perturbed {
                    delta: 0.25,
                    pattern: Pattern::Alternating,
                };
            }
            ScenarioName::AobDecay | ScenarioName::Theorem5Crosscheck => {
                c.sequence = SequenceSpec::Decaying {
                    delta: 0.3,
                    rate: 0.5,
                };
            }
            ScenarioName::VerifyLemmas => {
                c.sequence = SequenceSpec::Decaying {
                    delta: 0.3,
                    rate: 0.5,
                };
                c.clark.half_width = 5000;
                c.gram_size = 8;
            }
            ScenarioName::HilbertPairs => {}
        }
        c
    }

    /// Parses a config document. Keys absent from the document keep the
    /// defaults of the named scenario.
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let doc: toml::Table =
            toml::from_str(text).map_err(|e| ScenarioError::Config(e.to_string()))?;
        let name = doc
            .get("scenario")
            .and_then(toml::Value::as_str)
            .ok_or_else(|| ScenarioError::Config("missing string key `scenario`".into()))?;
        let base = Self::defaults(name.parse()?);
        let mut merged =
            toml::Table::try_from(&base).map_err(|e| ScenarioError::Config(e.to_string()))?;
        merge(&mut merged, doc);
        let config: ScenarioConfig = toml::Value::Table(merged)
            .try_into()
            .map_err(|e: toml::de::Error| ScenarioError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    /// Reads a config file; relative sequence files resolve against its
    /// directory.
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let mut config = Self::from_toml(&io::read_text(path)?)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for spec in [&mut config.sequence, &mut config.control] {
            if let SequenceSpec::File { path } = spec {
                if Path::new(path).is_relative() {
                    *path = base.join(&*path).to_string_lossy().into_owned();
                }
            }
        }
        Ok(config)
    }

    pub fn aob_range(&self) -> Result<(i64, i64), ScenarioError> {
        Ok(io::parse_window(&self.aob_window)?)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::Config(m));
        self.sequence.check()?;
        self.control.check()?;
        self.aob_range()?;
        crate::hardy::circle::check_size(self.circle_points)
            .map_err(|e| ScenarioError::Config(e.to_string()))?;
        if self.clark.half_width < 1 || self.clark.half_width > 1_000_000 {
            return bad(format!(
                "clark.half_width {} outside 1..=1000000",
                self.clark.half_width
            ));
        }
        if !(self.clark.weight.is_finite() && self.clark.weight > 0.0) {
            return bad(format!(
                "clark.weight {} must be positive",
                self.clark.weight
            ));
        }
        if self.gram_size < 2 || self.gram_size > 4096 {
            return bad(format!("gram_size {} outside 2..=4096", self.gram_size));
        }
        if self.samples == 0 || self.samples > 100_000 {
            return bad(format!("samples {} outside 1..=100000", self.samples));
        }
        if self.sections.len() < 3
            || self
                .sections
                .iter()
                .any(|&n| n == 0 || 4 * n > self.circle_points)
        {
            return bad(format!(
                "sections {:?} need at least 3 sizes, each at most circle_points/4",
                self.sections
            ));
        }
        if self
            .deltas
            .iter()
            .any(|d| !(d.is_finite() && d.abs() < 0.5))
        {
            return bad(format!("deltas {:?} must lie in (−1/2, 1/2)", self.deltas));
        }
        if !(self.cluster_tau > 0.0 && self.cluster_tau < 1.0) {
            return bad(format!("cluster_tau {} outside (0, 1)", self.cluster_tau));
        }
        if self.angle_half_width < 1 || self.angle_half_width > 512 {
            return bad(format!(
                "angle_half_width {} outside 1..=512",
                self.angle_half_width
            ));
        }
        self.theta.build()?;
        for (name, value) in self.thresholds.named() {
            if !(value.is_finite() && value >= 0.0) {
                return bad(format!(
                    "thresholds.{name} = {value} must be finite and non-negative"
                ));
            }
        }
        Ok(())
    }
}

fn merge(base: &mut toml::Table, overlay: toml::Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) if !o.contains_key("kind") => {
                merge(b, o)
            }
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequence_strings() {
        assert_eq!(
            "lattice".parse::<SequenceSpec>().unwrap(),
            SequenceSpec::Lattice
        );
        assert_eq!(
            "decaying:0.3:0.5".parse::<SequenceSpec>().unwrap(),
            SequenceSpec::Decaying {
                delta: 0.3,
                rate: 0.5
            }
        );
        assert!(matches!(
            "perturbed:0.2:uniform".parse::<SequenceSpec>().unwrap(),
            SequenceSpec::Perturbed {
                pattern: Pattern::Uniform,
                ..
            }
        ));
        assert_eq!(
            "file:C:/nodes.csv".parse::<SequenceSpec>().unwrap(),
            SequenceSpec::File {
                path: "C:/nodes.csv".into()
            }
        );
        for bad in [
            "perturbed:0.2",
            "perturbed:x:shift",
            "spiral",
            "lattice:",
            "decaying:0.7:0.5",
            "file:",
        ] {
            assert!(bad.parse::<SequenceSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn names_roundtrip() {
        for name in ScenarioName::ALL {
            assert_eq!(name.as_str().parse::<ScenarioName>().unwrap(), name);
        }
        assert!("theorem6".parse::<ScenarioName>().is_err());
    }

    #[test]
    fn overrides_merge_into_scenario_defaults() {
        let c = ScenarioConfig::from_toml(
            "scenario = \"kadets-sweep\"\ngram_size = 40\n[clark]\nhalf_width = 300\n",
        )
        .unwrap();
        assert_eq!(c.gram_size, 40);
        assert_eq!(c.clark.half_width, 300);
        assert_eq!(c.clark.tail, TailName::LatticeTail);
        assert!(matches!(c.sequence, SequenceSpec::Perturbed { .. }));
        let back = ScenarioConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn sequence_tables_replace_wholesale() {
        let c =
            ScenarioConfig::from_toml("scenario = \"aob-decay\"\n[sequence]\nkind = \"lattice\"\n")
                .unwrap();
        assert_eq!(c.sequence, SequenceSpec::Lattice);
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(ScenarioConfig::from_toml("gram_size = 3\n").is_err());
        assert!(ScenarioConfig::from_toml("scenario = \"lattice-gram\"\nbogus = 1\n").is_err());
        assert!(
            ScenarioConfig::from_toml("scenario = \"lattice-gram\"\ncircle_points = 1000\n")
                .is_err()
        );
        assert!(
            ScenarioConfig::from_toml("scenario = \"lattice-gram\"\ndeltas = [0.7]\n").is_err()
        );
        assert!(ScenarioConfig::from_toml(
            "scenario = \"lattice-gram\"\n[sequence]\nkind = \"decaying\"\ndelta = 0.3\nrate = 2.0\n"
        )
        .is_err());
    }

    #[test]
    fn generators() {
        let alt = SequenceSpec::Perturbed {
            delta: 0.2,
            pattern: Pattern::Alternating,
        };
        assert_eq!(generate(&alt, -1, 1, 0).unwrap(), vec![-1.2, 0.2, 0.8]);
        let dec = SequenceSpec::Decaying {
            delta: 0.3,
            rate: 0.5,
        };
        assert_eq!(generate(&dec, -1, 1, 0).unwrap(), vec![-0.85, 0.3, 1.15]);
        let uni = SequenceSpec::Perturbed {
            delta: 0.1,
            pattern: Pattern::Uniform,
        };
        let wide = generate(&uni, -10, 10, 7).unwrap();
        let narrow = generate(&uni, -2, 2, 7).unwrap();
        assert_eq!(&wide[8..13], &narrow[..]);
        assert!(wide
            .iter()
            .zip(-10..)
            .all(|(l, n)| (l - n as f64).abs() <= 0.1));
    }
}
