//! Reproducible experiments built from the other modules.
//!
//! A run takes a [`ScenarioConfig`], computes a set of tables and pass/fail
//! checks, and returns a [`Report`] that embeds the resolved config and the
//! crate version. Reports are written as one CSV per table plus a JSON
//! summary; no timing or host data enters either, so identical configs give
//! byte-identical files.

mod config;
mod runs;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{
    generate, ClarkParams, Pattern, ScenarioConfig, ScenarioName, SequenceSpec, ThetaSpec,
    Thresholds, DEFAULT_SEED,
};

use crate::basis::BasisError;
use crate::hardy::HardyError;
use crate::inner::InnerError;
use crate::io::{self, IoError};
use crate::kernels::KernelError;
use crate::toeplitz::ToeplitzError;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("config: {0}")]
    Config(String),
    #[error("{module}: {message}")]
    Execution {
        module: &'static str,
        message: String,
    },
}

impl ScenarioError {
    pub fn execution(module: &'static str, message: impl ToString) -> Self {
        ScenarioError::Execution {
            module,
            message: message.to_string(),
        }
    }
}

macro_rules! from_module {
    ($($ty:ty => $module:literal),* $(,)?) => {
        $(impl From<$ty> for ScenarioError {
            fn from(e: $ty) -> Self {
                ScenarioError::execution($module, e)
            }
        })*
    };
}

from_module! {
    InnerError => "inner",
    HardyError => "hardy",
    KernelError => "kernels",
    BasisError => "basis",
    ToeplitzError => "toeplitz",
    IoError => "io",
}

/// A named table with preformatted cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Cell of the named column in row `row`.
    pub fn cell(&self, row: usize, column: &str) -> Option<&str> {
        let c = self.columns.iter().position(|x| x == column)?;
        self.rows.get(row)?.get(c).map(String::as_str)
    }

    /// All cells of a column parsed as numbers; unparsable cells are NaN.
    pub fn column_f64(&self, column: &str) -> Vec<f64> {
        (0..self.rows.len())
            .map(|r| {
                self.cell(r, column)
                    .and_then(|s| s.parse().ok())
                    .unwrap_or(f64::NAN)
            })
            .collect()
    }
}

/// Formats a float for reports; the same value always prints the same way.
pub fn num(x: f64) -> String {
    format!("{x:.12e}")
}

/// One pass/fail check. `value` is compared to `threshold` in the direction
/// given by `relation`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub relation: String,
    pub passed: bool,
}

impl Check {
    pub fn below(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            relation: "<".into(),
            passed: value < threshold,
        }
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            relation: ">=".into(),
            passed: value >= threshold,
        }
    }

    /// A yes/no condition, recorded as value 1 or 0 against 1.
    pub fn holds(name: &str, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            threshold: 1.0,
            relation: "==".into(),
            passed: ok,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: ScenarioName,
    pub version: String,
    pub statement: String,
    pub config: ScenarioConfig,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
}

impl Report {
    fn new(config: &ScenarioConfig) -> Self {
        Self {
            scenario: config.scenario,
            version: crate::VERSION.into(),
            statement: info(config.scenario).statement.into(),
            config: config.clone(),
            checks: Vec::new(),
            tables: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// 0 when every check passes, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            2
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Check lines for terminals.
    pub fn summary(&self) -> String {
        let mut out = format!("{} (model-space {})\n", self.scenario, self.version);
        for c in &self.checks {
            let _ = writeln!(
                out,
                "  {} {}: {:.6e} {} {:.6e}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.relation,
                c.threshold
            );
        }
        out
    }

    /// Writes `<dir>/<scenario>/<table>.csv` for each table, the report as
    /// `report.json` and the resolved config as `config.toml`. Returns the
    /// paths written.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, ScenarioError> {
        let base = dir.join(self.scenario.as_str());
        let mut written = Vec::new();
        for table in &self.tables {
            let path = base.join(format!("{}.csv", table.name));
            io::write_text(&path, &table.to_csv())?;
            written.push(path);
        }
        let path = base.join("report.json");
        io::write_text(&path, &self.to_json())?;
        written.push(path);
        let path = base.join("config.toml");
        io::write_text(&path, &self.config.to_toml())?;
        written.push(path);
        Ok(written)
    }
}

/// What a scenario checks, for listings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioInfo {
    pub name: ScenarioName,
    pub statement: &'static str,
    pub checks: &'static str,
}

pub fn info(name: ScenarioName) -> ScenarioInfo {
    let (statement, checks) = match name {
        ScenarioName::ClarkIdentity => (
            "Clark construction on the integers with weights 1/π reproduces e^{2πiz}",
            "grid deviation |I − e^{2πiz}| on Im z ∈ [0, 1]; I = 1 and |I′| = 2/ν at central nodes",
        ),
        ScenarioName::LatticeGram => (
            "normalized kernels of e^{2πiz} at the integers are orthonormal",
            "off-diagonal maximum of the closed-form Gram matrix",
        ),
        ScenarioName::KadetsSweep => (
            "Riesz lower bound of kernels at n + δ·p(n) shrinks as δ grows",
            "c(δ) strictly decreasing over the δ grid",
        ),
        ScenarioName::AobDecay => (
            "tail Riesz constants of a decaying perturbation converge to 1",
            "tail gaps beyond aob_from within aob_gap; asymptotic verdict",
        ),
        ScenarioName::Theorem4Crosscheck => (
            "kernels at Λ form a Riesz basis of K_Θ exactly when T_{ΘĪ} is invertible",
            "c(δ) decreasing; rank agreement of c(δ) with σ_min of the T_{ΘĪ} sections",
        ),
        ScenarioName::Theorem5Crosscheck => (
            "kernels at Λ are asymptotically orthonormal exactly when T_{ΘĪ} is unitary plus compact",
            "AOB tails, unitary-plus-compact verdict and decreasing subspace angle co-occur for the sequence and not all for the control",
        ),
        ScenarioName::HilbertPairs => (
            "the modified Hilbert transform against closed forms and principal-value quadrature",
            "1/(1+t²) pair; double transform of odd bumps is the negation",
        ),
        ScenarioName::VerifyLemmas => (
            "supporting identities: kernel norms, the (1 − I) kernel identity, the strip bound, winding",
            "kernel norms and Gram by quadrature; identity residual; strip minimum; winding of φᵏ and the shift section",
        ),
    };
    ScenarioInfo {
        name,
        statement,
        checks,
    }
}

/// Scenarios whose name contains `filter`, in listing order.
pub fn list_scenarios(filter: Option<&str>) -> Vec<ScenarioInfo> {
    ScenarioName::ALL
        .into_iter()
        .filter(|n| filter.is_none_or(|f| n.as_str().contains(f)))
        .map(info)
        .collect()
}

/// Runs one scenario.
pub fn run(config: &ScenarioConfig) -> Result<Report, ScenarioError> {
    config.validate()?;
    let mut report = Report::new(config);
    match config.scenario {
        ScenarioName::ClarkIdentity => runs::clark_identity(config, &mut report)?,
        ScenarioName::LatticeGram => runs::lattice_gram(config, &mut report)?,
        ScenarioName::KadetsSweep => runs::kadets_sweep(config, &mut report)?,
        ScenarioName::AobDecay => runs::aob_decay(config, &mut report)?,
        ScenarioName::Theorem4Crosscheck => runs::riesz_crosscheck(config, &mut report)?,
        ScenarioName::Theorem5Crosscheck => runs::aob_crosscheck(config, &mut report)?,
        ScenarioName::HilbertPairs => runs::hilbert_pairs(config, &mut report)?,
        ScenarioName::VerifyLemmas => runs::verify_lemmas(config, &mut report)?,
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn listing_and_filter() {
        assert_eq!(list_scenarios(None).len(), 8);
        let t5 = list_scenarios(Some("theorem5"));
        assert_eq!(t5.len(), 1);
        assert_eq!(t5[0].name, ScenarioName::Theorem5Crosscheck);
        assert!(list_scenarios(Some("nothing")).is_empty());
    }

    #[test]
    fn table_csv_and_lookup() {
        let mut t = Table::new("demo", &["N", "value"]);
        t.push(vec!["1".into(), num(0.5)]);
        assert_eq!(t.to_csv(), "N,value\n1,5.000000000000e-1\n");
        assert_eq!(t.column_f64("value"), vec![0.5]);
        assert_eq!(t.cell(0, "missing"), None);
    }

    #[test]
    fn checks_and_exit_codes() {
        let mut r = Report::new(&ScenarioConfig::defaults(ScenarioName::LatticeGram));
        r.checks.push(Check::below("a", 1e-13, 1e-12));
        assert_eq!(r.exit_code(), 0);
        r.checks.push(Check::at_least("b", 0.5, 1.0));
        assert_eq!(r.exit_code(), 2);
        assert!(r.summary().contains("FAIL b"));
    }
}
