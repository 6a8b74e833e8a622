//! Experiment runner: one config in, CSV tables plus a JSON record out.
//!
//! CSV files start with two `#` lines (table name with format version, then
//! the config hash) followed by a fixed column header. Numbers are printed
//! in Rust's shortest round-trip form, so identical configs give identical
//! bytes. Timings only appear in `record.json`.

mod commands;
mod config;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use config::{preset, Command, ExperimentConfig, SweepSpec};

use crate::error::{Error, Result};

pub const CSV_VERSION: u32 = 1;
const BOUND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, config_hash: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# distcomp {} v{CSV_VERSION}", self.name);
        let _ = writeln!(s, "# config {config_hash}");
        let _ = writeln!(s, "{}", self.columns.join(","));
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtLeast,
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub name: String,
    pub statement: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Distance to violation; negative when violated.
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub measurements: BTreeMap<String, f64>,
    pub tables: Vec<Table>,
    pub objects: BTreeMap<String, serde_json::Value>,
    pub bounds: Vec<BoundRow>,
    pub timings_ms: BTreeMap<String, f64>,
}

impl RunRecord {
    fn new(config: ExperimentConfig) -> Result<Self> {
        Ok(Self {
            config_hash: config.hash()?,
            config,
            measurements: BTreeMap::new(),
            tables: Vec::new(),
            objects: BTreeMap::new(),
            bounds: Vec::new(),
            timings_ms: BTreeMap::new(),
        })
    }

    pub(crate) fn measure(&mut self, key: impl Into<String>, v: f64) {
        self.measurements.insert(key.into(), v);
    }

    pub(crate) fn object<T: Serialize>(&mut self, key: &str, v: &T) -> Result<()> {
        self.objects.insert(key.into(), serde_json::to_value(v)?);
        Ok(())
    }

    pub(crate) fn timed<T>(&mut self, label: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let t = Instant::now();
        let out = f()?;
        self.timings_ms.insert(label.into(), t.elapsed().as_secs_f64() * 1e3);
        Ok(out)
    }

    pub fn get(&self, key: &str) -> Result<f64> {
        self.measurements
            .get(key)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("missing measurement '{key}'")))
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn bounds_table(&self) -> Table {
        let mut t = Table::new("bounds", &["name", "statement", "lhs", "rhs", "slack", "pass"]);
        for b in &self.bounds {
            t.push(vec![b.name.clone(), b.statement.clone(), num(b.lhs), num(b.rhs), num(b.slack), b.pass.to_string()]);
        }
        t
    }
}

pub(crate) fn num(v: f64) -> String {
    format!("{v}")
}

fn bound(name: &str, statement: &str, lhs: f64, rel: Relation, rhs: f64) -> BoundRow {
    let slack = match rel {
        Relation::AtLeast => lhs - rhs,
        Relation::AtMost => rhs - lhs,
    };
    BoundRow { name: name.into(), statement: statement.into(), lhs, rhs, slack, pass: slack >= -BOUND_TOL }
}

fn simulate_bounds(r: &RunRecord, p: &str) -> Result<Vec<BoundRow>> {
    let g = |k: &str| r.get(&format!("{p}{k}"));
    let (rate, cr) = (g("rate")?, g("cr_rate")?);
    Ok(vec![
        bound(
            &format!("{p}converse"),
            "rate >= I(P;W) - f(lambda)",
            rate,
            Relation::AtLeast,
            g("mutual_information")? - g("penalty")?,
        ),
        bound(&format!("{p}rate_floor"), "rate >= I(P;W)", rate, Relation::AtLeast, g("mutual_information")?),
        bound(
            &format!("{p}total_rate"),
            "rate + cr_rate >= H(PW) - announcement/n",
            rate + cr,
            Relation::AtLeast,
            g("output_entropy")? - g("announcement_rate")?,
        ),
        bound(
            &format!("{p}average_vs_strong"),
            "global error <= lambda + atypical mass",
            g("global_err")?,
            Relation::AtMost,
            g("lambda")? + g("atypical_mass")?,
        ),
    ])
}

/// One row per inequality the run can be checked against.
pub fn compare_bounds(r: &RunRecord) -> Result<Vec<BoundRow>> {
    let mut rows = Vec::new();
    match r.config.command {
        Command::Info => rows.push(bound(
            "chain_rule",
            "|H(PW) - I(P;W) - H(W|P)| <= 1e-9",
            (r.get("output_entropy")? - r.get("mutual_information")? - r.get("conditional_entropy")?).abs(),
            Relation::AtMost,
            1e-9,
        )),
        Command::Typical => {
            rows.push(bound("chebyshev", "exact >= Chebyshev value", r.get("min_exact_minus_chebyshev")?, Relation::AtLeast, 0.0));
            rows.push(bound("chernoff", "exact >= Chernoff value", r.get("min_exact_minus_chernoff")?, Relation::AtLeast, 0.0));
        }
        Command::Cover => {
            rows.push(bound("condition_i", "min (I) margin >= 0", r.get("min_margin_i")?, Relation::AtLeast, 0.0));
            rows.push(bound("condition_ii", "min (II) margin >= 0", r.get("min_margin_ii")?, Relation::AtLeast, 0.0));
            rows.push(bound("m_threshold", "M - threshold(M) > 0", r.get("min_m_slack")?, Relation::AtLeast, 0.0));
            rows.push(bound("nm_threshold", "NM - threshold(NM) > 0", r.get("min_nm_slack")?, Relation::AtLeast, 0.0));
        }
        Command::Simulate => rows.extend(simulate_bounds(r, "")?),
        Command::Derandomize => {
            // absent when the code was accepted without exact verification
            if let Ok(e) = r.get("letterwise_max_err") {
                rows.push(bound("letterwise", "letterwise error <= 3 epsilon", e, Relation::AtMost, 3.0 * r.config.epsilon));
            }
            rows.push(bound("q_formula", "Q <= formula", r.get("q")?, Relation::AtMost, r.get("q_formula")?));
        }
        Command::ZeroError => {
            let obj = r.get("objective")?;
            rows.push(bound("sandwich_lower", "I(P;W) <= H(mu)", obj, Relation::AtLeast, r.get("mutual_information")?));
            rows.push(bound("sandwich_upper", "H(mu) <= H(P)", obj, Relation::AtMost, r.get("source_entropy")?));
            rows.push(bound("row_support", "nonzeros per E row <= |Y|", r.get("max_row_support")?, Relation::AtMost, r.get("y_size")?));
            rows.push(bound("columns", "used columns <= |X||Y| - 1", r.get("used_columns")?, Relation::AtMost, r.get("column_bound")?));
            rows.push(bound("feasibility", "residual <= 1e-7", r.get("residual")?, Relation::AtMost, 1e-7));
            if let Ok(o) = r.get("oracle_objective") {
                rows.push(bound(
                    "oracle",
                    "|H(mu) - oracle| <= accuracy + 1e-4",
                    (obj - o).abs(),
                    Relation::AtMost,
                    r.get("oracle_accuracy")? + 1e-4,
                ));
            }
            if let Ok(up) = r.get("gamma_upper") {
                rows.push(bound("gamma", "I(P;W) <= Gamma upper bound", up, Relation::AtLeast, r.get("mutual_information")?));
            }
        }
        Command::Rd => {
            rows.push(bound("convexity", "min midpoint convexity gap >= 0", r.get("min_convexity_gap")?, Relation::AtLeast, 0.0));
            rows.push(bound("monotone", "min decrease between targets >= 0", r.get("min_decrease")?, Relation::AtLeast, 0.0));
            if let Ok(d) = r.get("code_distortion") {
                rows.push(bound(
                    "code_distortion",
                    "distortion <= target + slack",
                    d,
                    Relation::AtMost,
                    r.get("code_target")? + r.get("code_slack")?,
                ));
                rows.push(bound(
                    "code_converse",
                    "used rate >= R(distortion) - 1e-6",
                    r.get("code_used_rate")?,
                    Relation::AtLeast,
                    r.get("code_converse_rate")? - 1e-6,
                ));
            }
        }
        Command::Dilute => {
            rows.push(bound("realized", "TV <= 2 epsilon + 1/k", r.get("realized_tv")?, Relation::AtMost, r.get("error_bound")?));
            rows.push(bound("dropped", "q_inf <= epsilon", r.get("dropped_mass")?, Relation::AtMost, r.config.epsilon));
            if r.config.target.is_none() {
                rows.push(bound("pair", "pair TV <= 2 epsilon + 1/k", r.get("pair.joint_tv")?, Relation::AtMost, r.get("pair.error_bound")?));
            }
        }
        Command::Sweep => {
            let s = &r.config.sweep;
            for n in s.n_from..=s.n_to {
                let p = format!("n{n}.");
                match s.command {
                    Command::Simulate if s.strong_fidelity => rows.extend(simulate_bounds(r, &p)?),
                    Command::Simulate => {
                        rows.push(bound(
                            &format!("{p}rate_floor"),
                            "rate >= I(P;W)",
                            r.get(&format!("{p}rate"))?,
                            Relation::AtLeast,
                            r.get(&format!("{p}mutual_information"))?,
                        ));
                    }
                    _ => {}
                }
            }
            if s.command == Command::Simulate {
                rows.push(bound("rate_monotone", "min rate decrease over n >= 0", r.get("min_rate_decrease")?, Relation::AtLeast, 0.0));
            }
            if s.command == Command::Typical {
                rows.push(bound("chebyshev", "exact >= Chebyshev value", r.get("min_exact_minus_chebyshev")?, Relation::AtLeast, 0.0));
                rows.push(bound("chernoff", "exact >= Chernoff value", r.get("min_exact_minus_chernoff")?, Relation::AtLeast, 0.0));
            }
            if s.command == Command::Derandomize {
                rows.push(bound(
                    "overhead_monotone",
                    "min index overhead decrease over n > 0",
                    r.get("min_overhead_decrease")?,
                    Relation::AtLeast,
                    0.0,
                ));
            }
        }
    }
    Ok(rows)
}

/// Runs one experiment. The worker pool is the caller's (rayon's global pool).
pub fn run(config: &ExperimentConfig) -> Result<RunRecord> {
    let mut record = RunRecord::new(config.clone())?;
    commands::dispatch(&mut record)?;
    record.bounds = compare_bounds(&record)?;
    Ok(record)
}

/// Writes every table as `<name>.csv`, the bound table, objects as
/// `<name>.json`, and the full record as `record.json`.
pub fn write_outputs(record: &RunRecord, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for t in record.tables.iter().chain(std::iter::once(&record.bounds_table())) {
        fs::write(dir.join(format!("{}.csv", t.name)), t.to_csv(&record.config_hash))?;
    }
    for (k, v) in &record.objects {
        fs::write(dir.join(format!("{k}.json")), serde_json::to_string_pretty(v)?)?;
    }
    fs::write(dir.join("record.json"), serde_json::to_string_pretty(record)?)?;
    Ok(())
}

/// Human-readable summary for stdout.
pub fn summary(record: &RunRecord) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {} config {}", record.config.command.name(), record.config_hash);
    for (k, v) in &record.measurements {
        let _ = writeln!(s, "{k} = {v}");
    }
    for b in &record.bounds {
        let _ = writeln!(s, "[{}] {}: {} (slack {})", if b.pass { "pass" } else { "FAIL" }, b.name, b.statement, b.slack);
    }
    s
}
