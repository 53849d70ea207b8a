//! Measurement ingestion: application run records, per-group statistics, outlier
//! flagging, and node-pair bandwidth matrices with weak-link detection.
//!
//! Run files are CSV with a mandatory header
//! (`platform,app,compiler,nodes,ranks_per_node,time_s,energy_j,app_metric,timestamp`)
//! or a JSON array of objects using the same field names. Lines starting with `#`
//! are comments. Energy is held in joules throughout.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result, RowError};
use crate::metrics::UnitLabel;
use crate::roofline::KernelPoint;
use crate::scalefit::TimeDecomposition;

pub const RUN_COLUMNS: [&str; 9] = [
    "platform",
    "app",
    "compiler",
    "nodes",
    "ranks_per_node",
    "time_s",
    "energy_j",
    "app_metric",
    "timestamp",
];

const MANDATORY_RUN_COLUMNS: [&str; 7] = [
    "platform",
    "app",
    "compiler",
    "nodes",
    "ranks_per_node",
    "time_s",
    "timestamp",
];

/// Optional column carrying the fraction of energy spent outside the measured region.
pub const INIT_FRACTION_COLUMN: &str = "init_fraction";

pub const PAIRWISE_COLUMNS: [&str; 4] = ["node_a", "node_b", "msg_bytes", "bandwidth_gbs"];

/// Default multiplier for outlier flagging.
pub const DEFAULT_OUTLIER_K: f64 = 3.0;

/// Default weak-link threshold: 10 % below the row median.
pub const DEFAULT_WEAK_LINK_THRESHOLD: f64 = 0.10;

/// Pairwise measurements in both directions may differ by this much before a warning.
pub const SYMMETRY_TOLERANCE: f64 = 0.10;

/// An application-reported figure of merit, e.g. `266.7 MLUP/s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppMetric {
    pub value: f64,
    pub unit: String,
}

impl AppMetric {
    /// Rates are units ending in `/s`.
    pub fn is_rate(&self) -> bool {
        self.unit.ends_with("/s")
    }

    /// Work unit of a rate (`MLUP/s` -> `MLUP`).
    pub fn work_unit(&self) -> Option<&str> {
        self.unit.strip_suffix("/s")
    }
}

impl fmt::Display for AppMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.unit)
    }
}

impl FromStr for AppMetric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let split = s
            .char_indices()
            .find(|&(_, c)| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
            .map_or(s.len(), |(i, _)| i);
        let (num, unit) = s.split_at(split);
        let value: f64 = num
            .trim()
            .parse()
            .map_err(|_| format!("app_metric `{s}`: expected `<number> <unit>`"))?;
        let unit = unit.trim();
        if unit.is_empty() {
            return Err(format!("app_metric `{s}`: missing unit"));
        }
        if !value.is_finite() || value < 0.0 {
            return Err(format!("app_metric `{s}`: value must be finite and >= 0"));
        }
        Ok(AppMetric {
            value,
            unit: unit.to_string(),
        })
    }
}

/// One measured execution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub platform: String,
    pub app: String,
    pub compiler: String,
    pub nodes: u32,
    pub ranks_per_node: u32,
    /// Wall-clock seconds.
    pub time: f64,
    /// Joules.
    pub energy: Option<f64>,
    pub app_metric: Option<AppMetric>,
    /// ISO-8601, kept verbatim.
    pub timestamp: String,
    pub init_fraction: Option<f64>,
}

impl RunRecord {
    pub fn ranks(&self) -> u64 {
        u64::from(self.nodes) * u64::from(self.ranks_per_node)
    }

    pub fn field(&self, field: GroupField) -> String {
        match field {
            GroupField::Platform => self.platform.clone(),
            GroupField::App => self.app.clone(),
            GroupField::Compiler => self.compiler.clone(),
            GroupField::Nodes => self.nodes.to_string(),
            GroupField::RanksPerNode => self.ranks_per_node.to_string(),
        }
    }

    pub fn value(&self, value: ValueField) -> Option<f64> {
        match value {
            ValueField::Time => Some(self.time),
            ValueField::Energy => self.energy,
            ValueField::AppMetric => self.app_metric.as_ref().map(|m| m.value),
        }
    }
}

fn parse_field<T: FromStr>(raw: &str, name: &str) -> std::result::Result<T, String> {
    raw.trim()
        .parse()
        .map_err(|_| format!("{name}: cannot parse `{raw}`"))
}

fn non_empty(raw: Option<&str>) -> Option<&str> {
    raw.map(str::trim).filter(|s| !s.is_empty())
}

fn validate_run<'a>(
    get: impl Fn(&str) -> Option<&'a str>,
) -> std::result::Result<RunRecord, String> {
    let required =
        |name: &str| non_empty(get(name)).ok_or_else(|| format!("{name}: missing value"));
    let nodes: u32 = parse_field(required("nodes")?, "nodes")?;
    if nodes == 0 {
        return Err("nodes must be >= 1".into());
    }
    let ranks_per_node: u32 = parse_field(required("ranks_per_node")?, "ranks_per_node")?;
    if ranks_per_node == 0 {
        return Err("ranks_per_node must be >= 1".into());
    }
    let time: f64 = parse_field(required("time_s")?, "time_s")?;
    if !(time > 0.0 && time.is_finite()) {
        return Err(format!("time_s must be > 0, got {time}"));
    }
    let energy = match non_empty(get("energy_j")) {
        Some(raw) => {
            let e: f64 = parse_field(raw, "energy_j")?;
            if !(e > 0.0 && e.is_finite()) {
                return Err(format!("energy_j must be > 0 when present, got {e}"));
            }
            Some(e)
        }
        None => None,
    };
    let app_metric = non_empty(get("app_metric")).map(str::parse).transpose()?;
    let timestamp = required("timestamp")?;
    chrono::DateTime::parse_from_rfc3339(timestamp)
        .map_err(|e| format!("timestamp `{timestamp}` is not ISO-8601: {e}"))?;
    let init_fraction = match non_empty(get(INIT_FRACTION_COLUMN)) {
        Some(raw) => {
            let f: f64 = parse_field(raw, INIT_FRACTION_COLUMN)?;
            if !(0.0..1.0).contains(&f) {
                return Err(format!("init_fraction must lie in [0, 1), got {f}"));
            }
            Some(f)
        }
        None => None,
    };
    Ok(RunRecord {
        platform: required("platform")?.to_string(),
        app: required("app")?.to_string(),
        compiler: required("compiler")?.to_string(),
        nodes,
        ranks_per_node,
        time,
        energy,
        app_metric,
        timestamp: timestamp.to_string(),
        init_fraction,
    })
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(reader)
}

fn check_columns(
    headers: &csv::StringRecord,
    mandatory: &[&str],
) -> Result<HashMap<String, usize>> {
    let index: HashMap<String, usize> = headers
        .iter()
        .enumerate()
        .map(|(i, h)| (h.to_string(), i))
        .collect();
    let missing: Vec<&str> = mandatory
        .iter()
        .copied()
        .filter(|c| !index.contains_key(*c))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Schema(format!(
            "missing mandatory column(s): {}",
            missing.join(", ")
        )));
    }
    Ok(index)
}

/// Parse a runs CSV. Every row is validated; all failures are reported together.
pub fn parse_runs_csv<R: Read>(reader: R) -> Result<Vec<RunRecord>> {
    let mut rdr = csv_reader(reader);
    let index = check_columns(rdr.headers()?, &MANDATORY_RUN_COLUMNS)?;
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let get = |name: &str| index.get(name).and_then(|&i| row.get(i));
        match validate_run(get) {
            Ok(r) => records.push(r),
            Err(message) => errors.push(RowError { line, message }),
        }
    }
    if errors.is_empty() {
        Ok(records)
    } else {
        Err(Error::Rows(errors))
    }
}

fn json_rows(text: &str) -> Result<Vec<BTreeMap<String, String>>> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let arr = value
        .as_array()
        .ok_or_else(|| Error::Schema("expected a JSON array of objects".into()))?;
    arr.iter()
        .enumerate()
        .map(|(i, v)| {
            let obj = v
                .as_object()
                .ok_or_else(|| Error::Schema(format!("element {} is not an object", i + 1)))?;
            Ok(obj
                .iter()
                .map(|(k, v)| {
                    let s = match v {
                        serde_json::Value::Null => String::new(),
                        serde_json::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    (k.clone(), s)
                })
                .collect())
        })
        .collect()
}

/// Parse a JSON array of run objects. Row numbers in errors are 1-based element indices.
pub fn parse_runs_json(text: &str) -> Result<Vec<RunRecord>> {
    let rows = json_rows(text)?;
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if let Some(missing) = MANDATORY_RUN_COLUMNS
            .iter()
            .find(|c| !row.contains_key(**c))
        {
            return Err(Error::Schema(format!(
                "element {}: missing mandatory field `{missing}`",
                i + 1
            )));
        }
        match validate_run(|name| row.get(name).map(String::as_str)) {
            Ok(r) => records.push(r),
            Err(message) => errors.push(RowError {
                line: i + 1,
                message,
            }),
        }
    }
    if errors.is_empty() {
        Ok(records)
    } else {
        Err(Error::Rows(errors))
    }
}

fn looks_like_json(text: &str) -> bool {
    text.trim_start().starts_with('[')
}

/// Load runs from a CSV or JSON file (detected from content).
pub fn load_runs(path: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    let text = crate::read_text(path.as_ref())?;
    if looks_like_json(&text) {
        parse_runs_json(&text)
    } else {
        parse_runs_csv(text.as_bytes())
    }
}

fn opt_to_string<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

/// Write records in canonical CSV form. The `init_fraction` column appears only when
/// some record carries it.
pub fn write_runs_csv<W: Write>(records: &[RunRecord], writer: W) -> Result<()> {
    let with_init = records.iter().any(|r| r.init_fraction.is_some());
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = RUN_COLUMNS.to_vec();
    if with_init {
        header.push(INIT_FRACTION_COLUMN);
    }
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.platform.clone(),
            r.app.clone(),
            r.compiler.clone(),
            r.nodes.to_string(),
            r.ranks_per_node.to_string(),
            r.time.to_string(),
            opt_to_string(&r.energy),
            opt_to_string(&r.app_metric),
            r.timestamp.clone(),
        ];
        if with_init {
            row.push(opt_to_string(&r.init_fraction));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Parse a comment-aware CSV table, converting each row with `convert`. Missing
/// mandatory columns are a schema error; row failures are collected.
pub fn parse_table<R: Read, T>(
    reader: R,
    mandatory: &[&str],
    convert: impl Fn(&Row<'_>) -> std::result::Result<T, String>,
) -> Result<Vec<T>> {
    let mut rdr = csv_reader(reader);
    let index = check_columns(rdr.headers()?, mandatory)?;
    let mut out = Vec::new();
    let mut errors = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        match convert(&Row {
            index: &index,
            record: &row,
        }) {
            Ok(v) => out.push(v),
            Err(message) => errors.push(RowError { line, message }),
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(Error::Rows(errors))
    }
}

/// One CSV row addressed by column name.
pub struct Row<'a> {
    index: &'a HashMap<String, usize>,
    record: &'a csv::StringRecord,
}

impl<'a> Row<'a> {
    pub fn get(&self, name: &str) -> Option<&'a str> {
        self.index.get(name).and_then(|&i| self.record.get(i))
    }
}

fn text_field(row: &Row<'_>, name: &str) -> std::result::Result<String, String> {
    non_empty(row.get(name))
        .map(str::to_string)
        .ok_or_else(|| format!("{name}: missing value"))
}

fn units_field(row: &Row<'_>) -> std::result::Result<UnitLabel, String> {
    let raw = text_field(row, "p_unit")?;
    raw.parse().map_err(|e: Error| e.to_string())
}

fn p_field(row: &Row<'_>) -> std::result::Result<f64, String> {
    let p: f64 = parse_field(&text_field(row, "p")?, "p")?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(format!("p must be >= 1, got {p}"));
    }
    Ok(p)
}

pub const SPEEDUP_COLUMNS: [&str; 6] = ["platform", "app", "compiler", "p", "p_unit", "speedup"];

/// A measured (or synthesized) speedup at one unit count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedupRecord {
    pub platform: String,
    pub app: String,
    pub compiler: String,
    pub p: f64,
    pub unit: UnitLabel,
    pub speedup: f64,
}

pub fn parse_speedups<R: Read>(reader: R) -> Result<Vec<SpeedupRecord>> {
    parse_table(reader, &SPEEDUP_COLUMNS, |row| {
        let speedup: f64 = parse_field(&text_field(row, "speedup")?, "speedup")?;
        if !speedup.is_finite() {
            return Err("speedup must be finite".into());
        }
        Ok(SpeedupRecord {
            platform: text_field(row, "platform")?,
            app: text_field(row, "app")?,
            compiler: text_field(row, "compiler")?,
            p: p_field(row)?,
            unit: units_field(row)?,
            speedup,
        })
    })
}

pub const MPI_COLUMNS: [&str; 8] = [
    "platform", "app", "compiler", "p", "p_unit", "t_cal_s", "t_com_s", "t_lb_s",
];

/// Time decomposition of one run into computation, communication and load balance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MpiPhaseRecord {
    pub platform: String,
    pub app: String,
    pub compiler: String,
    pub p: f64,
    pub unit: UnitLabel,
    pub times: TimeDecomposition,
}

pub fn parse_mpi_decompositions<R: Read>(reader: R) -> Result<Vec<MpiPhaseRecord>> {
    parse_table(reader, &MPI_COLUMNS, |row| {
        let t = |name: &str| -> std::result::Result<f64, String> {
            parse_field(&text_field(row, name)?, name)
        };
        let times = TimeDecomposition::new(t("t_cal_s")?, t("t_com_s")?, t("t_lb_s")?)
            .map_err(|e| e.to_string())?;
        Ok(MpiPhaseRecord {
            platform: text_field(row, "platform")?,
            app: text_field(row, "app")?,
            compiler: text_field(row, "compiler")?,
            p: p_field(row)?,
            unit: units_field(row)?,
            times,
        })
    })
}

/// Kernel table `label,intensity[,gflops][,time_share]`.
pub fn parse_kernel_points<R: Read>(reader: R) -> Result<Vec<KernelPoint>> {
    parse_table(reader, &["label", "intensity"], |row| {
        let opt = |name: &str| -> std::result::Result<Option<f64>, String> {
            non_empty(row.get(name))
                .map(|v| parse_field(v, name))
                .transpose()
        };
        let mut k = KernelPoint::new(
            text_field(row, "label")?,
            parse_field(&text_field(row, "intensity")?, "intensity")?,
        );
        k.measured_perf = opt("gflops")?;
        k.time_share = opt("time_share")?;
        k.validate().map_err(|e| e.to_string())?;
        Ok(k)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupField {
    Platform,
    App,
    Compiler,
    Nodes,
    RanksPerNode,
}

impl GroupField {
    pub fn name(self) -> &'static str {
        match self {
            GroupField::Platform => "platform",
            GroupField::App => "app",
            GroupField::Compiler => "compiler",
            GroupField::Nodes => "nodes",
            GroupField::RanksPerNode => "ranks_per_node",
        }
    }

    /// Parse a comma-separated field list such as `app,platform,compiler`.
    pub fn parse_list(s: &str) -> Result<Vec<GroupField>> {
        s.split(',')
            .map(str::trim)
            .filter(|f| !f.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl FromStr for GroupField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "platform" => Ok(GroupField::Platform),
            "app" => Ok(GroupField::App),
            "compiler" => Ok(GroupField::Compiler),
            "nodes" => Ok(GroupField::Nodes),
            "ranks_per_node" => Ok(GroupField::RanksPerNode),
            other => Err(Error::InvalidParameter(format!(
                "unknown group field `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueField {
    Time,
    Energy,
    AppMetric,
}

/// Group key: the selected field values in selection order.
pub type GroupKey = Vec<String>;

pub fn group_key(record: &RunRecord, fields: &[GroupField]) -> GroupKey {
    fields.iter().map(|&f| record.field(f)).collect()
}

/// Partition records by key, preserving input order within each group.
pub fn group_by<'a>(
    records: &'a [RunRecord],
    fields: &[GroupField],
) -> BTreeMap<GroupKey, Vec<&'a RunRecord>> {
    let mut groups: BTreeMap<GroupKey, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(group_key(r, fields)).or_default().push(r);
    }
    groups
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AggregateStats {
    pub mean: f64,
    /// Sample (n - 1) standard deviation; zero for a single value.
    pub stddev: f64,
    pub n: usize,
    pub flagged_outliers: usize,
}

impl AggregateStats {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let stddev = if n > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let flagged_outliers = match flag_outlier_values(values, DEFAULT_OUTLIER_K) {
            OutlierScan::Flagged(ix) => ix.len(),
            OutlierScan::NotApplicable => 0,
        };
        Some(AggregateStats {
            mean,
            stddev,
            n,
            flagged_outliers,
        })
    }
}

/// Mean and sample standard deviation of `value` per group. Records lacking the
/// value (e.g. no energy) are skipped; groups left empty are omitted.
pub fn aggregate(
    records: &[RunRecord],
    fields: &[GroupField],
    value: ValueField,
) -> BTreeMap<GroupKey, AggregateStats> {
    group_by(records, fields)
        .into_iter()
        .filter_map(|(k, group)| {
            let values: Vec<f64> = group.iter().filter_map(|r| r.value(value)).collect();
            AggregateStats::from_values(&values).map(|s| (k, s))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OutlierScan {
    /// Fewer than three values.
    NotApplicable,
    /// Indices into the scanned slice; empty when nothing is flagged.
    Flagged(Vec<usize>),
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn sorted(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Robust spread estimate around the median: `1.4826 * MAD`, falling back to
/// `1.2533 * mean absolute deviation` when more than half the values coincide.
pub fn robust_sigma(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let med = median(&sorted(values.iter().copied()));
    let deviations = sorted(values.iter().map(|v| (v - med).abs()));
    let mad = median(&deviations);
    if mad > 0.0 {
        1.4826 * mad
    } else {
        1.2533 * deviations.iter().sum::<f64>() / deviations.len() as f64
    }
}

/// Flag values with `|x - median| > k * sigma` where sigma is [`robust_sigma`].
pub fn flag_outlier_values(values: &[f64], k: f64) -> OutlierScan {
    if values.len() < 3 {
        return OutlierScan::NotApplicable;
    }
    let med = median(&sorted(values.iter().copied()));
    let sigma = robust_sigma(values);
    OutlierScan::Flagged(
        values
            .iter()
            .enumerate()
            .filter(|&(_, v)| (v - med).abs() > k * sigma)
            .map(|(i, _)| i)
            .collect(),
    )
}

/// Flag records of one group by `value`. Records never get removed; callers decide.
pub fn flag_outliers(records: &[RunRecord], value: ValueField, k: f64) -> OutlierScan {
    let indexed: Vec<(usize, f64)> = records
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.value(value).map(|v| (i, v)))
        .collect();
    let values: Vec<f64> = indexed.iter().map(|&(_, v)| v).collect();
    match flag_outlier_values(&values, k) {
        OutlierScan::NotApplicable => OutlierScan::NotApplicable,
        OutlierScan::Flagged(ix) => {
            OutlierScan::Flagged(ix.into_iter().map(|i| indexed[i].0).collect())
        }
    }
}

/// Dense node-pair bandwidth map for one message size. The diagonal is absent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseBandwidthMatrix {
    node_ids: Vec<String>,
    /// Row-major, GB/s; diagonal entries are unused.
    bandwidth: Vec<f64>,
    message_size: u64,
}

impl PairwiseBandwidthMatrix {
    /// Build from a complete row-major matrix; diagonal values are ignored.
    pub fn from_dense(
        node_ids: Vec<String>,
        bandwidth: Vec<f64>,
        message_size: u64,
    ) -> Result<Self> {
        let n = node_ids.len();
        if n < 2 {
            return Err(Error::InvalidData(
                "pairwise matrix needs at least two nodes".into(),
            ));
        }
        if bandwidth.len() != n * n {
            return Err(Error::InvalidData(format!(
                "expected {} entries for {n} nodes, got {}",
                n * n,
                bandwidth.len()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let v = bandwidth[i * n + j];
                if i != j && !(v > 0.0 && v.is_finite()) {
                    return Err(Error::InvalidData(format!(
                        "bandwidth ({}, {}) must be > 0, got {v}",
                        node_ids[i], node_ids[j]
                    )));
                }
            }
        }
        Ok(PairwiseBandwidthMatrix {
            node_ids,
            bandwidth,
            message_size,
        })
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn message_size(&self) -> u64 {
        self.message_size
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let n = self.len();
        (i != j && i < n && j < n).then(|| self.bandwidth[i * n + j])
    }

    /// Off-diagonal values of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).filter_map(move |j| self.get(i, j))
    }

    pub fn row_median(&self, i: usize) -> f64 {
        median(&sorted(self.row(i)))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        PairwiseBandwidthMatrix {
            node_ids: self.node_ids.clone(),
            bandwidth: self.bandwidth.iter().map(|v| v * factor).collect(),
            message_size: self.message_size,
        }
    }
}

/// All matrices of one pairwise file, keyed by message size.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseSweep {
    pub matrices: BTreeMap<u64, PairwiseBandwidthMatrix>,
    /// Direction pairs differing by more than [`SYMMETRY_TOLERANCE`].
    pub warnings: Vec<String>,
}

fn unit_to_gbs(unit: &str) -> std::result::Result<f64, String> {
    match unit.trim() {
        "" | "GB/s" | "gbs" => Ok(1.0),
        "MB/s" | "mbs" => Ok(1e-3),
        "KB/s" | "kB/s" => Ok(1e-6),
        "B/s" => Ok(1e-9),
        "GiB/s" => Ok(1.073_741_824),
        "MiB/s" => Ok(1.048_576e-3),
        other => Err(format!("unknown bandwidth unit `{other}`")),
    }
}

/// Parse `node_a,node_b,msg_bytes,bandwidth_gbs` rows into one matrix per message
/// size. A pair measured in one direction only is mirrored; both directions are kept
/// as measured. An optional `unit` column converts values to GB/s.
pub fn parse_pairwise_bandwidth<R: Read>(reader: R) -> Result<PairwiseSweep> {
    let mut rdr = csv_reader(reader);
    let index = check_columns(rdr.headers()?, &PAIRWISE_COLUMNS)?;
    let col = |name: &str| index.get(name).copied();
    let (ia, ib, im, iv) = (
        col("node_a").unwrap(),
        col("node_b").unwrap(),
        col("msg_bytes").unwrap(),
        col("bandwidth_gbs").unwrap(),
    );
    let iu = col("unit");

    // (msg, a, b) -> (sum, count)
    let mut cells: BTreeMap<(u64, String, String), (f64, u32)> = BTreeMap::new();
    let mut nodes: BTreeSet<String> = BTreeSet::new();
    let mut errors = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let parsed = (|| -> std::result::Result<_, String> {
            let a = row.get(ia).unwrap_or_default().to_string();
            let b = row.get(ib).unwrap_or_default().to_string();
            if a.is_empty() || b.is_empty() {
                return Err("node ids must be non-empty".into());
            }
            if a == b {
                return Err(format!("self pair `{a}`"));
            }
            let msg: u64 = parse_field(row.get(im).unwrap_or_default(), "msg_bytes")?;
            let bw: f64 = parse_field(row.get(iv).unwrap_or_default(), "bandwidth_gbs")?;
            let factor = iu.map_or(Ok(1.0), |i| unit_to_gbs(row.get(i).unwrap_or_default()))?;
            let bw = bw * factor;
            if !(bw > 0.0 && bw.is_finite()) {
                return Err(format!("bandwidth must be > 0, got {bw}"));
            }
            Ok((a, b, msg, bw))
        })();
        match parsed {
            Ok((a, b, msg, bw)) => {
                nodes.insert(a.clone());
                nodes.insert(b.clone());
                let cell = cells.entry((msg, a, b)).or_insert((0.0, 0));
                cell.0 += bw;
                cell.1 += 1;
            }
            Err(message) => errors.push(RowError { line, message }),
        }
    }
    if !errors.is_empty() {
        return Err(Error::Rows(errors));
    }

    let node_ids: Vec<String> = nodes.into_iter().collect();
    let n = node_ids.len();
    let sizes: BTreeSet<u64> = cells.keys().map(|(m, _, _)| *m).collect();
    let mut matrices = BTreeMap::new();
    let mut warnings = Vec::new();
    for msg in sizes {
        let lookup = |a: &str, b: &str| {
            cells
                .get(&(msg, a.to_string(), b.to_string()))
                .map(|(s, c)| s / f64::from(*c))
        };
        let mut dense = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (&node_ids[i], &node_ids[j]);
                let (ab, ba) = match (lookup(a, b), lookup(b, a)) {
                    (None, None) => {
                        return Err(Error::IncompleteMatrix {
                            a: a.clone(),
                            b: b.clone(),
                            msg_bytes: msg,
                        })
                    }
                    (Some(x), None) | (None, Some(x)) => (x, x),
                    (Some(x), Some(y)) => {
                        if (x - y).abs() > SYMMETRY_TOLERANCE * x.max(y) {
                            warnings.push(format!(
                                "asymmetric pair ({a}, {b}) at {msg} bytes: {x} vs {y} GB/s"
                            ));
                        }
                        (x, y)
                    }
                };
                dense[i * n + j] = ab;
                dense[j * n + i] = ba;
            }
        }
        matrices.insert(
            msg,
            PairwiseBandwidthMatrix::from_dense(node_ids.clone(), dense, msg)?,
        );
    }
    if matrices.is_empty() {
        return Err(Error::InvalidData(
            "pairwise file holds no measurements".into(),
        ));
    }
    Ok(PairwiseSweep { matrices, warnings })
}

pub fn load_pairwise(path: impl AsRef<Path>) -> Result<PairwiseSweep> {
    let text = crate::read_text(path.as_ref())?;
    if looks_like_json(&text) {
        // JSON rows go through the CSV path so both formats share validation
        let rows = json_rows(&text)?;
        let mut buf = Vec::new();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            let with_unit = rows.iter().any(|r| r.contains_key("unit"));
            let mut header: Vec<&str> = PAIRWISE_COLUMNS.to_vec();
            if with_unit {
                header.push("unit");
            }
            w.write_record(&header)?;
            for (i, r) in rows.iter().enumerate() {
                if let Some(missing) = PAIRWISE_COLUMNS.iter().find(|c| !r.contains_key(**c)) {
                    return Err(Error::Schema(format!(
                        "element {}: missing mandatory field `{missing}`",
                        i + 1
                    )));
                }
                let cells: Vec<String> = header
                    .iter()
                    .map(|h| r.get(*h).cloned().unwrap_or_default())
                    .collect();
                w.write_record(&cells)?;
            }
            w.flush()?;
        }
        parse_pairwise_bandwidth(buf.as_slice())
    } else {
        parse_pairwise_bandwidth(text.as_bytes())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakLink {
    pub node_a: String,
    pub node_b: String,
    /// The lower of the two directional measurements, GB/s.
    pub bandwidth: f64,
    /// Row median the deficit is measured against, GB/s.
    pub reference: f64,
    /// `1 - bandwidth / reference`.
    pub deficit: f64,
}

/// Pairs whose bandwidth falls below `(1 - threshold)` of the row median, in either
/// direction. Each unordered pair is reported once with its larger deficit, sorted by
/// deficit (largest first).
pub fn detect_weak_links(
    matrix: &PairwiseBandwidthMatrix,
    threshold: f64,
) -> Result<Vec<WeakLink>> {
    if !(0.0..1.0).contains(&threshold) {
        return Err(Error::InvalidParameter(format!(
            "threshold must lie in [0, 1), got {threshold}"
        )));
    }
    let n = matrix.len();
    let medians: Vec<f64> = (0..n).map(|i| matrix.row_median(i)).collect();
    let mut links = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let candidates = [(i, j), (j, i)].map(|(r, c)| {
                let bw = matrix.get(r, c).expect("off-diagonal");
                (bw, medians[r])
            });
            let worst = candidates
                .iter()
                .filter(|(bw, med)| *bw < (1.0 - threshold) * med)
                .map(|&(bw, med)| (bw, med, 1.0 - bw / med))
                .max_by(|x, y| x.2.total_cmp(&y.2));
            if let Some((bw, med, deficit)) = worst {
                links.push((
                    i,
                    j,
                    WeakLink {
                        node_a: matrix.node_ids[i].clone(),
                        node_b: matrix.node_ids[j].clone(),
                        bandwidth: bw,
                        reference: med,
                        deficit,
                    },
                ));
            }
        }
    }
    links.sort_by(|x, y| {
        y.2.deficit
            .total_cmp(&x.2.deficit)
            .then((x.0, x.1).cmp(&(y.0, y.1)))
    });
    Ok(links.into_iter().map(|(_, _, l)| l).collect())
}
