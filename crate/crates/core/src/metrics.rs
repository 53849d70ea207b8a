//! Derived metrics: speedup and parallel efficiency (strong and weak), energy to
//! solution, energy-delay product, work per joule, and cross-platform comparison.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::RunRecord;

/// Granularity of the unit count behind an efficiency value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitLabel {
    Cores,
    Nodes,
    Processes,
}

impl fmt::Display for UnitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnitLabel::Cores => "cores",
            UnitLabel::Nodes => "nodes",
            UnitLabel::Processes => "processes",
        })
    }
}

impl FromStr for UnitLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cores" | "core" => Ok(UnitLabel::Cores),
            "nodes" | "node" => Ok(UnitLabel::Nodes),
            "processes" | "process" | "ranks" | "rank" => Ok(UnitLabel::Processes),
            other => Err(Error::InvalidParameter(format!(
                "unknown unit label `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EfficiencyPoint {
    /// Unit count relative to the baseline.
    pub units: f64,
    pub unit: UnitLabel,
    pub speedup: f64,
    /// `speedup / units`.
    pub efficiency: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be > 0, got {v}"
        )))
    }
}

/// `E = t1 / (ti * i)`.
pub fn strong_efficiency(t1: f64, ti: f64, i: f64, unit: UnitLabel) -> Result<EfficiencyPoint> {
    positive("t1", t1)?;
    positive("ti", ti)?;
    positive("unit count", i)?;
    let speedup = t1 / ti;
    Ok(EfficiencyPoint {
        units: i,
        unit,
        speedup,
        efficiency: t1 / (ti * i),
    })
}

/// `E = metric_i / (i * metric_1)` for a rate metric such as MLUP/s.
pub fn weak_efficiency(
    metric1: f64,
    metric_i: f64,
    i: f64,
    unit: UnitLabel,
) -> Result<EfficiencyPoint> {
    positive("baseline rate", metric1)?;
    positive("rate", metric_i)?;
    positive("unit count", i)?;
    Ok(EfficiencyPoint {
        units: i,
        unit,
        speedup: metric_i / metric1,
        efficiency: metric_i / (i * metric1),
    })
}

/// Strong-scaling series from `(units, time)` pairs; the smallest unit count is the
/// baseline and unit counts are expressed relative to it. Repeated unit counts are
/// averaged.
pub fn strong_scaling_series(
    points: &[(f64, f64)],
    unit: UnitLabel,
) -> Result<Vec<EfficiencyPoint>> {
    let means = mean_by_units(points)?;
    let (&p0, &t0) = means.iter().next().expect("non-empty");
    let p0 = p0.0;
    means
        .iter()
        .map(|(p, &t)| strong_efficiency(t0, t, p.0 / p0, unit))
        .collect()
}

/// Weak-scaling series from `(units, rate)` pairs, baseline at the smallest count.
pub fn weak_scaling_series(points: &[(f64, f64)], unit: UnitLabel) -> Result<Vec<EfficiencyPoint>> {
    let means = mean_by_units(points)?;
    let (&p0, &m0) = means.iter().next().expect("non-empty");
    let p0 = p0.0;
    means
        .iter()
        .map(|(p, &m)| weak_efficiency(m0, m, p.0 / p0, unit))
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct OrdF64(f64);

impl PartialEq for OrdF64 {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0).is_eq()
    }
}

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn mean_by_units(points: &[(f64, f64)]) -> Result<BTreeMap<OrdF64, f64>> {
    if points.is_empty() {
        return Err(Error::InvalidData("scaling series is empty".into()));
    }
    let mut acc: BTreeMap<OrdF64, (f64, u32)> = BTreeMap::new();
    for &(p, v) in points {
        positive("unit count", p)?;
        positive("value", v)?;
        let e = acc.entry(OrdF64(p)).or_insert((0.0, 0));
        e.0 += v;
        e.1 += 1;
    }
    Ok(acc
        .into_iter()
        .map(|(k, (s, n))| (k, s / f64::from(n)))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkPerJoule {
    pub value: f64,
    /// e.g. `MLUP/J`.
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyMetrics {
    /// Energy to solution, kJ.
    pub e2s: f64,
    /// Energy-delay product, kJ*s.
    pub edp: f64,
    pub work_per_joule: Option<WorkPerJoule>,
    /// Passed through from the record; no correction is applied.
    pub init_fraction: Option<f64>,
}

pub fn energy_metrics(record: &RunRecord) -> Result<EnergyMetrics> {
    let energy = record.energy.ok_or_else(|| {
        Error::NotAvailable(format!(
            "no energy measurement for {}/{}/{}",
            record.platform, record.app, record.compiler
        ))
    })?;
    let e2s = energy / 1e3;
    let work_per_joule = record.app_metric.as_ref().and_then(|m| {
        m.work_unit().map(|w| WorkPerJoule {
            value: m.value * record.time / energy,
            unit: format!("{w}/J"),
        })
    });
    Ok(EnergyMetrics {
        e2s,
        edp: e2s * record.time,
        work_per_joule,
        init_fraction: record.init_fraction,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CompareMetric {
    Time,
    Energy,
    Edp,
    AppMetric,
}

impl CompareMetric {
    pub fn lower_is_better(self) -> bool {
        !matches!(self, CompareMetric::AppMetric)
    }

    pub fn unit(self) -> &'static str {
        match self {
            CompareMetric::Time => "s",
            CompareMetric::Energy => "kJ",
            CompareMetric::Edp => "kJ*s",
            CompareMetric::AppMetric => "app",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CompareMetric::Time => "time",
            CompareMetric::Energy => "energy",
            CompareMetric::Edp => "edp",
            CompareMetric::AppMetric => "app_metric",
        }
    }

    fn value(self, r: &RunRecord) -> Option<f64> {
        match self {
            CompareMetric::Time => Some(r.time),
            CompareMetric::Energy => r.energy.map(|e| e / 1e3),
            CompareMetric::Edp => r.energy.map(|e| e / 1e3 * r.time),
            CompareMetric::AppMetric => r.app_metric.as_ref().map(|m| m.value),
        }
    }
}

impl FromStr for CompareMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "time" => Ok(CompareMetric::Time),
            "energy" | "e2s" => Ok(CompareMetric::Energy),
            "edp" => Ok(CompareMetric::Edp),
            "app_metric" | "metric" => Ok(CompareMetric::AppMetric),
            other => Err(Error::InvalidParameter(format!(
                "unknown comparison metric `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonCell {
    /// Group mean of the metric.
    pub value: f64,
    /// Shortfall against the best group in percent: `(1 - best/value) * 100` when
    /// lower is better, `(1 - value/best) * 100` otherwise. Zero for the best.
    pub delta_pct: f64,
    /// 1 = best; ties share a rank.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub app: String,
    /// Aligned with [`Comparison::columns`].
    pub cells: Vec<Option<ComparisonCell>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub metric: CompareMetric,
    /// `platform/compiler` labels, sorted.
    pub columns: Vec<String>,
    pub rows: Vec<ComparisonRow>,
}

/// Per-app comparison across platform/compiler groups. Apps measured by a single
/// group are dropped; if none remain the comparison is empty and an error.
pub fn compare_platforms(records: &[RunRecord], metric: CompareMetric) -> Result<Comparison> {
    let mut sums: BTreeMap<(String, String), (f64, u32)> = BTreeMap::new();
    for r in records {
        if let Some(v) = metric.value(r) {
            let e = sums
                .entry((r.app.clone(), format!("{}/{}", r.platform, r.compiler)))
                .or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
    }
    let mut by_app: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for ((app, col), (s, n)) in sums {
        by_app.entry(app).or_default().insert(col, s / f64::from(n));
    }
    by_app.retain(|_, cols| cols.len() >= 2);
    if by_app.is_empty() {
        return Err(Error::EmptyComparison);
    }
    let columns: Vec<String> = by_app
        .values()
        .flat_map(|cols| cols.keys().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let lower = metric.lower_is_better();
    let rows = by_app
        .into_iter()
        .map(|(app, cols)| {
            let best = cols
                .values()
                .copied()
                .reduce(|x, y| if lower { x.min(y) } else { x.max(y) })
                .expect("at least two groups");
            let better = |x: f64, y: f64| if lower { x < y } else { x > y };
            let cells = columns
                .iter()
                .map(|c| {
                    cols.get(c).map(|&value| {
                        let ratio = if lower { best / value } else { value / best };
                        ComparisonCell {
                            value,
                            delta_pct: (1.0 - ratio) * 100.0,
                            rank: 1 + cols.values().filter(|&&o| better(o, value)).count(),
                        }
                    })
                })
                .collect();
            ComparisonRow { app, cells }
        })
        .collect();
    Ok(Comparison {
        metric,
        columns,
        rows,
    })
}
