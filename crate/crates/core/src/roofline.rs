//! Single-ceiling roofline: `P(I) = min(F_p, B_p * I)` with ridge `I_r = F_p / B_p`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hwmodel::{self, Mode, PlatformSpec, Precision};

/// Sampling density of emitted roofline curves on the log axis.
pub const POINTS_PER_DECADE: u32 = 64;

/// What hardware the peaks describe. Carried through to every emitted curve so
/// per-core and per-node rooflines are never mixed silently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoofScope {
    Core,
    Socket,
    Node,
}

impl fmt::Display for RoofScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RoofScope::Core => "core",
            RoofScope::Socket => "socket",
            RoofScope::Node => "node",
        })
    }
}

impl FromStr for RoofScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "core" => Ok(RoofScope::Core),
            "socket" => Ok(RoofScope::Socket),
            "node" => Ok(RoofScope::Node),
            other => Err(Error::InvalidParameter(format!(
                "unknown roofline scope `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RooflineModel {
    peak_flops: f64,
    peak_bandwidth: f64,
    ridge_intensity: f64,
    scope: RoofScope,
}

impl RooflineModel {
    /// Peak compute in GFlop/s.
    pub fn peak_flops(&self) -> f64 {
        self.peak_flops
    }

    /// Peak bandwidth in GB/s.
    pub fn peak_bandwidth(&self) -> f64 {
        self.peak_bandwidth
    }

    /// Ridge intensity in Flop/Byte.
    pub fn ridge_intensity(&self) -> f64 {
        self.ridge_intensity
    }

    pub fn scope(&self) -> RoofScope {
        self.scope
    }

    pub fn with_scope(mut self, scope: RoofScope) -> Self {
        self.scope = scope;
        self
    }

    /// Theoretical roofline of a declared platform at the given scope.
    pub fn from_spec(spec: &PlatformSpec, precision: Precision, scope: RoofScope) -> Result<Self> {
        let core = hwmodel::peak_flops(spec, precision, Mode::Vector)?;
        let (flops, bw) = match scope {
            RoofScope::Core => (
                core,
                hwmodel::peak_bandwidth(spec)? / f64::from(spec.cores_per_socket),
            ),
            RoofScope::Socket => (
                core * f64::from(spec.cores_per_socket),
                hwmodel::peak_bandwidth(spec)?,
            ),
            RoofScope::Node => (
                hwmodel::node_peak_flops(spec, precision, Mode::Vector)?,
                hwmodel::node_peak_bandwidth(spec)?,
            ),
        };
        Ok(build_roofline(flops, bw)?.with_scope(scope))
    }

    /// Evenly spaced samples on a log axis between `lo` and `hi` (inclusive), with the
    /// ridge point inserted when it falls inside the range.
    pub fn curve(&self, lo: f64, hi: f64) -> Result<Vec<(f64, f64)>> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "curve range must satisfy 0 < lo < hi, got [{lo}, {hi}]"
            )));
        }
        let start = lo.log10();
        let steps = ((hi.log10() - start) * f64::from(POINTS_PER_DECADE)).ceil() as u64;
        let mut xs: Vec<f64> = (0..=steps)
            .map(|k| 10f64.powf(start + k as f64 / f64::from(POINTS_PER_DECADE)))
            .filter(|&x| x <= hi * (1.0 + 1e-12))
            .collect();
        if self.ridge_intensity > lo && self.ridge_intensity < hi {
            xs.push(self.ridge_intensity);
        }
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        Ok(xs
            .into_iter()
            .map(|x| (x, sustained_perf(self, x).expect("grid is positive")))
            .collect())
    }
}

/// Build a roofline from peak compute (GFlop/s) and peak bandwidth (GB/s).
/// Scope defaults to node; use [`RooflineModel::with_scope`] to relabel.
pub fn build_roofline(peak_flops: f64, peak_bandwidth: f64) -> Result<RooflineModel> {
    if !(peak_flops > 0.0 && peak_flops.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "peak flops must be > 0, got {peak_flops}"
        )));
    }
    if !(peak_bandwidth > 0.0 && peak_bandwidth.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "peak bandwidth must be > 0, got {peak_bandwidth}"
        )));
    }
    Ok(RooflineModel {
        peak_flops,
        peak_bandwidth,
        ridge_intensity: peak_flops / peak_bandwidth,
        scope: RoofScope::Node,
    })
}

/// Attainable performance at intensity `I`.
pub fn sustained_perf(model: &RooflineModel, intensity: f64) -> Result<f64> {
    if !(intensity >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "arithmetic intensity must be >= 0, got {intensity}"
        )));
    }
    if intensity > model.ridge_intensity {
        Ok(model.peak_flops)
    } else {
        // B_p * I_r can round one ulp above F_p
        Ok((model.peak_bandwidth * intensity).min(model.peak_flops))
    }
}

/// Hardware counter totals for one kernel or phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterSample {
    pub flops: u64,
    pub loads: u64,
    pub stores: u64,
    /// Bytes moved per load or store (8 for double precision).
    pub access_bytes: u32,
}

/// `I = W / ((L + S) * access_bytes)`.
pub fn arithmetic_intensity(sample: &CounterSample) -> Result<f64> {
    let accesses = sample.loads as f64 + sample.stores as f64;
    if accesses == 0.0 || sample.access_bytes == 0 {
        return Err(Error::ZeroMemoryAccess);
    }
    Ok(sample.flops as f64 / (accesses * f64::from(sample.access_bytes)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelPoint {
    pub label: String,
    /// Flop/Byte.
    pub intensity: f64,
    /// GFlop/s.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measured_perf: Option<f64>,
    /// Fraction of total run time spent in this kernel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_share: Option<f64>,
}

impl KernelPoint {
    pub fn new(label: impl Into<String>, intensity: f64) -> Self {
        KernelPoint {
            label: label.into(),
            intensity,
            measured_perf: None,
            time_share: None,
        }
    }

    pub fn with_measured(mut self, gflops: f64) -> Self {
        self.measured_perf = Some(gflops);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.intensity >= 0.0 && self.intensity.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kernel `{}`: intensity must be >= 0",
                self.label
            )));
        }
        if let Some(p) = self.measured_perf {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "kernel `{}`: measured performance must be >= 0",
                    self.label
                )));
            }
        }
        if let Some(t) = self.time_share {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::InvalidParameter(format!(
                    "kernel `{}`: time share must lie in [0, 1]",
                    self.label
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bound {
    MemoryBound,
    ComputeBound,
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Bound::MemoryBound => "memory-bound",
            Bound::ComputeBound => "compute-bound",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub bound: Bound,
    /// Roof at the kernel's intensity, GFlop/s.
    pub attainable: f64,
    /// `attainable / measured`; absent without a measurement.
    pub headroom: Option<f64>,
    /// Set when the measurement lies above the roof.
    pub warning: Option<String>,
}

/// Place a kernel under the roof. Ties at the ridge are compute-bound.
pub fn classify(model: &RooflineModel, point: &KernelPoint) -> Result<Classification> {
    point.validate()?;
    let attainable = sustained_perf(model, point.intensity)?;
    let bound = if point.intensity < model.ridge_intensity {
        Bound::MemoryBound
    } else {
        Bound::ComputeBound
    };
    let headroom = point.measured_perf.map(|m| attainable / m);
    let warning = match point.measured_perf {
        Some(m) if m > attainable => Some(format!(
            "inconsistent measurement: `{}` reports {m} GFlop/s above the roof of {attainable} GFlop/s",
            point.label
        )),
        _ => None,
    };
    Ok(Classification {
        bound,
        attainable,
        headroom,
        warning,
    })
}
