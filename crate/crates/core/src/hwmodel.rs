//! Declared platform descriptions and the quantities derived analytically from them:
//! theoretical floating-point peaks, theoretical memory bandwidth and the minimum
//! STREAM array length.
//!
//! Specs are declared in JSON, never probed from the host. Units follow the field
//! names: frequency in GHz, channel peak in GB/s (10^9 bytes/s), cache sizes in bytes.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower bound on STREAM array length regardless of cache size.
pub const STREAM_FLOOR_ELEMENTS: usize = 10_000_000;

/// Bytes per STREAM array element (double precision).
pub const STREAM_ELEMENT_BYTES: usize = 8;

const VALID_REGISTER_WIDTHS: [u32; 4] = [64, 128, 256, 512];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Single,
    Double,
}

impl Precision {
    pub const fn bits(self) -> u32 {
        match self {
            Precision::Single => 32,
            Precision::Double => 64,
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Precision::Single => "single",
            Precision::Double => "double",
        })
    }
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "single" | "sp" | "f32" => Ok(Precision::Single),
            "double" | "dp" | "f64" => Ok(Precision::Double),
            other => Err(Error::InvalidParameter(format!(
                "unknown precision `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Scalar,
    Vector,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Scalar => "scalar",
            Mode::Vector => "vector",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "scalar" => Ok(Mode::Scalar),
            "vector" | "simd" => Ok(Mode::Vector),
            other => Err(Error::InvalidParameter(format!("unknown mode `{other}`"))),
        }
    }
}

/// One SIMD extension of a core.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorUnitSpec {
    pub extension_name: String,
    /// Register width in bits.
    pub register_width: u32,
    pub issue_per_cycle: u32,
    /// 2 for fused multiply-add.
    pub flops_per_instruction: u32,
}

impl VectorUnitSpec {
    pub fn validate(&self) -> Result<()> {
        if !VALID_REGISTER_WIDTHS.contains(&self.register_width) {
            return Err(Error::InvalidSpec(format!(
                "vector unit `{}`: register width {} not in {:?}",
                self.extension_name, self.register_width, VALID_REGISTER_WIDTHS
            )));
        }
        if self.issue_per_cycle == 0 {
            return Err(Error::InvalidSpec(format!(
                "vector unit `{}`: issue_per_cycle must be >= 1",
                self.extension_name
            )));
        }
        if self.flops_per_instruction == 0 {
            return Err(Error::InvalidSpec(format!(
                "vector unit `{}`: flops_per_instruction must be >= 1",
                self.extension_name
            )));
        }
        Ok(())
    }

    /// Elements of the given precision that fit one register.
    pub fn lanes(&self, precision: Precision) -> u32 {
        (self.register_width / precision.bits()).max(1)
    }
}

/// Static description of a compute node.
///
/// `memory_channels` and `llc_per_socket` describe one socket; node-level figures
/// multiply by `sockets`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformSpec {
    pub name: String,
    pub sockets: u32,
    pub cores_per_socket: u32,
    /// Core clock in GHz.
    pub frequency: f64,
    #[serde(default)]
    pub vector_units: Vec<VectorUnitSpec>,
    pub memory_channels: u32,
    /// Theoretical peak of one channel in GB/s.
    pub channel_peak: f64,
    /// Last-level cache of one socket in bytes.
    pub llc_per_socket: u64,
    #[serde(default)]
    pub l1_size: u64,
    #[serde(default)]
    pub l2_size: u64,
    /// Scalar FMA issue rate. Falls back to the widest vector unit's rate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scalar_issue_per_cycle: Option<u32>,
}

impl PlatformSpec {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let spec: PlatformSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = crate::read_text(path.as_ref())?;
        Self::from_json_str(&text)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidSpec(format!("`{}`: {msg}", self.name)));
        if self.sockets == 0 {
            return fail("sockets must be >= 1");
        }
        if self.cores_per_socket == 0 {
            return fail("cores_per_socket must be >= 1");
        }
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return fail("frequency must be > 0");
        }
        if self.memory_channels == 0 {
            return fail("memory_channels must be >= 1");
        }
        if !(self.channel_peak > 0.0 && self.channel_peak.is_finite()) {
            return fail("channel_peak must be > 0");
        }
        if self.llc_per_socket == 0 {
            return fail("llc_per_socket must be > 0");
        }
        if self.scalar_issue_per_cycle == Some(0) {
            return fail("scalar_issue_per_cycle must be >= 1");
        }
        self.vector_units
            .iter()
            .try_for_each(VectorUnitSpec::validate)
    }

    pub fn cores(&self) -> u32 {
        self.sockets * self.cores_per_socket
    }

    /// The widest declared vector unit (ties broken by issue rate).
    pub fn widest_vector_unit(&self) -> Option<&VectorUnitSpec> {
        self.vector_units
            .iter()
            .max_by_key(|u| (u.register_width, u.issue_per_cycle))
    }
}

/// Theoretical per-core floating-point peak in GFlop/s.
///
/// `lanes x issue/cycle x GHz x flop/instruction`, where lanes collapse to one in
/// scalar mode.
pub fn peak_flops(spec: &PlatformSpec, precision: Precision, mode: Mode) -> Result<f64> {
    if !(spec.frequency > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "`{}`: frequency must be > 0",
            spec.name
        )));
    }
    let unit = spec.widest_vector_unit();
    let (lanes, issue, flops_per_inst) = match mode {
        Mode::Vector => {
            let unit = unit.ok_or_else(|| Error::MissingVectorUnit(spec.name.clone()))?;
            unit.validate()?;
            (
                unit.lanes(precision),
                unit.issue_per_cycle,
                unit.flops_per_instruction,
            )
        }
        Mode::Scalar => {
            let issue = spec
                .scalar_issue_per_cycle
                .or(unit.map(|u| u.issue_per_cycle))
                .ok_or_else(|| {
                    Error::InvalidSpec(format!(
                        "`{}`: no scalar_issue_per_cycle and no vector unit to inherit it from",
                        spec.name
                    ))
                })?;
            let flops = unit.map_or(2, |u| u.flops_per_instruction);
            (1, issue, flops)
        }
    };
    // integer factors first so the only rounding is the final multiply
    let per_cycle = u64::from(lanes) * u64::from(issue) * u64::from(flops_per_inst);
    Ok(per_cycle as f64 * spec.frequency)
}

/// Theoretical per-node peak: per-core peak times all cores of all sockets.
pub fn node_peak_flops(spec: &PlatformSpec, precision: Precision, mode: Mode) -> Result<f64> {
    Ok(peak_flops(spec, precision, mode)? * f64::from(spec.cores()))
}

/// Theoretical memory bandwidth of one socket in GB/s: channels x per-channel peak.
pub fn peak_bandwidth(spec: &PlatformSpec) -> Result<f64> {
    if spec.memory_channels == 0 {
        return Err(Error::InvalidSpec(format!(
            "`{}`: zero memory channels",
            spec.name
        )));
    }
    if !(spec.channel_peak > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "`{}`: channel_peak must be > 0",
            spec.name
        )));
    }
    Ok(f64::from(spec.memory_channels) * spec.channel_peak)
}

/// Theoretical memory bandwidth of the whole node in GB/s.
pub fn node_peak_bandwidth(spec: &PlatformSpec) -> Result<f64> {
    Ok(peak_bandwidth(spec)? * f64::from(spec.sockets.max(1)))
}

/// Smallest valid STREAM array length in 8-byte elements:
/// `max(10_000_000, ceil(4 * S / 8))` with `S` the last-level cache of one socket.
pub fn stream_min_elements(spec: &PlatformSpec) -> usize {
    let four_llc = 4u128 * u128::from(spec.llc_per_socket);
    let by_cache = four_llc.div_ceil(STREAM_ELEMENT_BYTES as u128);
    let by_cache = usize::try_from(by_cache).unwrap_or(usize::MAX);
    by_cache.max(STREAM_FLOOR_ELEMENTS)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIB: u64 = 1024 * 1024;

    fn unit(width: u32, issue: u32) -> VectorUnitSpec {
        VectorUnitSpec {
            extension_name: format!("v{width}"),
            register_width: width,
            issue_per_cycle: issue,
            flops_per_instruction: 2,
        }
    }

    fn spec(freq: f64, units: Vec<VectorUnitSpec>) -> PlatformSpec {
        PlatformSpec {
            name: "test".into(),
            sockets: 2,
            cores_per_socket: 32,
            frequency: freq,
            vector_units: units,
            memory_channels: 8,
            channel_peak: 21.33,
            llc_per_socket: 32 * MIB,
            l1_size: 32 * 1024,
            l2_size: 256 * 1024,
            scalar_issue_per_cycle: None,
        }
    }

    #[test]
    fn peak_flops_table_values() {
        let neon = spec(2.0, vec![unit(128, 2)]);
        assert_eq!(
            peak_flops(&neon, Precision::Single, Mode::Vector).unwrap(),
            32.00
        );
        assert_eq!(
            peak_flops(&neon, Precision::Double, Mode::Vector).unwrap(),
            16.00
        );
        let avx = spec(2.1, vec![unit(512, 2)]);
        assert_eq!(
            peak_flops(&avx, Precision::Single, Mode::Vector).unwrap(),
            134.40
        );
        assert_eq!(
            peak_flops(&avx, Precision::Double, Mode::Vector).unwrap(),
            67.20
        );
    }

    #[test]
    fn scalar_peak_collapses_lanes() {
        let s = spec(2.0, vec![unit(512, 2)]);
        assert_eq!(
            peak_flops(&s, Precision::Double, Mode::Scalar).unwrap(),
            8.00
        );
        assert_eq!(
            peak_flops(&s, Precision::Single, Mode::Scalar).unwrap(),
            8.00
        );
    }

    #[test]
    fn scalar_issue_override() {
        let mut s = spec(2.0, vec![unit(128, 2)]);
        s.scalar_issue_per_cycle = Some(1);
        assert_eq!(
            peak_flops(&s, Precision::Double, Mode::Scalar).unwrap(),
            4.0
        );
        // vector peak unaffected by the scalar override
        assert_eq!(
            peak_flops(&s, Precision::Double, Mode::Vector).unwrap(),
            16.0
        );
    }

    #[test]
    fn vector_mode_without_unit_fails() {
        let s = spec(2.0, vec![]);
        let err = peak_flops(&s, Precision::Double, Mode::Vector).unwrap_err();
        assert_eq!(err.kind(), "missing-unit");
    }

    #[test]
    fn widest_unit_wins() {
        let s = spec(2.0, vec![unit(128, 2), unit(256, 1)]);
        assert_eq!(
            peak_flops(&s, Precision::Double, Mode::Vector).unwrap(),
            16.0
        );
    }

    #[test]
    fn bandwidth_examples() {
        let s = spec(2.0, vec![]);
        assert_eq!(format!("{:.2}", peak_bandwidth(&s).unwrap()), "170.64");
        let mut mn4 = spec(2.1, vec![]);
        mn4.memory_channels = 6;
        mn4.channel_peak = 25.60;
        assert!((peak_bandwidth(&mn4).unwrap() - 153.60).abs() < 1e-12);
        let mut one = spec(2.0, vec![]);
        one.memory_channels = 1;
        one.channel_peak = 10.0;
        assert_eq!(peak_bandwidth(&one).unwrap(), 10.0);
        assert_eq!(node_peak_bandwidth(&one).unwrap(), 20.0);
    }

    #[test]
    fn zero_channels_rejected() {
        let mut s = spec(2.0, vec![]);
        s.memory_channels = 0;
        assert_eq!(peak_bandwidth(&s).unwrap_err().kind(), "invalid-spec");
        assert!(s.validate().is_err());
    }

    #[test]
    fn stream_sizing_examples() {
        let mut s = spec(2.0, vec![]);
        assert_eq!(stream_min_elements(&s), 16_777_216);
        s.llc_per_socket = 33 * MIB;
        assert_eq!(stream_min_elements(&s), 17_301_504);
        s.llc_per_socket = MIB;
        assert_eq!(stream_min_elements(&s), 10_000_000);
        // non-multiple of two bytes rounds up
        s.llc_per_socket = 20_000_001;
        assert_eq!(stream_min_elements(&s), 10_000_001);
    }

    #[test]
    fn invalid_register_width() {
        let s = spec(2.0, vec![unit(96, 2)]);
        assert!(matches!(s.validate(), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn json_schema_mirrors_type() {
        let text = r#"{
            "name": "n", "sockets": 1, "cores_per_socket": 4, "frequency": 3.0,
            "vector_units": [{"extension_name": "AVX2", "register_width": 256,
                              "issue_per_cycle": 2, "flops_per_instruction": 2}],
            "memory_channels": 2, "channel_peak": 25.6, "llc_per_socket": 8388608,
            "l1_size": 32768, "l2_size": 262144
        }"#;
        let s = PlatformSpec::from_json_str(text).unwrap();
        assert_eq!(s.cores(), 4);
        let back = PlatformSpec::from_json_str(&s.to_json_pretty().unwrap()).unwrap();
        assert_eq!(back, s);
        let bad = text.replace("\"sockets\": 1", "\"sockets\": 0");
        assert!(PlatformSpec::from_json_str(&bad).is_err());
        let unknown = text.replace("\"l2_size\"", "\"l9_size\"");
        assert!(PlatformSpec::from_json_str(&unknown).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_spec() -> impl Strategy<Value = PlatformSpec> {
            (
                prop::sample::select(VALID_REGISTER_WIDTHS.to_vec()),
                1u32..8,
                1u32..4,
                0.5f64..5.0,
                1u32..16,
                1.0f64..60.0,
                1u64..(512 * MIB),
            )
                .prop_map(|(w, issue, fpi, f, ch, cp, llc)| {
                    let mut s = spec(
                        f,
                        vec![VectorUnitSpec {
                            extension_name: "x".into(),
                            register_width: w,
                            issue_per_cycle: issue,
                            flops_per_instruction: fpi,
                        }],
                    );
                    s.memory_channels = ch;
                    s.channel_peak = cp;
                    s.llc_per_socket = llc;
                    s
                })
        }

        proptest! {
            #[test]
            fn vector_is_scalar_times_lanes(s in arb_spec(), double in any::<bool>()) {
                let p = if double { Precision::Double } else { Precision::Single };
                let v = peak_flops(&s, p, Mode::Vector).unwrap();
                let sc = peak_flops(&s, p, Mode::Scalar).unwrap();
                let lanes = (s.vector_units[0].register_width / p.bits()).max(1);
                prop_assert!((v - sc * f64::from(lanes)).abs() <= 1e-12 * v);
            }

            #[test]
            fn bandwidth_linear_in_channels(s in arb_spec()) {
                let mut twice = s.clone();
                twice.memory_channels *= 2;
                let one = peak_bandwidth(&s).unwrap();
                prop_assert_eq!(peak_bandwidth(&twice).unwrap(), 2.0 * one);
            }

            #[test]
            fn stream_floor_and_cache_rule(s in arb_spec()) {
                let e = stream_min_elements(&s);
                prop_assert!(e >= STREAM_FLOOR_ELEMENTS);
                prop_assert!(e as u64 >= s.llc_per_socket / 2);
                // minimal: one element fewer violates a bound
                let prev = e - 1;
                prop_assert!(prev < STREAM_FLOOR_ELEMENTS || (prev as u128) * 8 < 4 * u128::from(s.llc_per_socket));
            }
        }
    }
}
