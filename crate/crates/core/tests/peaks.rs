use std::path::PathBuf;

use perfchar_core::hwmodel::{self, Mode, PlatformSpec, Precision};
use proptest::prelude::*;
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures/platforms")
        .join(name)
}

fn raw(name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

/// Per-core vector peak straight from the JSON: widest register, lanes x issue x
/// flops x GHz.
fn oracle_vector_peak(v: &Value, bits: u64) -> f64 {
    let unit = v["vector_units"]
        .as_array()
        .unwrap()
        .iter()
        .max_by_key(|u| u["register_width"].as_u64().unwrap())
        .unwrap();
    let lanes = unit["register_width"].as_u64().unwrap() / bits;
    let per_cycle = lanes
        * unit["issue_per_cycle"].as_u64().unwrap()
        * unit["flops_per_instruction"].as_u64().unwrap();
    per_cycle as f64 * v["frequency"].as_f64().unwrap()
}

#[test]
fn table_peaks_are_exact() {
    let tx2 = PlatformSpec::load(fixture("dibona-tx2.json")).unwrap();
    let mn4 = PlatformSpec::load(fixture("marenostrum4.json")).unwrap();
    assert_eq!(
        hwmodel::peak_flops(&tx2, Precision::Single, Mode::Vector).unwrap(),
        32.00
    );
    assert_eq!(
        hwmodel::peak_flops(&tx2, Precision::Double, Mode::Vector).unwrap(),
        16.00
    );
    assert_eq!(
        hwmodel::peak_flops(&mn4, Precision::Single, Mode::Vector).unwrap(),
        134.40
    );
    assert_eq!(
        hwmodel::peak_flops(&mn4, Precision::Double, Mode::Vector).unwrap(),
        67.20
    );
}

#[test]
fn peaks_match_oracle_for_every_fixture() {
    for name in ["dibona-tx2.json", "marenostrum4.json", "sandbox-host.json"] {
        let spec = PlatformSpec::load(fixture(name)).unwrap();
        let v = raw(name);
        for (precision, bits) in [(Precision::Single, 32), (Precision::Double, 64)] {
            let got = hwmodel::peak_flops(&spec, precision, Mode::Vector).unwrap();
            assert_eq!(got, oracle_vector_peak(&v, bits), "{name} {precision}");
            let cores = v["sockets"].as_u64().unwrap() * v["cores_per_socket"].as_u64().unwrap();
            let node = hwmodel::node_peak_flops(&spec, precision, Mode::Vector).unwrap();
            assert!((node - got * cores as f64).abs() <= 1e-9 * node);
        }
    }
}

#[test]
fn bandwidth_and_stream_sizing() {
    let tx2 = PlatformSpec::load(fixture("dibona-tx2.json")).unwrap();
    let mn4 = PlatformSpec::load(fixture("marenostrum4.json")).unwrap();
    for (spec, expected) in [(&tx2, 170.64), (&mn4, 153.60)] {
        let bw = hwmodel::peak_bandwidth(spec).unwrap();
        assert_eq!(format!("{bw:.2}"), format!("{expected:.2}"));
        assert!((bw - expected).abs() <= 1e-12 * expected);
        assert_eq!(hwmodel::node_peak_bandwidth(spec).unwrap(), 2.0 * bw);
    }
    assert_eq!(hwmodel::stream_min_elements(&tx2), 16_777_216);
    assert_eq!(hwmodel::stream_min_elements(&mn4), 17_301_504);
}

#[test]
fn stream_sizing_oracle() {
    for name in ["dibona-tx2.json", "marenostrum4.json", "sandbox-host.json"] {
        let llc = raw(name)["llc_per_socket"].as_u64().unwrap();
        let by_cache = (4 * llc).div_ceil(8) as usize;
        let spec = PlatformSpec::load(fixture(name)).unwrap();
        assert_eq!(
            hwmodel::stream_min_elements(&spec),
            by_cache.max(10_000_000),
            "{name}"
        );
    }
}

#[test]
fn spec_without_vector_units() {
    let mut spec = PlatformSpec::load(fixture("dibona-tx2.json")).unwrap();
    spec.vector_units.clear();
    let err = hwmodel::peak_flops(&spec, Precision::Double, Mode::Vector).unwrap_err();
    assert_eq!(err.kind(), "missing-unit");
    // explicit scalar issue rate still gives a scalar peak
    assert_eq!(
        hwmodel::peak_flops(&spec, Precision::Double, Mode::Scalar).unwrap(),
        8.0
    );
}

#[test]
fn unknown_fields_are_rejected() {
    let mut v = raw("dibona-tx2.json");
    v["turbo"] = Value::Bool(true);
    let err = PlatformSpec::from_json_str(&v.to_string()).unwrap_err();
    assert_eq!(err.kind(), "json");
}

proptest! {
    #[test]
    fn peak_is_linear_in_frequency(ghz in 0.5f64..5.0, k in 1u32..8) {
        let mut spec = PlatformSpec::load(fixture("marenostrum4.json")).unwrap();
        spec.frequency = ghz;
        let base = hwmodel::peak_flops(&spec, Precision::Double, Mode::Vector).unwrap();
        spec.frequency = ghz * f64::from(k);
        let scaled = hwmodel::peak_flops(&spec, Precision::Double, Mode::Vector).unwrap();
        prop_assert!((scaled - base * f64::from(k)).abs() <= 1e-12 * scaled);
    }

    #[test]
    fn single_is_twice_double(ghz in 0.5f64..5.0) {
        let mut spec = PlatformSpec::load(fixture("dibona-tx2.json")).unwrap();
        spec.frequency = ghz;
        let sp = hwmodel::peak_flops(&spec, Precision::Single, Mode::Vector).unwrap();
        let dp = hwmodel::peak_flops(&spec, Precision::Double, Mode::Vector).unwrap();
        prop_assert_eq!(sp, 2.0 * dp);
    }
}
