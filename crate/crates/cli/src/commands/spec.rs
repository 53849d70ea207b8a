use std::path::PathBuf;

use perfchar_core::hwmodel::{self, Mode, PlatformSpec, Precision};
use perfchar_core::report::{fixed, num, Table};
use perfchar_core::roofline::{RoofScope, RooflineModel};
use perfchar_core::Result;

use crate::output::Output;

const HEADERS: [&str; 5] = ["platform", "quantity", "scope", "value", "unit"];

pub fn show(paths: &[PathBuf], mut out: Output) -> Result<()> {
    let mut data = Table::new(HEADERS);
    let mut text = Table::new(HEADERS);
    for path in paths {
        out.input(path);
        let spec = PlatformSpec::load(path)?;
        for (quantity, scope, value, unit, decimals) in quantities(&spec)? {
            data.push([
                spec.name.clone(),
                quantity.clone(),
                scope.into(),
                num(value),
                unit.into(),
            ]);
            text.push([
                spec.name.clone(),
                quantity,
                scope.into(),
                fixed(value, decimals),
                unit.into(),
            ]);
        }
    }
    out.section("Theoretical peaks", &text);
    out.table("spec.csv", &data)?;
    out.finish("spec show")
}

type Quantity = (String, &'static str, f64, &'static str, usize);

fn quantities(spec: &PlatformSpec) -> Result<Vec<Quantity>> {
    let mut rows = Vec::new();
    for mode in [Mode::Vector, Mode::Scalar] {
        for precision in [Precision::Double, Precision::Single] {
            let core = match hwmodel::peak_flops(spec, precision, mode) {
                Ok(v) => v,
                // a spec without vector units still has meaningful scalar peaks
                Err(_) if mode == Mode::Vector && spec.vector_units.is_empty() => continue,
                Err(e) => return Err(e),
            };
            let name = format!("peak_flops_{precision}_{mode}");
            rows.push((name.clone(), "core", core, "GFlop/s", 2));
            rows.push((
                name,
                "node",
                hwmodel::node_peak_flops(spec, precision, mode)?,
                "GFlop/s",
                2,
            ));
        }
    }
    rows.push((
        "peak_bandwidth".into(),
        "socket",
        hwmodel::peak_bandwidth(spec)?,
        "GB/s",
        2,
    ));
    rows.push((
        "peak_bandwidth".into(),
        "node",
        hwmodel::node_peak_bandwidth(spec)?,
        "GB/s",
        2,
    ));
    if !spec.vector_units.is_empty() {
        let roof = RooflineModel::from_spec(spec, Precision::Double, RoofScope::Node)?;
        rows.push((
            "ridge_intensity_double".into(),
            "node",
            roof.ridge_intensity(),
            "Flop/Byte",
            4,
        ));
    }
    rows.push((
        "stream_min_elements".into(),
        "socket",
        hwmodel::stream_min_elements(spec) as f64,
        "elements",
        0,
    ));
    Ok(rows)
}
