use perfchar_core::hwmodel::{self, PlatformSpec};
use perfchar_core::microbench::{self, TriadConfig};
use perfchar_core::report::{fixed, num, Axes, Table};
use perfchar_core::Result;

use crate::output::{Output, Plot};
use crate::{FlopsArgs, MemArgs};

pub fn mem(args: &MemArgs, mut out: Output) -> Result<()> {
    let spec = match &args.spec {
        Some(p) => {
            out.input(p);
            Some(PlatformSpec::load(p)?)
        }
        None => None,
    };
    let elements = args.elements.unwrap_or_else(|| {
        spec.as_ref()
            .map_or(hwmodel::STREAM_FLOOR_ELEMENTS, hwmodel::stream_min_elements)
    });
    let threads = if args.threads.is_empty() {
        vec![microbench::max_threads()]
    } else {
        args.threads.clone()
    };
    let peak = spec
        .as_ref()
        .map(hwmodel::node_peak_bandwidth)
        .transpose()?;

    let mut data = Table::new(["threads", "best_gbs"]);
    let mut text = Table::new(["threads", "best_gbs", "mean_gbs", "peak_pct", "pinning"]);
    for &t in &threads {
        let config = TriadConfig {
            elements,
            threads: t,
            repetitions: args.reps,
            pinning: args.pin,
        };
        let r = microbench::run_stream_triad(&config, spec.as_ref())?;
        data.push([t.to_string(), num(r.best)]);
        let pinning = if r.pinned {
            r.pinning.to_string()
        } else {
            format!("{} (unpinned)", r.pinning)
        };
        text.push([
            t.to_string(),
            fixed(r.best, 2),
            fixed(r.mean(), 2),
            peak.map_or("-".into(), |p| fixed(100.0 * r.best / p, 1)),
            pinning,
        ]);
    }
    out.note(&format!(
        "STREAM triad, {elements} elements per array, {} repetitions",
        args.reps
    ));
    out.section("Bandwidth", &text);
    out.plot(
        "bench-mem.csv",
        &data,
        &Plot {
            title: "STREAM triad",
            xlabel: "threads",
            ylabel: "GB/s",
            y_cols: &[(2, "best")],
            axes: Axes::default(),
        },
    )?;
    out.finish("bench mem")
}

pub fn flops(args: &FlopsArgs, mut out: Output) -> Result<()> {
    let spec = match &args.spec {
        Some(p) => {
            out.input(p);
            Some(PlatformSpec::load(p)?)
        }
        None => None,
    };
    let mut data = Table::new(["mode", "precision", "gflops"]);
    let mut text = Table::new([
        "mode",
        "precision",
        "width_bits",
        "threads",
        "gflops",
        "peak_pct",
    ]);
    for &mode in &args.mode {
        for &precision in &args.precision {
            let r = microbench::run_fma_kernel_threads(
                precision,
                mode,
                args.duration,
                args.width,
                args.threads,
                args.pin,
            )?;
            let peak = spec
                .as_ref()
                .map(|s| hwmodel::peak_flops(s, precision, mode).map(|p| p * args.threads as f64))
                .transpose()?;
            data.push([mode.to_string(), precision.to_string(), num(r.gflops)]);
            text.push([
                mode.to_string(),
                precision.to_string(),
                r.width_bits.to_string(),
                r.threads.to_string(),
                fixed(r.gflops, 2),
                peak.map_or("-".into(), |p| fixed(100.0 * r.gflops / p, 1)),
            ]);
        }
    }
    out.section("FMA throughput", &text);
    out.table("bench-flops.csv", &data)?;
    out.finish("bench flops")
}
