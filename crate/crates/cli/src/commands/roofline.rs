use perfchar_core::hwmodel::PlatformSpec;
use perfchar_core::ingest;
use perfchar_core::report::{fixed, num, Axes, Table};
use perfchar_core::roofline::{self, RooflineModel};
use perfchar_core::Result;

use crate::output::{Output, Plot};
use crate::RooflineArgs;

const POINT_HEADERS: [&str; 3] = ["intensity", "gflops", "label"];

pub fn run(args: &RooflineArgs, mut out: Output) -> Result<()> {
    out.input(&args.spec);
    let spec = PlatformSpec::load(&args.spec)?;
    let model = RooflineModel::from_spec(&spec, args.precision, args.scope)?;

    out.note(&format!(
        "{} roofline ({} scope, {}): peak {} GFlop/s, bandwidth {} GB/s, ridge {} Flop/Byte",
        spec.name,
        args.scope,
        args.precision,
        fixed(model.peak_flops(), 2),
        fixed(model.peak_bandwidth(), 2),
        fixed(model.ridge_intensity(), 4),
    ));
    let mut curve = Table::new(POINT_HEADERS);
    for (x, y) in model.curve(args.lo, args.hi)? {
        curve.push([num(x), num(y), "roof".into()]);
    }
    let plot = Plot {
        title: "Roofline",
        xlabel: "arithmetic intensity (Flop/Byte)",
        ylabel: "GFlop/s",
        y_cols: &[(2, "roof")],
        axes: Axes {
            log_x: true,
            log_y: true,
        },
    };
    out.plot("roofline-curve.csv", &curve, &plot)?;

    if let Some(path) = &args.kernels {
        out.input(path);
        let kernels = ingest::parse_kernel_points(perfchar_core::read_text(path)?.as_bytes())?;
        let mut points = Table::new(POINT_HEADERS);
        let mut classes = Table::new([
            "label",
            "intensity",
            "attainable_gflops",
            "measured_gflops",
            "headroom",
            "time_share",
            "bound",
        ]);
        let mut text = Table::new([
            "label",
            "intensity",
            "attainable_gflops",
            "time_share",
            "bound",
        ]);
        for k in &kernels {
            let c = roofline::classify(&model, k)?;
            if let Some(w) = &c.warning {
                eprintln!("perfchar: warning: {w}");
            }
            points.push([
                num(k.intensity),
                num(k.measured_perf.unwrap_or(c.attainable)),
                k.label.clone(),
            ]);
            let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
            classes.push([
                k.label.clone(),
                num(k.intensity),
                num(c.attainable),
                opt(k.measured_perf),
                opt(c.headroom),
                opt(k.time_share),
                c.bound.to_string(),
            ]);
            text.push([
                k.label.clone(),
                fixed(k.intensity, 3),
                fixed(c.attainable, 2),
                k.time_share
                    .map_or("-".into(), |t| format!("{}%", fixed(100.0 * t, 2))),
                c.bound.to_string(),
            ]);
        }
        out.section("Kernels", &text);
        out.plot("roofline-kernels.csv", &points, &plot)?;
        out.table("roofline-classification.csv", &classes)?;
    }
    out.finish("analyze roofline")
}
