use perfchar_core::metrics;
use perfchar_core::report::{fixed, num, Table};
use perfchar_core::Result;

use super::load_runs;
use crate::output::Output;
use crate::EnergyArgs;

pub fn run(args: &EnergyArgs, mut out: Output) -> Result<()> {
    let records = load_runs(&args.inputs, &mut out)?;
    let headers = [
        "platform",
        "app",
        "compiler",
        "nodes",
        "time_s",
        "e2s_kj",
        "edp_kjs",
        "work_per_j",
        "work_unit",
    ];
    let mut data = Table::new(headers);
    let mut text = Table::new(headers);
    for r in &records {
        let m = metrics::energy_metrics(r)?;
        let (wpj, unit) = match &m.work_per_joule {
            Some(w) => (Some(w.value), w.unit.clone()),
            None => (None, String::new()),
        };
        let id = [
            r.platform.clone(),
            r.app.clone(),
            r.compiler.clone(),
            r.nodes.to_string(),
        ];
        data.push(id.iter().cloned().chain([
            num(r.time),
            num(m.e2s),
            num(m.edp),
            wpj.map(num).unwrap_or_default(),
            unit.clone(),
        ]));
        text.push(id.into_iter().chain([
            fixed(r.time, 2),
            fixed(m.e2s, 2),
            fixed(m.edp, 1),
            wpj.map_or("-".into(), |v| fixed(v, 2)),
            if unit.is_empty() { "-".into() } else { unit },
        ]));
    }
    out.section("Energy", &text);
    out.table("energy.csv", &data)?;
    out.finish("analyze energy")
}
