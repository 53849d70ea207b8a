use perfchar_core::metrics;
use perfchar_core::report::{fixed, num, Table};
use perfchar_core::Result;

use super::load_runs;
use crate::output::Output;
use crate::CompareArgs;

pub fn run(args: &CompareArgs, mut out: Output) -> Result<()> {
    let records = load_runs(&args.inputs, &mut out)?;
    let cmp = metrics::compare_platforms(&records, args.metric)?;

    let mut data = Table::new(["app", "group", "value", "delta_pct", "rank"]);
    let mut text =
        Table::new(std::iter::once("app".to_string()).chain(cmp.columns.iter().cloned()));
    for row in &cmp.rows {
        let mut cells = vec![row.app.clone()];
        for (col, cell) in cmp.columns.iter().zip(&row.cells) {
            match cell {
                Some(c) => {
                    data.push([
                        row.app.clone(),
                        col.clone(),
                        num(c.value),
                        num(c.delta_pct),
                        c.rank.to_string(),
                    ]);
                    cells.push(format!(
                        "{} (#{}, +{}%)",
                        fixed(c.value, 2),
                        c.rank,
                        fixed(c.delta_pct, 1)
                    ));
                }
                None => cells.push("-".into()),
            }
        }
        text.push(cells);
    }
    out.section(
        &format!(
            "{} [{}], rank 1 = best",
            cmp.metric.name(),
            cmp.metric.unit()
        ),
        &text,
    );
    out.table(&format!("compare-{}.csv", cmp.metric.name()), &data)?;
    out.finish("report compare")
}
