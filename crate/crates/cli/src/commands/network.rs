use perfchar_core::ingest;
use perfchar_core::report::{fixed, num, Table};
use perfchar_core::{Error, Result};

use crate::output::Output;
use crate::NetworkArgs;

pub fn run(args: &NetworkArgs, mut out: Output) -> Result<()> {
    out.input(&args.input);
    let sweep = ingest::load_pairwise(&args.input)?;
    for w in &sweep.warnings {
        eprintln!("perfchar: warning: {w}");
    }
    let matrices: Vec<_> = match args.msg_bytes {
        Some(m) => vec![sweep
            .matrices
            .get(&m)
            .ok_or_else(|| Error::InvalidParameter(format!("no measurements at {m} bytes")))?],
        None => sweep.matrices.values().collect(),
    };

    let mut medians = Table::new(["msg_bytes", "node", "median_gbs"]);
    let link_headers = [
        "msg_bytes",
        "node_a",
        "node_b",
        "bandwidth_gbs",
        "reference_gbs",
        "deficit_pct",
    ];
    let mut links = Table::new(link_headers);
    let mut text = Table::new(link_headers);
    for m in matrices {
        let size = m.message_size();
        for (i, node) in m.node_ids().iter().enumerate() {
            medians.push([size.to_string(), node.clone(), num(m.row_median(i))]);
        }
        let mut dense =
            Table::new(std::iter::once("node".to_string()).chain(m.node_ids().iter().cloned()));
        for (i, node) in m.node_ids().iter().enumerate() {
            dense.push(
                std::iter::once(node.clone())
                    .chain((0..m.len()).map(|j| m.get(i, j).map(num).unwrap_or_default())),
            );
        }
        out.table(&format!("matrix-{size}.csv"), &dense)?;
        for w in ingest::detect_weak_links(m, args.threshold)? {
            links.push([
                size.to_string(),
                w.node_a.clone(),
                w.node_b.clone(),
                num(w.bandwidth),
                num(w.reference),
                num(100.0 * w.deficit),
            ]);
            text.push([
                size.to_string(),
                w.node_a,
                w.node_b,
                fixed(w.bandwidth, 3),
                fixed(w.reference, 3),
                fixed(100.0 * w.deficit, 1),
            ]);
        }
    }
    out.note(&format!(
        "{} weak link(s) at threshold {}%",
        links.rows.len(),
        fixed(100.0 * args.threshold, 1)
    ));
    out.section("Weak links", &text);
    out.table("node-medians.csv", &medians)?;
    out.table("weak-links.csv", &links)?;
    out.finish("analyze network")
}
