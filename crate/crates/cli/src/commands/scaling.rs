use std::collections::BTreeMap;
use std::path::Path;

use perfchar_core::ingest::{self, GroupField, RunRecord, ValueField};
use perfchar_core::metrics::{self, UnitLabel};
use perfchar_core::report::{fixed, num, Axes, Table};
use perfchar_core::scalefit::{
    self, CriticalDefinition, CriticalPoint, ScalingModel, SharePoint, Weighting,
};
use perfchar_core::{Error, Result};

use super::{load_runs, slug, triple};
use crate::output::{Output, Plot};
use crate::{ScalingArgs, ScalingModelArg, UnitsArg, WeightingArg};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum InputKind {
    Runs,
    Speedups,
    Mpi,
}

fn detect(path: &Path) -> Result<InputKind> {
    let text = perfchar_core::read_text(path)?;
    if text.trim_start().starts_with('[') {
        return Ok(InputKind::Runs);
    }
    let header = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .ok_or_else(|| Error::Schema(format!("`{}` has no header row", path.display())))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.contains(&"t_cal_s") {
        Ok(InputKind::Mpi)
    } else if cols.contains(&"speedup") {
        Ok(InputKind::Speedups)
    } else {
        Ok(InputKind::Runs)
    }
}

/// One group's observations, with the fields it is keyed by.
struct Series {
    key: Vec<String>,
    unit: UnitLabel,
    /// `(units, speedup)` for speedup models.
    speedups: Vec<(f64, f64)>,
    shares: Vec<SharePoint>,
}

fn key_of(fields: &[GroupField], platform: &str, app: &str, compiler: &str) -> Result<Vec<String>> {
    fields
        .iter()
        .map(|f| match f {
            GroupField::Platform => Ok(platform.to_string()),
            GroupField::App => Ok(app.to_string()),
            GroupField::Compiler => Ok(compiler.to_string()),
            other => Err(Error::InvalidParameter(format!(
                "cannot group by `{}` for this input",
                other.name()
            ))),
        })
        .collect()
}

fn run_units(r: &RunRecord, units: UnitsArg) -> f64 {
    match units {
        UnitsArg::Nodes => f64::from(r.nodes),
        UnitsArg::Ranks => r.ranks() as f64,
    }
}

fn series_from_runs(
    records: &[RunRecord],
    fields: &[GroupField],
    args: &ScalingArgs,
) -> Result<Vec<Series>> {
    let unit = match args.units {
        UnitsArg::Nodes => UnitLabel::Nodes,
        UnitsArg::Ranks => UnitLabel::Processes,
    };
    let mut out = Vec::new();
    for (key, group) in ingest::group_by(records, fields) {
        let points = match args.model {
            ScalingModelArg::Amdahl => {
                let raw: Vec<(f64, f64)> = group
                    .iter()
                    .map(|r| (run_units(r, args.units), r.time))
                    .collect();
                metrics::strong_scaling_series(&raw, unit)?
            }
            ScalingModelArg::Gustafson => {
                let raw = group
                    .iter()
                    .map(|r| {
                        let rate = r
                            .app_metric
                            .as_ref()
                            .filter(|m| m.is_rate())
                            .and_then(|_| r.value(ValueField::AppMetric))
                            .ok_or_else(|| {
                                Error::NotAvailable(format!(
                                    "weak scaling needs a rate app_metric for {}/{}/{} at {} nodes",
                                    r.platform, r.app, r.compiler, r.nodes
                                ))
                            })?;
                        Ok((run_units(r, args.units), rate))
                    })
                    .collect::<Result<Vec<_>>>()?;
                metrics::weak_scaling_series(&raw, unit)?
            }
            ScalingModelArg::MpiShares => unreachable!("decomposition input checked by caller"),
        };
        out.push(Series {
            key,
            unit,
            speedups: points.iter().map(|e| (e.units, e.speedup)).collect(),
            shares: Vec::new(),
        });
    }
    Ok(out)
}

fn collect(args: &ScalingArgs, fields: &[GroupField], out: &mut Output) -> Result<Vec<Series>> {
    let kinds = args
        .inputs
        .iter()
        .map(|p| detect(p))
        .collect::<Result<Vec<_>>>()?;
    let kind = kinds[0];
    if kinds.iter().any(|&k| k != kind) {
        return Err(Error::InvalidParameter(
            "all --in files must share one format".into(),
        ));
    }
    match (args.model, kind) {
        (ScalingModelArg::MpiShares, InputKind::Mpi) => {}
        (ScalingModelArg::MpiShares, _) => {
            return Err(Error::Schema(
                "mpi-shares needs a decomposition file with t_cal_s,t_com_s,t_lb_s columns".into(),
            ))
        }
        (_, InputKind::Mpi) => {
            return Err(Error::Schema(
                "speedup models need run or speedup files".into(),
            ));
        }
        _ => {}
    }
    if kind == InputKind::Runs {
        let records = load_runs(&args.inputs, out)?;
        return series_from_runs(&records, fields, args);
    }
    let mut groups: BTreeMap<Vec<String>, Series> = BTreeMap::new();
    for path in &args.inputs {
        out.input(path);
        let text = perfchar_core::read_text(path)?;
        let file = text.as_bytes();
        if kind == InputKind::Speedups {
            for r in ingest::parse_speedups(file)? {
                let key = key_of(fields, &r.platform, &r.app, &r.compiler)?;
                new_series(&mut groups, key, r.unit)?
                    .speedups
                    .push((r.p, r.speedup));
            }
        } else {
            for r in ingest::parse_mpi_decompositions(file)? {
                let key = key_of(fields, &r.platform, &r.app, &r.compiler)?;
                new_series(&mut groups, key, r.unit)?
                    .shares
                    .push(SharePoint::from_decomposition(r.p, &r.times));
            }
        }
    }
    Ok(groups.into_values().collect())
}

fn new_series(
    groups: &mut BTreeMap<Vec<String>, Series>,
    key: Vec<String>,
    unit: UnitLabel,
) -> Result<&mut Series> {
    let s = groups.entry(key.clone()).or_insert_with(|| Series {
        key: key.clone(),
        unit,
        speedups: Vec::new(),
        shares: Vec::new(),
    });
    if s.unit != unit {
        return Err(Error::InvalidData(format!(
            "group {} mixes `{}` and `{unit}` unit counts",
            key.join("/"),
            s.unit
        )));
    }
    Ok(s)
}

pub fn run(args: &ScalingArgs, mut out: Output) -> Result<()> {
    let fields = GroupField::parse_list(&args.group)?;
    if fields.is_empty() {
        return Err(Error::InvalidParameter(
            "--group needs at least one field".into(),
        ));
    }
    let grid = if args.project.is_empty() {
        if !(args.project_max >= 1.0 && args.project_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "--project-max must be >= 1, got {}",
                args.project_max
            )));
        }
        scalefit::power_of_two_grid(args.project_max)
    } else {
        args.project.clone()
    };
    let series = collect(args, &fields, &mut out)?;
    if series.is_empty() {
        return Err(Error::InvalidData("no observations in the input".into()));
    }
    let key_headers: Vec<String> = fields.iter().map(|f| f.name().to_string()).collect();
    match args.model {
        ScalingModelArg::MpiShares => shares(args, &series, &key_headers, &grid, &mut out)?,
        _ => speedups(args, &series, &key_headers, &grid, &mut out)?,
    }
    if let Some(cells) = &args.cells {
        sizing(cells, &args.decomposition, &mut out)?;
    }
    out.finish("analyze scaling")
}

fn with_key<I: IntoIterator<Item = String>>(key: &[String], rest: I) -> Vec<String> {
    key.iter().cloned().chain(rest).collect()
}

fn speedups(
    args: &ScalingArgs,
    series: &[Series],
    keys: &[String],
    grid: &[f64],
    out: &mut Output,
) -> Result<()> {
    let weighting = match args.weighting {
        WeightingArg::Relative => Weighting::Relative,
        WeightingArg::Uniform => Weighting::Uniform,
    };
    let model_name = if args.model == ScalingModelArg::Amdahl {
        "amdahl"
    } else {
        "gustafson"
    };
    let mut params = Table::new(with_key(
        keys,
        [
            "model", "unit", "n", "a", "sigma_a", "b", "sigma_b", "residual",
        ]
        .map(String::from),
    ));
    let mut text = Table::new(with_key(
        keys,
        ["model", "n", "a", "b", "residual"].map(String::from),
    ));
    for s in series {
        let (model, row, shown) = match args.model {
            ScalingModelArg::Amdahl => {
                let f = scalefit::fit_amdahl_weighted(&s.speedups, weighting)?;
                (
                    ScalingModel::from(&f),
                    [
                        num(f.a),
                        num(f.sigma_a),
                        num(f.b),
                        num(f.sigma_b),
                        num(f.residual),
                    ],
                    [
                        pm(f.a, f.sigma_a, 4),
                        pm(f.b, f.sigma_b, 3),
                        fixed(f.residual, 4),
                    ],
                )
            }
            _ => {
                let f = scalefit::fit_gustafson_weighted(&s.speedups, weighting)?;
                (
                    ScalingModel::from(&f),
                    [
                        num(f.a),
                        num(f.sigma_a),
                        String::new(),
                        String::new(),
                        num(f.residual),
                    ],
                    [pm(f.a, f.sigma_a, 4), "-".into(), fixed(f.residual, 4)],
                )
            }
        };
        params.push(with_key(
            &s.key,
            [
                model_name.to_string(),
                s.unit.to_string(),
                s.speedups.len().to_string(),
            ]
            .into_iter()
            .chain(row),
        ));
        text.push(with_key(
            &s.key,
            [model_name.to_string(), s.speedups.len().to_string()]
                .into_iter()
                .chain(shown),
        ));

        let unit = s.unit.to_string();
        let plot = Plot {
            title: "Speedup projection",
            xlabel: &unit,
            ylabel: "speedup",
            y_cols: &[(2, "speedup"), (3, "efficiency")],
            axes: Axes {
                log_x: true,
                log_y: false,
            },
        };
        let mut proj = Table::new(["p", "speedup", "efficiency"]);
        for pt in scalefit::project(&model, grid)? {
            proj.push([num(pt.p), num(pt.speedup), num(pt.efficiency)]);
        }
        out.plot(&format!("projection-{}.csv", slug(&s.key)), &proj, &plot)?;
        let mut observed = Table::new(["p", "speedup", "efficiency"]);
        for &(p, sp) in &s.speedups {
            observed.push([num(p), num(sp), num(sp / p)]);
        }
        out.plot(&format!("observed-{}.csv", slug(&s.key)), &observed, &plot)?;
    }
    out.section(
        &format!(
            "{model_name} fits ({} weighting)",
            weighting_name(weighting)
        ),
        &text,
    );
    out.table("scaling-params.csv", &params)
}

fn weighting_name(w: Weighting) -> &'static str {
    match w {
        Weighting::Relative => "relative",
        Weighting::Uniform => "uniform",
    }
}

fn pm(v: f64, sigma: f64, decimals: usize) -> String {
    format!("{} +- {}", fixed(v, decimals), fixed(sigma, decimals))
}

fn shares(
    args: &ScalingArgs,
    series: &[Series],
    keys: &[String],
    grid: &[f64],
    out: &mut Output,
) -> Result<()> {
    let mut params = Table::new(with_key(
        keys,
        ["unit", "n", "a", "sigma_a", "b", "sigma_b", "c", "sigma_c"].map(String::from),
    ));
    let mut text = Table::new(with_key(
        keys,
        ["n", "a_pct", "b_pct", "c_pct"].map(String::from),
    ));
    let mut critical = Table::new(with_key(
        keys,
        ["definition", "threshold_pct", "units"].map(String::from),
    ));
    let mut critical_text = critical.clone();
    for s in series {
        let f = scalefit::fit_mpi_shares(&s.shares)?;
        let n = s.shares.len().to_string();
        params.push(with_key(
            &s.key,
            [
                s.unit.to_string(),
                n.clone(),
                num(f.a()),
                num(f.sigma_a()),
                num(f.b()),
                num(f.sigma_b()),
                num(f.c()),
                num(f.sigma_c()),
            ],
        ));
        text.push(with_key(
            &s.key,
            [
                n,
                pm(f.a(), f.sigma_a(), 2),
                pm(f.b(), f.sigma_b(), 2),
                pm(f.c(), f.sigma_c(), 2),
            ],
        ));
        for def in [CriticalDefinition::LbOnly, CriticalDefinition::LbPlusCom] {
            let (raw, shown) = match scalefit::critical_units(&f, def, args.threshold) {
                CriticalPoint::At { units } => (num(units), fixed(units, 1)),
                CriticalPoint::NoCriticalPoint => (String::new(), "none".into()),
            };
            let head = [def.label().to_string(), num(args.threshold)];
            critical.push(with_key(&s.key, head.clone().into_iter().chain([raw])));
            critical_text.push(with_key(&s.key, head.into_iter().chain([shown])));
        }

        let unit = s.unit.to_string();
        let plot = Plot {
            title: "MPI time share",
            xlabel: &unit,
            ylabel: "share of run time (%)",
            y_cols: &[(2, "load balance"), (3, "communication"), (4, "MPI total")],
            axes: Axes::default(),
        };
        let mut model = Table::new(["p", "lb_pct", "com_pct", "mpi_pct"]);
        let mut ps = grid.to_vec();
        ps.sort_by(f64::total_cmp);
        ps.dedup();
        for p in ps {
            model.push([num(p), num(f.lb_share(p)), num(f.c()), num(f.mpi_share(p))]);
        }
        out.plot(&format!("mpi-shares-{}.csv", slug(&s.key)), &model, &plot)?;
        let mut observed = Table::new(["p", "lb_pct", "com_pct", "mpi_pct"]);
        for sp in &s.shares {
            observed.push([
                num(sp.p),
                num(sp.lb_pct),
                num(sp.com_pct),
                num(sp.lb_pct + sp.com_pct),
            ]);
        }
        out.plot(
            &format!("mpi-observed-{}.csv", slug(&s.key)),
            &observed,
            &plot,
        )?;
    }
    out.section("MPI share fits (percent)", &text);
    out.section("Critical unit counts", &critical_text);
    out.table("mpi-params.csv", &params)?;
    out.table("critical-units.csv", &critical)
}

fn sizing(cells: &str, decompositions: &[String], out: &mut Output) -> Result<()> {
    let per_unit = triple(cells, "--cells")?;
    if decompositions.is_empty() {
        return Err(Error::InvalidParameter(
            "--cells needs at least one --decomposition".into(),
        ));
    }
    let headers = ["decomposition", "global", "cells", "memory_gib"];
    let mut data = Table::new(headers);
    let mut text = Table::new(headers);
    for d in decompositions {
        let dec = triple(d, "--decomposition")?;
        let size = scalefit::weak_scaling_size(per_unit, dec)?;
        let dims = |v: [u64; 3]| format!("{}x{}x{}", v[0], v[1], v[2]);
        let row = [dims(dec), dims(size.global), size.cells.to_string()];
        data.push(row.clone().into_iter().chain([num(size.memory_gib())]));
        text.push(row.into_iter().chain([fixed(size.memory_gib(), 2)]));
    }
    out.section(
        &format!(
            "Weak-scaling sizing, {} cells per unit",
            cells.replace(',', "x")
        ),
        &text,
    );
    out.table("sizing.csv", &data)
}
