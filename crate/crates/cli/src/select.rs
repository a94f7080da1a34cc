use std::path::PathBuf;

use catnet::metrics::PerformanceTable;
use catnet::selection::{explain, fingerprint, reference::reference_table, SelectionPolicy};
use clap::Args;

use crate::error::{CliError, CliResult};
use crate::util;
use crate::Context;

#[derive(Args, Debug)]
pub struct SelectArgs {
    /// Performance table written by `bench` (CSV or JSON).
    #[arg(long, conflicts_with = "reference")]
    table: Option<PathBuf>,

    /// Use the built-in reference table of the ten default learners.
    #[arg(long)]
    reference: bool,

    /// Minimum average accuracy, as a fraction.
    #[arg(long)]
    aa_min: Option<f64>,

    /// Training-time budget in seconds.
    #[arg(long)]
    tt_budget: Option<f64>,

    /// Output directory [default: select].
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(ctx: &Context, args: SelectArgs) -> CliResult<()> {
    let cfg = &ctx.config.select;
    let table = if args.reference {
        reference_table()
    } else {
        let path = util::required(args.table.or_else(|| cfg.table.clone()), "table")?;
        PerformanceTable::parse(&util::read_text(&path)?)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
    };
    let policy = SelectionPolicy {
        aa_min: args.aa_min.or(cfg.aa_min).unwrap_or(SelectionPolicy::default().aa_min),
        tt_budget_s: args.tt_budget.or(cfg.tt_budget),
        ..SelectionPolicy::default()
    };
    policy.validate().map_err(|e| match e {
        catnet::Error::InvalidSpec(m) => CliError::Policy(format!("invalid policy: {m}")),
        other => other.into(),
    })?;
    let out = util::out_dir(args.out.or_else(|| cfg.out.clone()), "select")?;

    let trace = explain(&table, &policy)?;
    debug_assert_eq!(trace.assignment.table_fingerprint, fingerprint(&table));
    let rendered = trace.render();
    util::write(&out.join("assignment.json"), trace.assignment.to_json())?;
    util::write(&out.join("trace.txt"), &rendered)?;
    print!("{rendered}");
    Ok(())
}
