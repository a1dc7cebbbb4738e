use metaudit_core::audit::build_pvalue_plot;

use super::CommandOutput;
use crate::cli::PlotArgs;
use crate::input::{parse_effects, Source};
use crate::output::{ensure_dir, write_file};
use crate::svg::render_pvalue_plot;
use crate::CliError;

/// Renders the p-value plot of the numeric records as a standalone SVG.
pub fn cmd_plot(args: &PlotArgs) -> Result<CommandOutput, CliError> {
    let source = Source::read(&args.input)?;
    let records = parse_effects(&source)?;
    let plot = build_pvalue_plot(&records)?;
    let svg = render_pvalue_plot(&plot);
    if let Some(parent) = args.output.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    write_file(&args.output, &svg)?;
    Ok(CommandOutput {
        stdout: format!(
            "wrote {} ({} points, {} not significant excluded)\n",
            args.output.display(),
            plot.n,
            plot.excluded_ns_count
        ),
        files: vec![args.output.clone()],
    })
}
