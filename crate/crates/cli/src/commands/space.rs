use serde_json::json;

use super::{digest_entry, load_spaces, spaces_json, spaces_rows, CommandOutput, SEARCH_SPACE_NOTE, SPACES_HEADER};
use crate::cli::{Format, SpaceArgs};
use crate::markdown;
use crate::output::{csv_string, ensure_dir, to_json_string, write_file, SCHEMA};
use crate::CliError;

/// Writes `spaces.csv` and `space_summary.json` into the output directory.
pub fn cmd_space(args: &SpaceArgs) -> Result<CommandOutput, CliError> {
    let loaded = load_spaces(&args.input)?;
    let notes = vec![SEARCH_SPACE_NOTE.to_owned()];
    let doc = json!({
        "schema": SCHEMA,
        "inputs_digest": { "counts": digest_entry(&loaded.source) },
        "spaces": spaces_json(&loaded),
        "space_summary": loaded.summary,
        "covariate_tally": loaded.tally,
        "notes": notes,
    });
    let json_text = to_json_string(&doc);
    let csv_text = csv_string(&SPACES_HEADER, &spaces_rows(&loaded));

    ensure_dir(&args.output)?;
    let csv_path = args.output.join("spaces.csv");
    let json_path = args.output.join("space_summary.json");
    write_file(&csv_path, &csv_text)?;
    write_file(&json_path, &json_text)?;

    let stdout = match args.format {
        Format::Json => json_text,
        Format::Csv => csv_text,
        Format::Md => markdown::space_report(&loaded.studies, &loaded.spaces, &loaded.summary, &loaded.tally, &notes),
    };
    Ok(CommandOutput {
        stdout,
        files: vec![csv_path, json_path],
    })
}
