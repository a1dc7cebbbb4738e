//! Minimal terminal styling, disabled by `METAUDIT_NO_COLOR` or when the
//! stream is not a terminal. Files are never styled.

use std::io::IsTerminal;

pub const NO_COLOR_ENV: &str = "METAUDIT_NO_COLOR";

#[derive(Debug, Clone, Copy)]
pub enum Tone {
    Good,
    Warn,
    Bad,
}

pub fn enabled(stream: &impl IsTerminal) -> bool {
    std::env::var_os(NO_COLOR_ENV).is_none() && stream.is_terminal()
}

pub fn paint(text: &str, tone: Tone) -> String {
    let code = match tone {
        Tone::Good => "32",
        Tone::Warn => "33",
        Tone::Bad => "31",
    };
    format!("\x1b[{code}m{text}\x1b[0m")
}

/// Colours the verdict cells of a markdown report.
pub fn highlight_verdicts(text: &str) -> String {
    [
        ("| reject |", Tone::Bad),
        ("| no evidence |", Tone::Good),
        ("| insufficient data |", Tone::Warn),
    ]
    .iter()
    .fold(text.to_owned(), |acc, (cell, tone)| {
        let inner = &cell[2..cell.len() - 2];
        acc.replace(cell, &format!("| {} |", paint(inner, *tone)))
    })
}
