//! Standalone SVG rendering of a p-value plot.
//!
//! Output is plain text with fixed two-decimal coordinates so it can be
//! compared byte for byte against a checked-in file.

use std::fmt::Write;

use metaudit_core::audit::PValuePlot;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 770.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 530.0;
/// Significance threshold drawn as a horizontal rule.
pub const THRESHOLD: f64 = 0.05;

struct Frame {
    n: usize,
}

impl Frame {
    /// Ranks span [0.5, n + 0.5] so the end points sit inside the frame.
    fn x(&self, rank: f64) -> f64 {
        let span = self.n as f64;
        LEFT + (rank - 0.5) / span * (RIGHT - LEFT)
    }

    fn y(&self, p: f64) -> f64 {
        BOTTOM - p.clamp(0.0, 1.0) * (BOTTOM - TOP)
    }
}

/// Tick spacing giving at most about ten labels on the rank axis.
fn rank_step(n: usize) -> usize {
    let mut base = 1;
    loop {
        for m in [1, 2, 5] {
            if n / (m * base) <= 10 {
                return m * base;
            }
        }
        base *= 10;
    }
}

pub fn render_pvalue_plot(plot: &PValuePlot) -> String {
    let frame = Frame { n: plot.n.max(1) };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="800" height="600" viewBox="0 0 800 600" font-family="sans-serif" font-size="14">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="800" height="600" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24.00" text-anchor="middle" font-size="16">p-value plot: n = {}, {} not significant excluded</text>"#,
        (LEFT + RIGHT) / 2.0,
        plot.n,
        plot.excluded_ns_count
    );

    // Axes.
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT:.2}" y1="{BOTTOM:.2}" x2="{RIGHT:.2}" y2="{BOTTOM:.2}" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT:.2}" y1="{TOP:.2}" x2="{LEFT:.2}" y2="{BOTTOM:.2}" stroke="black"/>"#
    );
    for i in 0..=4 {
        let p = i as f64 / 4.0;
        let y = frame.y(p);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT:.2}" y2="{y:.2}" stroke="black"/>"#,
            LEFT - 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{p:.2}</text>"#,
            LEFT - 8.0,
            y + 5.0
        );
    }
    let step = rank_step(plot.n);
    let mut rank = 1;
    while rank <= plot.n {
        let x = frame.x(rank as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{BOTTOM:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
            BOTTOM + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{rank}</text>"#,
            BOTTOM + 22.0
        );
        rank = if rank == 1 && step > 1 { step } else { rank + step };
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">rank</text>"#,
        (LEFT + RIGHT) / 2.0,
        BOTTOM + 50.0
    );
    let _ = writeln!(
        s,
        r#"<text x="24.00" y="{0:.2}" text-anchor="middle" transform="rotate(-90 24.00 {0:.2})">p-value</text>"#,
        (TOP + BOTTOM) / 2.0
    );

    // Significance rule.
    let yt = frame.y(THRESHOLD);
    let _ = writeln!(
        s,
        r##"<line x1="{LEFT:.2}" y1="{yt:.2}" x2="{RIGHT:.2}" y2="{yt:.2}" stroke="#b22222" stroke-width="1"/>"##
    );
    let _ = writeln!(
        s,
        r##"<text x="{:.2}" y="{:.2}" text-anchor="end" fill="#b22222" font-size="12">p = 0.05</text>"##,
        RIGHT - 4.0,
        yt - 4.0
    );

    // Uniform reference from (1, 1/(n+1)) to (n, n/(n+1)).
    if let (Some(first), Some(last)) = (plot.reference_line.first(), plot.reference_line.last()) {
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#555555" stroke-dasharray="6 4"/>"##,
            frame.x(first.rank as f64),
            frame.y(first.p),
            frame.x(last.rank as f64),
            frame.y(last.p)
        );
    }

    for point in &plot.points {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="4" fill="#1f4e79"/>"##,
            frame.x(point.rank as f64),
            frame.y(point.p)
        );
    }
    s.push_str("</svg>\n");
    s
}
