//! Textual rendering of round reports, optionally side by side with a
//! control run.

use nushu_core::pipeline::RoundReport;

const BAR_WIDTH: usize = 20;

fn bar(successes: u32, total: u32) -> String {
    if total == 0 {
        return String::new();
    }
    let filled = (successes as usize * BAR_WIDTH) / total as usize;
    let mut s = "█".repeat(filled);
    s.push_str(&"░".repeat(BAR_WIDTH - filled));
    s
}

fn row(report: &RoundReport) -> String {
    let total = report.successes + report.failures;
    format!(
        "{:>3} {:>4} {} nov {:>2} ref {:>3}",
        report.successes,
        report.failures,
        bar(report.successes, total),
        report.novel_flag_count,
        report.refusals
    )
}

/// Render one or two report sequences as a per-round table with textual
/// bars and a totals line. Columns: successes, failures, success bar,
/// novel-character flags, refusals.
pub fn render_reports(primary: &[RoundReport], control: Option<&[RoundReport]>) -> String {
    let mut out = String::new();
    match control {
        None => {
            out.push_str(&format!("round {:>3} {:>4} {:<width$}\n", "ok", "fail", "", width = BAR_WIDTH));
            for report in primary {
                out.push_str(&format!("R{:<4} {}\n", report.round, row(report)));
            }
            let ok: u32 = primary.iter().map(|r| r.successes).sum();
            let fail: u32 = primary.iter().map(|r| r.failures).sum();
            out.push_str(&format!("total {ok:>3} {fail:>4}\n"));
        }
        Some(control) => {
            let blank = format!("{:>3} {:>4} {:<w$} nov  - ref   -", "-", "-", "", w = BAR_WIDTH);
            out.push_str("round | run                                                | control\n");
            let rounds = primary.len().max(control.len());
            for i in 0..rounds {
                let label = primary
                    .get(i)
                    .or_else(|| control.get(i))
                    .map(|r| r.round)
                    .unwrap_or(i as u32 + 1);
                let left = primary.get(i).map(row).unwrap_or_else(|| blank.clone());
                let right = control.get(i).map(row).unwrap_or_else(|| blank.clone());
                out.push_str(&format!("R{label:<4} | {left} | {right}\n"));
            }
            let sum = |rs: &[RoundReport]| -> (u32, u32) {
                (
                    rs.iter().map(|r| r.successes).sum(),
                    rs.iter().map(|r| r.failures).sum(),
                )
            };
            let (pok, pfail) = sum(primary);
            let (cok, cfail) = sum(control);
            out.push_str(&format!(
                "total | ok {pok} fail {pfail} | ok {cok} fail {cfail}\n"
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeMap, BTreeSet};

    fn report(round: u32, successes: u32, failures: u32) -> RoundReport {
        let total = successes + failures;
        RoundReport {
            round,
            successes,
            failures,
            retry_histogram: BTreeMap::from([(1, total)]),
            novel_flag_count: 0,
            novel_chars: BTreeSet::new(),
            refusals: 0,
        }
    }

    #[test]
    fn single_perfect_round_renders_full_bar() {
        let text = render_reports(&[report(1, 30, 0)], None);
        assert!(text.contains(&"█".repeat(20)), "got:\n{text}");
        assert!(text.contains("total  30    0"));
    }

    #[test]
    fn six_rounds_total_to_180() {
        let reports: Vec<RoundReport> = (1..=6).map(|r| report(r, 28, 2)).collect();
        let text = render_reports(&reports, None);
        assert_eq!(text.lines().count(), 8, "header + 6 rounds + total");
        assert!(text.contains("total 168   12"));
    }

    #[test]
    fn side_by_side_renders_both_columns() {
        let main: Vec<RoundReport> = (1..=2).map(|r| report(r, 4, 0)).collect();
        let control: Vec<RoundReport> = (1..=2).map(|r| report(r, 3, 1)).collect();
        let text = render_reports(&main, Some(&control));
        for line in text.lines().skip(1).take(2) {
            assert_eq!(line.matches('|').count(), 2, "line: {line}");
        }
        assert!(text.contains("ok 8 fail 0"));
        assert!(text.contains("ok 6 fail 2"));
    }
}
