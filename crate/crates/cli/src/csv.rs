//! Sweep CSV output.

use std::fmt::Write;

use keygraph_core::montecarlo::{SweepReport, SweepRow};

pub const COLUMNS: [&str; 18] = [
    "sweep_axis",
    "sweep_value",
    "n",
    "trials",
    "no_isolated_successes",
    "connected_successes",
    "p_no_isolated",
    "p_no_isolated_ci_low",
    "p_no_isolated_ci_high",
    "p_connected",
    "p_connected_ci_low",
    "p_connected_ci_high",
    "mean_isolated",
    "analytic_E_In",
    "mean_class_m_isolated",
    "analytic_E_Yn",
    "c_n",
    "is_predicted_threshold",
];

const SIG_DIGITS: i32 = 12;

/// Shortest `%.12g`-style rendering of `x`.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (SIG_DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if !(-5..SIG_DIGITS).contains(&exp) {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (SIG_DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn header() -> String {
    COLUMNS.join(",")
}

pub fn row_fields(axis: &str, row: &SweepRow) -> Vec<String> {
    let s = &row.summary;
    vec![
        axis.to_string(),
        format_real(row.sweep_value),
        row.n().to_string(),
        s.trials.to_string(),
        s.no_isolated_successes.to_string(),
        s.connected_successes.to_string(),
        format_real(row.p_no_isolated),
        format_real(row.p_no_isolated_ci.0),
        format_real(row.p_no_isolated_ci.1),
        format_real(row.p_connected),
        format_real(row.p_connected_ci.0),
        format_real(row.p_connected_ci.1),
        format_real(s.mean_isolated),
        format_real(row.analytic_expected_isolated),
        format_real(s.mean_class_m_isolated),
        format_real(row.analytic_expected_class_m_isolated),
        format_real(row.scaling_constant),
        row.is_predicted_threshold.to_string(),
    ]
}

pub fn render(report: &SweepReport) -> String {
    let mut out = header();
    out.push('\n');
    for row in &report.rows {
        writeln!(out, "{}", row_fields(&report.axis_name, row).join(",")).unwrap();
    }
    out
}
