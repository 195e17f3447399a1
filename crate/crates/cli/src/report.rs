//! Report assembly: CSV with `#` comment headers (gnuplot-ready) and an
//! equivalent JSON form carrying the same fields by name.

use serde_json::{json, Value};

use crate::config::{OutputFormat, RunConfig};

/// Formats a float with 12 significant digits, plain notation where
/// reasonable, scientific otherwise. Deterministic across runs.
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let mut s = format!("{x:.decimals$}");
        if s.contains('.') {
            while s.ends_with('0') {
                s.pop();
            }
            if s.ends_with('.') {
                s.pop();
            }
        }
        s
    } else {
        let mant = mant.trim_end_matches('0').trim_end_matches('.');
        format!("{mant}e{exp}")
    }
}

/// One finished run: resolved config, optional extra header facts, and
/// the tabular payload.
pub struct Report {
    pub command: String,
    pub config: RunConfig,
    /// Additional `key = value` facts for the comment header / JSON body.
    pub extra: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.render_csv(),
            OutputFormat::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# polarsim {}\n", self.command));
        for (k, v) in self.config.resolved_pairs() {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        for (k, v) in &self.extra {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        out.push_str(&format!("# columns: {}\n", self.columns.join(",")));
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    fn render_json(&self) -> String {
        let config: Value = self
            .config
            .resolved_pairs()
            .into_iter()
            .map(|(k, v)| (k, Value::String(v)))
            .collect::<serde_json::Map<String, Value>>()
            .into();
        let extra: Value = self
            .extra
            .iter()
            .cloned()
            .map(|(k, v)| (k, Value::String(v)))
            .collect::<serde_json::Map<String, Value>>()
            .into();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                self.columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), Value::String(v.clone())))
                    .collect::<serde_json::Map<String, Value>>()
                    .into()
            })
            .collect();
        let doc = json!({
            "command": self.command,
            "config": config,
            "extra": extra,
            "columns": self.columns,
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable report");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt_g_plain_cases() {
        assert_eq!(fmt_g(0.0), "0");
        assert_eq!(fmt_g(1.0), "1");
        assert_eq!(fmt_g(0.02), "0.02");
        assert_eq!(fmt_g(0.25), "0.25");
        assert_eq!(fmt_g(-3.5), "-3.5");
        assert_eq!(fmt_g(130.0), "130");
    }

    #[test]
    fn fmt_g_sig_digits() {
        assert_eq!(fmt_g(std::f64::consts::PI), "3.14159265359");
        assert_eq!(fmt_g(2.8284271247461903), "2.82842712475");
        assert_eq!(fmt_g(1.0 / 3.0), "0.333333333333");
    }

    #[test]
    fn fmt_g_extremes() {
        assert_eq!(fmt_g(1.5e-7), "1.5e-7");
        assert_eq!(fmt_g(2.5e14), "2.5e14");
    }
}
