use num_bigint::BigUint;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// `-∞` and NaN serialise as `null`.
pub(crate) fn finite_or_null<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_none()
    }
}

pub(crate) fn opt_finite_or_null<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) if v.is_finite() => s.serialize_f64(*v),
        _ => s.serialize_none(),
    }
}

pub(crate) fn big_as_string<S: Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// One line of an entropy table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    /// `m` for microstate rows, `|F_n|` for Følner rows.
    pub m: usize,
    pub window: String,
    pub eps: Option<f64>,
    pub count: Option<String>,
    pub total: Option<String>,
    #[serde(serialize_with = "finite_or_null")]
    pub log_rate: f64,
    pub mode: String,
    #[serde(serialize_with = "opt_finite_or_null")]
    pub ci_low: Option<f64>,
    #[serde(serialize_with = "opt_finite_or_null")]
    pub ci_high: Option<f64>,
}

impl TableRow {
    pub fn value(m: usize, window: String, value: f64, mode: &str) -> Self {
        TableRow {
            m,
            window,
            eps: None,
            count: None,
            total: None,
            log_rate: value,
            mode: mode.to_string(),
            ci_low: None,
            ci_high: None,
        }
    }
}

/// A finite table standing in for a limit: rows over a schedule of sizes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyTable {
    pub kind: String,
    /// Distinct sizes in the order computed; strictly increasing.
    pub schedule: Vec<usize>,
    pub rows: Vec<TableRow>,
    #[serde(serialize_with = "opt_finite_or_null")]
    pub summary: Option<f64>,
    pub warnings: Vec<String>,
}

impl EntropyTable {
    pub(crate) fn new(kind: &str) -> Self {
        EntropyTable {
            kind: kind.to_string(),
            schedule: Vec::new(),
            rows: Vec::new(),
            summary: None,
            warnings: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, row: TableRow) -> Result<()> {
        match self.schedule.last() {
            Some(&last) if last == row.m => {}
            Some(&last) if last > row.m => {
                return Err(Error::invalid("schedule", "sizes must be strictly increasing"));
            }
            _ => self.schedule.push(row.m),
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.log_rate).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serialises")
    }

    /// CSV with columns `m, W_spec, eps, count, total, log_rate, mode, ci_low,
    /// ci_high`, plus `residual = log_rate − target` when a target is given.
    pub fn to_csv(&self, target: Option<f64>) -> String {
        let mut out = String::from("m,W_spec,eps,count,total,log_rate,mode,ci_low,ci_high");
        if target.is_some() {
            out.push_str(",residual");
        }
        out.push('\n');
        let num = |x: Option<f64>| match x {
            Some(v) if v.is_finite() => v.to_string(),
            _ => String::new(),
        };
        for r in &self.rows {
            let fields = [
                r.m.to_string(),
                csv_quote(&r.window),
                num(r.eps),
                r.count.clone().unwrap_or_default(),
                r.total.clone().unwrap_or_default(),
                num(Some(r.log_rate)),
                r.mode.clone(),
                num(r.ci_low),
                num(r.ci_high),
            ];
            out.push_str(&fields.join(","));
            if let Some(t) = target {
                out.push(',');
                out.push_str(&num(Some(r.log_rate - t)));
            }
            out.push('\n');
        }
        out
    }
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// CSV rows of a table with a residual column against `target`, when given.
pub fn emit_convergence_data(table: &EntropyTable, target: Option<f64>) -> Result<String> {
    if table.rows.is_empty() {
        return Err(Error::invalid("table", "table is empty"));
    }
    Ok(table.to_csv(target))
}
