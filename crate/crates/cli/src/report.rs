//! Aggregation of certificate streams into report tables.
//!
//! Groups lines by (model, check, p); emits fixed CSV columns
//! model,check,p,q,samples,max_ratio,min_margin,pass sorted
//! lexicographically. Malformed lines are counted and reported on stderr,
//! never silently dropped.

use std::collections::BTreeMap;

use crate::runner::{fmt_f64, CertLine};

#[derive(Clone, Debug)]
pub struct ReportRow {
    pub model: String,
    pub check: String,
    pub p: String,
    pub q: String,
    pub samples: usize,
    pub max_ratio: f64,
    pub min_margin: f64,
    pub pass: bool,
}

pub struct Report {
    pub rows: Vec<ReportRow>,
    pub malformed: usize,
    pub total: usize,
}

fn fmt_key(x: Option<f64>) -> String {
    match x {
        Some(v) => format!("{v}"),
        None => String::new(),
    }
}

pub fn aggregate(stream: &str) -> Report {
    let mut groups: BTreeMap<(String, String, String), Vec<CertLine>> = BTreeMap::new();
    let mut malformed = 0usize;
    let mut total = 0usize;
    for line in stream.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        total += 1;
        match serde_json::from_str::<CertLine>(trimmed) {
            Ok(cert) => {
                let key = (cert.model.clone(), cert.name.clone(), fmt_key(cert.p));
                groups.entry(key).or_default().push(cert);
            }
            Err(_) => malformed += 1,
        }
    }
    let mut rows = Vec::with_capacity(groups.len());
    for ((model, check, p), certs) in groups {
        let samples = certs.len();
        let max_ratio = certs
            .iter()
            .map(|c| c.ratio)
            .fold(f64::NEG_INFINITY, f64::max);
        // relative margin 1 - lhs/rhs; worst case over the group
        let min_margin = certs
            .iter()
            .map(|c| {
                if c.rhs != 0.0 {
                    1.0 - c.lhs / c.rhs
                } else {
                    0.0
                }
            })
            .fold(f64::INFINITY, f64::min);
        let pass = certs.iter().all(|c| c.pass);
        let q = fmt_key(certs.first().and_then(|c| c.q));
        rows.push(ReportRow {
            model,
            check,
            p,
            q,
            samples,
            max_ratio,
            min_margin,
            pass,
        });
    }
    Report {
        rows,
        malformed,
        total,
    }
}

impl Report {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,check,p,q,samples,max_ratio,min_margin,pass\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.model,
                r.check,
                r.p,
                r.q,
                r.samples,
                fmt_f64(r.max_ratio),
                fmt_f64(r.min_margin),
                r.pass
            ));
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<40} {:<28} {:>5} {:>5} {:>8} {:>13} {:>13} {:>5}\n",
            "model", "check", "p", "q", "samples", "max_ratio", "min_margin", "pass"
        ));
        for r in &self.rows {
            out.push_str(&format!(
                "{:<40} {:<28} {:>5} {:>5} {:>8} {:>13.6e} {:>13.6e} {:>5}\n",
                r.model, r.check, r.p, r.q, r.samples, r.max_ratio, r.min_margin, r.pass
            ));
        }
        out
    }
}
