//! Metrics over an outcome store and its manifest.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::harness::{BatchStatus, RunManifest, StoreRow};
use crate::taxonomy::{ErrorCategory, Pattern};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalyticsError {
    #[error("error rate undefined: no certificates were parsed (N = 0)")]
    UndefinedRate,
    #[error("error count {n_e} exceeds total {n}")]
    CountExceedsTotal { n_e: u64, n: u64 },
    #[error("parser {0} is not in the manifest")]
    UnknownParser(String),
    #[error("batch {0} is not in the manifest")]
    UnknownBatch(String),
    #[error("parser {0} has no batch timings")]
    NoBatches(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

type Result<T> = std::result::Result<T, AnalyticsError>;

/// `num / den` as a percentage rounded half up to `decimals` places,
/// computed exactly.
pub fn format_percent(num: u64, den: u64, decimals: u32) -> String {
    if den == 0 {
        return "n/a".to_string();
    }
    let scale = 10u128.pow(decimals);
    let scaled = num as u128 * 100 * scale;
    let mut q = scaled / den as u128;
    if 2 * (scaled % den as u128) >= den as u128 {
        q += 1;
    }
    let (int, frac) = (q / scale, q % scale);
    if decimals == 0 {
        format!("{int}%")
    } else {
        format!("{int}.{frac:0width$}%", width = decimals as usize)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRate {
    pub parser_id: String,
    pub n_e: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub r_e: f64,
}

impl ErrorRate {
    pub fn percent(&self, decimals: u32) -> String {
        format_percent(self.n_e, self.n, decimals)
    }
}

/// `r_e = n_e / N`.
pub fn error_rate(n_e: u64, n: u64) -> Result<ErrorRate> {
    if n == 0 {
        return Err(AnalyticsError::UndefinedRate);
    }
    if n_e > n {
        return Err(AnalyticsError::CountExceedsTotal { n_e, n });
    }
    Ok(ErrorRate {
        parser_id: String::new(),
        n_e,
        n,
        r_e: n_e as f64 / n as f64,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryDistribution {
    pub parser_id: String,
    /// All seven categories, zero when never observed.
    pub counts: BTreeMap<ErrorCategory, u64>,
    pub n_e: u64,
    /// `counts / n_e`; absent when `n_e = 0`.
    pub shares: Option<BTreeMap<ErrorCategory, f64>>,
}

impl CategoryDistribution {
    pub fn from_counts(parser_id: &str, observed: &BTreeMap<ErrorCategory, u64>) -> Self {
        let counts: BTreeMap<_, _> = ErrorCategory::ALL
            .iter()
            .map(|c| (*c, observed.get(c).copied().unwrap_or(0)))
            .collect();
        let n_e = counts.values().sum();
        let shares = (n_e > 0).then(|| {
            counts
                .iter()
                .map(|(c, k)| (*c, *k as f64 / n_e as f64))
                .collect()
        });
        CategoryDistribution {
            parser_id: parser_id.to_string(),
            counts,
            n_e,
            shares,
        }
    }

    pub fn sum(&self) -> u64 {
        self.counts.values().sum()
    }
}

fn require_parser(manifest: &RunManifest, parser_id: &str) -> Result<()> {
    if manifest.has_parser(parser_id) {
        Ok(())
    } else {
        Err(AnalyticsError::UnknownParser(parser_id.to_string()))
    }
}

pub fn category_distribution(
    store: &[StoreRow],
    manifest: &RunManifest,
    parser_id: &str,
) -> Result<CategoryDistribution> {
    require_parser(manifest, parser_id)?;
    let mut counts = BTreeMap::new();
    for row in store.iter().filter(|r| r.parser_id == parser_id) {
        *counts.entry(row.category).or_insert(0) += 1;
    }
    Ok(CategoryDistribution::from_counts(parser_id, &counts))
}

/// Set comparison between two parsers' error fingerprints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Overlap {
    pub parser_a: String,
    pub parser_b: String,
    /// `None` compares errors of any category.
    pub category: Option<ErrorCategory>,
    pub size_a: u64,
    pub size_b: u64,
    pub intersection: u64,
    pub union: u64,
    /// `|A ∩ B| / |A|`; absent when A is empty.
    pub match_fraction_a: Option<f64>,
    pub match_fraction_b: Option<f64>,
    /// `|A ∩ B| / |A ∪ B|`; absent when both are empty.
    pub jaccard: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Overlap quantities from set sizes.
pub fn overlap_counts(size_a: u64, size_b: u64, intersection: u64) -> (Option<f64>, Option<f64>, Option<f64>) {
    let union = size_a + size_b - intersection;
    (
        ratio(intersection, size_a),
        ratio(intersection, size_b),
        ratio(intersection, union),
    )
}

pub fn overlap_sets<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> (Option<f64>, Option<f64>, Option<f64>) {
    let i = a.intersection(b).count() as u64;
    overlap_counts(a.len() as u64, b.len() as u64, i)
}

fn error_set<'a>(store: &'a [StoreRow], parser_id: &str, category: Option<ErrorCategory>) -> BTreeSet<&'a str> {
    store
        .iter()
        .filter(|r| r.parser_id == parser_id && category.is_none_or(|c| r.category == c))
        .map(|r| r.fingerprint.as_str())
        .collect()
}

pub fn overlap(
    store: &[StoreRow],
    manifest: &RunManifest,
    parser_a: &str,
    parser_b: &str,
    category: Option<ErrorCategory>,
) -> Result<Overlap> {
    require_parser(manifest, parser_a)?;
    require_parser(manifest, parser_b)?;
    let a = error_set(store, parser_a, category);
    let b = error_set(store, parser_b, category);
    let intersection = a.intersection(&b).count() as u64;
    let (size_a, size_b) = (a.len() as u64, b.len() as u64);
    let (match_fraction_a, match_fraction_b, jaccard) = overlap_counts(size_a, size_b, intersection);
    Ok(Overlap {
        parser_a: parser_a.to_string(),
        parser_b: parser_b.to_string(),
        category,
        size_a,
        size_b,
        intersection,
        union: size_a + size_b - intersection,
        match_fraction_a,
        match_fraction_b,
        jaccard,
    })
}

/// Selects reference-parser error rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Predicate {
    AnyError,
    Category(ErrorCategory),
    /// Built-in check id, the text before the first `:`.
    CheckId(String),
    /// Table-style pattern over the whole error string.
    Error(Pattern),
}

impl Predicate {
    pub fn matches(&self, row: &StoreRow) -> bool {
        match self {
            Predicate::AnyError => true,
            Predicate::Category(c) => row.category == *c,
            Predicate::CheckId(id) => row
                .error_string
                .split_once(':')
                .is_some_and(|(head, _)| head == id),
            Predicate::Error(p) => p.matches(&row.error_string),
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::AnyError => f.write_str("any"),
            Predicate::Category(c) => write!(f, "category={c}"),
            Predicate::CheckId(id) => write!(f, "check={id}"),
            Predicate::Error(Pattern::Exact(s)) => write!(f, "error={s}"),
            Predicate::Error(Pattern::Prefix(s)) => write!(f, "error={s}*"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("predicate must be any, category=<CATEGORY>, check=<id> or error=<pattern>, got {0:?}")]
pub struct PredicateParseError(pub String);

impl FromStr for Predicate {
    type Err = PredicateParseError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let bad = || PredicateParseError(s.to_string());
        if s == "any" {
            return Ok(Predicate::AnyError);
        }
        match s.split_once('=') {
            Some(("category", c)) => c.parse().map(Predicate::Category).map_err(|_| bad()),
            Some(("check", id)) if !id.is_empty() => Ok(Predicate::CheckId(id.to_string())),
            Some(("error", p)) if !p.is_empty() => Ok(Predicate::Error(Pattern::parse(p))),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscrepancyTable {
    pub reference: String,
    pub predicate: String,
    /// Fingerprints the predicate selected.
    pub selected: u64,
    /// Per parser, in manifest order: how many selected fingerprints it
    /// also rejected, with any category.
    pub counts: Vec<(String, u64)>,
}

pub fn discrepancy_table(
    store: &[StoreRow],
    manifest: &RunManifest,
    reference: &str,
    predicate: &Predicate,
) -> Result<DiscrepancyTable> {
    require_parser(manifest, reference)?;
    let selected: BTreeSet<&str> = store
        .iter()
        .filter(|r| r.parser_id == reference && predicate.matches(r))
        .map(|r| r.fingerprint.as_str())
        .collect();
    let counts = manifest
        .parsers
        .iter()
        .map(|p| {
            let rejected = error_set(store, &p.parser_id, None);
            let n = selected.iter().filter(|fp| rejected.contains(*fp)).count() as u64;
            (p.parser_id.clone(), n)
        })
        .collect();
    Ok(DiscrepancyTable {
        reference: reference.to_string(),
        predicate: predicate.to_string(),
        selected: selected.len() as u64,
        counts,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "category", rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject(ErrorCategory),
    /// The parser's batch failed; nothing is known.
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscrepancyRow {
    pub fingerprint: String,
    pub verdicts: BTreeMap<String, Verdict>,
    pub disagreement: bool,
}

/// Per-fingerprint verdicts for every certificate some parser rejected.
pub fn discrepancy_rows(store: &[StoreRow], manifest: &RunManifest) -> Vec<DiscrepancyRow> {
    let mut by_fp: BTreeMap<&str, (BTreeSet<&str>, BTreeMap<&str, ErrorCategory>)> = BTreeMap::new();
    for row in store {
        let entry = by_fp.entry(&row.fingerprint).or_default();
        entry.0.insert(&row.batch_id);
        entry.1.entry(&row.parser_id).or_insert(row.category);
    }
    let failed: BTreeSet<(&str, &str)> = manifest
        .failures()
        .map(|r| (r.parser_id.as_str(), r.batch_id.as_str()))
        .collect();
    by_fp
        .into_iter()
        .map(|(fp, (batches, rejected))| {
            let verdicts: BTreeMap<String, Verdict> = manifest
                .parsers
                .iter()
                .map(|p| {
                    let id = p.parser_id.as_str();
                    let v = match rejected.get(id) {
                        Some(c) => Verdict::Reject(*c),
                        None if batches.iter().any(|b| failed.contains(&(id, *b))) => Verdict::Unknown,
                        None => Verdict::Accept,
                    };
                    (p.parser_id.clone(), v)
                })
                .collect();
            let known: BTreeSet<bool> = verdicts
                .values()
                .filter(|v| **v != Verdict::Unknown)
                .map(|v| matches!(v, Verdict::Reject(_)))
                .collect();
            DiscrepancyRow {
                fingerprint: fp.to_string(),
                disagreement: known.len() > 1,
                verdicts,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchTiming {
    pub parser_id: String,
    pub batch_id: String,
    pub cert_count: u64,
    pub wall_ns: u64,
    pub per_cert_ns: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingStats {
    pub parser_id: String,
    pub min_ns: f64,
    pub median_ns: f64,
    pub max_ns: f64,
    pub mean_ns: f64,
    /// Per-batch values for external plotting.
    pub batches: Vec<BatchTiming>,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Summary of per-certificate durations, one sample per completed batch.
pub fn timing_stats(manifest: &RunManifest, parser_id: &str) -> Result<TimingStats> {
    require_parser(manifest, parser_id)?;
    let batches: Vec<BatchTiming> = manifest
        .batch_runs
        .iter()
        .filter(|r| r.parser_id == parser_id && r.status == BatchStatus::Ok && r.cert_count > 0)
        .map(|r| BatchTiming {
            parser_id: r.parser_id.clone(),
            batch_id: r.batch_id.clone(),
            cert_count: r.cert_count,
            wall_ns: r.wall_ns,
            per_cert_ns: r.wall_ns as f64 / r.cert_count as f64,
        })
        .collect();
    if batches.is_empty() {
        return Err(AnalyticsError::NoBatches(parser_id.to_string()));
    }
    let mut values: Vec<f64> = batches.iter().map(|b| b.per_cert_ns).collect();
    values.sort_by(f64::total_cmp);
    Ok(TimingStats {
        parser_id: parser_id.to_string(),
        min_ns: values[0],
        median_ns: median(&values),
        max_ns: values[values.len() - 1],
        mean_ns: values.iter().sum::<f64>() / values.len() as f64,
        batches,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    #[serde(rename = "N")]
    pub n: u64,
    pub rates: Vec<ErrorRate>,
    pub distributions: Vec<CategoryDistribution>,
    pub overlaps: Vec<Overlap>,
    pub discrepancies: Vec<DiscrepancyTable>,
    pub timings: Vec<TimingStats>,
}

#[derive(Clone, Debug, Default)]
pub struct ReportOptions {
    /// Explicit discrepancy tables. When empty, one table per parser and
    /// observed category is produced.
    pub discrepancies: Vec<(String, Predicate)>,
}

/// Checks that every row belongs to the manifest and that no parser has
/// more rows than certificates it evaluated.
pub fn check_consistency(store: &[StoreRow], manifest: &RunManifest) -> Result<()> {
    if manifest.total() == 0 {
        return Err(AnalyticsError::UndefinedRate);
    }
    for row in store {
        require_parser(manifest, &row.parser_id)?;
        if !manifest.has_batch(&row.batch_id) {
            return Err(AnalyticsError::UnknownBatch(row.batch_id.clone()));
        }
    }
    for p in &manifest.parsers {
        let rows = store.iter().filter(|r| r.parser_id == p.parser_id).count() as u64;
        let n = manifest.evaluated(&p.parser_id);
        if rows > n {
            return Err(AnalyticsError::Invariant(format!(
                "{} has {rows} error rows but evaluated only {n} certificates",
                p.parser_id
            )));
        }
    }
    Ok(())
}

pub fn build_report(store: &[StoreRow], manifest: &RunManifest, opts: &ReportOptions) -> Result<Report> {
    check_consistency(store, manifest)?;
    let ids: Vec<&str> = manifest.parsers.iter().map(|p| p.parser_id.as_str()).collect();

    let mut distributions = Vec::new();
    let mut rates = Vec::new();
    for id in &ids {
        let d = category_distribution(store, manifest, id)?;
        let rows = store.iter().filter(|r| r.parser_id == *id).count() as u64;
        if d.sum() != rows {
            return Err(AnalyticsError::Invariant(format!(
                "{id}: category counts sum to {} but the store has {rows} rows",
                d.sum()
            )));
        }
        let n = manifest.evaluated(id);
        let mut rate = match error_rate(d.n_e, n) {
            Ok(r) => r,
            Err(AnalyticsError::UndefinedRate) => ErrorRate {
                parser_id: String::new(),
                n_e: 0,
                n: 0,
                r_e: 0.0,
            },
            Err(e) => return Err(e),
        };
        rate.parser_id = id.to_string();
        if !(0.0..=1.0).contains(&rate.r_e) {
            return Err(AnalyticsError::Invariant(format!("{id}: rate {} outside [0, 1]", rate.r_e)));
        }
        rates.push(rate);
        distributions.push(d);
    }
    rates.sort_by(|a, b| b.r_e.total_cmp(&a.r_e).then_with(|| a.parser_id.cmp(&b.parser_id)));

    let mut overlaps = Vec::new();
    for (i, a) in ids.iter().enumerate() {
        for b in &ids[i + 1..] {
            overlaps.push(overlap(store, manifest, a, b, None)?);
            for c in ErrorCategory::ALL {
                let o = overlap(store, manifest, a, b, Some(c))?;
                if o.union > 0 {
                    overlaps.push(o);
                }
            }
        }
    }

    let specs: Vec<(String, Predicate)> = if opts.discrepancies.is_empty() {
        distributions
            .iter()
            .flat_map(|d| {
                d.counts
                    .iter()
                    .filter(|(_, k)| **k > 0)
                    .map(|(c, _)| (d.parser_id.clone(), Predicate::Category(*c)))
            })
            .collect()
    } else {
        opts.discrepancies.clone()
    };
    let discrepancies = specs
        .iter()
        .map(|(reference, predicate)| {
            let t = discrepancy_table(store, manifest, reference, predicate)?;
            let own = t.counts.iter().find(|(p, _)| p == reference).map_or(0, |(_, n)| *n);
            if own != t.selected {
                return Err(AnalyticsError::Invariant(format!(
                    "reference {reference} count {own} differs from selection {}",
                    t.selected
                )));
            }
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;

    let timings = ids
        .iter()
        .filter_map(|id| timing_stats(manifest, id).ok())
        .collect();

    Ok(Report {
        n: manifest.total(),
        rates,
        distributions,
        overlaps,
        discrepancies,
        timings,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Text,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "text" => Ok(ReportFormat::Text),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(format!("unknown report format {s:?} (json, text or csv)")),
        }
    }
}

pub fn render(report: &Report, format: ReportFormat, decimals: u32) -> String {
    match format {
        ReportFormat::Json => render_json(report),
        ReportFormat::Text => render_text(report, decimals),
        ReportFormat::Csv => render_csv(report),
    }
}

pub fn render_json(report: &Report) -> String {
    serde_json::to_string_pretty(report).expect("report serializes") + "\n"
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("n/a".to_string(), |v| format!("{v:.4}"))
}

fn fmt_ns(ns: f64) -> String {
    if ns >= 1e6 {
        format!("{:.2} ms", ns / 1e6)
    } else if ns >= 1e3 {
        format!("{:.2} us", ns / 1e3)
    } else {
        format!("{ns:.0} ns")
    }
}

pub fn render_text(report: &Report, decimals: u32) -> String {
    let mut s = String::new();
    let w = report
        .rates
        .iter()
        .map(|r| r.parser_id.len())
        .max()
        .unwrap_or(6)
        .max(6);

    let _ = writeln!(s, "Error rates (N = {})", report.n);
    let _ = writeln!(s, "{:<w$}  {:>12}  {:>10}", "parser", "errors", "rate");
    for r in &report.rates {
        let _ = writeln!(s, "{:<w$}  {:>12}  {:>10}", r.parser_id, r.n_e, r.percent(decimals));
    }

    let _ = writeln!(s, "\nError categories");
    let _ = write!(s, "{:<w$}", "parser");
    for c in ErrorCategory::ALL {
        let _ = write!(s, "  {:>18}", c.as_str());
    }
    let _ = writeln!(s, "  {:>10}", "Sum");
    for d in &report.distributions {
        let _ = write!(s, "{:<w$}", d.parser_id);
        for c in ErrorCategory::ALL {
            let k = d.counts[&c];
            let cell = if k == 0 { "n.a.".to_string() } else { k.to_string() };
            let _ = write!(s, "  {cell:>18}");
        }
        let _ = writeln!(s, "  {:>10}", d.sum());
    }

    if !report.overlaps.is_empty() {
        let _ = writeln!(s, "\nOverlaps");
        for o in &report.overlaps {
            let cat = o.category.map_or("any", |c| c.as_str());
            let _ = writeln!(
                s,
                "{} / {} [{cat}]: |A|={} |B|={} |A∩B|={} A-match={} B-match={} jaccard={}",
                o.parser_a,
                o.parser_b,
                o.size_a,
                o.size_b,
                o.intersection,
                fmt_opt(o.match_fraction_a),
                fmt_opt(o.match_fraction_b),
                fmt_opt(o.jaccard)
            );
        }
    }

    for t in &report.discrepancies {
        let _ = writeln!(s, "\nDiscrepancies: reference {} where {} ({} certificates)", t.reference, t.predicate, t.selected);
        for (p, n) in &t.counts {
            let _ = writeln!(s, "  {p:<w$}  {n:>10}");
        }
    }

    if !report.timings.is_empty() {
        let _ = writeln!(s, "\nPer-certificate duration by batch");
        for t in &report.timings {
            let _ = writeln!(
                s,
                "{:<w$}  min {}  median {}  max {}  ({} batches)",
                t.parser_id,
                fmt_ns(t.min_ns),
                fmt_ns(t.median_ns),
                fmt_ns(t.max_ns),
                t.batches.len()
            );
        }
    }
    s
}

/// One row per parser: totals, rate and category counts.
pub fn render_csv(report: &Report) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["parser_id".to_string(), "N".into(), "n_e".into(), "r_e".into()];
    header.extend(ErrorCategory::ALL.iter().map(|c| c.as_str().to_string()));
    header.push("Sum".into());
    let _ = w.write_record(&header);
    for r in &report.rates {
        let Some(d) = report.distributions.iter().find(|d| d.parser_id == r.parser_id) else {
            continue;
        };
        let mut rec = vec![r.parser_id.clone(), r.n.to_string(), r.n_e.to_string(), r.r_e.to_string()];
        rec.extend(ErrorCategory::ALL.iter().map(|c| d.counts[c].to_string()));
        rec.push(d.sum().to_string());
        let _ = w.write_record(&rec);
    }
    String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
}
