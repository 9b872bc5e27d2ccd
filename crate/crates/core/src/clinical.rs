//! Precision–recall validation of difficulty scores against clinical labels.
//!
//! Higher scores predict the difficult (positive) class. Tied scores form a
//! single threshold step, and average precision is the step-wise sum
//! `Σ (R_k − R_{k−1}) · P_k` without interpolation.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::manifest_io::ClinicalReport;
use crate::phoneme::Phoneme;

#[derive(Debug, Clone, PartialEq)]
pub struct PRCurve {
    /// (recall, precision), one point per distinct score, descending threshold.
    pub points: Vec<(f64, f64)>,
    pub thresholds: Vec<f64>,
    pub average_precision: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrEvaluation {
    pub curve: PRCurve,
    /// Labelled phonemes that had no score and were left out.
    pub skipped: usize,
    pub positives: usize,
    pub negatives: usize,
}

/// Builds the PR curve of `scores` against the report's binary labels.
pub fn pr_curve(scores: &BTreeMap<Phoneme, f64>, report: &ClinicalReport) -> Result<PrEvaluation> {
    let mut items: Vec<(f64, bool)> = Vec::with_capacity(report.labels.len());
    let mut skipped = 0;
    for (p, label) in &report.labels {
        match scores.get(p) {
            Some(&s) if s.is_finite() => items.push((s, label.difficult)),
            Some(&s) => return Err(Error::InvalidArgument(format!("score for {p} is {s}"))),
            None => skipped += 1,
        }
    }
    let positives = items.iter().filter(|(_, d)| *d).count();
    let negatives = items.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::DegenerateLabels);
    }
    items.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut points = Vec::new();
    let mut thresholds = Vec::new();
    let mut ap = 0.0;
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut prev_recall = 0.0;
    let mut i = 0;
    while i < items.len() {
        let threshold = items[i].0;
        while i < items.len() && items[i].0 == threshold {
            if items[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let recall = tp as f64 / positives as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        points.push((recall, precision));
        thresholds.push(threshold);
    }
    Ok(PrEvaluation {
        curve: PRCurve {
            points,
            thresholds,
            average_precision: ap.clamp(0.0, 1.0),
        },
        skipped,
        positives,
        negatives,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceComparison {
    pub pretrained: PrEvaluation,
    pub finetuned: PrEvaluation,
    /// AP(pretrained) − AP(finetuned).
    pub ap_difference: f64,
}

pub fn compare_sources(
    scores_pretrained: &BTreeMap<Phoneme, f64>,
    scores_finetuned: &BTreeMap<Phoneme, f64>,
    report: &ClinicalReport,
) -> Result<SourceComparison> {
    let pretrained = pr_curve(scores_pretrained, report)?;
    let finetuned = pr_curve(scores_finetuned, report)?;
    let ap_difference = pretrained.curve.average_precision - finetuned.curve.average_precision;
    Ok(SourceComparison {
        pretrained,
        finetuned,
        ap_difference,
    })
}

/// Spearman rank correlation with average ranks for ties. Returns 0 when
/// either side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "spearman needs paired samples");
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// CSV with columns `threshold,recall,precision`.
pub fn curve_csv(curve: &PRCurve) -> String {
    let mut out = String::from("threshold,recall,precision\n");
    for (t, (r, p)) in curve.thresholds.iter().zip(&curve.points) {
        writeln!(out, "{t},{r},{p}").unwrap();
    }
    out
}

/// Static SVG plot of one or more curves on unit axes.
pub fn curve_svg(curves: &[(&str, &PRCurve)]) -> String {
    const SIZE: f64 = 400.0;
    const PAD: f64 = 40.0;
    const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    let x = |r: f64| PAD + r * SIZE;
    let y = |p: f64| PAD + (1.0 - p) * SIZE;
    let total = SIZE + 2.0 * PAD;
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" viewBox="0 0 {total} {total}">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect x="{PAD}" y="{PAD}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>"#).unwrap();
    for tick in 0..=4 {
        let v = tick as f64 / 4.0;
        writeln!(svg, r#"<text x="{}" y="{}" font-size="10" text-anchor="middle">{v}</text>"#, x(v), PAD + SIZE + 14.0).unwrap();
        writeln!(svg, r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{v}</text>"#, PAD - 4.0, y(v) + 3.0).unwrap();
    }
    writeln!(svg, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">recall</text>"#, PAD + SIZE / 2.0, total - 6.0).unwrap();
    writeln!(
        svg,
        r#"<text x="12" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 12 {})">precision</text>"#,
        PAD + SIZE / 2.0,
        PAD + SIZE / 2.0
    )
    .unwrap();
    for (k, (name, curve)) in curves.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        // step plot starting at recall 0 with the first point's precision
        let mut path = String::new();
        let first_p = curve.points.first().map_or(1.0, |p| p.1);
        write!(path, "M{:.2},{:.2}", x(0.0), y(first_p)).unwrap();
        for &(r, p) in &curve.points {
            write!(path, " H{:.2} V{:.2}", x(r), y(p)).unwrap();
        }
        writeln!(svg, r#"<path d="{path}" fill="none" stroke="{color}" stroke-width="2"/>"#).unwrap();
        writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="11" fill="{color}">{} (AP={:.3})</text>"#,
            PAD + 8.0,
            PAD + 16.0 + 14.0 * k as f64,
            xml_escape(name),
            curve.average_precision
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
