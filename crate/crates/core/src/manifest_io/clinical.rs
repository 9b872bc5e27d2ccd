use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;

use super::{content_lines, read_text};
use crate::error::{Error, Result};
use crate::phoneme::{Inventory, Phoneme};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClinicalLabel {
    pub difficult: bool,
    /// Ordinal 0..=3 when the therapist graded the phoneme.
    pub severity: Option<u8>,
}

/// Per-phoneme difficulty labels from one therapist assessment.
#[derive(Debug, Clone, PartialEq)]
pub struct ClinicalReport {
    pub report_id: String,
    pub date: NaiveDate,
    pub labels: BTreeMap<Phoneme, ClinicalLabel>,
}

impl ClinicalReport {
    pub fn positives(&self) -> impl Iterator<Item = &Phoneme> {
        self.labels.iter().filter(|(_, l)| l.difficult).map(|(p, _)| p)
    }
}

/// Parses a clinical report.
///
/// Header lines are `#report_id=<id>` and `#date=<YYYY-MM-DD>`; other `#`
/// lines are comments. Data lines are `symbol<TAB>difficult{0|1}[<TAB>severity]`.
/// When a severity is present it decides the label: `severity >= threshold`
/// marks the phoneme difficult.
pub fn parse_clinical_report(text: &str, inventory: &Inventory, severity_threshold: u8) -> Result<ClinicalReport> {
    let mut report_id = None;
    let mut date = None;
    let mut labels = BTreeMap::new();
    for (line, raw) in content_lines(text) {
        if let Some(header) = raw.strip_prefix('#') {
            if let Some(v) = header.strip_prefix("report_id=") {
                let v = v.trim();
                if v.is_empty() {
                    return Err(Error::parse(line, "empty report_id"));
                }
                report_id = Some(v.to_string());
            } else if let Some(v) = header.strip_prefix("date=") {
                let d = NaiveDate::parse_from_str(v.trim(), "%Y-%m-%d")
                    .map_err(|e| Error::parse(line, format!("bad date {v:?}: {e}")))?;
                date = Some(d);
            }
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').map(str::trim).collect();
        if !(2..=3).contains(&cols.len()) {
            return Err(Error::parse(line, "expected symbol<TAB>difficult[<TAB>severity]"));
        }
        let phoneme = inventory.get(cols[0]).cloned().ok_or_else(|| Error::UnknownSymbol {
            line,
            symbol: cols[0].to_string(),
        })?;
        let flagged = match cols[1] {
            "0" => false,
            "1" => true,
            other => return Err(Error::parse(line, format!("difficult must be 0 or 1, got {other:?}"))),
        };
        let severity = match cols.get(2) {
            None => None,
            Some(s) => match s.parse::<u8>() {
                Ok(v) if v <= 3 => Some(v),
                _ => return Err(Error::parse(line, format!("severity must be 0..=3, got {s:?}"))),
            },
        };
        let difficult = severity.map_or(flagged, |s| s >= severity_threshold);
        if labels.insert(phoneme, ClinicalLabel { difficult, severity }).is_some() {
            return Err(Error::parse(line, format!("{} labelled twice", cols[0])));
        }
    }
    let report_id = report_id.ok_or_else(|| Error::parse(0, "missing #report_id= header"))?;
    let date = date.ok_or_else(|| Error::parse(0, "missing #date= header"))?;
    let positives = labels.values().filter(|l| l.difficult).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::DegenerateLabels);
    }
    Ok(ClinicalReport { report_id, date, labels })
}

pub fn load_clinical_report(path: impl AsRef<Path>, inventory: &Inventory, severity_threshold: u8) -> Result<ClinicalReport> {
    parse_clinical_report(&read_text(path.as_ref())?, inventory, severity_threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inv() -> Inventory {
        Inventory::parse("r\ns\nt\nk\n").unwrap()
    }

    #[test]
    fn parses_headers_and_labels() {
        let text = "#report_id=logo-2023\n#date=2023-05-02\n# free comment\nr\t1\ns\t1\t2\nt\t0\nk\t1\t0\n";
        let rep = parse_clinical_report(text, &inv(), 1).unwrap();
        assert_eq!(rep.report_id, "logo-2023");
        assert_eq!(rep.date, NaiveDate::from_ymd_opt(2023, 5, 2).unwrap());
        let get = |s: &str| rep.labels[inv().get(s).unwrap()];
        assert!(get("r").difficult);
        assert_eq!(get("s").severity, Some(2));
        assert!(!get("t").difficult);
        // severity 0 overrides the flag column under the default threshold
        assert!(!get("k").difficult);
        assert_eq!(rep.positives().count(), 2);
    }

    #[test]
    fn threshold_binarizes_severity() {
        let text = "#report_id=a\n#date=2024-01-01\nr\t0\t2\ns\t0\t1\nt\t0\n";
        let rep = parse_clinical_report(text, &inv(), 2).unwrap();
        assert_eq!(rep.positives().map(|p| p.as_str()).collect::<Vec<_>>(), ["r"]);
    }

    #[test]
    fn rejects_degenerate_and_malformed() {
        let all_pos = "#report_id=a\n#date=2024-01-01\nr\t1\ns\t1\n";
        assert!(matches!(parse_clinical_report(all_pos, &inv(), 1), Err(Error::DegenerateLabels)));
        let bad_date = "#report_id=a\n#date=2024-13-01\nr\t1\ns\t0\n";
        assert!(matches!(parse_clinical_report(bad_date, &inv(), 1), Err(Error::ParseError { .. })));
        let missing_id = "#date=2024-01-01\nr\t1\ns\t0\n";
        assert!(matches!(parse_clinical_report(missing_id, &inv(), 1), Err(Error::ParseError { .. })));
        let unknown = "#report_id=a\n#date=2024-01-01\nzz\t1\ns\t0\n";
        assert!(matches!(parse_clinical_report(unknown, &inv(), 1), Err(Error::UnknownSymbol { line: 3, .. })));
        let bad_sev = "#report_id=a\n#date=2024-01-01\nr\t1\t7\ns\t0\n";
        assert!(matches!(parse_clinical_report(bad_sev, &inv(), 1), Err(Error::ParseError { line: 3, .. })));
    }
}
