//! Tab-separated outputs: score tables, weight manifests and epoch plans.
//! Floats are written in shortest round-trip form so re-reading a file
//! reproduces the exact values.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::ensemble::{AdaptationState, BackendMeta};
use super::{content_lines, read_text, validate_id};
use crate::error::{Error, Result};
use crate::phdscore::{PhDScoreTable, ScoreRow, ScoreWeights, UtteranceWeight};
use crate::phoneme::Phoneme;
use crate::sampler::{EpochPlan, PlanMode};
use crate::uncertainty::PhonemeStats;

const SCORE_COLUMNS: [&str; 9] = [
    "symbol", "count", "E_p", "H_p", "A_p", "E_norm", "H_norm", "A_norm", "phdscore",
];
const WEIGHT_COLUMNS: [&str; 3] = ["id", "mean_score", "weight"];

pub fn write_score_table(table: &PhDScoreTable) -> String {
    let mut out = String::new();
    writeln!(out, "#weights={}", table.weights).unwrap();
    if let Some(b) = &table.backend {
        writeln!(out, "#model_id={}", b.model_id).unwrap();
        writeln!(out, "#M={}", b.passes).unwrap();
        writeln!(out, "#p_drop={}", b.p_drop).unwrap();
        writeln!(out, "#adaptation_state={}", b.adaptation_state).unwrap();
    }
    out.push_str(&SCORE_COLUMNS.join("\t"));
    out.push('\n');
    for r in table.rows() {
        let s = &r.stats;
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            s.phoneme, s.count_total, s.error_rate, s.mean_entropy, s.mean_agreement, r.e_norm, r.h_norm, r.a_norm, r.phdscore
        )
        .unwrap();
    }
    out
}

fn parse_f64(s: &str, line: usize, what: &str) -> Result<f64> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(line, format!("{what}: not a finite number {s:?}"))),
    }
}

fn parse_unit(s: &str, line: usize, what: &str) -> Result<f64> {
    let v = parse_f64(s, line, what)?;
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::parse(line, format!("{what} {v} outside [0, 1]")));
    }
    Ok(v)
}

fn header_line(raw: &str, expected: &[&str], line: usize) -> Result<()> {
    let cols: Vec<&str> = raw.split('\t').map(str::trim).collect();
    if cols != expected {
        return Err(Error::parse(line, format!("expected column header {:?}", expected.join("\t"))));
    }
    Ok(())
}

/// Parses a score table. Symbols are validated as phonemes but not against
/// an inventory; the table is its own vocabulary.
pub fn parse_score_table(text: &str) -> Result<PhDScoreTable> {
    let mut weights = None;
    let mut model_id = None;
    let mut passes = None;
    let mut p_drop = None;
    let mut state = None;
    let mut saw_header = false;
    let mut rows: Vec<ScoreRow> = Vec::new();
    for (line, raw) in content_lines(text) {
        if let Some(meta) = raw.strip_prefix('#') {
            let Some((key, value)) = meta.split_once('=') else {
                continue;
            };
            let value = value.trim();
            match key.trim() {
                "weights" => weights = Some(ScoreWeights::from_str(value).map_err(|e| Error::parse(line, e.to_string()))?),
                "model_id" => model_id = Some(value.to_string()),
                "M" => {
                    passes = Some(value.parse::<usize>().map_err(|_| Error::parse(line, format!("bad M {value:?}")))?)
                }
                "p_drop" => p_drop = Some(parse_unit(value, line, "p_drop")?),
                "adaptation_state" => {
                    state = Some(
                        AdaptationState::parse(value)
                            .ok_or_else(|| Error::parse(line, format!("bad adaptation_state {value:?}")))?,
                    )
                }
                _ => {}
            }
            continue;
        }
        if !saw_header {
            header_line(raw, &SCORE_COLUMNS, line)?;
            saw_header = true;
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() != SCORE_COLUMNS.len() {
            return Err(Error::parse(line, format!("expected {} columns", SCORE_COLUMNS.len())));
        }
        let phoneme = Phoneme::new(cols[0].trim()).map_err(|e| Error::parse(line, e.to_string()))?;
        let count: usize = cols[1]
            .trim()
            .parse()
            .map_err(|_| Error::parse(line, format!("bad count {:?}", cols[1])))?;
        if count == 0 {
            return Err(Error::parse(line, "count must be positive"));
        }
        let error_rate = parse_unit(cols[2], line, "E_p")?;
        let mean_entropy = parse_f64(cols[3], line, "H_p")?;
        if mean_entropy < 0.0 {
            return Err(Error::parse(line, "H_p must be non-negative"));
        }
        let row = ScoreRow {
            stats: PhonemeStats {
                phoneme,
                count_total: count,
                count_errors_maj: (error_rate * count as f64).round() as usize,
                error_rate,
                mean_entropy,
                mean_agreement: parse_unit(cols[4], line, "A_p")?,
            },
            e_norm: parse_unit(cols[5], line, "E_norm")?,
            h_norm: parse_unit(cols[6], line, "H_norm")?,
            a_norm: parse_unit(cols[7], line, "A_norm")?,
            phdscore: parse_unit(cols[8], line, "phdscore")?,
        };
        if rows.iter().any(|r| r.stats.phoneme == row.stats.phoneme) {
            return Err(Error::parse(line, format!("{} listed twice", row.stats.phoneme)));
        }
        rows.push(row);
    }
    if !saw_header {
        return Err(Error::parse(0, "missing column header"));
    }
    let weights = weights.ok_or_else(|| Error::parse(0, "missing #weights= header"))?;
    let backend = match (model_id, passes, p_drop, state) {
        (None, None, None, None) => None,
        (Some(model_id), Some(passes), Some(p_drop), Some(adaptation_state)) => {
            let b = BackendMeta { model_id, passes, p_drop, adaptation_state };
            b.validate(0)?;
            Some(b)
        }
        _ => return Err(Error::parse(0, "incomplete backend metadata headers")),
    };
    Ok(PhDScoreTable::from_rows(rows, weights, backend))
}

pub fn load_score_table(path: impl AsRef<Path>) -> Result<PhDScoreTable> {
    parse_score_table(&read_text(path.as_ref())?)
}

pub fn write_weight_manifest(weights: &[UtteranceWeight]) -> String {
    let mut out = WEIGHT_COLUMNS.join("\t");
    out.push('\n');
    for w in weights {
        writeln!(out, "{}\t{}\t{}", w.utterance_id, w.mean_score, w.weight).unwrap();
    }
    out
}

pub fn parse_weight_manifest(text: &str) -> Result<Vec<UtteranceWeight>> {
    let mut lines = content_lines(text).filter(|(_, l)| !l.starts_with('#'));
    match lines.next() {
        Some((line, raw)) => header_line(raw, &WEIGHT_COLUMNS, line)?,
        None => return Err(Error::parse(0, "missing column header")),
    }
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for (line, raw) in lines {
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::parse(line, "expected id<TAB>mean_score<TAB>weight"));
        }
        validate_id(cols[0], line)?;
        if !seen.insert(cols[0]) {
            return Err(Error::DuplicateId(cols[0].to_string()));
        }
        out.push(UtteranceWeight {
            utterance_id: cols[0].to_string(),
            mean_score: parse_f64(cols[1], line, "mean_score")?,
            weight: parse_f64(cols[2], line, "weight")?,
        });
    }
    Ok(out)
}

pub fn load_weight_manifest(path: impl AsRef<Path>) -> Result<Vec<UtteranceWeight>> {
    parse_weight_manifest(&read_text(path.as_ref())?)
}

pub fn write_epoch_plan(plan: &EpochPlan) -> String {
    let mut out = String::new();
    writeln!(out, "#seed={}", plan.seed).unwrap();
    match plan.mode {
        PlanMode::Replacement { n } => {
            out.push_str("#mode=replacement\n");
            writeln!(out, "#n={n}").unwrap();
        }
        PlanMode::Expansion { factor } => {
            out.push_str("#mode=expansion\n");
            writeln!(out, "#factor={factor}").unwrap();
        }
    }
    for id in &plan.draws {
        out.push_str(id);
        out.push('\n');
    }
    out
}

pub fn parse_epoch_plan(text: &str) -> Result<EpochPlan> {
    let mut seed = None;
    let mut mode = None;
    let mut n = None;
    let mut factor = None;
    let mut draws = Vec::new();
    for (line, raw) in content_lines(text) {
        if let Some(meta) = raw.strip_prefix('#') {
            let Some((key, value)) = meta.split_once('=') else {
                return Err(Error::parse(line, "expected #key=value"));
            };
            let value = value.trim();
            match key {
                "seed" => seed = Some(value.parse::<u64>().map_err(|_| Error::parse(line, "bad seed"))?),
                "mode" => mode = Some(value.to_string()),
                "n" => n = Some(value.parse::<usize>().map_err(|_| Error::parse(line, "bad n"))?),
                "factor" => factor = Some(parse_f64(value, line, "factor")?),
                _ => return Err(Error::parse(line, format!("unknown header {key:?}"))),
            }
            continue;
        }
        validate_id(raw, line)?;
        draws.push(raw.to_string());
    }
    let seed = seed.ok_or_else(|| Error::parse(0, "missing #seed="))?;
    let mode = match (mode.as_deref(), n, factor) {
        (Some("replacement"), Some(n), None) => {
            if draws.len() != n {
                return Err(Error::parse(0, format!("plan declares n={n} but lists {} draws", draws.len())));
            }
            PlanMode::Replacement { n }
        }
        (Some("expansion"), None, Some(factor)) => PlanMode::Expansion { factor },
        _ => return Err(Error::parse(0, "need #mode=replacement with #n= or #mode=expansion with #factor=")),
    };
    Ok(EpochPlan { draws, seed, mode })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phdscore::{compose, normalize_components};

    fn sample_table() -> PhDScoreTable {
        let stats = vec![
            PhonemeStats {
                phoneme: Phoneme::new("r").unwrap(),
                count_total: 10,
                count_errors_maj: 3,
                error_rate: 0.3,
                mean_entropy: 0.9,
                mean_agreement: 0.55,
            },
            PhonemeStats {
                phoneme: Phoneme::new("s").unwrap(),
                count_total: 7,
                count_errors_maj: 0,
                error_rate: 0.0,
                mean_entropy: 0.1,
                mean_agreement: 0.97,
            },
        ];
        let mut t = compose(normalize_components(&stats).unwrap(), ScoreWeights::default());
        t.backend = Some(BackendMeta::new("sim", AdaptationState::Simulated));
        t
    }

    #[test]
    fn score_table_round_trip() {
        let t = sample_table();
        let text = write_score_table(&t);
        assert!(text.starts_with("#weights=0.4,0.2,0.4\n#model_id=sim\n#M=20\n#p_drop=0.01\n"));
        assert_eq!(parse_score_table(&text).unwrap(), t);
    }

    #[test]
    fn score_table_errors() {
        assert!(parse_score_table("#weights=0.4,0.2,0.4\n").is_err());
        let bad = "#weights=0.4,0.2,0.4\nsymbol\tcount\tE_p\tH_p\tA_p\tE_norm\tH_norm\tA_norm\tphdscore\nr\t1\t2\t0\t0\t0\t0\t0\t0\n";
        assert!(matches!(parse_score_table(bad), Err(Error::ParseError { line: 3, .. })));
        let partial = "#weights=0.4,0.2,0.4\n#model_id=x\nsymbol\tcount\tE_p\tH_p\tA_p\tE_norm\tH_norm\tA_norm\tphdscore\n";
        assert!(parse_score_table(partial).is_err());
    }

    #[test]
    fn weight_manifest_round_trip() {
        let w = vec![
            UtteranceWeight { utterance_id: "u1".into(), mean_score: 0.25, weight: 1.0 },
            UtteranceWeight { utterance_id: "u2".into(), mean_score: 0.75, weight: 5.0 },
        ];
        assert_eq!(parse_weight_manifest(&write_weight_manifest(&w)).unwrap(), w);
        assert!(parse_weight_manifest("id\tmean_score\tweight\nu1\t0.1\t1\nu1\t0.2\t2\n").is_err());
        assert!(parse_weight_manifest("").is_err());
    }

    #[test]
    fn epoch_plan_round_trip() {
        let plan = EpochPlan {
            draws: vec!["b".into(), "a".into(), "b".into()],
            seed: 7,
            mode: PlanMode::Replacement { n: 3 },
        };
        let text = write_epoch_plan(&plan);
        assert_eq!(text, "#seed=7\n#mode=replacement\n#n=3\nb\na\nb\n");
        assert_eq!(parse_epoch_plan(&text).unwrap(), plan);
        assert!(parse_epoch_plan("#seed=7\n#mode=replacement\n#n=4\nb\n").is_err());
    }
}
