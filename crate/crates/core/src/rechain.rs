//! Re-chaining of isolated word recordings into sentence-level utterances.
//!
//! Words are joined with a fixed run of zero-valued samples between them.
//! There is no cross-fading or level normalization, so the output length
//! is exactly `Σ source frames + gap_frames · (words − 1)`.

use std::collections::BTreeMap;
use std::io::{Cursor, Read};
use std::path::{Path, PathBuf};

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{Error, Result};
use crate::manifest_io::{content_lines, read_text, write_atomic, Split, UtteranceRecord};

pub const DEFAULT_GAP_MS: u32 = 100;

/// Interleaved 16-bit PCM audio.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcmAudio {
    pub sample_rate: u32,
    pub channels: u16,
    pub samples: Vec<i16>,
}

impl PcmAudio {
    pub fn frames(&self) -> usize {
        self.samples.len() / usize::from(self.channels.max(1))
    }

    fn spec(&self) -> WavSpec {
        WavSpec {
            channels: self.channels,
            sample_rate: self.sample_rate,
            bits_per_sample: 16,
            sample_format: SampleFormat::Int,
        }
    }
}

/// Decodes a RIFF/WAVE stream, accepting only 16-bit integer PCM.
pub fn decode_pcm16<R: Read>(reader: R, origin: &Path) -> Result<PcmAudio> {
    let wav_err = |source| Error::Wav { path: origin.to_path_buf(), source };
    let mut reader = WavReader::new(reader).map_err(wav_err)?;
    let spec = reader.spec();
    if spec.sample_format != SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::UnsupportedEncoding(format!(
            "{}: {:?} {}-bit, expected 16-bit integer PCM",
            origin.display(),
            spec.sample_format,
            spec.bits_per_sample
        )));
    }
    if spec.channels == 0 || spec.sample_rate == 0 {
        return Err(Error::UnsupportedEncoding(format!("{}: zero channels or sample rate", origin.display())));
    }
    let samples = reader.samples::<i16>().collect::<std::result::Result<Vec<_>, _>>().map_err(wav_err)?;
    Ok(PcmAudio {
        sample_rate: spec.sample_rate,
        channels: spec.channels,
        samples,
    })
}

pub fn read_pcm16(path: &Path) -> Result<PcmAudio> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    decode_pcm16(std::io::BufReader::new(file), path)
}

pub fn encode_pcm16(audio: &PcmAudio) -> Result<Vec<u8>> {
    let mut buf = Cursor::new(Vec::new());
    let to_err = |source| Error::Wav { path: PathBuf::from("<output>"), source };
    let mut writer = WavWriter::new(&mut buf, audio.spec()).map_err(to_err)?;
    {
        let mut w = writer.get_i16_writer(audio.samples.len() as u32);
        for &s in &audio.samples {
            w.write_sample(s);
        }
        w.flush().map_err(to_err)?;
    }
    writer.finalize().map_err(to_err)?;
    Ok(buf.into_inner())
}

pub fn write_pcm16(path: &Path, audio: &PcmAudio) -> Result<()> {
    write_atomic(path, &encode_pcm16(audio)?)
}

/// Silence frames for `gap_ms` at `sample_rate`, rounded to the nearest frame.
pub fn gap_frames(sample_rate: u32, gap_ms: u32) -> usize {
    ((u64::from(sample_rate) * u64::from(gap_ms) + 500) / 1000) as usize
}

/// Joins `parts` with `gap_ms` of silence between consecutive parts.
pub fn concat_samples(parts: &[PcmAudio], gap_ms: u32) -> Result<PcmAudio> {
    let first = parts
        .first()
        .ok_or_else(|| Error::InvalidArgument("nothing to concatenate".into()))?;
    for p in &parts[1..] {
        if p.sample_rate != first.sample_rate {
            return Err(Error::FormatMismatch(format!("sample rates {} and {}", first.sample_rate, p.sample_rate)));
        }
        if p.channels != first.channels {
            return Err(Error::FormatMismatch(format!("channel counts {} and {}", first.channels, p.channels)));
        }
    }
    let gap = gap_frames(first.sample_rate, gap_ms) * usize::from(first.channels);
    let total = parts.iter().map(|p| p.samples.len()).sum::<usize>() + gap * (parts.len() - 1);
    let mut samples = Vec::with_capacity(total);
    for (i, p) in parts.iter().enumerate() {
        if i > 0 {
            samples.resize(samples.len() + gap, 0);
        }
        samples.extend_from_slice(&p.samples);
    }
    Ok(PcmAudio {
        sample_rate: first.sample_rate,
        channels: first.channels,
        samples,
    })
}

/// Parses sentence templates: one sentence per line, space-separated words.
/// Returns `(line, words)` with words lowercased; `#` lines are comments.
pub fn parse_templates(text: &str) -> Vec<(usize, Vec<String>)> {
    content_lines(text)
        .filter(|(_, l)| !l.trim_start().starts_with('#'))
        .map(|(line, l)| (line, l.split_whitespace().map(str::to_lowercase).collect()))
        .collect()
}

pub fn load_templates(path: impl AsRef<Path>) -> Result<Vec<(usize, Vec<String>)>> {
    Ok(parse_templates(&read_text(path.as_ref())?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentencePlan {
    pub sentence_id: String,
    pub word_sequence: Vec<String>,
    /// One source recording per word, in order.
    pub sources: Vec<UtteranceRecord>,
    pub gap_ms: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedTemplate {
    pub line: usize,
    pub missing: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlanOutcome {
    pub plans: Vec<SentencePlan>,
    pub skipped: Vec<SkippedTemplate>,
}

/// Resolves each template word to a word-level recording. When a word was
/// recorded several times the lexicographically smallest utterance id wins.
/// Templates with unresolvable words are skipped and reported.
pub fn plan_sentences(templates: &[(usize, Vec<String>)], inventory: &[UtteranceRecord], gap_ms: u32) -> PlanOutcome {
    let mut by_word: BTreeMap<String, &UtteranceRecord> = BTreeMap::new();
    for rec in inventory.iter().filter(|r| r.audio_path.is_some()) {
        let word = rec.text.trim().to_lowercase();
        if word.is_empty() || word.contains(char::is_whitespace) {
            continue;
        }
        by_word
            .entry(word)
            .and_modify(|cur| {
                if rec.id < cur.id {
                    *cur = rec;
                }
            })
            .or_insert(rec);
    }
    let mut out = PlanOutcome::default();
    for (index, (line, words)) in templates.iter().enumerate() {
        if words.is_empty() {
            continue;
        }
        let missing: Vec<String> = words.iter().filter(|w| !by_word.contains_key(*w)).cloned().collect();
        if !missing.is_empty() {
            out.skipped.push(SkippedTemplate { line: *line, missing });
            continue;
        }
        out.plans.push(SentencePlan {
            sentence_id: format!("rechain-{:04}", index + 1),
            word_sequence: words.clone(),
            sources: words.iter().map(|w| by_word[w].clone()).collect(),
            gap_ms,
        });
    }
    out
}

/// Renders one plan to `out_dir/<sentence_id>.wav` and returns the manifest
/// record for it. Relative source paths resolve against `audio_root`; the
/// returned `audio_path` is relative to `out_dir`.
pub fn concat_audio(plan: &SentencePlan, audio_root: &Path, out_dir: &Path) -> Result<UtteranceRecord> {
    let parts = plan
        .sources
        .iter()
        .map(|src| {
            let rel = src.audio_path.as_deref().expect("planned sources have audio");
            read_pcm16(&audio_root.join(rel))
        })
        .collect::<Result<Vec<_>>>()?;
    let audio = concat_samples(&parts, plan.gap_ms)?;
    let file_name = format!("{}.wav", plan.sentence_id);
    write_pcm16(&out_dir.join(&file_name), &audio)?;
    Ok(UtteranceRecord {
        id: plan.sentence_id.clone(),
        text: plan.word_sequence.join(" "),
        ref_phonemes: plan.sources.iter().flat_map(|s| s.ref_phonemes.iter().cloned()).collect(),
        audio_path: Some(file_name),
        split: Split::Train,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phoneme::Phoneme;

    fn tone(rate: u32, frames: usize, channels: u16, seed: i16) -> PcmAudio {
        PcmAudio {
            sample_rate: rate,
            channels,
            samples: (0..frames * channels as usize).map(|i| seed.wrapping_add(i as i16)).collect(),
        }
    }

    #[test]
    fn two_seconds_with_gap() {
        let a = tone(16_000, 16_000, 1, 1);
        let b = tone(16_000, 16_000, 1, 7);
        let out = concat_samples(&[a.clone(), b.clone()], 100).unwrap();
        assert_eq!(out.samples.len(), 33_600);
        assert_eq!(&out.samples[..16_000], &a.samples[..]);
        assert!(out.samples[16_000..17_600].iter().all(|&s| s == 0));
        assert_eq!(&out.samples[17_600..], &b.samples[..]);
    }

    #[test]
    fn single_part_is_identity() {
        let a = tone(16_000, 321, 2, 3);
        assert_eq!(concat_samples(std::slice::from_ref(&a), 100).unwrap(), a);
    }

    #[test]
    fn mismatches_are_rejected() {
        let a = tone(16_000, 10, 1, 0);
        assert!(matches!(concat_samples(&[a.clone(), tone(44_100, 10, 1, 0)], 100), Err(Error::FormatMismatch(_))));
        assert!(matches!(concat_samples(&[a, tone(16_000, 10, 2, 0)], 100), Err(Error::FormatMismatch(_))));
    }

    #[test]
    fn stereo_gap_counts_frames() {
        let a = tone(8_000, 100, 2, 0);
        let out = concat_samples(&[a.clone(), a], 100).unwrap();
        assert_eq!(out.frames(), 100 + 800 + 100);
    }

    #[test]
    fn encode_decode() {
        let a = tone(16_000, 500, 1, -40);
        let bytes = encode_pcm16(&a).unwrap();
        assert_eq!(decode_pcm16(Cursor::new(bytes), Path::new("mem")).unwrap(), a);
    }

    #[test]
    fn float_wav_is_unsupported() {
        let spec = WavSpec {
            channels: 1,
            sample_rate: 16_000,
            bits_per_sample: 32,
            sample_format: SampleFormat::Float,
        };
        let mut buf = Cursor::new(Vec::new());
        let mut w = WavWriter::new(&mut buf, spec).unwrap();
        w.write_sample(0.5f32).unwrap();
        w.finalize().unwrap();
        let r = decode_pcm16(Cursor::new(buf.into_inner()), Path::new("f.wav"));
        assert!(matches!(r, Err(Error::UnsupportedEncoding(_))));
    }

    #[test]
    fn garbage_is_a_wav_error() {
        assert!(matches!(
            decode_pcm16(Cursor::new(b"RIFF\0\0".to_vec()), Path::new("x")),
            Err(Error::Wav { .. })
        ));
    }

    fn rec(id: &str, word: &str, audio: Option<&str>) -> UtteranceRecord {
        UtteranceRecord {
            id: id.into(),
            text: word.into(),
            ref_phonemes: vec![Phoneme::new(word).unwrap()],
            audio_path: audio.map(str::to_string),
            split: Split::Train,
        }
    }

    #[test]
    fn planning_rules() {
        let inv = vec![
            rec("u13", "cat", Some("u13.wav")),
            rec("u07", "cat", Some("u07.wav")),
            rec("u01", "the", Some("u01.wav")),
            rec("u02", "dog", None),
        ];
        let templates = parse_templates("The cat\n# comment\nthe unicorn\nthe dog\n");
        let out = plan_sentences(&templates, &inv, 100);
        assert_eq!(out.plans.len(), 1);
        let plan = &out.plans[0];
        assert_eq!(plan.sentence_id, "rechain-0001");
        assert_eq!(plan.word_sequence, ["the", "cat"]);
        assert_eq!(plan.sources[1].id, "u07");
        assert_eq!(
            out.skipped,
            [
                SkippedTemplate { line: 3, missing: vec!["unicorn".into()] },
                SkippedTemplate { line: 4, missing: vec!["dog".into()] },
            ]
        );
    }

    #[test]
    fn gap_rounding() {
        assert_eq!(gap_frames(16_000, 100), 1_600);
        assert_eq!(gap_frames(44_100, 1), 44);
        assert_eq!(gap_frames(22_050, 1), 22);
    }
}
