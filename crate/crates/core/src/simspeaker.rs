//! A memoryless confusion channel standing in for a stochastic ASR backend.
//!
//! Every reference slot is independently deleted, kept or substituted
//! according to its phoneme's distribution, then followed by a Bernoulli
//! insertion of a uniformly chosen inventory phoneme. Because the planted
//! error masses are known, the channel is the ground truth for checking
//! that the scoring pipeline recovers difficulty.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::manifest_io::{content_lines, read_text, AdaptationState, BackendMeta, EnsembleRecord, Split, UtteranceRecord};
use crate::phoneme::{Inventory, NeighborMap, Phoneme};

pub const DEFAULT_INSERTION_RATE: f64 = 0.01;
pub const DEFAULT_RESIDUAL: f64 = 0.1;
/// Share of a phoneme's error mass that goes to its confusable neighbor;
/// the rest is deletion.
pub const SUBSTITUTION_SHARE: f64 = 0.7;

const MASS_TOLERANCE: f64 = 1e-9;

/// Output distribution for one reference phoneme.
#[derive(Debug, Clone, PartialEq)]
pub struct PhonemeChannel {
    /// Outcomes including the phoneme itself.
    pub substitutions: Vec<(Phoneme, f64)>,
    pub deletion: f64,
}

impl PhonemeChannel {
    /// Probability of emitting anything other than the phoneme itself.
    pub fn error_mass(&self, own: &Phoneme) -> f64 {
        self.deletion
            + self
                .substitutions
                .iter()
                .filter(|(p, _)| p != own)
                .map(|(_, w)| w)
                .sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionModel {
    pub profile_name: String,
    pub seed: u64,
    pub insertion_rate: f64,
    channels: BTreeMap<Phoneme, PhonemeChannel>,
    insertable: Vec<Phoneme>,
}

impl ConfusionModel {
    /// Builds a model from explicit channels. Every phoneme's outcome masses
    /// must sum to 1; `insertable` is the pool insertions draw from.
    pub fn from_channels(
        profile_name: impl Into<String>,
        seed: u64,
        insertion_rate: f64,
        channels: BTreeMap<Phoneme, PhonemeChannel>,
        insertable: Vec<Phoneme>,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&insertion_rate) {
            return Err(Error::InvalidProfile(format!("insertion rate {insertion_rate} outside [0, 1)")));
        }
        if insertion_rate > 0.0 && insertable.is_empty() {
            return Err(Error::InvalidProfile("insertions need a non-empty phoneme pool".into()));
        }
        for (p, ch) in &channels {
            if !(0.0..=1.0).contains(&ch.deletion) || ch.substitutions.iter().any(|(_, w)| !(0.0..=1.0).contains(w)) {
                return Err(Error::InvalidProfile(format!("{p}: probabilities must lie in [0, 1]")));
            }
            let total = ch.deletion + ch.substitutions.iter().map(|(_, w)| w).sum::<f64>();
            if (total - 1.0).abs() > MASS_TOLERANCE {
                return Err(Error::InvalidProfile(format!("{p}: outcome masses sum to {total}")));
            }
        }
        Ok(ConfusionModel {
            profile_name: profile_name.into(),
            seed,
            insertion_rate,
            channels,
            insertable,
        })
    }

    pub fn channel(&self, p: &Phoneme) -> Option<&PhonemeChannel> {
        self.channels.get(p)
    }

    /// Planted per-phoneme error mass (deletion plus non-self substitution).
    pub fn error_masses(&self) -> BTreeMap<Phoneme, f64> {
        self.channels.iter().map(|(p, ch)| (p.clone(), ch.error_mass(p))).collect()
    }
}

/// One model per phoneme error mass: the phoneme keeps `1 − e`, its
/// confusable neighbor gets `0.7·e` and deletion `0.3·e`.
pub fn make_graded_profile(
    profile_name: &str,
    inventory: &Inventory,
    neighbors: &NeighborMap,
    error_mass: &BTreeMap<Phoneme, f64>,
    insertion_rate: f64,
    seed: u64,
) -> Result<ConfusionModel> {
    let mut channels = BTreeMap::new();
    for p in inventory.symbols() {
        let e = *error_mass
            .get(p)
            .ok_or_else(|| Error::InvalidProfile(format!("no error mass for {p}")))?;
        if !(0.0..1.0).contains(&e) {
            return Err(Error::InvalidProfile(format!("{p}: error mass {e} outside [0, 1)")));
        }
        let channel = match neighbors.neighbor(p, inventory) {
            Some(n) => PhonemeChannel {
                substitutions: vec![(p.clone(), 1.0 - e), (n, SUBSTITUTION_SHARE * e)],
                deletion: (1.0 - SUBSTITUTION_SHARE) * e,
            },
            None => PhonemeChannel {
                substitutions: vec![(p.clone(), 1.0 - e)],
                deletion: e,
            },
        };
        channels.insert(p.clone(), channel);
    }
    if let Some(extra) = error_mass.keys().find(|p| !inventory.contains(p)) {
        return Err(Error::InvalidProfile(format!("{extra} is not in the inventory")));
    }
    ConfusionModel::from_channels(profile_name, seed, insertion_rate, channels, inventory.symbols().to_vec())
}

/// Two-level profile: `hard` phonemes get `hard_err`, all others `easy_err`.
pub fn make_profile(
    inventory: &Inventory,
    neighbors: &NeighborMap,
    hard: &BTreeSet<Phoneme>,
    easy_err: f64,
    hard_err: f64,
) -> Result<ConfusionModel> {
    if hard.is_empty() {
        return Err(Error::InvalidProfile("hard set is empty".into()));
    }
    if let Some(p) = hard.iter().find(|p| !inventory.contains(p)) {
        return Err(Error::InvalidProfile(format!("hard phoneme {p} is not in the inventory")));
    }
    if hard.len() == inventory.len() {
        return Err(Error::InvalidProfile("hard set covers the whole inventory".into()));
    }
    if !(0.0 <= easy_err && easy_err < hard_err && hard_err < 1.0) {
        return Err(Error::InvalidProfile(format!(
            "need 0 <= easy_err < hard_err < 1, got {easy_err} and {hard_err}"
        )));
    }
    let masses = inventory
        .symbols()
        .iter()
        .map(|p| (p.clone(), if hard.contains(p) { hard_err } else { easy_err }))
        .collect();
    make_graded_profile("two-level", inventory, neighbors, &masses, DEFAULT_INSERTION_RATE, 0)
}

/// Scales every error mass (deletion, substitution away from self and the
/// insertion rate) by `residual`; the phoneme itself absorbs the remainder.
pub fn adapted_profile(model: &ConfusionModel, residual: f64) -> Result<ConfusionModel> {
    if !(0.0..=1.0).contains(&residual) {
        return Err(Error::InvalidProfile(format!("residual {residual} outside [0, 1]")));
    }
    let channels = model
        .channels
        .iter()
        .map(|(p, ch)| {
            let mut substitutions: Vec<(Phoneme, f64)> = ch
                .substitutions
                .iter()
                .filter(|(q, _)| q != p)
                .map(|(q, w)| (q.clone(), w * residual))
                .collect();
            let deletion = ch.deletion * residual;
            let keep = 1.0 - deletion - substitutions.iter().map(|(_, w)| w).sum::<f64>();
            substitutions.insert(0, (p.clone(), keep));
            (p.clone(), PhonemeChannel { substitutions, deletion })
        })
        .collect();
    ConfusionModel::from_channels(
        format!("{}+adapted", model.profile_name),
        model.seed,
        model.insertion_rate * residual,
        channels,
        model.insertable.clone(),
    )
}

fn unit_f64(rng: &mut Xoshiro256PlusPlus) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Seed for the utterance at `index`; generation stays schedule-independent.
pub fn utterance_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn corrupt(reference: &[Phoneme], model: &ConfusionModel, rng: &mut Xoshiro256PlusPlus) -> Result<Vec<Phoneme>> {
    let mut out = Vec::with_capacity(reference.len() + 1);
    for p in reference {
        let ch = model
            .channels
            .get(p)
            .ok_or_else(|| Error::InvalidProfile(format!("no channel for {p}")))?;
        let mut u = unit_f64(rng);
        if u < ch.deletion {
            // deleted
        } else {
            u -= ch.deletion;
            let mut chosen = &ch.substitutions.last().expect("channel has outcomes").0;
            for (q, w) in &ch.substitutions {
                if u < *w {
                    chosen = q;
                    break;
                }
                u -= w;
            }
            out.push(chosen.clone());
        }
        if model.insertion_rate > 0.0 && unit_f64(rng) < model.insertion_rate {
            let k = (rng.next_u64() % model.insertable.len() as u64) as usize;
            out.push(model.insertable[k].clone());
        }
    }
    Ok(out)
}

/// M independent corrupted copies of `reference`.
pub fn generate_ensemble(
    utterance_id: &str,
    reference: &[Phoneme],
    model: &ConfusionModel,
    passes: usize,
    seed: u64,
) -> Result<EnsembleRecord> {
    if passes == 0 {
        return Err(Error::InvalidArgument("M must be at least 1".into()));
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let hypotheses = (0..passes)
        .map(|_| corrupt(reference, model, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleRecord {
        utterance_id: utterance_id.to_string(),
        hypotheses,
        backend: BackendMeta {
            model_id: format!("simspeaker:{}", model.profile_name),
            passes,
            p_drop: 0.0,
            adaptation_state: AdaptationState::Simulated,
        },
    })
}

/// Ensembles for every training utterance with a non-empty reference, in
/// manifest order. Utterances are generated in parallel from derived seeds.
pub fn simulate_corpus(
    manifest: &[UtteranceRecord],
    model: &ConfusionModel,
    passes: usize,
    seed: u64,
) -> Result<Vec<EnsembleRecord>> {
    let targets: Vec<(usize, &UtteranceRecord)> = manifest
        .iter()
        .filter(|r| r.split == Split::Train && !r.ref_phonemes.is_empty())
        .enumerate()
        .collect();
    targets
        .par_iter()
        .map(|(i, r)| generate_ensemble(&r.id, &r.ref_phonemes, model, passes, utterance_seed(seed, *i)))
        .collect()
}

/// Parsed profile file.
///
/// ```text
/// profile_name=speaker-a
/// hard=r s
/// easy_err=0.05
/// hard_err=0.40
/// insertion_rate=0.01
/// seed=42
/// residual=0.1
/// error.ʃ=0.25
/// ```
///
/// `hard`, `easy_err` and `hard_err` are required. `error.<symbol>` lines
/// override the mass of single phonemes. `residual`, when given, applies
/// [`adapted_profile`] after building.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSpec {
    pub profile_name: String,
    pub hard: Vec<String>,
    pub easy_err: f64,
    pub hard_err: f64,
    pub insertion_rate: f64,
    pub seed: u64,
    pub residual: Option<f64>,
    pub overrides: BTreeMap<String, f64>,
}

pub fn parse_profile(text: &str) -> Result<ProfileSpec> {
    let mut fields: BTreeMap<String, (usize, String)> = BTreeMap::new();
    let mut overrides = BTreeMap::new();
    for (line, raw) in content_lines(text) {
        let raw = raw.trim();
        if raw.starts_with('#') {
            continue;
        }
        let (key, value) = raw
            .split_once('=')
            .ok_or_else(|| Error::parse(line, "expected key=value"))?;
        let (key, value) = (key.trim(), value.trim());
        if let Some(sym) = key.strip_prefix("error.") {
            let v = parse_prob(value, line)?;
            if overrides.insert(sym.to_string(), v).is_some() {
                return Err(Error::parse(line, format!("{key} given twice")));
            }
            continue;
        }
        match key {
            "profile_name" | "hard" | "easy_err" | "hard_err" | "insertion_rate" | "seed" | "residual" => {}
            other => return Err(Error::parse(line, format!("unknown key {other:?}"))),
        }
        if fields.insert(key.to_string(), (line, value.to_string())).is_some() {
            return Err(Error::parse(line, format!("{key} given twice")));
        }
    }
    let required = |k: &str| {
        fields
            .get(k)
            .cloned()
            .ok_or_else(|| Error::parse(0, format!("profile is missing {k}=")))
    };
    let (l, hard) = required("hard")?;
    let hard: Vec<String> = hard.split_whitespace().map(str::to_string).collect();
    if hard.is_empty() {
        return Err(Error::parse(l, "hard set is empty"));
    }
    let (l, v) = required("easy_err")?;
    let easy_err = parse_prob(&v, l)?;
    let (l, v) = required("hard_err")?;
    let hard_err = parse_prob(&v, l)?;
    let insertion_rate = match fields.get("insertion_rate") {
        Some((l, v)) => parse_prob(v, *l)?,
        None => DEFAULT_INSERTION_RATE,
    };
    let seed = match fields.get("seed") {
        Some((l, v)) => v.parse().map_err(|_| Error::parse(*l, format!("bad seed {v:?}")))?,
        None => 0,
    };
    let residual = fields.get("residual").map(|(l, v)| parse_prob(v, *l)).transpose()?;
    Ok(ProfileSpec {
        profile_name: fields.get("profile_name").map_or_else(|| "profile".to_string(), |(_, v)| v.clone()),
        hard,
        easy_err,
        hard_err,
        insertion_rate,
        seed,
        residual,
        overrides,
    })
}

fn parse_prob(v: &str, line: usize) -> Result<f64> {
    match v.parse::<f64>() {
        Ok(x) if (0.0..=1.0).contains(&x) => Ok(x),
        _ => Err(Error::parse(line, format!("expected a probability, got {v:?}"))),
    }
}

pub fn load_profile(path: impl AsRef<Path>) -> Result<ProfileSpec> {
    parse_profile(&read_text(path.as_ref())?)
}

impl ProfileSpec {
    /// Resolves the profile against an inventory.
    pub fn build(&self, inventory: &Inventory, neighbors: &NeighborMap) -> Result<ConfusionModel> {
        let resolve = |s: &str| {
            inventory
                .get(s)
                .cloned()
                .ok_or_else(|| Error::InvalidProfile(format!("{s} is not in the inventory")))
        };
        let hard: BTreeSet<Phoneme> = self.hard.iter().map(|s| resolve(s)).collect::<Result<_>>()?;
        // validates the two-level preconditions
        make_profile(inventory, neighbors, &hard, self.easy_err, self.hard_err)?;
        let mut masses: BTreeMap<Phoneme, f64> = inventory
            .symbols()
            .iter()
            .map(|p| (p.clone(), if hard.contains(p) { self.hard_err } else { self.easy_err }))
            .collect();
        for (s, v) in &self.overrides {
            masses.insert(resolve(s)?, *v);
        }
        let model = make_graded_profile(&self.profile_name, inventory, neighbors, &masses, self.insertion_rate, self.seed)?;
        match self.residual {
            Some(r) => adapted_profile(&model, r),
            None => Ok(model),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inv() -> Inventory {
        Inventory::parse("r\ns\nt\nk\na\n").unwrap()
    }

    fn p(s: &str) -> Phoneme {
        Phoneme::new(s).unwrap()
    }

    fn self_prob(model: &ConfusionModel, s: &str) -> f64 {
        let ph = p(s);
        model.channel(&ph).unwrap().substitutions.iter().find(|(q, _)| *q == ph).unwrap().1
    }

    #[test]
    fn profile_mass_accounting() {
        let hard: BTreeSet<_> = [p("r")].into();
        let m = make_profile(&inv(), &NeighborMap::default(), &hard, 0.05, 0.40).unwrap();
        assert!((self_prob(&m, "r") - 0.60).abs() < 1e-12);
        assert!((self_prob(&m, "s") - 0.95).abs() < 1e-12);
        let ch = m.channel(&p("r")).unwrap();
        assert!((ch.deletion - 0.12).abs() < 1e-12);
        assert_eq!(m.insertion_rate, 0.01);
    }

    #[test]
    fn profile_preconditions() {
        let nb = NeighborMap::default();
        let hard: BTreeSet<_> = [p("r")].into();
        assert!(matches!(make_profile(&inv(), &nb, &hard, 0.2, 0.2), Err(Error::InvalidProfile(_))));
        assert!(matches!(make_profile(&inv(), &nb, &BTreeSet::new(), 0.05, 0.4), Err(Error::InvalidProfile(_))));
        let all: BTreeSet<_> = inv().symbols().iter().cloned().collect();
        assert!(make_profile(&inv(), &nb, &all, 0.05, 0.4).is_err());
        let foreign: BTreeSet<_> = [p("zz")].into();
        assert!(make_profile(&inv(), &nb, &foreign, 0.05, 0.4).is_err());
    }

    fn noiseless() -> ConfusionModel {
        let hard: BTreeSet<_> = [p("r")].into();
        let m = make_profile(&inv(), &NeighborMap::default(), &hard, 0.05, 0.40).unwrap();
        adapted_profile(&m, 0.0).unwrap()
    }

    #[test]
    fn zero_error_mass_reproduces_reference() {
        let reference = vec![p("k"), p("a"), p("t"), p("r")];
        let e = generate_ensemble("u", &reference, &noiseless(), 20, 5).unwrap();
        assert_eq!(e.hypotheses.len(), 20);
        assert!(e.hypotheses.iter().all(|h| *h == reference));
        assert_eq!(e.backend.adaptation_state, AdaptationState::Simulated);
    }

    #[test]
    fn certain_deletion_empties_hypotheses() {
        let channels = inv()
            .symbols()
            .iter()
            .map(|q| (q.clone(), PhonemeChannel { substitutions: vec![(q.clone(), 0.0)], deletion: 1.0 }))
            .collect();
        let m = ConfusionModel::from_channels("mute", 0, 0.0, channels, vec![]).unwrap();
        let e = generate_ensemble("u", &[p("k"), p("a")], &m, 20, 1).unwrap();
        assert!(e.hypotheses.iter().all(Vec::is_empty));
    }

    #[test]
    fn adapted_scaling() {
        let hard: BTreeSet<_> = [p("r")].into();
        let m = make_profile(&inv(), &NeighborMap::default(), &hard, 0.05, 0.40).unwrap();
        let a = adapted_profile(&m, 0.1).unwrap();
        assert!((a.error_masses()[&p("r")] - 0.04).abs() < 1e-12);
        assert!((a.insertion_rate - 0.001).abs() < 1e-15);
        let same = adapted_profile(&m, 1.0).unwrap();
        for (q, mass) in m.error_masses() {
            assert!((same.error_masses()[&q] - mass).abs() < 1e-12);
        }
        assert!(adapted_profile(&m, 1.5).is_err());
    }

    #[test]
    fn same_seed_same_ensemble() {
        let hard: BTreeSet<_> = [p("r")].into();
        let m = make_profile(&inv(), &NeighborMap::default(), &hard, 0.05, 0.40).unwrap();
        let reference = vec![p("r"), p("a"), p("s")];
        let a = generate_ensemble("u", &reference, &m, 20, 11).unwrap();
        let b = generate_ensemble("u", &reference, &m, 20, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mass_must_sum_to_one() {
        let channels = [(p("a"), PhonemeChannel { substitutions: vec![(p("a"), 0.5)], deletion: 0.1 })].into();
        assert!(ConfusionModel::from_channels("bad", 0, 0.0, channels, vec![]).is_err());
    }

    #[test]
    fn profile_file() {
        let text = "# speaker\nprofile_name=toy\nhard=r s\neasy_err=0.05\nhard_err=0.4\nseed=9\nerror.k=0.2\n";
        let spec = parse_profile(text).unwrap();
        assert_eq!(spec.hard, ["r", "s"]);
        assert_eq!(spec.seed, 9);
        assert_eq!(spec.insertion_rate, DEFAULT_INSERTION_RATE);
        let m = spec.build(&inv(), &NeighborMap::default()).unwrap();
        let masses = m.error_masses();
        assert!((masses[&p("k")] - 0.2).abs() < 1e-12);
        assert!((masses[&p("s")] - 0.4).abs() < 1e-12);
        assert!((masses[&p("a")] - 0.05).abs() < 1e-12);
        assert_eq!(m.profile_name, "toy");

        assert!(parse_profile("hard=r\neasy_err=0.05\n").is_err());
        assert!(parse_profile("hard=r\neasy_err=0.05\nhard_err=2\n").is_err());
        assert!(parse_profile("hard=r\neasy_err=0.05\nhard_err=0.4\nbogus=1\n").is_err());
        let bad_sym = parse_profile("hard=zz\neasy_err=0.05\nhard_err=0.4\n").unwrap();
        assert!(bad_sym.build(&inv(), &NeighborMap::default()).is_err());
    }
}
