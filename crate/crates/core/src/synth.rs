//! Seeded synthetic survey data for tests, benchmarks and demos.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::survey::{QuestionKind, QuestionnaireDef, ResponseRecord};

/// Seed behind the bundled 38-respondent classroom.
pub const CLASS38_SEED: u64 = 38;
pub const CLASS38_QPE: &str = "QPE01";

/// The questionnaire every bundled fixture answers.
pub fn class_survey() -> QuestionnaireDef {
    QuestionnaireDef::from_json(include_str!("../../../fixtures/class_survey.json"))
        .expect("bundled questionnaire is valid")
}

/// Knobs for [`generate`]. Probabilities are per question or per peer.
#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub respondents: usize,
    pub answer_probability: f64,
    pub nominate_probability: f64,
    /// Also emit self-nominations and repeated answers, which ingestion
    /// must drop or overwrite.
    pub noise: bool,
}

impl SynthConfig {
    pub fn class38() -> Self {
        SynthConfig {
            respondents: 38,
            answer_probability: 0.95,
            nominate_probability: 0.2,
            noise: false,
        }
    }
}

pub fn person_id(i: usize) -> String {
    format!("S{:02}", i + 1)
}

/// Random answers from `cfg.respondents` people to every question of
/// `def`. Roster answers are about peers picked independently.
pub fn generate(
    def: &QuestionnaireDef,
    qpe_id: &str,
    cfg: &SynthConfig,
    rng: &mut impl Rng,
) -> Vec<ResponseRecord> {
    let people: Vec<String> = (0..cfg.respondents).map(person_id).collect();
    let mut out = Vec::new();
    for p in &people {
        for q in &def.questions {
            if q.answers.is_empty() {
                continue;
            }
            match q.kind {
                QuestionKind::Generic => {
                    if rng.gen_bool(cfg.answer_probability) {
                        let a = q.answers.choose(rng).expect("non-empty");
                        out.push(ResponseRecord::new(qpe_id, p, &q.id, None, &a.label));
                    }
                }
                QuestionKind::Roster => {
                    for peer in &people {
                        if peer == p && !cfg.noise {
                            continue;
                        }
                        if rng.gen_bool(cfg.nominate_probability) {
                            let a = q.answers.choose(rng).expect("non-empty");
                            out.push(ResponseRecord::new(qpe_id, p, &q.id, Some(peer), &a.label));
                        }
                    }
                }
            }
        }
    }
    if cfg.noise && !out.is_empty() {
        // re-answer a few items; the later record must win
        for _ in 0..rng.gen_range(0..=3) {
            let mut r = out.choose(rng).expect("non-empty").clone();
            let q = def.question(&r.question_id).expect("generated from def");
            r.label = q.answers.choose(rng).expect("non-empty").label.clone();
            out.push(r);
        }
    }
    out
}

/// A small random response file for property checks: 2 to 6 people with
/// noise enabled.
pub fn random_fixture(
    def: &QuestionnaireDef,
    qpe_id: &str,
    rng: &mut impl Rng,
) -> Vec<ResponseRecord> {
    let cfg = SynthConfig {
        respondents: rng.gen_range(2..=6),
        answer_probability: rng.gen_range(0.3..=1.0),
        nominate_probability: rng.gen_range(0.1..=0.9),
        noise: true,
    };
    generate(def, qpe_id, &cfg, rng)
}

/// The synthetic 38-person classroom shipped as
/// `fixtures/class38_responses.csv`.
pub fn class38() -> Vec<ResponseRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(CLASS38_SEED);
    generate(
        &class_survey(),
        CLASS38_QPE,
        &SynthConfig::class38(),
        &mut rng,
    )
}

/// Laura answers about Juan on the roster question and nothing else.
pub fn minimal_fixture(label: &str) -> Vec<ResponseRecord> {
    vec![ResponseRecord::new(
        CLASS38_QPE,
        "Laura",
        "TIME_WITH",
        Some("Juan"),
        label,
    )]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survey::write_responses_csv;

    #[test]
    fn class38_has_38_respondents() {
        let recs = class38();
        let people: std::collections::BTreeSet<_> =
            recs.iter().map(|r| r.respondent.as_str()).collect();
        assert_eq!(people.len(), 38);
        assert!(recs
            .iter()
            .all(|r| r.target.as_deref() != Some(r.respondent.as_str())));
    }

    #[test]
    fn bundled_class38_file_matches_generator() {
        let on_disk = include_str!("../../../fixtures/class38_responses.csv");
        assert_eq!(on_disk, write_responses_csv(&class38()));
    }

    #[test]
    fn generation_is_seeded() {
        let def = class_survey();
        let a = random_fixture(&def, "QPE01", &mut ChaCha8Rng::seed_from_u64(7));
        let b = random_fixture(&def, "QPE01", &mut ChaCha8Rng::seed_from_u64(7));
        assert_eq!(a, b);
    }
}
