//! The twenty document parameters used for discrimination.

use std::collections::HashSet;

use crate::corpus::{TagClass, TagMap, TaggedDocument};
use crate::error::{Error, Result};

pub const N_FEATURES: usize = 20;

/// Canonical feature order; this is the column order of every row vector,
/// feature table and model file.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "adverb_count",
    "char_count",
    "long_word_count",
    "preposition_count",
    "second_person_pronoun_count",
    "therefore_count",
    "words_per_sentence_avg",
    "chars_per_sentence_avg",
    "first_person_pronoun_count",
    "me_count",
    "present_participle_count",
    "sentence_count",
    "type_token_ratio",
    "i_count",
    "chars_per_word_avg",
    "it_count",
    "noun_count",
    "present_verb_count",
    "that_count",
    "which_count",
];

/// Features that are ratios or averages rather than raw counts.
pub const NON_COUNT_FEATURES: [usize; 4] = [6, 7, 12, 14];

/// Words strictly longer than this many characters are long words.
pub const LONG_WORD_CHARS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub adverb_count: u64,
    pub char_count: u64,
    pub long_word_count: u64,
    pub preposition_count: u64,
    pub second_person_pronoun_count: u64,
    pub therefore_count: u64,
    pub words_per_sentence_avg: f64,
    pub chars_per_sentence_avg: f64,
    pub first_person_pronoun_count: u64,
    pub me_count: u64,
    pub present_participle_count: u64,
    pub sentence_count: u64,
    pub type_token_ratio: f64,
    pub i_count: u64,
    pub chars_per_word_avg: f64,
    pub it_count: u64,
    pub noun_count: u64,
    pub present_verb_count: u64,
    pub that_count: u64,
    pub which_count: u64,
    /// Not a model feature; carried so the averages can be checked.
    pub word_count: u64,
}

impl FeatureVector {
    pub fn to_row(&self) -> [f64; N_FEATURES] {
        [
            self.adverb_count as f64,
            self.char_count as f64,
            self.long_word_count as f64,
            self.preposition_count as f64,
            self.second_person_pronoun_count as f64,
            self.therefore_count as f64,
            self.words_per_sentence_avg,
            self.chars_per_sentence_avg,
            self.first_person_pronoun_count as f64,
            self.me_count as f64,
            self.present_participle_count as f64,
            self.sentence_count as f64,
            self.type_token_ratio,
            self.i_count as f64,
            self.chars_per_word_avg,
            self.it_count as f64,
            self.noun_count as f64,
            self.present_verb_count as f64,
            self.that_count as f64,
            self.which_count as f64,
        ]
    }

    /// Inverse of [`to_row`](Self::to_row). Count columns must hold
    /// nonnegative integers.
    pub fn from_row(row: &[f64], word_count: u64) -> Result<Self> {
        if row.len() != N_FEATURES {
            return Err(Error::Dimension(format!(
                "expected {N_FEATURES} features, got {}",
                row.len()
            )));
        }
        let count = |i: usize| -> Result<u64> {
            let v = row[i];
            if v.is_finite() && v >= 0.0 && v.fract() == 0.0 {
                Ok(v as u64)
            } else {
                Err(Error::Input(format!(
                    "{} must be a nonnegative integer, got {v}",
                    FEATURE_NAMES[i]
                )))
            }
        };
        let fv = FeatureVector {
            adverb_count: count(0)?,
            char_count: count(1)?,
            long_word_count: count(2)?,
            preposition_count: count(3)?,
            second_person_pronoun_count: count(4)?,
            therefore_count: count(5)?,
            words_per_sentence_avg: row[6],
            chars_per_sentence_avg: row[7],
            first_person_pronoun_count: count(8)?,
            me_count: count(9)?,
            present_participle_count: count(10)?,
            sentence_count: count(11)?,
            type_token_ratio: row[12],
            i_count: count(13)?,
            chars_per_word_avg: row[14],
            it_count: count(15)?,
            noun_count: count(16)?,
            present_verb_count: count(17)?,
            that_count: count(18)?,
            which_count: count(19)?,
            word_count,
        };
        fv.validate()?;
        Ok(fv)
    }

    /// Checks the count bounds and the identities tying the averages to
    /// the counts.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Input(msg));
        if self.sentence_count == 0 || self.word_count == 0 {
            return fail("sentence_count and word_count must be positive".into());
        }
        if self.long_word_count > self.word_count {
            return fail("long_word_count exceeds word_count".into());
        }
        if self.i_count > self.first_person_pronoun_count
            || self.me_count > self.first_person_pronoun_count
        {
            return fail("i_count/me_count exceed first_person_pronoun_count".into());
        }
        if !(self.type_token_ratio > 0.0 && self.type_token_ratio <= 100.0) {
            return fail(format!(
                "type_token_ratio {} outside (0, 100]",
                self.type_token_ratio
            ));
        }
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs().max(1.0);
        let words = self.word_count as f64;
        let sentences = self.sentence_count as f64;
        let chars = self.char_count as f64;
        if !close(self.chars_per_word_avg * words, chars)
            || !close(self.words_per_sentence_avg * sentences, words)
            || !close(self.chars_per_sentence_avg * sentences, chars)
        {
            return fail("averages are inconsistent with the counts".into());
        }
        Ok(())
    }
}

/// Computes all parameters for one document. Character, length and
/// type/token measures range over word tokens only.
pub fn extract_features(doc: &TaggedDocument, tagmap: &TagMap) -> Result<FeatureVector> {
    let lex = &tagmap.lexicon;
    let mut fv = FeatureVector {
        adverb_count: 0,
        char_count: 0,
        long_word_count: 0,
        preposition_count: 0,
        second_person_pronoun_count: 0,
        therefore_count: 0,
        words_per_sentence_avg: 0.0,
        chars_per_sentence_avg: 0.0,
        first_person_pronoun_count: 0,
        me_count: 0,
        present_participle_count: 0,
        sentence_count: doc.sentences.len() as u64,
        type_token_ratio: 0.0,
        i_count: 0,
        chars_per_word_avg: 0.0,
        it_count: 0,
        noun_count: 0,
        present_verb_count: 0,
        that_count: 0,
        which_count: 0,
        word_count: 0,
    };
    let mut types = HashSet::new();

    for token in doc.words() {
        let lower = token.surface.to_lowercase();
        let chars = token.surface.chars().count() as u64;
        fv.word_count += 1;
        fv.char_count += chars;
        if chars > LONG_WORD_CHARS as u64 {
            fv.long_word_count += 1;
        }

        for class in token.classes.iter() {
            match class {
                TagClass::Adverb => fv.adverb_count += 1,
                TagClass::Preposition => fv.preposition_count += 1,
                TagClass::Noun => fv.noun_count += 1,
                TagClass::PresentParticiple => fv.present_participle_count += 1,
                TagClass::PresentVerb => fv.present_verb_count += 1,
                TagClass::Punctuation => {}
            }
        }

        let hit = |set: &HashSet<String>| set.contains(&lower) as u64;
        fv.first_person_pronoun_count += hit(&lex.first_person);
        fv.second_person_pronoun_count += hit(&lex.second_person);
        fv.therefore_count += hit(&lex.therefore);
        fv.me_count += hit(&lex.me);
        fv.i_count += hit(&lex.i);
        fv.it_count += hit(&lex.it);
        fv.that_count += hit(&lex.that);
        fv.which_count += hit(&lex.which);

        types.insert(lower);
    }

    if fv.word_count == 0 {
        return Err(Error::DegenerateDocument);
    }
    let words = fv.word_count as f64;
    let sentences = fv.sentence_count as f64;
    fv.words_per_sentence_avg = words / sentences;
    fv.chars_per_sentence_avg = fv.char_count as f64 / sentences;
    fv.chars_per_word_avg = fv.char_count as f64 / words;
    fv.type_token_ratio = 100.0 * types.len() as f64 / words;
    Ok(fv)
}

/// Scales the pure count features of `row` to occurrences per 1000 words.
/// Averages and the type/token ratio are left untouched.
pub fn per_thousand_words(row: &mut [f64], word_count: u64) {
    let scale = 1000.0 / word_count as f64;
    for (i, v) in row.iter_mut().enumerate() {
        if !NON_COUNT_FEATURES.contains(&i) {
            *v *= scale;
        }
    }
}
