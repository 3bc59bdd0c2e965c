//! Ingestion of part-of-speech tagged text and corpus manifests.
//!
//! Tagged files use the Brown convention: one sentence per line, tokens
//! written as `surface/TAG` and separated by whitespace. The last `/` of a
//! token separates the surface from the tag.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::taxonomy::CategoryTaxonomy;

/// Default tag map for the Brown tagset.
pub const BROWN_TAGMAP: &str = include_str!("../data/brown.tagmap");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TagClass {
    Adverb,
    Preposition,
    Noun,
    PresentParticiple,
    PresentVerb,
    Punctuation,
}

impl TagClass {
    pub const ALL: [TagClass; 6] = [
        TagClass::Adverb,
        TagClass::Preposition,
        TagClass::Noun,
        TagClass::PresentParticiple,
        TagClass::PresentVerb,
        TagClass::Punctuation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TagClass::Adverb => "ADVERB",
            TagClass::Preposition => "PREPOSITION",
            TagClass::Noun => "NOUN",
            TagClass::PresentParticiple => "PRESENT_PARTICIPLE",
            TagClass::PresentVerb => "PRESENT_VERB",
            TagClass::Punctuation => "PUNCTUATION",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

/// A set of [`TagClass`]es.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct TagClasses(u8);

impl TagClasses {
    pub const EMPTY: TagClasses = TagClasses(0);

    pub fn contains(self, class: TagClass) -> bool {
        self.0 & class.bit() != 0
    }

    pub fn insert(&mut self, class: TagClass) {
        self.0 |= class.bit();
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = TagClass> {
        TagClass::ALL.into_iter().filter(move |c| self.contains(*c))
    }
}

impl FromIterator<TagClass> for TagClasses {
    fn from_iter<I: IntoIterator<Item = TagClass>>(iter: I) -> Self {
        let mut set = TagClasses::EMPTY;
        for class in iter {
            set.insert(class);
        }
        set
    }
}

impl fmt::Display for TagClasses {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.iter().map(TagClass::name).collect();
        write!(f, "{{{}}}", names.join(", "))
    }
}

/// Case-insensitive word lists used for the lexical counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    pub first_person: HashSet<String>,
    pub second_person: HashSet<String>,
    pub therefore: HashSet<String>,
    pub me: HashSet<String>,
    pub i: HashSet<String>,
    pub it: HashSet<String>,
    pub that: HashSet<String>,
    pub which: HashSet<String>,
}

impl Lexicon {
    fn list_mut(&mut self, name: &str) -> Option<&mut HashSet<String>> {
        Some(match name {
            "FIRST_PERSON_PRONOUNS" => &mut self.first_person,
            "SECOND_PERSON_PRONOUNS" => &mut self.second_person,
            "THEREFORE" => &mut self.therefore,
            "ME" => &mut self.me,
            "I" => &mut self.i,
            "IT" => &mut self.it,
            "THAT" => &mut self.that,
            "WHICH" => &mut self.which,
            _ => return None,
        })
    }
}

/// Assignment of raw part-of-speech tags to feature classes, plus the
/// lexical word lists.
#[derive(Debug, Clone)]
pub struct TagMap {
    exact: HashMap<String, TagClasses>,
    /// Sorted by descending prefix length.
    prefixes: Vec<(String, TagClasses)>,
    pub lexicon: Lexicon,
    strict: bool,
}

impl TagMap {
    /// The bundled Brown tagset map.
    pub fn brown() -> Self {
        Self::parse(BROWN_TAGMAP).expect("bundled tag map is well-formed")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Parses the `[tag_classes]` / `[lexicon]` key-value format.
    pub fn parse(text: &str) -> Result<Self> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Tags,
            Lexicon,
        }
        let mut section = Section::None;
        let mut exact = HashMap::new();
        let mut prefixes = Vec::new();
        let mut lexicon = Lexicon::default();
        let mut seen_lists = HashSet::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') && !line.contains('=') {
                section = match &line[1..line.len() - 1] {
                    "tag_classes" => Section::Tags,
                    "lexicon" => Section::Lexicon,
                    other => {
                        return Err(Error::TagMap {
                            line: line_no,
                            message: format!("unknown section [{other}]"),
                        })
                    }
                };
                continue;
            }
            let Some((key, value)) = split_assignment(line) else {
                return Err(Error::TagMap {
                    line: line_no,
                    message: "expected `KEY = VALUE`".into(),
                });
            };
            match section {
                Section::None => {
                    return Err(Error::TagMap {
                        line: line_no,
                        message: "entry outside of a section".into(),
                    })
                }
                Section::Tags => {
                    let mut classes = TagClasses::EMPTY;
                    for name in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                        let class = TagClass::from_name(name).ok_or_else(|| Error::TagMap {
                            line: line_no,
                            message: format!("unknown tag class {name:?}"),
                        })?;
                        classes.insert(class);
                    }
                    let (pattern, is_prefix) = parse_pattern(key);
                    if pattern.is_empty() && !is_prefix {
                        return Err(Error::TagMap {
                            line: line_no,
                            message: "empty tag pattern".into(),
                        });
                    }
                    let pattern = pattern.to_uppercase();
                    let duplicate = if is_prefix {
                        if prefixes.iter().any(|(p, _)| *p == pattern) {
                            true
                        } else {
                            prefixes.push((pattern, classes));
                            false
                        }
                    } else {
                        exact.insert(pattern, classes).is_some()
                    };
                    if duplicate {
                        return Err(Error::TagMap {
                            line: line_no,
                            message: format!("duplicate pattern {key:?}"),
                        });
                    }
                }
                Section::Lexicon => {
                    let name = key.to_uppercase();
                    let list = lexicon.list_mut(&name).ok_or_else(|| Error::TagMap {
                        line: line_no,
                        message: format!("unknown word list {key:?}"),
                    })?;
                    list.extend(
                        value
                            .split(',')
                            .map(|w| w.trim().to_lowercase())
                            .filter(|w| !w.is_empty()),
                    );
                    seen_lists.insert(name);
                }
            }
        }

        for (name, words) in DEFAULT_LISTS {
            if !seen_lists.contains(name) {
                let list = lexicon.list_mut(name).unwrap();
                list.extend(words.iter().map(|w| w.to_string()));
            }
        }
        for (name, list) in [("I", &lexicon.i), ("ME", &lexicon.me)] {
            if let Some(word) = list.iter().find(|w| !lexicon.first_person.contains(*w)) {
                return Err(Error::TagMap {
                    line: 0,
                    message: format!(
                        "word {word:?} of list {name} is missing from FIRST_PERSON_PRONOUNS"
                    ),
                });
            }
        }

        prefixes.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        Ok(Self {
            exact,
            prefixes,
            lexicon,
            strict: false,
        })
    }

    /// In strict mode, tags that match no pattern are parse errors.
    pub fn with_strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    /// Looks up `tag`; `None` when no pattern matches.
    pub fn lookup(&self, tag: &str) -> Option<TagClasses> {
        let tag = tag.to_uppercase();
        if let Some(classes) = self.exact.get(&tag) {
            return Some(*classes);
        }
        self.prefixes
            .iter()
            .find(|(prefix, _)| tag.starts_with(prefix.as_str()))
            .map(|(_, classes)| *classes)
    }
}

impl Default for TagMap {
    fn default() -> Self {
        Self::brown()
    }
}

/// Word lists used when a tag map file does not define them.
const DEFAULT_LISTS: [(&str, &[&str]); 8] = [
    (
        "FIRST_PERSON_PRONOUNS",
        &["i", "me", "my", "mine", "myself", "we", "us", "our", "ours", "ourselves"],
    ),
    (
        "SECOND_PERSON_PRONOUNS",
        &[
            "you", "your", "yours", "yourself", "yourselves", "thou", "thee", "thy", "thine",
            "thyself", "ye",
        ],
    ),
    ("THEREFORE", &["therefore"]),
    ("ME", &["me"]),
    ("I", &["i"]),
    ("IT", &["it"]),
    ("THAT", &["that"]),
    ("WHICH", &["which"]),
];

fn split_assignment(line: &str) -> Option<(&str, &str)> {
    // Keys may themselves be "=" free punctuation, so split on the first
    // " = " when present, otherwise on the first '='.
    if let Some(pos) = line.find(" =") {
        let (k, v) = line.split_at(pos);
        return Some((k.trim(), v.trim_start()[1..].trim()));
    }
    let (k, v) = line.split_once('=')?;
    let k = k.trim();
    (!k.is_empty()).then(|| (k, v.trim()))
}

/// Returns the literal pattern text and whether it is a prefix pattern.
fn parse_pattern(key: &str) -> (String, bool) {
    let mut out = String::new();
    let mut chars = key.chars().peekable();
    let mut is_prefix = false;
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                if let Some(next) = chars.next() {
                    out.push(next);
                }
            }
            '*' if chars.peek().is_none() => is_prefix = true,
            _ => out.push(c),
        }
    }
    (out, is_prefix)
}

/// Tag classes of `tag` under `tagmap`. Unmapped tags resolve to the empty
/// set and count as words.
pub fn resolve_tag(tag: &str, tagmap: &TagMap) -> TagClasses {
    tagmap.lookup(tag).unwrap_or(TagClasses::EMPTY)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedToken {
    pub surface: String,
    pub tag: String,
    pub classes: TagClasses,
    pub is_word: bool,
}

impl TaggedToken {
    pub fn new(surface: impl Into<String>, tag: impl Into<String>, tagmap: &TagMap) -> Self {
        let surface = surface.into();
        let tag = tag.into();
        let classes = resolve_tag(&tag, tagmap);
        TaggedToken {
            surface,
            tag,
            is_word: !classes.contains(TagClass::Punctuation),
            classes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedDocument {
    pub doc_id: String,
    pub sentences: Vec<Vec<TaggedToken>>,
    pub category: Option<String>,
}

impl TaggedDocument {
    pub fn with_id(mut self, doc_id: impl Into<String>) -> Self {
        self.doc_id = doc_id.into();
        self
    }

    pub fn with_category(mut self, category: Option<String>) -> Self {
        self.category = category;
        self
    }

    pub fn tokens(&self) -> impl Iterator<Item = &TaggedToken> {
        self.sentences.iter().flatten()
    }

    pub fn words(&self) -> impl Iterator<Item = &TaggedToken> {
        self.tokens().filter(|t| t.is_word)
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    pub fn word_count(&self) -> usize {
        self.words().count()
    }

    /// Serializes back to `surface/TAG` lines, one sentence per line.
    pub fn to_tagged_text(&self) -> String {
        let mut out = String::new();
        for sentence in &self.sentences {
            let line: Vec<String> = sentence
                .iter()
                .map(|t| format!("{}/{}", t.surface, t.tag))
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Parses a tagged text file. The returned document has an empty `doc_id`.
pub fn parse_tagged_file(raw: &[u8], tagmap: &TagMap) -> Result<TaggedDocument> {
    let text = std::str::from_utf8(raw).map_err(|e| {
        let line = raw[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
        Error::parse(line, "invalid UTF-8")
    })?;

    let mut sentences = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let mut sentence = Vec::new();
        for token in line.split_whitespace() {
            let Some(slash) = token.rfind('/') else {
                return Err(Error::parse(
                    line_no,
                    format!("token {token:?} has no '/' separator"),
                ));
            };
            let (surface, tag) = (&token[..slash], &token[slash + 1..]);
            if surface.is_empty() || tag.is_empty() {
                return Err(Error::parse(
                    line_no,
                    format!("token {token:?} has an empty surface or tag"),
                ));
            }
            if tagmap.is_strict() && tagmap.lookup(tag).is_none() {
                return Err(Error::UnknownTag {
                    line: line_no,
                    tag: tag.to_string(),
                });
            }
            sentence.push(TaggedToken::new(surface, tag, tagmap));
        }
        if !sentence.is_empty() {
            sentences.push(sentence);
        }
    }
    if sentences.is_empty() {
        return Err(Error::EmptyDocument);
    }
    Ok(TaggedDocument {
        doc_id: String::new(),
        sentences,
        category: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub doc_id: String,
    pub category: String,
    pub line: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Resolves relative entry paths against `base`.
    pub fn rebase(mut self, base: &Path) -> Self {
        for entry in &mut self.entries {
            if entry.path.is_relative() {
                entry.path = base.join(&entry.path);
            }
        }
        self
    }
}

/// Parses a tab-separated manifest (`path`, `doc_id`, `category`). When a
/// taxonomy is given, every category code must belong to it.
pub fn load_manifest(raw: &[u8], taxonomy: Option<&CategoryTaxonomy>) -> Result<Manifest> {
    let text = std::str::from_utf8(raw).map_err(|e| {
        let line = raw[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
        Error::parse(line, "invalid UTF-8")
    })?;
    let mut entries = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        let [path, doc_id, category] = fields[..] else {
            return Err(Error::parse(
                line_no,
                format!("expected 3 tab-separated columns, found {}", fields.len()),
            ));
        };
        if path.is_empty() || doc_id.is_empty() || category.is_empty() {
            return Err(Error::parse(line_no, "empty column"));
        }
        if let Some(tax) = taxonomy {
            if !tax.contains(category) {
                return Err(Error::UnknownCategory {
                    line: line_no,
                    code: category.to_string(),
                });
            }
        }
        if let Some(&first) = seen.get(doc_id) {
            return Err(Error::DuplicateDocId {
                doc_id: doc_id.to_string(),
                first,
                second: line_no,
            });
        }
        seen.insert(doc_id.to_string(), line_no);
        entries.push(ManifestEntry {
            path: PathBuf::from(path),
            doc_id: doc_id.to_string(),
            category: category.to_string(),
            line: line_no,
        });
    }
    Ok(Manifest { entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classes(list: &[TagClass]) -> TagClasses {
        list.iter().copied().collect()
    }

    #[test]
    fn parses_single_sentence() {
        let doc = parse_tagged_file(b"The/AT dog/NN ran/VBD ./.", &TagMap::brown()).unwrap();
        assert_eq!(doc.sentences.len(), 1);
        assert_eq!(doc.token_count(), 4);
        assert_eq!(doc.word_count(), 3);
        let last = &doc.sentences[0][3];
        assert_eq!(last.surface, ".");
        assert!(!last.is_word);
    }

    #[test]
    fn parses_two_sentences() {
        let text = "I/PPSS saw/VBD it/PPO ./.\nYou/PPSS see/VB me/PPO ./.\n";
        let doc = parse_tagged_file(text.as_bytes(), &TagMap::brown()).unwrap();
        assert_eq!(doc.sentences.len(), 2);
        assert_eq!(doc.token_count(), 8);
        assert_eq!(doc.word_count(), 6);
    }

    #[test]
    fn blank_lines_are_ignored() {
        let text = "\n\tThe/at jury/nn ./.\n\n\n\tIt/pps ran/vbd ./.\n";
        let doc = parse_tagged_file(text.as_bytes(), &TagMap::brown()).unwrap();
        assert_eq!(doc.sentences.len(), 2);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(
            parse_tagged_file(b"", &TagMap::brown()),
            Err(Error::EmptyDocument)
        ));
        assert!(matches!(
            parse_tagged_file(b"\n  \n", &TagMap::brown()),
            Err(Error::EmptyDocument)
        ));
    }

    #[test]
    fn missing_separator_reports_line() {
        let err = parse_tagged_file(b"a/AT b/NN\nbroken c/NN\n", &TagMap::brown()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_tagged_file(b"a/\n", &TagMap::brown()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn last_slash_splits_surface() {
        let doc = parse_tagged_file(b"1/2/CD", &TagMap::brown()).unwrap();
        assert_eq!(doc.sentences[0][0].surface, "1/2");
        assert_eq!(doc.sentences[0][0].tag, "CD");
    }

    #[test]
    fn invalid_utf8_reports_line() {
        let err = parse_tagged_file(b"a/AT\nb\xff/NN", &TagMap::brown()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn default_map_resolves_feature_tags() {
        let map = TagMap::brown();
        assert_eq!(resolve_tag("RB", &map), classes(&[TagClass::Adverb]));
        assert_eq!(resolve_tag("RBR", &map), classes(&[TagClass::Adverb]));
        assert_eq!(resolve_tag(".", &map), classes(&[TagClass::Punctuation]));
        assert_eq!(resolve_tag("VBG", &map), classes(&[TagClass::PresentParticiple]));
        assert_eq!(resolve_tag("IN", &map), classes(&[TagClass::Preposition]));
        assert_eq!(resolve_tag("in-tl", &map), classes(&[TagClass::Preposition]));
        assert_eq!(resolve_tag("NNS$", &map), classes(&[TagClass::Noun]));
        assert_eq!(resolve_tag("np-tl", &map), classes(&[TagClass::Noun]));
        assert_eq!(resolve_tag("VBZ", &map), classes(&[TagClass::PresentVerb]));
        assert_eq!(resolve_tag("BEM", &map), classes(&[TagClass::PresentVerb]));
        assert_eq!(resolve_tag("DO*", &map), classes(&[TagClass::PresentVerb]));
        assert_eq!(resolve_tag("DOD", &map), TagClasses::EMPTY);
        assert_eq!(resolve_tag("HVD", &map), TagClasses::EMPTY);
        assert_eq!(resolve_tag("VBD", &map), TagClasses::EMPTY);
        assert_eq!(resolve_tag("*", &map), TagClasses::EMPTY);
        assert_eq!(
            resolve_tag("NN+BEZ", &map),
            classes(&[TagClass::Noun, TagClass::PresentVerb])
        );
        assert_eq!(resolve_tag("XYZZY", &map), TagClasses::EMPTY);
        assert!(map.lookup("XYZZY").is_none());
        assert!(map.lookup("AT").is_some());
    }

    #[test]
    fn exact_beats_prefix_and_longer_prefix_wins() {
        let map = TagMap::parse(
            "[tag_classes]\nV* = PRESENT_VERB\nVB* = NOUN\nVBG = PRESENT_PARTICIPLE\n",
        )
        .unwrap();
        assert_eq!(resolve_tag("VBG", &map), classes(&[TagClass::PresentParticiple]));
        assert_eq!(resolve_tag("VBGX", &map), classes(&[TagClass::Noun]));
        assert_eq!(resolve_tag("VX", &map), classes(&[TagClass::PresentVerb]));
    }

    #[test]
    fn strict_mode_rejects_unknown_tags() {
        let map = TagMap::brown().with_strict(true);
        assert!(parse_tagged_file(b"The/AT dog/NN", &map).is_ok());
        let err = parse_tagged_file(b"The/AT\ndog/QQQ", &map).unwrap_err();
        assert!(matches!(err, Error::UnknownTag { line: 2, .. }));
    }

    #[test]
    fn tagmap_errors() {
        assert!(TagMap::parse("[tag_classes]\nRB = ADVERBIAL\n").is_err());
        assert!(TagMap::parse("RB = ADVERB\n").is_err());
        assert!(TagMap::parse("[tag_classes]\nRB = ADVERB\nRB = NOUN\n").is_err());
        assert!(TagMap::parse("[lexicon]\nFIRST_PERSON_PRONOUNS = we\n").is_err());
        assert!(TagMap::parse("[lexicon]\nFIRST_PERSON_PRONOUNS = we\nI = \nME = \n").is_ok());
        assert!(TagMap::parse("[lexicon]\nFIRST_PERSON_PRONOUNS = i, me\n").is_ok());
    }

    #[test]
    fn manifest_parses_entries() {
        let tax = CategoryTaxonomy::brown();
        let m = load_manifest(b"a.txt\td1\tK\n", Some(&tax)).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.entries[0].category, "K");
        assert_eq!(m.entries[0].path, PathBuf::from("a.txt"));
    }

    #[test]
    fn manifest_duplicate_doc_id_cites_both_lines() {
        let text = "# header\na\td1\tA\nb\td2\tA\nc\td3\tB\nd\td4\tB\ne\td5\tC\nf\td3\tC\n";
        let err = load_manifest(text.as_bytes(), None).unwrap_err();
        match err {
            Error::DuplicateDocId { first, second, .. } => assert_eq!((first, second), (4, 7)),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn manifest_unknown_category() {
        let tax = CategoryTaxonomy::brown();
        let err = load_manifest(b"a\td1\tA\nb\td2\tZ\n", Some(&tax)).unwrap_err();
        assert!(matches!(err, Error::UnknownCategory { line: 2, ref code } if code == "Z"));
        assert!(load_manifest(b"a\td1\n", None).is_err());
    }
}
