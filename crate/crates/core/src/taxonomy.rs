//! Category hierarchy of the Brown corpus and generic flat label sets.
//!
//! The Brown hierarchy has three nested levels: the two broad classes
//! (informative, imaginative), four groups (press, non-fiction, fiction,
//! miscellaneous) and the fifteen sample categories A-R.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Category {
    pub code: String,
    pub name: String,
    pub level: u8,
    pub parent: Option<String>,
    pub symbol: char,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryTaxonomy {
    categories: Vec<Category>,
    index: HashMap<String, usize>,
}

/// Level-3 Brown codes that make up the fiction group.
pub const FICTION_CODES: [&str; 6] = ["K", "L", "M", "N", "P", "R"];

const BROWN_LEVEL1: [(&str, &str, char); 2] =
    [("I", "Informative", '1'), ("II", "Imaginative", '2')];

const BROWN_LEVEL2: [(&str, &str, &str); 4] = [
    ("1", "Press", "I"),
    ("2", "Non-fiction", "I"),
    ("3", "Fiction", "II"),
    ("4", "Misc.", "I"),
];

const BROWN_LEVEL3: [(&str, &str, &str); 15] = [
    ("A", "Press: reportage", "1"),
    ("B", "Press: editorial", "1"),
    ("C", "Press: reviews", "1"),
    ("D", "Religion", "4"),
    ("E", "Skills and Hobbies", "4"),
    ("F", "Popular Lore", "4"),
    ("G", "Belles Lettres, Biographies etc.", "4"),
    ("H", "Government documents & misc.", "2"),
    ("J", "Learned", "2"),
    ("K", "General Fiction", "3"),
    ("L", "Mystery", "3"),
    ("M", "Science Fiction", "3"),
    ("N", "Adventure and Western", "3"),
    ("P", "Romance", "3"),
    ("R", "Humor", "3"),
];

impl CategoryTaxonomy {
    pub fn brown() -> Self {
        let mut categories = Vec::with_capacity(21);
        for (code, name, symbol) in BROWN_LEVEL1 {
            categories.push(Category {
                code: code.into(),
                name: name.into(),
                level: 1,
                parent: None,
                symbol,
            });
        }
        for (code, name, parent) in BROWN_LEVEL2 {
            categories.push(Category {
                code: code.into(),
                name: name.into(),
                level: 2,
                parent: Some(parent.into()),
                symbol: code.chars().next().unwrap(),
            });
        }
        for (code, name, parent) in BROWN_LEVEL3 {
            categories.push(Category {
                code: code.into(),
                name: name.into(),
                level: 3,
                parent: Some(parent.into()),
                symbol: code.chars().next().unwrap(),
            });
        }
        Self::from_categories(categories)
    }

    /// A single-level taxonomy over arbitrary codes, in the given order.
    pub fn flat<S: AsRef<str>>(codes: &[S]) -> Self {
        let mut taxonomy = Self::from_categories(Vec::new());
        for code in codes {
            taxonomy.ensure(code.as_ref());
        }
        taxonomy
    }

    fn from_categories(categories: Vec<Category>) -> Self {
        let index = categories
            .iter()
            .enumerate()
            .map(|(i, c)| (c.code.clone(), i))
            .collect();
        Self { categories, index }
    }

    /// Adds `code` as a top-level category if it is not already known.
    pub fn ensure(&mut self, code: &str) {
        if self.index.contains_key(code) {
            return;
        }
        let taken: Vec<char> = self.categories.iter().map(|c| c.symbol).collect();
        let symbol = pick_symbol(code, &taken);
        self.index.insert(code.to_string(), self.categories.len());
        self.categories.push(Category {
            code: code.to_string(),
            name: code.to_string(),
            level: 1,
            parent: None,
            symbol,
        });
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    pub fn get(&self, code: &str) -> Option<&Category> {
        self.index.get(code).map(|&i| &self.categories[i])
    }

    pub fn contains(&self, code: &str) -> bool {
        self.index.contains_key(code)
    }

    /// Position of `code` in taxonomy order; unknown codes sort last.
    pub fn position(&self, code: &str) -> usize {
        self.index.get(code).copied().unwrap_or(usize::MAX)
    }

    pub fn level_of(&self, code: &str) -> Option<u8> {
        self.get(code).map(|c| c.level)
    }

    /// Codes of one level, in taxonomy order.
    pub fn codes_at(&self, level: u8) -> Vec<&str> {
        self.categories
            .iter()
            .filter(|c| c.level == level)
            .map(|c| c.code.as_str())
            .collect()
    }

    /// Walks up the parent chain from `code` until `level` is reached.
    /// Returns `None` when `code` is unknown or sits above `level`.
    pub fn ancestor(&self, code: &str, level: u8) -> Option<&str> {
        let mut current = self.get(code)?;
        loop {
            if current.level == level {
                return Some(&current.code);
            }
            if current.level < level {
                return None;
            }
            current = self.get(current.parent.as_deref()?)?;
        }
    }

    pub fn symbol(&self, code: &str) -> char {
        self.get(code)
            .map(|c| c.symbol)
            .unwrap_or_else(|| code.chars().next().unwrap_or('?'))
    }

    /// Row label as printed in report tables, e.g. `3. Fiction`.
    pub fn display_name(&self, code: &str) -> String {
        match self.get(code) {
            Some(c) if c.name != c.code => format!("{}. {}", c.code, c.name),
            _ => code.to_string(),
        }
    }

    /// Sorts codes into taxonomy order.
    pub fn sort_codes(&self, codes: &mut [String]) {
        codes.sort_by(|a, b| {
            self.position(a)
                .cmp(&self.position(b))
                .then_with(|| a.cmp(b))
        });
    }
}

impl Default for CategoryTaxonomy {
    fn default() -> Self {
        Self::brown()
    }
}

const FALLBACK_SYMBOLS: &str = "123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";

fn pick_symbol(code: &str, taken: &[char]) -> char {
    code.chars()
        .next()
        .filter(|c| !taken.contains(c) && !c.is_whitespace() && *c != '*')
        .or_else(|| FALLBACK_SYMBOLS.chars().find(|c| !taken.contains(c)))
        .unwrap_or('?')
}
