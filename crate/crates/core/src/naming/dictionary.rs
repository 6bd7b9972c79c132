use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use super::{ProviderError, Role, SynonymProvider, SynonymRequest};

const BUNDLED: &str = include_str!("../../assets/synonyms.tsv");

#[derive(Debug, Error)]
pub enum DictionaryError {
    #[error("cannot read dictionary {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("dictionary line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Synonym table keyed by lowercase identifier stems.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DictionaryProvider {
    stems: BTreeMap<String, Vec<String>>,
}

impl DictionaryProvider {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled dictionary is well-formed")
    }

    pub fn from_file(path: &Path) -> Result<Self, DictionaryError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| DictionaryError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    /// Lines are `stem<TAB>syn1,syn2`; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self, DictionaryError> {
        let mut stems = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: &str| DictionaryError::Parse { line: i + 1, message: message.to_string() };
            let (stem, syns) = line.split_once('\t').ok_or_else(|| err("missing tab"))?;
            let syns: Vec<String> =
                syns.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
            if stem.trim().is_empty() || syns.is_empty() {
                return Err(err("empty stem or synonym list"));
            }
            if stems.insert(stem.trim().to_lowercase(), syns).is_some() {
                return Err(err("duplicate stem"));
            }
        }
        Ok(Self { stems })
    }

    pub fn len(&self) -> usize {
        self.stems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stems.is_empty()
    }

    pub fn synonyms(&self, stem: &str) -> Option<&[String]> {
        self.stems.get(&stem.to_lowercase()).map(Vec::as_slice)
    }

    /// Every candidate for `name`, dictionary hits first, then generic fallbacks.
    pub fn candidates(&self, name: &str, role: Role) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut push = |s: String| {
            if !out.contains(&s) {
                out.push(s);
            }
        };
        if let Some(syns) = self.stems.get(name) {
            syns.iter().cloned().for_each(&mut push);
        }
        let parts = split_words(name);
        let words: Vec<usize> = (0..parts.len()).filter(|&i| !parts[i].is_empty() && parts[i] != "_").collect();
        for &i in words.iter().rev() {
            if let Some(syns) = self.stems.get(&parts[i].to_lowercase()) {
                for s in syns {
                    let mut p = parts.clone();
                    p[i] = match_case(&parts[i], s, i == first_word(&parts));
                    push(p.concat());
                }
            }
        }
        if words.len() >= 2 {
            let acro: String = words.iter().filter_map(|&i| parts[i].chars().next()).collect();
            push(acro.to_lowercase());
        }
        let base = name.trim_matches('_');
        let base = if base.is_empty() { "v" } else { base };
        match role {
            Role::Function => {
                push(format!("do{}", capitalize(base)));
                push(format!("{base}Impl"));
            }
            Role::Parameter | Role::Local => {
                push(format!("{base}Val"));
                push(format!("new{}", capitalize(base)));
            }
        }
        for k in 2..6 {
            push(format!("{base}{k}"));
        }
        out
    }
}

impl SynonymProvider for DictionaryProvider {
    fn propose(&self, request: &SynonymRequest) -> Result<String, ProviderError> {
        let all = self.candidates(&request.original_name, request.role);
        let ok: Vec<&String> = all.iter().filter(|c| request.accepts(c)).collect();
        let pick = if ok.is_empty() {
            &all[request.attempt as usize % all.len()]
        } else {
            ok[request.attempt as usize % ok.len()]
        };
        Ok(pick.clone())
    }
}

fn first_word(parts: &[String]) -> usize {
    parts.iter().position(|p| !p.is_empty() && p != "_").unwrap_or(0)
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn match_case(original: &str, syn: &str, leading: bool) -> String {
    let upper = original.chars().any(|c| c.is_ascii_uppercase());
    if original.len() > 1 && original.chars().all(|c| !c.is_ascii_lowercase()) && upper {
        syn.to_uppercase()
    } else if original.starts_with(|c: char| c.is_ascii_uppercase()) || (!leading && upper) {
        capitalize(syn)
    } else {
        syn.to_string()
    }
}

/// Splits camelCase, PascalCase, acronyms and snake_case; underscores are kept
/// as their own parts so that concatenation restores the input.
pub fn split_words(name: &str) -> Vec<String> {
    let chars: Vec<char> = name.chars().collect();
    let mut out = Vec::new();
    let mut cur = String::new();
    for i in 0..chars.len() {
        let c = chars[i];
        if c == '_' {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            out.push("_".to_string());
            continue;
        }
        if !cur.is_empty() {
            let prev = chars[i - 1];
            let next_lower = chars.get(i + 1).is_some_and(|n| n.is_ascii_lowercase());
            let boundary = (c.is_ascii_uppercase() && (prev.is_ascii_lowercase() || prev.is_ascii_digit()))
                || (c.is_ascii_uppercase() && prev.is_ascii_uppercase() && next_lower);
            if boundary {
                out.push(std::mem::take(&mut cur));
            }
        }
        cur.push(c);
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}
