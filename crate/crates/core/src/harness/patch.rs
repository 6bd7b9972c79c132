use serde::{Deserialize, Serialize};

use crate::syntax::{parse_method, Method};

/// Name and arity a patch must keep to be spliced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub name: String,
    pub arity: usize,
}

impl Signature {
    pub fn of(m: &Method) -> Self {
        Signature { name: m.name.clone(), arity: m.arity() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchCandidate {
    pub raw_block: String,
    #[serde(skip)]
    pub parsed: Option<Method>,
    pub signature_matches_target: bool,
}

/// Contents of every fenced code block, in order. An unterminated final
/// fence runs to the end of the text.
pub fn fenced_blocks(text: &str) -> Vec<String> {
    let mut blocks = Vec::new();
    let mut current: Option<Vec<&str>> = None;
    for line in text.lines() {
        let fence = line.trim_start().starts_with("```");
        match (&mut current, fence) {
            (None, true) => current = Some(Vec::new()),
            (Some(lines), true) => {
                blocks.push(lines.join("\n"));
                current = None;
            }
            (Some(lines), false) => lines.push(line),
            (None, false) => {}
        }
    }
    if let Some(lines) = current {
        if !lines.is_empty() {
            blocks.push(lines.join("\n"));
        }
    }
    blocks
}

/// One candidate per fenced block; only blocks holding a method with the
/// target's name and arity are splice-eligible.
pub fn extract_patches(response_text: &str, target: &Signature) -> Vec<PatchCandidate> {
    fenced_blocks(response_text)
        .into_iter()
        .filter(|b| !b.trim().is_empty())
        .map(|raw_block| {
            let parsed = parse_method(&raw_block).ok();
            let signature_matches_target =
                parsed.as_ref().is_some_and(|m| m.name == target.name && m.arity() == target.arity);
            PatchCandidate { raw_block, parsed, signature_matches_target }
        })
        .collect()
}
