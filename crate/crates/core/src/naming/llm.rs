use super::{ProviderError, SynonymProvider, SynonymRequest};
use crate::http::{chat_completion, ChatMessage, EndpointConfig};
use crate::syntax::{is_ident_char, is_ident_start};

/// Asks a chat endpoint for one alternative identifier.
#[derive(Debug, Clone)]
pub struct LlmProvider {
    pub config: EndpointConfig,
}

impl LlmProvider {
    pub fn new(config: EndpointConfig) -> Self {
        Self { config }
    }
}

pub(crate) fn synonym_prompt(r: &SynonymRequest) -> String {
    let forbidden: Vec<&str> = r.forbidden.iter().map(String::as_str).collect();
    format!(
        "Propose one alternative name for the {} `{}` in the Java method below. \
         Use a natural synonym or acronym that keeps its meaning. \
         Do not use any of: {}.\nReply with the identifier only.\n\n{}",
        r.role.as_str(),
        r.original_name,
        forbidden.join(", "),
        r.context_snippet
    )
}

/// First identifier-shaped token of a reply.
pub(crate) fn first_identifier(reply: &str) -> Option<String> {
    let mut chars = reply.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if is_ident_start(c) {
            let mut end = i + c.len_utf8();
            while let Some(&(j, d)) = chars.peek() {
                if !is_ident_char(d) {
                    break;
                }
                end = j + d.len_utf8();
                chars.next();
            }
            return Some(reply[i..end].to_string());
        }
        if c.is_ascii_digit() {
            while chars.peek().is_some_and(|&(_, d)| is_ident_char(d)) {
                chars.next();
            }
        }
    }
    None
}

impl SynonymProvider for LlmProvider {
    fn propose(&self, r: &SynonymRequest) -> Result<String, ProviderError> {
        let temperature = if r.attempt == 0 { 0.0 } else { 0.7 };
        let msgs = [ChatMessage::user(synonym_prompt(r))];
        let c = chat_completion(&self.config, &msgs, 1, r.attempt as u64, temperature, false)
            .map_err(|e| ProviderError(e.to_string()))?;
        let text = c.texts.first().ok_or_else(|| ProviderError("empty completion".into()))?;
        first_identifier(text).ok_or_else(|| ProviderError(format!("no identifier in reply {text:?}")))
    }
}
