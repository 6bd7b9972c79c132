use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnmatchedOccurrence {
    pub text_index: usize,
    pub byte_offset: usize,
    pub surrounding_line: String,
}

/// Occurrences of an old name found only inside longer identifiers.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnmatchedReport {
    pub entries: Vec<UnmatchedOccurrence>,
}

impl UnmatchedReport {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}

fn word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'$'
}

/// Replaces whole-word occurrences of `old_name`; offsets in the report refer
/// to the input texts.
pub fn update_references(texts: &[String], old_name: &str, new_name: &str) -> (Vec<String>, UnmatchedReport) {
    let mut report = UnmatchedReport::default();
    let mut out = Vec::with_capacity(texts.len());
    for (ti, text) in texts.iter().enumerate() {
        if old_name.is_empty() || old_name == new_name {
            out.push(text.clone());
            continue;
        }
        let bytes = text.as_bytes();
        let mut result = String::with_capacity(text.len());
        let mut last = 0;
        for (off, _) in text.match_indices(old_name) {
            let end = off + old_name.len();
            let before = off > 0 && word_byte(bytes[off - 1]);
            let after = end < bytes.len() && word_byte(bytes[end]);
            if before || after {
                let ls = text[..off].rfind('\n').map_or(0, |p| p + 1);
                let le = text[end..].find('\n').map_or(text.len(), |p| end + p);
                report.entries.push(UnmatchedOccurrence {
                    text_index: ti,
                    byte_offset: off,
                    surrounding_line: text[ls..le].trim_end_matches('\r').to_string(),
                });
            } else {
                result.push_str(&text[last..off]);
                result.push_str(new_name);
                last = end;
            }
        }
        result.push_str(&text[last..]);
        out.push(result);
    }
    (out, report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(s: &str) -> (String, UnmatchedReport) {
        let (mut v, r) = update_references(&[s.to_string()], "add", "sum");
        (v.remove(0), r)
    }

    #[test]
    fn rewrites_calls_and_trace_frames() {
        assert_eq!(one("assertEquals(3, add(1,2));").0, "assertEquals(3, sum(1,2));");
        assert_eq!(one("\tat Foo.add(Foo.java:12)").0, "\tat Foo.sum(Foo.java:12)");
    }

    #[test]
    fn reports_substrings() {
        let (t, r) = one("x.addAll(y);\nadd(z); $add");
        assert_eq!(t, "x.addAll(y);\nsum(z); $add");
        assert_eq!(r.len(), 2);
        assert_eq!(r.entries[0].byte_offset, 2);
        assert_eq!(r.entries[0].surrounding_line, "x.addAll(y);");
    }

    #[test]
    fn reverse_replacement_restores() {
        let s = "add(add(1), x_add) + add";
        let (t, _) = one(s);
        let (back, _) = update_references(&[t], "sum", "add");
        assert_eq!(back[0], s);
    }
}
