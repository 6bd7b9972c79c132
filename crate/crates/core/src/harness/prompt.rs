use serde::{Deserialize, Serialize};

use super::corpus::{BugRecord, Variant};
use crate::http::ChatMessage;

pub const MAX_PATCHES: usize = 5;

const SYSTEM: &str = "You are an expert Java developer who repairs bugs in Java functions.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub system_text: String,
    pub user_text: String,
    pub requested_patch_count: usize,
}

impl PromptBundle {
    pub fn messages(&self) -> Vec<ChatMessage> {
        vec![ChatMessage::system(&self.system_text), ChatMessage::user(&self.user_text)]
    }
}

/// Chain-of-thought repair prompt for one variant. `patch_count` is clamped to 1..=5.
pub fn build_prompt(bug: &BugRecord, variant: &Variant, patch_count: usize) -> PromptBundle {
    let n = patch_count.clamp(1, MAX_PATCHES);
    let mut u = String::new();
    u.push_str("The following Java function contains a bug.\n\n```java\n");
    u.push_str(variant.method_text.trim_end());
    u.push_str("\n```\n\n");
    if let Some(doc) = bug.javadoc.as_deref().filter(|d| !d.trim().is_empty()) {
        u.push_str("Javadoc of the function:\n");
        u.push_str(doc.trim_end());
        u.push_str("\n\n");
    }
    u.push_str(&format!("The trigger test `{}` fails with:\n```\n", variant.trigger_test_name));
    u.push_str(variant.stack_trace.trim_end());
    u.push_str("\n```\n\n");
    u.push_str("First analyze the root cause of the bug step by step. Then propose possible solutions. Finally implement them.\n");
    if n == 1 {
        u.push_str(
            "Produce one fixed version of the function as a complete method in a single ```java fenced code block.\n",
        );
    } else {
        u.push_str(&format!(
            "Produce {n} candidate fixed versions of the function. Give each one as a complete method in its own ```java fenced code block.\n"
        ));
    }
    PromptBundle { system_text: SYSTEM.to_string(), user_text: u, requested_patch_count: n }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::corpus::VariantKind;
    use crate::syntax::SourceSpan;

    fn bug(javadoc: Option<&str>) -> (BugRecord, Variant) {
        let rec = BugRecord {
            bug_id: "B-1".into(),
            project_path: ".".into(),
            source_file: "A.java".into(),
            function_span: SourceSpan::default(),
            javadoc: javadoc.map(String::from),
            trigger_test_name: "ATest::t".into(),
            stack_trace: "java.lang.AssertionError".into(),
            validation_command: "{project}".into(),
            timeout_s: 1,
            test_files: vec![],
        };
        let v = Variant {
            bug_id: "B-1".into(),
            kind: VariantKind::Original,
            method_text: "int f(int a) {\n    return a;\n}\n".into(),
            trigger_test_name: "ATest::t".into(),
            stack_trace: "java.lang.AssertionError".into(),
            file_overrides: Default::default(),
        };
        (rec, v)
    }

    #[test]
    fn patch_count_wording() {
        let (b, v) = bug(Some("/** Returns a. */"));
        let p = build_prompt(&b, &v, 5);
        assert!(p.user_text.contains("Produce 5 candidate fixed versions"));
        assert!(p.user_text.contains("int f(int a) {\n    return a;\n}"));
        assert!(p.user_text.contains("Javadoc"));
        let p1 = build_prompt(&b, &v, 1);
        assert!(p1.user_text.contains("Produce one fixed version"));
        assert_eq!(p1.requested_patch_count, 1);
        assert_eq!(build_prompt(&b, &v, 5), p);
    }

    #[test]
    fn javadoc_section_is_optional() {
        let (b, v) = bug(None);
        assert!(!build_prompt(&b, &v, 2).user_text.contains("Javadoc"));
    }
}
