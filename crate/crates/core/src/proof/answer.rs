use std::fmt;

use serde::{Deserialize, Serialize};

pub const DEFAULT_ANSWER_TAG: &str = "</think>";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Answer {
    Proved,
    Disproved,
    Unknown,
}

impl Answer {
    pub const ALL: [Answer; 3] = [Answer::Proved, Answer::Disproved, Answer::Unknown];

    pub fn marker(self) -> &'static str {
        match self {
            Answer::Proved => "__PROVED__",
            Answer::Disproved => "__DISPROVED__",
            Answer::Unknown => "__UNKNOWN__",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Answer::Proved => "PROVED",
            Answer::Disproved => "DISPROVED",
            Answer::Unknown => "UNKNOWN",
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Text after the last occurrence of `tag`, or the whole text.
pub fn strip_preamble<'a>(text: &'a str, tag: &str) -> &'a str {
    if tag.is_empty() {
        return text;
    }
    match text.rfind(tag) {
        Some(i) => &text[i + tag.len()..],
        None => text,
    }
}

/// Last answer marker in the text. A marker needs exactly two underscores on
/// each side, so `___PROVED__` does not count.
pub fn extract_answer(text: &str) -> Option<Answer> {
    let bytes = text.as_bytes();
    let mut best: Option<(usize, Answer)> = None;
    for answer in Answer::ALL {
        let marker = answer.marker();
        let mut from = 0;
        while let Some(pos) = text[from..].find(marker) {
            let start = from + pos;
            let end = start + marker.len();
            let clean_left = start == 0 || bytes[start - 1] != b'_';
            let clean_right = end == bytes.len() || bytes[end] != b'_';
            if clean_left && clean_right && best.is_none_or(|(b, _)| start > b) {
                best = Some((start, answer));
            }
            from = start + 1;
        }
    }
    best.map(|(_, a)| a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strip_examples() {
        assert_eq!(strip_preamble("<think>maybe…</think>Step 1: …", "</think>"), "Step 1: …");
        assert_eq!(strip_preamble("no tag here", "</think>"), "no tag here");
        assert_eq!(strip_preamble("a</think>b</think>c", "</think>"), "c");
    }

    #[test]
    fn answer_examples() {
        assert_eq!(extract_answer("…Final conclusion: __PROVED__"), Some(Answer::Proved));
        assert_eq!(extract_answer("…__PROVED__ … wait … __DISPROVED__"), Some(Answer::Disproved));
        assert_eq!(extract_answer("no marker"), None);
        assert_eq!(extract_answer("___PROVED__ or __UNKNOWN___"), None);
        assert_eq!(extract_answer("__UNKNOWN__"), Some(Answer::Unknown));
    }
}
