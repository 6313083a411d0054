//! Mapping raw model output to labels and answer letters.

use crate::corpus::{normalize_label, TaskLabelSet};

/// The label whose first occurrence in the normalized output starts
/// earliest; on equal start positions the longer label wins.
pub fn parse_label(raw_output: &str, labels: &TaskLabelSet) -> Option<String> {
    let haystack = normalize_label(raw_output);
    labels
        .labels()
        .iter()
        .filter_map(|l| haystack.find(l.as_str()).map(|pos| (pos, l)))
        .min_by(|a, b| a.0.cmp(&b.0).then(b.1.len().cmp(&a.1.len())))
        .map(|(_, l)| l.clone())
}

/// Index of the first standalone letter among the first `n_choices` letters
/// of the alphabet, case-insensitive. A letter is standalone when neither
/// neighbour is alphanumeric.
pub fn parse_choice(raw_output: &str, n_choices: usize) -> Option<usize> {
    let chars: Vec<char> = raw_output.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        let upper = c.to_ascii_uppercase();
        if !upper.is_ascii_uppercase() {
            continue;
        }
        let idx = (upper as u8 - b'A') as usize;
        if idx >= n_choices {
            continue;
        }
        let before_ok = i == 0 || !chars[i - 1].is_alphanumeric();
        let after_ok = i + 1 == chars.len() || !chars[i + 1].is_alphanumeric();
        if before_ok && after_ok {
            return Some(idx);
        }
    }
    None
}

/// Letter for a 0-based choice index.
pub fn choice_letter(index: usize) -> Option<char> {
    (index < 26).then(|| (b'A' + index as u8) as char)
}
