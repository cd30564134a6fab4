use std::ops::Range;

fn is_terminal_punctuation(c: char) -> bool {
    matches!(c, '.' | '?' | '!' | ',')
}

/// Splits on whitespace and detaches trailing `. ? ! ,` as separate tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_with_offsets(text).into_iter().map(|(t, _)| t).collect()
}

/// Like [`tokenize`], with the character range of every token in `text`.
pub fn tokenize_with_offsets(text: &str) -> Vec<(String, Range<usize>)> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        let mut word_end = i;
        while word_end > start && is_terminal_punctuation(chars[word_end - 1]) {
            word_end -= 1;
        }
        if word_end > start {
            out.push((chars[start..word_end].iter().collect(), start..word_end));
        }
        for (p, c) in chars.iter().enumerate().take(i).skip(word_end) {
            out.push((c.to_string(), p..p + 1));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_words() {
        assert_eq!(tokenize("John is sixty-five years old").len(), 5);
        assert_eq!(
            tokenize("la reine ait soixante-cinq ans"),
            ["la", "reine", "ait", "soixante-cinq", "ans"]
        );
        assert!(tokenize("").is_empty());
        assert!(tokenize("  \t ").is_empty());
    }

    #[test]
    fn punctuation() {
        assert_eq!(tokenize("old?"), ["old", "?"]);
        assert_eq!(tokenize("yes, 3.5 now!?"), ["yes", ",", "3.5", "now", "!", "?"]);
        assert_eq!(tokenize("..."), [".", ".", "."]);
    }

    #[test]
    fn offsets_count_characters() {
        let t = tokenize_with_offsets("année ok.");
        assert_eq!(t[0].1, 0..5);
        assert_eq!(t[1].1, 6..8);
        assert_eq!(t[2].1, 8..9);
    }
}
