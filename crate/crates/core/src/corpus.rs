//! Tokenization, vocabulary filtering and windowed word-context counting.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use log::warn;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::tables::ContingencyTable;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CooccurrenceConfig {
    /// Symmetric window radius in tokens.
    pub window: usize,
    /// Words occurring fewer times are removed from the vocabulary.
    pub min_count: usize,
    /// Keep only the most frequent words.
    pub max_vocab: Option<usize>,
    pub lowercase: bool,
}

impl Default for CooccurrenceConfig {
    fn default() -> Self {
        CooccurrenceConfig {
            window: 2,
            min_count: 1,
            max_vocab: None,
            lowercase: true,
        }
    }
}

/// Splits on whitespace after replacing anything that is not alphanumeric
/// (or an apostrophe inside a word) with a space.
pub fn tokenize(text: &str, lowercase: bool) -> Vec<String> {
    let cleaned: String = text
        .chars()
        .map(|ch| if ch.is_alphanumeric() || ch == '\'' { ch } else { ' ' })
        .collect();
    cleaned
        .split_whitespace()
        .map(|tok| tok.trim_matches('\''))
        .filter(|tok| !tok.is_empty())
        .map(|tok| if lowercase { tok.to_lowercase() } else { tok.to_string() })
        .collect()
}

/// The first `percent`% of tokens (rounded down).
pub fn slice_tokens(tokens: &[String], percent: f64) -> &[String] {
    let percent = percent.clamp(0.0, 100.0);
    let keep = ((tokens.len() as f64) * percent / 100.0).floor() as usize;
    &tokens[..keep.min(tokens.len())]
}

/// Vocabulary after `min_count` and `max_vocab`, ordered by descending
/// frequency then label.
pub fn build_vocabulary(tokens: &[String], cfg: &CooccurrenceConfig) -> Vec<String> {
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for tok in tokens {
        *freq.entry(tok.as_str()).or_default() += 1;
    }
    let mut vocab: Vec<(&str, usize)> = freq
        .into_iter()
        .filter(|&(_, count)| count >= cfg.min_count)
        .collect();
    vocab.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    if let Some(cap) = cfg.max_vocab {
        vocab.truncate(cap);
    }
    vocab.into_iter().map(|(w, _)| w.to_string()).collect()
}

/// Counts `#(w, c)` for every token `w` and every context `c` within
/// `window` positions of it. Out-of-vocabulary tokens keep their positions
/// but contribute no pairs.
pub fn count_cooccurrences(tokens: &[String], cfg: &CooccurrenceConfig) -> Result<ContingencyTable> {
    if cfg.window == 0 {
        return Err(Error::InvalidParameter("window must be at least 1".into()));
    }
    let vocab = build_vocabulary(tokens, cfg);
    let index: HashMap<&str, usize> = vocab
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_str(), i))
        .collect();
    let ids: Vec<Option<usize>> = tokens.iter().map(|t| index.get(t.as_str()).copied()).collect();

    let v = vocab.len();
    let mut counts = Matrix::zeros(v, v);
    let mut pairs = 0u64;
    for (i, wi) in ids.iter().enumerate() {
        let Some(wi) = *wi else { continue };
        let lo = i.saturating_sub(cfg.window);
        let hi = (i + cfg.window).min(ids.len().saturating_sub(1));
        for (j, cj) in ids.iter().enumerate().take(hi + 1).skip(lo) {
            if j == i {
                continue;
            }
            if let Some(cj) = *cj {
                counts[(wi, cj)] += 1.0;
                pairs += 1;
            }
        }
    }
    if pairs == 0 {
        return Err(Error::EmptyVocabulary);
    }
    ContingencyTable::new(counts, vocab.clone(), vocab)
}

/// Reads a newline-delimited word list into a set.
pub fn load_stopwords(path: impl AsRef<Path>) -> Result<HashSet<String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let words: HashSet<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect();
    if words.is_empty() {
        warn!("stop-word list {} is empty", path.display());
    }
    Ok(words)
}

/// The English stop-word list shipped with the crate.
pub fn builtin_stopwords() -> HashSet<String> {
    include_str!("../data/stopwords_en.txt")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s, true)
    }

    fn count(t: &ContingencyTable, w: &str, c: &str) -> f64 {
        let i = t.row_labels().iter().position(|l| l == w).unwrap();
        let j = t.col_labels().iter().position(|l| l == c).unwrap();
        t.counts()[(i, j)]
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(toks("a b a"), ["a", "b", "a"]);
        assert!(toks("").is_empty());
        assert_eq!(toks("A b."), ["a", "b"]);
        assert_eq!(tokenize("A b.", false), ["A", "b"]);
        assert_eq!(toks("don't stop, 'quoted'"), ["don't", "stop", "quoted"]);
    }

    #[test]
    fn window_one_hand_enumeration() {
        let cfg = CooccurrenceConfig { window: 1, ..Default::default() };
        let t = count_cooccurrences(&toks("a b a"), &cfg).unwrap();
        assert_eq!(count(&t, "a", "b"), 2.0);
        assert_eq!(count(&t, "b", "a"), 2.0);
        assert_eq!(count(&t, "a", "a"), 0.0);
        assert_eq!(t.n(), 4.0);
    }

    #[test]
    fn window_clipped_at_bounds() {
        let cfg = CooccurrenceConfig { window: 5, ..Default::default() };
        let t = count_cooccurrences(&toks("a b"), &cfg).unwrap();
        assert_eq!(count(&t, "a", "b"), 1.0);
        assert_eq!(count(&t, "b", "a"), 1.0);
        assert_eq!(t.n(), 2.0);
    }

    #[test]
    fn single_token_is_an_error() {
        let cfg = CooccurrenceConfig::default();
        assert!(matches!(count_cooccurrences(&toks("a"), &cfg), Err(Error::EmptyVocabulary)));
        assert!(matches!(count_cooccurrences(&[], &cfg), Err(Error::EmptyVocabulary)));
        let zero = CooccurrenceConfig { window: 0, ..cfg };
        assert!(count_cooccurrences(&toks("a b"), &zero).is_err());
    }

    #[test]
    fn min_count_keeps_positions() {
        // `x` is rare; with window 1 it separates the two `a`s from `b`.
        let cfg = CooccurrenceConfig { window: 1, min_count: 2, ..Default::default() };
        let t = count_cooccurrences(&toks("a x b b a a"), &cfg).unwrap();
        assert!(!t.row_labels().contains(&"x".to_string()));
        assert_eq!(count(&t, "a", "b"), 1.0);
        assert_eq!(count(&t, "b", "b"), 2.0);
    }

    #[test]
    fn vocabulary_cap_keeps_most_frequent() {
        let cfg = CooccurrenceConfig { max_vocab: Some(2), ..Default::default() };
        let v = build_vocabulary(&toks("c a b a b a d"), &cfg);
        assert_eq!(v, ["a", "b"]);
    }

    #[test]
    fn slicing_rounds_down() {
        let t = toks("a b c d e f g h i j");
        assert_eq!(slice_tokens(&t, 20.0), ["a", "b"]);
        assert_eq!(slice_tokens(&t, 100.0).len(), 10);
        assert!(slice_tokens(&t, 0.0).is_empty());
    }

    #[test]
    fn stopword_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sw.txt");
        fs::write(&path, "the\nof\nthe\n\n").unwrap();
        let words = load_stopwords(&path).unwrap();
        assert_eq!(words, ["the".to_string(), "of".to_string()].into());
        assert!(matches!(load_stopwords(dir.path().join("missing.txt")), Err(Error::Io { .. })));
    }

    #[test]
    fn builtin_list_has_common_words() {
        let sw = builtin_stopwords();
        for w in ["the", "of", "and", "a", "to"] {
            assert!(sw.contains(w), "{w}");
        }
    }

    fn token_stream() -> impl Strategy<Value = Vec<String>> {
        prop::collection::vec(0u8..6, 2..80)
            .prop_map(|v| v.into_iter().map(|x| format!("w{x}")).collect())
    }

    proptest! {
        #[test]
        fn table_is_symmetric(tokens in token_stream(), window in 1usize..4) {
            let cfg = CooccurrenceConfig { window, ..Default::default() };
            let t = count_cooccurrences(&tokens, &cfg).unwrap();
            prop_assert_eq!(t.counts(), &t.counts().transpose());
        }

        #[test]
        fn total_is_number_of_in_range_pairs(tokens in token_stream(), window in 1usize..5) {
            let cfg = CooccurrenceConfig { window, ..Default::default() };
            let t = count_cooccurrences(&tokens, &cfg).unwrap();
            // every position pairs with each neighbour at distance 1..=window on both sides
            let len = tokens.len();
            let expected: usize = (1..=window).map(|d| 2 * len.saturating_sub(d)).sum();
            prop_assert_eq!(t.n(), expected as f64);
        }

        #[test]
        fn raising_min_count_never_increases_counts(tokens in token_stream(), mc in 1usize..6) {
            let lo = CooccurrenceConfig { window: 2, min_count: mc, ..Default::default() };
            let hi = CooccurrenceConfig { window: 2, min_count: mc + 2, ..Default::default() };
            let (Ok(a), Ok(b)) = (count_cooccurrences(&tokens, &lo), count_cooccurrences(&tokens, &hi)) else {
                return Ok(());
            };
            for (i, w) in b.row_labels().iter().enumerate() {
                for (j, c) in b.col_labels().iter().enumerate() {
                    let ia = a.row_labels().iter().position(|l| l == w).unwrap();
                    let ja = a.col_labels().iter().position(|l| l == c).unwrap();
                    prop_assert!(b.counts()[(i, j)] <= a.counts()[(ia, ja)]);
                }
            }
        }
    }
}
