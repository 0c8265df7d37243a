//! Text normalization, character n-gram extraction, and the n-gram vocabulary.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Whether text is lowercased before n-grams are extracted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CaseMode {
    Preserve,
    #[default]
    Lowercase,
}

impl FromStr for CaseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lower" | "lowercase" => Ok(CaseMode::Lowercase),
            "preserve" => Ok(CaseMode::Preserve),
            other => Err(Error::InvalidConfig(format!("unknown case mode {other:?}"))),
        }
    }
}

impl fmt::Display for CaseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseMode::Preserve => "preserve",
            CaseMode::Lowercase => "lower",
        })
    }
}

/// Normalized, boundary-padded character sequence.
///
/// Always starts and ends with a space and never contains two spaces in a
/// row, except for the empty input which becomes exactly two spaces.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CharSeq(Vec<char>);

impl CharSeq {
    pub fn chars(&self) -> &[char] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// True for the padded empty string.
    pub fn is_empty(&self) -> bool {
        self.0.len() <= 2
    }

    /// The normalized text without its padding spaces.
    pub fn inner(&self) -> String {
        let n = self.0.len();
        self.0[1..n - 1].iter().collect()
    }
}

/// Strips and collapses whitespace, optionally lowercases, then pads both ends
/// with one space.
pub fn normalize(text: &str, case: CaseMode) -> CharSeq {
    let mut chars = vec![' '];
    for (i, word) in text.split_whitespace().enumerate() {
        if i > 0 {
            chars.push(' ');
        }
        match case {
            CaseMode::Preserve => chars.extend(word.chars()),
            CaseMode::Lowercase => chars.extend(word.chars().flat_map(char::to_lowercase)),
        }
    }
    chars.push(' ');
    CharSeq(chars)
}

/// Non-empty set of n-gram orders, each in `1..=255`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orders(BTreeSet<usize>);

impl Orders {
    pub fn new(orders: impl IntoIterator<Item = usize>) -> Result<Self> {
        let set: BTreeSet<usize> = orders.into_iter().collect();
        if set.is_empty() {
            return Err(Error::InvalidOrders("no orders given".into()));
        }
        if let Some(bad) = set.iter().find(|&&n| n == 0 || n > u8::MAX as usize) {
            return Err(Error::InvalidOrders(format!("order {bad} outside 1..=255")));
        }
        Ok(Orders(set))
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn max(&self) -> usize {
        *self.0.iter().next_back().expect("orders are non-empty")
    }

    pub fn contains(&self, n: usize) -> bool {
        self.0.contains(&n)
    }
}

impl FromStr for Orders {
    type Err = Error;

    /// Parses a comma-separated list such as `2,3,4`.
    fn from_str(s: &str) -> Result<Self> {
        let parsed = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidOrders(format!("bad order {p:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Orders::new(parsed)
    }
}

impl fmt::Display for Orders {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Every contiguous window of each requested length, with multiplicity.
pub fn extract_ngrams(seq: &CharSeq, orders: &Orders) -> BTreeMap<String, u32> {
    let mut out = BTreeMap::new();
    for n in orders.iter() {
        for window in seq.chars().windows(n) {
            *out.entry(window.iter().collect::<String>()).or_insert(0) += 1;
        }
    }
    out
}

/// How the vocabulary is pruned after counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VocabPolicy {
    /// Keep n-grams seen at least this many times.
    MinCount(u64),
    /// Keep the k most frequent n-grams of each order.
    TopKPerOrder(usize),
}

impl FromStr for VocabPolicy {
    type Err = Error;

    /// `mincount:C` or `topk:K`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("bad vocab policy {s:?}; expected mincount:C or topk:K"));
        let (kind, value) = s.split_once(':').ok_or_else(bad)?;
        let value: u64 = value.trim().parse().map_err(|_| bad())?;
        if value == 0 {
            return Err(bad());
        }
        match kind.trim() {
            "mincount" => Ok(VocabPolicy::MinCount(value)),
            "topk" => Ok(VocabPolicy::TopKPerOrder(value as usize)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for VocabPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VocabPolicy::MinCount(c) => write!(f, "mincount:{c}"),
            VocabPolicy::TopKPerOrder(k) => write!(f, "topk:{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VocabEntry {
    pub ngram: String,
    pub order: usize,
    /// Corpus frequency. Zero for vocabularies restored from a model file,
    /// which does not store counts.
    pub count: u64,
}

/// Ordered n-gram → row index map.
#[derive(Debug, Clone)]
pub struct NGramVocab {
    entries: Vec<VocabEntry>,
    index: HashMap<String, u32>,
    orders: BTreeSet<usize>,
}

impl PartialEq for NGramVocab {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries && self.orders == other.orders
    }
}

impl NGramVocab {
    /// Builds a vocabulary keeping `entries` in the given order.
    ///
    /// Every entry's order must equal its character length and be listed in
    /// `orders`; n-grams must be unique.
    pub fn from_entries(entries: Vec<VocabEntry>, orders: BTreeSet<usize>) -> Result<Self> {
        let mut index = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            let len = e.ngram.chars().count();
            if len != e.order || !orders.contains(&e.order) {
                return Err(Error::InvalidOrders(format!(
                    "n-gram {:?} has length {len} but order {}",
                    e.ngram, e.order
                )));
            }
            if index.insert(e.ngram.clone(), i as u32).is_some() {
                return Err(Error::InvalidConfig(format!("duplicate n-gram {:?}", e.ngram)));
            }
        }
        Ok(NGramVocab { entries, index, orders })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    pub fn orders(&self) -> &BTreeSet<usize> {
        &self.orders
    }

    pub fn max_order(&self) -> usize {
        self.orders.iter().next_back().copied().unwrap_or(0)
    }

    pub fn get(&self, ngram: &str) -> Option<usize> {
        self.index.get(ngram).map(|&i| i as usize)
    }

    pub fn ngram(&self, idx: usize) -> Option<&str> {
        self.entries.get(idx).map(|e| e.ngram.as_str())
    }

    /// 64-bit FNV-1a over the ordered (order, n-gram) sequence.
    ///
    /// Counts are excluded so a vocabulary restored from a model file keeps
    /// the fingerprint of the one it was trained with.
    pub fn fingerprint(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        let mut feed = |byte: u8| {
            h ^= byte as u64;
            h = h.wrapping_mul(PRIME);
        };
        for e in &self.entries {
            feed(e.order as u8);
            e.ngram.bytes().for_each(&mut feed);
            feed(0xff);
        }
        h
    }

    /// Serializes to the tab-separated vocabulary file format.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&escape_ngram(&e.ngram));
            out.push('\t');
            out.push_str(&e.order.to_string());
            out.push('\t');
            out.push_str(&e.count.to_string());
            out.push('\n');
        }
        out
    }

    /// Parses the vocabulary file format. Errors carry a 1-based line number.
    pub fn parse_tsv(text: &str) -> std::result::Result<Self, (usize, String)> {
        let mut entries = Vec::new();
        let mut orders = BTreeSet::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err((lineno, format!("expected 3 tab-separated fields, found {}", fields.len())));
            }
            let ngram = unescape_ngram(fields[0]).map_err(|m| (lineno, m))?;
            let order: usize = fields[1].parse().map_err(|_| (lineno, format!("bad order {:?}", fields[1])))?;
            let count: u64 = fields[2].parse().map_err(|_| (lineno, format!("bad count {:?}", fields[2])))?;
            orders.insert(order);
            entries.push(VocabEntry { ngram, order, count });
        }
        NGramVocab::from_entries(entries, orders).map_err(|e| (0, e.to_string()))
    }
}

fn escape_ngram(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            ' ' => out.push_str("\\s"),
            '\\' => out.push_str("\\\\"),
            c => out.push(c),
        }
    }
    out
}

fn unescape_ngram(s: &str) -> std::result::Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('s') => out.push(' '),
            Some('\\') => out.push('\\'),
            other => return Err(format!("bad escape \\{}", other.map(String::from).unwrap_or_default())),
        }
    }
    Ok(out)
}

/// Counts n-grams over the normalized corpus and prunes them per `policy`.
///
/// Entries are ordered by (order ascending, count descending, n-gram
/// ascending by code point); the result is independent of corpus order.
pub fn build_vocab<I, S>(corpus: I, orders: &Orders, policy: VocabPolicy, case: CaseMode) -> Result<NGramVocab>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut seen_any = false;
    for text in corpus {
        seen_any = true;
        let seq = normalize(text.as_ref(), case);
        for (gram, c) in extract_ngrams(&seq, orders) {
            *counts.entry(gram).or_insert(0) += c as u64;
        }
    }
    if !seen_any {
        return Err(Error::EmptyCorpus);
    }

    let mut by_order: BTreeMap<usize, Vec<(String, u64)>> = BTreeMap::new();
    for (gram, count) in counts {
        by_order.entry(gram.chars().count()).or_default().push((gram, count));
    }

    let mut entries = Vec::new();
    for (order, mut grams) in by_order {
        grams.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let kept: Box<dyn Iterator<Item = (String, u64)>> = match policy {
            VocabPolicy::MinCount(min) => Box::new(grams.into_iter().filter(move |g| g.1 >= min)),
            VocabPolicy::TopKPerOrder(k) => Box::new(grams.into_iter().take(k)),
        };
        entries.extend(kept.map(|(ngram, count)| VocabEntry { ngram, order, count }));
    }
    if entries.is_empty() {
        log::warn!("vocabulary is empty after applying {policy}");
    }
    NGramVocab::from_entries(entries, orders.iter().collect())
}

/// Sparse n-gram index → count map, sorted by index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountVector(Vec<(u32, u32)>);

impl CountVector {
    /// Merges duplicate indices by summation and drops zero counts.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, u32)>) -> Self {
        let mut map: BTreeMap<u32, u32> = BTreeMap::new();
        for (idx, c) in pairs {
            *map.entry(idx as u32).or_insert(0) += c;
        }
        CountVector(map.into_iter().filter(|&(_, c)| c > 0).collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0.iter().map(|&(i, c)| (i as usize, c))
    }

    /// Number of distinct n-grams.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of n-gram tokens, counting multiplicity.
    pub fn total(&self) -> u64 {
        self.0.iter().map(|&(_, c)| c as u64).sum()
    }

    pub fn get(&self, idx: usize) -> u32 {
        self.0
            .binary_search_by_key(&(idx as u32), |&(i, _)| i)
            .map(|p| self.0[p].1)
            .unwrap_or(0)
    }

    pub fn max_index(&self) -> Option<usize> {
        self.0.last().map(|&(i, _)| i as usize)
    }
}

/// Maps the in-vocabulary n-grams of `seq` to their row indices.
pub fn encode(seq: &CharSeq, vocab: &NGramVocab) -> CountVector {
    let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
    let mut buf = String::new();
    for &n in vocab.orders() {
        for window in seq.chars().windows(n) {
            buf.clear();
            buf.extend(window);
            if let Some(&idx) = vocab.index.get(buf.as_str()) {
                *counts.entry(idx).or_insert(0) += 1;
            }
        }
    }
    CountVector(counts.into_iter().collect())
}

/// `encode(normalize(text))`.
pub fn encode_text(text: &str, vocab: &NGramVocab, case: CaseMode) -> CountVector {
    encode(&normalize(text, case), vocab)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(chars: &str) -> CharSeq {
        CharSeq(chars.chars().collect())
    }

    fn orders(ns: &[usize]) -> Orders {
        Orders::new(ns.iter().copied()).unwrap()
    }

    fn counts(pairs: &[(&str, u32)]) -> BTreeMap<String, u32> {
        pairs.iter().map(|&(g, c)| (g.to_string(), c)).collect()
    }

    #[test]
    fn normalize_pads_collapses_and_folds() {
        assert_eq!(normalize("the cat", CaseMode::Preserve), seq(" the cat "));
        assert_eq!(normalize("  A  b ", CaseMode::Lowercase), seq(" a b "));
        assert_eq!(normalize("", CaseMode::Preserve), seq("  "));
        assert_eq!(normalize("\t\n", CaseMode::Preserve), seq("  "));
        assert_eq!(normalize("Ab", CaseMode::Preserve), seq(" Ab "));
        assert_eq!(normalize("x\t y", CaseMode::Lowercase).inner(), "x y");
    }

    #[test]
    fn ngrams_are_code_points() {
        let s = normalize("né", CaseMode::Preserve);
        assert_eq!(s.len(), 4);
        assert_eq!(extract_ngrams(&s, &orders(&[2])), counts(&[(" n", 1), ("né", 1), ("é ", 1)]));
    }

    #[test]
    fn extract_examples() {
        assert_eq!(
            extract_ngrams(&seq(" ab "), &orders(&[2])),
            counts(&[(" a", 1), ("ab", 1), ("b ", 1)])
        );
        assert_eq!(extract_ngrams(&seq(" a a "), &orders(&[2])), counts(&[(" a", 2), ("a ", 2)]));
        assert_eq!(
            extract_ngrams(&seq(" ab "), &orders(&[2, 3])),
            counts(&[(" a", 1), ("ab", 1), ("b ", 1), (" ab", 1), ("ab ", 1)])
        );
        // longer than the sequence
        assert!(extract_ngrams(&seq("  "), &orders(&[3])).is_empty());
    }

    #[test]
    fn orders_validation() {
        assert!(Orders::new([]).is_err());
        assert!(Orders::new([0, 2]).is_err());
        assert!(Orders::new([256]).is_err());
        assert_eq!("2, 3,4".parse::<Orders>().unwrap(), orders(&[2, 3, 4]));
        assert!("2,x".parse::<Orders>().is_err());
    }

    #[test]
    fn policy_parsing() {
        assert_eq!("mincount:2".parse::<VocabPolicy>().unwrap(), VocabPolicy::MinCount(2));
        assert_eq!("topk:100".parse::<VocabPolicy>().unwrap(), VocabPolicy::TopKPerOrder(100));
        assert!("topk:0".parse::<VocabPolicy>().is_err());
        assert!("top:3".parse::<VocabPolicy>().is_err());
    }

    fn grams(v: &NGramVocab) -> Vec<(&str, u64)> {
        v.entries().iter().map(|e| (e.ngram.as_str(), e.count)).collect()
    }

    #[test]
    fn build_vocab_min_count() {
        let v = build_vocab(["ab", "ab", "cd"], &orders(&[2]), VocabPolicy::MinCount(2), CaseMode::Lowercase).unwrap();
        assert_eq!(grams(&v), vec![(" a", 2), ("ab", 2), ("b ", 2)]);
    }

    #[test]
    fn build_vocab_top_k_breaks_ties_by_code_point() {
        let v = build_vocab(["ab", "ab", "cd"], &orders(&[2]), VocabPolicy::TopKPerOrder(2), CaseMode::Lowercase)
            .unwrap();
        assert_eq!(grams(&v), vec![(" a", 2), ("ab", 2)]);
    }

    #[test]
    fn build_vocab_top_k_is_per_order() {
        let v = build_vocab(["abab"], &orders(&[1, 2]), VocabPolicy::TopKPerOrder(1), CaseMode::Lowercase).unwrap();
        assert_eq!(grams(&v), vec![(" ", 2), ("ab", 2)]);
        let all = build_vocab(["ab"], &orders(&[2]), VocabPolicy::TopKPerOrder(50), CaseMode::Lowercase).unwrap();
        assert_eq!(all.len(), 3);
    }

    #[test]
    fn build_vocab_threshold_may_empty_the_vocab() {
        let v = build_vocab(["ab"], &orders(&[2]), VocabPolicy::MinCount(2), CaseMode::Lowercase).unwrap();
        assert!(v.is_empty());
    }

    #[test]
    fn build_vocab_rejects_empty_corpus() {
        let empty: [&str; 0] = [];
        let err = build_vocab(empty, &orders(&[2]), VocabPolicy::MinCount(1), CaseMode::Lowercase).unwrap_err();
        assert_eq!(err.to_string(), "empty corpus");
    }

    #[test]
    fn build_vocab_counts_after_folding() {
        let v = build_vocab(["AB", "ab"], &orders(&[2]), VocabPolicy::MinCount(2), CaseMode::Lowercase).unwrap();
        assert_eq!(v.len(), 3);
        let p = build_vocab(["AB", "ab"], &orders(&[2]), VocabPolicy::MinCount(2), CaseMode::Preserve).unwrap();
        assert!(p.is_empty());
    }

    #[test]
    fn encode_examples() {
        let v = build_vocab(["ab"], &orders(&[2]), VocabPolicy::MinCount(1), CaseMode::Lowercase).unwrap();
        assert_eq!(grams(&v), vec![(" a", 1), ("ab", 1), ("b ", 1)]);
        let ab = encode_text("ab", &v, CaseMode::Lowercase);
        assert_eq!(ab.iter().collect::<Vec<_>>(), vec![(0, 1), (1, 1), (2, 1)]);
        assert!(encode_text("zz", &v, CaseMode::Lowercase).is_empty());

        let entries = vec![
            VocabEntry { ngram: " a".into(), order: 2, count: 0 },
            VocabEntry { ngram: "a ".into(), order: 2, count: 0 },
        ];
        let v2 = NGramVocab::from_entries(entries, [2].into()).unwrap();
        let cv = encode_text("a a", &v2, CaseMode::Lowercase);
        assert_eq!(cv.get(v2.get(" a").unwrap()), 2);
        assert_eq!(cv.get(v2.get("a ").unwrap()), 2);
        assert_eq!(cv.total(), 4);
    }

    #[test]
    fn from_entries_rejects_inconsistent_entries() {
        let bad_len = vec![VocabEntry { ngram: "abc".into(), order: 2, count: 1 }];
        assert!(NGramVocab::from_entries(bad_len, [2].into()).is_err());
        let dup = vec![
            VocabEntry { ngram: "ab".into(), order: 2, count: 1 },
            VocabEntry { ngram: "ab".into(), order: 2, count: 1 },
        ];
        assert!(NGramVocab::from_entries(dup, [2].into()).is_err());
    }

    #[test]
    fn tsv_escapes_spaces_and_backslashes() {
        let v = build_vocab(["a\\b c"], &orders(&[2, 3]), VocabPolicy::MinCount(1), CaseMode::Lowercase).unwrap();
        let text = v.to_tsv();
        assert!(text.lines().any(|l| l.starts_with("\\sa\t2\t")));
        assert!(text.lines().any(|l| l.starts_with("a\\\\\t2\t")));
        let back = NGramVocab::parse_tsv(&text).unwrap();
        assert_eq!(back, v);
        assert_eq!(back.fingerprint(), v.fingerprint());
        assert_eq!(NGramVocab::parse_tsv("ab\t2\n").unwrap_err().0, 1);
        assert_eq!(NGramVocab::parse_tsv("ab\t2\t1\n\\q\t2\t1\n").unwrap_err().0, 2);
    }

    #[test]
    fn fingerprint_ignores_counts_but_not_order() {
        let a = NGramVocab::from_entries(
            vec![
                VocabEntry { ngram: "ab".into(), order: 2, count: 5 },
                VocabEntry { ngram: "cd".into(), order: 2, count: 1 },
            ],
            [2].into(),
        )
        .unwrap();
        let mut entries = a.entries().to_vec();
        entries.iter_mut().for_each(|e| e.count = 0);
        let b = NGramVocab::from_entries(entries.clone(), [2].into()).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        entries.reverse();
        let c = NGramVocab::from_entries(entries, [2].into()).unwrap();
        assert_ne!(a.fingerprint(), c.fingerprint());
    }

    fn text_strategy() -> impl Strategy<Value = String> {
        proptest::string::string_regex("[ abcé\t]{0,12}").unwrap()
    }

    proptest! {
        #[test]
        fn window_count_matches_length(text in text_strategy(), n in 1usize..6) {
            let s = normalize(&text, CaseMode::Preserve);
            let total: u32 = extract_ngrams(&s, &orders(&[n])).values().sum();
            prop_assert_eq!(total as usize, s.len().saturating_sub(n - 1));
        }

        #[test]
        fn normalized_sequences_are_padded_without_double_spaces(text in text_strategy()) {
            let s = normalize(&text, CaseMode::Lowercase);
            prop_assert_eq!(s.chars()[0], ' ');
            prop_assert_eq!(*s.chars().last().unwrap(), ' ');
            if !s.is_empty() {
                prop_assert!(!s.chars().windows(2).any(|w| w == [' ', ' ']));
            }
        }

        #[test]
        fn build_vocab_ignores_corpus_order(mut corpus in proptest::collection::vec(text_strategy(), 1..8), k in 1usize..6) {
            let o = orders(&[1, 2, 3]);
            let a = build_vocab(&corpus, &o, VocabPolicy::TopKPerOrder(k), CaseMode::Lowercase).unwrap();
            corpus.reverse();
            let b = build_vocab(&corpus, &o, VocabPolicy::TopKPerOrder(k), CaseMode::Lowercase).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn restriction_keeps_remaining_counts(text in text_strategy(), drop in 0usize..10) {
            let o = orders(&[2, 3]);
            let full = build_vocab(["abc cab bca é"], &o, VocabPolicy::MinCount(1), CaseMode::Lowercase).unwrap();
            let drop = drop % full.len();
            let kept: Vec<VocabEntry> = full.entries().iter().enumerate()
                .filter(|&(i, _)| i != drop).map(|(_, e)| e.clone()).collect();
            let small = NGramVocab::from_entries(kept, full.orders().clone()).unwrap();
            let s = normalize(&text, CaseMode::Lowercase);
            let big_cv = encode(&s, &full);
            let small_cv = encode(&s, &small);
            for e in small.entries() {
                prop_assert_eq!(small_cv.get(small.get(&e.ngram).unwrap()), big_cv.get(full.get(&e.ngram).unwrap()));
            }
        }
    }
}
