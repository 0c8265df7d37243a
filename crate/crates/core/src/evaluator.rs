//! Correlation metrics and the similarity evaluation protocols.

use std::collections::{BTreeMap, HashSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{cosine_unchecked, Model};
use crate::scalar::Scalar;
use crate::vocab::{encode_text, CaseMode, NGramVocab};

/// Product-moment correlation.
pub fn pearson<T: Scalar>(xs: &[T], ys: &[T]) -> Result<T> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch { left: xs.len(), right: ys.len() });
    }
    if xs.len() < 2 {
        return Err(Error::DegenerateInput("need at least two points"));
    }
    let n = T::from_usize(xs.len()).unwrap();
    let mx = xs.iter().fold(T::zero(), |a, &x| a + x) / n;
    let my = ys.iter().fold(T::zero(), |a, &y| a + y) / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == T::zero() || syy == T::zero() {
        return Err(Error::DegenerateInput("zero variance"));
    }
    let r = sxy / (sxx * syy).sqrt();
    Ok(r.max(-T::one()).min(T::one()))
}

/// 1-based ranks, with tied values sharing the mean of the positions they span.
pub fn average_ranks<T: Scalar>(xs: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut ranks = vec![T::zero(); xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let avg = T::from_usize(start + 1 + end).unwrap() / T::of(2.0);
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

/// Rank correlation: Pearson over average ranks.
pub fn spearman<T: Scalar>(xs: &[T], ys: &[T]) -> Result<T> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch { left: xs.len(), right: ys.len() });
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimItem {
    pub text1: String,
    pub text2: String,
    pub gold: f64,
}

/// Scored text pairs, e.g. a word-similarity or STS file.
#[derive(Debug, Clone, PartialEq)]
pub struct SimDataset {
    pub name: String,
    pub items: Vec<SimItem>,
    pub scale: (f64, f64),
}

impl SimDataset {
    pub fn golds(&self) -> Vec<f64> {
        self.items.iter().map(|i| i.gold).collect()
    }
}

/// Cosine of each item's two embeddings.
pub fn score_items<T: Scalar>(model: &Model<T>, vocab: &NGramVocab, items: &[SimItem], case: CaseMode) -> Result<Vec<f64>> {
    items
        .iter()
        .map(|item| {
            let a = model.embed(&encode_text(&item.text1, vocab, case))?;
            let b = model.embed(&encode_text(&item.text2, vocab, case))?;
            Ok(cosine_unchecked(&a.values, &b.values).as_f64())
        })
        .collect()
}

/// Spearman's ρ between model cosines and gold scores.
pub fn eval_word_sim<T: Scalar>(model: &Model<T>, vocab: &NGramVocab, dataset: &SimDataset, case: CaseMode) -> Result<f64> {
    let scores = score_items(model, vocab, &dataset.items, case)?;
    spearman(&scores, &dataset.golds())
}

/// Label under which the mean over every dataset is reported.
pub const OVERALL: &str = "Average";

#[derive(Debug, Clone, PartialEq)]
pub struct BinRow {
    pub label: String,
    pub n_pairs: usize,
    /// `None` when the bin has fewer than two pairs or no variance.
    pub correlation: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalReport {
    /// Dataset name → correlation, in the order the datasets were given.
    pub per_dataset: Vec<(String, f64)>,
    /// Group name → unweighted mean of its members; includes [`OVERALL`].
    pub group_averages: BTreeMap<String, f64>,
    pub bins: Option<Vec<BinRow>>,
}

impl EvalReport {
    /// Human-readable table, correlations scaled by 100.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, r) in &self.per_dataset {
            let _ = writeln!(out, "{name:<32} {:>7.2}", 100.0 * r);
        }
        for (group, r) in &self.group_averages {
            let _ = writeln!(out, "{:<32} {:>7.2}", format!("{group} (mean)"), 100.0 * r);
        }
        if let Some(bins) = &self.bins {
            let _ = writeln!(out, "{:<12} {:>8} {:>8}", "bin", "N", "r");
            for b in bins {
                let r = b.correlation.map_or_else(|| "-".to_string(), |r| format!("{:.2}", 100.0 * r));
                let _ = writeln!(out, "{:<12} {:>8} {:>8}", b.label, b.n_pairs, r);
            }
        }
        out
    }

    /// `name<TAB>metric<TAB>value` lines: datasets in input order, then
    /// groups sorted by name, then bins in specification order.
    pub fn to_tsv(&self, metric: &str) -> String {
        let mut out = String::new();
        for (name, r) in &self.per_dataset {
            let _ = writeln!(out, "{name}\t{metric}\t{r}");
        }
        for (group, r) in &self.group_averages {
            let _ = writeln!(out, "{group}\t{metric}_mean\t{r}");
        }
        for b in self.bins.iter().flatten() {
            let _ = writeln!(out, "bin:{}\tn\t{}", b.label, b.n_pairs);
            let r = b.correlation.map_or_else(|| "NA".to_string(), |r| r.to_string());
            let _ = writeln!(out, "bin:{}\t{metric}\t{r}", b.label);
        }
        out
    }
}

/// Pearson's r per dataset, unweighted group means, and the overall mean.
///
/// `grouping` maps dataset name → group; datasets without an entry are only
/// counted in the overall mean.
pub fn eval_sts<T: Scalar>(
    model: &Model<T>,
    vocab: &NGramVocab,
    datasets: &[SimDataset],
    grouping: &BTreeMap<String, String>,
    case: CaseMode,
) -> Result<EvalReport> {
    let mut report = EvalReport::default();
    let mut members: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for ds in datasets {
        let scores = score_items(model, vocab, &ds.items, case)?;
        let r = pearson(&scores, &ds.golds())?;
        report.per_dataset.push((ds.name.clone(), r));
        if let Some(group) = grouping.get(&ds.name) {
            members.entry(group.clone()).or_default().push(r);
        }
    }
    for (group, rs) in members {
        report.group_averages.insert(group, mean(&rs));
    }
    if !datasets.is_empty() {
        let all: Vec<f64> = report.per_dataset.iter().map(|(_, r)| *r).collect();
        report.group_averages.insert(OVERALL.to_string(), mean(&all));
    }
    Ok(report)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Integer range selecting the members of a bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinRange {
    Exactly(usize),
    AtLeast(usize),
    AtMost(usize),
    Between(usize, usize),
}

impl BinRange {
    pub fn contains(self, n: usize) -> bool {
        match self {
            BinRange::Exactly(k) => n == k,
            BinRange::AtLeast(k) => n >= k,
            BinRange::AtMost(k) => n <= k,
            BinRange::Between(lo, hi) => (lo..=hi).contains(&n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinSpec {
    pub label: String,
    pub range: BinRange,
}

impl FromStr for BinSpec {
    type Err = Error;

    /// Accepts `3`, `≥1`/`>=1`, `≤4`/`<=4`, and `11-15`.
    fn from_str(s: &str) -> Result<Self> {
        let label = s.trim().to_string();
        let bad = || Error::InvalidConfig(format!("bad bin label {s:?}"));
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        let range = if let Some(rest) = label.strip_prefix('≥').or_else(|| label.strip_prefix(">=")) {
            BinRange::AtLeast(num(rest)?)
        } else if let Some(rest) = label.strip_prefix('≤').or_else(|| label.strip_prefix("<=")) {
            BinRange::AtMost(num(rest)?)
        } else if let Some((lo, hi)) = label.split_once('-') {
            let (lo, hi) = (num(lo)?, num(hi)?);
            if lo > hi {
                return Err(bad());
            }
            BinRange::Between(lo, hi)
        } else {
            BinRange::Exactly(num(&label)?)
        };
        Ok(BinSpec { label, range })
    }
}

impl fmt::Display for BinSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Parses a comma-separated list of bin labels.
pub fn parse_bins(spec: &str) -> Result<Vec<BinSpec>> {
    spec.split(',').map(str::parse).collect()
}

/// Unknown-word bins: 0, 1, 2, ≥1, ≥0.
pub fn default_oov_bins() -> Vec<BinSpec> {
    parse_bins("0,1,2,≥1,≥0").unwrap()
}

/// Length bins: ≤4, 5 … 10, 11-15, 16-20, ≥21.
pub fn default_length_bins() -> Vec<BinSpec> {
    parse_bins("≤4,5,6,7,8,9,10,11-15,16-20,≥21").unwrap()
}

/// Case-folded word list defining which tokens count as known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceVocab {
    tokens: HashSet<String>,
}

impl ReferenceVocab {
    pub fn new(tokens: impl IntoIterator<Item = impl AsRef<str>>) -> Result<Self> {
        let tokens: HashSet<String> = tokens.into_iter().map(|t| t.as_ref().to_lowercase()).collect();
        if tokens.is_empty() {
            return Err(Error::EmptyVocab);
        }
        Ok(ReferenceVocab { tokens })
    }

    pub fn contains(&self, token: &str) -> bool {
        self.tokens.contains(&token.to_lowercase())
    }

    /// Whitespace tokens of `text` missing from the list.
    pub fn unknown_count(&self, text: &str) -> usize {
        text.split_whitespace().filter(|t| !self.contains(t)).count()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Binning<'a> {
    /// Unknown tokens summed over both sides.
    ByOov(&'a ReferenceVocab),
    /// Larger of the two sides' token counts.
    ByMaxLength,
}

impl Binning<'_> {
    pub fn key(&self, item: &SimItem) -> usize {
        match self {
            Binning::ByOov(refv) => refv.unknown_count(&item.text1) + refv.unknown_count(&item.text2),
            Binning::ByMaxLength => {
                item.text1.split_whitespace().count().max(item.text2.split_whitespace().count())
            }
        }
    }
}

/// Pearson's r within each bin over the union of `datasets`. A pair joins
/// every bin whose range contains its key.
pub fn binned_eval<T: Scalar>(
    model: &Model<T>,
    vocab: &NGramVocab,
    datasets: &[SimDataset],
    binning: Binning<'_>,
    bins: &[BinSpec],
    case: CaseMode,
) -> Result<Vec<BinRow>> {
    let items: Vec<&SimItem> = datasets.iter().flat_map(|d| &d.items).collect();
    let owned: Vec<SimItem> = items.iter().map(|&i| i.clone()).collect();
    let scores = score_items(model, vocab, &owned, case)?;
    let keys: Vec<usize> = items.iter().map(|i| binning.key(i)).collect();
    Ok(bins
        .iter()
        .map(|bin| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = keys
                .iter()
                .zip(scores.iter().zip(&items))
                .filter(|(&k, _)| bin.range.contains(k))
                .map(|(_, (&s, item))| (s, item.gold))
                .unzip();
            BinRow { label: bin.label.clone(), n_pairs: xs.len(), correlation: pearson(&xs, &ys).ok() }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Activation;
    use crate::vocab::{build_vocab, Orders, VocabPolicy};
    use proptest::prelude::*;

    #[test]
    fn pearson_examples() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0f64).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[6.0, 4.0, 2.0]).unwrap() + 1.0f64).abs() < 1e-15);
        assert_eq!(pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap(), 0.8);
        let err = pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap_err();
        assert!(err.to_string().starts_with("degenerate input"));
        assert!(pearson(&[1.0], &[1.0]).is_err());
        assert!(pearson(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn spearman_examples() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[1.0, 4.0, 9.0]).unwrap() - 1.0f64).abs() < 1e-15);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0f64).abs() < 1e-15);
        let rho: f64 = spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((rho - 0.9487).abs() < 1e-4, "{rho}");
        assert!(spearman(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn average_ranks_handle_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 20.0, 5.0]), vec![2.0, 3.5, 3.5, 1.0]);
    }

    #[test]
    fn bin_labels() {
        let bins = parse_bins("0,≥1,>=2,≤4,<=5,11-15").unwrap();
        let ranges: Vec<BinRange> = bins.iter().map(|b| b.range).collect();
        assert_eq!(
            ranges,
            vec![
                BinRange::Exactly(0),
                BinRange::AtLeast(1),
                BinRange::AtLeast(2),
                BinRange::AtMost(4),
                BinRange::AtMost(5),
                BinRange::Between(11, 15)
            ]
        );
        assert!(parse_bins("x").is_err());
        assert!(parse_bins("5-3").is_err());
        assert_eq!(default_length_bins().len(), 10);
    }

    #[test]
    fn oov_counts_are_case_insensitive() {
        let r = ReferenceVocab::new(["The", "cat"]).unwrap();
        assert_eq!(r.unknown_count("the CAT sat"), 1);
        assert!(ReferenceVocab::new(Vec::<String>::new()).is_err());
    }

    fn fixture() -> (Model<f64>, NGramVocab) {
        let vocab = build_vocab(
            ["alpha beta gamma delta", "epsilon zeta eta theta"],
            &Orders::new([2, 3]).unwrap(),
            VocabPolicy::MinCount(1),
            CaseMode::Lowercase,
        )
        .unwrap();
        let config = crate::trainer::TrainConfig { dim: 6, activation: Activation::Tanh, seed: 4, ..Default::default() };
        (crate::trainer::init_model(&vocab, &config), vocab)
    }

    fn items(rows: &[(&str, &str, f64)]) -> Vec<SimItem> {
        rows.iter().map(|&(a, b, g)| SimItem { text1: a.into(), text2: b.into(), gold: g }).collect()
    }

    #[test]
    fn word_sim_is_monotone_invariant() {
        let (model, vocab) = fixture();
        let raw = items(&[("alpha", "beta", 0.0), ("gamma", "delta", 0.0), ("eta", "theta", 0.0), ("zeta", "alp", 0.0)]);
        let scores = score_items(&model, &vocab, &raw, CaseMode::Lowercase).unwrap();
        // gold = any increasing function of the model's own scores
        let items: Vec<SimItem> =
            raw.into_iter().zip(&scores).map(|(i, s)| SimItem { gold: (5.0 * s).exp(), ..i }).collect();
        let ds = SimDataset { name: "mono".into(), items, scale: (0.0, 1e9) };
        assert!((eval_word_sim(&model, &vocab, &ds, CaseMode::Lowercase).unwrap() - 1.0).abs() < 1e-12);

        let two = SimDataset { name: "two".into(), items: items_two(), scale: (0.0, 10.0) };
        let rho = eval_word_sim(&model, &vocab, &two, CaseMode::Lowercase).unwrap();
        assert!((rho.abs() - 1.0).abs() < 1e-12);
    }

    fn items_two() -> Vec<SimItem> {
        items(&[("alpha", "beta", 1.0), ("gamma", "theta", 2.0)])
    }

    #[test]
    fn sts_group_means() {
        let (model, vocab) = fixture();
        let ds = |name: &str, golds: [f64; 3]| SimDataset {
            name: name.into(),
            items: items(&[("alpha", "beta", golds[0]), ("gamma", "delta", golds[1]), ("eta", "zeta", golds[2])]),
            scale: (0.0, 5.0),
        };
        let sets = vec![ds("a", [1.0, 2.0, 3.0]), ds("b", [3.0, 1.0, 2.0]), ds("c", [0.0, 5.0, 1.0])];
        let grouping = BTreeMap::from([("a".to_string(), "g1".to_string()), ("b".to_string(), "g1".to_string())]);
        let report = eval_sts(&model, &vocab, &sets, &grouping, CaseMode::Lowercase).unwrap();
        let r: Vec<f64> = report.per_dataset.iter().map(|p| p.1).collect();
        assert_eq!(report.per_dataset.len(), 3);
        assert_eq!(report.group_averages["g1"], (r[0] + r[1]) / 2.0);
        assert!((report.group_averages[OVERALL] - (r[0] + r[1] + r[2]) / 3.0).abs() < 1e-15);
        let tsv = report.to_tsv("pearson");
        assert!(tsv.starts_with("a\tpearson\t"));
        assert!(tsv.contains("g1\tpearson_mean\t"));
    }

    #[test]
    fn bins_overlap_and_tiny_bins_are_undefined() {
        let (model, vocab) = fixture();
        let refv = ReferenceVocab::new(["alpha", "beta", "gamma", "delta", "eta"]).unwrap();
        let ds = SimDataset {
            name: "x".into(),
            items: items(&[
                ("alpha beta", "gamma", 1.0),
                ("delta", "eta alpha", 2.0),
                ("alpha", "beta gamma", 0.5),
                ("zeta alpha", "beta", 3.0),
                ("zeta theta iota", "alpha", 4.0),
            ]),
            scale: (0.0, 5.0),
        };
        let rows = binned_eval(&model, &vocab, std::slice::from_ref(&ds), Binning::ByOov(&refv), &default_oov_bins(), CaseMode::Lowercase)
            .unwrap();
        let n: Vec<usize> = rows.iter().map(|r| r.n_pairs).collect();
        assert_eq!(n, vec![3, 1, 0, 2, 5]);
        assert!(rows[1].correlation.is_none());
        assert!(rows[2].correlation.is_none());
        assert!(rows[0].correlation.is_some());

        let len_rows =
            binned_eval(&model, &vocab, &[ds], Binning::ByMaxLength, &parse_bins("1,2,3,≥2").unwrap(), CaseMode::Lowercase)
                .unwrap();
        let n: Vec<usize> = len_rows.iter().map(|r| r.n_pairs).collect();
        assert_eq!(n, vec![0, 4, 1, 5]);
    }

    #[test]
    fn max_length_uses_the_longer_side() {
        let item = SimItem { text1: "a b c".into(), text2: "a b c d e f g".into(), gold: 0.0 };
        let key = Binning::ByMaxLength.key(&item);
        let hits: Vec<String> =
            default_length_bins().into_iter().filter(|b| b.range.contains(key)).map(|b| b.label).collect();
        assert_eq!(hits, vec!["7"]);
    }

    proptest! {
        #[test]
        fn spearman_is_one_under_increasing_maps(xs in proptest::collection::vec(-100.0f64..100.0, 2..40), a in 0.1f64..5.0) {
            let mut distinct = xs.clone();
            distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
            distinct.dedup();
            prop_assume!(distinct.len() >= 2);
            let ys: Vec<f64> = xs.iter().map(|x| (a * x).exp().ln_1p() + x * x * x).collect();
            prop_assert!((spearman(&xs, &ys).unwrap() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn pearson_affine_is_sign(xs in proptest::collection::vec(-100.0f64..100.0, 3..40), a in -5.0f64..5.0, c in -10.0f64..10.0) {
            prop_assume!(a.abs() > 1e-3);
            let mut distinct = xs.clone();
            distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
            distinct.dedup();
            prop_assume!(distinct.len() >= 2);
            let ys: Vec<f64> = xs.iter().map(|x| a * x + c).collect();
            prop_assert!((pearson(&xs, &ys).unwrap() - a.signum()).abs() < 1e-9);
        }

        #[test]
        fn metrics_are_symmetric(xs in proptest::collection::vec(0u8..5, 3..30), ys in proptest::collection::vec(0u8..5, 3..30)) {
            let n = xs.len().min(ys.len());
            let xs: Vec<f64> = xs[..n].iter().map(|&x| x as f64).collect();
            let ys: Vec<f64> = ys[..n].iter().map(|&y| y as f64).collect();
            if let (Ok(a), Ok(b)) = (spearman(&xs, &ys), spearman(&ys, &xs)) {
                prop_assert!((a - b).abs() < 1e-15);
            }
            if let (Ok(a), Ok(b)) = (pearson(&xs, &ys), pearson(&ys, &xs)) {
                prop_assert!((a - b).abs() < 1e-15);
            }
        }
    }
}
