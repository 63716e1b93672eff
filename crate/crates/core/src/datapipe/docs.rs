//! Document-level datasets.
//!
//! Consecutive sentences of one document are joined with ` <SEP> ` on both
//! sides. Window modes pack sentences greedily while the source side stays
//! within a token budget; each separator counts as one token.

use std::fmt;
use std::io::Write;
use std::ops::Range;
use std::str::FromStr;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::ParallelCorpus;
use crate::error::{Error, Result};
use crate::nbest::{Hypothesis, NBestList, Origin};

pub const SEP_TAG: &str = "<SEP>";
pub const SEP_JOIN: &str = " <SEP> ";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DocMode {
    /// One sample per sentence.
    Curr,
    /// Previous sentence as context, then the current one.
    PrevCurr,
    Window50,
    Window100,
    Window250,
    Window500,
}

impl DocMode {
    pub const ALL: [DocMode; 6] = [
        DocMode::Curr,
        DocMode::PrevCurr,
        DocMode::Window50,
        DocMode::Window100,
        DocMode::Window250,
        DocMode::Window500,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DocMode::Curr => "curr",
            DocMode::PrevCurr => "prev_curr",
            DocMode::Window50 => "window_50t",
            DocMode::Window100 => "window_100t",
            DocMode::Window250 => "window_250t",
            DocMode::Window500 => "window_500t",
        }
    }

    /// Source-side token budget of window modes.
    pub fn budget(self) -> Option<usize> {
        match self {
            DocMode::Curr | DocMode::PrevCurr => None,
            DocMode::Window50 => Some(50),
            DocMode::Window100 => Some(100),
            DocMode::Window250 => Some(250),
            DocMode::Window500 => Some(500),
        }
    }
}

impl fmt::Display for DocMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DocMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DocMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown document mode {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DocSample {
    pub source: String,
    pub target: String,
    pub sentence_count: usize,
    /// Corpus index of the first sentence.
    pub start: usize,
    /// A single sentence whose source alone exceeds the window budget.
    pub over_budget: bool,
}

impl DocSample {
    pub fn sentences(&self) -> Range<usize> {
        self.start..self.start + self.sentence_count
    }
}

pub fn join_sentences<S: AsRef<str>>(sentences: &[S]) -> String {
    sentences.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(SEP_JOIN)
}

/// Splits on the separator tag and trims each part; the part count must equal `expected`.
pub fn split_doc_hypothesis(text: &str, expected: usize) -> Result<Vec<String>> {
    if expected == 0 {
        return Err(Error::invalid("expected sentence count must be at least 1"));
    }
    let parts: Vec<String> = text.split(SEP_TAG).map(|p| p.trim().to_string()).collect();
    if parts.len() != expected {
        return Err(Error::SentenceCount {
            expected,
            actual: parts.len(),
        });
    }
    Ok(parts)
}

fn sample(corpus: &ParallelCorpus, range: Range<usize>, over_budget: bool) -> DocSample {
    let pairs = &corpus.pairs[range.clone()];
    DocSample {
        source: join_sentences(&pairs.iter().map(|p| p.0.as_str()).collect::<Vec<_>>()),
        target: join_sentences(&pairs.iter().map(|p| p.1.as_str()).collect::<Vec<_>>()),
        sentence_count: range.len(),
        start: range.start,
        over_budget,
    }
}

fn pack_document<F>(corpus: &ParallelCorpus, doc: Range<usize>, budget: usize, counter: &F) -> Vec<DocSample>
where
    F: Fn(usize, &str) -> usize + Sync,
{
    let mut out = Vec::new();
    let mut start = doc.start;
    let mut used = 0;
    for i in doc.clone() {
        let tokens = counter(i, &corpus.pairs[i].0);
        if i > start && used + 1 + tokens <= budget {
            used += 1 + tokens;
            continue;
        }
        if i > start {
            out.push(sample(corpus, start..i, used > budget));
        }
        start = i;
        used = tokens;
        if tokens > budget {
            warn!("sentence {i} has {tokens} source tokens, over the budget of {budget}; emitted alone");
        }
    }
    if start < doc.end {
        out.push(sample(corpus, start..doc.end, used > budget));
    }
    out
}

/// Builds the samples of one mode. `counter(index, source)` gives the source
/// token count of a sentence (for example after subword segmentation).
pub fn build_doc_dataset<F>(corpus: &ParallelCorpus, mode: DocMode, counter: &F) -> Vec<DocSample>
where
    F: Fn(usize, &str) -> usize + Sync,
{
    let docs = corpus.documents();
    docs.into_par_iter()
        .flat_map_iter(|doc| -> Vec<DocSample> {
            match mode.budget() {
                Some(budget) => pack_document(corpus, doc, budget, counter),
                None if mode == DocMode::PrevCurr => doc
                    .clone()
                    .map(|i| sample(corpus, if i == doc.start { i..i + 1 } else { i - 1..i + 1 }, false))
                    .collect(),
                None => doc.map(|i| sample(corpus, i..i + 1, false)).collect(),
            }
        })
        .collect()
}

/// All six modes concatenated, then shuffled with a seeded generator.
pub fn build_merged_dataset<F>(corpus: &ParallelCorpus, counter: &F, seed: u64) -> Vec<DocSample>
where
    F: Fn(usize, &str) -> usize + Sync,
{
    let mut all: Vec<DocSample> = DocMode::ALL
        .iter()
        .flat_map(|&m| build_doc_dataset(corpus, m, counter))
        .collect();
    all.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    all
}

/// Shuffles sentence pairs into one synthetic document.
pub fn synthetic_shuffle(corpus: &ParallelCorpus, seed: u64) -> ParallelCorpus {
    let mut pairs = corpus.pairs.clone();
    pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    ParallelCorpus::new(pairs)
}

/// Writes `source<TAB>target` per sample.
pub fn write_doc_samples<W: Write>(samples: &[DocSample], mut out: W) -> Result<()> {
    for s in samples {
        writeln!(out, "{}\t{}", s.source, s.target)?;
    }
    Ok(())
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DocMapReport {
    pub hypotheses: usize,
    pub mapped: usize,
    /// Hypotheses whose sentence count did not match their chunk.
    pub dropped: usize,
}

impl fmt::Display for DocMapReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "hypotheses={}", self.hypotheses)?;
        writeln!(f, "mapped={}", self.mapped)?;
        writeln!(f, "dropped={}", self.dropped)
    }
}

/// Maps document-level n-best lists back to sentences.
///
/// `lists[c]` holds hypotheses for the sentences `chunks[c]`, where the list's
/// segment id is the chunk index. Every hypothesis is split into one part per
/// sentence; part `k` becomes a hypothesis for sentence `chunks[c].start + k`
/// with the original features and the document origin. Hypotheses with the
/// wrong number of parts are dropped. Returns one list per sentence in
/// `0..num_sentences`.
pub fn map_doc_nbest(
    lists: &[NBestList],
    chunks: &[Range<usize>],
    num_sentences: usize,
) -> Result<(Vec<NBestList>, DocMapReport)> {
    let mut out: Vec<NBestList> = (0..num_sentences).map(NBestList::new).collect();
    let mut report = DocMapReport::default();
    for list in lists {
        let chunk = chunks
            .get(list.segment_id)
            .ok_or_else(|| Error::invalid(format!("document list {} has no chunk range", list.segment_id)))?;
        if chunk.is_empty() || chunk.end > num_sentences {
            return Err(Error::invalid(format!(
                "chunk {}..{} is empty or beyond {num_sentences} sentences",
                chunk.start, chunk.end
            )));
        }
        for h in &list.hypotheses {
            report.hypotheses += 1;
            match split_doc_hypothesis(&h.text, chunk.len()) {
                Ok(parts) => {
                    report.mapped += 1;
                    for (k, text) in parts.into_iter().enumerate() {
                        let seg = chunk.start + k;
                        out[seg].hypotheses.push(Hypothesis {
                            segment_id: seg,
                            text,
                            features: h.features.clone(),
                            combined_score: h.combined_score,
                            origin: Origin::Document,
                        });
                    }
                }
                Err(_) => report.dropped += 1,
            }
        }
    }
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FIGURE_DOC: [&str; 5] = [
        "Netvrdím, že bakteriální celulóza jednou nahradí bavlnu, kůži, nebo jiné látky.",
        "Ale myslím, že by to mohl být chytrý a udržitelný přírůstek k našim stále vzácnějším přírodním zdrojům.",
        "Možná že se nakonec tyto bakterie neuplatní v módě, ale jinde.",
        "Zkuste si třeba představit, že si vypěstujeme lampu, židli, auto, nebo třeba dům.",
        "Má otázka tedy zní: Co byste si v budoucnu nejraději vypěstovali vy?",
    ];

    fn words(_: usize, _: &str) -> usize {
        0
    }

    fn ws(_: usize, s: &str) -> usize {
        s.split_whitespace().count()
    }

    fn synthetic(lengths: &[usize], docs: Vec<Range<usize>>) -> ParallelCorpus {
        let pairs = lengths
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let s = (0..n).map(|k| format!("s{i}w{k}")).collect::<Vec<_>>().join(" ");
                (s, format!("t{i}"))
            })
            .collect();
        ParallelCorpus::with_documents(pairs, docs).unwrap()
    }

    #[test]
    fn figure_document_round_trip() {
        let joined = join_sentences(&FIGURE_DOC);
        assert_eq!(joined.matches(SEP_TAG).count(), 4);
        assert!(joined.contains("látky. <SEP> Ale myslím"));
        assert_eq!(split_doc_hypothesis(&joined, 5).unwrap(), FIGURE_DOC);
        assert!(matches!(
            split_doc_hypothesis(&joined, 4),
            Err(Error::SentenceCount { expected: 4, actual: 5 })
        ));
        assert_eq!(split_doc_hypothesis("jen jedna", 1).unwrap(), ["jen jedna"]);
        assert!(split_doc_hypothesis("x", 0).is_err());
    }

    #[test]
    fn curr_and_prev_curr() {
        let c = synthetic(&[1, 2, 3, 4], vec![0..2, 2..4]);
        let curr = build_doc_dataset(&c, DocMode::Curr, &words);
        assert_eq!(curr.len(), 4);
        assert!(curr
            .iter()
            .all(|s| s.sentence_count == 1 && !s.source.contains(SEP_TAG)));
        assert_eq!(
            curr.iter()
                .map(|s| (s.source.clone(), s.target.clone()))
                .collect::<Vec<_>>(),
            c.pairs
        );

        let pc = build_doc_dataset(&c, DocMode::PrevCurr, &words);
        let counts: Vec<usize> = pc.iter().map(|s| s.sentence_count).collect();
        assert_eq!(counts, [1, 2, 1, 2]);
        assert_eq!(pc[1].target, "t0 <SEP> t1");
        assert_eq!(pc[3].start, 2);
    }

    #[test]
    fn window_matches_hand_schedule() {
        // budget 50; separators cost one token each
        let lengths = [20, 20, 9, 30, 60, 10, 10, 49, 1];
        let c = synthetic(&lengths, vec![0..6, 6..9]);
        let samples = build_doc_dataset(&c, DocMode::Window50, &ws);
        let ranges: Vec<Range<usize>> = samples.iter().map(DocSample::sentences).collect();
        // doc 1: 20+1+20=41, +1+9=51 > 50 -> [0,1]; 9+1+30=40 -> [2,3]; 60 alone; 10 -> [5]
        // doc 2: 10+1+49 > 50 -> [6]; 49+1+1=51 -> [7]; [8]
        assert_eq!(ranges, vec![0..2, 2..4, 4..5, 5..6, 6..7, 7..8, 8..9]);
        let over: Vec<bool> = samples.iter().map(|s| s.over_budget).collect();
        assert_eq!(over, [false, false, true, false, false, false, false]);
        for s in &samples {
            assert_eq!(s.source.matches(SEP_TAG).count(), s.sentence_count - 1);
            assert_eq!(s.target.matches(SEP_TAG).count(), s.sentence_count - 1);
            assert!(s.over_budget || ws(0, &s.source) <= 50);
        }
    }

    #[test]
    fn windows_are_lossless() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let lengths: Vec<usize> = (0..300).map(|_| rand::Rng::gen_range(&mut rng, 1..80)).collect();
        let docs: Vec<Range<usize>> = (0..300).step_by(25).map(|s| s..s + 25).collect();
        let c = synthetic(&lengths, docs.clone());
        for mode in [
            DocMode::Window50,
            DocMode::Window100,
            DocMode::Window250,
            DocMode::Window500,
        ] {
            let samples = build_doc_dataset(&c, mode, &ws);
            let mut rebuilt = Vec::new();
            for s in &samples {
                assert!(s.over_budget || ws(0, &s.source) <= mode.budget().unwrap());
                assert!(docs.iter().any(|d| d.start <= s.start && s.sentences().end <= d.end));
                let src = split_doc_hypothesis(&s.source, s.sentence_count).unwrap();
                let tgt = split_doc_hypothesis(&s.target, s.sentence_count).unwrap();
                rebuilt.extend(src.into_iter().zip(tgt));
            }
            assert_eq!(rebuilt, c.pairs, "{mode}");
        }
    }

    #[test]
    fn merged_and_shuffled_are_seeded() {
        let c = synthetic(&[3, 4, 5, 6, 7], vec![0..5]);
        let a = build_merged_dataset(&c, &ws, 9);
        assert_eq!(a, build_merged_dataset(&c, &ws, 9));
        let total: usize = DocMode::ALL.iter().map(|&m| build_doc_dataset(&c, m, &ws).len()).sum();
        assert_eq!(a.len(), total);
        let s = synthetic_shuffle(&c, 2);
        assert_eq!(s, synthetic_shuffle(&c, 2));
        let mut sorted = s.pairs.clone();
        sorted.sort();
        let mut orig = c.pairs.clone();
        orig.sort();
        assert_eq!(sorted, orig);
        assert!(!s.has_documents());
    }

    #[test]
    fn mode_names() {
        for m in DocMode::ALL {
            assert_eq!(m.name().parse::<DocMode>().unwrap(), m);
        }
        assert!("window_10t".parse::<DocMode>().is_err());
    }

    #[test]
    fn maps_document_hypotheses() {
        let chunks = vec![0..2, 2..3];
        let lists = vec![
            NBestList::from_hypotheses(
                0,
                vec![
                    Hypothesis::new(0, "a <SEP> b").with_feature("model_ll", -1.0),
                    Hypothesis::new(0, "jen jedna").with_feature("model_ll", -2.0),
                ],
            )
            .unwrap(),
            NBestList::from_hypotheses(1, vec![Hypothesis::new(1, "c").with_feature("model_ll", -0.5)]).unwrap(),
        ];
        let (out, report) = map_doc_nbest(&lists, &chunks, 3).unwrap();
        assert_eq!(
            report,
            DocMapReport {
                hypotheses: 3,
                mapped: 2,
                dropped: 1
            }
        );
        assert_eq!(out[0].texts(), ["a"]);
        assert_eq!(out[1].texts(), ["b"]);
        assert_eq!(out[2].texts(), ["c"]);
        assert_eq!(out[1].hypotheses[0].segment_id, 1);
        assert_eq!(out[1].hypotheses[0].origin, Origin::Document);
        assert_eq!(out[1].hypotheses[0].feature("model_ll"), Some(-1.0));
        assert!(map_doc_nbest(&lists, &chunks[..1], 3).is_err());
    }

    proptest! {
        #[test]
        fn join_split_round_trip(group in proptest::collection::vec("[^<\\s]([^<]{0,20}[^<\\s])?", 1..8)) {
            let joined = join_sentences(&group);
            prop_assert_eq!(joined.matches(SEP_TAG).count(), group.len() - 1);
            prop_assert_eq!(split_doc_hypothesis(&joined, group.len()).unwrap(), group);
        }
    }
}
