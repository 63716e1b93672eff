//! Translation memory: an inverted index over source sentences with fuzzy
//! retrieval by token-level edit similarity.
//!
//! Similarity of two sentences is `1 − lev(a, b) / max(|a|, |b|)` over their
//! lowercased whitespace tokens. A pair matches a query when its similarity
//! is positive and at least the threshold.
//!
//! Retrieval ranks candidates from the postings by the overlap bound
//! `common / max(|a|, |b|)`, which never underestimates the similarity, and
//! re-scores them exactly in bound order. It stops once no remaining bound can
//! reach the threshold or displace the current k-th match, so the result
//! equals a full scan of the corpus.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};

use rayon::prelude::*;

use crate::corpus::ParallelCorpus;
use crate::error::{Error, Result};

const MAGIC: &[u8; 5] = b"TMIX1";

pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase().split_whitespace().map(str::to_string).collect()
}

/// Levenshtein distance over token sequences.
pub fn levenshtein_tokens<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn similarity_of<T: PartialEq>(a: &[T], b: &[T]) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    (longest - levenshtein_tokens(a, b)) as f64 / longest as f64
}

/// Edit similarity of two sentences on lowercased tokens, in [0, 1].
pub fn similarity(a: &str, b: &str) -> f64 {
    similarity_of(&tokenize(a), &tokenize(b))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Match {
    pub pair_id: usize,
    pub source: String,
    pub target: String,
    pub similarity: f64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TmIndex {
    pairs: Vec<(String, String)>,
    /// Token ids of each stored source.
    sources: Vec<Vec<u32>>,
    vocab: HashMap<String, u32>,
    words: Vec<String>,
    /// Per token id: `(pair id, occurrences)` sorted by pair id.
    postings: Vec<Vec<(u32, u32)>>,
}

impl TmIndex {
    pub fn build(corpus: &ParallelCorpus) -> Result<Self> {
        Self::from_pairs(corpus.pairs.clone())
    }

    pub fn from_pairs(pairs: Vec<(String, String)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::invalid("cannot index an empty corpus"));
        }
        if pairs.len() > u32::MAX as usize {
            return Err(Error::invalid("too many pairs for the index"));
        }
        let mut index = TmIndex {
            pairs: Vec::new(),
            sources: Vec::with_capacity(pairs.len()),
            vocab: HashMap::new(),
            words: Vec::new(),
            postings: Vec::new(),
        };
        for (id, (src, _)) in pairs.iter().enumerate() {
            let mut ids = Vec::new();
            for tok in tokenize(src) {
                let t = match index.vocab.get(&tok) {
                    Some(&t) => t,
                    None => {
                        let t = index.words.len() as u32;
                        index.vocab.insert(tok.clone(), t);
                        index.words.push(tok);
                        index.postings.push(Vec::new());
                        t
                    }
                };
                ids.push(t);
                let list = &mut index.postings[t as usize];
                match list.last_mut() {
                    Some((p, n)) if *p == id as u32 => *n += 1,
                    _ => list.push((id as u32, 1)),
                }
            }
            index.sources.push(ids);
        }
        index.pairs = pairs;
        Ok(index)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn vocab_size(&self) -> usize {
        self.words.len()
    }

    pub fn pair(&self, id: usize) -> Option<&(String, String)> {
        self.pairs.get(id)
    }

    /// Number of stored sources containing `token` (lowercased).
    pub fn document_frequency(&self, token: &str) -> usize {
        self.vocab
            .get(&token.to_lowercase())
            .map_or(0, |&t| self.postings[t as usize].len())
    }

    /// Pair ids whose source contains `token` (lowercased), ascending.
    pub fn postings(&self, token: &str) -> Vec<usize> {
        self.vocab.get(&token.to_lowercase()).map_or_else(Vec::new, |&t| {
            self.postings[t as usize].iter().map(|&(p, _)| p as usize).collect()
        })
    }

    fn query_ids(&self, sentence: &str) -> Vec<u32> {
        // unknown tokens get ids no stored token can equal
        let mut unknown = u32::MAX;
        tokenize(sentence)
            .iter()
            .map(|t| {
                self.vocab.get(t).copied().unwrap_or_else(|| {
                    unknown -= 1;
                    unknown
                })
            })
            .collect()
    }

    /// Up to `k` matches with similarity ≥ `threshold`, best first, ties by pair id.
    pub fn query(&self, sentence: &str, k: usize, threshold: f64) -> Result<Vec<Match>> {
        check_args(k, threshold)?;
        let q = self.query_ids(sentence);
        if q.is_empty() {
            return Ok(Vec::new());
        }
        let mut q_counts: HashMap<u32, u32> = HashMap::new();
        for &t in &q {
            *q_counts.entry(t).or_default() += 1;
        }
        let mut common: HashMap<u32, u32> = HashMap::new();
        for (&t, &qc) in &q_counts {
            if let Some(list) = self.postings.get(t as usize) {
                for &(p, c) in list {
                    *common.entry(p).or_default() += c.min(qc);
                }
            }
        }
        let mut candidates: Vec<(f64, u32)> = common
            .into_iter()
            .map(|(p, c)| {
                let longest = q.len().max(self.sources[p as usize].len());
                (c as f64 / longest as f64, p)
            })
            .collect();
        candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

        let pool = 4 * k;
        let mut found: Vec<(f64, u32)> = Vec::new();
        for (rank, &(bound, p)) in candidates.iter().enumerate() {
            if rank >= pool {
                let kth = (found.len() >= k).then(|| found[k - 1].0);
                if bound < threshold || kth.is_some_and(|s| bound < s) {
                    break;
                }
            }
            if bound <= 0.0 || bound < threshold {
                break;
            }
            let s = similarity_of(&q, &self.sources[p as usize]);
            if s > 0.0 && s >= threshold {
                let at = found.partition_point(|&(fs, fp)| fs > s || (fs == s && fp < p));
                found.insert(at, (s, p));
                found.truncate(k);
            }
        }
        Ok(found
            .into_iter()
            .map(|(similarity, p)| {
                let (source, target) = self.pairs[p as usize].clone();
                Match {
                    pair_id: p as usize,
                    source,
                    target,
                    similarity,
                }
            })
            .collect())
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(MAGIC)?;
        write_u64(&mut out, self.pairs.len() as u64)?;
        for (s, t) in &self.pairs {
            write_str(&mut out, s)?;
            write_str(&mut out, t)?;
        }
        write_u64(&mut out, self.words.len() as u64)?;
        for (w, list) in self.words.iter().zip(&self.postings) {
            write_str(&mut out, w)?;
            write_u64(&mut out, list.len() as u64)?;
            for &(p, c) in list {
                out.write_all(&p.to_le_bytes())?;
                out.write_all(&c.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 5];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::invalid("not a translation memory index (bad magic)"));
        }
        let n = read_u64(&mut input)? as usize;
        let mut pairs = Vec::with_capacity(n.min(1 << 20));
        for _ in 0..n {
            pairs.push((read_str(&mut input)?, read_str(&mut input)?));
        }
        let rebuilt = TmIndex::from_pairs(pairs)?;
        // the stored vocabulary and postings must agree with the pairs
        let v = read_u64(&mut input)? as usize;
        if v != rebuilt.words.len() {
            return Err(Error::invalid("index vocabulary does not match its pairs"));
        }
        for (w, list) in rebuilt.words.iter().zip(&rebuilt.postings) {
            let word = read_str(&mut input)?;
            let len = read_u64(&mut input)? as usize;
            if &word != w || len != list.len() {
                return Err(Error::invalid("index postings do not match its pairs"));
            }
            for &(p, c) in list {
                if read_u32(&mut input)? != p || read_u32(&mut input)? != c {
                    return Err(Error::invalid("index postings do not match its pairs"));
                }
            }
        }
        Ok(rebuilt)
    }
}

fn check_args(k: usize, threshold: f64) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::invalid(format!("threshold {threshold} is outside [0, 1]")));
    }
    Ok(())
}

fn write_u64<W: Write>(out: &mut W, v: u64) -> Result<()> {
    out.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn write_str<W: Write>(out: &mut W, s: &str) -> Result<()> {
    write_u64(out, s.len() as u64)?;
    out.write_all(s.as_bytes())?;
    Ok(())
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    input.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(input: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    input.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_str<R: Read>(input: &mut R) -> Result<String> {
    let len = read_u64(input)? as usize;
    let mut buf = Vec::new();
    input.take(len as u64).read_to_end(&mut buf)?;
    if buf.len() != len {
        return Err(Error::invalid("index file is truncated"));
    }
    String::from_utf8(buf).map_err(|_| Error::invalid("index file holds invalid UTF-8"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdaptationSet {
    pub input_id: usize,
    pub matches: Vec<Match>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AdaptationStats {
    pub inputs: usize,
    /// Inputs with at least one match.
    pub matched_inputs: usize,
    /// Total matches over all inputs.
    pub matched_pairs: usize,
}

impl fmt::Display for AdaptationStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "inputs={}", self.inputs)?;
        writeln!(f, "matched_inputs={}", self.matched_inputs)?;
        writeln!(f, "matched_pairs={}", self.matched_pairs)
    }
}

pub fn extract_adaptation_sets<S: AsRef<str> + Sync>(
    index: &TmIndex,
    inputs: &[S],
    k: usize,
    threshold: f64,
) -> Result<(Vec<AdaptationSet>, AdaptationStats)> {
    check_args(k, threshold)?;
    let sets = inputs
        .par_iter()
        .enumerate()
        .map(|(input_id, s)| {
            Ok(AdaptationSet {
                input_id,
                matches: index.query(s.as_ref(), k, threshold)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let stats = AdaptationStats {
        inputs: inputs.len(),
        matched_inputs: sets.iter().filter(|s| !s.matches.is_empty()).count(),
        matched_pairs: sets.iter().map(|s| s.matches.len()).sum(),
    };
    Ok((sets, stats))
}

/// `input_id<TAB>similarity<TAB>source<TAB>target` per match.
pub fn write_adaptation_sets<W: Write>(sets: &[AdaptationSet], mut out: W) -> Result<()> {
    for set in sets {
        for m in &set.matches {
            writeln!(out, "{}\t{:.6}\t{}\t{}", set.input_id, m.similarity, m.source, m.target)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force(pairs: &[(String, String)], q: &str, k: usize, threshold: f64) -> Vec<(usize, f64)> {
        let mut all: Vec<(usize, f64)> = pairs
            .iter()
            .enumerate()
            .filter_map(|(i, (s, _))| {
                let sim = similarity(q, s);
                (sim > 0.0 && sim >= threshold).then_some((i, sim))
            })
            .collect();
        all.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        all.truncate(k);
        all
    }

    fn random_pairs(rng: &mut ChaCha8Rng, n: usize, vocab: usize) -> Vec<(String, String)> {
        (0..n)
            .map(|i| {
                let len = rng.gen_range(1..10);
                let s: Vec<String> = (0..len).map(|_| format!("w{}", rng.gen_range(0..vocab))).collect();
                (s.join(" "), format!("t{i}"))
            })
            .collect()
    }

    #[test]
    fn levenshtein_by_hand() {
        assert_eq!(levenshtein_tokens::<u8>(&[], &[]), 0);
        assert_eq!(levenshtein_tokens(&["a", "b", "c"], &["a", "c"]), 1);
        assert_eq!(levenshtein_tokens(&["a", "b"], &["b", "a"]), 2);
        assert_eq!(levenshtein_tokens(&["x"], &["y", "z", "x"]), 2);
        assert!((similarity("Ahoj světe", "ahoj SVĚTE") - 1.0).abs() < 1e-12);
        assert!((similarity("a b c d", "a b x d") - 0.75).abs() < 1e-12);
    }

    #[test]
    fn single_pair_index() {
        let idx = TmIndex::from_pairs(vec![("Dobrý den světe".into(), "Добрий день".into())]).unwrap();
        for t in ["dobrý", "den", "světe"] {
            assert_eq!(idx.postings(t), vec![0]);
        }
        assert_eq!(idx.document_frequency("DEN"), 1);
        assert!(TmIndex::from_pairs(vec![]).is_err());
    }

    #[test]
    fn duplicates_are_distinct() {
        let p = ("a b".to_string(), "c".to_string());
        let idx = TmIndex::from_pairs(vec![p.clone(), p]).unwrap();
        assert_eq!(idx.postings("a"), vec![0, 1]);
        let m = idx.query("a b", 5, 0.5).unwrap();
        assert_eq!(m.iter().map(|m| m.pair_id).collect::<Vec<_>>(), [0, 1]);
    }

    #[test]
    fn identity_and_exact_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pairs = random_pairs(&mut rng, 100, 40);
        let idx = TmIndex::from_pairs(pairs.clone()).unwrap();
        let m = idx.query(&pairs[17].0, 1, 0.0).unwrap();
        assert_eq!(m[0].similarity, 1.0);
        assert_eq!(m[0].source, pairs[17].0);
        assert!(idx
            .query("w1 w2 w3 w4 w5 w6 w7 w8 w9 w10 w11", 3, 1.0)
            .unwrap()
            .is_empty());
        assert!(idx.query("zcela neznámé", 3, 0.0).unwrap().is_empty());
        assert!(idx.query("w1", 0, 0.5).is_err());
        assert!(idx.query("w1", 1, 1.5).is_err());
    }

    #[test]
    fn every_pair_reachable_by_each_token() {
        let mut rng = ChaCha8Rng::seed_from_u64(10_000);
        let pairs = random_pairs(&mut rng, 10_000, 3000);
        let idx = TmIndex::from_pairs(pairs.clone()).unwrap();
        for (i, (s, _)) in pairs.iter().enumerate() {
            for t in tokenize(s) {
                assert!(idx.postings(&t).binary_search(&i).is_ok());
            }
        }
    }

    #[test]
    fn matches_full_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        let pairs = random_pairs(&mut rng, 100, 15);
        let idx = TmIndex::from_pairs(pairs.clone()).unwrap();
        for _ in 0..200 {
            let q = random_pairs(&mut rng, 1, 15).remove(0).0;
            for (k, th) in [(1, 0.0), (3, 0.19), (5, 0.25), (50, 0.4), (200, 0.0)] {
                let got: Vec<(usize, f64)> = idx
                    .query(&q, k, th)
                    .unwrap()
                    .iter()
                    .map(|m| (m.pair_id, m.similarity))
                    .collect();
                assert_eq!(got, brute_force(&pairs, &q, k, th), "{q} k={k} th={th}");
            }
        }
    }

    #[test]
    fn planted_near_duplicates() {
        // each input has planted copies at 0, 1, 2 and 3 substitutions out of 5 tokens:
        // similarities 1.0, 0.8, 0.6 and 0.4
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut pairs = random_pairs(&mut rng, 200, 500);
        let mut inputs = Vec::new();
        for i in 0..10 {
            let base: Vec<String> = (0..5).map(|j| format!("base{i}x{j}")).collect();
            for edits in 0..4 {
                let mut v = base.clone();
                for (e, slot) in v.iter_mut().take(edits).enumerate() {
                    *slot = format!("edit{i}x{edits}x{e}");
                }
                pairs.push((v.join(" "), format!("planted {i} {edits}")));
            }
            inputs.push(base.join(" "));
        }
        pairs.shuffle(&mut rng);
        let idx = TmIndex::from_pairs(pairs).unwrap();
        let count = |th: f64| extract_adaptation_sets(&idx, &inputs, 10, th).unwrap().1;
        assert_eq!(
            count(0.19),
            AdaptationStats {
                inputs: 10,
                matched_inputs: 10,
                matched_pairs: 40
            }
        );
        assert_eq!(count(0.25).matched_pairs, 40);
        assert_eq!(count(0.4).matched_pairs, 40);
        assert_eq!(count(0.41).matched_pairs, 30);
        assert_eq!(count(0.8).matched_pairs, 20);
        assert_eq!(count(1.0).matched_pairs, 10);
    }

    #[test]
    fn serialization_round_trip_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pairs = random_pairs(&mut rng, 300, 50);
        let idx = TmIndex::from_pairs(pairs.clone()).unwrap();
        let mut a = Vec::new();
        idx.write(&mut a).unwrap();
        let mut b = Vec::new();
        TmIndex::from_pairs(pairs).unwrap().write(&mut b).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with(b"TMIX1"));
        assert_eq!(TmIndex::read(a.as_slice()).unwrap(), idx);
        assert!(TmIndex::read(&a[..a.len() - 3]).is_err());
        let mut bad = a.clone();
        bad[0] = b'X';
        assert!(TmIndex::read(bad.as_slice()).is_err());
    }

    #[test]
    fn disjoint_inputs_match_nothing() {
        let idx = TmIndex::from_pairs(vec![("a b".into(), "x".into())]).unwrap();
        let (sets, stats) = extract_adaptation_sets(&idx, &["c d", "e"], 5, 0.0).unwrap();
        assert_eq!(
            stats,
            AdaptationStats {
                inputs: 2,
                matched_inputs: 0,
                matched_pairs: 0
            }
        );
        assert!(sets.iter().all(|s| s.matches.is_empty()));
        let mut out = Vec::new();
        write_adaptation_sets(&sets, &mut out).unwrap();
        assert!(out.is_empty());
    }

    proptest! {
        #[test]
        fn similarity_properties(a in "[abc ]{0,12}", b in "[abc ]{0,12}") {
            let s = similarity(&a, &b);
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert_eq!(s, similarity(&b, &a));
            prop_assert_eq!(s == 1.0, tokenize(&a) == tokenize(&b));
        }

        #[test]
        fn threshold_monotone(seed in 0u64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pairs = random_pairs(&mut rng, 60, 12);
            let idx = TmIndex::from_pairs(pairs).unwrap();
            let inputs: Vec<String> = random_pairs(&mut rng, 5, 12).into_iter().map(|p| p.0).collect();
            let mut last = usize::MAX;
            for th in [0.0, 0.19, 0.25, 0.4, 0.7, 1.0] {
                let n = extract_adaptation_sets(&idx, &inputs, 8, th).unwrap().1.matched_pairs;
                prop_assert!(n <= last);
                last = n;
            }
        }
    }
}
