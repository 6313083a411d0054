//! The aligner checked against brute-force enumeration and a synthetic corpus
//! generated from known parameters.

use std::collections::{BTreeMap, HashMap};

use lrlkit::aligner::{
    distortion, extract_dictionary, train, AlignmentModel, Smoothing, TrainOptions, NULL_WORD,
};
use lrlkit::corpus::{ParallelCorpus, SentencePair};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

fn corpus(pairs: &[(&str, &str)]) -> ParallelCorpus {
    ParallelCorpus::new(
        "xxx_Test",
        pairs
            .iter()
            .map(|(t, e)| SentencePair { target: t.to_string(), english: e.to_string() })
            .collect(),
    )
    .unwrap()
}

fn toks(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

/// Every alignment function of an `m`-word English sentence onto `n + 1`
/// choices, as vectors of choice indices (0 = null).
fn all_alignments(m: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|a| {
                (0..=n).map(move |i| {
                    let mut b = a.clone();
                    b.push(i);
                    b
                })
            })
            .collect();
    }
    out
}

/// Brute-force posteriors P(a_j = i | e, f) by summing over whole alignments.
fn brute_posteriors(
    t: &dyn Fn(&str, &str) -> f64,
    tension: f64,
    p0: f64,
    f: &[&str],
    e: &[&str],
) -> Vec<Vec<f64>> {
    let (m, n) = (e.len(), f.len());
    let priors: Vec<Vec<f64>> = (0..m).map(|j| distortion(j, m, n, tension, p0)).collect();
    let mut post = vec![vec![0.0; n + 1]; m];
    let mut total = 0.0;
    for a in all_alignments(m, n) {
        let mut p = 1.0;
        for (j, &i) in a.iter().enumerate() {
            let src = if i == 0 { NULL_WORD } else { f[i - 1] };
            p *= t(src, e[j]) * priors[j][i];
        }
        total += p;
        for (j, &i) in a.iter().enumerate() {
            post[j][i] += p;
        }
    }
    for row in &mut post {
        for x in row.iter_mut() {
            *x /= total;
        }
    }
    post
}

fn table_lookup(model: &AlignmentModel) -> impl Fn(&str, &str) -> f64 {
    let table = model.t_table();
    move |f: &str, e: &str| table.get(f).and_then(|r| r.get(e)).copied().unwrap_or(0.0)
}

/// Reference EM: E-step by enumerating every alignment of every pair,
/// M-step by the same normalization rule, fixed tension.
fn reference_em(pairs: &[(&str, &str)], opts: &TrainOptions) -> BTreeMap<String, BTreeMap<String, f64>> {
    let english: Vec<String> = {
        let mut v: Vec<String> = pairs.iter().flat_map(|(_, e)| toks(e)).map(str::to_string).collect();
        v.sort();
        v.dedup();
        v
    };
    let mut t: Option<BTreeMap<String, BTreeMap<String, f64>>> = None;
    for _ in 0..opts.iterations {
        let lookup = |f: &str, e: &str| -> f64 {
            match &t {
                None => 1.0 / english.len() as f64,
                Some(tab) => tab.get(f).and_then(|r| r.get(e)).copied().unwrap_or(0.0),
            }
        };
        let mut counts: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for (ft, et) in pairs {
            let (f, e) = (toks(ft), toks(et));
            let post = brute_posteriors(&lookup, opts.initial_tension, opts.null_prob, &f, &e);
            for (j, row) in post.iter().enumerate() {
                for (i, p) in row.iter().enumerate() {
                    let src = if i == 0 { NULL_WORD } else { f[i - 1] };
                    *counts.entry(src.to_string()).or_default().entry(e[j].to_string()).or_insert(0.0) += p;
                }
            }
        }
        let mut next = BTreeMap::new();
        for (f, row) in counts {
            let w: BTreeMap<String, f64> = row
                .into_iter()
                .map(|(e, c)| {
                    let v = match opts.smoothing {
                        Smoothing::None => c,
                        Smoothing::Variational { alpha } => statrs::function::gamma::digamma(c + alpha).exp(),
                    };
                    (e, v)
                })
                .collect();
            let z: f64 = w.values().sum();
            next.insert(f, w.into_iter().map(|(e, v)| (e, v / z)).collect());
        }
        t = Some(next);
    }
    t.unwrap()
}

const TOY: [(&str, &str); 2] = [("a b", "x y"), ("a", "x")];

#[test]
fn toy_corpus_prefers_x_for_a_and_aligns_diagonally() {
    let c = corpus(&TOY);
    let m = train(&c, &TrainOptions { iterations: 20, ..Default::default() }).unwrap();
    assert!(m.translation_prob("a", "x") > m.translation_prob("a", "y"));
    let al = m.viterbi_align("a b", "x y").unwrap();
    assert_eq!(al.links, vec![(0, 0), (1, 1)]);
    assert_eq!(al.pharaoh(), "0-0 1-1");
}

#[test]
fn em_matches_enumeration_based_reference() {
    let pairs = [("a b", "x y"), ("a", "x"), ("b c a", "y z"), ("c", "z w")];
    for smoothing in [Smoothing::None, Smoothing::Variational { alpha: 0.01 }] {
        let opts = TrainOptions {
            iterations: 4,
            optimize_tension: false,
            smoothing,
            ..Default::default()
        };
        let model = train(&corpus(&pairs), &opts).unwrap();
        let reference = reference_em(&pairs, &opts);
        let ours = model.t_table();
        for (f, row) in &reference {
            for (e, p) in row {
                let q = ours[f][e];
                assert!((p - q).abs() < 1e-9, "t({e}|{f}): reference {p}, model {q}");
            }
        }
    }
}

#[test]
fn posteriors_match_enumeration_on_small_sentences() {
    let pairs = [
        ("a b c", "x y z"),
        ("a c", "x z"),
        ("b", "y w"),
        ("c a b", "z x"),
        ("a", "x y z"),
    ];
    let model = train(&corpus(&pairs), &TrainOptions::default()).unwrap();
    let t = table_lookup(&model);
    for (ft, et) in pairs.iter().chain([("b a", "w x"), ("c", "y")].iter()) {
        let ours = model.posteriors(ft, et).unwrap();
        let brute = brute_posteriors(&t, model.tension, model.null_prob, &toks(ft), &toks(et));
        for (r1, r2) in ours.iter().zip(&brute) {
            for (p, q) in r1.iter().zip(r2) {
                assert!((p - q).abs() < 1e-9, "{ft} / {et}: {p} vs {q}");
            }
        }
    }
}

/// Known Model-2 parameters over 20 target word types.
struct Synthetic {
    pairs: Vec<(String, String)>,
    /// Generating links per pair as (target index, English index).
    links: Vec<Vec<(usize, usize)>>,
    dominant: HashMap<String, String>,
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn pick(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let z: f64 = weights.iter().sum();
    let mut u = uniform(rng) * z;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

fn synthetic(n_pairs: usize, seed: u64) -> Synthetic {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let types = 20;
    let f_words: Vec<String> = (0..types).map(|k| format!("f{k}")).collect();
    let dominant: HashMap<String, String> = (0..types).map(|k| (format!("f{k}"), format!("e{k}"))).collect();
    let null_words = ["the", "of", "a"];
    let (tension, p0) = (4.0, 0.08);
    let mut pairs = Vec::new();
    let mut links = Vec::new();
    for _ in 0..n_pairs {
        let n = 3 + (rng.next_u64() % 6) as usize;
        let mut ids: Vec<usize> = (0..types).collect();
        for i in 0..n {
            let j = i + (rng.next_u64() % (types - i) as u64) as usize;
            ids.swap(i, j);
        }
        let f: Vec<&str> = ids[..n].iter().map(|&k| f_words[k].as_str()).collect();
        let m = n;
        let mut e = Vec::new();
        let mut gold = Vec::new();
        for j in 0..m {
            let prior = distortion(j, m, n, tension, p0);
            let choice = pick(&mut rng, &prior);
            if choice == 0 {
                e.push(null_words[(rng.next_u64() % 3) as usize].to_string());
            } else {
                let k = ids[choice - 1];
                let word = if uniform(&mut rng) < 0.85 { format!("e{k}") } else { format!("g{k}") };
                e.push(word);
                gold.push((choice - 1, j));
            }
        }
        pairs.push((f.join(" "), e.join(" ")));
        links.push(gold);
    }
    Synthetic { pairs, links, dominant }
}

#[test]
fn synthetic_corpus_recovers_links_and_dictionary() {
    let syn = synthetic(500, 17);
    let refs: Vec<(&str, &str)> = syn.pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let c = corpus(&refs);
    let model = train(&c, &TrainOptions::default()).unwrap();
    let (mut hit, mut total) = (0usize, 0usize);
    for ((f, e), gold) in syn.pairs.iter().zip(&syn.links) {
        let predicted = model.viterbi_align(f, e).unwrap().links;
        total += gold.len();
        hit += gold.iter().filter(|l| predicted.contains(l)).count();
    }
    let recall = hit as f64 / total as f64;
    assert!(recall >= 0.95, "link recovery {recall}");

    let dict = extract_dictionary(&model, &c).unwrap();
    let agree = syn
        .dominant
        .iter()
        .filter(|(f, e)| dict.translate(f) == Some(e.as_str()))
        .count();
    assert!(agree as f64 / syn.dominant.len() as f64 >= 0.95, "dictionary agreement {agree}/20");

    let trace = &model.log_likelihood_trace;
    assert_eq!(trace.len(), 6);
    for w in trace.windows(2) {
        assert!(w[1] >= w[0] - 1e-9 * w[0].abs(), "log-likelihood decreased: {trace:?}");
    }
}

#[test]
fn training_is_deterministic() {
    let syn = synthetic(200, 3);
    let refs: Vec<(&str, &str)> = syn.pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let a = train(&corpus(&refs), &TrainOptions::default()).unwrap();
    let b = train(&corpus(&refs), &TrainOptions::default()).unwrap();
    assert_eq!(a.to_json(), b.to_json());
}
