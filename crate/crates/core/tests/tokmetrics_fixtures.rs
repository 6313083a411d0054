//! Tokenizer metrics on the bundled stub tokenizers, the cipher fixture and
//! the vendored DeepSeek LLM tokenizer.

use std::path::PathBuf;

use lrlkit::corpus::{load_classification, make_parallel, Format, Split, TaskLabelSet};
use lrlkit::harness::{MockBackend, ScoringBackend};
use lrlkit::tokmetrics::{
    information_parity, profile_language, token_to_byte_ratio, tokenizer_parity, TokenizerHandle,
};
use proptest::prelude::*;

fn repo(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn byte_level() -> TokenizerHandle {
    TokenizerHandle::from_file(&repo("fixtures/tokenizers/byte_level.json")).unwrap()
}

fn word_level() -> TokenizerHandle {
    TokenizerHandle::from_file(&repo("fixtures/tokenizers/word_level.json")).unwrap()
}

#[test]
fn stub_tokenizers_load_with_expected_flags() {
    assert!(byte_level().byte_fallback());
    assert!(!word_level().byte_fallback());
    assert_eq!(byte_level().vocab_size(), 256);
    assert!(byte_level().encode("").unwrap().is_empty());
}

#[test]
fn forty_bytes_in_ten_tokens() {
    let text = "aaa bbb ccc ddd eee fff ggg hhh iii jjjj";
    assert_eq!(text.len(), 40);
    assert_eq!(token_to_byte_ratio(text, &word_level()).unwrap(), 0.25);
    assert!(token_to_byte_ratio("", &word_level()).is_err());
}

#[test]
fn profile_matches_scripted_recomputation() {
    let oracle: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(repo("fixtures/profile_oracle.json")).unwrap()).unwrap();
    let data = load_classification(&repo("fixtures/sib_cipher.jsonl"), Format::Jsonl, &TaskLabelSet::sib_topics())
        .unwrap();
    let train = data.split(Split::Train);
    let corpus = make_parallel(train.iter().copied(), "nqo_Nkoo").unwrap().corpus;
    assert_eq!(corpus.len() as u64, oracle["pairs"].as_u64().unwrap());
    for (name, tok) in [("word_level", word_level()), ("byte_level", byte_level())] {
        let p = profile_language(&corpus, &tok, &MockBackend::default()).unwrap();
        assert_eq!(p.n, 701);
        for (field, ours) in [("tbr", p.tbr), ("tp", p.tp), ("ip", p.ip)] {
            let expected = oracle[name][field].as_f64().unwrap();
            assert!((ours - expected).abs() < 1e-12, "{name}.{field}: {ours} vs {expected}");
        }
    }
}

#[test]
fn ranking_languages_by_ip_follows_target_nll() {
    use std::collections::HashMap;
    use lrlkit::harness::MockScoring;
    // Three languages share the English side; target NLLs are stubbed.
    let english = "the team won";
    let table: HashMap<String, f64> = [
        (english.to_string(), 30.0),
        ("aaa".to_string(), 60.0),
        ("bbb".to_string(), 150.0),
        ("ccc".to_string(), 90.0),
    ]
    .into_iter()
    .collect();
    let mock = MockBackend::default().with_scoring(MockScoring::Table(table));
    let mut ips: Vec<(&str, f64)> = ["aaa", "bbb", "ccc"]
        .iter()
        .map(|t| (*t, information_parity(t, english, &mock).unwrap()))
        .collect();
    ips.sort_by(|a, b| a.1.total_cmp(&b.1));
    assert_eq!(ips.iter().map(|x| x.0).collect::<Vec<_>>(), vec!["bbb", "ccc", "aaa"]);
    assert_eq!(mock.score(english).unwrap().nll(), 30.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn byte_level_tbr_is_exactly_one(text in "\\PC{1,60}") {
        prop_assert_eq!(token_to_byte_ratio(&text, &byte_level()).unwrap(), 1.0);
    }

    #[test]
    fn encode_decode_is_idempotent(text in "\\PC{0,60}") {
        let tok = byte_level();
        let ids = tok.encode(&text).unwrap();
        let again = tok.encode(&tok.decode(&ids).unwrap()).unwrap();
        prop_assert_eq!(ids, again);
    }

    #[test]
    fn parity_is_reciprocal(a in "[a-z]{1,8}( [a-z]{1,8}){0,6}", b in "[a-z]{1,8}( [a-z]{1,8}){0,6}") {
        let tok = word_level();
        let ab = tokenizer_parity(&a, &b, &tok).unwrap();
        let ba = tokenizer_parity(&b, &a, &tok).unwrap();
        prop_assert!((ab * ba - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ip_is_scale_invariant(t in "\\PC{1,40}", e in "[ -~]{1,40}", scale in 0.01f64..100.0) {
        let base = MockBackend::default();
        let scaled = MockBackend { logprob_scale: scale, ..MockBackend::default() };
        let a = information_parity(&t, &e, &base).unwrap();
        let b = information_parity(&t, &e, &scaled).unwrap();
        prop_assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
    }
}

#[test]
fn vendored_deepseek_tokenizer_on_sample_sentences() {
    // Token counts frozen from the Python `tokenizers` library on the same file.
    let tok = TokenizerHandle::from_file(&repo("crates/core/assets/deepseek_llm_tokenizer.json")).unwrap();
    let sat = "ᱡᱚᱛᱚ ᱞᱮᱠᱟᱱᱚ ᱢᱳᱱᱚ ᱟᱨᱚ ᱚᱫᱷᱤᱠᱟᱨᱚ ᱨᱮᱭᱟᱠᱚ ᱟᱫᱷᱟᱨᱚ ᱨᱮ ᱢᱩᱪᱳᱛᱚ ᱫᱷᱟᱵᱤᱪᱚ ᱥᱣᱚᱛᱚᱱᱛᱨᱚ ᱟᱨᱚ ᱥᱩᱢᱟᱱᱚ ᱠᱳ ᱦᱩᱭᱩᱠᱚᱟ᱾";
    let nqo = "ߞߣߐ߫ ߛߓߍߟߌ߫ ߞߊߡߊ߬ ߞߊ߬ ߞߐߕߐ߮ ߞߎߘߊ ߘߏ߫ ߘߊߦߟߍ߬ ߸ ߏ߬ ߞߐ߫ ߞߊ߬ ߛߓߍߛߋ߲ ߠߎ߬ ߦߪߐ ߟߊߞߊ߬";
    let english = "All human beings are born free and equal in dignity and rights.";
    assert_eq!(tok.encode(sat).unwrap().len(), 254);
    assert_eq!(tok.encode(nqo).unwrap().len(), 139);
    assert_eq!(tok.encode(english).unwrap().len(), 13);
    assert!(token_to_byte_ratio(sat, &tok).unwrap() >= 0.97);
    assert!(tok.byte_fallback());
}
