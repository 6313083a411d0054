#!/usr/bin/env python3
"""Regenerate the bundled fixtures.

The fixture language is a word-for-word cipher of English written in N'Ko
letters: every English word maps to one pseudo-word and word order is kept,
so an aligner can recover the dictionary exactly and word-level translation
reproduces the English side.

Usage: python3 scripts/make_fixtures.py [output_dir]
"""

import hashlib
import json
import math
import random
import sys
from pathlib import Path

TOPICS = {
    "science/technology": "computer software research laboratory scientists robot energy satellite data physics chemistry engineers telescope battery internet device experiment theory network algorithm".split(),
    "travel": "airport flight hotel tourists journey passport beach luggage ticket train cruise visitors guide resort border trip museum road station".split(),
    "politics": "government minister election parliament president vote party policy law senator campaign reform opposition treaty cabinet court protest citizens".split(),
    "sports": "football team match goal player coach tournament championship league stadium athletes medal race score season fans referee olympic".split(),
    "health": "doctors hospital patients disease vaccine medicine virus treatment nurses infection symptoms clinic surgery diet blood cancer therapy illness".split(),
    "entertainment": "film music actor concert festival album singer movie television show audience theatre dance comedy award celebrity band drama".split(),
    "geography": "river mountain island desert ocean valley volcano forest lake climate region continent glacier coast plateau earthquake rainfall canyon".split(),
}
FUNCTION = "the a of in on and with for to from by at was is were has have will many new large small old several".split()
LABELS = list(TOPICS)

TEST_COUNTS = [51, 26, 26, 26, 25, 25, 25]
DEV_COUNTS = [25, 14, 12, 12, 13, 12, 11]
TRAIN_COUNTS = [176, 105, 88, 84, 89, 86, 73]

NKO_LETTERS = [chr(c) for c in range(0x07CA, 0x07EB)]


def cipher_table(words):
    table, used = {}, set()
    for w in sorted(set(words)):
        salt = 0
        while True:
            h = hashlib.sha256(f"{w}:{salt}".encode()).digest()
            length = 2 + h[0] % 4
            token = "".join(NKO_LETTERS[b % len(NKO_LETTERS)] for b in h[1 : 1 + length])
            if token not in used:
                break
            salt += 1
        used.add(token)
        table[w] = token
    return table


ALL_WORDS = FUNCTION + [w for ws in TOPICS.values() for w in ws]
CIPHER = cipher_table(ALL_WORDS)


def encipher(text):
    return " ".join(CIPHER[w] for w in text.split())


def sentence(rng, topic, seen):
    while True:
        n_topic = rng.randint(3, 5)
        n_func = rng.randint(3, 6)
        words = rng.sample(TOPICS[topic], n_topic) + [rng.choice(FUNCTION) for _ in range(n_func)]
        if rng.random() < 0.2:
            other = rng.choice([t for t in LABELS if t != topic])
            words.append(rng.choice(TOPICS[other]))
        rng.shuffle(words)
        s = " ".join(words)
        if s not in seen:
            seen.add(s)
            return s


def sib(out):
    rng = random.Random(20240601)
    seen = set()
    rows = []
    for split, counts in (("train", TRAIN_COUNTS), ("dev", DEV_COUNTS), ("test", TEST_COUNTS)):
        block = []
        for label, count in zip(LABELS, counts):
            for _ in range(count):
                en = sentence(rng, label, seen)
                block.append({"text": encipher(en), "text_en": en, "label": label, "split": split})
        rng.shuffle(block)
        rows.extend(block)
    with open(out / "sib_cipher.jsonl", "w", encoding="utf-8") as f:
        for i, r in enumerate(rows):
            r = {"id": f"sib-{i + 1:04d}", **r}
            f.write(json.dumps(r, ensure_ascii=False) + "\n")
    return rows


def belebele(out):
    rng = random.Random(77)
    seen = set()
    rows = []
    for split, n in (("train", 60), ("dev", 12), ("test", 24)):
        for _ in range(n):
            topic = rng.choice(LABELS)
            passage = ". ".join(sentence(rng, topic, seen) for _ in range(3))
            q_word = rng.choice(TOPICS[topic])
            choices = [rng.choice(TOPICS[t]) for t in rng.sample(LABELS, 4)]
            answer = rng.randrange(4)
            choices[answer] = q_word
            rows.append(
                {
                    "passage": ". ".join(encipher(s) for s in passage.split(". ")),
                    "passage_en": passage,
                    "question": encipher(f"the {q_word} is in the"),
                    "choices": [encipher(c) for c in choices],
                    "answer": answer,
                    "split": split,
                }
            )
    with open(out / "belebele_cipher.jsonl", "w", encoding="utf-8") as f:
        for i, r in enumerate(rows):
            f.write(json.dumps({"id": f"bel-{i + 1:03d}", **r}, ensure_ascii=False) + "\n")


def bytes_to_unicode():
    bs = list(range(ord("!"), ord("~") + 1)) + list(range(ord("¡"), ord("¬") + 1)) + list(range(ord("®"), ord("ÿ") + 1))
    cs = bs[:]
    n = 0
    for b in range(256):
        if b not in bs:
            bs.append(b)
            cs.append(256 + n)
            n += 1
    return dict(zip(bs, [chr(c) for c in cs]))


def tokenizers(out):
    alphabet = bytes_to_unicode()
    vocab = {alphabet[b]: b for b in range(256)}
    byte_level = {
        "version": "1.0",
        "truncation": None,
        "padding": None,
        "added_tokens": [],
        "normalizer": None,
        "pre_tokenizer": {"type": "ByteLevel", "add_prefix_space": False, "trim_offsets": True, "use_regex": True},
        "post_processor": None,
        "decoder": {"type": "ByteLevel", "add_prefix_space": False, "trim_offsets": True, "use_regex": True},
        "model": {
            "type": "BPE",
            "dropout": None,
            "unk_token": None,
            "continuing_subword_prefix": None,
            "end_of_word_suffix": None,
            "fuse_unk": False,
            "byte_fallback": False,
            "ignore_merges": False,
            "vocab": vocab,
            "merges": [],
        },
    }
    words = ["[UNK]"] + sorted(ALL_WORDS)
    word_level = {
        "version": "1.0",
        "truncation": None,
        "padding": None,
        "added_tokens": [],
        "normalizer": None,
        "pre_tokenizer": {"type": "WhitespaceSplit"},
        "post_processor": None,
        "decoder": None,
        "model": {"type": "WordLevel", "vocab": {w: i for i, w in enumerate(words)}, "unk_token": "[UNK]"},
    }
    tok_dir = out / "tokenizers"
    tok_dir.mkdir(exist_ok=True)
    for name, obj in (("byte_level.json", byte_level), ("word_level.json", word_level)):
        with open(tok_dir / name, "w", encoding="utf-8") as f:
            json.dump(obj, f, ensure_ascii=False, indent=1)
            f.write("\n")


def char_cost_nll(text):
    # Mirrors the documented default mock scorer: one token per character,
    # ASCII 1 nat and other characters 3 nats, times 1 + (codepoint % 5) / 10.
    return math.fsum((1.0 if ord(c) < 128 else 3.0) * (1 + (ord(c) % 5) / 10) for c in text)


def profile_oracle(out, rows):
    """Reference means over the training pairs for both stub tokenizers."""
    from tokenizers import Tokenizer

    train = [r for r in rows if r["split"] == "train"]
    result = {"pairs": len(train)}
    for name in ("word_level", "byte_level"):
        tok = Tokenizer.from_file(str(out / "tokenizers" / f"{name}.json"))
        count = lambda t: len(tok.encode(t, add_special_tokens=False).ids)
        tbr = [count(r["text"]) / len(r["text"].encode()) for r in train]
        tp = [count(r["text_en"]) / count(r["text"]) for r in train]
        ip = [char_cost_nll(r["text_en"]) / char_cost_nll(r["text"]) for r in train]
        result[name] = {
            "tbr": math.fsum(tbr) / len(train),
            "tp": math.fsum(tp) / len(train),
            "ip": math.fsum(ip) / len(train),
        }
    with open(out / "profile_oracle.json", "w", encoding="utf-8") as f:
        json.dump(result, f, indent=1)
        f.write("\n")


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "fixtures"
    out.mkdir(parents=True, exist_ok=True)
    rows = sib(out)
    belebele(out)
    tokenizers(out)
    profile_oracle(out, rows)


if __name__ == "__main__":
    main()
