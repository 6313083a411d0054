"""Write the byte-exact prompt golden fixtures.

The strings are assembled here from the canonical layouts, independently of
the Rust renderer, so the golden test compares two separate implementations.
"""

from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "crates/core/tests/fixtures/prompts"

LANG = "Nko"
TOPICS = ["science/technology", "travel", "politics", "sports", "health", "entertainment", "geography"]
DICT = {"ka": "dog", "ro": "runs", "mu": "fast"}

CLS_INPUT = "ka ro zu"
CLS_PAIRS = [("ka mu", "dog fast"), ("ro", "runs")]
CLS_DEMOS = [("ka ro", "dog runs", "sports"), ("mu zu", "fast river", "travel")]

MC_EXAMPLE = ("ka ro zu", "Who runs?", ["dog", "cat", "bird", "fish"])
MC_PAIRS = [("ka mu ro", "dog fast runs")]
MC_DEMOS = [
    ("mu ka", "fast dog", "What is fast?", ["cat", "dog", "river", "tree"], 1),
    ("ro zu", "runs river", "What runs?", ["river", "sun", "moon", "rain"], 0),
]

VARIANTS = ["baseline_zero", "word_alignment", "word_translation", "sentence_alignment", "fewshot_plain", "fewshot_aligned"]
POSITIONS = ["before_examples", "after_examples"]


def description(lang):
    opts = ", ".join(f'"{t}"' for t in TOPICS[:-1]) + f', and "{TOPICS[-1]}"'
    return (
        f"What is the topic discussed in the following {lang} text? There are seven options: {opts}. "
        "Now complete the following example without explanations."
    )


INSTRUCTION = f"Please use the provided English translation of each word to help you understand the {LANG} text."
MC_DESC = "Given the following passage, query, and answer choices, output the letter corresponding to the correct answer."


def framing(pairs):
    body = "; ".join(f"{LANG}: {s}; English: {e}" for s, e in pairs)
    return (
        f"Use the following pairs of {LANG} texts and their English translations to help you understand {LANG}. "
        f"{body}. Now based on your understanding, answer the question below without explanation."
    )


def glosses(text):
    clauses = [f"{w} means {DICT[w]} in English" for w in text.split() if w in DICT]
    return "; ".join(clauses) + "." if clauses else ""


def translation(text):
    return " ".join(DICT[w] for w in text.split() if w in DICT)


def cls_demo(text, eng, label, aligned):
    body = f"{text} means {eng} in English" if aligned else text
    return f"Text: {body}. Topic option is: {label}"


def classification(variant, position):
    x = CLS_INPUT
    if variant == "baseline_zero":
        return f"{description(LANG)} Text: {x}. Topic option is:"
    if variant == "word_alignment":
        return f"{description(LANG)} {INSTRUCTION} Text: {x}. {glosses(x)} Topic option is:"
    if variant == "word_translation":
        return f"{description('English')} Text: {translation(x)}. Topic option is:"
    if variant == "sentence_alignment":
        return f"{framing(CLS_PAIRS)} {description(LANG)} Text: {x}. Topic option is:"
    aligned = variant == "fewshot_aligned"
    demos = "\n".join(cls_demo(t, e, l, aligned) for t, e, l in CLS_DEMOS)
    if position == "before_examples":
        return f"{description(LANG)}\n{demos}\nText: {x}. Topic option is:"
    return f"{demos}\n{description(LANG)} Text: {x}. Topic option is:"


def mc_block(passage, question, choices, gloss_line=""):
    letters = "ABCD"
    lines = ["###", "Passage:", passage]
    if gloss_line:
        lines.append(gloss_line)
    lines += ["###", "Query:", question, "###", "Choices:"]
    lines += [f"({letters[i]}) {c}" for i, c in enumerate(choices)]
    lines.append("###")
    return "\n".join(lines)


def multichoice(variant, position):
    passage, question, choices = MC_EXAMPLE
    tail = "\nAnswer:"
    if variant == "baseline_zero":
        return f"{MC_DESC}\n{mc_block(passage, question, choices)}{tail}"
    if variant == "word_alignment":
        return f"{MC_DESC} {INSTRUCTION}\n{mc_block(passage, question, choices, glosses(passage))}{tail}"
    if variant == "word_translation":
        return f"{MC_DESC}\n{mc_block(translation(passage), question, choices)}{tail}"
    if variant == "sentence_alignment":
        return f"{framing(MC_PAIRS)}\n{MC_DESC}\n{mc_block(passage, question, choices)}{tail}"
    aligned = variant == "fewshot_aligned"
    demos = []
    for p, e, q, c, a in MC_DEMOS:
        shown = f"{p} means {e} in English" if aligned else p
        demos.append(f"{mc_block(shown, q, c)}\nAnswer: {'ABCD'[a]}")
    demos = "\n".join(demos)
    if position == "before_examples":
        return f"{MC_DESC}\n{demos}\n{mc_block(passage, question, choices)}{tail}"
    return f"{demos}\n{MC_DESC}\n{mc_block(passage, question, choices)}{tail}"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for task, fn in [("classification", classification), ("multichoice", multichoice)]:
        for variant in VARIANTS:
            for position in POSITIONS:
                path = OUT / f"{task}__{variant}__{position}.txt"
                path.write_bytes(fn(variant, position).encode("utf-8"))
    print(f"wrote {len(list(OUT.glob('*.txt')))} fixtures to {OUT}")


if __name__ == "__main__":
    main()
