"""Regenerates data/fixtures/synthetic: a small synthetic target language with
mismatched transcripts. Output is deterministic for a given --seed."""

import argparse
import pathlib
import random

PHONES = "p b t d k m n s l r a e i o u".split()
CONSONANTS = "p b t d k m n s l r".split()
VOWELS = "a e i o u".split()

# Target orthography; "c" is ambiguous between k and s.
RULES = [(p, p) for p in PHONES] + [("c", "k"), ("c", "s"), ("y", "i")]

# How a foreign annotator writes each phone: (letters, probability).
ANNOTATOR = {
    "p": [("p", 0.8), ("b", 0.2)],
    "b": [("b", 0.8), ("p", 0.2)],
    "t": [("t", 0.7), ("d", 0.3)],
    "d": [("d", 0.7), ("t", 0.3)],
    "k": [("k", 0.5), ("c", 0.3), ("g", 0.2)],
    "m": [("m", 0.9), ("n", 0.1)],
    "n": [("n", 0.9), ("m", 0.1)],
    "s": [("s", 0.8), ("z", 0.2)],
    "l": [("l", 0.7), ("r", 0.3)],
    "r": [("r", 0.7), ("l", 0.3)],
    "a": [("a", 0.55), ("ah", 0.2), ("u", 0.2), ("", 0.05)],
    "e": [("e", 0.55), ("eh", 0.2), ("i", 0.2), ("", 0.05)],
    "i": [("ee", 0.5), ("i", 0.35), ("e", 0.1), ("", 0.05)],
    "o": [("o", 0.55), ("oh", 0.2), ("u", 0.2), ("", 0.05)],
    "u": [("oo", 0.5), ("u", 0.35), ("o", 0.1), ("", 0.05)],
}


def spell(rng, phones):
    out = []
    for p in phones:
        if p == "k":
            out.append("c" if rng.random() < 0.5 else "k")
        elif p == "s":
            out.append("c" if rng.random() < 0.3 else "s")
        elif p == "i":
            out.append("y" if rng.random() < 0.2 else "i")
        else:
            out.append(p)
    return "".join(out)


def make_word(rng):
    phones = []
    for _ in range(rng.choice([1, 2, 2, 3])):
        phones += [rng.choice(CONSONANTS), rng.choice(VOWELS)]
        if rng.random() < 0.25:
            phones.append(rng.choice(["n", "s", "l"]))
    return phones


def annotate(rng, phones):
    letters = []
    for p in phones:
        opts = ANNOTATOR[p]
        r = rng.random()
        for text, prob in opts:
            r -= prob
            if r <= 0:
                break
        letters.append(text)
    return "".join(letters)


def sample_sentence(rng, words, trans, max_words):
    out, prev = [], None
    for _ in range(rng.randint(1, max_words)):
        row = trans[prev]
        w = rng.choices(range(len(words)), weights=row)[0]
        out.append(w)
        prev = w
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data/fixtures/synthetic"))
    args = ap.parse_args()
    rng = random.Random(args.seed)
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    lexicon = {}
    while len(lexicon) < 60:
        prons = make_word(rng)
        word = spell(rng, prons)
        if word not in lexicon:
            lexicon[word] = prons
    words = sorted(lexicon)
    weights = [1.0 / (k + 1) for k in range(len(words))]
    rng.shuffle(weights)
    trans = {None: weights}
    for w in range(len(words)):
        trans[w] = [x * rng.uniform(0.2, 1.8) for x in weights]

    def write(name, lines):
        (out / name).write_text("".join(line + "\n" for line in lines), encoding="utf-8")

    write("rules.tsv", ["# synthetic orthography"] + [f"{g}\t{p}" for g, p in RULES])
    write("words.txt", words)
    # The dictionary pins the true pronunciation of half the vocabulary.
    write("dict.tsv", [f"{w}\t{' '.join(lexicon[w])}" for w in words[::2]])
    write("word_corpus.txt", [" ".join(words[w] for w in sample_sentence(rng, words, trans, 3)) for _ in range(600)])

    # Aligned training pairs from separately drawn phone strings.
    pairs = []
    for _ in range(2200):
        phones = []
        for _ in range(rng.randint(1, 2)):
            phones += make_word(rng)
        pairs.append(f"{annotate(rng, phones)}\t{' '.join(phones)}")
    write("channel_pairs.tsv", pairs[:2000])
    write("dev_pairs.tsv", pairs[2000:])

    bundles, refs = [], []
    for _ in range(40):
        sentence = sample_sentence(rng, words, trans, 2)
        phones = [p for w in sentence for p in lexicon[words[w]]]
        refs.append(" ".join(phones))
        bundles.append("\n".join(annotate(rng, phones) or "a" for _ in range(3)))
    (out / "transcripts.txt").write_text("\n\n".join(bundles) + "\n", encoding="utf-8")
    write("reference.txt", refs)
    # One transcript per utterance for the encoder-decoder.
    write("seq2seq_input.txt", [b.split("\n")[0] for b in bundles])


if __name__ == "__main__":
    main()
