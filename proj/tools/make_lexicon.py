#!/usr/bin/env python3
"""Regenerate data/lexicon_en.tsv from the lemminflect inflection table.

Usage: make_lexicon.py path/to/infl_lu.csv.gz > data/lexicon_en.tsv

Each output line is "word<TAB>tags" where tags is a subset of "nvar"
(noun, verb, adjective, adverb). Inflected forms inherit the tags of
their lemma.
"""
import gzip
import re
import sys

POS = {"noun": "n", "verb": "v", "adj": "a", "adv": "r"}
WORD = re.compile(r"^[a-z]+$")


def main(path):
    tags = {}
    with gzip.open(path, "rt", encoding="utf-8") as f:
        for line in f:
            parts = line.rstrip("\n").split(",")
            lemma, pos = parts[0], POS.get(parts[1])
            if pos is None:
                continue
            words = {lemma}
            for field in parts[2:]:
                words.update(field.split("/"))
            for w in words:
                w = w.lower()
                if WORD.match(w):
                    tags.setdefault(w, set()).add(pos)
    sys.stdout.write("# word\ttags (n=noun v=verb a=adjective r=adverb)\n")
    for w in sorted(tags):
        sys.stdout.write(w + "\t" + "".join(t for t in "nvar" if t in tags[w]) + "\n")


if __name__ == "__main__":
    main(sys.argv[1])
