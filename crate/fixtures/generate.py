#!/usr/bin/env python3
"""Regenerates the bundled fixture corpora. Output is deterministic (fixed seed)."""

import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))

HINDI = """यह खोज पक्षियों में पंखों के विकास की पूरी जानकारी भी प्रदान करती है उन्होंने कहा
अब हमारे पास महीने चूहे हैं जो मधुमेह ग्रस्त नहीं लेकिन पहले थे भारत सरकार लोग देश शहर
गाँव पानी बच्चे स्कूल किताब समय दिन रात काम घर परिवार भाषा अनुवाद मशीन शब्द वाक्य
ज़िंदगी फ़ैसला क़ानून ख़बर ज़रूरी अख़बार सड़क पढ़ाई बड़ा लड़का लड़की विद्यालय प्रश्न उत्तर
स्वास्थ्य अस्पताल डॉक्टर दवा बीमारी इलाज वैज्ञानिक अध्ययन परिणाम महत्वपूर्ण सकते हो गया
किया जाता रहा था और या से को पर का ने एक दो तीन बहुत अधिक कम नया पुराना सुंदर
प्रदेश राज्य केंद्र मंत्री चुनाव वर्ष साल आज कल हमेशा कभी क्योंकि इसलिए""".split()

ENGLISH = """he said now we have months old rats who are not diabetic were this discovery also
provides complete information about the development of feathers in birds government people
country city village water children school book time day night work home family language
translation machine word sentence life decision law news important newspaper road study big
boy girl question answer health hospital doctor medicine disease treatment scientific result
can be was were is and or from to on of a one two three very more less new old beautiful
state centre minister election year today tomorrow always never because therefore tokenizer
subword vocabulary corpus model training evaluation metric score quality""".split()

PUNCT = [",", ".", "।", "?"]


def sentence(rng, pool, lo, hi):
    words = [rng.choice(pool) for _ in range(rng.randint(lo, hi))]
    if rng.random() < 0.3:
        words.insert(rng.randint(1, len(words)), str(rng.randint(1, 999)))
    if rng.random() < 0.4:
        words.insert(rng.randint(1, len(words)), rng.choice(PUNCT[:1]))
    words.append(rng.choice(PUNCT))
    return " ".join(words)


def mixed(rng):
    kind = rng.random()
    if kind < 0.45:
        return sentence(rng, HINDI, 4, 14)
    if kind < 0.9:
        return sentence(rng, ENGLISH, 4, 14)
    return sentence(rng, HINDI + ENGLISH, 4, 14)


def write(path, lines):
    with open(os.path.join(HERE, path), "w", encoding="utf-8", newline="\n") as f:
        for line in lines:
            f.write(line + "\n")


def main():
    rng = random.Random(20241016)
    write("corpus.txt", [mixed(rng) for _ in range(1000)])

    os.makedirs(os.path.join(HERE, "experiment"), exist_ok=True)
    for split, n in (("train", 300), ("test", 100)):
        en = [sentence(rng, ENGLISH, 4, 12) for _ in range(n)]
        hi = [sentence(rng, HINDI, 4, 12) for _ in range(n)]
        write(f"experiment/{split}.en", en)
        write(f"experiment/{split}.hi", hi)
        if split == "test":
            # hypotheses identical to the references: every metric sits at its identity value
            write("experiment/hyp.en-hi.txt", hi)
            write("experiment/hyp.hi-en.txt", en)


if __name__ == "__main__":
    main()
