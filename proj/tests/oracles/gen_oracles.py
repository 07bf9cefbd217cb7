#!/usr/bin/env python3
"""Independent oracle implementations used to freeze expected metric values.

Everything here is written directly from the published metric definitions
(SARI reference semantics, BLEU with +1 smoothing for higher orders,
ROUGE-L F1, token Levenshtein) and deliberately shares no code with the
C++ library it checks. Running this script regenerates the *_oracle.json
sheets under tests/data/.
"""

import json
import math
import os
import random
from collections import Counter

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "data")


# ---------------------------------------------------------------- text utils

def tokens(text, lower=False):
    t = text.split()
    return [w.lower() for w in t] if lower else t


def ngrams(toks, n):
    return Counter(tuple(toks[i:i + n]) for i in range(len(toks) - n + 1))


def split_sentences(text):
    out = []
    cur = []
    chars = list(text)
    i = 0
    while i < len(chars):
        c = chars[i]
        cur.append(c)
        if c in ".!?" and (i + 1 == len(chars) or chars[i + 1].isspace()):
            s = "".join(cur).strip()
            if s:
                out.append(s)
            cur = []
        i += 1
    s = "".join(cur).strip()
    if s:
        out.append(s)
    return out


def norm_ws(text):
    return " ".join(text.split())


# ---------------------------------------------------------------- levenshtein

def levenshtein(a, b):
    m, n = len(a), len(b)
    prev = list(range(n + 1))
    for i in range(1, m + 1):
        cur = [i] + [0] * n
        for j in range(1, n + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev = cur
    return prev[n]


# ---------------------------------------------------------------- stub NLI

def stub_nli(premise, hypothesis):
    h = set(tokens(hypothesis, lower=True))
    if not h:
        return 1.0
    p = set(tokens(premise, lower=True))
    return len(h & p) / len(h)


# ---------------------------------------------------------------- ngram loop reward

def ngram_loop_reward(text, thresholds, c):
    words = tokens(text, lower=True)
    for n in sorted(thresholds):
        hist = ngrams(words, n)
        if hist and max(hist.values()) >= thresholds[n]:
            return -c
    return 0.0


# ---------------------------------------------------------------- reward combination

def combined_total(w, nli, rnli, length_ratio, edit_ratio, ngram_reward):
    total = w[0] * nli
    total += w[1] * rnli
    total += w[2] * length_ratio
    total += w[3] * edit_ratio
    total += w[4] * ngram_reward
    return total


WEIGHTS = {
    "formalize": (1.0, 1.0, 0.0, 0.4, 1.0),
    "shorten": (1.0, 0.4, -0.2, 0.4, 1.0),
    "elaborate": (0.4, 1.0, 0.5, 0.4, 1.0),
    "paraphrase": (1.0, 1.0, 0.0, 0.4, 1.0),
    "proofread": (1.0, 1.0, 0.0, 0.0, 1.0),
}


# ---------------------------------------------------------------- BLEU

def bleu_stats(pred, refs):
    p = tokens(pred, lower=True)
    rs = [tokens(r, lower=True) for r in refs]
    matched = [0] * 4
    total = [0] * 4
    for n in range(1, 5):
        pn = ngrams(p, n)
        maxref = Counter()
        for r in rs:
            rn = ngrams(r, n)
            for g, cnt in rn.items():
                maxref[g] = max(maxref[g], cnt)
        matched[n - 1] = sum(min(cnt, maxref[g]) for g, cnt in pn.items())
        total[n - 1] = max(0, len(p) - n + 1)
    c = len(p)
    # closest reference length; ties -> shorter
    r = min((abs(len(r) - c), len(r)) for r in rs)[1]
    return matched, total, c, r


def bleu_from_stats(matched, total, c, r):
    if c == 0:
        return 0.0
    logsum = 0.0
    for n in range(4):
        num, den = matched[n], total[n]
        if n >= 1 and num == 0:
            num, den = num + 1, den + 1
        if num == 0 or den == 0:
            return 0.0
        logsum += math.log(num / den)
    bp = 1.0 if c > r else math.exp(1.0 - r / c)
    return math.exp(logsum / 4.0) * bp


def bleu(pred, refs):
    return bleu_from_stats(*bleu_stats(pred, refs))


# ---------------------------------------------------------------- SARI (reference semantics)

def _counter_mul(cnt, k):
    return Counter({g: v * k for g, v in cnt.items()})


def sari_ngram(sgrams, cgrams, rgramslist, numref):
    rgramcounter = Counter()
    for rgrams in rgramslist:
        rgramcounter.update(rgrams)
    sgramcounter_rep = _counter_mul(Counter(sgrams), numref)
    cgramcounter_rep = _counter_mul(Counter(cgrams), numref)

    # KEEP
    keep_rep = sgramcounter_rep & cgramcounter_rep
    keepgood_rep = keep_rep & rgramcounter
    keepall_rep = sgramcounter_rep & rgramcounter
    keeptmp1 = 0.0
    keeptmp2 = 0.0
    for g in keepgood_rep:
        keeptmp1 += keepgood_rep[g] / keep_rep[g]
        keeptmp2 += keepgood_rep[g]
    keep_p = 1.0
    if len(keep_rep) > 0:
        keep_p = keeptmp1 / len(keep_rep)
    keep_r = 1.0
    if len(keepall_rep) > 0:
        keep_r = keeptmp2 / sum(keepall_rep.values())
    keep_f = 0.0
    if keep_p > 0 or keep_r > 0:
        keep_f = 2 * keep_p * keep_r / (keep_p + keep_r)

    # DELETE (precision only)
    del_rep = sgramcounter_rep - cgramcounter_rep
    delgood_rep = del_rep - rgramcounter
    deltmp1 = 0.0
    for g in delgood_rep:
        deltmp1 += delgood_rep[g] / del_rep[g]
    del_p = 1.0
    if len(del_rep) > 0:
        del_p = deltmp1 / len(del_rep)

    # ADD
    addgrams = set(cgrams) - set(sgrams)
    addgood = addgrams & set(rgramcounter)
    addall = set(rgramcounter) - set(sgrams)
    add_p = 1.0
    if len(addgrams) > 0:
        add_p = len(addgood) / len(addgrams)
    add_r = 1.0
    if len(addall) > 0:
        add_r = len(addgood) / len(addall)
    add_f = 0.0
    if add_p > 0 or add_r > 0:
        add_f = 2 * add_p * add_r / (add_p + add_r)

    return keep_f, del_p, add_f


def sari(source, pred, refs):
    numref = len(refs)
    s = tokens(source, lower=True)
    c = tokens(pred, lower=True)
    rs = [tokens(r, lower=True) for r in refs]
    keep_sum = del_sum = add_sum = 0.0
    for n in range(1, 5):
        sg = [tuple(s[i:i + n]) for i in range(len(s) - n + 1)]
        cg = [tuple(c[i:i + n]) for i in range(len(c) - n + 1)]
        rg = [[tuple(r[i:i + n]) for i in range(len(r) - n + 1)] for r in rs]
        k, d, a = sari_ngram(sg, cg, rg, numref)
        keep_sum += k
        del_sum += d
        add_sum += a
    return (keep_sum / 4 + del_sum / 4 + add_sum / 4) / 3


# ---------------------------------------------------------------- ROUGE-L / update-rouge

def lcs_len(a, b):
    m, n = len(a), len(b)
    dp = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            if a[i - 1] == b[j - 1]:
                dp[i][j] = dp[i - 1][j - 1] + 1
            else:
                dp[i][j] = max(dp[i - 1][j], dp[i][j - 1])
    return dp[m][n]


def rouge_l_f1(pred_toks, ref_toks):
    if not pred_toks or not ref_toks:
        return 0.0
    l = lcs_len(pred_toks, ref_toks)
    p = l / len(pred_toks)
    r = l / len(ref_toks)
    if p + r == 0:
        return 0.0
    return 2 * p * r / (p + r)


def updated_sentences(text, source):
    src_set = {norm_ws(s) for s in split_sentences(source)}
    return [s for s in split_sentences(text) if norm_ws(s) not in src_set]


def update_rouge(source, pred, refs):
    pred_upd = updated_sentences(pred, source)
    pred_toks = tokens(" ".join(pred_upd), lower=True)
    best = 0.0
    for ref in refs:
        ref_upd = updated_sentences(ref, source)
        ref_toks = tokens(" ".join(ref_upd), lower=True)
        if not ref_toks and not pred_toks:
            score = 1.0
        elif not ref_toks or not pred_toks:
            score = 0.0
        else:
            score = rouge_l_f1(pred_toks, ref_toks)
        best = max(best, score)
    return best


# ---------------------------------------------------------------- sheets

def gen_dataset_stats():
    path = os.path.join(DATA, "toy_dataset.jsonl")
    examples = [json.loads(l) for l in open(path, encoding="utf-8") if l.strip()]

    def new_acc():
        return {"count": 0, "ins": 0, "sou": 0, "tar": 0,
                "len_ra": 0.0, "edit_ra": 0.0, "nli_st": 0.0, "nli_ts": 0.0}

    accs = {"all": new_acc()}
    order = []
    for ex in examples:
        for key in (ex["task"], "all"):
            if key not in accs:
                accs[key] = new_acc()
                order.append(key)
            a = accs[key]
            src = tokens(ex["source"])
            tar = tokens(ex["targets"][0])
            a["count"] += 1
            a["ins"] += len(tokens(ex["instruction"]))
            a["sou"] += len(src)
            a["tar"] += len(tar)
            a["len_ra"] += len(tar) / len(src)
            a["edit_ra"] += levenshtein(src, tar) / len(src)
            a["nli_st"] += stub_nli(ex["source"], ex["targets"][0])
            a["nli_ts"] += stub_nli(ex["targets"][0], ex["source"])

    out = {}
    for key, a in accs.items():
        n = a["count"]
        out[key] = {
            "count": n,
            "mean_instruction_len": a["ins"] / n,
            "mean_source_len": a["sou"] / n,
            "mean_target_len": a["tar"] / n,
            "mean_length_ratio": a["len_ra"] / n,
            "mean_edit_ratio": a["edit_ra"] / n,
            "mean_nli_source_target": a["nli_st"] / n,
            "mean_nli_target_source": a["nli_ts"] / n,
        }
    return out


SARI_TRIPLES = [
    ("the cat sat", "the cat", ["the cat"]),
    ("hello there friend", "hello there friend", ["hello there friend"]),
    ("a b c", "x y z", ["a b c"]),
    ("about five thousand tickets remain for the concert",
     "about 5k tickets are left for the show",
     ["about five thousand tickets are left for the concert"]),
    ("please send me the file now", "could you send the file",
     ["could you please send me the file", "send me the file right now please"]),
    ("meet at noon", "meet at noon tomorrow", ["meet at noon tomorrow"]),
    ("i really really need this asap", "i need this asap", ["i need this asap"]),
    ("the quick brown fox jumps over the lazy dog",
     "a quick brown fox leaps over a lazy dog",
     ["the quick brown fox leaps over the lazy dog"]),
    ("remove all of it", "", ["remove it"]),
    ("", "hello world", ["hello world"]),
    ("stop doing that now", "stop stop stop doing that", ["please stop doing that now"]),
    ("Hello World", "hello world", ["HELLO WORLD"]),
]

BLEU_CASES = [
    ("a b c", ["a b d"]),
    ("the cat sat on the mat", ["the cat sat on the mat"]),
    ("x y z", ["a b c"]),
    ("the small cat", ["the tiny cat", "a small cat"]),
    ("hello", ["hello there"]),
    ("b a", ["a b"]),
]

UPDATE_ROUGE_CASES = [
    ("Hello. The plan is set.", "Hello. we moved the meeting",
     ["Hello. the meeting was moved"]),
    ("Hi.", "Hi. See you at noon.", ["Hi. See you at noon."]),
    ("All good.", "All good.", ["All good. Thanks again."]),
    ("All good.", "All good.", ["All good."]),
    ("Done.", "Done. call me later", ["Done. ring me later", "Done. call me later"]),
    ("Okay.", "Okay. we should meet on friday", ["Okay. lets meet friday"]),
]


def gen_eval_sheet():
    ds = [json.loads(l) for l in open(os.path.join(DATA, "eval_toy_dataset.jsonl"), encoding="utf-8") if l.strip()]
    preds = {}
    for l in open(os.path.join(DATA, "eval_toy_predictions.jsonl"), encoding="utf-8"):
        if l.strip():
            rec = json.loads(l)
            preds[rec["id"]] = rec["prediction"]

    per_example = []
    sums = {"edit_ratio": 0.0, "length_ratio": 0.0, "nli": 0.0, "rnli": 0.0,
            "sari": 0.0, "update_rouge": 0.0, "bleu": 0.0}
    agg_matched = [0] * 4
    agg_total = [0] * 4
    agg_c = 0
    agg_r = 0
    flagged = 0
    for ex in ds:
        pred = preds[ex["id"]]
        src = tokens(ex["source"])
        pt = tokens(pred)
        er = levenshtein(src, pt) / len(src)
        lr = len(pt) / len(src)
        row = {
            "id": ex["id"],
            "edit_ratio": er,
            "length_ratio": lr,
            "nli": stub_nli(ex["source"], pred),
            "rnli": stub_nli(pred, ex["source"]),
            "sari": sari(ex["source"], pred, ex["targets"]),
            "bleu": bleu(pred, ex["targets"]),
            "update_rouge": update_rouge(ex["source"], pred, ex["targets"]),
            "flagged": er > 0.2,
        }
        if row["flagged"]:
            flagged += 1
        per_example.append(row)
        for k in sums:
            sums[k] += row[k]
        m, t, c, r = bleu_stats(pred, ex["targets"])
        for i in range(4):
            agg_matched[i] += m[i]
            agg_total[i] += t[i]
        agg_c += c
        agg_r += r

    n = len(ds)
    corpus = {k: v / n for k, v in sums.items() if k != "bleu"}
    corpus["corpus_bleu"] = bleu_from_stats(agg_matched, agg_total, agg_c, agg_r)
    corpus["mean_sentence_bleu"] = sums["bleu"] / n
    corpus["flagged_count"] = flagged
    return {"per_example": per_example, "corpus": corpus}


def gen_reward_totals():
    rng = random.Random(20240817)
    rows = []
    # the two pinned hand cases
    rows.append({"task": "shorten", "nli": 0.9, "rnli": 0.8, "length_ratio": 0.5,
                 "edit_ratio": 0.3, "ngram_reward": 0.0})
    rows.append({"task": "proofread", "nli": 1.0, "rnli": 1.0, "length_ratio": 1.0,
                 "edit_ratio": 0.0, "ngram_reward": 0.0})
    for task in WEIGHTS:
        need = 10 - sum(1 for r in rows if r["task"] == task)
        for _ in range(need):
            rows.append({
                "task": task,
                "nli": round(rng.uniform(0, 1), 4),
                "rnli": round(rng.uniform(0, 1), 4),
                "length_ratio": round(rng.uniform(0, 3), 4),
                "edit_ratio": round(rng.uniform(0, 2), 4),
                "ngram_reward": rng.choice([0.0, 0.0, -1.0, -2.5]),
            })
    for r in rows:
        r["total"] = combined_total(WEIGHTS[r["task"]], r["nli"], r["rnli"],
                                    r["length_ratio"], r["edit_ratio"], r["ngram_reward"])
    return rows


NGRAM_CASES = [
    ("go go go go go", {1: 4}, 1.0, -1.0),
    ("go go go go go", {1: 6}, 1.0, 0.0),
    ("yes yes", {1: 4}, 1.0, 0.0),
    ("all tokens distinct here", {1: 4, 2: 3}, 1.0, 0.0),
    ("a a a a a a a a", {1: 8}, 1.0, -1.0),
    ("a a a a a a a", {1: 8}, 1.0, 0.0),
    ("ha ha ha ha ha ha ha ha ha", {1: 8, 2: 5, 3: 4, 4: 3}, 1.0, -1.0),
    ("see you soon see you soon see you soon see you soon see you soon",
     {1: 8, 2: 5, 3: 4, 4: 3}, 1.0, -1.0),
    ("see you soon see you soon see you soon see you soon see you soon",
     {1: 8, 2: 6, 3: 4, 4: 3}, 1.0, -1.0),
    ("see you soon see you soon see you soon see you soon see you soon",
     {1: 8, 2: 6, 3: 6, 4: 3}, 1.0, -1.0),
    ("see you soon see you soon see you soon see you soon see you soon",
     {1: 8, 2: 6, 3: 6, 4: 5}, 1.0, 0.0),
    ("", {1: 8, 2: 5}, 1.0, 0.0),
    ("one", {1: 2}, 1.0, 0.0),
    ("no no", {1: 2}, 3.5, -3.5),
    ("no no", {1: 3}, 3.5, 0.0),
    ("lol lol lol lol", {1: 4}, 0.25, -0.25),
    ("a b a b a b a b", {2: 4}, 1.0, -1.0),
    ("a b a b a b a b", {2: 5}, 1.0, 0.0),
    ("a b a b a b a b", {1: 4, 2: 5}, 1.0, -1.0),
    ("the and the and the or the", {1: 4}, 2.0, -2.0),
    ("Go GO go gO", {1: 4}, 1.0, -1.0),
    ("tick tock tick tock tick tock", {3: 3}, 1.0, 0.0),
    ("tick tock tick tock tick tock tick", {3: 3}, 1.0, -1.0),
    ("hmm hmm hmm hmm hmm hmm hmm hmm hmm hmm", {1: 8, 2: 5, 3: 4, 4: 3}, 1.0, -1.0),
]


def main():
    for text, th, c, expected in NGRAM_CASES:
        got = ngram_loop_reward(text, th, c)
        assert got == expected, (text, th, c, got, expected)

    sheets = {
        "dataset_stats_oracle.json": gen_dataset_stats(),
        "sari_oracle.json": [
            {"source": s, "prediction": p, "references": r, "sari": sari(s, p, r)}
            for s, p, r in SARI_TRIPLES
        ],
        "bleu_oracle.json": [
            {"prediction": p, "references": r, "bleu": bleu(p, r)}
            for p, r in BLEU_CASES
        ],
        "update_rouge_oracle.json": [
            {"source": s, "prediction": p, "references": r,
             "update_rouge": update_rouge(s, p, r)}
            for s, p, r in UPDATE_ROUGE_CASES
        ],
        "eval_oracle.json": gen_eval_sheet(),
        "reward_totals_oracle.json": gen_reward_totals(),
    }
    for name, payload in sheets.items():
        path = os.path.join(DATA, name)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=1, sort_keys=True)
            f.write("\n")
        print("wrote", name)


if __name__ == "__main__":
    main()
