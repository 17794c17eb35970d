"""Caption quality metrics: BLEU-4, ROUGE-L, METEOR, CIDEr-D.

All metrics share one tokenization rule: lowercase, punctuation removed,
whitespace split. METEOR runs exact and Porter-stem matching stages only
(no synonym database), which is constant across compared systems.
"""

from __future__ import annotations

import math
import string
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Optional, Sequence

from .stemmer import stem

_PUNCT_TABLE = str.maketrans("", "", string.punctuation)

BLEU_EPSILON = 1e-9
ROUGE_BETA = 1.2
CIDER_N = 4
CIDER_SIGMA = 6.0


def tokenize(text: str) -> list[str]:
    """Lowercase, strip punctuation characters, split on whitespace."""
    return text.lower().translate(_PUNCT_TABLE).split()


@dataclass(frozen=True)
class CaptionScores:
    bleu4: float
    rouge_l: float
    meteor: float
    cider: float

    def to_dict(self) -> dict:
        return {"bleu4": self.bleu4, "rouge_l": self.rouge_l, "meteor": self.meteor, "cider": self.cider}


# ---------------------------------------------------------------------------
# BLEU-4
# ---------------------------------------------------------------------------


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu4(candidate: Sequence[str], references: Sequence[Sequence[str]]) -> float:
    """BLEU-4 with brevity penalty; zero n-gram counts smoothed to epsilon."""
    if not candidate or not references:
        return 0.0
    log_sum = 0.0
    for n in range(1, 5):
        cand_counts = _ngrams(candidate, n)
        total = sum(cand_counts.values())
        if total == 0:
            log_sum += math.log(BLEU_EPSILON)
            continue
        max_ref = Counter()
        for ref in references:
            for gram, count in _ngrams(ref, n).items():
                if count > max_ref[gram]:
                    max_ref[gram] = count
        matches = sum(min(count, max_ref[gram]) for gram, count in cand_counts.items())
        log_sum += math.log(max(matches, BLEU_EPSILON) / total)
    precision_term = math.exp(log_sum / 4.0)

    c = len(candidate)
    r = min((abs(len(ref) - c), len(ref)) for ref in references)[1]
    brevity = 1.0 if c >= r else math.exp(1.0 - r / c)
    return brevity * precision_term


# ---------------------------------------------------------------------------
# ROUGE-L
# ---------------------------------------------------------------------------


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    rows = len(a)
    cols = len(b)
    prev = [0] * (cols + 1)
    for i in range(1, rows + 1):
        cur = [0] * (cols + 1)
        for j in range(1, cols + 1):
            if a[i - 1] == b[j - 1]:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[cols]


def rouge_l(candidate: Sequence[str], references: Sequence[Sequence[str]], beta: float = ROUGE_BETA) -> float:
    """LCS F-measure, max over references."""
    if not candidate:
        return 0.0
    best = 0.0
    for ref in references:
        if not ref:
            continue
        lcs = _lcs_length(candidate, ref)
        if lcs == 0:
            continue
        precision = lcs / len(candidate)
        recall = lcs / len(ref)
        score = (1 + beta**2) * precision * recall / (recall + beta**2 * precision)
        best = max(best, score)
    return best


# ---------------------------------------------------------------------------
# METEOR (exact + stem stages)
# ---------------------------------------------------------------------------


def _stage_match(
    cand: Sequence[str], ref: Sequence[str], key
) -> list[tuple[int, int]]:
    matches = []
    used_ref: set[int] = set()
    for i, tok in enumerate(cand):
        wanted = key(tok)
        for j, rtok in enumerate(ref):
            if j in used_ref:
                continue
            if key(rtok) == wanted:
                matches.append((i, j))
                used_ref.add(j)
                break
    return matches


def _meteor_single(candidate: Sequence[str], reference: Sequence[str]) -> float:
    if not candidate or not reference:
        return 0.0
    exact = _stage_match(candidate, reference, key=lambda t: t)
    matched_c = {i for i, _ in exact}
    matched_r = {j for _, j in exact}
    rest_c = [(i, t) for i, t in enumerate(candidate) if i not in matched_c]
    rest_r = [(j, t) for j, t in enumerate(reference) if j not in matched_r]
    stemmed = _stage_match(
        [t for _, t in rest_c], [t for _, t in rest_r], key=stem
    )
    alignment = exact + [(rest_c[i][0], rest_r[j][0]) for i, j in stemmed]
    m = len(alignment)
    if m == 0:
        return 0.0
    precision = m / len(candidate)
    recall = m / len(reference)
    f_mean = 10.0 * precision * recall / (recall + 9.0 * precision)

    alignment.sort()
    chunks = 1
    for (ci, ri), (cj, rj) in zip(alignment, alignment[1:]):
        if not (cj == ci + 1 and rj == ri + 1):
            chunks += 1
    penalty = 0.5 * (chunks / m) ** 3
    return f_mean * (1.0 - penalty)


def meteor(candidate: Sequence[str], references: Sequence[Sequence[str]]) -> float:
    return max((_meteor_single(candidate, ref) for ref in references), default=0.0)


# ---------------------------------------------------------------------------
# CIDEr-D
# ---------------------------------------------------------------------------


class CiderD:
    """Corpus-level CIDEr-D: TF-IDF n-gram cosine with a Gaussian length
    penalty, n = 1..4, scaled by 10. Document frequencies come from the
    reference sets of the whole corpus."""

    def __init__(self, n: int = CIDER_N, sigma: float = CIDER_SIGMA):
        self.n = n
        self.sigma = sigma

    def _count_ngrams(self, tokens: Sequence[str]) -> list[Counter]:
        return [_ngrams(tokens, k) for k in range(1, self.n + 1)]

    def compute(
        self, items: Sequence[tuple[Sequence[str], Sequence[Sequence[str]]]]
    ) -> tuple[float, list[float]]:
        """items: (candidate_tokens, [reference_tokens, ...]) per item.
        Returns (corpus mean, per-item scores)."""
        if not items:
            return 0.0, []
        doc_freq: dict[tuple, int] = defaultdict(int)
        for _, refs in items:
            seen: set[tuple] = set()
            for ref in refs:
                for counts in self._count_ngrams(ref):
                    seen.update(counts.keys())
            for gram in seen:
                doc_freq[gram] += 1
        log_corpus = math.log(max(len(items), 1))

        def tfidf(counters: list[Counter]) -> tuple[list[dict], list[float], int]:
            vecs = []
            norms = []
            for counts in counters:
                vec = {}
                sq = 0.0
                for gram, count in counts.items():
                    idf = log_corpus - math.log(max(doc_freq.get(gram, 0), 1.0))
                    weight = count * idf
                    vec[gram] = weight
                    sq += weight * weight
                vecs.append(vec)
                norms.append(math.sqrt(sq))
            length = sum(counters[0].values()) if counters else 0
            return vecs, norms, length

        scores = []
        for cand, refs in items:
            if not cand or not refs:
                scores.append(0.0)
                continue
            cand_vec, cand_norm, cand_len = tfidf(self._count_ngrams(cand))
            item_total = 0.0
            for ref in refs:
                ref_vec, ref_norm, ref_len = tfidf(self._count_ngrams(ref))
                delta = float(cand_len - ref_len)
                gauss = math.exp(-(delta**2) / (2.0 * self.sigma**2))
                sim_sum = 0.0
                for k in range(self.n):
                    num = sum(
                        min(w, ref_vec[k].get(gram, 0.0)) * ref_vec[k].get(gram, 0.0)
                        for gram, w in cand_vec[k].items()
                    )
                    denom = cand_norm[k] * ref_norm[k]
                    sim_sum += (num / denom if denom > 0 else 0.0) * gauss
                item_total += sim_sum / self.n
            scores.append(10.0 * item_total / len(refs))
        return sum(scores) / len(scores), scores


# ---------------------------------------------------------------------------
# Combined entry points
# ---------------------------------------------------------------------------


def caption_scores(
    candidate: str,
    references: Sequence[str],
    corpus: Optional[Sequence[tuple[str, Sequence[str]]]] = None,
) -> CaptionScores:
    """Score one candidate against its references.

    ``corpus`` supplies the (candidate, references) items defining CIDEr's
    document frequencies; when omitted, the single item is its own corpus.
    Empty candidate scores all zeros; empty reference list is an error.
    """
    if not references:
        raise ValueError("caption_scores requires at least one reference")
    cand_tokens = tokenize(candidate)
    ref_tokens = [tokenize(r) for r in references]
    if not cand_tokens:
        return CaptionScores(0.0, 0.0, 0.0, 0.0)

    if corpus is None:
        corpus = [(candidate, references)]
    corpus_items = [(tokenize(c), [tokenize(r) for r in refs]) for c, refs in corpus]
    target = (cand_tokens, ref_tokens)
    try:
        idx = corpus_items.index(target)
    except ValueError:
        corpus_items.append(target)
        idx = len(corpus_items) - 1
    _, cider_scores = CiderD().compute(corpus_items)

    return CaptionScores(
        bleu4=bleu4(cand_tokens, ref_tokens),
        rouge_l=rouge_l(cand_tokens, ref_tokens),
        meteor=meteor(cand_tokens, ref_tokens),
        cider=cider_scores[idx],
    )


def score_caption_corpus(
    items: Sequence[tuple[str, Sequence[str]]]
) -> tuple[CaptionScores, list[CaptionScores]]:
    """Score every (candidate, references) item; returns (means, per-item)."""
    if not items:
        raise ValueError("empty caption corpus")
    for _, refs in items:
        if not refs:
            raise ValueError("every item needs at least one reference")
    tokenized = [(tokenize(c), [tokenize(r) for r in refs]) for c, refs in items]
    _, cider_scores = CiderD().compute(tokenized)
    per_item = []
    for (cand, refs), cider_score in zip(tokenized, cider_scores):
        if not cand:
            per_item.append(CaptionScores(0.0, 0.0, 0.0, 0.0))
            continue
        per_item.append(
            CaptionScores(
                bleu4=bleu4(cand, refs),
                rouge_l=rouge_l(cand, refs),
                meteor=meteor(cand, refs),
                cider=cider_score,
            )
        )
    n = len(per_item)
    means = CaptionScores(
        bleu4=sum(s.bleu4 for s in per_item) / n,
        rouge_l=sum(s.rouge_l for s in per_item) / n,
        meteor=sum(s.meteor for s in per_item) / n,
        cider=sum(s.cider for s in per_item) / n,
    )
    return means, per_item
