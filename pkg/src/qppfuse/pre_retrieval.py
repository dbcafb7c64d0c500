"""Pre-retrieval predictors computed from index statistics and a sense lexicon.

Ten predictors in four families:
  specificity   AvgIDF, MaxIDF with idf(t) = ln(N/df)
  similarity    SumSCQ, AvgSCQ, MaxSCQ with SCQ(t) = (1 + ln cf) * ln(1 + N/df)
  variability   SumVAR, AvgVAR, MaxVAR with VAR(t) = population std of
                (1 + ln tf(t,d)) * ln(N/df) over the documents containing t
  ambiguity     AvP, AvNP — mean (noun) sense counts over lexicon terms

All logs natural. Duplicate query terms are scored once per distinct term
by default; terms missing from the index (or lexicon) are excluded, so the
averages run over scored terms only. A family with no scored terms yields
zeros and counts as degenerate (n_terms == 0).
"""

import math
import statistics
from typing import NamedTuple

from .corpus import Index, Query, SenseLexicon

__all__ = [
    "PRE_PREDICTORS",
    "IdfFamily",
    "ScqFamily",
    "VarFamily",
    "PolysemyScores",
    "idf_family",
    "scq_family",
    "var_family",
    "polysemy",
    "compute_pre_scores",
    "write_scores_long",
    "write_scores_wide",
]

PRE_PREDICTORS = (
    "AvgIDF",
    "MaxIDF",
    "SumSCQ",
    "AvgSCQ",
    "MaxSCQ",
    "SumVAR",
    "AvgVAR",
    "MaxVAR",
    "AvP",
    "AvNP",
)


class IdfFamily(NamedTuple):
    avg: float
    max: float
    n_terms: int


class ScqFamily(NamedTuple):
    sum: float
    avg: float
    max: float
    n_terms: int


class VarFamily(NamedTuple):
    sum: float
    avg: float
    max: float
    n_terms: int


class PolysemyScores(NamedTuple):
    avg_senses: float
    avg_noun_senses: float
    n_terms: int


def _query_terms(query, distinct: bool) -> list[str]:
    terms = query.terms if isinstance(query, Query) else tuple(query)
    if distinct:
        # sorted so that scores are exactly invariant to query-term order
        return sorted(set(terms))
    return list(terms)


def idf_family(index: Index, query, distinct: bool = True) -> IdfFamily:
    idfs = [
        math.log(index.n_docs / index.df[t])
        for t in _query_terms(query, distinct)
        if index.df.get(t, 0) >= 1
    ]
    if not idfs:
        return IdfFamily(0.0, 0.0, 0)
    return IdfFamily(sum(idfs) / len(idfs), max(idfs), len(idfs))


def scq_family(index: Index, query, distinct: bool = True) -> ScqFamily:
    scqs = [
        (1.0 + math.log(index.cf[t])) * math.log(1.0 + index.n_docs / index.df[t])
        for t in _query_terms(query, distinct)
        if index.df.get(t, 0) >= 1
    ]
    if not scqs:
        return ScqFamily(0.0, 0.0, 0.0, 0)
    return ScqFamily(sum(scqs), sum(scqs) / len(scqs), max(scqs), len(scqs))


def term_weight_std(index: Index, term: str) -> float:
    """Population std of (1 + ln tf) * idf over the postings of ``term``."""
    idf = math.log(index.n_docs / index.df[term])
    weights = [(1.0 + math.log(tf)) * idf for _, tf in index.postings[term]]
    if len(weights) == 1:
        return 0.0
    return statistics.pstdev(weights)


def var_family(index: Index, query, distinct: bool = True) -> VarFamily:
    stds = [
        term_weight_std(index, t)
        for t in _query_terms(query, distinct)
        if index.df.get(t, 0) >= 1
    ]
    if not stds:
        return VarFamily(0.0, 0.0, 0.0, 0)
    return VarFamily(sum(stds), sum(stds) / len(stds), max(stds), len(stds))


def polysemy(query, lexicon: SenseLexicon, distinct: bool = True) -> PolysemyScores:
    counts = [
        lexicon.get(t)
        for t in _query_terms(query, distinct)
        if t in lexicon
    ]
    if not counts:
        return PolysemyScores(0.0, 0.0, 0)
    totals = [c[0] for c in counts]
    nouns = [c[1] for c in counts]
    return PolysemyScores(sum(totals) / len(totals), sum(nouns) / len(nouns), len(counts))


def compute_pre_scores(
    index: Index,
    query,
    lexicon: SenseLexicon | None = None,
    distinct: bool = True,
) -> dict[str, float]:
    """All ten pre-retrieval values for one query, keyed by canonical name."""
    idf = idf_family(index, query, distinct)
    scq = scq_family(index, query, distinct)
    var = var_family(index, query, distinct)
    if lexicon is not None:
        pol = polysemy(query, lexicon, distinct)
    else:
        pol = PolysemyScores(0.0, 0.0, 0)
    return {
        "AvgIDF": idf.avg,
        "MaxIDF": idf.max,
        "SumSCQ": scq.sum,
        "AvgSCQ": scq.avg,
        "MaxSCQ": scq.max,
        "SumVAR": var.sum,
        "AvgVAR": var.avg,
        "MaxVAR": var.max,
        "AvP": pol.avg_senses,
        "AvNP": pol.avg_noun_senses,
    }


def write_scores_long(path, scores_by_query: dict[str, dict[str, float]]) -> None:
    """Long-format score TSV: query_id, predictor name, value."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for qid, scores in scores_by_query.items():
            for name, value in scores.items():
                fh.write(f"{qid}\t{name}\t{value:.6f}\n")


def write_scores_wide(path, scores_by_query: dict[str, dict[str, float]]) -> None:
    """Wide-format score TSV: header row of predictor names, one row per query."""
    if not scores_by_query:
        raise ValueError("no scores to write")
    names = list(next(iter(scores_by_query.values())).keys())
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("query_id\t" + "\t".join(names) + "\n")
        for qid, scores in scores_by_query.items():
            cells = "\t".join(f"{scores[n]:.6f}" for n in names)
            fh.write(f"{qid}\t{cells}\n")
