"""Aggregation of classified articles into indicators, coverage
intersections, and rank correlations.

Counting rules:
  * n_total counts every article in a hybrid journal, scholarly or not.
  * n_original counts countable articles (original, non-paratext,
    regular issue).
  * n_oa counts countable OA articles; n_ta_oa those attributed to an
    agreement for the requested role.
  * GLOBAL and PUBLISHER groupings count each article once; COUNTRY uses
    full counting over the role author's distinct country codes.
"""

from __future__ import annotations

import math
from collections import defaultdict
from typing import Iterable, Mapping

from .attribute import role_author
from .errors import InsufficientPairs
from .model import (
    ClassifiedArticle,
    CorrelationResult,
    GROUP_COUNTRY,
    GROUP_GLOBAL,
    GROUP_PUBLISHER,
    IndicatorRow,
    IntersectionSet,
)


def in_window(year: int, years: tuple[int, int]) -> bool:
    return years[0] <= year <= years[1]


def journal_universe(
    corpora: Mapping[str, Iterable[ClassifiedArticle]],
    years: tuple[int, int],
) -> dict[str, frozenset[str]]:
    """Journal ISSN-L -> set of sources with >=1 countable OA article in window."""
    membership: dict[str, set[str]] = defaultdict(set)
    for source, articles in corpora.items():
        for article in articles:
            if article.is_hybrid_oa and in_window(article.year, years):
                membership[article.record.journal_issn_l].add(source)
    return {issn_l: frozenset(sources) for issn_l, sources in membership.items()}


def journal_doi_sets(
    corpora: Mapping[str, Iterable[ClassifiedArticle]],
    years: tuple[int, int],
) -> dict[tuple[str, str], set[str]]:
    """(source, issn_l) -> DOIs of countable articles in the window."""
    out: dict[tuple[str, str], set[str]] = defaultdict(set)
    for source, articles in corpora.items():
        for article in articles:
            if article.countable and article.record.doi and in_window(article.year, years):
                out[(source, article.record.journal_issn_l)].add(article.record.doi)
    return dict(out)


def upset_sets(
    universe: Mapping[str, frozenset[str]],
    doi_sets: Mapping[tuple[str, str], set[str]],
    open_source: str,
) -> list[IntersectionSet]:
    """Exclusive intersection decomposition of the journal universe.

    Per occupied membership combination: the number of journals, the
    shared-DOI corpus (DOIs present in every member source), and the
    open-source surplus (DOIs present in no other member source). All
    occupied combinations are emitted; display thresholds are a rendering
    concern, not a data one.
    """
    journals_by_membership: dict[frozenset[str], list[str]] = defaultdict(list)
    for issn_l, membership in universe.items():
        journals_by_membership[membership].append(issn_l)
    out: list[IntersectionSet] = []
    for membership, journals in journals_by_membership.items():
        shared = 0
        surplus = 0
        for issn_l in journals:
            per_source = {s: doi_sets.get((s, issn_l), set()) for s in membership}
            shared += len(set.intersection(*per_source.values())) if per_source else 0
            if open_source in membership:
                others = [dois for s, dois in per_source.items() if s != open_source]
                open_dois = per_source[open_source]
                surplus += len(open_dois.difference(*others) if others else open_dois)
        out.append(
            IntersectionSet(
                membership=membership,
                n_journals=len(journals),
                n_articles_shared=shared,
                n_articles_surplus_open=surplus if open_source in membership else 0,
            )
        )
    out.sort(key=lambda s: (-len(s.membership), sorted(s.membership)))
    return out


def aggregate(
    stream: Iterable[tuple[ClassifiedArticle, bool]],
    group_kind: str,
    role: str,
    years: tuple[int, int],
) -> list[IndicatorRow]:
    """Aggregate (article, ta_enabled-for-role) pairs into indicator rows.

    Articles in non-hybrid or unknown journals are out of scope entirely.
    COUNTRY rows increment once per distinct country of the role author,
    so one multi-country article adds a full count to several countries.
    """
    counts: dict[tuple[int, str, str], list[int]] = defaultdict(lambda: [0, 0, 0, 0])

    for article, ta_enabled in stream:
        if not article.journal_is_hybrid or not in_window(article.year, years):
            continue
        if group_kind == GROUP_GLOBAL:
            keys = ("",)
        elif group_kind == GROUP_PUBLISHER:
            keys = (article.publisher,)
        elif group_kind == GROUP_COUNTRY:
            author = role_author(article, role)
            keys = tuple(sorted(author.countries)) if author is not None else ()
        else:
            raise ValueError(f"unknown group kind {group_kind!r}")
        for key in keys:
            cell = counts[(article.year, article.record.source, key)]
            cell[0] += 1
            if article.countable:
                cell[1] += 1
                if article.is_hybrid_oa:
                    cell[2] += 1
                    if ta_enabled:
                        cell[3] += 1

    rows = [
        IndicatorRow(
            year=year,
            source=source,
            role=role,
            group_kind=group_kind,
            group_key=key,
            n_total=cell[0],
            n_original=cell[1],
            n_oa=cell[2],
            n_ta_oa=cell[3],
        )
        for (year, source, key), cell in counts.items()
    ]
    rows.sort(key=lambda r: (r.source, r.year, r.group_key))
    return rows


def _average_ranks(values: list[float]) -> list[float]:
    """Ranks 1..n with ties receiving the average of their rank positions."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def spearman(
    x: Mapping[str, float],
    y: Mapping[str, float],
    min_count: float | None = None,
) -> CorrelationResult:
    """Spearman rank correlation of two per-key metrics.

    Keys missing on either side are dropped; when `min_count` is given,
    keys whose value falls below it on either side are filtered out. Ties
    get average ranks; the coefficient is the Pearson correlation of the
    rank vectors.
    """
    keys = sorted(
        k
        for k in x.keys() & y.keys()
        if min_count is None or (x[k] >= min_count and y[k] >= min_count)
    )
    if len(keys) < 2:
        raise InsufficientPairs(f"{len(keys)} paired observations after filtering")
    rx = _average_ranks([x[k] for k in keys])
    ry = _average_ranks([y[k] for k in keys])
    n = len(keys)
    mx = sum(rx) / n
    my = sum(ry) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    vx = sum((a - mx) ** 2 for a in rx)
    vy = sum((b - my) ** 2 for b in ry)
    if vx == 0 or vy == 0:
        raise InsufficientPairs("constant ranking on one side")
    rho = cov / math.sqrt(vx * vy)
    return CorrelationResult(
        rho=rho, n=n, filter_threshold=min_count if min_count is not None else 0.0
    )


def coverage_summary(
    corpora: Mapping[str, Iterable[ClassifiedArticle]],
    years: tuple[int, int],
) -> list[tuple[str, str, int]]:
    """Per-source coverage accounting over the year window.

    Returns (source, measure, value) triples: journal activity tiers,
    publication volumes, DOI coverage, OA volumes, and role-author
    affiliation availability, restricted to hybrid journals.
    """
    out: list[tuple[str, str, int]] = []
    for source in sorted(corpora):
        journals_active: set[str] = set()
        journals_original: set[str] = set()
        journals_oa: set[str] = set()
        totals = defaultdict(int)
        for article in corpora[source]:
            if not article.journal_is_hybrid or not in_window(article.year, years):
                continue
            issn_l = article.record.journal_issn_l
            journals_active.add(issn_l)
            totals["articles_total"] += 1
            if article.record.doi:
                totals["articles_with_doi"] += 1
            if article.countable:
                journals_original.add(issn_l)
                totals["articles_original"] += 1
                if article.record.doi:
                    totals["articles_original_with_doi"] += 1
                if article.is_hybrid_oa:
                    journals_oa.add(issn_l)
                    totals["articles_original_oa"] += 1
                first = article.record.first_author()
                if first is not None and first.org_ids:
                    totals["articles_original_first_affiliation"] += 1
                if any(a.org_ids for a in article.record.corresponding_authors()):
                    totals["articles_original_corresponding_affiliation"] += 1
        measures = [
            ("journals_active", len(journals_active)),
            ("journals_active_original", len(journals_original)),
            ("journals_active_original_oa", len(journals_oa)),
            ("articles_total", totals["articles_total"]),
            ("articles_original", totals["articles_original"]),
            ("articles_with_doi", totals["articles_with_doi"]),
            ("articles_original_with_doi", totals["articles_original_with_doi"]),
            ("articles_original_oa", totals["articles_original_oa"]),
            ("articles_original_first_affiliation", totals["articles_original_first_affiliation"]),
            (
                "articles_original_corresponding_affiliation",
                totals["articles_original_corresponding_affiliation"],
            ),
        ]
        out.extend((source, measure, value) for measure, value in measures)
    return out
