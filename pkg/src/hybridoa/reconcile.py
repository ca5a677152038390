"""Crosswalk construction between open and proprietary organization IDs.

Articles present in both an open and a proprietary corpus are joined by
DOI; the first authors' identifier pairs are tallied, and per open ID the
most frequent proprietary partner wins. Multiple affiliations of single
authors are the main noise source, so a minimum-support threshold is the
documented mitigation knob.
"""

from __future__ import annotations

import logging
import random
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from .errors import SampleTooLarge
from .identifiers import ROR_SCHEME, org_scheme
from .model import ArticleRecord, CrosswalkEntry

log = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class PairTally:
    """Support count for one open/proprietary identifier co-occurrence."""

    open_id: str
    proprietary_id: str
    scheme: str
    count: int


def build_bridge(
    open_corpus: Iterable[ArticleRecord],
    proprietary_corpus: Iterable[ArticleRecord],
) -> dict[str, tuple[ArticleRecord, ArticleRecord]]:
    """Join two corpora on DOI, keeping only unambiguous matches.

    A DOI bridges exactly when it occurs once in each corpus; DOIs that
    repeat within either corpus are logged and skipped.
    """
    sides: list[dict[str, ArticleRecord]] = []
    for corpus in (open_corpus, proprietary_corpus):
        unique: dict[str, ArticleRecord] = {}
        ambiguous: set[str] = set()
        for record in corpus:
            if record.doi is None:
                continue
            if record.doi in ambiguous:
                continue
            if record.doi in unique:
                ambiguous.add(record.doi)
                del unique[record.doi]
                continue
            unique[record.doi] = record
        if ambiguous:
            log.info("%d multi-occurrence DOIs skipped while bridging", len(ambiguous))
        sides.append(unique)
    open_side, prop_side = sides
    return {
        doi: (open_side[doi], prop_side[doi])
        for doi in open_side
        if doi in prop_side
    }


def tally_pairs(
    bridge: dict[str, tuple[ArticleRecord, ArticleRecord]],
    examples_per_pair: int = 3,
) -> tuple[list[PairTally], dict[tuple[str, str], tuple[str, ...]]]:
    """Count co-occurring first-author identifier pairs across the bridge.

    Every (open org ID x proprietary org ID) combination on a bridged
    article increments its tally once per article; articles lacking
    either side contribute nothing. Also returns up to
    `examples_per_pair` supporting DOIs per pair for audits.
    """
    counts: Counter = Counter()
    examples: dict[tuple[str, str], list[str]] = {}
    for doi in sorted(bridge):
        open_record, prop_record = bridge[doi]
        open_first = open_record.first_author()
        prop_first = prop_record.first_author()
        if open_first is None or prop_first is None:
            continue
        open_ids = sorted(o for o in open_first.org_ids if org_scheme(o) == ROR_SCHEME)
        prop_ids = sorted(p for p in prop_first.org_ids if org_scheme(p) != ROR_SCHEME)
        for open_id in open_ids:
            for prop_id in prop_ids:
                pair = (open_id, prop_id)
                counts[pair] += 1
                bucket = examples.setdefault(pair, [])
                if len(bucket) < examples_per_pair:
                    bucket.append(doi)
    tallies = [
        PairTally(open_id=o, proprietary_id=p, scheme=org_scheme(p), count=c)
        for (o, p), c in sorted(counts.items())
    ]
    return tallies, {pair: tuple(dois) for pair, dois in examples.items()}


def merge_tallies(shards: Iterable[Iterable[PairTally]]) -> list[PairTally]:
    """Sum tallies computed over corpus shards."""
    counts: Counter = Counter()
    for shard in shards:
        for t in shard:
            counts[(t.open_id, t.proprietary_id)] += t.count
    return [
        PairTally(open_id=o, proprietary_id=p, scheme=org_scheme(p), count=c)
        for (o, p), c in sorted(counts.items())
    ]


def select_crosswalk(
    tallies: Iterable[PairTally],
    min_support: int = 1,
) -> list[CrosswalkEntry]:
    """Pick the winning proprietary ID per (open ID, scheme).

    The maximal count wins; ties break to the lexicographically smallest
    proprietary ID. Winners below `min_support` are dropped. The result
    is a function on (open_id, scheme) but may map many open IDs onto the
    same proprietary ID.
    """
    grouped: dict[tuple[str, str], list[tuple[str, int]]] = {}
    for t in tallies:
        grouped.setdefault((t.open_id, t.scheme), []).append((t.proprietary_id, t.count))
    entries: list[CrosswalkEntry] = []
    for (open_id, scheme), candidates in grouped.items():
        top = max(count for _, count in candidates)
        if top < min_support:
            continue
        winner = min(prop_id for prop_id, count in candidates if count == top)
        entries.append(
            CrosswalkEntry(open_id=open_id, scheme=scheme, proprietary_id=winner, support=top)
        )
    entries.sort(key=lambda e: (e.scheme, e.open_id))
    return entries


def invert_crosswalk(entries: Iterable[CrosswalkEntry]) -> dict[str, frozenset[str]]:
    """Proprietary ID -> set of open IDs (non-injective by construction)."""
    inverse: dict[str, set[str]] = {}
    for entry in entries:
        inverse.setdefault(entry.proprietary_id, set()).add(entry.open_id)
    return {prop: frozenset(opens) for prop, opens in inverse.items()}


def audit_sample(
    crosswalk: list[CrosswalkEntry],
    k: int,
    seed: int,
) -> list[CrosswalkEntry]:
    """Uniform sample without replacement for human review, seed-reproducible."""
    if k > len(crosswalk):
        raise SampleTooLarge(f"k={k} exceeds crosswalk size {len(crosswalk)}")
    ordered = sorted(crosswalk, key=lambda e: (e.scheme, e.open_id, e.proprietary_id))
    rng = random.Random(seed)
    return rng.sample(ordered, k)
