"""Shared domain types for the hybrid open access engine.

All values are immutable after construction and safe to share across
threads or pickle into worker processes. Source labels are plain strings;
the set of sources and which one is the open baseline comes from the
pipeline configuration. Organization identifiers are scheme-tagged
strings ("ror:...", "srcA:...") handled by helpers in `identifiers`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import date

from .errors import SchemaViolation

ROLE_FIRST = "first"
ROLE_CORRESPONDING = "corresponding"
ROLES = (ROLE_FIRST, ROLE_CORRESPONDING)

GROUP_GLOBAL = "GLOBAL"
GROUP_PUBLISHER = "PUBLISHER"
GROUP_COUNTRY = "COUNTRY"
GROUP_KINDS = (GROUP_GLOBAL, GROUP_PUBLISHER, GROUP_COUNTRY)

_DATE_YM = re.compile(r"^(\d{4})-(\d{2})$")
_DATE_Y = re.compile(r"^(\d{4})$")


def parse_date_pinned(text: str) -> date:
    """Parse an ISO-8601 date, pinning truncated precision early.

    Year-only values become January 1, year-month values day 1. Pinning
    early is deterministic and biases toward inclusion at agreement
    window boundaries.
    """
    text = text.strip()
    try:
        m = _DATE_Y.match(text)
        if m:
            return date(int(m.group(1)), 1, 1)
        m = _DATE_YM.match(text)
        if m:
            return date(int(m.group(1)), int(m.group(2)), 1)
        return date.fromisoformat(text)
    except ValueError as exc:
        raise SchemaViolation("bad_date", text) from exc


def normalize_publisher(name: str, aliases: dict[str, str] | None = None) -> str:
    """Collapse whitespace and map a publisher label through the alias table.

    Alias keys are compared case-insensitively; unmapped names pass
    through with whitespace normalized only.
    """
    cleaned = " ".join(name.split())
    if aliases:
        return aliases.get(cleaned.casefold(), cleaned)
    return cleaned


@dataclass(frozen=True, slots=True)
class Journal:
    """A venue keyed by its linking ISSN."""

    issn_l: str
    issn_variants: frozenset[str] = frozenset()
    publisher: str = ""
    is_hybrid: bool = True
    title: str = ""

    @property
    def all_issns(self) -> frozenset[str]:
        return self.issn_variants | {self.issn_l}


@dataclass(frozen=True, slots=True)
class LicenseStatement:
    """One license assertion attached to an article."""

    url: str
    applies_to_vor: bool
    start_date: date | None = None


@dataclass(frozen=True, slots=True)
class Authorship:
    """One author slot on an article.

    `is_corresponding` is None when the source does not carry
    corresponding-author data at all; that absence matters downstream
    (no silent substitution of first authors).
    """

    position: int
    is_corresponding: bool | None = None
    org_ids: frozenset[str] = frozenset()
    countries: frozenset[str] = frozenset()

    @property
    def is_first(self) -> bool:
        return self.position == 1


@dataclass(frozen=True, slots=True)
class ArticleRecord:
    """One article as reported by one source.

    `pub_date` is the earliest known publication date; when the input
    carries several dates the minimum (after pinning) is kept.
    """

    source: str
    native_id: str
    journal_issn_l: str
    pub_date: date | None
    document_class: str
    doi: str | None = None
    pagination: str | None = None
    article_number: str | None = None
    title: str = ""
    licenses: tuple[LicenseStatement, ...] = ()
    authors: tuple[Authorship, ...] = ()

    def first_author(self) -> Authorship | None:
        for a in self.authors:
            if a.position == 1:
                return a
        return None

    def corresponding_authors(self) -> tuple[Authorship, ...]:
        return tuple(a for a in self.authors if a.is_corresponding is True)

    def has_corresponding_data(self) -> bool:
        return any(a.is_corresponding is not None for a in self.authors)


@dataclass(frozen=True, slots=True)
class Institution:
    """An agreement-participating organization with its associated IDs.

    Associated identifiers (hospitals, institutes of umbrella
    organizations) resolve to this institution during matching.
    """

    org_id: str
    country: str = ""
    associated_ids: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.org_id in self.associated_ids:
            raise SchemaViolation("self_association", self.org_id)


@dataclass(frozen=True, slots=True)
class Agreement:
    """A read-and-publish deal: journals x institutions x validity window."""

    agreement_id: str
    publisher: str
    journal_issn_ls: frozenset[str]
    institution_ids: frozenset[str]
    start_date: date | None = None
    end_date: date | None = None

    def __post_init__(self):
        if (
            self.start_date is not None
            and self.end_date is not None
            and self.start_date > self.end_date
        ):
            raise SchemaViolation(
                "inverted_window", f"{self.agreement_id}: {self.start_date} > {self.end_date}"
            )

    @property
    def is_dated(self) -> bool:
        return self.start_date is not None and self.end_date is not None

    def covers(self, day: date) -> bool:
        """Inclusive validity check at both window ends."""
        return self.is_dated and self.start_date <= day <= self.end_date


@dataclass(frozen=True, slots=True)
class CrosswalkEntry:
    """Reconciled identifier pair: one open org ID to one proprietary ID."""

    open_id: str
    scheme: str
    proprietary_id: str
    support: int


@dataclass(frozen=True, slots=True)
class AttributionRecord:
    """An article credited to one or more agreements for a given role."""

    source: str
    native_id: str
    doi: str | None
    year: int
    role: str
    agreement_ids: tuple[str, ...]
    matched_institution: str

    def __post_init__(self):
        if not self.agreement_ids:
            raise SchemaViolation("empty_attribution", f"{self.source}/{self.native_id}")

    @property
    def ta_enabled(self) -> bool:
        return bool(self.agreement_ids)


@dataclass(frozen=True, slots=True)
class ClassifiedArticle:
    """An article with every classification flag the pipeline derives.

    `countable` articles are the denominator of all indicator shares:
    original, non-paratext, regular-issue articles in hybrid journals.
    OA status is only ever asserted on countable articles.
    """

    record: ArticleRecord
    year: int
    is_original: bool
    is_paratext: bool
    in_regular_issue: bool
    is_hybrid_oa: bool
    countable: bool
    journal_is_hybrid: bool
    publisher: str = ""


@dataclass(frozen=True, slots=True)
class IndicatorRow:
    """Aggregated counts and shares for one (year, source, role, group) cell."""

    year: int
    source: str
    role: str
    group_kind: str
    group_key: str
    n_total: int
    n_original: int
    n_oa: int
    n_ta_oa: int

    @property
    def oa_share(self) -> float | None:
        if self.n_original == 0:
            return None
        return self.n_oa / self.n_original

    @property
    def ta_share_of_oa(self) -> float | None:
        if self.n_oa == 0:
            return None
        return self.n_ta_oa / self.n_oa


@dataclass(frozen=True, slots=True)
class IntersectionSet:
    """One exclusive membership combination of the journal universe."""

    membership: frozenset[str]
    n_journals: int
    n_articles_shared: int
    n_articles_surplus_open: int


@dataclass(frozen=True, slots=True)
class CorrelationResult:
    """Spearman rank correlation over paired per-key metrics."""

    rho: float
    n: int
    filter_threshold: float = 0.0


@dataclass(frozen=True, slots=True)
class RolePolicy:
    """How a role run treats sources lacking that role's data: no fallback.

    A CORRESPONDING run over a source without corresponding-author
    metadata produces no attributions instead of substituting FIRST.
    """

    role: str
    fallback: str = "none"
