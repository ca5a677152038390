"""Article- and journal-level classification rules.

Covers hybrid-journal status, original-article filtering, paratext
detection, regular-issue detection, publication-year assignment, and
open access status. Everything here is a pure function of the record
plus static configuration, so classification can run data-parallel over
record streams.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from datetime import timedelta
from importlib import resources

from .errors import NoDate
from .model import ArticleRecord, ClassifiedArticle, Journal

log = logging.getLogger(__name__)

DOC_MODE_ALLOWLIST = "allowlist"
DOC_MODE_HEURISTIC = "heuristic"

DEFAULT_ALLOWLIST = ("article", "review")
DEFAULT_JOURNAL_ARTICLE_CLASSES = ("journal-article",)

# Non-original labels we recognize; anything else gets logged once as an
# unknown document class (and still treated as not original).
KNOWN_NOT_ORIGINAL = frozenset(
    {
        "editorial",
        "letter",
        "meeting abstract",
        "correction",
        "erratum",
        "book review",
        "news item",
        "note",
        "retraction",
        "proceedings paper",
        "biographical-item",
    }
)

DEFAULT_CC_LICENSE_PATTERN = r"creativecommons\.org/(?:licenses|publicdomain)/"
# Publisher "open archive" style user licenses, only consulted when a
# source emulates lenient hybrid-OA labelling.
DEFAULT_USER_LICENSE_PATTERN = r"(?:user-?license|open-?archive)"

# After a paratext pattern, titles may carry issue/volume designations.
_SUFFIX_TOKEN = (
    r"(?:issue|iss|volume|vol|number|no|part|pages?|pp|toc"
    r"|[0-9]+(?:[-–/][0-9]+)?|[ivxlcdm]+)\.?"
)
_SUFFIX = rf"(?:[\s\-–—:,.;()]+{_SUFFIX_TOKEN})*[\s\-–—:,.;()]*"


def load_paratext_patterns(path: str | None = None) -> tuple[re.Pattern, ...]:
    """Compile the paratext pattern file (default: the packaged one).

    Each non-comment line is a regex fragment matched against the whole
    normalized title, with optional trailing issue/volume designations.
    """
    if path is None:
        text = (
            resources.files("hybridoa").joinpath("data/paratext_patterns.txt").read_text("utf-8")
        )
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    patterns = []
    for line in text.splitlines():
        fragment = line.split("#", 1)[0].strip()
        if not fragment:
            continue
        patterns.append(re.compile(rf"^(?:{fragment}){_SUFFIX}$", re.IGNORECASE))
    return tuple(patterns)


@dataclass(frozen=True)
class SourcePolicy:
    """Per-source rule for deciding whether a record is an original article.

    Allowlist mode trusts the source's document types; heuristic mode (for
    open metadata with thin typing) additionally requires a non-paratext
    title and a regular-issue position.
    """

    mode: str = DOC_MODE_ALLOWLIST
    allowlist: frozenset[str] = frozenset(DEFAULT_ALLOWLIST)
    journal_article_classes: frozenset[str] = frozenset(DEFAULT_JOURNAL_ARTICLE_CLASSES)


@dataclass(frozen=True)
class ClassifierConfig:
    """Static configuration shared by all classification calls."""

    policies: dict[str, SourcePolicy]
    paratext_patterns: tuple[re.Pattern, ...]
    cc_license_re: re.Pattern = field(
        default_factory=lambda: re.compile(DEFAULT_CC_LICENSE_PATTERN, re.IGNORECASE)
    )
    user_license_re: re.Pattern = field(
        default_factory=lambda: re.compile(DEFAULT_USER_LICENSE_PATTERN, re.IGNORECASE)
    )
    license_grace_days: int = 31
    # Sources that label delayed / user-license content as hybrid OA.
    lenient_oa_sources: frozenset[str] = frozenset()


def is_hybrid_journal(journal: Journal, fully_oa_set: set[str]) -> bool:
    """A journal is hybrid when its ISSN-L is on no fully-OA list."""
    return journal.issn_l not in fully_oa_set


def assign_year(record: ArticleRecord) -> int:
    """Publication year: the year of the earliest known date."""
    if record.pub_date is None:
        raise NoDate(f"{record.source}/{record.native_id}")
    return record.pub_date.year


def detect_paratext(title: str, patterns: tuple[re.Pattern, ...]) -> bool:
    """True when the whole normalized title matches a paratext pattern."""
    normalized = " ".join(title.split())
    if not normalized:
        return False
    return any(p.match(normalized) for p in patterns)


def in_regular_issue(record: ArticleRecord) -> bool:
    """Numerical pagination, or an all-digit article number when unpaginated.

    Alphabetic page prefixes (S12, e103) signal supplements or special
    content; electronic article numbers count as numerical pagination.
    """
    if record.pagination:
        first = re.split(r"[\s,;\-–]+", record.pagination.strip())
        token = next((t for t in first if t), "")
        return bool(token) and token[0].isdigit()
    if record.article_number:
        return record.article_number.strip().isdigit()
    return False


_warned_classes: set[tuple[str, str]] = set()


def is_original(
    record: ArticleRecord,
    policy: SourcePolicy,
    *,
    paratext: bool | None = None,
    regular_issue: bool | None = None,
    patterns: tuple[re.Pattern, ...] = (),
) -> bool:
    """Decide original-article status under the source's policy."""
    doc_class = record.document_class.strip().casefold()
    if policy.mode == DOC_MODE_HEURISTIC:
        if doc_class not in policy.journal_article_classes:
            return False
        if paratext is None:
            paratext = detect_paratext(record.title, patterns)
        if regular_issue is None:
            regular_issue = in_regular_issue(record)
        return not paratext and regular_issue
    if doc_class in policy.allowlist:
        return True
    if doc_class not in KNOWN_NOT_ORIGINAL:
        key = (record.source, doc_class)
        if key not in _warned_classes:
            _warned_classes.add(key)
            log.warning("unknown document class %r in source %s", record.document_class, record.source)
    return False


def oa_status(record: ArticleRecord, cfg: ClassifierConfig) -> bool:
    """Open access under a Creative Commons license on the version of record.

    A license statement qualifies when it applies to the VOR, its URL
    matches the CC pattern, and its start date (when present) is at most
    `license_grace_days` after publication. Bronze (publisher-specific
    license) and delayed (late start) content counts as closed.

    Sources listed in `lenient_oa_sources` emulate the divergent
    labelling some databases apply: user-license URLs also qualify and
    the start-date bound is waived.
    """
    lenient = record.source in cfg.lenient_oa_sources
    deadline = None
    if record.pub_date is not None:
        deadline = record.pub_date + timedelta(days=cfg.license_grace_days)
    for lic in record.licenses:
        if not lic.applies_to_vor:
            continue
        is_cc = bool(cfg.cc_license_re.search(lic.url))
        if lenient:
            if is_cc or cfg.user_license_re.search(lic.url):
                return True
            continue
        if not is_cc:
            continue
        if lic.start_date is not None and (deadline is None or lic.start_date > deadline):
            continue
        return True
    return False


def classify_article(
    record: ArticleRecord,
    journal: Journal | None,
    cfg: ClassifierConfig,
) -> ClassifiedArticle:
    """Derive every classification flag for one record.

    `journal` is None when the record's ISSN-L is not in the loaded
    journal table; such records are never countable.
    """
    year = assign_year(record)
    paratext = detect_paratext(record.title, cfg.paratext_patterns)
    regular = in_regular_issue(record)
    policy = cfg.policies[record.source]
    original = is_original(record, policy, paratext=paratext, regular_issue=regular)
    hybrid = journal is not None and journal.is_hybrid
    countable = original and not paratext and regular and hybrid
    hybrid_oa = countable and oa_status(record, cfg)
    return ClassifiedArticle(
        record=record,
        year=year,
        is_original=original,
        is_paratext=paratext,
        in_regular_issue=regular,
        is_hybrid_oa=hybrid_oa,
        countable=countable,
        journal_is_hybrid=hybrid,
        publisher=journal.publisher if journal is not None else "",
    )


def build_journals(
    publisher_votes: dict[str, dict],
    variants: dict[str, set[str]],
    fully_oa_set: set[str],
) -> dict[str, Journal]:
    """Assemble the journal table from agreement-dump facts.

    Publisher per journal is the most frequent label across dump rows
    (lexicographic tie-break); hybrid status is the absence of the
    journal's ISSN-L from every fully-OA list.
    """
    journals: dict[str, Journal] = {}
    for issn_l, votes in publisher_votes.items():
        top = max(votes.values())
        publisher = min(k for k, v in votes.items() if v == top)
        journals[issn_l] = Journal(
            issn_l=issn_l,
            issn_variants=frozenset(variants.get(issn_l, ())),
            publisher=publisher,
            is_hybrid=issn_l not in fully_oa_set,
        )
    return journals
