"""Parsers for every external file format the engine consumes.

All loaders share the same error discipline: structural problems (missing
header columns, unreadable files) raise, data problems reject the
offending row into a sidecar log and never abort the run. Reject logs
carry line number, reason code, and the raw text so every dropped row is
auditable.

Article streams are generators with constant per-record memory. Exact
duplicate detection over (source, native_id) uses a disk-backed index so
peak resident memory stays independent of file length.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import sqlite3
import tempfile
from collections import Counter
from dataclasses import dataclass, field
from datetime import date
from typing import Iterable, Iterator

from .errors import ChecksumFailure, MalformedIssn, MissingColumn, SchemaViolation
from .identifiers import is_org_id, normalize_doi, validate_issn
from .model import (
    Agreement,
    ArticleRecord,
    Authorship,
    Institution,
    LicenseStatement,
    normalize_publisher,
    parse_date_pinned,
)

log = logging.getLogger(__name__)

# Reject reason codes written to sidecar logs.
REJECT_MALFORMED_ISSN = "malformed_issn"
REJECT_CHECKSUM = "checksum_failure"
REJECT_INVERTED_WINDOW = "inverted_window"
REJECT_CONFLICTING_LINK = "conflicting_link"
REJECT_SELF_ASSOCIATION = "self_association"
REJECT_SCHEMA = "schema_violation"
REJECT_DUPLICATE = "duplicate_record"
REJECT_BAD_DATE = "bad_date"


@dataclass
class CorpusManifest:
    """Reconciliation totals for one parsed input.

    record_count + reject_count always equals the number of countable
    input lines (header and blank lines excluded).
    """

    source: str
    paths: tuple[str, ...]
    record_count: int = 0
    reject_count: int = 0
    reject_log_path: str = ""

    @property
    def total_lines(self) -> int:
        return self.record_count + self.reject_count

    def as_dict(self) -> dict:
        return {
            "source": self.source,
            "paths": list(self.paths),
            "record_count": self.record_count,
            "reject_count": self.reject_count,
            "reject_log_path": self.reject_log_path,
        }


class RejectLog:
    """Sidecar writer for rejected rows: line number, reason, raw text."""

    def __init__(self, path: str | None):
        self.path = path
        self.count = 0
        self._fh = None
        if path:
            os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
            self._fh = open(path, "w", encoding="utf-8", newline="")
            self._writer = csv.writer(self._fh, lineterminator="\n")
            self._writer.writerow(["line", "reason", "raw"])

    def reject(self, lineno: int, reason: str, raw: str):
        self.count += 1
        if self._fh:
            self._writer.writerow([lineno, reason, raw.rstrip("\n")])
            self._fh.flush()

    def close(self):
        if self._fh:
            self._fh.close()
            self._fh = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class DedupeIndex:
    """Exact seen-key index backed by a temporary sqlite database.

    Grows on disk, not in RAM, so streaming ingestion keeps a flat memory
    profile no matter how many records pass through.
    """

    def __init__(self, directory: str | None = None):
        fd, self._path = tempfile.mkstemp(suffix=".dedupe.sqlite", dir=directory)
        os.close(fd)
        self._conn = sqlite3.connect(self._path)
        self._conn.execute("PRAGMA journal_mode=OFF")
        self._conn.execute("PRAGMA synchronous=OFF")
        self._conn.execute("CREATE TABLE seen (k TEXT PRIMARY KEY) WITHOUT ROWID")
        self._cur = self._conn.cursor()
        self._cur.execute("BEGIN")

    def add(self, key: str) -> bool:
        """Insert the key; True when it was not seen before."""
        self._cur.execute("INSERT OR IGNORE INTO seen VALUES (?)", (key,))
        return self._cur.rowcount == 1

    def close(self):
        if self._conn is not None:
            self._conn.commit()
            self._conn.close()
            self._conn = None
            os.unlink(self._path)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def resolve_issn_l(issn: str, links: dict[str, str]) -> str:
    """Map an ISSN variant to its linking ISSN; unlisted ISSNs self-link."""
    return links.get(issn, issn)


def _open_csv(path: str, required: tuple[str, ...]) -> tuple[io.TextIOWrapper, csv.DictReader]:
    fh = open(path, encoding="utf-8", newline="")
    reader = csv.DictReader(fh)
    if reader.fieldnames is None:
        fh.close()
        raise MissingColumn(f"{path}: empty file, header row required")
    missing = [c for c in required if c not in reader.fieldnames]
    if missing:
        fh.close()
        raise MissingColumn(f"{path}: missing column(s) {', '.join(missing)}")
    return fh, reader


def load_issn_link_table(path: str, rejects: RejectLog | None = None) -> dict[str, str]:
    """Load the ISSN -> ISSN-L link table.

    Identity entries are fine; a key mapped to two distinct values keeps
    the first mapping and rejects the later row as a conflicting link.
    """
    rejects = rejects or RejectLog(None)
    links: dict[str, str] = {}
    fh, reader = _open_csv(path, ("issn", "issn_l"))
    with fh:
        for row in reader:
            lineno = reader.line_num
            raw = f"{row.get('issn')},{row.get('issn_l')}"
            try:
                issn = validate_issn(row["issn"] or "")
                issn_l = validate_issn(row["issn_l"] or "")
            except MalformedIssn:
                rejects.reject(lineno, REJECT_MALFORMED_ISSN, raw)
                continue
            except ChecksumFailure:
                rejects.reject(lineno, REJECT_CHECKSUM, raw)
                continue
            if issn in links and links[issn] != issn_l:
                rejects.reject(lineno, REJECT_CONFLICTING_LINK, raw)
                continue
            links[issn] = issn_l
    return links


def load_fully_oa_lists(
    paths: Iterable[str],
    links: dict[str, str] | None = None,
    rejects: RejectLog | None = None,
) -> set[str]:
    """Union of fully-open-access journal lists, resolved to ISSN-L.

    Each file holds one ISSN per line; '#' starts a comment.
    """
    rejects = rejects or RejectLog(None)
    links = links or {}
    out: set[str] = set()
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                text = line.split("#", 1)[0].strip()
                if not text:
                    continue
                try:
                    issn = validate_issn(text)
                except MalformedIssn:
                    rejects.reject(lineno, REJECT_MALFORMED_ISSN, line)
                    continue
                except ChecksumFailure:
                    rejects.reject(lineno, REJECT_CHECKSUM, line)
                    continue
                out.add(resolve_issn_l(issn, links))
    return out


@dataclass
class AgreementDump:
    """Grouped agreement rows plus the journal/publisher facts they imply."""

    agreements: set[Agreement] = field(default_factory=set)
    # issn_l -> publisher label counts, used to pick each journal's publisher
    publisher_votes: dict[str, Counter] = field(default_factory=dict)
    # issn_l -> observed variant ISSNs
    variants: dict[str, set[str]] = field(default_factory=dict)


def load_agreement_dump(
    path: str,
    links: dict[str, str] | None = None,
    aliases: dict[str, str] | None = None,
    rejects: RejectLog | None = None,
) -> AgreementDump:
    """Parse the journal x institution x agreement dump.

    Rows sharing an agreement_id merge into one undated Agreement with the
    union of journals (resolved to ISSN-L) and institutions. Validity
    windows are attached later by `load_durations`.
    """
    rejects = rejects or RejectLog(None)
    links = links or {}
    journals: dict[str, set[str]] = {}
    orgs: dict[str, set[str]] = {}
    publishers: dict[str, Counter] = {}
    dump = AgreementDump()
    fh, reader = _open_csv(path, ("agreement_id", "issn", "org_id", "publisher"))
    with fh:
        for row in reader:
            lineno = reader.line_num
            raw = ",".join((row.get(c) or "") for c in ("agreement_id", "issn", "org_id", "publisher"))
            agreement_id = (row["agreement_id"] or "").strip()
            org = (row["org_id"] or "").strip()
            if not agreement_id or not org:
                rejects.reject(lineno, REJECT_SCHEMA, raw)
                continue
            if not is_org_id(org):
                rejects.reject(lineno, REJECT_SCHEMA, raw)
                continue
            try:
                issn = validate_issn(row["issn"] or "")
            except MalformedIssn:
                rejects.reject(lineno, REJECT_MALFORMED_ISSN, raw)
                continue
            except ChecksumFailure:
                rejects.reject(lineno, REJECT_CHECKSUM, raw)
                continue
            issn_l = resolve_issn_l(issn, links)
            publisher = normalize_publisher(row["publisher"] or "", aliases)
            journals.setdefault(agreement_id, set()).add(issn_l)
            orgs.setdefault(agreement_id, set()).add(org)
            publishers.setdefault(agreement_id, Counter())[publisher] += 1
            dump.publisher_votes.setdefault(issn_l, Counter())[publisher] += 1
            dump.variants.setdefault(issn_l, set()).add(issn)
    for agreement_id in journals:
        if not journals[agreement_id] or not orgs[agreement_id]:
            continue
        publisher = _majority_label(publishers[agreement_id])
        dump.agreements.add(
            Agreement(
                agreement_id=agreement_id,
                publisher=publisher,
                journal_issn_ls=frozenset(journals[agreement_id]),
                institution_ids=frozenset(orgs[agreement_id]),
            )
        )
    return dump


def _majority_label(votes: Counter) -> str:
    """Most frequent label; ties break to the lexicographically smallest."""
    top = max(votes.values())
    return min(k for k, v in votes.items() if v == top)


def load_durations(
    path: str,
    agreements: Iterable[Agreement],
    rejects: RejectLog | None = None,
) -> set[Agreement]:
    """Attach validity windows; agreements without a duration row are dropped.

    Rows with start after end are rejected as inverted windows.
    """
    rejects = rejects or RejectLog(None)
    windows: dict[str, tuple[date, date]] = {}
    fh, reader = _open_csv(path, ("agreement_id", "start_date", "end_date"))
    with fh:
        for row in reader:
            lineno = reader.line_num
            raw = ",".join((row.get(c) or "") for c in ("agreement_id", "start_date", "end_date"))
            agreement_id = (row["agreement_id"] or "").strip()
            try:
                start = parse_date_pinned(row["start_date"] or "")
                end = parse_date_pinned(row["end_date"] or "")
            except SchemaViolation:
                rejects.reject(lineno, REJECT_BAD_DATE, raw)
                continue
            if start > end:
                rejects.reject(lineno, REJECT_INVERTED_WINDOW, raw)
                continue
            windows[agreement_id] = (start, end)
    dated: set[Agreement] = set()
    for agreement in agreements:
        window = windows.get(agreement.agreement_id)
        if window is None:
            log.info("agreement %s has no duration row, dropped", agreement.agreement_id)
            continue
        dated.add(
            Agreement(
                agreement_id=agreement.agreement_id,
                publisher=agreement.publisher,
                journal_issn_ls=agreement.journal_issn_ls,
                institution_ids=agreement.institution_ids,
                start_date=window[0],
                end_date=window[1],
            )
        )
    return dated


def load_publisher_aliases(path: str, rejects: RejectLog | None = None) -> dict[str, str]:
    """Alias table mapping publisher labels (imprints) to canonical names.

    Keys are casefolded for lookup through `normalize_publisher`.
    """
    rejects = rejects or RejectLog(None)
    aliases: dict[str, str] = {}
    fh, reader = _open_csv(path, ("alias", "canonical"))
    with fh:
        for row in reader:
            alias = " ".join((row["alias"] or "").split()).casefold()
            canonical = " ".join((row["canonical"] or "").split())
            if not alias or not canonical:
                rejects.reject(reader.line_num, REJECT_SCHEMA, f"{row.get('alias')},{row.get('canonical')}")
                continue
            aliases[alias] = canonical
    return aliases


def load_institutions(path: str, rejects: RejectLog | None = None) -> set[Institution]:
    """Parse institutions with their associated organization IDs.

    The `associated_ids` column is pipe-separated. An organization listing
    itself as its own associate is rejected.
    """
    rejects = rejects or RejectLog(None)
    out: set[Institution] = set()
    fh, reader = _open_csv(path, ("org_id", "country", "associated_ids"))
    with fh:
        for row in reader:
            lineno = reader.line_num
            raw = ",".join((row.get(c) or "") for c in ("org_id", "country", "associated_ids"))
            org = (row["org_id"] or "").strip()
            if not is_org_id(org):
                rejects.reject(lineno, REJECT_SCHEMA, raw)
                continue
            associated = frozenset(
                a.strip() for a in (row["associated_ids"] or "").split("|") if a.strip()
            )
            if org in associated:
                rejects.reject(lineno, REJECT_SELF_ASSOCIATION, raw)
                continue
            out.add(
                Institution(
                    org_id=org,
                    country=(row["country"] or "").strip().upper(),
                    associated_ids=associated,
                )
            )
    return out


def institution_index(institutions: Iterable[Institution]) -> dict[str, str]:
    """Map every institution and associated ID to its parent institution."""
    index: dict[str, str] = {}
    for inst in sorted(institutions, key=lambda i: i.org_id):
        index[inst.org_id] = inst.org_id
        for assoc in inst.associated_ids:
            index.setdefault(assoc, inst.org_id)
    return index


def parse_article_line(
    text: str,
    source: str,
    links: dict[str, str] | None = None,
) -> ArticleRecord:
    """Parse one interchange line into an ArticleRecord.

    Raises SchemaViolation with a reason code on any deviation from the
    documented schema; callers turn that into a reject-log entry.
    """
    links = links or {}
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation("bad_json", str(exc)) from None
    if not isinstance(obj, dict):
        raise SchemaViolation("bad_json", "line is not an object")

    line_source = obj.get("source")
    if line_source != source:
        raise SchemaViolation("source_mismatch", f"{line_source!r} != {source!r}")
    native_id = obj.get("native_id")
    if not native_id or not isinstance(native_id, str):
        raise SchemaViolation("missing_field", "native_id")

    raw_issn = obj.get("issn")
    if not raw_issn:
        raise SchemaViolation("missing_field", "issn")
    try:
        issn = validate_issn(raw_issn)
    except MalformedIssn as exc:
        raise SchemaViolation(REJECT_MALFORMED_ISSN, str(exc)) from None
    except ChecksumFailure as exc:
        raise SchemaViolation(REJECT_CHECKSUM, str(exc)) from None

    raw_dates = obj.get("pub_date")
    if raw_dates is None or raw_dates == [] or raw_dates == "":
        raise SchemaViolation("missing_field", "pub_date")
    if isinstance(raw_dates, str):
        raw_dates = [raw_dates]
    if not isinstance(raw_dates, list):
        raise SchemaViolation("bad_date", repr(raw_dates))
    pub_date = min(parse_date_pinned(str(d)) for d in raw_dates)

    document_class = obj.get("document_class")
    if not document_class or not isinstance(document_class, str):
        raise SchemaViolation("missing_field", "document_class")

    licenses = []
    for lic in obj.get("licenses") or ():
        if not isinstance(lic, dict) or not lic.get("url"):
            raise SchemaViolation("bad_license", repr(lic))
        start = lic.get("start_date")
        licenses.append(
            LicenseStatement(
                url=str(lic["url"]),
                applies_to_vor=bool(lic.get("applies_to_vor", False)),
                start_date=parse_date_pinned(str(start)) if start else None,
            )
        )

    authors = []
    for author in obj.get("authors") or ():
        if not isinstance(author, dict):
            raise SchemaViolation("bad_author", repr(author))
        position = author.get("position")
        if not isinstance(position, int) or position < 1:
            raise SchemaViolation("bad_author", f"position {position!r}")
        org_ids = tuple(author.get("org_ids") or ())
        for org in org_ids:
            if not isinstance(org, str) or not is_org_id(org):
                raise SchemaViolation("bad_org_id", repr(org))
        corresponding = author.get("corresponding")
        if corresponding is not None and not isinstance(corresponding, bool):
            raise SchemaViolation("bad_author", f"corresponding {corresponding!r}")
        authors.append(
            Authorship(
                position=position,
                is_corresponding=corresponding,
                org_ids=frozenset(org_ids),
                countries=frozenset(
                    str(c).strip().upper() for c in (author.get("countries") or ()) if str(c).strip()
                ),
            )
        )
    authors.sort(key=lambda a: a.position)

    return ArticleRecord(
        source=source,
        native_id=native_id,
        journal_issn_l=resolve_issn_l(issn, links),
        pub_date=pub_date,
        document_class=document_class,
        doi=normalize_doi(obj.get("doi")),
        pagination=obj.get("pagination") or None,
        article_number=str(obj["article_number"]) if obj.get("article_number") else None,
        title=obj.get("title") or "",
        licenses=tuple(licenses),
        authors=tuple(authors),
    )


def load_article_stream(
    path: str,
    source: str,
    links: dict[str, str] | None = None,
    rejects: RejectLog | None = None,
    dedupe_dir: str | None = None,
) -> tuple[Iterator[ArticleRecord], CorpusManifest]:
    """Stream ArticleRecords from a newline-delimited interchange file.

    Malformed lines and duplicate (source, native_id) keys are rejected
    and the stream continues. Memory stays constant in file length; the
    returned manifest is complete once the iterator is exhausted.
    """
    rejects = rejects or RejectLog(None)
    manifest = CorpusManifest(
        source=source, paths=(path,), reject_log_path=rejects.path or ""
    )

    def generate() -> Iterator[ArticleRecord]:
        with open(path, encoding="utf-8") as fh, DedupeIndex(dedupe_dir) as seen:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    record = parse_article_line(line, source, links)
                except SchemaViolation as exc:
                    manifest.reject_count += 1
                    rejects.reject(lineno, exc.code, line)
                    continue
                if not seen.add(record.native_id):
                    manifest.reject_count += 1
                    rejects.reject(lineno, REJECT_DUPLICATE, line)
                    continue
                manifest.record_count += 1
                yield record

    return generate(), manifest
