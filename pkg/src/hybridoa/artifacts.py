"""Artifact layout, canonical serialization, and run manifests.

Every stage writes its outputs under a fixed directory layout plus a
machine-readable manifest (input digests, config digest, row counts).
Serialization is canonical: sorted keys, fixed float formats, "\n" line
endings. Reruns with identical inputs produce byte-identical artifacts
regardless of worker count.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from datetime import date
from typing import Iterable, Sequence

from .identifiers import ROR_SCHEME, make_org_id, org_value
from .model import (
    Agreement,
    ArticleRecord,
    Authorship,
    ClassifiedArticle,
    CrosswalkEntry,
    Institution,
    LicenseStatement,
)

STAGES = ("ingest", "classify", "reconcile", "attribute", "aggregate", "compare")


class Layout:
    """Paths of every artifact under one output directory."""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir

    def stage_dir(self, stage: str) -> str:
        return os.path.join(self.out_dir, stage)

    def manifest(self, stage: str) -> str:
        return os.path.join(self.out_dir, "manifests", f"{stage}.json")

    def reject_log(self, stem: str) -> str:
        return os.path.join(self.out_dir, "rejects", f"{stem}.csv")

    def articles(self, source: str) -> str:
        return os.path.join(self.out_dir, "ingest", f"articles_{source}.ndjson")

    @property
    def agreements(self) -> str:
        return os.path.join(self.out_dir, "ingest", "agreements.json")

    @property
    def journals(self) -> str:
        return os.path.join(self.out_dir, "ingest", "journals.csv")

    @property
    def institutions(self) -> str:
        return os.path.join(self.out_dir, "ingest", "institutions.csv")

    def classified(self, source: str) -> str:
        return os.path.join(self.out_dir, "classify", f"articles_{source}.ndjson")

    @property
    def crosswalk(self) -> str:
        return os.path.join(self.out_dir, "reconcile", "crosswalk.csv")

    @property
    def audit(self) -> str:
        return os.path.join(self.out_dir, "reconcile", "audit_sample.csv")

    def attributions(self, role: str) -> str:
        return os.path.join(self.out_dir, "attribute", f"attributions_{role}.csv")

    @property
    def indicators(self) -> str:
        return os.path.join(self.out_dir, "aggregate", "indicators.csv")

    @property
    def coverage(self) -> str:
        return os.path.join(self.out_dir, "aggregate", "coverage.csv")

    @property
    def intersections(self) -> str:
        return os.path.join(self.out_dir, "compare", "intersections.csv")

    @property
    def intersections_publisher(self) -> str:
        return os.path.join(self.out_dir, "compare", "intersections_publisher.csv")

    @property
    def journal_volumes(self) -> str:
        return os.path.join(self.out_dir, "compare", "journal_volumes.csv")

    @property
    def correlations(self) -> str:
        return os.path.join(self.out_dir, "compare", "correlations.csv")

    @property
    def uptake_global(self) -> str:
        return os.path.join(self.out_dir, "compare", "uptake_global.csv")

    @property
    def uptake_publisher(self) -> str:
        return os.path.join(self.out_dir, "compare", "uptake_publisher.csv")

    @property
    def country_scatter(self) -> str:
        return os.path.join(self.out_dir, "compare", "country_scatter.csv")


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def dump_canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def format_share(value: float | None) -> str:
    """Shares as ratios with 6 decimal places; undefined renders empty."""
    return "" if value is None else f"{value:.6f}"


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> int:
    os.makedirs(os.path.dirname(path), exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
            count += 1
    return count


def write_manifest(
    layout: Layout,
    stage: str,
    config_digest: str,
    inputs: list[dict],
    outputs: list[str],
    counters: dict,
) -> None:
    """Write the stage manifest; output paths are stored out_dir-relative."""
    described = []
    for path in outputs:
        entry = {
            "path": os.path.relpath(path, layout.out_dir),
            "sha256": sha256_file(path),
        }
        rows = _row_count(path)
        if rows is not None:
            entry["rows"] = rows
        described.append(entry)
    described.sort(key=lambda e: e["path"])
    # prior-stage inputs live under out_dir; store them relative so the
    # manifest bytes do not depend on where the output tree sits
    root = os.path.abspath(layout.out_dir) + os.sep
    for entry in inputs:
        if os.path.abspath(entry.get("path", "")).startswith(root):
            entry["path"] = os.path.relpath(entry["path"], layout.out_dir)
    payload = {
        "stage": stage,
        "config_digest": config_digest,
        "inputs": sorted(inputs, key=lambda e: e.get("path", "")),
        "outputs": described,
        "counters": dict(sorted(counters.items())),
    }
    path = layout.manifest(stage)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dump_canonical(payload))
        fh.write("\n")


def describe_input(path: str, rows: int | None = None) -> dict:
    entry = {"path": path, "sha256": sha256_file(path)}
    if rows is not None:
        entry["rows"] = rows
    return entry


def _row_count(path: str) -> int | None:
    """Data rows of a text artifact: lines minus the CSV header."""
    if not (path.endswith(".csv") or path.endswith(".ndjson") or path.endswith(".json")):
        return None
    with open(path, "rb") as fh:
        lines = sum(1 for _ in fh)
    return max(0, lines - 1) if path.endswith(".csv") else lines


def read_manifest(layout: Layout, stage: str) -> dict:
    with open(layout.manifest(stage), encoding="utf-8") as fh:
        return json.load(fh)


# --- article / classification serialization -------------------------------

def _iso(day: date | None) -> str | None:
    return None if day is None else day.isoformat()


def record_to_dict(record: ArticleRecord) -> dict:
    return {
        "source": record.source,
        "native_id": record.native_id,
        "issn": record.journal_issn_l,
        "pub_date": _iso(record.pub_date),
        "document_class": record.document_class,
        "doi": record.doi,
        "pagination": record.pagination,
        "article_number": record.article_number,
        "title": record.title,
        "licenses": [
            {
                "url": lic.url,
                "applies_to_vor": lic.applies_to_vor,
                "start_date": _iso(lic.start_date),
            }
            for lic in record.licenses
        ],
        "authors": [
            {
                "position": author.position,
                "corresponding": author.is_corresponding,
                "org_ids": sorted(author.org_ids),
                "countries": sorted(author.countries),
            }
            for author in record.authors
        ],
    }


def record_from_dict(obj: dict, source: str) -> ArticleRecord:
    """Trusted deserialization of an artifact line (no validation)."""
    return ArticleRecord(
        source=source,
        native_id=obj["native_id"],
        journal_issn_l=obj["issn"],
        pub_date=date.fromisoformat(obj["pub_date"]) if obj.get("pub_date") else None,
        document_class=obj["document_class"],
        doi=obj.get("doi"),
        pagination=obj.get("pagination"),
        article_number=obj.get("article_number"),
        title=obj.get("title") or "",
        licenses=tuple(
            LicenseStatement(
                url=lic["url"],
                applies_to_vor=lic["applies_to_vor"],
                start_date=date.fromisoformat(lic["start_date"]) if lic.get("start_date") else None,
            )
            for lic in obj.get("licenses") or ()
        ),
        authors=tuple(
            Authorship(
                position=author["position"],
                is_corresponding=author.get("corresponding"),
                org_ids=frozenset(author.get("org_ids") or ()),
                countries=frozenset(author.get("countries") or ()),
            )
            for author in obj.get("authors") or ()
        ),
    )


def classified_to_line(article: ClassifiedArticle) -> str:
    return dump_canonical(
        {
            "record": record_to_dict(article.record),
            "year": article.year,
            "is_original": article.is_original,
            "is_paratext": article.is_paratext,
            "in_regular_issue": article.in_regular_issue,
            "is_hybrid_oa": article.is_hybrid_oa,
            "countable": article.countable,
            "journal_is_hybrid": article.journal_is_hybrid,
            "publisher": article.publisher,
        }
    )


def classified_from_line(line: str, source: str) -> ClassifiedArticle:
    obj = json.loads(line)
    return ClassifiedArticle(
        record=record_from_dict(obj["record"], source),
        year=obj["year"],
        is_original=obj["is_original"],
        is_paratext=obj["is_paratext"],
        in_regular_issue=obj["in_regular_issue"],
        is_hybrid_oa=obj["is_hybrid_oa"],
        countable=obj["countable"],
        journal_is_hybrid=obj["journal_is_hybrid"],
        publisher=obj["publisher"],
    )


def iter_classified(path: str, source: str):
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield classified_from_line(line, source)


# --- tabular artifacts ------------------------------------------------------

def write_agreements(path: str, agreements: Iterable[Agreement]) -> None:
    os.makedirs(os.path.dirname(path), exist_ok=True)
    payload = [
        {
            "agreement_id": a.agreement_id,
            "publisher": a.publisher,
            "journal_issn_ls": sorted(a.journal_issn_ls),
            "institution_ids": sorted(a.institution_ids),
            "start_date": _iso(a.start_date),
            "end_date": _iso(a.end_date),
        }
        for a in sorted(agreements, key=lambda a: a.agreement_id)
    ]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for entry in payload:
            fh.write(dump_canonical(entry))
            fh.write("\n")


def read_agreements(path: str) -> list[Agreement]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            out.append(
                Agreement(
                    agreement_id=obj["agreement_id"],
                    publisher=obj["publisher"],
                    journal_issn_ls=frozenset(obj["journal_issn_ls"]),
                    institution_ids=frozenset(obj["institution_ids"]),
                    start_date=date.fromisoformat(obj["start_date"]) if obj["start_date"] else None,
                    end_date=date.fromisoformat(obj["end_date"]) if obj["end_date"] else None,
                )
            )
    return out


def write_institutions(path: str, institutions: Iterable[Institution]) -> None:
    rows = [
        (inst.org_id, inst.country, "|".join(sorted(inst.associated_ids)))
        for inst in sorted(institutions, key=lambda i: i.org_id)
    ]
    write_csv(path, ("org_id", "country", "associated_ids"), rows)


def read_institutions(path: str) -> list[Institution]:
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(
                Institution(
                    org_id=row["org_id"],
                    country=row["country"],
                    associated_ids=frozenset(
                        a for a in (row["associated_ids"] or "").split("|") if a
                    ),
                )
            )
    return out


def write_crosswalk(path: str, entries: Iterable[CrosswalkEntry]) -> None:
    rows = [
        (org_value(e.open_id), e.scheme, org_value(e.proprietary_id), e.support)
        for e in sorted(entries, key=lambda e: (e.scheme, e.open_id))
    ]
    write_csv(path, ("open_id", "scheme", "proprietary_id", "support"), rows)


def read_crosswalk(path: str) -> list[CrosswalkEntry]:
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(
                CrosswalkEntry(
                    open_id=make_org_id(ROR_SCHEME, row["open_id"]),
                    scheme=row["scheme"],
                    proprietary_id=make_org_id(row["scheme"], row["proprietary_id"]),
                    support=int(row["support"]),
                )
            )
    return out
