"""Stage orchestration: ingest -> classify -> reconcile -> attribute ->
aggregate -> compare.

Each stage reads the previous stage's artifacts, writes its own plus a
run manifest, and never mutates inputs. Classification and attribution
apply their pure per-record functions over chunked record streams, so a
worker pool changes wall time but never output bytes.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import pickle
import re
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Iterator

from . import analytics, artifacts, attribute, classify, ingest, reconcile
from .artifacts import Layout
from .config import PipelineConfig
from .errors import DependencyError, InsufficientPairs, UnknownDoi
from .identifiers import normalize_doi, org_value
from .model import (
    ClassifiedArticle,
    GROUP_COUNTRY,
    GROUP_GLOBAL,
    GROUP_PUBLISHER,
    IndicatorRow,
    Journal,
    ROLE_FIRST,
)

log = logging.getLogger(__name__)

CHUNK_LINES = 2000


def run(config: PipelineConfig, stages: Iterable[str] | None = None) -> list[str]:
    """Run the requested stages in dependency order; returns what ran."""
    wanted = set(stages) if stages else set(artifacts.STAGES)
    unknown = wanted - set(artifacts.STAGES)
    if unknown:
        raise DependencyError(f"unknown stage(s): {', '.join(sorted(unknown))}")
    executed = []
    for stage in artifacts.STAGES:
        if stage not in wanted:
            continue
        log.info("stage %s", stage)
        STAGE_FUNCTIONS[stage](config)
        executed.append(stage)
    return executed


def _require(paths: Iterable[str], stage: str) -> None:
    missing = [p for p in paths if not os.path.exists(p)]
    if missing:
        raise DependencyError(
            f"stage {stage!r} needs artifacts that do not exist: {', '.join(missing)}"
        )


# --- chunked worker execution ----------------------------------------------

_WORKER_CTX = None


def _init_worker(ctx_bytes: bytes) -> None:
    global _WORKER_CTX
    _WORKER_CTX = pickle.loads(ctx_bytes)


def _map_chunks(
    fn: Callable,
    chunks: Iterable,
    ctx,
    workers: int,
) -> Iterator:
    """Order-preserving chunk map with a bounded number of in-flight tasks.

    workers <= 1 runs inline; more workers fan out to processes. Either
    path applies the same function in the same order, so results are
    worker-count-invariant.
    """
    global _WORKER_CTX
    if workers <= 1:
        _WORKER_CTX = ctx
        for chunk in chunks:
            yield fn(chunk)
        return
    ctx_bytes = pickle.dumps(ctx)
    with ProcessPoolExecutor(
        max_workers=workers, initializer=_init_worker, initargs=(ctx_bytes,)
    ) as pool:
        pending = []
        iterator = iter(chunks)
        for chunk in iterator:
            pending.append(pool.submit(fn, chunk))
            if len(pending) >= workers * 2:
                yield pending.pop(0).result()
        for future in pending:
            yield future.result()


def _chunked_lines(path: str, size: int = CHUNK_LINES) -> Iterator[list[str]]:
    chunk: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            chunk.append(line)
            if len(chunk) >= size:
                yield chunk
                chunk = []
    if chunk:
        yield chunk


def _effective_workers(config: PipelineConfig) -> int:
    if config.workers is not None:
        return max(1, int(config.workers))
    return os.cpu_count() or 1


# --- ingest ------------------------------------------------------------------

def run_ingest(config: PipelineConfig) -> None:
    """Parse all inputs into normalized artifacts with reject sidecars."""
    layout = Layout(config.out_dir)
    counters: dict = {}
    inputs: list[dict] = []
    outputs: list[str] = []

    with ingest.RejectLog(layout.reject_log("issn_links")) as rej:
        links = ingest.load_issn_link_table(config.issn_links, rej)
        counters["issn_links_rejects"] = rej.count
    inputs.append(artifacts.describe_input(config.issn_links))
    counters["issn_links"] = len(links)

    with ingest.RejectLog(layout.reject_log("fully_oa")) as rej:
        fully_oa = ingest.load_fully_oa_lists(config.fully_oa_lists, links, rej)
        counters["fully_oa_rejects"] = rej.count
    inputs.extend(artifacts.describe_input(p) for p in config.fully_oa_lists)
    counters["fully_oa_journals"] = len(fully_oa)

    aliases = None
    if config.publisher_aliases:
        with ingest.RejectLog(layout.reject_log("publisher_aliases")) as rej:
            aliases = ingest.load_publisher_aliases(config.publisher_aliases, rej)
        inputs.append(artifacts.describe_input(config.publisher_aliases))

    with ingest.RejectLog(layout.reject_log("agreement_dump")) as rej:
        dump = ingest.load_agreement_dump(config.agreement_dump, links, aliases, rej)
        counters["agreement_dump_rejects"] = rej.count
    inputs.append(artifacts.describe_input(config.agreement_dump))

    with ingest.RejectLog(layout.reject_log("durations")) as rej:
        agreements = ingest.load_durations(config.durations, dump.agreements, rej)
        counters["durations_rejects"] = rej.count
    inputs.append(artifacts.describe_input(config.durations))
    counters["agreements_undated"] = len(dump.agreements)
    counters["agreements"] = len(agreements)

    journals = classify.build_journals(dump.publisher_votes, dump.variants, fully_oa)
    counters["journals"] = len(journals)

    with ingest.RejectLog(layout.reject_log("institutions")) as rej:
        institutions = ingest.load_institutions(config.institutions, rej)
        counters["institutions_rejects"] = rej.count
    inputs.append(artifacts.describe_input(config.institutions))
    counters["institutions"] = len(institutions)

    artifacts.write_agreements(layout.agreements, agreements)
    outputs.append(layout.agreements)
    artifacts.write_csv(
        layout.journals,
        ("issn_l", "publisher", "is_hybrid", "issn_variants"),
        [
            (j.issn_l, j.publisher, str(j.is_hybrid).lower(), "|".join(sorted(j.issn_variants)))
            for j in sorted(journals.values(), key=lambda j: j.issn_l)
        ],
    )
    outputs.append(layout.journals)
    artifacts.write_institutions(layout.institutions, institutions)
    outputs.append(layout.institutions)

    for source in config.sources:
        path = layout.articles(source.label)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        with ingest.RejectLog(layout.reject_log(f"articles_{source.label}")) as rej:
            stream, manifest = ingest.load_article_stream(
                source.articles, source.label, links, rej
            )
            with open(path, "w", encoding="utf-8", newline="") as fh:
                for record in stream:
                    fh.write(artifacts.dump_canonical(artifacts.record_to_dict(record)))
                    fh.write("\n")
        inputs.append(artifacts.describe_input(source.articles, rows=manifest.total_lines))
        outputs.append(path)
        counters[f"records_{source.label}"] = manifest.record_count
        counters[f"rejects_{source.label}"] = manifest.reject_count

    artifacts.write_manifest(layout, "ingest", config.digest(), inputs, outputs, counters)


# --- classify ----------------------------------------------------------------

def _load_journal_table(layout: Layout) -> dict[str, Journal]:
    journals: dict[str, Journal] = {}
    with open(layout.journals, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            journals[row["issn_l"]] = Journal(
                issn_l=row["issn_l"],
                issn_variants=frozenset(v for v in row["issn_variants"].split("|") if v),
                publisher=row["publisher"],
                is_hybrid=row["is_hybrid"] == "true",
            )
    return journals


def _classifier_config(config: PipelineConfig) -> classify.ClassifierConfig:
    policies = {
        s.label: classify.SourcePolicy(
            mode=s.doc_class_mode,
            allowlist=frozenset(c.casefold() for c in s.doc_class_allowlist),
            journal_article_classes=frozenset(
                c.casefold() for c in s.journal_article_classes
            ),
        )
        for s in config.sources
    }
    return classify.ClassifierConfig(
        policies=policies,
        paratext_patterns=classify.load_paratext_patterns(config.paratext_patterns),
        cc_license_re=re.compile(config.cc_license_pattern, re.IGNORECASE),
        user_license_re=re.compile(config.user_license_pattern, re.IGNORECASE),
        license_grace_days=config.license_grace_days,
        lenient_oa_sources=frozenset(s.label for s in config.sources if s.lenient_oa),
    )


def _classify_chunk(item: tuple[str, list[str]]) -> list[str]:
    source, lines = item
    cfg, journals = _WORKER_CTX
    out = []
    for line in lines:
        record = artifacts.record_from_dict(json.loads(line), source)
        journal = journals.get(record.journal_issn_l)
        out.append(artifacts.classified_to_line(classify.classify_article(record, journal, cfg)))
    return out


def run_classify(config: PipelineConfig) -> None:
    """Apply all classification rules to every ingested record."""
    layout = Layout(config.out_dir)
    needed = [layout.journals] + [layout.articles(s.label) for s in config.sources]
    _require(needed, "classify")
    journals = _load_journal_table(layout)
    cfg = _classifier_config(config)
    workers = _effective_workers(config)
    counters: dict = {}
    inputs = [artifacts.describe_input(p) for p in needed]
    outputs: list[str] = []

    for source in config.sources:
        in_path = layout.articles(source.label)
        out_path = layout.classified(source.label)
        os.makedirs(os.path.dirname(out_path), exist_ok=True)
        rows = 0
        chunks = ((source.label, chunk) for chunk in _chunked_lines(in_path))
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            for result in _map_chunks(_classify_chunk, chunks, (cfg, journals), workers):
                for line in result:
                    fh.write(line)
                    fh.write("\n")
                    rows += 1
        counters[f"classified_{source.label}"] = rows
        outputs.append(out_path)

    artifacts.write_manifest(layout, "classify", config.digest(), inputs, outputs, counters)


# --- reconcile ----------------------------------------------------------------

def run_reconcile(config: PipelineConfig) -> None:
    """Build the open/proprietary crosswalk by DOI bridging, plus an audit sample."""
    layout = Layout(config.out_dir)
    open_label = config.open_source
    needed = [layout.classified(s.label) for s in config.sources]
    _require(needed, "reconcile")
    counters: dict = {}

    open_records = [
        c.record for c in artifacts.iter_classified(layout.classified(open_label), open_label)
    ]
    shards = []
    examples: dict = {}
    for source in config.sources:
        if source.label == open_label:
            continue
        prop_records = (
            c.record
            for c in artifacts.iter_classified(layout.classified(source.label), source.label)
        )
        bridge = reconcile.build_bridge(open_records, prop_records)
        counters[f"bridged_{source.label}"] = len(bridge)
        tallies, pair_examples = reconcile.tally_pairs(bridge)
        shards.append(tallies)
        examples.update(pair_examples)

    merged = reconcile.merge_tallies(shards)
    crosswalk = reconcile.select_crosswalk(merged, config.min_support)
    counters["pairs"] = len(merged)
    counters["crosswalk_entries"] = len(crosswalk)
    artifacts.write_crosswalk(layout.crosswalk, crosswalk)

    k = min(config.audit_sample_size, len(crosswalk))
    sample = reconcile.audit_sample(crosswalk, k, config.seed)
    artifacts.write_csv(
        layout.audit,
        ("open_id", "scheme", "proprietary_id", "support", "example_dois"),
        [
            (
                org_value(e.open_id),
                e.scheme,
                org_value(e.proprietary_id),
                e.support,
                "|".join(examples.get((e.open_id, e.proprietary_id), ())),
            )
            for e in sample
        ],
    )

    artifacts.write_manifest(
        layout,
        "reconcile",
        config.digest(),
        [artifacts.describe_input(p) for p in needed],
        [layout.crosswalk, layout.audit],
        counters,
    )


# --- attribute ----------------------------------------------------------------

def _attribute_chunk(item: tuple[str, str, list[str]]) -> list[tuple]:
    source, role, lines = item
    journal_agreements, crosswalk_inverse, inst_index = _WORKER_CTX
    rows = []
    for line in lines:
        article = artifacts.classified_from_line(line, source)
        if not article.countable or not article.is_hybrid_oa:
            continue
        if attribute.role_author(article, role) is None:
            continue
        record = attribute.match_agreements(
            article, role, journal_agreements, crosswalk_inverse, inst_index
        )
        rows.append(
            (
                source,
                article.record.native_id,
                article.record.doi or "",
                article.year,
                role,
                "true" if record is not None else "false",
                "|".join(record.agreement_ids) if record is not None else "",
                record.matched_institution if record is not None else "",
            )
        )
    return rows


def run_attribute(config: PipelineConfig) -> None:
    """Evaluate every eligible OA article against the agreement registry."""
    layout = Layout(config.out_dir)
    needed = [layout.agreements, layout.institutions, layout.crosswalk]
    needed += [layout.classified(s.label) for s in config.sources]
    _require(needed, "attribute")

    agreements = artifacts.read_agreements(layout.agreements)
    journal_agreements = attribute.agreements_by_journal(agreements)
    crosswalk_inverse = reconcile.invert_crosswalk(artifacts.read_crosswalk(layout.crosswalk))
    inst_index = ingest.institution_index(artifacts.read_institutions(layout.institutions))
    ctx = (journal_agreements, crosswalk_inverse, inst_index)
    workers = _effective_workers(config)
    counters: dict = {}
    outputs = []

    for role in config.roles:
        rows: list[tuple] = []
        for source in config.sources:
            chunks = (
                (source.label, role, chunk)
                for chunk in _chunked_lines(layout.classified(source.label))
            )
            for result in _map_chunks(_attribute_chunk, chunks, ctx, workers):
                rows.extend(result)
        rows.sort(key=lambda r: (r[0], r[1]))
        path = layout.attributions(role)
        artifacts.write_csv(
            path,
            (
                "source",
                "native_id",
                "doi",
                "year",
                "role",
                "ta_enabled",
                "agreement_ids",
                "matched_institution",
            ),
            rows,
        )
        outputs.append(path)
        counters[f"evaluated_{role}"] = len(rows)
        counters[f"ta_enabled_{role}"] = sum(1 for r in rows if r[5] == "true")

    artifacts.write_manifest(
        layout,
        "attribute",
        config.digest(),
        [artifacts.describe_input(p) for p in needed],
        outputs,
        counters,
    )


# --- aggregate ----------------------------------------------------------------

def _load_ta_keys(layout: Layout, role: str) -> set[tuple[str, str]]:
    keys: set[tuple[str, str]] = set()
    with open(layout.attributions(role), encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            if row["ta_enabled"] == "true":
                keys.add((row["source"], row["native_id"]))
    return keys


def _source_has_role(layout: Layout, source: str, role: str) -> bool:
    if role == ROLE_FIRST:
        return True
    for article in artifacts.iter_classified(layout.classified(source), source):
        if article.record.has_corresponding_data():
            return True
    return False


def run_aggregate(config: PipelineConfig) -> None:
    """Turn classified and attributed articles into indicator tables."""
    layout = Layout(config.out_dir)
    needed = [layout.classified(s.label) for s in config.sources]
    needed += [layout.attributions(role) for role in config.roles]
    _require(needed, "aggregate")
    counters: dict = {}

    rows: list[IndicatorRow] = []
    for role in config.roles:
        ta_keys = _load_ta_keys(layout, role)
        for source in config.sources:
            if not _source_has_role(layout, source.label, role):
                counters[f"skipped_{source.label}_{role}"] = 1
                continue
            for kind in (GROUP_GLOBAL, GROUP_PUBLISHER, GROUP_COUNTRY):
                stream = (
                    (article, (source.label, article.record.native_id) in ta_keys)
                    for article in artifacts.iter_classified(
                        layout.classified(source.label), source.label
                    )
                )
                rows.extend(analytics.aggregate(stream, kind, role, config.years))

    rows.sort(key=lambda r: (r.role, r.group_kind, r.source, r.year, r.group_key))
    artifacts.write_csv(
        layout.indicators,
        (
            "year",
            "source",
            "role",
            "group_kind",
            "group_key",
            "n_total",
            "n_original",
            "n_oa",
            "n_ta_oa",
            "oa_share",
            "ta_share_of_oa",
        ),
        [
            (
                r.year,
                r.source,
                r.role,
                r.group_kind,
                r.group_key,
                r.n_total,
                r.n_original,
                r.n_oa,
                r.n_ta_oa,
                artifacts.format_share(r.oa_share),
                artifacts.format_share(r.ta_share_of_oa),
            )
            for r in rows
        ],
    )
    counters["indicator_rows"] = len(rows)

    corpora = {
        s.label: artifacts.iter_classified(layout.classified(s.label), s.label)
        for s in config.sources
    }
    coverage = analytics.coverage_summary(corpora, config.years)
    artifacts.write_csv(layout.coverage, ("source", "measure", "value"), coverage)

    artifacts.write_manifest(
        layout,
        "aggregate",
        config.digest(),
        [artifacts.describe_input(p) for p in needed],
        [layout.indicators, layout.coverage],
        counters,
    )


# --- compare ------------------------------------------------------------------

def _read_indicators(layout: Layout) -> list[IndicatorRow]:
    rows = []
    with open(layout.indicators, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append(
                IndicatorRow(
                    year=int(row["year"]),
                    source=row["source"],
                    role=row["role"],
                    group_kind=row["group_kind"],
                    group_key=row["group_key"],
                    n_total=int(row["n_total"]),
                    n_original=int(row["n_original"]),
                    n_oa=int(row["n_oa"]),
                    n_ta_oa=int(row["n_ta_oa"]),
                )
            )
    return rows


def _country_metrics(rows: list[IndicatorRow]) -> dict[tuple[str, str], dict[str, dict[str, float]]]:
    """(source, role) -> metric name -> country -> value over the window."""
    sums: dict = defaultdict(lambda: defaultdict(lambda: [0, 0, 0]))
    for r in rows:
        if r.group_kind != GROUP_COUNTRY:
            continue
        cell = sums[(r.source, r.role)][r.group_key]
        cell[0] += r.n_original
        cell[1] += r.n_oa
        cell[2] += r.n_ta_oa
    out: dict = {}
    for combo, by_country in sums.items():
        metrics: dict[str, dict[str, float]] = {
            "article_volume": {},
            "oa_share": {},
            "ta_oa_volume": {},
            "ta_oa_share": {},
        }
        for country, (orig, oa, ta) in by_country.items():
            metrics["article_volume"][country] = float(orig)
            metrics["ta_oa_volume"][country] = float(ta)
            if orig > 0:
                metrics["oa_share"][country] = oa / orig
            if oa > 0:
                metrics["ta_oa_share"][country] = ta / oa
        out[combo] = metrics
    return out


# Which count metric gates each correlated metric.
_METRIC_FILTERS = {
    "article_volume": ("article_volume", "correlation_min_articles"),
    "oa_share": ("article_volume", "correlation_min_articles"),
    "ta_oa_volume": ("ta_oa_volume", "correlation_min_ta_oa"),
    "ta_oa_share": ("ta_oa_volume", "correlation_min_ta_oa"),
}


def run_compare(config: PipelineConfig) -> None:
    """Coverage intersections, per-figure plot series, and rank correlations."""
    layout = Layout(config.out_dir)
    needed = [layout.classified(s.label) for s in config.sources] + [layout.indicators]
    _require(needed, "compare")
    open_label = config.open_source
    counters: dict = {}

    corpora = {
        s.label: list(artifacts.iter_classified(layout.classified(s.label), s.label))
        for s in config.sources
    }
    universe = analytics.journal_universe(corpora, config.years)
    doi_sets = analytics.journal_doi_sets(corpora, config.years)
    sets = analytics.upset_sets(universe, doi_sets, open_label)
    counters["universe_journals"] = len(universe)

    def membership_key(membership: frozenset[str]) -> str:
        return "|".join(sorted(membership))

    artifacts.write_csv(
        layout.intersections,
        ("membership", "n_journals", "n_articles_shared", "n_articles_surplus_open"),
        [
            (membership_key(s.membership), s.n_journals, s.n_articles_shared, s.n_articles_surplus_open)
            for s in sets
        ],
    )

    publishers = {}
    for source_label, articles in corpora.items():
        for article in articles:
            publishers.setdefault(article.record.journal_issn_l, article.publisher)
    per_journal = []
    by_pub: dict = defaultdict(lambda: [0, 0])
    for issn_l in sorted(universe):
        membership = universe[issn_l]
        per_source = {s: doi_sets.get((s, issn_l), set()) for s in membership}
        shared = len(set.intersection(*per_source.values())) if per_source else 0
        publisher = publishers.get(issn_l, "")
        per_journal.append((membership_key(membership), issn_l, publisher, shared))
        cell = by_pub[(membership_key(membership), publisher)]
        cell[0] += 1
        cell[1] += shared
    artifacts.write_csv(
        layout.journal_volumes,
        ("membership", "issn_l", "publisher", "n_articles_shared"),
        per_journal,
    )
    artifacts.write_csv(
        layout.intersections_publisher,
        ("membership", "publisher", "n_journals", "n_articles_shared"),
        [
            (membership, publisher, cell[0], cell[1])
            for (membership, publisher), cell in sorted(by_pub.items())
        ],
    )

    indicator_rows = _read_indicators(layout)
    uptake_header = (
        "year",
        "source",
        "role",
        "n_original",
        "n_oa",
        "oa_share",
        "n_ta_oa",
        "ta_share_of_oa",
    )

    def uptake_row(r: IndicatorRow, extra: tuple = ()) -> tuple:
        return extra + (
            r.year,
            r.source,
            r.role,
            r.n_original,
            r.n_oa,
            artifacts.format_share(r.oa_share),
            r.n_ta_oa,
            artifacts.format_share(r.ta_share_of_oa),
        )

    artifacts.write_csv(
        layout.uptake_global,
        uptake_header,
        [uptake_row(r) for r in indicator_rows if r.group_kind == GROUP_GLOBAL],
    )
    artifacts.write_csv(
        layout.uptake_publisher,
        ("publisher",) + uptake_header,
        [
            uptake_row(r, (r.group_key,))
            for r in indicator_rows
            if r.group_kind == GROUP_PUBLISHER
        ],
    )

    metrics = _country_metrics(indicator_rows)
    base = metrics.get((open_label, ROLE_FIRST), {})
    correlation_rows = []
    scatter_rows = []
    for combo in sorted(metrics):
        if combo == (open_label, ROLE_FIRST) or not base:
            continue
        for metric in ("article_volume", "oa_share", "ta_oa_volume", "ta_oa_share"):
            x_all = base.get(metric, {})
            y_all = metrics[combo].get(metric, {})
            gate_metric, threshold_attr = _METRIC_FILTERS[metric]
            threshold = getattr(config, threshold_attr)
            x_gate = base.get(gate_metric, {})
            y_gate = metrics[combo].get(gate_metric, {})
            keys = sorted(
                k
                for k in x_all.keys() & y_all.keys()
                if x_gate.get(k, 0) >= threshold and y_gate.get(k, 0) >= threshold
            )
            scatter_rows.extend(
                (
                    metric,
                    k,
                    open_label,
                    ROLE_FIRST,
                    f"{x_all[k]:.6f}",
                    combo[0],
                    combo[1],
                    f"{y_all[k]:.6f}",
                )
                for k in keys
            )
            try:
                result = analytics.spearman(
                    {k: x_all[k] for k in keys}, {k: y_all[k] for k in keys}
                )
            except InsufficientPairs:
                continue
            correlation_rows.append(
                (
                    metric,
                    open_label,
                    ROLE_FIRST,
                    combo[0],
                    combo[1],
                    threshold,
                    result.n,
                    f"{result.rho:.6f}",
                )
            )
    artifacts.write_csv(
        layout.correlations,
        ("metric", "x_source", "x_role", "y_source", "y_role", "filter_threshold", "n", "rho"),
        correlation_rows,
    )
    artifacts.write_csv(
        layout.country_scatter,
        ("metric", "country", "x_source", "x_role", "x_value", "y_source", "y_role", "y_value"),
        scatter_rows,
    )
    counters["correlations"] = len(correlation_rows)

    artifacts.write_manifest(
        layout,
        "compare",
        config.digest(),
        [artifacts.describe_input(p) for p in needed],
        [
            layout.intersections,
            layout.intersections_publisher,
            layout.journal_volumes,
            layout.correlations,
            layout.uptake_global,
            layout.uptake_publisher,
            layout.country_scatter,
        ],
        counters,
    )


STAGE_FUNCTIONS = {
    "ingest": run_ingest,
    "classify": run_classify,
    "reconcile": run_reconcile,
    "attribute": run_attribute,
    "aggregate": run_aggregate,
    "compare": run_compare,
}


# --- explain ------------------------------------------------------------------

def explain_doi(config: PipelineConfig, raw_doi: str) -> str:
    """Human-readable attribution trace for one DOI across all sources."""
    layout = Layout(config.out_dir)
    needed = [layout.classified(s.label) for s in config.sources]
    needed += [layout.agreements, layout.institutions, layout.crosswalk]
    _require(needed, "explain")
    doi = normalize_doi(raw_doi)
    if doi is None:
        raise UnknownDoi(f"not a DOI: {raw_doi!r}")

    hits: list[ClassifiedArticle] = []
    for source in config.sources:
        for article in artifacts.iter_classified(layout.classified(source.label), source.label):
            if article.record.doi == doi:
                hits.append(article)
    if not hits:
        raise UnknownDoi(doi)

    agreements = artifacts.read_agreements(layout.agreements)
    journal_agreements = attribute.agreements_by_journal(agreements)
    crosswalk_inverse = reconcile.invert_crosswalk(artifacts.read_crosswalk(layout.crosswalk))
    inst_index = ingest.institution_index(artifacts.read_institutions(layout.institutions))
    cls_cfg = _classifier_config(config)

    lines = [f"DOI {doi}"]
    for article in hits:
        record = article.record
        lines.append(f"[{record.source}] native_id={record.native_id}")
        lines.append(
            f"  journal {record.journal_issn_l} ({article.publisher or 'unknown publisher'}),"
            f" hybrid={'yes' if article.journal_is_hybrid else 'no'}"
        )
        lines.append(
            f"  year={article.year} original={_yn(article.is_original)}"
            f" paratext={_yn(article.is_paratext)}"
            f" regular_issue={_yn(article.in_regular_issue)}"
            f" countable={_yn(article.countable)} hybrid_oa={_yn(article.is_hybrid_oa)}"
        )
        if record.licenses:
            lines.append("  licenses:")
            for lic in record.licenses:
                lines.append(f"    - {lic.url} {_license_verdict(lic, record, cls_cfg)}")
        else:
            lines.append("  licenses: none (closed)")
        if not article.countable or not article.is_hybrid_oa:
            lines.append("  not eligible for attribution (needs countable + hybrid OA)")
            continue
        for role in config.roles:
            author = attribute.role_author(article, role)
            if author is None:
                lines.append(f"  role {role}: no author data")
                continue
            orgs = attribute.resolve_org(author, crosswalk_inverse, inst_index)
            lines.append(
                f"  role {role}: orgs {sorted(author.org_ids)} -> resolved {sorted(orgs)}"
            )
            candidates = journal_agreements.get(record.journal_issn_l, ())
            if not candidates:
                lines.append("    no agreements cover this journal")
                continue
            matched = []
            for agreement in candidates:
                window_ok = agreement.covers(record.pub_date)
                hit = sorted(orgs & agreement.institution_ids)
                inst_ok = bool(hit)
                verdict = "MATCH" if window_ok and inst_ok else "no match"
                lines.append(
                    f"    - {agreement.agreement_id}: journal PASS;"
                    f" institutions {'PASS ' + hit[0] if inst_ok else 'FAIL'};"
                    f" window {agreement.start_date}..{agreement.end_date}"
                    f" {'PASS' if window_ok else 'FAIL'} -> {verdict}"
                )
                if window_ok and inst_ok:
                    matched.append(agreement.agreement_id)
            if matched:
                lines.append(f"    TA-enabled via {', '.join(matched)}")
            else:
                lines.append("    not TA-enabled")
    return "\n".join(lines)


def _yn(flag: bool) -> str:
    return "yes" if flag else "no"


def _license_verdict(lic, record, cfg) -> str:
    from datetime import timedelta

    bits = [f"vor={_yn(lic.applies_to_vor)}"]
    if lic.start_date is not None:
        bits.append(f"start={lic.start_date.isoformat()}")
    is_cc = bool(cfg.cc_license_re.search(lic.url))
    bits.append("cc=" + _yn(is_cc))
    if not lic.applies_to_vor:
        bits.append("-> FAIL (not version of record)")
    elif not is_cc:
        bits.append("-> FAIL (no CC license)")
    elif lic.start_date is not None and record.pub_date is not None and lic.start_date > (
        record.pub_date + timedelta(days=cfg.license_grace_days)
    ):
        bits.append("-> FAIL (starts after grace window: delayed OA)")
    else:
        bits.append("-> PASS")
    return " ".join(bits)
