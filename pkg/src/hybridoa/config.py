"""Declarative pipeline configuration.

One JSON file describes sources, input paths, thresholds, and the output
directory; CLI flags may override the year window, roles, seed, worker
count, and output directory. Paths are resolved relative to the config
file so a fixture directory is self-contained.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, replace

from .classify import (
    DEFAULT_ALLOWLIST,
    DEFAULT_CC_LICENSE_PATTERN,
    DEFAULT_JOURNAL_ARTICLE_CLASSES,
    DEFAULT_USER_LICENSE_PATTERN,
    DOC_MODE_ALLOWLIST,
    DOC_MODE_HEURISTIC,
)
from .errors import ConfigError
from .model import ROLES


@dataclass(frozen=True)
class SourceConfig:
    """One metadata provider: its article file and identifier scheme."""

    label: str
    articles: str
    scheme: str
    open_baseline: bool = False
    doc_class_mode: str = DOC_MODE_ALLOWLIST
    doc_class_allowlist: tuple[str, ...] = DEFAULT_ALLOWLIST
    journal_article_classes: tuple[str, ...] = DEFAULT_JOURNAL_ARTICLE_CLASSES
    lenient_oa: bool = False


@dataclass(frozen=True)
class PipelineConfig:
    sources: tuple[SourceConfig, ...]
    agreement_dump: str
    durations: str
    issn_links: str
    institutions: str
    fully_oa_lists: tuple[str, ...] = ()
    publisher_aliases: str | None = None
    paratext_patterns: str | None = None
    cc_license_pattern: str = DEFAULT_CC_LICENSE_PATTERN
    user_license_pattern: str = DEFAULT_USER_LICENSE_PATTERN
    license_grace_days: int = 31
    years: tuple[int, int] = (2019, 2023)
    roles: tuple[str, ...] = ROLES
    min_support: int = 1
    correlation_min_articles: int = 10000
    correlation_min_ta_oa: int = 1000
    audit_sample_size: int = 50
    seed: int = 42
    workers: int | None = None
    out_dir: str = "out"

    @property
    def open_source(self) -> str:
        for source in self.sources:
            if source.open_baseline:
                return source.label
        raise ConfigError("no source is marked open_baseline")

    def source(self, label: str) -> SourceConfig:
        for source in self.sources:
            if source.label == label:
                return source
        raise ConfigError(f"unknown source {label!r}")

    def canonical_json(self) -> str:
        payload = {
            "sources": [
                {
                    "label": s.label,
                    "articles": s.articles,
                    "scheme": s.scheme,
                    "open_baseline": s.open_baseline,
                    "doc_class_mode": s.doc_class_mode,
                    "doc_class_allowlist": list(s.doc_class_allowlist),
                    "journal_article_classes": list(s.journal_article_classes),
                    "lenient_oa": s.lenient_oa,
                }
                for s in self.sources
            ],
            "agreement_dump": self.agreement_dump,
            "durations": self.durations,
            "issn_links": self.issn_links,
            "institutions": self.institutions,
            "fully_oa_lists": list(self.fully_oa_lists),
            "publisher_aliases": self.publisher_aliases,
            "paratext_patterns": self.paratext_patterns,
            "cc_license_pattern": self.cc_license_pattern,
            "user_license_pattern": self.user_license_pattern,
            "license_grace_days": self.license_grace_days,
            "years": list(self.years),
            "roles": list(self.roles),
            "min_support": self.min_support,
            "correlation_min_articles": self.correlation_min_articles,
            "correlation_min_ta_oa": self.correlation_min_ta_oa,
            "audit_sample_size": self.audit_sample_size,
            "seed": self.seed,
        }
        # workers and out_dir are execution details: they must not change
        # artifact bytes, so they stay out of the digest.
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()

    def validate(self) -> None:
        """Check structural consistency and that referenced inputs exist."""
        if not self.sources:
            raise ConfigError("at least one source required")
        labels = [s.label for s in self.sources]
        if len(set(labels)) != len(labels):
            raise ConfigError("source labels must be unique")
        if sum(1 for s in self.sources if s.open_baseline) != 1:
            raise ConfigError("exactly one source must be the open baseline")
        if self.years[0] > self.years[1]:
            raise ConfigError(f"empty year window {self.years}")
        for role in self.roles:
            if role not in ROLES:
                raise ConfigError(f"unknown role {role!r}")
        for source in self.sources:
            if source.doc_class_mode not in (DOC_MODE_ALLOWLIST, DOC_MODE_HEURISTIC):
                raise ConfigError(f"unknown doc_class_mode {source.doc_class_mode!r}")
        paths = [self.agreement_dump, self.durations, self.issn_links, self.institutions]
        paths.extend(self.fully_oa_lists)
        paths.extend(s.articles for s in self.sources)
        if self.publisher_aliases:
            paths.append(self.publisher_aliases)
        if self.paratext_patterns:
            paths.append(self.paratext_patterns)
        for path in paths:
            if not os.path.exists(path):
                raise ConfigError(f"input path does not exist: {path}")


def _resolve(base: str, path: str | None) -> str | None:
    if path is None:
        return None
    return path if os.path.isabs(path) else os.path.normpath(os.path.join(base, path))


def load_config(path: str) -> PipelineConfig:
    """Read a config file, resolving relative paths against its directory."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    base = os.path.dirname(os.path.abspath(path))
    try:
        sources = tuple(
            SourceConfig(
                label=s["label"],
                articles=_resolve(base, s["articles"]),
                scheme=s["scheme"],
                open_baseline=bool(s.get("open_baseline", False)),
                doc_class_mode=s.get("doc_class_mode", DOC_MODE_ALLOWLIST),
                doc_class_allowlist=tuple(s.get("doc_class_allowlist", DEFAULT_ALLOWLIST)),
                journal_article_classes=tuple(
                    s.get("journal_article_classes", DEFAULT_JOURNAL_ARTICLE_CLASSES)
                ),
                lenient_oa=bool(s.get("lenient_oa", False)),
            )
            for s in raw["sources"]
        )
        config = PipelineConfig(
            sources=sources,
            agreement_dump=_resolve(base, raw["agreement_dump"]),
            durations=_resolve(base, raw["durations"]),
            issn_links=_resolve(base, raw["issn_links"]),
            institutions=_resolve(base, raw["institutions"]),
            fully_oa_lists=tuple(_resolve(base, p) for p in raw.get("fully_oa_lists", ())),
            publisher_aliases=_resolve(base, raw.get("publisher_aliases")),
            paratext_patterns=_resolve(base, raw.get("paratext_patterns")),
            cc_license_pattern=raw.get("cc_license_pattern", DEFAULT_CC_LICENSE_PATTERN),
            user_license_pattern=raw.get("user_license_pattern", DEFAULT_USER_LICENSE_PATTERN),
            license_grace_days=int(raw.get("license_grace_days", 31)),
            years=tuple(raw.get("years", (2019, 2023))),
            roles=tuple(raw.get("roles", ROLES)),
            min_support=int(raw.get("min_support", 1)),
            correlation_min_articles=int(raw.get("correlation_min_articles", 10000)),
            correlation_min_ta_oa=int(raw.get("correlation_min_ta_oa", 1000)),
            audit_sample_size=int(raw.get("audit_sample_size", 50)),
            seed=int(raw.get("seed", 42)),
            workers=raw.get("workers"),
            out_dir=_resolve(base, raw.get("out_dir", "out")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad config {path}: {exc}") from exc
    return config


def apply_overrides(
    config: PipelineConfig,
    years: str | None = None,
    role: str | None = None,
    seed: int | None = None,
    workers: int | None = None,
    out_dir: str | None = None,
) -> PipelineConfig:
    """Apply CLI flag overrides on top of the loaded config."""
    updates = {}
    if years:
        try:
            lo, hi = years.split(":")
            updates["years"] = (int(lo), int(hi))
        except ValueError as exc:
            raise ConfigError(f"bad --years value {years!r}, expected LO:HI") from exc
    if role:
        updates["roles"] = (role,)
    if seed is not None:
        updates["seed"] = seed
    if workers is not None:
        updates["workers"] = workers
    if out_dir is not None:
        updates["out_dir"] = out_dir
    return replace(config, **updates) if updates else config
