import json
from dataclasses import replace

import pytest

from hybridoa import fixture, pipeline
from hybridoa.artifacts import Layout
from hybridoa.config import load_config


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    """Default synthetic corpus with planted ground truth."""
    path = tmp_path_factory.mktemp("corpus")
    fixture.generate(fixture.FixtureParams(seed=7), str(path))
    return path


@pytest.fixture(scope="session")
def pipeline_run(corpus_dir):
    """Full pipeline executed once over the default corpus."""
    config = replace(load_config(str(corpus_dir / "config.json")), workers=1)
    config.validate()
    pipeline.run(config)
    return Layout(config.out_dir), config


def load_truth_attributions(corpus_dir):
    import csv

    truth = {}
    with open(corpus_dir / "truth" / "attributions.csv", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            key = (row["source"], row["native_id"], row["role"])
            agreement_ids = set(row["agreement_ids"].split("|")) - {""}
            truth[key] = (agreement_ids, row["noise_free"] == "true")
    return truth


def load_truth_labels(corpus_dir):
    import csv

    labels = {}
    with open(corpus_dir / "truth" / "labels.csv", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            labels[(row["source"], row["native_id"])] = row
    return labels


def load_truth_crosswalk(corpus_dir):
    import csv

    truth = {}
    with open(corpus_dir / "truth" / "crosswalk.csv", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            truth[(row["open_id"], row["scheme"])] = row["proprietary_id"]
    return truth


def write_lines(path, lines):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")
    return str(path)


def article_line(**overrides):
    """A well-formed interchange line with sensible defaults."""
    obj = {
        "source": "open",
        "native_id": "W1",
        "issn": "0378-5955",
        "pub_date": "2021-03-04",
        "document_class": "journal-article",
        "doi": "10.5555/x1",
        "title": "A study of hybrid journals",
        "pagination": "10-19",
        "licenses": [],
        "authors": [{"position": 1, "org_ids": ["ror:0r001"], "countries": ["DE"]}],
    }
    obj.update(overrides)
    return json.dumps(obj)
