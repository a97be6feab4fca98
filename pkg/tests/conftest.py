import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print one PASS/FAIL line per acceptance criterion."""
    lines = []
    for status, label in (
        ("passed", "PASS"),
        ("failed", "FAIL"),
        ("xfailed", "XFAIL (documented spec defect)"),
        ("xpassed", "XPASS (unexpectedly)"),
    ):
        for report in terminalreporter.stats.get(status, []):
            if "test_acceptance.py" not in report.nodeid:
                continue
            if status == "passed" and report.when != "call":
                continue
            name = report.nodeid.split("::")[-1]
            lines.append((name, label))
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for name, label in sorted(lines):
            terminalreporter.write_line(f"ACCEPTANCE {name}: {label}")

import refdata
from causalreq.corpus import LabeledCorpus
from causalreq.lexicon import default_lexicon
from causalreq.synth import corpus_from_profiles


@pytest.fixture(scope="session")
def lexicon():
    return default_lexicon()


@pytest.fixture(scope="session")
def reference_corpus() -> LabeledCorpus:
    """Synthetic corpus reproducing the published per-domain marginals."""
    return corpus_from_profiles(refdata.DOMAIN_PROFILES, seed=7)


def write_jsonl(path: Path, rows) -> Path:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    return path


def sentence_row(
    sid="s1",
    text="If the process fails, an error message is shown.",
    document_id="d1",
    domain="Aerospace",
    position=0,
    labels=(),
):
    return {
        "id": sid,
        "text": text,
        "document_id": document_id,
        "domain": domain,
        "position": position,
        "labels": list(labels),
    }


def causal_label(annotator="a1", **overrides):
    label = {
        "annotator": annotator,
        "causal": True,
        "explicit": True,
        "marked": True,
        "single_sentence": True,
        "single_cause": True,
        "single_effect": True,
        "event_chain": False,
        "relationship": "cause",
        "temporality": "before",
        "cue_phrases": ["if"],
    }
    label.update(overrides)
    return label


def noncausal_label(annotator="a1"):
    return {"annotator": annotator, "causal": False, "cue_phrases": []}
