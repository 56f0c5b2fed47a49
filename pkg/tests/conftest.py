"""Shared fixtures: corpus access, one solver discovery per session, and
a cached full-pipeline run per corpus program."""

import pathlib

import pytest

from invarc.cli import build_pipeline
from invarc.invariants import detect_invariants
from invarc.solver import discover_solver

CORPUS = pathlib.Path(__file__).parent / "corpus"
GOLDEN = pathlib.Path(__file__).parent / "golden"
DOCS = pathlib.Path(__file__).parent.parent / "docs"

# entry function per corpus file (files with several functions)
ENTRIES = {
    "foo.c": "foo",
    "sequential_scan.c": "SequentialScan",
    "sum.c": "sum_example",
    "fp_known.c": "dispatch",
    "fp_unknown.c": "dispatch_unknown",
    "get_row_length.c": "GetRowLength",
    "nested_member.c": "nested",
    "recursive.c": "use_fact",
    "pair.c": "swap_free",
}


def corpus_source(name):
    return (CORPUS / name).read_text()


def corpus_entry(name):
    return ENTRIES.get(name)


@pytest.fixture(scope="session")
def solver_cfg():
    return discover_solver(timeout_ms=60_000)


@pytest.fixture(scope="session")
def pipeline_cache():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = build_pipeline(corpus_source(name),
                                         corpus_entry(name))
        return cache[name]

    return get


@pytest.fixture(scope="session")
def report_cache(pipeline_cache, solver_cfg):
    """Full invariant reports per corpus file (solver included)."""
    cache = {}

    def get(name):
        if name not in cache:
            ast, report, prog, graph, ab, enc = pipeline_cache(name)
            cache[name] = detect_invariants(ab, enc, solver_cfg,
                                            program_name=prog.entry)
        return cache[name]

    return get
