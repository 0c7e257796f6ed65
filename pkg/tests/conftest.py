from functools import lru_cache
from pathlib import Path

import pytest

from treemeasure.automata import builtin
from treemeasure.pipeline import run_pipeline

GOLDEN = Path(__file__).parent / "golden"
CORPUS = ["L1", "L2", "L3", "Linf", ("W", 1, 3), ("W", 0, 2), ("W", 1, 4)]


def corpus_id(entry) -> str:
    return entry if isinstance(entry, str) else "W_{}_{}".format(*entry[1:])


@lru_cache(maxsize=None)
def pipeline_for(entry):
    args = (entry,) if isinstance(entry, str) else entry
    return run_pipeline(builtin(*args))


@pytest.fixture(params=CORPUS, ids=corpus_id)
def corpus_pipeline(request):
    return pipeline_for(request.param)
