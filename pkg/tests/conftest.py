import random

import pytest

from spatialgrammar.vocab import load_vocabulary


@pytest.fixture(scope="session")
def vocab():
    return load_vocabulary()


@pytest.fixture
def rng():
    return random.Random(20240817)


def make_room(body: str, grid: str = "1m", dims: str | None = None) -> str:
    """Small helper assembling an indoor program from a grid body."""
    rows = [r.strip() for r in body.strip().splitlines()]
    n_rows = len(rows)
    n_cols = len(rows[0].split())
    head = f"llmsli grid={grid} dims={dims or f'{n_rows}x{n_cols}'}"
    return head + "\nmain:\n" + "\n".join(rows) + "\n"
