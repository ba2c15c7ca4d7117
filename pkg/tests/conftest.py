from __future__ import annotations

import json

import pytest

from moon import parse_notebook, parse_script

# Notebook used throughout: 19 cells, code at odd positions 1..7 and at
# 10, 12, 14, 16, 18; everything else markdown.  Labels therefore run
# T0 C1 T2 C3 T4 C5 T6 C7 T8 T9 C10 T11 C12 T13 C14 T15 C16 T17 C18.
CODE_POSITIONS = (1, 3, 5, 7, 10, 12, 14, 16, 18)

WALKTHROUGH_SCRIPT = "((C1~T0 C3 C5 C7 C3 C5 C7 ?C10~T9)[(C12~T11 C14)(C16~T15 C18)])"
PART_SCRIPT = "(C7 ?C10 [(C12 C14)(C16 C18)])"


def nb_json(kinds, metadata=None, sources=None, version=4, minor=5):
    """Notebook document text from a list of 'code'/'text'/'raw' kinds."""
    cells = []
    for i, kind in enumerate(kinds):
        source = sources[i] if sources else f"cell {i}"
        if kind == "code":
            cells.append(
                {
                    "id": f"cell-{i}",
                    "cell_type": "code",
                    "metadata": {},
                    "execution_count": None,
                    "outputs": [],
                    "source": source,
                }
            )
        elif kind == "text":
            cells.append(
                {
                    "id": f"cell-{i}",
                    "cell_type": "markdown",
                    "metadata": {},
                    "source": source,
                }
            )
        else:
            cells.append(
                {"id": f"cell-{i}", "cell_type": kind, "metadata": {}, "source": source}
            )
    return json.dumps(
        {
            "nbformat": version,
            "nbformat_minor": minor,
            "metadata": metadata or {},
            "cells": cells,
        }
    )


def guide_kinds(n_cells=19, code_positions=CODE_POSITIONS):
    return ["code" if i in code_positions else "text" for i in range(n_cells)]


@pytest.fixture
def guide_doc():
    return parse_notebook(nb_json(guide_kinds()))


@pytest.fixture
def walkthrough_script():
    return parse_script(WALKTHROUGH_SCRIPT)


@pytest.fixture
def part_script():
    return parse_script(PART_SCRIPT)
