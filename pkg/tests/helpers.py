"""Shared test oracles and generators.

``expand_language`` is the independent oracle for compiled automata: it
computes a script's execution language purely syntactically (set algebra
over the AST), never touching the automaton code paths it checks.
"""

from __future__ import annotations

import itertools
import random

from moon import Alt, Any, CellNode, CellRef, Node, Opt, Seq

# The paper-figure automaton for "(C7 ?C10 [(C12 C14)(C16 C18)])",
# transcribed edge by edge: plain transitions and re-execution self-loops.
FIG_TRANSITIONS = {
    (0, "C7"): 1,
    (1, "C10"): 2,
    (1, "C12"): 3,
    (1, "C16"): 6,
    (2, "C12"): 3,
    (2, "C16"): 6,
    (3, "C14"): 4,
    (4, "C16"): 5,
    (5, "C18"): 9,
    (6, "C18"): 7,
    (7, "C12"): 8,
    (8, "C14"): 9,
}
FIG_SELF_LOOPS = {
    (1, "C7"),
    (2, "C10"),
    (3, "C12"),
    (4, "C14"),
    (5, "C16"),
    (6, "C16"),
    (7, "C18"),
    (8, "C12"),
}
FIG_ACCEPTING = {9}


def as_label_map(dfa) -> dict[tuple[int, str], int]:
    return {(p, str(c)): q for (p, c), q in dfa.transitions.items()}


def refs(*labels: str) -> tuple[CellRef, ...]:
    return tuple(CellRef.parse(label) for label in labels)


def _concat(sets):
    result = {()}
    for s in sets:
        result = {a + b for a in result for b in s}
    return result


def expand_language(node: Node) -> set[tuple[CellRef, ...]]:
    """All execution sequences a script permits, by syntactic expansion."""
    if isinstance(node, CellNode):
        return {(node.code,)}
    if isinstance(node, Seq):
        return _concat(expand_language(c) for c in node.children)
    if isinstance(node, Any):
        result = set()
        for order in itertools.permutations(node.children):
            result |= _concat(expand_language(c) for c in order)
        return result
    if isinstance(node, Opt):
        return {()} | expand_language(node.child)
    if isinstance(node, Alt):
        result = set()
        for child in node.children:
            result |= expand_language(child)
        return result
    raise TypeError(f"unexpected node {type(node).__name__}")


def is_stutter_free(node: Node) -> bool:
    """No word of the script's language executes the same cell twice in a row."""
    for word in expand_language(node):
        if any(a == b for a, b in zip(word, word[1:])):
            return False
    return True


def random_script(
    rng: random.Random,
    max_depth: int = 4,
    max_any: int = 4,
    max_occurrences: int = 10,
    n_cells: int = 16,
) -> Node:
    """A random script within the given structural bounds."""
    budget = rng.randint(1, max_occurrences)

    def gen(depth: int) -> Node:
        nonlocal budget
        if depth <= 0 or budget <= 1 or rng.random() < 0.35:
            budget -= 1
            return CellNode(CellRef.code(rng.randrange(n_cells)))
        kind = rng.choice(("seq", "seq", "any", "opt"))
        if kind == "opt":
            return Opt(gen(depth - 1))
        limit = 3 if kind == "seq" else max_any
        children = [gen(depth - 1)]
        while len(children) < limit and budget > 0 and rng.random() < 0.6:
            children.append(gen(depth - 1))
        return Seq(tuple(children)) if kind == "seq" else Any(tuple(children))

    return gen(max_depth)


def random_stutter_free_script(rng: random.Random, **kwargs) -> Node:
    while True:
        script = random_script(rng, **kwargs)
        if is_stutter_free(script):
            return script
