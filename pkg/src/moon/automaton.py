"""Compile scenario scripts into minimal DFAs over code-cell identities.

Any-order groups are rewritten into an alternation over block
permutations first, so the remaining language is regular in the plain
sense: a nondeterministic automaton is built structurally, determinized
by subset construction, and minimized.  Text-cell associations are erased
here; transitions are labelled by code cells only.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field, replace

from .errors import AnyOrderBlowupError, StateLimitError
from .notebook import CellRef
from .script import Alt, Any, CellNode, Node, Opt, Seq, iter_cell_nodes, render

DEFAULT_MAX_ANY_ELEMENTS = 6
DEFAULT_MAX_STATES = 10_000


@dataclass(frozen=True)
class CompileLimits:
    """Guards against pathological scripts (permutation blowup, huge DFAs)."""

    max_any_elements: int = DEFAULT_MAX_ANY_ELEMENTS
    max_states: int = DEFAULT_MAX_STATES

    def __post_init__(self):
        if self.max_any_elements < 1 or self.max_states < 1:
            raise ValueError("compile limits must be at least 1")


@dataclass(frozen=True)
class Dfa:
    """A deterministic finite automaton over code-cell references.

    States are ``0..n_states-1`` labelled ``q0..q<n-1>``; state 0 is the
    start.  ``transitions`` is a partial map, deterministic by
    construction.
    """

    n_states: int
    alphabet: frozenset[CellRef]
    transitions: dict[tuple[int, CellRef], int] = field(compare=False)
    accepting: frozenset[int] = frozenset()
    start: int = 0

    def delta(self, state: int, symbol: CellRef) -> int | None:
        return self.transitions.get((state, symbol))

    def out_edges(self, state: int) -> list[tuple[CellRef, int]]:
        """Outgoing transitions of ``state``, sorted by symbol index."""
        edges = [(c, t) for (p, c), t in self.transitions.items() if p == state]
        edges.sort(key=lambda e: e[0].index)
        return edges

    def label(self, state: int) -> str:
        return f"q{state}"

    @property
    def n_transitions(self) -> int:
        return len(self.transitions)

    def self_loops(self) -> list[tuple[int, CellRef]]:
        return sorted(
            ((p, c) for (p, c), q in self.transitions.items() if p == q),
            key=lambda e: (e[0], e[1].index),
        )


def expand_any(ast: Node, limits: CompileLimits | None = None) -> Node:
    """Rewrite every any-order group into an alternation of block permutations.

    Each permutation runs its blocks to completion in turn; blocks are
    never interleaved.  Groups larger than ``limits.max_any_elements``
    raise :class:`AnyOrderBlowupError` before any permutation is built.
    """
    limits = limits or CompileLimits()

    def walk(node: Node) -> Node:
        if isinstance(node, CellNode):
            return node
        if isinstance(node, Seq):
            return Seq(tuple(walk(c) for c in node.children))
        if isinstance(node, Opt):
            return Opt(walk(node.child))
        if isinstance(node, Alt):
            return Alt(tuple(walk(c) for c in node.children))
        assert isinstance(node, Any)
        k = len(node.children)
        if k > limits.max_any_elements:
            raise AnyOrderBlowupError(render(node), k, limits.max_any_elements)
        blocks = [walk(c) for c in node.children]
        if k == 1:
            return blocks[0]
        orders = [Seq(perm) for perm in itertools.permutations(blocks)]
        return Alt(tuple(dict.fromkeys(orders)))

    return walk(ast)


# ---------------------------------------------------------------------------
# NFA construction and determinization


class _Nfa:
    """Epsilon-NFA with one entry and one exit state per fragment."""

    def __init__(self):
        self.eps: list[set[int]] = []
        self.sym: list[dict[CellRef, set[int]]] = []

    def new_state(self) -> int:
        self.eps.append(set())
        self.sym.append({})
        return len(self.eps) - 1

    def fragment(self, node: Node) -> tuple[int, int]:
        if isinstance(node, CellNode):
            s, t = self.new_state(), self.new_state()
            self.sym[s].setdefault(node.code, set()).add(t)
            return s, t
        if isinstance(node, Seq):
            start, end = self.fragment(node.children[0])
            for child in node.children[1:]:
                s, t = self.fragment(child)
                self.eps[end].add(s)
                end = t
            return start, end
        if isinstance(node, Opt):
            s, t = self.new_state(), self.new_state()
            cs, ct = self.fragment(node.child)
            self.eps[s].update((cs, t))
            self.eps[ct].add(t)
            return s, t
        if isinstance(node, Alt):
            s, t = self.new_state(), self.new_state()
            for child in node.children:
                cs, ct = self.fragment(child)
                self.eps[s].add(cs)
                self.eps[ct].add(t)
            return s, t
        raise ValueError(f"cannot build automaton from {type(node).__name__} node")

    def closure(self, states: frozenset[int]) -> frozenset[int]:
        seen = set(states)
        stack = list(states)
        while stack:
            for nxt in self.eps[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return frozenset(seen)


def _subset_construct(
    nfa: _Nfa, start: int, end: int, alphabet: frozenset[CellRef], limits: CompileLimits
) -> Dfa:
    start_set = nfa.closure(frozenset((start,)))
    ids: dict[frozenset[int], int] = {start_set: 0}
    transitions: dict[tuple[int, CellRef], int] = {}
    worklist = deque([start_set])
    while worklist:
        current = worklist.popleft()
        cid = ids[current]
        moves: dict[CellRef, set[int]] = {}
        for state in current:
            for symbol, targets in nfa.sym[state].items():
                moves.setdefault(symbol, set()).update(targets)
        for symbol, targets in moves.items():
            closure = nfa.closure(frozenset(targets))
            if closure not in ids:
                if len(ids) >= limits.max_states:
                    raise StateLimitError(
                        f"automaton exceeds {limits.max_states} states"
                    )
                ids[closure] = len(ids)
                worklist.append(closure)
            transitions[(cid, symbol)] = ids[closure]
    accepting = frozenset(i for s, i in ids.items() if end in s)
    return Dfa(
        n_states=len(ids),
        alphabet=alphabet,
        transitions=transitions,
        accepting=accepting,
    )


def _minimize(dfa: Dfa) -> Dfa:
    """Moore partition refinement with an implicit dead state."""
    symbols = sorted(dfa.alphabet, key=lambda c: c.index)
    dead = dfa.n_states
    states = range(dfa.n_states + 1)

    def total_delta(s: int, c: CellRef) -> int:
        if s == dead:
            return dead
        return dfa.transitions.get((s, c), dead)

    block = [1 if s in dfa.accepting else 0 for s in range(dfa.n_states)] + [0]
    while True:
        signatures = {
            s: (block[s], tuple(block[total_delta(s, c)] for c in symbols))
            for s in states
        }
        renumber: dict[tuple, int] = {}
        new_block = []
        for s in states:
            sig = signatures[s]
            if sig not in renumber:
                renumber[sig] = len(renumber)
            new_block.append(renumber[sig])
        if new_block == block:
            break
        block = new_block

    dead_block = block[dead]
    keep = sorted(set(block) - {dead_block})
    remap = {b: i for i, b in enumerate(keep)}
    transitions = {}
    for (p, c), q in dfa.transitions.items():
        bp, bq = block[p], block[q]
        if bp != dead_block and bq != dead_block:
            transitions[(remap[bp], c)] = remap[bq]
    accepting = frozenset(remap[block[s]] for s in dfa.accepting)
    return Dfa(
        n_states=len(keep),
        alphabet=dfa.alphabet,
        transitions=transitions,
        accepting=accepting,
        start=remap[block[dfa.start]],
    )


def _canonicalize(dfa: Dfa) -> Dfa:
    """Renumber states deterministically.

    Depth-first preorder from the start, children in symbol order; the
    sink accepting state (no outgoing transitions) is numbered last so
    the final state carries the highest label.
    """
    out: dict[int, list[tuple[CellRef, int]]] = {s: [] for s in range(dfa.n_states)}
    for (p, c), q in dfa.transitions.items():
        out[p].append((c, q))
    for edges in out.values():
        edges.sort(key=lambda e: e[0].index)

    order: list[int] = []
    deferred: list[int] = []
    seen = set()
    stack = [dfa.start]
    while stack:
        s = stack.pop()
        if s in seen:
            continue
        seen.add(s)
        (deferred if not out[s] else order).append(s)
        for _, target in reversed(out[s]):
            stack.append(target)

    numbering = {s: i for i, s in enumerate(order + deferred)}
    transitions = {
        (numbering[p], c): numbering[q] for (p, c), q in dfa.transitions.items()
    }
    accepting = frozenset(numbering[s] for s in dfa.accepting)
    return Dfa(
        n_states=dfa.n_states,
        alphabet=dfa.alphabet,
        transitions=transitions,
        accepting=accepting,
        start=numbering[dfa.start],
    )


def compile(ast: Node, limits: CompileLimits | None = None) -> Dfa:
    """Compile a script AST into the minimal DFA for its execution language."""
    limits = limits or CompileLimits()
    expanded = expand_any(ast, limits)
    alphabet = frozenset(c.code for c in iter_cell_nodes(ast))
    nfa = _Nfa()
    start, end = nfa.fragment(expanded)
    raw = _subset_construct(nfa, start, end, alphabet, limits)
    return _canonicalize(_minimize(raw))


def decorate_reexec_loops(dfa: Dfa) -> Dfa:
    """Add re-execution self-loops for rendering.

    For each transition entering a non-accepting state, the entered state
    gets a self-loop on the same symbol unless it already moves on it.
    Acceptance of stutter-free sequences is unchanged.
    """
    transitions = dict(dfa.transitions)
    for (p, c), q in dfa.transitions.items():
        if p != q and q not in dfa.accepting and (q, c) not in dfa.transitions:
            transitions[(q, c)] = q
    return replace(dfa, transitions=transitions)


def accepts(dfa: Dfa, seq: list[CellRef] | tuple[CellRef, ...]) -> bool:
    """Whether ``seq`` drives the start state to an accepting state."""
    state = dfa.start
    for symbol in seq:
        nxt = dfa.delta(state, symbol)
        if nxt is None:
            return False
        state = nxt
    return state in dfa.accepting


MAX_ENUMERATION_LENGTH = 20


def enumerate_language(dfa: Dfa, max_length: int) -> set[tuple[CellRef, ...]]:
    """All accepted sequences of length <= ``max_length``, by breadth-first walk.

    Intended as a test oracle on small automata; ``max_length`` is capped
    at 20 because decorated automata have infinite languages.
    """
    if max_length > MAX_ENUMERATION_LENGTH:
        raise ValueError(f"max_length {max_length} exceeds {MAX_ENUMERATION_LENGTH}")
    accepted: set[tuple[CellRef, ...]] = set()
    frontier: deque[tuple[int, tuple[CellRef, ...]]] = deque([(dfa.start, ())])
    while frontier:
        state, path = frontier.popleft()
        if state in dfa.accepting:
            accepted.add(path)
        if len(path) == max_length:
            continue
        for symbol, target in dfa.out_edges(state):
            frontier.append((target, path + (symbol,)))
    return accepted


def export_dot(dfa: Dfa, name: str = "scenario") -> str:
    """Graphviz text for the automaton; byte-identical for equal inputs.

    Accepting states are double circles; states are emitted in label
    order and edges in (source, symbol) order.
    """
    lines = [f"digraph {name} {{", "  rankdir=LR;", '  __start [shape=point label=""];']
    lines.append(f"  __start -> {dfa.label(dfa.start)};")
    for s in range(dfa.n_states):
        shape = "doublecircle" if s in dfa.accepting else "circle"
        lines.append(f"  {dfa.label(s)} [shape={shape}];")
    for s in range(dfa.n_states):
        for symbol, target in dfa.out_edges(s):
            lines.append(f'  {dfa.label(s)} -> {dfa.label(target)} [label="{symbol}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
