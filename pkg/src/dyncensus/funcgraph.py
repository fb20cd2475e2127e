"""Functional graphs of self-maps on a finite domain.

A functional graph has exactly one out-edge per vertex, so every weakly
connected component is a single cycle with trees hanging off the cycle
vertices.  This module builds such graphs from maps, extracts their
cycle and tail statistics, and produces a canonical key: a byte string
equal for two graphs exactly when they are isomorphic.  A brute-force
isomorphism decision procedure, sharing no code with the key
construction, is kept alongside as the validation oracle.
"""

from __future__ import annotations

import hashlib
import sys
from dataclasses import dataclass, field

ORACLE_SIZE_LIMIT = 512
PERIOD_TABLE_CAP = 10**6


class NotAPermutationError(ValueError):
    pass


class TooLargeForOracleError(ValueError):
    pass


@dataclass(frozen=True)
class FunctionalGraph:
    """Successor array plus optional provenance of the generating map."""

    succ: tuple[int, ...]
    provenance: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        n = len(self.succ)
        if any(not 0 <= v < n for v in self.succ):
            raise ValueError("successor out of range")

    @property
    def n(self) -> int:
        return len(self.succ)


def build_graph(mp) -> FunctionalGraph:
    """Evaluate a map on its whole domain; O(domain) evaluations."""
    size = mp.domain_size
    return FunctionalGraph(
        succ=tuple(mp.eval(x) for x in range(size)),
        provenance=mp.to_json(),
    )


def _find_cycles(succ):
    """All cycles, each as a list of vertices in successor order.

    Iterative colouring: every vertex is walked at most twice, so the
    whole decomposition is linear in the graph size.
    """
    n = len(succ)
    state = [0] * n  # 0 unvisited, 1 on current path, 2 resolved
    cycles = []
    for start in range(n):
        if state[start]:
            continue
        path = []
        v = start
        while state[v] == 0:
            state[v] = 1
            path.append(v)
            v = succ[v]
        if state[v] == 1:  # new cycle closes at v
            idx = path.index(v)
            cycles.append(path[idx:])
        for u in path:
            state[u] = 2
    return cycles


@dataclass(frozen=True)
class GraphStats:
    component_count: int
    cycle_lengths: tuple[int, ...]  # sorted multiset
    fixed_point_count: int
    periodic_point_count: int
    period_divisor_counts: dict  # m -> #vertices whose period divides m
    max_tail_depth: int

    def to_json(self) -> dict:
        return {
            "n": None,
            "components": self.component_count,
            "cycle_lengths": list(self.cycle_lengths),
            "fixed_points": self.fixed_point_count,
            "max_tail_depth": self.max_tail_depth,
        }


def stats_json(graph: FunctionalGraph, stats: GraphStats) -> dict:
    out = stats.to_json()
    out["n"] = graph.n
    return out


def _divisors_up_to(lengths, cap):
    """Divisors of lcm(lengths) that are at most cap."""
    prime_pows: dict[int, int] = {}
    for c in set(lengths):
        m = c
        d = 2
        while d * d <= m:
            e = 0
            while m % d == 0:
                m //= d
                e += 1
            if e:
                prime_pows[d] = max(prime_pows.get(d, 0), e)
            d += 1
        if m > 1:
            prime_pows[m] = max(prime_pows.get(m, 0), 1)
    divs = [1]
    for prime, exp in prime_pows.items():
        divs = [d * prime**e for d in divs for e in range(exp + 1) if d * prime**e <= cap]
    return sorted(divs)


def analyze(graph: FunctionalGraph, period_cap: int = PERIOD_TABLE_CAP) -> GraphStats:
    """Cycle structure, fixed points, tail depths, and the per-divisor
    periodic-point table."""
    succ = graph.succ
    n = graph.n
    cycles = _find_cycles(succ)
    cycle_lengths = sorted(len(c) for c in cycles)
    on_cycle = [False] * n
    for cyc in cycles:
        for v in cyc:
            on_cycle[v] = True

    # tail depth: steps to reach a periodic vertex
    depth = [-1] * n
    for v in range(n):
        if on_cycle[v]:
            depth[v] = 0
    for start in range(n):
        if depth[start] >= 0:
            continue
        chain = []
        v = start
        while depth[v] < 0:
            chain.append(v)
            v = succ[v]
        base = depth[v]
        for i, u in enumerate(reversed(chain), start=1):
            depth[u] = base + i
    max_tail = max(depth) if n else 0

    # periodic points with period dividing m, for divisors m of the cycle lcm
    mult: dict[int, int] = {}
    for c in cycle_lengths:
        mult[c] = mult.get(c, 0) + 1
    table = {}
    for m in _divisors_up_to(cycle_lengths, period_cap):
        table[m] = sum(c * k for c, k in mult.items() if m % c == 0)

    return GraphStats(
        component_count=len(cycles),
        cycle_lengths=tuple(cycle_lengths),
        fixed_point_count=mult.get(1, 0),
        periodic_point_count=sum(cycle_lengths),
        period_divisor_counts=table,
        max_tail_depth=max_tail,
    )


# -- canonical key --


def least_rotation(seq) -> int:
    """Index of the lexicographically least rotation of seq (Booth)."""
    n = len(seq)
    if n <= 1:
        return 0
    doubled = seq + seq
    fail = [-1] * (2 * n)
    k = 0
    for j in range(1, 2 * n):
        sj = doubled[j]
        i = fail[j - k - 1]
        while i != -1 and sj != doubled[k + i + 1]:
            if sj < doubled[k + i + 1]:
                k = j - i - 1
            i = fail[i]
        if sj != doubled[k + i + 1]:
            if sj < doubled[k]:
                k = j
            fail[j - k] = -1
        else:
            fail[j - k] = i + 1
    return k


def _tree_strings(succ, cycles):
    """AHU canonical string of the in-tree hanging off each cycle vertex.

    Children strings are sorted by (length, content) and wrapped in
    parentheses; computed bottom-up without recursion so deep tail chains
    cannot overflow the stack.
    """
    n = len(succ)
    on_cycle = [False] * n
    for cyc in cycles:
        for v in cyc:
            on_cycle[v] = True
    children: list[list[int]] = [[] for _ in range(n)]
    for u in range(n):
        if not on_cycle[u]:
            children[succ[u]].append(u)

    canon = [""] * n
    roots = [v for cyc in cycles for v in cyc]
    order = []  # BFS from the roots through tree edges
    stack = list(roots)
    while stack:
        u = stack.pop()
        order.append(u)
        stack.extend(children[u])
    for u in reversed(order):  # children are resolved before their parent
        kids = sorted((canon[c] for c in children[u]), key=lambda s: (len(s), s))
        canon[u] = "(" + "".join(kids) + ")"
    return canon


@dataclass(frozen=True)
class CanonicalKey:
    """Total isomorphism invariant: equal keys iff isomorphic graphs."""

    key: bytes
    digest: bytes  # 128-bit hash of key, for compact set membership

    def hexdigest(self) -> str:
        return self.digest.hex()


def canonical_key(graph: FunctionalGraph) -> CanonicalKey:
    """Canonical form: per component, the least rotation of the cycle's
    tree-string sequence; components sorted and length-prefixed."""
    succ = graph.succ
    cycles = _find_cycles(succ)
    canon = _tree_strings(succ, cycles)
    comps = []
    for cyc in cycles:
        seq = tuple(canon[v] for v in cyc)
        r = least_rotation(seq)
        rotated = seq[r:] + seq[:r]
        comps.append(f"{len(rotated)}:" + "".join(f"{len(s)}#{s}" for s in rotated))
    body = "".join(f"{len(c)}${c}" for c in sorted(comps))
    key = body.encode("ascii")
    return CanonicalKey(key=key, digest=hashlib.blake2b(key, digest_size=16).digest())


def relabel(graph: FunctionalGraph, perm) -> FunctionalGraph:
    """Graph with vertices renamed by perm: succ'[perm[v]] = perm[succ[v]]."""
    perm = list(perm)
    n = graph.n
    if sorted(perm) != list(range(n)):
        raise NotAPermutationError("relabeling must be a permutation of the vertices")
    out = [0] * n
    for v in range(n):
        out[perm[v]] = perm[graph.succ[v]]
    return FunctionalGraph(succ=tuple(out))


# -- brute-force isomorphism oracle (independent of canonical_key) --


def _oracle_decompose(succ):
    """Components as (cycle length, size, per-cycle-vertex nested child
    lists).  Trees are plain nested lists; nothing here is canonicalized."""
    cycles = _find_cycles(succ)
    n = len(succ)
    on_cycle = [False] * n
    for cyc in cycles:
        for v in cyc:
            on_cycle[v] = True
    children: list[list[int]] = [[] for _ in range(n)]
    for u in range(n):
        if not on_cycle[u]:
            children[succ[u]].append(u)

    sizes = [0] * n  # subtree sizes, computed leaves-first

    def tree_of(root):
        order = []
        stack = [root]
        while stack:
            u = stack.pop()
            order.append(u)
            stack.extend(children[u])
        built: dict[int, list] = {}
        for u in reversed(order):
            built[u] = [built[c] for c in children[u]]
            sizes[u] = 1 + sum(sizes[c] for c in children[u])
        return built[root]

    comps = []
    for cyc in cycles:
        trees = [tree_of(v) for v in cyc]
        size = sum(sizes[v] for v in cyc)
        comps.append((len(cyc), size, trees))
    return comps


def _tree_size(tree) -> int:
    return 1 + sum(_tree_size(c) for c in tree)


def _rooted_iso(a, b) -> bool:
    """Rooted-tree isomorphism by recursive child matching.

    Rooted isomorphism is an equivalence relation, so matching each child
    of a greedily against any still-unused isomorphic child of b is
    exact, not a heuristic.
    """
    if len(a) != len(b):
        return False
    if not a:
        return True
    a_sorted = sorted(a, key=_tree_size)
    b_sorted = sorted(b, key=_tree_size)
    used = [False] * len(b_sorted)
    for child in a_sorted:
        for j, cand in enumerate(b_sorted):
            if not used[j] and _rooted_iso(child, cand):
                used[j] = True
                break
        else:
            return False
    return True


def _component_iso(c1, c2) -> bool:
    len1, size1, trees1 = c1
    len2, size2, trees2 = c2
    if len1 != len2 or size1 != size2:
        return False
    for shift in range(len1):  # try every cycle rotation
        if all(_rooted_iso(trees1[i], trees2[(i + shift) % len1]) for i in range(len1)):
            return True
    return False


def are_isomorphic_oracle(g1: FunctionalGraph, g2: FunctionalGraph,
                          size_limit: int = ORACLE_SIZE_LIMIT) -> bool:
    """Exact isomorphism decision by explicit component matching.

    Deliberately shares no machinery with canonical_key so the two can
    cross-validate each other.
    """
    if g1.n > size_limit or g2.n > size_limit:
        raise TooLargeForOracleError(f"oracle limited to {size_limit} vertices")
    if g1.n != g2.n:
        return False
    # deep tail chains nest both the child lists and the matching recursion
    if sys.getrecursionlimit() < 4 * size_limit + 100:
        sys.setrecursionlimit(4 * size_limit + 100)
    comps1 = _oracle_decompose(g1.succ)
    comps2 = list(_oracle_decompose(g2.succ))
    if len(comps1) != len(comps2):
        return False
    used = [False] * len(comps2)
    for c1 in comps1:  # greedy is exact: component isomorphism is an equivalence
        for j, c2 in enumerate(comps2):
            if not used[j] and _component_iso(c1, c2):
                used[j] = True
                break
        else:
            return False
    return True


def export_dot(graph: FunctionalGraph, labels=None) -> str:
    """DOT digraph with one edge per vertex; labels maps vertex -> text."""
    lines = ["digraph functional {"]
    if labels:
        for v in range(graph.n):
            lines.append(f'  {v} [label="{labels[v]}"];')
    for v in range(graph.n):
        lines.append(f"  {v} -> {graph.succ[v]};")
    lines.append("}")
    return "\n".join(lines)
