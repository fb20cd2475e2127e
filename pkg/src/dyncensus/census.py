"""Symmetry-reduced exhaustive classification of map families.

A census enumerates every member of a family, buckets the functional
graphs by canonical key, and reports the exact number of isomorphism
classes with one representative per class.  Orbit reductions can skip
members that are provably conjugate (hence isomorphic) to a member with
a smaller coefficient encoding; they change the work done, never the
counts.  The index space partitions into disjoint ranges, so worker
processes scan independently and their class tables merge by multiset
union, which keeps the report identical for any worker count.
"""

from __future__ import annotations

import atexit
import hashlib
import json
import struct
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .dynmaps import FamilySpec
from .funcgraph import GraphStats, analyze, build_graph, canonical_key

DEFAULT_BUDGET = 10**9
CHECKPOINT_MAGIC = b"DYNCENSB"
CHECKPOINT_VERSION = 1


class BudgetExceededError(RuntimeError):
    def __init__(self, message, checkpoint_path=None):
        super().__init__(message)
        self.checkpoint_path = checkpoint_path


class ReductionNotApplicableError(ValueError):
    """Requested orbit reduction does not preserve the family."""


class CheckpointMismatchError(ValueError):
    """Checkpoint was written for a different family or reduction."""


# -- orbit reductions --


def _conjugates(spec: FamilySpec, mp, action: str):
    q = spec.field.q
    if action == "scaling":
        for lam in range(2, q):
            yield mp.conjugate(lam, 0)
    elif action == "affine":
        for lam in range(1, q):
            for mu in range(q):
                if lam == 1 and mu == 0:
                    continue
                yield mp.conjugate(lam, mu)
    elif action == "frobenius":
        for i in range(1, spec.field.k):
            yield mp.frobenius_twist(i)
    else:
        raise ValueError(f"unknown action {action!r}")


def _orbit_size_if_representative(spec, mp, action):
    """Orbit size when mp has the smallest encoding in its orbit, else None.

    Bails out at the first smaller conjugate, so non-representatives cost
    a fraction of an orbit scan.
    """
    base = mp.encoding()
    seen = {base}
    for other in _conjugates(spec, mp, action):
        enc = other.encoding()
        if enc < base:
            return None
        seen.add(enc)
    return len(seen)


def action_applicable(spec: FamilySpec, action: str) -> bool:
    """Whether the action maps the family into itself and preserves the
    evaluated system.

    Affine substitutions leave the sparse, power, and linearised families
    (translation introduces new monomials) and change the pole image of
    affine-model rational maps, so they are restricted accordingly; the
    closure facts are probed exhaustively by the test suite.
    """
    kind = spec.kind
    if action == "none":
        return True
    if action == "scaling":
        if kind != "rational":
            return True
        return spec.model == "projective" or spec.alpha == 0
    if action == "affine":
        if kind in ("all-degree-d", "linear", "frobenius-affine"):
            return True
        if kind == "rational":
            return spec.model == "projective" and spec.m > spec.n
        return False
    if action == "frobenius":
        return kind == "sparse"  # k = 1 degenerates to a no-op passthrough
    raise ValueError(f"unknown action {action!r}")


def resolve_reduction(spec: FamilySpec, mode: str) -> str:
    if mode == "none":
        return "none"
    if mode == "auto":
        for action in ("affine", "scaling"):
            if action_applicable(spec, action):
                return action
        return "none"
    if not action_applicable(spec, mode):
        raise ReductionNotApplicableError(
            f"reduction {mode!r} is not sound for family {spec.kind!r}"
            + (f" ({spec.model}, alpha={spec.alpha})" if spec.kind == "rational" else "")
        )
    return mode


def reduce_by_scaling(spec: FamilySpec, indices=None):
    """Yield (index, map, orbit size) for scaling-orbit representatives."""
    yield from _reduced_stream(spec, "scaling", indices)


def reduce_by_affine(spec: FamilySpec, indices=None):
    yield from _reduced_stream(spec, "affine", indices)


def reduce_by_frobenius(spec: FamilySpec, indices=None):
    """Coefficientwise x -> x^p orbits; a no-op over prime fields."""
    yield from _reduced_stream(spec, "frobenius", indices)


def _reduced_stream(spec, action, indices):
    if not action_applicable(spec, action):
        raise ReductionNotApplicableError(f"{action!r} not sound for {spec.kind!r}")
    if indices is None:
        indices = range(spec.size())
    for i in indices:
        mp = spec.member(i)
        size = _orbit_size_if_representative(spec, mp, action)
        if size is not None:
            yield i, mp, size


# -- class accumulation --


def _scan_indices(spec, indices, action, classes, members=None):
    """Classify members at the given indices into classes, in place.

    classes: key bytes -> [first index seen, accumulated multiplicity];
    members, when given, collects every processed index per class.
    """
    for i in indices:
        mp = spec.member(i)
        if action == "none":
            orbit = 1
        else:
            orbit = _orbit_size_if_representative(spec, mp, action)
            if orbit is None:
                continue
        key = canonical_key(build_graph(mp)).key
        entry = classes.get(key)
        if entry is None:
            classes[key] = [i, orbit]
        else:
            entry[1] += orbit
        if members is not None:
            members.setdefault(key, []).append(i)


def _scan_range_task(payload):
    spec, start, stop, action = payload
    classes: dict[bytes, list[int]] = {}
    _scan_indices(spec, range(start, stop), action, classes)
    return classes


_POOLS: dict[int, ProcessPoolExecutor] = {}


def _pool(workers: int) -> ProcessPoolExecutor:
    pool = _POOLS.get(workers)
    if pool is None:
        pool = ProcessPoolExecutor(max_workers=workers)
        _POOLS[workers] = pool
    return pool


@atexit.register
def _shutdown_pools():
    for pool in _POOLS.values():
        pool.shutdown(cancel_futures=True)
    _POOLS.clear()


# -- checkpoints --
#
# Binary layout (all integers little-endian):
#   bytes 0..7    magic "DYNCENSB"
#   u32           format version (1)
#   u32           meta length M
#   M bytes       UTF-8 JSON {"family": <sha256>, "action": str, "total": int}
#   u64           next family index to process
#   u64           number of class entries
# then per class entry:
#   u32           key length K
#   K bytes       canonical key
#   u64           representative family index
#   u64           accumulated multiplicity


def _write_checkpoint(path, spec, action, next_index, classes):
    meta = json.dumps(
        {"family": spec.digest(), "action": action, "total": spec.size()},
        sort_keys=True,
    ).encode()
    with open(path, "wb") as fh:
        fh.write(struct.pack("<8sII", CHECKPOINT_MAGIC, CHECKPOINT_VERSION, len(meta)))
        fh.write(meta)
        fh.write(struct.pack("<QQ", next_index, len(classes)))
        for key, (rep, mult) in classes.items():
            fh.write(struct.pack("<I", len(key)))
            fh.write(key)
            fh.write(struct.pack("<QQ", rep, mult))


def _load_checkpoint(path, spec, action):
    with open(path, "rb") as fh:
        magic, version, meta_len = struct.unpack("<8sII", fh.read(16))
        if magic != CHECKPOINT_MAGIC:
            raise CheckpointMismatchError("not a census checkpoint")
        if version != CHECKPOINT_VERSION:
            raise CheckpointMismatchError(f"unsupported checkpoint version {version}")
        meta = json.loads(fh.read(meta_len))
        if meta["family"] != spec.digest() or meta["action"] != action:
            raise CheckpointMismatchError("checkpoint belongs to a different census")
        next_index, n_classes = struct.unpack("<QQ", fh.read(16))
        classes: dict[bytes, list[int]] = {}
        for _ in range(n_classes):
            (key_len,) = struct.unpack("<I", fh.read(4))
            key = fh.read(key_len)
            rep, mult = struct.unpack("<QQ", fh.read(16))
            classes[key] = [rep, mult]
    return next_index, classes


# -- reports --


@dataclass(frozen=True)
class ClassEntry:
    key: bytes
    digest_hex: str
    rep_index: int
    representative: dict
    multiplicity: int
    stats: GraphStats
    member_indices: tuple[int, ...] | None = None  # only under the verbose flag

    def to_json(self) -> dict:
        rep = dict(self.representative)
        rep.pop("field", None)
        out = {
            "digest": self.digest_hex,
            "rep_index": self.rep_index,
            "map": rep,
            "multiplicity": self.multiplicity,
            "stats": self.stats_record,
        }
        if self.member_indices is not None:
            out["members"] = list(self.member_indices)
        return out

    @property
    def stats_record(self) -> dict:
        return {
            "components": self.stats.component_count,
            "cycle_lengths": list(self.stats.cycle_lengths),
            "fixed_points": self.stats.fixed_point_count,
            "periodic_points": self.stats.periodic_point_count,
            "max_tail_depth": self.stats.max_tail_depth,
        }


@dataclass(frozen=True)
class CensusReport:
    family: FamilySpec
    total_maps: int
    distinct_classes: int
    inventory: tuple[ClassEntry, ...]
    reductions_used: str
    wall_time: float
    workers: int

    def to_json(self, with_meta: bool = True) -> dict:
        out = {
            "schema": 1,
            "family": self.family.to_json(),
            "field": self.family.field.to_json(),
            "domain_size": self.family.domain_size,
            "total": self.total_maps,
            "classes": self.distinct_classes,
            "reductions": self.reductions_used,
            "inventory": [entry.to_json() for entry in self.inventory],
        }
        if with_meta:
            out["meta"] = {"wall_time_s": self.wall_time, "workers": self.workers}
        return out


def run_census(
    spec: FamilySpec,
    *,
    workers: int = 1,
    budget: int | None = DEFAULT_BUDGET,
    reduce: str = "none",
    checkpoint_path=None,
    checkpoint_every: int = 10**6,
    resume_from=None,
    collect_members: bool = False,
) -> CensusReport:
    """Classify every member of the family; exact class counts.

    The budget caps total work at size * domain evaluations; exceeding it
    raises BudgetExceededError after writing a resumable checkpoint (when
    a checkpoint path is configured).  Counts are independent of worker
    count and of the reduction used.  collect_members keeps the full list
    of member indices per class (memory grows with the family, so it is
    off by default and unsupported with workers or checkpoints).
    """
    action = resolve_reduction(spec, reduce)
    total = spec.size()
    domain = spec.domain_size
    started = time.perf_counter()
    member_lists = {} if collect_members else None
    if collect_members and (workers > 1 or resume_from is not None):
        raise ValueError("member collection is single-worker, fresh-run only")

    if workers > 1:
        if budget is not None and total * domain > budget:
            raise BudgetExceededError(
                f"census needs {total * domain} evaluations, budget is {budget}"
            )
        bounds = [(w * total // workers, (w + 1) * total // workers) for w in range(workers)]
        payloads = [(spec, a, b, action) for a, b in bounds if a < b]
        classes: dict[bytes, list[int]] = {}
        for part in _pool(workers).map(_scan_range_task, payloads):
            for key, (rep, mult) in part.items():
                entry = classes.get(key)
                if entry is None:
                    classes[key] = [rep, mult]
                else:
                    entry[0] = min(entry[0], rep)
                    entry[1] += mult
    else:
        start_index = 0
        classes = {}
        if resume_from is not None:
            start_index, classes = _load_checkpoint(resume_from, spec, action)
        next_checkpoint = start_index + checkpoint_every
        for i in range(start_index, total):
            if budget is not None and (i + 1) * domain > budget:
                if checkpoint_path is not None:
                    _write_checkpoint(checkpoint_path, spec, action, i, classes)
                raise BudgetExceededError(
                    f"evaluation budget {budget} exhausted at member {i}/{total}",
                    checkpoint_path=checkpoint_path,
                )
            _scan_indices(spec, (i,), action, classes, member_lists)
            if checkpoint_path is not None and i + 1 >= next_checkpoint:
                _write_checkpoint(checkpoint_path, spec, action, i + 1, classes)
                next_checkpoint += checkpoint_every

    inventory = []
    for key, (rep_index, mult) in sorted(classes.items(), key=lambda kv: kv[1][0]):
        rep = spec.member(rep_index)
        stats = analyze(build_graph(rep))
        inventory.append(
            ClassEntry(
                key=key,
                digest_hex=hashlib.blake2b(key, digest_size=16).hexdigest(),
                rep_index=rep_index,
                representative=rep.to_json(),
                multiplicity=mult,
                stats=stats,
                member_indices=tuple(member_lists[key]) if member_lists else None,
            )
        )
    return CensusReport(
        family=spec,
        total_maps=total,
        distinct_classes=len(inventory),
        inventory=tuple(inventory),
        reductions_used=action,
        wall_time=time.perf_counter() - started,
        workers=workers,
    )


def fixed_point_census(spec: FamilySpec, **options) -> dict[str, int]:
    """Fixed points of one representative per class: digest -> count."""
    report = run_census(spec, **options)
    return {e.digest_hex: e.stats.fixed_point_count for e in report.inventory}


def single_component_search(p_min: int, p_max: int) -> dict[int, list[int]]:
    """For each prime p in [p_min, p_max], the shifts a for which the
    squaring-plus-a map on F_p has a one-component graph.

    Evidence gathering only: emptiness of a row is reported, not raised.
    """
    from .dynmaps import PolyMap
    from .gfq import is_prime, make_field

    out: dict[int, list[int]] = {}
    for p in range(max(p_min, 2), p_max + 1):
        if not is_prime(p):
            continue
        field = make_field(p, 1)
        hits = []
        for a in range(p):
            mp = PolyMap(field, (a, 0, 1))
            if analyze(build_graph(mp)).component_count == 1:
                hits.append(a)
        out[p] = hits
    return out


def census_signature(report: CensusReport) -> str:
    """Stable digest of the comparable part of a report (no timing meta)."""
    blob = json.dumps(report.to_json(with_meta=False), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
