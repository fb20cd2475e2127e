"""Census engine: exact counts, orbit reductions, parallelism,
checkpointing, and the auxiliary searches."""

import itertools

import pytest

from dyncensus.census import (
    BudgetExceededError,
    CheckpointMismatchError,
    ReductionNotApplicableError,
    action_applicable,
    census_signature,
    fixed_point_census,
    reduce_by_affine,
    reduce_by_frobenius,
    reduce_by_scaling,
    resolve_reduction,
    run_census,
    single_component_search,
)
from dyncensus.dynmaps import FamilySpec
from dyncensus.funcgraph import are_isomorphic_oracle, build_graph
from dyncensus.gfq import make_field
from dyncensus.theory import sparse_scaling_bound

F3 = make_field(3, 1)
F4 = make_field(2, 2)
F5 = make_field(5, 1)
F7 = make_field(7, 1)
F9 = make_field(3, 2)


def oracle_class_count(spec):
    """Partition the family's graphs with the brute-force oracle only;
    no canonical keys anywhere."""
    classes = []
    for mp in spec.members():
        g = build_graph(mp)
        for rep in classes:
            if are_isomorphic_oracle(rep, g):
                break
        else:
            classes.append(g)
    return len(classes)


def test_linear_census_matches_oracle_and_formula():
    spec = FamilySpec(kind="linear", field=F7)
    report = run_census(spec)
    assert report.total_maps == 42
    assert report.distinct_classes == 5  # tau(6) + 1
    assert report.distinct_classes == oracle_class_count(spec)
    assert sum(e.multiplicity for e in report.inventory) == 42


def test_power_squaring_family_is_one_class():
    for field in (F5, F7, F9):
        report = run_census(FamilySpec(kind="power", field=field, d=2))
        assert report.distinct_classes == 1


def test_frobenius_affine_norm1_f4():
    report = run_census(FamilySpec(kind="frobenius-affine", field=F4, norm_filter="norm1"))
    assert report.distinct_classes == 2
    assert sorted(e.stats.fixed_point_count for e in report.inventory) == [0, 2]


def test_degree2_census_oracle_agreement():
    spec = FamilySpec(kind="all-degree-d", field=F5, d=2)
    report = run_census(spec)
    assert report.distinct_classes == oracle_class_count(spec)
    assert report.distinct_classes <= 5


REDUCTION_CASES = [
    (FamilySpec(kind="linear", field=F5), ["scaling", "affine"]),
    (FamilySpec(kind="all-degree-d", field=F5, d=2), ["scaling", "affine"]),
    (FamilySpec(kind="all-degree-d", field=F3, d=3), ["scaling", "affine"]),
    (FamilySpec(kind="power", field=F9, d=3), ["scaling", "frobenius"]),
    (FamilySpec(kind="sparse", field=F9, exps=(2, 3)), ["scaling", "frobenius"]),
    (FamilySpec(kind="linearised", field=F4, n=2), ["scaling"]),
    (FamilySpec(kind="frobenius-affine", field=F9), ["scaling", "affine"]),
    (FamilySpec(kind="rational", field=F3, m=2, n=0, model="projective"),
     ["scaling", "affine"]),
    (FamilySpec(kind="rational", field=F3, m=1, n=1, model="projective"), ["scaling"]),
    (FamilySpec(kind="rational", field=F3, m=0, n=2, alpha=0), ["scaling"]),
]


@pytest.mark.parametrize("spec,actions", REDUCTION_CASES)
def test_reductions_preserve_counts_and_partition(spec, actions):
    baseline = run_census(spec, reduce="none")
    assert sum(e.multiplicity for e in baseline.inventory) == spec.size()
    for action in actions:
        if action == "frobenius" and spec.kind != "sparse":
            continue
        reduced = run_census(spec, reduce=action)
        assert reduced.distinct_classes == baseline.distinct_classes, action
        assert sum(e.multiplicity for e in reduced.inventory) == spec.size(), action


def test_reduction_closure_probes():
    """The applicability matrix matches actual conjugation closure."""
    cases = [
        (FamilySpec(kind="all-degree-d", field=F5, d=2), "affine"),
        (FamilySpec(kind="linear", field=F5), "affine"),
        (FamilySpec(kind="frobenius-affine", field=F9), "affine"),
        (FamilySpec(kind="sparse", field=F9, exps=(2, 3)), "scaling"),
        (FamilySpec(kind="linearised", field=F4, n=2), "scaling"),
        (FamilySpec(kind="power", field=F7, d=4), "scaling"),
    ]
    for spec, action in cases:
        assert action_applicable(spec, action)
        for mp in itertools.islice(spec.members(), 12):
            for lam in range(1, spec.field.q):
                mus = range(spec.field.q) if action == "affine" else (0,)
                for mu in mus:
                    assert spec.contains(mp.conjugate(lam, mu))

    # translation pushes these out of their families
    lin = FamilySpec(kind="linearised", field=F4, n=1)
    assert not action_applicable(lin, "affine")
    assert any(
        not lin.contains(mp.conjugate(1, mu))
        for mp in lin.members()
        for mu in range(1, 4)
    )
    sparse = FamilySpec(kind="sparse", field=F5, exps=(2,))
    assert not action_applicable(sparse, "affine")
    assert any(
        not sparse.contains(mp.conjugate(1, mu))
        for mp in sparse.members()
        for mu in range(1, 5)
    )


def test_unsound_reduction_requests_raise():
    with pytest.raises(ReductionNotApplicableError):
        run_census(FamilySpec(kind="sparse", field=F9, exps=(2, 3)), reduce="affine")
    with pytest.raises(ReductionNotApplicableError):
        run_census(FamilySpec(kind="linearised", field=F4, n=1), reduce="affine")
    with pytest.raises(ReductionNotApplicableError):
        list(reduce_by_affine(FamilySpec(kind="power", field=F5, d=2)))
    # affine-model rational maps with a nonzero pole image admit no reduction
    spec = FamilySpec(kind="rational", field=F5, m=0, n=2, alpha=3)
    with pytest.raises(ReductionNotApplicableError):
        run_census(spec, reduce="scaling")
    assert resolve_reduction(spec, "auto") == "none"


def test_resolve_auto_choices():
    assert resolve_reduction(FamilySpec(kind="all-degree-d", field=F5, d=2), "auto") == "affine"
    assert resolve_reduction(FamilySpec(kind="sparse", field=F9, exps=(2,)), "auto") == "scaling"
    assert resolve_reduction(FamilySpec(kind="linearised", field=F4, n=1), "auto") == "scaling"
    assert (
        resolve_reduction(
            FamilySpec(kind="rational", field=F5, m=3, n=1, model="projective"), "auto"
        )
        == "affine"
    )
    assert (
        resolve_reduction(FamilySpec(kind="rational", field=F5, m=1, n=1, alpha=0), "auto")
        == "scaling"
    )


def test_scaling_orbits_satisfy_burnside():
    """Orbit count from enumeration equals the average fixed-map count,
    both computed by brute force."""
    for exps in [(2,), (3,), (2, 3), (0, 2)]:
        spec = FamilySpec(kind="sparse", field=F9, exps=exps)
        reps = list(reduce_by_scaling(spec))
        assert sum(size for _, _, size in reps) == spec.size()
        fixed_total = 0
        for lam in range(1, 9):
            for mp in spec.members():
                if mp.conjugate(lam, 0).coeffs == mp.coeffs:
                    fixed_total += 1
        assert fixed_total % 8 == 0
        assert len(reps) == fixed_total // 8
        assert len(reps) == sparse_scaling_bound(9, exps).value


def test_scaling_orbit_of_squares_over_f5_is_transitive():
    # a X^2 under scaling: a -> lam a, a single orbit of all 4 coefficients
    spec = FamilySpec(kind="sparse", field=F5, exps=(2,))
    reps = list(reduce_by_scaling(spec))
    assert len(reps) == 1
    assert reps[0][2] == 4


def test_affine_orbit_sizes_divide_group_order():
    spec = FamilySpec(kind="all-degree-d", field=F5, d=2)
    for _, mp, size in reduce_by_affine(spec):
        assert (5 * 4) % size == 0  # orbit-stabilizer


def test_affine_reduction_normalizes_quadratics():
    # minimal-encoding representatives of degree-2 orbits are X^2 + c
    spec = FamilySpec(kind="all-degree-d", field=F5, d=2)
    reps = [mp.coeffs for _, mp, _ in reduce_by_affine(spec)]
    assert reps == [(c, 0, 1) for c in range(5)]


def test_scaling_fixed_point_condition():
    # a map is fixed by lam exactly when lam^(e-1) = 1 for all its exponents
    spec = FamilySpec(kind="sparse", field=F9, exps=(3, 5))
    for mp in itertools.islice(spec.members(), 10):
        for lam in range(1, 9):
            fixed = mp.conjugate(lam, 0).coeffs == mp.coeffs
            condition = all(F9.pow(lam, e - 1) == 1 for e in (3, 5))
            assert fixed == condition


def test_frobenius_orbit_sizes():
    spec = FamilySpec(kind="sparse", field=F4, exps=(2,))
    reps = list(reduce_by_frobenius(spec))
    # F_4^*: {1} is fixed, {omega, omega+1} is one 2-cycle
    assert sorted(size for _, _, size in reps) == [1, 2]
    prime_spec = FamilySpec(kind="sparse", field=F5, exps=(2,))
    passthrough = list(reduce_by_frobenius(prime_spec))  # k = 1: no-op
    assert len(passthrough) == prime_spec.size()
    assert all(size == 1 for _, _, size in passthrough)


def test_worker_determinism():
    for spec in [
        FamilySpec(kind="all-degree-d", field=F5, d=3),
        FamilySpec(kind="rational", field=F3, m=2, n=1, model="projective"),
    ]:
        serial = run_census(spec, workers=1)
        parallel = run_census(spec, workers=3)
        assert census_signature(serial) == census_signature(parallel)
        assert serial.to_json(with_meta=False) == parallel.to_json(with_meta=False)


def test_budget_and_checkpoint_resume(tmp_path):
    spec = FamilySpec(kind="all-degree-d", field=F5, d=2)
    ckpt = str(tmp_path / "census.ckpt")
    with pytest.raises(BudgetExceededError) as exc_info:
        run_census(spec, budget=37 * 5, checkpoint_path=ckpt)
    assert exc_info.value.checkpoint_path == ckpt
    full = run_census(spec)
    resumed = run_census(spec, resume_from=ckpt)
    assert census_signature(full) == census_signature(resumed)


def test_budget_precheck_parallel():
    spec = FamilySpec(kind="all-degree-d", field=F5, d=2)
    with pytest.raises(BudgetExceededError):
        run_census(spec, workers=2, budget=10)


def test_checkpoint_mismatch(tmp_path):
    spec = FamilySpec(kind="all-degree-d", field=F5, d=2)
    ckpt = str(tmp_path / "census.ckpt")
    with pytest.raises(BudgetExceededError):
        run_census(spec, budget=37 * 5, checkpoint_path=ckpt)
    other = FamilySpec(kind="all-degree-d", field=F5, d=3)
    with pytest.raises(CheckpointMismatchError):
        run_census(other, resume_from=ckpt)


def test_periodic_checkpoints_are_written(tmp_path):
    spec = FamilySpec(kind="linear", field=F5)
    ckpt = str(tmp_path / "steps.ckpt")
    run_census(spec, checkpoint_path=ckpt, checkpoint_every=7)
    resumed = run_census(spec, resume_from=ckpt)
    assert resumed.distinct_classes == run_census(spec).distinct_classes


def test_single_component_search():
    table = single_component_search(2, 13)
    assert list(table) == [2, 3, 5, 7, 11, 13]
    assert table[2] == [1]
    assert table[3] == [1, 2]
    for p, hits in table.items():
        assert all(0 <= a < p for a in hits)


def test_fixed_point_census_frobenius_affine():
    counts = fixed_point_census(FamilySpec(kind="frobenius-affine", field=F9))
    assert sorted(counts.values()) == [0, 1, 3]
    norm1 = fixed_point_census(
        FamilySpec(kind="frobenius-affine", field=F9, norm_filter="norm1")
    )
    assert sorted(norm1.values()) == [0, 3]
    other = fixed_point_census(
        FamilySpec(kind="frobenius-affine", field=F9, norm_filter="normne1")
    )
    assert sorted(other.values()) == [1]


def test_linear_map_without_fixed_points():
    report = run_census(FamilySpec(kind="linear", field=F5))
    shift_class = next(
        e for e in report.inventory if e.representative["coeffs"] == [1, 1]
    )
    assert shift_class.stats.fixed_point_count == 0


def test_report_json_shape():
    report = run_census(FamilySpec(kind="linear", field=F3))
    blob = report.to_json()
    assert blob["schema"] == 1
    assert blob["total"] == 6 and blob["classes"] == len(blob["inventory"])
    assert {"digest", "map", "multiplicity", "stats", "rep_index"} <= set(
        blob["inventory"][0]
    )
    assert "meta" in blob and "meta" not in report.to_json(with_meta=False)


def test_alpha_sensitivity_is_observable_not_asserted():
    """Pole-image choice may change the count; bounds must hold either way."""
    from dyncensus.theory import verify_report

    for alpha in (0, 1):
        spec = FamilySpec(kind="rational", field=F5, m=0, n=2, alpha=alpha)
        report = run_census(spec)
        assert verify_report(report).overall
