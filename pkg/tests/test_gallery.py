import numpy as np
import pytest

from lplab import (
    CONVERGING,
    INCONCLUSIVE,
    NOT_CONVERGING,
    InvalidArgumentError,
    ScalarField,
    SequenceSpec,
    VectorField,
    VectorSequenceSpec,
    build_uniform_grid,
    default_probe_dictionary,
    generate,
    lp_norm,
    weak_probe,
    weak_star_probe,
)


@pytest.fixture(scope="module")
def grid():
    return build_uniform_grid([[0.0, 1.0]], 4096)


def _zero_limit(grid, m=1):
    return VectorField([ScalarField.constant(grid, 0.0) for _ in range(m)])


def test_constant_zero(grid):
    spec = SequenceSpec(kind="constant", value=0.0)
    for i in (1, 5, 50):
        assert not generate(spec, i, grid).samples.any()


def test_oscillatory_matches_formula(grid):
    spec = SequenceSpec(kind="oscillatory", base=1.0)
    f = generate(spec, 2, grid)
    assert np.allclose(f.samples, np.sin(4.0 * np.pi * grid.nodes[:, 0]))


def test_generate_is_deterministic(grid):
    spec = SequenceSpec(kind="rademacher")
    a = generate(spec, 17, grid).samples
    b = generate(spec, 17, grid).samples
    assert np.array_equal(a, b)


def test_spike_has_unit_mass(grid):
    spec = SequenceSpec(kind="spike")
    # resolution 4096 is divisible by 4: the spike is exactly 4 on [0, 1/4)
    f = generate(spec, 4, grid)
    assert lp_norm(f, 1.0) == pytest.approx(1.0, abs=1e-9)
    assert f.samples.max() == pytest.approx(4.0, abs=1e-9)
    # unit mass holds for every resolvable index, divisible or not
    for i in (3, 7, 100, 999):
        assert lp_norm(generate(spec, i, grid), 1.0) == pytest.approx(1.0, abs=1e-9)


def test_custom_table_and_missing_index(grid):
    table = {1: np.ones(grid.node_count), 3: np.zeros(grid.node_count)}
    spec = SequenceSpec(kind="custom", amplitude=2.0, table=table)
    assert np.allclose(generate(spec, 1, grid).samples, 2.0)
    with pytest.raises(InvalidArgumentError):
        generate(spec, 2, grid)


def test_aliasing_guard_refuses(grid):
    # 4096 nodes resolve at most 512 oscillatory cycles
    with pytest.raises(InvalidArgumentError):
        generate(SequenceSpec(kind="oscillatory"), 513, grid)
    coarse = build_uniform_grid([[0.0, 1.0]], 16)
    with pytest.raises(InvalidArgumentError):
        generate(SequenceSpec(kind="spike"), 17, coarse)
    # the dyadic family on 16 nodes has max depth 2: 2^2 - 1 = 3 members
    assert generate(SequenceSpec(kind="rademacher"), 3, coarse) is not None
    with pytest.raises(InvalidArgumentError):
        generate(SequenceSpec(kind="rademacher"), 4, coarse)


def test_dyadic_signs_match_sine_formula(grid):
    # the generated pattern equals sign(sin(2^i pi x)) at resolvable depths
    spec = SequenceSpec(kind="rademacher")
    for i in (1, 2, 5):
        f = generate(spec, i, grid)
        expected = np.sign(np.sin(2.0 ** i * np.pi * grid.nodes[:, 0]))
        assert np.array_equal(f.samples, expected)


def test_dyadic_family_is_orthonormal(grid):
    spec = SequenceSpec(kind="rademacher")
    members = [generate(spec, i, grid) for i in range(1, 65)]
    w = grid.weights
    for a in range(0, 64, 7):
        for b in range(a, 64, 11):
            inner = float(np.dot(w, members[a].samples * members[b].samples))
            assert inner == pytest.approx(1.0 if a == b else 0.0, abs=1e-12)
    assert all(np.all(np.abs(m.samples) == 1.0) for m in members)


def test_weak_probe_oscillatory_converges(grid):
    seq = VectorSequenceSpec([SequenceSpec(kind="oscillatory")])
    report = weak_probe(seq, _zero_limit(grid), 2.0, default_probe_dictionary(grid), 128)
    assert report.verdict == CONVERGING
    assert report.slope < 0.0


def test_weak_probe_oscillatory_pure_mean_dictionary(grid):
    # against the constant alone the pairings vanish for every index
    seq = VectorSequenceSpec([SequenceSpec(kind="oscillatory")])
    report = weak_probe(seq, _zero_limit(grid), 2.0, [ScalarField.constant(grid, 1.0)], 64)
    assert report.verdict == CONVERGING
    assert report.residuals.max() <= 1e-12


def test_weak_probe_constant_sequence(grid):
    seq = VectorSequenceSpec([SequenceSpec(kind="constant", value=3.0)])
    limit = VectorField([ScalarField.constant(grid, 3.0)])
    report = weak_probe(seq, limit, 2.0, default_probe_dictionary(grid), 32)
    assert report.verdict == CONVERGING
    assert report.residuals.max() == 0.0


def test_weak_probe_spike_not_converging(grid):
    # oracle: the spike integrates to exactly 1 against the constant 1
    seq = VectorSequenceSpec([SequenceSpec(kind="spike")])
    report = weak_probe(seq, _zero_limit(grid), 1.0, [ScalarField.constant(grid, 1.0)], 64)
    assert report.verdict == NOT_CONVERGING
    assert np.allclose(report.residuals, 1.0, atol=1e-9)


def test_weak_star_rademacher_halving_residuals(grid):
    # oracle: integral of r_i(x) x dx = -2^(-i-1), halving per level
    seq = VectorSequenceSpec([SequenceSpec(kind="rademacher")])
    x = ScalarField(grid, grid.nodes[:, 0])
    one = ScalarField.constant(grid, 1.0)
    report = weak_star_probe(seq, _zero_limit(grid), [one, x], 32)
    assert report.verdict == CONVERGING
    for i in range(1, 11):  # resolvable pure depths at 4096 nodes
        assert report.residuals[i - 1] == pytest.approx(2.0 ** (-i - 1), abs=1e-12)


def test_weak_star_oscillatory_indicator_dictionary(grid):
    # oracle: integral of sin(2 pi i x) over [0, 1/2] is (1 - cos(pi i))/(2 pi i)
    seq = VectorSequenceSpec([SequenceSpec(kind="oscillatory")])
    half = ScalarField(grid, (grid.nodes[:, 0] < 0.5).astype(float))
    report = weak_star_probe(seq, _zero_limit(grid), [half], 64)
    assert report.verdict == CONVERGING
    assert report.residuals[0] == pytest.approx(1.0 / np.pi, abs=1e-4)
    assert report.residuals[2] == pytest.approx(1.0 / (3.0 * np.pi), abs=1e-4)


def test_residuals_invariant_under_zero_dictionary_member(grid):
    seq = VectorSequenceSpec([SequenceSpec(kind="oscillatory")])
    base = default_probe_dictionary(grid)
    with_zero = base + [ScalarField.constant(grid, 0.0)]
    r1 = weak_probe(seq, _zero_limit(grid), 2.0, base, 32).residuals
    r2 = weak_probe(seq, _zero_limit(grid), 2.0, with_zero, 32).residuals
    assert np.array_equal(r1, r2)


def test_gallery_kinds_converge_at_reference_resolution(grid):
    # dyadic cancellation certifies at horizon 64; the 1/i oscillatory decay
    # needs horizon 128 to clear the hundredfold-drop criterion
    rad = VectorSequenceSpec([SequenceSpec(kind="rademacher")])
    osc = VectorSequenceSpec([SequenceSpec(kind="oscillatory")])
    dictionary = default_probe_dictionary(grid)
    assert weak_star_probe(rad, _zero_limit(grid), dictionary, 64).verdict == CONVERGING
    assert weak_probe(osc, _zero_limit(grid), 2.0, dictionary, 128).verdict == CONVERGING


def test_probe_validation(grid):
    seq = VectorSequenceSpec([SequenceSpec(kind="oscillatory")])
    with pytest.raises(InvalidArgumentError):
        weak_probe(seq, _zero_limit(grid), 2.0, default_probe_dictionary(grid), 4)
    with pytest.raises(InvalidArgumentError):
        weak_probe(seq, _zero_limit(grid), 2.0, [], 32)
    with pytest.raises(InvalidArgumentError):
        weak_probe(seq, _zero_limit(grid, m=2), 2.0, default_probe_dictionary(grid), 32)


def test_vector_probe_takes_component_maximum(grid):
    seq = VectorSequenceSpec(
        [SequenceSpec(kind="oscillatory"), SequenceSpec(kind="constant", value=0.0)]
    )
    report = weak_probe(seq, _zero_limit(grid, m=2), 2.0, default_probe_dictionary(grid), 64)
    solo = weak_probe(
        VectorSequenceSpec([SequenceSpec(kind="oscillatory")]),
        _zero_limit(grid),
        2.0,
        default_probe_dictionary(grid),
        64,
    )
    assert np.array_equal(report.residuals, solo.residuals)


def test_inconclusive_is_reachable(grid):
    # slow 1/i decay at a short horizon: neither criterion triggers
    seq = VectorSequenceSpec([SequenceSpec(kind="oscillatory")])
    x = ScalarField(grid, grid.nodes[:, 0])
    report = weak_probe(seq, _zero_limit(grid), 2.0, [x], 16)
    assert report.verdict == INCONCLUSIVE
