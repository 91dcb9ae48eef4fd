import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import rand_density, rand_unitary
from qrenyi.channels import (
    KrausChannel,
    RandomSpec,
    apply_channel,
    apply_pinching,
    depolarizing_channel,
    partial_trace_channel,
    pinching_from,
    random_channel,
    random_density,
    rank_one_pinching,
)
from qrenyi.errors import DimensionMismatch
from qrenyi.linalg import DensityOperator, loewner_leq


def test_identity_channel(rng):
    x = rand_density(rng, 3)
    np.testing.assert_allclose(apply_channel(KrausChannel((np.eye(3),)), x).data, x, atol=1e-15)


def test_depolarizing_fixed_output(rng):
    out = apply_channel(depolarizing_channel(2), DensityOperator(rand_density(rng, 2)))
    assert np.abs(out.data - np.eye(2) / 2).max() <= 1e-10


def test_partial_trace_matches_index_contraction(rng):
    rho = rand_density(rng, 4)
    out = apply_channel(partial_trace_channel(2, 2), rho).data
    ref = np.einsum("ajbj->ab", rho.reshape(2, 2, 2, 2))
    np.testing.assert_allclose(out, ref, atol=1e-14)


def test_channel_rejects_incomplete_kraus():
    with pytest.raises(ValueError):
        KrausChannel((0.5 * np.eye(2),))


def test_channel_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        apply_channel(KrausChannel((np.eye(2),)), np.eye(3) / 3)


def test_random_unitary_channel():
    ch = random_channel(RandomSpec(seed=3, dim=3, kraus_count=1))
    k = ch.kraus[0]
    assert np.abs(k @ k.conj().T - np.eye(3)).max() <= 1e-12


@pytest.mark.parametrize("k", [1, 2, 4])
def test_random_channel_completeness_and_trace(k):
    ch = random_channel(RandomSpec(seed=11, dim=3, kraus_count=k, dim_out=2 if k > 1 else None))
    gram = sum(m.conj().T @ m for m in ch.kraus)
    assert np.abs(gram - np.eye(3)).max() <= 1e-9
    out = apply_channel(ch, random_density(RandomSpec(seed=5, dim=3)))
    assert abs(out.trace() - 1) <= 1e-10


def test_random_generators_deterministic():
    a = random_density(RandomSpec(seed=42, dim=3, rank=3))
    b = random_density(RandomSpec(seed=42, dim=3, rank=3))
    assert a.data.tobytes() == b.data.tobytes()
    c1 = random_channel(RandomSpec(seed=9, dim=2, kraus_count=3))
    c2 = random_channel(RandomSpec(seed=9, dim=2, kraus_count=3))
    assert all(x.tobytes() == y.tobytes() for x, y in zip(c1.kraus, c2.kraus))


def test_random_density_shapes():
    assert random_density(RandomSpec(seed=1, dim=1, rank=1)).data[0, 0] == pytest.approx(1.0)
    pure = random_density(RandomSpec(seed=1, dim=2, rank=1)).data
    assert abs(np.trace(pure @ pure).real - 1) <= 1e-10
    from qrenyi.linalg import support_projector

    assert support_projector(random_density(RandomSpec(seed=2, dim=5, rank=3))).rank == 3


def test_pinching_grouping():
    assert pinching_from(np.eye(3)).count == 1
    p = pinching_from(np.diag([2.0, 1.0, 1.0]))
    assert p.count == 2
    assert sorted(q.rank for q in p.projectors) == [1, 2]
    assert pinching_from(np.diag([1.0, 1.0 + 1e-14])).count == 1


def test_pinching_nondegenerate_is_diagonal(rng):
    u = rand_unitary(rng, 3)
    b = u @ np.diag([3.0, 2.0, 1.0]) @ u.conj().T
    omega = rand_density(rng, 3)
    out = apply_pinching(pinching_from(b), omega).data
    ref = u @ np.diag(np.diag(u.conj().T @ omega @ u)) @ u.conj().T
    np.testing.assert_allclose(out, ref, atol=1e-12)


def test_pinching_identity_map(rng):
    omega = rand_density(rng, 3)
    np.testing.assert_allclose(apply_pinching(pinching_from(np.eye(3)), omega).data, omega, atol=1e-15)


def test_rank_one_pinching_degenerate():
    p = rank_one_pinching(np.diag([1.0, 1.0, 0.0]))
    assert p.count == 3 and all(q.rank == 1 for q in p.projectors)
    assert p.levels == pytest.approx((1.0, 1.0, 0.0))
    total = sum(q.data for q in p.projectors)
    assert np.abs(total - np.eye(3)).max() <= 1e-12


def test_rank_one_pinching_identity_sigma(rng):
    p = rank_one_pinching(np.eye(2))
    rho = rand_density(rng, 2)
    assert np.abs(sum(q.data for q in p.projectors) - np.eye(2)).max() <= 1e-12
    assert loewner_leq(rho, 2 * apply_pinching(p, rho).data)[0]


def test_rank_one_pinching_matches_grouped_when_nondegenerate(rng):
    sigma = rand_density(rng, 3)
    a, b = rank_one_pinching(sigma), pinching_from(sigma)
    for x, y in zip(a.projectors, b.projectors):
        np.testing.assert_allclose(x.data, y.data, atol=1e-12)


def _degenerate(rng, n):
    u = rand_unitary(rng, n)
    vals = rng.choice([0.5, 1.0, 2.0], size=n)
    return u @ np.diag(vals) @ u.conj().T


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 5), degenerate=st.booleans())
def test_pinching_properties(seed, n, degenerate):
    rng = np.random.default_rng(seed)
    b = _degenerate(rng, n) if degenerate else rand_density(rng, n)
    rho = rand_density(rng, n)
    pin = pinching_from(b)
    once = apply_pinching(pin, rho).data
    twice = apply_pinching(pin, once).data
    assert np.abs(once - twice).max() <= 1e-10
    assert abs(np.trace(once).real - 1) <= 1e-12
    for p in pin.projectors:
        assert np.abs(p.data @ once - once @ p.data).max() <= 1e-9
    for i, p in enumerate(pin.projectors):
        for q in pin.projectors[i + 1:]:
            assert np.abs(p.data @ q.data).max() <= 1e-9
    assert loewner_leq(rho, pin.count * once)[1] >= -1e-9
    r1 = rank_one_pinching(b)
    assert loewner_leq(rho, n * apply_pinching(r1, rho).data)[1] >= -1e-9


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**62), k=st.integers(1, 4), n=st.integers(1, 4))
def test_generated_channels_complete(seed, k, n):
    ch = random_channel(RandomSpec(seed=seed, dim=n, kraus_count=k))
    assert np.abs(sum(m.conj().T @ m for m in ch.kraus) - np.eye(n)).max() <= 1e-9
