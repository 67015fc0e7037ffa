import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spinsim import core


def random_system_strategy(nmax=4, oriented=True):
    @st.composite
    def build(draw):
        n = draw(st.integers(1, nmax))
        offs = [draw(st.floats(-300, 300)) for _ in range(n)]
        j = np.zeros((n, n))
        d = np.zeros((n, n))
        for i in range(n):
            for k in range(i + 1, n):
                j[i, k] = j[k, i] = draw(st.floats(0, 15))
                if oriented:
                    d[i, k] = d[k, i] = draw(st.floats(-200, 200))
        return core.SpinSystem.create("h", offs, j, d)
    return build()


def test_single_spin_hamiltonian():
    sys1 = core.SpinSystem.create("one", [100.0])
    h = core.build_hamiltonian(sys1)
    assert np.allclose(np.diag(h), [math.pi * 100, -math.pi * 100])
    assert np.allclose(h, np.diag(np.diag(h)))


def test_hamiltonian_traceless_hermitian(citrate):
    h = core.build_hamiltonian(citrate)
    assert abs(np.trace(h)) == 0.0
    assert np.array_equal(h, h.conj().T)


@settings(max_examples=40, deadline=None)
@given(random_system_strategy())
def test_hamiltonian_commutes_with_fz(sys_):
    h = core.build_hamiltonian(sys_)
    fz = core.total_operator(sys_.n, "z")
    comm = h @ fz - fz @ h
    hnorm = np.linalg.norm(h)
    assert np.linalg.norm(comm) <= 1e-12 * max(1.0, hnorm)


@settings(max_examples=40, deadline=None)
@given(random_system_strategy())
def test_weak_and_full_agree_on_diagonal(sys_):
    hw = core.build_hamiltonian(sys_, weak=True)
    hf = core.build_hamiltonian(sys_, weak=False)
    assert np.allclose(np.diag(hw), np.diag(hf), atol=1e-10)


def test_mixing_angle_citrate(citrate):
    assert core.mixing_angle_ab(citrate) == pytest.approx(7.6, abs=0.05)


def test_mixing_angle_limits():
    weak = core.SpinSystem.create("w", [1e6, -1e6], [[0, 15], [15, 0]])
    assert abs(core.mixing_angle_ab(weak)) < 1e-3
    equal = core.SpinSystem.create("e", [27.75, -27.75],
                                   [[0, 55.5], [55.5, 0]])
    assert core.mixing_angle_ab(equal) == pytest.approx(22.5, abs=1e-9)
    sym = core.SpinSystem.create("s", [0.0, 0.0], [[0, 15], [15, 0]])
    assert core.mixing_angle_ab(sym) == pytest.approx(45.0, abs=1e-9)


def test_mixing_angle_needs_two_spins():
    sys3 = core.SpinSystem.create("three", [1.0, 2.0, 3.0])
    with pytest.raises(core.SpinSystemError):
        core.mixing_angle_ab(sys3)


def test_weak_mode_gives_product_basis(citrate):
    es = core.eigensystem(citrate, weak=True)
    # every eigenvector must be a single product state (columns permute
    # the identity)
    mags = np.abs(es.vectors)
    assert np.allclose(mags.max(axis=0), 1.0, atol=1e-12)
    assert np.allclose(mags.sum(axis=0), 1.0, atol=1e-12)
    assert set(es.labels) == {"00", "01", "10", "11"}


def test_citrate_mixing_vectors(citrate, citrate_es):
    theta = math.radians(core.mixing_angle_ab(citrate))
    es = citrate_es
    v01 = es.vectors[:, es.index_of_label("01")]
    v10 = es.vectors[:, es.index_of_label("10")]
    # product order: 00, 01, 10, 11
    assert v01[1] == pytest.approx(math.cos(theta), abs=1e-9)
    assert v01[2] == pytest.approx(math.sin(theta), abs=1e-9)
    assert v10[1] == pytest.approx(-math.sin(theta), abs=1e-9)
    assert v10[2] == pytest.approx(math.cos(theta), abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(random_system_strategy())
def test_eigensystem_invariants(sys_):
    h = core.build_hamiltonian(sys_)
    es = core.diagonalize(h, sys_)
    v = es.vectors
    assert np.abs(v @ v.conj().T - np.eye(es.dim)).max() <= 1e-12
    hnorm = np.linalg.norm(h)
    for k in range(es.dim):
        res = np.linalg.norm(h @ v[:, k] - es.energies[k] * v[:, k])
        assert res <= 1e-10 * max(1.0, hnorm)
    assert abs(es.energies.sum()) <= 1e-9 * max(1.0, hnorm)
    assert sorted(es.labels) == sorted(
        core.label_of_index(k, sys_.n) for k in range(es.dim))
    # manifold support: each eigenvector lives in one M_z manifold
    pmz = core.product_mz(sys_.n)
    for k in range(es.dim):
        outside = v[pmz != es.mz[k], k]
        assert np.abs(outside).max() <= 1e-10 if outside.size else True
    # energies ascend within each manifold
    for m in set(es.mz.tolist()):
        block = es.energies[es.mz == m]
        assert np.all(np.diff(block) >= -1e-12)


def test_three_spin_manifold_sizes():
    rng = np.random.default_rng(5)
    offs = rng.uniform(-200, 200, 3)
    d = np.zeros((3, 3))
    for i in range(3):
        for k in range(i + 1, 3):
            d[i, k] = d[k, i] = rng.uniform(-150, 150)
    sys_ = core.SpinSystem.create("r3", offs, d_hz=d)
    es = core.eigensystem(sys_)
    sizes = [int(np.sum(es.mz == m)) for m in (1.5, 0.5, -0.5, -1.5)]
    assert sizes == [1, 3, 3, 1]


@pytest.mark.parametrize("n,count", [(1, 1), (2, 4), (3, 15), (4, 56),
                                     (5, 210)])
def test_sq_transition_count(n, count):
    assert core.sq_transition_count(n) == count


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_catalog_size_matches_formula(n):
    rng = np.random.default_rng(n)
    offs = rng.uniform(-200, 200, n)
    j = np.zeros((n, n))
    for i in range(n):
        for k in range(i + 1, n):
            j[i, k] = j[k, i] = rng.uniform(1, 10)
    es = core.eigensystem(core.SpinSystem.create("r", offs, j))
    cat = core.transition_catalog(es)
    brute = sum(1 for a in range(es.dim) for b in range(es.dim)
                if es.mz[a] - es.mz[b] == 1)
    assert len(cat.entries) == core.sq_transition_count(n) == brute


def test_catalog_citrate(citrate_es, citrate_cat):
    cat = citrate_cat
    assert len(cat.entries) == 4
    # descending intensity, ties by ascending frequency
    intens = [t.intensity for t in cat.entries]
    assert intens == sorted(intens, reverse=True)
    assert cat.entries[0].freq_hz < cat.entries[1].freq_hz
    # inner lines are the strong pair for an AB system
    assert cat.entries[0].intensity == pytest.approx(
        cat.entries[1].intensity, abs=1e-12)


def test_weakly_coupled_equal_intensities():
    sys_ = core.SpinSystem.create("w", [500.0, -500.0], [[0, 2], [2, 0]])
    es = core.eigensystem(sys_, weak=True)
    cat = core.transition_catalog(es)
    intens = [t.intensity for t in cat.entries]
    assert max(intens) - min(intens) <= 1e-10


def test_intensity_equalization_rate():
    # the four AB intensities approach equality at first order in J/dv
    spreads = []
    for ratio in (10.0, 100.0):
        dv = 15.0 * ratio
        sys_ = core.SpinSystem.create("ab", [dv / 2, -dv / 2],
                                      [[0, 15.0], [15.0, 0]])
        cat = core.transition_catalog(core.eigensystem(sys_))
        intens = [t.intensity for t in cat.entries]
        spread = (max(intens) - min(intens)) / np.mean(intens)
        assert spread <= 2.5 / ratio
        spreads.append(spread)
    assert spreads[1] <= spreads[0] / 5


def test_offset_shift_moves_frequencies(citrate, citrate_es, citrate_cat):
    shift = 37.0
    moved = core.SpinSystem.create(
        "c+", citrate.offset_hz + shift, citrate.j_hz, citrate.d_hz)
    cat2 = core.transition_catalog(core.eigensystem(moved))
    es = citrate_es
    es2 = core.eigensystem(moved)
    for t in citrate_cat.entries:
        pair = (es.labels[t.lower], es.labels[t.upper])
        match = [u for u in cat2.entries
                 if (es2.labels[u.lower], es2.labels[u.upper]) == pair]
        assert len(match) == 1
        assert match[0].freq_hz == pytest.approx(t.freq_hz + shift, abs=1e-9)


def test_threshold_flags(demo3_es):
    cat = core.transition_catalog(demo3_es, threshold=0.05)
    assert sum(t.observable for t in cat.entries) == 9
    cat_all = core.transition_catalog(demo3_es, threshold=0.0)
    assert all(t.observable for t in cat_all.entries)


def test_spin_file_roundtrip(demo3):
    text = core.format_spin_system(demo3)
    again = core.parse_spin_system(text)
    assert again.n == demo3.n
    assert np.allclose(again.offset_hz, demo3.offset_hz)
    assert np.allclose(again.j_hz, demo3.j_hz)
    assert np.allclose(again.d_hz, demo3.d_hz)


def test_spin_file_errors():
    with pytest.raises(core.SpinSystemError):
        core.parse_spin_system("")
    with pytest.raises(core.SpinSystemError, match="malformed"):
        core.parse_spin_system("nspins two\n")
    with pytest.raises(core.SpinSystemError, match="bad spin pair"):
        core.parse_spin_system("nspins 2\noffset_hz 0 0\nj_hz 1 5 3\n")


def test_validation_errors():
    with pytest.raises(core.SpinSystemError):
        core.SpinSystem.create("big", list(range(9)))
    with pytest.raises(core.SpinSystemError):
        core.SpinSystem.create("asym", [0, 0], [[0, 1], [2, 0]])
    with pytest.raises(core.SpinSystemError):
        core.SpinSystem.create("nan", [float("nan"), 0.0])
