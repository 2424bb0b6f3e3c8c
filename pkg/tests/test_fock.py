"""Fock-space states and matrix-free operator application."""
import numpy as np
import pytest

from kponet.fock import (
    FockCutoff,
    QuantumState,
    apply_hopping,
    apply_mode_operator,
    mode_occupations,
    photon_parity,
    single_photon_state,
    top_level_populations,
    vacuum_state,
)


def dense_single_mode(op: str, L: int) -> np.ndarray:
    a = np.diag(np.sqrt(np.arange(1, L, dtype=float)), 1)
    ad = a.T
    return {
        "a": a,
        "adag": ad,
        "n": ad @ a,
        "a2": a @ a,
        "adag2": ad @ ad,
        "kerr": ad @ ad @ a @ a,
        "x": a + ad,
    }[op]


def dense_embed(mat: np.ndarray, mode: int, n_modes: int, L: int) -> np.ndarray:
    out = np.array([[1.0]])
    for m in range(n_modes):
        out = np.kron(out, mat if m == mode else np.eye(L))
    return out


def fock_basis_state(occs, L):
    N = len(occs)
    amps = np.zeros(L ** N, dtype=complex)
    idx = 0
    for n in occs:
        idx = idx * L + n
    amps[idx] = 1.0
    return QuantumState(amps, N, FockCutoff(L))


def test_cutoff_validation():
    with pytest.raises(ValueError):
        FockCutoff(1)
    assert FockCutoff().levels == 15


def test_vacuum_state():
    v = vacuum_state(1)
    assert v.amplitudes[0] == 1.0 and np.count_nonzero(v.amplitudes) == 1
    v4 = vacuum_state(4)
    assert v4.dim == 50625
    assert v4.norm() == 1.0


def test_single_photon_state():
    s = single_photon_state(1, 1)
    assert s.amplitudes[1] == 1.0
    s2 = single_photon_state(2, 2, FockCutoff(3))
    # (n1, n2) = (0, 1) sits at flat index 1 with mode 1 slowest
    assert s2.amplitudes[1] == 1.0
    assert abs(vacuum_state(2, FockCutoff(3)).inner(s2)) == 0.0
    with pytest.raises(ValueError):
        single_photon_state(2, 3)


def test_index_convention_mode_one_slowest():
    st = fock_basis_state([2, 1], 4)
    assert st.amplitudes[2 * 4 + 1] == 1.0
    assert st.tensor()[2, 1] == 1.0


def test_mode_operator_actions():
    L = 6
    one = fock_basis_state([1], L)
    out = apply_mode_operator(one, 1, "a")
    assert np.allclose(out.amplitudes, vacuum_state(1, FockCutoff(L)).amplitudes)
    for n in range(L):
        st = fock_basis_state([n], L)
        num = apply_mode_operator(st, 1, "n")
        assert np.allclose(num.amplitudes, n * st.amplitudes)
    three = fock_basis_state([3], L)
    kerr = apply_mode_operator(three, 1, "kerr")
    assert np.allclose(kerr.amplitudes, 6.0 * three.amplitudes)


def test_unknown_operator_rejected():
    with pytest.raises(ValueError):
        apply_mode_operator(vacuum_state(1), 1, "b")


def test_commutator_below_cutoff():
    L = 7
    for n in range(L - 1):
        st = fock_basis_state([n], L)
        lhs = apply_mode_operator(apply_mode_operator(st, 1, "adag"), 1, "a")
        rhs = apply_mode_operator(apply_mode_operator(st, 1, "a"), 1, "adag")
        diff = lhs.amplitudes - rhs.amplitudes
        assert np.allclose(diff, st.amplitudes), f"commutator fails at n={n}"


def test_hopping_coefficients():
    st = fock_basis_state([0, 1], 4)
    out = apply_hopping(st, 1, 2)
    expect = fock_basis_state([1, 0], 4)
    assert np.allclose(out.amplitudes, expect.amplitudes)

    st = fock_basis_state([1, 2], 4)
    out = apply_hopping(st, 1, 2)
    expect = fock_basis_state([2, 1], 4)
    assert np.allclose(out.amplitudes, 2.0 * expect.amplitudes)


def test_hopping_rejects_diagonal():
    with pytest.raises(ValueError):
        apply_hopping(vacuum_state(2), 1, 1)


@pytest.mark.parametrize("op", ["a", "adag", "n", "a2", "adag2", "kerr", "x"])
@pytest.mark.parametrize("L,N", [(4, 2), (5, 2), (3, 3)])
def test_matrix_free_matches_dense(op, L, N):
    rng = np.random.default_rng(hash((op, L, N)) % 2 ** 31)
    amps = rng.standard_normal(L ** N) + 1j * rng.standard_normal(L ** N)
    st = QuantumState(amps / np.linalg.norm(amps), N, FockCutoff(L))
    for mode in range(1, N + 1):
        got = apply_mode_operator(st, mode, op).amplitudes
        want = dense_embed(dense_single_mode(op, L), mode - 1, N, L) @ st.amplitudes
        assert np.abs(got - want).max() < 1e-12


def test_hopping_matches_dense_and_adjoint():
    L, N = 4, 2
    rng = np.random.default_rng(11)
    a = dense_single_mode("a", L)
    ad = dense_single_mode("adag", L)
    dense = np.kron(ad, a)  # a_1^dag a_2
    for _ in range(5):
        x = rng.standard_normal(L ** N) + 1j * rng.standard_normal(L ** N)
        y = rng.standard_normal(L ** N) + 1j * rng.standard_normal(L ** N)
        phi = QuantumState(x / np.linalg.norm(x), N, FockCutoff(L))
        psi = QuantumState(y / np.linalg.norm(y), N, FockCutoff(L))
        h12 = apply_hopping(psi, 1, 2)
        assert np.abs(h12.amplitudes - dense @ psi.amplitudes).max() < 1e-12
        # <phi|a1^dag a2|psi> == conj(<psi|a2^dag a1|phi>)
        lhs = phi.inner(h12)
        rhs = psi.inner(apply_hopping(phi, 2, 1))
        assert abs(lhs - np.conj(rhs)) < 1e-12


def test_occupations_and_leakage():
    st = fock_basis_state([2, 3], 5)
    occ = mode_occupations(st)
    assert np.allclose(occ, [2.0, 3.0])
    top = top_level_populations(st)
    assert np.allclose(top, [0.0, 0.0])
    edge = fock_basis_state([4, 0], 5)
    assert np.allclose(top_level_populations(edge), [1.0, 0.0])


def test_photon_parity():
    assert photon_parity(vacuum_state(2, FockCutoff(3))) == 1.0
    assert photon_parity(single_photon_state(2, 1, FockCutoff(3))) == -1.0
    st = fock_basis_state([1, 1], 3)
    assert photon_parity(st) == 1.0
