"""Deviation density matrices and the primitive evolutions acting on them.

Everything lives in the eigenbasis of the spin system: transition-selective
pulses are 2x2 rotations on eigenstate pairs, gradient crushers zero the
off-diagonal, free evolution is a diagonal phase map, and hard
(non-selective) pulses are built in the product basis as a kron product of
single-spin rotations and conjugated into the eigenbasis once.

Rotation convention: U = exp(-i * theta * I_phi) with phase x -> phi = 0,
y -> 90 deg.  For a selective pulse the 2x2 block is written in
(lower, upper) order, lower being the level in the higher-M_z manifold, so

    U_block = [[cos(t/2),            -i e^{-i phi} sin(t/2)],
               [-i e^{+i phi} sin(t/2),            cos(t/2)]].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import EigenSystem, spin_operator

HERMITICITY_TOL = 1e-12

_AXIS_NAMES = {"x": 0.0, "y": 90.0, "-x": 180.0, "-y": 270.0}


@dataclass(frozen=True)
class PulseAxis:
    """Transverse r.f. phase in degrees, normalized to [0, 360)."""

    phase: float

    def __post_init__(self):
        object.__setattr__(self, "phase", self.phase % 360.0)

    @classmethod
    def from_name(cls, name: str) -> "PulseAxis":
        if name not in _AXIS_NAMES:
            raise ValueError(f"unknown pulse axis {name!r}")
        return cls(_AXIS_NAMES[name])

    @property
    def name(self) -> str | None:
        for nm, deg in _AXIS_NAMES.items():
            if math.isclose(self.phase, deg, abs_tol=1e-12):
                return nm
        return None


class DynamicsError(ValueError):
    pass


@dataclass
class DeviationDensityMatrix:
    """Traceless Hermitian state expressed in the eigenbasis of ``es``."""

    mat: np.ndarray
    es: EigenSystem

    def copy(self) -> "DeviationDensityMatrix":
        return DeviationDensityMatrix(self.mat.copy(), self.es)

    def validate(self, require_traceless: bool = True) -> None:
        if np.linalg.norm(self.mat - self.mat.conj().T) > HERMITICITY_TOL * max(
                1.0, np.linalg.norm(self.mat)):
            raise DynamicsError("density matrix is not Hermitian")
        if require_traceless and abs(np.trace(self.mat)) > 1e-12 * max(
                1.0, np.linalg.norm(self.mat)):
            raise DynamicsError("deviation density matrix must be traceless")

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.mat)).copy()


def equilibrium_deviation(es: EigenSystem) -> DeviationDensityMatrix:
    """High-temperature equilibrium deviation of a homonuclear system.

    For like spins the lab-frame energy is dominated by the common Larmor
    term, so deviation populations follow the total magnetic quantum
    number of each level.  Normalized so the max-min population difference
    equals the spin count n (M_z already spans exactly n).
    """
    pops = es.mz.astype(float).copy()
    span = pops.max() - pops.min()
    if span > 0:
        pops *= es.n / span
    return DeviationDensityMatrix(np.diag(pops).astype(complex), es)


def _canonical_pair(es: EigenSystem, r: int, s: int) -> tuple[int, int]:
    if es.mz[r] == es.mz[s] + 1:
        return r, s
    if es.mz[s] == es.mz[r] + 1:
        return s, r
    raise DynamicsError(
        f"states {r} and {s} are not single-quantum connected; "
        "a transition-selective pulse cannot drive them")


def selective_pulse_unitary(es: EigenSystem, r: int, s: int,
                            theta_deg: float, phase_deg: float) -> np.ndarray:
    """Rotation confined to the 2-level subspace of one allowed transition.

    (r, s) must differ by one quantum of M_z; the block orientation is
    canonicalized to (lower, upper) regardless of argument order.
    """
    lo, up = _canonical_pair(es, r, s)
    th = math.radians(theta_deg)
    ph = math.radians(phase_deg)
    c, sn = math.cos(th / 2), math.sin(th / 2)
    u = np.eye(es.dim, dtype=complex)
    u[lo, lo] = c
    u[up, up] = c
    u[lo, up] = -1j * np.exp(-1j * ph) * sn
    u[up, lo] = -1j * np.exp(+1j * ph) * sn
    return u


def hard_pulse_unitary(es: EigenSystem, theta_deg: float,
                       phase_deg: float) -> np.ndarray:
    """Non-selective pulse exp(-i theta F_phi), exact, in the eigenbasis.

    F_phi = sum_k (I_kx cos phi + I_ky sin phi); the single-spin rotations
    commute, so the product-basis unitary is an exact kron product.
    """
    th = math.radians(theta_deg)
    ph = math.radians(phase_deg)
    c, sn = math.cos(th / 2), math.sin(th / 2)
    u1 = np.array([[c, -1j * np.exp(-1j * ph) * sn],
                   [-1j * np.exp(1j * ph) * sn, c]], dtype=complex)
    u = np.array([[1.0 + 0j]])
    for _ in range(es.n):
        u = np.kron(u, u1)
    return es.vectors.conj().T @ u @ es.vectors


def apply_unitary(rho: DeviationDensityMatrix, u: np.ndarray) -> DeviationDensityMatrix:
    return DeviationDensityMatrix(u @ rho.mat @ u.conj().T, rho.es)


def crush_gradient(rho: DeviationDensityMatrix) -> DeviationDensityMatrix:
    """Idealized field-gradient crusher: zero every off-diagonal element."""
    return DeviationDensityMatrix(np.diag(np.diag(rho.mat)), rho.es)


def free_evolution(es: EigenSystem, rho: DeviationDensityMatrix,
                   t_seconds: float) -> DeviationDensityMatrix:
    """rho_kl <- rho_kl * exp(-i (E_k - E_l) t); populations are invariant."""
    if t_seconds < 0:
        raise DynamicsError("evolution time must be nonnegative")
    phase = np.exp(-1j * es.energies * t_seconds)
    return DeviationDensityMatrix(
        (phase[:, None] * rho.mat) * np.conj(phase)[None, :], es)


def selective_population_update(p_i: float, p_j: float,
                                theta_deg: float) -> tuple[float, float]:
    """Closed-form population transfer of a selective pulse of angle theta.

    p_i' = p_i cos^2(t/2) + p_j sin^2(t/2) and symmetrically for p_j';
    must agree with conjugation by the pulse unitary followed by a crush.
    """
    c2 = math.cos(math.radians(theta_deg) / 2) ** 2
    s2 = 1.0 - c2
    return p_i * c2 + p_j * s2, p_j * c2 + p_i * s2


def pure_part(rho: DeviationDensityMatrix) -> tuple[float, np.ndarray]:
    """Extract the pure component of a pseudopure deviation.

    Diagonalizes rho and returns (coefficient, eigenvector) of the outlier
    eigenvalue, i.e. the one farthest from the median.  For a deviation
    c*(|psi><psi| - I/2^n) this recovers (c, |psi>) up to phase and the
    identity offset.
    """
    w, v = np.linalg.eigh(rho.mat)
    med = float(np.median(w))
    k = int(np.argmax(np.abs(w - med)))
    coeff = float(w[k] - med)
    vec = v[:, k]
    j = int(np.argmax(np.abs(vec)))
    if abs(vec[j]) > 0:
        vec = vec * np.conj(vec[j] / abs(vec[j]))
    return coeff, vec


def partial_trace_labels(rho: DeviationDensityMatrix, keep: int) -> np.ndarray:
    """Reduced 2x2 matrix of one label qubit, tracing over the others.

    Treats the eigenstates as computational basis states via their labels
    (the natural reading for strongly coupled systems, where the labels
    *are* the qubits).
    """
    es = rho.es
    out = np.zeros((2, 2), dtype=complex)
    perm = np.empty(es.dim, dtype=int)
    for k, lab in enumerate(es.labels):
        perm[int(lab, 2)] = k
    for a in range(2):
        for b in range(2):
            for rest in range(2 ** (es.n - 1)):
                la = _insert_bit(rest, keep, a, es.n)
                lb = _insert_bit(rest, keep, b, es.n)
                out[a, b] += rho.mat[perm[la], perm[lb]]
    return out


def _insert_bit(rest: int, pos: int, bit: int, n: int) -> int:
    high = rest >> (n - 1 - pos)
    low = rest & ((1 << (n - 1 - pos)) - 1)
    return (high << (n - pos)) | (bit << (n - 1 - pos)) | low


# ---------------------------------------------------------------------------
# text serialization: header "dim <2^n>", rows "k l re im" (1-based),
# entries below 1e-14 in magnitude omitted

def format_state(rho: DeviationDensityMatrix) -> str:
    dim = rho.es.dim
    out = [f"dim {dim}"]
    for k in range(dim):
        for l in range(dim):
            z = rho.mat[k, l]
            if abs(z) >= 1e-14:
                out.append(f"{k + 1} {l + 1} {z.real:.12g} {z.imag:.12g}")
    return "\n".join(out) + "\n"


def parse_state(text: str, es: EigenSystem) -> DeviationDensityMatrix:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0].startswith("dim"):
        raise DynamicsError("state text must start with a 'dim' header")
    dim = int(lines[0].split()[1])
    if dim != es.dim:
        raise DynamicsError(f"state dimension {dim} does not match system {es.dim}")
    mat = np.zeros((dim, dim), dtype=complex)
    for ln in lines[1:]:
        k, l, re, im = ln.split()
        mat[int(k) - 1, int(l) - 1] = float(re) + 1j * float(im)
    return DeviationDensityMatrix(mat, es)


def save_state(rho: DeviationDensityMatrix, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_state(rho))


def load_state(path, es: EigenSystem) -> DeviationDensityMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_state(fh.read(), es)
