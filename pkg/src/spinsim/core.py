"""Spin Hamiltonians, eigensystems and transition catalogs.

Builds rotating-frame Hamiltonians for systems of up to 8 coupled spin-1/2
nuclei (chemical-shift offsets, scalar J couplings, effective residual
dipolar couplings), diagonalizes them blockwise over total-M_z manifolds,
labels the eigenstates with n-bit strings by maximum overlap with product
states, and enumerates the single-quantum transitions with their
frequencies and intensities.

Unit conventions
----------------
All user-facing frequencies (offsets, couplings, transition frequencies)
are in Hz.  Hamiltonians and eigenvalues are in rad/s; conversion happens
only inside Hamiltonian assembly.  Bit 0 of a label is the m = +1/2 (alpha)
single-spin state, so the all-zeros label sits in the highest-M_z manifold.
Eigenstates are ordered by M_z manifold (descending M_z) and by ascending
energy inside each manifold.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

MAX_SPINS = 8

_SX = np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex)
_SY = np.array([[0.0, -0.5j], [0.5j, 0.0]], dtype=complex)
_SZ = np.array([[0.5, 0.0], [0.0, -0.5]], dtype=complex)
_SM = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)  # I- : |alpha> -> |beta>
_ID2 = np.eye(2, dtype=complex)
_AXES = {"x": _SX, "y": _SY, "z": _SZ, "-": _SM}


class SpinSystemError(ValueError):
    """Invalid spin-system definition (shape, symmetry or range violations)."""


def spin_operator(n: int, i: int, axis: str) -> np.ndarray:
    """Single-spin operator I_{i,axis} embedded in the n-spin product space.

    Spin indices are 0-based; spin 0 is the most significant label bit.
    """
    op = np.array([[1.0 + 0j]])
    for k in range(n):
        op = np.kron(op, _AXES[axis] if k == i else _ID2)
    return op


def total_operator(n: int, axis: str) -> np.ndarray:
    """F_axis = sum_i I_{i,axis}."""
    dim = 2**n
    out = np.zeros((dim, dim), dtype=complex)
    for i in range(n):
        out += spin_operator(n, i, axis)
    return out


def product_mz(n: int) -> np.ndarray:
    """Total magnetic quantum number of each product basis state, label order."""
    return np.array([(n - 2 * bin(k).count("1")) / 2.0 for k in range(2**n)])


def label_of_index(k: int, n: int) -> str:
    return format(k, f"0{n}b")


@dataclass
class SpinSystem:
    """Declarative description of n coupled spin-1/2 nuclei.

    offset_hz are chemical-shift offsets relative to the carrier; j_hz and
    d_hz are symmetric coupling matrices with zero diagonal (d_hz holds the
    effective residual dipolar coupling directly, already including any
    order-parameter scaling).
    """

    name: str
    n: int
    offset_hz: np.ndarray
    j_hz: np.ndarray
    d_hz: np.ndarray

    @classmethod
    def create(cls, name, offsets, j_hz=None, d_hz=None) -> "SpinSystem":
        offsets = np.asarray(offsets, dtype=float)
        n = offsets.size
        j = np.zeros((n, n)) if j_hz is None else np.asarray(j_hz, dtype=float)
        d = np.zeros((n, n)) if d_hz is None else np.asarray(d_hz, dtype=float)
        sys = cls(name=name, n=n, offset_hz=offsets, j_hz=j, d_hz=d)
        sys.validate()
        return sys

    def validate(self) -> None:
        if not 1 <= self.n <= MAX_SPINS:
            raise SpinSystemError(f"spin count {self.n} outside 1..{MAX_SPINS}")
        if self.offset_hz.shape != (self.n,):
            raise SpinSystemError("offset_hz must have one entry per spin")
        for nm, m in (("j_hz", self.j_hz), ("d_hz", self.d_hz)):
            if m.shape != (self.n, self.n):
                raise SpinSystemError(f"{nm} must be {self.n}x{self.n}")
            if not np.allclose(m, m.T, atol=1e-12):
                raise SpinSystemError(f"{nm} must be symmetric")
            if np.any(np.abs(np.diag(m)) > 0):
                raise SpinSystemError(f"{nm} must have zero diagonal")
        for arr in (self.offset_hz, self.j_hz, self.d_hz):
            if not np.all(np.isfinite(arr)):
                raise SpinSystemError("non-finite value in spin system")


def build_hamiltonian(sys: SpinSystem, weak: bool = False) -> np.ndarray:
    """Rotating-frame Hamiltonian in rad/s.

    H = sum_i 2*pi*offset_i I_iz
      + sum_{i<j} 2*pi*J_ij (I_i.I_j)            (weak=False)
        or 2*pi*J_ij I_iz I_jz                   (weak=True)
      + sum_{i<j} 2*pi*D_ij (3 I_iz I_jz - I_i.I_j)

    The dipolar term keeps its truncated full form in both modes.
    """
    sys.validate()
    n = sys.n
    dim = 2**n
    h = np.zeros((dim, dim), dtype=complex)
    iz = [spin_operator(n, i, "z") for i in range(n)]
    ix = [spin_operator(n, i, "x") for i in range(n)]
    iy = [spin_operator(n, i, "y") for i in range(n)]
    for i in range(n):
        h += 2 * math.pi * sys.offset_hz[i] * iz[i]
    for i in range(n):
        for j in range(i + 1, n):
            zz = iz[i] @ iz[j]
            if sys.j_hz[i, j] != 0.0:
                if weak:
                    h += 2 * math.pi * sys.j_hz[i, j] * zz
                else:
                    dot = zz + ix[i] @ ix[j] + iy[i] @ iy[j]
                    h += 2 * math.pi * sys.j_hz[i, j] * dot
            if sys.d_hz[i, j] != 0.0:
                dot = zz + ix[i] @ ix[j] + iy[i] @ iy[j]
                h += 2 * math.pi * sys.d_hz[i, j] * (3 * zz - dot)
    return h


def mixing_angle_ab(sys: SpinSystem) -> float:
    """Strong-coupling mixing angle of a two-spin system, in degrees.

    theta = 1/2 * atan2(2*pi*J_AB, omega_A - omega_B), folded into
    (-45, +45].  Zero in the weak-coupling limit, 22.5 deg when the
    coupling equals the offset difference, 45 deg for equivalent shifts.
    """
    if sys.n != 2:
        raise SpinSystemError("mixing angle is defined for two-spin systems")
    domega = 2 * math.pi * (sys.offset_hz[0] - sys.offset_hz[1])
    theta = 0.5 * math.degrees(math.atan2(2 * math.pi * sys.j_hz[0, 1], domega))
    while theta > 45.0:
        theta -= 90.0
    while theta <= -45.0:
        theta += 90.0
    return theta


@dataclass
class EigenSystem:
    """Diagonalized spin system with qubit-labeled eigenstates.

    energies are in rad/s, ascending inside each M_z manifold; manifolds
    are ordered by descending M_z.  Columns of ``vectors`` are eigenvectors
    expressed in the product basis with the global phase fixed so the
    largest-magnitude component is real positive.  ``labels[k]`` is the
    n-bit string assigned to eigenstate k by maximum overlap with product
    states; ``mz[k]`` is the total magnetic quantum number of its manifold.
    """

    n: int
    energies: np.ndarray
    vectors: np.ndarray
    labels: tuple[str, ...]
    mz: np.ndarray
    label_conflicts: int = 0

    @property
    def dim(self) -> int:
        return 2**self.n

    def index_of_label(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no eigenstate labeled {label!r}") from None

    def lowering_operator(self) -> np.ndarray:
        """F- in the eigenbasis."""
        fm = total_operator(self.n, "-")
        return self.vectors.conj().T @ fm @ self.vectors

    def with_swapped_labels(self, a: str, b: str) -> "EigenSystem":
        """Copy of this eigensystem with two state labels interchanged."""
        ia, ib = self.index_of_label(a), self.index_of_label(b)
        labels = list(self.labels)
        labels[ia], labels[ib] = labels[ib], labels[ia]
        return EigenSystem(self.n, self.energies, self.vectors,
                           tuple(labels), self.mz, self.label_conflicts)


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(vec)))
    ph = vec[k] / abs(vec[k])
    return vec * np.conj(ph)


def diagonalize(h: np.ndarray, sys: SpinSystem) -> EigenSystem:
    """Blockwise Hermitian eigensolve over M_z manifolds.

    Requires H to commute with F_z (all Hamiltonians built here do); raises
    if there is leakage between manifolds.  Labels are assigned inside each
    manifold by a greedy descending-overlap match with product states;
    conflicts (an eigenvector not getting its own argmax label) are counted
    and reported via ``label_conflicts``.
    """
    n = sys.n
    dim = 2**n
    if h.shape != (dim, dim):
        raise SpinSystemError("Hamiltonian dimension does not match system")
    hnorm = np.linalg.norm(h)
    if hnorm > 0 and np.linalg.norm(h - h.conj().T) > 1e-10 * hnorm:
        raise SpinSystemError("Hamiltonian is not Hermitian")

    pmz = product_mz(n)
    energies = np.zeros(dim)
    vectors = np.zeros((dim, dim), dtype=complex)
    mz_out = np.zeros(dim)
    labels: list[str] = [""] * dim
    conflicts = 0

    pos = 0
    for m in sorted(set(pmz.tolist()), reverse=True):
        idx = np.flatnonzero(pmz == m)
        block = h[np.ix_(idx, idx)]
        # off-manifold leakage would mean [H, F_z] != 0
        mask = np.zeros((dim, dim), dtype=bool)
        mask[np.ix_(idx, idx)] = True
        leak = np.linalg.norm(np.where(mask, 0.0, h)[idx, :])
        if hnorm > 0 and leak > 1e-10 * hnorm:
            raise SpinSystemError("Hamiltonian mixes M_z manifolds")
        w, v = np.linalg.eigh(block)
        for col in range(idx.size):
            vec = _fix_phase(v[:, col])
            k = pos + col
            energies[k] = w[col]
            vectors[idx, k] = vec
            mz_out[k] = m

        # greedy max-overlap labeling within the manifold
        overlaps = np.abs(vectors[np.ix_(idx, range(pos, pos + idx.size))]) ** 2
        order = np.dstack(np.unravel_index(
            np.argsort(-overlaps, axis=None, kind="stable"), overlaps.shape))[0]
        used_p: set[int] = set()
        used_e: set[int] = set()
        first_choice = {int(np.argmax(overlaps[:, e])): e for e in range(idx.size)}
        for p_loc, e_loc in order:
            if p_loc in used_p or e_loc in used_e:
                continue
            used_p.add(int(p_loc))
            used_e.add(int(e_loc))
            labels[pos + e_loc] = label_of_index(int(idx[p_loc]), n)
            if first_choice.get(int(p_loc)) not in (None, int(e_loc)):
                conflicts += 1
        pos += idx.size

    if conflicts:
        warnings.warn(f"{conflicts} eigenstate(s) resolved by best-overlap "
                      "labeling after a degenerate-label conflict")
    return EigenSystem(n, energies, vectors, tuple(labels), mz_out, conflicts)


def eigensystem(sys: SpinSystem, weak: bool = False) -> EigenSystem:
    """Convenience: build the Hamiltonian and diagonalize it."""
    return diagonalize(build_hamiltonian(sys, weak=weak), sys)


@dataclass(frozen=True)
class Transition:
    tid: int
    lower: int       # eigenstate index in the higher-M_z manifold
    upper: int       # eigenstate index one quantum below
    freq_hz: float
    intensity: float
    observable: bool


@dataclass
class TransitionCatalog:
    """All single-quantum transitions, numbered by descending intensity."""

    entries: tuple[Transition, ...]
    threshold: float
    _by_pair: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._by_pair = {(t.lower, t.upper): t for t in self.entries}

    def by_id(self, tid: int) -> Transition:
        if not 1 <= tid <= len(self.entries):
            raise KeyError(f"unknown transition t{tid}")
        return self.entries[tid - 1]

    def by_pair(self, a: int, b: int) -> Transition:
        t = self._by_pair.get((a, b)) or self._by_pair.get((b, a))
        if t is None:
            raise KeyError(f"no single-quantum transition between states {a} and {b}")
        return t

    def by_labels(self, es: EigenSystem, la: str, lb: str) -> Transition:
        return self.by_pair(es.index_of_label(la), es.index_of_label(lb))

    def observable_entries(self) -> tuple[Transition, ...]:
        return tuple(t for t in self.entries if t.observable)


def sq_transition_count(n: int) -> int:
    """Number of single-quantum transitions: binomial(2n, n-1)."""
    if not 1 <= n <= MAX_SPINS:
        raise SpinSystemError(f"spin count {n} outside 1..{MAX_SPINS}")
    return math.comb(2 * n, n - 1)


def transition_catalog(es: EigenSystem, threshold: float = 0.05) -> TransitionCatalog:
    """Enumerate all delta-M_z = -1 eigenstate pairs with intensities.

    intensity = |<upper| F- |lower>|^2, freq_hz = (E_lower - E_upper)/2pi.
    Ids are assigned in descending intensity order, ties broken by
    ascending frequency; the observable flag marks intensities at or above
    threshold * max-intensity.
    """
    if not 0 <= threshold < 1:
        raise SpinSystemError("threshold must be in [0, 1)")
    fme = es.lowering_operator()
    raw = []
    for lo in range(es.dim):
        for up in range(es.dim):
            if es.mz[up] == es.mz[lo] - 1:
                inten = float(abs(fme[up, lo]) ** 2)
                freq = float((es.energies[lo] - es.energies[up]) / (2 * math.pi))
                raw.append((lo, up, freq, inten))
    raw.sort(key=lambda r: (-r[3], r[2], r[0], r[1]))
    max_i = max((r[3] for r in raw), default=0.0)
    entries = tuple(
        Transition(tid=i + 1, lower=lo, upper=up, freq_hz=fr, intensity=inten,
                   observable=bool(max_i > 0 and inten >= threshold * max_i))
        for i, (lo, up, fr, inten) in enumerate(raw)
    )
    return TransitionCatalog(entries=entries, threshold=threshold)


# ---------------------------------------------------------------------------
# spin-system file format: line oriented, '#' comments, 1-based indices
#   name <string> / nspins <int> / offset_hz <n floats>
#   j_hz <i> <j> <float> / d_hz <i> <j> <float>

def parse_spin_system(text: str, source: str = "<string>") -> SpinSystem:
    name = ""
    n = None
    offsets = None
    pairs: list[tuple[str, int, int, float, int]] = []
    for ln, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        key = tok[0]
        try:
            if key == "name":
                name = line[len("name"):].strip()
            elif key == "nspins":
                n = int(tok[1])
            elif key == "offset_hz":
                offsets = [float(x) for x in tok[1:]]
            elif key in ("j_hz", "d_hz"):
                pairs.append((key, int(tok[1]), int(tok[2]), float(tok[3]), ln))
            else:
                raise SpinSystemError(f"{source}:{ln}: unknown key {key!r}")
        except (IndexError, ValueError) as exc:
            if isinstance(exc, SpinSystemError):
                raise
            raise SpinSystemError(f"{source}:{ln}: malformed line {line!r}") from None
    if n is None or offsets is None:
        raise SpinSystemError(f"{source}: missing nspins or offset_hz")
    if len(offsets) != n:
        raise SpinSystemError(f"{source}: expected {n} offsets, got {len(offsets)}")
    j = np.zeros((n, n))
    d = np.zeros((n, n))
    for key, i, jidx, val, ln in pairs:
        if not (1 <= i <= n and 1 <= jidx <= n and i != jidx):
            raise SpinSystemError(f"{source}:{ln}: bad spin pair {i},{jidx}")
        m = j if key == "j_hz" else d
        m[i - 1, jidx - 1] = m[jidx - 1, i - 1] = val
    return SpinSystem.create(name or source, offsets, j, d)


def format_spin_system(sys: SpinSystem) -> str:
    out = [f"name {sys.name}", f"nspins {sys.n}",
           "offset_hz " + " ".join(f"{x:.12g}" for x in sys.offset_hz)]
    for key, m in (("j_hz", sys.j_hz), ("d_hz", sys.d_hz)):
        for i in range(sys.n):
            for jj in range(i + 1, sys.n):
                if m[i, jj] != 0.0:
                    out.append(f"{key} {i + 1} {jj + 1} {m[i, jj]:.12g}")
    return "\n".join(out) + "\n"


def load_spin_system(path) -> SpinSystem:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_spin_system(fh.read(), source=str(path))
