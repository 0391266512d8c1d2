"""States, gates, POVMs and the natural-basis probe family.

States and gates are plain complex ``numpy`` arrays. Basis indices are 0-based
in code; anything read from or written to files is 1-based.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path

import numpy as np

from .linalg import as_matrix, is_unitary

__all__ = [
    "GATE_NAMES",
    "PovmSet",
    "ProbeFamily",
    "Setting",
    "apply_gate",
    "basis_state",
    "born_probabilities",
    "check_density",
    "combine_to_nonhermitian",
    "diagonal_povm",
    "dump_gate",
    "load_gate",
    "mix_with_maximally_mixed",
    "named_gate",
    "offdiag_povms",
    "probe_family",
    "projector",
    "purity",
]

HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
GATE_NAMES = ("identity", "hadamard")
GATE_FILE_ATOL = 1e-8


def named_gate(name: str, qubits: int = 1) -> np.ndarray:
    """Built-in gate on ``qubits`` qubits (dimension ``2**qubits``)."""
    if qubits < 1:
        raise ValueError(f"qubits must be >= 1, got {qubits}")
    name = name.lower()
    if name == "identity":
        return np.eye(2**qubits, dtype=np.complex128)
    if name == "hadamard":
        return reduce(np.kron, [HADAMARD] * qubits)
    raise ValueError(f"unknown gate {name!r}; choose from {', '.join(GATE_NAMES)}")


def _parse_entry(token: str) -> complex:
    re_s, sep, im_s = token.partition(",")
    if not sep:
        raise ValueError(f"entry {token!r} is not of the form re,im")
    return complex(float(re_s), float(im_s))


def load_gate(path) -> np.ndarray:
    """Read a gate-matrix file.

    Format: first line ``d``, then ``d`` lines of ``d`` whitespace-separated
    ``re,im`` entries.
    """
    lines = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError(f"{path}: empty gate file")
    try:
        d = int(lines[0])
    except ValueError:
        raise ValueError(f"{path}: first line must be the dimension, got {lines[0]!r}") from None
    rows = lines[1:]
    if d < 1 or len(rows) != d:
        raise ValueError(f"{path}: expected {d} matrix rows, found {len(rows)}")
    matrix = np.empty((d, d), dtype=np.complex128)
    for r, line in enumerate(rows):
        tokens = line.split()
        if len(tokens) != d:
            raise ValueError(f"{path}: row {r + 1} has {len(tokens)} entries, expected {d}")
        matrix[r] = [_parse_entry(t) for t in tokens]
    if not is_unitary(matrix, atol=GATE_FILE_ATOL):
        raise ValueError(f"{path}: matrix is not unitary within {GATE_FILE_ATOL:g}")
    return matrix


def dump_gate(u, path) -> None:
    """Write ``u`` in the gate-matrix file format."""
    u = as_matrix(u, "gate")
    lines = [str(u.shape[0])]
    for row in u:
        lines.append(" ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def basis_state(k: int, d: int) -> np.ndarray:
    v = np.zeros(d, dtype=np.complex128)
    v[k] = 1.0
    return v


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=np.complex128)
    return np.outer(psi, psi.conj())


def purity(rho) -> float:
    rho = np.asarray(rho)
    return float(np.real(np.vdot(rho, rho)))


def check_density(rho, atol: float = 1e-10) -> np.ndarray:
    """Validate a density matrix (Hermitian, unit trace, PSD) and return it."""
    rho = as_matrix(rho, "density matrix")
    if rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got {rho.shape}")
    if not np.allclose(rho, rho.conj().T, rtol=0, atol=atol):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > atol:
        raise ValueError(f"density matrix has trace {np.trace(rho).real:.3g}")
    if np.linalg.eigvalsh(rho).min() < -atol:
        raise ValueError("density matrix is not positive semidefinite")
    return rho


def apply_gate(u, rho) -> np.ndarray:
    """Output state ``U rho U^dagger``."""
    u = np.asarray(u, dtype=np.complex128)
    rho = np.asarray(rho, dtype=np.complex128)
    if u.shape != rho.shape:
        raise ValueError(f"gate {u.shape} and state {rho.shape} dimensions differ")
    return u @ rho @ u.conj().T


def mix_with_maximally_mixed(rho, alpha: float) -> np.ndarray:
    """Depolarised probe ``alpha * rho + (1 - alpha) * I / d``."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    rho = np.asarray(rho, dtype=np.complex128)
    d = rho.shape[0]
    if alpha == 1.0:
        return rho.copy()
    return alpha * rho + (1.0 - alpha) * np.eye(d) / d


@dataclass(frozen=True)
class ProbeFamily:
    """The ``3d - 2`` pure probes needed to reach every ``|1><k|`` input.

    Ordering: ``|k>`` for k = 1..d, then ``(|1> + |k>)/sqrt2`` for k = 2..d, then
    ``(|1> + i|k>)/sqrt2`` for k = 2..d. ``roles[i]`` is ``(kind, k)`` with a
    1-based ``k``.
    """

    d: int
    states: tuple[np.ndarray, ...]
    roles: tuple[tuple[str, int], ...]

    def __len__(self) -> int:
        return len(self.states)

    def index(self, kind: str, k: int) -> int:
        return self.roles.index((kind, k))


def probe_family(d: int) -> ProbeFamily:
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    e = np.eye(d, dtype=np.complex128)
    states, roles = [], []
    for k in range(d):
        states.append(e[k])
        roles.append(("diag", k + 1))
    for k in range(1, d):
        states.append((e[0] + e[k]) / np.sqrt(2))
        roles.append(("plus", k + 1))
    for k in range(1, d):
        states.append((e[0] + 1j * e[k]) / np.sqrt(2))
        roles.append(("minus_i", k + 1))
    return ProbeFamily(d, tuple(states), tuple(roles))


def combine_to_nonhermitian(out_plus, out_minus_i, out_j, out_k) -> np.ndarray:
    """Image of ``|j><k|`` from the images of its four pure-state components."""
    mats = [np.asarray(m, dtype=np.complex128) for m in (out_plus, out_minus_i, out_j, out_k)]
    if len({m.shape for m in mats}) != 1:
        raise ValueError("all four output matrices must share one shape")
    c = (1 + 1j) / 2
    return mats[0] + 1j * mats[1] - c * mats[2] - c * mats[3]


@dataclass(frozen=True)
class PovmSet:
    elements: tuple[np.ndarray, ...]
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(len(self.elements))))

    @property
    def d(self) -> int:
        return self.elements[0].shape[0]

    def is_valid(self, atol: float = 1e-10) -> bool:
        d = self.d
        for e in self.elements:
            if not np.allclose(e, e.conj().T, rtol=0, atol=atol):
                return False
            if np.linalg.eigvalsh(e).min() < -atol:
                return False
        return bool(np.allclose(sum(self.elements), np.eye(d), rtol=0, atol=atol))


def born_probabilities(rho, povm: PovmSet) -> np.ndarray:
    """Outcome probabilities ``Tr(rho P_i)``, clipped into ``[0, 1]``."""
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != povm.elements[0].shape:
        raise ValueError(f"state {rho.shape} and POVM {povm.elements[0].shape} dimensions differ")
    # Tr(rho P) = sum_ik rho_ik P_ki
    probs = np.array([np.sum(rho * e.T).real for e in povm.elements])
    return np.clip(probs, 0.0, 1.0)


@dataclass(frozen=True)
class Setting:
    """One measurement setting of the fast pure-state protocol.

    ``kind`` is ``"diag"`` (computational basis), ``"plus"`` (``{P_j, I - P_j}``)
    or ``"minus_i"`` (``{Q_j, I - Q_j}``), with anchor ``s`` and index ``j``
    (0-based; unused for ``"diag"``).
    """

    kind: str
    s: int = 0
    j: int = 0

    @property
    def key(self) -> int:
        """Stable integer id, independent of the anchor, used for seeding."""
        if self.kind == "diag":
            return 0
        return 2 * self.j + (1 if self.kind == "plus" else 2)

    def _vector(self, d: int) -> np.ndarray:
        v = np.zeros(d, dtype=np.complex128)
        v[self.s] = 1.0
        v[self.j] = 1.0 if self.kind == "plus" else 1j
        return v / np.sqrt(2)

    def povm(self, d: int) -> PovmSet:
        if self.kind == "diag":
            return diagonal_povm(d)
        if self.s == self.j:
            raise ValueError("off-diagonal setting needs j != s")
        p = projector(self._vector(d))
        name = "P" if self.kind == "plus" else "Q"
        return PovmSet((p, np.eye(d) - p), (f"{name}{self.j + 1}", f"I-{name}{self.j + 1}"))

    def probabilities(self, rho) -> np.ndarray:
        """Same as ``born_probabilities(rho, self.povm(d))`` without building the POVM.

        The binary elements are rank one with support on ``{s, j}`` only, so the
        trace reduces to a 2x2 block.
        """
        rho = np.asarray(rho)
        if self.kind == "diag":
            return np.clip(np.diag(rho).real, 0.0, 1.0)
        idx = [self.s, self.j]
        phase = 1.0 if self.kind == "plus" else 1j
        w = np.array([1.0, phase]) / np.sqrt(2)
        block = rho[np.ix_(idx, idx)]
        p = float(np.real(w.conj() @ block @ w))
        p = min(max(p, 0.0), 1.0)
        return np.array([p, 1.0 - p])


def diagonal_povm(d: int) -> PovmSet:
    e = np.eye(d, dtype=np.complex128)
    return PovmSet(tuple(np.outer(e[j], e[j]) for j in range(d)), tuple(f"{j + 1}" for j in range(d)))


def offdiag_povms(s: int, d: int) -> list[PovmSet]:
    """The ``2(d - 1)`` binary settings for 1-based anchor ``s``."""
    if not 1 <= s <= d:
        raise ValueError(f"anchor s must lie in 1..{d}, got {s}")
    out = []
    for j in range(d):
        if j == s - 1:
            continue
        out.append(Setting("plus", s - 1, j).povm(d))
        out.append(Setting("minus_i", s - 1, j).povm(d))
    return out
