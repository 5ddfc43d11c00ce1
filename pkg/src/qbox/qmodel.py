"""Explicit quantum models of the two-measurement box.

Two representations are supported: dense finite-dimensional models (two
projections and a density matrix) and atomic states, i.e. finite mixtures
of point evaluations on the universal algebra generated by two projections,
where at parameter ``t`` the pair is

    a(t) = diag(1, 0),    b(t) = [[t, sqrt(t(1-t))], [sqrt(t(1-t)), 1-t]].
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .seqcore import PROCESSES, ProbabilityTable, all_strings, switch_count

MAX_DIM = 32
MAX_LENGTH = 16
MODEL_TOL = 1e-12

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class ModelError(ValueError):
    """A model violates one of its structural invariants."""


@dataclass(frozen=True)
class FiniteDimModel:
    A: np.ndarray
    B: np.ndarray
    rho0: np.ndarray

    def __post_init__(self):
        for name in ("A", "B", "rho0"):
            m = np.asarray(getattr(self, name), dtype=complex)
            m.setflags(write=False)
            object.__setattr__(self, name, m)
        self.validate()

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def validate(self):
        d = self.A.shape[0]
        if not 1 <= d <= MAX_DIM:
            raise ModelError(f"dimension {d} outside [1, {MAX_DIM}]")
        for name in ("A", "B", "rho0"):
            m = getattr(self, name)
            if m.shape != (d, d):
                raise ModelError(f"{name} has shape {m.shape}, expected {(d, d)}")
            herm = np.linalg.norm(m - m.conj().T)
            if herm > MODEL_TOL:
                raise ModelError(f"{name} is not Hermitian: ||{name} - {name}^H|| = {herm:.3g}")
        for name in ("A", "B"):
            m = getattr(self, name)
            idem = np.linalg.norm(m @ m - m)
            if idem > MODEL_TOL:
                raise ModelError(f"{name} is not idempotent: ||{name}^2 - {name}|| = {idem:.3g}")
        tr = np.trace(self.rho0).real
        if abs(tr - 1) > MODEL_TOL:
            raise ModelError(f"rho0 has trace {tr!r}")
        low = np.linalg.eigvalsh(self.rho0).min()
        if low < -MODEL_TOL:
            raise ModelError(f"rho0 has negative eigenvalue {low:.3g}")

    def projection(self, i: str, outcome: int) -> np.ndarray:
        p = self.A if i == "a" else self.B
        return p if outcome == 1 else np.eye(self.dim) - p

    def to_json(self) -> dict:
        enc = lambda m: [[[float(z.real), float(z.imag)] for z in row] for row in m]
        return {"dim": self.dim, "A": enc(self.A), "B": enc(self.B), "rho0": enc(self.rho0)}

    @classmethod
    def from_json(cls, data) -> "FiniteDimModel":
        if isinstance(data, (str, bytes)):
            data = json.loads(data)

        def dec(rows):
            arr = np.asarray(rows, dtype=float)
            if arr.ndim == 3:
                return arr[..., 0] + 1j * arr[..., 1]
            return arr.astype(complex)

        try:
            model = cls(dec(data["A"]), dec(data["B"]), dec(data["rho0"]))
        except (KeyError, TypeError) as exc:
            raise ModelError(f"malformed model JSON: {exc}") from exc
        if "dim" in data and int(data["dim"]) != model.dim:
            raise ModelError(f"declared dim {data['dim']} does not match matrices ({model.dim})")
        return model


@dataclass(frozen=True)
class Atom:
    w: float
    t: float
    bloch: tuple[float, float, float]


@dataclass(frozen=True)
class AtomicState:
    """Finite mixture of point evaluations ``f -> tr(rho_j f(t_j))``.

    ``rho_j = (1 + bloch_j . sigma) / 2``.  The y-component of the Bloch
    vector never influences outcome probabilities; it is carried along only
    so that a state round-trips.
    """

    atoms: tuple[Atom, ...]

    def __post_init__(self):
        atoms = tuple(a if isinstance(a, Atom) else Atom(*a) for a in self.atoms)
        atoms = tuple(Atom(float(a.w), float(a.t), tuple(float(x) for x in a.bloch)) for a in atoms)
        object.__setattr__(self, "atoms", atoms)
        self.validate()

    def validate(self):
        if not self.atoms:
            raise ModelError("atomic state needs at least one atom")
        total = sum(a.w for a in self.atoms)
        if abs(total - 1) > MODEL_TOL:
            raise ModelError(f"atom weights sum to {total!r}")
        for a in self.atoms:
            if a.w < 0:
                raise ModelError(f"negative atom weight {a.w}")
            if not 0 <= a.t <= 1:
                raise ModelError(f"atom parameter t={a.t} outside [0, 1]")
            if len(a.bloch) != 3:
                raise ModelError("Bloch vectors have three components")
            norm2 = sum(x * x for x in a.bloch)
            if norm2 > 1 + MODEL_TOL:
                raise ModelError(f"Bloch vector {a.bloch} has squared norm {norm2:.3g} > 1")

    @property
    def weights(self):
        return np.array([a.w for a in self.atoms])

    @property
    def ts(self):
        return np.array([a.t for a in self.atoms])

    @property
    def blochs(self):
        return np.array([a.bloch for a in self.atoms])

    def to_json(self) -> dict:
        return {"atoms": [{"w": a.w, "t": a.t, "bloch": list(a.bloch)} for a in self.atoms]}

    @classmethod
    def from_json(cls, data) -> "AtomicState":
        if isinstance(data, (str, bytes)):
            data = json.loads(data)
        try:
            return cls(tuple(Atom(a["w"], a["t"], tuple(a["bloch"])) for a in data["atoms"]))
        except (KeyError, TypeError) as exc:
            raise ModelError(f"malformed atomic state JSON: {exc}") from exc


# ---------------------------------------------------------------------------
# Forward simulation


def _sequence_probs(m: FiniteDimModel, first: str, length: int) -> dict[str, float]:
    """Probabilities of all strings of length 1..``length`` (Schrodinger-picture recursion)."""
    other = "b" if first == "a" else "a"
    projs = {
        (i, x): m.projection(i, x) for i in (first, other) for x in (0, 1)
    }
    states = {"": m.rho0}
    probs = {}
    for step in range(length):
        i = first if step % 2 == 0 else other
        nxt = {}
        for r, sigma in states.items():
            for x in (0, 1):
                p = projs[i, x]
                post = p @ sigma @ p
                nxt[r + str(x)] = post
                probs[r + str(x)] = float(np.trace(post).real)
        states = nxt
    return probs


def simulate_sequence(m: FiniteDimModel, first: str, length: int) -> dict[str, float]:
    """Probabilities of every outcome string of the given length.

    ``first`` names the first measurement; the sequence then alternates.
    """
    if first not in PROCESSES:
        raise ValueError(f"first measurement must be 'a' or 'b', got {first!r}")
    if not 1 <= length <= MAX_LENGTH:
        raise ValueError(f"sequence length {length} outside [1, {MAX_LENGTH}]")
    probs = _sequence_probs(m, first, length)
    return {r: v for r, v in probs.items() if len(r) == length}


def simulate_table(m: FiniteDimModel, depth: int) -> ProbabilityTable:
    if not 1 <= depth <= MAX_LENGTH:
        raise ValueError(f"depth {depth} outside [1, {MAX_LENGTH}]")
    return ProbabilityTable(depth, _sequence_probs(m, "a", depth), _sequence_probs(m, "b", depth))


def conditional_prepost(m: FiniteDimModel, pre_outcome: int, post_outcome: int, tol: float = 1e-9):
    """Distribution of the middle ``b`` outcome in ``a, b, a`` given both ``a`` outcomes.

    Returns ``(p0, p1)`` or ``None`` when the conditioning event has
    probability ``<= tol``.
    """
    probs = simulate_sequence(m, "a", 3)
    joint = [probs[f"{pre_outcome}{x}{post_outcome}"] for x in (0, 1)]
    total = joint[0] + joint[1]
    if total <= tol:
        return None
    return joint[0] / total, joint[1] / total


def three_box_demo() -> dict:
    """Pre/postselected particle in three boxes.

    Preselect ``(1,1,1)/sqrt3``, postselect ``(1,z,z^2)/sqrt3`` with ``z`` a
    cube root of unity, and open box ``k`` in between.  The pre- and
    postselection are the outcomes 0 and 1 of the single projective
    measurement onto the postselected state, which is how the conditional
    probabilities are computed here.
    """
    zeta = np.exp(2j * np.pi / 3)
    psi_i = np.ones(3, dtype=complex) / np.sqrt(3)
    psi_f = np.array([1, zeta, zeta**2]) / np.sqrt(3)
    A = np.outer(psi_f, psi_f.conj())
    rho0 = np.outer(psi_i, psi_i.conj())
    boxes = []
    for k in range(3):
        B = np.zeros((3, 3), dtype=complex)
        B[k, k] = 1
        model = FiniteDimModel(A, B, rho0)
        cond = conditional_prepost(model, 0, 1)
        amp = psi_f.conj() @ B @ psi_i
        boxes.append({
            "box": k + 1,
            "probability": cond[1],
            "amplitude_abs2": float(abs(amp) ** 2),
        })
    return {"overlap": float(abs(psi_i.conj() @ psi_f) ** 2), "boxes": boxes}


# ---------------------------------------------------------------------------
# Atomic states


def _atom_weights(state: AtomicState, n: int, s: int) -> np.ndarray:
    t = state.ts
    return state.weights * t ** (n - s) * (1 - t) ** s


def atomic_f(state: AtomicState, n: int, s: int):
    """``(F_plus, F_minus_a, F_minus_b, C1, C2)`` at ``(n, s)`` for an atomic state."""
    if not 0 <= s <= n:
        raise ValueError(f"need 0 <= s <= n, got n={n}, s={s}")
    g = _atom_weights(state, n, s)
    t = state.ts
    b = state.blochs
    f_plus = float(g.sum())
    f_minus_a = float((g * b[:, 2]).sum())
    f_minus_b = float((g * (2 * np.sqrt(t * (1 - t)) * b[:, 0] + (2 * t - 1) * b[:, 2])).sum())
    return f_plus, f_minus_a, f_minus_b, (f_minus_a + f_minus_b) / 2, (f_minus_a - f_minus_b) / 2


def atomic_to_table(state: AtomicState, depth: int) -> ProbabilityTable:
    if depth < 1:
        raise ValueError("depth must be >= 1")
    cache = {}
    tables = {"a": {}, "b": {}}
    for length in range(1, depth + 1):
        n = length - 1
        for r in all_strings(length):
            s = switch_count(r)
            if (n, s) not in cache:
                cache[n, s] = atomic_f(state, n, s)
            f_plus, f_minus_a, f_minus_b, _, _ = cache[n, s]
            for i, f_minus in (("a", f_minus_a), ("b", f_minus_b)):
                sign = 1 if r[0] == "1" else -1
                tables[i][r] = (f_plus + sign * f_minus) / 2
    return ProbabilityTable(depth, tables["a"], tables["b"])


def universal_b(t: float) -> np.ndarray:
    c = np.sqrt(t * (1 - t))
    return np.array([[t, c], [c, 1 - t]], dtype=complex)


def atomic_to_finite_model(state: AtomicState) -> FiniteDimModel:
    """Block-diagonal model with one 2x2 block per atom."""
    k = len(state.atoms)
    d = 2 * k
    if d > MAX_DIM:
        raise ModelError(f"{k} atoms need dimension {d} > {MAX_DIM}")
    A = np.zeros((d, d), dtype=complex)
    B = np.zeros((d, d), dtype=complex)
    rho0 = np.zeros((d, d), dtype=complex)
    for j, atom in enumerate(state.atoms):
        blk = slice(2 * j, 2 * j + 2)
        A[blk, blk] = np.diag([1, 0])
        B[blk, blk] = universal_b(atom.t)
        bx, by, bz = atom.bloch
        rho0[blk, blk] = atom.w * (np.eye(2) + bx * SIGMA_X + by * SIGMA_Y + bz * SIGMA_Z) / 2
    return FiniteDimModel(A, B, rho0)


# ---------------------------------------------------------------------------
# Random generators (test data)


def random_projection(d: int, rng, rank: int | None = None) -> np.ndarray:
    if rank is None:
        rank = int(rng.integers(1, d)) if d > 1 else int(rng.integers(0, 2))
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, _ = np.linalg.qr(g)
    v = q[:, :rank]
    p = v @ v.conj().T
    return (p + p.conj().T) / 2


def random_density(d: int, rng, rank: int | None = None) -> np.ndarray:
    if rank is None:
        rank = int(rng.integers(1, d + 1))
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def random_model(rng, max_dim: int = 8, dim: int | None = None) -> FiniteDimModel:
    d = int(rng.integers(1, max_dim + 1)) if dim is None else dim
    return FiniteDimModel(random_projection(d, rng), random_projection(d, rng), random_density(d, rng))


def random_atomic(rng, max_atoms: int = 4, pure: bool = False) -> AtomicState:
    k = int(rng.integers(1, max_atoms + 1))
    w = rng.dirichlet(np.ones(k))
    w[-1] = 1.0 - w[:-1].sum()
    atoms = []
    for j in range(k):
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        if not pure:
            v *= rng.uniform() ** (1 / 3)
        atoms.append(Atom(float(w[j]), float(rng.uniform()), tuple(float(x) for x in v)))
    return AtomicState(tuple(atoms))
