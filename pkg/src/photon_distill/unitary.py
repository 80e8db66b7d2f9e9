"""Interferometer matrices.

Convention throughout the package: ``entries[k, i]`` is the amplitude for a
photon entering input mode ``i`` to leave in output mode ``k`` (rows are
outputs, columns are inputs), so a creation operator transforms as
``a_i^dag -> sum_k entries[k, i] a_k^dag``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NonUnitaryError

UNITARY_TOL = 1e-10


def unitarity_deviation(entries: np.ndarray) -> float:
    n = entries.shape[0]
    return float(np.max(np.abs(entries.conj().T @ entries - np.eye(n))))


@dataclass(frozen=True, eq=False)
class Unitary:
    """Validated N x N unitary. Immutable: the stored array is read-only."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] < 2:
            raise DimensionError("interferometer needs at least 2 modes")
        if not np.all(np.isfinite(a)):
            raise NonUnitaryError(float("inf"), UNITARY_TOL)
        dev = unitarity_deviation(a)
        if dev > UNITARY_TOL:
            raise NonUnitaryError(dev, UNITARY_TOL)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __getitem__(self, idx):
        return self.entries[idx]

    def __eq__(self, other):
        if not isinstance(other, Unitary):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    __hash__ = None

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "re": self.entries.real.tolist(),
            "im": self.entries.imag.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Unitary":
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
        if re.shape != im.shape:
            raise DimensionError("'re' and 'im' blocks differ in shape")
        u = cls(re + 1j * im)
        if "dim" in obj and int(obj["dim"]) != u.dim:
            raise DimensionError(f"declared dim {obj['dim']} but matrix is {u.dim}x{u.dim}")
        return u


def from_entries(entries) -> Unitary:
    return Unitary(np.asarray(entries))


def _check_dim(dim: int) -> int:
    if int(dim) != dim or dim < 2:
        raise DimensionError(f"dimension must be an integer >= 2, got {dim!r}")
    return int(dim)


@dataclass(frozen=True)
class EpsilonSchemeSpec:
    n_modes: int
    epsilon: float

    def __post_init__(self):
        _check_dim(self.n_modes)
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")


def epsilon_scheme(spec: EpsilonSchemeSpec) -> Unitary:
    """Near-identity interferometer that routes input 2 almost entirely to output 2.

    Output rows 1 and 2 are fixed in closed form::

        row 1:  U[0, 1] = -eps,          U[0, i] = sqrt((1 - eps^2)/(N-1))   (i != 2)
        row 2:  U[1, 1] = sqrt(1-eps^2), U[1, i] = eps / sqrt(N-1)           (i != 2)

    so output 1 collects an equal-phase superposition of every input except
    the second and output 2 leaks only O(eps) of those inputs.  The two rows
    are exactly orthonormal.  Rows 3..N (modes that will register zero counts)
    are completed by modified Gram-Schmidt on e_3..e_N, which is deterministic.
    """
    n, eps = spec.n_modes, float(spec.epsilon)
    u = np.zeros((n, n), dtype=complex)
    others = [i for i in range(n) if i != 1]
    u[0, others] = math.sqrt((1.0 - eps * eps) / (n - 1))
    u[0, 1] = -eps
    u[1, others] = eps / math.sqrt(n - 1)
    u[1, 1] = math.sqrt(1.0 - eps * eps)
    rows = [u[0].copy(), u[1].copy()]
    for j in range(2, n):
        v = np.zeros(n, dtype=complex)
        v[j] = 1.0
        for r in rows:
            v = v - np.vdot(r, v) * r
        v = v / np.linalg.norm(v)
        rows.append(v)
    return Unitary(np.array(rows))


def haar_random(dim: int, seed: int) -> Unitary:
    """Haar-distributed unitary from QR of a complex Ginibre matrix.

    The phases of R's diagonal are pushed into Q, otherwise the result is not
    Haar (Mezzadri, 2007).
    """
    dim = _check_dim(dim)
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    return Unitary(q)


def dft(dim: int) -> Unitary:
    dim = _check_dim(dim)
    k = np.arange(dim)
    return Unitary(np.exp(2j * np.pi * np.outer(k, k) / dim) / math.sqrt(dim))


def givens_pairs(dim: int) -> list[tuple[int, int]]:
    """Mode pairs of the triangular rotation mesh, in the order they are nulled."""
    return [(c, c + 1) for r in range(dim - 1, 0, -1) for c in range(r)]


def _rotation_block(theta: float, phi: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    e = complex(math.cos(phi), math.sin(phi))
    return np.array([[e * c, -s], [e * s, c]], dtype=complex)


@dataclass(frozen=True)
class GivensParameterization:
    """Box coordinates on U(N).

    ``angles[k]`` in [0, pi/2] and ``phases[k]`` in [0, 2 pi) parameterize the
    2x2 block acting on ``givens_pairs(dim)[k]``; the final ``dim`` entries of
    ``phases`` form the output diagonal phase screen.
    """

    dim: int
    angles: tuple[float, ...]
    phases: tuple[float, ...]

    def __post_init__(self):
        _check_dim(self.dim)
        n_rot = self.dim * (self.dim - 1) // 2
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))
        if len(self.angles) != n_rot or len(self.phases) != n_rot + self.dim:
            raise DimensionError(
                f"dim {self.dim} needs {n_rot} angles and {n_rot + self.dim} phases, "
                f"got {len(self.angles)} and {len(self.phases)}"
            )

    @property
    def n_params(self) -> int:
        return self.dim * self.dim

    def to_vector(self) -> np.ndarray:
        return np.array(self.angles + self.phases)

    @classmethod
    def from_vector(cls, dim: int, x) -> "GivensParameterization":
        n_rot = dim * (dim - 1) // 2
        x = np.asarray(x, dtype=float)
        if x.shape != (dim * dim,):
            raise DimensionError(f"expected {dim * dim} coordinates, got shape {x.shape}")
        return cls(dim, tuple(x[:n_rot]), tuple(x[n_rot:]))

    @classmethod
    def identity(cls, dim: int) -> "GivensParameterization":
        n_rot = dim * (dim - 1) // 2
        return cls(dim, (0.0,) * n_rot, (0.0,) * (n_rot + dim))

    def to_json(self) -> dict:
        return {"dim": self.dim, "angles": list(self.angles), "phases": list(self.phases)}

    @classmethod
    def from_json(cls, obj: dict) -> "GivensParameterization":
        return cls(int(obj["dim"]), tuple(obj["angles"]), tuple(obj["phases"]))


def realize_array(params: GivensParameterization) -> np.ndarray:
    """``diag(exp(i psi)) @ T_K @ ... @ T_1`` as a raw array (no validation)."""
    n = params.dim
    u = np.eye(n, dtype=complex)
    n_rot = len(params.angles)
    for (a, b), theta, phi in zip(givens_pairs(n), params.angles, params.phases[:n_rot]):
        # left-multiplying by T_k only touches rows a and b
        c, s = math.cos(theta), math.sin(theta)
        e = complex(math.cos(phi), math.sin(phi))
        ra, rb = u[a].copy(), u[b]
        u[a] = e * c * ra - s * rb
        u[b] = e * s * ra + c * rb
    return np.exp(1j * np.asarray(params.phases[n_rot:]))[:, None] * u


def realize(params: GivensParameterization) -> Unitary:
    return Unitary(realize_array(params))


def extract(u: Unitary) -> GivensParameterization:
    """Inverse of ``realize``: null the strict lower triangle row by row.

    Right-multiplying by T_k^H on columns (c, c+1) zeroes entry (r, c);
    after all rotations the matrix is a diagonal phase screen.
    """
    n = u.dim
    w = np.array(u.entries, dtype=complex)
    angles, phis = [], []
    for r in range(n - 1, 0, -1):
        for c in range(r):
            x, y = w[r, c], w[r, c + 1]
            if abs(x) == 0.0:
                theta, phi = 0.0, 0.0
            else:
                theta = math.atan2(abs(x), abs(y))
                phi = (np.angle(x) - np.angle(y)) % (2 * math.pi) if abs(y) > 0 else 0.0
            blk = _rotation_block(theta, phi)
            w[:, [c, c + 1]] = w[:, [c, c + 1]] @ blk.conj().T
            angles.append(theta)
            phis.append(float(phi))
    psi = np.angle(np.diagonal(w)) % (2 * math.pi)
    # rotations were peeled off in application order T_1, T_2, ...
    return GivensParameterization(n, tuple(angles), tuple(phis) + tuple(float(p) for p in psi))
