"""Generalized ladder systems and the local/bipartite operators built on them.

A ladder system is a finite local Hilbert space spanned by |0>, ..., |m_max>
together with a lowering operator O defined by its matrix elements,

    O |m> = o(m) |m-1>,      o(0) = 0,

with all o(m) real.  Collective spins, truncated bosonic modes, and
parity-restricted (two-photon) bosonic modes are all instances; custom
coefficient tables are accepted as well.  Everything downstream (squeezed
paired states, Fisher-information analysis, engineered dissipation) is written
against this single abstraction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sparse

__all__ = [
    "LadderSpec",
    "LocalOperator",
    "BipartiteOperator",
    "make_ladder",
    "spin_ladder",
    "boson_ladder",
    "two_photon_ladder",
    "custom_ladder",
    "lowering_operator",
    "quadrature_set",
    "embed",
    "joint_quadratures",
    "ladder_to_json",
    "ladder_from_json",
]

KINDS = ("spin", "truncated_boson", "two_photon", "custom")

#: Product dimension above which dense conversions are refused.
DENSE_LIMIT = 10_000

HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class LadderSpec:
    """Immutable description of one ladder system.

    Attributes
    ----------
    m_max : int
        Highest basis index; local dimension is m_max + 1.
    coeffs : tuple of float
        Lowering matrix elements o(0), ..., o(m_max) with o(0) = 0.
    kind : str
        One of "spin", "truncated_boson", "two_photon", "custom".
    two_S : int or None
        For spin kind, the doubled spin size 2S (kept as an integer so that
        half-integer spins never rely on floating-point equality).
    """

    m_max: int
    coeffs: tuple[float, ...]
    kind: str
    two_S: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown ladder kind {self.kind!r}")
        if self.m_max < 0:
            raise ValueError("m_max must be a non-negative integer")
        if len(self.coeffs) != self.m_max + 1:
            raise ValueError("coeffs must have length m_max + 1")
        if self.coeffs[0] != 0.0:
            raise ValueError("o(0) must be exactly zero")
        if not all(math.isfinite(c) for c in self.coeffs):
            raise ValueError("all o(m) must be finite real numbers")
        if self.kind == "spin" and (self.two_S is None or self.two_S < 0):
            raise ValueError("spin kind requires a non-negative doubled size 2S")

    @property
    def dim(self) -> int:
        return self.m_max + 1

    @property
    def spin_size(self) -> float:
        """Spin size S (only meaningful for kind == 'spin')."""
        if self.kind != "spin" or self.two_S is None:
            raise ValueError("spin_size is defined only for spin ladders")
        return self.two_S / 2.0

    def coeff_array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)


@dataclass(frozen=True)
class LocalOperator:
    """Sparse complex operator on a single ladder system."""

    dim: int
    entries: sparse.csr_matrix

    def __post_init__(self) -> None:
        if self.entries.shape != (self.dim, self.dim):
            raise ValueError("entries shape does not match dim")

    def dense(self) -> np.ndarray:
        return self.entries.toarray()

    def adjoint(self) -> "LocalOperator":
        return LocalOperator(self.dim, _csr(self.entries.conj().T))


@dataclass(frozen=True)
class BipartiteOperator:
    """Sparse complex operator on the product space of two ladder systems.

    The basis ordering is fixed globally: basis index = m1 * d2 + m2, i.e.
    subsystem 1 is the slow (left Kronecker) factor.
    """

    dims: tuple[int, int]
    entries: sparse.csr_matrix
    hermitian: bool = False

    def __post_init__(self) -> None:
        d = self.dims[0] * self.dims[1]
        if self.entries.shape != (d, d):
            raise ValueError("entries shape does not match product dimension")
        if self.hermitian:
            dev = abs(self.entries - self.entries.conj().T)
            if dev.nnz and dev.max() > HERMITIAN_TOL:
                raise ValueError("operator flagged Hermitian is not Hermitian")

    @property
    def dim(self) -> int:
        return self.dims[0] * self.dims[1]

    def dense(self) -> np.ndarray:
        if self.dim > DENSE_LIMIT:
            raise ValueError(f"refusing dense conversion above dimension {DENSE_LIMIT}")
        return self.entries.toarray()

    def adjoint(self) -> "BipartiteOperator":
        return BipartiteOperator(self.dims, _csr(self.entries.conj().T), self.hermitian)


def _csr(mat) -> sparse.csr_matrix:
    out = sparse.csr_matrix(mat)
    out.eliminate_zeros()
    return out


def spin_ladder(S: float | str) -> LadderSpec:
    """Collective spin of size S: o(m) = sqrt(S(S+1) - (m-S)(m-S-1)), m_max = 2S."""
    two_S = _doubled_spin(S)
    s = two_S / 2.0
    m = np.arange(two_S + 1, dtype=float)
    o2 = s * (s + 1.0) - (m - s) * (m - s - 1.0)
    o2[0] = 0.0
    coeffs = tuple(np.sqrt(o2))
    return LadderSpec(m_max=two_S, coeffs=coeffs, kind="spin", two_S=two_S)


def boson_ladder(m_max: int) -> LadderSpec:
    """Bosonic mode truncated at occupation m_max: o(m) = sqrt(m)."""
    m_max = _positive_cutoff(m_max)
    coeffs = tuple(math.sqrt(m) for m in range(m_max + 1))
    return LadderSpec(m_max=m_max, coeffs=coeffs, kind="truncated_boson")


def two_photon_ladder(m_max: int) -> LadderSpec:
    """Photon-pair ladder (|m> holds 2m photons): o(m) = sqrt(2m(2m-1))."""
    m_max = _positive_cutoff(m_max)
    coeffs = tuple(math.sqrt(2 * m * (2 * m - 1)) for m in range(m_max + 1))
    return LadderSpec(m_max=m_max, coeffs=coeffs, kind="two_photon")


def custom_ladder(coeffs) -> LadderSpec:
    """Ladder with arbitrary real lowering elements (o(0) must be zero)."""
    arr = [float(c) for c in coeffs]
    if not arr:
        raise ValueError("custom ladder needs at least the o(0) entry")
    if arr[0] != 0.0:
        raise ValueError("custom coefficients must start with o(0) = 0")
    return LadderSpec(m_max=len(arr) - 1, coeffs=tuple(arr), kind="custom")


def make_ladder(kind: str, size) -> LadderSpec:
    """Build a validated LadderSpec of the requested kind.

    ``size`` is the spin size S for "spin", the cutoff m_max for
    "truncated_boson"/"two_photon", and the coefficient sequence for "custom".
    """
    if kind == "spin":
        return spin_ladder(size)
    if kind == "truncated_boson":
        return boson_ladder(size)
    if kind == "two_photon":
        return two_photon_ladder(size)
    if kind == "custom":
        return custom_ladder(size)
    raise ValueError(f"unknown ladder kind {kind!r}")


def _doubled_spin(S) -> int:
    """Parse a spin size (number or string like '9/2') into the integer 2S."""
    if isinstance(S, str):
        S = float(Fraction(S))
    two_S = 2 * float(S)
    if not math.isfinite(two_S) or two_S < 0:
        raise ValueError("spin size must be a finite non-negative half-integer")
    rounded = round(two_S)
    if abs(two_S - rounded) > 1e-9:
        raise ValueError(f"spin size {S} is not a half-integer")
    return int(rounded)


def _positive_cutoff(m_max) -> int:
    m = int(m_max)
    if m != m_max or m < 1:
        raise ValueError("cutoff m_max must be an integer >= 1")
    return m


def lowering_operator(spec: LadderSpec) -> LocalOperator:
    """Matrix of O with <m-1|O|m> = o(m); exactly m_max nonzeros."""
    d = spec.dim
    if spec.m_max == 0:
        return LocalOperator(d, _csr(sparse.csr_matrix((d, d), dtype=complex)))
    data = spec.coeff_array()[1:].astype(complex)
    mat = sparse.diags(data, offsets=1, shape=(d, d), format="csr", dtype=complex)
    return LocalOperator(d, _csr(mat))


def quadrature_set(spec: LadderSpec) -> tuple[LocalOperator, LocalOperator, LocalOperator]:
    """Hermitian quadratures X = (O^+O)/2 style triple for one ladder.

    X = (O^dag + O)/2,  Y = -i (O^dag - O)/2,  Z = (O^dag O - O O^dag)/2.
    """
    low = lowering_operator(spec).entries
    raise_ = low.conj().T
    X = _csr((raise_ + low) / 2.0)
    Y = _csr((raise_ - low) * (-1j / 2.0))
    Z = _csr((raise_ @ low - low @ raise_) / 2.0)
    d = spec.dim
    return LocalOperator(d, X), LocalOperator(d, Y), LocalOperator(d, Z)


def embed(op: LocalOperator, slot: int, other: LadderSpec) -> BipartiteOperator:
    """Lift a local operator to the product space (identity on the other slot)."""
    if slot not in (1, 2):
        raise ValueError("slot must be 1 or 2")
    eye = sparse.identity(other.dim, dtype=complex, format="csr")
    if slot == 1:
        mat = sparse.kron(op.entries, eye, format="csr")
        dims = (op.dim, other.dim)
    else:
        mat = sparse.kron(eye, op.entries, format="csr")
        dims = (other.dim, op.dim)
    return BipartiteOperator(dims, _csr(mat))


def joint_quadratures(spec1: LadderSpec, spec2: LadderSpec) -> dict[str, BipartiteOperator]:
    """Joint quadratures X+- = X1 +- X2, Y+-, Z+- on the product space."""
    X1, Y1, Z1 = quadrature_set(spec1)
    X2, Y2, Z2 = quadrature_set(spec2)
    dims = (spec1.dim, spec2.dim)

    def pair(a: LocalOperator, b: LocalOperator, sign: int) -> BipartiteOperator:
        m1 = embed(a, 1, spec2).entries
        m2 = embed(b, 2, spec1).entries
        return BipartiteOperator(dims, _csr(m1 + sign * m2), hermitian=True)

    return {
        "X+": pair(X1, X2, +1),
        "X-": pair(X1, X2, -1),
        "Y+": pair(Y1, Y2, +1),
        "Y-": pair(Y1, Y2, -1),
        "Z+": pair(Z1, Z2, +1),
        "Z-": pair(Z1, Z2, -1),
    }


def ladder_to_json(spec: LadderSpec) -> str:
    """Serialize to the {"kind", "param", "coeffs"} JSON object."""
    if spec.kind == "spin":
        param: float | int | None = spec.two_S / 2.0
    elif spec.kind == "custom":
        param = None
    else:
        param = spec.m_max
    payload = {"kind": spec.kind, "param": param, "coeffs": list(spec.coeffs)}
    return json.dumps(payload)


def ladder_from_json(text: str) -> LadderSpec:
    """Inverse of :func:`ladder_to_json`; closed-form kinds are revalidated."""
    payload = json.loads(text)
    kind = payload["kind"]
    if kind == "custom":
        return custom_ladder(payload["coeffs"])
    spec = make_ladder(kind, payload["param"])
    stored = np.asarray(payload["coeffs"], dtype=float)
    if stored.shape != (spec.dim,) or not np.allclose(stored, spec.coeffs, atol=1e-12):
        raise ValueError("stored coefficients disagree with the closed form for this kind")
    return spec
