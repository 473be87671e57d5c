"""Squeezed paired states and their closed-form steady-state observables.

The central object is the normalized paired state

    |psi(r)> = N(r) sum_m (-tanh r)^m |m,m>,

defined for any ladder system, together with the spin-ensemble closed forms
for the squeezed variance, the polarization <Z_i>, and the Wineland squeezing
parameter.  All closed forms are evaluated through numerically stable
rearrangements written in terms of q = exp(-2r); the textbook-style direct
transcriptions are retained (``wineland_direct_form``) as an independent route
for cross-checking at moderate r, where both agree to near machine precision.
The direct form loses up to ~12 digits to cancellation at large r, which is
why the stable route is the default everywhere.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .ladders import LadderSpec, BipartiteOperator, ladder_from_json, ladder_to_json, spin_ladder
from .ladders import _doubled_spin

__all__ = [
    "MAX_FINITE_R",
    "SqueezeParams",
    "PairedState",
    "squeezed_paired_state",
    "expectation",
    "wineland",
    "wineland_direct_form",
    "steady_observables",
    "log_tanh",
    "one_minus_tanh_power",
    "sech_squared",
    "paired_state_to_json",
    "paired_state_from_json",
]

#: Finite squeezing strengths are capped here; beyond it every tracked
#: quantity is within double-precision roundoff of its r -> infinity limit.
MAX_FINITE_R = 20.0

NORM_TOL = 1e-12


@dataclass(frozen=True)
class SqueezeParams:
    """Squeezing strength r >= 0, with a dedicated branch for r -> infinity.

    Finite r above ``MAX_FINITE_R`` is clamped (with a warning): at that point
    tanh(r) is 1 to better than 1e-17 and larger values change nothing.
    """

    r: float = 0.0
    analytic_limit: bool = False

    def __post_init__(self) -> None:
        if self.analytic_limit:
            object.__setattr__(self, "r", math.inf)
            return
        r = float(self.r)
        if math.isinf(r):
            object.__setattr__(self, "analytic_limit", True)
            object.__setattr__(self, "r", math.inf)
            return
        if not math.isfinite(r) or r < 0:
            raise ValueError("squeezing strength r must be finite and >= 0")
        if r > MAX_FINITE_R:
            warnings.warn(
                f"r = {r} clamped to {MAX_FINITE_R}; beyond this the state is "
                "indistinguishable from the r -> infinity limit in double precision",
                stacklevel=2,
            )
            r = MAX_FINITE_R
        object.__setattr__(self, "r", r)

    @classmethod
    def infinite(cls) -> "SqueezeParams":
        return cls(analytic_limit=True)


@dataclass(frozen=True)
class PairedState:
    """Normalized state sum_m a_m |m,m> on the doubled ladder space."""

    spec: LadderSpec
    amplitudes: tuple[float, ...] = field(repr=False)

    def __post_init__(self) -> None:
        if len(self.amplitudes) != self.spec.dim:
            raise ValueError("amplitudes must have length m_max + 1")
        norm = math.fsum(a * a for a in self.amplitudes)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"amplitudes are not normalized (sum of squares = {norm})")

    def amplitude_array(self) -> np.ndarray:
        return np.asarray(self.amplitudes, dtype=float)

    def vector(self) -> np.ndarray:
        """Full product-space vector with index convention m1 * d + m2."""
        d = self.spec.dim
        v = np.zeros(d * d, dtype=complex)
        idx = np.arange(d) * d + np.arange(d)
        v[idx] = self.amplitudes
        return v


def _normalized(amps: np.ndarray) -> tuple[float, ...]:
    return tuple(amps / np.linalg.norm(amps))


def squeezed_paired_state(spec: LadderSpec, params: SqueezeParams) -> PairedState:
    """The paired state with a_m proportional to (-tanh r)^m.

    At r = 0 this is |0,0>; in the r -> infinity limit the amplitudes become
    uniform up to the staggered sign, a_m = (-1)^m / sqrt(m_max + 1).
    """
    d = spec.dim
    signs = (-1.0) ** np.arange(d)
    if params.analytic_limit:
        return PairedState(spec, _normalized(signs.copy()))
    if params.r == 0.0:
        amps = np.zeros(d)
        amps[0] = 1.0
        return PairedState(spec, tuple(amps))
    # log-space powers: tanh^m r = exp(m log tanh r), exact up to one rounding
    mags = np.exp(np.arange(d) * log_tanh(params.r))
    return PairedState(spec, _normalized(signs * mags))


def expectation(state: PairedState, op: BipartiteOperator) -> complex:
    """<psi| op |psi> for a bipartite operator on the matching product space."""
    d = state.spec.dim
    if op.dims != (d, d):
        raise ValueError(f"operator dims {op.dims} do not match state space ({d}, {d})")
    v = state.vector()
    return complex(np.vdot(v, op.entries @ v))


# ---------------------------------------------------------------------------
# Stable scalar kernels, all in terms of q = exp(-2r)


def log_tanh(r: float) -> float:
    """log tanh r evaluated without cancellation for any r > 0."""
    if r <= 0:
        raise ValueError("log_tanh requires r > 0")
    q = math.exp(-2.0 * r)
    return math.log1p(-q) - math.log1p(q)


def one_minus_tanh_power(r: float, power: float) -> float:
    """1 - tanh^power(r), accurate even when tanh^power(r) is within 1e-16 of 1."""
    if r == 0.0:
        return 1.0
    return -math.expm1(power * log_tanh(r))


def sech_squared(r: float) -> float:
    """sech^2 r = 1 - tanh^2 r without subtractive cancellation."""
    q = math.exp(-2.0 * r)
    return 4.0 * q / (1.0 + q) ** 2


def _signal_poly(two_S: int, r: float) -> float:
    """P(u) = sum_{j=0}^{2S-1} (j+1)(2S-j) u^j with u = tanh^2 r.

    All coefficients are positive, so the sum is evaluated without any
    cancellation; it carries the entire S-dependence of the steady forms.
    """
    if two_S == 0:
        return 0.0
    j = np.arange(two_S, dtype=float)
    if r == 0.0:
        powers = np.zeros(two_S)
        powers[0] = 1.0
        return float(np.dot((j + 1) * (two_S - j), powers))
    lt = log_tanh(r)
    return float(np.dot((j + 1) * (two_S - j), np.exp(2.0 * j * lt)))


def _steady_core(two_S: int, r: float) -> tuple[float, float]:
    """Return (delta, D) with delta = 1 - tanh^{4S+2} r, D = sech^4 r P(u)/2.

    These two positive quantities generate every spin-ensemble closed form:
    <Z_i> = -D/delta, <X_+^2> = e^{-2r} D/delta, and the Wineland parameter
    xi^2 = e^{-2r} S delta / D.
    """
    K = two_S + 1
    delta = one_minus_tanh_power(r, 2.0 * K)
    D = sech_squared(r) ** 2 * _signal_poly(two_S, r) / 2.0
    return delta, D


def wineland(S, params: SqueezeParams) -> float:
    """Two-mode Wineland squeezing parameter xi^2 for two spin-S ensembles.

    xi^2 = N <X_+^2> / (<Z_1> + <Z_2>)^2 with N = 4S; equals 1 at r = 0 and
    3/(4(S+1)) in the r -> infinity limit.
    """
    two_S = _doubled_spin(S)
    if two_S == 0:
        raise ValueError("Wineland parameter needs S >= 1/2")
    s = two_S / 2.0
    if params.analytic_limit:
        return 3.0 / (4.0 * (s + 1.0))
    if params.r == 0.0:
        return 1.0
    delta, D = _steady_core(two_S, params.r)
    return math.exp(-2.0 * params.r) * s * delta / D


def wineland_direct_form(S, r: float) -> float:
    """Direct transcription of the closed form in terms of f_pm = tanh^{4S+2} r +- 1.

    Kept as an independent evaluation route: it agrees with :func:`wineland`
    to ~1e-12 for r <~ 2 but loses accuracy catastrophically at large r
    (relative error ~1e-4 by r = 5 at S = 1/2), so it must not be used where
    tight tolerances matter.
    """
    two_S = _doubled_spin(S)
    s = two_S / 2.0
    f = math.tanh(r) ** (2 * two_S + 2)
    fp, fm = f + 1.0, f - 1.0
    num = -math.exp(-2.0 * r) * s * fm * ((two_S + 1.0) * fp + math.cosh(2.0 * r) * fm)
    den = 2.0 * ((math.cosh(r) ** 2 + s) * fp - math.cosh(2.0 * r)) ** 2
    return num / den


def steady_observables(S, params: SqueezeParams) -> dict[str, float]:
    """Closed-form steady-state observables for two spin-S ensembles.

    Returns <Z_i> (same for i = 1, 2), the squeezed second moments
    <X_+^2> = <Y_-^2>, and the anti-squeezed ones <X_-^2> = <Y_+^2>, which
    exceed the squeezed pair by exactly e^{4r}.
    """
    two_S = _doubled_spin(S)
    if two_S == 0:
        raise ValueError("steady observables need S >= 1/2")
    s = two_S / 2.0
    m_max = float(two_S)
    if params.analytic_limit:
        # anti-squeezed variance tends to one quarter of the limiting QFI
        var_anti = m_max * (m_max + 2.0) / 3.0
        return {
            "Z_each": 0.0,
            "varX_plus": 0.0,
            "varY_minus": 0.0,
            "varX_minus": var_anti,
            "varY_plus": var_anti,
        }
    if params.r == 0.0:
        return {
            "Z_each": -s,
            "varX_plus": s,
            "varY_minus": s,
            "varX_minus": s,
            "varY_plus": s,
        }
    delta, D = _steady_core(two_S, params.r)
    z_each = -D / delta
    var_sq = math.exp(-2.0 * params.r) * D / delta
    var_anti = math.exp(4.0 * params.r) * var_sq
    return {
        "Z_each": z_each,
        "varX_plus": var_sq,
        "varY_minus": var_sq,
        "varX_minus": var_anti,
        "varY_plus": var_anti,
    }


# ---------------------------------------------------------------------------
# Serialization


def paired_state_to_json(state: PairedState) -> str:
    payload = {
        "spec": json.loads(ladder_to_json(state.spec)),
        "amplitudes": list(state.amplitudes),
    }
    return json.dumps(payload)


def paired_state_from_json(text: str) -> PairedState:
    payload = json.loads(text)
    spec = ladder_from_json(json.dumps(payload["spec"]))
    return PairedState(spec, tuple(float(a) for a in payload["amplitudes"]))
