"""Dissipative dynamics: engineered jumps, Liouvillians, and relaxation rates.

The central objects are jump-operator sets whose unique dark state is a
paired squeezed (or binomial) state, the vectorized Lindblad generator they
define, and diagnostics built on top of it:

* ``evolve`` integrates the master equation and records observables and the
  distance to a target state;
* ``dark_state_residual`` checks candidate dark states directly;
* ``spectrum_gap`` extracts Liouvillian eigenvalues, confirms a unique zero
  mode, and fits the empirically relevant relaxation rate from the tail of
  an infidelity trajectory (which may decay faster than the smallest
  spectral gap when the slowest mode has negligible overlap);
* ``steady_state_unequal`` scans the squeezing strength for two ensembles
  of different sizes, where the paired state is no longer exactly dark.

Density matrices are vectorized by column stacking, so a matrix product
``A rho B`` acts on the stacked vector as ``kron(B.T, A)``.  All rates are
quoted in units of the engineered rate (gamma = 1).
"""

from __future__ import annotations

import math
import struct
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sparse
from scipy.integrate import solve_ivp
from scipy.sparse.linalg import eigs, splu

from .fits import fit_exponential_rate
from .ladders import (
    BipartiteOperator,
    LadderSpec,
    embed,
    joint_quadratures,
    lowering_operator,
    spin_ladder,
)
from .states import PairedState, SqueezeParams

__all__ = [
    "DENSE_SPECTRUM_LIMIT",
    "EvolutionTrace",
    "JumpSet",
    "Liouvillian",
    "binomial_stabilizer_jumps",
    "dark_state_residual",
    "engineered_dissipators",
    "evolve",
    "liouvillian",
    "load_density_matrix",
    "save_density_matrix",
    "spectrum_gap",
    "spectrum_to_csv",
    "steady_state",
    "steady_state_unequal",
]

#: Largest superoperator dimension eigendecomposed densely by default;
#: beyond it, shift-invert iteration around zero extracts the leading modes.
DENSE_SPECTRUM_LIMIT = 10_000

#: Magic bytes of the binary density-matrix container.
_RHO_MAGIC = b"RHOBIN01"

_TRACE_PRESERVATION_TOL = 1e-10
_DENSITY_TOL = 1e-9
_POSITIVITY_TOL = 1e-8
_INFIDELITY_FLOOR = 1e-10


def _vec(rho: np.ndarray) -> np.ndarray:
    """Column-stack a matrix."""
    return np.asarray(rho, dtype=np.complex128).reshape(-1, order="F")


def _unvec(v: np.ndarray, dim: int) -> np.ndarray:
    """Invert column stacking."""
    return np.asarray(v, dtype=np.complex128).reshape((dim, dim), order="F")


@dataclass(frozen=True)
class JumpSet:
    """Jump operators with their rates (units of the engineered rate)."""

    jumps: tuple[BipartiteOperator, ...]
    rates: tuple[float, ...]

    def __post_init__(self) -> None:
        jumps = tuple(self.jumps)
        rates = tuple(float(g) for g in self.rates)
        object.__setattr__(self, "jumps", jumps)
        object.__setattr__(self, "rates", rates)
        if len(jumps) != len(rates):
            raise ValueError("jumps and rates must have equal lengths")
        if not jumps:
            raise ValueError("at least one jump operator is required")
        dims = jumps[0].dims
        for op in jumps:
            if op.dims != dims:
                raise ValueError("all jump operators must share the same dims")
        for g in rates:
            if not math.isfinite(g) or g < 0.0:
                raise ValueError("rates must be finite and >= 0")

    @property
    def dims(self) -> tuple[int, int]:
        return self.jumps[0].dims

    @property
    def dim(self) -> int:
        d1, d2 = self.dims
        return d1 * d2


@dataclass(frozen=True)
class Liouvillian:
    """Vectorized Lindblad generator on column-stacked density matrices."""

    dim: int
    superop: sparse.csr_matrix = field(repr=False)

    def __post_init__(self) -> None:
        expected = self.dim**2
        if self.superop.shape != (expected, expected):
            raise ValueError(
                f"superoperator must be {expected}x{expected} for dim {self.dim}"
            )
        identity_left = _vec(np.eye(self.dim))
        defect = np.max(np.abs(self.superop.T @ identity_left))
        if defect > _TRACE_PRESERVATION_TOL:
            raise ValueError(
                f"superoperator is not trace preserving (defect {defect:.2e})"
            )


@dataclass(frozen=True)
class EvolutionTrace:
    """Sampled observables of a master-equation trajectory."""

    times: tuple[float, ...]
    observables: dict[str, tuple[float, ...]]
    final_state: np.ndarray

    def to_csv(self) -> str:
        """CSV text with a time column followed by one column per observable."""
        names = list(self.observables)
        lines = [",".join(["t"] + names)]
        for k, t in enumerate(self.times):
            row = [f"{t:.12g}"] + [f"{self.observables[n][k]:.12g}" for n in names]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


def engineered_dissipators(
    spec1: LadderSpec,
    spec2: LadderSpec,
    params: SqueezeParams,
    gamma: float = 1.0,
) -> JumpSet:
    """Two-mode jump operators whose dark state is the squeezed paired state.

    ``Gamma_a = cosh(r) O1 + sinh(r) O2^dag`` and
    ``Gamma_b = cosh(r) O2 + sinh(r) O1^dag``, both with rate ``gamma``.
    At r = 0 they reduce to independent decay of the two modes.  For equal
    ladder specs the squeezed paired state at the same r is annihilated by
    both; for unequal specs the operators still build but no paired state is
    exactly dark.
    """
    if params.analytic_limit:
        raise ValueError("engineered dissipators require a finite squeezing strength")
    if not (gamma >= 0.0) or not math.isfinite(gamma):
        raise ValueError("gamma must be finite and >= 0")
    ch, sh = math.cosh(params.r), math.sinh(params.r)
    low1 = lowering_operator(spec1)
    low2 = lowering_operator(spec2)
    gamma_a = ch * embed(low1, 1, spec2).entries + sh * embed(low2.adjoint(), 2, spec1).entries
    gamma_b = ch * embed(low2, 2, spec1).entries + sh * embed(low1.adjoint(), 1, spec2).entries
    dims = (spec1.dim, spec2.dim)
    return JumpSet(
        jumps=(
            BipartiteOperator(dims, gamma_a),
            BipartiteOperator(dims, gamma_b),
        ),
        rates=(gamma, gamma),
    )


def binomial_stabilizer_jumps(S: float, gamma: float = 1.0) -> JumpSet:
    """Jump operators stabilizing the staggered-binomial paired spin state.

    Each jump pairs an ordinary collective lowering operator on one spin
    with a generalized raising operator ``O~`` on the other, with matrix
    elements ``o~(m) = o(m+1) (2S - m)/(m + 1)`` taking ``|m> -> |m+1>``.
    The normalized state ``sum_m (-1)^m C(2S, m) |m,m>`` is annihilated by
    both jumps; squeezed paired states at finite r are not.
    """
    spec = spin_ladder(S)
    coeffs = spec.coeff_array()
    m = np.arange(spec.m_max)
    tilde_vals = coeffs[m + 1] * (spec.m_max - m) / (m + 1)
    tilde_entries = sparse.diags(
        tilde_vals.astype(np.complex128), offsets=-1, format="csr"
    )
    low = lowering_operator(spec).entries
    eye = sparse.identity(spec.dim, format="csr", dtype=np.complex128)
    dims = (spec.dim, spec.dim)
    gamma_a = sparse.kron(low, eye, format="csr") + sparse.kron(eye, tilde_entries, format="csr")
    gamma_b = sparse.kron(eye, low, format="csr") + sparse.kron(tilde_entries, eye, format="csr")
    return JumpSet(
        jumps=(
            BipartiteOperator(dims, gamma_a),
            BipartiteOperator(dims, gamma_b),
        ),
        rates=(gamma, gamma),
    )


def liouvillian(jumps: JumpSet) -> Liouvillian:
    """Assemble the vectorized Lindblad generator of a jump set.

    Under column stacking each dissipator contributes
    ``rate * [kron(conj(G), G) - kron(I, G^dag G)/2 - kron((G^dag G).T, I)/2]``.
    """
    dim = jumps.dim
    eye = sparse.identity(dim, format="csr", dtype=np.complex128)
    total = sparse.csr_matrix((dim**2, dim**2), dtype=np.complex128)
    for op, rate in zip(jumps.jumps, jumps.rates):
        if rate == 0.0:
            continue
        g = op.entries.tocsr()
        gdg = (g.conj().T @ g).tocsr()
        term = (
            sparse.kron(g.conj(), g, format="csr")
            - 0.5 * sparse.kron(eye, gdg, format="csr")
            - 0.5 * sparse.kron(gdg.T, eye, format="csr")
        )
        total = total + rate * term
    total.eliminate_zeros()
    return Liouvillian(dim=dim, superop=total.tocsr())


def _check_density_matrix(rho: np.ndarray, what: str = "density matrix") -> np.ndarray:
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"{what} must be a square matrix")
    if np.max(np.abs(rho - rho.conj().T)) > _DENSITY_TOL:
        raise ValueError(f"{what} must be Hermitian")
    if abs(np.trace(rho).real - 1.0) > _DENSITY_TOL or abs(np.trace(rho).imag) > _DENSITY_TOL:
        raise ValueError(f"{what} must have unit trace")
    if float(np.linalg.eigvalsh(rho)[0]) < -_POSITIVITY_TOL:
        raise ValueError(f"{what} must be positive semidefinite")
    return rho


def _as_target_matrix(target, dim: int) -> np.ndarray:
    if isinstance(target, PairedState):
        psi = target.vector()
        return np.outer(psi, psi.conj())
    target = np.asarray(target, dtype=np.complex128)
    if target.shape != (dim, dim):
        raise ValueError(f"target must be a {dim}x{dim} matrix")
    return target


def _distance(rho: np.ndarray, target: np.ndarray, norm: str) -> float:
    diff = rho - target
    if norm == "frobenius":
        return float(np.linalg.norm(diff))
    if norm == "trace":
        return float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
    raise ValueError("infidelity_norm must be 'frobenius' or 'trace'")


def evolve(
    liou: Liouvillian,
    rho0: np.ndarray,
    times,
    observables=None,
    *,
    target=None,
    infidelity_norm: str = "frobenius",
    rtol: float = 1e-9,
    atol: float = 1e-12,
) -> EvolutionTrace:
    """Integrate the master equation and record expectations along the way.

    ``observables`` maps names to Hermitian bipartite operators (a plain
    sequence gets names ``obs0, obs1, ...``); each recorded sequence holds
    ``Re tr(rho(t) A)``.  With ``target`` supplied (a density matrix or a
    paired state) an ``infidelity`` column records the Frobenius distance
    ``||rho(t) - target||`` (or the trace norm with
    ``infidelity_norm="trace"``).  Integration uses an adaptive embedded
    Runge-Kutta pair restarted at every requested time, so each stored
    state is a genuine solver state rather than a dense-output
    interpolation; interpolants of a marginally stiff linear system can
    amplify roundoff into localized Hermiticity bursts of order 1e-9 that
    the direct states do not show.  Hermiticity, unit trace, and positivity
    of the state are enforced at every stored time.
    """
    dim = liou.dim
    rho0 = _check_density_matrix(rho0, "rho0")
    if rho0.shape != (dim, dim):
        raise ValueError(f"rho0 must be {dim}x{dim}")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2:
        raise ValueError("times must contain at least two values")
    if np.any(np.diff(times) <= 0.0) or times[0] < 0.0:
        raise ValueError("times must be strictly increasing and non-negative")

    if observables is None:
        named: dict[str, BipartiteOperator] = {}
    elif isinstance(observables, dict):
        named = dict(observables)
    else:
        named = {f"obs{k}": op for k, op in enumerate(observables)}
    for name, op in named.items():
        d1, d2 = op.dims
        if d1 * d2 != dim:
            raise ValueError(f"observable {name!r} does not match dimension {dim}")

    target_matrix = None if target is None else _as_target_matrix(target, dim)

    superop = liou.superop

    def rhs(_t: float, y: np.ndarray) -> np.ndarray:
        return superop @ y

    states = [_vec(rho0)]
    for k in range(times.size - 1):
        t_end = float(times[k + 1])
        # Requesting only the interval endpoint keeps memory flat: without
        # t_eval the solver stores every internal step, which for long
        # horizons accumulates to gigabytes across restarts.
        solution = solve_ivp(
            rhs,
            (float(times[k]), t_end),
            states[-1],
            t_eval=[t_end],
            method="DOP853",
            rtol=rtol,
            atol=atol,
        )
        if not solution.success:
            raise RuntimeError(
                f"master-equation integration failed: {solution.message}"
            )
        states.append(solution.y[:, -1])

    columns: dict[str, list[float]] = {name: [] for name in named}
    if target_matrix is not None:
        columns["infidelity"] = []
    rho_t = None
    for k in range(times.size):
        rho_t = _unvec(states[k], dim)
        trace_defect = abs(np.trace(rho_t) - 1.0)
        herm_defect = np.max(np.abs(rho_t - rho_t.conj().T))
        min_eig = float(np.linalg.eigvalsh(0.5 * (rho_t + rho_t.conj().T))[0])
        if trace_defect > _DENSITY_TOL or herm_defect > _DENSITY_TOL or min_eig < -_POSITIVITY_TOL:
            raise RuntimeError(
                "integration lost density-matrix structure at "
                f"t={times[k]:.6g} (trace defect {trace_defect:.2e}, "
                f"Hermiticity defect {herm_defect:.2e}, min eigenvalue {min_eig:.2e})"
            )
        for name, op in named.items():
            columns[name].append(float(np.trace(op.entries @ rho_t).real))
        if target_matrix is not None:
            columns["infidelity"].append(_distance(rho_t, target_matrix, infidelity_norm))

    return EvolutionTrace(
        times=tuple(float(t) for t in times),
        observables={name: tuple(vals) for name, vals in columns.items()},
        final_state=rho_t,
    )


def dark_state_residual(state: PairedState, jumps: JumpSet) -> float:
    """Largest norm of any jump operator applied to the paired state."""
    psi = state.vector()
    if psi.size != jumps.dim:
        raise ValueError(
            f"state dimension {psi.size} does not match jump dimension {jumps.dim}"
        )
    return max(float(np.linalg.norm(op.entries @ psi)) for op in jumps.jumps)


def steady_state(liou: Liouvillian) -> np.ndarray:
    """Steady density matrix from the Liouvillian zero mode."""
    vec0 = _zero_mode(liou)
    rho = _unvec(vec0, liou.dim)
    rho = rho / np.trace(rho)
    return 0.5 * (rho + rho.conj().T)


def _eigs_near_zero(
    superop: sparse.spmatrix, k: int, *, vectors: bool
) -> tuple[np.ndarray, np.ndarray] | np.ndarray:
    """Residual-verified shift-invert eigenmodes nearest the origin.

    A Liouvillian is exactly singular, so the factorization of ``A - sigma I``
    at ``sigma = 0`` can fail depending on pivoting luck; on failure the shift
    is nudged off the spectrum by a tiny fraction of the diagonal scale.
    Because the generator is strongly nonnormal, ARPACK may also report Ritz
    values whose true residual is of order one; every returned pair is checked
    against ``|A v - lambda v| <= 1e-8 * scale`` directly and unconverged
    pairs are dropped, so the result can hold fewer than ``k`` modes.
    """
    matrix = superop.tocsc()
    scale = float(np.abs(matrix.diagonal()).max()) or 1.0
    # Fixed start vector: ARPACK would otherwise seed the Arnoldi iteration
    # randomly, breaking byte-identical reruns.
    start = np.random.default_rng(0).standard_normal(matrix.shape[0]).astype(complex)
    last_error: Exception | None = None
    for sigma in (0.0, -1e-10 * scale, -1e-7 * scale):
        try:
            values, modes = eigs(
                matrix, k=k, sigma=sigma, which="LM", v0=start
            )
        except (RuntimeError, ValueError, ArithmeticError) as error:
            last_error = error
            continue
        residuals = np.linalg.norm(matrix @ modes - modes * values, axis=0)
        keep = residuals <= 1e-8 * scale
        if keep.any():
            if vectors:
                return values[keep], modes[:, keep]
            return values[keep]
        last_error = RuntimeError("no Ritz pair passed the residual check")
    raise RuntimeError(
        "shift-invert eigensolve failed for every trial shift"
    ) from last_error


def _zero_mode(liou: Liouvillian) -> np.ndarray:
    size = liou.dim**2
    if size <= 36:
        # ARPACK needs k < n - 1 with margin; tiny problems go dense.
        values, vectors = np.linalg.eig(liou.superop.toarray())
        index = int(np.argmin(np.abs(values)))
        value, vector = values[index], vectors[:, index]
    else:
        values, vectors = _eigs_near_zero(liou.superop, 1, vectors=True)
        value, vector = values[0], vectors[:, 0]
    if abs(value) > 1e-8:
        raise RuntimeError(
            f"no zero eigenvalue resolved (closest magnitude {abs(value):.2e}); "
            "the jump set has no steady state at this precision"
        )
    return vector


def _resolvent_infidelity_trace(
    liou: Liouvillian,
    rho0: np.ndarray,
    target: np.ndarray,
    rate_hint: float,
    t_cap: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Infidelity versus time from implicit (backward-Euler) resolvent steps.

    Each step applies ``(I - h L)^{-1}``, which for a Lindblad generator is a
    convex average of completely positive trace-preserving maps: the march
    preserves the trace exactly and cannot leave the density-matrix cone, so
    it stays stable at step sizes where explicit integrators of the stiff
    generator would need millions of right-hand-side evaluations.  The step
    is first doubled geometrically until the infidelity reaches the fit
    floor, then the trajectory is re-run with about 1500 uniform steps so
    the per-step rate bias (rate * h / 2) stays below one percent.  A stall
    guard stops the march once roundoff halts the decay, and the returned
    trace is trimmed at its minimum so the fit never sees the noise plateau.
    """
    identity = sparse.identity(liou.dim**2, dtype=complex, format="csc")
    superop = liou.superop.tocsc()
    y0 = _vec(rho0)
    tgt = _vec(target)

    def march(h: float, max_steps: int) -> tuple[np.ndarray, np.ndarray, str]:
        solver = splu(identity - h * superop)
        y = y0.copy()
        times = [0.0]
        fids = [float(np.linalg.norm(y - tgt))]
        best = fids[0]
        stall = 0
        t = 0.0
        reason = "steps"
        for _ in range(max_steps):
            y = solver.solve(y)
            t += h
            f = float(np.linalg.norm(y - tgt))
            times.append(t)
            fids.append(f)
            if f < _INFIDELITY_FLOOR:
                reason = "floor"
                break
            if f < best:
                best, stall = f, 0
            else:
                stall += 1
                if stall >= 60:
                    reason = "plateau"
                    break
            if t_cap is not None and t >= t_cap:
                reason = "cap"
                break
        return np.asarray(times), np.asarray(fids), reason

    step = 0.05 / rate_hint
    for _ in range(16):
        times, fids, reason = march(step, 4000)
        if reason != "steps":
            break
        # Not there yet: extrapolate the required horizon from the decay
        # achieved so far and jump the step accordingly.
        decay = fids[0] / max(fids[-1], _INFIDELITY_FLOOR)
        if times[-1] > 0.0 and decay > 1.0 and fids[0] > _INFIDELITY_FLOOR:
            achieved = math.log(decay) / times[-1]
            horizon = math.log(fids[0] / _INFIDELITY_FLOOR) / achieved
            step = max(2.0 * step, horizon / 1500.0)
        else:
            step *= 2.0
    t_stop = float(times[int(np.argmin(fids))])
    if t_stop > 0.0:
        times, fids, _ = march(t_stop / 1500.0, 2200)
    end = int(np.argmin(fids))
    return times[: end + 1], fids[: end + 1]


def _relevant_rate_from_infidelity(
    times: np.ndarray, infidelity: np.ndarray
) -> float:
    """Decay rate fitted on the final decade of infidelity above the floor."""
    above = np.where(infidelity > _INFIDELITY_FLOOR)[0]
    if above.size < 2:
        raise RuntimeError("infidelity trajectory is entirely below the fit floor")
    end = above[-1]
    f_end = infidelity[end]
    start = end
    while start > 0 and _INFIDELITY_FLOOR < infidelity[start - 1] <= 10.0 * f_end:
        start -= 1
    # widen beyond one decade if the cadence left too few samples
    while start > 0 and end - start + 1 < 20 and infidelity[start - 1] > _INFIDELITY_FLOOR:
        start -= 1
    if end - start + 1 < 20:
        warnings.warn(
            "fewer than 20 samples above the infidelity floor; "
            "the fitted relaxation rate may be noisy",
            UserWarning,
            stacklevel=2,
        )
    if end - start + 1 < 2:
        raise RuntimeError("too few samples above the infidelity floor to fit a rate")
    window = slice(start, end + 1)
    fit = fit_exponential_rate(times[window], infidelity[window])
    return -fit["rate"]


def spectrum_gap(
    liou: Liouvillian,
    initial: np.ndarray | None = None,
    *,
    k: int = 8,
    dense: bool | None = None,
    t_max: float | None = None,
) -> dict[str, object]:
    """Liouvillian eigenvalues, spectral gap, and fitted relaxation rate.

    Eigenvalues come from a dense decomposition when the superoperator
    dimension is at most :data:`DENSE_SPECTRUM_LIMIT` (or ``dense=True``),
    otherwise from shift-invert iteration around zero returning at most ``k``
    residual-verified modes nearest the origin.  ``smallest_gap`` is the
    smallest nonzero decay rate ``-Re(lambda)`` among the computed
    eigenvalues; on the sparse path the generator's strong nonnormality can
    leave only the kernel converged, in which case ``smallest_gap`` is NaN
    and the dense path is the authoritative source.  At least one zero mode
    must be resolved (magnitude < 1e-8) or the call fails.

    With ``initial`` supplied, the master equation is driven from it to the
    zero-mode steady state with stiffness-proof resolvent steps (see
    :func:`_resolvent_infidelity_trace`) and ``relevant_rate`` is fitted by
    linear regression of log-infidelity over the final decade above 1e-10.
    This fitted rate tracks the spectral branch that actually carries the
    late-time weight and can exceed ``smallest_gap`` when the slowest mode
    has negligible overlap with the initial state.  ``t_max`` caps the
    march horizon; by default the march runs until the infidelity reaches
    the fit floor or stalls at the roundoff plateau.
    """
    size = liou.dim**2
    use_dense = size <= DENSE_SPECTRUM_LIMIT if dense is None else dense
    if use_dense:
        values = np.linalg.eigvals(liou.superop.toarray())
    else:
        k_eff = min(int(k), size - 2)
        values = _eigs_near_zero(liou.superop, k_eff, vectors=False)
    order = np.argsort(-values.real)
    values = values[order]
    magnitudes = np.abs(values)
    if magnitudes.min() > 1e-8:
        raise RuntimeError(
            f"no zero eigenvalue resolved (closest magnitude {magnitudes.min():.2e})"
        )
    zero_modes = int(np.sum(magnitudes < 1e-10))
    nonzero_decay = -values.real[magnitudes >= 1e-10]
    nonzero_decay = nonzero_decay[nonzero_decay > 1e-12]
    smallest_gap = float(nonzero_decay.min()) if nonzero_decay.size else math.nan

    relevant_rate: float | None = None
    if initial is not None:
        rho0 = _check_density_matrix(np.asarray(initial, dtype=complex), "initial state")
        if rho0.shape != (liou.dim, liou.dim):
            raise ValueError(
                f"initial state dimension {rho0.shape[0]} does not match "
                f"Liouvillian dimension {liou.dim}"
            )
        if math.isfinite(smallest_gap) and smallest_gap > 0.0:
            rate_hint = smallest_gap
        else:
            # Kernel-only spectrum (sparse path): start from the fastest
            # diagonal scale and let the march widen its step adaptively.
            rate_hint = float(np.abs(liou.superop.diagonal()).max()) or 1.0
        target = steady_state(liou)
        times, infidelity = _resolvent_infidelity_trace(
            liou, rho0, target, rate_hint, t_cap=t_max
        )
        relevant_rate = _relevant_rate_from_infidelity(times, infidelity)

    return {
        "eigenvalues": [complex(v) for v in values],
        "smallest_gap": smallest_gap,
        "relevant_rate": relevant_rate,
        "zero_modes": zero_modes,
    }


def steady_state_unequal(
    spec1: LadderSpec,
    spec2: LadderSpec,
    r_grid,
    *,
    gamma: float = 1.0,
    t_budget: float = 3000.0,
) -> dict[str, object]:
    """Scan the squeezing strength for two (possibly unequal) spin ensembles.

    For each r the engineered master equation is integrated from the fully
    polarized product state until the Frobenius change per unit time 1/gamma
    drops below 1e-8 (checked every 0.1/gamma), then the two-mode squeezing
    parameter ``xi^2 = N Var(X+) / <Z1 + Z2>^2`` of the settled state is
    evaluated with ``N`` the total particle number.  Returns the best grid
    point together with the full scan.
    """
    if spec1.kind != "spin" or spec2.kind != "spin":
        raise ValueError("both ladder specs must be of spin kind")
    dim = spec1.dim * spec2.dim
    if dim > 1000:
        raise ValueError("exact unequal-size scan limited to product dimension <= 1000")
    r_values = [float(r) for r in r_grid]
    if not r_values:
        raise ValueError("r_grid must contain at least one value")

    quads = joint_quadratures(spec1, spec2)
    xplus = quads["X+"].entries
    zsum = quads["Z+"].entries
    number = float(spec1.m_max + spec2.m_max)

    cadence = 0.1 / gamma
    block_steps = 200
    xi2_values: list[float] = []
    states: list[np.ndarray] = []
    for r in r_values:
        liou = liouvillian(engineered_dissipators(spec1, spec2, SqueezeParams(r), gamma))
        rho = np.zeros((dim, dim), dtype=np.complex128)
        rho[0, 0] = 1.0
        t_now = 0.0
        converged = False
        while t_now < t_budget / gamma and not converged:
            times = t_now + cadence * np.arange(block_steps + 1)
            sol_states = _evolved_block(liou, rho, times)
            previous = rho
            for idx in range(1, len(times)):
                current = sol_states[idx]
                change = float(np.linalg.norm(current - previous)) / (cadence * gamma)
                previous = current
                if change < 1e-8:
                    rho = current
                    t_now = float(times[idx])
                    converged = True
                    break
            else:
                rho = sol_states[-1]
                t_now = float(times[-1])
        if not converged:
            raise RuntimeError(
                f"steady state not reached within t = {t_budget}/gamma at r = {r}"
            )
        x_mean = float(np.trace(xplus @ rho).real)
        x_second = float(np.trace(xplus @ (xplus @ rho)).real)
        z_mean = float(np.trace(zsum @ rho).real)
        xi2_values.append(number * (x_second - x_mean**2) / z_mean**2)
        states.append(rho)

    best = int(np.argmin(xi2_values))
    return {
        "best_r": r_values[best],
        "xi2": xi2_values[best],
        "state": states[best],
        "r_grid": r_values,
        "xi2_grid": xi2_values,
    }


def _evolved_block(liou: Liouvillian, rho: np.ndarray, times: np.ndarray) -> list[np.ndarray]:
    """States at the requested times of one integration block."""
    superop = liou.superop
    solution = solve_ivp(
        lambda _t, y: superop @ y,
        (float(times[0]), float(times[-1])),
        _vec(rho),
        method="DOP853",
        t_eval=times,
        rtol=1e-9,
        atol=1e-12,
    )
    if not solution.success:
        raise RuntimeError(f"master-equation integration failed: {solution.message}")
    return [_unvec(solution.y[:, k], liou.dim) for k in range(times.size)]


def spectrum_to_csv(eigenvalues) -> str:
    """CSV text (re, im) for a sequence of complex eigenvalues."""
    lines = ["re,im"]
    for value in eigenvalues:
        value = complex(value)
        lines.append(f"{value.real:.12g},{value.imag:.12g}")
    return "\n".join(lines) + "\n"


def save_density_matrix(path, rho: np.ndarray) -> None:
    """Write a density matrix to the binary container.

    Layout: 8 magic bytes, two little-endian uint32 giving rows and columns,
    then the row-major matrix as little-endian complex128 (real/imaginary
    float64 pairs).
    """
    rho = np.ascontiguousarray(np.asarray(rho, dtype=np.complex128))
    if rho.ndim != 2:
        raise ValueError("density matrix must be two-dimensional")
    rows, cols = rho.shape
    with open(path, "wb") as handle:
        handle.write(_RHO_MAGIC)
        handle.write(struct.pack("<II", rows, cols))
        handle.write(rho.astype("<c16").tobytes(order="C"))


def load_density_matrix(path) -> np.ndarray:
    """Read a density matrix written by :func:`save_density_matrix`."""
    with open(path, "rb") as handle:
        magic = handle.read(len(_RHO_MAGIC))
        if magic != _RHO_MAGIC:
            raise ValueError("not a density-matrix container (bad magic bytes)")
        rows, cols = struct.unpack("<II", handle.read(8))
        payload = handle.read(rows * cols * 16)
    if len(payload) != rows * cols * 16:
        raise ValueError("truncated density-matrix container")
    data = np.frombuffer(payload, dtype="<c16").astype(np.complex128)
    return data.reshape((rows, cols))
