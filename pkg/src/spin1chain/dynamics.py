"""Exact time evolution, transfer amplitudes, scans and mirroring tests.

Evolution is computed from a cached Hermitian eigendecomposition, with the
exponent convention exp(+iHt) by default (``sign=-1`` for the physical
convention).  Scans over dense time grids are evaluated through the
kernels module, which is the package's hot path.
"""

import hashlib
from dataclasses import dataclass

import numpy as np

from . import kernels
from .hamiltonians import engineered_sigma_block
from .linalg import HermitianEigenSystem, apply_exp, eig_hermitian
from .parity import chain_mirror_permutation, sigma_mirror_permutation
from .spin_ops import ChainOperator, basis_index


@dataclass(frozen=True)
class StateVector:
    """Normalized amplitude vector over the full or sigma basis."""

    amplitudes: np.ndarray
    basis: str  # "full" or "sigma"
    n: int

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amp)
        expected = 3 ** self.n if self.basis == "full" else 2 * self.n + 1
        if amp.shape != (expected,):
            raise ValueError(f"{self.basis} basis for n={self.n} needs {expected} amplitudes")
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state norm {norm!r} deviates from 1 beyond 1e-12")

    @classmethod
    def from_label(cls, label, basis="full"):
        n = len(label)
        dim = 3 ** n if basis == "full" else None
        if basis != "full":
            raise ValueError("labels address the full product basis")
        amp = np.zeros(dim, dtype=complex)
        amp[basis_index(label)] = 1.0
        return cls(amp, "full", n)

    def overlap(self, other):
        return complex(np.vdot(self.amplitudes, other.amplitudes))


class EvolutionCache:
    """Eigendecomposition of one Hamiltonian, reusable across time points."""

    def __init__(self, eigensystem, fingerprint):
        self.eigensystem = eigensystem
        self.fingerprint = fingerprint

    @property
    def eigenvalues(self):
        return self.eigensystem.eigenvalues

    @property
    def eigenvectors(self):
        return self.eigensystem.eigenvectors

    @classmethod
    def from_matrix(cls, mat):
        mat = _as_matrix(mat)
        digest = hashlib.sha256(np.ascontiguousarray(mat).tobytes()).hexdigest()
        return cls(eig_hermitian(mat), digest)


_CACHE_LIMIT = 8
_cache_by_fingerprint = {}


def _as_matrix(op):
    if isinstance(op, ChainOperator):
        return op.dense()
    if isinstance(op, (HermitianEigenSystem, EvolutionCache)):
        raise TypeError("pass the eigensystem through evolution_cache-aware APIs")
    return np.asarray(op)


def evolution_cache(op):
    """Memoized eigendecomposition keyed by matrix content."""
    mat = _as_matrix(op)
    digest = hashlib.sha256(np.ascontiguousarray(mat).tobytes()).hexdigest()
    cached = _cache_by_fingerprint.get(digest)
    if cached is None:
        cached = EvolutionCache(eig_hermitian(mat), digest)
        if len(_cache_by_fingerprint) >= _CACHE_LIMIT:
            _cache_by_fingerprint.pop(next(iter(_cache_by_fingerprint)))
        _cache_by_fingerprint[digest] = cached
    return cached


def evolve(op, state, t, sign=1):
    """exp(i*sign*H*t) applied to a state (StateVector or plain vector)."""
    cache = op if isinstance(op, EvolutionCache) else evolution_cache(op)
    if isinstance(state, StateVector):
        out = apply_exp(cache.eigensystem, state.amplitudes, t, sign)
        return StateVector(out, state.basis, state.n)
    return apply_exp(cache.eigensystem, np.asarray(state, dtype=complex), t, sign)


def _state_index(state, dim):
    if isinstance(state, str):
        return basis_index(state)
    idx = int(state)
    if not 0 <= idx < dim:
        raise ValueError(f"basis index {idx} out of range for dimension {dim}")
    return idx


def transfer_amplitude(op, source, target, t, sign=1):
    """<target| exp(i*sign*H*t) |source> for computational basis states."""
    cache = op if isinstance(op, EvolutionCache) else evolution_cache(op)
    dim = cache.eigenvalues.shape[0]
    src = _state_index(source, dim)
    tgt = _state_index(target, dim)
    coeffs = cache.eigenvectors[tgt, :] * np.conj(cache.eigenvectors[src, :])
    return complex(np.sum(coeffs * np.exp(1j * sign * cache.eigenvalues * t)))


@dataclass(frozen=True)
class AmplitudeScan:
    """Time series of |amplitude| and arg(amplitude) over a grid."""

    times: np.ndarray
    abs_values: np.ndarray
    arg_values: np.ndarray
    max_abs: float
    argmax_time: float
    first_peak_time: float

    def rows(self):
        return zip(self.times, self.abs_values, self.arg_values)


def amplitude_scan(op, source, target, times, sign=1, peak_tol=1e-6):
    """Scan the transfer amplitude over a monotone time grid.

    Reports the grid maximum of |amplitude|, the time achieving it, and the
    earliest grid time coming within ``peak_tol`` of the maximum (ties from
    near-degenerate recurrences resolve to the first peak).
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a non-empty 1-d grid")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    cache = op if isinstance(op, EvolutionCache) else evolution_cache(op)
    dim = cache.eigenvalues.shape[0]
    src = _state_index(source, dim)
    tgt = _state_index(target, dim)
    coeffs = cache.eigenvectors[tgt, :] * np.conj(cache.eigenvectors[src, :])
    keep = np.abs(coeffs) > 1e-16
    series = kernels.phase_series(cache.eigenvalues[keep], coeffs[keep], times, float(sign))
    abs_vals = np.abs(series)
    k = int(np.argmax(abs_vals))
    max_abs = float(abs_vals[k])
    first = int(np.argmax(abs_vals >= max_abs - peak_tol))
    return AmplitudeScan(
        times=times,
        abs_values=abs_vals,
        arg_values=np.angle(series),
        max_abs=max_abs,
        argmax_time=float(times[k]),
        first_peak_time=float(times[first]),
    )


# ---------------------------------------------------------------------------
# qutrit transfer through the engineered chain
# ---------------------------------------------------------------------------

# fixed qutrit test set: basis states, balanced and lopsided superpositions,
# including complex relative phases
QUTRIT_TEST_STATES = (
    (1.0, 0.0, 0.0),
    (0.0, 1.0, 0.0),
    (0.0, 0.0, 1.0),
    (1 / np.sqrt(3), 1 / np.sqrt(3), 1 / np.sqrt(3)),
    (1 / np.sqrt(2), 1 / np.sqrt(2), 0.0),
    (1 / np.sqrt(2), 0.0, 1 / np.sqrt(2)),
    (0.0, 1 / np.sqrt(2), 1 / np.sqrt(2)),
    (1 / np.sqrt(3), 1j / np.sqrt(3), -1 / np.sqrt(3)),
    (np.sqrt(0.5), np.sqrt(0.3), np.sqrt(0.2) * np.exp(1j * np.pi / 4)),
    (0.0, 0.6, 0.8j),
)


def block_transfer_amplitudes(spec, t):
    """(f_up, f_down): end-to-end amplitudes of the two excitation bands."""
    n = spec.n
    block = engineered_sigma_block(spec)
    cache = evolution_cache(block)
    up = transfer_amplitude(cache, 0, n - 1, t, sign=spec.time_sign)
    down = transfer_amplitude(cache, n + 1, 2 * n, t, sign=spec.time_sign)
    return up, down


def qutrit_transfer_fidelity(spec, qutrit, t, phase_correct=False):
    """Fidelity of sending the qutrit (alpha, beta, gamma) through the chain.

    The chain starts in alpha|0..0> + beta|10..0> + gamma|m0..0> and the
    fidelity is taken against the same encoding on the last site after
    evolving for time t.  With ``phase_correct`` the fidelity is maximized
    over diagonal corrections diag(1, e^{i th1}, e^{i th2}) on the
    (vacuum, up, down) components; the optimum is closed-form (each theta
    cancels the corresponding band's transfer phase).
    """
    alpha, beta, gamma = (complex(x) for x in qutrit)
    norm = abs(alpha) ** 2 + abs(beta) ** 2 + abs(gamma) ** 2
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"qutrit amplitudes must be normalized, got |.|^2 = {norm}")
    f_up, f_down = block_transfer_amplitudes(spec, t)
    wa, wb, wg = abs(alpha) ** 2, abs(beta) ** 2, abs(gamma) ** 2
    if phase_correct:
        overlap = wa + wb * abs(f_up) + wg * abs(f_down)
    else:
        overlap = wa + wb * f_up + wg * f_down
    return float(abs(overlap) ** 2)


# ---------------------------------------------------------------------------
# mirroring test
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MirrorCheckResult:
    is_mirror: bool
    phase: float  # global phase phi with U(t) ~ e^{i phi} M
    residual: float
    commutator_residual: float
    even_phases: tuple
    odd_phases: tuple


def _mirror_matrix(n, space):
    if space == "sigma":
        return sigma_mirror_permutation(n)
    return chain_mirror_permutation(n)


def mirror_check(op, t, sign=1, space="full", tol=1e-8):
    """Test whether exp(i*sign*H*t) equals the site inversion up to a phase.

    Reports the optimal global phase, the entrywise residual against
    e^{i phi} M, the [H, M] commutator residual, and the distinct
    eigenphases exp(i E t) grouped by the mirror parity of their
    eigenvectors (mirroring requires each group to collapse to one value,
    the two groups differing by a factor -1).
    """
    if isinstance(op, ChainOperator):
        mat = op.dense()
        n = op.n_sites
    else:
        mat = np.asarray(op)
        if space == "sigma":
            n = (mat.shape[0] - 1) // 2
        else:
            n = round(np.log(mat.shape[0]) / np.log(3))
    mirror = _mirror_matrix(n, space)
    comm = float(np.max(np.abs(mat @ mirror - mirror @ mat)))
    cache = evolution_cache(mat)
    es = cache.eigensystem
    unitary = (es.eigenvectors * np.exp(1j * sign * es.eigenvalues * t)) @ es.eigenvectors.conj().T
    phi = float(np.angle(np.trace(mirror.T @ unitary)))
    residual = float(np.max(np.abs(unitary - np.exp(1j * phi) * mirror)))

    even_phases, odd_phases = [], []
    if comm <= 1e-10 * max(1.0, float(np.max(np.abs(mat)))):
        vals, pars = _clustered_parity_labels(mat, mirror)
        for v, p in zip(vals, pars):
            phase = np.exp(1j * sign * v * t)
            bucket = even_phases if p > 0 else odd_phases
            if not any(abs(phase - q) < 1e-9 for q in bucket):
                bucket.append(complex(phase))
    return MirrorCheckResult(
        is_mirror=residual <= tol,
        phase=phi,
        residual=residual,
        commutator_residual=comm,
        even_phases=tuple(even_phases),
        odd_phases=tuple(odd_phases),
    )


def _clustered_parity_labels(mat, mirror, cluster_tol=1e-9):
    """(eigenvalue, parity) pairs, diagonalizing the mirror inside clusters."""
    evals, vecs = np.linalg.eigh(mat)
    vals, pars = [], []
    i = 0
    while i < len(evals):
        j = i
        while j + 1 < len(evals) and evals[j + 1] - evals[i] < cluster_tol:
            j += 1
        cluster = vecs[:, i:j + 1]
        pv = np.linalg.eigvalsh(cluster.conj().T @ mirror @ cluster)
        for p in pv:
            vals.append(float(np.mean(evals[i:j + 1])))
            pars.append(1 if p > 0 else -1)
        i = j + 1
    return np.array(vals), np.array(pars)
