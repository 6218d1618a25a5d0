"""Parity-resolved spectra and the mirroring feasibility diagnosis.

Parity refers to the eigenvalue (+1 even, -1 odd) under the site-inversion
permutation: the two-site exchange for n = 2, or reversal of the whole
chain for general n.  An interaction can only generate perfect mirroring
when, up to an affine rescaling, even-parity eigenstates carry even
integer eigenvalues and odd-parity states odd integers.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .spin_ops import ChainOperator

_SQRT2 = float(np.sqrt(2.0))
_SQRT6 = float(np.sqrt(6.0))

# parity-resolved spectra of the candidate couplings as tabulated in the
# literature, sorted descending (even sector: 6 states, odd sector: 3)
LITERATURE_SPECTRA = {
    "O1": ([_SQRT2, 1.0, 1.0, 0.0, 0.0, -_SQRT2], [0.0, -1.0, -1.0]),
    "O2": ([1.0, 0.0, 0.0, 0.0, 0.0, -1.0], [0.0, 0.0, -1.0]),
    "O3": ([2.0, 1.0, 1.0, 1.0, 1.0, 0.0], [1.0, 0.0, 0.0]),
    "O4": ([1.0, 1.0, 1.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0]),
    "O5": ([_SQRT6, _SQRT2, 0.0, 0.0, -_SQRT2, -_SQRT6], [0.0, 0.0, 0.0]),
}

# two tabulated rows violate the trace of their own operator and are
# corrected here; the comparison report keeps both so the discrepancy is
# always surfaced, never silently patched over
ADJUDICATED_SPECTRA = {
    **LITERATURE_SPECTRA,
    # tr(Sz x Sz) = 0 forces a second +1 in the even sector
    "O2": ([1.0, 1.0, 0.0, 0.0, 0.0, -1.0], [0.0, 0.0, -1.0]),
    # tr(O3) = 8 while the tabulated sectors sum to 7; the odd sector
    # carries a doubly degenerate +1
    "O3": ([2.0, 1.0, 1.0, 1.0, 1.0, 0.0], [1.0, 1.0, 0.0]),
}

ADJUDICATION_NOTES = {
    "O2": "tabulated even sector {1,0,0,0,0,-1} sums to 0 while the odd sums to -1, "
          "violating tr(Sz.Sz) = 0; the even sector must contain 1 twice",
    "O3": "tabulated sectors sum to 7 while tr(O3) = 8; the odd sector must "
          "contain 1 twice",
    "O5": "the asymmetric quartic-cubic form does not commute with the exchange; "
          "the site-symmetrized form reproduces the tabulated spectra exactly",
}

CANDIDATE_FORMS = {
    "O1": "Sx.Sx + Sy.Sy",
    "O2": "Sz.Sz",
    "O3": "Sx2.Sx2 + Sy2.Sy2",
    "O4": "Sz2.Sz2",
    "O5": "Sx2.Sx + Sy2.Sy + Sx.Sx2 + Sy.Sy2",
}


def exchange_permutation(n=2):
    """Permutation matrix swapping the two sites of a 9-dimensional space."""
    if n != 2:
        raise ValueError("exchange_permutation is the two-site mirror")
    perm = np.zeros((9, 9))
    for a in range(3):
        for b in range(3):
            perm[b * 3 + a, a * 3 + b] = 1.0
    return perm


def chain_mirror_permutation(n):
    """Permutation matrix inverting site order (site i <-> n+1-i) on 3^n."""
    dim = 3 ** n
    perm = np.zeros((dim, dim))
    for idx in range(dim):
        trits = [(idx // 3 ** (n - 1 - k)) % 3 for k in range(n)]
        mirrored = 0
        for t in reversed(trits):
            mirrored = mirrored * 3 + t
        perm[mirrored, idx] = 1.0
    return perm


def sigma_mirror_permutation(n):
    """Site inversion restricted to the sigma basis (up and down runs reversed)."""
    dim = 2 * n + 1
    perm = np.zeros((dim, dim))
    for i in range(n):
        perm[n - 1 - i, i] = 1.0
        perm[2 * n - i, n + 1 + i] = 1.0
    perm[n, n] = 1.0
    return perm


def _mirror_for(kind, n):
    if kind == "two_site_exchange":
        if n != 2:
            raise ValueError("two_site_exchange parity requires n = 2")
        return exchange_permutation()
    if kind == "chain_mirror":
        return chain_mirror_permutation(n)
    raise ValueError(f"unknown parity kind {kind!r}")


def parity_projectors(kind, n):
    """(P_even, P_odd) = ((I + M)/2, (I - M)/2) for the chosen inversion."""
    mirror = _mirror_for(kind, n)
    eye = np.eye(mirror.shape[0])
    return (eye + mirror) / 2.0, (eye - mirror) / 2.0


@dataclass(frozen=True)
class ParitySplit:
    """Eigenvalues of an operator resolved by mirror parity, sorted descending."""

    even: tuple
    odd: tuple
    parity_operator: str

    @property
    def dim(self):
        return len(self.even) + len(self.odd)


class ParityCommutationError(ValueError):
    """Operator does not commute with the inversion, no parity split exists."""


def parity_spectrum(op, kind="two_site_exchange", commute_tol=1e-12, cluster_tol=1e-9):
    """Split an operator's spectrum by mirror parity.

    Eigenvalues are clustered to ``cluster_tol`` and the mirror is
    diagonalized inside each cluster, so degenerate subspaces that mix
    parities under a plain eigensolver are resolved correctly.
    """
    if isinstance(op, ChainOperator):
        n = op.n_sites
        mat = op.dense()
    else:
        mat = np.asarray(op)
        n = round(np.log(mat.shape[0]) / np.log(3))
    mirror = _mirror_for(kind, n)
    comm = float(np.max(np.abs(mat @ mirror - mirror @ mat)))
    if comm > commute_tol * max(1.0, float(np.max(np.abs(mat)))):
        raise ParityCommutationError(
            f"operator does not commute with the {kind} inversion: residual {comm:.3e}"
        )
    evals, vecs = np.linalg.eigh(mat)
    even, odd = [], []
    i = 0
    while i < len(evals):
        j = i
        while j + 1 < len(evals) and evals[j + 1] - evals[i] < cluster_tol:
            j += 1
        cluster = vecs[:, i:j + 1]
        msub = cluster.conj().T @ mirror @ cluster
        parities = np.linalg.eigvalsh(msub)
        for p in parities:
            target = even if p > 0 else odd
            target.append(float(np.mean(evals[i:j + 1])))
        i = j + 1
    return ParitySplit(
        even=tuple(sorted(even, reverse=True)),
        odd=tuple(sorted(odd, reverse=True)),
        parity_operator=kind,
    )


def parity_labels(op, kind="two_site_exchange", cluster_tol=1e-9):
    """Per-eigenvector (eigenvalue, parity) pairs with parity-pure vectors."""
    if isinstance(op, ChainOperator):
        mat = op.dense()
        n = op.n_sites
    else:
        mat = np.asarray(op)
        n = round(np.log(mat.shape[0]) / np.log(3))
    mirror = _mirror_for(kind, n)
    evals, vecs = np.linalg.eigh(mat)
    out_vals, out_pars, out_vecs = [], [], []
    i = 0
    while i < len(evals):
        j = i
        while j + 1 < len(evals) and evals[j + 1] - evals[i] < cluster_tol:
            j += 1
        cluster = vecs[:, i:j + 1]
        msub = cluster.conj().T @ mirror @ cluster
        pvals, pvecs = np.linalg.eigh(msub)
        rotated = cluster @ pvecs
        for k, p in enumerate(pvals):
            out_vals.append(float(np.mean(evals[i:j + 1])))
            out_pars.append(1 if p > 0 else -1)
            out_vecs.append(rotated[:, k])
        i = j + 1
    return np.array(out_vals), np.array(out_pars), np.column_stack(out_vecs)


# ---------------------------------------------------------------------------
# mirroring feasibility
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FeasibilityReport:
    """Diagnosis of whether a parity split admits mirror dynamics.

    ``parity_overlap`` flags an eigenvalue shared by both parity sectors
    (no affine map can then give it both an even and an odd integer).
    ``ratios_rational`` reports whether all eigenvalue gaps are rational
    multiples of a common unit (bounded-denominator detection, heuristic).
    When a unit exists, ``parity_consistent`` says whether the integer
    pattern matches the even/odd sector assignment.
    """

    feasible: bool
    parity_overlap: bool
    ratios_rational: bool
    parity_consistent: bool | None
    rational_unit: float | None
    notes: tuple = field(default=())


def _rational_multiple(x, tol=1e-9, max_den=64):
    frac = Fraction(x).limit_denominator(max_den)
    if abs(x - float(frac)) <= tol:
        return frac
    return None


def mirroring_feasibility_report(split, tol=1e-9, max_den=64):
    """Decide whether the split can support mirroring after affine rescaling.

    Mirroring needs an affine map sending every eigenvalue to an integer
    whose parity matches its sector.  Equivalently: all pairwise gaps are
    integer multiples of a unit, with cross-sector gaps odd multiples and
    same-sector gaps even multiples.
    """
    values = [(v, 0) for v in split.even] + [(v, 1) for v in split.odd]
    notes = []

    overlap = False
    for v, s in values:
        for w, sw in values:
            if s != sw and abs(v - w) <= tol:
                overlap = True
    if overlap:
        notes.append("an eigenvalue occurs in both parity sectors")

    # cross-sector 0-gaps already decide infeasibility; gap rationality is
    # assessed on the remaining structure
    ref_val, ref_sec = values[0]
    gaps = [(v - ref_val, s) for v, s in values[1:]]
    nonzero = [g for g, _ in gaps if abs(g) > tol]
    if not nonzero:
        notes.append("single distinct eigenvalue; trivially rational")
        return FeasibilityReport(
            feasible=not overlap and len({s for _, s in values}) == 1,
            parity_overlap=overlap,
            ratios_rational=True,
            parity_consistent=None,
            rational_unit=None,
            notes=tuple(notes),
        )

    base = min(nonzero, key=abs)
    fracs = []
    rational = True
    for g, _ in gaps:
        frac = _rational_multiple(g / base, tol=tol, max_den=max_den)
        if frac is None:
            rational = False
            notes.append(f"gap ratio {g / base:.9f} is not rational within denominator {max_den}")
            break
        fracs.append(frac)

    unit = None
    consistent = None
    if rational:
        denom = 1
        for frac in fracs:
            denom = denom * frac.denominator // np.gcd(denom, frac.denominator)
        unit = abs(base) / denom
        multiples = [round(g / unit) for g, _ in gaps]
        consistent = True
        for m, (_, s) in zip(multiples, gaps):
            want_odd = s != ref_sec
            if (m % 2 == 1) != want_odd:
                consistent = False
        if not consistent:
            notes.append("integer pattern does not alternate with parity sectors")

    feasible = (not overlap) and rational and bool(consistent)
    return FeasibilityReport(
        feasible=feasible,
        parity_overlap=overlap,
        ratios_rational=rational,
        parity_consistent=consistent,
        rational_unit=unit,
        notes=tuple(notes),
    )


def _split_deviation(split, reference):
    ref_even, ref_odd = reference
    if len(split.even) != len(ref_even) or len(split.odd) != len(ref_odd):
        return float("inf")
    dev_e = max((abs(a - b) for a, b in zip(split.even, ref_even)), default=0.0)
    dev_o = max((abs(a - b) for a, b in zip(split.odd, ref_odd)), default=0.0)
    return max(dev_e, dev_o)


def reference_comparison(name, split, tol=1e-10):
    """Compare a computed split against tabulated and adjudicated references.

    Returns a dict with both deviations, match flags, and (for the rows
    whose tabulated values fail their own consistency checks) the
    adjudication note.  A deviation from the tabulated values is reported
    explicitly, never hidden behind the corrected numbers.
    """
    dev_lit = _split_deviation(split, LITERATURE_SPECTRA[name])
    dev_adj = _split_deviation(split, ADJUDICATED_SPECTRA[name])
    return {
        "deviation_from_literature": dev_lit,
        "deviation_from_adjudicated": dev_adj,
        "matches_literature": dev_lit <= tol,
        "matches_adjudicated": dev_adj <= tol,
        "note": ADJUDICATION_NOTES.get(name),
    }
