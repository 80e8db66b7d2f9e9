"""Brute-force reference simulator.

Multiplies out prod_{i in s} (sum_k U[k, i] a_k^dag) as a polynomial in
creation operators and reads Fock amplitudes off the monomials.  Shares no
code with the permanent path, so agreement between the two is meaningful.
Meant for tests and small N only.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .conditional import InputEnsemble, OccupationVector, weight
from .errors import DimensionError, SizeExceeded
from .unitary import Unitary

MAX_PHOTONS = 12
PRUNE = 1e-15


@dataclass(frozen=True)
class FockPolynomial:
    """Output state of one input pattern: Fock occupation -> amplitude."""

    grade: int
    terms: dict

    def amplitude(self, n) -> complex:
        return self.terms.get(tuple(int(x) for x in n), 0j)

    def norm_squared(self) -> float:
        return sum(abs(a) ** 2 for a in self.terms.values())


def expand(unitary: Unitary, s: OccupationVector) -> FockPolynomial:
    n_modes = unitary.dim
    if len(s.bits) != n_modes:
        raise DimensionError("occupation vector does not match the network size")
    if s.photons > MAX_PHOTONS:
        raise SizeExceeded(f"oracle expansion limited to {MAX_PHOTONS} photons")
    u = unitary.entries
    # monomial coefficients: exponent vector of a^dag -> complex
    poly = {(0,) * n_modes: 1 + 0j}
    for i in s.support:
        nxt: dict = {}
        for occ, amp in poly.items():
            for k in range(n_modes):
                coef = u[k, i]
                if coef == 0:
                    continue
                key = occ[:k] + (occ[k] + 1,) + occ[k + 1:]
                nxt[key] = nxt.get(key, 0j) + amp * coef
        poly = nxt
    # (a_k^dag)^m |0> = sqrt(m!) |m>
    terms = {}
    for occ, amp in poly.items():
        a = amp * math.sqrt(math.prod(math.factorial(m) for m in occ))
        if abs(a) >= PRUNE:
            terms[occ] = complex(a)
    return FockPolynomial(s.photons, terms)


def outcome_probability(unitary: Unitary, ensemble: InputEnsemble, n) -> float:
    """<n|rho_trans|n> summed over all 2^N input patterns."""
    n = tuple(int(x) for x in n)
    if len(n) != unitary.dim or ensemble.n_modes != unitary.dim:
        raise DimensionError("output occupation, ensemble and network must share N")
    if any(x < 0 for x in n):
        raise ValueError(f"negative occupation in {n}")
    total = 0.0
    for bits in itertools.product((0, 1), repeat=unitary.dim):
        s = OccupationVector(bits)
        if s.photons != sum(n):
            continue
        w = weight(ensemble, s)
        if w == 0.0:
            continue
        total += w * abs(expand(unitary, s).amplitude(n)) ** 2
    return total
