"""Canned states for the analyzer and the seeded random-state generator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exterior import FermionState
from .qcore import haar_random_unitary
from .slater import FermionPairState, compose

# location (x) spin ordering: L-up, L-down, R-up, R-down
LR_LABELS = {1: "L↑", 2: "L↓", 3: "R↑", 4: "R↓"}


@dataclass(frozen=True)
class Scenario:
    name: str
    state: FermionState
    labels: dict[int, str] = field(default_factory=dict)
    # 1-based basis indices of the location projectors, when the state has a location structure
    left: tuple[int, ...] = ()
    right: tuple[int, ...] = ()
    description: str = ""


def _scenarios() -> dict[str, Scenario]:
    r = 1.0 / math.sqrt(2.0)
    return {
        "singlet": Scenario(
            "singlet",
            FermionState.from_terms(2, [(1.0, (0, 1))]),
            {1: "↑", 2: "↓"},
            description="spin singlet of two fermions with no spatial degree of freedom",
        ),
        "eprb": Scenario(
            "eprb",
            FermionState.from_terms(4, [(r, (0, 3)), (-r, (1, 2))]),
            LR_LABELS,
            (1, 2),
            (3, 4),
            description="(|L,up> ^ |R,down> - |L,down> ^ |R,up>) / sqrt2",
        ),
        "lr-product": Scenario(
            "lr-product",
            FermionState.from_terms(4, [(1.0, (0, 3))]),
            LR_LABELS,
            (1, 2),
            (3, 4),
            description="|L,up> ^ |R,down>",
        ),
    }


SCENARIOS = _scenarios()


def scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; choose from {', '.join(sorted(SCENARIOS))}") from None


def random_state(dim: int, rank: int, seed: int | np.random.Generator | None = 0) -> FermionPairState:
    """Haar-rotated canonical form with exactly ``rank`` nonzero block coefficients.

    Magnitudes are drawn from ``[0.2, 1)`` and phases uniformly before
    normalization, which keeps every coefficient well above the rank cutoff.
    """
    if not 1 <= rank <= dim // 2:
        raise ValueError(f"Slater rank {rank} is infeasible in dimension {dim} (need 1 <= rank <= {dim // 2})")
    rng = np.random.default_rng(seed)
    mags = rng.uniform(0.2, 1.0, size=rank)
    phases = rng.uniform(-math.pi, math.pi, size=rank)
    u = haar_random_unitary(dim, rng)
    return compose(u, mags * np.exp(1j * phases))
