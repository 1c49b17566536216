"""Pseudo-self-similar traffic (PSST) model, infinite-state version.

From state 0 the chain jumps to state ``i >= 1`` with probability ``a^-i``
and otherwise stays put.  State ``i`` returns to 0 with probability
``(q/a)^i`` and otherwise stays, so it is held for a geometric time.

Variant A is on only in state 0; variant B is its complement.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from ._sampling import excursion_path, exponential_geometric, sample_jumps


@dataclass(frozen=True)
class PsstParams:
    a: float
    q: float
    variant: Literal["A", "B"] = "B"

    def __post_init__(self):
        if self.variant not in ("A", "B"):
            raise ValueError(f"variant must be 'A' or 'B', got {self.variant!r}")
        if not self.a > self.q > 1:
            raise ValueError(f"PSST needs a > q > 1, got a={self.a}, q={self.q}")
        if not self.a > 2:
            # row 0 of the infinite chain keeps 1 - 1/(a-1) on the diagonal
            raise ValueError(f"infinite PSST chain needs a > 2, got a={self.a}")

    @property
    def stay_at_zero(self) -> float:
        return 1.0 - 1.0 / (self.a - 1.0)

    def mean(self) -> float:
        return psst_mean(self)

    def equilibrium(self, k):
        return psst_equilibrium(self, k)

    def transition_row(self, state: int, k_max: int) -> tuple[np.ndarray, float]:
        """Probabilities of moving to states ``0..k_max`` and the leftover mass."""
        row = np.zeros(k_max + 1)
        if state == 0:
            i = np.arange(1, k_max + 1, dtype=float)
            row[0] = self.stay_at_zero
            row[1:] = self.a ** -i
            return row, self.a ** -float(k_max) / (self.a - 1.0)
        back = (self.q / self.a) ** state
        row[0] = back
        if state <= k_max:
            row[state] = 1.0 - back
            return row, 0.0
        return row, 1.0 - back

    def log_jump_tail(self, k: np.ndarray) -> np.ndarray:
        return (1.0 - k.astype(float)) * np.log(self.a) - np.log(self.a - 1.0)

    def _holding_times(self, j: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        r = np.zeros(j.size, dtype=np.int64)
        away = j > 0
        p = np.exp(j[away] * np.log(self.q / self.a))
        with np.errstate(divide="ignore"):
            r[away] = exponential_geometric(p, rng)
        return r

    def state_path(self, n: int, rng: np.random.Generator) -> np.ndarray:
        def draw(m, g):
            j = sample_jumps(self.log_jump_tail, m, g)
            return j, self._holding_times(j, g)

        # mean block length is 1/pi_0
        hint = self.q / (self.q - 1.0)
        return excursion_path(n, rng, draw, countdown=False, block_hint=hint)

    def emit(self, states: np.ndarray) -> np.ndarray:
        on = states == 0 if self.variant == "A" else states != 0
        return on.astype(np.int8)

    def return_times(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Independent first-return times to state 0, starting from state 0."""
        j = sample_jumps(self.log_jump_tail, count, rng)
        return 1 + self._holding_times(j, rng)


def psst_mean(p: PsstParams) -> float:
    pi0 = (p.q - 1.0) / p.q
    return pi0 if p.variant == "A" else 1.0 - pi0


def psst_fit_q(mu: float, variant: Literal["A", "B"] = "B") -> float:
    """``q`` reproducing the mean ``mu``: ``1/(1 - mu)`` for A, ``1/mu`` for B."""
    if not 0 < mu < 1:
        raise ValueError(f"mean must lie in (0, 1), got {mu}")
    if variant == "A":
        return 1.0 / (1.0 - mu)
    if variant == "B":
        return 1.0 / mu
    raise ValueError(f"variant must be 'A' or 'B', got {variant!r}")


def psst_equilibrium(p: PsstParams, k):
    k_arr = np.asarray(k)
    if np.any(k_arr < 0):
        raise ValueError("k must be nonnegative")
    out = (p.q - 1.0) / p.q * p.q ** -k_arr.astype(float)
    return float(out) if out.ndim == 0 else out
