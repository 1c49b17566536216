"""Shared machinery for chains with the companion-matrix topology.

State 0 jumps to state ``k`` with probability ``f_k``; every state ``k > 0``
steps down to ``k - 1`` with probability one.  The emitted series is on
whenever the chain is away from state 0, so a jump to ``k`` produces a packet
train of exactly ``k`` packets.
"""
from __future__ import annotations

import numpy as np

from ._sampling import excursion_path, sample_jumps


class CompanionChain:
    """Mixin; subclasses provide ``transition_prob``, ``log_jump_tail``, ``mean``."""

    def transition_prob(self, k):  # pragma: no cover - abstract
        raise NotImplementedError

    def log_jump_tail(self, k: np.ndarray) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    def mean(self) -> float:  # pragma: no cover
        raise NotImplementedError

    def transition_row(self, state: int, k_max: int) -> tuple[np.ndarray, float]:
        """Probabilities of moving to states ``0..k_max`` and the leftover mass."""
        if state < 0:
            raise ValueError("state must be nonnegative")
        row = np.zeros(k_max + 1)
        if state == 0:
            row[:] = self.transition_prob(np.arange(k_max + 1))
            tail = float(np.exp(self.log_jump_tail(np.array([k_max + 1]))[0]))
            return row, tail
        if state - 1 <= k_max:
            row[state - 1] = 1.0
            return row, 0.0
        return row, 1.0

    def sample_jumps(self, size: int, rng: np.random.Generator) -> np.ndarray:
        return sample_jumps(self.log_jump_tail, size, rng)

    def state_path(self, n: int, rng: np.random.Generator) -> np.ndarray:
        def draw(m, g):
            j = self.sample_jumps(m, g)
            return j, j

        hint = 1.0 / max(1.0 - self.mean(), 1e-9)
        return excursion_path(n, rng, draw, countdown=True, block_hint=hint)

    @staticmethod
    def emit(states: np.ndarray) -> np.ndarray:
        return (states != 0).astype(np.int8)
