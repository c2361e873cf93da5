"""Per-trial random streams derived from a master seed."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TrialStreams:
    # Noise draws for the trial's observations
    noise: np.random.Generator
    # Seed handed to the Lloyd multistart of both methods
    fit_seed: int


def make_streams(master_seed: int, trial: int) -> TrialStreams:
    """
    Deterministically create independent streams for one Monte Carlo trial.

    Structure:
      trial
        ├── noise
        └── fit (collapsed to a 63-bit integer seed)

    The streams depend only on (master_seed, trial), so any trial can be
    replayed in isolation.
    """
    root = np.random.SeedSequence([int(master_seed), int(trial)])
    ss_noise, ss_fit = root.spawn(2)
    fit_seed = int(ss_fit.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
    return TrialStreams(noise=np.random.default_rng(ss_noise), fit_seed=fit_seed)
