import numpy as np


def random_window_positions(rng, n=10, scale=0.1):
    """A smooth random walk: windows resembling plausible motion."""
    steps = rng.normal(0.0, scale, (n, 2))
    return np.cumsum(steps, axis=0)
