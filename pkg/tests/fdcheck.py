"""Central finite differences as an oracle for jet derivatives."""

import numpy as np

STEP = 1e-4
NOISE_FLOOR = 1e-4


def fd_relative_error(jet_at, p, h: float = STEP) -> float:
    """Worst relative mismatch between jet partials and central differences.

    Order k+1 partials are differenced from the order-k partials of
    neighbouring jets, extrapolated to O(h^4).
    """
    p = np.asarray(p, float)
    centre = jet_at(p)
    levels = [lambda j: j.value, lambda j: j.d1, lambda j: j.d2]
    exact = [centre.d1, centre.d2, centre.d3]
    worst = 0.0
    for k, (take, want) in enumerate(zip(levels, exact)):
        fd = []
        for axis in range(3):
            e = np.zeros(3)
            e[axis] = h
            wide = (take(jet_at(p + e)) - take(jet_at(p - e))) / (2 * h)
            narrow = (take(jet_at(p + e / 2)) - take(jet_at(p - e / 2))) / h
            # Richardson step cancels the h^2 truncation term
            fd.append((4 * narrow - wide) / 3)
        fd = np.moveaxis(np.array(fd), 0, -1)
        # partials far below the level they are differenced from sit in cancellation noise,
        # so they are judged against that level instead
        floor = NOISE_FLOOR * max(np.max(np.abs(take(centre))), 1.0)
        scale = max(np.max(np.abs(want)), floor)
        worst = max(worst, np.max(np.abs(fd - want)) / scale)
    return worst
