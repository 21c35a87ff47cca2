"""Small statistical helpers shared by the reporting modules."""

import math


def wilson_interval(successes: int, total: int, z: float = 1.96) -> tuple:
    """Wilson score interval for a binomial proportion (95% by default)."""
    if total == 0:
        return (0.0, 1.0)
    phat = successes / total
    denom = 1.0 + z * z / total
    center = (phat + z * z / (2 * total)) / denom
    half = z * math.sqrt(phat * (1 - phat) / total + z * z / (4 * total * total)) / denom
    return (max(0.0, center - half), min(1.0, center + half))
