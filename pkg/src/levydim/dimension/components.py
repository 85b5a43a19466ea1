"""Range dimension of a process with independent stable coordinate blocks."""

from __future__ import annotations


def stable_components_dim(components) -> float:
    """alpha_1 if alpha_1 <= d_1, else 1 + alpha_2 (1 - 1/alpha_1).

    ``components`` lists (alpha_j, d_j) with alpha_1 >= alpha_2 >= ... > 0.
    A single block gives min(alpha_1, d_1).
    """
    comps = [(float(a), int(d)) for a, d in components]
    if not comps:
        raise ValueError("need at least one component")
    alphas = [a for a, _ in comps]
    if any(not 0 < a <= 2 for a in alphas):
        raise ValueError("each alpha must lie in (0, 2]")
    if any(d < 1 for _, d in comps):
        raise ValueError("each block dimension must be at least 1")
    if any(b > a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("components must be sorted with alpha decreasing")
    a1, d1 = comps[0]
    if a1 <= d1:
        return a1
    if len(comps) == 1:
        return float(d1)
    return 1.0 + comps[1][0] * (1.0 - 1.0 / a1)
