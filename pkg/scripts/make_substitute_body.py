"""Write the synthetic severity body used when RAND-MIPT is not available.

10,000 integer severities: 642 at or above 10 (so p_tail(10) = 0.0642,
which puts the mixture's catastrophe probability at 0.0244 for n = 1000)
and 9,358 in 1..9 with counts proportional to k**-2.
"""

import sys
from pathlib import Path

import numpy as np

N, N_TAIL = 10_000, 642


def body() -> np.ndarray:
    k = np.arange(1, 10)
    w = k ** -2.0
    counts = np.floor(w / w.sum() * (N - N_TAIL)).astype(int)
    counts[0] += (N - N_TAIL) - counts.sum()
    low = np.repeat(k, counts)
    q = (np.arange(N_TAIL) + 0.5) / N_TAIL
    high = np.maximum(10, np.round(10 * (1 - q) ** (-1 / 1.4))).astype(int)
    return np.concatenate([low, high])


if __name__ == "__main__":
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "src/tailboot/data/substitute_body.txt")
    lines = ["# synthetic severity body (deaths per event); see scripts/make_substitute_body.py",
             f"# n={N}, count >= 10: {N_TAIL}"]
    out.write_text("\n".join(lines + [str(v) for v in body()]) + "\n")
