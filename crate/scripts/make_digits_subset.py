#!/usr/bin/env python3
"""Export a balanced 1000-sample handwritten-digits subset as CSV.

Draws 100 samples per class (seeded) from scikit-learn's bundled 8x8
digits dataset, scales pixel intensities from [0, 16] to [0, 1], and
writes rows of 64 feature columns followed by an integer label column.
The output is the fixture consumed by the semi-supervised learning
tests and the `nnk ssl` examples in the README.

Usage: python3 scripts/make_digits_subset.py [out.csv]
"""

import sys

import numpy as np
from sklearn.datasets import load_digits

PER_CLASS = 100
SEED = 0


def main() -> None:
    out = sys.argv[1] if len(sys.argv) > 1 else "data/digits_1000.csv"
    digits = load_digits()
    rng = np.random.RandomState(SEED)

    rows = []
    for cls in range(10):
        idx = np.flatnonzero(digits.target == cls)
        picked = rng.choice(idx, size=PER_CLASS, replace=False)
        picked.sort()
        for i in picked:
            feats = digits.data[i] / 16.0
            rows.append((feats, cls))

    with open(out, "w") as f:
        for feats, cls in rows:
            cells = ["%.4f" % v for v in feats]
            cells.append(str(cls))
            f.write(",".join(cells) + "\n")
    print(f"wrote {len(rows)} rows to {out}")


if __name__ == "__main__":
    main()
