"""Regenerate synthetic.csv (1,000 rows) deterministically.

Columns: id, age (integer years), heart_rate (bpm, one decimal), speed
(km/h, two decimals, about 2% blank cells).
"""

import csv
from pathlib import Path

import numpy as np


def main(path=Path(__file__).with_name("synthetic.csv"), n=1000, seed=20240101):
    rng = np.random.default_rng(seed)
    age = np.clip(np.round(rng.normal(52, 16, n)), 18, 90).astype(int)
    hr = np.round(rng.normal(78, 11, n), 1)
    speed = np.round(rng.gamma(4.0, 6.0, n), 2)
    blank = rng.random(n) < 0.02
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "age", "heart_rate", "speed"])
        for i in range(n):
            w.writerow([i + 1, age[i], hr[i], "" if blank[i] else speed[i]])


if __name__ == "__main__":
    main()
