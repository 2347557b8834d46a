"""Benchmark dataset registry and CSV preparation.

Two of the five benchmark series (monthly airline passengers 1949-1960 and
annual Canadian lynx trappings 1821-1934) are classic public-domain data and
ship embedded here. The other three (radio frequencies, influenza deaths,
electricity supplied) must be supplied by the user; `prepare` writes clearly
labeled synthetic stand-ins with the same length and split geometry so the
full pipeline stays runnable without them.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

AIRLINE = np.array([
    112, 118, 132, 129, 121, 135, 148, 148, 136, 119, 104, 118,
    115, 126, 141, 135, 125, 149, 170, 170, 158, 133, 114, 140,
    145, 150, 178, 163, 172, 178, 199, 199, 184, 162, 146, 166,
    171, 180, 193, 181, 183, 218, 230, 242, 209, 191, 172, 194,
    196, 196, 236, 235, 229, 243, 264, 272, 237, 211, 180, 201,
    204, 188, 235, 227, 234, 264, 302, 293, 259, 229, 203, 229,
    242, 233, 267, 269, 270, 315, 364, 347, 312, 274, 237, 278,
    284, 277, 317, 313, 318, 374, 413, 405, 355, 306, 271, 306,
    315, 301, 356, 348, 355, 422, 465, 467, 404, 347, 305, 336,
    340, 318, 362, 348, 363, 435, 491, 505, 404, 359, 310, 337,
    360, 342, 406, 396, 420, 472, 548, 559, 463, 407, 362, 405,
    417, 391, 419, 461, 472, 535, 622, 606, 508, 461, 390, 432,
], dtype=float)

LYNX = np.array([
    269, 321, 585, 871, 1475, 2821, 3928, 5943, 4950, 2577, 523, 98,
    184, 279, 409, 2285, 2685, 3409, 1824, 409, 151, 45, 68, 213,
    546, 1033, 2129, 2536, 957, 361, 377, 225, 360, 731, 1638, 2725,
    2871, 2119, 684, 299, 236, 245, 552, 1623, 3311, 6721, 4254, 687,
    255, 473, 358, 784, 1594, 1676, 2251, 1426, 756, 299, 201, 229,
    469, 736, 2042, 2811, 4431, 2511, 389, 73, 39, 49, 59, 188,
    377, 1292, 4031, 3495, 587, 105, 153, 387, 758, 1307, 3465, 6991,
    6313, 3794, 1836, 345, 382, 808, 1388, 2713, 3800, 3091, 2985, 3790,
    674, 81, 80, 108, 229, 399, 1132, 2432, 3574, 2935, 1537, 529,
    485, 662, 1000, 1590, 2657, 3396,
], dtype=float)

#: per-dataset benchmark protocol: file, value column, split sizes, transform
PRESETS = {
    "airline": dict(filename="airline.csv", column="passengers",
                    train_len=101, test_len=43, transform=("log10", "detrend")),
    "lynx": dict(filename="lynx.csv", column="trappings",
                 train_len=80, test_len=34, transform=("log10",)),
    "radio": dict(filename="radio.csv", column="frequency",
                  train_len=216, test_len=24, transform=()),
    "flu": dict(filename="flu.csv", column="deaths",
                train_len=84, test_len=24, transform=()),
    "electricity": dict(filename="electricity.csv", column="supply",
                        train_len=181, test_len=40, transform=("log10", "detrend")),
}

DATASET_NAMES = tuple(PRESETS)
EMBEDDED = ("airline", "lynx")


def _synthetic_radio(rng: np.random.Generator) -> np.ndarray:
    t = np.arange(240)
    base = 8.0 + 2.5 * np.sin(2 * np.pi * t / 12 - 0.7) + 2.0 * np.sin(2 * np.pi * t / 130)
    return base + 0.35 * rng.standard_normal(t.size)


def _synthetic_flu(rng: np.random.Generator) -> np.ndarray:
    t = np.arange(132)
    season = np.maximum(np.sin(2 * np.pi * (t - 1) / 12), 0.0) ** 3
    values = 0.25 + 0.55 * season + 0.03 * rng.standard_normal(t.size)
    return np.maximum(values, 0.05)


def _synthetic_electricity(rng: np.random.Generator) -> np.ndarray:
    t = np.arange(221)
    base = 17000.0 + 45.0 * t + 1800.0 * np.sin(2 * np.pi * t / 12 + 0.4) \
        + 600.0 * np.sin(2 * np.pi * t / 6)
    return base + 350.0 * rng.standard_normal(t.size)


def dataset_values(name: str, seed: int = 20240901) -> np.ndarray:
    """Embedded values for airline/lynx, deterministic stand-ins otherwise."""
    if name == "airline":
        return AIRLINE.copy()
    if name == "lynx":
        return LYNX.copy()
    rng = np.random.default_rng(seed)
    if name == "radio":
        return _synthetic_radio(rng)
    if name == "flu":
        return _synthetic_flu(rng)
    if name == "electricity":
        return _synthetic_electricity(rng)
    raise KeyError(f"unknown dataset {name!r}")


def write_dataset_csv(name: str, path: Path) -> Path:
    values = dataset_values(name)
    column = PRESETS[name]["column"]
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", column])
        for t, v in enumerate(values):
            writer.writerow([t, f"{v:.10g}"])
    return path


def ensure_csv(name: str, data_dir: str | Path) -> Path:
    """Return the dataset CSV path, writing it first if missing."""
    if name not in PRESETS:
        raise KeyError(f"unknown dataset {name!r}; choose from {DATASET_NAMES}")
    path = Path(data_dir) / PRESETS[name]["filename"]
    if not path.exists():
        write_dataset_csv(name, path)
    return path


def prepare(data_dir: str | Path, names=None) -> list[Path]:
    """Write every requested dataset CSV (existing files are kept)."""
    names = list(names) if names else list(DATASET_NAMES)
    return [ensure_csv(name, data_dir) for name in names]
