"""Bundled data and synthetic benchmark generators.

The generator geometries are artifact choices, fixed here once:

- mouse: unit head disc at the origin, two half-radius ear discs tangent to
  it at 45 and 135 degrees (center distance 1.5), sampled by area.
- tset: T-shaped union of a 6x2 top bar and a 2x6 stem, equal areas.
- fourgauss: four sigma = 0.06 spherical Gaussians at the corners of the
  (0.2, 0.8)^2 square, equal weights.
- mixshapes: two discs of radius 2*sqrt(350) (per-axis variance 350, so a
  fixedr 350 model is exact) and five 2*sqrt(9000) x 2*sqrt(8) ellipses
  (per-axis variances 9000 and 8) at spread-out centers and rotations.
"""

from __future__ import annotations

import importlib.resources
import io

import numpy as np

__all__ = ["load_faithful", "generate", "generate_labeled", "GENERATOR_NAMES"]

GENERATOR_NAMES = ("mouse", "tset", "fourgauss", "mixshapes")


def load_faithful() -> np.ndarray:
    """The 272x2 Old Faithful matrix (eruptions, waiting)."""
    text = importlib.resources.files("cecluster").joinpath("data/faithful.csv").read_text()
    return np.loadtxt(io.StringIO(text), delimiter=",", skiprows=1)


def _disc(rng: np.random.Generator, n: int, center, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.random(n))
    t = 2.0 * np.pi * rng.random(n)
    return np.column_stack([r * np.cos(t), r * np.sin(t)]) + np.asarray(center)


def _ellipse(rng, n, center, a, b, angle):
    r = np.sqrt(rng.random(n))
    t = 2.0 * np.pi * rng.random(n)
    x = a * r * np.cos(t)
    y = b * r * np.sin(t)
    c, s = np.cos(angle), np.sin(angle)
    return np.column_stack([c * x - s * y, s * x + c * y]) + np.asarray(center)


def _rect(rng, n, x0, x1, y0, y1):
    return np.column_stack([rng.uniform(x0, x1, n), rng.uniform(y0, y1, n)])


def _sizes(rng, n, weights):
    comp = np.searchsorted(np.cumsum(weights)[:-1], rng.random(n), side="right")
    return np.bincount(comp, minlength=len(weights))


def generate_labeled(name: str, seed: int, n: int):
    """Like generate() but also returns the generative component label per row."""
    if n < 100:
        raise ValueError("generators require n >= 100")
    rng = np.random.default_rng(seed)
    if name == "mouse":
        d = 1.5 / np.sqrt(2.0)
        sizes = _sizes(rng, n, [2 / 3, 1 / 6, 1 / 6])
        parts = [
            _disc(rng, sizes[0], (0.0, 0.0), 1.0),
            _disc(rng, sizes[1], (-d, d), 0.5),
            _disc(rng, sizes[2], (d, d), 0.5),
        ]
    elif name == "tset":
        sizes = _sizes(rng, n, [0.5, 0.5])
        parts = [
            _rect(rng, sizes[0], -3.0, 3.0, 4.0, 6.0),
            _rect(rng, sizes[1], -1.0, 1.0, -2.0, 4.0),
        ]
    elif name == "fourgauss":
        sizes = _sizes(rng, n, [0.25] * 4)
        corners = [(0.2, 0.2), (0.2, 0.8), (0.8, 0.2), (0.8, 0.8)]
        parts = [rng.normal(size=(m, 2)) * 0.06 + np.asarray(c) for m, c in zip(sizes, corners)]
    elif name == "mixshapes":
        base, extra = divmod(n, 7)
        sizes = [base + (1 if i < extra else 0) for i in range(7)]
        r_disc = 2.0 * np.sqrt(350.0)
        a, b = 2.0 * np.sqrt(9000.0), 2.0 * np.sqrt(8.0)
        parts = [
            _disc(rng, sizes[0], (-400.0, 0.0), r_disc),
            _disc(rng, sizes[1], (2450.0, 0.0), r_disc),
        ]
        for j in range(5):
            parts.append(_ellipse(rng, sizes[2 + j], (500.0 * j, 0.0), a, b, np.pi * j / 5.0))
    else:
        raise ValueError(f"unknown generator {name!r}")
    data = np.concatenate(parts)
    labels = np.repeat(np.arange(len(parts)), [p.shape[0] for p in parts])
    order = rng.permutation(data.shape[0])
    return np.ascontiguousarray(data[order]), labels[order]


def generate(name: str, seed: int, n: int) -> np.ndarray:
    """Sample one of the named synthetic benchmark sets; n >= 100."""
    return generate_labeled(name, seed, n)[0]
