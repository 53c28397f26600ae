"""Synthetic binary-classification datasets with known ground truth.

Every realizable generator records the polynomial degree t of a separating
polynomial and carries the witness itself (margin included), so tests can
verify y_i * P(x_i) >= margin directly. The conflicting-label generator
instead records the minimum achievable misclassification rate. Features
stay inside [-3, 3]^d so early exponential-neuron activations remain in
floating-point range.

File format, one dataset per file:

    # landscape-lab v1; d=<d>; n=<n>; generator=<name>; t=<t>; seed=<s>
    x1,...,xd,label

with optional `margin=<m>` and `min_error=<e>` header fields and all reals
printed with 17 significant digits for exact round-trips.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Polynomial",
    "DatasetMetadata",
    "Dataset",
    "gen_linearly_separable",
    "gen_xor",
    "gen_circles",
    "gen_poly_separable",
    "gen_conflicting",
    "save",
    "load",
]

FORMAT_TOKEN = "landscape-lab v1"
FEATURE_BOUND = 3.0


@dataclass(frozen=True)
class Polynomial:
    """Sparse polynomial: ((exponent tuple, coefficient), ...)."""

    terms: tuple[tuple[tuple[int, ...], float], ...]

    @property
    def degree(self) -> int:
        return max((sum(e) for e, _ in self.terms), default=0)

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.zeros(X.shape[0])
        for exponents, coeff in self.terms:
            out += coeff * np.prod(X ** np.asarray(exponents), axis=1)
        return out


@dataclass(frozen=True)
class DatasetMetadata:
    generator: str
    seed: int | None = None
    degree: int | None = None
    margin: float | None = None
    min_error: float | None = None


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    metadata: DatasetMetadata
    witness: Polynomial | None = None

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        labels = np.asarray(self.labels, dtype=int)
        if features.ndim != 2 or features.shape[0] < 1:
            raise ValueError(f"features must be (n, d) with n >= 1, got {features.shape}")
        if labels.shape != (features.shape[0],):
            raise ValueError("labels must be one per sample")
        if not np.all(np.isin(labels, (-1, 1))):
            raise ValueError("labels must be -1 or +1")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]


def _dedup_ok(X: np.ndarray, row: np.ndarray) -> bool:
    return not any(np.array_equal(row, existing) for existing in X)


def gen_linearly_separable(n: int, d: int, margin: float, seed: int) -> Dataset:
    """Points in the radius-3 ball labeled by a random hyperplane.

    Every sample satisfies y * (w.x + b) >= margin for the generating
    plane, duplicates are resampled, and the witness is the plane itself.
    """
    if margin <= 0:
        raise ValueError(f"margin must be positive, got {margin}")
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(d)
    w /= np.linalg.norm(w)
    b = rng.uniform(-0.5, 0.5)
    rows: list[np.ndarray] = []
    while len(rows) < n:
        x = rng.standard_normal(d)
        x *= FEATURE_BOUND * rng.uniform() ** (1.0 / d) / np.linalg.norm(x)
        if abs(w @ x + b) < margin or not _dedup_ok(rows, x):
            continue
        rows.append(x)
    X = np.array(rows)
    labels = np.where(X @ w + b >= 0, 1, -1)
    terms = tuple(
        (tuple(1 if j == i else 0 for j in range(d)), float(w[i])) for i in range(d)
    ) + (((0,) * d, float(b)),)
    return Dataset(
        X,
        labels,
        DatasetMetadata("linearly_separable", seed=seed, degree=1, margin=margin),
        witness=Polynomial(terms),
    )


def gen_xor() -> Dataset:
    """The four corners (+-1, +-1) labeled by the sign product.

    Not linearly separable; the polynomial x1*x2 classifies it with margin 1.
    """
    X = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])
    labels = np.array([1, -1, -1, 1])
    witness = Polynomial((((1, 1), 1.0),))
    return Dataset(X, labels, DatasetMetadata("xor", degree=2, margin=1.0), witness=witness)


def gen_circles(n: int, seed: int) -> Dataset:
    """Inner disk (radius < 1, label +1) vs outer annulus (radius > 2, label -1).

    Separated by 2.25 - |x|^2 with margin 1.25; the degree-2 special case of
    the polynomial generator.
    """
    if n < 2:
        raise ValueError("need at least 2 samples")
    rng = np.random.default_rng(seed)
    rows: list[np.ndarray] = []
    labels: list[int] = []
    n_inner = n // 2
    while len(rows) < n:
        inner = len(rows) < n_inner
        radius = np.sqrt(rng.uniform()) if inner else np.sqrt(rng.uniform(4.0 + 1e-9, 9.0))
        angle = rng.uniform(0.0, 2.0 * np.pi)
        x = radius * np.array([np.cos(angle), np.sin(angle)])
        if not _dedup_ok(rows, x):
            continue
        rows.append(x)
        labels.append(1 if inner else -1)
    witness = Polynomial((((0, 0), 2.25), ((2, 0), -1.0), ((0, 2), -1.0)))
    return Dataset(
        np.array(rows),
        np.array(labels),
        DatasetMetadata("circles", seed=seed, degree=2, margin=1.25),
        witness=witness,
    )


def gen_poly_separable(n: int, d: int, degree: int, seed: int, margin: float = 0.5) -> Dataset:
    """Points in [-3, 3]^d labeled by the sign of a random degree-t polynomial.

    Samples landing within `margin` of the zero set are redrawn, so the
    polynomial itself is a witness with the declared margin.
    """
    if degree < 1:
        raise ValueError(f"degree must be >= 1, got {degree}")
    if margin <= 0:
        raise ValueError(f"margin must be positive, got {margin}")
    rng = np.random.default_rng(seed)
    exponents = [e for e in itertools.product(range(degree + 1), repeat=d) if sum(e) <= degree]
    exponents.sort(key=lambda e: (sum(e), e))
    for _ in range(64):
        coeffs = rng.uniform(0.2, 1.0, size=len(exponents)) * rng.choice((-1.0, 1.0), size=len(exponents))
        poly = Polynomial(tuple((e, float(c)) for e, c in zip(exponents, coeffs)))
        if poly.degree != degree:
            continue
        rows: list[np.ndarray] = []
        attempts = 0
        while len(rows) < n and attempts < 200 * n:
            attempts += 1
            x = rng.uniform(-FEATURE_BOUND, FEATURE_BOUND, size=d)
            if abs(poly.evaluate(x[None, :])[0]) < margin or not _dedup_ok(rows, x):
                continue
            rows.append(x)
        if len(rows) < n:
            continue
        X = np.array(rows)
        labels = np.where(poly.evaluate(X) >= 0, 1, -1)
        if len(set(labels.tolist())) == 2:
            return Dataset(
                X,
                labels,
                DatasetMetadata("poly_separable", seed=seed, degree=degree, margin=margin),
                witness=poly,
            )
    raise RuntimeError("could not draw a two-class polynomial dataset; try another seed")


def gen_conflicting(n_groups: int, dups: int, flip_fraction: float, seed: int, d: int = 2) -> Dataset:
    """Repeated feature vectors with a minority of flipped labels per group.

    No classifier can beat predicting each group's majority label, so the
    minimum misclassification rate is known exactly and recorded.
    """
    if dups < 2:
        raise ValueError(f"dups must be >= 2, got {dups}")
    if n_groups < 1:
        raise ValueError(f"n_groups must be >= 1, got {n_groups}")
    flips = int(round(flip_fraction * dups))
    if not 0 <= flips * 2 <= dups:
        raise ValueError(
            f"flip_fraction {flip_fraction} must keep the minority at or below half the group"
        )
    rng = np.random.default_rng(seed)
    centers: list[np.ndarray] = []
    while len(centers) < n_groups:
        x = np.round(rng.uniform(-FEATURE_BOUND, FEATURE_BOUND, size=d), 6)
        if _dedup_ok(centers, x):
            centers.append(x)
    rows, labels = [], []
    for center in centers:
        majority = int(rng.choice((-1, 1)))
        for j in range(dups):
            rows.append(center)
            labels.append(-majority if j < flips else majority)
    n = n_groups * dups
    return Dataset(
        np.array(rows),
        np.array(labels),
        DatasetMetadata("conflicting", seed=seed, min_error=n_groups * flips / n),
    )


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def serialize(dataset: Dataset) -> str:
    meta = dataset.metadata
    fields = [FORMAT_TOKEN, f"d={dataset.d}", f"n={dataset.n}", f"generator={meta.generator}"]
    if meta.degree is not None:
        fields.append(f"t={meta.degree}")
    if meta.seed is not None:
        fields.append(f"seed={meta.seed}")
    if meta.margin is not None:
        fields.append(f"margin={_fmt(meta.margin)}")
    if meta.min_error is not None:
        fields.append(f"min_error={_fmt(meta.min_error)}")
    lines = ["# " + "; ".join(fields)]
    for row, label in zip(dataset.features, dataset.labels):
        lines.append(",".join(_fmt(v) for v in row) + f",{int(label)}")
    return "\n".join(lines) + "\n"


def save(dataset: Dataset, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(serialize(dataset))


def load(path) -> Dataset:
    with open(path, "r", encoding="ascii") as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ValueError(f"{path}: missing header line")
    fields = [f.strip() for f in lines[0].lstrip("#").strip().split(";")]
    if not fields or fields[0] != FORMAT_TOKEN:
        raise ValueError(f"{path}: not a {FORMAT_TOKEN} file")
    header: dict[str, str] = {}
    for field in fields[1:]:
        if "=" not in field:
            raise ValueError(f"{path}: malformed header field {field!r}")
        key, value = field.split("=", 1)
        header[key.strip()] = value.strip()
    try:
        d = int(header["d"])
        n = int(header["n"])
        generator = header["generator"]
    except KeyError as exc:
        raise ValueError(f"{path}: header missing field {exc}") from exc
    meta = DatasetMetadata(
        generator=generator,
        seed=int(header["seed"]) if "seed" in header else None,
        degree=int(header["t"]) if "t" in header else None,
        margin=float(header["margin"]) if "margin" in header else None,
        min_error=float(header["min_error"]) if "min_error" in header else None,
    )
    rows, labels = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != d + 1:
            raise ValueError(f"{path}:{lineno}: expected {d + 1} columns, got {len(cells)}")
        try:
            rows.append([float(c) for c in cells[:-1]])
            label = int(cells[-1])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from exc
        if label not in (-1, 1):
            raise ValueError(f"{path}:{lineno}: label must be -1 or +1, got {label}")
        labels.append(label)
    if len(rows) != n:
        raise ValueError(f"{path}: header says n={n} but found {len(rows)} rows")
    return Dataset(np.array(rows), np.array(labels), meta)
