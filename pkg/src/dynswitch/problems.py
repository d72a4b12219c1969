"""BBOB-style test problems with instance transformations and known optima.

Implements a 12-function subset of the standard noiseless suite (F1, F2, F6,
F8, F9, F10, F11, F12, F13, F14, F21, F22) on the search domain [-5, 5]^d.
Instances use a simplified model: the optimum is planted uniformly at random
in [-4, 4]^d, f_opt = 0, and rotation matrices are built by orthonormalizing
seeded Gaussian matrices.  Structure (separability, conditioning,
multimodality) is preserved; exact byte-compatibility with the reference
suite is not a goal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

IMPLEMENTED_FUNCTIONS = (1, 2, 6, 8, 9, 10, 11, 12, 13, 14, 21, 22)
SEPARABLE_FUNCTIONS = (1, 2)
DOMAIN_LOW = -5.0
DOMAIN_HIGH = 5.0


class ConfigurationError(ValueError):
    """Raised for unknown function ids or invalid problem parameters."""


@dataclass(frozen=True)
class ProblemId:
    """Identifies one concrete (function, dimension, instance) problem."""

    function_id: int
    dimension: int
    instance: int

    def __post_init__(self):
        if self.function_id not in IMPLEMENTED_FUNCTIONS:
            raise ConfigurationError(
                f"function F{self.function_id} is not implemented; "
                f"available: {IMPLEMENTED_FUNCTIONS}"
            )
        if self.dimension < 2:
            raise ConfigurationError(f"dimension must be >= 2, got {self.dimension}")
        if self.instance < 1:
            raise ConfigurationError(f"instance must be >= 1, got {self.instance}")

    def label(self) -> str:
        return f"F{self.function_id}_{self.dimension}D_i{self.instance}"


def _oscillation(x):
    """Coordinate-wise oscillation transform used by several suite functions."""
    x = np.asarray(x, dtype=float)
    xhat = np.where(x != 0.0, np.log(np.abs(np.where(x != 0.0, x, 1.0))), 0.0)
    c1 = np.where(x > 0.0, 10.0, 5.5)
    c2 = np.where(x > 0.0, 7.9, 3.1)
    return np.sign(x) * np.exp(xhat + 0.049 * (np.sin(c1 * xhat) + np.sin(c2 * xhat)))


def _asymmetry(x, beta):
    """Coordinate-wise asymmetry transform; identity for non-positive entries."""
    x = np.asarray(x, dtype=float)
    d = x.size
    idx = np.arange(d) / max(d - 1, 1)
    expo = 1.0 + beta * idx * np.sqrt(np.maximum(x, 0.0))
    return np.where(x > 0.0, np.power(np.maximum(x, 0.0), expo), x)


def _power_weights(d, condition):
    """diag entries of the conditioning matrix Lambda^alpha."""
    idx = np.arange(d) / max(d - 1, 1)
    return np.power(condition, 0.5 * idx)


def _random_rotation(rng, d):
    """Orthonormal matrix from QR decomposition of a Gaussian matrix."""
    a = rng.standard_normal((d, d))
    q, r = np.linalg.qr(a)
    # fix signs so the decomposition (and hence the instance) is unique
    q = q * np.sign(np.diag(r))
    return q


@dataclass(frozen=True)
class ProblemInstance:
    """A concrete objective with planted optimum and frozen transforms.

    Immutable after construction; evaluation is pure, so instances can be
    shared freely across concurrent runs.
    """

    id: ProblemId
    x_opt: np.ndarray
    f_opt: float
    rotation_R: np.ndarray
    rotation_Q: np.ndarray
    peaks: dict | None = field(default=None, repr=False)

    @property
    def dimension(self) -> int:
        return self.id.dimension

    def evaluate(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise ValueError(
                f"expected point of dimension {self.dimension}, got shape {x.shape}"
            )
        return _EVALUATORS[self.id.function_id](self, x)

    def precision(self, f_value: float) -> float:
        return max(f_value - self.f_opt, 0.0)


def _f1_sphere(p, x):
    z = x - p.x_opt
    return float(z @ z)


def _f2_ellipsoid_separable(p, x):
    z = _oscillation(x - p.x_opt)
    d = p.dimension
    w = np.power(10.0, 6.0 * np.arange(d) / max(d - 1, 1))
    return float(w @ (z * z))


def _f6_attractive_sector(p, x):
    d = p.dimension
    z = p.rotation_Q @ (_power_weights(d, 100.0) * (p.rotation_R @ (x - p.x_opt)))
    s = np.where(z * p.x_opt > 0.0, 100.0, 1.0)
    val = float(np.sum((s * z) ** 2))
    return float(_oscillation(val) ** 0.9)


def _rosenbrock(z):
    return float(
        np.sum(100.0 * (z[:-1] ** 2 - z[1:]) ** 2 + (z[:-1] - 1.0) ** 2)
    )


def _f8_rosenbrock(p, x):
    c = max(1.0, np.sqrt(p.dimension) / 8.0)
    z = c * (x - p.x_opt) + 1.0
    return _rosenbrock(z)


def _f9_rosenbrock_rotated(p, x):
    c = max(1.0, np.sqrt(p.dimension) / 8.0)
    z = c * (p.rotation_R @ (x - p.x_opt)) + 1.0
    return _rosenbrock(z)


def _f10_ellipsoid_rotated(p, x):
    z = _oscillation(p.rotation_R @ (x - p.x_opt))
    d = p.dimension
    w = np.power(10.0, 6.0 * np.arange(d) / max(d - 1, 1))
    return float(w @ (z * z))


def _f11_discus(p, x):
    z = _oscillation(p.rotation_R @ (x - p.x_opt))
    return float(1e6 * z[0] ** 2 + np.sum(z[1:] ** 2))


def _f12_bent_cigar(p, x):
    z = p.rotation_R @ _asymmetry(p.rotation_R @ (x - p.x_opt), 0.5)
    return float(z[0] ** 2 + 1e6 * np.sum(z[1:] ** 2))


def _f13_sharp_ridge(p, x):
    d = p.dimension
    z = p.rotation_Q @ (_power_weights(d, 10.0) * (p.rotation_R @ (x - p.x_opt)))
    return float(z[0] ** 2 + 100.0 * np.sqrt(np.sum(z[1:] ** 2)))


def _f14_different_powers(p, x):
    d = p.dimension
    z = p.rotation_R @ (x - p.x_opt)
    expo = 2.0 + 4.0 * np.arange(d) / max(d - 1, 1)
    return float(np.sqrt(np.sum(np.abs(z) ** expo)))


def _gallagher(p, x):
    peaks = p.peaks
    diff = x[None, :] - peaks["centers"]          # (K, d)
    rotated = diff @ p.rotation_R.T               # rows R (x - y_i)
    q = np.sum(rotated * rotated * peaks["scales"], axis=1)
    vals = peaks["weights"] * np.exp(-q / (2.0 * p.dimension))
    best = float(np.max(vals))
    return float(_oscillation(10.0 - best) ** 2)


_EVALUATORS = {
    1: _f1_sphere,
    2: _f2_ellipsoid_separable,
    6: _f6_attractive_sector,
    8: _f8_rosenbrock,
    9: _f9_rosenbrock_rotated,
    10: _f10_ellipsoid_rotated,
    11: _f11_discus,
    12: _f12_bent_cigar,
    13: _f13_sharp_ridge,
    14: _f14_different_powers,
    21: _gallagher,
    22: _gallagher,
}

_GALLAGHER_NUM_PEAKS = {21: 101, 22: 21}
_GALLAGHER_GLOBAL_CONDITION = {21: 1000.0, 22: 1000.0 ** 2}


def _build_gallagher_peaks(rng, function_id, d, x_opt):
    k = _GALLAGHER_NUM_PEAKS[function_id]
    centers = rng.uniform(-4.9, 4.9, size=(k, d))
    centers[0] = x_opt
    weights = np.empty(k)
    weights[0] = 10.0
    weights[1:] = 1.1 + 8.0 * np.arange(k - 1) / (k - 2)
    conditions = np.empty(k)
    conditions[0] = _GALLAGHER_GLOBAL_CONDITION[function_id]
    pool = np.power(1000.0, 2.0 * np.arange(k - 1) / (k - 2))
    conditions[1:] = rng.permutation(pool)
    idx = np.arange(d) / max(d - 1, 1)
    scales = np.power(conditions[:, None], idx[None, :]) / np.power(
        conditions[:, None], 0.25
    )
    return {"centers": centers, "weights": weights, "scales": scales}


def instantiate(pid: ProblemId, suite_seed: int = 0) -> ProblemInstance:
    """Build the deterministic problem instance for ``pid``.

    The same (pid, suite_seed) always yields identical transforms.
    """
    d = pid.dimension
    entropy = (int(suite_seed), pid.function_id, d, pid.instance)
    rng = np.random.default_rng(np.random.SeedSequence(entropy))
    x_opt = rng.uniform(-4.0, 4.0, size=d)
    if pid.function_id in SEPARABLE_FUNCTIONS:
        rot_r = np.eye(d)
        rot_q = np.eye(d)
    else:
        rot_r = _random_rotation(rng, d)
        rot_q = _random_rotation(rng, d)
    peaks = None
    if pid.function_id in _GALLAGHER_NUM_PEAKS:
        peaks = _build_gallagher_peaks(rng, pid.function_id, d, x_opt)
    inst = ProblemInstance(
        id=pid, x_opt=x_opt, f_opt=0.0, rotation_R=rot_r, rotation_Q=rot_q,
        peaks=peaks,
    )
    inst.x_opt.setflags(write=False)
    inst.rotation_R.setflags(write=False)
    inst.rotation_Q.setflags(write=False)
    return inst


def suite_manifest(problems) -> str:
    """Line-oriented audit table: one row per instance with its optimum."""
    lines = ["function_id\tdimension\tinstance\tf_opt\tx_opt"]
    for p in problems:
        coords = ",".join(repr(float(v)) for v in p.x_opt)
        lines.append(
            f"{p.id.function_id}\t{p.id.dimension}\t{p.id.instance}"
            f"\t{p.f_opt!r}\t{coords}"
        )
    return "\n".join(lines) + "\n"
