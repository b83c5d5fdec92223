"""Orbit representations.

TrigLoop is the canonical full-period form. FundamentalPath is the
endpoint-plus-sine form on [0, pi]. SampledLoop is the uniform periodic grid
used by the pointwise action.

Coefficient arrays are always laid out (mode, body, coordinate); flat vectors
are the C-order ravel of that layout.
"""
from dataclasses import dataclass

import numpy as np


def trig_basis(times: np.ndarray, K: int, period: float) -> np.ndarray:
    """Columns 1, cos(w1 t), sin(w1 t), ..., cos(wK t), sin(wK t)."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    phases = 2.0 * np.pi * np.outer(times, np.arange(1, K + 1)) / period
    basis = np.empty((times.size, 2 * K + 1))
    basis[:, 0] = 1.0
    basis[:, 1::2] = np.cos(phases)
    basis[:, 2::2] = np.sin(phases)
    return basis


def trig_basis_derivative(times: np.ndarray, K: int, period: float) -> np.ndarray:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    omegas = 2.0 * np.pi * np.arange(1, K + 1) / period
    phases = np.outer(times, omegas)
    basis = np.zeros((times.size, 2 * K + 1))
    basis[:, 1::2] = -omegas * np.sin(phases)
    basis[:, 2::2] = omegas * np.cos(phases)
    return basis


def trig_basis_second_derivative(times: np.ndarray, K: int, period: float) -> np.ndarray:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    omegas = 2.0 * np.pi * np.arange(1, K + 1) / period
    phases = np.outer(times, omegas)
    basis = np.zeros((times.size, 2 * K + 1))
    basis[:, 1::2] = -omegas**2 * np.cos(phases)
    basis[:, 2::2] = -omegas**2 * np.sin(phases)
    return basis


def fundamental_basis(times: np.ndarray, F: int) -> np.ndarray:
    """Columns (1 - t/pi), t/pi, sin(t), ..., sin(F t) on [0, pi]."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    basis = np.empty((times.size, F + 2))
    basis[:, 0] = 1.0 - times / np.pi
    basis[:, 1] = times / np.pi
    basis[:, 2:] = np.sin(np.outer(times, np.arange(1, F + 1)))
    return basis


def fundamental_basis_derivative(times: np.ndarray, F: int) -> np.ndarray:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    modes = np.arange(1, F + 1)
    basis = np.empty((times.size, F + 2))
    basis[:, 0] = -1.0 / np.pi
    basis[:, 1] = 1.0 / np.pi
    basis[:, 2:] = modes * np.cos(np.outer(times, modes))
    return basis


def fit_trig(times: np.ndarray, samples: np.ndarray, K: int, period: float) -> "TrigLoop":
    """Least-squares trigonometric fit of (Q, n, d) samples taken at the given times."""
    samples = np.asarray(samples, dtype=float)
    basis = trig_basis(times, K, period)
    solution, *_ = np.linalg.lstsq(basis, samples.reshape(samples.shape[0], -1), rcond=None)
    return TrigLoop(solution.reshape(2 * K + 1, *samples.shape[1:]), period)


@dataclass(frozen=True, eq=False)
class TrigLoop:
    coefficients: np.ndarray
    period: float

    def __post_init__(self):
        coefficients = np.array(self.coefficients, dtype=float)
        if coefficients.ndim != 3 or coefficients.shape[0] % 2 != 1:
            raise ValueError(f"expected (2K+1, n, d) coefficients, got {coefficients.shape}")
        coefficients.setflags(write=False)
        object.__setattr__(self, "coefficients", coefficients)
        object.__setattr__(self, "period", float(self.period))

    @property
    def K(self) -> int:
        return (self.coefficients.shape[0] - 1) // 2

    @property
    def n(self) -> int:
        return self.coefficients.shape[1]

    @property
    def d(self) -> int:
        return self.coefficients.shape[2]

    @property
    def a0(self) -> np.ndarray:
        return self.coefficients[0]

    def cosine(self, k: int) -> np.ndarray:
        return self.coefficients[2 * k - 1]

    def sine(self, k: int) -> np.ndarray:
        return self.coefficients[2 * k]

    @property
    def omegas(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(1, self.K + 1) / self.period

    def positions(self, times) -> np.ndarray:
        basis = trig_basis(times, self.K, self.period)
        return np.einsum("qj,jnd->qnd", basis, self.coefficients)

    def velocities(self, times) -> np.ndarray:
        basis = trig_basis_derivative(times, self.K, self.period)
        return np.einsum("qj,jnd->qnd", basis, self.coefficients)

    def accelerations(self, times) -> np.ndarray:
        basis = trig_basis_second_derivative(times, self.K, self.period)
        return np.einsum("qj,jnd->qnd", basis, self.coefficients)

    def grid(self, count: int) -> np.ndarray:
        return np.arange(count) * self.period / count

    def flat(self) -> np.ndarray:
        return self.coefficients.reshape(-1).copy()

    @classmethod
    def from_flat(cls, vector: np.ndarray, K: int, n: int, d: int, period: float) -> "TrigLoop":
        return cls(np.asarray(vector, dtype=float).reshape(2 * K + 1, n, d), period)

    def with_coefficients(self, coefficients: np.ndarray) -> "TrigLoop":
        return TrigLoop(coefficients, self.period)

    def resized(self, K: int) -> "TrigLoop":
        """Truncate or zero-pad to K modes."""
        out = np.zeros((2 * K + 1, self.n, self.d))
        keep = min(K, self.K)
        out[: 2 * keep + 1] = self.coefficients[: 2 * keep + 1]
        return TrigLoop(out, self.period)

    def sample(self, M: int) -> "SampledLoop":
        return SampledLoop(self.positions(self.grid(M)), self.period)


@dataclass(frozen=True, eq=False)
class FundamentalPath:
    x0: np.ndarray
    x1: np.ndarray
    A: np.ndarray

    def __post_init__(self):
        for name in ("x0", "x1", "A"):
            value = np.array(getattr(self, name), dtype=float)
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        if self.A.ndim != 3 or self.A.shape[1:] != self.x0.shape or self.x0.shape != self.x1.shape:
            raise ValueError("inconsistent FundamentalPath shapes")

    @property
    def F(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.x0.shape[0]

    @property
    def d(self) -> int:
        return self.x0.shape[1]

    @property
    def coefficients(self) -> np.ndarray:
        """(F+2, n, d) stack: x0, x1, A1..AF."""
        return np.concatenate([self.x0[None], self.x1[None], self.A], axis=0)

    def positions(self, times) -> np.ndarray:
        return np.einsum("qj,jnd->qnd", fundamental_basis(times, self.F), self.coefficients)

    def velocities(self, times) -> np.ndarray:
        return np.einsum("qj,jnd->qnd", fundamental_basis_derivative(times, self.F), self.coefficients)

    def flat(self) -> np.ndarray:
        return self.coefficients.reshape(-1).copy()

    @classmethod
    def from_coefficients(cls, coefficients: np.ndarray) -> "FundamentalPath":
        coefficients = np.asarray(coefficients, dtype=float)
        return cls(coefficients[0], coefficients[1], coefficients[2:])

    @classmethod
    def from_flat(cls, vector: np.ndarray, F: int, n: int, d: int) -> "FundamentalPath":
        return cls.from_coefficients(np.asarray(vector, dtype=float).reshape(F + 2, n, d))


@dataclass(frozen=True, eq=False)
class SampledLoop:
    samples: np.ndarray
    period: float

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        if samples.ndim != 3:
            raise ValueError(f"expected (M, n, d) samples, got {samples.shape}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "period", float(self.period))

    @property
    def M(self) -> int:
        return self.samples.shape[0]

    @property
    def n(self) -> int:
        return self.samples.shape[1]

    @property
    def d(self) -> int:
        return self.samples.shape[2]

    @property
    def step(self) -> float:
        return self.period / self.M

    def flat(self) -> np.ndarray:
        return self.samples.reshape(-1).copy()

    @classmethod
    def from_flat(cls, vector: np.ndarray, M: int, n: int, d: int, period: float) -> "SampledLoop":
        return cls(np.asarray(vector, dtype=float).reshape(M, n, d), period)
