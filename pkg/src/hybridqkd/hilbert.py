"""Exact complex linear algebra for qudit states.

State vectors live on a tensor product of labeled mode factors (for this
protocol: a d-level orbital-angular-momentum factor and a d-level path
factor).  The flattened index convention is mode-major on the first factor:
a basis state (x, y) on shape (d, d) sits at flat index x*d + y.  All
values are immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "STANDARD",
    "FOURIER",
    "StateVector",
    "ModeOperator",
    "check_dimension",
    "dft_matrix",
    "mub_state",
    "tensor",
    "apply",
    "basis_state",
    "overlap",
]

NORM_TOL = 1e-12
UNITARY_TOL = 1e-12

# Encoding-basis families.  The "fourier" family is the discrete-Fourier
# conjugate of the "standard" (computational) basis.
STANDARD = "standard"
FOURIER = "fourier"
_FAMILIES = (STANDARD, FOURIER)


def check_dimension(d: int) -> int:
    """Validate a qudit dimension (at least two levels)."""
    if not isinstance(d, (int, np.integer)) or isinstance(d, bool):
        raise ValueError(f"dimension must be an integer, got {d!r}")
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    return int(d)


def _frozen_complex(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=np.complex128)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class StateVector:
    """Unit-norm complex amplitude vector over a product of mode factors.

    Attributes:
        amplitudes: 1-D complex array of length prod(space_shape).
        space_shape: ordered factor dimensions, e.g. (d,) or (d, d).
    """

    amplitudes: np.ndarray
    space_shape: tuple[int, ...]

    def __post_init__(self) -> None:
        amp = _frozen_complex(self.amplitudes)
        if amp.ndim != 1:
            raise ValueError("amplitudes must be one-dimensional")
        shape = tuple(int(n) for n in self.space_shape)
        if any(n < 1 for n in shape):
            raise ValueError(f"invalid space shape {shape}")
        if amp.size != math.prod(shape):
            raise ValueError(
                f"length {amp.size} does not match space shape {shape}"
            )
        nrm = float(np.sum(np.abs(amp) ** 2))
        if abs(nrm - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized: |amp|^2 = {nrm}")
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "space_shape", shape)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def reshaped(self) -> np.ndarray:
        """Amplitudes viewed as an ndarray with one axis per factor."""
        return self.amplitudes.reshape(self.space_shape)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @classmethod
    def from_amplitudes(
        cls,
        amplitudes: Sequence[complex] | np.ndarray,
        space_shape: Sequence[int] | None = None,
        normalize: bool = False,
    ) -> "StateVector":
        amp = np.asarray(amplitudes, dtype=np.complex128).ravel()
        if normalize:
            nrm = np.linalg.norm(amp)
            if nrm == 0:
                raise ValueError("cannot normalize the zero vector")
            amp = amp / nrm
        shape = (amp.size,) if space_shape is None else tuple(space_shape)
        return cls(amp, shape)


@dataclass(frozen=True, eq=False)
class ModeOperator:
    """Square complex matrix acting on a labeled mode space.

    The operator carries the factor shape it acts on so that compositions
    and applications are shape-checked.
    """

    entries: np.ndarray
    space_shape: tuple[int, ...]
    unitary: bool = field(default=False)

    def __post_init__(self) -> None:
        mat = _frozen_complex(self.entries)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("operator entries must form a square matrix")
        shape = tuple(int(n) for n in self.space_shape)
        if mat.shape[0] != math.prod(shape):
            raise ValueError(
                f"matrix size {mat.shape[0]} does not match space shape {shape}"
            )
        if self.unitary:
            err = unitarity_defect(mat)
            if err > UNITARY_TOL:
                raise ValueError(f"operator flagged unitary but U^dag U - I = {err:.3e}")
        object.__setattr__(self, "entries", mat)
        object.__setattr__(self, "space_shape", shape)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def dagger(self) -> "ModeOperator":
        return ModeOperator(self.entries.conj().T, self.space_shape, self.unitary)

    def compose(self, other: "ModeOperator") -> "ModeOperator":
        """Matrix product self @ other (other acts first)."""
        if self.space_shape != other.space_shape:
            raise ValueError(
                f"mode spaces differ: {self.space_shape} vs {other.space_shape}"
            )
        return ModeOperator(
            self.entries @ other.entries,
            self.space_shape,
            self.unitary and other.unitary,
        )

    @classmethod
    def identity(cls, space_shape: Sequence[int]) -> "ModeOperator":
        n = math.prod(space_shape)
        return cls(np.eye(n, dtype=np.complex128), tuple(space_shape), unitary=True)


def unitarity_defect(mat: np.ndarray) -> float:
    """Max entrywise deviation of U^dag U from the identity."""
    n = mat.shape[0]
    return float(np.abs(mat.conj().T @ mat - np.eye(n)).max())


def dft_matrix(d: int) -> ModeOperator:
    """d-point discrete Fourier transform, entries w^(jk)/sqrt(d).

    The primitive root w = exp(2*pi*i/d) is evaluated per entry from the
    exponential so phases do not drift for larger d.
    """
    d = check_dimension(d)
    j, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    mat = np.exp(2j * np.pi * (j * k % d) / d) / np.sqrt(d)
    return ModeOperator(mat, (d,), unitary=True)


def basis_state(index: int, d: int) -> StateVector:
    """Computational basis vector e_index on a single d-level factor."""
    d = check_dimension(d)
    if not 0 <= index < d:
        raise ValueError(f"basis index {index} out of range for dimension {d}")
    amp = np.zeros(d, dtype=np.complex128)
    amp[index] = 1.0
    return StateVector(amp, (d,))


def mub_state(family: str, symbol: int, d: int) -> StateVector:
    """State encoding `symbol` in one of the two mutually unbiased bases.

    standard: the basis vector e_symbol.
    fourier:  (1/sqrt(d)) * sum_k w^(symbol*k) e_k, the Fourier conjugate.
    """
    d = check_dimension(d)
    if family not in _FAMILIES:
        raise ValueError(f"unknown basis family {family!r}")
    if not 0 <= symbol < d:
        raise ValueError(f"symbol {symbol} out of range for dimension {d}")
    if family == STANDARD:
        return basis_state(symbol, d)
    k = np.arange(d)
    amp = np.exp(2j * np.pi * (symbol * k % d) / d) / np.sqrt(d)
    return StateVector(amp, (d,))


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Kronecker composite of two states with concatenated factor shapes."""
    amp = np.kron(a.amplitudes, b.amplitudes)
    return StateVector(amp, a.space_shape + b.space_shape)


def overlap(a: StateVector, b: StateVector) -> complex:
    """Inner product <a|b>."""
    if a.space_shape != b.space_shape:
        raise ValueError(f"mode spaces differ: {a.space_shape} vs {b.space_shape}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def apply(op: ModeOperator, state: StateVector, factor: int | None = None) -> StateVector:
    """Apply an operator to one tensor factor (or the whole space).

    With factor=None the operator must act on the full space; otherwise its
    space shape must equal the single selected factor and the identity is
    applied everywhere else.
    """
    if factor is None:
        if op.space_shape != state.space_shape:
            raise ValueError(
                f"operator space {op.space_shape} does not match state space "
                f"{state.space_shape}"
            )
        return StateVector(op.entries @ state.amplitudes, state.space_shape)

    nfac = len(state.space_shape)
    if not 0 <= factor < nfac:
        raise ValueError(f"factor index {factor} out of range for {nfac} factors")
    if op.space_shape != (state.space_shape[factor],):
        raise ValueError(
            f"operator space {op.space_shape} does not match factor {factor} "
            f"of shape {state.space_shape}"
        )
    pre = math.prod(state.space_shape[:factor])
    k = state.space_shape[factor]
    post = math.prod(state.space_shape[factor + 1 :])
    amp = state.amplitudes.reshape(pre, k, post)
    out = np.einsum("ab,ibj->iaj", op.entries, amp)
    return StateVector(out.reshape(-1), state.space_shape)
