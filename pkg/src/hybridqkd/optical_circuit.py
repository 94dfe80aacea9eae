"""Optical transformations of the protocol, abstract and element-level.

Two mode-space layouts are used.  A plain path space has shape (n,) and
supports beam splitters and phase shifters on flat port indices.  An
arm/OAM space has shape (n_arms, n_window) plus a window of physical OAM
labels; there, beam splitters and phase shifters couple whole arms while
Dove-prism phases, holograms and mirrors act on the OAM content of one arm.

Conventions fixed here so reconstruction tests are reproducible:
  * beam splitter of transmissivity tau: [[sqrt(tau), i*sqrt(1-tau)],
    [i*sqrt(1-tau), sqrt(tau)]] (symmetric, i on reflection);
  * an OAM beam splitter is a Mach-Zehnder whose second splitter inverts
    the first (realized with pi phase shifters), so a relative arm phase
    of +1 routes straight and -1 routes across; alpha = 0 closes the
    interferometer into the identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .hilbert import ModeOperator, check_dimension, dft_matrix, unitarity_defect

__all__ = [
    "OpticalElement",
    "CircuitGraph",
    "CircuitRoutingError",
    "ThreefoldCyclicResult",
    "beam_splitter",
    "phase_shifter",
    "dove_phase",
    "hologram",
    "mirror",
    "cyclic_oam_transform",
    "shifted_tritter",
    "decompose_unitary",
    "oam_beam_splitter",
    "build_threefold_cyclic",
]

CIRCUIT_TOL = 1e-10
DEFAULT_WINDOW = (-2, -1, 0, 1, 2)


class CircuitRoutingError(RuntimeError):
    """Raised when a built circuit leaks amplitude outside its target arm."""


@dataclass(frozen=True)
class OpticalElement:
    """One linear-optical element: kind, numeric parameters, coupled ports."""

    kind: str
    params: tuple[float, ...]
    ports: tuple[int, ...]

    def describe(self) -> str:
        parts = [self.kind]
        parts += [repr(float(p)) if isinstance(p, float) else str(p) for p in self.params]
        parts += [str(p) for p in self.ports]
        return " ".join(parts)


def beam_splitter(transmissivity: float, port_a: int, port_b: int) -> OpticalElement:
    if not 0.0 < transmissivity < 1.0:
        raise ValueError(f"transmissivity must lie in (0, 1), got {transmissivity}")
    if port_a == port_b:
        raise ValueError("beam splitter needs two distinct ports")
    return OpticalElement("beam_splitter", (float(transmissivity),), (port_a, port_b))


def phase_shifter(phase: float, port: int) -> OpticalElement:
    return OpticalElement("phase_shifter", (float(phase),), (port,))


def dove_phase(alpha: float, arm: int) -> OpticalElement:
    """OAM-dependent phase exp(i*l*alpha) on one arm (Dove-prism pair model)."""
    return OpticalElement("dove_phase", (float(alpha),), (arm,))


def hologram(oam_shift: int, arm: int) -> OpticalElement:
    if oam_shift not in (-1, 1):
        raise ValueError(f"hologram shift must be +1 or -1, got {oam_shift}")
    return OpticalElement("hologram", (int(oam_shift),), (arm,))


def mirror(arm: int) -> OpticalElement:
    """OAM sign inversion l -> -l on one arm (reflection flips helicity)."""
    return OpticalElement("mirror", (), (arm,))


def _bs_matrix(tau: float) -> np.ndarray:
    t = math.sqrt(tau)
    r = 1j * math.sqrt(1.0 - tau)
    return np.array([[t, r], [r, t]], dtype=np.complex128)


def _element_matrix(elem: OpticalElement, space_shape: tuple[int, ...],
                    window: tuple[int, ...] | None) -> np.ndarray:
    """Full-space matrix of one element for the given layout."""
    dim = math.prod(space_shape)
    mat = np.eye(dim, dtype=np.complex128)

    if len(space_shape) == 1:
        if elem.kind == "beam_splitter":
            p, q = elem.ports
            block = _bs_matrix(elem.params[0])
            for a, i in enumerate((p, q)):
                for b, j in enumerate((p, q)):
                    mat[i, j] = block[a, b]
            return mat
        if elem.kind == "phase_shifter":
            mat[elem.ports[0], elem.ports[0]] = np.exp(1j * elem.params[0])
            return mat
        raise ValueError(f"element {elem.kind} needs an arm/OAM space")

    n_arms, n_win = space_shape
    if window is None or len(window) != n_win:
        raise ValueError("arm/OAM space requires a matching OAM window")
    flat = lambda arm, w: arm * n_win + w

    if elem.kind == "beam_splitter":
        p, q = elem.ports
        block = _bs_matrix(elem.params[0])
        for w in range(n_win):
            for a, i in enumerate((p, q)):
                for b, j in enumerate((p, q)):
                    mat[flat(i, w), flat(j, w)] = block[a, b]
        return mat
    if elem.kind == "phase_shifter":
        arm = elem.ports[0]
        for w in range(n_win):
            mat[flat(arm, w), flat(arm, w)] = np.exp(1j * elem.params[0])
        return mat
    if elem.kind == "dove_phase":
        arm = elem.ports[0]
        for w, label in enumerate(window):
            mat[flat(arm, w), flat(arm, w)] = np.exp(1j * label * elem.params[0])
        return mat
    if elem.kind == "hologram":
        arm = elem.ports[0]
        shift = int(elem.params[0])
        # Cyclic within the finite window; layouts must keep occupied modes
        # away from the wrap edge.
        for w in range(n_win):
            mat[flat(arm, w), flat(arm, w)] = 0.0
        for w in range(n_win):
            mat[flat(arm, (w + shift) % n_win), flat(arm, w)] = 1.0
        return mat
    if elem.kind == "mirror":
        arm = elem.ports[0]
        labels = list(window)
        for w, label in enumerate(labels):
            if -label not in labels:
                raise ValueError("mirror needs a sign-symmetric OAM window")
        for w in range(n_win):
            mat[flat(arm, w), flat(arm, w)] = 0.0
        for w, label in enumerate(labels):
            mat[flat(arm, labels.index(-label)), flat(arm, w)] = 1.0
        return mat
    raise ValueError(f"unknown element kind {elem.kind!r}")


@dataclass(frozen=True)
class CircuitGraph:
    """Ordered sequence of optical elements on a fixed mode space.

    Elements are applied first-to-last; matrix() returns the composition.
    """

    elements: tuple[OpticalElement, ...]
    space_shape: tuple[int, ...]
    oam_window: tuple[int, ...] | None = None

    def matrix(self) -> np.ndarray:
        dim = math.prod(self.space_shape)
        mat = np.eye(dim, dtype=np.complex128)
        for elem in self.elements:
            mat = _element_matrix(elem, self.space_shape, self.oam_window) @ mat
        return mat

    def operator(self) -> ModeOperator:
        return ModeOperator(self.matrix(), self.space_shape, unitary=True)

    def unitarity_defect(self) -> float:
        return unitarity_defect(self.matrix())

    def to_netlist(self) -> str:
        lines = ["# space " + " ".join(str(n) for n in self.space_shape)]
        if self.oam_window is not None:
            lines.append("# window " + " ".join(str(l) for l in self.oam_window))
        lines += [elem.describe() for elem in self.elements]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_netlist(cls, text: str) -> "CircuitGraph":
        space: tuple[int, ...] | None = None
        window: tuple[int, ...] | None = None
        elems: list[OpticalElement] = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                fields = line[1:].split()
                if fields and fields[0] == "space":
                    space = tuple(int(v) for v in fields[1:])
                elif fields and fields[0] == "window":
                    window = tuple(int(v) for v in fields[1:])
                continue
            fields = line.split()
            kind = fields[0]
            if kind == "beam_splitter":
                elems.append(beam_splitter(float(fields[1]), int(fields[2]), int(fields[3])))
            elif kind == "phase_shifter":
                elems.append(phase_shifter(float(fields[1]), int(fields[2])))
            elif kind == "dove_phase":
                elems.append(dove_phase(float(fields[1]), int(fields[2])))
            elif kind == "hologram":
                elems.append(hologram(int(float(fields[1])), int(fields[2])))
            elif kind == "mirror":
                elems.append(mirror(int(fields[1])))
            else:
                raise ValueError(f"unknown netlist element {kind!r}")
        if space is None:
            raise ValueError("netlist missing '# space' header")
        return cls(tuple(elems), space, window)


def cyclic_oam_transform(d: int) -> ModeOperator:
    """Path-conditioned OAM relabeling |x, y> -> |x + d - y (mod d), y>.

    A 0/1 permutation on the OAM (x) tensor path (y) space with exactly one
    unit entry per column.
    """
    d = check_dimension(d)
    mat = np.zeros((d * d, d * d), dtype=np.complex128)
    for x in range(d):
        for y in range(d):
            mat[((x + d - y) % d) * d + y, x * d + y] = 1.0
    return ModeOperator(mat, (d, d), unitary=True)


def shifted_tritter(d: int, t: int) -> ModeOperator:
    """One of the d interferometer variants used for the randomized defense.

    Variant 0 is the plain discrete Fourier transform.  Variant t >= 1 is a
    row permutation of it with per-row phases: row m carries row (t - m)
    mod d of the transform, rephased so that row t is all ones.  Every
    variant therefore sends the uniform-phase path state to output port t.
    """
    d = check_dimension(d)
    if not 0 <= t < d:
        raise ValueError(f"tritter variant {t} out of range for dimension {d}")
    if t == 0:
        return dft_matrix(d)
    m, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    expo = ((t - m) % d) * ((k - t) % d) % d
    mat = np.exp(2j * np.pi * expo / d) / np.sqrt(d)
    return ModeOperator(mat, (d,), unitary=True)


def _two_port_elements(v: np.ndarray, p: int, q: int) -> list[OpticalElement]:
    """Express a 2x2 unitary on ports (p, q) with splitters and phases.

    Returns elements in application order.  Blocks with |v01| ~ 0 reduce to
    phases; full-swap blocks use two half splitters since transmissivities
    0 and 1 are outside the allowed open interval.
    """
    tol = 1e-14
    c = abs(v[0, 0])
    s = abs(v[0, 1])
    out: list[OpticalElement] = []

    def ps(phi: float, port: int) -> None:
        phi = math.remainder(phi, 2.0 * math.pi)
        if abs(phi) > tol:
            out.append(phase_shifter(phi, port))

    if s <= tol:
        ps(np.angle(v[0, 0]), p)
        ps(np.angle(v[1, 1]), q)
        return out
    if c <= tol:
        # two 50:50 splitters compose to [[0, i], [i, 0]]
        out.append(beam_splitter(0.5, p, q))
        out.append(beam_splitter(0.5, p, q))
        ps(np.angle(v[0, 1]) - math.pi / 2.0, p)
        ps(np.angle(v[1, 0]) - math.pi / 2.0, q)
        return out
    # v = diag(e^{i phi0}, e^{i phi1}) . BS(c^2) . diag(1, e^{i psi1})
    phi0 = float(np.angle(v[0, 0]))
    psi1 = float(np.angle(v[0, 1])) - math.pi / 2.0 - phi0
    phi1 = float(np.angle(v[1, 0])) - math.pi / 2.0
    ps(psi1, q)
    out.append(beam_splitter(c * c, p, q))
    ps(phi0, p)
    ps(phi1, q)
    return out


def decompose_unitary(u: ModeOperator | np.ndarray) -> CircuitGraph:
    """Factor a unitary into two-port beam splitters and phase shifters.

    Uses a Givens elimination over arbitrary port pairs; the emitted
    CircuitGraph composes back to the input matrix (including its global
    phase) within 1e-10.
    """
    mat = u.entries if isinstance(u, ModeOperator) else np.asarray(u, dtype=np.complex128)
    n = mat.shape[0]
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("decompose_unitary needs a square matrix")
    if unitarity_defect(mat) > CIRCUIT_TOL:
        raise ValueError("input matrix is not unitary within 1e-10")

    v = mat.astype(np.complex128).copy()
    rotations: list[tuple[np.ndarray, int, int]] = []
    for j in range(n - 1):
        for i in range(j + 1, n):
            b = v[i, j]
            if abs(b) <= 1e-14:
                continue
            a = v[j, j]
            r = math.hypot(abs(a), abs(b))
            g = np.array(
                [[np.conj(a) / r, np.conj(b) / r], [-b / r, a / r]],
                dtype=np.complex128,
            )
            v[[j, i], :] = g @ v[[j, i], :]
            rotations.append((g, j, i))

    elements: list[OpticalElement] = []
    for port in range(n):
        phi = float(np.angle(v[port, port]))
        if abs(phi) > 1e-14:
            elements.append(phase_shifter(phi, port))
    for g, j, i in reversed(rotations):
        elements.extend(_two_port_elements(g.conj().T, j, i))
    return CircuitGraph(tuple(elements), (n,))


def oam_beam_splitter(alpha: float, window: Sequence[int] = DEFAULT_WINDOW) -> ModeOperator:
    """Two-arm OAM sorter: Mach-Zehnder with an OAM-dependent arm phase.

    Acts on (arm, OAM) with the given window of physical OAM labels.  A
    mode with exp(i*l*alpha) = +1 exits the arm it entered, -1 exits the
    other arm, and intermediate phases split.
    """
    graph = CircuitGraph(
        tuple(_oam_bs_elements(alpha, 0, 1)),
        (2, len(window)),
        tuple(int(l) for l in window),
    )
    return graph.operator()


def _oam_bs_elements(alpha: float, arm_a: int, arm_b: int) -> list[OpticalElement]:
    """Element sequence of one OAM beam splitter between two arms."""
    return [
        beam_splitter(0.5, arm_a, arm_b),
        dove_phase(alpha, arm_b),
        phase_shifter(math.pi, arm_b),
        beam_splitter(0.5, arm_a, arm_b),
        phase_shifter(math.pi, arm_b),
    ]


@dataclass(frozen=True)
class ThreefoldCyclicResult:
    """Composed three-fold OAM cycler with its routing diagnostics."""

    graph: CircuitGraph
    input_arm: int
    output_arm: int
    labels: tuple[int, ...]
    magnitude_matrix: np.ndarray
    output_phases: np.ndarray
    max_leakage: float


def build_threefold_cyclic(window: Sequence[int] = DEFAULT_WINDOW) -> ThreefoldCyclicResult:
    """Three-arm circuit cycling OAM labels {-1, 0, 1} by +1 on one beam.

    Layout (input and output both on arm 0):
      1. OAM BS (alpha=pi) on arms (0, 1): odd labels cross to arm 1.
      2. hologram +1 on arm 1: {-1, +1} -> {0, +2}.
      3. OAM BS (alpha=pi/2) on arms (1, 2): label 2 crosses to arm 2.
      4. mirror on arm 2: 2 -> -2; hologram -1 on arm 1: 0 -> -1.
      5. OAM BS (alpha=pi/2) on arms (0, 2): -2 crosses back to arm 0.
      6. OAM BS (alpha=-pi) on arms (0, 1): -1 crosses to arm 0.
      7. hologram +1 on arm 0: {0, -2, -1} -> {1, -1, 0}.

    Raises CircuitRoutingError if any input label leaks amplitude outside
    arm 0.
    """
    window = tuple(int(l) for l in window)
    for needed in (-2, -1, 0, 1, 2):
        if needed not in window:
            raise ValueError(f"window must cover -2..2, got {window}")

    elems: list[OpticalElement] = []
    elems += _oam_bs_elements(math.pi, 0, 1)
    elems.append(hologram(1, 1))
    elems += _oam_bs_elements(math.pi / 2.0, 1, 2)
    elems.append(mirror(2))
    elems.append(hologram(-1, 1))
    elems += _oam_bs_elements(math.pi / 2.0, 0, 2)
    elems += _oam_bs_elements(-math.pi, 0, 1)
    elems.append(hologram(1, 0))

    graph = CircuitGraph(tuple(elems), (3, len(window)), window)
    mat = graph.matrix()

    labels = (-1, 0, 1)
    n_win = len(window)
    idx = {l: window.index(l) for l in window}
    mags = np.zeros((3, 3))
    phases = np.zeros(3, dtype=np.complex128)
    max_leak = 0.0
    for col, x in enumerate(labels):
        column = mat[:, 0 * n_win + idx[x]]
        outside = float(np.sum(np.abs(column[n_win:]) ** 2))
        max_leak = max(max_leak, outside)
        for row, x_out in enumerate(labels):
            mags[row, col] = abs(column[0 * n_win + idx[x_out]])
        target = (x + 1 + 1) % 3 - 1  # cyclic +1 on {-1, 0, 1}
        phases[col] = column[0 * n_win + idx[target]]
    if max_leak > CIRCUIT_TOL:
        raise CircuitRoutingError(
            f"amplitude leaks outside the output arm: {max_leak:.3e}"
        )
    return ThreefoldCyclicResult(
        graph=graph,
        input_arm=0,
        output_arm=0,
        labels=labels,
        magnitude_matrix=mags,
        output_phases=phases,
        max_leakage=max_leak,
    )
