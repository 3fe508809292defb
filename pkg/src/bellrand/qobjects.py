"""Quantum domain objects.

The partially entangled two-qubit state in both its ket and Pauli forms, the
ideal Bell-test observables with their ancilla realizations, POVMs with
validity/extremality reports, the explicit POVM families used for randomness
generation, and JSON serialization for states and POVMs.

Pauli convention: Z = diag(1, -1), X = offdiag(1, 1), Y = offdiag(-i, i),
so Y|0> = i|1>.  This fixes all signs in the state expansion and in the
ideal measurements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import matkernel as mk
from .matkernel import HERM_TOL, NULLSPACE_TOL

ID2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (ID2, PAULI_X, PAULI_Y, PAULI_Z)  # index order (I, X, Y, Z)

PSD_TOL = 1e-10
TRACE_TOL = 1e-10
DICHOTOMIC_TOL = 1e-10
RANK_ONE_TOL = 1e-9


def check_theta(theta: float) -> float:
    """Validate the Schmidt angle range 0 < theta <= pi/2."""
    theta = float(theta)
    if not (0.0 < theta <= math.pi / 2 + 1e-12):
        raise ValueError(f"theta must lie in (0, pi/2], got {theta}")
    return theta


def theta_grid(n: int, start: float = 0.01) -> np.ndarray:
    """n angles in the half-open interval (start, pi/2]."""
    return np.linspace(start, math.pi / 2, n + 1)[1:]


def beta_of_theta(theta: float) -> float:
    """Tilt parameter of the modified CHSH expressions: 2cos(t)/sqrt(1+sin(t)^2)."""
    theta = check_theta(theta)
    return 2.0 * math.cos(theta) / math.sqrt(1.0 + math.sin(theta) ** 2)


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class QState:
    """Density operator tagged with its ordered subsystem dimensions."""

    rho: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        rho = _readonly(self.rho)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        mk.check_shape(rho, self.dims)
        if not mk.is_hermitian(rho, HERM_TOL):
            raise ValueError("density operator must be Hermitian")
        w = np.linalg.eigvalsh(rho)
        if w.min() < -PSD_TOL:
            raise ValueError(f"density operator not PSD (min eigenvalue {w.min():.3e})")
        tr = float(np.real(np.trace(rho)))
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density operator trace {tr} != 1")

    @property
    def dim(self) -> int:
        return self.rho.shape[0]


@dataclass(frozen=True)
class Dichotomic:
    """Hermitian observable squaring to the identity (+1/-1 outcomes)."""

    op: np.ndarray
    label: str = ""

    def __post_init__(self):
        op = _readonly(self.op)
        object.__setattr__(self, "op", op)
        if not mk.is_hermitian(op, DICHOTOMIC_TOL):
            raise ValueError(f"observable {self.label!r} must be Hermitian")
        resid = float(np.max(np.abs(op @ op - np.eye(op.shape[0]))))
        if resid > DICHOTOMIC_TOL:
            raise ValueError(f"observable {self.label!r} fails O^2 = I (residual {resid:.3e})")


@dataclass(frozen=True)
class Povm:
    """Ordered POVM elements, optionally with rank-one ket representatives.

    Construction does not enforce validity; use :func:`povm_validity` so that
    deliberately corrupted element sets can be examined.
    """

    elements: tuple[np.ndarray, ...]
    kets: tuple[np.ndarray, ...] | None = None
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(_readonly(e) for e in self.elements))
        if self.kets is not None:
            kets = tuple(np.array(k, dtype=complex) for k in self.kets)
            for k in kets:
                k.setflags(write=False)
            object.__setattr__(self, "kets", kets)

    @property
    def n_outcomes(self) -> int:
        return len(self.elements)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]


def qstate_from_ket(ket, dims) -> QState:
    k = np.asarray(ket, dtype=complex).reshape(-1)
    k = k / np.linalg.norm(k)
    return QState(np.outer(k, k.conj()), tuple(dims))


def psi_theta_ket(theta: float) -> np.ndarray:
    """Schmidt-form state vector cos(t/2)|00> + sin(t/2)|11>."""
    theta = check_theta(theta)
    return np.array([math.cos(theta / 2), 0.0, 0.0, math.sin(theta / 2)], dtype=complex)


def psi_theta(theta: float) -> QState:
    """Rank-one projector onto the partially entangled two-qubit state."""
    return qstate_from_ket(psi_theta_ket(theta), (2, 2))


def psi_theta_pauli(theta: float) -> np.ndarray:
    """Same projector assembled from its Pauli-correlator expansion."""
    theta = check_theta(theta)
    c, s = math.cos(theta), math.sin(theta)
    return 0.25 * (
        mk.kron(ID2, ID2)
        + c * (mk.kron(ID2, PAULI_Z) + mk.kron(PAULI_Z, ID2))
        + s * (mk.kron(PAULI_X, PAULI_X) - mk.kron(PAULI_Y, PAULI_Y))
        + mk.kron(PAULI_Z, PAULI_Z)
    )


def phi_theta(theta: float) -> QState:
    """Spectral partner state sin(t/2)|01> - cos(t/2)|10>.

    Together with psi_theta it spans the +-eigenspaces of the tilted Bell
    operator.
    """
    theta = check_theta(theta)
    k = np.array([0.0, math.sin(theta / 2), -math.cos(theta / 2), 0.0], dtype=complex)
    return qstate_from_ket(k, (2, 2))


@dataclass(frozen=True)
class AncillaRealization:
    """Concrete ancilla pair (A', B', sigma) satisfying <A' x B'>_sigma = 1."""

    a_prime: np.ndarray
    b_prime: np.ndarray
    sigma: QState
    label: str = ""

    def correlation(self) -> float:
        return mk.expval(mk.kron(self.a_prime, self.b_prime), self.sigma.rho)


def ancilla_pure() -> AncillaRealization:
    """One qubit per side, A' = B' = Z, sigma = |00><00|."""
    sigma = qstate_from_ket(np.array([1, 0, 0, 0], dtype=complex), (2, 2))
    return AncillaRealization(PAULI_Z, PAULI_Z, sigma, label="pure")


def ancilla_mixed() -> AncillaRealization:
    """One qubit per side, A' = B' = Z, sigma = (|00><00| + |11><11|)/2."""
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 0.5
    rho[3, 3] = 0.5
    return AncillaRealization(PAULI_Z, PAULI_Z, QState(rho, (2, 2)), label="mixed")


def ideal_measurements(
    theta: float, ancilla: AncillaRealization | None = None
) -> tuple[list[Dichotomic], list[Dichotomic], QState]:
    """Ideal Bell-test observables on qubit x ancilla for a given angle.

    Alice measures (Z, X, Y x A') and Bob the six tilted-CHSH combinations
    built from Z, X and Y x B' with weights sqrt(lambda_pm / 2),
    lambda_pm = 1 +- beta^2/4.  Returns (alice, bob, sigma) where sigma is
    the ancilla state of the supplied realization (default: `ancilla_pure`).
    """
    theta = check_theta(theta)
    if ancilla is None:
        ancilla = ancilla_pure()
    beta = beta_of_theta(theta)
    lam_p = 1.0 + beta**2 / 4.0
    lam_m = 1.0 - beta**2 / 4.0
    wp, wm = math.sqrt(lam_p / 2.0), math.sqrt(lam_m / 2.0)

    da = ancilla.a_prime.shape[0]
    db = ancilla.b_prime.shape[0]
    z_a = mk.kron(PAULI_Z, np.eye(da))
    x_a = mk.kron(PAULI_X, np.eye(da))
    y_ap = mk.kron(PAULI_Y, ancilla.a_prime)
    z_b = mk.kron(PAULI_Z, np.eye(db))
    x_b = mk.kron(PAULI_X, np.eye(db))
    y_bp = mk.kron(PAULI_Y, ancilla.b_prime)

    alice = [
        Dichotomic(z_a, "A1"),
        Dichotomic(x_a, "A2"),
        Dichotomic(y_ap, "A3"),
    ]
    bob = [
        Dichotomic(wp * z_b + wm * x_b, "B1"),
        Dichotomic(wp * z_b - wm * x_b, "B2"),
        Dichotomic(wp * z_b - wm * y_bp, "B3"),
        Dichotomic(wp * z_b + wm * y_bp, "B4"),
        Dichotomic((x_b - y_bp) / math.sqrt(2), "B5"),
        Dichotomic((x_b + y_bp) / math.sqrt(2), "B6"),
    ]
    return alice, bob, ancilla.sigma


def compose_with_ancilla(state: QState, sigma: QState) -> QState:
    """Full state on (A, A', B, B') from a qubit pair state and an ancilla pair.

    The plain tensor product orders subsystems (A, B, A', B'); the result is
    permuted into the package convention (A, A', B, B').
    """
    if state.dims != (2, 2) or len(sigma.dims) != 2:
        raise ValueError("expected a two-qubit state and a bipartite ancilla")
    da, db = sigma.dims
    rho = mk.kron(state.rho, sigma.rho)
    rho = mk.permute_subsystems(rho, (2, 2, da, db), (0, 2, 1, 3))
    return QState(rho, (2, da, 2, db))


# ---------------------------------------------------------------------------
# POVM reports and constructors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PovmValidity:
    is_valid: bool
    max_psd_violation: float
    completeness_residual: float


@dataclass(frozen=True)
class PovmExtremality:
    all_rank_one: bool
    linearly_independent: bool
    is_extremal_candidate: bool
    min_second_eigenvalue_margin: float
    independence_margin: float


def povm_validity(p: Povm, tol: float = PSD_TOL) -> PovmValidity:
    """PSD and completeness check.

    The completeness residual is trace_norm(sum E_a - I) / dim, so a uniform
    scaling of one element by (1 + x) on a rank-one projector shows up as
    roughly x/dim.
    """
    d = p.dim
    psd_violation = 0.0
    for e in p.elements:
        w = np.linalg.eigvalsh(np.asarray(e))
        psd_violation = max(psd_violation, float(max(0.0, -w.min())))
    total = sum(p.elements)
    residual = mk.trace_norm(total - np.eye(d)) / d
    return PovmValidity(psd_violation <= tol and residual <= tol, psd_violation, residual)


def povm_extremality(p: Povm, tol: float = RANK_ONE_TOL) -> PovmExtremality:
    """Operational extremality criteria for a qubit POVM.

    Checks that every element is rank one (second eigenvalue below `tol`)
    and that the elements are linearly independent (empty joint null space).
    """
    if p.dim != 2:
        raise ValueError("extremality criteria implemented for qubit POVMs only")
    second = 0.0
    for e in p.elements:
        w = np.linalg.eigvalsh(np.asarray(e))
        second = max(second, float(abs(w[-2])))
    all_rank_one = second <= tol
    stacked = np.stack([np.asarray(e).reshape(-1) for e in p.elements], axis=1)
    svals = np.linalg.svd(stacked, compute_uv=False)
    margin = float(svals.min()) if len(p.elements) <= stacked.shape[0] else 0.0
    independent = len(mk.null_space(list(p.elements), NULLSPACE_TOL)) == 0
    return PovmExtremality(all_rank_one, independent, all_rank_one and independent, second, margin)


def bloch_ket(weight: float, n: np.ndarray) -> np.ndarray:
    """Subnormalized ket of the rank-one element (weight/2)(I + n.sigma).

    Global phase fixed by making the first nonzero amplitude real positive.
    """
    nx, ny, nz = (float(v) for v in n)
    t = math.acos(max(-1.0, min(1.0, nz)))
    phi = math.atan2(ny, nx)
    return math.sqrt(weight) * np.array(
        [math.cos(t / 2), math.sin(t / 2) * np.exp(1j * phi)], dtype=complex
    )


def _bloch_element(weight: float, n: np.ndarray) -> np.ndarray:
    nx, ny, nz = (float(v) for v in n)
    return (weight / 2.0) * (ID2 + nx * PAULI_X + ny * PAULI_Y + nz * PAULI_Z)


def povm_from_bloch(weights, normals, label: str) -> Povm:
    elements = tuple(_bloch_element(w, n) for w, n in zip(weights, normals))
    kets = tuple(bloch_ket(w, n) for w, n in zip(weights, normals))
    return Povm(elements, kets, label)


def adjusted_tetrahedral(theta: float, deltas=(0.0, 2 * math.pi / 3, 4 * math.pi / 3)) -> Povm:
    """Four-outcome POVM yielding uniform outcomes on the theta-state marginal.

    A tetrahedral POVM adjusted so that the first element points along +Z
    with weight 1/(2 + 2cos t) and the remaining three sit on a cone at
    cos(gamma) = -1/(3 + 4cos t) with azimuths `deltas`.
    """
    theta = check_theta(theta)
    c = math.cos(theta)
    lam1 = 1.0 / (2.0 + 2.0 * c)
    lam = (3.0 + 4.0 * c) / (6.0 + 6.0 * c)
    cos_g = -1.0 / (3.0 + 4.0 * c)
    sin_g = math.sqrt(1.0 - cos_g**2)
    weights = [lam1, lam, lam, lam]
    normals = [np.array([0.0, 0.0, 1.0])]
    for d in deltas:
        normals.append(np.array([sin_g * math.cos(d), sin_g * math.sin(d), cos_g]))
    return povm_from_bloch(weights, normals, "adjusted-tetrahedral")


def modified_mercedes(theta: float) -> Povm:
    """Three-outcome POVM in the X-Z plane with uniform outcome statistics."""
    theta = check_theta(theta)
    c = math.cos(theta)
    lam1 = 2.0 / (3.0 + 3.0 * c)
    lam23 = (2.0 + 3.0 * c) / (3.0 + 3.0 * c)
    mu = 1.0 / (2.0 + 3.0 * c)
    x = math.sqrt(1.0 - mu**2)
    weights = [lam1, lam23, lam23]
    normals = [
        np.array([0.0, 0.0, 1.0]),
        np.array([x, 0.0, -mu]),
        np.array([-x, 0.0, -mu]),
    ]
    return povm_from_bloch(weights, normals, "modified-mercedes")


def near_y_tetrahedral(epsilon: float) -> Povm:
    """Four-outcome POVM with elements tilted by epsilon off the Y axis.

    Element prefactor is 1/4; Bloch directions are (0, +-sqrt(1-eps^2), +-eps)
    and (+-eps, -sqrt(1-eps^2), 0).  The Y components cancel pairwise so the
    elements sum to the identity exactly.  epsilon = 0 is rejected: the
    elements then coincide pairwise and the POVM is not extremal.
    """
    epsilon = float(epsilon)
    if not (0.0 < epsilon < 1.0):
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    r = math.sqrt(1.0 - epsilon**2)
    weights = [0.5, 0.5, 0.5, 0.5]
    normals = [
        np.array([0.0, r, epsilon]),
        np.array([0.0, r, -epsilon]),
        np.array([epsilon, -r, 0.0]),
        np.array([-epsilon, -r, 0.0]),
    ]
    return povm_from_bloch(weights, normals, "near-y-tetrahedral")


def conjugate_povm(p: Povm) -> Povm:
    """Entrywise complex conjugate of every element (and ket, if present)."""
    elements = tuple(np.conj(e) for e in p.elements)
    kets = tuple(np.conj(k) for k in p.kets) if p.kets is not None else None
    return Povm(elements, kets, p.label + "*" if p.label else "")


def kets_from_elements(p: Povm, tol: float = RANK_ONE_TOL) -> Povm:
    """Attach rank-one kets extracted spectrally, with the fixed phase gauge."""
    kets = []
    for e in p.elements:
        w, v = mk.eigh(np.asarray(e))
        if abs(w[1]) > tol:
            raise ValueError(f"element is not rank one (second eigenvalue {w[1]:.3e})")
        k = math.sqrt(max(w[0], 0.0)) * v[:, 0]
        nz = np.flatnonzero(np.abs(k) > 1e-12)
        if len(nz):
            k = k * (np.abs(k[nz[0]]) / k[nz[0]])
        kets.append(k)
    return Povm(p.elements, tuple(kets), p.label)


# ---------------------------------------------------------------------------
# JSON serialization (exact round trip)
# ---------------------------------------------------------------------------


def _matrix_to_entries(m: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(m, dtype=complex).reshape(-1)]


def _entries_to_matrix(entries, rows: int, cols: int) -> np.ndarray:
    flat = np.array([complex(re, im) for re, im in entries], dtype=complex)
    return flat.reshape(rows, cols)


def state_to_json(s: QState) -> dict:
    return {
        "kind": "state",
        "dims": list(s.dims),
        "entries": _matrix_to_entries(s.rho),
    }


def state_from_json(d: dict) -> QState:
    dims = tuple(int(x) for x in d["dims"])
    n = int(np.prod(dims))
    return QState(_entries_to_matrix(d["entries"], n, n), dims)


def povm_to_json(p: Povm) -> dict:
    out = {
        "kind": "povm",
        "dims": [p.dim],
        "label": p.label,
        "elements": [_matrix_to_entries(e) for e in p.elements],
        "kets": None,
    }
    if p.kets is not None:
        out["kets"] = [[[float(z.real), float(z.imag)] for z in k] for k in p.kets]
    return out


def povm_from_json(d: dict) -> Povm:
    n = int(d["dims"][0])
    elements = tuple(_entries_to_matrix(e, n, n) for e in d["elements"])
    kets = None
    if d.get("kets") is not None:
        kets = tuple(np.array([complex(re, im) for re, im in k]) for k in d["kets"])
    return Povm(elements, kets, d.get("label", ""))
