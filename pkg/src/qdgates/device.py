"""Spin-chain Hamiltonians for exchange-coupled quantum-dot qubits.

Units and conventions, fixed package-wide:

* energies in ueV, magnetic fields in tesla, g-factor dimensionless;
* hbar = 1 internally, so one model time unit equals HBAR = 0.6582120 ns
  (time in ns = model time * HBAR); all dynamics code works in model units
  and the CLI converts at the boundary;
* sigma operators are Pauli matrices (eigenvalues +-1), so a single-spin
  Zeeman gap is 2*g*MU_B*B;
* the CNOT chain is ordered [control, target] with the control at the
  higher static field; the Toffoli chain is ordered
  [left control, center target, right control] with fields increasing
  left to right;
* the two gates use opposite signs on the static Zeeman term (+ for the
  two-spin chain, - for the three-spin chain).  Flipping the sign only
  relabels which spin pattern is highest in energy; both builders follow
  their own convention exactly and all derived quantities (resonances,
  collapse rates) are computed from the eigensystem, so internal
  consistency never depends on the choice.

Drive frequency is *signed*: the transverse ac field enters as the
circularly polarized combination cos(wt)*Sx - sin(wt)*Sy, and the sign of
w selects the rotation direction.  "auto" resolution picks the signed
value that makes the drive co-rotate with the gate transition
(all-controls-up <-> target-flipped), which is negative for the two-spin
chain with g > 0 and positive for the three-spin chain.  The magnitude is
always the bare transition gap of the drive-free spectrum.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .operators import EigenSystem, eigensystem, embed_pauli

MU_B = 57.883818        # Bohr magneton, ueV / T
HBAR = 0.6582120        # ueV * ns; length of one model time unit in ns

G_DEFAULT = 2.0
G_GAAS = -0.44          # documented preset; energy scales use |g|

CNOT = "cnot"
TOFFOLI = "toffoli"
GATES = (CNOT, TOFFOLI)

AUTO = "auto"


def ns_to_time(t_ns: float) -> float:
    """Convert nanoseconds to model time units (hbar/ueV)."""
    return t_ns / HBAR


def time_to_ns(t: float) -> float:
    return t * HBAR


def field_to_energy(b_tesla: float, g: float) -> float:
    """Zeeman energy coefficient g * mu_B * B in ueV."""
    return g * MU_B * b_tesla


@dataclass(frozen=True)
class DeviceConfig:
    """Static description of one gate configuration.

    b_fields holds the per-qubit static fields in tesla, ordered
    [control, target] for cnot and [left control, center target,
    right control] for toffoli.  exchange holds (J,) for cnot and
    (J12, J23) for toffoli, in ueV.  drive_frequency is either the
    sentinel "auto" or a signed energy in ueV (see module docstring).
    """
    gate: str
    b_fields: tuple
    b_ac: float
    exchange: tuple
    g: float = G_DEFAULT
    drive_frequency: object = AUTO

    def __post_init__(self):
        if self.gate not in GATES:
            raise ValueError(f"unknown gate {self.gate!r}")
        n = 2 if self.gate == CNOT else 3
        object.__setattr__(self, "b_fields", tuple(float(b) for b in self.b_fields))
        object.__setattr__(self, "exchange", tuple(float(j) for j in self.exchange))
        if len(self.b_fields) != n:
            raise ValueError(f"{self.gate} needs {n} static fields, got {len(self.b_fields)}")
        if len(self.exchange) != n - 1:
            raise ValueError(f"{self.gate} needs {n - 1} exchange couplings")
        values = [*self.b_fields, self.b_ac, *self.exchange, self.g]
        if self.drive_frequency != AUTO:
            values.append(float(self.drive_frequency))
        if not all(np.isfinite(values)):
            raise ValueError("device parameters must be finite")
        if self.b_ac < 0:
            raise ValueError("b_ac must be non-negative")
        if any(j < 0 for j in self.exchange):
            raise ValueError("exchange couplings must be non-negative")
        self._warn_gradient_shape()

    def _warn_gradient_shape(self):
        if self.gate == CNOT:
            if not self.b_fields[0] > self.b_fields[1]:
                warnings.warn("cnot expects the control at higher field than the target",
                              stacklevel=3)
        else:
            b1, b2, b3 = self.b_fields
            if not b3 > b2 > b1:
                warnings.warn("toffoli expects fields increasing from left control "
                              "to right control", stacklevel=3)

    @property
    def n_qubits(self) -> int:
        return len(self.b_fields)

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    @property
    def target_qubit(self) -> int:
        return 1

    @property
    def control_qubits(self) -> tuple:
        return (0,) if self.gate == CNOT else (0, 2)

    @property
    def qubit_roles(self) -> tuple:
        if self.gate == CNOT:
            return ("control", "target")
        return ("control_left", "target", "control_right")

    @property
    def zeeman_sign(self) -> float:
        """+1 for the two-spin chain, -1 for the three-spin chain."""
        return 1.0 if self.gate == CNOT else -1.0

    @property
    def zeeman_energies(self) -> tuple:
        return tuple(field_to_energy(b, self.g) for b in self.b_fields)

    @property
    def drive_energy(self) -> float:
        return field_to_energy(self.b_ac, self.g)

    def resolved(self) -> bool:
        return self.drive_frequency != AUTO


def cnot_config(b_target: float, gradient: float, *, j: float, b_ac: float,
                g: float = G_DEFAULT, drive_frequency=AUTO) -> DeviceConfig:
    """CNOT configuration from the target field and gradient B_C - B_T."""
    return DeviceConfig(gate=CNOT, b_fields=(b_target + gradient, b_target),
                        b_ac=b_ac, exchange=(j,), g=g,
                        drive_frequency=drive_frequency)


def toffoli_config(b_left: float, gradient: float, *, j12: float, j23: float,
                   b_ac: float, g: float = G_DEFAULT, drive_frequency=AUTO) -> DeviceConfig:
    """Toffoli configuration with equal per-step gradient.

    gradient is the positive step between neighbors, so the center target
    sits at b_left + gradient and the right control at b_left + 2*gradient.
    """
    fields = (b_left, b_left + gradient, b_left + 2 * gradient)
    return DeviceConfig(gate=TOFFOLI, b_fields=fields, b_ac=b_ac,
                        exchange=(j12, j23), g=g, drive_frequency=drive_frequency)


def _exchange_hamiltonian(cfg: DeviceConfig) -> np.ndarray:
    n = cfg.n_qubits
    h = np.zeros((cfg.dim, cfg.dim), dtype=complex)
    for bond, j in enumerate(cfg.exchange):
        for axis in "xyz":
            h += j * (embed_pauli(axis, bond, n) @ embed_pauli(axis, bond + 1, n))
    return h


def _collective(cfg: DeviceConfig, axis: str) -> np.ndarray:
    n = cfg.n_qubits
    return sum(embed_pauli(axis, q, n) for q in range(n))


def static_hamiltonian(cfg: DeviceConfig) -> np.ndarray:
    """Drive-free Hamiltonian: exchange plus static Zeeman terms."""
    h = _exchange_hamiltonian(cfg)
    s = cfg.zeeman_sign
    for q, e in enumerate(cfg.zeeman_energies):
        h += s * e * embed_pauli("z", q, cfg.n_qubits)
    return h


def build_hamiltonian_lab(cfg: DeviceConfig, t: float) -> np.ndarray:
    """Lab-frame Hamiltonian at model time t, with the rotating ac drive."""
    if not cfg.resolved():
        raise ValueError("drive frequency is unresolved; call resolve_drive first")
    omega = float(cfg.drive_frequency)
    b = cfg.drive_energy
    h = static_hamiltonian(cfg)
    h -= b * (np.cos(omega * t) * _collective(cfg, "x")
              - np.sin(omega * t) * _collective(cfg, "y"))
    return h


def build_hamiltonian_rwa(cfg: DeviceConfig) -> np.ndarray:
    """Time-independent rotating-frame Hamiltonian.

    In the frame co-rotating with the drive the exchange terms are
    unchanged, every Zeeman coefficient is shifted by omega/2, and the
    drive becomes a static -g*mu_B*B_ac transverse term on every qubit.
    The frame transformation is diagonal in the z basis, so z populations
    match the lab frame exactly for this drive polarization.
    """
    if not cfg.resolved():
        raise ValueError("drive frequency is unresolved; call resolve_drive first")
    omega = float(cfg.drive_frequency)
    h = _exchange_hamiltonian(cfg)
    s = cfg.zeeman_sign
    for q, e in enumerate(cfg.zeeman_energies):
        h += (s * e + omega / 2.0) * embed_pauli("z", q, cfg.n_qubits)
    h -= cfg.drive_energy * _collective(cfg, "x")
    return h


def static_eigensystem(cfg: DeviceConfig) -> EigenSystem:
    """Eigensystem of the drive-free Hamiltonian (resonances, collapse set)."""
    return eigensystem(static_hamiltonian(cfg))


def resonance_frequency(eig: EigenSystem, transition: tuple) -> float:
    """Unsigned energy gap |w_a - w_b| between two labeled eigenstates."""
    a, b = transition
    return abs(eig.energy_of(a) - eig.energy_of(b))


def gate_transition(cfg: DeviceConfig) -> tuple:
    """Label pair (all controls up, target flipped) addressed by the drive."""
    up = "u" * cfg.n_qubits
    flipped = up[:cfg.target_qubit] + "d" + up[cfg.target_qubit + 1:]
    return up, flipped


def _magnetization(label: str) -> int:
    return sum(1 if ch == "u" else -1 for ch in label)


def resolve_drive(cfg: DeviceConfig) -> DeviceConfig:
    """Resolve drive_frequency = "auto" against the drive-free spectrum.

    The signed value makes the two gate-transition levels degenerate in
    the rotating frame: omega = 2 (w_b - w_a) / (m_a - m_b) where m is the
    total z magnetization of the labeled states.  For single-spin-flip
    transitions this is just the signed gap.
    """
    if cfg.resolved():
        return cfg
    eig = static_eigensystem(cfg)
    a, b = gate_transition(cfg)
    w_a, w_b = eig.energy_of(a), eig.energy_of(b)
    omega = 2.0 * (w_b - w_a) / (_magnetization(a) - _magnetization(b))
    return replace(cfg, drive_frequency=omega)
