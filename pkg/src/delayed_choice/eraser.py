"""Discretized delayed quantum eraser.

A photon passes a double slit and leaves at one of ``N`` angles θ_n, giving
the single-photon space C² ⊗ C^N (slit label major, angle index minor).  A
nonlinear crystal turns it into a signal/idler pair living in
(C² ⊗ C^N) ⊗ (C² ⊗ C^N).  Both slits send angle θ_k to the same screen
position x_k, so a screen hit at x_k does not resolve the slit label; the
idler, sent through beamsplitters and mirrors, may or may not.

Indices are zero-based throughout: screen bin ``k`` runs over ``0 .. N-1``.

Geometry and amplitude model
----------------------------
The angles are uniform in sin θ: ``sin θ_n = aperture * (2n - N) / N``, which
always includes θ = 0 (at ``n = N/2`` for even N).  Slit amplitudes have
modulus ``sqrt(envelope(sin θ))`` and opposite phases ``±π d sin θ / λ``, so
the relative phase is the familiar far-field ``2π d sin θ / λ``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, DarkBinError
from .qcore import (
    DensityMatrix,
    Factor,
    QuantumState,
    apply,
    identity,
    is_isometry,
    kron_all,
    max_abs,
    partial_trace,
)
from .wheeler import H, X, Y

ENVELOPES = ("fraunhofer_sinc2", "gaussian", "uniform")
SLITS = ("R", "L")
EXPERIMENTS = (1, 2, 3)

# sinc^2 main lobe FWHM is 0.8859 λ/a; the gaussian option matches it
_SINC2_FWHM = 0.885893
_FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))


@dataclass(frozen=True)
class EraserConfig:
    """Discretization and geometry.  Lengths share one arbitrary unit."""

    N: int = 256
    wavelength: float = 500.0
    slit_separation: float = 10000.0
    slit_width: float = 2000.0
    screen_distance: float = 1.0e9
    envelope: str = "fraunhofer_sinc2"
    aperture: float = 0.25
    # finite values displace the two single-slit envelopes by ±d/2 on the screen
    slit_screen_distance: float = math.inf

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not isinstance(self.N, (int, np.integer)) or isinstance(self.N, bool):
            raise ConfigError("N", f"must be an integer, got {self.N!r}")
        if self.N < 2:
            raise ConfigError("N", f"must be >= 2, got {self.N}")
        for name in ("wavelength", "slit_separation", "slit_width", "screen_distance", "slit_screen_distance"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and value > 0) or math.isnan(value):
                raise ConfigError(name, f"must be a positive length, got {value!r}")
            if name != "slit_screen_distance" and math.isinf(value):
                raise ConfigError(name, "must be finite")
        if self.slit_separation <= self.slit_width:
            raise ConfigError("slit_separation", "must exceed slit_width")
        if self.envelope not in ENVELOPES:
            raise ConfigError("envelope", f"must be one of {', '.join(ENVELOPES)}, got {self.envelope!r}")
        if not 0 < self.aperture < 1:
            raise ConfigError("aperture", f"must lie in (0, 1), got {self.aperture!r}")

    def replace(self, **changes) -> "EraserConfig":
        return EraserConfig(**{**asdict(self), **changes})

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @property
    def sin_angles(self) -> np.ndarray:
        n = np.arange(self.N)
        return self.aperture * (2 * n - self.N) / self.N

    @property
    def angles(self) -> np.ndarray:
        return np.arcsin(self.sin_angles)

    @property
    def positions(self) -> np.ndarray:
        return self.screen_distance * np.tan(self.angles)

    @property
    def relative_phase(self) -> np.ndarray:
        """Phase of p_R minus phase of p_L at each bin."""
        return 2 * np.pi * self.slit_separation * self.sin_angles / self.wavelength

    @property
    def envelope_shift(self) -> float:
        """Per-slit envelope offset, in sin θ units."""
        return self.slit_separation / (2 * self.slit_screen_distance)


def envelope_profile(cfg: EraserConfig, sin_theta: np.ndarray) -> np.ndarray:
    """Single-slit intensity profile (unnormalized) at the given sin θ."""
    u = cfg.slit_width * sin_theta / cfg.wavelength
    if cfg.envelope == "fraunhofer_sinc2":
        return np.sinc(u) ** 2
    if cfg.envelope == "gaussian":
        sigma = _SINC2_FWHM * _FWHM_TO_SIGMA
        return np.exp(-0.5 * (u / sigma) ** 2)
    return np.ones_like(sin_theta)


@dataclass(frozen=True)
class SlitAmplitudes:
    p_R: np.ndarray
    p_L: np.ndarray
    x: np.ndarray

    @property
    def N(self) -> int:
        return self.p_R.size

    def conditional(self) -> tuple[np.ndarray, np.ndarray]:
        """p̃_R, p̃_L for every bin; zero where both amplitudes vanish."""
        norm = np.sqrt(np.abs(self.p_R) ** 2 + np.abs(self.p_L) ** 2)
        safe = np.where(norm > 0, norm, 1.0)
        return (
            np.where(norm > 0, self.p_R / safe, 0.0),
            np.where(norm > 0, self.p_L / safe, 0.0),
        )

    @property
    def screen_marginal(self) -> np.ndarray:
        """P(x_k) = (|p_R,k|² + |p_L,k|²) / 2."""
        return 0.5 * (np.abs(self.p_R) ** 2 + np.abs(self.p_L) ** 2)


def _normalized_modulus(profile: np.ndarray, field_name: str) -> np.ndarray:
    total = profile.sum()
    if not total > 0:
        raise ConfigError(field_name, "envelope vanishes on every angle of the aperture")
    return np.sqrt(profile / total)


def slit_amplitudes(cfg: EraserConfig) -> SlitAmplitudes:
    s = cfg.sin_angles
    shift = cfg.envelope_shift
    mod_R = _normalized_modulus(envelope_profile(cfg, s - shift), "envelope")
    mod_L = _normalized_modulus(envelope_profile(cfg, s + shift), "envelope")
    half_phase = np.pi * cfg.slit_separation * s / cfg.wavelength
    return SlitAmplitudes(
        p_R=mod_R * np.exp(1j * half_phase),
        p_L=mod_L * np.exp(-1j * half_phase),
        x=cfg.positions,
    )


@dataclass(frozen=True)
class ConditionalAmplitudes:
    k: int
    p_R: complex
    p_L: complex


def conditional_amplitudes(s: SlitAmplitudes, k: int) -> ConditionalAmplitudes:
    """Slit amplitudes renormalized on arrival at screen bin ``k``."""
    if not 0 <= k < s.N:
        raise IndexError(f"bin {k} outside 0..{s.N - 1}")
    pr, pl = complex(s.p_R[k]), complex(s.p_L[k])
    norm = math.sqrt(abs(pr) ** 2 + abs(pl) ** 2)
    if norm == 0.0:
        raise DarkBinError(f"both slit amplitudes vanish at bin {k}")
    return ConditionalAmplitudes(k, pr / norm, pl / norm)


# -- operators on the signal/idler space ------------------------------------


def slit_factors(N: int, tag: str = "") -> tuple[Factor, Factor]:
    return (
        Factor(f"slit{tag}", tuple(f"{lab}{tag}" for lab in SLITS)),
        Factor(f"angle{tag}", tuple(str(n) for n in range(N))),
    )


def _pair_index(slit: np.ndarray, n: np.ndarray, N: int) -> np.ndarray:
    """Row index of |slit_s, n⟩ ⊗ |slit_i, n⟩ in the signal ⊗ idler space."""
    single = slit * N + n
    return single * (2 * N) + single


def build_crystal(cfg: EraserConfig) -> sp.csr_matrix:
    """C : |slit⟩|n⟩ ↦ |slit_s, n⟩ ⊗ |slit_i, n⟩, a (4N²) × (2N) isometry."""
    N = cfg.N
    cols = np.arange(2 * N)
    rows = _pair_index(cols // N, cols % N, N)
    return sp.csr_matrix(
        (np.ones(2 * N, dtype=complex), (rows, cols)), shape=(4 * N * N, 2 * N)
    )


def build_screen(cfg: EraserConfig, amps: SlitAmplitudes | None = None) -> sp.csr_matrix:
    """S : signal ⊗ idler → idler, a (2N) × (4N²) map.

    Matched pairs |R_s, n⟩ ⊗ |R_i, n⟩ go to (1/√N) Σ_m p̃_{R,m} |R_i, m⟩ (every
    n lands on the same vector) and likewise for L; unmatched pairs go to 0.
    """
    amps = slit_amplitudes(cfg) if amps is None else amps
    N = cfg.N
    pt = amps.conditional()
    rows, cols, vals = [], [], []
    for slit in (0, 1):
        m = np.arange(N)
        for n in range(N):
            rows.append(slit * N + m)
            cols.append(np.full(N, _pair_index(np.array(slit), np.array(n), N)))
            vals.append(pt[slit] / np.sqrt(N))
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(2 * N, 4 * N * N),
    )


def slit_operator(gate: np.ndarray, N: int) -> np.ndarray:
    """``gate ⊗ I_N`` on the single-photon space C² ⊗ C^N."""
    return kron_all(gate, identity(N))


def lifted_idler_operator(gate: np.ndarray, N: int) -> sp.csr_matrix:
    """``(I ⊗ I) ⊗ (gate ⊗ I)``: acts on the idler slit label only."""
    return kron_all(identity(2 * N, sparse=True), sp.csr_matrix(gate), identity(N, sparse=True))


def compose_delayed_eraser(cfg: EraserConfig) -> np.ndarray:
    """A = (H⊗I)(X⊗I)(H⊗I) S C: idler optics act after the screen."""
    sc = (build_screen(cfg) @ build_crystal(cfg)).toarray()
    hi, xi = slit_operator(H, cfg.N), slit_operator(X, cfg.N)
    return hi @ (xi @ (hi @ sc))


def compose_nondelayed_eraser(cfg: EraserConfig) -> np.ndarray:
    """A' = S ∘ lifted(H⊗I) ∘ lifted(X⊗I) ∘ lifted(H⊗I) ∘ C: optics first."""
    c = build_crystal(cfg)
    lh, lx = lifted_idler_operator(H, cfg.N), lifted_idler_operator(X, cfg.N)
    before_screen = lh @ (lx @ (lh @ c))
    return (build_screen(cfg) @ before_screen).toarray()


@dataclass(frozen=True)
class EraserIdentityReport:
    N: int
    envelope: str
    max_abs_diff: float
    max_abs_y_form: float
    intertwining_residual: float
    crystal_isometry: bool

    def holds(self, tol: float = 1e-12) -> bool:
        return (
            self.crystal_isometry
            and max(self.max_abs_diff, self.max_abs_y_form, self.intertwining_residual) <= tol
        )


def screen_intertwining_residual(cfg: EraserConfig, screen: sp.csr_matrix | None = None) -> float:
    """max |S ∘ ((I⊗I)⊗(Y⊗I)) − (Y⊗I) ∘ S|."""
    s = build_screen(cfg) if screen is None else screen
    lhs = s @ lifted_idler_operator(Y, cfg.N)
    rhs = sp.csr_matrix(slit_operator(Y, cfg.N)) @ s
    return max_abs(lhs - rhs)


def verify_eraser_identity(cfg: EraserConfig) -> EraserIdentityReport:
    a = compose_delayed_eraser(cfg)
    a2 = compose_nondelayed_eraser(cfg)
    screen = build_screen(cfg)
    y_form = slit_operator(Y, cfg.N) @ (screen @ build_crystal(cfg)).toarray()
    return EraserIdentityReport(
        N=cfg.N,
        envelope=cfg.envelope,
        max_abs_diff=max_abs(a - a2),
        max_abs_y_form=max_abs(a - y_form),
        intertwining_residual=screen_intertwining_residual(cfg, screen),
        crystal_isometry=is_isometry(build_crystal(cfg)),
    )


# -- idler optics and detection statistics ----------------------------------


@dataclass(frozen=True)
class IdlerOptics:
    """Isometry from the idler slit label {R, L} to detector ports."""

    experiment: int
    ports: tuple[str, ...]
    scattering: np.ndarray


def build_idler_optics(experiment: int) -> IdlerOptics:
    s = 1 / np.sqrt(2)
    if experiment == 1:
        # detectors sit directly in the two idler paths
        return IdlerOptics(1, ("D1", "D2"), np.eye(2, dtype=complex))
    if experiment == 2:
        return IdlerOptics(2, ("D1", "D2"), np.array([[s, s], [s, -s]], dtype=complex))
    if experiment == 3:
        # D1/D2 behind the erasing beamsplitter, D3/D4 keep which-path information
        scat = np.array(
            [
                [0.5, 0.5],
                [0.5, -0.5],
                [s, 0.0],
                [0.0, s],
            ],
            dtype=complex,
        )
        return IdlerOptics(3, ("D1", "D2", "D3", "D4"), scat)
    raise ValueError(f"unknown eraser experiment {experiment!r}; expected 1, 2 or 3")


@dataclass(frozen=True)
class JointDistribution:
    """P(x_k, D_j) as an ``(N, ports)`` array with bin centres."""

    experiment: int
    x: np.ndarray
    detectors: tuple[str, ...]
    probs: np.ndarray

    @property
    def screen_marginal(self) -> np.ndarray:
        return self.probs.sum(axis=1)

    def detector_totals(self) -> dict[str, float]:
        return dict(zip(self.detectors, self.probs.sum(axis=0).tolist()))

    def conditional_on_screen(self) -> np.ndarray:
        """P(D_j | x_k); rows with P(x_k) = 0 are left at zero."""
        m = self.screen_marginal[:, None]
        return np.divide(self.probs, m, out=np.zeros_like(self.probs), where=m > 0)

    def as_map(self) -> dict[tuple[int, str], float]:
        return {
            (k, det): float(self.probs[k, j])
            for k in range(self.x.size)
            for j, det in enumerate(self.detectors)
        }

    def triples(self) -> list[tuple[float, str, float]]:
        return [
            (float(self.x[k]), det, float(self.probs[k, j]))
            for k in range(self.x.size)
            for j, det in enumerate(self.detectors)
        ]


def joint_distribution(cfg: EraserConfig, experiment: int) -> JointDistribution:
    """Joint screen-bin / detector probabilities.

    The screen record at x_k leaves the idler in (p_R,k |R⟩ + p_L,k |L⟩)/√2;
    the idler optics map slit labels to ports and the two paths add
    coherently at each port.
    """
    optics = build_idler_optics(experiment)
    amps = slit_amplitudes(cfg)
    paths = np.stack([amps.p_R, amps.p_L]) / np.sqrt(2)
    port_amps = (optics.scattering @ paths).T
    return JointDistribution(experiment, amps.x, optics.ports, np.abs(port_amps) ** 2)


def incoherent_envelope(cfg: EraserConfig, experiment: int) -> JointDistribution:
    """Per-detector pattern with the R/L cross term dropped (no-fringe reference)."""
    optics = build_idler_optics(experiment)
    amps = slit_amplitudes(cfg)
    weights = np.abs(optics.scattering) ** 2
    paths = 0.5 * np.stack([np.abs(amps.p_R) ** 2, np.abs(amps.p_L) ** 2])
    return JointDistribution(experiment, amps.x, optics.ports, (weights @ paths).T)


# -- reduced detector/screen states (second experiment) ---------------------

DETECTOR_1 = Factor("D1", ("no click", "click"))
DETECTOR_2 = Factor("D2", ("no click", "click"))

# port D1 -> |click>_D1 |no click>_D2 ; port D2 -> |no click>_D1 |click>_D2
_ABSORPTION = np.array([[0, 0], [0, 1], [1, 0], [0, 0]], dtype=complex)


def screen_factor(N: int) -> Factor:
    return Factor("screen", tuple(f"x{k}" for k in range(N)))


def detection_state(cfg: EraserConfig, k: int) -> QuantumState:
    """Conditional state of (D1, D2, screen) after both photons are absorbed.

    Evolved from (1/√2)(p̃_R |R⟩ + p̃_L |L⟩)|x_k⟩ through the beamsplitter of
    the second experiment and the detector absorption map; its squared norm is
    1/2, the weight of the post-selection on the screen record.
    """
    amps = slit_amplitudes(cfg)
    c = conditional_amplitudes(amps, k)
    slit = Factor("idler", SLITS)
    ports = Factor("port", ("D1", "D2"))
    idler = QuantumState(
        (slit,), np.array([c.p_R, c.p_L]) / np.sqrt(2), kind="conditional"
    )
    at_ports = apply(build_idler_optics(2).scattering, idler, factors=(ports,))
    detectors = apply(_ABSORPTION, at_ports, factors=(DETECTOR_1, DETECTOR_2))
    record = np.zeros(cfg.N, dtype=complex)
    record[k] = 1.0
    return QuantumState(
        (DETECTOR_1, DETECTOR_2, screen_factor(cfg.N)),
        np.kron(detectors.amplitudes, record),
        kind="conditional",
    )


TRACE_TARGETS = ("D1", "D2", "both")


def reduced_detection_state(
    cfg: EraserConfig, k: int, trace_out: str, normalize: bool = True
) -> DensityMatrix:
    """Reduced density matrix after tracing out D1, D2 or both detectors.

    With ``normalize`` the result has unit trace and ``weight`` holds the
    removed factor 1/2; without it the literal conditional reduction is
    returned, whose branch weights are (1/4)(|p̃_R|² ± 2 Re p̃_R p̃_L* + |p̃_L|²).
    """
    if trace_out not in TRACE_TARGETS:
        raise ValueError(f"trace_out must be one of {TRACE_TARGETS}, got {trace_out!r}")
    if not 0 <= k < cfg.N:
        raise IndexError(f"bin {k} outside 0..{cfg.N - 1}")
    rho = detection_state(cfg, k).density_matrix()
    targets = ("D1", "D2") if trace_out == "both" else (trace_out,)
    for name in targets:
        rho = partial_trace(rho, name)
    return rho.normalized() if normalize else rho
