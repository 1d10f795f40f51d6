"""Scenario geometry, pathloss and channel realizations.

The topology is a multi-antenna BS, a multi-antenna decode-and-forward relay,
a planar RIS next to the relay, and ``K`` single-antenna users dropped in a
disk. Links among the BS, relay and RIS are Rician with a geometric LoS term;
every link that ends at a user is Rayleigh.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from ._validation import check_positive, check_non_negative
from .exceptions import DomainError

__all__ = [
    "ArrayLayout",
    "ChannelSet",
    "FadingParams",
    "SystemGeometry",
    "generate_scenario",
    "los_component",
    "pathloss",
    "ula",
    "upa",
]

_Y_AXIS = (0.0, 1.0, 0.0)
_Z_AXIS = (0.0, 0.0, 1.0)
_X_AXIS = (1.0, 0.0, 0.0)


def _unit(v):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0:
        raise DomainError("zero-length direction")
    return v / n


@dataclass(frozen=True)
class ArrayLayout:
    """Uniform rectangular array; a ULA is the ``rows == 1`` case.

    Elements are indexed row-major and spaced ``spacing`` wavelengths apart
    along ``row_axis`` (between rows) and ``col_axis`` (within a row).
    """

    rows: int
    cols: int
    col_axis: tuple = _Y_AXIS
    row_axis: tuple = _Z_AXIS

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise DomainError("array dimensions must be non-negative")

    @property
    def size(self):
        return self.rows * self.cols

    def steering(self, direction, spacing=0.5):
        """Unit-modulus response of the array to a plane wave along ``direction``."""
        u = _unit(direction)
        r = np.arange(self.rows)[:, None] * float(u @ _unit(self.row_axis))
        c = np.arange(self.cols)[None, :] * float(u @ _unit(self.col_axis))
        return np.exp(2j * np.pi * spacing * (r + c)).ravel()


def ula(n, axis=_Y_AXIS):
    return ArrayLayout(1, n, col_axis=tuple(axis))


def _near_square(n):
    rows = int(np.floor(np.sqrt(n))) if n > 0 else 0
    while rows > 1 and n % rows:
        rows -= 1
    return max(rows, 1 if n else 0), (n // max(rows, 1) if n else 0)


def upa(n, col_axis=_X_AXIS, row_axis=_Z_AXIS):
    """Near-square planar array with exactly ``n`` elements."""
    rows, cols = _near_square(n)
    return ArrayLayout(rows, cols, col_axis=tuple(col_axis), row_axis=tuple(row_axis))


PLACEMENTS = ("users-center", "midpoint")


@dataclass(frozen=True)
class SystemGeometry:
    """Node placement and array sizes for one scenario.

    Positions are in meters. ``spacing`` is the element spacing in
    wavelengths, shared by every array. The RIS is a near-square UPA lying
    in the x-z plane; BS and relay ULAs run along the y axis.
    """

    M: int = 5
    N: int = 5
    K: int = 4
    L: int = 50
    bs_position: tuple = (0.0, 0.0, 10.0)
    relay_position: tuple = (300.0, 0.0, 10.0)
    ris_position: tuple = (300.0, 5.0, 10.0)
    user_circle_center: tuple = (300.0, 0.0, 0.0)
    user_circle_radius: float = 35.0
    spacing: float = 0.5

    def __post_init__(self):
        for name in ("M", "N", "K"):
            if int(getattr(self, name)) < 1:
                raise DomainError(f"{name} must be >= 1")
        if self.L < 0:
            raise DomainError("L must be >= 0")
        if self.K > self.N:
            raise DomainError("K must not exceed N (zero-forcing feasibility)")
        check_positive(self.user_circle_radius, "user_circle_radius")
        check_positive(self.spacing, "spacing")
        nodes = {
            "bs": self.bs_position,
            "relay": self.relay_position,
            "ris": self.ris_position,
            "user_circle_center": self.user_circle_center,
        }
        names = list(nodes)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                if np.linalg.norm(np.subtract(nodes[a], nodes[b])) <= 0:
                    raise DomainError(f"{a} and {b} positions coincide")

    @property
    def bs_array(self):
        return ula(self.M)

    @property
    def relay_array(self):
        return ula(self.N)

    @property
    def ris_array(self):
        return upa(self.L)

    @classmethod
    def preset(cls, placement="users-center", distance=300.0, **kwargs):
        """Standard layouts.

        ``users-center`` puts the relay and RIS over the user disk center;
        ``midpoint`` puts them halfway between the BS and that center. The
        RIS sits 5 m beside the relay in both cases.
        """
        if placement not in PLACEMENTS:
            raise DomainError(f"placement must be one of {PLACEMENTS}")
        x = distance if placement == "users-center" else distance / 2.0
        base = dict(
            relay_position=(x, 0.0, 10.0),
            ris_position=(x, 5.0, 10.0),
            user_circle_center=(distance, 0.0, 0.0),
        )
        base.update(kwargs)
        return cls(**base)


@dataclass(frozen=True)
class FadingParams:
    """Pathloss constants (dB / dBi), Rician factor and noise power (mW)."""

    gt_dbi: float = 5.0
    gr_dbi: float = 0.0
    alpha_los: float = 2.2
    alpha_nlos: float = 3.67
    c_offset_los_db: float = 35.95
    c_offset_nlos_db: float = 33.95
    rician_k: float = 10.0
    noise_power: float = 1e-8

    def __post_init__(self):
        check_positive(self.alpha_los, "alpha_los")
        check_positive(self.alpha_nlos, "alpha_nlos")
        check_non_negative(self.rician_k, "rician_k")
        check_positive(self.noise_power, "noise_power")


def pathloss(distance, los, params=FadingParams()):
    """Linear attenuation ``C / d**alpha`` for a LoS or NLoS link."""
    if not np.isfinite(distance) or distance <= 0:
        raise DomainError(f"distance must be positive, got {distance!r}")
    if los:
        offset, alpha = params.c_offset_los_db, params.alpha_los
    else:
        offset, alpha = params.c_offset_nlos_db, params.alpha_nlos
    c = 10.0 ** ((params.gt_dbi + params.gr_dbi - offset) / 10.0)
    return c / distance ** alpha


def los_component(tx_position, tx_array, rx_position, rx_array, spacing=0.5):
    """Deterministic LoS matrix ``a_rx a_tx^H`` (rx size x tx size).

    Every entry has unit modulus.
    """
    d = np.subtract(rx_position, tx_position).astype(float)
    if np.linalg.norm(d) == 0:
        raise DomainError("transmitter and receiver positions coincide")
    a_tx = tx_array.steering(d, spacing)
    a_rx = rx_array.steering(-d, spacing)
    return np.outer(a_rx, a_tx.conj())


def _freeze(a):
    a = np.ascontiguousarray(a, dtype=np.complex128)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """One realization of every channel in the system.

    Shapes: ``H_TR`` (N, M), ``H_TI`` (L, M), ``H_IR`` (N, L), ``h_T`` (K, M),
    ``h_R`` (K, N), ``h_I`` (K, L). Row ``k`` of ``h_T`` is the column
    channel ``h_{T,k}``, so user ``k`` sees ``h_T[k].conj() @ x``. The
    relay-to-RIS channel is ``H_IR^H`` by reciprocity.
    """

    H_TR: np.ndarray
    H_TI: np.ndarray
    H_IR: np.ndarray
    h_T: np.ndarray
    h_R: np.ndarray
    h_I: np.ndarray
    noise_power: float
    user_positions: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        for name in ("H_TR", "H_TI", "H_IR", "h_T", "h_R", "h_I"):
            arr = _freeze(getattr(self, name))
            if not np.all(np.isfinite(arr)):
                raise DomainError(f"{name} contains NaN or Inf")
            object.__setattr__(self, name, arr)
        check_positive(self.noise_power, "noise_power")
        N, M = self.H_TR.shape
        L = self.H_TI.shape[0]
        K = self.h_T.shape[0]
        expected = {
            "H_TI": (L, M),
            "H_IR": (N, L),
            "h_T": (K, M),
            "h_R": (K, N),
            "h_I": (K, L),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise DomainError(
                    f"{name} has shape {getattr(self, name).shape}, expected {shape}"
                )

    @property
    def M(self):
        return self.H_TR.shape[1]

    @property
    def N(self):
        return self.H_TR.shape[0]

    @property
    def K(self):
        return self.h_T.shape[0]

    @property
    def L(self):
        return self.H_TI.shape[0]

    @property
    def H_RI(self):
        return self.H_IR.conj().T

    def without_ris(self):
        """Copy with every RIS-adjacent channel set to zero."""
        return replace(
            self,
            H_TI=np.zeros_like(self.H_TI),
            H_IR=np.zeros_like(self.H_IR),
            h_I=np.zeros_like(self.h_I),
        )

    def with_noise_power(self, noise_power):
        return replace(self, noise_power=noise_power)

    def equals(self, other):
        """Bit-for-bit equality of all channels and the noise power."""
        names = ("H_TR", "H_TI", "H_IR", "h_T", "h_R", "h_I")
        return self.noise_power == other.noise_power and all(
            np.array_equal(getattr(self, n), getattr(other, n)) for n in names
        )


def _cn(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _rician(rng, beta, los, kappa):
    g = _cn(rng, los.shape)
    if np.isinf(kappa):
        return np.sqrt(beta) * los
    return np.sqrt(beta) * (np.sqrt(kappa / (1.0 + kappa)) * los + np.sqrt(1.0 / (1.0 + kappa)) * g)


def _rayleigh(rng, beta, n):
    return np.sqrt(beta) * _cn(rng, (n,))


def sample_users(geometry, rng):
    """Uniform positions over the user disk (area-uniform radius)."""
    K = geometry.K
    r = geometry.user_circle_radius * np.sqrt(rng.random(K))
    phi = 2.0 * np.pi * rng.random(K)
    center = np.asarray(geometry.user_circle_center, dtype=float)
    return center + np.stack([r * np.cos(phi), r * np.sin(phi), np.zeros(K)], axis=1)


def generate_scenario(geometry, params=FadingParams(), seed=0):
    """Draw one :class:`ChannelSet`; a pure function of its arguments."""
    rng = np.random.default_rng(seed)
    g = geometry
    kappa = params.rician_k
    users = sample_users(g, rng)

    def dist(a, b):
        return float(np.linalg.norm(np.subtract(a, b)))

    def link(tx, tx_arr, rx, rx_arr):
        los = los_component(tx, tx_arr, rx, rx_arr, g.spacing)
        beta = pathloss(dist(tx, rx), True, params)
        return _rician(rng, beta, los, kappa)

    bs, relay, ris = g.bs_position, g.relay_position, g.ris_position
    H_TR = link(bs, g.bs_array, relay, g.relay_array)
    if g.L:
        H_TI = link(bs, g.bs_array, ris, g.ris_array)
        H_IR = link(ris, g.ris_array, relay, g.relay_array)
    else:
        H_TI = np.zeros((0, g.M), dtype=complex)
        H_IR = np.zeros((g.N, 0), dtype=complex)

    h_T = np.empty((g.K, g.M), dtype=complex)
    h_R = np.empty((g.K, g.N), dtype=complex)
    h_I = np.empty((g.K, g.L), dtype=complex)
    for k, pos in enumerate(users):
        h_T[k] = _rayleigh(rng, pathloss(dist(bs, pos), False, params), g.M)
        h_R[k] = _rayleigh(rng, pathloss(dist(relay, pos), False, params), g.N)
        h_I[k] = _rayleigh(rng, pathloss(dist(ris, pos), False, params), g.L)

    return ChannelSet(
        H_TR=H_TR,
        H_TI=H_TI,
        H_IR=H_IR,
        h_T=h_T,
        h_R=h_R,
        h_I=h_I,
        noise_power=params.noise_power,
        user_positions=users,
    )
