"""Beamforming kernels shared by the half-duplex, full-duplex and baseline solvers.

Conventions
-----------
A phase configuration ``v`` realizes ``Theta = diag(v)``. Effective channels
are stored as *rows*: user ``k`` receives ``rows[k] @ x`` from a transmit
vector ``x``. Precoders are column-stacked (``W`` is M x K, ``U`` is N x K).
Rates are in bits per symbol, powers in the same linear unit as the noise.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_non_negative, check_positive, check_unit_modulus
from .exceptions import ConvergenceError, DomainError, InfeasibleError

__all__ = [
    "CouplingBlocks",
    "EffectiveChannels",
    "FixedPointResult",
    "PhaseVector",
    "SurrogateData",
    "coupling_blocks",
    "duality_beamforming",
    "effective_channels",
    "extract_phases",
    "fixed_point_phase",
    "linearized_phase_step",
    "relay_rate",
    "sinr_all",
    "summed_coupling_block",
    "surrogate_relay_rate",
    "svd_waterfilling",
    "user_sinr",
    "zero_forcing",
]

_LN2 = np.log(2.0)


@dataclass(frozen=True, eq=False)
class PhaseVector:
    """RIS reflection coefficients ``v`` plus the lifting entry ``t``.

    The realized phase matrix is ``diag(v * conj(t))``, so a global rotation
    of ``[v; t]`` leaves the configuration unchanged.
    """

    v: np.ndarray
    t: complex = 1.0 + 0.0j

    def __post_init__(self):
        v = check_unit_modulus(np.atleast_1d(self.v), "phase vector").ravel()
        if abs(abs(self.t) - 1.0) > 1e-8:
            raise DomainError("lifting entry t must have unit modulus")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "t", complex(self.t))

    @classmethod
    def identity(cls, L):
        return cls(np.ones(L, dtype=complex))

    @classmethod
    def from_angles(cls, angles):
        return cls(np.exp(1j * np.asarray(angles, dtype=float)))

    @classmethod
    def from_lifted(cls, vbar):
        vbar = np.asarray(vbar, dtype=complex)
        return cls(vbar[:-1], vbar[-1])

    @property
    def L(self):
        return self.v.size

    @property
    def coefficients(self):
        """Realized reflection coefficients ``v_l / t``."""
        return self.v * np.conj(self.t)

    @property
    def angles(self):
        return extract_phases(self)

    @property
    def lifted(self):
        return np.append(self.v, self.t)

    def normalized(self):
        """Equivalent vector with ``t = 1``."""
        return PhaseVector(self.coefficients)


@dataclass(frozen=True, eq=False)
class EffectiveChannels:
    """Cascaded channels for given phase matrices.

    ``H_TIR`` is N x M. ``h_RI`` (K x N) and ``h_TI`` (K x M) hold the rows
    ``h_{I,k}^H Theta H_RI + h_{R,k}^H`` and ``h_{I,k}^H Theta H_TI + h_{T,k}^H``.
    """

    H_TIR: np.ndarray
    h_RI: np.ndarray
    h_TI: np.ndarray


@dataclass(frozen=True, eq=False)
class SurrogateData:
    """Tangent upper bound ``F + 2 Re{v^H x} + v^H Xbar v`` of the relay rate."""

    F: float
    x: np.ndarray
    Xbar: np.ndarray

    def value(self, v):
        v = np.asarray(v.coefficients if isinstance(v, PhaseVector) else v)
        return float(self.F + 2.0 * np.real(np.vdot(v, self.x)) + np.real(np.vdot(v, self.Xbar @ v)))


@dataclass(frozen=True, eq=False)
class CouplingBlocks:
    """Lifted quadratic forms of the per-pair received amplitudes.

    ``blocks[k, i]`` is (L+1) x (L+1) and ``scalars[k, i]`` is the direct
    path amplitude, so that ``vbar^H blocks[k, i] vbar + |scalars[k, i]|**2``
    is the power user ``k`` receives from stream ``i`` when ``t = 1``.
    """

    blocks: np.ndarray
    scalars: np.ndarray
    side: str

    def quadratic(self, k, i, phases):
        vbar = phases.lifted if isinstance(phases, PhaseVector) else np.asarray(phases)
        return float(np.real(np.vdot(vbar, self.blocks[k, i] @ vbar))) + abs(self.scalars[k, i]) ** 2


@dataclass(frozen=True, eq=False)
class FixedPointResult:
    phases: PhaseVector
    converged: bool
    iterations: int
    objective_history: list = field(default_factory=list)


def _coeffs(theta, L):
    if theta is None:
        return np.ones(L, dtype=complex)
    if theta.L != L:
        raise DomainError(f"phase vector has {theta.L} entries, expected {L}")
    return theta.coefficients


def effective_channels(ch, theta_first, theta_second=None):
    """Cascaded channels; ``theta_second`` defaults to ``theta_first`` (full duplex)."""
    if theta_second is None:
        theta_second = theta_first
    c1 = _coeffs(theta_first, ch.L)
    c2 = _coeffs(theta_second, ch.L)
    hI = ch.h_I.conj()
    H_TIR = ch.H_TR + (ch.H_IR * c1[None, :]) @ ch.H_TI
    h_TI = ch.h_T.conj() + (hI * c1[None, :]) @ ch.H_TI
    h_RI = ch.h_R.conj() + (hI * c2[None, :]) @ ch.H_RI
    return EffectiveChannels(H_TIR=H_TIR, h_RI=h_RI, h_TI=h_TI)


def relay_rate(H_TIR, W, noise_power):
    """``log2 det(I + H W W^H H^H / noise_power)``."""
    H = np.asarray(H_TIR)
    HW = H @ np.asarray(W)
    A = np.eye(H.shape[0]) + (HW @ HW.conj().T) / noise_power
    sign, logdet = np.linalg.slogdet(A)
    return max(float(logdet) / _LN2, 0.0)


def sinr_all(rows, X, noise, extra=0.0):
    """SINR of every user for rows ``rows`` (K x n) and precoder ``X`` (n x K).

    ``extra`` is added to each denominator (scalar or length-K).
    """
    G = np.abs(rows @ X) ** 2
    signal = np.diag(G).copy()
    interference = G.sum(axis=1) - signal
    return signal / (interference + noise + extra)


def user_sinr(ch, effective, W, U, k, mode="hd"):
    """Per-user SINR.

    ``mode="hd"`` returns ``(gamma_k1, gamma_k2)``, the first-phase SINR from
    the BS and the second-phase SINR from the relay. ``mode="fd"`` returns the
    full-duplex SINR in which all BS streams count as interference.
    """
    sigma2 = ch.noise_power
    if mode == "hd":
        g1 = sinr_all(effective.h_TI, W, sigma2)[k]
        g2 = sinr_all(effective.h_RI, U, sigma2)[k]
        return float(g1), float(g2)
    if mode == "fd":
        bs = np.sum(np.abs(effective.h_TI[k] @ W) ** 2)
        G = np.abs(effective.h_RI[k] @ U) ** 2
        return float(G[k] / (G.sum() - G[k] + bs + sigma2))
    raise DomainError(f"mode must be 'hd' or 'fd', got {mode!r}")


def svd_waterfilling(H_TIR, noise_power, rate_target, n_streams):
    """Minimum-power precoder meeting a sum-rate target over the eigenmodes.

    Parameters
    ----------
    H_TIR : np.ndarray
        N x M channel from the BS to the relay.
    noise_power : float
        Noise variance at the relay.
    rate_target : float
        Required ``log2 det`` rate in bits per symbol.
    n_streams : int
        Number of precoder columns; at most ``min(M, N, n_streams)`` modes
        carry power.

    Returns
    -------
    (W, P) : (np.ndarray, np.ndarray)
        ``W`` is M x n_streams and ``P`` holds the per-column powers.
    """
    check_non_negative(rate_target, "rate_target")
    check_positive(noise_power, "noise_power")
    H = np.asarray(H_TIR, dtype=complex)
    N, M = H.shape
    W = np.zeros((M, n_streams), dtype=complex)
    P = np.zeros(n_streams)
    if rate_target == 0:
        return W, P
    _, s, Vh = np.linalg.svd(H)
    n = min(M, N, n_streams)
    lam = s[:n] ** 2
    usable = int(np.count_nonzero(lam > (lam[0] if n else 0.0) * 1e-14)) if n and lam[0] > 0 else 0
    if usable == 0:
        raise InfeasibleError("channel has no usable eigenmode for a positive rate target")

    floor = noise_power / lam[:usable]
    m = usable
    while True:
        log_mu = np.log(noise_power) + rate_target * _LN2 / m - np.mean(np.log(lam[:m]))
        mu = np.exp(log_mu)
        if mu > floor[m - 1] or m == 1:
            break
        m -= 1
    P[:m] = mu - floor[:m]
    W[:, :n] = Vh.conj().T[:, :n] * np.sqrt(P[:n])[None, :]
    return W, P


def duality_beamforming(rows, noise, targets, tol=1e-8, max_iter=500):
    """Minimum-power downlink beamformers meeting per-user SINR targets.

    The virtual-uplink powers are found by fixed-point iteration, the
    receive filters give the beam directions, and the downlink powers come
    from the linear SINR equalities. Per-user noise levels are absorbed by
    scaling each row by ``1/sqrt(noise_k)``.

    Parameters
    ----------
    rows : np.ndarray
        K x N effective channel rows.
    noise : float or np.ndarray
        Noise (plus any fixed interference) at each user.
    targets : np.ndarray
        Non-negative SINR targets; users with a zero target get no beam.

    Returns
    -------
    np.ndarray
        N x K precoder.
    """
    rows = np.asarray(rows, dtype=complex)
    K, N = rows.shape
    noise = np.broadcast_to(np.asarray(noise, dtype=float), (K,))
    targets = np.asarray(targets, dtype=float)
    if np.any(targets < 0) or not np.all(np.isfinite(targets)):
        raise DomainError("SINR targets must be finite and non-negative")
    U = np.zeros((N, K), dtype=complex)
    active = np.flatnonzero(targets > 0)
    if active.size == 0:
        return U

    Hs = rows[active] / np.sqrt(noise[active])[:, None]
    H = Hs.conj().T  # channel columns
    eta = targets[active]
    beta = np.zeros(active.size)
    eye = np.eye(N)
    for _ in range(max_iter):
        S = eye + (H * beta[None, :]) @ Hs
        X = np.linalg.solve(S, H)
        quad = np.real(np.sum(H.conj() * X, axis=0))
        if np.any(quad <= 0):
            raise InfeasibleError("zero effective channel for a user with a positive target")
        # beta_k = 1 / ((1 + 1/eta_k) h_k^H S^{-1} h_k) solved for beta_k on
        # the right-hand side: the same fixed point, but the update no longer
        # contracts at rate eta/(1+eta) for weakly coupled users.
        new = eta * (1.0 - beta * quad) / quad
        if not np.all(np.isfinite(new)) or np.max(new) > 1e300:
            # uplink powers blow up exactly when the targets are infeasible
            raise InfeasibleError("SINR targets are infeasible for these channels")
        step = np.max(np.abs(new - beta))
        beta = new
        if step <= tol * np.max(beta):
            break
    else:
        raise ConvergenceError(f"uplink power fixed point did not converge in {max_iter} iterations")

    S = eye + (H * beta[None, :]) @ Hs
    X = np.linalg.solve(S, H)
    ubar = X / np.linalg.norm(X, axis=0)[None, :]
    G = np.abs(Hs @ ubar) ** 2
    D = -G
    np.fill_diagonal(D, np.diag(G) / eta)
    try:
        q = np.linalg.solve(D, np.ones(active.size))
    except np.linalg.LinAlgError as exc:
        raise InfeasibleError("singular coupling matrix in the duality power step") from exc
    if not np.all(np.isfinite(q)) or np.any(q <= 0):
        raise InfeasibleError("SINR targets are infeasible for these channels")
    U[:, active] = ubar * np.sqrt(q)[None, :]
    return U


def zero_forcing(rows, targets, noise):
    """Interference-nulling precoder ``H^H (H H^H)^{-1} Q^{1/2}`` with ``q_k = noise_k * target_k``."""
    H = np.asarray(rows, dtype=complex)
    K, N = H.shape
    if K > N:
        raise InfeasibleError(f"zero-forcing needs K <= N, got K={K}, N={N}")
    noise = np.broadcast_to(np.asarray(noise, dtype=float), (K,))
    q = noise * np.asarray(targets, dtype=float)
    G = H @ H.conj().T
    s = np.linalg.svd(H, compute_uv=False)
    if s[-1] <= s[0] * 1e-12 or s[0] == 0:
        raise InfeasibleError("effective channel matrix is rank deficient")
    return H.conj().T @ np.linalg.solve(G, np.diag(np.sqrt(q)))


def surrogate_relay_rate(ch, expansion, W):
    """Tangent upper bound of the relay rate around the phases ``expansion``.

    ``log det`` is concave, so its first-order expansion at
    ``Z = I + H(expansion) W W^H H(expansion)^H / sigma2`` bounds it from
    above. Writing the bound as a function of the phases gives a constant
    ``F``, a linear term ``x`` and a Hermitian PSD quadratic term ``Xbar``
    (a Hadamard product), all in bits.
    """
    sigma2 = ch.noise_power
    theta = _coeffs(expansion, ch.L)
    W = np.asarray(W, dtype=complex)
    H = ch.H_TR + (ch.H_IR * theta[None, :]) @ ch.H_TI
    P = W @ W.conj().T
    Z = np.eye(ch.N) + H @ P @ H.conj().T / sigma2
    Y = np.linalg.inv(Z)
    Y = 0.5 * (Y + Y.conj().T)
    c = 1.0 / (sigma2 * _LN2)
    _, logdet = np.linalg.slogdet(Z)
    direct = np.real(np.trace(Y @ ch.H_TR @ P @ ch.H_TR.conj().T))
    F = logdet / _LN2 + (np.real(np.trace(Y)) + direct / sigma2 - ch.N) / _LN2
    x = c * np.conj(np.einsum("lm,ml->l", ch.H_TI @ P @ ch.H_TR.conj().T, Y @ ch.H_IR))
    B = ch.H_TI @ P @ ch.H_TI.conj().T
    C = ch.H_IR.conj().T @ Y @ ch.H_IR
    Xbar = c * (np.conj(B) * C)
    Xbar = 0.5 * (Xbar + Xbar.conj().T)
    return SurrogateData(F=float(F), x=x, Xbar=Xbar)


def _pair_vectors(ch, X, side):
    """Reflected (L, K_rx, K_tx) and direct (K_rx, K_tx) amplitude factors."""
    X = np.asarray(X, dtype=complex)
    if side == "bs":
        G, direct = ch.H_TI, ch.h_T
    elif side == "relay":
        G, direct = ch.H_RI, ch.h_R
    else:
        raise DomainError(f"side must be 'bs' or 'relay', got {side!r}")
    GX = G @ X  # L x K
    # a_{k,i} = diag(h_{I,k}^H) G x_i; we store c = conj(a) so that the block
    # form acts on v with Theta = diag(v).
    c = np.conj(ch.h_I.conj()[:, :, None] * GX[None, :, :])  # K x L x K
    b = direct.conj() @ X  # K x K
    return np.transpose(c, (1, 0, 2)), b


def _block(c, b):
    L = c.size
    B = np.zeros((L + 1, L + 1), dtype=complex)
    B[:L, :L] = np.outer(c, c.conj())
    B[:L, L] = c * b
    B[L, :L] = np.conj(b) * c.conj()
    return B


def coupling_blocks(ch, X, side="bs"):
    """Lifted blocks for every (receiving user, stream) pair.

    ``side="bs"`` builds the first-hop blocks from the BS precoder ``W``;
    ``side="relay"`` builds the relay-hop blocks from ``U``.
    """
    c, b = _pair_vectors(ch, X, side)
    L, K, Kx = c.shape
    blocks = np.empty((K, Kx, L + 1, L + 1), dtype=complex)
    for k in range(K):
        for i in range(Kx):
            blocks[k, i] = _block(c[:, k, i], b[k, i])
    return CouplingBlocks(blocks=blocks, scalars=b, side=side)


def summed_coupling_block(ch, X, side="bs"):
    """``sum_k blocks[k, k]`` without materializing every block."""
    c, b = _pair_vectors(ch, X, side)
    K = min(c.shape[1], c.shape[2])
    idx = np.arange(K)
    C = c[:, idx, idx]  # L x K
    bd = b[idx, idx]
    L = C.shape[0]
    S = np.zeros((L + 1, L + 1), dtype=complex)
    S[:L, :L] = C @ C.conj().T
    S[:L, L] = C @ bd
    S[L, :L] = S[:L, L].conj()
    return S


def linearized_phase_step(surrogate, anchor):
    """Closed-form phase update from the surrogate's linear term.

    With ``q = x + (Xbar - lambda_max(Xbar) I) anchor`` the returned phases
    ``exp(j arg q)`` maximize ``Re{q^H v}`` over unit-modulus ``v``. Entries
    where ``q`` vanishes keep the anchor phase.
    """
    a = anchor.coefficients
    Xbar = surrogate.Xbar
    lam = np.linalg.eigvalsh(Xbar)[-1] if Xbar.size else 0.0
    q = surrogate.x + Xbar @ a - lam * a
    mag = np.abs(q)
    v = np.where(mag > 0, q / np.where(mag > 0, mag, 1.0), a)
    return PhaseVector(v)


def fixed_point_phase(blocks, init, tol=1e-6, max_iters=1000):
    """Maximize ``vbar^H S vbar`` over unit-modulus ``vbar`` by ``vbar <- unt(S vbar)``.

    ``blocks`` is a Hermitian matrix or a sequence of them; their sum is
    diagonally loaded to be positive semidefinite, which shifts the objective
    by a constant on the unit-modulus set and makes every step an ascent step.
    """
    S0 = np.asarray(blocks, dtype=complex)
    if S0.ndim == 3:
        S0 = S0.sum(axis=0)
    S0 = 0.5 * (S0 + S0.conj().T)
    n = S0.shape[0]
    v = np.asarray(init.lifted if isinstance(init, PhaseVector) else init, dtype=complex)
    if v.size != n:
        raise DomainError(f"init has {v.size} entries, blocks are {n} x {n}")
    v = check_unit_modulus(v, "init")
    scale = np.max(np.abs(S0)) if S0.size else 0.0

    def objective(z):
        return float(np.real(np.vdot(z, S0 @ z)))

    history = [objective(v)]
    if scale == 0:
        # every unit-modulus point is optimal
        return FixedPointResult(PhaseVector.from_lifted(v), True, 0, history)
    # iterate on the normalized matrix; scaling does not move the fixed points
    Sn = S0 / scale
    lam_min = np.linalg.eigvalsh(Sn)[0]
    S = Sn + (max(0.0, -lam_min) + 1e-12) * np.eye(n)
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        a = S @ v
        mag = np.abs(a)
        new = np.where(mag > 0, a / np.where(mag > 0, mag, 1.0), v)
        step = np.linalg.norm(new - v)
        v = new
        history.append(objective(v))
        if step <= tol:
            converged = True
            break
    return FixedPointResult(
        phases=PhaseVector.from_lifted(v),
        converged=converged,
        iterations=it,
        objective_history=history,
    )


def extract_phases(phases):
    """Phase angles in ``[0, 2*pi)`` relative to the lifting entry."""
    ang = np.mod(np.angle(phases.v) - np.angle(phases.t), 2.0 * np.pi)
    ang[ang >= 2.0 * np.pi] = 0.0
    return ang
