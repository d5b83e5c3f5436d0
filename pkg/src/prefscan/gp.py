"""Pairwise-preference Gaussian process over the learned latent space.

The model: a latent utility f over candidates, GP prior with an ARD RBF
kernel evaluated on network features, observed only through pairwise
comparisons.  The three-outcome likelihood is an ordinal probit band:
with d = (f_a - f_b) and noise scale s,

    P(A wins)  = Phi((d - delta) / s)
    P(B wins)  = Phi((-d - delta) / s)
    P(tie)     = 1 - P(A wins) - P(B wins)

where delta >= 0 is the tie tolerance in latent units.  Each comparison
carries a confidence weight that scales its log-likelihood contribution.

Inference is a Laplace approximation around the penalized-likelihood mode
(damped Newton).  The training objective is the Laplace evidence

    log q = loglik(f^) - 1/2 f^T K^-1 f^ - 1/2 log det(I + K W)

with gradients taken at a frozen mode (f^ and W treated as constants while
differentiating through the kernel and the feature network).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError
from scipy.special import log_ndtr, ndtr

from .errors import ConfigurationError, InputError, NumericalError
from .judgments import Outcome
from .network import NetworkParams, backward_latents, forward_latents

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_MIN_JITTER = 1e-10

NEWTON_MAX_ITER = 100
NEWTON_GRAD_TOL = 1e-6


@dataclass
class KernelHyperparams:
    """ARD RBF hyperparameters, stored on log scale."""

    log_lengthscales: np.ndarray
    log_amplitude: float = 0.0
    log_jitter: float = math.log(1e-6)

    def __post_init__(self):
        self.log_lengthscales = np.atleast_1d(
            np.asarray(self.log_lengthscales, dtype=np.float64))
        if not (np.all(np.isfinite(self.log_lengthscales))
                and np.isfinite(self.log_amplitude)
                and np.isfinite(self.log_jitter)):
            raise ConfigurationError("kernel hyperparameters must be finite")
        if math.exp(self.log_jitter) < _MIN_JITTER:
            raise ConfigurationError(
                f"jitter must be >= {_MIN_JITTER}, got {math.exp(self.log_jitter)}")

    @classmethod
    def default(cls, latent_dim: int) -> "KernelHyperparams":
        return cls(np.zeros(latent_dim))

    @property
    def lengthscales(self) -> np.ndarray:
        return np.exp(self.log_lengthscales)

    @property
    def amplitude(self) -> float:
        return math.exp(self.log_amplitude)

    @property
    def jitter(self) -> float:
        return math.exp(self.log_jitter)

    def copy(self) -> "KernelHyperparams":
        return KernelHyperparams(self.log_lengthscales.copy(),
                                 self.log_amplitude, self.log_jitter)

    def to_dict(self) -> dict:
        return {"log_lengthscales": [float(v) for v in self.log_lengthscales],
                "log_amplitude": float(self.log_amplitude),
                "log_jitter": float(self.log_jitter)}

    @classmethod
    def from_dict(cls, d: dict) -> "KernelHyperparams":
        return cls(np.asarray(d["log_lengthscales"], dtype=np.float64),
                   float(d["log_amplitude"]), float(d["log_jitter"]))


@dataclass
class LikelihoodConfig:
    """Tie tolerance, probit noise scale, and the two ablation switches."""

    tie_tolerance: float = 0.1
    noise_scale: float = 1.0
    tie_support_enabled: bool = True
    confidence_weighting_enabled: bool = True

    def __post_init__(self):
        if self.tie_tolerance < 0:
            raise ConfigurationError("tie tolerance must be >= 0")
        if self.noise_scale <= 0:
            raise ConfigurationError("noise scale must be > 0")

    @property
    def effective_tolerance(self) -> float:
        # With tie support off the band collapses and wins become plain probit.
        return self.tie_tolerance if self.tie_support_enabled else 0.0

    def to_dict(self) -> dict:
        return {"tie_tolerance": self.tie_tolerance,
                "noise_scale": self.noise_scale,
                "tie_support_enabled": self.tie_support_enabled,
                "confidence_weighting_enabled": self.confidence_weighting_enabled}

    @classmethod
    def from_dict(cls, d: dict) -> "LikelihoodConfig":
        return cls(**d)


# ---------------------------------------------------------------------------
# Kernel


def kernel_matrix(Z1: np.ndarray, Z2: np.ndarray,
                  hp: KernelHyperparams) -> np.ndarray:
    """ARD RBF Gram matrix; jitter goes on the diagonal iff Z1 is Z2.

    Entry (i, j) is amplitude^2 * exp(-1/2 sum_d (z1_id - z2_jd)^2 / l_d^2).
    """
    same = Z1 is Z2
    Z1 = np.atleast_2d(np.asarray(Z1, dtype=np.float64))
    Z2 = Z1 if same else np.atleast_2d(np.asarray(Z2, dtype=np.float64))
    if Z1.shape[1] != Z2.shape[1]:
        raise InputError(
            f"latent dims differ: {Z1.shape[1]} vs {Z2.shape[1]}")
    if Z1.shape[1] != self_dim(hp):
        raise InputError(
            f"latent dim {Z1.shape[1]} does not match hyperparameters "
            f"({self_dim(hp)})")
    ls = hp.lengthscales
    A = Z1 / ls
    B = A if same else Z2 / ls
    # Direct differences: exactly invariant under a common latent shift,
    # unlike the |a|^2 + |b|^2 - 2ab expansion.
    diff = A[:, None, :] - B[None, :, :]
    sq = np.einsum("ijd,ijd->ij", diff, diff)
    K = (hp.amplitude ** 2) * np.exp(-0.5 * sq)
    if same:
        K[np.diag_indices_from(K)] += hp.jitter
    return K


def self_dim(hp: KernelHyperparams) -> int:
    return hp.log_lengthscales.size


# ---------------------------------------------------------------------------
# Likelihood


def _pack(comps, n: int, cfg: LikelihoodConfig):
    """Validate a comparison list against f of length n; return flat arrays."""
    if len(comps) == 0:
        raise InputError("comparison list must be non-empty")
    a = np.empty(len(comps), dtype=np.intp)
    b = np.empty(len(comps), dtype=np.intp)
    kind = np.empty(len(comps), dtype=np.intp)
    w = np.empty(len(comps), dtype=np.float64)
    for i, c in enumerate(comps):
        if not (0 <= c.a < n and 0 <= c.b < n):
            raise InputError(
                f"comparison ({c.a}, {c.b}) indexes outside 0..{n - 1}")
        if c.outcome is Outcome.TIE and not cfg.tie_support_enabled:
            raise InputError(
                "TIE outcome encountered with tie support disabled")
        a[i] = c.a
        b[i] = c.b
        kind[i] = (0 if c.outcome is Outcome.A_PREFERRED
                   else 1 if c.outcome is Outcome.B_PREFERRED else 2)
        w[i] = c.weight if cfg.confidence_weighting_enabled else 1.0
    return a, b, kind, w


def _log_phi(t: np.ndarray) -> np.ndarray:
    return -0.5 * t * t - _LOG_SQRT_2PI


def _outcome_terms(delta: np.ndarray, kind: np.ndarray, cfg: LikelihoodConfig):
    """Per-comparison log P(outcome | delta) plus first/second derivatives.

    Everything runs in log space so the win branches stay finite far into
    the probit tails; the tie branch uses a log-difference-of-CDFs form.
    """
    s = cfg.noise_scale
    tol = cfg.effective_tolerance
    logp = np.empty_like(delta)
    d1 = np.empty_like(delta)
    d2 = np.empty_like(delta)

    for k, sign in ((0, 1.0), (1, -1.0)):
        m = kind == k
        if not np.any(m):
            continue
        t = (sign * delta[m] - tol) / s
        lcdf = log_ndtr(t)
        r = np.exp(_log_phi(t) - lcdf)          # hazard ratio phi/Phi
        logp[m] = lcdf
        d1[m] = sign * r / s
        d2[m] = -r * (t + r) / (s * s)

    m = kind == 2
    if np.any(m):
        x = np.abs(delta[m])                     # tie branch is even in delta
        sgn = np.sign(delta[m])
        sgn[sgn == 0] = 1.0
        u = (tol - x) / s
        low = (-tol - x) / s
        lu = log_ndtr(u)
        ll = log_ndtr(low)
        # log(Phi(u) - Phi(low)) with the difference taken in log space
        diff = np.clip(ll - lu, None, -1e-300)
        ltp = lu + np.log1p(-np.exp(diff))
        phiu = np.exp(_log_phi(u) - ltp)         # phi(u)/P
        phil = np.exp(_log_phi(low) - ltp)       # phi(low)/P
        dp = (phil - phiu) / s                   # (dP/dx)/P at x=|delta|
        ddp = (low * phil - u * phiu) / (s * s)  # (d2P/dx2)/P
        logp[m] = ltp
        d1[m] = sgn * dp
        d2[m] = ddp - dp * dp
    return logp, d1, d2


def outcome_probabilities(delta: float, cfg: LikelihoodConfig):
    """(P(A wins), P(B wins), P(tie)) for a latent difference delta.

    The tie probability is defined as the complement of the two win
    probabilities, so the three always sum to one.
    """
    s = cfg.noise_scale
    tol = cfg.effective_tolerance
    pa = float(ndtr((delta - tol) / s))
    pb = float(ndtr((-delta - tol) / s))
    return pa, pb, max(1.0 - pa - pb, 0.0)


def comparison_log_likelihood(f: np.ndarray, comps, cfg: LikelihoodConfig) -> float:
    """Confidence-weighted log-likelihood of the comparisons under f."""
    f = np.asarray(f, dtype=np.float64)
    a, b, kind, w = _pack(comps, f.size, cfg)
    logp, _, _ = _outcome_terms(f[a] - f[b], kind, cfg)
    return float(w @ logp)


def comparison_log_likelihood_grad(f: np.ndarray, comps,
                                   cfg: LikelihoodConfig) -> np.ndarray:
    """Gradient of comparison_log_likelihood with respect to f."""
    f = np.asarray(f, dtype=np.float64)
    a, b, kind, w = _pack(comps, f.size, cfg)
    _, d1, _ = _outcome_terms(f[a] - f[b], kind, cfg)
    g = np.zeros(f.size)
    np.add.at(g, a, w * d1)
    np.add.at(g, b, -w * d1)
    return g


def _lik_state(f, a, b, kind, w, cfg):
    """(value, grad, curvature coefficients) of the weighted log-likelihood."""
    logp, d1, d2 = _outcome_terms(f[a] - f[b], kind, cfg)
    value = float(w @ logp)
    g = np.zeros(f.size)
    wd1 = w * d1
    np.add.at(g, a, wd1)
    np.add.at(g, b, -wd1)
    h = np.maximum(-w * d2, 0.0)   # per-pair curvature; >= 0 by log-concavity
    return value, g, h


def _assemble_W(n, a, b, h) -> np.ndarray:
    """Negative likelihood Hessian: sum of h_c (e_a - e_b)(e_a - e_b)^T."""
    W = np.zeros((n, n))
    flat = W.ravel()
    np.add.at(flat, a * n + a, h)
    np.add.at(flat, b * n + b, h)
    np.add.at(flat, a * n + b, -h)
    np.add.at(flat, b * n + a, -h)
    return W


# ---------------------------------------------------------------------------
# Laplace inference


@dataclass
class PosteriorState:
    """Laplace posterior at the training candidates.

    Stores the latent mode together with the factored quantities prediction
    needs: alpha = K^-1 f^ for the mean and V = K^-1 - K^-1 (K^-1+W)^-1 K^-1
    for the variance.  The network snapshot and hyperparameters make the
    state self-contained, so it can be re-applied to a different region.
    """

    ids: np.ndarray
    latents: np.ndarray
    f_hat: np.ndarray
    alpha: np.ndarray
    V: np.ndarray
    W: np.ndarray
    hyper: KernelHyperparams
    net: NetworkParams
    loglik: float
    evidence: float
    newton_iters: int
    grad_norm: float
    variance_clamp_warnings: int = 0


@dataclass
class _LaplaceFit:
    f_hat: np.ndarray
    W: np.ndarray
    alpha: np.ndarray            # K^-1 f^, tracked as the Newton iterate
    V: np.ndarray                # W (I + K W)^-1; also d logdet(I+KW) / dK
    loglik: float
    logdet_IKW: float
    iters: int
    grad_norm: float


def _laplace_core(K: np.ndarray, comps, cfg: LikelihoodConfig,
                  a0=None) -> _LaplaceFit:
    n = K.shape[0]
    ai, bi, kind, w = _pack(comps, n, cfg)
    try:
        cho_factor(K, lower=True, check_finite=False)
    except LinAlgError as e:
        raise NumericalError(f"Gram matrix is not positive definite: {e}")
    # Newton runs in the (f, a = K^-1 f) parametrization: steps solve the
    # well-conditioned (I + W K) system and warm starts are given as a0, so
    # the iterate always stays in the range space of K.  Nothing here ever
    # applies K^-1 explicitly, which matters once amplitude >> jitter.
    if a0 is None:
        f = np.zeros(n)
        a = np.zeros(n)
    else:
        a = np.array(a0, dtype=np.float64)
        f = K @ a
    value, g_lik, h = _lik_state(f, ai, bi, kind, w, cfg)
    psi = value - 0.5 * float(f @ a)
    grad = g_lik - a
    eye = np.eye(n)
    iters = 0
    while np.max(np.abs(grad)) > NEWTON_GRAD_TOL:
        if iters >= NEWTON_MAX_ITER:
            raise NumericalError(
                "Laplace mode search did not converge within "
                f"{NEWTON_MAX_ITER} iterations",
                diagnostics={"f_last": f.copy(),
                             "grad_inf_norm": float(np.max(np.abs(grad)))})
        W = _assemble_W(n, ai, bi, h)
        rhs = W @ f + g_lik
        a_full = np.linalg.solve(eye + W @ K, rhs)
        f_full = K @ a_full
        df = f_full - f
        da = a_full - a
        slope = float(grad @ df)
        # Once the predicted gain is below the float resolution of psi the
        # Armijo test can never certify progress; take the pure Newton step
        # (quadratic convergence regime) instead of shrinking t forever.
        flat = abs(slope) <= 1e-11 * (1.0 + abs(psi))
        t = 1.0
        while True:
            f_try = f + t * df
            a_try = a + t * da
            v_try, g_try, h_try = _lik_state(f_try, ai, bi, kind, w, cfg)
            psi_try = v_try - 0.5 * float(f_try @ a_try)
            if flat and np.isfinite(psi_try):
                break
            if np.isfinite(psi_try) and psi_try >= psi + 1e-4 * t * slope:
                break
            t *= 0.5
            if t <= 1e-10:
                f_try, a_try = f, a
                v_try, g_try, h_try, psi_try = value, g_lik, h, psi
                break
        f, a, value, g_lik, h, psi = f_try, a_try, v_try, g_try, h_try, psi_try
        grad = g_lik - a
        iters += 1

    W = _assemble_W(n, ai, bi, h)
    M = eye + W @ K
    V = np.linalg.solve(M, W)
    V = 0.5 * (V + V.T)
    sign, logdet = np.linalg.slogdet(M)
    if sign <= 0:
        raise NumericalError("log det(I + KW) is not positive")
    return _LaplaceFit(f_hat=f, W=W, alpha=a, V=V,
                       loglik=value, logdet_IKW=float(logdet),
                       iters=iters, grad_norm=float(np.max(np.abs(grad))))


def fit_laplace(K: np.ndarray, comps, cfg: LikelihoodConfig,
                a0=None) -> _LaplaceFit:
    """Find the penalized-likelihood mode by damped Newton iteration.

    Converges when the infinity norm of the penalized gradient drops to
    1e-6; raises NumericalError (with the last iterate attached) after 100
    iterations otherwise.  K must already carry its diagonal jitter.  A
    warm start is given as a0 = K_prev^-1 f_prev (the previous fit's alpha).
    """
    return _laplace_core(K, comps, cfg, a0=a0)


def laplace_evidence(fit: _LaplaceFit) -> float:
    """Laplace marginal likelihood of a converged fit."""
    return (fit.loglik - 0.5 * float(fit.f_hat @ fit.alpha)
            - 0.5 * fit.logdet_IKW)


# ---------------------------------------------------------------------------
# Evidence and its frozen-mode gradients


def evidence_fixed_mode(net: NetworkParams, hp: KernelHyperparams,
                        inputs: np.ndarray, comps, cfg: LikelihoodConfig,
                        f_hat: np.ndarray, W: np.ndarray) -> float:
    """Evidence as a function of (net, hp) with the mode and W held fixed.

    This is the exact function the analytic gradients differentiate, which
    makes it the reference for finite-difference checks.
    """
    Z = forward_latents(net, inputs)
    K = kernel_matrix(Z, Z, hp)
    K_chol = cho_factor(K, lower=True, check_finite=False)
    alpha = cho_solve(K_chol, f_hat, check_finite=False)
    sign, logdet = np.linalg.slogdet(np.eye(K.shape[0]) + K @ W)
    if sign <= 0:
        raise NumericalError("log det(I + KW) is not positive")
    loglik = comparison_log_likelihood(f_hat, comps, cfg)
    return loglik - 0.5 * float(f_hat @ alpha) - 0.5 * float(logdet)


@dataclass
class EvidenceGradients:
    net: np.ndarray
    log_lengthscales: np.ndarray
    log_amplitude: float
    log_jitter: float


def approx_marginal_log_likelihood(net: NetworkParams, hp: KernelHyperparams,
                                   inputs: np.ndarray, comps,
                                   cfg: LikelihoodConfig, a0=None):
    """Laplace evidence plus frozen-mode gradients w.r.t. net and kernel.

    Returns (evidence, EvidenceGradients, fit).  The chain rule runs
    evidence -> Gram matrix -> {hyperparameters, latents -> network}.
    """
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    Z = forward_latents(net, inputs)
    K = kernel_matrix(Z, Z, hp)
    fit = _laplace_core(K, comps, cfg, a0=a0)
    ev = laplace_evidence(fit)

    # dE/dK with f^ and W frozen: 1/2 (alpha alpha^T - V)
    Gbar = 0.5 * (np.outer(fit.alpha, fit.alpha) - fit.V)
    Krbf = K.copy()
    Krbf[np.diag_indices_from(Krbf)] -= hp.jitter

    GK = Gbar * Krbf
    ls2 = hp.lengthscales ** 2
    d_log_amp = 2.0 * float(np.sum(GK))
    d_log_jitter = hp.jitter * float(np.trace(Gbar))
    d_log_ls = np.empty(self_dim(hp))
    zbar = np.empty_like(Z)
    row = GK.sum(axis=1)
    for d in range(Z.shape[1]):
        zd = Z[:, d]
        # sum_j GK_ij (z_id - z_jd)^2 and the matching latent cotangent
        sq_term = (row * zd * zd - 2.0 * zd * (GK @ zd)
                   + GK @ (zd * zd))
        d_log_ls[d] = float(np.sum(sq_term)) / ls2[d]
        zbar[:, d] = -2.0 / ls2[d] * (row * zd - GK @ zd)
    d_net = backward_latents(net, inputs, zbar)
    grads = EvidenceGradients(net=d_net, log_lengthscales=d_log_ls,
                              log_amplitude=d_log_amp, log_jitter=d_log_jitter)
    return ev, grads, fit


# ---------------------------------------------------------------------------
# Joint training


@dataclass
class PreferenceModel:
    """Feature network + kernel + likelihood bound to a training candidate set."""

    net: NetworkParams
    hyper: KernelHyperparams
    likelihood: LikelihoodConfig
    train_inputs: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    train_ids: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.intp))
    posterior: PosteriorState | None = None

    def copy(self) -> "PreferenceModel":
        return PreferenceModel(self.net.copy(), self.hyper.copy(),
                               LikelihoodConfig(**self.likelihood.to_dict()),
                               self.train_inputs.copy(), self.train_ids.copy(),
                               self.posterior)


@dataclass
class TrainResult:
    objective_trace: np.ndarray   # negative evidence per epoch
    final_objective: float
    epochs: int


LOG_LS_BOUNDS = (-5.0, 5.0)
# Evidence for separable comparison sets is maximized as amplitude -> inf
# (the probit ML-II pathology), which destroys the Gram conditioning, so the
# amplitude is clamped like the lengthscales, just with a generous range.
LOG_AMP_BOUNDS = (-3.0, 3.0)


def train_joint(model: PreferenceModel, comps, epochs: int,
                learning_rate: float = 1e-2, train_jitter: bool = False,
                cold_start: bool = False, a0=None) -> TrainResult:
    """Adam on the negative evidence over network weights and kernel scales.

    Warm-starts from the model's current parameters (and previous mode)
    unless cold_start resets the mode.  Log-lengthscales are clamped to
    [-5, 5] after every step.  The model is updated in place; the final
    posterior corresponds to the parameters after the last step.
    """
    if epochs < 1:
        raise ConfigurationError(f"epochs must be >= 1, got {epochs}")
    if model.train_inputs.size == 0:
        raise InputError("model has no training inputs")

    nv = model.net.values
    n_net = nv.size
    n_ls = self_dim(model.hyper)
    theta = np.concatenate([
        nv,
        model.hyper.log_lengthscales,
        [model.hyper.log_amplitude],
        [model.hyper.log_jitter] if train_jitter else [],
    ])
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    beta1, beta2, eps = 0.9, 0.999, 1e-8

    def unpack_theta(th):
        net = NetworkParams(model.net.arch, th[:n_net])
        hp = KernelHyperparams(
            th[n_net:n_net + n_ls],
            float(th[n_net + n_ls]),
            float(th[n_net + n_ls + 1]) if train_jitter
            else model.hyper.log_jitter)
        return net, hp

    n_train = model.train_inputs.shape[0]
    a_warm = None
    if a0 is not None:
        a_warm = np.asarray(a0, dtype=np.float64)
    elif (not cold_start and model.posterior is not None
          and model.posterior.alpha.size == n_train):
        a_warm = model.posterior.alpha
    trace = np.empty(epochs)
    fit = None
    for epoch in range(epochs):
        net, hp = unpack_theta(theta)
        ev, grads, fit = approx_marginal_log_likelihood(
            net, hp, model.train_inputs, comps, model.likelihood, a0=a_warm)
        if not np.isfinite(ev):
            raise NumericalError(
                "non-finite objective during joint training",
                diagnostics={"epoch": epoch, "theta": theta.copy()})
        trace[epoch] = -ev
        a_warm = fit.alpha
        g = np.concatenate([
            -grads.net,
            -grads.log_lengthscales,
            [-grads.log_amplitude],
            [-grads.log_jitter] if train_jitter else [],
        ])
        m = beta1 * m + (1 - beta1) * g
        v = beta2 * v + (1 - beta2) * g * g
        t = epoch + 1
        mhat = m / (1 - beta1 ** t)
        vhat = v / (1 - beta2 ** t)
        theta = theta - learning_rate * mhat / (np.sqrt(vhat) + eps)
        np.clip(theta[n_net:n_net + n_ls], *LOG_LS_BOUNDS,
                out=theta[n_net:n_net + n_ls])
        theta[n_net + n_ls] = np.clip(theta[n_net + n_ls], *LOG_AMP_BOUNDS)
        if not np.all(np.isfinite(theta)):
            raise NumericalError(
                "non-finite parameters during joint training",
                diagnostics={"epoch": epoch, "objective": float(trace[epoch])})

    net, hp = unpack_theta(theta)
    model.net = net
    model.hyper = hp
    # Posterior for the post-update parameters (the ones we just stepped to).
    Z = forward_latents(net, model.train_inputs)
    K = kernel_matrix(Z, Z, hp)
    fit = _laplace_core(K, comps, model.likelihood, a0=a_warm)
    model.posterior = PosteriorState(
        ids=model.train_ids.copy(), latents=Z, f_hat=fit.f_hat,
        alpha=fit.alpha, V=fit.V, W=fit.W, hyper=hp.copy(), net=net.copy(),
        loglik=fit.loglik, evidence=laplace_evidence(fit),
        newton_iters=fit.iters, grad_norm=fit.grad_norm)
    return TrainResult(objective_trace=trace,
                       final_objective=float(-model.posterior.evidence),
                       epochs=epochs)


# ---------------------------------------------------------------------------
# Prediction


def predict_utility(posterior: PosteriorState, inputs: np.ndarray):
    """Laplace-GP predictive mean and variance at candidate inputs.

    ``inputs`` may be raw network inputs (k, input_dim) or flattened patch
    rows.  Variance is clamped at zero; dips below -1e-10 increment the
    posterior's warning counter before clamping.
    """
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    if inputs.shape[0] == 0:
        raise InputError("candidate list must be non-empty")
    Zs = forward_latents(posterior.net, inputs)
    Ks = kernel_matrix(Zs, posterior.latents, posterior.hyper)
    mean = Ks @ posterior.alpha
    kss = posterior.hyper.amplitude ** 2
    var = kss - np.einsum("ij,jk,ik->i", Ks, posterior.V, Ks)
    bad = var < -1e-10
    if np.any(bad):
        posterior.variance_clamp_warnings += int(np.count_nonzero(bad))
    np.maximum(var, 0.0, out=var)
    return mean, var
