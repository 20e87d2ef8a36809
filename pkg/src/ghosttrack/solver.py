"""Total-variation regularised recovery from linear measurements.

Both solvers minimise

    TV(x) + mu/2 * || s * (A x - y) ||^2

where ``s`` is a fixed data scale derived from ``A`` (see :func:`data_scale`)
and TV is isotropic ``sum_i sqrt(dx_i^2 + dy_i^2)`` or anisotropic
``sum_i |dx_i| + |dy_i|`` over forward differences.

:func:`tv_min` is an augmented Lagrangian / alternating direction scheme:
the gradient field is split off as an auxiliary variable ``w`` updated by
shrinkage, ``x`` is updated by Barzilai-Borwein gradient steps with a
nonmonotone (Zhang-Hager) backtracking line search, and the multipliers are
updated once per outer round. The splitting penalty stays at beta unless
beta_max is raised, in which case it grows each round up to that cap.

:func:`reference_solve` is a slow, independent check: accelerated gradient
descent on a smoothed TV, with 1/L steps, gradient restarts and a smoothing
parameter lowered in stages down to its final value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionError

ISOTROPIC = "isotropic"
ANISOTROPIC = "anisotropic"


@dataclass(frozen=True)
class SolverConfig:
    """Solver parameters.

    mu : data-fidelity weight.
    beta : initial gradient-splitting penalty; doubled every outer round up to
        ``beta_max``.
    tol : relative change in ``x`` between outer rounds that stops the solve.
    precondition : scale ``A`` and ``y`` by ``1/sqrt(mean row sum of A)``.
    """

    mu: float = 2.0**8
    beta: float = 2.0**5
    tv_norm: str = ISOTROPIC
    tol: float = 1e-5
    max_outer: int = 300
    max_inner: int = 10
    nonnegative: bool = False
    beta_max: float = 2.0**5
    precondition: bool = True

    def __post_init__(self):
        if not (self.mu > 0 and self.beta > 0 and self.tol > 0):
            raise ValueError("mu, beta and tol must be positive")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration caps must be at least 1")
        if self.tv_norm not in (ISOTROPIC, ANISOTROPIC):
            raise ValueError(f"unknown tv_norm {self.tv_norm!r}")
        if self.beta_max < self.beta:
            object.__setattr__(self, "beta_max", self.beta)

    def with_(self, **kw) -> "SolverConfig":
        return replace(self, **kw)


@dataclass(frozen=True)
class Reconstruction:
    image: np.ndarray
    width: int
    height: int
    outer_iterations: int = 0
    objective: float = 0.0
    residual: float = 0.0
    converged: bool = True

    def __post_init__(self):
        img = np.asarray(self.image, dtype=float).ravel()
        if img.size != self.width * self.height:
            raise DimensionError("reconstruction size does not match its dimensions")
        img.setflags(write=False)
        object.__setattr__(self, "image", img)

    def as_array(self) -> np.ndarray:
        return self.image.reshape(self.height, self.width)

    __hash__ = None


# -- operators ----------------------------------------------------------------


def grad(image, width: int, height: int):
    """Forward differences; zero in the last column (dx) and last row (dy)."""
    image = np.asarray(image, dtype=float)
    if image.size != width * height:
        raise DimensionError(f"image has {image.size} pixels, expected {width}x{height}")
    img = image.reshape(height, width)
    dx = np.zeros_like(img)
    dy = np.zeros_like(img)
    dx[:, :-1] = img[:, 1:] - img[:, :-1]
    dy[:-1, :] = img[1:, :] - img[:-1, :]
    return dx.ravel(), dy.ravel()


def grad_adjoint(dx, dy, width: int, height: int) -> np.ndarray:
    px = np.asarray(dx, dtype=float).reshape(height, width)
    py = np.asarray(dy, dtype=float).reshape(height, width)
    out = np.zeros((height, width))
    out[:, :-1] -= px[:, :-1]
    out[:, 1:] += px[:, :-1]
    out[:-1, :] -= py[:-1, :]
    out[1:, :] += py[:-1, :]
    return out.ravel()


def tv_value(dx, dy, tv_norm: str = ISOTROPIC) -> float:
    if tv_norm == ISOTROPIC:
        return float(np.sum(np.hypot(dx, dy)))
    return float(np.sum(np.abs(dx)) + np.sum(np.abs(dy)))


def shrink(vx, vy, threshold: float, tv_norm: str = ISOTROPIC):
    """Proximal map of ``threshold * ||.||`` applied per pixel to the field (vx, vy).

    Isotropic TV shrinks each 2-vector toward zero by ``threshold`` in length;
    anisotropic TV soft-thresholds each component.
    """
    vx = np.asarray(vx, dtype=float)
    vy = np.asarray(vy, dtype=float)
    if tv_norm == ISOTROPIC:
        norm = np.hypot(vx, vy)
        with np.errstate(divide="ignore", invalid="ignore"):
            factor = np.where(norm > threshold, 1.0 - threshold / norm, 0.0)
        return vx * factor, vy * factor
    wx = np.sign(vx) * np.maximum(np.abs(vx) - threshold, 0.0)
    wy = np.sign(vy) * np.maximum(np.abs(vy) - threshold, 0.0)
    return wx, wy


# -- problem data -------------------------------------------------------------


def _unpack(A, y):
    """Return (matrix as float64, y array, width, height)."""
    rows = getattr(A, "rows", A)
    mat = np.asarray(rows, dtype=float)
    if mat.ndim != 2:
        raise DimensionError("sensing matrix must be 2-D")
    width = getattr(A, "width", None)
    height = getattr(A, "height", None)
    if width is None:
        side = math.isqrt(mat.shape[1])
        if side * side != mat.shape[1]:
            raise DimensionError("plain-array A needs a square image size")
        width = height = side
    yv = np.asarray(getattr(y, "values", y), dtype=float).ravel()
    if mat.shape[0] == 0:
        raise ValueError("no measurements")
    if yv.size != mat.shape[0]:
        raise DimensionError(f"A has {mat.shape[0]} rows but y has {yv.size} entries")
    return mat, yv, int(width), int(height)


def data_scale(A, config: SolverConfig) -> float:
    """Scale applied to both ``A`` and ``y`` before solving.

    ``1/sqrt(mean row sum)`` brings the bulk singular values of a 0/1
    Bernoulli matrix to order one whatever the image size, so a single
    default ``mu`` works across resolutions.
    """
    if not config.precondition:
        return 1.0
    mat = np.asarray(getattr(A, "rows", A), dtype=float)
    mean_row = float(mat.sum(axis=1).mean())
    return 1.0 / math.sqrt(mean_row) if mean_row > 0 else 1.0


def objective(A, y, x, config: SolverConfig = SolverConfig()) -> float:
    """TV(x) + mu/2 ||s (A x - y)||^2 for the configured norm and data scale."""
    mat, yv, width, height = _unpack(A, y)
    x = np.asarray(x, dtype=float).ravel()
    if x.size != mat.shape[1]:
        raise DimensionError("x does not match the number of columns of A")
    s = data_scale(mat, config)
    dx, dy = grad(x, width, height)
    r = s * (mat @ x - yv)
    return tv_value(dx, dy, config.tv_norm) + 0.5 * config.mu * float(r @ r)


def _finish(mat, yv, x, width, height, config, outer, converged) -> Reconstruction:
    ynorm = float(np.linalg.norm(yv))
    res = float(np.linalg.norm(mat @ x - yv)) / ynorm if ynorm > 0 else 0.0
    return Reconstruction(
        x, width, height, outer, objective(mat, yv, x, config), res, converged
    )


def _check_finite(yv):
    if not np.all(np.isfinite(yv)):
        raise ValueError("measurement vector contains non-finite values")


# -- augmented Lagrangian solver ----------------------------------------------


def tv_min(A, y, config: SolverConfig = SolverConfig()) -> Reconstruction:
    """Minimise TV(x) + mu/2 ||s(Ax - y)||^2 by augmented Lagrangian splitting.

    Parameters
    ----------
    A : SensingMatrix or ndarray, shape (m, n)
    y : MeasurementVector or array of length m
    config : SolverConfig

    Returns
    -------
    Reconstruction
        ``residual`` is ``||Ax - y|| / ||y||`` in unscaled units.
    """
    mat, yv, width, height = _unpack(A, y)
    _check_finite(yv)
    n = mat.shape[1]
    if not np.any(yv):
        return Reconstruction(np.zeros(n), width, height, 0, 0.0, 0.0, True)

    norm = config.tv_norm
    mu = config.mu
    s = data_scale(mat, config)
    As = s * mat
    b = s * yv

    def proj(v):
        return np.maximum(v, 0.0) if config.nonnegative else v

    # backprojection, scaled by the exact steepest-descent step from zero
    atb = As.T @ b
    a_atb = As @ atb
    x = proj(atb * (atb @ atb) / (a_atb @ a_atb))
    Ax = As @ x
    dx, dy = grad(x, width, height)
    nux = np.zeros(n)
    nuy = np.zeros(n)
    beta = config.beta

    def lagrangian(wx, wy, dx, dy, Ax):
        ex, ey = dx - wx, dy - wy
        r = Ax - b
        return (
            tv_value(wx, wy, norm)
            - nux @ ex
            - nuy @ ey
            + 0.5 * beta * (ex @ ex + ey @ ey)
            + 0.5 * mu * (r @ r)
        )

    eta = 0.9995  # nonmonotone averaging weight
    delta = 1e-5  # sufficient-decrease constant
    converged = False
    outer = 0
    for outer in range(1, config.max_outer + 1):
        x_start = x
        g_prev = None
        step_prev = None
        C = None
        Q = 1.0
        for _ in range(config.max_inner):
            wx, wy = shrink(dx - nux / beta, dy - nuy / beta, 1.0 / beta, norm)
            L0 = lagrangian(wx, wy, dx, dy, Ax)
            C = L0 if C is None else max(C, L0)

            g = grad_adjoint(beta * (dx - wx) - nux, beta * (dy - wy) - nuy, width, height)
            g += mu * (As.T @ (Ax - b))
            gg = g @ g
            if gg == 0.0:
                break
            Ag = As @ g
            if g_prev is None:
                gdx, gdy = grad(g, width, height)
                alpha = gg / (beta * (gdx @ gdx + gdy @ gdy) + mu * (Ag @ Ag))
            else:
                yk = g - g_prev
                sy = step_prev @ yk
                alpha = (step_prev @ step_prev) / sy if sy > 0 else alpha * 2.0

            while True:
                xn = proj(x - alpha * g)
                Axn = As @ xn if config.nonnegative else Ax - alpha * Ag
                dxn, dyn = grad(xn, width, height)
                Ln = lagrangian(wx, wy, dxn, dyn, Axn)
                if Ln <= C + delta * (g @ (xn - x)) or alpha < 1e-14:
                    break
                alpha *= 0.5

            step_prev = xn - x
            g_prev = g
            x, Ax, dx, dy = xn, Axn, dxn, dyn
            Qn = eta * Q + 1.0
            C = (eta * Q * C + Ln) / Qn
            Q = Qn
            if np.linalg.norm(step_prev) <= config.tol * max(np.linalg.norm(x), 1e-12):
                break

        wx, wy = shrink(dx - nux / beta, dy - nuy / beta, 1.0 / beta, norm)
        nux = nux - beta * (dx - wx)
        nuy = nuy - beta * (dy - wy)
        beta = min(2.0 * beta, config.beta_max)

        change = np.linalg.norm(x - x_start) / max(np.linalg.norm(x_start), 1e-12)
        if change < config.tol:
            converged = True
            break

    return _finish(mat, yv, x, width, height, config, outer, converged)


# -- independent oracle -------------------------------------------------------


def _power_norm2(mat, iters: int = 200, seed: int = 12345) -> float:
    """Largest eigenvalue of mat.T @ mat by power iteration."""
    v = np.random.default_rng(seed).standard_normal(mat.shape[1])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        u = mat.T @ (mat @ v)
        lam_new = float(np.linalg.norm(u))
        if lam_new == 0.0:
            return 0.0
        v = u / lam_new
        if abs(lam_new - lam) <= 1e-10 * lam_new:
            lam = lam_new
            break
        lam = lam_new
    return lam


def reference_solve(
    A,
    y,
    config: SolverConfig = SolverConfig(),
    eps: float = 1e-6,
    rtol: float = 1e-8,
    max_iter: int = 200_000,
) -> Reconstruction:
    """Slow reference minimiser of the same functional as :func:`tv_min`.

    TV is replaced by ``sum sqrt(|D_i x|^2 + e^2)`` (or the per-component
    analogue), with ``e`` driven geometrically from 1e-1 down to ``eps``.
    Each stage runs FISTA with fixed step ``1/L`` (``L`` from power iteration
    on the data term plus ``8/e`` for the smoothed TV) and gradient-based
    restarts, until the relative change falls below ``rtol``. Intended for
    n up to about a thousand pixels.
    """
    mat, yv, width, height = _unpack(A, y)
    _check_finite(yv)
    n = mat.shape[1]
    if not np.any(yv):
        return Reconstruction(np.zeros(n), width, height, 0, 0.0, 0.0, True)

    s = data_scale(mat, config)
    As = s * mat
    b = s * yv
    mu = config.mu
    iso = config.tv_norm == ISOTROPIC
    lip_data = mu * _power_norm2(As)

    def diffs(v):
        img = v.reshape(height, width)
        hx = np.zeros((height, width))
        hy = np.zeros((height, width))
        hx[:, :-1] = np.diff(img, axis=1)
        hy[:-1, :] = np.diff(img, axis=0)
        return hx, hy

    def diffs_t(px, py):
        out = np.zeros((height, width))
        out[:, 0] -= px[:, 0]
        out[:, 1:-1] += px[:, :-2] - px[:, 1:-1]
        out[:, -1] += px[:, -2] if width > 1 else 0.0
        out[0, :] -= py[0, :]
        out[1:-1, :] += py[:-2, :] - py[1:-1, :]
        if height > 1:
            out[-1, :] += py[-2, :]
        return out.ravel()

    def smooth_grad(v, e):
        hx, hy = diffs(v)
        if iso:
            phi = np.sqrt(hx * hx + hy * hy + e * e)
            gx, gy = hx / phi, hy / phi
        else:
            gx = hx / np.sqrt(hx * hx + e * e)
            gy = hy / np.sqrt(hy * hy + e * e)
        return diffs_t(gx, gy) + mu * (As.T @ (As @ v - b))

    def proj(v):
        return np.maximum(v, 0.0) if config.nonnegative else v

    x = np.zeros(n)
    total = 0
    converged = True
    e = 1e-1
    while True:
        e = max(e, eps)
        step = 1.0 / (lip_data + 8.0 / e)
        z = x.copy()
        t = 1.0
        stage_ok = False
        for _ in range(max_iter):
            x_new = proj(z - step * smooth_grad(z, e))
            total += 1
            if (z - x_new) @ (x_new - x) > 0:  # momentum is hurting: restart
                t = 1.0
                z = x.copy()
                x_new = proj(z - step * smooth_grad(z, e))
            t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            z = x_new + ((t - 1.0) / t_new) * (x_new - x)
            change = np.linalg.norm(x_new - x) / max(np.linalg.norm(x_new), 1e-12)
            x, t = x_new, t_new
            if change < rtol:
                stage_ok = True
                break
        converged = converged and stage_ok
        if e <= eps:
            break
        e *= 0.1

    return _finish(mat, yv, x, width, height, config, total, converged)
