"""Numerical kernels behind the total-variation operators and the solver loop.

Every hot kernel exists twice: a numba-compiled loop version and a vectorized
pure-numpy version. The active implementation is picked once at import from
the HYPERTV_BACKEND environment variable (`auto`, `numba`, or `numpy`; `auto`
uses numba when it imports) and can be switched at runtime with
:func:`set_backend`. Results of the two backends agree up to floating-point
reassociation; within one backend all kernels are deterministic.

Per hyperedge of cardinality c the total variation contributes
``sum_v f_v**c - c * prod_v f_v``; both backends evaluate it per member as
``f_v * (f_v**(c-1) - prod_{u != v} f_u)`` so that the value and the gradient
share the same pieces. Hyperedges whose members all carry one identical value
are skipped, which keeps constant signals at exactly zero value and gradient.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

_ENV_VAR = "HYPERTV_BACKEND"
_BACKENDS = ("numba", "numpy")


def _env_choice() -> str:
    value = os.environ.get(_ENV_VAR, "auto").strip().lower()
    if value not in ("auto",) + _BACKENDS:
        raise ValueError(
            f"{_ENV_VAR} must be one of auto|numba|numpy, got {value!r}"
        )
    return value


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------


def _leave_one_out_gap(vals: np.ndarray, c: int) -> np.ndarray:
    """Per-member gap f_v**(c-1) - prod_{u != v} f_u for each edge row."""
    pw = vals ** (c - 1)
    pref = np.ones_like(vals)
    suff = np.ones_like(vals)
    if c > 1:
        np.cumprod(vals[:, :-1], axis=1, out=pref[:, 1:])
        suff[:, :-1] = np.cumprod(vals[:, :0:-1], axis=1)[:, ::-1]
    gap = pw - pref * suff
    gap[(vals == vals[:, :1]).all(axis=1)] = 0.0
    return gap


def _tv_value_numpy(members: np.ndarray, f: np.ndarray) -> float:
    if members.shape[0] == 0:
        return 0.0
    c = members.shape[1]
    vals = f[members]
    return float(np.sum(vals * _leave_one_out_gap(vals, c)))


def _tv_contract_add_numpy(members: np.ndarray, f: np.ndarray, out: np.ndarray,
                           scale: float) -> None:
    if members.shape[0] == 0:
        return
    c = members.shape[1]
    vals = f[members]
    np.add.at(out, members, scale * _leave_one_out_gap(vals, c))


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

_HAVE_NUMBA = False
_NUMBA_IMPORT_ERROR: Optional[BaseException] = None
if _env_choice() != "numpy":
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError as exc:  # pragma: no cover - depends on environment
        _NUMBA_IMPORT_ERROR = exc
        if _env_choice() == "numba":
            raise ImportError(
                f"{_ENV_VAR}=numba but numba is not importable"
            ) from exc
        warnings.warn("numba unavailable; falling back to the numpy backend")

if _HAVE_NUMBA:

    @njit(cache=True)
    def _ipow(x, n):
        # n >= 0 integer power by squaring
        result = 1.0
        base = x
        exp = n
        while exp > 0:
            if exp & 1:
                result *= base
            base *= base
            exp >>= 1
        return result

    @njit(cache=True)
    def _tv_value_numba(members, f):
        n_edges, c = members.shape
        pref = np.empty(c)
        suff = np.empty(c)
        total = 0.0
        for k in range(n_edges):
            v0 = f[members[k, 0]]
            allsame = True
            for j in range(1, c):
                if f[members[k, j]] != v0:
                    allsame = False
                    break
            if allsame:
                continue
            pref[0] = 1.0
            for j in range(1, c):
                pref[j] = pref[j - 1] * f[members[k, j - 1]]
            suff[c - 1] = 1.0
            for j in range(c - 2, -1, -1):
                suff[j] = suff[j + 1] * f[members[k, j + 1]]
            for j in range(c):
                x = f[members[k, j]]
                total += x * (_ipow(x, c - 1) - pref[j] * suff[j])
        return total

    @njit(cache=True)
    def _tv_contract_add_numba(members, f, out, scale):
        n_edges, c = members.shape
        pref = np.empty(c)
        suff = np.empty(c)
        for k in range(n_edges):
            v0 = f[members[k, 0]]
            allsame = True
            for j in range(1, c):
                if f[members[k, j]] != v0:
                    allsame = False
                    break
            if allsame:
                continue
            pref[0] = 1.0
            for j in range(1, c):
                pref[j] = pref[j - 1] * f[members[k, j - 1]]
            suff[c - 1] = 1.0
            for j in range(c - 2, -1, -1):
                suff[j] = suff[j + 1] * f[members[k, j + 1]]
            for j in range(c):
                x = f[members[k, j]]
                out[members[k, j]] += scale * (_ipow(x, c - 1) - pref[j] * suff[j])

    @njit(cache=True)
    def _descent_numba(edge_members, edge_ptr, aux_members, aux_ptr, n_orig,
                       obs_idx, obs_y, use_cross_entropy, clamp_eps, lam, eta,
                       max_iters, grad_tol, init_unobserved, project,
                       record_trace, trace):
        n_edges = edge_ptr.shape[0] - 1
        n_aux = aux_ptr.shape[0] - 1
        n_ext = n_orig + n_aux
        n_obs = obs_idx.shape[0]

        cmax = 2
        for k in range(n_edges):
            c = edge_ptr[k + 1] - edge_ptr[k]
            if c > cmax:
                cmax = c
        pref = np.empty(cmax)
        suff = np.empty(cmax)

        f = np.full(n_orig, init_unobserved)
        for s in range(n_obs):
            f[obs_idx[s]] = obs_y[s]

        ft = np.empty(n_ext)
        gt = np.empty(n_ext)
        grad = np.empty(n_orig)

        iters = 0
        converged = False
        bad_iter = -1
        n_trace = 0
        final_obj = np.nan

        for step in range(max_iters + 1):
            for i in range(n_orig):
                ft[i] = f[i]
            for j in range(n_aux):
                a = aux_ptr[j]
                b = aux_ptr[j + 1]
                v0 = f[aux_members[a]]
                allsame = True
                for idx in range(a + 1, b):
                    if f[aux_members[idx]] != v0:
                        allsame = False
                        break
                if allsame:
                    # mean of identical values, kept exact
                    ft[n_orig + j] = v0
                else:
                    acc = 0.0
                    for idx in range(a, b):
                        acc += f[aux_members[idx]]
                    ft[n_orig + j] = acc / (b - a)

            tv = 0.0
            for i in range(n_ext):
                gt[i] = 0.0
            for k in range(n_edges):
                a = edge_ptr[k]
                b = edge_ptr[k + 1]
                c = b - a
                v0 = ft[edge_members[a]]
                allsame = True
                for idx in range(a + 1, b):
                    if ft[edge_members[idx]] != v0:
                        allsame = False
                        break
                if allsame:
                    continue
                pref[0] = 1.0
                for j in range(1, c):
                    pref[j] = pref[j - 1] * ft[edge_members[a + j - 1]]
                suff[c - 1] = 1.0
                for j in range(c - 2, -1, -1):
                    suff[j] = suff[j + 1] * ft[edge_members[a + j + 1]]
                for j in range(c):
                    v = edge_members[a + j]
                    x = ft[v]
                    gap = _ipow(x, c - 1) - pref[j] * suff[j]
                    tv += x * gap
                    gt[v] += c * gap

            for i in range(n_orig):
                grad[i] = lam * gt[i]
            for j in range(n_aux):
                a = aux_ptr[j]
                b = aux_ptr[j + 1]
                w = lam * gt[n_orig + j] / (b - a)
                for idx in range(a, b):
                    grad[aux_members[idx]] += w

            loss = 0.0
            if use_cross_entropy:
                lo = clamp_eps
                hi = 1.0 - clamp_eps
                for s in range(n_obs):
                    i = obs_idx[s]
                    y = obs_y[s]
                    x = f[i]
                    xc = x
                    if xc < lo:
                        xc = lo
                    elif xc > hi:
                        xc = hi
                    loss += -(y * np.log(xc) + (1.0 - y) * np.log(1.0 - xc))
                    if lo <= x <= hi:
                        grad[i] += -y / xc + (1.0 - y) / (1.0 - xc)
            else:
                for s in range(n_obs):
                    i = obs_idx[s]
                    d = f[i] - obs_y[s]
                    loss += 0.5 * d * d
                    grad[i] += d

            obj = loss + lam * tv
            finite = np.isfinite(obj)
            if finite:
                for i in range(n_orig):
                    if not np.isfinite(grad[i]):
                        finite = False
                        break
            if not finite:
                bad_iter = step
                break

            if record_trace:
                trace[n_trace] = obj
                n_trace += 1
            final_obj = obj

            gmax = 0.0
            for i in range(n_orig):
                mag = abs(grad[i])
                if mag > gmax:
                    gmax = mag
            if gmax < grad_tol:
                converged = True
                break
            if step == max_iters:
                break

            for i in range(n_orig):
                x = f[i] - eta * grad[i]
                if project:
                    if x < 0.0:
                        x = 0.0
                    elif x > 1.0:
                        x = 1.0
                f[i] = x
            iters += 1

        return f, iters, converged, final_obj, n_trace, bad_iter


# ---------------------------------------------------------------------------
# backend selection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KernelSet:
    """One backend's kernel implementations.

    `descent` is the fused solver loop; it is None on the numpy backend, where
    the solver falls back to its per-iteration python loop.
    """

    name: str
    tv_value: Callable[[np.ndarray, np.ndarray], float]
    tv_contract_add: Callable[[np.ndarray, np.ndarray, np.ndarray, float], None]
    descent: Optional[Callable]


NUMPY_KERNELS = KernelSet(
    name="numpy",
    tv_value=_tv_value_numpy,
    tv_contract_add=_tv_contract_add_numpy,
    descent=None,
)

NUMBA_KERNELS = (
    KernelSet(
        name="numba",
        tv_value=lambda members, f: float(_tv_value_numba(members, f)),
        tv_contract_add=_tv_contract_add_numba,
        descent=_descent_numba,
    )
    if _HAVE_NUMBA
    else None
)


def available_backends() -> tuple[str, ...]:
    return ("numba", "numpy") if _HAVE_NUMBA else ("numpy",)


def _resolve(name: str) -> KernelSet:
    if name == "numpy":
        return NUMPY_KERNELS
    if name == "numba":
        if NUMBA_KERNELS is None:
            raise ValueError("numba backend requested but numba is not importable")
        return NUMBA_KERNELS
    raise ValueError(f"unknown backend {name!r}; choose from {_BACKENDS}")


_choice = _env_choice()
_ACTIVE: KernelSet = _resolve("numba" if (_choice == "auto" and _HAVE_NUMBA) else
                              ("numpy" if _choice == "auto" else _choice))


def get_kernels(backend: str | None = None) -> KernelSet:
    """Return the active kernel set, or a specific backend's set."""
    if backend is None:
        return _ACTIVE
    return _resolve(backend)


def active_backend() -> str:
    return _ACTIVE.name


def set_backend(name: str) -> str:
    """Switch the process-wide backend; returns the previous backend name."""
    global _ACTIVE
    previous = _ACTIVE.name
    _ACTIVE = _resolve(name)
    return previous
