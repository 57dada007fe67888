"""Hot inner loops.

Every kernel exists twice: a loop form compiled with numba and a vectorised
numpy form.  ``get_kernels()`` returns the active set (see ``_accel``); both
sets stay importable so they can be compared against each other.

Array conventions shared by all kernels:

* a joint table over ``X x Y`` is a flat float64 vector, cell ``x * ny + y``;
* a batch of marginal constraints is ``groups`` (n_constraints, n_cells) int64,
  mapping each cell to its marginal cell, with all targets concatenated in
  ``targets`` and delimited by ``offsets`` (n_constraints + 1).
"""
import math
from types import SimpleNamespace

import numpy as np

from ._accel import NUMBA_AVAILABLE, USE_NUMBA, optional_njit

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_DIR_EPS = 1e-14


# ---------------------------------------------------------------------------
# iterative proportional fitting


def _ipf_cycle_loops(q, groups, targets, offsets, work):
    n_cons, n = groups.shape
    for c in range(n_cons):
        lo = offsets[c]
        size = offsets[c + 1] - lo
        for g in range(size):
            work[g] = 0.0
        for j in range(n):
            work[groups[c, j]] += q[j]
        for g in range(size):
            s = work[g]
            if s > 0.0:
                work[g] = targets[lo + g] / s
            else:
                work[g] = 0.0
        for j in range(n):
            q[j] *= work[groups[c, j]]


def _residual_loops(q, groups, targets, offsets, work):
    n_cons, n = groups.shape
    worst = 0.0
    for c in range(n_cons):
        lo = offsets[c]
        size = offsets[c + 1] - lo
        for g in range(size):
            work[g] = 0.0
        for j in range(n):
            work[groups[c, j]] += q[j]
        for g in range(size):
            d = abs(work[g] - targets[lo + g])
            if d > worst:
                worst = d
    return worst


_ipf_cycle_nb = optional_njit(_ipf_cycle_loops)
_residual_nb = optional_njit(_residual_loops)


def _make_ipf_run(cycle, residual):
    def ipf_run(q, groups, targets, offsets, tol, max_cycles):
        width = 1
        for c in range(offsets.size - 1):
            width = max(width, offsets[c + 1] - offsets[c])
        work = np.empty(width)
        cycles = 0
        res = np.inf
        while cycles < max_cycles:
            cycle(q, groups, targets, offsets, work)
            cycles += 1
            res = residual(q, groups, targets, offsets, work)
            if res <= tol:
                break
        return cycles, res

    return ipf_run


def _ipf_cycle_numpy(q, groups, targets, offsets, work=None):
    for c in range(groups.shape[0]):
        t = targets[offsets[c]:offsets[c + 1]]
        s = np.bincount(groups[c], weights=q, minlength=t.size)
        ratio = np.divide(t, s, out=np.zeros_like(t), where=s > 0.0)
        q *= ratio[groups[c]]


def _residual_numpy(q, groups, targets, offsets, work=None):
    worst = 0.0
    for c in range(groups.shape[0]):
        t = targets[offsets[c]:offsets[c + 1]]
        s = np.bincount(groups[c], weights=q, minlength=t.size)
        worst = max(worst, float(np.abs(s - t).max()))
    return worst


# ---------------------------------------------------------------------------
# exponential-family channels, coordinate descent on generator coordinates


def _expfam_ce_loops(theta, cell_params, pk, px, nx, ny):
    # sum_x p(x) log Z(x) - sum_{x,y} pk(x,y) logit(x,y)
    nf = cell_params.shape[1]
    buf = np.empty(ny)
    total = 0.0
    for x in range(nx):
        if px[x] <= 0.0:
            continue
        mx = -np.inf
        for y in range(ny):
            c = x * ny + y
            s = 0.0
            for f in range(nf):
                s += theta[cell_params[c, f]]
            buf[y] = s
            if s > mx:
                mx = s
        z = 0.0
        for y in range(ny):
            z += math.exp(buf[y] - mx)
        total += px[x] * (mx + math.log(z))
        for y in range(ny):
            total -= pk[x * ny + y] * buf[y]
    return total


def _expfam_ce_numpy(theta, cell_params, pk, px, nx, ny):
    logits = theta[cell_params].sum(axis=1).reshape(nx, ny)
    mx = logits.max(axis=1)
    logz = mx + np.log(np.exp(logits - mx[:, None]).sum(axis=1))
    return float(px @ logz - pk @ logits.ravel())


def _make_expfam_cd(objective):
    def expfam_cd(theta, cell_params, pk, px, nx, ny, width, xtol, ftol, max_sweeps):
        f = objective(theta, cell_params, pk, px, nx, ny)
        sweeps = 0
        while sweeps < max_sweeps:
            sweeps += 1
            f_start = f
            for j in range(theta.size):
                c0 = theta[j]
                a = c0 - width
                b = c0 + width
                c = b - _INVPHI * (b - a)
                d = a + _INVPHI * (b - a)
                theta[j] = c
                fc = objective(theta, cell_params, pk, px, nx, ny)
                theta[j] = d
                fd = objective(theta, cell_params, pk, px, nx, ny)
                while b - a > xtol:
                    if fc < fd:
                        b = d
                        d = c
                        fd = fc
                        c = b - _INVPHI * (b - a)
                        theta[j] = c
                        fc = objective(theta, cell_params, pk, px, nx, ny)
                    else:
                        a = c
                        c = d
                        fc = fd
                        d = a + _INVPHI * (b - a)
                        theta[j] = d
                        fd = objective(theta, cell_params, pk, px, nx, ny)
                if fc < fd:
                    best, fbest = c, fc
                else:
                    best, fbest = d, fd
                if fbest < f:
                    theta[j] = best
                    f = fbest
                else:
                    theta[j] = c0
            if f_start - f < ftol:
                break
        return f, sweeps

    return expfam_cd


# ---------------------------------------------------------------------------
# mutual information of a joint, coordinate descent along null-space lines


def _mi_loops(q, nx, ny):
    total = 0.0
    for y in range(ny):
        s = 0.0
        for x in range(nx):
            s += q[x * ny + y]
        if s > 0.0:
            total -= s * math.log(s)
    for x in range(nx):
        s = 0.0
        for y in range(ny):
            v = q[x * ny + y]
            s += v
            if v > 0.0:
                total += v * math.log(v)
        if s > 0.0:
            total -= s * math.log(s)
    return total


def _xlogx(v):
    out = np.zeros_like(v)
    pos = v > 0.0
    out[pos] = v[pos] * np.log(v[pos])
    return out


def _mi_numpy(q, nx, ny):
    j = q.reshape(nx, ny)
    return float(_xlogx(q).sum() - _xlogx(j.sum(axis=1)).sum() - _xlogx(j.sum(axis=0)).sum())


def _make_line_eval(objective):
    def line_eval(q, h, t, trial, nx, ny):
        for j in range(q.size):
            v = q[j] + t * h[j]
            trial[j] = v if v > 0.0 else 0.0
        return objective(trial, nx, ny)

    return line_eval


def _make_nullspace_cd(objective, line_eval):
    def nullspace_cd(q, basis, nx, ny, xtol, ftol, max_cycles, trace):
        n = q.size
        trial = np.empty(n)
        f = objective(q, nx, ny)
        cycles = 0
        converged = False
        while cycles < max_cycles:
            f_start = f
            for k in range(basis.shape[0]):
                h = basis[k]
                lo = -np.inf
                hi = np.inf
                for j in range(n):
                    if h[j] > _DIR_EPS:
                        lo = max(lo, -q[j] / h[j])
                    elif h[j] < -_DIR_EPS:
                        hi = min(hi, -q[j] / h[j])
                if not hi - lo > xtol:
                    continue
                a = lo
                b = hi
                c = b - _INVPHI * (b - a)
                d = a + _INVPHI * (b - a)
                fc = line_eval(q, h, c, trial, nx, ny)
                fd = line_eval(q, h, d, trial, nx, ny)
                while b - a > xtol:
                    if fc < fd:
                        b = d
                        d = c
                        fd = fc
                        c = b - _INVPHI * (b - a)
                        fc = line_eval(q, h, c, trial, nx, ny)
                    else:
                        a = c
                        c = d
                        fc = fd
                        d = a + _INVPHI * (b - a)
                        fd = line_eval(q, h, d, trial, nx, ny)
                t = c if fc < fd else d
                fbest = fc if fc < fd else fd
                if fbest < f:
                    for j in range(n):
                        v = q[j] + t * h[j]
                        q[j] = v if v > 0.0 else 0.0
                    f = objective(q, nx, ny)
            if cycles < trace.size:
                trace[cycles] = f
            cycles += 1
            if f_start - f < ftol:
                converged = True
                break
        return f, cycles, converged

    return nullspace_cd


# ---------------------------------------------------------------------------
# assembly


def _numpy_set():
    line_eval = _make_line_eval(_mi_numpy)
    return SimpleNamespace(
        name="numpy",
        ipf_cycle=_ipf_cycle_numpy,
        constraint_residual=_residual_numpy,
        ipf_run=_make_ipf_run(_ipf_cycle_numpy, _residual_numpy),
        expfam_objective=_expfam_ce_numpy,
        expfam_cd=_make_expfam_cd(_expfam_ce_numpy),
        mutual_information=_mi_numpy,
        nullspace_cd=_make_nullspace_cd(_mi_numpy, line_eval),
    )


def _numba_set():
    objective = optional_njit(_expfam_ce_loops)
    mi = optional_njit(_mi_loops)
    line_eval = optional_njit(_make_line_eval(mi))
    return SimpleNamespace(
        name="numba",
        ipf_cycle=_ipf_cycle_nb,
        constraint_residual=_residual_nb,
        ipf_run=optional_njit(_make_ipf_run(_ipf_cycle_nb, _residual_nb)),
        expfam_objective=objective,
        expfam_cd=optional_njit(_make_expfam_cd(objective)),
        mutual_information=mi,
        nullspace_cd=optional_njit(_make_nullspace_cd(mi, line_eval)),
    )


NUMPY_KERNELS = _numpy_set()
NUMBA_KERNELS = _numba_set() if NUMBA_AVAILABLE else None


def get_kernels(backend=None):
    """Return the kernel set for ``backend`` ("numba", "numpy" or None for the active one)."""
    if backend is None:
        backend = "numba" if USE_NUMBA else "numpy"
    if backend == "numpy":
        return NUMPY_KERNELS
    if backend == "numba":
        if NUMBA_KERNELS is None:
            raise RuntimeError("numba is not installed")
        return NUMBA_KERNELS
    raise ValueError(f"unknown backend {backend!r}")
