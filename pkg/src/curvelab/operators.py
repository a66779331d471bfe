"""Quadrature evaluation of the single-scale bilinear pieces T_j, their
truncated sums, the bilinear maximal average, the level-set-restricted pieces,
and the frequency-side multiplier.

Everything works in the rescaled variable: T_j(f,g)(x) integrates
f(x - 2^-j s) g(x - P(2^-j s)) rho(s) ds over the fixed annulus
1/2 < |s| < 2, so quadrature nodes never chase the scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .oscillatory import SmoothFn, oscillatory_integral, q_perturbation
from .polynomials import Polynomial
from .signals import CutoffFamily, GridFunction, default_family, lp_norm

__all__ = [
    "OperatorResult",
    "apply_Tj",
    "apply_H_truncated",
    "apply_M",
    "restricted_Tj_alpha",
    "restricted_Tjh",
    "multiplier_Mmn",
    "operator_ratio",
    "per_scale_json",
]

_COMPONENTS = ((0.5, 2.0), (-2.0, -0.5))


@dataclass
class OperatorResult:
    output: GridFunction
    j_terms: Optional[dict] = None
    nodes_per_component: int = 0
    resolution_warning: bool = False
    extras: dict = field(default_factory=dict)


def _quad_nodes(a: float, b: float, n: int):
    ts = np.linspace(a, b, n)
    w = np.full(n, (b - a) / (n - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    return ts, w


def _bilinear_sum(f, g, P, scale, x, subintervals, family, nodes_per_unit):
    """sum over subintervals of int f(x - scale*s) g(x - P(scale*s)) rho(s) ds."""
    out = np.zeros(x.size)
    block = max(8, (1 << 22) // max(1, x.size))
    for a, b in subintervals:
        n = max(33, int(math.ceil((b - a) * nodes_per_unit)) + 1)
        ts, w = _quad_nodes(a, b, n)
        rw = family.rho(ts) * w
        shifted = scale * ts
        curved = P.eval(shifted)
        for s in range(0, n, block):
            e = min(s + block, n)
            fv = f((x[None, :] - shifted[s:e, None]).ravel()).reshape(e - s, x.size)
            gv = g((x[None, :] - curved[s:e, None]).ravel()).reshape(e - s, x.size)
            out += rw[s:e] @ (fv * gv)
    return out


def apply_Tj(
    f: GridFunction,
    g: GridFunction,
    P: Polynomial,
    j: int,
    family: CutoffFamily = None,
    nodes_per_component: int = 512,
) -> OperatorResult:
    """T_j(f,g)(x) = int f(x-t) g(x-P(t)) rho_j(t) dt on the grid of f."""
    family = family or default_family()
    P.require_no_linear_term()
    scale = 2.0 ** (-j)
    warn = 1.5 * scale < 4.0 * f.step
    x = f.x
    nodes_per_unit = nodes_per_component / 1.5
    vals = _bilinear_sum(f, g, P, scale, x, _COMPONENTS, family, nodes_per_unit)
    return OperatorResult(
        output=f.with_values(vals),
        nodes_per_component=nodes_per_component,
        resolution_warning=warn,
    )


def apply_H_truncated(
    f: GridFunction,
    g: GridFunction,
    P: Polynomial,
    j_min: int,
    j_max: int,
    family: CutoffFamily = None,
    nodes_per_component: int = 512,
    retain_terms: bool = False,
) -> OperatorResult:
    """Sum of T_j over j_min <= j <= j_max."""
    if j_min > j_max:
        raise ValueError("need j_min <= j_max")
    family = family or default_family()
    total = np.zeros(f.n)
    terms = {} if retain_terms else None
    warn = False
    for j in range(j_min, j_max + 1):
        res = apply_Tj(f, g, P, j, family, nodes_per_component)
        total += res.output.values
        warn = warn or res.resolution_warning
        if retain_terms:
            terms[j] = res.output
    return OperatorResult(
        output=f.with_values(total),
        j_terms=terms,
        nodes_per_component=nodes_per_component,
        resolution_warning=warn,
    )


def apply_M(
    f: GridFunction,
    g: GridFunction,
    P: Polynomial,
    epsilon_grid=None,
    nodes: int = 513,
) -> GridFunction:
    """Pointwise max over epsilon of (1/2eps) int_{-eps}^{eps} |f(x-t) g(x-P(t))| dt."""
    if epsilon_grid is None:
        lo = 4.0 * f.step
        hi = (f.hi - f.lo) / 2.0
        n_eps = max(2, int(math.ceil(math.log2(hi / lo) * 8)) + 1)
        epsilon_grid = np.geomspace(lo, hi, n_eps)
    eps_arr = np.asarray(epsilon_grid, dtype=float)
    if np.any(eps_arr <= 0) or np.any(np.diff(eps_arr) < 0):
        raise ValueError("epsilon grid must be positive and sorted")
    x = f.x
    best = np.zeros(f.n)
    for eps in eps_arr:
        ts, w = _quad_nodes(-eps, eps, nodes)
        curved = P.eval(ts)
        fv = f((x[None, :] - ts[:, None]).ravel()).reshape(nodes, f.n)
        gv = g((x[None, :] - curved[:, None]).ravel()).reshape(nodes, f.n)
        avg = (w / (2 * eps)) @ np.abs(fv * gv)
        np.maximum(best, avg, out=best)
    return f.with_values(best)


def _band_subintervals(fn, lo_level, hi_level, component, samples=4096, refine_width=1e-12):
    """Subintervals of the component where lo_level <= fn <= hi_level.

    Band membership is sampled, then every boundary is sharpened by bisection.
    fn must be continuous; returns a list of (a, b).
    """
    a, b = component
    xs = np.linspace(a, b, samples + 1)
    vals = fn(xs)
    inside = (vals >= lo_level) & (vals <= hi_level)
    if not inside.any():
        return []

    width = (b - a) * refine_width

    def refine(x0, x1, into_inside):
        # locate the membership flip between x0 (state != into) and x1
        while x1 - x0 > width:
            mid = 0.5 * (x0 + x1)
            v = float(fn(np.asarray(mid)))
            if (lo_level <= v <= hi_level) == into_inside:
                x1 = mid
            else:
                x0 = mid
        return 0.5 * (x0 + x1)

    out = []
    start = xs[0] if inside[0] else None
    for i in range(samples):
        if inside[i] != inside[i + 1]:
            if inside[i + 1]:
                start = refine(xs[i], xs[i + 1], True)
            else:
                end = refine(xs[i], xs[i + 1], False)
                if start is not None and end > start:
                    out.append((start, end))
                start = None
    if start is not None:
        out.append((start, xs[-1]))
    return out


def _derivative_of_curve(P: Polynomial, j: int):
    """s -> d/ds P(2^-j s) = 2^-j P'(2^-j s)."""
    scale = 2.0 ** (-j)
    dP = P.derivative()

    def G(s):
        return scale * dP.eval(scale * np.asarray(s, dtype=float))

    return G


def restricted_Tj_alpha(
    f: GridFunction,
    g: GridFunction,
    P: Polynomial,
    j: int,
    alpha: float,
    family: CutoffFamily = None,
    nodes_per_component: int = 512,
) -> OperatorResult:
    """T_j restricted to E_alpha = {s in supp rho : alpha <= |dP(2^-j s)/ds| <= 2 alpha}."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    family = family or default_family()
    P.require_no_linear_term()
    G = _derivative_of_curve(P, j)
    scale = 2.0 ** (-j)
    x = f.x
    nodes_per_unit = nodes_per_component / 1.5
    subs = []
    measure = 0.0
    for comp in _COMPONENTS:
        bands = _band_subintervals(lambda s: np.abs(G(s)), alpha, 2.0 * alpha, comp)
        subs.extend(bands)
        measure += sum(b - a for a, b in bands)
    vals = (
        _bilinear_sum(f, g, P, scale, x, subs, family, nodes_per_unit)
        if subs
        else np.zeros(f.n)
    )
    return OperatorResult(
        output=f.with_values(vals),
        nodes_per_component=nodes_per_component,
        extras={"band_measure": measure, "subintervals": subs},
    )


def restricted_Tjh(
    f: GridFunction,
    g: GridFunction,
    P: Polynomial,
    j: int,
    h: float,
    family: CutoffFamily = None,
    nodes_per_component: int = 512,
):
    """T_j restricted to E_0(h), plus the measure |E_0(h)|.

    E_0 keeps the positive-derivative window (1/2) 2^-j < dP(2^-j s)/ds < 2 * 2^-j;
    E_0(h) further requires h 2^-j <= |dP(2^-j s)/ds - 2^-j| <= 2h 2^-j.
    """
    if not 0 < h <= 1:
        raise ValueError("h must lie in (0, 1]")
    family = family or default_family()
    P.require_no_linear_term()
    G = _derivative_of_curve(P, j)
    sj = 2.0 ** (-j)
    scale = sj
    x = f.x
    nodes_per_unit = nodes_per_component / 1.5

    def member(s):
        v = G(s)
        in_e0 = (v > 0.5 * sj) & (v < 2.0 * sj)
        dev = np.abs(v - sj)
        return np.where(in_e0 & (dev >= h * sj) & (dev <= 2.0 * h * sj), 1.0, -1.0)

    subs = []
    for comp in _COMPONENTS:
        subs.extend(_band_subintervals(member, 0.0, 2.0, comp))
    measure = sum(b - a for a, b in subs)
    vals = (
        _bilinear_sum(f, g, P, scale, x, subs, family, nodes_per_unit)
        if subs
        else np.zeros(f.n)
    )
    result = OperatorResult(
        output=f.with_values(vals),
        nodes_per_component=nodes_per_component,
        extras={"band_measure": measure, "subintervals": subs},
    )
    return result, measure


def multiplier_Mmn(
    P: Polynomial,
    l: int,
    j: int,
    m: int,
    n: int,
    xi: float,
    eta: float,
    family: CutoffFamily = None,
) -> complex:
    """M_{m,n}(xi, eta): two band cutoffs times the oscillatory rho-integral.

    Returns 0 immediately when either frequency misses its Phi-hat band.
    """
    family = family or default_family()
    if not 2 <= l <= P.degree:
        raise ValueError(f"l={l} out of range")
    a_l = P.coefficient(l)
    if a_l == 0.0:
        raise ValueError(f"coefficient a_{l} vanishes")
    j_l = math.log2(abs(a_l)) / (l - 1)
    c1 = float(family.phi_hat(xi / 2.0 ** (j_l + j + m)))
    c2 = float(family.phi_hat(eta / 2.0 ** (j_l + l * j + n)))
    if c1 == 0.0 or c2 == 0.0:
        return 0.0 + 0.0j
    Q = q_perturbation(P, l, j)
    s1 = xi / 2.0 ** (j_l + j)
    s2 = eta / 2.0 ** (j_l + l * j)

    def phase(t):
        t = np.asarray(t, dtype=float)
        return -2.0 * math.pi * (t * s1 + (t**l + Q.eval(t)) * s2)

    dQ = Q.derivative()

    def dphase(t):
        t = np.asarray(t, dtype=float)
        return -2.0 * math.pi * (s1 + (l * t ** (l - 1) + dQ.eval(t)) * s2)

    total = 0.0 + 0.0j
    for comp in _COMPONENTS:
        ph = SmoothFn(fn=phase, domain=comp, derivs=(dphase,))
        amp = SmoothFn(fn=family.rho, domain=comp)
        total += oscillatory_integral(ph, amp, 1.0, comp)
    return c1 * c2 * total


def operator_ratio(Tfg: GridFunction, f: GridFunction, g: GridFunction, p1: float, p2: float, r: float) -> float:
    """||T(f,g)||_r / (||f||_p1 ||g||_p2), the quantity the uniform bounds cap."""
    denom = lp_norm(f, p1) * lp_norm(g, p2)
    if denom == 0.0:
        raise ValueError("zero denominator: input norms vanish")
    return lp_norm(Tfg, r) / denom


def per_scale_json(result: OperatorResult) -> list:
    """Per-scale breakdown as a JSON-ready array keyed by j."""
    if result.j_terms is None:
        raise ValueError("result carries no per-scale terms; pass retain_terms=True")
    return [{"j": j, "grid": term.to_json_dict()} for j, term in sorted(result.j_terms.items())]
