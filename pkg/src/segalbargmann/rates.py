"""Large-N convergence tables with log-log slope fits."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .free import free_sb, nu, pi_tau
from .groups import GroupSpec
from .linalg import expm
from .operators import DN, assemble, exp_apply, heat_moment
from .tracepoly import TracePolynomial, TransformParams
from .words import l2_norm_sq

SLOPE_WINDOWS = {"free-limit": (-2.4, -1.6), "concentration": (-2.4, -1.6),
                 "operator-norm": (-1.4, -0.6), "moments": (-2.4, -1.6)}


def fit_slope(Ns: Sequence[int], values: Sequence[float]) -> float:
    """Least-squares slope of log(value) against log(N)."""
    Ns = np.asarray(Ns, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(Ns) < 3:
        raise ValueError("a slope fit needs at least 3 values of N")
    if np.all(np.abs(values) < 1e-14):
        raise ValueError("values vanish at every N (exact agreement); there is no rate to fit")
    if np.any(values <= 0) or not np.all(np.isfinite(values)):
        raise ValueError("slope fit needs positive finite values")
    return float(np.polyfit(np.log(Ns), np.log(values), 1)[0])


@dataclass
class RateResult:
    what: str
    family: str
    Ns: list[int]
    values: list[float]
    window: tuple[float, float]
    config: dict = field(default_factory=dict)

    @property
    def slope(self) -> float:
        return fit_slope(self.Ns, self.values)

    @property
    def passed(self) -> bool:
        lo, hi = self.window
        return lo <= self.slope <= hi

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["what", "family", "N", "value", "slope", "window_lo", "window_hi", "status"])
        slope = self.slope
        status = "pass" if self.passed else "fail"
        for N, v in zip(self.Ns, self.values):
            w.writerow([self.what, self.family, N, repr(v), repr(slope), self.window[0], self.window[1], status])
        return buf.getvalue()


def _check_Ns(Ns: Sequence[int]) -> list[int]:
    Ns = sorted(set(int(N) for N in Ns))
    if len(Ns) < 3:
        raise ValueError("refusing to fit a slope with fewer than 3 values of N")
    return Ns


def free_limit_rate(family: str, f: TracePolynomial, params: TransformParams, Ns: Sequence[int],
                    direction: str = "forward", window=None) -> RateResult:
    """Squared L^2 distance between the finite-N transform of f and the free transform.

    forward: e^{(tau/2) D_N} f - G f under the complex-time heat kernel;
    inverse: e^{-(tau/2) D_N} f - H f under the heat kernel at time s.
    """
    Ns = _check_Ns(Ns)
    params.check()
    tau = complex(params.tau)
    values = []
    for N in Ns:
        spec = GroupSpec(family, N)
        if direction == "forward":
            R = exp_apply(DN(spec.family, N), tau / 2, f) - free_sb(params, f)
            values.append(l2_norm_sq(spec, params, R, "mu"))
        elif direction == "inverse":
            R = exp_apply(DN(spec.family, N), -tau / 2, f) - free_sb(params, f, inverse=True)
            values.append(l2_norm_sq(spec, params, R, "rho"))
        else:
            raise ValueError(f"unknown direction {direction!r}")
    return RateResult("free-limit", family, Ns, values, window or SLOPE_WINDOWS["free-limit"],
                      {"direction": direction, "s": params.s, "tau": tau, "poly": f.format()})


def concentration_rate(family: str, P: TracePolynomial, s: float, Ns: Sequence[int],
                       tau: complex = 0, window=None) -> RateResult:
    """Squared L^2 distance from P to its trace evaluation pi(P).

    tau = 0 uses the heat kernel at time s and pi_s; otherwise the
    complex-time kernel and pi_{s - tau}.
    """
    Ns = _check_Ns(Ns)
    params = TransformParams(s, tau)
    measure = "rho" if complex(tau) == 0 else "mu"
    R = P - pi_tau(s - complex(tau), P)
    values = [l2_norm_sq(GroupSpec(family, N), params, R, measure) for N in Ns]
    return RateResult("concentration", family, Ns, values, window or SLOPE_WINDOWS["concentration"],
                      {"s": s, "tau": complex(tau), "measure": measure, "poly": P.format()})


def operator_norm_rate(family: str, m: int, Ns: Sequence[int], scale: float = 1.0, order: int = 1,
                       window=None) -> RateResult:
    """Spectral norm of e^{scale D_N} - e^{scale L0} on C_m (order 1),
    or of e^{scale D_N} - e^{scale (L0 + L1/N)} (order 2)."""
    Ns = _check_Ns(Ns)
    L0 = assemble("L0", m).entries
    L1 = assemble(f"L1_{GroupSpec(family, 2).family}", m).entries
    values = []
    for N in Ns:
        D = assemble(DN(GroupSpec(family, N).family, N), m).entries
        ref = L0 if order == 1 else L0 + L1 / N
        values.append(float(np.linalg.norm(expm(scale * D) - expm(scale * ref), 2)))
    default = SLOPE_WINDOWS["operator-norm"] if order == 1 else (-2.4, -1.6)
    return RateResult("operator-norm", family, Ns, values, window or default,
                      {"m": m, "scale": scale, "order": order})


def moment_rate(family: str, k: int, s: float, Ns: Sequence[int], tau: complex = 0,
                window=None) -> RateResult:
    """|finite-N moment of tr(A^k) - nu_k(s - tau)|."""
    Ns = _check_Ns(Ns)
    z = s - complex(tau)
    target = nu(k, z)
    values = [abs(complex(heat_moment(GroupSpec(family, N), z, k)) - target) for N in Ns]
    return RateResult("moments", family, Ns, values, window or SLOPE_WINDOWS["moments"],
                      {"k": k, "s": s, "tau": complex(tau), "limit": target})


__all__ = ["fit_slope", "RateResult", "free_limit_rate", "concentration_rate", "operator_norm_rate",
           "moment_rate", "SLOPE_WINDOWS"]
