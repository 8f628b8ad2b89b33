"""Monte-Carlo sampling of heat-kernel measures on the compact groups and their complexifications.

Samples are products of exponentials of Gaussian Lie-algebra increments
(Lie-Euler scheme), so every sample lies on the group up to rounding.
For complex time tau = t + i*theta each increment is sum_j (a_j + i b_j) X_j with

    cov(a, b) = [[s - t/2, -theta/2], [-theta/2, t/2]] / steps

which accumulates the generator (1/2) A_{s,tau}.  tau = 0 gives the heat
kernel at time s on the compact group itself.
"""
from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .free import nu
from .groups import GroupSpec
from .linalg import expm
from .operators import heat_moment
from .tracepoly import TracePolynomial, TransformParams
from .words import FAMILY_CONSTANTS, bform, build_generator

CHUNK = 250
CSV_COLUMNS = ("family", "N", "s", "tau_re", "tau_im", "k_or_poly_hash", "mc_mean_re", "mc_mean_im",
               "se", "exact_re", "exact_im", "limit_re", "limit_im", "samples", "steps", "seed")


def default_steps(s: float) -> int:
    return max(200, math.ceil(100 * s))


@dataclass(frozen=True)
class MCConfig:
    spec: GroupSpec
    params: TransformParams
    samples: int = 2000
    seed: int = 0
    steps: int | None = None

    def __post_init__(self):
        if self.samples <= 0:
            raise ValueError("samples must be positive")
        if self.steps is None:
            object.__setattr__(self, "steps", default_steps(self.params.s))
        if self.steps <= 0:
            raise ValueError("steps must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if self.complexified:
            self.params.check()

    @classmethod
    def rho(cls, spec: GroupSpec, s: float, **kw) -> MCConfig:
        return cls(spec, TransformParams(s, 0.0), **kw)

    @property
    def complexified(self) -> bool:
        return complex(self.params.tau) != 0

    @property
    def measure(self) -> str:
        return "mu" if self.complexified else "rho"

    @property
    def steps_ok(self) -> bool:
        """steps >= 10 s, the recommended floor."""
        return self.steps >= 10 * self.params.s


@dataclass
class MomentEstimate:
    mean: complex
    std_error: float
    samples: int
    exact_finite_N: complex | None = None
    free_limit: complex | None = None
    label: str = ""
    config: MCConfig | None = field(default=None, repr=False)

    @property
    def z_score(self) -> float | None:
        """|mean - exact| in standard errors, with a rounding floor on the error."""
        if self.exact_finite_N is None:
            return None
        gap = abs(self.mean - self.exact_finite_N)
        floor = 1e-12 * max(1.0, abs(self.exact_finite_N))
        return gap / max(self.std_error, floor)

    def agrees(self, n_se: float = 4.0) -> bool:
        z = self.z_score
        return z is not None and z <= n_se


def increment_covariance(params: TransformParams, steps: int) -> np.ndarray:
    s, t, theta = params.s, params.t, params.theta
    cov = np.array([[s - t / 2, -theta / 2], [-theta / 2, t / 2]]) / steps
    if np.linalg.eigvalsh(cov).min() < -1e-15:
        raise ValueError(f"increment covariance is not positive semidefinite for tau={params.tau}")
    return cov


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    # substream per fixed-size chunk, independent of how chunks are scheduled
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, chunk])))


def _walk(spec: GroupSpec, params: TransformParams, steps: int, n: int,
          rng: np.random.Generator) -> np.ndarray:
    dim, d = spec.algebra_dim, spec.matrix_dim
    flat = spec.basis.reshape(dim, d * d)
    A = np.broadcast_to(np.eye(d, dtype=complex), (n, d, d)).copy()
    if complex(params.tau) == 0:
        scale = math.sqrt(params.s / steps)
        for _ in range(steps):
            xi = rng.standard_normal((n, dim)) * scale
            A = A @ expm((xi @ flat).reshape(n, d, d))
        return A
    w, V = np.linalg.eigh(increment_covariance(params, steps))
    L = V * np.sqrt(np.clip(w, 0.0, None))
    for _ in range(steps):
        ab = rng.standard_normal((n, dim, 2)) @ L.T
        coeff = ab[..., 0] + 1j * ab[..., 1]
        A = A @ expm((coeff @ flat).reshape(n, d, d))
    return A


def iter_samples(cfg: MCConfig) -> Iterator[np.ndarray]:
    """Yields batches of samples of shape (batch, d, d); reproducible given the seed."""
    done = 0
    chunk = 0
    while done < cfg.samples:
        n = min(CHUNK, cfg.samples - done)
        yield _walk(cfg.spec, cfg.params, cfg.steps, n, _chunk_rng(cfg.seed, chunk))
        done += n
        chunk += 1


def _sample_all(cfg: MCConfig) -> np.ndarray:
    return np.concatenate(list(iter_samples(cfg)), axis=0)


def sample_rho(cfg: MCConfig) -> np.ndarray:
    """Samples of the heat kernel at time s on the compact group."""
    if cfg.complexified:
        cfg = MCConfig(cfg.spec, TransformParams(cfg.params.s, 0.0), cfg.samples, cfg.seed, cfg.steps)
    return _sample_all(cfg)


def sample_mu(cfg: MCConfig) -> np.ndarray:
    """Samples of the complex-time heat kernel on the complexified group."""
    cfg.params.check()
    return _sample_all(cfg)


def _summarize(values: np.ndarray) -> tuple[complex, float]:
    n = values.size
    mean = complex(values.mean())
    if n < 2:
        return mean, 0.0
    var = float(np.mean(np.abs(values - mean) ** 2)) * n / (n - 1)
    return mean, math.sqrt(var / n)


def batch_trace_power(A: np.ndarray, k: int) -> np.ndarray:
    d = A.shape[-1]
    if k == 0:
        return np.ones(A.shape[0], dtype=complex)
    M = np.linalg.matrix_power(A if k > 0 else np.linalg.inv(A), abs(k))
    return np.trace(M, axis1=-2, axis2=-1) / d


def exact_moment(spec: GroupSpec, params: TransformParams, k: int) -> complex:
    """Exact integral of tr(A^k); holomorphic, so only s - tau enters."""
    return complex(heat_moment(spec, params.s - complex(params.tau), k))


def estimate_moment(cfg: MCConfig, k: int) -> MomentEstimate:
    limit = nu(k, cfg.params.s - complex(cfg.params.tau))
    exact = exact_moment(cfg.spec, cfg.params, k)
    if k == 0:
        return MomentEstimate(1.0 + 0j, 0.0, cfg.samples, exact, limit, "k=0", cfg)
    values = np.concatenate([batch_trace_power(A, k) for A in iter_samples(cfg)])
    mean, se = _summarize(values)
    return MomentEstimate(mean, se, cfg.samples, exact, limit, f"k={k}", cfg)


def poly_hash(P: TracePolynomial) -> str:
    return hashlib.sha1(P.to_json().encode()).hexdigest()[:12]


def estimate_l2(cfg: MCConfig, P: TracePolynomial) -> MomentEstimate:
    """Monte-Carlo estimate of the squared norm of P_N(A), tr(P P^*), under the configured measure.

    The exact value and its large-N limit are filled in for SO and Sp.
    """
    values = []
    for batch in iter_samples(cfg):
        for A in batch:
            M = P.evaluate(A, cfg.spec)
            values.append(np.vdot(M, M).real / cfg.spec.matrix_dim)
    mean, se = _summarize(np.array(values))
    exact = limit = None
    if cfg.spec.family in FAMILY_CONSTANTS:
        W = bform(P, P)
        dec = build_generator(cfg.spec.family, cfg.params, seeds=W)
        exact = dec.expectation(W, cfg.spec.N)
        limit = dec.expectation(W, None)
    return MomentEstimate(mean, se, cfg.samples, exact, limit, f"poly:{poly_hash(P)}", cfg)


def csv_row(est: MomentEstimate) -> dict:
    cfg = est.config
    if cfg is None:
        raise ValueError("estimate carries no configuration")

    def parts(z):
        return ("", "") if z is None else (repr(complex(z).real), repr(complex(z).imag))

    tau = complex(cfg.params.tau)
    exact, limit = parts(est.exact_finite_N), parts(est.free_limit)
    return {
        "family": cfg.spec.family, "N": cfg.spec.N, "s": repr(cfg.params.s),
        "tau_re": repr(tau.real), "tau_im": repr(tau.imag), "k_or_poly_hash": est.label,
        "mc_mean_re": repr(est.mean.real), "mc_mean_im": repr(est.mean.imag), "se": repr(est.std_error),
        "exact_re": exact[0], "exact_im": exact[1], "limit_re": limit[0], "limit_im": limit[1],
        "samples": est.samples, "steps": cfg.steps, "seed": cfg.seed,
    }


def write_csv(estimates: Iterable[MomentEstimate], out=None) -> str:
    """Writes the estimates as CSV to ``out`` (a file object) and returns the text."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for est in estimates:
        writer.writerow(csv_row(est))
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text


__all__ = ["MCConfig", "MomentEstimate", "sample_rho", "sample_mu", "iter_samples", "estimate_moment",
           "estimate_l2", "exact_moment", "write_csv", "CSV_COLUMNS", "default_steps"]
