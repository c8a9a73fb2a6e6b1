"""STAT oracles and the correlational-query decomposition.

An oracle holds a Boolean target f and a distribution D and answers queries
for E_D[psi(x, f(x))] within the query's tolerance.  Modes:

* ``exact``          -- returns the true expectation;
* ``grid_adversary`` -- rounds the true value to the nearest multiple of
  2*tau: provably valid (|v - true| <= tau) while destroying all sub-tau
  information;
* ``noisy``          -- adds seeded uniform noise in [-tau, tau];
* ``empirical``      -- averages psi over `sample_size` seeded draws from D
  (only probabilistically valid; log entries are flagged).

The agnostic counterpart answers with respect to a pair (D, phi_A) where
phi_A(x) = E[label | x].
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import (
    DomainMismatchError,
    InvalidToleranceError,
    QueryRangeError,
    UsageError,
)
from .fnspace import ATOL, BoolFn, Dist, RealFn
from .rng import make_rng

MODES = ("exact", "grid_adversary", "noisy", "empirical")


class Query:
    """A statistical query: kind, query function, tolerance.

    kind 'general' carries the two label slices pos = psi(., +1) and
    neg = psi(., -1); 'correlational' and 'target_independent' carry a single
    RealFn phi.
    """

    __slots__ = ("kind", "phi", "pos", "neg", "tau", "domain")

    def __init__(self, kind, tau, phi=None, pos=None, neg=None, domain=None):
        if tau <= 0 or tau > 1:
            raise InvalidToleranceError(f"tolerance must be in (0, 1], got {tau}")
        self.kind = kind
        self.tau = float(tau)
        if kind in ("correlational", "target_independent"):
            if not isinstance(phi, (RealFn, BoolFn)):
                raise UsageError(f"{kind} query needs a RealFn/BoolFn")
            self.phi = phi
            self.pos = self.neg = None
            self.domain = phi.domain
        elif kind == "general":
            pos = np.asarray(pos, dtype=np.float64)
            neg = np.asarray(neg, dtype=np.float64)
            if domain is None or pos.shape != (domain.size,) or neg.shape != (domain.size,):
                raise UsageError("general query needs a domain and full label slices")
            if np.abs(pos).max(initial=0.0) > 1 + ATOL or np.abs(neg).max(initial=0.0) > 1 + ATOL:
                raise QueryRangeError("query function must map into [-1, 1]")
            self.phi = None
            self.pos = pos
            self.neg = neg
            self.domain = domain
        else:
            raise UsageError(f"unknown query kind {kind!r}")


def correlational(phi, tau):
    return Query("correlational", tau, phi=phi)


def target_independent(phi, tau):
    return Query("target_independent", tau, phi=phi)


def general(domain, pos, neg, tau):
    return Query("general", tau, pos=pos, neg=neg, domain=domain)


def csq_decompose(q):
    """Split a general query into (phi1, phi2) with psi(x,l) = phi1(x)*l + phi2(x).

    phi1 = (psi(.,1) - psi(.,-1)) / 2 and phi2 = (psi(.,1) + psi(.,-1)) / 2,
    both members of the unit sup-norm ball.
    """
    if q.kind != "general":
        raise UsageError("csq_decompose expects a general query")
    phi1 = RealFn(q.domain, (q.pos - q.neg) / 2.0)
    phi2 = RealFn(q.domain, (q.pos + q.neg) / 2.0)
    return phi1, phi2


def true_query_value(q, target, dist):
    """Exact E_D[psi(x, f(x))] for a query against a Boolean target."""
    if q.domain != dist.domain or q.domain != target.domain:
        raise DomainMismatchError("query, target and distribution must share a domain")
    if q.kind == "correlational":
        return kernels.weighted_dot(q.phi.values, target.values, dist.weights)
    if q.kind == "target_independent":
        return float(np.dot(dist.weights, q.phi.values))
    slices = np.where(target.values > 0, q.pos, q.neg)
    return float(np.dot(dist.weights, slices))


@dataclass
class LogEntry:
    kind: str
    tau: float
    value: float
    true_value: float
    probabilistic: bool = False

    def as_record(self):
        return {
            "kind": self.kind,
            "tau": self.tau,
            "value": self.value,
            "true_value": self.true_value,
            "probabilistic": self.probabilistic,
        }


class SQOracle:
    """Statistical-query oracle for a fixed target and distribution.

    Single-owner: the query log and the noise stream are mutable state, so an
    instance must not be shared between concurrent runs.
    """

    def __init__(self, target, dist, mode="exact", seed=0, sample_size=None,
                 keep_log=True):
        if mode not in MODES:
            raise UsageError(f"oracle mode must be one of {MODES}, got {mode!r}")
        if target.domain != dist.domain:
            raise DomainMismatchError("target and distribution must share a domain")
        if mode == "empirical" and not sample_size:
            raise UsageError("empirical mode needs a sample_size")
        self.target = target
        self.dist = dist
        self.mode = mode
        self.sample_size = sample_size
        self.keep_log = keep_log
        self.query_log = []
        self.query_count = 0
        self._rng = make_rng(seed, purpose="oracle")

    def _finish(self, q, value, true_value):
        self.query_count += 1
        if self.keep_log:
            self.query_log.append(
                LogEntry(q.kind, q.tau, float(value), float(true_value),
                         probabilistic=self.mode == "empirical")
            )
        return float(value)

    def query(self, q):
        true_value = true_query_value(q, self.target, self.dist)
        if self.mode == "exact":
            value = true_value
        elif self.mode == "grid_adversary":
            value = float(np.round(true_value / (2 * q.tau)) * 2 * q.tau)
        elif self.mode == "noisy":
            value = true_value + self._rng.uniform(-q.tau, q.tau)
        else:
            idx = self._rng.choice(
                self.dist.domain.size, size=self.sample_size, p=self.dist.weights
            )
            if q.kind == "correlational":
                samples = q.phi.values[idx] * self.target.values[idx]
            elif q.kind == "target_independent":
                samples = q.phi.values[idx]
            else:
                samples = np.where(self.target.values[idx] > 0, q.pos[idx], q.neg[idx])
            value = float(samples.mean())
        return self._finish(q, value, true_value)

    def correlational_many(self, mat, tau):
        """Batch of correlational queries, one per row of `mat`, in row order.

        Semantically identical to issuing len(mat) correlational queries; each
        row is counted and logged individually.
        """
        if tau <= 0 or tau > 1:
            raise InvalidToleranceError(f"tolerance must be in (0, 1], got {tau}")
        true_values = kernels.weighted_many(mat, self.target.values, self.dist.weights)
        if self.mode == "exact":
            values = true_values.copy()
        elif self.mode == "grid_adversary":
            values = np.round(true_values / (2 * tau)) * 2 * tau
        elif self.mode == "noisy":
            values = true_values + self._rng.uniform(-tau, tau, len(true_values))
        else:
            values = np.empty(len(mat))
            for j in range(len(mat)):
                idx = self._rng.choice(
                    self.dist.domain.size, size=self.sample_size, p=self.dist.weights
                )
                values[j] = (mat[j, idx] * self.target.values[idx]).mean()
        self.query_count += len(mat)
        if self.keep_log:
            for v, t in zip(values, true_values):
                self.query_log.append(
                    LogEntry("correlational", tau, float(v), float(t),
                             probabilistic=self.mode == "empirical")
                )
        return values

    def audit(self):
        """Max |answer - truth| over all non-probabilistic logged queries."""
        gaps = [
            abs(e.value - e.true_value) - e.tau
            for e in self.query_log
            if not e.probabilistic
        ]
        return max(gaps, default=float("-inf"))


class AgnosticDist:
    """Agnostic example source: marginal D plus phi_A(x) = E[label | x]."""

    __slots__ = ("dist", "phi")

    def __init__(self, dist, phi):
        if not isinstance(phi, (RealFn, BoolFn)):
            raise UsageError("phi must be a RealFn/BoolFn")
        if phi.domain != dist.domain:
            raise DomainMismatchError("phi and distribution must share a domain")
        self.dist = dist
        self.phi = phi


def agnostic_true_value(a, q):
    """Exact E_(x,b)~A[psi(x, b)] using E[b|x] = phi_A(x)."""
    if q.domain != a.dist.domain:
        raise DomainMismatchError("query and agnostic source must share a domain")
    w = a.dist.weights
    if q.kind == "correlational":
        return kernels.weighted_dot(q.phi.values, a.phi.values, w)
    if q.kind == "target_independent":
        return float(np.dot(w, q.phi.values))
    phi1, phi2 = csq_decompose(q)
    return kernels.weighted_dot(phi1.values, a.phi.values, w) + float(
        np.dot(w, phi2.values)
    )


def agnostic_stat_query(a, q, mode="exact", rng=None, sample_size=None):
    """Answer a query against an agnostic source under the chosen mode."""
    if mode not in MODES:
        raise UsageError(f"oracle mode must be one of {MODES}, got {mode!r}")
    true_value = agnostic_true_value(a, q)
    if mode == "exact":
        return true_value
    if mode == "grid_adversary":
        return float(np.round(true_value / (2 * q.tau)) * 2 * q.tau)
    if rng is None:
        raise UsageError(f"mode {mode!r} needs an rng")
    if mode == "noisy":
        return true_value + float(rng.uniform(-q.tau, q.tau))
    if not sample_size:
        raise UsageError("empirical mode needs a sample_size")
    idx = rng.choice(a.dist.domain.size, size=sample_size, p=a.dist.weights)
    labels = np.where(
        rng.random(sample_size) < (1.0 + a.phi.values[idx]) / 2.0, 1.0, -1.0
    )
    if q.kind == "correlational":
        samples = q.phi.values[idx] * labels
    elif q.kind == "target_independent":
        samples = q.phi.values[idx]
    else:
        samples = np.where(labels > 0, q.pos[idx], q.neg[idx])
    return float(samples.mean())
