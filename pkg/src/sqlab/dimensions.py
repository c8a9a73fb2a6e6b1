"""Hardness dimensions for SQ learning, computed on explicit truth tables.

The central quantity is the largest d such that d of the supplied functions
have pairwise |<f_i, f_j>_D| <= 1/d ("weak dimension", computed exactly via
max-clique on a threshold graph, or greedily as a lower bound).  On top of it:

* greedy covering numbers (upper bounds on the size of a set of bounded
  functions gamma-correlating with every member);
* a norm-scaling lower bound converting the weak dimension of arbitrary
  bounded sets into a covering lower bound;
* shifted sets (class members minus a reference psi, keeping only members
  disagreeing with sign(psi) on more than eps mass) and the induced
  shift-parameterized dimension estimate;
* the parity construction: all parities on at most k of n variables, each
  within L1 distance 1 - 2^(1-k) of its monotone conjunction, pairwise
  orthogonal under the uniform distribution.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import (
    InvariantBreachError,
    NormRangeError,
    PoolInsufficientError,
    UsageError,
)
from .fnspace import (
    ATOL,
    BoolFn,
    Domain,
    RealFn,
    dist_uniform,
    disagreement,
    l1_distance,
    make_conjunction,
    make_parity,
    sign_of,
)

SHIFT_BOUND = 2.0  # shifted class members live in [-2, 2]


class FnSet:
    """Ordered list of real-valued tables on a shared domain, bounded by 2."""

    __slots__ = ("domain", "tables", "labels", "_matrix")

    def __init__(self, domain, tables, allow_empty=False, labels=None):
        tables = [np.asarray(t, dtype=np.float64) for t in tables]
        if not tables and not allow_empty:
            raise UsageError("FnSet needs at least one function")
        for t in tables:
            if t.shape != (domain.size,):
                raise UsageError("table shape must match the domain")
            if np.abs(t).max(initial=0.0) > SHIFT_BOUND + ATOL:
                raise UsageError(f"entries must lie in [-{SHIFT_BOUND}, {SHIFT_BOUND}]")
        self.domain = domain
        self.tables = tables
        self.labels = list(labels) if labels is not None else list(range(len(tables)))
        self._matrix = None

    @classmethod
    def from_fns(cls, fns):
        fns = list(fns)
        if not fns:
            raise UsageError("cannot infer a domain from an empty list")
        return cls(fns[0].domain, [f.values for f in fns])

    def __len__(self):
        return len(self.tables)

    @property
    def matrix(self):
        if self._matrix is None:
            self._matrix = (
                np.stack(self.tables)
                if self.tables
                else np.empty((0, self.domain.size))
            )
        return self._matrix


@dataclass
class DimReport:
    value: int
    certainty: str  # exact | lower-bound | upper-bound
    witness: list
    params: dict = field(default_factory=dict)

    def as_record(self):
        return {
            "value": self.value,
            "certainty": self.certainty,
            "witness": list(self.witness),
            "params": dict(self.params),
        }


def _abs_gram(f, d):
    g = np.abs(kernels.gram(f.matrix, d.weights))
    np.fill_diagonal(g, 0.0)
    return g


def _check_pairwise(absgram, witness, threshold):
    for a in range(len(witness)):
        for b in range(a + 1, len(witness)):
            v = absgram[witness[a], witness[b]]
            if v > threshold + ATOL:
                raise InvariantBreachError(
                    f"witness pair ({witness[a]}, {witness[b]}) correlates at "
                    f"{v}, over threshold {threshold}")


def sq_dim(f, d, mode="exact", cap=30):
    """Largest d with d functions pairwise |<.,.>_D| <= 1/d.

    Exact mode scans candidate values downward from |f|, looking for a
    d-clique in the graph keeping edges with |correlation| <= 1/d; greedy mode
    inserts functions in set order, re-testing the tightened threshold, and is
    only a lower bound.
    """
    if mode not in ("exact", "greedy"):
        raise UsageError(f"mode must be 'exact' or 'greedy', got {mode!r}")
    certainty = "exact" if mode == "exact" else "lower-bound"
    k = len(f)
    if k == 0:
        return DimReport(0, certainty, [], {"mode": mode})
    absgram = _abs_gram(f, d)
    if mode == "exact":
        if k > cap:
            raise UsageError(f"exact mode handles at most {cap} functions, got {k}")
        witness = [0]
        for cand in range(k, 1, -1):
            adj = absgram <= 1.0 / cand + ATOL
            np.fill_diagonal(adj, False)
            size, verts = kernels.max_clique(adj)
            if size >= cand:
                witness = list(verts[:cand])
                break
        value = len(witness)
    else:
        witness = []
        for j in range(k):
            cand = witness + [j]
            t = 1.0 / len(cand)
            if all(
                absgram[cand[a], cand[b]] <= t + ATOL
                for a in range(len(cand))
                for b in range(a + 1, len(cand))
            ):
                witness = cand
        value = len(witness)
    _check_pairwise(absgram, witness, 1.0 / value)
    return DimReport(value, certainty, witness, {"mode": mode})


def extend_witness(f, d, witness, threshold):
    """Greedily extend an index set to inclusion-maximal at a fixed threshold."""
    absgram = _abs_gram(f, d)
    out = list(witness)
    for j in range(len(f)):
        if j in out:
            continue
        if all(absgram[j, c] <= threshold + ATOL for c in out):
            out.append(j)
    return out


def sqd_upper(f, d, gamma, pool):
    """Greedy covering number: pool functions gamma-correlating with all of f.

    Returns the chosen pool indices as an upper bound on the smallest
    approximating set restricted to the pool.
    """
    if gamma <= 0:
        raise UsageError("gamma must be positive")
    if np.abs(pool.matrix).max(initial=0.0) > 1 + ATOL:
        raise UsageError("pool functions must map into [-1, 1]")
    k = len(f)
    if k == 0:
        return DimReport(0, "upper-bound", [], {"gamma": gamma})
    if len(pool) == 0:
        raise PoolInsufficientError(f"empty pool cannot cover {k} members")
    cov = np.abs(pool.matrix @ (f.matrix * d.weights).T) >= gamma - ATOL
    uncovered = np.ones(k, dtype=bool)
    chosen = []
    while uncovered.any():
        counts = cov[:, uncovered].sum(axis=1)
        j = int(np.argmax(counts))
        if counts[j] == 0:
            missing = [f.labels[i] for i in np.where(uncovered)[0]]
            raise PoolInsufficientError(
                f"pool cannot cover members {missing} at gamma={gamma}")
        chosen.append(j)
        uncovered &= ~cov[j]
    return DimReport(len(chosen), "upper-bound", chosen, {"gamma": gamma})


def sqd_lower_scaling(f, d, m, M):
    """Covering lower bound for sets with norms in [m, M].

    With dim the exact weak dimension, a set of functions gamma-correlating
    with every member needs >= (dim*m^2)^(1/3)/2 members at
    gamma = M*(dim*m^2)^(-1/3).
    """
    if not (M >= 1 >= m > 0):
        raise UsageError(f"need M >= 1 >= m > 0, got m={m}, M={M}")
    norms = np.sqrt(np.maximum(np.diag(kernels.gram(f.matrix, d.weights)), 0.0))
    for i, nm in enumerate(norms):
        if nm < m - ATOL or nm > M + ATOL:
            raise NormRangeError(
                f"member {f.labels[i]} has norm {nm}, outside [{m}, {M}]")
    base = sq_dim(f, d, mode="exact")
    scale = (base.value * m * m) ** (1.0 / 3.0)
    bound = scale / 2.0
    return DimReport(
        math.ceil(bound - ATOL),
        "lower-bound",
        base.witness,
        {"gamma": M / scale, "bound": bound, "base_dim": base.value},
    )


def shifted_set(c, psi, d, eps):
    """Members of c disagreeing with sign(psi) on > eps mass, shifted by -psi.

    May be empty (that is a signal, not an error).  Every member keeps norm
    >= sqrt(eps): each point of disagreement contributes at least 1 to the
    squared difference.
    """
    if not 0 < eps < 1:
        raise UsageError(f"eps must be in (0, 1), got {eps}")
    s = sign_of(psi)
    tables, labels = [], []
    for i, fn in enumerate(c):
        if disagreement(fn, s, d) > eps:
            tables.append(fn.values - psi.values)
            labels.append(i)
    return FnSet(psi.domain, tables, allow_empty=True, labels=labels)


def sq_sdim_estimate(c, d, eps, psi_family):
    """Max over supplied psi of the shifted set's weak dimension (lower bound)."""
    psi_family = list(psi_family)
    if not psi_family:
        raise UsageError("psi_family must be nonempty")
    best_value, best_idx, best_witness = 0, None, []
    for idx, psi in enumerate(psi_family):
        fs = shifted_set(c, psi, d, eps)
        if len(fs) == 0:
            continue
        rep = sq_dim(fs, d, mode="exact")
        if rep.value > best_value:
            best_value = rep.value
            best_idx = idx
            best_witness = [fs.labels[j] for j in rep.witness]
    return DimReport(
        best_value,
        "lower-bound",
        best_witness,
        {"eps": eps, "psi_index": best_idx, "family_size": len(psi_family)},
    )


def default_psi_family(c, rng, n_random=5):
    """Zero, every class member, and a few random tables -- shift candidates."""
    domain = c.domain
    family = [RealFn(domain, np.zeros(domain.size))]
    family.extend(m.as_real() for m in c)
    for _ in range(n_random):
        family.append(RealFn(domain, rng.uniform(-1.0, 1.0, domain.size)))
    return family


def parity_witness(n, k, gamma_target=None):
    """All parities on 1..k of n variables, with their conjunction-distance check.

    Each parity chi_T sits at L1 distance exactly 1 - 2^(1-|T|) from the
    monotone conjunction on T (disagreement 1/2 - 2^(-|T|)), and distinct
    parities are orthogonal under uniform, so the whole set is its own
    dimension witness: value = sum_{1<=i<=k} C(n, i).
    """
    if k > n:
        raise UsageError(f"k must be at most n, got k={k} > n={n}")
    if k < 1:
        raise UsageError("k must be at least 1")
    domain = Domain(n)
    uniform = dist_uniform(domain)
    fns = []
    for bits in range(1, 2 ** n):
        size = int(bin(bits).count("1"))
        if size > k:
            continue
        subset = [i + 1 for i in range(n) if bits >> i & 1]
        chi = make_parity(domain, subset)
        conj = make_conjunction(domain, subset)
        dis = disagreement(chi, conj, uniform)
        l1 = l1_distance(chi, conj, uniform)
        if abs(dis - (0.5 - 2.0 ** -size)) > ATOL:
            raise InvariantBreachError(
                f"parity on {subset}: disagreement {dis} != 1/2 - 2^-{size}")
        if abs(l1 - (1.0 - 2.0 ** (1 - size))) > ATOL:
            raise InvariantBreachError(
                f"parity on {subset}: L1 distance {l1} != 1 - 2^(1-{size})")
        fns.append(chi)
    fs = FnSet.from_fns(fns)
    absgram = _abs_gram(fs, uniform)
    witness = list(range(len(fs)))
    _check_pairwise(absgram, witness, 1.0 / len(fs))
    if gamma_target is not None:
        _check_pairwise(absgram, witness, gamma_target)
    report = DimReport(
        len(fs),
        "exact",
        witness,
        {"n": n, "k": k, "l1_radius": 1.0 - 2.0 ** (1 - k)},
    )
    return fs, report
