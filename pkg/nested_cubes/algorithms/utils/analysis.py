"""Continuity, boundary-chain and blow-up checks, and the dimension solvers"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterator, Optional, Sequence

import numpy as np

from .cubes import CubeKind, CubeTree, max_branching, reduce_children
from .dimension import (
    MEASURE_ASSOUAD,
    MEASURE_LOWER,
    SET_ASSOUAD,
    ExactDimension,
    boundary_fraction_value,
    check_spec_parameters,
    exact_dimension_spec,
    step_fractions,
)
from .errors import (
    DepthExceeded,
    InvalidParams,
    NotApplicable,
    ParamsOutOfRange,
    TargetBelowSetDimension,
    TargetNotBracketed,
    TooLarge,
)
from .mean_cycle import GeometricMean, optimal_mean_cycle
from .measures import build_mu_p
from .rationals import Number, as_fraction, log_fraction
from .tree_spec import ChildKind, TreeSpec

logger = logging.getLogger(__name__)

ETA_FLOOR = Fraction(1, 10**9)
MAX_BINOM_DEPTH = 4096
P_GRID_STEPS = 64
ETA_GRID_STEPS = 40
MAX_BISECTIONS = 200


@dataclass(frozen=True)
class CheckReport:
    passed: bool
    details: dict[str, Any] = field(default_factory=dict)
    witness: Optional[dict[str, Any]] = None
    rows: tuple[dict[str, Any], ...] = ()


def _pool_map(fn: Callable, items: Sequence, threads: int = 0) -> list:
    if threads == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads or None) as pool:
        return list(pool.map(fn, items))


def _ordered(p: Number, p2: Number, M: int) -> tuple[Fraction, Fraction]:
    p, p2 = as_fraction(p), as_fraction(p2)
    if p2 < p:
        p, p2 = p2, p
    if not 0 < p <= p2 <= Fraction(1, M):
        raise ParamsOutOfRange(f"need 0 < p <= p2 <= 1/{M}, got p={p}, p2={p2}")
    return p, p2


def modulus_base(p: Number, p2: Number, M: int) -> Fraction:
    """delta^(-epsilon) in exact form: the larger per-step change of the mass ratio"""
    p, p2 = _ordered(p, p2, M)
    return max(p2 / p, (1 - (M - 1) * p) / (1 - (M - 1) * p2))


def continuity_modulus(p: Number, p2: Number, M: int, delta: Number) -> float:
    """epsilon = max(log_delta p - log_delta p2, log_delta(1-(M-1)p2) - log_delta(1-(M-1)p))"""
    delta = as_fraction(delta)
    return log_fraction(modulus_base(p, p2, M)) / log_fraction(1 / delta)


def check_key_estimate(tree: CubeTree, p: Number, p2: Number) -> CheckReport:
    """Verify delta^(eps N) <= [mu_p(Q')/mu_p(Q)] / [mu_p2(Q')/mu_p2(Q)] <= delta^(-eps N)
    for every chain Q' below Q, exactly"""
    M = max_branching(tree)
    p, p2 = _ordered(p, p2, M)
    base = modulus_base(p, p2, M)
    epsilon = log_fraction(base) / log_fraction(1 / tree.delta)
    mu, nu = build_mu_p(tree, p), build_mu_p(tree, p2)

    # r(Q) = mu_p(Q) / mu_p2(Q), kept as ids of distinct exact values
    pairs = mu.mass_id * len(nu.table) + nu.mass_id
    distinct, r_id = np.unique(pairs, return_inverse=True)
    r_id = r_id.reshape(-1)
    r_values = [
        mu.table[int(u) // len(nu.table)] / nu.table[int(u) % len(nu.table)] for u in distinct
    ]
    r_logs = np.array([log_fraction(r) for r in r_values])
    log_base = log_fraction(base)

    worst, checked = None, 0
    descendants = np.arange(tree.n_cubes)
    ancestors = tree.parent.copy()
    for N in range(1, tree.depth + 1):
        keep = ancestors >= 0
        descendants, ancestors = descendants[keep], ancestors[keep]
        if len(descendants) == 0:
            break
        checked += len(descendants)
        lower, upper = r_id[descendants], r_id[ancestors]
        bound = base**N
        for a, b in set(zip(upper.tolist(), lower.tolist())):
            change = r_values[b] / r_values[a]
            if not 1 / bound <= change <= bound:
                idx = int(np.flatnonzero((upper == a) & (lower == b))[0])
                return CheckReport(
                    False,
                    {"epsilon": epsilon, "chains": checked},
                    {"Q": int(ancestors[idx]), "Q'": int(descendants[idx]), "N": N, "ratio": str(change)},
                )
        slack = N * log_base - np.abs(r_logs[lower] - r_logs[upper])
        i = int(np.argmin(slack))
        if worst is None or slack[i] < worst["slack"]:
            worst = {"Q": int(ancestors[i]), "Q'": int(descendants[i]), "N": N, "slack": float(slack[i])}
        ancestors = tree.parent[ancestors]

    logger.info("key estimate holds on %d chains (epsilon=%.6f)", checked, epsilon)
    return CheckReport(True, {"epsilon": epsilon, "chains": checked}, worst)


def dimension_continuity_check(
    spec: TreeSpec, pairs: Sequence[tuple[Number, Number]], threads: int = 0
) -> CheckReport:
    """|dim(p) - dim(p2)| <= continuity_modulus(p, p2) for both measure dimensions"""
    M = spec.max_branching

    def row(pair):
        p, p2 = _ordered(pair[0], pair[1], M)
        modulus = continuity_modulus(p, p2, M, spec.delta)
        out = []
        for kind in (MEASURE_ASSOUAD, MEASURE_LOWER):
            gap = abs(
                exact_dimension_spec(spec, p, None, kind).value
                - exact_dimension_spec(spec, p2, None, kind).value
            )
            out.append(
                {"p": p, "p2": p2, "kind": kind, "gap": gap, "modulus": modulus,
                 "ok": gap <= modulus + 1e-12}
            )
        return out

    rows = [r for chunk in _pool_map(row, list(pairs), threads) for r in chunk]
    failed = [r for r in rows if not r["ok"]]
    return CheckReport(not failed, {"pairs": len(pairs)}, failed[0] if failed else None, tuple(rows))


@dataclass(frozen=True)
class ChainProfile:
    chain: tuple[int, ...]
    boundary_set: frozenset[int]
    central_set: frozenset[int]

    @property
    def N(self) -> int:
        return len(self.chain) - 1

    @classmethod
    def of(cls, tree: CubeTree, chain: Sequence[int]) -> "ChainProfile":
        boundary = frozenset(
            i for i, c in enumerate(chain[1:], start=1) if tree.kind[c] == CubeKind.BOUNDARY
        )
        return cls(tuple(chain), boundary, frozenset(range(1, len(chain))) - boundary)


def boundary_chain_search(tree: CubeTree, N: int) -> tuple[ChainProfile, Fraction]:
    """A chain of N steps below the top cube with as many boundary steps as possible"""
    if not 1 <= N <= tree.depth:
        raise DepthExceeded(f"N={N} must lie in 1..{tree.depth}")
    is_boundary = (tree.kind == CubeKind.BOUNDARY).astype(np.int64)
    layers = [np.zeros(tree.n_cubes, dtype=np.int64)]
    for _ in range(N):
        layers.append(reduce_children(tree, is_boundary + layers[-1], np.maximum, fill=-1))

    chain = [tree.unit_cube]
    for step in range(N):
        kids = np.array(tree.children(chain[-1]))
        scores = is_boundary[kids] + layers[N - 1 - step][kids]
        chain.append(int(kids[int(np.argmax(scores))]))
    profile = ChainProfile.of(tree, chain)
    return profile, Fraction(len(profile.boundary_set), N)


def _boundary_count_table(spec: TreeSpec, N: int) -> list[int]:
    """counts[b]: depth-N offspring of the root reached with exactly b boundary steps"""
    current = {spec.root: {0: 1}}
    for _ in range(N):
        following: dict[int, dict[int, int]] = {}
        for t, by_count in current.items():
            for child in spec.types[t].children:
                extra = 1 if child.kind is ChildKind.BOUNDARY else 0
                slot = following.setdefault(child.type, {})
                for b, n in by_count.items():
                    slot[b + extra] = slot.get(b + extra, 0) + n
        current = following
    counts = [0] * (N + 1)
    for by_count in current.values():
        for b, n in by_count.items():
            counts[b] += n
    return counts


def binom_bound_check(
    spec: TreeSpec, beta: Number, N: int, admissible_only: bool = False
) -> CheckReport:
    """Count depth-N offspring against binom(N, floor(beta N)) * M^(beta N).

    The bound needs every chain to take at most beta*N boundary steps. With
    `admissible_only` the count is restricted to such chains instead.
    """
    beta = as_fraction(beta)
    if not 0 <= beta <= 1:
        raise InvalidParams("beta must lie in [0, 1]")
    if N < 1:
        raise InvalidParams("N must be positive")
    if N > MAX_BINOM_DEPTH:
        raise TooLarge(f"N={N} exceeds {MAX_BINOM_DEPTH}")
    counts = _boundary_count_table(spec, N)
    cap = beta * N
    most = max(b for b, n in enumerate(counts) if n)
    if most > cap and not admissible_only:
        raise NotApplicable(
            f"a chain takes {most} boundary steps out of {N}, more than beta*N={cap}"
        )
    allowed = math.floor(cap)
    offspring = sum(counts[: allowed + 1])
    M = spec.max_branching
    binomial = math.comb(N, allowed)
    share = Fraction(offspring, binomial)
    # share <= M^(cap) with cap = a/b  <=>  share^b <= M^a
    holds = share <= 1 or share**cap.denominator <= Fraction(M) ** cap.numerator
    details = {
        "offspring": offspring,
        "binomial": binomial,
        "bound": float(binomial * M ** float(cap)),
        "max_boundary": most,
        "admissible_only": admissible_only,
    }
    return CheckReport(holds, details, None if holds else {"N": N, "offspring": offspring})


def kappa(beta: Number, delta: Number) -> float:
    """Binary entropy of beta divided by log(1/delta)"""
    beta = float(beta)
    if not 0 <= beta <= 1:
        raise InvalidParams("beta must lie in [0, 1]")
    entropy = 0.0
    for q in (beta, 1 - beta):
        if q > 0:
            entropy -= q * math.log(q)
    return entropy / log_fraction(1 / as_fraction(delta))


def assouad_from_set_bound(spec: TreeSpec, beta: Optional[Number] = None) -> float:
    """kappa(beta) - beta * log_delta M, an upper bound for the set dimension when
    no chain exceeds a boundary fraction of beta"""
    beta_hat = boundary_fraction_value(spec)
    beta = beta_hat if beta is None else as_fraction(beta)
    if beta < beta_hat:
        raise NotApplicable(f"cycles reach a boundary fraction of {beta_hat} > {beta}")
    log_delta = log_fraction(spec.delta)
    return kappa(beta, spec.delta) - float(beta) * math.log(spec.max_branching) / log_delta


def proof_bound(spec: TreeSpec, p: Number, K: Optional[Number] = None) -> float:
    """dim_A X - log_delta K + log_delta(pM); K defaults to the least K with M <= K delta^(-dim_A X)"""
    p, _ = check_spec_parameters(spec, p)
    set_dim = exact_dimension_spec(spec, kind=SET_ASSOUAD).value
    log_delta = log_fraction(spec.delta)
    M = spec.max_branching
    if K is None:
        log_K = math.log(M) + set_dim * log_delta
    else:
        log_K = math.log(float(K))
    return set_dim - log_K / log_delta + log_fraction(p * M) / log_delta


def _at_least(value: ExactDimension, bound_num: int, bound_den: int, p: Fraction) -> bool:
    """value >= (a/b) * log_delta p, i.e. ratio^b >= (1/p)^(a * length)"""
    return value.ratio**bound_den >= (1 / p) ** (bound_num * value.length)


def blowup_check(spec: TreeSpec, p_list: Sequence[Number]) -> CheckReport:
    """dim_A mu_p >= beta-hat * log_delta p, and dim_A mu_p grows as p decreases"""
    beta_hat = boundary_fraction_value(spec)
    if beta_hat == 0:
        raise NotApplicable("the spec has no boundary cycles; the lower bound is trivial")
    rows, passed = [], True
    for p in p_list:
        p, _ = check_spec_parameters(spec, p)
        value = exact_dimension_spec(spec, p, None, MEASURE_ASSOUAD)
        bound = float(beta_hat) * log_fraction(p) / log_fraction(spec.delta)
        ok = _at_least(value, beta_hat.numerator, beta_hat.denominator, p)
        rows.append({"p": p, "value": float(value), "bound": bound, "ok": ok})
        passed &= ok

    ordered = sorted(rows, key=lambda r: r["p"], reverse=True)
    for upper, lower in zip(ordered, ordered[1:]):
        if lower["p"] == upper["p"]:
            continue
        a = exact_dimension_spec(spec, upper["p"], None, MEASURE_ASSOUAD)
        b = exact_dimension_spec(spec, lower["p"], None, MEASURE_ASSOUAD)
        grows = GeometricMean(a.ratio, a.length) < GeometricMean(b.ratio, b.length)
        lower["grows"] = grows
        passed &= grows
    failed = [r for r in rows if not r["ok"] or r.get("grows") is False]
    return CheckReport(passed, {"beta_hat": str(beta_hat)}, failed[0] if failed else None, tuple(rows))


def central_cycle(spec: TreeSpec, p: Fraction, eta: Sequence[Fraction]) -> ExactDimension:
    """Least exponent over cycles that only take central steps"""
    steps = step_fractions(spec, p, eta)
    edges = [
        (t, child.type, 1 / steps[t][i])
        for t, node in enumerate(spec.types)
        for i, child in enumerate(node.children)
        if child.kind is ChildKind.CENTRAL
    ]
    best = optimal_mean_cycle(edges, spec.root, maximize=False)
    return ExactDimension(best.ratio, best.length, 1 / spec.delta)


def lower_blowdown_check(spec: TreeSpec, p_list: Sequence[Number]) -> CheckReport:
    """dim_L mu_p never exceeds the all-central exponent, which vanishes as p decreases"""
    rows, passed = [], True
    for p in p_list:
        p, eta = check_spec_parameters(spec, p)
        value = exact_dimension_spec(spec, p, eta, MEASURE_LOWER)
        central = central_cycle(spec, p, eta)
        ok = GeometricMean(value.ratio, value.length) <= GeometricMean(central.ratio, central.length)
        rows.append({"p": p, "value": float(value), "central": float(central), "ok": ok})
        passed &= ok
    failed = [r for r in rows if not r["ok"]]
    return CheckReport(passed, {}, failed[0] if failed else None, tuple(rows))


@dataclass(frozen=True)
class SolveResult:
    p: Fraction
    eta: tuple[Fraction, ...]
    achieved: float
    target: float
    tol: float
    iterations: int
    kind: str


def _p_grid(spec: TreeSpec) -> Iterator[Fraction]:
    top = Fraction(1, spec.max_branching)
    for i in range(P_GRID_STEPS + 1):
        yield top / 2**i


def _eta_ray(J: int) -> Iterator[tuple[Fraction, ...]]:
    """Probability vectors from uniform toward (1, 0, ..., 0), every weight at least ETA_FLOOR"""
    for i in range(ETA_GRID_STEPS + 1):
        rest = max(Fraction(1, J) / 2**i, ETA_FLOOR)
        yield (1 - (J - 1) * rest,) + (rest,) * (J - 1)
        if rest == ETA_FLOOR:
            return


def _bisect(f, lo, hi, f_lo, tol) -> tuple[Any, float, int]:
    """Bisection on an exact parameter; lo and hi bracket a sign change"""
    iterations = 0
    mid, f_mid = lo, f_lo
    while iterations < MAX_BISECTIONS:
        iterations += 1
        mid = (lo + hi) / 2
        f_mid = f(mid)
        if abs(f_mid) < tol / 2:
            break
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return mid, f_mid, iterations


def _scan(points: list, f, tol: float):
    """First grid point hitting the target, or the first bracketing pair"""
    values = []
    for i, point in enumerate(points):
        value = f(point)
        values.append(value)
        if abs(value) < tol / 2:
            return ("hit", point, value), values
        if i and (values[i - 1] < 0) != (value < 0):
            return ("bracket", points[i - 1], points[i], values[i - 1]), values
    return None, values


def ivp_solve(
    spec: TreeSpec, s: float, kind: str = MEASURE_ASSOUAD, tol: float = 1e-6
) -> SolveResult:
    """Find p (and eta for the lower dimension) whose measure dimension equals s"""
    if kind not in (MEASURE_ASSOUAD, MEASURE_LOWER):
        raise InvalidParams(f"the solver handles measure dimensions, not {kind}")
    if tol <= 0:
        raise InvalidParams("tol must be positive")
    uniform = (Fraction(1, spec.J),) * spec.J

    if kind == MEASURE_ASSOUAD:
        set_dim = exact_dimension_spec(spec, kind=SET_ASSOUAD).value
        if s < set_dim - tol:
            raise TargetBelowSetDimension(
                f"target {s} lies below the set dimension {set_dim:.6f}", witness=set_dim
            )
    elif s <= 0:
        raise InvalidParams("lower-dimension targets must be positive")

    def along_p(p):
        return exact_dimension_spec(spec, p, uniform, kind).value - s

    grid = list(_p_grid(spec))
    found, values = _scan(grid, along_p, tol)
    if found is None and kind == MEASURE_LOWER and spec.J > 1:
        p_min = grid[-1]
        rays = list(_eta_ray(spec.J))

        def along_eta(t):
            return exact_dimension_spec(spec, p_min, _mix(rays, t), kind).value - s

        ticks = [Fraction(i) for i in range(len(rays))]
        found_eta, more = _scan(ticks, along_eta, tol)
        values += more
        if found_eta is not None:
            return _finish(spec, s, kind, tol, found_eta, along_eta, lambda t: (p_min, _mix(rays, t)))

    if found is None:
        realized = (min(values) + s, max(values) + s)
        logger.warning("target %s outside the realized range [%.6f, %.6f]", s, *realized)
        raise TargetNotBracketed(
            f"target {s} lies outside the realized range [{realized[0]:.6f}, {realized[1]:.6f}]",
            realized,
        )
    return _finish(spec, s, kind, tol, found, along_p, lambda p: (p, uniform))


def _mix(rays: list, t: Fraction) -> tuple[Fraction, ...]:
    """Piecewise-linear interpolation along the eta ray at position t"""
    i = min(int(t), len(rays) - 2) if len(rays) > 1 else 0
    if len(rays) == 1:
        return rays[0]
    w = t - i
    return tuple((1 - w) * a + w * b for a, b in zip(rays[i], rays[i + 1]))


def _finish(spec, s, kind, tol, found, f, params) -> SolveResult:
    if found[0] == "hit":
        point, value, iterations = found[1], found[2], 0
    else:
        _, lo, hi, f_lo = found
        point, value, iterations = _bisect(f, lo, hi, f_lo, tol)
    p, eta = params(point)
    logger.info("solved %s = %s with p=%s after %d bisections", kind, s, float(p), iterations)
    return SolveResult(p, tuple(eta), value + s, s, tol, iterations, kind)


@dataclass(frozen=True)
class SweepRow:
    p: Fraction
    dim_assouad: float
    dim_lower: float


def sweep(
    spec: TreeSpec,
    p_grid: Sequence[Number],
    eta: Optional[Sequence[Number]] = None,
    threads: int = 0,
) -> list[SweepRow]:
    """Exact Assouad and lower dimensions of mu_{p,eta} along a grid of p"""

    def row(p):
        p, weights = check_spec_parameters(spec, p, eta)
        return SweepRow(
            p,
            float(exact_dimension_spec(spec, p, weights, MEASURE_ASSOUAD)),
            float(exact_dimension_spec(spec, p, weights, MEASURE_LOWER)),
        )

    return _pool_map(row, list(p_grid), threads)

