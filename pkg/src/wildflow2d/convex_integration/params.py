"""Scheme parameters and the constraint checker.

Frequencies lambda_q = a^(b^q) overflow floats for any admissible (a, b), so
every constraint is evaluated on logarithms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..building_blocks import BlockSpec, direction_set, product_support, intermittent_modes


class ConstraintViolation(ValueError):
    def __init__(self, names: list[str]):
        self.names = list(names)
        super().__init__("violated: " + "; ".join(self.names))


def m_star(m: float) -> float:
    return 2 * m - 1 if m > 0.5 else 0.0


def eta_interval(m: float) -> tuple[float, float]:
    ms = m_star(m)
    return (1 - ms) / 16, (1 - ms) / 8


def default_eta(m: float, max_den: int = 1000) -> Fraction:
    """Admissible rational with the smallest denominator, closest to the interval midpoint."""
    lo, hi = eta_interval(m)
    mid = 0.5 * (lo + hi)
    for d in range(1, max_den + 1):
        cands = [Fraction(p, d) for p in range(math.floor(lo * d), math.ceil(hi * d) + 1)]
        cands = [c for c in cands if lo < c <= hi]
        if cands:
            return min(cands, key=lambda c: (abs(float(c) - mid), c))
    raise ValueError("no admissible rational found")


def p_star(eta: float, alpha: float) -> float:
    return 16 * (1 - 6 * eta) / (300 * alpha + 16 * (1 - 7 * eta))


def m_L(L: float) -> float:
    return math.sqrt(3.0) * L**0.25 * math.exp(0.5 * L**0.25)


@dataclass(frozen=True)
class LevelBlocks:
    lam: float
    sigma: float
    r: int
    mu: float
    notes: tuple[str, ...] = ()

    def spec(self, zeta=None) -> BlockSpec:
        return BlockSpec(zeta or direction_set()[0], self.lam, self.sigma, self.r, self.mu)


def pair_means_vanish(lam: int, lam_sigma: int, r: int) -> bool:
    """No non-antipodal product of two blocks has a nonzero mean (k = 0 absent from the sumset)."""
    spec = BlockSpec(direction_set()[0], lam, lam_sigma / lam, r, 1.0, gap=0.0)
    dirs = direction_set()
    supp = {d: intermittent_modes(spec.with_direction(d), 0.0).ks for d in dirs}
    for i, d in enumerate(dirs):
        for e in dirs[i:]:
            if d == -e:
                continue
            s = product_support(supp[d], supp[e])
            if ((s[:, 0] == 0) & (s[:, 1] == 0)).any():
                return False
    return True


@dataclass(frozen=True)
class ParamSet:
    m: float
    L: float
    a: int
    b: int
    beta: float
    c_R: float = 1e-4
    eta: Fraction | None = None
    regime: str = "additive"
    mode: str = "demo"
    lambdas: tuple[float, ...] | None = None
    block_override: dict | None = None
    violations: tuple[str, ...] = field(default=(), compare=False)

    @property
    def m_star(self) -> float:
        return m_star(self.m)

    @property
    def alpha(self) -> float:
        return (1 - self.m) / 400

    @property
    def eta_value(self) -> float:
        return float(self.eta)

    @property
    def p_star(self) -> float:
        return p_star(self.eta_value, self.alpha)

    @property
    def m_L(self) -> float:
        return m_L(self.L)

    def log_lam(self, q: int) -> float:
        if self.lambdas is not None and q < len(self.lambdas):
            return math.log(self.lambdas[q])
        return self.b**q * math.log(self.a)

    def lam(self, q: int) -> float:
        if self.lambdas is not None and q < len(self.lambdas):
            return float(self.lambdas[q])
        if self.b**q * math.log10(self.a) < 300:
            return float(self.a ** (self.b**q))
        return math.exp(self.log_lam(q))

    def delta(self, q: int) -> float:
        return math.exp(-2 * self.beta * self.log_lam(q))

    def ell(self, q: int) -> float:
        """Mollification width used when stepping from level q to q+1."""
        return math.exp(-1.5 * self.alpha * self.log_lam(q + 1) - 2 * self.log_lam(q))

    def M0(self, t):
        t = np.asarray(t, dtype=float)
        if self.regime == "additive":
            return self.L**4 * np.exp(4 * self.L * t)
        return np.exp(4 * self.L * t + 2 * self.L)

    def blocks(self, q: int) -> LevelBlocks:
        """Block parameters at level q (the level being built).

        Exact formulas give r = lam^(1-6 eta), mu = lam^(1-4 eta), sigma = lam^(2 eta - 1).
        At desk scale these are rounded: lam*sigma to the nearest positive multiple
        of 10 and r to the nearest positive integer, then lowered until no
        non-antipodal block product has a nonzero mean. Each adjustment is noted.
        """
        lam = self.lam(q)
        eta = self.eta_value
        notes = []
        r_exact = lam ** (1 - 6 * eta)
        ls_exact = lam ** (2 * eta)
        mu = lam ** (1 - 4 * eta)
        over = self.block_override or {}
        if "lam_sigma" in over:
            ls = int(over["lam_sigma"])
        elif "sigma" in over:
            ls = int(round(lam * over["sigma"]))
        else:
            ls = max(10, 10 * int(round(ls_exact / 10)))
        if abs(ls - ls_exact) > 1e-9 * ls_exact:
            notes.append(f"lam*sigma {ls_exact:.6g} -> {ls}")
        if "r" in over:
            r = int(over["r"])
        else:
            r = max(1, int(round(r_exact)))
            if abs(r - r_exact) > 1e-9 * r_exact:
                notes.append(f"r {r_exact:.6g} -> {r}")
            lam_i = int(round(lam))
            while r > 1 and not pair_means_vanish(lam_i, ls, r):
                r -= 1
                notes.append(f"r lowered to {r} so block products keep zero mean")
        if "mu" in over:
            mu = float(over["mu"])
        return LevelBlocks(lam, ls / lam, r, mu, tuple(notes))

    def report(self) -> dict:
        return {
            "m": self.m,
            "m_star": self.m_star,
            "eta": str(self.eta),
            "alpha": self.alpha,
            "p_star": self.p_star,
            "a": self.a,
            "b": self.b,
            "beta": self.beta,
            "L": self.L,
            "c_R": self.c_R,
            "regime": self.regime,
            "mode": self.mode,
            "violations": list(self.violations),
        }


def check_constraints(ps: ParamSet) -> list[str]:
    """Names of the violated strict constraints."""
    out = []
    eta = ps.eta
    lo, hi = eta_interval(ps.m)
    if not (lo < eta <= hi):
        out.append("eta in ((1-m*)/16, (1-m*)/8]")
    alpha = ps.alpha
    if not ps.b > 16 / alpha:
        out.append("b > 16/α")
    if not alpha > 16 * ps.beta * ps.b:
        out.append("α > 16βb")
    d1 = (1 - 6 * eta).denominator if isinstance(eta, Fraction) else None
    d2 = (2 * eta).denominator if isinstance(eta, Fraction) else None
    if d1 is None or ps.b % (d1 * d2) != 0:
        out.append("b multiple of d1*d2")
    # l lam_q^4 <= lam_{q+1}^{-alpha} and 1/l <= lam_{q+1}^{2 alpha} at q = 0
    log_l = -1.5 * alpha * ps.log_lam(1) - 2 * ps.log_lam(0)
    if not log_l + 4 * ps.log_lam(0) <= -alpha * ps.log_lam(1) + 1e-12:
        out.append("l*λ_q^4 <= λ_{q+1}^-α")
    if not -log_l <= 2 * alpha * ps.log_lam(1) + 1e-12:
        out.append("l^-1 <= λ_{q+1}^(2α)")
    log_a2bb = 2 * ps.beta * ps.b * math.log(ps.a)
    if not math.log(9) < log_a2bb:
        out.append("9 < a^(2βb)")
    if ps.regime == "additive":
        if not math.log(50 * math.pi**2) + log_a2bb <= math.log(ps.c_R * ps.L):
            out.append("50π²a^(2βb) <= c_R L")
        if not ps.L <= ps.a**4 * math.pi - 1:
            out.append("L <= a^4 π - 1")
    else:
        L = ps.L
        log_rhs = math.log(ps.c_R) + L - 0.5 * L**0.25 - math.log(L**0.25 * (2 * L + 0.5 + math.pi))
        if not math.log(72 * math.sqrt(3)) < log_rhs:
            out.append("72√3 < c_R e^(L-L^(1/4)/2)/(L^(1/4)(2L+1/2+π))")
        if not math.log(8 * math.sqrt(3)) + log_a2bb <= log_rhs:
            out.append("8√3a^(2βb) <= c_R e^(L-L^(1/4)/2)/(L^(1/4)(2L+1/2+π))")
        if not L <= ps.a**4 * math.pi - 1:
            out.append("L <= a^4 π - 1")
    ps_val = p_star(float(eta), alpha)
    if not 1 < ps_val < 2:
        out.append("p* in (1,2)")
    return out


def derive_parameters(
    m: float,
    L: float,
    a: int,
    b: int,
    beta: float,
    mode: str = "demo",
    *,
    c_R: float = 1e-4,
    eta=None,
    regime: str = "additive",
    lambdas=None,
    block_override: dict | None = None,
) -> ParamSet:
    """Build a ParamSet; strict mode raises ConstraintViolation, demo mode records."""
    if not 0 < m < 1:
        raise ValueError("m must lie in (0, 1)")
    if int(a) != a or a <= 0 or int(a) % 10:
        raise ValueError("a must be a positive multiple of 10")
    if mode not in ("strict", "demo"):
        raise ValueError(f"unknown mode {mode!r}")
    if regime not in ("additive", "multiplicative"):
        raise ValueError(f"unknown regime {regime!r}")
    eta = default_eta(m) if eta is None else Fraction(eta).limit_denominator(10**6)
    ps = ParamSet(
        m=m, L=L, a=int(a), b=int(b), beta=beta, c_R=c_R, eta=eta, regime=regime, mode=mode,
        lambdas=tuple(lambdas) if lambdas is not None else None,
        block_override=dict(block_override) if block_override else None,
    )
    bad = check_constraints(ps)
    if mode == "strict" and bad:
        raise ConstraintViolation(bad)
    return ParamSet(**{**ps.__dict__, "violations": tuple(bad)})
