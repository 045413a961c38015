"""Small cancellation certification, critical exponents and ledger propagation.

Quantities such as sinh(rho0) overflow doubles by astronomical margins for
the canonical constants, so every comparison here is done between natural
logarithms.  All inequalities are non-strict except the injectivity radius
display of the induction step, which stays strict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import config
from .coneoff import BOLD_DELTA_NUM, FamilyStats
from .errors import HypothesisFailure, InvalidInput, UnsoundLedger
from .invariants import InvariantLedger
from .logspace import Magnitude, log_sinh
from .metric_core import lcm

LOG_4PI = math.log(4 * math.pi)
LOG_PI = math.log(math.pi)


def _log(x: float) -> float:
    return -math.inf if x == 0 else math.log(x)


@dataclass(frozen=True)
class Constants:
    bold_delta: float
    L_S: float
    delta0: float
    Delta0: float
    rho0: float
    delta1: float
    toy: bool

    def __post_init__(self):
        for name in ("bold_delta", "L_S", "delta0", "Delta0", "rho0", "delta1"):
            if not getattr(self, name) > 0:
                raise InvalidInput(f"constant {name} must be positive")
        if not self.toy:
            if not self.rho0 > 1e20 * self.L_S * self.bold_delta:
                raise InvalidInput("canonical mode needs rho0 > 1e20 L_S bold_delta")
            if not max(self.delta0, self.Delta0) < 1e-10 * self.bold_delta:
                raise InvalidInput("canonical mode needs delta0, Delta0 < 1e-10 bold_delta")
            if not math.isclose(self.delta1, 64e4 * self.bold_delta, rel_tol=1e-12):
                raise InvalidInput("canonical mode needs delta1 = 64e4 bold_delta")

    @property
    def mode(self) -> str:
        return "toy" if self.toy else "canonical"

    @classmethod
    def canonical(cls, bold_delta: float = BOLD_DELTA_NUM, L_S: float = 500.0) -> "Constants":
        return cls(bold_delta, L_S, 0.5e-10 * bold_delta, 0.5e-10 * bold_delta, 2e20 * L_S * bold_delta,
                   64e4 * bold_delta, False)

    @classmethod
    def default_toy(cls) -> "Constants":
        return cls(bold_delta=1.0, L_S=500.0, delta0=0.01, Delta0=1.0, rho0=5.0, delta1=0.001, toy=True)

    @classmethod
    def from_json(cls, obj: dict) -> "Constants":
        mode = obj.get("mode", "toy")
        if mode not in ("toy", "canonical"):
            raise InvalidInput(f"unknown constants mode {mode!r}")
        if mode == "canonical":
            extra = set(obj) - {"mode", "bold_delta", "L_S"}
            if extra:
                raise InvalidInput(f"canonical constants are derived; unexpected fields {sorted(extra)}")
            return cls.canonical(float(obj.get("bold_delta", BOLD_DELTA_NUM)), float(obj.get("L_S", 500.0)))
        base = cls.default_toy()
        try:
            return cls(*(float(obj.get(k, getattr(base, k)))
                         for k in ("bold_delta", "L_S", "delta0", "Delta0", "rho0", "delta1")), True)
        except (TypeError, ValueError) as exc:
            raise InvalidInput(f"malformed constants: {exc}") from exc

    def to_json(self) -> dict:
        return {"mode": self.mode, "bold_delta": self.bold_delta, "L_S": self.L_S, "delta0": self.delta0,
                "Delta0": self.Delta0, "rho0": self.rho0, "delta1": self.delta1}

    # frequently used logarithms
    @property
    def log_sinh_rho0(self) -> float:
        return log_sinh(self.rho0)

    @property
    def log_sinh_38(self) -> float:
        return log_sinh(38 * self.delta1)

    @property
    def log_a_step(self) -> float:
        """log(pi sinh(2 L_S delta1))."""
        return LOG_PI + log_sinh(2 * self.L_S * self.delta1)


@dataclass(frozen=True)
class Check:
    name: str
    lhs: float
    rhs: float
    passed: bool
    strict: bool = False
    in_log: bool = False

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    def to_json(self) -> dict:
        def num(x):
            return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")

        return {"name": self.name, "lhs": num(self.lhs), "rhs": num(self.rhs), "pass": self.passed,
                "strict": self.strict, "log_scale": self.in_log}


def _leq(name, lhs, rhs, in_log=False, exact=False) -> Check:
    eps = 0.0 if exact else config.tol()
    slack = eps if in_log else eps * max(1.0, abs(rhs) if math.isfinite(rhs) else 1.0)
    return Check(name, lhs, rhs, bool(lhs <= rhs + slack), False, in_log)


def _lt(name, lhs, rhs, in_log=False) -> Check:
    return Check(name, lhs, rhs, bool(lhs < rhs), True, in_log)


@dataclass
class Certification:
    checks: list
    mode: str
    claims: list = field(default_factory=list)

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_json(self) -> dict:
        return {"overall": self.overall, "mode": self.mode, "checks": [c.to_json() for c in self.checks],
                "claims": list(self.claims) if self.overall else []}


# small cancellation ----------------------------------------------------------------


def certify_small_cancellation(delta: float, rho: float, stats: FamilyStats, consts: Constants) -> Certification:
    """Evaluate delta <= delta0, rho >= rho0, Delta(Q) <= Delta0 and T(Q) >= 8 pi sinh rho."""
    if not rho > 0:
        raise InvalidInput("rho must be positive")
    log_T = _log(stats.TQ) if math.isfinite(stats.TQ) else math.inf
    checks = [
        _leq("delta <= delta0", delta, consts.delta0),
        _leq("rho0 <= rho", consts.rho0, rho),
        _leq("DeltaQ <= Delta0", stats.DeltaQ, consts.Delta0),
        _leq("8 pi sinh rho <= TQ", math.log(8 * math.pi) + log_sinh(rho), log_T, in_log=True),
    ]
    claims = [
        f"the quotient of the cone-off by the normal closure is {64e4 * consts.bold_delta:g}-hyperbolic",
        "each rotation group's stabilizer embeds in the quotient",
    ]
    return Certification(checks, consts.mode, claims)


# rescaling parameter and critical exponent --------------------------------------------------


def log_lambda_n(n: float, consts: Constants) -> float:
    if not n >= 1:
        raise InvalidInput("lambda_n needs n >= 1")
    return (LOG_4PI - math.log(consts.delta1)
            + 0.5 * (math.log(2.0) + consts.log_sinh_rho0 + consts.log_sinh_38 - math.log(n) - math.log(consts.L_S)))


def lambda_n(n: int, consts: Constants) -> Magnitude:
    return Magnitude(log_lambda_n(n, consts))


def _lambda_caps(consts: Constants, nu0: int) -> dict[str, tuple[float, bool]]:
    """log of the largest admissible lambda per inequality, and whether it is strict."""
    d1 = consts.delta1
    a_step = consts.log_a_step
    # (nu0 + 5) pi sinh(2 L_S d1) + 90 d1, in log space
    log_left = float((Magnitude(a_step) * (nu0 + 5) + 90 * d1).log)
    return {
        "lambda delta1 <= delta0": (math.log(consts.delta0) - math.log(d1), False),
        "lambda ((nu0+5) pi sinh(2 L_S delta1) + 90 delta1) <= min(Delta0, pi sinh(2 L_S delta1))":
            (min(math.log(consts.Delta0), a_step) - log_left, False),
        "lambda L_S delta1^2 / (4 pi sinh(38 delta1)) < delta1":
            (LOG_4PI + consts.log_sinh_38 - math.log(consts.L_S) - math.log(d1), True),
        "lambda rho0 <= rho0": (0.0, False),
    }


def exponent_checks(n: int, consts: Constants, nu0: int) -> list[Check]:
    lam = log_lambda_n(n, consts)
    out = []
    for name, (cap, strict) in _lambda_caps(consts, nu0).items():
        # closed-form arithmetic: no measurement tolerance
        out.append(_lt(name, lam, cap, True) if strict else _leq(name, lam, cap, True, exact=True))
    return out


def log_critical_exponent_n0(consts: Constants, nu0: int) -> tuple[float, str]:
    """Closed-form log of the real threshold, and the binding inequality."""
    if nu0 < 0:
        raise InvalidInput("nu0 must be non-negative")
    base = LOG_4PI - math.log(consts.delta1) + 0.5 * (
        math.log(2.0) + consts.log_sinh_rho0 + consts.log_sinh_38 - math.log(consts.L_S))
    # lambda_n = exp(base) / sqrt(n) <= exp(cap)  <=>  log n >= 2 (base - cap)
    need = {name: 2 * (base - cap) for name, (cap, _) in _lambda_caps(consts, nu0).items()}
    binding = max(need, key=need.get)
    return max(math.log(100), need[binding]), binding


def critical_exponent_n0(consts: Constants, nu0: int, n_max: int = 10 ** 30) -> int:
    """Smallest n >= 100 satisfying the four inequalities on lambda_n."""
    log_n, binding = log_critical_exponent_n0(consts, nu0)
    if log_n > math.log(n_max):
        raise HypothesisFailure(f"no n <= {n_max} works; binding constraint: {binding} (log n0 ~ {log_n:.6g})")

    def ok(n: int) -> bool:
        return all(c.passed for c in exponent_checks(n, consts, nu0))

    guess = max(100, int(math.exp(log_n)))
    lo, hi = 100, guess
    while not ok(hi):
        lo, hi = hi, hi * 2
        if hi > n_max:
            raise HypothesisFailure(f"no n <= {n_max} works; binding constraint: {binding}")
    if ok(lo):
        return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


# induction hypotheses -------------------------------------------------------------------------


def log_rinj_threshold(n1: int, consts: Constants) -> float:
    """log of delta1 sqrt(2 L_S sinh rho0 / (n1 sinh(38 delta1)))."""
    return math.log(consts.delta1) + 0.5 * (math.log(2 * consts.L_S) + consts.log_sinh_rho0
                                            - math.log(n1) - consts.log_sinh_38)


def log_A_threshold(nu0: int, consts: Constants) -> float:
    return math.log(nu0 + 5) + consts.log_a_step


def _require_sound(ledger: InvariantLedger) -> None:
    ledger.require("e", ("exact", "divides"), "induction hypotheses")
    ledger.require("nu", ("exact", "upper"), "induction hypotheses")
    ledger.require("A", ("exact", "upper"), "induction hypotheses")
    ledger.require("rinj", ("exact", "lower"), "induction hypotheses")
    ledger.require("delta", ("exact", "upper"), "induction hypotheses")


def check_induction_hypotheses(ledger: InvariantLedger, n1: int, n: int, consts: Constants,
                               nu0: int | None = None, n0: int | None = None) -> Certification:
    _require_sound(ledger)
    nu0 = int(ledger.nu) if nu0 is None else int(nu0)
    checks = [
        Check("n odd", n % 2, 1, n % 2 == 1),
        _leq("n1 <= n", n1, n),
        Check("e divides n", int(ledger.e), n, n % int(ledger.e) == 0),
        _leq("nu <= nu0", ledger.nu, nu0),
        _leq("A <= (nu0+5) pi sinh(2 L_S delta1)", ledger.A.log, log_A_threshold(nu0, consts), in_log=True),
        _leq("delta1 sqrt(2 L_S sinh rho0 / (n1 sinh(38 delta1))) <= rinj", log_rinj_threshold(n1, consts),
             ledger.rinj.log, in_log=True),
        Check("no involution", 0, 0, ledger.no_involution is True),
        _leq("delta <= delta1", ledger.delta, consts.delta1),
    ]
    if n0 is not None:
        checks.insert(1, _leq("n0 <= n1", n0, n1))
    claims = [f"the quotient acts on a {consts.delta1:g}-hyperbolic space and satisfies the same hypotheses",
              "stable lengths contract by lambda_{n1}"]
    return Certification(checks, consts.mode, claims)


def choose_n1(ledger: InvariantLedger, consts: Constants, n0: int) -> int:
    """Smallest n1 >= n0 for which the ledger's rinj meets the injectivity threshold.

    The comparison is exact (no tolerance), so the answer is always
    admissible.  Beyond 2**50 neighbouring integers are indistinguishable in
    double precision; there n1 is rounded up by a relative 1e-12 instead.
    """
    if ledger.rinj.log == -math.inf:
        raise HypothesisFailure("rinj is zero; no n1 works")
    log_need = 2 * (math.log(consts.delta1) - ledger.rinj.log) + math.log(2 * consts.L_S) \
        + consts.log_sinh_rho0 - consts.log_sinh_38
    if log_need > 200:
        raise HypothesisFailure(f"n1 too large to represent (log n1 ~ {log_need:.6g})")
    need = math.exp(log_need)
    if need > 2.0 ** 50:
        return max(n0, math.ceil(need * (1 + 1e-12)))
    n1 = max(n0, math.floor(need), 1)
    while n1 > max(n0, 1) and log_rinj_threshold(n1 - 1, consts) <= ledger.rinj.log:
        n1 -= 1
    while log_rinj_threshold(n1, consts) > ledger.rinj.log:
        n1 += 1
    return n1


def rescale_ledger(ledger: InvariantLedger, factor: float) -> InvariantLedger:
    """Ledger of the space with its metric multiplied by ``factor``."""
    if not factor > 0:
        raise InvalidInput("rescaling factor must be positive")
    return ledger.replace(delta=ledger.delta * factor, rinj=ledger.rinj * factor, A=ledger.A * factor,
                          notes={"rescale": f"metric multiplied by {factor:g}"})


def rescale_for_induction(ledger: InvariantLedger, consts: Constants, nu0: int) -> tuple[InvariantLedger, float]:
    """Shrink the metric just enough for delta <= delta1 and the A bound."""
    logs = [0.0]
    if ledger.delta > 0:
        logs.append(math.log(consts.delta1) - math.log(ledger.delta))
    if ledger.A.log > -math.inf:
        logs.append(log_A_threshold(nu0, consts) - ledger.A.log)
    factor = math.exp(min(logs))
    return (ledger, 1.0) if factor == 1.0 else (rescale_ledger(ledger, factor), factor)


# propagation --------------------------------------------------------------------------


def kappa_log(consts: Constants, rule: str = "cone_radius") -> float:
    """log kappa: 2 rho0 / (pi sinh rho0) or, with rule 'quotient_delta', delta1 / (2 pi sinh(38 delta1))."""
    if rule == "cone_radius":
        return math.log(2 * consts.rho0) - LOG_PI - consts.log_sinh_rho0
    if rule == "quotient_delta":
        return math.log(consts.delta1) - math.log(2 * math.pi) - consts.log_sinh_38
    raise InvalidInput(f"unknown kappa rule {rule!r}")


def propagate_ledger(ledger: InvariantLedger, consts: Constants, n: int, n1: int | None = None,
                     nu0: int | None = None, rescale: bool = False, kappa_rule: str = "cone_radius") -> InvariantLedger:
    """Ledger of the quotient after one induction step.

    With ``rescale`` the additive A bound is applied to lambda A, as in the
    rescaled space; otherwise to A itself, which is weaker since lambda <= 1.
    """
    n1 = n if n1 is None else n1
    report = check_induction_hypotheses(ledger, n1, n, consts, nu0)
    if not report.overall:
        raise HypothesisFailure(f"induction hypotheses fail: {', '.join(report.failed())}")
    log_lam = log_lambda_n(n1, consts)
    term = Magnitude(consts.log_a_step) * (int(ledger.nu) + 4)
    base_A = ledger.A * Magnitude(log_lam) if rescale else ledger.A
    A_next = base_A + term
    # loxodromics outside cylinder stabilizers translate by more than lambda L_S delta1 / 2
    log_l = log_lam + math.log(consts.L_S * consts.delta1 / 2)
    log_rinj = min(kappa_log(consts, kappa_rule) + log_l - math.log(8), math.log(consts.delta1))
    nxt = InvariantLedger(
        delta=consts.delta1, rinj=Magnitude(log_rinj), e=int(ledger.e), nu=int(ledger.nu), A=A_next,
        flags={"delta": "upper", "rinj": "lower", "e": "divides", "nu": "upper", "A": "upper"},
        notes={"delta": "quotient space hyperbolicity constant delta1",
               "e": "exponent of the quotient divides the previous one",
               "nu": "nu does not increase under the quotient",
               "A": f"A + (nu+4) pi sinh(2 L_S delta1){' applied to lambda A' if rescale else ''}",
               "rinj": f"min(kappa l / 8, delta1) with kappa from the {kappa_rule} rule, l = lambda L_S delta1 / 2"},
        nu_lower=1, no_involution=True)
    if not (nxt.nu <= ledger.nu and int(ledger.e) % int(nxt.e) == 0 and (rescale or nxt.A >= ledger.A)):
        raise UnsoundLedger("propagation broke monotonicity of the ledger")
    return nxt


def trivialization_step(lam: float, l0: float, rinj: float) -> int:
    """Smallest k >= 0 with lam**k * l0 < rinj."""
    if not (0 < lam < 1):
        raise InvalidInput("contraction factor must lie in (0, 1)")
    if not (l0 > 0 and rinj > 0):
        raise InvalidInput("lengths must be positive")
    k = max(0, math.ceil((math.log(l0) - math.log(rinj)) / -math.log(lam)) - 1)
    while k * math.log(lam) + math.log(l0) >= math.log(rinj):
        k += 1
    return k


@dataclass
class Trace:
    ledgers: list
    lam: Magnitude
    failure: str | None
    trivialization: int | None
    mode: str

    def to_json(self) -> dict:
        return {"mode": self.mode, "steps": len(self.ledgers) - 1, "lambda": self.lam.to_json(),
                "failure": self.failure, "trivialization_step": self.trivialization,
                "ledgers": [l.to_json() for l in self.ledgers]}


def quotient_iteration_trace(ledger0: InvariantLedger, n: int, steps: int, consts: Constants, n1: int | None = None,
                             nu0: int | None = None, l0: float | None = None, rescale: bool = True,
                             kappa_rule: str = "cone_radius") -> Trace:
    """Iterate check and propagate; stop at the first failing hypothesis."""
    if steps < 0:
        raise InvalidInput("steps must be non-negative")
    n1 = n if n1 is None else n1
    lam = lambda_n(n1, consts)
    ledgers, failure = [ledger0], None
    for _ in range(steps):
        report = check_induction_hypotheses(ledgers[-1], n1, n, consts, nu0)
        if not report.overall:
            failure = report.failed()[0]
            break
        ledgers.append(propagate_ledger(ledgers[-1], consts, n, n1, nu0, rescale, kappa_rule))
    trivial = None
    if l0 is not None and lam.value < 1:
        trivial = trivialization_step(lam.value, l0, math.exp(log_rinj_threshold(n1, consts)))
    return Trace(ledgers, lam, failure, trivial, consts.mode)


def kappa_mcg_style(e: int, index: int) -> int:
    if e < 1 or index < 1:
        raise InvalidInput("e and index must be positive")
    return lcm([e, index])
