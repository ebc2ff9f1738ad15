"""Regime taxonomy and the scaling-function table.

A regime is decided by the scaling exponent omega and by how the
mollification scale e(m) and the time horizon t(m) behave together as the
master parameter m grows.  Sequences are supplied as power laws
e(m) = a m^(-u), t(m) = b m^v (u, v >= 0), which is exactly enough to decide
every limit the regime definitions depend on.

Regime tags:

* sub1/sub2/sub3 : 0 < omega < 2, t -> infinity; split on lim e t^(1/(2-omega))
                   (infinity / constant / zero)
* crt1/crt2      : omega = 2; t -> infinity, or e -> 0 with t -> t* finite
* sup            : omega > 2; e -> 0 or t -> infinity

The table row (alpha_eps(t), beta_eps(t), H_eps(t)) gives the peak width,
the second-order rate, and the cumulant term of the moment asymptotics; in
every row beta_eps(t) = t / alpha_eps(t)^2.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import UnclassifiableSequence

SUB1, SUB2, SUB3, CRT1, CRT2, SUP = "sub1", "sub2", "sub3", "crt1", "crt2", "sup"

_TAGS = (SUB1, SUB2, SUB3, CRT1, CRT2, SUP)


@dataclass(frozen=True)
class Regime:
    tag: str
    frak_c: float | None = None  # sub2 only: lim e t^(1/(2-omega))
    limit_t: float | None = None  # crt2 only: lim t

    def __post_init__(self):
        if self.tag not in _TAGS:
            raise ValueError(f"unknown regime tag {self.tag!r}")
        if self.tag == SUB2 and (self.frak_c is None or self.frak_c <= 0):
            raise ValueError("sub2 requires a positive frak_c")
        if self.tag == CRT2 and (self.limit_t is None or self.limit_t <= 0):
            raise ValueError("crt2 requires a positive limit time")


@dataclass(frozen=True)
class PowerLawSequence:
    """Sequence descriptor a * m^exponent with exponent = -u (for e) or +v (for t)."""

    prefactor: float
    exponent: float

    def __post_init__(self):
        if self.prefactor <= 0:
            raise ValueError("prefactor must be positive")


@dataclass(frozen=True)
class ScalingTriple:
    alpha: float
    beta: float
    H: float

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")


def classify_regime(omega: float, e_seq: PowerLawSequence, t_seq: PowerLawSequence) -> Regime:
    """Decide the regime of (omega, e(m), t(m)).

    Preconditions mirror the standing bounds: sup e <= 1 (so prefactor <= 1
    with a nonincreasing e) and inf t > 0.
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    a, neg_u = e_seq.prefactor, e_seq.exponent
    b, v = t_seq.prefactor, t_seq.exponent
    if neg_u > 0:
        raise UnclassifiableSequence("e(m) must be nonincreasing (exponent <= 0)")
    if v < 0:
        raise UnclassifiableSequence("t(m) must be nondecreasing (exponent >= 0), keeping inf t > 0")
    if a > 1:
        raise UnclassifiableSequence("sup e <= 1 is required (prefactor <= 1)")
    u = -neg_u

    if omega < 2:
        if v == 0:
            raise UnclassifiableSequence("subcritical regime requires t -> infinity")
        # exponent of m in e * t^(1/(2-omega))
        q = v / (2.0 - omega) - u
        if q > 0:
            return Regime(SUB1)
        if q == 0:
            return Regime(SUB2, frak_c=a * b ** (1.0 / (2.0 - omega)))
        return Regime(SUB3)
    if omega == 2:
        if v > 0:
            return Regime(CRT1)
        if u > 0:
            return Regime(CRT2, limit_t=b)
        raise UnclassifiableSequence("critical regime with bounded t requires e -> 0")
    # omega > 2
    if u > 0 or v > 0:
        return Regime(SUP)
    raise UnclassifiableSequence("supercritical regime requires e -> 0 or t -> infinity")


def scaling_functions(
    regime: Regime, epsilon: float, t: float, gamma1_at_0: float, omega: float
) -> ScalingTriple:
    """Table row (alpha_eps(t), beta_eps(t), H_eps(t)); callers evaluate at t = p*t."""
    if min(epsilon, t, gamma1_at_0) <= 0:
        raise ValueError("epsilon, t, gamma1_at_0 must be positive")
    tag = regime.tag
    if tag in (SUB1, SUP):
        alpha = epsilon ** ((2 + omega) / 4) * t ** (-0.25)
        H = epsilon ** (-omega) * t**2 * gamma1_at_0 / 2
    elif tag in (SUB2, SUB3):
        alpha = t ** (-1.0 / (2.0 - omega))
        H = 0.0
    elif tag == CRT1:
        alpha = epsilon * t ** (-0.25)
        H = epsilon**-2 * t**2 * gamma1_at_0 / 2
    else:  # crt2
        alpha = epsilon
        H = 0.0
    beta = t / alpha**2
    return ScalingTriple(alpha=alpha, beta=beta, H=H)


def predicted_log_moment(
    regime: Regime,
    p: float,
    t: float,
    epsilon: float,
    chi_p: float,
    gamma1_at_0: float,
    omega: float,
) -> float:
    """First-two-orders prediction H_eps(pt) - beta_eps(pt) * chi_p.

    ``chi_p`` is the regime's variational constant with its own sign (it is
    -M in the singular subcritical limit, so the prediction grows).
    """
    triple = scaling_functions(regime, epsilon, p * t, gamma1_at_0, omega)
    return triple.H - triple.beta * chi_p


def regime_record(regime: Regime, triple: ScalingTriple) -> dict:
    """JSON-ready record for the CLI's prediction tables."""
    rec = {"regime": regime.tag, "alpha": triple.alpha, "beta": triple.beta, "H": triple.H}
    if regime.frak_c is not None:
        rec["frak_c"] = regime.frak_c
    if regime.limit_t is not None:
        rec["limit_t"] = regime.limit_t
    return rec
