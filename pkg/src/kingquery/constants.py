"""Exact-rational check of the constant chain behind the (1/2 + delta)-king bound."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

DEFAULT_DELTA = Fraction(2, 17)
DEFAULT_KAPPA = Fraction(1, 4000)

# Published intermediate values for (delta, kappa) = (2/17, 1/4000).
PUBLISHED = {
    "small_rows_coef": Fraction(25983, 68000),
    "large_rows_coef": Fraction(42017, 68000),
    "row_share_numerator": Fraction(6483, 17000),
    "scaled_large_rows_coef": Fraction(42017, 67932),
    "row_count_coef": Fraction(475777, 769896),
    "final_coef_decimal": "0.61782",
    "target_decimal": "0.61764",
}


@dataclass(frozen=True)
class Check:
    name: str
    lhs: Fraction | str
    relation: str
    rhs: Fraction | str

    @property
    def passed(self) -> bool:
        if self.relation == "==":
            return self.lhs == self.rhs
        if self.relation == ">=":
            return self.lhs >= self.rhs
        if self.relation == ">":
            return self.lhs > self.rhs
        if self.relation == "<":
            return self.lhs < self.rhs
        if self.relation == "<=":
            return self.lhs <= self.rhs
        raise ValueError(self.relation)

    def describe(self) -> str:
        mark = "ok  " if self.passed else "FAIL"
        text = f"[{mark}] {self.name}: {self.lhs} {self.relation} {self.rhs}"
        if isinstance(self.lhs, Fraction):
            text += f" ({float(self.lhs):.6f} vs {float(self.rhs):.6f})"
        return text


@dataclass
class ConstantsReport:
    delta: Fraction
    kappa: Fraction
    small_rows_coef: Fraction
    large_rows_coef: Fraction
    row_fraction_coef: Fraction
    row_count_coef: Fraction
    final_coef: Fraction
    target: Fraction
    checks: list[Check] = field(default_factory=list)

    @property
    def margin(self) -> Fraction:
        return self.final_coef - self.target

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def lines(self) -> list[str]:
        out = [f"delta={self.delta} kappa={self.kappa}"]
        out.extend(c.describe() for c in self.checks)
        out.append(f"margin = {self.margin} ({float(self.margin):.8f})")
        return out


def decimal_prefix(q: Fraction, places: int) -> str:
    """Truncated decimal expansion of a non-negative rational."""
    whole, rem = divmod(q.numerator, q.denominator)
    digits = []
    for _ in range(places):
        d, rem = divmod(rem * 10, q.denominator)
        digits.append(str(d))
    return f"{whole}." + "".join(digits)


def verify_constants(delta: Fraction = DEFAULT_DELTA,
                     kappa: Fraction = DEFAULT_KAPPA) -> ConstantsReport:
    """Recompute the tile-count chain in exact arithmetic.

    With ``n^(1/3)`` tiles scaled out, the small-weight rows number at least
    ``1/2 - delta - kappa``, the large-weight rows ``1/2 + delta + kappa``, and
    a ``(1/2 - delta - 4 kappa) / (1 - 4 kappa)`` share of the latter is
    controlled too. The controlled fraction of ``n`` is ``(1 - kappa)`` times
    the resulting row coefficient and must beat ``1/2 + delta``.
    """
    delta, kappa = Fraction(delta), Fraction(kappa)
    half = Fraction(1, 2)
    small = half - delta - kappa
    large = half + delta + kappa
    # no share of the large rows is guaranteed once 4 kappa reaches 1
    row_fraction = (half - delta - 4 * kappa) / (1 - 4 * kappa) if 4 * kappa < 1 else Fraction(0)
    row_count = small + row_fraction * large
    final = (1 - kappa) * row_count
    target = half + delta

    report = ConstantsReport(delta, kappa, small, large, row_fraction, row_count, final, target)
    checks = report.checks
    checks.append(Check("delta + kappa <= 1/2", delta + kappa, "<=", half))
    checks.append(Check("4 kappa < 1", 4 * kappa, "<", Fraction(1)))
    checks.append(Check("delta <= 1/8 - 3 kappa / 2", delta, "<=", Fraction(1, 8) - 3 * kappa / 2))
    checks.append(Check("(1 - kappa) * row coefficient > 1/2 + delta", final, ">", target))

    if (delta, kappa) == (DEFAULT_DELTA, DEFAULT_KAPPA):
        checks.append(Check("small-row coefficient", small, "==", PUBLISHED["small_rows_coef"]))
        checks.append(Check("large-row coefficient", large, "==", PUBLISHED["large_rows_coef"]))
        checks.append(Check("row-share numerator", half - delta - 4 * kappa, "==",
                            PUBLISHED["row_share_numerator"]))
        checks.append(Check("large-row coefficient / (1 - 4 kappa)", large / (1 - 4 * kappa), "==",
                            PUBLISHED["scaled_large_rows_coef"]))
        checks.append(Check("row-count coefficient", row_count, ">=", PUBLISHED["row_count_coef"]))
        published_final = (1 - kappa) * PUBLISHED["row_count_coef"]
        checks.append(Check("published final > target", published_final, ">", target))
        for name, value, expected in (
            ("final decimal prefix", published_final, PUBLISHED["final_coef_decimal"]),
            ("target decimal prefix", target, PUBLISHED["target_decimal"]),
        ):
            checks.append(Check(name, decimal_prefix(value, 5), "==", expected))
    return report
