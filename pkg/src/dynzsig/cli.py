"""Command-line front end: polynomial expression parsing, subcommands,
machine-readable reports, and the persistent factor cache.

Reports are byte-stable for a fixed configuration: keys are sorted, reals
are rendered to 12 significant digits, and arbitrary-precision integers are
emitted as decimal strings so they survive any JSON consumer.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .divisibility import (
    FactorBudget,
    Factorization,
    decimal_digits,
    factor,
    rigid_check,
)
from .heights import (
    HeightEstimate,
    PlaceSet,
    canonical_height,
    height_comparison_bound,
    local_log_distance,
    map_height,
    sum_local_at_infinity,
    weil_height,
)
from .ratfield import Polynomial, ProjPoint, is_powerful, reverse_map, squarefree_decomposition
from .zsigmondy import (
    BoundInputs,
    DigitBudgetExceeded,
    FamilyFactor,
    FamilySpec,
    HypothesisViolated,
    OrbitSequence,
    PreperiodicPoint,
    build_sequence,
    close_approach_ambiguous,
    denominator_place_set,
    family_build,
    fixed_or_wandering,
    growth_check,
    is_close_approach,
    valuation_stability_check,
    wandering_verdict,
    zsigmondy_bound,
    zsigmondy_set,
)

CACHE_ENV_VAR = "DYNZSIG_CACHE"

EXIT_OK = 0
EXIT_HYPOTHESIS = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


class ParseError(Exception):
    """Polynomial expression error with a 0-based offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (offset {position})")
        self.position = position


class ExponentError(ParseError):
    """Exponent is not a nonnegative integer literal."""


# ---------------------------------------------------------------------------
# Expression parsing
# ---------------------------------------------------------------------------

_OPS = set("+-*^()/")

# dense-polynomial expansion cost is quadratic in the degree; cap the damage
# from a stray exponent typo
_MAX_EXPONENT = 4096


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(("int", text[i:j], i))
            i = j
        elif ch == "z":
            tokens.append(("var", ch, i))
            i += 1
        elif ch in _OPS:
            tokens.append(("op", ch, i))
            i += 1
        else:
            raise ParseError(f"unexpected character {ch!r}", i)
    return tokens


@dataclass(frozen=True)
class ParsedPoly:
    """Expression result: the expanded polynomial plus, when the input is a
    top-level product of powers, the preserved factored form."""

    poly: Polynomial
    factored: Optional[tuple[tuple[Polynomial, int], ...]]
    text: str


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> Optional[tuple[str, str, int]]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> tuple[str, str, int]:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", len(self.text))
        self.pos += 1
        return tok

    def expect_op(self, op: str):
        tok = self.peek()
        if tok is None or tok[0] != "op" or tok[1] != op:
            where = tok[2] if tok else len(self.text)
            raise ParseError(f"expected {op!r}", where)
        self.take()

    def parse(self) -> ParsedPoly:
        poly, factors = self._expr(top=True)
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"trailing input {tok[1]!r}", tok[2])
        return ParsedPoly(poly=poly, factored=factors, text=self.text)

    def _expr(self, top: bool = False):
        sign = 1
        tok = self.peek()
        if tok is not None and tok[0] == "op" and tok[1] in "+-":
            self.take()
            sign = -1 if tok[1] == "-" else 1
        poly, factors = self._term()
        if sign == -1:
            poly = -poly
            factors = None
        n_terms = 1
        while True:
            tok = self.peek()
            if tok is None or tok[0] != "op" or tok[1] not in "+-":
                break
            self.take()
            rhs, _ = self._term()
            poly = poly + rhs if tok[1] == "+" else poly - rhs
            n_terms += 1
        if not top or n_terms > 1:
            factors = None
        return poly, factors

    def _term(self):
        poly, factors = self._factor()
        collected = [factors] if factors else None
        while True:
            tok = self.peek()
            if tok is None or tok[0] != "op" or tok[1] != "*":
                break
            self.take()
            rhs, rfac = self._factor()
            poly = poly * rhs
            if collected is not None and rfac:
                collected.append(rfac)
            else:
                collected = None
        flat = tuple(f for group in collected for f in group) if collected else None
        return poly, flat

    def _factor(self):
        base = self._atom()
        tok = self.peek()
        if tok is not None and tok[0] == "op" and tok[1] == "^":
            self.take()
            nxt = self.peek()
            if nxt is None:
                raise ExponentError("expected exponent", len(self.text))
            if nxt[0] == "op" and nxt[1] in "+-":
                raise ExponentError("exponent must be a nonnegative integer literal", nxt[2])
            if nxt[0] != "int":
                if nxt[0] == "op" and nxt[1] == "(":
                    raise ExponentError("exponent must be an integer literal", nxt[2])
                raise ParseError(f"expected exponent, found {nxt[1]!r}", nxt[2])
            self.take()
            exponent = int(nxt[1])
            if exponent > _MAX_EXPONENT:
                raise ParseError(f"exponent {exponent} exceeds the cap {_MAX_EXPONENT}", nxt[2])
            return base ** exponent, ((base, exponent),)
        return base, ((base, 1),)

    def _atom(self) -> Polynomial:
        tok = self.take()
        kind, value, where = tok
        if kind == "int":
            num = int(value)
            nxt = self.peek()
            if nxt is not None and nxt[0] == "op" and nxt[1] == "/":
                self.take()
                dtok = self.peek()
                if dtok is None or dtok[0] != "int":
                    pos = dtok[2] if dtok else len(self.text)
                    raise ParseError("expected denominator", pos)
                self.take()
                den = int(dtok[1])
                if den == 0:
                    raise ParseError("zero denominator", dtok[2])
                return Polynomial.constant(Fraction(num, den))
            return Polynomial.constant(num)
        if kind == "var":
            return Polynomial.identity()
        if kind == "op" and value == "(":
            poly, _ = self._expr()
            self.expect_op(")")
            return poly
        raise ParseError(f"unexpected {value!r}", where)


def parse_poly(text: str) -> ParsedPoly:
    """Parse an expression over +, -, *, ^ with rational literals and z.

    '^' binds tightest and takes a nonnegative integer literal; a single
    leading sign is accepted.  When the whole input is one product of powers,
    the factored form is preserved for the family checks.
    """
    if not text or not text.strip():
        raise ParseError("empty input", 0)
    return _Parser(text).parse()


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"invalid rational {text!r}: {exc}", 0) from None


# ---------------------------------------------------------------------------
# Configuration and factor cache
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    trial_bound: int = 1_000_000
    rho_budget: int = 200_000
    digit_budget: int = 100_000
    tol: float = 1e-6
    seed: int = 1
    cache_path: Optional[str] = None
    fmt: str = "json"

    def __post_init__(self):
        if min(self.trial_bound, self.rho_budget, self.digit_budget) <= 0:
            raise ValueError("budgets must be positive")
        if not (0.0 < self.tol < 1.0):
            raise ValueError("tolerance must be in (0, 1)")
        if self.fmt not in ("json", "csv", "text"):
            raise ValueError(f"unknown format {self.fmt!r}")

    def factor_budget(self) -> FactorBudget:
        return FactorBudget(
            trial_bound=self.trial_bound, rho_rounds=self.rho_budget, seed=self.seed
        )


class FactorCache:
    """Append-only JSON-lines factor cache keyed by the decimal composite.

    Complete entries are immutable; partial entries may be upgraded by a
    later store but never downgraded.  Corrupt lines are skipped with a
    warning.  Writes take a sibling .lock file (single writer, many readers).
    """

    def __init__(self, path: str):
        self.path = path
        self.entries: dict[int, Factorization] = {}
        self.warnings: list[str] = []
        self._load()

    def _load(self):
        if not os.path.exists(self.path):
            return
        with open(self.path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    raw = json.loads(line)
                    composite = int(raw["composite"])
                    factors = {int(p): int(e) for p, e in raw["factors"]}
                    complete = bool(raw["complete"])
                    cofactor = composite
                    for p, e in factors.items():
                        cofactor //= p**e
                    fact = Factorization(factors, 1 if complete else cofactor)
                    if fact.reconstruct() != composite:
                        raise ValueError("reconstruction mismatch")
                except (KeyError, ValueError, TypeError) as exc:
                    self.warnings.append(f"cache line {lineno} skipped: {exc}")
                    continue
                current = self.entries.get(composite)
                if current is None or (not current.complete and fact.complete):
                    self.entries[composite] = fact

    def get(self, n: int) -> Optional[Factorization]:
        hit = self.entries.get(n)
        if hit is None:
            return None
        return Factorization(dict(hit.factors), hit.cofactor)

    def __setitem__(self, n: int, fact: Factorization):
        self.store(n, fact)

    def store(self, n: int, fact: Factorization) -> Factorization:
        current = self.entries.get(n)
        if current is not None and (current.complete or not fact.complete):
            return current
        self.entries[n] = Factorization(dict(fact.factors), fact.cofactor)
        self._append(n, fact)
        return self.entries[n]

    def _append(self, n: int, fact: Factorization):
        record = {
            "composite": str(n),
            "factors": [[str(p), e] for p, e in sorted(fact.factors.items())],
            "complete": fact.complete,
        }
        lock = self.path + ".lock"
        deadline = time.monotonic() + 5.0
        while True:
            try:
                fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
                break
            except FileExistsError:
                if time.monotonic() > deadline:
                    raise RuntimeError(f"cache lock {lock} is stuck")
                time.sleep(0.02)
        try:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
        finally:
            os.close(fd)
            os.remove(lock)


def cache_lookup_store(
    cache: FactorCache, composite: int, result: Optional[Factorization] = None
) -> Optional[Factorization]:
    """Cache surface: with result=None, look up; otherwise store (upgrading a
    partial entry at most once) and return the winning entry."""
    if result is None:
        return cache.get(composite)
    return cache.store(composite, result)


# ---------------------------------------------------------------------------
# Report rendering
# ---------------------------------------------------------------------------


def _real(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def _big(n: int) -> str:
    return str(n)


def _frac(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _estimate_dict(est: HeightEstimate) -> dict:
    return {
        "value": _real(est.value),
        "error_bound": _real(est.error_bound),
        "truncated": est.truncated,
        "iterations": est.iterations,
    }


def _config_dict(config: RunConfig) -> dict:
    return {
        "trial_bound": config.trial_bound,
        "rho_budget": config.rho_budget,
        "digit_budget": config.digit_budget,
        "tol": _real(config.tol),
        "seed": config.seed,
        "cache": config.cache_path,
        "format": config.fmt,
    }


def _render_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def _render_text(report: dict) -> str:
    lines: list[str] = []

    def walk(prefix: str, obj):
        if isinstance(obj, dict):
            for key in sorted(obj):
                walk(f"{prefix}{key}.", obj[key])
        elif isinstance(obj, list):
            if all(not isinstance(v, (dict, list)) for v in obj):
                lines.append(f"{prefix[:-1]}: {' '.join(str(v) for v in obj)}")
            else:
                for i, v in enumerate(obj):
                    walk(f"{prefix}{i}.", v)
        else:
            lines.append(f"{prefix[:-1]}: {obj}")

    walk("", report)
    return "\n".join(lines) + "\n"


_CSV_HEADER = "n,value_digits,A_digits,primitive,P_digits,N_digits"


def _render_csv(rows: list[tuple]) -> str:
    out = [_CSV_HEADER]
    out.extend(",".join(str(c) for c in row) for row in rows)
    return "\n".join(out) + "\n"


def _orbit_rows(seq: OrbitSequence) -> list[tuple]:
    rows = []
    for rec in seq.records:
        rows.append(
            (
                rec.n,
                decimal_digits(max(abs(rec.value.numerator), rec.value.denominator)),
                decimal_digits(rec.ideal.A),
                int(rec.primitive),
                decimal_digits(rec.split.primitive_part),
                decimal_digits(rec.split.nonprimitive_part),
            )
        )
    return rows


def _orbit_result(seq: OrbitSequence, include_values: bool = True) -> dict:
    records = []
    for rec in seq.records:
        entry = {
            "n": rec.n,
            "numerator_ideal": _big(rec.ideal.A),
            "denominator_ideal": _big(rec.ideal.B),
            "primitive_part": _big(rec.split.primitive_part),
            "nonprimitive_part": _big(rec.split.nonprimitive_part),
            "has_primitive_divisor": rec.primitive,
        }
        if include_values:
            entry["value"] = _frac(rec.value)
        records.append(entry)
    return {
        "poly": str(seq.phi),
        "alpha": _frac(seq.alpha),
        "centered": str(seq.centered),
        "computed_n": len(seq.records),
        "records": records,
    }


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _place_set(arg: Optional[str]) -> PlaceSet:
    if not arg:
        return PlaceSet()
    primes = []
    for part in arg.split(","):
        part = part.strip()
        if not part or part == "inf":
            continue
        try:
            primes.append(int(part))
        except ValueError:
            raise ParseError(f"invalid place {part!r}", 0) from None
    return PlaceSet.from_primes(primes)


def _require(args: dict, *names: str):
    missing = [n for n in names if args.get(n) is None]
    if missing:
        raise ParseError(f"missing required option(s): {', '.join('--' + m for m in missing)}", 0)


def _build_orbit(args: dict, config: RunConfig):
    parsed = parse_poly(args["poly"])
    alpha = parse_rational(args.get("alpha") or "0")
    N = int(args.get("n") or 8)
    return build_sequence(parsed.poly, alpha, N, digit_budget=config.digit_budget)


def _cmd_orbit(args: dict, config: RunConfig):
    _require(args, "poly")
    seq = _build_orbit(args, config)
    return EXIT_OK, _orbit_result(seq), _orbit_rows(seq), []


def _cmd_zsigmondy(args: dict, config: RunConfig):
    _require(args, "poly")
    seq = _build_orbit(args, config)
    result = _orbit_result(seq)
    result["zsigmondy_set"] = sorted(zsigmondy_set(seq, len(seq.records)))
    result["wandering_verdict"] = wandering_verdict(
        seq.phi, seq.alpha, probe=min(32, len(seq.records) + 8), tol=config.tol
    )
    return EXIT_OK, result, _orbit_rows(seq), []


def _cmd_rigid_check(args: dict, config: RunConfig):
    _require(args, "poly")
    seq = _build_orbit(args, config)
    places = _place_set(args.get("places"))
    cache = _open_cache(config)
    report = rigid_check(seq.terms(), places, config.factor_budget(), cache)
    result = {
        "terms": [_big(t) for t in seq.terms()],
        "places": [str(p) for p in places],
        "verified": report.verified,
        "checked_pairs": report.checked_pairs,
        "untested_cofactors": [_big(c) for c in report.untested_primes],
        "violations": [
            {
                "condition": v.condition,
                "prime": _big(v.prime),
                "indices": list(v.indices),
                "valuations": list(v.valuations),
            }
            for v in report.violations
        ],
    }
    warnings = list(getattr(cache, "warnings", []))
    return EXIT_OK, result, None, warnings


def _cmd_heights(args: dict, config: RunConfig):
    _require(args, "poly", "alpha")
    parsed = parse_poly(args["poly"])
    value = parse_rational(args["alpha"])
    places = _place_set(args.get("places"))
    point = ProjPoint.from_value(value)
    bound = height_comparison_bound(parsed.poly)
    est = canonical_height(
        parsed.poly, value, config.tol, digit_budget=config.digit_budget
    )
    result = {
        "poly": str(parsed.poly),
        "point": _frac(value),
        "weil_height": _real(weil_height(point)),
        "map_height": _real(map_height(parsed.poly)),
        "reversed_map_height": _real(map_height(reverse_map(parsed.poly))),
        "comparison_bound": _real(bound),
        "canonical_height": _estimate_dict(est),
        "places": [str(p) for p in places],
    }
    warnings = []
    if point.is_infinity:
        result["local_log_distances"] = None
        result["local_sum"] = None
        warnings.append("local distances to the starting point are undefined at 0")
    else:
        inf_pt = ProjPoint.infinity()
        result["local_log_distances"] = {
            str(v): _real(local_log_distance(point, inf_pt, v)) for v in places
        }
        result["local_sum"] = _real(sum_local_at_infinity(point, places))
    return EXIT_OK, result, None, warnings


def _cmd_bound(args: dict, config: RunConfig):
    _require(args, "d", "B", "hhat", "htilde", "gamma", "s_size")
    inputs = BoundInputs(
        d=int(args["d"]),
        h_reversed=float(args["htilde"]),
        hhat0=float(args["hhat"]),
        comparison_bound=float(args["B"]),
        gamma=float(args["gamma"]),
        s_size=int(args["s_size"]),
    )
    breakdown = zsigmondy_bound(inputs)
    result = {
        "inputs": {
            "d": inputs.d,
            "B": _real(inputs.comparison_bound),
            "hhat0": _real(inputs.hhat0),
            "htilde": _real(inputs.h_reversed),
            "gamma": _real(inputs.gamma),
            "s_size": inputs.s_size,
        },
        "M": _real(breakdown.total),
        "terms": {
            "startup": _real(breakdown.startup_term),
            "history": _real(breakdown.history_term),
            "proximity_gamma": _real(breakdown.proximity_gamma_term),
            "proximity_log": _real(breakdown.proximity_log_term),
        },
        "startup_set": sorted(breakdown.startup_set),
        "history_set": sorted(breakdown.history_set),
        "history_scan_limit": breakdown.history_scan_limit,
        "zero_index_predicates": {
            "startup": breakdown.startup_zero_predicate,
            "history": breakdown.history_zero_predicate,
        },
    }
    warnings: list[str] = []
    if args.get("poly"):
        seq = _build_orbit(args, config)
        places = _place_set(args.get("places"))
        hhat0 = canonical_height(seq.centered, 0, config.tol, digit_budget=config.digit_budget)
        approaches = []
        for n in range(1, len(seq.records) + 1):
            member = is_close_approach(seq, n, places, hhat0)
            ambiguous = close_approach_ambiguous(seq, n, places, hhat0)
            approaches.append({"n": n, "member": member, "ambiguous": ambiguous})
            if ambiguous:
                warnings.append(f"close-approach comparison ambiguous at n={n}")
        result["close_approach"] = approaches
        result["orbit_hhat0"] = _estimate_dict(hhat0)
    return EXIT_OK, result, None, warnings


def _cmd_powerful_check(args: dict, config: RunConfig):
    _require(args, "poly")
    parsed = parse_poly(args["poly"])
    if parsed.poly.degree < 1:
        raise HypothesisViolated("constant polynomial", "need degree >= 1")
    decomposition = squarefree_decomposition(parsed.poly)
    if parsed.factored:
        base_factors = [base for base, _ in parsed.factored]
    else:
        base_factors = [q for q, _ in decomposition]
    places = denominator_place_set(base_factors)
    result = {
        "poly": str(parsed.poly),
        "is_powerful": is_powerful(parsed.poly),
        "squarefree_decomposition": [
            {"factor": str(q), "multiplicity": m} for q, m in decomposition
        ],
        "place_set": [str(p) for p in places],
    }
    return EXIT_OK, result, None, []


def _family_from_parsed(parsed: ParsedPoly) -> FamilySpec:
    if not parsed.factored:
        raise HypothesisViolated(
            "not in product form", "family input must be a product of powers"
        )
    factors = []
    for base, exponent in parsed.factored:
        if base.degree < 1:
            raise HypothesisViolated(
                "constant factor", f"factor {base} has no z part"
            )
        offset = base.coefficient(0)
        if offset.denominator != 1:
            raise HypothesisViolated(
                "offset not integral", f"constant term {offset} is not an integer"
            )
        inner = Polynomial(base.coeffs[1:])
        factors.append(FamilyFactor(inner=inner, offset=int(offset), exponent=exponent))
    return FamilySpec(tuple(factors))


def _cmd_family_check(args: dict, config: RunConfig):
    _require(args, "factors")
    parsed = parse_poly(args["factors"])
    spec = _family_from_parsed(parsed)
    phi = family_build(spec)
    classification = fixed_or_wandering(spec)
    result = {
        "factors": [
            {"inner": str(f.inner), "offset": f.offset, "exponent": f.exponent}
            for f in spec.factors
        ],
        "poly": str(phi),
        "classification": classification,
        "is_powerful": is_powerful(phi),
    }
    warnings: list[str] = []
    if classification == "wandering":
        N = int(args.get("n") or 4)
        growth = growth_check(spec, N, digit_budget=config.digit_budget)
        result["growth"] = {
            "passed": growth.passed,
            "square_growth_ok": growth.square_growth_ok,
            "exponent_floor_ok": growth.exponent_floor_ok,
            "first_term": _big(growth.first_term),
            "orbit_digits": growth.orbit_digits,
            "exponent_floors": [_frac(f) for f in growth.exponent_floors],
        }
        places = denominator_place_set([f.base() for f in spec.factors])
        cache = _open_cache(config)
        stability = valuation_stability_check(
            phi,
            places,
            N,
            budget=config.factor_budget(),
            digit_budget=config.digit_budget,
            cache=cache,
        )
        result["valuation_stability"] = {
            "ok": stability.ok,
            "terms_checked": stability.terms_checked,
            "ranks": {_big(p): r for p, r in sorted(stability.ranks.items())},
            "failures": [
                {
                    "kind": f.kind,
                    "prime": _big(f.prime),
                    "index": f.index,
                    "expected": _big(f.expected),
                    "got": _big(f.got),
                }
                for f in stability.failures
            ],
            "untested_cofactors": [_big(c) for c in stability.untested_cofactors],
        }
        result["place_set"] = [str(p) for p in places]
    return EXIT_OK, result, None, warnings


_COMMANDS = {
    "orbit": _cmd_orbit,
    "zsigmondy": _cmd_zsigmondy,
    "rigid-check": _cmd_rigid_check,
    "heights": _cmd_heights,
    "bound": _cmd_bound,
    "powerful-check": _cmd_powerful_check,
    "family-check": _cmd_family_check,
}


def _open_cache(config: RunConfig) -> Optional[FactorCache]:
    if config.cache_path:
        return FactorCache(config.cache_path)
    return None


def run_subcommand(name: str, args: dict, config: RunConfig):
    """Run one subcommand; returns (exit_code, report_text, diagnostics).

    Exit codes: 0 success, 1 hypothesis violation, 2 parse/config error,
    3 digit-budget exhaustion (with partial results in the report).
    """
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(max(10_000, config.digit_budget * 4))
    if name not in _COMMANDS:
        return EXIT_USAGE, "", f"unknown subcommand {name!r}"

    code = EXIT_OK
    rows = None
    warnings: list[str] = []
    diagnostics = ""
    try:
        code, result, rows, warnings = _COMMANDS[name](args, config)
    except (ParseError, ValueError) as exc:
        result = {"error": str(exc)}
        code = EXIT_USAGE
        diagnostics = f"error: {exc}"
    except HypothesisViolated as exc:
        result = {"error": str(exc), "reason": exc.reason}
        code = EXIT_HYPOTHESIS
        diagnostics = f"hypothesis violated: {exc.reason}"
    except PreperiodicPoint as exc:
        result = {"error": str(exc), "reason": "preperiodic point"}
        if exc.partial is not None and isinstance(exc.partial, OrbitSequence):
            result["partial"] = _orbit_result(exc.partial)
        code = EXIT_HYPOTHESIS
        diagnostics = f"hypothesis violated: {exc}"
    except DigitBudgetExceeded as exc:
        result = {"error": str(exc), "reason": "digit budget exceeded"}
        if isinstance(exc.partial, OrbitSequence):
            result["partial"] = _orbit_result(exc.partial)
            rows = _orbit_rows(exc.partial)
        code = EXIT_BUDGET
        diagnostics = f"budget exhausted: {exc}"

    report = {
        "command": name,
        "config": _config_dict(config),
        "result": result,
        "warnings": warnings,
    }
    if config.fmt == "csv":
        if rows is None:
            if code == EXIT_OK:
                return (
                    EXIT_USAGE,
                    "",
                    "error: csv output is only available for orbit tables",
                )
            return code, "", diagnostics  # the failure, not the format, is the story
        return code, _render_csv(rows), diagnostics
    if config.fmt == "text":
        return code, _render_text(report), diagnostics
    return code, _render_json(report), diagnostics


# ---------------------------------------------------------------------------
# Argument parsing and entry point
# ---------------------------------------------------------------------------


def _build_arg_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-6)
    common.add_argument("--trial-bound", type=int, default=1_000_000, dest="trial_bound")
    common.add_argument("--rho-budget", type=int, default=200_000, dest="rho_budget")
    common.add_argument("--digit-budget", type=int, default=100_000, dest="digit_budget")
    common.add_argument("--seed", type=int, default=1)
    common.add_argument("--cache", default=None)
    common.add_argument("--format", default="json", choices=("json", "csv", "text"))

    parser = argparse.ArgumentParser(
        prog="dynzsig",
        description="Dynamical divisibility sequences, primitive divisors, and Zsigmondy sets over Q.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, *, poly=False, alpha=False, n=False, places=False, factors=False, bound=False):
        sp = sub.add_parser(name, parents=[common])
        if poly:
            sp.add_argument("--poly")
        if alpha:
            sp.add_argument("--alpha")
        if n:
            sp.add_argument("--n", type=int)
        if places:
            sp.add_argument("--places")
        if factors:
            sp.add_argument("--factors")
        if bound:
            sp.add_argument("--d", type=int)
            sp.add_argument("--B", dest="B")
            sp.add_argument("--hhat")
            sp.add_argument("--htilde")
            sp.add_argument("--gamma")
            sp.add_argument("--s-size", type=int, dest="s_size")
        return sp

    add("orbit", poly=True, alpha=True, n=True)
    add("zsigmondy", poly=True, alpha=True, n=True)
    add("rigid-check", poly=True, alpha=True, n=True, places=True)
    add("heights", poly=True, alpha=True, places=True)
    add("bound", poly=True, alpha=True, n=True, places=True, bound=True)
    add("powerful-check", poly=True)
    add("family-check", factors=True, n=True)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_arg_parser()
    ns = parser.parse_args(argv)
    args = vars(ns)
    cache_path = args.get("cache") or os.environ.get(CACHE_ENV_VAR) or None
    try:
        config = RunConfig(
            trial_bound=args["trial_bound"],
            rho_budget=args["rho_budget"],
            digit_budget=args["digit_budget"],
            tol=args["tol"],
            seed=args["seed"],
            cache_path=cache_path,
            fmt=args["format"],
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    code, report, diagnostics = run_subcommand(ns.command, args, config)
    if report:
        sys.stdout.write(report)
    if diagnostics:
        print(diagnostics, file=sys.stderr)
    return code


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
