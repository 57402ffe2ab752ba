import json
import random
from fractions import Fraction

import pytest

from dynzsig.cli import (
    ExponentError,
    FactorCache,
    ParseError,
    RunConfig,
    cache_lookup_store,
    main,
    parse_poly,
    parse_rational,
    run_subcommand,
)
from dynzsig.divisibility import Factorization, factor
from dynzsig.ratfield import Polynomial

Z = Polynomial.identity()


def run(command, config=None, **args):
    config = config or RunConfig()
    return run_subcommand(command, args, config)


# --- expression parsing -------------------------------------------------------


def test_parse_simple():
    assert parse_poly("z^2+1").poly == Polynomial([1, 0, 1])


def test_parse_product_form_preserved():
    parsed = parse_poly("(z+2)^2*(z+3)^2")
    assert parsed.poly == Polynomial([36, 60, 37, 10, 1])
    assert parsed.factored == (
        (Polynomial([2, 1]), 2),
        (Polynomial([3, 1]), 2),
    )


def test_parse_double_caret_position():
    with pytest.raises(ParseError) as err:
        parse_poly("z^^2")
    assert err.value.position == 2


def test_parse_negative_exponent_rejected():
    with pytest.raises(ExponentError):
        parse_poly("z^-2")


def test_parse_symbolic_exponent_rejected():
    with pytest.raises(ExponentError):
        parse_poly("z^(1+1)")


def test_parse_rational_literals():
    assert parse_poly("1/2*z^2 + 1/3").poly == Polynomial([Fraction(1, 3), 0, Fraction(1, 2)])


def test_parse_leading_sign():
    assert parse_poly("-z^2 + 1").poly == Polynomial([1, 0, -1])


def test_parse_whitespace_insensitive():
    assert parse_poly("  z ^ 2 + 1 ").poly == parse_poly("z^2+1").poly


def test_parse_left_associative_subtraction():
    assert parse_poly("z-1-1").poly == Polynomial([-2, 1])
    assert parse_poly("2*3*z").poly == Polynomial([0, 6])


def test_parse_sum_is_not_factored():
    assert parse_poly("z^2+1").factored is None


def test_parse_trailing_garbage():
    with pytest.raises(ParseError):
        parse_poly("z^2+1)")


def test_parse_empty():
    with pytest.raises(ParseError):
        parse_poly("   ")


def test_parse_rational_values():
    assert parse_rational("26/5") == Fraction(26, 5)
    assert parse_rational("-7") == -7
    with pytest.raises(ParseError):
        parse_rational("1/0")


def test_print_parse_round_trip():
    rng = random.Random(51)
    for _ in range(40):
        coeffs = [
            Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(rng.randint(1, 6))
        ]
        poly = Polynomial(coeffs)
        assert parse_poly(str(poly)).poly == poly


# --- configuration --------------------------------------------------------------


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(tol=0.0)
    with pytest.raises(ValueError):
        RunConfig(digit_budget=0)
    with pytest.raises(ValueError):
        RunConfig(fmt="yaml")


# --- subcommands -----------------------------------------------------------------


def test_zsigmondy_subcommand_reports_set():
    code, report, _ = run("zsigmondy", poly="z^2+1", alpha="0", n=6)
    assert code == 0
    payload = json.loads(report)
    assert payload["result"]["zsigmondy_set"] == [1]
    assert payload["result"]["wandering_verdict"] == "wandering"
    assert payload["command"] == "zsigmondy"


def test_orbit_subcommand_records():
    code, report, _ = run("orbit", poly="z^2+1", alpha="0", n=5)
    assert code == 0
    records = json.loads(report)["result"]["records"]
    assert [r["numerator_ideal"] for r in records] == ["1", "2", "5", "26", "677"]
    assert records[3]["nonprimitive_part"] == "2"


def test_bound_subcommand_worked_value():
    code, report, _ = run(
        "bound", d=3, B="1", hhat="1", htilde="1", gamma="1", s_size=1
    )
    assert code == 0
    result = json.loads(report)["result"]
    assert abs(float(result["M"]) - 11.5237190143) < 1e-6
    assert set(result["terms"]) == {"startup", "history", "proximity_gamma", "proximity_log"}
    assert result["startup_set"] == [1]


def test_bound_subcommand_with_orbit():
    code, report, _ = run(
        "bound",
        d=3,
        B="1",
        hhat="1",
        htilde="1",
        gamma="1",
        s_size=1,
        poly="z^3+1",
        alpha="0",
        n=6,
    )
    assert code == 0
    result = json.loads(report)["result"]
    members = [row["n"] for row in result["close_approach"] if row["member"]]
    assert members == [1, 2]


def test_rigid_check_subcommand():
    code, report, _ = run("rigid-check", poly="z^2+1", alpha="0", n=6)
    assert code == 0
    result = json.loads(report)["result"]
    assert result["verified"] is True
    assert result["untested_cofactors"] == []


def test_heights_subcommand():
    code, report, _ = run("heights", poly="z^2+1", alpha="3/2", places="2,3")
    assert code == 0
    result = json.loads(report)["result"]
    assert result["weil_height"] == "1.09861228867"
    assert result["local_log_distances"]["3"] == "1.09861228867"


def test_powerful_check_subcommand():
    code, report, _ = run("powerful-check", poly="(z+2)^2*(z+3)^2")
    assert code == 0
    result = json.loads(report)["result"]
    assert result["is_powerful"] is True
    assert result["place_set"] == ["inf"]


def test_family_check_subcommand():
    code, report, _ = run("family-check", factors="(z+2)^2*(z+3)^2", n=3)
    assert code == 0
    result = json.loads(report)["result"]
    assert result["classification"] == "wandering"
    assert result["growth"]["passed"] is True
    assert result["valuation_stability"]["ok"] is True


# --- exit codes ------------------------------------------------------------------


def test_exit_code_hypothesis_violation():
    code, report, diag = run("family-check", factors="(z*1+1)^2")
    assert code == 1
    assert json.loads(report)["result"]["reason"] == "m < 2"
    assert "m < 2" in diag


def test_exit_code_preperiodic():
    code, report, _ = run("zsigmondy", poly="z^2-1", alpha="0", n=5)
    assert code == 1
    assert json.loads(report)["result"]["reason"] == "preperiodic point"


def test_exit_code_parse_error():
    code, report, _ = run("zsigmondy", poly="z^^2", alpha="0", n=5)
    assert code == 2


def test_exit_code_missing_flag():
    code, _, diag = run("zsigmondy")
    assert code == 2
    assert "--poly" in diag


def test_exit_code_budget_with_partial():
    config = RunConfig(digit_budget=30)
    code, report, _ = run("orbit", config, poly="z^2+1", alpha="0", n=40)
    assert code == 3
    payload = json.loads(report)
    assert payload["result"]["reason"] == "digit budget exceeded"
    assert len(payload["result"]["partial"]["records"]) >= 5


def test_exit_code_csv_unsupported_elsewhere():
    config = RunConfig(fmt="csv")
    code, _, diag = run("heights", config, poly="z^2+1", alpha="2")
    assert code == 2
    assert "csv" in diag


def test_csv_does_not_mask_hypothesis_failures():
    config = RunConfig(fmt="csv")
    code, _, diag = run("zsigmondy", config, poly="z^2-1", alpha="0", n=5)
    assert code == 1
    assert "hypothesis" in diag


def test_exit_code_good_runs_are_zero():
    assert run("orbit", poly="z^2+1", alpha="0", n=4)[0] == 0
    assert run("powerful-check", poly="z^3")[0] == 0


# --- output formats ----------------------------------------------------------------


def test_csv_orbit_table():
    config = RunConfig(fmt="csv")
    code, report, _ = run("orbit", config, poly="z^2+1", alpha="0", n=5)
    assert code == 0
    lines = report.strip().split("\n")
    assert lines[0] == "n,value_digits,A_digits,primitive,P_digits,N_digits"
    assert lines[1] == "1,1,1,0,1,1"
    assert lines[4] == "4,2,2,1,2,1"


def test_text_format_renders():
    config = RunConfig(fmt="text")
    code, report, _ = run("zsigmondy", config, poly="z^2+1", alpha="0", n=4)
    assert code == 0
    assert "result.zsigmondy_set: 1" in report


def test_exponent_cap():
    with pytest.raises(ParseError):
        parse_poly("(z+1)^100000")


def test_bound_with_orbit_has_no_ambiguity_warnings():
    code, report, _ = run(
        "bound",
        d=3,
        B="1",
        hhat="1",
        htilde="1",
        gamma="1",
        s_size=1,
        poly="z^3+1",
        alpha="0",
        n=8,
    )
    assert code == 0
    assert json.loads(report)["warnings"] == []


def test_reports_are_byte_stable_across_formats():
    for fmt in ("csv", "text"):
        config = RunConfig(fmt=fmt, seed=3)
        first = run_subcommand("orbit", dict(poly="z^2+1", alpha="0", n=6), config)
        second = run_subcommand("orbit", dict(poly="z^2+1", alpha="0", n=6), config)
        assert first == second


def test_reports_are_byte_stable():
    matrix = [
        ("orbit", dict(poly="z^2+1", alpha="0", n=6)),
        ("zsigmondy", dict(poly="z^2+1", alpha="0", n=6)),
        ("rigid-check", dict(poly="z^2+1", alpha="0", n=6)),
        ("heights", dict(poly="z^2+1", alpha="3/2", places="2,3")),
        ("bound", dict(d=3, B="1", hhat="1", htilde="1", gamma="1", s_size=1)),
        ("powerful-check", dict(poly="(z+2)^2*(z+3)^2")),
        ("family-check", dict(factors="(z+2)^2*(z+3)^2", n=3)),
    ]
    for command, args in matrix:
        first = run_subcommand(command, dict(args), RunConfig(seed=7))
        second = run_subcommand(command, dict(args), RunConfig(seed=7))
        assert first == second, command


# --- factor cache ---------------------------------------------------------------------


def test_cache_round_trip(tmp_path):
    path = str(tmp_path / "factors.jsonl")
    cache = FactorCache(path)
    fact = factor(458330)
    stored = cache_lookup_store(cache, 458330, fact)
    assert stored.factors == fact.factors
    # a new handle reads it back without recomputation
    reread = FactorCache(path)
    hit = cache_lookup_store(reread, 458330)
    assert hit is not None and hit.factors == {2: 1, 5: 1, 45833: 1}


def test_cache_miss_returns_none(tmp_path):
    cache = FactorCache(str(tmp_path / "factors.jsonl"))
    assert cache_lookup_store(cache, 12345) is None


def test_cache_upgrade_partial_entry(tmp_path):
    path = str(tmp_path / "factors.jsonl")
    cache = FactorCache(path)
    partial = Factorization({2: 1}, 458330 // 2)
    cache_lookup_store(cache, 458330, partial)
    assert not cache.get(458330).complete
    complete = factor(458330)
    cache_lookup_store(cache, 458330, complete)
    assert cache.get(458330).complete
    # downgrades are ignored
    cache_lookup_store(cache, 458330, partial)
    assert cache.get(458330).complete
    assert FactorCache(path).get(458330).complete


def test_cache_skips_corrupt_lines(tmp_path):
    path = tmp_path / "factors.jsonl"
    good = json.dumps(
        {"composite": "6", "factors": [["2", 1], ["3", 1]], "complete": True}
    )
    path.write_text("not json at all\n" + good + "\n{\"composite\": \"10\"}\n")
    cache = FactorCache(str(path))
    assert cache.get(6).complete
    assert cache.get(10) is None
    assert len(cache.warnings) == 2


def test_factor_uses_cache(tmp_path):
    path = str(tmp_path / "factors.jsonl")
    cache = FactorCache(path)
    wrong = Factorization({458330: 1}, 1)  # deliberately silly, but complete
    cache.store(458330, wrong)
    hit = factor(458330, cache=cache)
    assert hit.factors == {458330: 1}  # came from the cache, not recomputed


# --- main entry -------------------------------------------------------------------------


def test_main_writes_report(capsys):
    code = main(["zsigmondy", "--poly", "z^2+1", "--alpha", "0", "--n", "6"])
    captured = capsys.readouterr()
    assert code == 0
    assert '"zsigmondy_set"' in captured.out


def test_main_env_cache(tmp_path, monkeypatch, capsys):
    cache_file = tmp_path / "env-cache.jsonl"
    monkeypatch.setenv("DYNZSIG_CACHE", str(cache_file))
    code = main(["rigid-check", "--poly", "z^2+1", "--alpha", "0", "--n", "6"])
    capsys.readouterr()
    assert code == 0
    assert cache_file.exists()


def test_main_flag_overrides_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("DYNZSIG_CACHE", str(tmp_path / "ignored.jsonl"))
    explicit = tmp_path / "explicit.jsonl"
    code = main(
        ["rigid-check", "--poly", "z^2+1", "--alpha", "0", "--n", "6", "--cache", str(explicit)]
    )
    capsys.readouterr()
    assert code == 0
    assert explicit.exists()
    assert not (tmp_path / "ignored.jsonl").exists()
