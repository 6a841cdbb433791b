import math

import pytest

from simlayer.errors import InvalidParameter
from simlayer.gfamily import Branch, GKind, check_hypotheses, eval_g, make_builtin, \
    max_abs_g_on_interval, normalize_scaling, parse_g_expression, resolve_branch


def test_builtin_examples():
    assert eval_g(make_builtin("falkner-skan", 1.0), 0.0) == 1.0
    assert eval_g(make_builtin("blasius"), 7.3) == 0.0
    assert eval_g(make_builtin("mixed-convection", 1.0), 0.5) == 0.25
    assert eval_g(make_builtin("free-convection", 1.0), 2.0) == -4.0
    assert eval_g(make_builtin("falkner-skan", 0.5), 1.0) == 0.0
    assert eval_g(parse_g_expression("x^2"), 3.0) == 9.0


def test_blasius_ignores_m():
    assert make_builtin("blasius", 5.0).m is None


@pytest.mark.parametrize("kind", ["falkner-skan", "free-convection", "mixed-convection"])
def test_bad_m(kind):
    with pytest.raises(InvalidParameter):
        make_builtin(kind, -1.0)
    with pytest.raises(InvalidParameter):
        make_builtin(kind, math.nan)
    with pytest.raises(InvalidParameter):
        make_builtin(kind)


def test_expr_kind_needs_parser():
    with pytest.raises(InvalidParameter):
        make_builtin("expr", 1.0)


def test_to_text_matches_builtin():
    for g in [make_builtin("falkner-skan", 0.3), make_builtin("free-convection", 2.0),
              make_builtin("mixed-convection", -0.5), make_builtin("blasius")]:
        h = parse_g_expression(g.to_text())
        for x in [-1.5, 0.0, 0.25, 1.0, 3.0]:
            assert h(x) == pytest.approx(g(x), rel=1e-14, abs=1e-15)


def test_describe():
    assert make_builtin("falkner-skan", 1.0).describe() == {"kind": "falkner-skan", "m": 1.0}
    assert parse_g_expression("x^2").describe() == {"kind": "expr", "expr": "x^2"}
    assert make_builtin("blasius").describe() == {"kind": "blasius"}


def test_check_hypotheses_examples():
    r = check_hypotheses(make_builtin("falkner-skan", 1.0), 0.0, 0.0, 1.0)
    assert r.branch is Branch.CONVEX and r.g_at_lambda == 0.0 and r.sign_ok
    assert r.admissible and r.violations == ()
    assert check_hypotheses(make_builtin("blasius"), 0.0, 1.0, 1.0).branch is Branch.LINEAR
    r = check_hypotheses(make_builtin("free-convection", 1.0), 0.0, 1.0, 0.0)
    assert r.branch is Branch.CONCAVE and r.sign_ok and r.interval == (0.0, 1.0)


def test_blasius_is_admitted_as_the_zero_limit():
    r = check_hypotheses(make_builtin("blasius"), 0.0, 0.0, 1.0)
    assert not r.sign_ok and r.identically_zero and r.admissible


def test_sign_violations_are_reported():
    r = check_hypotheses(make_builtin("falkner-skan", -0.6), 0.0, 0.0, 1.0)
    assert not r.sign_ok and r.violations and not r.admissible
    assert all(v <= 0 for _, v in r.violations)
    # an interior root of the quadratic breaks the strict sign
    r = check_hypotheses(parse_g_expression("(x-0.5)^2*(1-x)"), 0.0, 0.0, 1.0)
    assert not r.sign_ok
    assert any(x == pytest.approx(0.5) for x, _ in r.violations)


def test_g_lambda_nonzero():
    r = check_hypotheses(make_builtin("falkner-skan", 1.0), 0.0, 0.0, 0.5)
    assert not r.g_lambda_zero and not r.admissible


def test_g_lambda_tolerance():
    # accept |g(lambda)| <= 1e-9 (1 + max|g|) from float constants
    ok = check_hypotheses(parse_g_expression("1.0000000001-x^2"), 0.0, 0.0, 1.0)
    bad = check_hypotheses(parse_g_expression("1.00001-x^2"), 0.0, 0.0, 1.0)
    assert ok.g_lambda_zero and not bad.g_lambda_zero


def test_expression_sign_check_open_end():
    # g vanishes at lambda, which is outside the theorem's open interval
    r = check_hypotheses(parse_g_expression("1-x"), 0.0, 0.0, 1.0)
    assert r.sign_ok and r.admissible


def test_pole_is_flagged():
    r = check_hypotheses(parse_g_expression("(1-x)/(x-0.5)"), 0.0, 0.0, 1.0)
    assert r.pole_detected and not r.sign_ok and not r.admissible


def test_negative_inputs_rejected():
    with pytest.raises(InvalidParameter):
        check_hypotheses(make_builtin("blasius"), 0.0, -1.0, 1.0)


def test_sign_ok_implies_no_violations():
    for g, b, lam in [(make_builtin("mixed-convection", 2.0), 0.2, 1.0),
                      (make_builtin("free-convection", 3.0), 2.0, 0.0),
                      (parse_g_expression("x*(1-x)"), 0.5, 1.0)]:
        r = check_hypotheses(g, 0.0, b, lam)
        assert r.sign_ok and r.violations == ()


def test_resolve_branch():
    assert resolve_branch(1.0, 1.0) is Branch.LINEAR
    assert resolve_branch(1.0, 1.0 + 1e-15) is Branch.LINEAR
    assert resolve_branch(2.0, 1.0) is Branch.CONCAVE
    assert resolve_branch(0.0, 1.0) is Branch.CONVEX


def test_max_abs_examples():
    assert max_abs_g_on_interval(make_builtin("blasius"), 0.0, 1.0) == 0.0
    assert max_abs_g_on_interval(make_builtin("falkner-skan", 1.0), 0.0, 1.0) == 1.0
    assert max_abs_g_on_interval(make_builtin("free-convection", 1.0), 0.0, 2.0) == 4.0


def test_max_abs_expression_refines_interior_peak():
    # peak of x(1-x) at 1/3 of a grid cell away from any sample point
    g = parse_g_expression("x*(0.7-x)")
    assert max_abs_g_on_interval(g, 0.0, 0.7) >= 0.1225 - 1e-9 * 1.1225
    with pytest.raises(InvalidParameter):
        max_abs_g_on_interval(g, 1.0, 0.0)


def test_normalize_scaling_examples():
    a, b, lam, recipe = normalize_scaling(1.0, 2.0, 1.0, 0.0)
    assert (a, b, lam) == (2.0, 1.0, 0.0)
    assert recipe.to_original(0.3, 1.0, 0.5, 0.2) == (0.3, 1.0, 0.5, 0.2)
    assert normalize_scaling(4.0, 1.0, 1.0, 0.0)[:3] == (2.0, 1.0, 0.0)
    with pytest.raises(InvalidParameter):
        normalize_scaling(0.0, 1.0, 1.0, 0.0)


def test_scaling_recipe_maps_back():
    # u(t) = f(sqrt(a) t)/sqrt(a); check u(0) = alpha and u'(0) = beta
    alpha, beta, a = 1.5, 0.7, 9.0
    a2, b2, _, recipe = normalize_scaling(a, alpha, beta, 0.0)
    t, u, up, _ = recipe.to_original(0.0, a2, b2, 0.0)
    assert (t, u, up) == (0.0, alpha, beta)
    assert recipe.t_to_normalized(2.0) == 6.0
    h = make_builtin("falkner-skan", 1.0)
    g = recipe.scale_g(h)
    assert g(0.5) == pytest.approx(h(0.5) / a, rel=1e-15)
    assert g.kind is GKind.EXPRESSION
