# Smoke checks for the _core module: the bindings load, a build round-trips
# through numpy, errors map to the python exception types, and the config
# runner is byte-deterministic.  Depth lives in the C++ suites.
import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.environ["RELKIT_CORE_DIR"])

import _core as rk  # noqa: E402


def test_asym_build_certifies_and_evaluates():
    r = rk.make_relation("sin-diff", [3.0])
    dom = rk.BoxDomain([0.0], [1.0])
    build = rk.build_asymmetric_approximator(r, dom, 0.2, seed=5)
    assert build.sup_error_heldout <= 0.2
    assert build.l2_error_heldout <= build.sup_error_heldout
    # the reported sup error is exactly the max over the held-out pairs
    worst = max(abs(r(x, y) - build.relation(x, y)) for x, y in build.heldout)
    assert worst == pytest.approx(build.sup_error_heldout, abs=1e-12)
    # feature maps expose the inner-product form itself
    x, y = build.heldout[0]
    assert float(np.dot(build.relation.phi(x), build.relation.psi(y))) == pytest.approx(
        build.relation(x, y), abs=1e-12
    )


def test_python_callable_as_relation():
    r = rk.black_box_relation(lambda x, y: float(x[0] * y[0]))
    assert r(np.array([2.0]), np.array([3.0])) == 6.0
    pairs = rk.quasirandom_pairs(rk.BoxDomain([0.0], [1.0]), 50, 9)
    assert rk.sup_error(r, r, pairs) == 0.0


def test_select_and_attention():
    u = rk.make_utility("neg-sqdist")
    ctx = [np.array([0.1]), np.array([0.4]), np.array([0.9])]
    assert rk.select(u, np.array([0.5]), ctx).index == 1
    # a python callable is a valid score function
    mod = rk.AttentionModule.from_scores(
        lambda q, x: math.log(9.0) if x[0] < 0.5 else 0.0, 1.0
    )
    w = rk.attention_weights(mod, np.array([0.0]), [np.array([0.0]), np.array([1.0])])
    assert w[0] == pytest.approx(0.9, abs=1e-12)
    # beta = 0 attends uniformly: the output is the context mean
    mod.beta = 0.0
    out = rk.attention(mod, np.array([0.0]), ctx)
    assert out[0] == pytest.approx((0.1 + 0.4 + 0.9) / 3.0, abs=1e-12)


def test_margin_to_verification_chain():
    u = rk.make_utility("neg-sqdist")
    dom = rk.BoxDomain([0.0], [1.0])
    build = rk.build_attention_from_utility(u, dom, 0.4, seed=3)
    mod = build.module
    mod.beta = rk.calibrate_beta(0.4, 4, 1.0, 0.1)
    sampler = rk.uniform_context_sampler(dom, 4, 17)
    report = rk.verify_retrieval(mod, u, sampler, eta=0.4, trials=300)
    assert report.trials == 300
    assert 0.0 <= report.success_rate <= 1.0
    assert report.conditional_success_rate == 1.0 or math.isnan(
        report.conditional_success_rate
    )
    assert '"success_rate"' in report.to_json()


def test_budget_closed_forms():
    b = rk.neuron_budget_relu(1, 1.0, 1.0, 1.0, 1)
    assert b.value == 4.0
    assert not b.overflow


def test_run_config_text_deterministic():
    cfg = (
        "[relation]\nid = sin-diff\nparams = 3\n"
        "[build]\nepsilon = 0.2\n[experiment]\nseed = 11\n"
    )
    a = rk.run_config_text(cfg)
    b = rk.run_config_text(cfg)
    assert a == b
    assert a.startswith("[\n") and a.endswith("]\n")
    assert '"sup_error"' in a


def test_exception_mapping():
    with pytest.raises(rk.ConfigurationError):
        rk.parse_config("[domain]\nwidth = 3\n")
    with pytest.raises(rk.InvalidArgumentError):
        rk.BoxDomain([1.0], [0.0])
    with pytest.raises(rk.BudgetExceededError):
        rk.place_landmarks(rk.BoxDomain([0.0] * 5, [1.0] * 5), 0.01)
    assert issubclass(rk.ConfigurationError, rk.RelkitError)
