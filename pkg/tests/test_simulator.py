import math
from fractions import Fraction

import numpy as np
import pytest

from racelab.residues import characters, unit_group
from racelab.simulator import (DomainError, EmptyDominantSetError,
                               OverflowRiskError, RaceFunctionSet,
                               RecipeMismatchError, corollary13_sum,
                               dominant_member_values, dominant_profile,
                               f_rho, f_rho_parts, li, one_period_trace,
                               race_values, theorem_decomposition, trace)
from racelab.zerosys import Zero, ZeroSystem


def label_with_phase(q, a, phase):
    chars = characters(q)
    return next(i for i, c in enumerate(chars) if c.phase(a) == phase)


def single_zero_system(q=5, beta=0.75, gamma=10.0):
    lbl = label_with_phase(q, 2, Fraction(3, 4))  # chi(2) = -i
    z = Zero(beta, gamma)
    return ZeroSystem(q, {lbl: {z: 1}}, height_lattice=gamma), z, lbl


def test_f_rho_main_term():
    main, tail, bound = f_rho_parts(0.75, math.exp(4))
    assert main.real == pytest.approx(math.exp(3) / 3, rel=1e-12)
    assert main.imag == 0


def test_f_rho_at_two():
    main, tail, bound = f_rho_parts(0.75 + 10j, 2.0)
    assert tail == 0 and bound == 0.0
    assert f_rho(0.75 + 10j, 2.0) == main


def test_f_rho_domain_errors():
    with pytest.raises(DomainError):
        f_rho(0.75, 1.5)
    with pytest.raises(DomainError):
        f_rho(0.0, 10.0)


def test_f_rho_asymptotic_constant():
    # |f - main| <= K x^beta / (|rho|^2 log^2 x) with measured K < 10
    worst = 0.0
    for beta in (0.6, 0.9):
        for gamma in (5.0, 50.0, 500.0):
            for x in (1e2, 1e5, 1e8):
                rho = complex(beta, gamma)
                main, tail, bound = f_rho_parts(rho, x)
                k = abs(tail) * abs(rho) ** 2 * math.log(x) ** 2 / x**beta
                worst = max(worst, k)
                assert abs(tail) <= bound + 1e-12
    assert worst < 10.0


def test_race_values_empty_system():
    system = ZeroSystem(5, {})
    s = RaceFunctionSet(5, system, (1, 2, 3, 4), pi_proxy="li")
    vals = race_values(s, 1000.0)
    expect = li(1000.0) / 4
    for v in vals.values():
        assert v == pytest.approx(expect)


def test_race_differences_proxy_invariant():
    system, z, lbl = single_zero_system()
    x = 5000.0
    d = {}
    for proxy in ("li", "zero"):
        s = RaceFunctionSet(5, system, (1, 2), pi_proxy=proxy)
        vals = race_values(s, x)
        d[proxy] = vals[2] - vals[1]
    assert d["li"] == pytest.approx(d["zero"], abs=1e-12)


def test_race_single_zero_hand_expansion():
    system, z, lbl = single_zero_system()
    chi = characters(5)[lbl]
    s = RaceFunctionSet(5, system, (1, 2), pi_proxy="li")
    x = math.exp(4)
    vals = race_values(s, x)
    hand = -(2 / 4) * ((chi(2).conjugate() - chi(1).conjugate())
                       * f_rho(z.rho, x)).real
    assert vals[2] - vals[1] == pytest.approx(hand, rel=1e-9)


def test_ordering_scale_invariance():
    system, _, _ = single_zero_system()
    x = 12345.0
    orders = []
    for proxy in ("li", "zero"):
        s = RaceFunctionSet(5, system, (1, 2, 3, 4), pi_proxy=proxy)
        vals = race_values(s, x)
        orders.append(tuple(sorted(vals, key=vals.get)))
    assert orders[0] == orders[1]


def test_dominant_profile_amplitude():
    system, z, _ = single_zero_system()
    s = RaceFunctionSet(5, system, (1, 2), pi_proxy="zero")
    prof = dominant_profile(s, 2, 1)
    (amp, freq, _), = prof.poly.terms
    assert freq == z.gamma
    assert amp == pytest.approx(abs(complex(-1, -1)) / abs(z.rho))
    assert prof.beta == z.beta


def test_dominant_profile_tracks_scaled_difference():
    system, z, _ = single_zero_system()
    s = RaceFunctionSet(5, system, (1, 2), pi_proxy="zero")
    prof = dominant_profile(s, 2, 1)
    for u in (20.0, 30.0, 40.0):
        x = math.exp(u)
        err = abs(prof.scaled_difference(s, x) - prof(u))
        assert err <= prof.residual_bound(x)


def test_dominant_profile_errors():
    system, _, _ = single_zero_system()
    s = RaceFunctionSet(5, system, (1, 2, 3, 4), pi_proxy="zero")
    with pytest.raises(ValueError):
        dominant_profile(s, 2, 2)
    # pair separated by no character carrying zeros
    lbl_r = label_with_phase(5, 2, Fraction(1, 2))
    sys_r = ZeroSystem(5, {lbl_r: {Zero(0.75, 5.0): 1}})
    s_r = RaceFunctionSet(5, sys_r, (1, 4), pi_proxy="zero")
    with pytest.raises(EmptyDominantSetError):
        dominant_profile(s_r, 4, 1)  # chi(4) = 1 on the real character


def test_corollary13_examples():
    assert corollary13_sum(ZeroSystem(3, {}), 2, 1, 5.0) == 0.0
    sigma, t = 0.5, 8.0
    lbl = label_with_phase(3, 2, Fraction(1, 2))  # chi(2) = -1
    system = ZeroSystem(3, {lbl: {Zero(sigma, t): 1}}, hypothetical=False)
    u = (math.pi / 2 - math.atan(sigma / t)) / t
    val = corollary13_sum(system, 2, 1, u)
    assert val == pytest.approx(2 / math.sqrt(t * t + sigma * sigma))
    # t = 0 convention: the angle shift becomes pi/2
    sys0 = ZeroSystem(3, {lbl: {Zero(0.75, 0.0): 1}})
    v0 = corollary13_sum(sys0, 2, 1, 0.0)
    # nu(b) - nu(a) = sin(pi/2) - sin(pi/2 - pi) = 2, halved at a real zero
    assert v0 == pytest.approx(2 * 0.5 / 0.75)


def test_corollary13_mixed_levels_rejected():
    lbl = label_with_phase(3, 2, Fraction(1, 2))
    system = ZeroSystem(3, {lbl: {Zero(0.6, 5.0): 1, Zero(0.7, 9.0): 1}})
    with pytest.raises(ValueError):
        corollary13_sum(system, 2, 1, 1.0)


def test_angle_shift_bound():
    from racelab.simulator import angle_shift_bound
    sigma, t = 0.5, 40.0
    bound = angle_shift_bound(sigma, t)
    assert bound == pytest.approx(sigma / t)
    v = np.linspace(0, 2 * math.pi, 1001)
    gap = np.max(np.abs(np.sin(v + math.atan(sigma / t)) - np.sin(v)))
    assert gap <= bound


def test_decomposition_weight_bound():
    # |m(gamma)| <= n(gamma) for the order-3 split
    q = 7
    k1 = label_with_phase(q, 2, Fraction(1, 3))
    k2 = label_with_phase(q, 2, Fraction(2, 3))
    system = ZeroSystem(q, {k1: {Zero(0.75, 5.0): 2},
                            k2: {Zero(0.75, 5.0): 1, Zero(0.75, 9.0): 3}})
    d = theorem_decomposition(system, "thm34", {"a": 2})
    for g in d["n"]:
        assert abs(d["m"][g]) <= d["n"][g]
    u = np.linspace(0, 4, 257)
    assert np.max(np.abs(d["f"](u) - d["f1"](u) - d["f2"](u))) < 1e-12
    assert np.max(np.abs(d["g"](u) - d["g1"](u) + d["g2"](u))) < 1e-12


def test_decomposition_order4_h_support():
    # h is built only from the K1/K3 weights at the second level
    q = 5
    k1 = label_with_phase(q, 2, Fraction(1, 4))
    k2 = label_with_phase(q, 2, Fraction(2, 4))
    k3 = label_with_phase(q, 2, Fraction(3, 4))
    system = ZeroSystem(q, {k1: {Zero(0.8, 20.0): 1},
                            k2: {Zero(0.8, 30.0): 2},
                            k3: {Zero(0.8, 20.0): 3}})
    d = theorem_decomposition(system, "thm39", {"a1": 2})
    assert d["k1"] == {20.0: 4, 30.0: 0}
    assert d["l"] == {20.0: 0, 30.0: 2}
    assert d["m"] == {20.0: -2, 30.0: 0}
    assert [t for _, t, _ in d["h"].terms] == [20.0]
    with pytest.raises(RecipeMismatchError):
        theorem_decomposition(system, "thm39", {"a1": 4})  # order 2


def test_decomposition_recipe_mismatch():
    system, _, _ = single_zero_system()
    with pytest.raises(RecipeMismatchError):
        theorem_decomposition(system, "thm34", {"a": 2})  # 2 has order 4 mod 5


def test_trace_empty_system():
    system = ZeroSystem(5, {})
    s = RaceFunctionSet(5, system, (1, 2, 3, 4), pi_proxy="zero")
    tr = trace(s, (0.0, 10.0), 0.1)
    assert np.all(tr.values == 0.0)
    from racelab.orderings import census
    rep = census(tr)
    assert rep.strict_count == 0 and len(rep.weak) == 1  # one all-tie chain


def test_trace_periodicity():
    system, z, _ = single_zero_system(gamma=10.0)
    s = RaceFunctionSet(5, system, (1, 2, 3, 4), pi_proxy="zero")
    tr = one_period_trace(s, samples=256)
    period = 2 * math.pi / 10.0
    again = dominant_member_values(system, s.members, tr.u + period)
    assert np.allclose(tr.values, again, atol=1e-12)
    assert tr.periodic


def test_trace_overflow_guard():
    system, _, _ = single_zero_system()
    s = RaceFunctionSet(5, system, (1, 2), pi_proxy="zero")
    with pytest.raises(OverflowRiskError):
        trace(s, (900.0, 1000.0), 1.0, mode="full-formula")


def test_member_oscillations_cancel_over_group():
    # zeros live on non-principal characters only, so summing the
    # oscillation term over every unit cancels by orthogonality
    system, _, _ = single_zero_system()
    group = unit_group(5)
    u = np.linspace(0.0, 1.0, 50)
    vals = dominant_member_values(system, group.units, u)
    assert np.max(np.abs(vals.sum(axis=0))) < 1e-12


def test_difference_antisymmetry():
    system, _, _ = single_zero_system()
    s = RaceFunctionSet(5, system, (1, 2), pi_proxy="li")
    vals = race_values(s, 500.0)
    assert (vals[2] - vals[1]) == -(vals[1] - vals[2])


def test_full_formula_agrees_with_dominant_signs():
    system, z, _ = single_zero_system(gamma=10.0)
    s = RaceFunctionSet(5, system, (1, 2), pi_proxy="zero")
    prof = dominant_profile(s, 2, 1)
    tr_full = trace(s, (12.0, 13.2), 0.05, mode="full-formula")
    tr_dom = trace(s, (12.0, 13.2), 0.05, mode="dominant-only")
    diff_full = tr_full.values[1] - tr_full.values[0]
    diff_dom = tr_dom.values[1] - tr_dom.values[0]
    checked = 0
    for k, u in enumerate(tr_full.u):
        bound = prof.residual_bound(math.exp(u))
        if abs(prof(u)) > bound:
            assert np.sign(diff_full[k]) == np.sign(diff_dom[k])
            checked += 1
    assert checked > 10
