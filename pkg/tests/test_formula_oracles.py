"""Randomized equivalence of every closed form against tests/oracles.py."""
import math

import numpy as np
import pytest

import oracles
from ftqc_reaction import latency, models, windows
from ftqc_reaction.errors import InfeasibleCommunicationError
from ftqc_reaction.units import seconds, us

N_CASES = 1000
REL = 1e-9


def rel_err(a, b):
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(a), abs(b))


def draw_fit(rng):
    return dict(mu_s=rng.uniform(0.001, 0.1), lambda_s=rng.uniform(1.5, 20.0),
                mu_t=rng.uniform(0.001, 0.1), lambda_t=rng.uniform(1.5, 20.0))


def fit_obj(f):
    return models.ErrorFitParams(mu_s=f["mu_s"], lambda_s=f["lambda_s"], mu_t=f["mu_t"], lambda_t=f["lambda_t"])


def draw_hops(rng):
    return {h: float(rng.uniform(0, 5)) for h in oracles.HOPS}


def draw_model(rng):
    return latency.DecoderModel("r", float(10 ** rng.uniform(-12, -5)), float(rng.uniform(0.3, 1.6)))


def odd(rng, lo=3, hi=61):
    return int(rng.integers(lo // 2, hi // 2 + 1)) * 2 + 1


def worst(pairs):
    return max(rel_err(a, b) for a, b in pairs)


def test_p_mem_matches_oracle():
    rng = np.random.default_rng(1)
    pairs = []
    for _ in range(N_CASES):
        f = draw_fit(rng)
        d, r = odd(rng), int(rng.integers(1, 200))
        pairs.append((models.p_mem(d, r, fit_obj(f)), oracles.p_mem(d, r, f["mu_s"], f["lambda_s"])))
    assert worst(pairs) < REL


def test_p_lattice_surgery_matches_oracle():
    rng = np.random.default_rng(2)
    pairs = []
    for _ in range(N_CASES):
        f = draw_fit(rng)
        k, b, d, r = int(rng.integers(1, 20)), int(rng.integers(0, 20)), odd(rng), int(rng.integers(1, 80))
        got = models.p_lattice_surgery(models.SurgeryShape(k, b, r, d), fit_obj(f))
        pairs.append((got, oracles.p_ls(k, b, r, d, **f)))
    assert worst(pairs) < REL


def test_p_pi8_gadget_matches_oracle():
    rng = np.random.default_rng(3)
    pairs = []
    for i in range(N_CASES):
        f = draw_fit(rng)
        d = odd(rng)
        k, b = float(rng.uniform(1, 30)), float(rng.uniform(0, 30))
        gm, gl, tau = (float(rng.uniform(0, 1e-2)), float(rng.uniform(0, 1e-2)),
                       float(rng.uniform(1e-6, 1e-4)))
        idle = None if i % 2 else float(rng.integers(1, 3000))
        got = models.p_pi8_gadget(d, k, b, seconds(gm), seconds(gl), seconds(tau), fit_obj(f), idle_qubits=idle)
        pairs.append((got, oracles.p_pi8(d, k, b, gm, gl, tau, **f, idle=idle)))
    assert worst(pairs) < REL


def test_tau_d_matches_oracle():
    rng = np.random.default_rng(4)
    pairs = []
    for _ in range(N_CASES):
        m = draw_model(rng)
        n = float(10 ** rng.uniform(0, 5))
        pairs.append((latency.tau_d(m, n).s, oracles.tau_d(m.alpha, m.beta, n)))
    assert worst(pairs) < REL


@pytest.mark.parametrize("fn", ["gamma_mem", "gamma_ls"])
def test_reaction_times_match_oracle(fn):
    rng = np.random.default_rng(5)
    pairs = []
    for _ in range(N_CASES):
        m, hops, d = draw_model(rng), draw_hops(rng), odd(rng)
        got = getattr(latency, fn)(m, d, latency.CommLatencies(**hops)).s
        pairs.append((got, getattr(oracles, fn)(m.alpha, m.beta, d, hops)))
    assert worst(pairs) < REL


def test_required_decoder_speed_matches_oracle():
    rng = np.random.default_rng(6)
    pairs, infeasible = [], 0
    for _ in range(N_CASES):
        hops, d = draw_hops(rng), odd(rng)
        tc, t = float(10 ** rng.uniform(0, 7)), float(10 ** rng.uniform(3, 12))
        want = oracles.required_speed(tc, t, d, hops)
        if want is None:
            with pytest.raises(InfeasibleCommunicationError):
                latency.required_decoder_speed(seconds(tc), t, d, latency.CommLatencies(**hops))
            infeasible += 1
            continue
        pairs.append((latency.required_decoder_speed(seconds(tc), t, d, latency.CommLatencies(**hops)).s, want))
    assert worst(pairs) < REL
    assert 0 < infeasible < N_CASES


def test_k_mem_and_k_ls_match_oracle():
    rng = np.random.default_rng(7)
    pairs = []
    for _ in range(N_CASES):
        m, d = draw_model(rng), odd(rng)
        q = int(rng.integers(1, 20000))
        tdd, tau = float(rng.uniform(0, 5e-6)), float(rng.uniform(1e-6, 1e-4))
        pairs.append((windows.k_mem(q, d, m, seconds(tdd), seconds(tau)),
                      oracles.k_mem(q, d, m.alpha, m.beta, tdd, tau)))
        mult = int(rng.integers(1, 10))
        pairs.append((windows.k_ls(q, mult), oracles.k_ls(q, mult)))
    assert worst(pairs) < REL
