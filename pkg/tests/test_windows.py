import pytest
from hypothesis import given, strategies as st

from ftqc_reaction.latency import DECODER_PRESETS, CommLatencies
from ftqc_reaction.windows import (Box, DecodingWindow, commits_tile, fleet_estimate, k_ls, k_mem,
                                   layer_commits_disjoint, memory_windows, reference_scenario,
                                   surgery_windows, topological_order, windows_from_jsonl,
                                   windows_to_jsonl)
from ftqc_reaction.units import us

odd_d = st.integers(1, 25).map(lambda k: 2 * k + 1)
ASIC = DECODER_PRESETS["cc-asic"]


def _surgery_domain(nx, nz):
    return Box(0, 2 * nx, 0, 2 * nz, 2, 4)


@given(st.integers(1, 8), st.integers(1, 8), odd_d, st.booleans())
def test_surgery_windows_tile_and_order(nx, nz, d, has_y):
    ws = surgery_windows(nx, nz, d, has_y)
    assert len(ws) == nx * nz
    assert commits_tile(ws, _surgery_domain(nx, nz))
    assert layer_commits_disjoint(ws)
    order = topological_order(ws)
    pos = {wid: k for k, wid in enumerate(order)}
    for w in ws:
        assert w.extent.contains(w.commit)
        assert all(pos[p] < pos[w.id] for p in w.depends_on)


@given(st.integers(1, 8), st.integers(1, 8), st.booleans())
def test_layer_count(nx, nz, has_y):
    layers = {w.layer for w in surgery_windows(nx, nz, 5, has_y)}
    if nx * nz >= 3:
        assert len(layers) == (3 if has_y else 2)
    else:
        assert len(layers) <= (3 if has_y else 2)


def test_y_layer_extents():
    d = 11
    ws = {w.id: w for w in surgery_windows(3, 3, d, True)}
    centre = [w for w in ws.values() if w.commit.x0 == 2 and w.commit.z0 == 2][0]
    sizes = {"1": (4, 4), "2": (4, 3), "3": (2, 2)}
    assert (centre.extent_x, centre.extent_z) == sizes[centre.layer]
    for w in ws.values():
        assert w.rounds(d) == 2 * d


@pytest.mark.parametrize("has_y", [True, False])
def test_later_edge_neighbours_are_buffered(has_y):
    ws = surgery_windows(6, 6, 7, has_y)
    for w in ws:
        for v in ws:
            di, dj = abs(v.commit.x0 - w.commit.x0), abs(v.commit.z0 - w.commit.z0)
            if di + dj == 2 and int(v.layer) > int(w.layer):
                assert w.extent.overlaps(v.commit)
                assert w.id in v.depends_on


@given(st.integers(1, 12), odd_d, st.integers(1, 3))
def test_memory_windows_tile(n, d, px):
    ws = memory_windows(n, d, patch_x=px)
    domain = Box(0, 2 * px, 0, 2, 0, 8 * (n - 1) + 6)
    assert commits_tile(ws, domain)
    assert layer_commits_disjoint(ws)
    topological_order(ws)
    a = [w for w in ws if w.layer == "A"]
    assert [w.extent.t0 for w in a] == [8 * j for j in range(n)]
    assert all(w.rounds(d) == 3 * d for w in ws)


def test_cycle_detected():
    b = Box(0, 2, 0, 2, 0, 2)
    ws = [DecodingWindow("a", "spatial", "1", b, b, ("b",)), DecodingWindow("b", "spatial", "2", b, b, ("a",))]
    with pytest.raises(ValueError):
        topological_order(ws)
    with pytest.raises(ValueError):
        topological_order(ws[:1])


@given(st.integers(1, 5), st.integers(1, 5), odd_d, st.booleans())
def test_jsonl_round_trip(nx, nz, d, has_y):
    ws = surgery_windows(nx, nz, d, has_y) + memory_windows(2, d, prefix="m:")
    back, dd = windows_from_jsonl(windows_to_jsonl(ws, d))
    assert dd == d and back == ws


def test_box_validation():
    with pytest.raises(ValueError):
        Box(2, 1, 0, 1, 0, 1)


def test_fleet_numbers():
    c = CommLatencies()
    q = 24_000
    f = fleet_estimate(q, 31, ASIC, c)
    assert f.multiplicity == 4
    assert f.k_ls == k_ls(q, 4) == 64_000
    assert f.k_core == f.k_mem + f.k_ls
    assert f.k_total >= f.k_core
    assert k_mem(1, 31, ASIC, us(0.5), us(31)) >= 1


def test_reference_scenario_reports_discrepancy():
    ref = reference_scenario()
    assert ref["reference_k_total"] == 15_000
    assert ref["fleet"].k_total == 9562
    assert {a["k_total"] for a in ref["alternatives"]} == {9562, 19126}
    assert ref["ram_mb"] == pytest.approx(1800, rel=0.3)
    assert "discrepancy" in ref


def test_fleet_validation():
    with pytest.raises(ValueError):
        k_ls(0)
    with pytest.raises(ValueError):
        k_ls(5, 0)
    with pytest.raises(ValueError):
        fleet_estimate(10, 11, ASIC, CommLatencies(), msf_uplift=-0.1)
