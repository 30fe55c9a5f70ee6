import numpy as np
from hypothesis import given, strategies as st

from qharness.sim.rng import mix64, path_keys, uniforms


def splitmix64_reference(seed, n):
    """Textbook SplitMix64 in pure Python integers."""
    mask = (1 << 64) - 1
    state = seed & mask
    out = []
    for _ in range(n):
        state = (state + 0x9E3779B97F4A7C15) & mask
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        out.append(z ^ (z >> 31))
    return out


def test_first_outputs_match_reference():
    assert splitmix64_reference(0, 1)[0] == 0xE220A8397B1DCDAF
    keys = path_keys(0, np.arange(3, dtype=np.uint64))
    assert [int(k) for k in keys] == splitmix64_reference(0, 3)


@given(st.integers(0, 2**63), st.integers(0, 50), st.integers(0, 5))
def test_uniform_slot_matches_reference(seed, path, slot):
    key = splitmix64_reference(seed, path + 1)[-1]
    bits = splitmix64_reference(key, slot + 1)[-1]
    want = ((bits >> 11) + 0.5) * 2.0**-53
    got = uniforms(seed, np.array([path], dtype=np.uint64), slot)[0]
    assert got == want
    assert 0.0 < got < 1.0


def test_paths_do_not_depend_on_batch():
    all_paths = uniforms(9, np.arange(100, dtype=np.uint64), 2)
    some = uniforms(9, np.arange(40, 60, dtype=np.uint64), 2)
    assert np.array_equal(all_paths[40:60], some)


def test_uniformity_rough():
    u = uniforms(1, np.arange(100_000, dtype=np.uint64), 1)
    assert abs(u.mean() - 0.5) < 0.005
    assert abs(u.var() - 1 / 12) < 0.002
    assert mix64(np.array([0], dtype=np.uint64)).dtype == np.uint64
