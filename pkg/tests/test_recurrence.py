from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randrec import recurrence as R
from randrec import systems as S
from randrec.measure import EmpiricalMeasure
from randrec.phase_space import InvalidInputError, Space, in_ball
from randrec.rng import derive_seeds
from randrec.slopes import InsufficientDataError, geometric_grid

from markov_oracle import mod5_expected_return

SYSTEMS = {
    "markov23": S.markov23(),
    "catmaps": S.cat_maps(),
    "perturbed-circle": S.perturbed_circle(),
    "rotation-identity": S.rotation_identity(),
    "perturbed-interval": S.perturbed_interval(),
}


def forced(system, label):
    w = [0.0] * system.n_labels
    w[label] = 1.0
    return replace(system, noise=S.IID(tuple(w)))


def q(x, r, p=0, n_max=10**5):
    return R.ReturnTimeQuery(np.atleast_1d(np.asarray(x, dtype=float)), r, p, n_max)


# ---- quenched


@pytest.mark.parametrize("name", sorted(SYSTEMS))
def test_whole_space_returns_at_once(name):
    s = SYSTEMS[name]
    x = [0.3] * s.space.dim
    out = R.quenched_return_time(s, S.NoiseStream(s.noise, 5), q(x, 1.0 if s.space.dim == 1 else 1.5))
    assert out.hit and out.value == 1


def test_quenched_examples():
    s = forced(S.markov23(), 0)
    assert R.quenched_return_time(s, S.NoiseStream(s.noise, 0), q(1 / 3, 0.05)).value == 2
    r = forced(S.rotation_identity(), 1)
    assert R.quenched_return_time(r, S.NoiseStream(r.noise, 0), q(0.42, 1e-9)).value == 1


def test_quenched_does_not_consume_stream():
    s = S.markov23()
    st_ = S.NoiseStream(s.noise, 3)
    a = R.quenched_return_time(s, st_, q(0.2, 0.01))
    assert st_.position == 0
    assert R.quenched_return_time(s, st_, q(0.2, 0.01)) == a


def test_capped_outcome():
    s = forced(S.rotation_identity(), 0)
    out = R.quenched_return_time(s, S.NoiseStream(s.noise, 0), q(0.1, 1e-12, 0, 1000))
    assert out.kind == "capped" and out.value == 1000 and not out.hit


def test_query_validation():
    s = S.markov23()
    st_ = S.NoiseStream(s.noise, 0)
    for bad in (q(0.1, 0.0), q(0.1, 0.1, -1), q(0.1, 0.1, 5, 5), q(0.1, 0.1, 1.5)):
        with pytest.raises(InvalidInputError):
            R.quenched_return_time(s, st_, bad)


# ---- return to a fixed set


def test_return_time_to_set_examples():
    s = forced(S.markov23(), 1)
    st_ = S.NoiseStream(s.noise, 0)
    assert R.return_time_to_set(s, st_, [0.1], [0.1], 0.01).value == 4
    assert R.return_time_to_set(s, st_, [0.1], [0.7], 1.0).value == 1
    with pytest.raises(InvalidInputError):
        R.return_time_to_set(s, st_, [0.1], [0.5], 0.01)
    m = S.markov23()
    st2 = S.NoiseStream(m.noise, 8)
    assert R.return_time_to_set(m, st2, [0.3], [0.3], 0.01, 2) == R.quenched_return_time(m, st2, q(0.3, 0.01, 2))


# ---- properties


def _times(s, seed, x, radii, p, n_max=20_000):
    from randrec import kernels

    raw = kernels.get().return_times(*s.pack(), (seed, -1, float("nan")), x, x, radii, p, n_max)
    return np.where(raw == 0, np.inf, raw)


@pytest.mark.parametrize("name", sorted(SYSTEMS))
@settings(max_examples=40)
@given(seed=st.integers(0, 2**64 - 1), u=st.floats(0, 1, exclude_max=True), p=st.integers(0, 6))
def test_monotone_in_r_and_p(name, seed, u, p):
    s = SYSTEMS[name]
    x = np.full(s.space.dim, u)
    radii = 0.3 * 0.5 ** np.arange(10)
    t0 = _times(s, seed, x, radii, 0)
    tp = _times(s, seed, x, radii, p)
    tq = _times(s, seed, x, radii, p + 3)
    assert np.all(t0[1:] >= t0[:-1]) and np.all(tp[1:] >= tp[:-1])
    assert np.all(t0 <= tp) and np.all(tp <= tq)
    assert np.all(tp[np.isfinite(tp)] > p)


@pytest.mark.parametrize("name", sorted(SYSTEMS))
def test_hit_certificates(name):
    """Re-running the orbit independently confirms each hit and the misses before it."""
    s = SYSTEMS[name]
    rng = np.random.default_rng(7)
    for i in range(100):
        seed = int(rng.integers(0, 2**63))
        x = rng.random(s.space.dim)
        r = float(rng.choice([0.2, 0.05, 0.01]))
        p = int(rng.integers(0, 4))
        out = R.quenched_return_time(s, S.NoiseStream(s.noise, seed), q(x, r, p, 50_000))
        if not out.hit:
            continue
        orbit = S.random_orbit(s, S.NoiseStream(s.noise, seed), x, out.value)
        assert in_ball(s.space, orbit[0], r, orbit[out.value])
        assert not any(in_ball(s.space, orbit[0], r, orbit[k]) for k in range(p + 1, out.value))


# ---- annealed


def test_annealed_whole_space():
    est = R.annealed_return_time(S.cat_maps(), [0.2, 0.7], 1.0, 0, 500)
    assert est.mean == 1.0 and est.n_capped == 0 and not est.lower_bound


def test_annealed_capped_is_lower_bound():
    est = R.annealed_return_time(S.markov23(), [0.2137], 1e-6, 2, 50, n_max=100)
    assert est.n_capped > 0 and est.lower_bound and est.mean >= 3


@pytest.mark.parametrize("noise", [S.IID((0.5, 0.5)), S.MarkovChain(S.MARKOV23_MATRIX)], ids=["iid", "markov"])
def test_mod5_oracle(noise):
    s = S.markov23(noise)
    oracle = mod5_expected_return(noise)
    est = R.annealed_return_time(s, [0.2], 0.05, 0, 20_000, 10**6, master_seed=31)
    assert oracle == pytest.approx(4.0, abs=1e-12)
    assert abs(est.mean - oracle) <= 3 * est.std_error


def test_atoms():
    assert abs(R.aperiodicity_atom(S.rotation_identity(), [0.3], 1e-3, 10_000, 2) - 0.5) <= 0.02
    assert R.aperiodicity_atom(S.markov23(), [0.3141], 1e-3, 10_000, 2) < 0.005
    assert R.aperiodicity_atom(S.markov23(), [0.3141], 1.0, 100, 2) == 1.0


def test_noninstantaneous_equivalence():
    m = S.markov23()
    assert R.noninstantaneous_equivalence(m, 2000, [2**-10, 2**-14], 5, master_seed=4) >= 0.99
    rot = R.noninstantaneous_equivalence(S.rotation_identity(), 2000, [2**-14], 2, n_max=10**5, master_seed=4)
    assert rot < 0.9
    assert R.noninstantaneous_equivalence(m, 100, [1.0], 1) == 0.0
    with pytest.raises(InvalidInputError):
        R.noninstantaneous_equivalence(m, 10, [0.1], 0)


# ---- rates


def test_fixed_point_rate_is_zero():
    s = forced(S.markov23(), 0)
    est = R.quenched_rate(s, 0, [0.0], geometric_grid(0.1, 0.5, 8), p=0, n_max=100)
    assert np.all(est.times == 1) and est.slope == 0.0


def test_rate_insufficient_data_keeps_partial():
    with pytest.raises(InsufficientDataError) as err:
        R.quenched_rate(S.markov23(), 1, [0.3], geometric_grid(2**-10, 0.5, 6), p=8, n_max=200)
    part = err.value.partial
    assert part is not None and part.capped.sum() >= 4 and len(part.rows()) == 6


def test_rate_grid_must_decrease():
    with pytest.raises(ValueError):
        R.quenched_rate(S.markov23(), 1, [0.3], [0.1, 0.2, 0.05])


def test_annealed_rate_fields():
    est = R.annealed_rate(S.markov23(), [0.3141], geometric_grid(2**-4, 0.5, 6), M=100, master_seed=3)
    assert est.slope_lower <= est.slope_upper
    assert est.n_excluded == 0 and np.all(est.std_errors > 0)
    assert 0.7 < est.slope < 1.3


# ---- Kac


def test_kac_whole_space_exact():
    est = R.kac_check(S.markov23(), [0.5], 1.0, 100, 5)
    assert est.estimate == 1.0 and est.ball_mass == 1.0


def test_kac_catmaps():
    est = R.kac_check(S.cat_maps(), [0.5, 0.5], 0.1, 400, 20, master_seed=3)
    assert est.ball_mass == pytest.approx(np.pi * 0.01, abs=1e-15)
    assert abs(est.estimate - 1.0) <= 3 * est.std_error


def test_kac_zero_mass_and_budget():
    s = S.perturbed_interval().with_measure(EmpiricalMeasure.from_samples(Space.INTERVAL, [[0.37]]))
    with pytest.raises(InvalidInputError):
        R.kac_check(s, [0.9], 0.01, 10, 2)
    with pytest.raises(InvalidInputError):
        R.conditioned_points(S.markov23(), [0.5], 1e-9, 5, 0, budget=1000)


def test_kac_empirical_system():
    s = S.perturbed_interval()
    from randrec.measure import build_empirical

    s = s.with_measure(build_empirical(s, 200_000, seed=2))
    est = R.kac_check(s, [0.5], 0.05, 300, 20, master_seed=5)
    assert abs(est.estimate - 1.0) <= 4 * est.std_error + 0.02


# ---- determinism


def test_worker_count_invariance():
    s = S.markov23()
    a = R.annealed_times(s, [0.3], geometric_grid(2**-6, 0.5, 6), 8, 1500, 10**6, 9, workers=1)
    b = R.annealed_times(s, [0.3], geometric_grid(2**-6, 0.5, 6), 8, 1500, 10**6, 9, workers=4)
    assert np.array_equal(a, b)
    k1 = R.kac_check(s, [0.5], 0.05, 600, 10, master_seed=1, workers=1)
    k3 = R.kac_check(s, [0.5], 0.05, 600, 10, master_seed=1, workers=3)
    assert k1 == k3
