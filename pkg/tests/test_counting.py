import math

import numpy as np
import pytest

from itespec.counting import (EigRecord, RegionPolicy, SpectrumSet, canonical_k, compute_spectrum,
                              cone_localization, count_table, counting_function, counting_grid,
                              mode_cutoff, mode_roots, weyl_fit, worker_count)
from itespec.dispersion import RefractionIndex, dispersion_fn, parse_index, real_roots_bisect
from itespec.errors import CoverageError
from itespec.rootcount import local_scale

CONST4 = parse_index("const:4")


def planted(lams, index=CONST4, t_max=None, mode=0):
    recs = [EigRecord.from_k(np.sqrt(complex(l)), mode) for l in lams]
    t_max = t_max or math.sqrt(max(abs(complex(l)) for l in lams)) + 1
    return SpectrumSet(recs, t_max, index, 0, False)


def test_mode_cutoff_examples():
    assert mode_cutoff(CONST4, 30) == 82
    assert mode_cutoff(parse_index("const:0.5"), 10) == 22
    cuts = [mode_cutoff(CONST4, t) for t in (5, 10, 20, 40, 80)]
    assert cuts == sorted(cuts)


def test_record_invariants():
    r = EigRecord.from_k(-2 - 1j, 3)
    assert r.k == 2 + 1j and r.lam == r.k ** 2 and r.degeneracy == 2
    assert r.delta == r.lam.real and r.nu == r.lam.imag
    assert canonical_k(-3j) == 3j
    with pytest.raises(ValueError):
        EigRecord(1, 1, 0, 2)
    with pytest.raises(ValueError):
        EigRecord(1, 1, 0, 1, source="guess")


def test_mode0_real_roots_match_bisection():
    res = mode_roots(CONST4, 0, 8.0)
    f = dispersion_fn(CONST4, 0)
    oracle = real_roots_bisect(f, 0.05, 8.0, n_grid=800, tol=1e-14)
    real = sorted(z.real for z, mult, _ in res.roots if z.imag == 0)
    assert len(real) == len(oracle)
    assert np.max(np.abs(np.array(real) - oracle)) <= 1e-8


@pytest.mark.parametrize("n0", [2.0, 4.0, 16.0, 0.5])
def test_real_axis_completeness(n0):
    idx = RefractionIndex.constant(n0)
    for m in (0, 3):
        res = mode_roots(idx, m, 10.0)
        f = dispersion_fn(idx, m)
        oracle = real_roots_bisect(f, 0.05, 10.0, n_grid=2000)
        assert sum(mult for z, mult, _ in res.roots if z.imag == 0) == len(oracle)


def test_spectrum_below_first_root_is_empty():
    spec = compute_spectrum(CONST4, 1.0, threads=1)
    assert len(spec) == 0 and spec.completeness_certificate


def test_small_spectrum_properties(const4_small):
    spec = const4_small
    assert spec.completeness_certificate
    assert spec.cutoff_mode == mode_cutoff(CONST4, 12.0)
    lam = np.array([r.lam for r in spec.records])
    assert np.all(np.diff(np.abs(lam)) >= 0)
    # real index: spectrum closed under conjugation
    for r in spec.records:
        if abs(r.lam.imag) > 1e-9 * abs(r.lam):
            mate = [s for s in spec.records if s.mode == r.mode
                    and abs(s.lam - r.lam.conjugate()) <= 1e-8 * abs(r.lam)]
            assert len(mate) == 1
    # no near-duplicates within a mode
    for m in {r.mode for r in spec.records}:
        ks = [r.k for r in spec.records if r.mode == m]
        for i, a in enumerate(ks):
            assert all(abs(a - b) > 1e-6 * (1 + abs(a)) for b in ks[i + 1:])
    for r in spec.records:
        f = dispersion_fn(CONST4, r.mode)
        assert abs(f(r.k)) <= 1e-9 * local_scale(f, r.k)


def test_spectrum_json_roundtrip(const4_small, tmp_path):
    path = tmp_path / "eigs.json"
    const4_small.save(path)
    back = SpectrumSet.load(path)
    assert back == const4_small
    back.save(tmp_path / "again.json")
    assert (tmp_path / "again.json").read_bytes() == path.read_bytes()


def test_jittered_rerun_is_stable(const4_small):
    policy = RegionPolicy(axis_margin=0.0513, h_start=2.7)
    other = compute_spectrum(CONST4, 12.0, policy=policy, threads=1)
    a, b = const4_small.abs_lambda, other.abs_lambda
    assert a.shape == b.shape
    assert np.max(np.abs(a - b) / a) <= 1e-7


def test_parallel_matches_serial(const4_small):
    par = compute_spectrum(CONST4, 12.0, threads=2)
    assert np.array_equal(par.abs_lambda, const4_small.abs_lambda)


def test_restricted_modes_skip_certificate():
    spec = compute_spectrum(CONST4, 8.0, modes=[0, 2], threads=1)
    assert not spec.completeness_certificate
    assert {r.mode for r in spec.records} <= {0, 2}


def test_t_max_limit():
    with pytest.raises(CoverageError):
        compute_spectrum(CONST4, 150.0)


def test_absorbing_small_spectrum():
    idx = parse_index("absorbing:4,1")
    res = mode_roots(idx, 0, 6.0)
    f = dispersion_fn(idx, 0)
    assert res.roots
    for z, mult, _ in res.roots:
        assert z.real > 0 or (z.real == 0 and z.imag > 0)
        # k and -k give the same lambda; the stored k is the canonical one of the pair
        assert min(abs(f(z)) / local_scale(f, z), abs(f(-z)) / local_scale(f, -z)) <= 1e-9


def test_counting_function_steps(const4_small):
    spec = const4_small
    t = np.sort(np.sqrt(spec.abs_lambda))
    assert counting_function(spec, 0.0) == 0
    assert counting_function(spec, t[0] * (1 - 1e-9)) == 0
    assert counting_function(spec, spec.t_max) == int(spec.weights.sum())
    grid = np.linspace(0, spec.t_max, 500)
    n = counting_grid(spec, grid)
    assert np.all(np.diff(n) >= 0) and n.dtype.kind == "i"
    # jumps happen exactly at the sqrt |lambda| values
    for tj in t[:10]:
        assert counting_function(spec, tj) > counting_function(spec, tj * (1 - 1e-12))
    with pytest.raises(CoverageError):
        counting_function(spec, spec.t_max + 1)


def test_weyl_fit_recovers_planted_law():
    lams = np.arange(1, 4001) / 1.25
    spec = planted(lams, t_max=50.0)
    assert counting_function(spec, 30.0) == math.floor(1.25 * 900)
    fit = weyl_fit(spec, 1.25, (20, 50))
    assert fit.rel_dev <= 0.005
    assert fit.t.size == 121 and np.allclose(fit.ratio, fit.counts / fit.t ** 2)


def test_weyl_fit_underdetermined():
    spec = planted([1.0, 4.0], t_max=50.0)
    with pytest.raises(ValueError):
        weyl_fit(spec, 1.25, (20, 50), n_points=2)
    with pytest.raises(ValueError):
        weyl_fit(spec, 1.25, (30, 20))


def test_cone_localization_limits():
    lams = [4.0, 9 + 1j, 9 - 1j, -2.0, 16 + 8j, 1j * 5]
    spec = planted(lams, t_max=10.0)
    t = [10.0]
    assert cone_localization(spec, 1e9, t)[0] == sum(1 for l in lams if complex(l).real <= 0)
    assert cone_localization(spec, 0.0, t)[0] == sum(1 for l in lams if complex(l).imag != 0
                                                     or complex(l).real <= 0)
    assert cone_localization(spec, 0.2, t)[0] == 3  # -2, 16+8i, 5i
    empty = SpectrumSet([], 5.0, CONST4, 0, True)
    assert list(cone_localization(empty, 0.2, [1, 2])) == [0, 0]


def test_count_table_rows():
    spec = planted([1.0, 4.0, 9.0], t_max=4.0)
    rows = count_table(spec, [0.0, 1.5, 3.0], 1.25)
    assert rows[0] == (0.0, 0, 0.0)
    assert rows[1][1] == 1 and rows[2][1] == 3
    assert rows[2][2] == pytest.approx(3 / (1.25 * 9))


def test_worker_count(monkeypatch):
    monkeypatch.setenv("ITE_THREADS", "3")
    assert worker_count() == 3
    assert worker_count(0) == 1
    monkeypatch.delenv("ITE_THREADS")
    assert worker_count() >= 1
