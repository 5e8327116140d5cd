import math

import numpy as np
import pytest

from anisofit import analysis as A
from anisofit import refine as R
from anisofit import shape as S
from anisofit import targets as T
from anisofit.geometry import equilateral


def test_record_scaled_is_exact():
    r = A.ConvergenceRecord.make(64, 0.25, 0.5)
    assert r.scaled == 64**0.5 * 0.25


def test_convergence_run_schedule():
    recs = A.convergence_run(T.affine2(1.0, 0, 0), R.RefineConfig(strategy="aniso_rect"), [64, 128])
    assert [r.N for r in recs] == [64, 128]
    assert all(r.error == 0.0 for r in recs)
    assert recs[0].rate == 0.5
    with pytest.raises(ValueError):
        A.convergence_run(T.product_sine(), R.RefineConfig(strategy="aniso_rect"), [128, 64])


def test_uniform_saturation_sin():
    # N * sup error -> |f'|_inf / 2 = pi / 2
    assert 4096 * A.uniform_1d_error(T.sin_1d(), 4096) == pytest.approx(math.pi / 2, rel=1e-4)


def test_fit_slope():
    recs = [A.ConvergenceRecord.make(n, 3.0 / n, 1) for n in (10, 100, 1000, 5000)]
    assert A.fit_slope(recs) == pytest.approx(-1.0, abs=1e-10)
    with pytest.raises(ValueError):
        A.fit_slope([(1, 1.0), (2, 0.0), (3, 0.5)])
    with pytest.raises(ValueError):
        A.fit_slope([(1, 1.0), (2, 0.5)])


def test_sqrt_rates():
    sched = [64, 128, 256, 512, 1024, 2048, 4096]
    f = T.power_alpha(0.5)
    assert A.fit_slope(A.uniform_1d_run(f, sched)) == pytest.approx(-0.5, abs=0.05)
    assert A.fit_slope(A.convergence_run(f, R.RefineConfig(strategy="greedy_1d"), sched)) == pytest.approx(-1, abs=0.15)


def test_maximal_norm():
    assert A.maximal_norm_1d(np.ones(2000)) == pytest.approx(1.0)
    vals = []
    for n in (1000, 4000):
        x = (np.arange(n) + 0.5) / n
        vals.append(A.maximal_norm_1d(x**-0.5, x))
    assert vals[-1] < 10
    assert abs(vals[1] - vals[0]) / vals[1] < 0.1  # grid refinement converges


def test_adaptation_fraction():
    Q = S.QuadForm2(1, 0, 100)
    root = equilateral(1.0)
    tree = R.refine_levels(Q.target(root), R.RefineConfig(strategy="aniso_tri", degree=2, p=2.0), 5, roots=[root])
    per = A.adaptation_fraction(tree, Q, 2.0, per_level=True)
    assert set(per) == set(range(6))
    assert per[5] > per[2]
    assert A.adaptation_fraction(tree, Q, math.inf) == 1.0
    iso = S.QuadForm2(1, 0, 1)
    eq_tree = R.PartitionTree([equilateral(1.0)], R.RefineConfig(strategy="aniso_tri", degree=2), None)
    assert A.adaptation_fraction(eq_tree, iso, 1.05) == 1.0
    with pytest.raises(S.DegenerateFormError):
        A.adaptation_fraction(tree, S.QuadForm2(1, 1, 1))


def test_csv_round_trip():
    recs = [A.ConvergenceRecord.make(n, 1.0 / 3 / n, 1.0) for n in (8, 16)]
    text = A.records_csv(recs)
    assert text.splitlines()[0] == "N,error,scaled"
    assert A.read_records_csv(text, rate=1.0) == recs
    rows = [A.ConstantsRow(0.2, 1.0, 2.0, 3.0, 0.1, 0.2, 0.3)]
    assert A.constants_csv(rows).splitlines() == ["delta,U,I,A,C_U,C_I,C_A", "0.2,1.0,2.0,3.0,0.1,0.2,0.3"]
