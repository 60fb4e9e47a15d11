import pytest

from diracshoot import Params, Tolerances


def test_params_validation():
    Params(1.0, 0.5)
    with pytest.raises(ValueError):
        Params(1.0, 1.5)
    with pytest.raises(ValueError):
        Params(1.0, -0.1)
    with pytest.raises(ValueError):
        Params(-1.0, 0.5)
    with pytest.raises(ValueError):
        Params(1.0, 1.0)


def test_gap():
    assert Params(2.0, 0.5).gap == 1.5


def test_tolerances_resolution():
    p = Params(1.0, 0.5)
    t = Tolerances().resolved(p)
    assert t.delta == pytest.approx(1e-8 * 0.25)
    assert t.rmax == pytest.approx(80.0)
    # explicit values win over derived defaults
    t2 = Tolerances(delta=1e-6, rmax=30.0).resolved(p)
    assert t2.delta == 1e-6 and t2.rmax == 30.0


def test_tolerances_validation():
    with pytest.raises(ValueError):
        Tolerances(rel=0.0)
    with pytest.raises(ValueError):
        Tolerances(rmax=-1.0)
