import os
from fractions import Fraction

import pytest

from cache.artifact_cache import CacheFormatError
from cache.brandt_cache import BrandtCache, create_brandt_cache
from cache.classes_cache import ClassesCache, create_classes_cache
from cache.coeffs_cache import CoeffsCache, create_coeffs_cache, find_coeffs
from cache.eigenform_cache import create_eigenform_cache
from cache.report_cache import ReportStore, store_report
from lfun.newforms import NewformData, eta_product_expansion


def _read(path):
    with open(path, encoding="utf-8") as handle:
        return handle.read()


def test_classes_round_trip(isolated_cache):
    first = create_classes_cache(11, 1)
    path = os.path.join(isolated_cache, "classes", "11_1.txt")
    text = _read(path)
    assert text.startswith("TRIPLEL classes v1 11_1\norder 11 1\nalgebra -1 -11\nmass 5/12\nh 2\n")

    second = create_classes_cache(11, 1)
    assert second.h == first.h == 2
    assert [rep.basis for rep in second.reps] == [rep.basis for rep in first.reps]
    assert second.unit_orders == first.unit_orders
    assert _read(path) == text


def test_version_bump_recomputes(isolated_cache, capsys):
    create_classes_cache(2, 1)
    cache = ClassesCache(2, 1, version=2)
    assert cache.load() is None
    assert "stale entry" in capsys.readouterr().err
    assert cache.run().h == 1
    assert _read(cache.path()).startswith("TRIPLEL classes v2 2_1\n")


def test_corrupt_entry_recomputed(isolated_cache, capsys):
    cache = ClassesCache(2, 1)
    os.makedirs(os.path.dirname(cache.path()))
    with open(cache.path(), "w", encoding="utf-8") as handle:
        handle.write(f"{cache.header()}\norder 2 1\nalgebra -1 -1\nmass 1/24\nh 1\nclass e=24\nscale 1\n1 0\n")
    assert cache.run().unit_orders == [24]
    assert "WARNING corrupt cache entry" in capsys.readouterr().err
    assert cache.load().h == 1


def test_wrong_mass_is_corrupt():
    cache = ClassesCache(2, 1)
    payload = cache.serialize(cache.compute()).replace("mass 1/24", "mass 1/12")
    with pytest.raises(CacheFormatError):
        cache.deserialize(payload)


def test_brandt_round_trip():
    assert create_brandt_cache(2, 1, 3).blocks == (((Fraction(4),),),)
    cached = BrandtCache(2, 1, 3).load()
    assert cached.blocks == (((Fraction(4),),),)
    with pytest.raises(CacheFormatError):
        BrandtCache(2, 1, 5).deserialize(BrandtCache(2, 1, 3).serialize(cached))


def test_eigenform_round_trip():
    computed = create_eigenform_cache(11, 1)
    loaded = create_eigenform_cache(11, 1)
    assert len(loaded) == 2
    assert [form.hecke_eigenvalues for form in loaded] == [form.hecke_eigenvalues for form in computed]
    assert [form.al_eigenvalues for form in loaded] == [form.al_eigenvalues for form in computed]
    assert sorted(form.is_eisenstein for form in loaded) == [False, True]


def test_coefficients_cached_by_label(isolated_cache):
    form = create_coeffs_cache("11.2.1", 20)
    assert form.label == "11.2.1"
    assert form.a(2) == -2 and form.a(11) == 1
    assert os.path.exists(os.path.join(isolated_cache, "coeffs", "11.2.1_n20.txt"))
    assert create_coeffs_cache("11.2.1", 20).coeffs == form.coeffs


def test_find_imported_coefficients(isolated_cache):
    c = eta_product_expansion({1: 2, 11: 2}, 40)
    for n_max in (20, 40):
        form = NewformData(11, 2, {n: c[n] for n in range(1, n_max + 1)}, {11: -1}, "mine")
        CoeffsCache("mine", n_max, form=form).run()
    found = find_coeffs("mine")
    assert found.n_max == 40
    assert found.label == "mine"
    assert find_coeffs("unknown") is None


def test_short_coefficient_entry_is_corrupt():
    c = eta_product_expansion({1: 2, 11: 2}, 10)
    form = NewformData(11, 2, {n: c[n] for n in range(1, 11)}, {11: -1}, "mine")
    with pytest.raises(CacheFormatError):
        CoeffsCache("mine", 20).deserialize(CoeffsCache("mine", 10).serialize(form))


def test_report_comparison(capsys):
    assert store_report("a,b,c", "opts", "central_value: 1\n")
    assert store_report("a,b,c", "opts", "central_value: 1\n")
    assert not store_report("a,b,c", "opts", "central_value: 2\n")
    assert "differs from the cached report" in capsys.readouterr().err
    assert store_report("a,b,c", "other", "central_value: 3\n")


def test_reports_are_stored_not_rebuilt():
    assert not hasattr(ReportStore, "run")
    assert not hasattr(ReportStore, "compute")
    store = ReportStore("a,b,c", "opts")
    assert store.load() is None
    assert store.store("passed: yes\n") == "passed: yes\n"
    assert store.load() == "passed: yes\n"
    assert os.path.basename(os.path.dirname(store.path())) == "report"
