import mpmath
import pytest

import config
from lfun.newforms import eta_product_expansion
from quaternion.eigenforms import class_set, install_loaders
from quaternion.orders import make_order


@pytest.fixture(autouse=True)
def isolated_cache(tmp_path, monkeypatch):
    """Every test gets its own cache directory and in-memory loaders."""
    cache_dir = tmp_path / "cache"
    monkeypatch.setattr(config, "CACHE_DIR", str(cache_dir))
    monkeypatch.setattr(config, "SHOW_PROGRESS", False)
    install_loaders()
    mpmath.mp.dps = config.MP_DPS
    yield str(cache_dir)
    install_loaders()


@pytest.fixture(scope="session")
def classes_2():
    return class_set(make_order(2, 1))


@pytest.fixture(scope="session")
def classes_11():
    return class_set(make_order(11, 1))


@pytest.fixture(scope="session")
def eta_11():
    """q-expansion of eta(z)^2 eta(11z)^2, the weight 2 newform of level 11."""
    return eta_product_expansion({1: 2, 11: 2}, 30)
