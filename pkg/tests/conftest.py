import pytest

from etpa.biphoton import PumpSpec, build_jsa, default_grid
from etpa.dispersion import Process, ktp_crystal, load_index_models, solve_poling_period

CW_NM = 0.1
PULSED_NM = 5.0


@pytest.fixture(scope="session")
def models():
    return load_index_models()


def _crystal(process, models, lambda_p0=405.0):
    trial = ktp_crystal(process, models=models)
    period = solve_poling_period(trial, PumpSpec(lambda_p0, 1.0).omega_p0)
    return ktp_crystal(process, poling_period=period, models=models)


@pytest.fixture(scope="session")
def crystal_type0(models):
    return _crystal(Process.TYPE0, models)


@pytest.fixture(scope="session")
def crystal_type2(models):
    return _crystal(Process.TYPEII, models)


@pytest.fixture(scope="session")
def states(crystal_type0, crystal_type2):
    """Four reference states at n = 512 with pair_rate 7.99e7."""
    out = {}
    for label, crystal in (("type0", crystal_type0), ("type2", crystal_type2)):
        for regime, sigma in (("cw", CW_NM), ("pulsed", PULSED_NM)):
            pump = PumpSpec(405.0, sigma)
            out[(label, regime)] = build_jsa(pump, crystal, default_grid(pump), pair_rate=7.99e7)
    return out


@pytest.fixture()
def small_grid():
    from etpa.biphoton import SpectralGrid

    return SpectralGrid(64, 2.3e15, 1.0e14)
