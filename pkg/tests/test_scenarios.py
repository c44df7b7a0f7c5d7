import numpy as np
import pytest

from tiltlab import quat
from tiltlab.scenarios import ScenarioConfig, WindConfig, WindModel, scenario_catalog, wind_model


def test_catalog_contents():
    cat = scenario_catalog()
    expected = {
        "ground-hover", "free-hover", "roll60",
        "ground-hover+mass", "free-hover+mass", "roll60+mass",
        "free-hover-wind", "roll60-wind",
    }
    assert set(cat) == expected
    # the three pose experiments appear with and without the 0.5 kg mass
    for name in ("ground-hover", "free-hover", "roll60"):
        assert cat[name].attached_mass is None
        mass, offset = cat[name + "+mass"].attached_mass
        assert mass == pytest.approx(0.5)
        assert np.linalg.norm(offset) == pytest.approx(0.1)


def test_roll60_reference_attitude():
    sc = scenario_catalog()["roll60"]
    expected = quat.from_axis_angle(np.array([1.0, 0.0, 0.0]), np.deg2rad(60.0))
    assert np.allclose(sc.reference_attitude, expected, atol=1e-12)


def test_ground_hover_flags():
    sc = scenario_catalog()["ground-hover"]
    assert sc.ground_plane
    assert sc.reference_position[2] == pytest.approx(0.05)
    assert not scenario_catalog()["free-hover"].ground_plane


def test_wind_scenarios_have_wind():
    cat = scenario_catalog()
    assert cat["free-hover-wind"].wind is not None
    assert cat["roll60-wind"].wind is not None
    assert cat["free-hover"].wind is None


def test_duration_validation():
    with pytest.raises(ValueError):
        ScenarioConfig(name="bad", duration=0.0)


def test_wind_zero_amplitude_constant():
    cfg = WindConfig(mean_force=np.array([2.0, 0.0, 0.0]), gust_amplitude=0.0)
    t = np.linspace(0, 10, 101)
    f = wind_model(t, cfg)
    assert np.allclose(f, [2.0, 0.0, 0.0])


def test_gust_integrates_to_zero_over_periods():
    cfg = WindConfig(mean_force=np.zeros(3), gust_amplitude=1.0, gust_frequency=0.5)
    model = WindModel(cfg)
    dt = 1e-3
    t = np.arange(0, 4.0, dt)  # two full periods
    f = model.world_force(t)
    avg = np.abs(f.mean(axis=0))
    assert np.all(avg < 1e-3 * cfg.gust_amplitude)


def test_per_propeller_streams():
    cfg = WindConfig(per_propeller=True, per_prop_amplitude=0.5, per_prop_bandwidth=10.0)
    model = WindModel(cfg, np.random.default_rng(0))
    t = np.linspace(0, 1, 200)
    pr = model.per_rotor(t)
    assert pr.shape == (200, 6)
    # six independent streams: no two rotors identical
    for i in range(6):
        for j in range(i + 1, 6):
            assert not np.allclose(pr[:, i], pr[:, j])
    assert model.per_rotor(t) is not None
    assert WindModel(WindConfig()).per_rotor(t) is None


def test_wind_model_deterministic_given_rng():
    cfg = WindConfig(per_propeller=True)
    a = WindModel(cfg, np.random.default_rng(4)).per_rotor(np.array([0.3]))
    b = WindModel(cfg, np.random.default_rng(4)).per_rotor(np.array([0.3]))
    assert np.array_equal(a, b)
