import pytest

from spoofsense.config import ENV_VAR, RunConfig, load_config, parse_config_text
from spoofsense.errors import ConfigError
from spoofsense.f0 import F0Config
from spoofsense.mlp import TrainConfig
from spoofsense.spectral import MfccConfig, StftConfig

COST_BLOCK = """
p_target = 0.9405
p_nontarget = 0.0095
p_spoof = 0.05
c_miss_asv = 1
c_fa_asv = 10
c_miss_cm = 1
c_fa_cm = 10
p_miss_asv = 0.05
p_fa_asv = 0.01
p_miss_spoof_asv = 0.45
"""


def test_defaults_match_module_defaults():
    c = RunConfig()
    assert c.f0() == F0Config()
    assert c.stft() == StftConfig()
    assert c.mfcc() == MfccConfig()
    assert c.train_config() == TrainConfig()
    assert not c.has_cost_model


def test_parse_with_comments_and_whitespace():
    c = parse_config_text("# header\n\n  f0_floor = 80  # inline\nwindow=hamming\n")
    assert c.f0_floor == 80.0
    assert c.window == "hamming"


def test_cost_model_block():
    c = parse_config_text(COST_BLOCK)
    assert c.has_cost_model
    c1, c2 = c.cost_model().coefficients()
    assert abs(c1 - 0.8925249999999999) < 1e-15
    assert c2 == 0.275


@pytest.mark.parametrize(
    "text",
    [
        "nonsense_key = 1",
        "f0_floor = abc",
        "f0_floor = 80\nf0_floor = 90",
        "sample_rate = 0",
        "f0_floor = 600",          # floor above default ceil
        "n_ceps = 40",             # exceeds n_mels
        "window = blackman",
        "activation = sigmoid",
        "epochs = 0",
        "p_target = 0.9",          # cost block must be complete
        "just some text",
    ],
)
def test_rejections(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_cost_model_missing_raises():
    with pytest.raises(ConfigError):
        RunConfig().cost_model()


def test_env_fallback_and_precedence(tmp_path, monkeypatch):
    env_conf = tmp_path / "env.conf"
    env_conf.write_text("f0_floor = 70\n")
    explicit = tmp_path / "explicit.conf"
    explicit.write_text("f0_floor = 90\n")

    monkeypatch.delenv(ENV_VAR, raising=False)
    assert load_config(None).f0_floor == 75.0

    monkeypatch.setenv(ENV_VAR, str(env_conf))
    assert load_config(None).f0_floor == 70.0
    assert load_config(str(explicit)).f0_floor == 90.0  # explicit path wins

    monkeypatch.setenv(ENV_VAR, str(tmp_path / "missing.conf"))
    with pytest.raises(ConfigError):
        load_config(None)


def test_shipped_configs_parse():
    import pathlib

    root = pathlib.Path(__file__).resolve().parent.parent / "configs"
    c = load_config(str(root / "default.conf"))
    assert c == RunConfig()
    t = load_config(str(root / "tdcf_example.conf"))
    assert t.has_cost_model
