from __future__ import annotations

from pathlib import Path

import pytest

from group_automata.cesaro.output import Mode
from group_automata.chains import MarkovKernel
from group_automata.chains import MixtureKernel
from group_automata.chains import ProductKernel
from group_automata.config import ExperimentConfig
from group_automata.config import MarkovKernelConfig
from group_automata.config import load_config
from group_automata.config import parse_config
from group_automata.errors import ConfigError
from group_automata.renewal.laws import GeometricLaw
from group_automata.renewal.laws import TwoPointLaw

CESARO = """\
# Bernoulli(0.3) on Z_2
command = cesaro
seed = 7

[group]
p = 2
exponents = 1

[kernel]
family = product
theta = 0.3

[experiment]
J = 0, 1
M_top = 6
"""


def test_parse():
    config = parse_config(CESARO)
    assert config.command == "cesaro"
    assert config.seed == 7
    assert config.experiment.J == [0, 1]
    assert config.experiment.grid() == [1, 2, 4, 8, 16, 32, 64]
    kernel = config.build_kernel()
    assert isinstance(kernel, ProductKernel)
    assert kernel.pi.tolist() == pytest.approx([0.7, 0.3])


def test_defaults():
    config = parse_config("command = density")
    assert config.out is None
    assert config.group.exponents == [1]
    assert (config.automaton.mu, config.automaton.nu) == (1, 1)
    assert config.lemma.eps == 0.47
    assert config.lemma.M == 1 << 20
    assert config.verify.samples == 200


@pytest.mark.parametrize(
    ("mode", "size"),
    [
        ("exact", 15),
        ("mc", 11),
    ],
)
def test_grid_defaults(mode, size):
    config = parse_config(CESARO.replace("M_top = 6\n", f"mode = {mode}\n"))
    assert len(config.experiment.grid()) == size
    assert config.experiment.grid()[-1] == 1 << (size - 1)


def test_explicit_grid():
    config = parse_config(CESARO.replace("M_top = 6", "M = 3, 10"))
    assert config.experiment.grid() == [3, 10]


def test_overrides():
    config = parse_config(
        CESARO,
        {"seed": 11, "out": None, "experiment.mode": "mc", "verify.inject_fault": True},
    )
    assert config.seed == 11
    assert config.out is None
    assert config.experiment.mode is Mode.MC
    assert config.verify.inject_fault


def test_override_into_value():
    with pytest.raises(ConfigError, match="seed is not a section"):
        parse_config(CESARO, {"seed.x": 1})


def test_digest_tracks_content():
    a = parse_config(CESARO)
    b = parse_config(CESARO, {"seed": 8})
    assert a.digest() == parse_config(CESARO).digest()
    assert a.digest() != b.digest()
    assert len(a.digest()) == 64


class TestSyntaxErrors:
    @pytest.mark.parametrize(
        ("text", "line", "message"),
        [
            ("command = density\n[group]\np = 2\n[group]\n", 4, "appears twice"),
            ("command = density\nseed 3\n", 2, "expected `key = value`"),
            ("command = density\n\n9x = 1\n", 3, "invalid key '9x'"),
            ("command = density\nseed =\n", 2, "has no value"),
            ("command = density\nseed = 1\nseed = 2\n", 3, "duplicate key 'seed'"),
        ],
    )
    def test_line_numbers(self, text, line, message):
        with pytest.raises(ConfigError, match=message) as exc_info:
            parse_config(text)
        assert exc_info.value.line == line
        assert str(exc_info.value).startswith(f"line {line}: ")

    def test_comments_and_blank_lines(self):
        config = parse_config("\n  # nothing\ncommand = density  # trailing\n\n")
        assert config.command == "density"


class TestValidationErrors:
    def test_extra_key_points_at_its_line(self):
        text = CESARO.replace("theta = 0.3", "theta = 0.3\nbogus = 1")
        with pytest.raises(ConfigError, match="bogus") as exc_info:
            parse_config(text)
        assert exc_info.value.line == 12

    def test_too_many_fractional_digits(self):
        text = CESARO.replace("theta = 0.3", "theta = 0.3000000000001")
        with pytest.raises(ConfigError, match="more than 12 fractional digits") as exc_info:
            parse_config(text)
        assert exc_info.value.line == 11

    def test_twelve_digits_allowed(self):
        config = parse_config(CESARO.replace("theta = 0.3", "theta = 0.300000000001"))
        assert config.kernel is not None

    @pytest.mark.parametrize(
        "body",
        [
            "family = product",
            "family = product\ntheta = 0.3\nuniform = true",
        ],
    )
    def test_product_needs_one_choice(self, body):
        text = CESARO.replace("family = product\ntheta = 0.3", body)
        with pytest.raises(ConfigError, match="exactly one of theta, pi, uniform") as exc_info:
            parse_config(text)
        assert exc_info.value.line == 9

    def test_unknown_family(self):
        with pytest.raises(ConfigError, match="kernel"):
            parse_config(CESARO.replace("family = product", "family = hidden"))

    def test_missing_command(self):
        with pytest.raises(ConfigError, match="command: Field required") as exc_info:
            parse_config("seed = 1")
        assert exc_info.value.line is None

    def test_unknown_command(self):
        with pytest.raises(ConfigError, match="command") as exc_info:
            parse_config("command = explode")
        assert exc_info.value.line == 1

    @pytest.mark.parametrize("command", ["simulate", "cesaro", "lemma41"])
    def test_kernel_required(self, command):
        with pytest.raises(ConfigError, match=rf"{command} needs a \[kernel\] section"):
            parse_config(f"command = {command}")

    def test_regen_stats_needs_a_source(self):
        with pytest.raises(ConfigError, match=r"\[kernel\] or a \[renewal\]"):
            parse_config("command = regen-stats")


class TestBuild:
    def test_theta_needs_z2(self):
        config = parse_config(CESARO.replace("p = 2", "p = 3"))
        with pytest.raises(ConfigError, match=r"^\[kernel\]: theta describes a law on Z_2"):
            config.build_kernel()

    def test_bad_pi(self):
        config = parse_config(CESARO.replace("theta = 0.3", "pi = 0.5, 0.4"))
        with pytest.raises(ConfigError, match=r"^\[kernel\]: "):
            config.build_kernel()

    def test_uniform(self):
        config = parse_config(CESARO.replace("p = 2", "p = 5").replace("theta = 0.3", "uniform = true"))
        kernel = config.build_kernel()
        assert kernel.pi.tolist() == pytest.approx([0.2] * 5)

    def test_markov_stay(self):
        text = CESARO.replace("family = product\ntheta = 0.3", "family = markov\nstay = 0.7\norder = 2")
        kernel = parse_config(text).build_kernel()
        assert isinstance(kernel, MarkovKernel)
        assert kernel.order == 2

    def test_markov_transition(self):
        text = CESARO.replace(
            "family = product\ntheta = 0.3", "family = markov\ntransition = 0.9, 0.1, 0.2, 0.8"
        )
        kernel = parse_config(text).build_kernel()
        assert kernel.rows.tolist() == pytest.approx([[0.9, 0.1], [0.2, 0.8]])

    def test_markov_needs_one_choice(self):
        with pytest.raises(ValueError, match="exactly one of stay, transition"):
            MarkovKernelConfig(family="markov")

    def test_mixture(self):
        text = CESARO.replace("family = product\ntheta = 0.3", "family = mixture\nstay = 0.8")
        assert isinstance(parse_config(text).build_kernel(), MixtureKernel)

    def test_renewal_only(self):
        config = parse_config("command = regen-stats\n[renewal]\nlaw = geometric\nbeta = 0.25\n")
        assert config.kernel is None
        law = config.build_law()
        assert isinstance(law, GeometricLaw)
        assert law.beta == pytest.approx(0.25)

    def test_two_point(self):
        config = parse_config(
            "command = regen-stats\n[renewal]\nlaw = two-point\na = 1\nb = 3\nweight = 0.5\n"
        )
        assert isinstance(config.build_law(), TwoPointLaw)

    def test_bad_law(self):
        config = parse_config("command = regen-stats\n[renewal]\nlaw = geometric\nbeta = 1.5\n")
        with pytest.raises(ConfigError, match=r"^\[renewal\]: geometric beta"):
            config.build_law()

    def test_no_kernel(self):
        config = parse_config("command = density")
        with pytest.raises(ConfigError, match=r"no \[kernel\] section"):
            config.build_kernel()

    def test_bad_group(self):
        config = parse_config("command = density\n[group]\np = 4\n")
        with pytest.raises(ConfigError, match=r"^\[group\]: p=4 is not prime"):
            config.spec()

    def test_non_unit_automaton(self):
        config = parse_config("command = verify\n[automaton]\nmu = 2\n")
        with pytest.raises(ConfigError, match=r"^\[automaton\]: "):
            config.params()

    def test_exploratory_automaton(self):
        config = parse_config("command = verify\n[automaton]\nmu = 2\nexploratory = true\n")
        assert config.params().mu == 2


def test_load_config(tmp_path):
    path = tmp_path / "cesaro.conf"
    path.write_text(CESARO)
    assert load_config(path, {"seed": 3}).seed == 3


def test_load_missing(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "absent.conf")


def test_model_is_strict():
    with pytest.raises(ValueError, match="Extra inputs"):
        ExperimentConfig.model_validate({"command": "density", "colour": "red"})


CONFIGS = sorted((Path(__file__).parent.parent / "configs").glob("*.conf"))


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.stem)
def test_shipped_configs(path):
    config = load_config(path)
    config.params()
    if config.kernel is not None:
        config.build_kernel()
    if config.renewal is not None:
        config.build_law()
