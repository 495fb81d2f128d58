import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.strategies import floats

from config import PROBLEMS
from runner import build_spec
from utils.errors import ConfigError
from utils.run_config import (
    RunConfig, default_config, format_complex, format_config, parse_complex, parse_config, parse_grid,
    with_overrides,
)


@pytest.mark.parametrize("text", ["", "\n\n", "# only a comment\n"])
def test_missing_problem_key(text):
    with pytest.raises(ConfigError, match="missing subcommand key"):
        parse_config(text)


def test_strip_file_populates_spec():
    run = parse_config("problem = strip\nb_plus = 1.0\nk = 1.0+2.0i  # absorbing\n")
    assert run.problem == 'strip'
    assert run['k'] == 1.0 + 2.0j
    assert run['b_minus'] == 1.0
    spec = build_spec(run)
    assert spec.k == 1.0 + 2.0j
    assert spec.truncation == run.truncation
    assert spec.symmetric


def test_heat_file_populates_source_modes():
    run = parse_config("problem = heat-rod-n\n"
                       "source = gaussian\nsource_center = 0.3\nsource_width = 0.4\nsource_rate = 0.5\n"
                       "source2 = box\nsource2_lo = -0.2\nsource2_hi = 0.6\nsource2_amp = 2.0\nsource2_rate = 2.0\n")
    first, second = build_spec(run).sources
    assert (first.profile.center, first.profile.width, first.rate) == (0.3, 0.4, 0.5)
    assert (second.profile.lo, second.profile.hi, second.profile.amp, second.rate) == (-0.2, 0.6, 2.0, 2.0)


def test_heat_defaults_carry_no_source():
    assert build_spec(default_config('heat-rod')).sources == ()


def test_non_normal_lambda_rejected_with_line():
    with pytest.raises(ConfigError, match="non-normal") as e:
        parse_config("problem = aw-conv\nlambda = 0.3\n")
    assert e.value.line == 2
    assert e.value.exit_code == 6


def test_complex_lambda_off_the_ray_is_normal():
    run = parse_config("problem = aw-conv\nlambda = 0.3+0.1i\n")
    assert run['lambda'] == 0.3 + 0.1j


@pytest.mark.parametrize("text, line", [
    ("problem = strip\nwidth = 2.0\n", 2),
    ("problem = strip\n\nb_plus 2.0\n", 3),
    ("problem = strip\nb_plus = 2.0\nb_plus = 3.0\n", 3),
    ("problem = strip\nb_plus = wide\n", 2),
    ("problem = strip\nb_plus = -1.0\n", 2),
    ("problem = strip\nk = 1.0-2.0i\n", 2),
    ("problem = strip\ny = 1.5\n", 2),
    ("problem = strip\ntol = 0\n", 2),
    ("problem = wedge\na2 = 0.5\n", 2),
    ("problem = heat-rod-n\nbreakpoints = 0.0\n", None),
    ("problem = heat-rod\nt = 0.0,0.5\n", 2),
    ("problem = heat-rod\nsource_rate = -1.0\n", 2),
    ("problem = heat-rod-n\nsource2 = box\nsource2_lo = 1.0\nsource2_hi = 0.0\n", 4),
    ("problem = heat-rod\nsource = table\n", None),
])
def test_invalid_files_name_the_line(text, line):
    with pytest.raises(ConfigError) as e:
        parse_config(text)
    if line is not None:
        assert e.value.line == line
        assert str(e.value).startswith(f"line {line}:")


def test_unknown_problem():
    with pytest.raises(ConfigError, match="unknown problem"):
        parse_config("problem = beam\n")


def test_oracle_takes_target_keys():
    run = parse_config("problem = oracle\ntarget = strip\nb_plus = 2.0\n")
    assert run.target == 'strip'
    assert run['b_plus'] == 2.0
    with pytest.raises(ConfigError):
        parse_config("problem = oracle\ntarget = strip\nalpha = 1.0\n")
    with pytest.raises(ConfigError, match="oracle target"):
        parse_config("problem = oracle\ntarget = selftest\n")


@pytest.mark.parametrize("problem", PROBLEMS)
def test_defaults_round_trip(problem):
    run = default_config(problem)
    assert parse_config(format_config(run)) == run


@settings(max_examples=50, deadline=None)
@given(floats(min_value=0.5, max_value=1e3), floats(min_value=-50.0, max_value=50.0),
       floats(min_value=1e-6, max_value=50.0), floats(allow_nan=False, allow_infinity=False),
       floats(min_value=1e-14, max_value=1.0))
def test_round_trip_strip(b_plus, k_real, k_imag, amp, tol):
    run = RunConfig('strip', {**default_config('strip').params, 'b_plus': b_plus, 'k': complex(k_real, k_imag),
                              'load_amp': amp}, tol=tol)
    assert parse_config(format_config(run)) == run


def test_complex_values_have_no_spaces():
    assert format_complex(1.0 - 2.0j) == '1.0-2.0i'
    assert format_complex(0.25) == '0.25+0.0i'
    assert parse_complex('1.0+2.0i') == 1.0 + 2.0j
    assert parse_complex('-3e-2i') == -0.03j
    assert parse_complex('0.1') == 0.1


def test_grids():
    np.testing.assert_allclose(parse_grid('0:1:3'), [0.0, 0.5, 1.0])
    np.testing.assert_allclose(parse_grid('1.5, 2'), [1.5, 2.0])
    for bad in ('0:1', '0:1:0', '', 'a,b'):
        with pytest.raises(ConfigError):
            parse_grid(bad)


def test_overrides_revalidate():
    run = with_overrides(default_config('strip'), ['k=2.0+1.0i', 'tol=1e-6'])
    assert run['k'] == 2.0 + 1.0j
    assert run.tol == 1e-6
    with pytest.raises(ConfigError):
        with_overrides(run, ['k=2.0'])
    with pytest.raises(ConfigError, match="not key=value"):
        with_overrides(run, ['tol'])


def test_new_oracle_target_starts_from_its_defaults():
    run = with_overrides(default_config('oracle'), ['target=aw-conv', 'truncation=8'])
    assert run.target == 'aw-conv'
    assert 'alpha' not in run.params
    assert run['x'] == '0.1:4.0:20'
    assert run.truncation == 8
