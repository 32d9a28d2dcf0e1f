import os

import pytest

import kronsketch
from kronsketch import config
from kronsketch.bounds import BoundInputs
from kronsketch.bounds import j_simplified
from kronsketch.core import KronVector
from kronsketch.core import TooLargeError
from kronsketch.core import materialize_vector


@pytest.fixture(autouse=True)
def reset_config(monkeypatch):
    yield
    monkeypatch.setitem(os.environ, 'KRONSKETCHCONFIG', '')
    kronsketch.load_config()


@pytest.mark.parametrize('config_string', [
    ('foobar', {}, '''Failed to load kronsketch config from KRONSKETCHCONFIG 'foobar': ValueError'''),
    ('foobar=1', {}, '''Discarded config from KRONSKETCHCONFIG foobar=1: '''),
    ('foobar=1, force_colors=1', {'force_colors': 1}, '''Discarded config from KRONSKETCHCONFIG foobar=1: '''),
    ('materialize_cap=123', {'materialize_cap': 123}, ''),
    ('MATERIALIZE_CAP=123', {'materialize_cap': 123}, ''),
    ('rank_rtol=1e-8', {'rank_rtol': 1e-8}, ''),
    ('log_base=2', {'log_base': 2}, ''),
    ('log_base=e', {'log_base': 'e'}, ''),
    ('stream=123', {'stream': 123}, ''),
    ('force_colors=123', {'force_colors': 123}, ''),
    ('', {}, ''),
    (' , ', {}, ''),
])
def test_config(monkeypatch, config_string, capsys):
    env, defaults, stderr = config_string
    monkeypatch.setitem(os.environ, 'KRONSKETCHCONFIG', env)
    assert kronsketch.load_config() == defaults
    assert config._default_config == defaults
    output = capsys.readouterr()
    assert output.err.startswith(stderr)
    if not stderr:
        assert output.err == ''


def test_explicit_options(capsys):
    assert kronsketch.load_config(materialize_cap=5, bogus=1) == {'materialize_cap': 5}
    assert 'Discarded config from KRONSKETCHCONFIG bogus=1' in capsys.readouterr().err


def test_cap_is_configurable(monkeypatch):
    vector = KronVector([[1.0] * 4, [1.0] * 4])
    assert materialize_vector(vector).size == 16
    monkeypatch.setitem(os.environ, 'KRONSKETCHCONFIG', 'materialize_cap=10')
    kronsketch.load_config()
    with pytest.raises(TooLargeError):
        materialize_vector(vector)
    assert materialize_vector(vector, cap=16).size == 16


def test_log_base_is_configurable():
    b = BoundInputs((1,), N=5, eps=0.5, delta=0.5)
    kronsketch.load_config(log_base='10')
    assert j_simplified(b) == pytest.approx(4.0, rel=1e-12)
    kronsketch.load_config(log_base='7')
    with pytest.raises(ValueError):
        j_simplified(b)


def test_default_placeholder():
    default = config.Default('materialize_cap', 99)
    assert config.resolve(default) == 99
    assert repr(default) == '99'
    assert str(default) == '99'
    assert config.resolve(3) == 3
    kronsketch.load_config(materialize_cap=7)
    assert config.resolve(default) == 7


def test_parse_config_string():
    assert config.parse_config_string('a=1, b=[1, c=x') == {'a': 1, 'b': '[1', 'c': 'x'}
    with pytest.raises(ValueError):
        config.parse_config_string('a=1, b')


def test_read_config_file(tmp_path):
    path = tmp_path / 'exp.cfg'
    path.write_text('# experiment defaults\ntrials = 5\n\njgrid=10:30:10  # inclusive\nforce-gaussian=yes\n')
    assert config.read_config_file(str(path)) == {'trials': '5', 'jgrid': '10:30:10', 'force_gaussian': 'yes'}
    path.write_text('trials\n')
    with pytest.raises(ValueError) as excinfo:
        config.read_config_file(str(path))
    assert 'exp.cfg:1' in str(excinfo.value)
