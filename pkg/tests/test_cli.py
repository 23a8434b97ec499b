import os

import pytest

from curvlab.cli import (
    RunConfig,
    build_run_config,
    execute,
    parse_config,
    parse_ladder,
    run_command,
    sweep_configs,
)
from curvlab.errors import ConfigError, DomainError
from curvlab.storage import read_summary


def _write(path, text):
    path.write_text(text, encoding='utf-8')
    return str(path)


def test_parse_ladder():
    assert parse_ladder('1e2:1e6:10x') == (1e2, 1e3, 1e4, 1e5, 1e6)
    assert parse_ladder('1e3:1.6e4:4x') == (1e3, 4e3, 1.6e4)
    assert parse_ladder('100, 400,1600') == (100.0, 400.0, 1600.0)
    for bad in ('1e2:1e6', '1e6:1e2:10x', '3,2,1', '0,1,2', ''):
        with pytest.raises(ValueError):
            parse_ladder(bad)


def test_config_file_round_trip(tmp_path):
    path = _write(tmp_path / 'run.cfg', """
# corrida de referencia
mode = verify-elliptic
shape = ball
sigma-plus = 1
sigma_minus = 4   # exterior
lambda_ladder = 1e2,1e3,1e4
""")
    rc = parse_config(path)
    assert rc.mode == 'verify-elliptic'
    assert rc.sigma_minus == 4.0
    assert rc.lambda_ladder == (1e2, 1e3, 1e4)
    assert rc.hash() == RunConfig(mode='verify-elliptic', lambda_ladder=(1e2, 1e3, 1e4)).hash()


def test_config_hash_ignores_output_dir():
    a = RunConfig(mode='sweep', output_dir='x')
    b = RunConfig(mode='sweep', output_dir='y')
    assert a.hash() == b.hash()
    assert a.hash() != RunConfig(mode='sweep', seed=3).hash()


def test_duplicate_and_unknown_keys_are_reported(tmp_path):
    path = _write(tmp_path / 'dup.cfg', "mode = sweep\nseed = 1\nseed = 2\ncolour = red\n")
    with pytest.raises(ConfigError) as excinfo:
        parse_config(path)
    problems = excinfo.value.problems
    assert len(problems) == 2
    assert 'línea 3' in problems[0] and 'línea 2' in problems[0]
    assert 'colour' in problems[1]


def test_missing_mode_and_invalid_values():
    with pytest.raises(ConfigError):
        build_run_config({'shape': 'ball'})
    with pytest.raises(ConfigError) as excinfo:
        build_run_config({'mode': 'verify-elliptic', 'sigma_plus': '-1', 'radius': 'abc'})
    assert len(excinfo.value.problems) == 2


def test_mode_constraints():
    with pytest.raises(ConfigError):
        build_run_config({'mode': 'verify-parabolic', 'shape': 'ellipse'})
    with pytest.raises(ConfigError):
        build_run_config({'mode': 'verify-elliptic', 'solver': 'fitted'})
    rc = build_run_config({'mode': 'ellipse-scan'})
    assert rc.shape == 'ellipse'
    assert rc.lambda_ladder == (1e3, 4e3, 1.6e4)


def test_bessel_dimension_is_a_config_error():
    with pytest.raises(ConfigError) as excinfo:
        build_run_config({'mode': 'verify-elliptic', 'shape': 'ball', 'dim': '4', 'solver': 'bessel'})
    assert any('dim = 4' in problem for problem in excinfo.value.problems)
    with pytest.raises(ConfigError):
        build_run_config({'mode': 'verify-parabolic', 'dim': '5'})
    assert run_command(['verify-elliptic', '--dim', '4', '--solver', 'bessel']) == 2
    assert run_command(['verify-elliptic', '--dim', '4', '--solver', 'fd']) == 2
    assert build_run_config({'mode': 'karamata-check', 'shape': 'ball', 'dim': '4'}).dim == 4


def test_sweep_configs_are_deterministic():
    assert sweep_configs(8, 11) == sweep_configs(8, 11)
    assert [c['kind'] for c in sweep_configs(4, 0)] == ['ball2', 'ball3', 'ellipse', 'halfspace']


def test_usage_errors_exit_2(tmp_path):
    assert run_command([]) == 2
    assert run_command(['unknown-mode']) == 2
    assert run_command(['verify-elliptic', '--sigma-plus=-1']) == 2
    path = _write(tmp_path / 'dup.cfg', "seed = 1\nseed = 2\n")
    assert run_command(['sweep', '--config', path]) == 2


def test_verify_elliptic_ball_passes(tmp_path):
    out = str(tmp_path / 'ball')
    assert run_command(['verify-elliptic', '--output-dir', out]) == 0
    summary = read_summary(out)
    assert summary[0].startswith('run mode=verify-elliptic config_hash=')
    assert any(line.startswith('check lambda_limit PASS') for line in summary)
    assert any(line.startswith('check blowup_profile PASS') for line in summary)
    assert summary[-1] == 'result PASS'
    assert os.path.exists(os.path.join(out, 'lambda_functional.csv'))
    assert os.path.exists(os.path.join(out, 'blowup_profile.csv'))


def test_verify_elliptic_halfspace_is_flat(tmp_path):
    out = str(tmp_path / 'flat')
    assert run_command(['verify-elliptic', '--shape', 'halfspace', '--output-dir', out]) == 0
    assert any(line.startswith('check flat_null PASS') for line in read_summary(out))


def test_failed_check_exits_1(tmp_path):
    out = str(tmp_path / 'strict')
    assert run_command(['verify-elliptic', '--tolerance', '1e-14', '--output-dir', out]) == 1
    assert read_summary(out)[-1] == 'result FAIL'


def test_karamata_check_passes(tmp_path):
    out = str(tmp_path / 'karamata')
    assert run_command(['karamata-check', '--measure', 'lebesgue', '--output-dir', out]) == 0
    assert run_command(['karamata-check', '--output-dir', out]) == 0
    assert read_summary(out).count('result PASS') == 2


def test_domain_error_exits_3(tmp_path):
    out = str(tmp_path / 'short')
    code = run_command(['karamata-check', '--t0', '1e-4', '--t-max', '1e-3', '--output-dir', out])
    assert code == 3
    assert read_summary(out)[-1] == 'result ERROR'


def test_execute_reraises_domain_errors(tmp_path):
    rc = build_run_config({'mode': 'karamata-check', 't0': '1e-4', 't_max': '1e-3'})
    with pytest.raises(DomainError):
        execute(rc, cli_output_dir=str(tmp_path))


def test_environment_output_dir(monkeypatch, tmp_path):
    target = tmp_path / 'from_env'
    monkeypatch.setenv('CURVLAB_OUT', str(target))
    assert run_command(['karamata-check']) == 0
    assert read_summary(str(target))[-1] == 'result PASS'


@pytest.mark.slow
def test_verify_parabolic_passes(tmp_path):
    out = str(tmp_path / 'parabolic')
    assert run_command(['verify-parabolic', '--output-dir', out]) == 0
    summary = read_summary(out)
    for name in ('time_limit', 'laplace_vs_oracle', 'theorem_consistency', 'max_principle'):
        assert any(line.startswith(f'check {name} PASS') for line in summary)


@pytest.mark.slow
def test_barrier_audit_passes(tmp_path):
    out = str(tmp_path / 'barrier')
    assert run_command(['barrier-audit', '--output-dir', out]) == 0
    assert os.path.exists(os.path.join(out, 'barrier_audit.csv'))


@pytest.mark.slow
def test_sweep_writes_run_directories(tmp_path):
    out = str(tmp_path / 'sweep')
    assert run_command(['sweep', '--sweep-count', '4', '--cells', '48', '--output-dir', out]) == 0
    for i in range(4):
        assert read_summary(os.path.join(out, f'run_{i:02d}'))
    assert os.path.exists(os.path.join(out, 'sweep.csv'))


def test_outputs_are_deterministic(tmp_path):
    first, second = str(tmp_path / 'a'), str(tmp_path / 'b')
    for out in (first, second):
        assert run_command(['verify-elliptic', '--lambda-ladder', '1e2:1e6:10x', '--output-dir', out]) == 0
    for name in ('lambda_functional.csv', 'blowup_profile.csv'):
        with open(os.path.join(first, name), 'rb') as fa, open(os.path.join(second, name), 'rb') as fb:
            assert fa.read() == fb.read()
    assert read_summary(first)[0] == read_summary(second)[0]
