import pytest

from curvlab import create_context
from curvlab.closedforms import Conductivity
from curvlab.geometry import Ball, Ellipse2D, HalfSpace


@pytest.fixture(scope='session', autouse=True)
def testing_context():
    """Logging de pruebas (nivel WARNING, sin archivo)."""
    return create_context('testing')


@pytest.fixture(autouse=True)
def isolated_output(monkeypatch, tmp_path):
    """Ninguna prueba escribe fuera de tmp_path."""
    monkeypatch.delenv('CURVLAB_OUT', raising=False)
    monkeypatch.chdir(tmp_path)
    return tmp_path


@pytest.fixture
def cond():
    return Conductivity(1.0, 4.0)


@pytest.fixture
def equal_cond():
    return Conductivity(1.0, 1.0)


@pytest.fixture
def ball3():
    return Ball(3, 1.0)


@pytest.fixture
def ball2():
    return Ball(2, 1.0)


@pytest.fixture
def ellipse():
    return Ellipse2D(2.0, 1.0)


@pytest.fixture
def halfspace():
    return HalfSpace(3)
