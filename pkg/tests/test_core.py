import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qdrive.core import (
    KET0,
    KET1,
    ControlSample,
    DomainError,
    ImpulseRotation,
    InvalidParameterError,
    ProtocolSchedule,
    QDriveError,
    make_custom_schedule,
    make_state,
    orthogonal,
    overlap2,
    sample,
    z_rotation,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)


@given(finite, finite, finite, finite)
def test_make_state_is_normalized(a, b, c, d):
    if a == b == c == d == 0:
        return
    if abs(complex(a, b)) + abs(complex(c, d)) < 1e-100:
        return
    psi = make_state(complex(a, b), complex(c, d))
    assert abs(np.linalg.norm(psi) - 1.0) < 1e-14


def test_zero_vector_rejected():
    with pytest.raises(InvalidParameterError):
        make_state(0, 0)


def test_errors_are_value_errors():
    assert issubclass(QDriveError, ValueError)


def test_basis_overlap():
    assert overlap2(KET0, KET1) == 0.0
    assert overlap2(KET0, KET0) == 1.0


@given(finite, finite, finite, finite)
def test_orthogonal_state(a, b, c, d):
    if abs(complex(a, b)) + abs(complex(c, d)) < 1e-100:
        return
    psi = make_state(complex(a, b), complex(c, d))
    assert abs(np.vdot(psi, orthogonal(psi))) < 1e-12


@given(st.floats(-50, 50, allow_nan=False))
def test_z_rotation_matches_expm(area):
    from scipy.linalg import expm

    from qdrive.core import SIGMA_Z

    assert np.allclose(z_rotation(area), expm(-1j * area * SIGMA_Z), atol=1e-12)


def test_control_sample_hamiltonian_hermitian():
    h = ControlSample(0.3, 0.7, -0.2).hamiltonian()
    assert np.allclose(h, h.conj().T)
    assert np.allclose(np.linalg.eigvalsh(h), [-math.sqrt(0.3**2 + 0.7**2 + 0.2**2), math.sqrt(0.62)])


def test_impulse_validation():
    with pytest.raises(InvalidParameterError):
        ImpulseRotation("middle", 0.1)
    with pytest.raises(InvalidParameterError):
        ImpulseRotation("start", 0.1, axis="x")
    with pytest.raises(InvalidParameterError):
        ImpulseRotation("start", math.nan)
    assert np.allclose(ImpulseRotation("end", 0.25).unitary(), z_rotation(0.25))


def test_schedule_validation():
    one = lambda tau: 1.0
    with pytest.raises(InvalidParameterError):
        ProtocolSchedule("bogus", 1.0, one, one)
    with pytest.raises(InvalidParameterError):
        ProtocolSchedule("custom", 0.0, one, one)
    with pytest.raises(InvalidParameterError):
        ProtocolSchedule("custom", 1.0, one, one, breakpoints=(1.0,))
    with pytest.raises(InvalidParameterError):
        make_custom_schedule(one, one, -1.0)


def test_sample_domain():
    s = make_custom_schedule(lambda t: t, lambda t: 2.0, 3.0, impulses=[ImpulseRotation("start", 0.1)])
    assert sample(s, 0.5) == ControlSample(0.5, 2.0, 0.0)
    assert s.start_impulses and not s.end_impulses
    with pytest.raises(DomainError):
        sample(s, 1.0 + 1e-9)
    with pytest.raises(DomainError):
        s.sample(-0.1)
