import math

import numpy as np
import pytest

from qutrit_toffoli.gates import toffoli_circuit
from qutrit_toffoli.noise import (
    DEVICE_T1_US,
    DEVICE_T2STAR_US,
    DeviceParams,
    KrausChannel,
    NoiseModel,
    amplitude_damping_qutrit,
    circuit_channel,
    decohere,
    dephasing_qutrit,
    device_params_from_config,
    noisy_apply,
    parse_config_file,
    tphi_from_t2star,
)
from qutrit_toffoli.gates import QUTRIT3, truth_table, truth_table_fidelity
from qutrit_toffoli.register import DensityOperator, StateVector


def superoperator(channel: KrausChannel) -> np.ndarray:
    """Row-major superoperator sum_k K (x) K*; composition becomes matmul."""
    acc = np.zeros((9, 9), dtype=complex)
    for k in channel.operators:
        acc += np.kron(k, k.conj())
    return acc


def random_qutrit_density(rng) -> np.ndarray:
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    rho = a @ a.conj().T
    return rho / rho.trace()


def test_tphi_device_site_a_exact_fraction():
    # 1/(1/0.45 - 1/1.1) reduces to 99/130 microseconds
    assert tphi_from_t2star(0.55, 0.45) == pytest.approx(99 / 130, abs=1e-15)


def test_tphi_device_values():
    params = DeviceParams.default()
    assert params.tphi_us == pytest.approx((99 / 130, 1.05, 143 / 155), abs=1e-12)


def test_tphi_limit_and_boundary():
    assert tphi_from_t2star(math.inf, 0.5) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        tphi_from_t2star(0.5, 1.0)  # exactly 2*T1
    with pytest.raises(ValueError):
        tphi_from_t2star(0.5, 1.2)
    with pytest.raises(ValueError):
        tphi_from_t2star(-1.0, 0.5)


def test_device_params_defaults():
    params = DeviceParams.default()
    assert params.t1_us == DEVICE_T1_US
    assert params.t2star_us == DEVICE_T2STAR_US


def test_amplitude_damping_level_populations():
    t, t1 = 67.0, 550.0 / 1e3  # T1 in microseconds
    channel = amplitude_damping_qutrit(t, t1)
    one = np.zeros((3, 3), dtype=complex)
    one[1, 1] = 1.0
    out = channel.apply(one)
    assert out[1, 1].real == pytest.approx(np.exp(-67 / 550), abs=1e-12)
    assert out[0, 0].real == pytest.approx(1 - np.exp(-67 / 550), abs=1e-12)
    two = np.zeros((3, 3), dtype=complex)
    two[2, 2] = 1.0
    out2 = channel.apply(two)
    assert out2[2, 2].real == pytest.approx(np.exp(-2 * 67 / 550), abs=1e-12)
    assert abs(out2.trace() - 1.0) < 1e-12


def test_amplitude_damping_matches_rate_equation_oracle():
    # integrate dp2 = -g2 p2, dp1 = g2 p2 - g1 p1 with a fine Euler grid
    t_ns, t1_us, scale = 40.0, 0.7, 2.0
    g1 = 1 / (t1_us * 1e3)
    g2 = scale * g1
    p2, p1, p0 = 1.0, 0.0, 0.0
    steps = 200000
    dt = t_ns / steps
    for _ in range(steps):
        d2 = -g2 * p2
        d1 = g2 * p2 - g1 * p1
        p2 += d2 * dt
        p1 += d1 * dt
    p0 = 1 - p1 - p2
    channel = amplitude_damping_qutrit(t_ns, t1_us, scale)
    two = np.diag([0.0, 0.0, 1.0]).astype(complex)
    out = channel.apply(two)
    assert out[2, 2].real == pytest.approx(p2, abs=1e-6)
    assert out[1, 1].real == pytest.approx(p1, abs=1e-6)
    assert out[0, 0].real == pytest.approx(p0, abs=1e-6)


@pytest.mark.parametrize("scale", [1.0, 2.0, 2.7])
def test_amplitude_damping_cptp(scale):
    for t in (0.0, 8.0, 67.0, 5000.0):
        channel = amplitude_damping_qutrit(t, 0.55, scale)
        total = sum(k.conj().T @ k for k in channel.operators)
        assert np.max(np.abs(total - np.eye(3))) < 1e-12
        assert np.linalg.eigvalsh(channel.choi()).min() > -1e-12


@pytest.mark.parametrize("scale", [1.0, 2.0])
def test_amplitude_damping_semigroup(scale):
    # degenerate rates (scale 1) exercise the g2 == g1 branch
    for ta, tb in [(8.0, 23.0), (7.0, 7.0), (21.0, 8.0)]:
        a = superoperator(amplitude_damping_qutrit(ta, 0.55, scale))
        b = superoperator(amplitude_damping_qutrit(tb, 0.55, scale))
        ab = superoperator(amplitude_damping_qutrit(ta + tb, 0.55, scale))
        assert np.max(np.abs(a @ b - ab)) < 1e-9


def test_amplitude_damping_long_time_reaches_ground():
    rng = np.random.default_rng(3)
    channel = amplitude_damping_qutrit(1e7, 0.55)
    out = channel.apply(random_qutrit_density(rng))
    expected = np.diag([1.0, 0.0, 0.0])
    assert np.max(np.abs(out - expected)) < 1e-9


def test_amplitude_damping_zero_time_is_identity():
    rng = np.random.default_rng(4)
    rho = random_qutrit_density(rng)
    assert np.max(np.abs(amplitude_damping_qutrit(0.0, 0.55).apply(rho) - rho)) < 1e-14


def test_dephasing_coherence_factors():
    t_ns, tphi_us, scale = 23.0, 0.9, 1.3
    channel = dephasing_qutrit(t_ns, tphi_us, scale)
    t = t_ns / (tphi_us * 1e3)
    unit = np.zeros((3, 3), dtype=complex)
    unit[0, 1] = 1.0
    assert channel.apply(unit)[0, 1] == pytest.approx(np.exp(-t), abs=1e-12)
    unit12 = np.zeros((3, 3), dtype=complex)
    unit12[1, 2] = 1.0
    assert channel.apply(unit12)[1, 2] == pytest.approx(np.exp(-t * scale), abs=1e-12)
    unit02 = np.zeros((3, 3), dtype=complex)
    unit02[0, 2] = 1.0
    assert channel.apply(unit02)[0, 2] == pytest.approx(
        np.exp(-t) * np.exp(-t * scale), abs=1e-12
    )


def test_dephasing_preserves_populations():
    rng = np.random.default_rng(5)
    rho = random_qutrit_density(rng)
    out = dephasing_qutrit(31.0, 0.76).apply(rho)
    assert np.allclose(np.diag(out), np.diag(rho), atol=1e-12)


@pytest.mark.parametrize("scale", [0.5, 1.0, 2.0])
def test_dephasing_cptp_and_semigroup(scale):
    for t in (0.0, 8.0, 67.0):
        channel = dephasing_qutrit(t, 0.76, scale)
        total = sum(k.conj().T @ k for k in channel.operators)
        assert np.max(np.abs(total - np.eye(3))) < 1e-12
        assert np.linalg.eigvalsh(channel.choi()).min() > -1e-12
    a = superoperator(dephasing_qutrit(8.0, 0.76, scale))
    b = superoperator(dephasing_qutrit(23.0, 0.76, scale))
    ab = superoperator(dephasing_qutrit(31.0, 0.76, scale))
    assert np.max(np.abs(a @ b - ab)) < 1e-9


def test_kraus_channel_requires_trace_preservation():
    bad = np.diag([0.9, 1.0, 1.0]).astype(complex)
    with pytest.raises(ValueError):
        KrausChannel((bad,), duration_ns=1.0)


def test_negative_durations_rejected():
    with pytest.raises(ValueError):
        amplitude_damping_qutrit(-1.0, 0.55)
    with pytest.raises(ValueError):
        dephasing_qutrit(-1.0, 0.76)


def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel((0.5, 0.5), (1.0, 1.0, 1.0))
    with pytest.raises(ValueError):
        NoiseModel((0.5, -0.5, 0.5), (1.0, 1.0, 1.0))
    with pytest.raises(ValueError):
        NoiseModel((0.5, 0.5, 0.5), (1.0, 1.0, 1.0), relax_scale2=-1.0)
    model = NoiseModel.from_device()
    assert model.t1_us == DEVICE_T1_US
    assert model.tphi_us == pytest.approx((99 / 130, 1.05, 143 / 155))


def test_decohere_zero_duration_is_identity():
    rng = np.random.default_rng(6)
    mat = rng.normal(size=(27, 27)) + 1j * rng.normal(size=(27, 27))
    model = NoiseModel.from_device()
    assert decohere(mat, QUTRIT3, model, 0.0) is mat


def test_noisy_apply_yields_valid_state():
    model = NoiseModel.from_device()
    circuit = toffoli_circuit()
    for digits in [(0, 0, 0), (1, 1, 0), (1, 1, 1)]:
        state = StateVector.computational(QUTRIT3, digits).density()
        out = noisy_apply(circuit, state, model, prep_window_ns=8.0, meas_window_ns=8.0)
        assert abs(out.trace() - 1.0) < 1e-10  # validation also checks positivity


def test_circuit_channel_without_model_is_unitary_conjugation():
    rng = np.random.default_rng(8)
    circuit = toffoli_circuit()
    channel = circuit_channel(circuit, None)
    unitary = circuit.unitary()
    a = rng.normal(size=(27, 27)) + 1j * rng.normal(size=(27, 27))
    rho = a @ a.conj().T
    rho /= rho.trace()
    assert np.allclose(channel(rho), unitary @ rho @ unitary.conj().T, atol=1e-12)


def test_circuit_channel_window_validation():
    with pytest.raises(ValueError):
        circuit_channel(toffoli_circuit(), None, prep_window_ns=-1.0)
    channel = circuit_channel(toffoli_circuit(), None)
    with pytest.raises(ValueError):
        channel(np.eye(8))


def test_truth_table_fidelity_decreases_with_spam_exposure():
    circuit = toffoli_circuit()
    model = NoiseModel.from_device()
    fidelities = []
    for window in (0.0, 8.0, 40.0):
        channel = circuit_channel(circuit, model, prep_window_ns=window, meas_window_ns=window)
        fidelities.append(truth_table_fidelity(truth_table(channel)))
    assert fidelities[0] > fidelities[1] > fidelities[2]
    noiseless = truth_table_fidelity(truth_table(circuit_channel(circuit, None)))
    assert noiseless == pytest.approx(1.0, abs=1e-12)
    assert fidelities[0] < 1.0


def test_parse_config_file(tmp_path):
    path = tmp_path / "device.cfg"
    path.write_text(
        """
        # overrides for a colder fridge
        t1_a_us = 0.80
        T2STAR_A_US = 0.60   # keys are case-insensitive
        deph_scale2 = 1.5
        """
    )
    values = parse_config_file(path)
    assert values == {"t1_a_us": 0.80, "t2star_a_us": 0.60, "deph_scale2": 1.5}
    params, relax2, deph2 = device_params_from_config(values)
    assert params.t1_us[0] == pytest.approx(0.80)
    assert params.t1_us[1] == DEVICE_T1_US[1]
    assert relax2 == 2.0 and deph2 == 1.5


@pytest.mark.parametrize(
    "content",
    [
        "t1_q_us = 0.5",  # unknown key
        "t1_a_us 0.5",  # missing equals
        "t1_a_us = fast",  # not a number
        "t1_a_us = 0.5\nt1_a_us = 0.6",  # duplicate
    ],
)
def test_parse_config_file_rejects(tmp_path, content):
    path = tmp_path / "bad.cfg"
    path.write_text(content)
    with pytest.raises(ValueError):
        parse_config_file(path)


def test_config_t2star_limit_enforced(tmp_path):
    path = tmp_path / "limit.cfg"
    path.write_text("t2star_a_us = 1.2\n")  # 2*T1_A = 1.1
    with pytest.raises(ValueError):
        device_params_from_config(parse_config_file(path))


def test_spectroscopy_fields_are_stored_but_inert():
    default = DeviceParams.default()
    assert default.resonator_frequency_ghz == pytest.approx(8.625)
    assert default.resonator_quality == pytest.approx(3300.0)
    assert default.max_frequency_ghz == pytest.approx((6.714, 6.050, 4.999))
    assert default.charging_energy_ghz == pytest.approx((0.264, 0.296, 0.307))
    assert default.coupling_ghz == pytest.approx((0.36, 0.30, 0.34))
    # changing them must not move a single Kraus operator
    rewired = DeviceParams(
        default.t1_us,
        default.t2star_us,
        max_frequency_ghz=(1.0, 1.0, 1.0),
        resonator_quality=7.0,
    )
    base = NoiseModel.from_device(default)
    other = NoiseModel.from_device(rewired)
    for site in range(3):
        relax_a, deph_a = base.site_channels(site, 67.0)
        relax_b, deph_b = other.site_channels(site, 67.0)
        assert all(
            np.array_equal(x, y)
            for x, y in zip(relax_a.operators, relax_b.operators)
        )
        assert all(
            np.array_equal(x, y)
            for x, y in zip(deph_a.operators, deph_b.operators)
        )


def test_spectroscopy_fields_validated():
    with pytest.raises(ValueError):
        DeviceParams(DEVICE_T1_US, DEVICE_T2STAR_US, coupling_ghz=(0.3, 0.3))
    with pytest.raises(ValueError):
        DeviceParams(DEVICE_T1_US, DEVICE_T2STAR_US, resonator_quality=-1.0)
