import numpy as np
import pytest

from pynah.cvnn import (
    AdamState,
    ComplexAffine,
    ComplexNetwork,
    adam_step,
    cardioid,
    cardioid_wirtinger,
    network_adam_step,
)
from pynah.errors import ContractError, SolverError


def fd_gradient(f, z, h=1e-6):
    """Central finite differences of a real scalar over (re, im) of z."""
    re = (f(z + h) - f(z - h)) / (2 * h)
    im = (f(z + 1j * h) - f(z - 1j * h)) / (2 * h)
    return re, im


class TestCardioid:
    def test_positive_real_passthrough(self):
        for r in (0.5, 1.0, 7.3):
            assert cardioid(r) == pytest.approx(r)

    def test_negative_real_killed(self):
        for r in (-0.5, -2.0):
            assert abs(cardioid(r)) == pytest.approx(0.0, abs=1e-15)

    def test_imaginary_half_pass(self):
        assert cardioid(2j) == pytest.approx(1j)
        assert cardioid(-3j) == pytest.approx(-1.5j)

    def test_zero(self):
        assert cardioid(0.0) == 0.0

    def test_wirtinger_at_zero(self):
        df_dz, df_dzbar = cardioid_wirtinger(np.array([0.0 + 0.0j]))
        assert df_dz[0] == 0.5
        assert df_dzbar[0] == 0.0

    def test_wirtinger_matches_finite_differences(self):
        rng = np.random.default_rng(0)
        checked = 0
        while checked < 60:
            z = complex(rng.standard_normal(), rng.standard_normal())
            if abs(z) < 0.1 or abs(np.angle(z)) > 2.9:
                continue
            df_dz, df_dzbar = cardioid_wirtinger(np.array([z]))
            # real loss L = Re(conj(w) f(z)) has dL/dzbar = (conj(w) df/dzbar + w conj(df/dz))/2
            w = complex(rng.standard_normal(), rng.standard_normal())
            loss = lambda zz: (np.conj(w) * cardioid(zz)).real
            fd_re, fd_im = fd_gradient(loss, z)
            dl_dzbar = 0.5 * (np.conj(w) * df_dzbar[0] + w * np.conj(df_dz[0]))
            assert fd_re == pytest.approx(2 * dl_dzbar.real, rel=1e-5, abs=1e-8)
            assert fd_im == pytest.approx(2 * dl_dzbar.imag, rel=1e-5, abs=1e-8)
            checked += 1


class TestForward:
    def test_identity_layer(self):
        net = ComplexNetwork([ComplexAffine(np.eye(3, dtype=complex), np.zeros(3, dtype=complex))])
        x = np.array([1.0 + 2j, -0.5j, 3.0])
        y, _ = net.forward(x)
        np.testing.assert_array_equal(y, x)

    def test_zero_network(self):
        net = ComplexNetwork([ComplexAffine(np.zeros((2, 3), dtype=complex), np.zeros(2, dtype=complex))])
        y, _ = net.forward(np.ones(3, dtype=complex))
        assert np.all(y == 0)

    def test_hand_computed_product(self):
        w = np.array([[1.0 + 1j, 2.0], [0.0, -1j]])
        b = np.array([0.5, -0.5j])
        net = ComplexNetwork([ComplexAffine(w, b)])
        x = np.array([1.0 - 1j, 2j])
        y, _ = net.forward(x)
        # row 1: (1+j)(1-j) + 2*2j + 0.5 = 2 + 4j + 0.5
        assert y[0] == pytest.approx(2.5 + 4j)
        # row 2: 0 + (-j)(2j) - 0.5j = 2 - 0.5j
        assert y[1] == pytest.approx(2.0 - 0.5j)

    def test_dimension_mismatch(self):
        net = ComplexNetwork.create([3, 4], seed=0)
        with pytest.raises(ContractError):
            net.forward(np.ones(5, dtype=complex))

    def test_determinism(self):
        net = ComplexNetwork.create([4, 6, 3], seed=5)
        x = np.arange(4, dtype=complex) + 1j
        y1, _ = net.forward(x)
        y2, _ = net.forward(x)
        assert np.array_equal(y1, y2)

    def test_create_shapes_and_count(self):
        net = ComplexNetwork.create([64, 256, 512, 1024], seed=0)
        assert net.in_size == 64 and net.out_size == 1024
        expected = 64 * 256 + 256 + 256 * 512 + 512 + 512 * 1024 + 1024
        assert net.param_count == expected


class TestBackward:
    def test_bias_gradient_for_quadratic_loss(self):
        # L = ||y||^2 with a single affine layer: dL/d(conj b) = y
        net = ComplexNetwork.create([3, 3], seed=1)
        x = np.array([0.3 - 0.1j, 1.2j, -0.7])
        y, tape = net.forward(x)
        grads = net.backward(tape, loss_cotangent=y)
        np.testing.assert_allclose(grads.biases[0], y, rtol=1e-14)

    def test_zero_cotangent(self):
        net = ComplexNetwork.create([3, 5, 2], seed=2)
        _, tape = net.forward(np.ones(3, dtype=complex))
        grads = net.backward(tape, np.zeros(2, dtype=complex))
        assert all(np.all(g == 0) for g in grads.weights)
        assert all(np.all(g == 0) for g in grads.biases)

    def test_stale_tape_rejected(self):
        net = ComplexNetwork.create([2, 2], seed=3)
        y, tape = net.forward(np.ones(2, dtype=complex))
        state = AdamState.for_arrays([a for _, a in net.parameters()])
        grads = net.backward(tape, y)
        network_adam_step(net, grads, state, lr=0.01)
        with pytest.raises(ContractError):
            net.backward(tape, y)

    def test_three_layer_finite_difference_check(self):
        rng = np.random.default_rng(4)
        net = ComplexNetwork.create([4, 5, 6, 3], seed=4)
        target = rng.standard_normal(3) + 1j * rng.standard_normal(3)

        def loss_value(network):
            y, _ = network.forward(x)
            e = y - target
            return float(np.vdot(e, e).real)

        for _ in range(20):
            x = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            y, tape = net.forward(x)
            grads = net.backward(tape, loss_cotangent=(y - target))
            flat = []
            for dw, db in zip(grads.weights, grads.biases):
                flat.extend([dw, db])
            h = 1e-6
            for (name, param), grad in zip(net.parameters(), flat):
                flat_param = param.reshape(-1)
                flat_grad = grad.reshape(-1)
                for idx in rng.choice(flat_param.size, size=min(4, flat_param.size), replace=False):
                    for direction, expected in ((1.0, 2 * flat_grad[idx].real), (1j, 2 * flat_grad[idx].imag)):
                        original = flat_param[idx]
                        flat_param[idx] = original + direction * h
                        f_plus = loss_value(net)
                        flat_param[idx] = original - direction * h
                        f_minus = loss_value(net)
                        flat_param[idx] = original
                        fd = (f_plus - f_minus) / (2 * h)
                        assert fd == pytest.approx(expected, rel=1e-5, abs=1e-7), name


class TestAdam:
    def test_zero_gradient_keeps_params(self):
        param = np.array([1.0 + 2j, -0.5j])
        state = AdamState.for_arrays([param])
        adam_step([("p", param)], [np.zeros(2, dtype=complex)], state, lr=0.1)
        assert np.array_equal(param, np.array([1.0 + 2j, -0.5j]))

    def test_first_step_is_lr(self):
        param = np.array([0.0 + 0.0j])
        state = AdamState.for_arrays([param])
        adam_step([("p", param)], [np.array([1.0 + 0.0j])], state, lr=0.05)
        assert param[0].real == pytest.approx(-0.05, rel=1e-6)
        assert param[0].imag == 0.0

    def test_constant_gradient_step_magnitude_approaches_lr(self):
        param = np.array([0.0 + 0.0j])
        state = AdamState.for_arrays([param])
        g = np.array([0.3 + 0.0j])
        prev = param[0].real
        for _ in range(200):
            adam_step([("p", param)], [g], state, lr=0.01)
        step = prev - param[0].real
        # after many steps with a constant gradient, each step is ~lr
        last = param[0].real
        adam_step([("p", param)], [g], state, lr=0.01)
        assert last - param[0].real == pytest.approx(0.01, rel=1e-3)

    def test_moments_decay_without_gradient(self):
        param = np.array([1.0 + 0.0j])
        state = AdamState.for_arrays([param])
        adam_step([("p", param)], [np.array([1.0 + 0.0j])], state, lr=0.01)
        m_before = state.m[0].copy()
        adam_step([("p", param)], [np.array([0.0 + 0.0j])], state, lr=0.01)
        assert np.all(np.abs(state.m[0]) < np.abs(m_before) + 1e-15)

    def test_non_finite_gradient_names_parameter(self):
        net = ComplexNetwork.create([2, 2], seed=0)
        state = AdamState.for_arrays([a for _, a in net.parameters()])
        bad = [np.full((2, 2), np.nan, dtype=complex), np.zeros(2, dtype=complex)]
        with pytest.raises(SolverError, match="layers\\[0\\].weight"):
            adam_step(net.parameters(), bad, state, lr=0.01)

    def test_shapes_conserved(self):
        net = ComplexNetwork.create([3, 4, 2], seed=6)
        shapes = [a.shape for _, a in net.parameters()]
        x = np.ones(3, dtype=complex)
        y, tape = net.forward(x)
        grads = net.backward(tape, y)
        state = AdamState.for_arrays([a for _, a in net.parameters()])
        network_adam_step(net, grads, state, lr=0.01)
        assert [a.shape for _, a in net.parameters()] == shapes
