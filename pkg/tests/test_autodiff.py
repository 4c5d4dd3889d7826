"""
自动微分与网络层测试
覆盖反向传播、各层正向示例与有限差分梯度检查、初始化、ADAM、学习率调度与检查点
"""

import numpy as np
import pytest

from autodiff import ops
from autodiff.checkpoint import load_checkpoint, save_checkpoint
from autodiff.engine import DiffArray, constant, parameter
from autodiff.layers import (
    LayerKind,
    LayerParams,
    conv2d,
    deconv2d,
    global_pool,
    kaiming_init,
    linear,
    normalize,
    relu,
    sigmoid,
    spatial_pool,
)
from autodiff.optim import AdamState, LrSchedule, adam_step, lr_at
from tensor.exceptions import ArgumentError, FormatError
from tests.helpers import check_grad


def weighted_sum(out: DiffArray, weights: np.ndarray) -> DiffArray:
    return ops.sum_all(ops.mul(out, constant(weights)))


def random_layer(rng, kind, cin, cout, bias=True):
    p = LayerParams.create(kind, cin, cout, bias=bias, dtype=np.float64, name=kind.value)
    p.weight.value = rng.normal(size=p.weight.shape)
    if p.bias is not None:
        p.bias.value = rng.normal(size=p.bias.shape)
    return p


class TestEngine:
    """计算图与反向传播"""

    def test_shared_node_accumulates_gradient(self):
        a = parameter(np.array(3.0), name="a")
        b = a * a + a
        b.backward()
        assert a.grad == pytest.approx(7.0)

    def test_backward_requires_scalar_or_grad(self):
        a = parameter(np.ones(3))
        with pytest.raises(ArgumentError):
            (a * 2.0).backward()
        with pytest.raises(ArgumentError):
            constant(np.ones(1)).backward()

    def test_backward_is_linear_in_the_loss(self, rng):
        x = parameter(rng.normal(size=(3, 4)), name="x")
        w = parameter(rng.normal(size=(4, 2)), name="w")

        def first():
            return ops.sum_all(ops.sigmoid(ops.matmul(x, w)))

        def second():
            return ops.mean(ops.square(ops.matmul(x, w)))

        grads = []
        for loss in (first, second, lambda: ops.add(first(), second())):
            x.zero_grad()
            w.zero_grad()
            loss().backward()
            grads.append((np.array(x.grad, copy=True), np.array(w.grad, copy=True)))
        for part in range(2):
            np.testing.assert_allclose(grads[2][part], grads[0][part] + grads[1][part], rtol=1e-12, atol=1e-14)

    def test_first_non_finite_reports_earliest_node(self):
        a = parameter(np.array([1.0, 0.0]), name="a")
        bad = DiffArray(np.log(np.array([1.0, 0.0])), parents=(a,), op="log",
                        backward_fn=lambda g: (g,))
        total = ops.sum_all(ops.square(bad))
        assert total.first_non_finite() is bad


class TestConv:

    def test_identity_1x1_conv(self, rng):
        p = LayerParams.create(LayerKind.CONV1X1, 3, 3, dtype=np.float64)
        p.weight.value = np.eye(3)[:, :, None, None]
        x = constant(rng.normal(size=(1, 3, 4, 4)))
        np.testing.assert_array_equal(conv2d(x, p).value, x.value)

    def test_zero_input_gives_bias(self, rng):
        p = random_layer(rng, LayerKind.CONV3X3, 2, 3)
        out = conv2d(constant(np.zeros((1, 2, 5, 5))), p).value
        np.testing.assert_allclose(out, np.broadcast_to(p.bias.value[None, :, None, None], out.shape))

    def test_conv3x3_gradients(self, rng):
        p = random_layer(rng, LayerKind.CONV3X3, 2, 3)
        x = parameter(rng.normal(size=(1, 2, 5, 5)), name="x")
        weights = rng.normal(size=(1, 3, 5, 5))
        check_grad(lambda: weighted_sum(conv2d(x, p), weights), [x, p.weight, p.bias])

    def test_strided_conv_shape_and_gradients(self, rng):
        p = random_layer(rng, LayerKind.CONV2X2_S2, 2, 2)
        x = parameter(rng.normal(size=(1, 2, 6, 4)), name="x")
        assert conv2d(x, p).shape == (1, 2, 3, 2)
        weights = rng.normal(size=(1, 2, 3, 2))
        check_grad(lambda: weighted_sum(conv2d(x, p), weights), [x, p.weight, p.bias])

    def test_channel_mismatch(self, rng):
        p = random_layer(rng, LayerKind.CONV3X3, 2, 3)
        with pytest.raises(ArgumentError):
            conv2d(constant(np.zeros((1, 3, 4, 4))), p)


class TestDeconv:

    def test_delta_stamps_kernel(self):
        p = LayerParams.create(LayerKind.DECONV2X2_S2, 1, 1, bias=False, dtype=np.float64)
        kernel = np.array([[1.0, 2.0], [3.0, 4.0]])
        p.weight.value = kernel[None, None]
        x = np.zeros((1, 1, 3, 3))
        x[0, 0, 1, 2] = 1.0
        out = deconv2d(constant(x), p).value[0, 0]
        assert out.shape == (6, 6)
        np.testing.assert_array_equal(out[2:4, 4:6], kernel)
        assert out.sum() == kernel.sum()

    def test_adjoint_of_strided_conv(self, rng):
        """<deconv(x), y> = <x, conv(y)>，两者共享同一核"""
        up = random_layer(rng, LayerKind.DECONV2X2_S2, 2, 3, bias=False)
        down = LayerParams.create(LayerKind.CONV2X2_S2, 3, 2, bias=False, dtype=np.float64)
        down.weight.value = up.weight.value.copy()  # (Cin=2, Cout=3, k, k) == conv 的 (Cout, Cin, k, k)
        x = rng.normal(size=(1, 2, 3, 4))
        y = rng.normal(size=(1, 3, 6, 8))
        lhs = np.sum(deconv2d(constant(x), up).value * y)
        rhs = np.sum(x * conv2d(constant(y), down).value)
        assert lhs == pytest.approx(rhs, rel=1e-10)

    def test_deconv_gradients(self, rng):
        p = random_layer(rng, LayerKind.DECONV2X2_S2, 2, 3)
        x = parameter(rng.normal(size=(1, 2, 3, 2)), name="x")
        weights = rng.normal(size=(1, 3, 6, 4))
        check_grad(lambda: weighted_sum(deconv2d(x, p), weights), [x, p.weight, p.bias])


class TestActivationsAndPools:

    def test_activation_values(self):
        np.testing.assert_array_equal(relu(constant(np.array([-1.0, 2.0]))).value, [0.0, 2.0])
        assert sigmoid(constant(np.array(0.0))).item() == 0.5

    def test_activation_gradients(self, rng):
        x = parameter(rng.normal(size=(1, 2, 3, 3)), name="x")
        weights = rng.normal(size=x.shape)
        check_grad(lambda: weighted_sum(relu(x), weights), [x])
        check_grad(lambda: weighted_sum(sigmoid(x), weights), [x])

    def test_global_pool_values(self):
        x = constant(np.array([[1.0, 2.0], [3.0, 4.0]])[None, None])
        assert global_pool(x, "avg").item() == 2.5
        assert global_pool(x, "max").item() == 4.0
        c = constant(np.full((1, 2, 3, 3), 1.5))
        np.testing.assert_array_equal(global_pool(c, "max").value, np.full((1, 2, 1, 1), 1.5))

    def test_spatial_pool_values(self, rng):
        single = constant(rng.normal(size=(1, 1, 3, 4)))
        np.testing.assert_array_equal(spatial_pool(single, "avg").value, single.value)
        np.testing.assert_array_equal(spatial_pool(single, "max").value, single.value)
        two = constant(np.concatenate([np.full((1, 1, 2, 2), 1.0), np.full((1, 1, 2, 2), 3.0)], axis=1))
        np.testing.assert_array_equal(spatial_pool(two, "avg").value, np.full((1, 1, 2, 2), 2.0))
        np.testing.assert_array_equal(spatial_pool(two, "max").value, np.full((1, 1, 2, 2), 3.0))

    def test_max_pool_tie_goes_to_first(self):
        x = parameter(np.full((1, 1, 2, 2), 2.0))
        global_pool(x, "max").backward(np.ones((1, 1, 1, 1)))
        np.testing.assert_array_equal(x.grad[0, 0], [[1.0, 0.0], [0.0, 0.0]])

    @pytest.mark.parametrize("pool", [global_pool, spatial_pool])
    @pytest.mark.parametrize("kind", ["avg", "max"])
    def test_pool_gradients(self, rng, pool, kind):
        x = parameter(rng.normal(size=(1, 3, 4, 4)), name="x")
        weights = rng.normal(size=pool(x, kind).shape)
        check_grad(lambda: weighted_sum(pool(x, kind), weights), [x])


class TestFcAndNorm:

    def test_linear_gradients(self, rng):
        p = random_layer(rng, LayerKind.FC, 4, 3)
        x = parameter(rng.normal(size=(1, 4, 1, 1)), name="x")
        out = linear(x, p)
        assert out.shape == (1, 3)
        np.testing.assert_allclose(out.value[0], p.weight.value @ x.value.reshape(-1) + p.bias.value)
        weights = rng.normal(size=(1, 3))
        check_grad(lambda: weighted_sum(linear(x, p), weights), [x, p.weight, p.bias])

    def test_normalize_constant_channel_gives_shift(self):
        p = LayerParams.create(LayerKind.NORM, 1, 1, dtype=np.float64)
        p.weight.value = np.array([2.0])
        p.bias.value = np.array([0.3])
        out = normalize(constant(np.full((1, 1, 3, 3), 5.0)), p).value
        np.testing.assert_allclose(out, 0.3)

    def test_normalize_after_init_is_identity_on_standardized(self, rng):
        p = kaiming_init(LayerParams.create(LayerKind.NORM, 1, 1, dtype=np.float64), 0)
        v = rng.normal(size=(1, 1, 8, 8))
        v = (v - v.mean()) / v.std()
        np.testing.assert_allclose(normalize(constant(v), p).value, v, atol=1e-4)

    def test_normalize_gradients(self, rng):
        p = random_layer(rng, LayerKind.NORM, 2, 2)
        x = parameter(rng.normal(size=(1, 2, 4, 3)), name="x")
        weights = rng.normal(size=x.shape)
        check_grad(lambda: weighted_sum(normalize(x, p), weights), [x, p.weight, p.bias], tol=1e-5)


class TestOps:

    def test_mode_product_gradients(self, rng):
        x = parameter(rng.normal(size=(1, 3, 4, 5)), name="x")
        m = parameter(rng.normal(size=(2, 4)), name="m")
        weights = rng.normal(size=(1, 3, 2, 5))
        check_grad(lambda: weighted_sum(ops.mode_product(x, m, 2), weights), [x, m])

    def test_row_normalize_and_clip(self, rng):
        w = parameter(rng.uniform(0.1, 1.0, size=(2, 5)), name="w")
        weights = rng.normal(size=(2, 5))
        check_grad(lambda: weighted_sum(ops.row_normalize(ops.clip_min(w, 1e-8)), weights), [w])
        np.testing.assert_allclose(ops.row_normalize(w).value.sum(axis=1), 1.0)

    def test_block_kernel_matrix(self, rng):
        k = parameter(rng.normal(size=3), name="k")
        m = ops.block_kernel_matrix(k, 2)
        expected = np.zeros((2, 6))
        expected[0, :3] = k.value
        expected[1, 3:] = k.value
        np.testing.assert_array_equal(m.value, expected)
        weights = rng.normal(size=(2, 6))
        check_grad(lambda: weighted_sum(ops.block_kernel_matrix(k, 2), weights), [k])

    def test_upsample_and_concat_gradients(self, rng):
        a = parameter(rng.normal(size=(1, 2, 2, 3)), name="a")
        b = parameter(rng.normal(size=(1, 1, 4, 6)), name="b")
        weights = rng.normal(size=(1, 3, 4, 6))
        check_grad(lambda: weighted_sum(ops.concat([ops.upsample_nearest(a, 2), b], axis=1), weights), [a, b])

    def test_trace_quadratic_gradient(self, rng):
        a = rng.uniform(size=(5, 5))
        a = (a + a.T) / 2
        np.fill_diagonal(a, 0)
        lap = np.diag(a.sum(axis=1)) - a
        f = parameter(rng.normal(size=(5, 3)), name="f")
        check_grad(lambda: ops.trace_quadratic(f, lap), [f])


class TestInit:

    def test_kaiming_variance(self):
        p = LayerParams.create(LayerKind.CONV3X3, 64, 20, dtype=np.float64)
        p = kaiming_init(p, 7)
        target = 2.0 / p.fan_in
        assert p.weight.value.size >= 10000
        assert abs(p.weight.value.var() - target) < 0.1 * target
        np.testing.assert_array_equal(p.bias.value, 0.0)

    def test_kaiming_is_deterministic(self):
        a = kaiming_init(LayerParams.create(LayerKind.CONV3X3, 4, 4), 3)
        b = kaiming_init(LayerParams.create(LayerKind.CONV3X3, 4, 4), 3)
        np.testing.assert_array_equal(a.weight.value, b.weight.value)

    def test_norm_init(self):
        p = kaiming_init(LayerParams.create(LayerKind.NORM, 3, 3), 0)
        np.testing.assert_array_equal(p.weight.value, 1.0)
        np.testing.assert_array_equal(p.bias.value, 0.0)


class TestAdam:

    def test_zero_gradient_leaves_parameters(self):
        w = parameter(np.array([1.0, -2.0]), name="w")
        state = AdamState.for_params({"w": w})
        adam_step({"w": w}, {"w": np.zeros(2)}, state, lr=0.1)
        np.testing.assert_array_equal(w.value, [1.0, -2.0])
        assert state.t == 1

    def test_descent_direction(self):
        w = parameter(np.array(1.0), name="w")
        state = AdamState.for_params({"w": w})
        adam_step({"w": w}, {"w": 2 * w.value}, state, lr=0.1)
        assert w.value < 1.0

    def test_three_steps_match_manual_trace(self):
        w = parameter(np.array(0.5), name="w")
        state = AdamState.for_params({"w": w})
        grads = [0.3, -0.1, 0.2]
        lr = 0.01
        m = v = 0.0
        expected = 0.5
        for t, g in enumerate(grads, start=1):
            adam_step({"w": w}, {"w": np.array(g)}, state, lr=lr)
            m = 0.9 * m + 0.1 * g
            v = 0.999 * v + 0.001 * g * g
            m_hat = m / (1 - 0.9 ** t)
            v_hat = v / (1 - 0.999 ** t)
            expected = expected - lr * m_hat / (np.sqrt(v_hat) + 1e-8)
            assert float(w.value) == pytest.approx(expected, abs=1e-12)

    def test_shape_mismatch(self):
        w = parameter(np.zeros(2), name="w")
        with pytest.raises(ArgumentError):
            adam_step({"w": w}, {"w": np.zeros(3)}, AdamState(), lr=0.1)


class TestSchedule:

    def test_default_schedule_values(self):
        schedule = LrSchedule()
        assert lr_at(schedule, 0) == 5e-3
        assert lr_at(schedule, 3000) == pytest.approx(5e-3, rel=1e-12)
        assert lr_at(schedule, 6500) == pytest.approx(2.5e-3, rel=1e-12)
        assert lr_at(schedule, 9999) > 0

    def test_out_of_range(self):
        with pytest.raises(ArgumentError):
            lr_at(LrSchedule(), 10000)
        with pytest.raises(ArgumentError):
            LrSchedule(total_epochs=10, decay_start_epoch=11)


class TestCheckpoint:

    def test_roundtrip_keeps_order_and_values(self, tmp_path, rng):
        arrays = {"b": rng.normal(size=(2, 3)).astype(np.float32), "a": np.asarray(7.0, dtype=np.float32)}
        path = str(tmp_path / "x.ckpt")
        save_checkpoint(path, arrays)
        loaded = load_checkpoint(path)
        assert list(loaded) == ["b", "a"]
        np.testing.assert_array_equal(loaded["b"], arrays["b"])
        assert loaded["a"].shape == ()

    def test_dtype_and_scalar_shape_survive(self, tmp_path, rng):
        arrays = {
            "f8": rng.normal(size=(3, 2)),
            "f4": rng.normal(size=(4,)).astype(np.float32),
            "epoch": np.asarray(12),
            "t": np.asarray(3.25),
        }
        path = str(tmp_path / "typed.ckpt")
        save_checkpoint(path, arrays)
        loaded = load_checkpoint(path)
        for name, value in arrays.items():
            assert loaded[name].dtype == value.dtype
            assert loaded[name].shape == value.shape
            np.testing.assert_array_equal(loaded[name], value)
        assert loaded["epoch"].item() == 12

    def test_corrupt_files(self, tmp_path):
        path = tmp_path / "bad.ckpt"
        path.write_bytes(b"NOTACKPT" + b"\x00" * 8)
        with pytest.raises(FormatError):
            load_checkpoint(str(path))
        good = tmp_path / "good.ckpt"
        save_checkpoint(str(good), {"w": np.ones((4, 4), dtype=np.float32)})
        truncated = tmp_path / "truncated.ckpt"
        truncated.write_bytes(good.read_bytes()[:-5])
        with pytest.raises(FormatError):
            load_checkpoint(str(truncated))
        # 魔数 8 字节 + 头 8 字节 + 名称长度 2 字节 + 名称 "w" 之后是类型码
        bad_code = bytearray(good.read_bytes())
        bad_code[19] = 9
        corrupt = tmp_path / "code.ckpt"
        corrupt.write_bytes(bytes(bad_code))
        with pytest.raises(FormatError):
            load_checkpoint(str(corrupt))
