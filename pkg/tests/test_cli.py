"""
命令行测试
覆盖立方体文件、实验配置解析、四个子命令与退出码
"""

import json
import logging
import os

import numpy as np
import pytest
from PIL import Image

from app.commands import simulate as simulate_command
from app.config import THREAD_ENV_VARS, Settings, apply_thread_settings
from app.main import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, main
from app.storage.cube_file import CUBE_MAGIC, read_cube, write_cube
from app.storage.experiment_config import load_experiment_config, write_experiment_config
from autodiff.checkpoint import load_checkpoint
from tensor.core import HyperCube
from tensor.exceptions import FormatError, NumericalError

TINY_FUSE = {
    "lr_hsi": "lr_hsi.cube",
    "hr_msi": "hr_msi.cube",
    "ratio": 4,
    "srf": "uniform:3",
    "n_s": 4,
    "reduction": 2,
    "core_n1": 6,
    "core_n2": 6,
    "core_n3": 5,
    "knn_k": 2,
    "epochs": 3,
    "decay_start_epoch": 1,
    "log_interval": 1,
}


@pytest.fixture(autouse=True)
def restore_root_logging():
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    for handler in list(root.handlers):
        if handler not in handlers:
            root.removeHandler(handler)
    for handler in handlers:
        if handler not in root.handlers:
            root.addHandler(handler)
    root.setLevel(level)


@pytest.fixture
def tiny_experiment(tmp_path):
    """8x8x6 参考图像，仿真得到 2x2x6 LR-HSI 与 8x8x3 HR-MSI"""
    reference = HyperCube(np.random.default_rng(7).uniform(0.1, 0.9, size=(8, 8, 6)))
    write_cube(str(tmp_path / "reference.cube"), reference)
    config = tmp_path / "simulate.conf"
    write_experiment_config(str(config), {"reference": "reference.cube", "output_dir": ".",
                                          "ratio": 4, "srf": "uniform:3"})
    assert main(["simulate", "--config", str(config)]) == EXIT_OK
    return tmp_path


def write_config(path, **values) -> str:
    write_experiment_config(str(path), values)
    return str(path)


class TestCubeFile:

    def test_roundtrip_is_bitwise(self, tmp_path, rng):
        cube = HyperCube(rng.normal(size=(3, 5, 4)).astype(np.float32))
        path = str(tmp_path / "a.cube")
        write_cube(path, cube)
        loaded = read_cube(path)
        assert loaded.dims == (3, 5, 4)
        np.testing.assert_array_equal(loaded.data, cube.data)
        with open(path, "rb") as f:
            assert f.readline() == CUBE_MAGIC + b"\n"
            assert f.readline() == b"3 5 4\n"

    def test_bad_magic_reports_line_one(self, tmp_path):
        path = tmp_path / "bad.cube"
        path.write_bytes(b"NOTCUBE\n1 1 1\n\x00\x00\x00\x00")
        with pytest.raises(FormatError) as info:
            read_cube(str(path))
        assert info.value.line == 1

    def test_bad_header_and_truncated_payload(self, tmp_path):
        header = tmp_path / "header.cube"
        header.write_bytes(CUBE_MAGIC + b"\n2 x 1\n")
        with pytest.raises(FormatError) as info:
            read_cube(str(header))
        assert info.value.line == 2

        short = tmp_path / "short.cube"
        short.write_bytes(CUBE_MAGIC + b"\n2 2 1\n" + b"\x00" * 12)
        with pytest.raises(FormatError):
            read_cube(str(short))

    def test_non_finite_payload_rejected(self, tmp_path):
        path = tmp_path / "nan.cube"
        path.write_bytes(CUBE_MAGIC + b"\n1 1 1\n" + np.array([np.nan], dtype="<f4").tobytes())
        with pytest.raises(FormatError):
            read_cube(str(path))


class TestExperimentConfig:

    def test_values_and_relative_paths(self, tmp_path):
        path = tmp_path / "exp.conf"
        path.write_text("# 实验\nreference = data/ref.cube\nratio = 8\nknn_sigma = auto\n"
                        "use_ssam = false\nloss_norm = l2\n", encoding="utf-8")
        config = load_experiment_config(str(path))
        assert config.reference == os.path.join(str(tmp_path), "data", "ref.cube")
        assert config.ratio == 8 and config.knn_sigma == "auto"
        assert config.use_ssam is False and config.loss_norm == "l2"
        assert config.output_dir == "output"

    @pytest.mark.parametrize("text, line", [
        ("ratio = 4\nnot a pair\n", 2),
        ("ratio = 4\nseed = 1\nratio = 8\n", 3),
        ("epochs = 10\nmystery = 1\n", 2),
        ("seed = 0\n\nratio = 1\n", 3),
        ("srf = boxcar\n", 1),
        ("ratio = 4\nblur_sigma = 0\n", 2),
    ])
    def test_errors_carry_line_numbers(self, tmp_path, text, line):
        path = tmp_path / "bad.conf"
        path.write_text(text, encoding="utf-8")
        with pytest.raises(FormatError) as info:
            load_experiment_config(str(path))
        assert info.value.line == line
        assert f"{path}:{line}:" in str(info.value)

    def test_partial_core_dims_rejected(self, tmp_path):
        path = write_config(tmp_path / "core.conf", core_n1=4, core_n2=4)
        with pytest.raises(FormatError):
            load_experiment_config(path)


class TestSimulate:

    def test_toy_shapes(self, tmp_path):
        out = tmp_path / "toy"
        assert main(["simulate", "--toy", str(out)]) == EXIT_OK
        assert read_cube(str(out / "reference.cube")).dims == (32, 32, 16)
        assert read_cube(str(out / "lr_hsi.cube")).dims == (8, 8, 16)
        assert read_cube(str(out / "hr_msi.cube")).dims == (32, 32, 4)
        operators = load_checkpoint(str(out / "operators.ckpt"))
        assert operators["p1"].shape == (8, 32) and operators["p3"].shape == (4, 16)

        config = load_experiment_config(str(out / "experiment.conf"))
        assert (config.epochs, config.decay_start_epoch) == (2000, 600)
        assert config.lr_hsi == os.path.join(str(out), "lr_hsi.cube")

    def test_same_seed_gives_identical_files(self, tmp_path):
        for name in ("a", "b"):
            assert main(["simulate", "--toy", str(tmp_path / name), "--seed", "3"]) == EXIT_OK
        for name in ("reference.cube", "lr_hsi.cube", "hr_msi.cube", "operators.ckpt"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_manifest_echoes_defaults(self, tiny_experiment):
        manifest = json.loads((tiny_experiment / "run_manifest.json").read_text(encoding="utf-8"))
        assert manifest["command"] == "simulate"
        config = manifest["config"]
        assert config["base_lr"] == 5e-3 and config["epochs"] == 10000
        assert config["alpha"] == 0.1 and config["beta1"] == 1e-3 and config["beta2"] == 1e-2
        assert config["srf"] == "uniform:3"
        assert "numpy" in manifest["versions"]

    def test_indivisible_reference_rejected(self, tmp_path):
        write_cube(str(tmp_path / "odd.cube"), HyperCube(np.ones((6, 6, 5))))
        config = write_config(tmp_path / "odd.conf", reference="odd.cube", ratio=4)
        assert main(["simulate", "--config", config]) == EXIT_USAGE


class TestFuseEvaluateInspect:

    def test_fuse_is_reproducible(self, tiny_experiment):
        traces = []
        for name in ("run_a", "run_b"):
            config = write_config(tiny_experiment / f"{name}.conf", output_dir=name, **TINY_FUSE)
            assert main(["fuse", "--config", config]) == EXIT_OK
            out = tiny_experiment / name
            for artifact in ("fused.cube", "checkpoint.ckpt", "run_log.jsonl", "run_manifest.json"):
                assert (out / artifact).exists()
            traces.append((out / "loss_trace.csv").read_text(encoding="utf-8"))
        assert traces[0] == traces[1]
        lines = traces[0].splitlines()
        assert lines[0] == "epoch,lr,L_rec,L_degraded,L_LR-MSI,L_spe,L_spa,L_total"
        assert len(lines) == 4
        assert read_cube(str(tiny_experiment / "run_a" / "fused.cube")).dims == (8, 8, 6)

        records = [json.loads(line) for line in
                   (tiny_experiment / "run_a" / "run_log.jsonl").read_text(encoding="utf-8").splitlines()]
        assert any(r["message"] == "配置 epochs = 3" for r in records)

    def test_fuse_with_fixed_operators(self, tiny_experiment):
        config = write_config(tiny_experiment / "fixed.conf", output_dir="fixed",
                              operators="operators.ckpt", **TINY_FUSE)
        assert main(["fuse", "--config", config]) == EXIT_OK
        arrays = load_checkpoint(str(tiny_experiment / "fixed" / "checkpoint.ckpt"))
        operators = load_checkpoint(str(tiny_experiment / "operators.ckpt"))
        np.testing.assert_allclose(arrays["operator/p3"], operators["p3"], rtol=1e-6)
        assert not any(key.startswith("param/degradation.") for key in arrays)

    def test_evaluate_identity_gives_black_heatmaps(self, tiny_experiment):
        config = write_config(tiny_experiment / "eval.conf", reference="reference.cube",
                              fused="reference.cube", lr_hsi="lr_hsi.cube", output_dir="eval")
        assert main(["evaluate", "--config", config]) == EXIT_OK
        out = tiny_experiment / "eval"
        for name in ("rmse_map.pgm", "sam_map.pgm"):
            with Image.open(out / name) as image:
                assert image.size == (8, 8)
                assert np.asarray(image).max() == 0
        rows = (out / "metrics.csv").read_text(encoding="utf-8").splitlines()
        assert rows[0] == "method,rmse,psnr,sam,ergas,ssim,uiqi"
        assert rows[1].startswith("fused,0.0,300.0,0.0,0.0,")
        assert rows[2].startswith("nearest,")
        per_band = (out / "psnr_per_band.csv").read_text(encoding="utf-8").splitlines()
        assert per_band[0] == "band,psnr_fused,psnr_nearest"
        assert len(per_band) == 7
        assert (out / "heatmap_ranges.txt").read_text(encoding="utf-8").splitlines()[0] == "rmse_map 0.0 0.0"

    def test_evaluate_dimension_mismatch(self, tiny_experiment):
        config = write_config(tiny_experiment / "mismatch.conf", reference="reference.cube",
                              fused="lr_hsi.cube", output_dir="eval")
        assert main(["evaluate", "--config", config]) == EXIT_USAGE

    def test_inspect_exports_core_and_factors(self, tiny_experiment):
        config = write_config(tiny_experiment / "run.conf", output_dir="run", **TINY_FUSE)
        assert main(["fuse", "--config", config]) == EXIT_OK
        out = tiny_experiment / "inspect"
        code = main(["inspect", "--checkpoint", str(tiny_experiment / "run" / "checkpoint.ckpt"),
                     "--output", str(out), "--slices", "1,5,9"])
        assert code == EXIT_OK
        assert (out / "core_slice_1.pgm").exists() and (out / "core_slice_5.pgm").exists()
        assert not (out / "core_slice_9.pgm").exists()
        with Image.open(out / "core_slice_1.pgm") as image:
            assert image.size == (6, 6)
        w_rows = (out / "w_factor.csv").read_text(encoding="utf-8").splitlines()
        assert w_rows[0] == "r1,r2,r3,r4,r5,r6" and len(w_rows) == 9
        s_rows = (out / "s_factor.csv").read_text(encoding="utf-8").splitlines()
        assert s_rows[0] == "r1,r2,r3,r4,r5" and len(s_rows) == 7
        for stage in (1, 2):
            assert (out / f"f_up_{stage}_slice_1.pgm").exists()

    def test_inspect_all_slices_out_of_range(self, tiny_experiment):
        config = write_config(tiny_experiment / "run.conf", output_dir="run", **TINY_FUSE)
        assert main(["fuse", "--config", config]) == EXIT_OK
        code = main(["inspect", "--checkpoint", str(tiny_experiment / "run" / "checkpoint.ckpt"),
                     "--output", str(tiny_experiment / "inspect"), "--slices", "20,40"])
        assert code == EXIT_USAGE


class TestExitCodes:

    def test_missing_input_names_path(self, tmp_path, capsys):
        config = write_config(tmp_path / "missing.conf", lr_hsi="absent.cube", hr_msi="absent_msi.cube")
        assert main(["fuse", "--config", config]) == EXIT_USAGE
        assert os.path.join(str(tmp_path), "absent.cube") in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert main(["evaluate", "--config", str(tmp_path / "nope.conf")]) == EXIT_USAGE

    def test_numerical_failure_maps_to_one(self, tmp_path, monkeypatch):
        def diverge(output_dir, seed=0):
            raise NumericalError("损失非有限")

        monkeypatch.setattr(simulate_command, "run_toy", diverge)
        assert main(["simulate", "--toy", str(tmp_path)]) == EXIT_NUMERICAL

    def test_usage_errors_exit_two(self):
        with pytest.raises(SystemExit) as info:
            main([])
        assert info.value.code == 2
        with pytest.raises(SystemExit):
            main(["simulate", "--config", "a.conf", "--toy", "b"])


def test_thread_settings_from_environment(monkeypatch):
    for name in THREAD_ENV_VARS:
        monkeypatch.setenv(name, "1")
    monkeypatch.setenv("HSIFUSE_NUM_THREADS", "3")
    current = Settings()
    assert current.num_threads == 3
    apply_thread_settings(current)
    assert all(os.environ[name] == "3" for name in THREAD_ENV_VARS)
