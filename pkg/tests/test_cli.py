import json

import numpy as np
import pytest

from semirandom.cli import main
from semirandom.network import load_model


def run(*argv):
    return main(list(argv))


class TestGenData:
    def test_writes_csv(self, tmp_path):
        out = tmp_path / "sine.csv"
        assert run("gen-data", "--task", "sine", "--m", "50", "--seed", "3",
                   "--out", str(out)) == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "x1,y"
        assert len(lines) == 51

    def test_byte_identical_repeats(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        run("gen-data", "--m", "40", "--seed", "9", "--out", str(a))
        run("gen-data", "--m", "40", "--seed", "9", "--out", str(b))
        assert a.read_bytes() == b.read_bytes()


class TestTrain:
    def test_sine_run_writes_artifacts(self, tmp_path):
        out = tmp_path / "run"
        code = run("train", "--task", "sine", "--m", "200", "--arch", "1-8-1",
                   "--unit", "lsr", "--epochs", "3", "--seed", "7",
                   "--out-dir", str(out))
        assert code == 0
        history = (out / "history.csv").read_text().strip().split("\n")
        assert history[0] == "epoch,train_loss,test_loss,test_error,seconds"
        assert len(history) == 4
        assert (out / "model.npz").exists()
        assert (out / "history.png").exists()

    def test_repeat_run_is_byte_identical(self, tmp_path):
        args = ["train", "--task", "sine", "--m", "150", "--arch", "1-6-1",
                "--epochs", "2", "--seed", "11", "--no-figures"]
        run(*args, "--out-dir", str(tmp_path / "a"))
        run(*args, "--out-dir", str(tmp_path / "b"))
        assert (tmp_path / "a/history.csv").read_bytes() == \
            (tmp_path / "b/history.csv").read_bytes()

    def test_zero_epochs_succeeds_with_initial_model(self, tmp_path):
        out = tmp_path / "run"
        code = run("train", "--task", "sine", "--m", "100", "--arch", "1-4-1",
                   "--epochs", "0", "--seed", "1", "--out-dir", str(out),
                   "--no-figures")
        assert code == 0
        assert (out / "model.npz").exists()
        history = (out / "history.csv").read_text().strip().split("\n")
        assert len(history) == 1  # header only

    def test_single_bank_ensemble_matches_plain_lsr(self, tmp_path):
        common = ["--task", "sine", "--m", "200", "--arch", "1-6-1",
                  "--epochs", "3", "--seed", "21", "--no-figures"]
        run("train", "--unit", "lsr", *common, "--out-dir", str(tmp_path / "plain"))
        run("train", "--unit", "lsr-ie", "--k", "1", *common,
            "--out-dir", str(tmp_path / "ensemble"))
        plain = load_model(tmp_path / "plain/model.npz")
        ensemble = load_model(tmp_path / "ensemble/model.npz")
        for a, b in zip(plain.weights, ensemble.weights):
            np.testing.assert_array_equal(a, b)

    def test_relu_and_rf_units_run(self, tmp_path):
        for unit in ("relu", "rf", "ssr"):
            code = run("train", "--task", "sine", "--m", "120", "--arch", "1-5-1",
                       "--unit", unit, "--epochs", "2", "--seed", "2",
                       "--out-dir", str(tmp_path / unit), "--no-figures")
            assert code == 0

    def test_csv_task_with_split(self, tmp_path):
        data = tmp_path / "data.csv"
        run("gen-data", "--m", "120", "--seed", "5", "--out", str(data))
        code = run("train", "--task", "csv", "--data", str(data), "--arch", "1-4-1",
                   "--epochs", "2", "--seed", "5", "--normalize", "none",
                   "--out-dir", str(tmp_path / "run"), "--no-figures")
        assert code == 0

    def test_libsvm_classification_end_to_end(self, tmp_path):
        # Synthetic three-class problem in sparse text form, separate test
        # file, standardized features; exercises the benchmark harness path.
        rng = np.random.default_rng(6)
        centers = {1: (2.0, 0.0), 2: (-2.0, 1.0), 3: (0.0, -2.0)}

        def write(path, count):
            lines = []
            for _ in range(count):
                label = int(rng.integers(1, 4))
                cx, cy = centers[label]
                x = rng.normal((cx, cy), 0.4)
                lines.append(f"{label} 1:{x[0]:.5f} 2:{x[1]:.5f}")
            path.write_text("\n".join(lines) + "\n")

        train_file = tmp_path / "train.txt"
        test_file = tmp_path / "test.txt"
        write(train_file, 150)
        write(test_file, 60)
        out = tmp_path / "run"
        code = run("train", "--task", "libsvm", "--data", str(train_file),
                   "--test-data", str(test_file), "--arch", "2-16-3",
                   "--epochs", "30", "--learning-rate", "0.05", "--seed", "6",
                   "--out-dir", str(out), "--no-figures")
        assert code == 0
        last = (out / "history.csv").read_text().strip().split("\n")[-1]
        test_error = float(last.split(",")[3])
        assert test_error < 0.2

    def test_eval_replays_normalization_stats(self, tmp_path, capsys):
        rng = np.random.default_rng(7)
        lines = [f"{int(rng.integers(1, 3))} 1:{rng.normal(50.0, 5.0):.4f}"
                 for _ in range(80)]
        data = tmp_path / "train.txt"
        data.write_text("\n".join(lines) + "\n")
        out = tmp_path / "run"
        run("train", "--task", "libsvm", "--data", str(data), "--arch", "1-4-2",
            "--epochs", "1", "--seed", "7", "--out-dir", str(out), "--no-figures")
        capsys.readouterr()
        code = run("eval", "--model", str(out / "model.npz"), "--task", "libsvm",
                   "--data", str(data), "--seed", "7")
        assert code == 0
        output = capsys.readouterr().out
        assert "error=" in output

    def test_config_file_and_flag_precedence(self, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("epochs=2\nlearning_rate=1e-3\n# comment\n")
        out = tmp_path / "from_config"
        run("train", "--task", "sine", "--m", "100", "--arch", "1-4-1",
            "--seed", "3", "--config", str(config), "--out-dir", str(out),
            "--no-figures")
        assert len((out / "history.csv").read_text().strip().split("\n")) == 3
        out2 = tmp_path / "flag_wins"
        run("train", "--task", "sine", "--m", "100", "--arch", "1-4-1",
            "--seed", "3", "--config", str(config), "--epochs", "1",
            "--out-dir", str(out2), "--no-figures")
        assert len((out2 / "history.csv").read_text().strip().split("\n")) == 2

    def test_arch_mismatch_is_usage_error(self, tmp_path):
        code = run("train", "--task", "sine", "--m", "50", "--arch", "3-4-1",
                   "--epochs", "1", "--out-dir", str(tmp_path), "--no-figures")
        assert code == 2

    def test_unknown_unit_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            run("train", "--unit", "perceptron")
        assert exc.value.code == 2

    def test_divergence_exit_code(self, tmp_path):
        with np.errstate(over="ignore", invalid="ignore"):
            code = run("train", "--task", "sine", "--m", "200", "--arch", "1-8-1",
                       "--epochs", "5", "--learning-rate", "1000", "--seed", "0",
                       "--init-scale", "1.0", "--out-dir", str(tmp_path),
                       "--no-figures")
        assert code == 3


class TestEval:
    def test_reports_metrics(self, tmp_path, capsys):
        out = tmp_path / "run"
        run("train", "--task", "sine", "--m", "150", "--arch", "1-6-1",
            "--epochs", "2", "--seed", "4", "--out-dir", str(out), "--no-figures")
        capsys.readouterr()
        code = run("eval", "--model", str(out / "model.npz"), "--task", "sine",
                   "--m", "150", "--seed", "4")
        assert code == 0
        output = capsys.readouterr().out
        assert "train: loss=" in output
        assert "test: loss=" in output


class TestOracleCheck:
    def test_small_sweep_passes_and_is_deterministic(self, tmp_path):
        args = ["oracle-check", "--instances", "4", "--threshold", "0.5",
                "--seed", "0", "--max-iterations", "20000", "--no-figures"]
        assert run(*args, "--out-dir", str(tmp_path / "a")) == 0
        assert run(*args, "--out-dir", str(tmp_path / "b")) == 0
        a = (tmp_path / "a/oracle_check.csv").read_bytes()
        assert a == (tmp_path / "b/oracle_check.csv").read_bytes()
        header = a.decode().split("\n")[0]
        assert header == "instance_id,m,d,n,s,global_min_loss,gd_final_loss,rel_gap,converged"

    def test_zero_instances_trivially_pass(self, tmp_path):
        assert run("oracle-check", "--instances", "0", "--threshold", "0.9",
                   "--out-dir", str(tmp_path), "--no-figures") == 0

    def test_scatter_figure_rendered(self, tmp_path):
        run("oracle-check", "--instances", "2", "--threshold", "0.0",
            "--seed", "1", "--max-iterations", "5000", "--out-dir", str(tmp_path))
        assert (tmp_path / "oracle_check.png").exists()

    def test_impossible_threshold_fails(self, tmp_path):
        code = run("oracle-check", "--instances", "2", "--threshold", "1.1",
                   "--seed", "0", "--max-iterations", "2000",
                   "--out-dir", str(tmp_path), "--no-figures")
        assert code == 4


class TestChecks:
    def test_gradcheck(self):
        assert run("gradcheck", "--models", "6", "--seed", "1") == 0

    def test_pathcheck(self):
        assert run("pathcheck", "--models", "10", "--seed", "1") == 0


class TestBounds:
    def test_default_table_shows_textbook_value(self, capsys):
        assert run("bounds") == 0
        out = capsys.readouterr().out
        assert "generalization_bound" in out
        assert "0.4" in out

    def test_json_output(self, capsys):
        assert run("bounds", "--json", "--widths", "50,50", "--dim", "2",
                   "--delta", "0.05") == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["inputs"]["widths"] == [50, 50]
        assert payload["values"]["generalization_bound"] > 0

    def test_sweep_is_monotone(self, capsys):
        assert run("bounds", "--sweep", "1,2,4,8", "--widths", "1,1") == 0
        out = capsys.readouterr().out
        values = [float(line.split()[3]) for line in out.splitlines()
                  if line.startswith("width ")]
        assert values == sorted(values, reverse=True)
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_sweep_figure_rendered(self, tmp_path):
        assert run("bounds", "--sweep", "2,8", "--out-dir", str(tmp_path)) == 0
        assert (tmp_path / "bounds_sweep.png").exists()
