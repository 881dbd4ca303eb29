import csv
import io
import json

import httpx
import numpy as np
import pytest
from fastapi.testclient import TestClient

from preconditioning import Continuous, Dataset, read_csv, to_csv
from preconditioning.cli import main
from preconditioning.service.app import app


@pytest.fixture
def data_file(tmp_path):
    r = np.random.default_rng(4)
    n, p = 40, 25
    v = r.normal(size=n)
    x = r.normal(size=(n, p))
    x[:, :4] += 1.5 * v[:, None]
    path = tmp_path / "d.csv"
    to_csv(Dataset(x, Continuous(2 * v + 0.3 * r.normal(size=n))), path)
    return path


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_simulate_stdout(capsys):
    code, out, _ = run(capsys, "simulate", "--seed", "1", "--param", "n=15", "--param", "p=30")
    d = read_csv(out)
    assert code == 0 and d.n == 15 and d.p == 30


def test_simulate_directory(capsys, tmp_path):
    code, _, _ = run(capsys, "simulate", "--seed", "2", "--param", "n=20",
                     "--output", str(tmp_path / "sim"))
    assert code == 0
    assert {p.name for p in (tmp_path / "sim").iterdir()} == {"train.csv", "test.csv", "spec.json"}
    assert json.loads((tmp_path / "sim" / "spec.json").read_text())["truth"]


def test_simulate_is_reproducible(capsys):
    a = run(capsys, "simulate", "--generator", "example2", "--seed", "9", "--param", "n=30")[1]
    b = run(capsys, "simulate", "--generator", "example2", "--seed", "9", "--param", "n=30")[1]
    c = run(capsys, "simulate", "--generator", "example2", "--seed", "10", "--param", "n=30")[1]
    assert a == b and a != c


def test_screen_csv(capsys, data_file):
    code, out, _ = run(capsys, "screen", "--data", str(data_file), "--top-m", "4")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 25
    assert sum(r["selected"] == "True" for r in rows) == 4


def test_fit_json(capsys, data_file):
    code, out, _ = run(capsys, "fit", "--data", str(data_file), "--method", "spc-lasso",
                       "--top-m", "6", "--max-steps", "3", "--format", "json")
    body = json.loads(out)
    assert code == 0 and body["method"] == "spc-lasso" and len(body["entry_order"]) == 3


def test_fit_config_file(capsys, tmp_path, data_file):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"method": "fs", "max_steps": 2}))
    code, out, _ = run(capsys, "fit", "--config", str(conf), "--data", str(data_file))
    assert code == 0 and out.splitlines()[0] == "feature_id,coefficient"
    assert len(out.splitlines()) == 3


def test_path_directory(capsys, tmp_path, data_file):
    code, _, _ = run(capsys, "path", "--data", str(data_file), "--method", "lasso",
                     "--max-entries", "4", "--output", str(tmp_path / "p"))
    meta = json.loads((tmp_path / "p" / "entry_order.json").read_text())
    assert code == 0 and meta["kkt_ok"] and len(meta["entry_order"]) == 4
    assert (tmp_path / "p" / "path.csv").read_text().startswith("knot,mu,feature,coefficient")


def test_experiment(capsys, tmp_path):
    code, out, _ = run(capsys, "experiment", "--preset", "table1", "--replications", "1",
                       "--method", "fs,lasso", "--milestones", "1,5",
                       "--output", str(tmp_path / "e"))
    body = json.loads(out)
    assert code == 0 and len(body["table"]) == 4
    assert (tmp_path / "e" / "table.csv").exists()


def test_missing_data(capsys):
    code, _, err = run(capsys, "screen")
    assert code == 2 and json.loads(err)["error"] == "invalid-input"


def test_usage_error(capsys):
    code, _, err = run(capsys, "fit", "--method", "ridge")
    assert code == 2 and json.loads(err)["error"] == "usage"


def test_exclusive_screen_flags(capsys, data_file):
    code, _, err = run(capsys, "screen", "--data", str(data_file), "--tau", "0.1", "--top-m", "3")
    assert code == 2 and json.loads(err)["error"] == "usage"


def test_bad_config_json(capsys, tmp_path):
    conf = tmp_path / "bad.json"
    conf.write_text("{nope")
    code, _, err = run(capsys, "experiment", "--config", str(conf))
    assert code == 2 and "bad config" in json.loads(err)["message"]


def test_invalid_experiment_value(capsys):
    code, _, err = run(capsys, "experiment", "--replications", "0")
    assert code == 2 and json.loads(err)["error"] == "invalid-input"


def test_bad_milestones(capsys):
    code, _, err = run(capsys, "experiment", "--milestones", "1,x")
    assert code == 2


def test_wrong_outcome(capsys, tmp_path, data_file):
    code, _, err = run(capsys, "fit", "--data", str(data_file), "--outcome", "survival")
    assert code == 2 and json.loads(err)["error"] == "schema"


def test_unwritable_output(capsys, tmp_path):
    blocker = tmp_path / "f"
    blocker.write_text("")
    code, _, err = run(capsys, "experiment", "--replications", "1", "--method", "fs",
                       "--milestones", "1", "--output", str(blocker / "x"))
    assert code == 1 and json.loads(err)["error"] == "io"


class TestOverHttp:
    @pytest.fixture(autouse=True)
    def route(self, monkeypatch):
        tc = TestClient(app)

        def post(url, json=None, timeout=None):
            return tc.post(url.replace("http://svc", ""), json=json)

        monkeypatch.setattr(httpx, "post", post)

    def test_same_as_in_process(self, capsys, data_file):
        local = run(capsys, "fit", "--data", str(data_file), "--method", "lasso", "--format", "json")
        remote = run(capsys, "--server", "http://svc", "fit", "--data", str(data_file),
                     "--method", "lasso", "--format", "json")
        assert local == remote and local[0] == 0

    def test_error_relayed(self, capsys, data_file):
        code, _, err = run(capsys, "--server", "http://svc", "fit", "--data", str(data_file),
                           "--outcome", "class", "--outcome-column", "x1")
        assert code == 2 and json.loads(err)["error"] == "invalid-input"

    def test_connection_failure(self, capsys, monkeypatch, data_file):
        def boom(*a, **k):
            raise httpx.ConnectError("refused")

        monkeypatch.setattr(httpx, "post", boom)
        code, _, err = run(capsys, "--server", "http://svc", "screen", "--data", str(data_file))
        assert code == 1 and json.loads(err)["error"] == "connection"
