"""Command-line client.

Each subcommand builds a request model and sends it to the service handlers,
in-process by default or over HTTP when ``--server`` is given. Failures print
a JSON error object on stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from pydantic import ValidationError

from .errors import PreconditioningError
from .service import schemas as s

EXIT_USAGE = 2
EXIT_FAILURE = 1


class CliError(Exception):
    def __init__(self, payload: dict, code: int = EXIT_FAILURE):
        super().__init__(payload.get("message", ""))
        self.payload = payload
        self.exit_code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError({"error": "usage", "message": message}, EXIT_USAGE)


# --- transport ------------------------------------------------------------


class Client:
    def __init__(self, server=None, timeout=600.0):
        self.server = server.rstrip("/") if server else None
        self.timeout = timeout

    def call(self, endpoint: str, req, response_model):
        if self.server is None:
            from .service import handlers

            return getattr(handlers, endpoint)(req)
        import httpx

        try:
            resp = httpx.post(f"{self.server}/{endpoint}", json=req.model_dump(),
                              timeout=self.timeout)
        except httpx.HTTPError as exc:
            raise CliError({"error": "connection", "message": str(exc)}) from None
        if resp.status_code != 200:
            try:
                payload = resp.json()
            except ValueError:
                payload = {"error": "http", "message": resp.text}
            payload.setdefault("error", "http")
            raise CliError(payload, EXIT_USAGE if resp.status_code == 422 else EXIT_FAILURE)
        return response_model.model_validate(resp.json())


# --- helpers --------------------------------------------------------------


def _config_defaults(path):
    if not path:
        return {}
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise CliError({"error": "invalid-input", "message": f"config not found: {path}"},
                       EXIT_USAGE) from None
    except json.JSONDecodeError as exc:
        raise CliError({"error": "invalid-input", "message": f"bad config JSON: {exc}"},
                       EXIT_USAGE) from None
    if not isinstance(raw, dict):
        raise CliError({"error": "invalid-input", "message": "config must be a JSON object"},
                       EXIT_USAGE)
    return raw


def _data_payload(args, conf):
    data = dict(conf.get("data", {}))
    if args.data:
        try:
            data["csv"] = Path(args.data).read_text()
        except OSError as exc:
            raise CliError({"error": "invalid-input", "message": str(exc)}, EXIT_USAGE) from None
    if args.outcome:
        data["outcome"] = args.outcome
    if args.outcome_column:
        data["outcome_column"] = args.outcome_column
    if "csv" not in data and "x" not in data:
        raise CliError({"error": "invalid-input", "message": "no input data: pass --data FILE"},
                       EXIT_USAGE)
    return data


def _screen_spec(args, conf):
    spec = dict(conf.get("screen", {}))
    for key in ("tau", "top_m", "rate"):
        v = getattr(args, key, None)
        if v is not None:
            spec = {key: v}
    return spec


def _emit(text: str, output):
    if output:
        Path(output).parent.mkdir(parents=True, exist_ok=True)
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(model_or_dict):
    obj = model_or_dict.model_dump() if hasattr(model_or_dict, "model_dump") else model_or_dict
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _csv(fields, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        w.writerow([r[f] for f in fields])
    return buf.getvalue()


def _parse_param(text):
    if "=" not in text:
        raise CliError({"error": "usage", "message": f"--param needs key=value, got {text!r}"},
                       EXIT_USAGE)
    key, value = text.split("=", 1)
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise CliError({"error": "usage", "message": f"expected comma-separated integers: {text!r}"},
                       EXIT_USAGE) from None


# --- subcommands ----------------------------------------------------------


def cmd_simulate(args, client):
    conf = _config_defaults(args.config)
    params = dict(conf.get("params", {}))
    params.update(dict(_parse_param(p) for p in args.param or []))
    req = s.SimulateRequest(
        generator=args.generator or conf.get("generator", "example1"),
        seed=args.seed if args.seed is not None else conf.get("seed", 0),
        replication=args.replication if args.replication is not None else conf.get("replication", 0),
        params=params,
    )
    res = client.call("simulate", req, s.SimulateResponse)
    if args.format == "json":
        _emit(_dump(res), args.output)
        return
    if not args.output:
        sys.stdout.write(res.train_csv)
        return
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    (out / "train.csv").write_text(res.train_csv)
    if res.test_csv is not None:
        (out / "test.csv").write_text(res.test_csv)
    side = res.model_dump(exclude={"train_csv", "test_csv"})
    (out / "spec.json").write_text(_dump(side))


def cmd_screen(args, client):
    conf = _config_defaults(args.config)
    req = s.ScreenRequest(data=_data_payload(args, conf), screen=_screen_spec(args, conf))
    res = client.call("screen", req, s.ScreenResponse)
    if args.format == "json":
        _emit(_dump(res), args.output)
    else:
        rows = [r.model_dump() for r in res.scores]
        _emit(_csv(("feature_id", "score", "selected"), rows), args.output)


def cmd_fit(args, client):
    conf = _config_defaults(args.config)
    fields = dict(conf)
    fields.pop("data", None)
    fields["screen"] = _screen_spec(args, conf)
    for key in ("method", "k", "max_steps", "mu", "penalty_scale", "seed"):
        v = getattr(args, key)
        if v is not None:
            fields[key] = v
    req = s.FitRequest(data=_data_payload(args, conf), **fields)
    res = client.call("fit", req, s.FitResponse)
    if args.format == "csv":
        rows = [{"feature_id": k, "coefficient": v} for k, v in res.coefficients.items()]
        _emit(_csv(("feature_id", "coefficient"), rows), args.output)
    else:
        _emit(_dump(res), args.output)


def cmd_path(args, client):
    conf = _config_defaults(args.config)
    fields = dict(conf)
    fields.pop("data", None)
    fields["screen"] = _screen_spec(args, conf)
    if args.method:
        fields["response"] = "spc" if args.method.startswith("spc") else "raw"
    for key in ("k", "penalty_scale", "max_entries"):
        v = getattr(args, key)
        if v is not None:
            fields[key] = v
    req = s.PathRequest(data=_data_payload(args, conf), **fields)
    res = client.call("path", req, s.PathResponse)
    table = _csv(("knot", "mu", "feature", "coefficient"), [r.model_dump() for r in res.knots])
    meta = {"entry_order": res.entry_order, "penalty_scale": res.penalty_scale,
            "kkt_ok": res.kkt_ok, "max_kkt_violation": res.max_kkt_violation,
            "n_knots": res.n_knots}
    if args.format == "json":
        _emit(_dump(res), args.output)
    elif args.output:
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        (out / "path.csv").write_text(table)
        (out / "entry_order.json").write_text(_dump(meta))
    else:
        sys.stdout.write(table)


def cmd_experiment(args, client):
    conf = _config_defaults(args.config)
    preset = args.preset or conf.pop("preset", None)
    fields = dict(conf)
    if args.seed is not None:
        fields["seed"] = args.seed
    if args.replications is not None:
        fields["replications"] = args.replications
    if args.method:
        fields["methods"] = [m for chunk in args.method for m in chunk.split(",") if m]
    if args.milestones:
        fields["milestones"] = _int_list(args.milestones)
    if args.k is not None:
        fields["k"] = args.k
    spec = _screen_spec(args, {})
    if spec:
        fields["screen"] = spec
    if args.workers is not None:
        fields["workers"] = args.workers
    output = args.output or fields.pop("output", None)
    fmt = args.format or fields.pop("format", "csv")
    fields.pop("format", None)
    req = s.ExperimentRequest(preset=preset, config=fields, output=output, format=fmt)
    res = client.call("experiment", req, s.ExperimentResponse)
    sys.stdout.write(_dump({"table": res.table, "methods": res.methods,
                            "errors": res.errors, "files": res.files}))


def cmd_serve(args, client):
    import uvicorn

    uvicorn.run("preconditioning.service.app:app", host=args.host, port=args.port)


# --- parser ---------------------------------------------------------------


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file with request fields")
    common.add_argument("--seed", type=int)
    common.add_argument("--output", help="output file or directory")
    common.add_argument("--format", choices=("csv", "json"))

    data = _Parser(add_help=False)
    data.add_argument("--data", help="CSV file: feature columns plus outcome column(s)")
    data.add_argument("--outcome", choices=("continuous", "survival", "class"))
    data.add_argument("--outcome-column")

    screen = _Parser(add_help=False)
    g = screen.add_mutually_exclusive_group()
    g.add_argument("--tau", type=float, help="absolute |score| threshold")
    g.add_argument("--top-m", dest="top_m", type=int, help="keep the m largest |scores|")
    g.add_argument("--rate", type=float, help="threshold rate * sqrt(log p / n)")

    p = _Parser(prog="preconditioning", description=__doc__.splitlines()[0])
    p.add_argument("--server", help="base URL of a running service; default runs in-process")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("simulate", parents=[common], help="generate a simulated dataset")
    sp.add_argument("--generator", choices=("example1", "example2", "example3", "factor", "prop5"))
    sp.add_argument("--replication", type=int)
    sp.add_argument("--param", action="append", help="generator parameter key=value")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("screen", parents=[common, data, screen], help="marginal screening scores")
    sp.set_defaults(func=cmd_screen)

    sp = sub.add_parser("fit", parents=[common, data, screen], help="fit one method")
    sp.add_argument("--method", choices=("spc", "fs", "spc-fs", "lasso", "spc-lasso", "nsc-fs"))
    sp.add_argument("--k", type=int)
    sp.add_argument("--max-steps", dest="max_steps", type=int)
    sp.add_argument("--mu", type=float, help="penalty at which to report LASSO coefficients")
    sp.add_argument("--penalty-scale", dest="penalty_scale", choices=("raw", "per-n"))
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("path", parents=[common, data, screen], help="LASSO knot table")
    sp.add_argument("--method", choices=("lasso", "spc-lasso"))
    sp.add_argument("--k", type=int)
    sp.add_argument("--penalty-scale", dest="penalty_scale", choices=("raw", "per-n"))
    sp.add_argument("--max-entries", dest="max_entries", type=int)
    sp.set_defaults(func=cmd_path)

    sp = sub.add_parser("experiment", parents=[common, screen], help="run a simulation study")
    sp.add_argument("--preset", help="named configuration, e.g. table1")
    sp.add_argument("--replications", type=int)
    sp.add_argument("--method", action="append", help="method name(s), comma separated")
    sp.add_argument("--milestones", help="comma-separated, e.g. 1,5,10,20")
    sp.add_argument("--k", type=int)
    sp.add_argument("--workers", type=int)
    sp.set_defaults(func=cmd_experiment)

    sp = sub.add_parser("serve", help="run the HTTP service")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8000)
    sp.set_defaults(func=cmd_serve)
    return p


def _fail(payload, code):
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "format", None) is None and args.command != "experiment":
            args.format = "csv"
        args.func(args, Client(args.server))
    except CliError as exc:
        return _fail(exc.payload, exc.exit_code)
    except PreconditioningError as exc:
        code = EXIT_USAGE if exc.code in ("invalid-input", "schema", "wrong-outcome", "spec") else EXIT_FAILURE
        return _fail(exc.to_dict(), code)
    except ValidationError as exc:
        errs = [{"loc": list(e["loc"]), "msg": e["msg"]} for e in exc.errors()]
        return _fail({"error": "invalid-input", "message": "invalid request",
                      "details": {"errors": errs}}, EXIT_USAGE)
    except OSError as exc:
        return _fail({"error": "io", "message": str(exc)}, EXIT_FAILURE)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
