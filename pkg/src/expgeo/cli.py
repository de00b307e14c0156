"""Command-line client for the expgeo service.

Each subcommand builds a JSON request and posts it to the service: in
process by default (no server needed), or to a running instance via
--server.  Floating output is printed with 17 significant digits so every
value round-trips exactly.

Exit codes: 0 success, 1 numeric failure, 2 validation error.
"""

from __future__ import annotations

import argparse
import json
import sys

EXIT_OK = 0
EXIT_NUMERIC = 1
EXIT_VALIDATION = 2


def _fail(code: int, message: str):
    print(message, file=sys.stderr)
    raise SystemExit(code)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _json_str(obj) -> str:
    """JSON text with floats at 17 significant digits."""
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, float):
        return _fmt(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_json_str(x) for x in obj) + "]"
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {_json_str(v)}" for k, v in obj.items()) + "}"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _load_json(path: str, name: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        _fail(EXIT_VALIDATION, f"{name}: file not found: {path}")
    except json.JSONDecodeError as exc:
        _fail(EXIT_VALIDATION, f"{name}: malformed JSON in {path}: {exc}")


def _client(server: str | None):
    if server:
        import httpx

        return httpx.Client(base_url=server, timeout=600.0)
    import warnings

    with warnings.catch_warnings():
        # starlette warns about its httpx-based TestClient on import
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app)


def _post(args, path: str, payload: dict) -> dict:
    with _client(args.server) as client:
        response = client.post(path, json=payload)
    if response.status_code == 200:
        return response.json()
    try:
        detail = response.json().get("detail", response.text)
    except ValueError:
        detail = response.text
    if response.status_code in (400, 422):
        _fail(EXIT_VALIDATION, f"validation error: {detail}")
    _fail(EXIT_NUMERIC, f"numeric failure: {detail}")


def _cmd_norm(args):
    payload = {
        "density": _load_json(args.density, "density"),
        "variable": _load_json(args.variable, "variable"),
        "kind": args.kind,
        "tol": args.tol,
    }
    print(_fmt(_post(args, "/norm", payload)["norm"]))


def _cmd_chart(args):
    payload = {"base": _load_json(args.base, "base")}
    if args.density:
        payload["density"] = _load_json(args.density, "density")
    if args.coordinate:
        payload["coordinate"] = _load_json(args.coordinate, "coordinate")
    result = _post(args, "/chart", payload)["result"]
    print(_json_str({"weights": result["weights"], "values": result["values"]}))


def _cmd_kl(args):
    payload = {"q1": _load_json(args.q1, "q1"), "q2": _load_json(args.q2, "q2")}
    if args.base:
        payload["base"] = _load_json(args.base, "base")
    body = _post(args, "/kl", payload)
    print(_json_str({"direct": body["direct"], "chart": body["chart"]}))


def _cmd_entropy(args):
    payload = {"density": _load_json(args.density, "density")}
    print(_fmt(_post(args, "/entropy", payload)["entropy"]))


def _cmd_flow(args):
    payload = {
        "field": args.field,
        "p0": _load_json(args.p0, "p0"),
        "t_end": args.t,
        "step": args.step,
    }
    if args.f:
        payload["f"] = _load_json(args.f, "f")
    body = _post(args, "/flow", payload)
    if args.format == "json":
        print(_json_str(body))
        return
    points = body["points"]
    n = len(points[0]["density"])
    header = ["t"] + [f"p_{i + 1}" for i in range(n)] + ["value", "fisher"]
    print(",".join(header))
    for point in points:
        row = [point["t"], *point["density"], point["value"], point["fisher"]]
        print(",".join(_fmt(x) for x in row))


def _cmd_boltzmann(args):
    payload = {
        "spec": _load_json(args.spec, "spec") if args.spec else {},
        "g": args.g,
        "n": args.n,
        "seed": args.seed,
    }
    if args.workers:
        payload["workers"] = args.workers
    body = _post(args, "/boltzmann", payload)
    print(_json_str({"mean": body["mean"], "stderr": body["stderr"], "n": body["n"]}))


def _cmd_serve(args):
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="expgeo",
        description="Exponential-manifold toolkit: norms, charts, divergences, "
        "flows and Boltzmann collision estimates.",
    )
    parser.add_argument("--server", help="base URL of a running service (default: in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm", help="Luxemburg norm of a variable at a density")
    p.add_argument("--density", required=True)
    p.add_argument("--variable", required=True)
    p.add_argument("--kind", choices=["a", "b"], default="b")
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=_cmd_norm)

    p = sub.add_parser("chart", help="convert density <-> chart coordinate at a base")
    p.add_argument("--base", required=True)
    p.add_argument("--density")
    p.add_argument("--coordinate")
    p.set_defaults(func=_cmd_chart)

    p = sub.add_parser("kl", help="KL divergence, direct sum and chart formula")
    p.add_argument("--q1", required=True)
    p.add_argument("--q2", required=True)
    p.add_argument("--base")
    p.set_defaults(func=_cmd_kl)

    p = sub.add_parser("entropy", help="Boltzmann entropy E_q[ln q]")
    p.add_argument("--density", required=True)
    p.set_defaults(func=_cmd_entropy)

    p = sub.add_parser("flow", help="integrate a gradient flow, emit the trace")
    p.add_argument("--field", choices=["expectation", "entropy"], required=True)
    p.add_argument("--f", help="variable JSON (expectation field only)")
    p.add_argument("--p0", required=True)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=_cmd_flow)

    p = sub.add_parser("boltzmann", help="weak-form collision estimate")
    p.add_argument("--spec", help="GibbsSpec JSON (default: standard normal)")
    p.add_argument(
        "--g",
        default="invariant",
        help="test function: invariant | v1sq | logf | poly:i,j,k",
    )
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=_cmd_boltzmann)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.func(args)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
