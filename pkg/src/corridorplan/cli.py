"""Command line front end.

Every subcommand is a thin client of the HTTP service: requests are
served in-process by default, or by a remote instance via --server, with
identical behavior.  Exit codes: 0 success, 1 when any pair failed (or
validation found semantic problems), 2 on schema or IO errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import httpx


def _client(server):
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    import warnings

    with warnings.catch_warnings():
        # starlette nags about its test client's http backend on import
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service import create_app

    return TestClient(create_app())


def _read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _fail(msg: str, code: int) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def _post(client, url, payload):
    try:
        return client.post(url, json=payload)
    except httpx.HTTPError as exc:
        raise ConnectionError(f"cannot reach service: {exc}")


def cmd_run(client, args) -> int:
    try:
        raw = _read_json(args.scenario)
    except (OSError, json.JSONDecodeError) as exc:
        return _fail(f"cannot read scenario: {exc}", 2)
    resp = _post(client, "/runs", {
        "scenario": raw,
        "seed": args.seed,
        "pairs": args.pairs,
        "max_iters": args.max_iters,
        "k_samples": args.k_samples,
        "include_plots": args.plots is not None,
    })
    if resp.status_code != 200:
        return _fail(_detail(resp), 2)
    body = resp.json()
    if args.out:
        try:
            Path(args.out).write_text(body["csv"])
        except OSError as exc:
            return _fail(f"cannot write report: {exc}", 2)
    else:
        sys.stdout.write(body["csv"])
    if args.plots is not None:
        outdir = Path(args.plots)
        try:
            outdir.mkdir(parents=True, exist_ok=True)
            for name, text in (body["plots"] or {}).items():
                (outdir / name).write_text(text)
        except OSError as exc:
            return _fail(f"cannot write plots: {exc}", 2)
    dest = sys.stdout if args.out else sys.stderr
    for key, val in body["summary"].items():
        print(f"{key}: {val}", file=dest)
    return 1 if body["failed"] else 0


def cmd_validate(client, args) -> int:
    try:
        raw = _read_json(args.scenario)
    except (OSError, json.JSONDecodeError) as exc:
        return _fail(f"cannot read scenario: {exc}", 2)
    resp = _post(client, "/scenarios/validate", raw)
    if resp.status_code != 200:
        return _fail(_detail(resp), 2)
    body = resp.json()
    if body["error"]:
        return _fail(body["error"], 2)
    for w in body["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    if body["warnings"]:
        return 1
    print("ok")
    return 0


def cmd_generate(client, args, kind: str) -> int:
    payload = {"kind": kind, "seed": args.seed}
    if getattr(args, "pairs", None) is not None:
        payload["pairs"] = args.pairs
    if getattr(args, "regime", None) is not None:
        payload["regime"] = args.regime
    resp = _post(client, "/scenarios/generate", payload)
    if resp.status_code != 200:
        return _fail(_detail(resp), 2)
    text = json.dumps(resp.json(), indent=2) + "\n"
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            return _fail(f"cannot write scenario: {exc}", 2)
    else:
        sys.stdout.write(text)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def _detail(resp) -> str:
    try:
        return str(resp.json().get("detail", resp.text))
    except ValueError:
        return resp.text


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="corridorplan",
        description="plan, refine, and report corridor trajectories")
    p.add_argument("--server", metavar="URL",
                   help="use a running service instead of solving in-process")
    sub = p.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario and write the report")
    run_p.add_argument("scenario", help="scenario JSON file")
    run_p.add_argument("--out", metavar="FILE",
                       help="report CSV destination (default: stdout)")
    run_p.add_argument("--plots", metavar="DIR", help="emit SVG plots here")
    run_p.add_argument("--seed", type=int, help="override the pair seed")
    run_p.add_argument("--pairs", type=int, help="solve only the first N pairs")
    run_p.add_argument("--max-iters", type=int, dest="max_iters",
                       help="cap refinement iterations")
    run_p.add_argument("--k-samples", type=int, dest="k_samples",
                       help="override objective sample count")

    val_p = sub.add_parser("validate", help="schema and semantic checks")
    val_p.add_argument("scenario", help="scenario JSON file")

    for kind, extra in (("so3", "pairs"), ("rational", "regime"),
                        ("bimanual", None)):
        g = sub.add_parser(f"gen-{kind}",
                           help=f"write the {kind} benchmark scenario")
        g.add_argument("--seed", type=int, default=0)
        g.add_argument("--out", metavar="FILE",
                       help="scenario destination (default: stdout)")
        if extra == "pairs":
            g.add_argument("--pairs", type=int, help="random pair count")
        elif extra == "regime":
            g.add_argument("--regime",
                           choices=["near_limit", "near_origin"],
                           help="distortion regime (default: near_limit)")

    srv = sub.add_parser("serve", help="start the HTTP service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        return cmd_serve(args)
    client = _client(args.server)
    try:
        if args.command == "run":
            return cmd_run(client, args)
        if args.command == "validate":
            return cmd_validate(client, args)
        return cmd_generate(client, args, args.command.removeprefix("gen-"))
    except ConnectionError as exc:
        return _fail(str(exc), 2)
    finally:
        client.close()


if __name__ == "__main__":
    sys.exit(main())
