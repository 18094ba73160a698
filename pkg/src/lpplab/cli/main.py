"""Console entry point: a thin client over the HTTP service.

Every subcommand speaks to the service endpoints. By default the app is
mounted in-process (no socket, no server to start); --server points the same
calls at a remote instance instead. Exit codes: 0 success, 2 validation
error, 3 runtime failure, 4 oracle disagreement.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys

import httpx

from .. import SCHEMA_VERSION, __version__
from .records import records_to_jsonl


def _in_process_request(method: str, path: str, payload: dict | None):
    from ..service import create_app

    async def go():
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
            transport=transport, base_url="http://lpplab.internal", timeout=None
        ) as client:
            return await client.request(method, path, json=payload)

    return asyncio.run(go())


def _request(method: str, path: str, payload: dict | None, server: str | None):
    if server is None:
        return _in_process_request(method, path, payload)
    return httpx.request(method, server.rstrip("/") + path, json=payload, timeout=None)


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _detail(resp: httpx.Response) -> str:
    try:
        return resp.json().get("detail", resp.text)
    except ValueError:
        return resp.text


def _write_text(text: str, out_path: str | None) -> int | None:
    if out_path is None:
        sys.stdout.write(text)
        return None
    try:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as e:
        return _fail(f"cannot write {out_path}: {e}", 3)
    return None


def _cmd_run(args) -> int:
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        return _fail(f"cannot read config {args.config}: {e}", 2)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        return _fail(f"config is not valid JSON: {e}", 2)
    if not isinstance(data, dict):
        return _fail("config must be a JSON object", 2)
    if args.workers is not None:
        data["workers"] = args.workers

    try:
        resp = _request("POST", "/v1/run", {"config": data}, args.server)
    except httpx.HTTPError as e:
        return _fail(f"service unreachable: {e}", 3)
    if resp.status_code == 400:
        return _fail(_detail(resp), 2)
    if resp.status_code != 200:
        return _fail(_detail(resp), 3)

    records = resp.json()["records"]
    out_path = args.out if args.out is not None else data.get("output_path")
    code = _write_text(records_to_jsonl(records), out_path)
    if code is not None:
        return code
    if out_path is not None:
        print(f"wrote {len(records)} record(s) to {out_path}")
    for rec in records:
        extra = rec.get("extra", {})
        if rec.get("experiment") == "oracle_check" and not extra.get("all_agree", True):
            return _fail(f"oracle disagreement: {extra.get('disagreements')}", 4)
    return 0


def _cmd_summarize(args) -> int:
    try:
        with open(args.records, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        return _fail(f"cannot read records {args.records}: {e}", 3)
    try:
        resp = _request("POST", "/v1/summarize", {"jsonl": text}, args.server)
    except httpx.HTTPError as e:
        return _fail(f"service unreachable: {e}", 3)
    if resp.status_code != 200:
        return _fail(_detail(resp), 3)
    code = _write_text(resp.json()["csv"], args.out)
    return 0 if code is None else code


def _cmd_oracle_check(args) -> int:
    try:
        resp = _request(
            "POST", "/v1/oracle-check", {"cases": args.cases, "seed": args.seed}, args.server
        )
    except httpx.HTTPError as e:
        return _fail(f"service unreachable: {e}", 3)
    if resp.status_code != 200:
        return _fail(_detail(resp), 3)
    report = resp.json()
    print(f"oracle-check: {report['agreements']}/{report['cases']} cases agree")
    if not report["all_agree"]:
        print(json.dumps(report["disagreements"], indent=2), file=sys.stderr)
        return 4
    return 0


def _cmd_version(args) -> int:
    if args.server is not None:
        try:
            resp = _request("GET", "/v1/version", None, args.server)
        except httpx.HTTPError as e:
            return _fail(f"service unreachable: {e}", 3)
        if resp.status_code != 200:
            return _fail(_detail(resp), 3)
        info = resp.json()
        print(f"{info['name']} {info['version']} (schema {info['schema_version']})")
        return 0
    print(f"lpplab {__version__} (schema {SCHEMA_VERSION})")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from ..service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lpp", description="last-passage percolation simulation laboratory"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the experiment described by a JSON config")
    p_run.add_argument("config", help="path to the config JSON document")
    p_run.add_argument("--workers", type=int, default=None, help="worker process count")
    p_run.add_argument("--out", default=None, help="output JSONL path (default: config output_path or stdout)")
    p_run.add_argument("--server", default=None, help="remote service URL (default: in-process)")
    p_run.set_defaults(fn=_cmd_run)

    p_sum = sub.add_parser("summarize", help="turn a JSONL records file into a CSV summary")
    p_sum.add_argument("records", help="path to the records JSONL file")
    p_sum.add_argument("--out", default=None, help="output CSV path (default: stdout)")
    p_sum.add_argument("--server", default=None, help="remote service URL (default: in-process)")
    p_sum.set_defaults(fn=_cmd_summarize)

    p_orc = sub.add_parser("oracle-check", help="cross-check the engine against exhaustive enumeration")
    p_orc.add_argument("--cases", type=int, default=50, help="number of random cases")
    p_orc.add_argument("--seed", type=int, default=0, help="case-generator seed")
    p_orc.add_argument("--server", default=None, help="remote service URL (default: in-process)")
    p_orc.set_defaults(fn=_cmd_oracle_check)

    p_ver = sub.add_parser("version", help="print name, version, and schema version")
    p_ver.add_argument("--server", default=None, help="remote service URL (default: in-process)")
    p_ver.set_defaults(fn=_cmd_version)

    p_srv = sub.add_parser("serve", help="start the HTTP service")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8000)
    p_srv.set_defaults(fn=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
