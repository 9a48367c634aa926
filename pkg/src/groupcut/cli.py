"""Command-line front end.

Each command loads a JSON function document, sends it to the service, and
prints the JSON response.  By default the service runs in-process; pass
``--server http://host:port`` to talk to a running instance instead, so the
command line stays a thin client either way.

Exit codes: 0 for a successful verdict, 2 for input errors (unreadable
files, malformed documents, bad parameters), 3 for internal aborts.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path
from typing import Optional

import httpx


def _client(server: Optional[str]) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    with warnings.catch_warnings():
        # fastapi.testclient warns about its own starlette internals on
        # import; that is not actionable from the command line.
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app)


def _load_document(path: str) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    doc = json.loads(text)
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: a function document must be a JSON object")
    return doc


def _emit(response: httpx.Response) -> int:
    if response.status_code == 200:
        print(json.dumps(response.json(), indent=2))
        return 0
    try:
        detail = response.json().get("detail", response.text)
    except ValueError:
        detail = response.text
    print(f"error: {detail}", file=sys.stderr)
    return 2 if response.status_code < 500 else 3


def cmd_minimality(client: httpx.Client, args: argparse.Namespace) -> int:
    doc = _load_document(args.file)
    return _emit(client.post("/minimality", json={"function": doc}))


def cmd_extremality(client: httpx.Client, args: argparse.Namespace) -> int:
    doc = _load_document(args.file)
    payload = {"function": doc, "m": args.m, "method": args.method}
    return _emit(client.post("/extremality", json=payload))


def cmd_faces(client: httpx.Client, args: argparse.Namespace) -> int:
    doc = _load_document(args.file)
    return _emit(client.post("/faces", json={"function": doc}))


def cmd_plot(client: httpx.Client, args: argparse.Namespace) -> int:
    doc = _load_document(args.file)
    response = client.post("/plot", json={"function": doc})
    if response.status_code != 200:
        return _emit(response)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.file).stem
    written = []
    for suffix, content in response.json()["files"].items():
        target = out_dir / f"{stem}_{suffix}"
        target.write_text(content, encoding="utf-8")
        written.append(str(target))
    print(json.dumps({"written": written}, indent=2))
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="groupcut",
        description="Minimality and extremality toolkit for group-problem "
        "cut-generating functions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--server",
        default=None,
        help="base URL of a running service (default: run in-process)",
    )

    p = sub.add_parser("minimality", parents=[common], help="minimality verdict")
    p.add_argument("file", help="function document (JSON)")

    p = sub.add_parser("extremality", parents=[common], help="extremality verdict")
    p.add_argument("file", help="function document (JSON)")
    p.add_argument("--m", type=int, default=3, help="grid refinement (default 3)")
    p.add_argument(
        "--method",
        choices=["both", "finite", "pipeline"],
        default="both",
        help="decision procedure (default: both, cross-checked)",
    )

    p = sub.add_parser("faces", parents=[common], help="additive faces as JSON")
    p.add_argument("file", help="function document (JSON)")

    p = sub.add_parser("plot", parents=[common], help="write CSV and SVG plot data")
    p.add_argument("file", help="function document (JSON)")
    p.add_argument("--out", default=".", help="output directory (default: .)")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


_COMMANDS = {
    "minimality": cmd_minimality,
    "extremality": cmd_extremality,
    "faces": cmd_faces,
    "plot": cmd_plot,
}


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        return cmd_serve(args)
    try:
        with _client(args.server) as client:
            return _COMMANDS[args.command](client, args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except httpx.HTTPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
