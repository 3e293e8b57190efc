"""Batch CLI: one dataset in, ranked models and assignments out.

The CLI is a thin HTTP client. By default it mounts the service
in-process (no sockets); pass --server to talk to a running instance
instead. Either way the engine is only ever driven through the same
API the UI uses.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

import httpx

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_FAILURE = 3

POLL_INTERVAL = 0.2


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _parse(argv):
    parser = argparse.ArgumentParser(
        prog="clusterscout",
        description="Search clustering models over a CSV and write the ranked results.",
    )
    parser.add_argument("--input", required=True, help="input CSV file")
    parser.add_argument("--features", help="comma-separated feature columns")
    parser.add_argument("--weights", help="comma-separated weights, one per feature")
    parser.add_argument("--k", type=int, help="pin the number of clusters")
    parser.add_argument(
        "--demonstrations", help="JSON-lines op log to replay before searching"
    )
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--top", type=int, help="number of ranked recommendations")
    parser.add_argument("--seed", type=int, help="search seed")
    parser.add_argument("--server", help="base URL of a running service (default: in-process)")
    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = _parse(argv)
    try:
        features, weights = _feature_args(args)
        csv_bytes = _read_input(args.input)
        ops = _read_ops(args.demonstrations)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        payload = asyncio.run(_run(args, features, weights, csv_bytes, ops))
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    recs, assignments, report = payload
    (out_dir / "ranked.json").write_text(json.dumps(recs, sort_keys=True, indent=2) + "\n")
    (out_dir / "assignments.csv").write_text(assignments)
    (out_dir / "report.txt").write_text(report)
    return EXIT_OK


def _feature_args(args):
    features = args.features.split(",") if args.features else None
    weights = None
    if args.weights:
        if features is None:
            raise CliError(EXIT_VALIDATION, "--weights given without --features")
        try:
            weights = [float(w) for w in args.weights.split(",")]
        except ValueError:
            raise CliError(EXIT_VALIDATION, f"--weights must be numeric: {args.weights!r}")
        if len(weights) != len(features):
            raise CliError(
                EXIT_VALIDATION,
                f"{len(features)} features but {len(weights)} weights",
            )
    return features, weights


def _read_input(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise CliError(EXIT_VALIDATION, f"cannot read {path}: {exc}")


def _read_ops(path: str | None) -> list[dict]:
    if not path:
        return []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(EXIT_VALIDATION, f"cannot read {path}: {exc}")
    ops = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CliError(EXIT_VALIDATION, f"{path}:{lineno}: bad JSON: {exc}")
        if "kind" not in raw:
            raise CliError(EXIT_VALIDATION, f"{path}:{lineno}: op needs a 'kind'")
        ops.append({"kind": raw["kind"], "payload": raw.get("payload", {})})
    return ops


def _client(args) -> httpx.AsyncClient:
    if args.server:
        return httpx.AsyncClient(base_url=args.server.rstrip("/"), timeout=300.0)
    from .service.app import create_app

    transport = httpx.ASGITransport(app=create_app())
    return httpx.AsyncClient(transport=transport, base_url="http://engine", timeout=300.0)


def _check(resp: httpx.Response, expected: int) -> None:
    if resp.status_code == expected:
        return
    try:
        detail = resp.json().get("detail", resp.text)
    except ValueError:
        detail = resp.text
    code = EXIT_FAILURE if resp.status_code >= 500 else EXIT_VALIDATION
    raise CliError(code, f"server returned {resp.status_code}: {detail}")


async def _run(args, features, weights, csv_bytes: bytes, ops: list[dict]):
    try:
        async with _client(args) as client:
            resp = await client.post(
                "/sessions",
                files={"file": (Path(args.input).name, csv_bytes, "text/csv")},
            )
            _check(resp, 201)
            sid = resp.json()["session_id"]

            for op in ops:
                resp = await client.post(
                    f"/sessions/{sid}/ops", json={"op": op, "rerank": False}
                )
                _check(resp, 200)

            body = {}
            if features:
                body["features"] = features
            if weights:
                body["weights"] = weights
            if args.k is not None:
                body["desired_k"] = args.k
            if args.seed is not None:
                body["seed"] = args.seed
            if args.top is not None:
                body["top_f"] = args.top
            resp = await client.post(f"/sessions/{sid}/cluster", json=body)
            _check(resp, 200)
            generation = resp.json()["generation"]

            while True:
                resp = await client.get(
                    f"/sessions/{sid}/recommendations",
                    params={"generation": generation},
                )
                if resp.status_code == 202:
                    await asyncio.sleep(POLL_INTERVAL)
                    continue
                _check(resp, 200)
                break
            recs = resp.json()

            resp = await client.get(f"/sessions/{sid}/export.csv")
            _check(resp, 200)
            assignments = resp.text
    except httpx.HTTPError as exc:
        raise CliError(EXIT_FAILURE, f"transport failure: {exc}")
    return recs, assignments, _report(recs)


def _report(recs: dict) -> str:
    lines = []
    shown = recs["current_shown"]
    lines.append(_report_line("current", shown))
    for result in recs["ranked"]:
        lines.append(_report_line(f"rank {result['rank']}", result))
    return "\n".join(lines) + "\n"


def _report_line(tag: str, result: dict) -> str:
    flag = " [conflicts with demonstration]" if result.get("mismatch") else ""
    return f"{tag}: {result['description']['sentence']}{flag}"


if __name__ == "__main__":
    sys.exit(main())
