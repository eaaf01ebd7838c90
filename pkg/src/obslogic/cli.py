"""Command-line client for the solver service.

Every subcommand builds a service request and renders the response in a
line-stable protocol (first token SAT / UNSAT / INDETERMINATE / TRUE / FALSE).
By default the requests run against an in-process instance of the service;
`--server` points them at a remote one instead.

Exit codes: 0 for any decided result, 2 for usage or input errors, 3 when a
resource cap made the answer indeterminate.
"""

from __future__ import annotations

import argparse
import asyncio
import sys
from pathlib import Path

import httpx

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RESOURCE = 3


class ServiceClient:
    """Minimal JSON-over-HTTP client; in-process unless a server is given."""

    def __init__(self, server: str | None):
        self.server = server

    def post(self, path: str, payload: dict) -> tuple[int, dict]:
        if self.server is not None:
            response = httpx.post(self.server.rstrip("/") + path, json=payload, timeout=None)
            return response.status_code, response.json()
        return asyncio.run(self._post_in_process(path, payload))

    async def _post_in_process(self, path: str, payload: dict) -> tuple[int, dict]:
        from .service import create_app

        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(transport=transport, base_url="http://obslogic.local") as client:
            response = await client.post(path, json=payload)
            return response.status_code, response.json()


def _read_source(value: str) -> str:
    """Treat `@path` (or an existing file path) as a file, else as inline text."""
    if value.startswith("@"):
        return Path(value[1:]).read_text()
    candidate = Path(value)
    if candidate.is_file():
        return candidate.read_text()
    return value


def _fail(message: object, code: int = EXIT_USAGE) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _detail(body: dict) -> object:
    detail = body.get("detail", body)
    if isinstance(detail, dict) and "message" in detail:
        position = ""
        if "line" in detail:
            position = f" (line {detail['line']}, column {detail['column']})"
        return f"{detail['message']}{position}"
    return detail


def _load_config(path: str | None) -> dict[str, str]:
    if path is None:
        return {}
    values: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config lines are key=value, got {line!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="obslogic")
    parser.add_argument("--server", help="URL of a running service (default: in-process)")
    parser.add_argument("--format", choices=("human", "machine"), default="human")
    parser.add_argument("--config", help="key=value file with default caps")
    commands = parser.add_subparsers(dest="command", required=True)

    sat = commands.add_parser("sat", help="decide satisfiability")
    sat.add_argument("formula")
    sat.add_argument("--alphabet", help="comma-separated letters (default: inferred)")
    sat.add_argument("--agents", help="comma-separated agents (default: inferred)")
    sat.add_argument("--atoms", help="comma-separated atoms (default: inferred)")
    sat.add_argument("--timeout", type=float, default=None, metavar="SEC")
    sat.add_argument("--max-terms", type=int, default=None)
    sat.add_argument("--max-branches", type=int, default=None)
    sat.add_argument("--trace", action="store_true", help="print the decisive rule sequence")
    sat.add_argument("--no-verify", action="store_true", help="skip witness re-checking")

    chk = commands.add_parser("check", help="model-check a formula at a state")
    chk.add_argument("model", help="model file path or inline text")
    chk.add_argument("state")
    chk.add_argument("formula")

    tr = commands.add_parser("translate-pal", help="translate a word-fragment formula")
    tr.add_argument("formula")

    gen = commands.add_parser("gen", help="generate benchmark formulas")
    gen_kind = gen.add_subparsers(dest="kind", required=True)
    gq = gen_kind.add_parser("qbf")
    gq.add_argument("instance", help="instance text or @file, e.g. 'exists x1 : (x1)'")
    gt = gen_kind.add_parser("tiling")
    gt.add_argument("instance", help="instance text or @file with n:, origin:, tile lines")
    gv = gen_kind.add_parser("vbot")
    gv.add_argument("n", type=int)

    orc = commands.add_parser("oracle", help="bounded brute-force model search")
    orc.add_argument("formula")
    orc.add_argument("--states", type=int, default=2)
    orc.add_argument("--wordlen", type=int, default=2)
    orc.add_argument("--words", type=int, default=2)

    return parser


def _vocab_payload(args: argparse.Namespace) -> dict | None:
    spec = {}
    if args.alphabet:
        spec["alphabet"] = args.alphabet.split(",")
    if args.agents is not None:
        spec["agents"] = [a for a in args.agents.split(",") if a]
    if args.atoms is not None:
        spec["atoms"] = [a for a in args.atoms.split(",") if a]
    return spec or None


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        config = _load_config(args.config)
    except (OSError, ValueError) as exc:
        return _fail(exc)
    client = ServiceClient(args.server)
    machine = args.format == "machine"

    if args.command == "sat":
        limits = {
            "max_terms": args.max_terms or int(config.get("max_terms", 1_000_000)),
            "max_branches": args.max_branches or int(config.get("max_branches", 100_000)),
            "timeout_s": args.timeout or float(config.get("timeout", 60.0)),
        }
        status, body = client.post(
            "/sat",
            {
                "formula": args.formula,
                "vocab": _vocab_payload(args),
                "limits": limits,
                "trace": args.trace,
                "verify": not args.no_verify,
            },
        )
        if status != 200:
            return _fail(_detail(body))
        if body["trace"]:
            for line in body["trace"]:
                print(line)
        verdict = body["status"]
        if verdict == "INDETERMINATE":
            print(f"INDETERMINATE {body['reason']}")
            return EXIT_RESOURCE
        print(verdict)
        if body["model"]:
            print(body["model"], end="")
        if not machine:
            stats = body["stats"]
            print(
                f"# branches={stats['branches']} terms={stats['terms']} "
                f"depth={stats['max_depth']} elapsed={stats['elapsed_s']:.3f}s",
                file=sys.stderr,
            )
        return EXIT_OK

    if args.command == "check":
        try:
            model_text = _read_source(args.model)
        except OSError as exc:
            return _fail(exc)
        status, body = client.post(
            "/check",
            {"model": model_text, "state": args.state, "formula": args.formula},
        )
        if status != 200:
            return _fail(_detail(body))
        print("TRUE" if body["value"] else "FALSE")
        return EXIT_OK

    if args.command == "translate-pal":
        status, body = client.post("/translate-pal", {"formula": args.formula})
        if status != 200:
            return _fail(_detail(body))
        print(body["pal_formula"])
        if not machine and body["announcement_atoms"]:
            print("# announcement atoms: " + " ".join(body["announcement_atoms"]), file=sys.stderr)
        return EXIT_OK

    if args.command == "gen":
        if args.kind == "vbot":
            status, body = client.post("/gen/vbot", {"n": args.n})
            if status != 200:
                return _fail(_detail(body))
            for name, formula in body["fixtures"].items():
                print(f"{name}: {formula}")
            return EXIT_OK
        try:
            instance = _read_source(args.instance)
        except OSError as exc:
            return _fail(exc)
        status, body = client.post(f"/gen/{args.kind}", {"instance": instance})
        if status != 200:
            return _fail(_detail(body))
        print(body["formula"])
        return EXIT_OK

    assert args.command == "oracle"
    status, body = client.post(
        "/oracle",
        {
            "formula": args.formula,
            "max_states": args.states,
            "max_word_len": args.wordlen,
            "max_words": args.words,
        },
    )
    if status != 200:
        return _fail(_detail(body))
    print(body["status"])
    if body["model"]:
        print(body["model"], end="")
    return EXIT_OK


def entrypoint() -> None:  # console script
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
