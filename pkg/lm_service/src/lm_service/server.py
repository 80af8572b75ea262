"""HTTP front end: POST /v1/fill and GET /health.

Wire contract (JSON both ways):

    POST /v1/fill
        request:  {tokens: [str], mask_index: int, byte_length: int|null,
                   top_k: int (default 32), candidates: [str]|null}
        response: {candidates: [{word: str, log_prob: float}, ...],  # descending
                   model_id: str}
        errors:   400 malformed request, 422 constraints unsatisfiable,
                  503 model not loaded

    GET /health
        200 {status: "ok", model_id} once the model is loaded, 503 before.

The server answers requests concurrently (thread per connection); the
model is immutable after loading, so scoring needs no lock.  The service
holds no per-request state.
"""

from __future__ import annotations

import argparse
import json
import sys
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .model import (
    DEFAULT_BEAM,
    DEFAULT_K,
    MASK,
    TrigramInfillModel,
    UnsatisfiableError,
    load_model,
)

MAX_BODY_BYTES = 10 * 1024 * 1024


@dataclass
class ServiceState:
    model: TrigramInfillModel | None = None
    beam: int = DEFAULT_BEAM
    lock: threading.Lock = field(default_factory=threading.Lock)

    def install(self, model: TrigramInfillModel) -> None:
        with self.lock:
            self.model = model

    def current(self) -> TrigramInfillModel | None:
        with self.lock:
            return self.model


class BadRequest(Exception):
    pass


def parse_fill_request(body: object) -> tuple[list[str], int, int | None, int, list[str] | None]:
    """Validate a /v1/fill body; returns (tokens, mask_index, byte_length,
    top_k, candidates) or raises BadRequest."""
    if not isinstance(body, dict):
        raise BadRequest("request body must be a JSON object")

    tokens = body.get("tokens")
    if (
        not isinstance(tokens, list)
        or not tokens
        or not all(isinstance(t, str) for t in tokens)
    ):
        raise BadRequest("tokens must be a nonempty list of strings")

    mask_index = body.get("mask_index")
    if isinstance(mask_index, bool) or not isinstance(mask_index, int):
        raise BadRequest("mask_index must be an integer")
    if not 0 <= mask_index < len(tokens):
        raise BadRequest(f"mask_index {mask_index} out of range for {len(tokens)} tokens")
    if tokens[mask_index] != MASK:
        raise BadRequest(f'tokens[mask_index] must be the literal string "{MASK}"')

    byte_length = body.get("byte_length")
    if byte_length is not None:
        if isinstance(byte_length, bool) or not isinstance(byte_length, int):
            raise BadRequest("byte_length must be an integer")
        if byte_length < 1:
            raise BadRequest("byte_length must be >= 1")

    top_k = body.get("top_k", 32)
    if isinstance(top_k, bool) or not isinstance(top_k, int):
        raise BadRequest("top_k must be an integer")
    if top_k < 1:
        raise BadRequest("top_k must be >= 1")

    candidates = body.get("candidates")
    if candidates is not None:
        if not isinstance(candidates, list) or not candidates:
            raise BadRequest("candidates, when given, must be a nonempty list")
        distinct: list[str] = []
        seen = set()
        for c in candidates:
            if not isinstance(c, str) or not c:
                raise BadRequest("candidates must be nonempty strings")
            if any(ch.isspace() for ch in c):
                raise BadRequest(f"candidate {c!r} contains whitespace")
            if byte_length is not None and len(c.encode("utf-8")) != byte_length:
                raise BadRequest(
                    f"candidate {c!r} does not have byte length {byte_length}"
                )
            if c not in seen:
                seen.add(c)
                distinct.append(c)
        if len(distinct) > top_k:
            raise BadRequest(
                f"{len(distinct)} distinct candidates cannot fit in top_k={top_k}"
            )
        candidates = distinct

    return tokens, mask_index, byte_length, top_k, candidates


class FillHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server: "FillServer"

    def _send_json(self, code: int, payload: dict) -> None:
        blob = json.dumps(payload).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(blob)))
        self.end_headers()
        self.wfile.write(blob)

    def do_GET(self) -> None:  # noqa: N802  (http.server naming)
        if self.path != "/health":
            self._send_json(404, {"error": "not found"})
            return
        model = self.server.state.current()
        if model is None:
            self._send_json(503, {"error": "model not loaded"})
        else:
            self._send_json(200, {"status": "ok", "model_id": model.model_id})

    def do_POST(self) -> None:  # noqa: N802
        if self.path != "/v1/fill":
            self._send_json(404, {"error": "not found"})
            return
        model = self.server.state.current()
        if model is None:
            self._send_json(503, {"error": "model not loaded"})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
        except ValueError:
            length = 0
        if length <= 0 or length > MAX_BODY_BYTES:
            self._send_json(400, {"error": "missing or oversized request body"})
            return
        try:
            body = json.loads(self.rfile.read(length))
            tokens, mask_index, byte_length, top_k, candidates = parse_fill_request(body)
        except (json.JSONDecodeError, UnicodeDecodeError):
            self._send_json(400, {"error": "request body is not valid JSON"})
            return
        except BadRequest as exc:
            self._send_json(400, {"error": str(exc)})
            return

        try:
            if candidates is not None:
                ranked = model.score_candidates(tokens, mask_index, candidates)
            else:
                ranked = model.generate(
                    tokens, mask_index, byte_length, top_k, beam=self.server.state.beam
                )
        except UnsatisfiableError as exc:
            self._send_json(422, {"error": str(exc)})
            return
        self._send_json(
            200,
            {
                "candidates": [
                    {"word": c.word, "log_prob": c.log_prob} for c in ranked
                ],
                "model_id": model.model_id,
            },
        )

    def log_message(self, format: str, *args) -> None:  # quiet by default
        if self.server.verbose:
            sys.stderr.write("%s - %s\n" % (self.address_string(), format % args))


class FillServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, state: ServiceState, verbose: bool = False):
        super().__init__(address, FillHandler)
        self.state = state
        self.verbose = verbose


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="lm-service",
        description="fill service: ranked single-word candidates for masked positions",
    )
    parser.add_argument("--corpus", required=True, help="training word-stream file")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8570, help="0 picks a free port")
    parser.add_argument("--k", type=float, default=DEFAULT_K, help="additive smoothing")
    parser.add_argument("--beam", type=int, default=DEFAULT_BEAM, help="decode beam width")
    parser.add_argument("--verbose", action="store_true", help="log requests")
    args = parser.parse_args(argv)
    if args.beam < 1:
        parser.error("--beam must be >= 1")

    state = ServiceState(beam=args.beam)
    server = FillServer((args.host, args.port), state, verbose=args.verbose)
    host, port = server.server_address[:2]
    print(f"listening on http://{host}:{port}", flush=True)

    def load() -> None:
        try:
            state.install(load_model(args.corpus, k=args.k))
        except (OSError, ValueError) as exc:
            print(f"error: could not load model: {exc}", file=sys.stderr, flush=True)
            server.shutdown()
            return
        print(f"model ready: {state.current().model_id}", flush=True)

    threading.Thread(target=load, daemon=True).start()
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
