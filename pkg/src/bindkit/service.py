"""HTTP prediction service backing the web workbench.

Endpoints (JSON request/response bodies):
  POST /api/predict    {smiles, sequence, model_id?} -> {score, task, model_id, latency_ms}
  GET  /api/models     -> [{model_id, task, task_kind, drug_encoder, target_encoder}]
  POST /api/repurpose  {sequence, library_id, ensemble?} -> ranked rows
  GET  /api/health     -> {status, models}

Models are loaded once and shared read-only across request threads; malformed
inputs return 422 with the parser's typed error and byte offset. Libraries
above 10k compounds return 413 (use the batch CLI instead).
"""

from __future__ import annotations

import json
import logging
import pathlib
import threading
import time
import uuid
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from . import dataio
from .chemgraph import SmilesError, parse_smiles
from .dataio import LabeledPair
from .persist import load_model
from .protein_features import NonstandardResidue, SequenceTooShort, clean_sequence
from .screening import _build_ranked, _score_candidates
from .training import TrainedModel

log = logging.getLogger("bindkit.service")

MAX_SYNC_LIBRARY = 10_000

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "application/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json; charset=utf-8",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


class Registry:
    """Read-only model/library registry shared by all request handlers."""

    def __init__(self, models: dict[str, TrainedModel],
                 libraries: dict[str, dataio.CompoundLibrary],
                 static_dir: str | None = None):
        self.models = models
        self.libraries = libraries
        self.static_dir = pathlib.Path(static_dir) if static_dir else None
        self.request_count = 0
        self._lock = threading.Lock()

    def bump(self) -> None:
        with self._lock:
            self.request_count += 1

    def default_model_id(self) -> str:
        return next(iter(self.models))

    def model_rows(self) -> list[dict]:
        return [
            {"model_id": mid, "task": tm.spec.task, "task_kind": tm.task_kind,
             "drug_encoder": tm.spec.drug_encoder, "target_encoder": tm.spec.target_encoder}
            for mid, tm in self.models.items()
        ]


class _ValidationFailure(Exception):
    def __init__(self, error: str, message: str, offset: int | None):
        super().__init__(message)
        self.payload = {"error": error, "message": message, "offset": offset}


def _validate_pair(smiles: str, sequence: str) -> None:
    try:
        parse_smiles(smiles)
    except SmilesError as exc:
        raise _ValidationFailure(type(exc).__name__, str(exc), exc.offset) from exc
    try:
        clean_sequence(sequence, policy="reject")
    except (NonstandardResidue, SequenceTooShort) as exc:
        raise _ValidationFailure(type(exc).__name__, str(exc), None) from exc


class Handler(BaseHTTPRequestHandler):
    registry: Registry  # set by make_handler

    # -- plumbing ---------------------------------------------------------
    def log_message(self, fmt, *args):
        log.info("%s - %s", self.address_string(), fmt % args)

    def _send_json(self, code: int, payload) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _read_json(self):
        length = int(self.headers.get("Content-Length", "0"))
        raw = self.rfile.read(length) if length else b""
        try:
            return json.loads(raw.decode("utf-8")) if raw else {}
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise _ValidationFailure("BadRequestBody", f"body is not valid JSON: {exc}",
                                     None) from exc

    # -- routes ------------------------------------------------------------
    def do_GET(self):
        self.registry.bump()
        try:
            if self.path == "/api/health":
                self._send_json(200, {"status": "ok",
                                      "models": len(self.registry.models),
                                      "requests": self.registry.request_count})
            elif self.path == "/api/models":
                self._send_json(200, self.registry.model_rows())
            elif self.path.startswith("/api/"):
                self._send_json(404, {"error": "NotFound", "message": self.path})
            else:
                self._serve_static()
        except Exception:
            self._internal_error()

    def do_POST(self):
        self.registry.bump()
        try:
            if self.path == "/api/predict":
                self._predict()
            elif self.path == "/api/repurpose":
                self._repurpose()
            else:
                self._send_json(404, {"error": "NotFound", "message": self.path})
        except _ValidationFailure as exc:
            self._send_json(422, exc.payload)
        except Exception:
            self._internal_error()

    def _internal_error(self):
        incident = uuid.uuid4().hex[:12]
        log.exception("internal error (incident %s)", incident)
        try:
            self._send_json(500, {"error": "Internal", "incident": incident})
        except Exception:
            pass

    def _predict(self):
        body = self._read_json()
        smiles = body.get("smiles", "")
        sequence = body.get("sequence", "")
        model_id = body.get("model_id") or self.registry.default_model_id()
        tm = self.registry.models.get(model_id)
        if tm is None:
            self._send_json(404, {"error": "UnknownModel", "message": model_id})
            return
        _validate_pair(smiles, sequence)
        started = time.perf_counter()
        score = float(tm.predict([LabeledPair(smiles, sequence, 0.0)])[0])
        latency_ms = (time.perf_counter() - started) * 1000.0
        self._send_json(200, {"score": score, "task": tm.task_kind,
                              "model_id": model_id, "latency_ms": latency_ms})

    def _repurpose(self):
        body = self._read_json()
        sequence = body.get("sequence", "")
        library_id = body.get("library_id", "")
        member_ids = body.get("ensemble") or list(self.registry.models)
        library = self.registry.libraries.get(library_id)
        if library is None:
            self._send_json(404, {"error": "UnknownLibrary", "message": library_id})
            return
        unknown = [m for m in member_ids if m not in self.registry.models]
        if unknown:
            self._send_json(404, {"error": "UnknownModel", "message": ",".join(unknown)})
            return
        if len(library.entries) > MAX_SYNC_LIBRARY:
            self._send_json(413, {
                "error": "LibraryTooLarge",
                "message": f"{len(library.entries)} compounds > {MAX_SYNC_LIBRARY}; "
                           f"use the repurpose CLI for batch runs"})
            return
        try:
            clean_sequence(sequence, policy="reject")
        except (NonstandardResidue, SequenceTooShort) as exc:
            raise _ValidationFailure(type(exc).__name__, str(exc), None) from exc
        members = [self.registry.models[m] for m in member_ids]
        ok = [e for e in library.entries if e.parse_error is None]
        failed = [(e.id, e.name, e.parse_error) for e in library.entries if e.parse_error]
        pairs = [LabeledPair(e.smiles, sequence, 0.0) for e in ok]
        per_model = _score_candidates(members, pairs)
        ranked = _build_ranked([e.id for e in ok], [e.name for e in ok], per_model,
                               member_ids, f"target ({len(sequence)} aa)", failed)
        self._send_json(200, {
            "target": ranked.target_description,
            "ensemble": list(ranked.member_names),
            "rows": [{"rank": r.rank, "id": r.candidate_id, "name": r.name,
                      "aggregate": r.aggregate, "per_model": list(r.per_model)}
                     for r in ranked.rows],
            "failed": [{"id": i, "name": n, "error": e} for i, n, e in ranked.failed],
        })

    def _serve_static(self):
        root = self.registry.static_dir
        if root is None:
            self._send_json(404, {"error": "NotFound",
                                  "message": "no static directory configured"})
            return
        rel = self.path.lstrip("/") or "index.html"
        target = (root / rel).resolve()
        if not str(target).startswith(str(root.resolve())) or not target.is_file():
            self._send_json(404, {"error": "NotFound", "message": self.path})
            return
        body = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type",
                         _CONTENT_TYPES.get(target.suffix, "application/octet-stream"))
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def make_handler(registry: Registry):
    return type("BoundHandler", (Handler,), {"registry": registry})


def build_registry(model_dirs: list[str], library_paths: list[str] | None = None,
                   static_dir: str | None = None) -> Registry:
    if not model_dirs:
        raise ValueError("the service needs at least one model artifact")
    models = {}
    for d in model_dirs:
        model_id = pathlib.Path(d).name or str(d)
        models[model_id] = load_model(d)
        log.info("loaded model %s", model_id)
    libraries = {}
    for p in library_paths or []:
        lib_id = pathlib.Path(p).stem
        libraries[lib_id] = dataio.load_library(p)
        log.info("loaded library %s (%d entries)", lib_id, len(libraries[lib_id]))
    return Registry(models, libraries, static_dir)


def start_server(registry: Registry, host: str = "127.0.0.1", port: int = 8000):
    server = ThreadingHTTPServer((host, port), make_handler(registry))
    return server


def run_server(model_dirs: list[str], host: str = "127.0.0.1", port: int = 8000,
               library_paths: list[str] | None = None, static_dir: str | None = None):
    registry = build_registry(model_dirs, library_paths, static_dir)
    server = start_server(registry, host, port)
    print(f"bindkit service on http://{host}:{port} "
          f"({len(registry.models)} models, {len(registry.libraries)} libraries)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
