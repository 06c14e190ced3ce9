"""HTTP service: POST /ocr, GET /healthz, GET /version.

The model bundle is loaded once and shared immutably across request
threads; per-request pipeline state is request-local, so identical inputs
produce byte-identical responses at any concurrency level.
"""

from __future__ import annotations

import email.parser
import email.policy
import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from . import __version__
from .duoclf import DualModel
from .errors import ImageDecodeError
from .imgcore import read_image
from .pipeline import PipelineConfig, ocr_page, render_html

MAX_BODY_BYTES = 10 * 1024 * 1024
FORMATS = ("html", "txt", "json")


def _extract_image_bytes(body: bytes, content_type: str) -> bytes:
    if content_type.startswith("multipart/form-data"):
        parser = email.parser.BytesParser(policy=email.policy.default)
        msg = parser.parsebytes(
            b"Content-Type: " + content_type.encode("latin-1") + b"\r\n\r\n" + body
        )
        for part in msg.iter_parts():
            payload = part.get_payload(decode=True)
            if payload:
                return payload
        return b""
    return body


def make_handler(model: DualModel, config: PipelineConfig, max_body: int = MAX_BODY_BYTES):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # quiet by default
            pass

        def _send(self, status: int, content_type: str, payload: bytes):
            self.send_response(status)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)

        def _send_json(self, status: int, obj: dict):
            self._send(status, "application/json; charset=utf-8",
                       json.dumps(obj).encode("utf-8"))

        def do_GET(self):
            path = urlparse(self.path).path
            if path == "/healthz":
                self._send(200, "text/plain; charset=utf-8", b"ok")
            elif path == "/version":
                self._send_json(200, {"version": __version__})
            else:
                self._send_json(404, {"error": "not found"})

        def do_POST(self):
            url = urlparse(self.path)
            if url.path != "/ocr":
                self._send_json(404, {"error": "not found"})
                return
            length = int(self.headers.get("Content-Length") or 0)
            if length > max_body:
                # drain the body so the client can finish writing before it
                # reads the response (avoids a broken pipe on its side)
                remaining = length
                while remaining > 0:
                    chunk = self.rfile.read(min(remaining, 1 << 20))
                    if not chunk:
                        break
                    remaining -= len(chunk)
                self._send_json(413, {"error": "request body too large"})
                self.close_connection = True
                return
            fmt = (parse_qs(url.query).get("format") or ["html"])[0]
            if fmt not in FORMATS:
                self._send_json(400, {"error": f"unknown format {fmt!r}"})
                return
            body = self.rfile.read(length)
            image_bytes = _extract_image_bytes(body, self.headers.get("Content-Type", ""))
            try:
                image = read_image(image_bytes)
            except ImageDecodeError:
                self._send_json(400, {"error": "undecodable image"})
                return
            result = ocr_page(image, model, config)
            if fmt == "txt":
                self._send(200, "text/plain; charset=utf-8",
                           result.plain_text.encode("utf-8"))
            elif fmt == "json":
                self._send_json(200, result.to_dict())
            else:
                self._send(200, "text/html; charset=utf-8",
                           render_html(result).encode("utf-8"))

    return Handler


def make_server(
    host: str,
    port: int,
    model: DualModel,
    config: PipelineConfig | None = None,
    max_body: int = MAX_BODY_BYTES,
) -> ThreadingHTTPServer:
    handler = make_handler(model, config or PipelineConfig(), max_body)
    return ThreadingHTTPServer((host, port), handler)


def serve(host: str, port: int, model: DualModel, config: PipelineConfig | None = None) -> None:
    server = make_server(host, port, model, config)
    try:
        server.serve_forever()
    finally:
        server.server_close()
