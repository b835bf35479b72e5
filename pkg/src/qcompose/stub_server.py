"""Local stand-in for the remote QRNG endpoint.

Serves ``GET /?length=N&type=uint8`` with ``{"type": "uint8", "length": N,
"data": [...], "success": true}``.  Bytes come from a seeded generator, so a
stub session is reproducible.  ``mode`` selects failure behaviour for tests:
``ok``, ``counter`` (bytes 0, 1, 2, ... wrapping at 256), ``error`` (HTTP 500),
``fail`` (``success: false``), ``malformed`` (non-JSON body), ``short``
(fewer values than requested).

Run standalone with ``python -m qcompose.stub_server --port 8765``.
"""

from __future__ import annotations

import argparse
import json
import random
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

MAX_LENGTH = 1024


class _Handler(BaseHTTPRequestHandler):
    server: "_StubHTTPServer"

    def log_message(self, fmt, *args):  # keep test output quiet
        pass

    def _send(self, status: int, body: bytes, content_type: str = "application/json"):
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        stub = self.server.stub
        with stub.lock:
            stub.request_count += 1
            mode = stub.mode
        query = parse_qs(urlparse(self.path).query)
        try:
            length = int(query.get("length", ["1"])[0])
        except ValueError:
            length = -1
        dtype = query.get("type", ["uint8"])[0]
        if not 1 <= length <= MAX_LENGTH or dtype != "uint8":
            self._send(400, json.dumps({"success": False, "message": "bad request"}).encode())
            return
        if mode == "error":
            self._send(500, b'{"success": false}')
            return
        if mode == "fail":
            self._send(200, json.dumps({"success": False}).encode())
            return
        if mode == "malformed":
            self._send(200, b"<html>not json</html>", "text/html")
            return
        with stub.lock:
            if mode == "counter":
                data = [(stub.served + i) % 256 for i in range(length)]
            else:
                data = list(stub.rng.randbytes(length))
            stub.served += length
        if mode == "short":
            data = data[: length // 2]
        body = {"type": "uint8", "length": length, "data": data, "success": True}
        self._send(200, json.dumps(body).encode())


class _StubHTTPServer(ThreadingHTTPServer):
    daemon_threads = True
    stub: "StubQRNGServer"


class StubQRNGServer:
    """Threaded stub server; use as a context manager or call start()/stop()."""

    def __init__(self, seed: int = 0, mode: str = "ok", host: str = "127.0.0.1", port: int = 0):
        self.seed = seed
        self.mode = mode
        self.rng = random.Random(seed)
        self.lock = threading.Lock()
        self.request_count = 0
        self.served = 0
        self._httpd = _StubHTTPServer((host, port), _Handler)
        self._httpd.stub = self
        self._thread = None

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}/"

    def start(self) -> "StubQRNGServer":
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()


def main(argv=None):
    parser = argparse.ArgumentParser(description="Serve deterministic uint8 blocks in the QRNG JSON format.")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8765)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--mode", default="ok", choices=["ok", "counter", "error", "fail", "malformed", "short"])
    args = parser.parse_args(argv)
    server = StubQRNGServer(args.seed, args.mode, args.host, args.port)
    print(f"stub QRNG listening on {server.url}", flush=True)
    try:
        server._httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server._httpd.server_close()


if __name__ == "__main__":
    main()
