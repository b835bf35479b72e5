"""Serve deterministic bytes in the QRNG JSON format on localhost (see --help)."""

from qcompose.stub_server import main

if __name__ == "__main__":
    main()
