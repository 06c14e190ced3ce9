"""Model file format.

Layout: magic "TOCR" | format version (u32 LE) | header length (u32 LE) |
UTF-8 JSON header | raw little-endian float32 tensor payloads.  The header
carries the architecture spec and a tensor index with byte offsets into
the payload section.  Round-trips are byte-exact.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from ..errors import ModelIOError
from .network import Network, parse_arch

MAGIC = b"TOCR"
VERSION = 1


def save_model(net: Network, path) -> None:
    names = net.param_names()
    params = net.params
    index = []
    offset = 0
    for name, p in zip(names, params):
        nbytes = p.size * 4
        index.append(
            {"name": name, "shape": list(p.shape), "offset": offset, "nbytes": nbytes}
        )
        offset += nbytes
    header = {
        "arch": net.spec.arch,
        "name": net.spec.name,
        "num_classes": net.spec.num_classes,
        "input_shape": list(net.spec.input_shape),
        "dropout_rate": net.spec.dropout_rate,
        "init_seed": net.init_seed,
        "tensors": index,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for p in params:
            fh.write(np.ascontiguousarray(p, dtype="<f4").tobytes())


def load_model(path) -> Network:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise ModelIOError(f"cannot read model file: {exc}") from exc
    if len(data) < 12 or data[:4] != MAGIC:
        raise ModelIOError("bad magic bytes: not a model file")
    (version,) = struct.unpack_from("<I", data, 4)
    if version != VERSION:
        raise ModelIOError(f"unsupported model format version {version}")
    (hlen,) = struct.unpack_from("<I", data, 8)
    if len(data) < 12 + hlen:
        raise ModelIOError("truncated model header")
    try:
        header = json.loads(data[12 : 12 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelIOError(f"corrupt model header: {exc}") from exc
    spec = parse_arch(
        header["arch"],
        header["num_classes"],
        name=header.get("name", ""),
        input_shape=tuple(header["input_shape"]),
        dropout_rate=header.get("dropout_rate", 0.5),
    )
    net = Network(spec, seed=header.get("init_seed", 0), dtype=np.float32)
    payload = data[12 + hlen :]
    values = []
    for entry in header["tensors"]:
        start, nbytes = entry["offset"], entry["nbytes"]
        if start + nbytes > len(payload):
            raise ModelIOError("truncated model payload")
        arr = np.frombuffer(payload[start : start + nbytes], dtype="<f4")
        values.append(arr.reshape(entry["shape"]).copy())
    net.set_params(values)
    return net
