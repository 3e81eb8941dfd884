"""Stand-alone HGMC reader/writer (struct + little-endian f64).

Written without reference to the C++ sources, from the container layout only.
Run as a script to regenerate tests/data/golden_v1.hgmc:

    python3 tests/oracles/hgmc.py write tests/data/golden_v1.hgmc

or to dump a container:

    python3 tests/oracles/hgmc.py dump FILE
"""
import math
import struct
import sys

MAGIC = b"HGMC"
KINDS = {1: "coefficient-matrix", 2: "matrix", 3: "vector"}


def encode(kind, rows, cols, values, metadata):
    assert len(values) == rows * cols
    out = bytearray(MAGIC)
    out += struct.pack("<HBQQ", 1, kind, rows, cols)
    out += struct.pack("<%dd" % len(values), *values)
    for key in sorted(metadata):
        out += f"{key}={metadata[key]}\n".encode("utf-8")
    return bytes(out)


def decode(data):
    if data[:4] != MAGIC:
        raise ValueError("bad magic")
    version, kind, rows, cols = struct.unpack_from("<HBQQ", data, 4)
    if version != 1:
        raise ValueError("unsupported version %d" % version)
    n = rows * cols
    values = list(struct.unpack_from("<%dd" % n, data, 23))
    meta = {}
    for line in data[23 + 8 * n:].decode("utf-8").splitlines():
        if line:
            key, _, value = line.partition("=")
            meta[key] = value
    return kind, rows, cols, values, meta


GOLDEN_VALUES = [1.0, -0.0, math.pi, 1e-300, -2.5e10, 0.1]
GOLDEN_META = {"basis_id": "ica-400-golden", "dataset_id": "fashion-1k", "preprocess": "logit", "seed": "42"}


def main(argv):
    if len(argv) == 3 and argv[1] == "write":
        with open(argv[2], "wb") as f:
            f.write(encode(1, 3, 2, GOLDEN_VALUES, GOLDEN_META))
    elif len(argv) == 3 and argv[1] == "dump":
        with open(argv[2], "rb") as f:
            kind, rows, cols, values, meta = decode(f.read())
        print(KINDS.get(kind, kind), rows, cols)
        print(" ".join(struct.pack("<d", v).hex() for v in values))
        for key in sorted(meta):
            print(f"{key}={meta[key]}")
    else:
        print(__doc__)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
