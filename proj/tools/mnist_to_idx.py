#!/usr/bin/env python3
"""Convert a CSV of MNIST digits (784 pixel columns then a label) to IDX files.

Usage: mnist_to_idx.py SOURCE OUT_DIR

SOURCE may be a .csv, a .csv.gz, or a wheel/zip holding mnist_5k.csv.gz
(the mlxtend wheel ships one).
"""
import csv
import gzip
import io
import os
import struct
import sys
import zipfile


def read_rows(source):
    if source.endswith(".whl") or source.endswith(".zip"):
        with zipfile.ZipFile(source) as z:
            name = next(n for n in z.namelist() if n.endswith("mnist_5k.csv.gz"))
            text = gzip.decompress(z.read(name)).decode()
    elif source.endswith(".gz"):
        with gzip.open(source, "rt") as f:
            text = f.read()
    else:
        with open(source) as f:
            text = f.read()
    rows = []
    for row in csv.reader(io.StringIO(text)):
        if not row:
            continue
        try:
            values = [int(float(v)) for v in row]
        except ValueError:
            continue  # header
        if len(values) != 785:
            raise SystemExit(f"expected 785 columns, got {len(values)}")
        rows.append(values)
    return rows


def main():
    if len(sys.argv) != 3:
        raise SystemExit(__doc__)
    rows = read_rows(sys.argv[1])
    os.makedirs(sys.argv[2], exist_ok=True)
    images = os.path.join(sys.argv[2], "train-images-idx3-ubyte")
    labels = os.path.join(sys.argv[2], "train-labels-idx1-ubyte")
    with open(images, "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(rows), 28, 28))
        f.write(bytes(v for r in rows for v in r[:784]))
    with open(labels, "wb") as f:
        f.write(struct.pack(">II", 0x801, len(rows)))
        f.write(bytes(r[784] for r in rows))
    print(f"wrote {len(rows)} images to {sys.argv[2]}")


if __name__ == "__main__":
    main()
