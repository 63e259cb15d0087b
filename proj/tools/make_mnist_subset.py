#!/usr/bin/env python3
"""Write a 5000-image MNIST subset as an IDX3 image file.

The images come from the MNIST sample bundled in the mlxtend wheel
(mlxtend/data/data/mnist_5k.csv.gz: 784 raw pixel columns plus a label).
The wheel is fetched with `pip download` unless --wheel is given.
"""
import argparse
import glob
import gzip
import io
import struct
import subprocess
import sys
import tempfile
import zipfile

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def fetch_wheel(dest):
    subprocess.run([sys.executable, "-m", "pip", "download", "--no-deps",
                    "--only-binary=:all:", "-d", dest, "mlxtend"], check=True)
    wheels = glob.glob(f"{dest}/mlxtend-*.whl")
    if not wheels:
        sys.exit("mlxtend wheel not found after download")
    return wheels[0]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data/mnist-5k-images-idx3-ubyte")
    ap.add_argument("--wheel", help="path to an already downloaded mlxtend wheel")
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        wheel = args.wheel or fetch_wheel(tmp)
        raw = zipfile.ZipFile(wheel).read(MEMBER)

    rows = []
    for line in io.TextIOWrapper(io.BytesIO(gzip.decompress(raw)), encoding="ascii"):
        vals = line.strip().split(",")
        if len(vals) != 785:
            continue
        rows.append(bytes(int(float(v)) for v in vals[:784]))

    with open(args.out, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(rows), 28, 28))
        for r in rows:
            f.write(r)
    print(f"wrote {len(rows)} images to {args.out}")


if __name__ == "__main__":
    main()
