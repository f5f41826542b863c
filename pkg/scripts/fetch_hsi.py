"""Fetch the Salinas-A hyperspectral scene and pack it for clustering runs.

Downloads the corrected radiance cube and its ground-truth map from the
public GIC/EHU dataset mirror, reports SHA-256 checksums, and writes
``data/salinas_a.npz`` with

    X : (pixels, 204) float32 spectra, row-major over the 83x86 scene
    y : (pixels,) int class ids remapped to 1..K in sorted original order
    codes : the original ground-truth codes corresponding to 1..K

Pixels whose ground-truth code is 0 (unlabeled) are dropped.  Pass
``--expect CUBE_SHA GT_SHA`` to enforce checksums instead of just
printing them (recommended when scripting).

Usage:
    python3 scripts/fetch_hsi.py [--dest data/] [--expect SHA SHA]
"""
import argparse
import hashlib
import sys
import urllib.request
from pathlib import Path

import numpy as np

BASE = "https://www.ehu.eus/ccwintco/uploads"
CUBE_URL = f"{BASE}/1/1a/SalinasA_corrected.mat"
GT_URL = f"{BASE}/a/aa/SalinasA_gt.mat"


def fetch(url: str, dest: Path) -> Path:
    out = dest / url.rsplit("/", 1)[1]
    if out.exists():
        print(f"already have {out}")
        return out
    print(f"fetching {url} ...")
    with urllib.request.urlopen(url, timeout=120) as resp:
        out.write_bytes(resp.read())
    return out


def sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def main() -> int:
    ap = argparse.ArgumentParser(
        description="download and convert the Salinas-A scene")
    ap.add_argument("--dest", default="data", type=Path)
    ap.add_argument("--expect", nargs=2, metavar=("CUBE_SHA", "GT_SHA"),
                    help="required SHA-256 of the cube and gt .mat files")
    args = ap.parse_args()
    args.dest.mkdir(parents=True, exist_ok=True)

    try:
        cube_mat = fetch(CUBE_URL, args.dest)
        gt_mat = fetch(GT_URL, args.dest)
    except OSError as exc:
        print(f"download failed: {exc}", file=sys.stderr)
        print("fetch the two .mat files manually into the dest directory "
              "and re-run.", file=sys.stderr)
        return 1

    sums = (sha256(cube_mat), sha256(gt_mat))
    print(f"sha256 {cube_mat.name}: {sums[0]}")
    print(f"sha256 {gt_mat.name}: {sums[1]}")
    if args.expect and list(args.expect) != list(sums):
        print("checksum mismatch; refusing to convert", file=sys.stderr)
        return 1

    from scipy.io import loadmat

    cube = loadmat(cube_mat)["salinasA_corrected"].astype(np.float32)
    gt = loadmat(gt_mat)["salinasA_gt"].astype(int)
    X = cube.reshape(-1, cube.shape[2])
    y_raw = gt.reshape(-1)
    keep = y_raw > 0
    codes = np.unique(y_raw[keep])
    remap = {c: i + 1 for i, c in enumerate(codes)}
    y = np.array([remap[v] for v in y_raw[keep]])

    out = args.dest / "salinas_a.npz"
    np.savez_compressed(out, X=X[keep], y=y, codes=codes)
    print(f"wrote {out}: X {X[keep].shape}, {len(codes)} classes "
          f"(original codes {codes.tolist()})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
