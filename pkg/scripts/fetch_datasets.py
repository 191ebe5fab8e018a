#!/usr/bin/env python3
"""Fetch the real-world benchmark graphs and convert them to the text formats.

Downloads the preprocessed .npz graphs (largest connected component,
undirected, self-loop free; the statistics the evaluation bands assume)
and writes ``<name>.edges`` / ``<name>.labels`` under ``data/``. Needs
network access; alternatively point ``--from-npz`` at already-downloaded
.npz files to convert offline.

Usage:
    python scripts/fetch_datasets.py                 # fetch all three
    python scripts/fetch_datasets.py cora polblogs   # a subset
    python scripts/fetch_datasets.py cora --from-npz /path/cora.npz
"""

from __future__ import annotations

import argparse
import io
import sys
import urllib.request
from pathlib import Path

import numpy as np
import scipy.sparse as sp

MIRRORS = [
    "https://raw.githubusercontent.com/abojchevski/node_embedding_attack/master/data/{name}.npz",
    "https://github.com/abojchevski/node_embedding_attack/raw/master/data/{name}.npz",
]

EXPECTED = {
    "cora": (2810, 7981, 7),
    "citeseer": (2110, 7388, 6),
    "polblogs": (1222, 16717, 2),
}


def convert_npz(payload: dict, name: str, out_dir: Path) -> tuple[int, int, int]:
    """Write edge-list and label files from a CSR-format .npz payload."""
    adj = sp.csr_matrix((payload["adj_data"], payload["adj_indices"],
                         payload["adj_indptr"]), shape=tuple(payload["adj_shape"]))
    labels = np.asarray(payload["labels"]).ravel()
    adj = adj.maximum(adj.T)
    adj.setdiag(0)
    adj.eliminate_zeros()
    coo = sp.triu(adj, k=1).tocoo()
    n = adj.shape[0]
    if labels.size != n:
        raise ValueError(f"{name}: {labels.size} labels for {n} nodes")

    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / f"{name}.edges", "w", encoding="utf-8") as fh:
        for u, v in zip(coo.row.tolist(), coo.col.tolist()):
            fh.write(f"{u} {v}\n")
    with open(out_dir / f"{name}.labels", "w", encoding="utf-8") as fh:
        for node, lab in enumerate(labels.tolist()):
            fh.write(f"{node} {int(lab)}\n")
    return n, coo.nnz, int(np.unique(labels).size)


def fetch(name: str, out_dir: Path, npz_path: str | None) -> bool:
    if npz_path:
        payload = dict(np.load(npz_path, allow_pickle=False))
    else:
        payload = None
        for mirror in MIRRORS:
            url = mirror.format(name=name)
            try:
                print(f"fetching {url} ...")
                with urllib.request.urlopen(url, timeout=60) as resp:
                    payload = dict(np.load(io.BytesIO(resp.read()), allow_pickle=False))
                break
            except Exception as exc:  # noqa: BLE001 - try the next mirror
                print(f"  failed: {exc}")
        if payload is None:
            print(f"{name}: all mirrors failed; download the .npz manually and "
                  f"rerun with --from-npz")
            return False
    stats = convert_npz(payload, name, out_dir)
    expected = EXPECTED.get(name)
    marker = "" if expected is None or stats == expected else \
        f"  WARNING: expected {expected}; evaluation bands assume that preprocessing"
    print(f"{name}: |V|={stats[0]} |E|={stats[1]} D={stats[2]}{marker}")
    return True


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("names", nargs="*", choices=["cora", "citeseer", "polblogs"],
                        help="datasets to fetch (default: all)")
    parser.add_argument("--out-dir", default=str(Path(__file__).resolve().parents[1] / "data"))
    parser.add_argument("--from-npz", default=None,
                        help="convert a local .npz instead of downloading "
                             "(requires exactly one dataset name)")
    args = parser.parse_args()
    names = args.names or list(EXPECTED)
    if args.from_npz and len(names) != 1:
        parser.error("--from-npz requires exactly one dataset name")
    ok = all(fetch(name, Path(args.out_dir), args.from_npz) for name in names)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
