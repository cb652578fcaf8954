"""Synthetic multi-view data and fixture writers."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def make_multiview_blobs(n: int = 300, seed: int = 0, c: int = 3):
    """Two noisy feature views of the same ``c`` Gaussian clusters.

    View 0 is 2-D with unit noise around fixed, moderately separated centres;
    view 1 is 5-D with random centres and noise 1.5. Samples are ordered by
    cluster, ``n // c`` each (the remainder goes to the last cluster).

    Returns
    -------
    views : list of ndarray, shapes (n, 2) and (n, 5)
    labels : ndarray of int, shape (n,)
    """
    rng = np.random.default_rng(seed)
    sizes = [n // c] * c
    sizes[-1] += n - sum(sizes)
    labels = np.repeat(np.arange(c), sizes)
    angles = 2 * np.pi * np.arange(c) / c
    centres0 = 2.4 * np.column_stack([np.cos(angles), np.sin(angles)])
    x0 = centres0[labels] + rng.normal(0.0, 1.0, (n, 2))
    centres1 = rng.normal(0.0, 3.0, (c, 5))
    x1 = centres1[labels] + rng.normal(0.0, 1.5, (n, 5))
    return [x0, x1], labels


def write_manifest(directory, views, labels=None, kind: str = "features") -> Path:
    """Write ``views`` as CSVs plus a manifest JSON into ``directory``; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    names = []
    for i, v in enumerate(views):
        name = f"view{i}.csv"
        np.savetxt(directory / name, np.asarray(v), delimiter=",", fmt="%.17g")
        names.append(name)
    manifest = {"kind": kind, "views": names, "n": int(np.asarray(views[0]).shape[0])}
    if labels is not None:
        np.savetxt(directory / "labels.csv", np.asarray(labels, dtype=np.int64), fmt="%d")
        manifest["labels"] = "labels.csv"
    path = directory / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path
