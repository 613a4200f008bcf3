"""Centroid-keyed classifier store with recency and k-NN retrieval.

Records are append-only with monotonically increasing ids. Persistence
writes IEEE-754 hex-float text plus SHA-256 checksums so a reloaded store
reproduces every model's margins bit for bit.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .features import SparseVector, cosine_distance
from .learners import Hyper, LinearModel

MANIFEST_NAME = "manifest.json"
CHECKSUMS_NAME = "checksums.txt"


@dataclass
class ClassifierRecord:
    id: int
    model: LinearModel
    key: SparseVector
    created_window: int
    created_at: int


class ClassifierStore:
    """Append-only key-value store of classifiers keyed by training centroid."""

    def __init__(self):
        self._records: list[ClassifierRecord] = []
        self._next_id = 0

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self):
        return iter(self._records)

    @property
    def records(self) -> list[ClassifierRecord]:
        return list(self._records)

    def put(self, model: LinearModel, key: SparseVector, created_window: int,
            created_at: int = 0) -> ClassifierRecord:
        """Append a record; the store assigns the next id."""
        record = ClassifierRecord(self._next_id, model, key, created_window,
                                  created_at)
        self._next_id += 1
        self._records.append(record)
        return record

    def recent(self, n: int) -> list[ClassifierRecord]:
        """The n most recently created records, newest first."""
        if n <= 0:
            return []
        return self._records[-n:][::-1]

    def relevant(self, query: SparseVector, k: int) -> list[ClassifierRecord]:
        """The k records whose keys are nearest to query by cosine distance
        (exact linear scan); ties prefer the newer record."""
        if k <= 0:
            return []
        ranked = sorted(self._records,
                        key=lambda r: (cosine_distance(r.key, query), -r.id))
        return ranked[:k]


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _vector_json(v: SparseVector) -> dict:
    return {
        "dim": v.dim,
        "indices": [int(i) for i in v.indices],
        "values": [float(x).hex() for x in v.values],
    }


def _vector_from_json(obj: dict) -> SparseVector:
    return SparseVector(
        int(obj["dim"]),
        np.array(obj["indices"], dtype=np.int64),
        np.array([float.fromhex(x) for x in obj["values"]], dtype=np.float64),
    )


def save(store: ClassifierStore, directory) -> None:
    """Write a store to a directory: manifest, per-record hex-float weight
    files, and a checksum list covering all of them."""
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    entries = []
    files: list[str] = []
    for rec in store:
        weights_file = f"model_{rec.id:04d}.weights"
        m = rec.model
        with open(root / weights_file, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(float(x).hex() for x in m.weights))
            fh.write("\n")
        entries.append({
            "id": rec.id,
            "kind": m.kind,
            "dim": m.dim,
            "bias": float(m.bias).hex(),
            "hyper": {"lr": m.hyper.lr, "l2": m.hyper.l2,
                      "epochs": m.hyper.epochs, "update_lr": m.hyper.update_lr,
                      "update_epochs": m.hyper.update_epochs,
                      "seed": m.hyper.seed},
            "trained_window": m.trained_window,
            "val_history": [[w, f] for w, f in m.val_history],
            "key": _vector_json(rec.key),
            "created_window": rec.created_window,
            "created_at": rec.created_at,
            "weights_file": weights_file,
        })
        files.append(weights_file)
    manifest = {"version": 1, "next_id": store._next_id, "records": entries}
    with open(root / MANIFEST_NAME, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=1)
        fh.write("\n")
    with open(root / CHECKSUMS_NAME, "w", encoding="utf-8", newline="\n") as fh:
        for name in [MANIFEST_NAME] + files:
            fh.write(f"{_sha256_file(root / name)}  {name}\n")


def load(directory) -> ClassifierStore:
    """Load a store saved by save(); checksum or structure problems raise a
    DataError naming the offending file."""
    root = Path(directory)
    checks = root / CHECKSUMS_NAME
    if not checks.is_file():
        raise DataError(f"missing checksum file: {checks}")
    for line in checks.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        try:
            digest, name = line.split(None, 1)
        except ValueError:
            raise DataError(f"malformed line in {checks}") from None
        target = root / name.strip()
        if not target.is_file():
            raise DataError(f"missing store file: {target}")
        if _sha256_file(target) != digest:
            raise DataError(f"checksum mismatch for {target}")
    manifest_path = root / MANIFEST_NAME
    if not manifest_path.is_file():
        raise DataError(f"missing manifest: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"corrupt manifest {manifest_path}: {exc}") from exc

    store = ClassifierStore()
    try:
        for entry in manifest["records"]:
            weights_path = root / entry["weights_file"]
            try:
                weights = np.array(
                    [float.fromhex(line) for line in
                     weights_path.read_text(encoding="utf-8").split()],
                    dtype=np.float64)
            except (OSError, ValueError) as exc:
                raise DataError(f"corrupt weights file {weights_path}: {exc}") from exc
            if len(weights) != int(entry["dim"]):
                raise DataError(f"corrupt weights file {weights_path}: "
                                f"expected {entry['dim']} values, got {len(weights)}")
            h = entry["hyper"]
            model = LinearModel(
                entry["kind"], int(entry["dim"]), weights,
                float.fromhex(entry["bias"]),
                Hyper(h["lr"], h["l2"], h["epochs"], h["update_lr"],
                      h["update_epochs"], h["seed"]),
                int(entry["trained_window"]),
                [(int(w), float(f)) for w, f in entry["val_history"]],
            )
            record = ClassifierRecord(int(entry["id"]), model,
                                      _vector_from_json(entry["key"]),
                                      int(entry["created_window"]),
                                      int(entry["created_at"]))
            store._records.append(record)
        store._next_id = int(manifest.get("next_id", 0))
    except (KeyError, TypeError) as exc:
        raise DataError(f"corrupt manifest {manifest_path}: {exc}") from exc
    if store._records:
        store._next_id = max(store._next_id,
                             max(r.id for r in store._records) + 1)
    return store
