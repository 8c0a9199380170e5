"""File-backed store: append-only records CSV, one JSON per model, config."""

from __future__ import annotations

import contextlib
import csv
import io
import json
import math
import os
import tempfile
from datetime import date
from pathlib import Path
from typing import Any, Iterable, Iterator

from .bands import BandConfig, BandMode, ErrorStats
from .errors import CorruptFile, NotFound, SchemaVersionMismatch, StoreError, StoreLocked
from .ingest import CSV_HEADER, AccessRecord, Granularity, parse_records
from .trendfit import TrendModel

try:
    import fcntl
except ImportError:  # pragma: no cover - non-POSIX
    fcntl = None

SCHEMA_VERSION = 1
MODEL_KEYS = (
    "schema_version", "user_id", "granularity", "origin", "n_train", "k", "m_offset",
    "changepoints", "delta", "gamma", "lambda", "alpha", "varsigma", "mu", "sigma", "band_mode",
)


def safe_filename(user_id: str) -> str:
    """Percent-encode every byte that is not an ASCII letter or digit."""
    out = []
    for ch in user_id:
        if ch.isascii() and ch.isalnum():
            out.append(ch)
        else:
            out.extend(f"%{b:02X}" for b in ch.encode("utf-8"))
    return "".join(out)


def format_real(x: float) -> str:
    """Shortest text that parses back to the identical double."""
    return repr(float(x))


def atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def model_to_dict(model: TrendModel, stats: ErrorStats, band: BandConfig) -> dict[str, Any]:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "user_id": model.user_id,
        "granularity": model.granularity.value,
        "origin": model.origin.isoformat(),
        "n_train": model.n_train,
        "k": model.k,
        "m_offset": model.m_offset,
        "changepoints": list(model.changepoints),
        "delta": list(model.delta),
        "gamma": list(model.gamma),
        "lambda": model.lam,
        "alpha": band.alpha,
        "varsigma": band.varsigma,
        "mu": stats.mu,
        "sigma": stats.sigma,
        "band_mode": BandMode(band.band_mode).value,
    }
    for key in ("k", "m_offset", "lambda", "alpha", "varsigma", "mu", "sigma"):
        if not math.isfinite(doc[key]):
            raise ValueError(f"{key} is not finite")
    return doc


def dumps_model(model: TrendModel, stats: ErrorStats, band: BandConfig) -> bytes:
    # json writes floats via repr(), the shortest round-trip form
    return (json.dumps(model_to_dict(model, stats, band), indent=2, allow_nan=False) + "\n").encode("utf-8")


def loads_model(data: bytes, source: str = "<bytes>") -> tuple[TrendModel, ErrorStats, BandConfig]:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptFile(f"{source}: {exc}") from None
    if not isinstance(doc, dict):
        raise CorruptFile(f"{source}: not a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionMismatch(f"{source}: schema_version {version!r}, expected {SCHEMA_VERSION}")
    missing = [k for k in MODEL_KEYS if k not in doc]
    if missing:
        raise CorruptFile(f"{source}: missing keys {missing}")
    try:
        model = TrendModel(
            user_id=doc["user_id"],
            k=float(doc["k"]),
            m_offset=float(doc["m_offset"]),
            changepoints=tuple(doc["changepoints"]),
            delta=tuple(doc["delta"]),
            gamma=tuple(doc["gamma"]),
            lam=float(doc["lambda"]),
            n_train=int(doc["n_train"]),
            granularity=Granularity.parse(doc["granularity"]),
            origin=date.fromisoformat(doc["origin"]),
        )
        band = BandConfig(alpha=float(doc["alpha"]), varsigma=float(doc["varsigma"]),
                          band_mode=BandMode(doc["band_mode"]))
        stats = ErrorStats(alpha=band.alpha, epsilon=(), xi=(), abs_err=(),
                           mu=float(doc["mu"]), sigma=float(doc["sigma"]))
    except (TypeError, ValueError) as exc:
        raise CorruptFile(f"{source}: {exc}") from None
    return model, stats, band


class Store:
    """A store directory::

        root/records.csv        append-only access records
        root/models/<user>.json one fitted model per user
        root/config.json        optional CLI defaults
        root/decisions.csv      decisions from the latest forecast run
    """

    def __init__(self, root: "str | os.PathLike"):
        self.root = Path(root)

    records_path = property(lambda self: self.root / "records.csv")
    models_dir = property(lambda self: self.root / "models")
    config_path = property(lambda self: self.root / "config.json")
    decisions_path = property(lambda self: self.root / "decisions.csv")
    lock_path = property(lambda self: self.root / ".lock")

    def init(self) -> "Store":
        self.models_dir.mkdir(parents=True, exist_ok=True)
        return self

    def exists(self) -> bool:
        return self.root.is_dir()

    @contextlib.contextmanager
    def lock(self) -> Iterator[None]:
        """Exclusive advisory lock for mutating commands; fails fast if held."""
        self.root.mkdir(parents=True, exist_ok=True)
        fh = open(self.lock_path, "a")
        try:
            if fcntl is not None:
                try:
                    fcntl.flock(fh.fileno(), fcntl.LOCK_EX | fcntl.LOCK_NB)
                except BlockingIOError:
                    raise StoreLocked(f"{self.root} is locked by another process") from None
            yield
        finally:
            if fcntl is not None:
                with contextlib.suppress(OSError):
                    fcntl.flock(fh.fileno(), fcntl.LOCK_UN)
            fh.close()

    # records

    def append_records(self, records: Iterable[AccessRecord]) -> int:
        records = list(records)
        if not records:
            return 0
        self.init()
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        if not self.records_path.exists() or self.records_path.stat().st_size == 0:
            writer.writerow(CSV_HEADER)
        for r in records:
            writer.writerow([r.user_id, r.date.isoformat(), format_real(r.duration)])
        try:
            with open(self.records_path, "a", encoding="utf-8", newline="") as fh:
                fh.write(buf.getvalue())
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            raise StoreError(f"cannot append to {self.records_path}: {exc}") from exc
        return len(records)

    def read_records(self) -> list[AccessRecord]:
        if not self.records_path.exists():
            return []
        result = parse_records(self.records_path.read_bytes(), "csv")
        if result.rejected:
            raise CorruptFile(f"{self.records_path}: {result.rejected[0]}")
        return result.records

    # models

    def model_path(self, user_id: str) -> Path:
        return self.models_dir / f"{safe_filename(user_id)}.json"

    def save_model(self, model: TrendModel, stats: ErrorStats, band: BandConfig) -> Path:
        path = self.model_path(model.user_id)
        try:
            atomic_write(path, dumps_model(model, stats, band))
        except OSError as exc:
            raise StoreError(f"cannot write {path}: {exc}") from exc
        return path

    def load_model(self, user_id: str) -> tuple[TrendModel, ErrorStats, BandConfig]:
        path = self.model_path(user_id)
        if not path.is_file():
            raise NotFound(f"no model for user {user_id!r}")
        return loads_model(path.read_bytes(), str(path))

    def model_users(self) -> list[str]:
        if not self.models_dir.is_dir():
            return []
        users = []
        for path in sorted(self.models_dir.glob("*.json")):
            model, _, _ = loads_model(path.read_bytes(), str(path))
            users.append(model.user_id)
        return sorted(users)

    # config

    def load_config(self) -> dict[str, Any]:
        if not self.config_path.exists():
            return {}
        try:
            cfg = json.loads(self.config_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CorruptFile(f"{self.config_path}: {exc}") from None
        if not isinstance(cfg, dict):
            raise CorruptFile(f"{self.config_path}: not a JSON object")
        return cfg

    def save_config(self, cfg: dict[str, Any]) -> None:
        atomic_write(self.config_path, (json.dumps(cfg, indent=2, sort_keys=True) + "\n").encode())
