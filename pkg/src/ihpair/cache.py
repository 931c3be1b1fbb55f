"""File-backed result cache: one JSON file per entry, written atomically."""
from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Optional

CACHE_ENV = "IHPAIR_CACHE_DIR"
DEFAULT_DIR = ".ihpair-cache"


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def cache_dir(explicit: Optional[str] = None) -> Path:
    return Path(explicit or os.environ.get(CACHE_ENV) or DEFAULT_DIR)


def cache_key(payload: dict) -> str:
    return hashlib.sha256(canonical_json(payload).encode()).hexdigest()


class ResultCache:
    def __init__(self, directory: Optional[str] = None):
        self.dir = cache_dir(directory)

    def _path(self, key: str) -> Path:
        return self.dir / f"{key}.json"

    def get(self, key: str) -> Optional[dict]:
        path = self._path(key)
        try:
            with open(path, "r", encoding="utf-8") as fh:
                return json.load(fh)
        except (FileNotFoundError, json.JSONDecodeError):
            return None

    def put(self, key: str, record: dict) -> None:
        """Store a record unless the key is already present (entries never change)."""
        path = self._path(key)
        if path.exists():
            return
        self.dir.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=".tmp-", suffix=".json", dir=self.dir)
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(canonical_json(record))
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def stats(self) -> dict:
        if not self.dir.is_dir():
            return {"dir": str(self.dir), "entries": 0, "bytes": 0}
        files = [p for p in self.dir.glob("*.json") if not p.name.startswith(".tmp-")]
        return {"dir": str(self.dir), "entries": len(files), "bytes": sum(p.stat().st_size for p in files)}

    def clear(self) -> int:
        if not self.dir.is_dir():
            return 0
        n = 0
        for p in self.dir.glob("*.json"):
            p.unlink()
            n += 1
        return n
