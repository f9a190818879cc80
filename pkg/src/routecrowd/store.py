"""Embedded transactional persistence: a namespaced key-value store on
sqlite, holding tasks, truths, ledgers and worker state as JSON records.
State is fully recoverable after restart by reopening the same file."""

from __future__ import annotations

import json
import sqlite3
import threading
from pathlib import Path
from typing import Any, Iterator


class KeyValueStore:
    def __init__(self, path: str | Path = ":memory:"):
        self._conn = sqlite3.connect(str(path), check_same_thread=False)
        self._lock = threading.RLock()
        with self._lock:
            self._conn.execute(
                "CREATE TABLE IF NOT EXISTS kv ("
                " ns TEXT NOT NULL, key TEXT NOT NULL, value TEXT NOT NULL,"
                " PRIMARY KEY (ns, key))")
            self._conn.commit()

    def put(self, ns: str, key: str, value: Any) -> None:
        with self._lock:
            self._conn.execute(
                "INSERT OR REPLACE INTO kv (ns, key, value) VALUES (?, ?, ?)",
                (ns, key, json.dumps(value)))
            self._conn.commit()

    def get(self, ns: str, key: str, default: Any = None) -> Any:
        with self._lock:
            row = self._conn.execute(
                "SELECT value FROM kv WHERE ns = ? AND key = ?", (ns, key)).fetchone()
        return default if row is None else json.loads(row[0])

    def delete(self, ns: str, key: str) -> None:
        with self._lock:
            self._conn.execute("DELETE FROM kv WHERE ns = ? AND key = ?", (ns, key))
            self._conn.commit()

    def items(self, ns: str) -> Iterator[tuple[str, Any]]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT key, value FROM kv WHERE ns = ? ORDER BY key", (ns,)).fetchall()
        for key, value in rows:
            yield key, json.loads(value)

    def keys(self, ns: str) -> list[str]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT key FROM kv WHERE ns = ? ORDER BY key", (ns,)).fetchall()
        return [r[0] for r in rows]

    def close(self) -> None:
        with self._lock:
            self._conn.close()
