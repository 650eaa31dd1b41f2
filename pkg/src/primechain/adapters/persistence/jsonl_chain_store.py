"""JSON-lines Adapter for the Chain Store."""

import json
import logging
from pathlib import Path
from typing import Optional

from pydantic import ValidationError

from primechain.domain.exceptions import StoreError
from primechain.domain.models import ChainRecord, ForestRecord, Provenance, RunManifest
from primechain.interfaces.chain_store import ChainStorePort, StoreRecord

logger = logging.getLogger(__name__)

_RECORD_TYPES: dict[str, type[StoreRecord]] = {
    "chain": ChainRecord,
    "forest": ForestRecord,
    "manifest": RunManifest,
}


class JsonLinesChainStore(ChainStorePort):
    """
    Chain store backed by an append-only text file, one JSON object per line.

    Integers are written as decimal strings so records stay bit-exact.
    """

    def __init__(self, path: str | Path = "primechain_store.jsonl"):
        self._path = Path(path)

    @property
    def path(self) -> Path:
        return self._path

    def append(self, record: StoreRecord) -> str:
        try:
            self._path.parent.mkdir(parents=True, exist_ok=True)
            with open(self._path, "a", encoding="utf-8") as f:
                f.write(record.model_dump_json() + "\n")
        except OSError as e:
            raise StoreError(f"Cannot write to chain store: {e}", path=str(self._path)) from e
        logger.debug(f"Appended {record.record_type} record {record.id} to {self._path}")
        return str(record.id)

    def read_all(self) -> list[StoreRecord]:
        if not self._path.exists():
            return []
        records: list[StoreRecord] = []
        try:
            with open(self._path, "r", encoding="utf-8") as f:
                for line_number, line in enumerate(f, start=1):
                    if line.strip():
                        records.append(self._parse(line, line_number))
        except OSError as e:
            raise StoreError(f"Cannot read chain store: {e}", path=str(self._path)) from e
        return records

    def find_by_provenance(self, provenance: Provenance, limit: int = 50) -> list[ChainRecord]:
        chains = [
            r for r in self.read_all() if isinstance(r, ChainRecord) and r.provenance == provenance
        ]
        return list(reversed(chains))[:limit]

    def latest(self, kind: str = "chain") -> Optional[StoreRecord]:
        if kind not in _RECORD_TYPES:
            raise StoreError(f"Unknown record kind '{kind}'", path=str(self._path))
        matching = [r for r in self.read_all() if r.record_type == kind]
        return matching[-1] if matching else None

    def _parse(self, line: str, line_number: int) -> StoreRecord:
        try:
            payload = json.loads(line)
            model = _RECORD_TYPES[payload.get("record_type", "chain")]
            return model.model_validate(payload)
        except (json.JSONDecodeError, AttributeError, KeyError, ValidationError) as e:
            raise StoreError(
                f"Malformed record on line {line_number}: {e}", path=str(self._path)
            ) from e
