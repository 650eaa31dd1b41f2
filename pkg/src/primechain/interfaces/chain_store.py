"""Chain Store Port (Interface)."""

from abc import ABC, abstractmethod
from typing import Optional, Union

from primechain.domain.models import ChainRecord, ForestRecord, Provenance, RunManifest

StoreRecord = Union[ChainRecord, ForestRecord, RunManifest]


class ChainStorePort(ABC):
    """Port (interface) for the append-only record store."""

    @abstractmethod
    def append(self, record: StoreRecord) -> str:
        """Append a record. Returns the ID of the stored record."""
        pass

    @abstractmethod
    def read_all(self) -> list[StoreRecord]:
        """Every record in the order it was appended."""
        pass

    @abstractmethod
    def find_by_provenance(self, provenance: Provenance, limit: int = 50) -> list[ChainRecord]:
        """Most recent chain records with the given provenance, newest first."""
        pass

    @abstractmethod
    def latest(self, kind: str = "chain") -> Optional[StoreRecord]:
        """The last record of ``kind`` ("chain", "forest" or "manifest")."""
        pass
