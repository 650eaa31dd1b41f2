"""Shared fixtures for the primechain test suite."""

import json
from pathlib import Path

import pytest

from primechain.adapters.persistence.jsonl_chain_store import JsonLinesChainStore
from primechain.cli.main import main
from primechain.domain.bigreal import PrecisionPolicy

REPO_ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture
def policy() -> PrecisionPolicy:
    return PrecisionPolicy(start_bits=128, max_bits=1 << 16)


@pytest.fixture
def store_path(tmp_path: Path) -> Path:
    return tmp_path / "store.jsonl"


@pytest.fixture
def store(store_path: Path) -> JsonLinesChainStore:
    return JsonLinesChainStore(store_path)


@pytest.fixture
def search_config_path() -> Path:
    return REPO_ROOT / "config" / "search.yaml"


@pytest.fixture
def run_cli(store_path: Path, monkeypatch: pytest.MonkeyPatch):
    """Run the CLI against a temporary store; returns (exit code, stored records as dicts)."""
    monkeypatch.delenv("PRIMECHAIN_STORE", raising=False)

    def _run(*argv: str) -> tuple[int, list[dict]]:
        code = main(["--store", str(store_path), "--log-level", "WARNING", *argv])
        records = []
        if store_path.exists():
            records = [json.loads(line) for line in store_path.read_text().splitlines() if line]
        return code, records

    return _run
