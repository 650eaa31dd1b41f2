"""Tests for the JSON-lines chain store."""

import pytest

from primechain.adapters.persistence.jsonl_chain_store import JsonLinesChainStore
from primechain.domain.exceptions import StoreError
from primechain.domain.models import ChainRecord, ForestRecord, Provenance, RunManifest

BIG = 10**500 + 961


def chain_record(provenance: Provenance, primes=(2, 3, 5)) -> ChainRecord:
    return ChainRecord(
        rule="power:3/2:nearest",
        policy="nearest",
        primes=list(primes),
        provenance=provenance,
    )


def test_missing_file_reads_empty(store):
    assert store.read_all() == []
    assert store.latest() is None


def test_append_and_read_back_mixed_records(store):
    store.append(chain_record(Provenance.GENERATE))
    store.append(ForestRecord(exponent="3/2", limit=12, edges=[(2, 3)], roots=[2, 7]))
    store.append(RunManifest(command_line=["primechain", "tree", "12"], library_version="0.1.0"))

    records = store.read_all()
    assert [r.record_type for r in records] == ["chain", "forest", "manifest"]
    assert isinstance(records[1], ForestRecord)
    assert records[1].edges == [(2, 3)]


def test_large_integers_stay_exact(store, store_path):
    store.append(chain_record(Provenance.VERIFY, primes=(BIG,)))
    assert f'"{BIG}"' in store_path.read_text()
    assert store.read_all()[0].primes == [BIG]


def test_find_by_provenance_newest_first(store):
    first = store.append(chain_record(Provenance.SEARCH, (2, 3)))
    store.append(chain_record(Provenance.GENERATE))
    second = store.append(chain_record(Provenance.SEARCH, (2, 3, 5)))

    found = store.find_by_provenance(Provenance.SEARCH)
    assert [str(r.id) for r in found] == [second, first]
    assert len(store.find_by_provenance(Provenance.SEARCH, limit=1)) == 1


def test_latest_by_kind(store):
    store.append(chain_record(Provenance.GENERATE))
    store.append(RunManifest(command_line=["primechain"], library_version="0.1.0"))
    assert store.latest("chain").record_type == "chain"
    assert store.latest("manifest").record_type == "manifest"
    assert store.latest("forest") is None
    with pytest.raises(StoreError):
        store.latest("unknown")


def test_creates_parent_directory(tmp_path):
    store = JsonLinesChainStore(tmp_path / "nested" / "dir" / "store.jsonl")
    store.append(chain_record(Provenance.TREE))
    assert store.path.exists()


@pytest.mark.parametrize("line", ["not json", '{"record_type": "mystery"}', "[1, 2]"])
def test_malformed_line_reports_its_number(store, store_path, line):
    store.append(chain_record(Provenance.GENERATE))
    with open(store_path, "a") as f:
        f.write(line + "\n")
    with pytest.raises(StoreError) as info:
        store.read_all()
    assert "line 2" in info.value.message


def test_integers_past_the_int_conversion_limit(store, store_path):
    huge = 2**16500 + 1
    store.append(chain_record(Provenance.VERIFY, primes=(3, 13, huge)))
    record = store.read_all()[0]
    assert record.primes == [3, 13, huge]
    assert ChainRecord.model_validate_json(record.model_dump_json()).primes == [3, 13, huge]
