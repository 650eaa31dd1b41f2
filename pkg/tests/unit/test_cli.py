"""End-to-end tests of the command line through ``main``."""

from pathlib import Path

import pytest

from primechain.cli.main import (
    EXIT_MISMATCH,
    EXIT_PASS,
    EXIT_UNDECIDABLE,
    EXIT_USAGE,
    exit_code_for,
    main,
)
from primechain.domain import constants
from primechain.domain.exceptions import (
    EmptyIntersectionError,
    InfeasibleError,
    ParseError,
    PrecisionExhaustedError,
)


def manifests(records):
    return [r for r in records if r["record_type"] == "manifest"]


def chains(records):
    return [r for r in records if r["record_type"] == "chain"]


class TestUsage:
    def test_missing_command(self, run_cli):
        code, records = run_cli()
        assert code == EXIT_USAGE
        assert records == []

    def test_unknown_target(self, run_cli):
        code, _ = run_cli("verify", "nonsense")
        assert code == EXIT_USAGE

    @pytest.mark.parametrize(
        "error,code",
        [
            (ParseError("bad"), EXIT_USAGE),
            (PrecisionExhaustedError(step=3, horizon=3), EXIT_UNDECIDABLE),
            (InfeasibleError(step=2, window_lo=10, window_hi=12), EXIT_MISMATCH),
            (EmptyIntersectionError(level=1), EXIT_MISMATCH),
        ],
    )
    def test_exit_code_mapping(self, error, code):
        assert exit_code_for(error) == code


class TestVerify:
    def test_wright(self, run_cli, capsys):
        code, records = run_cli("verify", "wright", "3")
        assert code == EXIT_PASS
        assert "PASS (3 terms)" in capsys.readouterr().out
        stored = chains(records)[-1]
        assert stored["primes"] == ["3", "13", "16381"]
        assert stored["provenance"] == "verify"
        assert manifests(records)[-1]["exit_code"] == EXIT_PASS

    def test_mills(self, run_cli):
        code, records = run_cli("verify", "mills", "3")
        assert code == EXIT_PASS
        assert chains(records)[-1]["primes"] == ["2", "11", "1361"]

    def test_mills_beyond_the_printed_digits(self, run_cli, capsys):
        code, records = run_cli("verify", "mills", "6")
        assert code == EXIT_UNDECIDABLE
        assert "UNDECIDABLE at index 5" in capsys.readouterr().out
        assert manifests(records)[-1]["exit_code"] == EXIT_UNDECIDABLE

    def test_concat(self, run_cli):
        code, records = run_cli("verify", "concat")
        assert code == EXIT_PASS
        assert chains(records)[-1]["primes"] == [str(p) for p in constants.CONCAT_PRIMES]

    def test_three_halves(self, run_cli):
        code, records = run_cli("verify", "power-3-2")
        assert code == EXIT_PASS
        assert len(chains(records)[-1]["primes"]) == 13

    @pytest.mark.parametrize(
        "alias,target,depth",
        [
            ("plouffe54", "power-5-4", ("4",)),
            ("plouffe32", "power-3-2", ("5",)),
            ("appendix-s50", "s50", ()),
        ],
    )
    def test_older_target_names(self, run_cli, alias, target, depth):
        code, records = run_cli("verify", alias, *depth)
        assert code == EXIT_PASS
        assert chains(records)[-1]["notes"]["target"] == target
        assert manifests(records)[-1]["exit_code"] == EXIT_PASS

    def test_alias_matches_canonical_target(self, run_cli):
        run_cli("verify", "plouffe32", "6")
        _, records = run_cli("verify", "power-3-2", "6")
        aliased, canonical = chains(records)[-2:]
        assert aliased["primes"] == canonical["primes"]


class TestGenerate:
    def test_named_seed(self, run_cli):
        code, records = run_cli("generate", "power-3-2", "power:3/2", "5")
        assert code == EXIT_PASS
        record = chains(records)[-1]
        assert record["primes"] == ["2", "3", "5", "11", "37"]
        assert record["provenance"] == "generate"
        assert record["seed_digits"] == constants.THREE_HALVES_SEED.digits

    def test_seed_runs_out(self, run_cli, capsys):
        code, _ = run_cli("generate", "power-3-2", "power:3/2", "14")
        assert code == EXIT_UNDECIDABLE
        assert "seed exhausted at index 13" in capsys.readouterr().out

    def test_seed_file(self, run_cli, tmp_path: Path):
        seed_file = tmp_path / "seed.txt"
        seed_file.write_text("# a(0) for the 3/2 chain\n2.03823915478206876746\n34908626\n")
        code, records = run_cli("generate", str(seed_file), "power:3/2", "6")
        assert code == EXIT_PASS
        assert chains(records)[-1]["primes"][-1] == "223"

    def test_unknown_seed(self, run_cli):
        code, records = run_cli("generate", "no-such-seed", "power:3/2", "3")
        assert code == EXIT_USAGE
        assert manifests(records)[-1]["exit_code"] == EXIT_USAGE

    def test_bad_rule(self, run_cli):
        code, _ = run_cli("generate", "power-3-2", "spiral:2", "3")
        assert code == EXIT_USAGE


class TestRecover:
    def test_from_prime_list(self, run_cli, tmp_path: Path, capsys):
        chain_file = tmp_path / "chain.txt"
        chain_file.write_text(" ".join(str(p) for p in constants.THREE_HALVES_PRIMES) + "\n")
        code, records = run_cli("recover", str(chain_file))
        assert code == EXIT_PASS
        assert "seed: 2.038239154782" in capsys.readouterr().out
        record = chains(records)[-1]
        assert record["provenance"] == "recover"
        assert record["seed_digits"].startswith("2.038239154782")

    def test_from_store(self, run_cli, store_path: Path):
        run_cli("generate", "power-3-2", "power:3/2", "6")
        code, records = run_cli("recover", str(store_path))
        assert code == EXIT_PASS
        generated, recovered = chains(records)[-2:]
        assert recovered["provenance"] == "recover"
        assert recovered["primes"] == generated["primes"]

    @pytest.mark.parametrize("rule,seed,count", [("power:3/2", "power-3-2", "8"), ("power:5/4", "power-5-4", "6")])
    def test_recovered_seed_file_regenerates_the_chain(
        self, run_cli, store_path: Path, tmp_path: Path, rule, seed, count
    ):
        start = () if rule == "power:3/2" else ("--start-index", "1")
        run_cli("generate", seed, rule, count, *start)
        _, records = run_cli("recover", str(store_path), "--rule", rule)
        original, recovered = chains(records)[-2:]
        seed_file = tmp_path / "recovered_seed.txt"
        seed_file.write_text(recovered["seed_digits"] + "\n")
        code, records = run_cli("generate", str(seed_file), rule, count, *start)
        assert code == EXIT_PASS
        assert chains(records)[-1]["primes"] == original["primes"]

    def test_unrealizable_chain(self, run_cli, tmp_path: Path):
        chain_file = tmp_path / "chain.txt"
        chain_file.write_text("2 3 11\n")
        code, _ = run_cli("recover", str(chain_file))
        assert code == EXIT_MISMATCH

    def test_missing_file(self, run_cli, tmp_path: Path):
        code, _ = run_cli("recover", str(tmp_path / "absent.txt"))
        assert code == EXIT_USAGE


class TestTree:
    def test_small_forest(self, run_cli, capsys):
        code, records = run_cli("tree", "12")
        assert code == EXIT_PASS
        out = capsys.readouterr().out
        assert "roots: 2" in out
        forest = [r for r in records if r["record_type"] == "forest"][-1]
        assert forest["edges"] == [[2, 3], [3, 5], [5, 11]]

    def test_path_and_dot(self, run_cli, tmp_path: Path, capsys):
        dot = tmp_path / "out" / "forest.dot"
        code, _ = run_cli("tree", "3331", "--path", "3331", "--dot", str(dot))
        assert code == EXIT_PASS
        assert "3331 <- 223 <- 37 <- 11 <- 5 <- 3 <- 2" in capsys.readouterr().out
        assert dot.read_text().startswith("digraph primes {")

    def test_limit_too_small(self, run_cli):
        code, records = run_cli("tree", "1")
        assert code == EXIT_USAGE
        assert manifests(records)[-1]["exit_code"] == EXIT_USAGE


class TestSearch:
    def test_profile_run_is_recorded(self, run_cli, search_config_path):
        code, records = run_cli(
            "--rng-seed", "3",
            "search", "default",
            "--config", str(search_config_path),
            "--rule", "power:3/2:nearest",
            "--target-length", "4",
            "--restarts", "1",
            "--max-steps", "10",
        )
        assert code == EXIT_PASS
        best = [r for r in chains(records) if r["notes"].get("best")]
        assert len(best) == 1
        assert best[0]["rule"] == "power:3/2:nearest"
        assert manifests(records)[-1]["rng_seeds"] == [3]

    def test_unknown_profile(self, run_cli, search_config_path):
        code, _ = run_cli("search", "nope", "--config", str(search_config_path))
        assert code == EXIT_USAGE


def test_main_runs_without_store_override(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("PRIMECHAIN_STORE", str(tmp_path / "env_store.jsonl"))
    assert main(["--log-level", "WARNING", "tree", "2"]) == EXIT_PASS
    assert (tmp_path / "env_store.jsonl").exists()
