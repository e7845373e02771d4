"""Exit criteria. Each test records one PASS/FAIL line, shown in the pytest summary."""

import contextlib
import itertools
import time

import numpy as np
import pytest

from permdecode.codes import CodeFamily, enumerate_code, min_hamming_distance
from permdecode.gradcheck import run_gradcheck
from permdecode.harness import (
    MdDecoder,
    MlpDecoder,
    SweepConfig,
    TrainConfig,
    block_errors,
    evaluate_bler,
    monotone_within,
    plc_sync_grid,
    proposition_audit,
    run_sweep,
    train,
)
from permdecode.md import ulam_nearest
from permdecode.neural import MlpSpec, init_weights, param_count, save_model
from permdecode.perm import apply_translocation, matrix_to_perm, perm_to_matrix, perms_to_matrices
from permdecode.plc import PlcErrorPattern, PlcParams, apply_error_pattern
from permdecode.rm import default_levels, encode_charges, read_ranking

from .conftest import ACCEPTANCE_LINES


@contextlib.contextmanager
def criterion(label):
    start = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        ACCEPTANCE_LINES.append(f"FAIL  {label} ({time.perf_counter() - start:.1f}s): {exc!r}"[:300])
        raise
    ACCEPTANCE_LINES.append(f"PASS  {label} ({time.perf_counter() - start:.1f}s)")


def test_1_code_sizes():
    with criterion("1 code sizes match the reference table"):
        start = time.perf_counter()
        sizes = {
            (tag, n): len(enumerate_code(CodeFamily(tag, n)))
            for tag, n in [("tenengolts_even", 6), ("tenengolts_even", 7), ("tenengolts_even", 8),
                           ("interleaved", 9), ("interleaved", 12)]
        }
        assert sizes == {
            ("tenengolts_even", 6): 56,
            ("tenengolts_even", 7): 360,
            ("tenengolts_even", 8): 2544,
            ("interleaved", 9): 27,
            ("interleaved", 12): 1728,
        }
        assert time.perf_counter() - start < 10


def test_2_parameter_counts():
    with criterion("2 parameter counts match the reference table"):
        start = time.perf_counter()
        table = [
            (MlpSpec.plc(6, 9, 128), 44_708), (MlpSpec.plc(6, 6, 128), 42_404),
            (MlpSpec.plc(7, 10, 128), 48_433), (MlpSpec.plc(7, 7, 128), 45_745),
            (MlpSpec.plc(8, 11, 128), 52_672), (MlpSpec.plc(8, 8, 128), 49_600),
            (MlpSpec.plc(8, 11, 256), 170_816), (MlpSpec.plc(8, 8, 256), 164_672),
            (MlpSpec.rm(9, 64), 18_914), (MlpSpec.rm(12, 64), 27_104),
        ]
        for spec, expected in table:
            assert param_count(spec) == expected, spec
            assert init_weights(spec, 0).tally() == expected, spec
        assert time.perf_counter() - start < 1


def test_3_proposition_audit(c6e):
    with criterion("3 erasure MD decoding corrects all e1+e2+e3 <= 2 patterns on C6e"):
        start = time.perf_counter()
        pair_min = min(
            sum(a != b for a, b in zip(p, q)) for p, q in itertools.combinations(c6e.codewords, 2)
        )
        assert pair_min == 3 == min_hamming_distance(c6e)
        report = proposition_audit(c6e)
        assert report.budget == 2 and report.codewords == 56 and report.patterns > 0
        assert report.failures == []
        assert time.perf_counter() - start < 60


def test_4_single_translocation(il9):
    with criterion("4 all 27 x 72 single translocations of C9IL decode uniquely"):
        start = time.perf_counter()
        cases = 0
        for c in il9:
            for i, j in itertools.permutations(range(1, 10), 2):
                res = ulam_nearest(apply_translocation(c, i, j), il9)
                assert res.codeword == c and not res.tie, (c, i, j)
                cases += 1
        assert cases == 27 * 72
        assert time.perf_counter() - start < 60


def test_5_gradients():
    with criterion("5 analytic gradients match central differences (rel err < 1e-4, 20 configs)"):
        start = time.perf_counter()
        results = run_gradcheck(configs=20, seed=0)
        assert len(results) >= 20
        assert all(r.spec.hidden <= 16 for r in results)
        worst = max(r.max_rel_error for r in results)
        assert worst < 1e-4, worst
        assert time.perf_counter() - start < 60


def test_6_examples():
    with criterion("6 worked matrix, PLC and RM examples reproduced bit-exactly"):
        ex1 = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
        assert np.array_equal(perm_to_matrix((1, 2, 4, 3)), ex1)
        assert matrix_to_perm(ex1) == (1, 2, 4, 3)
        ex2 = np.array([[1, 0, 0, 1, 0, 0, 0], [1, 1, 1, 1, 0, 0, 0], [0, 0, 1, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0, 0]])
        pat = PlcErrorPattern(insertions={5: [1]}, deletions=frozenset({2}), pfd_rows=frozenset({2}))
        assert np.array_equal(apply_error_pattern((1, 2, 4, 3), pat, PlcParams(l_max=1, c_max=7)).bits, ex2)
        charges = encode_charges((1, 2, 5, 3, 4, 9, 6, 8, 7), default_levels(9))
        assert tuple(charges) == (1.5, 2.0, 3.0, 3.5, 2.5, 4.5, 5.5, 5.0, 4.0)
        assert read_ranking(charges) == (1, 2, 5, 3, 4, 9, 6, 8, 7)
        assert read_ranking((1.68, 1.76, 3.08, 3.68, 2.14, 4.72, 4.40, 5.12, 3.90)) == (1, 2, 5, 3, 4, 9, 7, 6, 8)
        assert apply_translocation((1, 2, 5, 3, 4, 9, 6, 8, 7), 9, 7) == (1, 2, 5, 3, 4, 9, 7, 6, 8)


# 1800 passes over 56 codewords, 180 per sync PLC grid point: 100,800 pairs
SMOKE = dict(delta=1800, max_epochs=10, seed=20240611)


def _smoke_train(c6e):
    cfg = TrainConfig(noise_grid=plc_sync_grid(6), **SMOKE)
    return train(MlpSpec.plc(6, 6, 128), c6e, cfg)


@pytest.fixture(scope="module")
def smoke_model(c6e):
    start = time.perf_counter()
    weights, trace = _smoke_train(c6e)
    return weights, trace, time.perf_counter() - start


def test_7_training_smoke(c6e, smoke_model):
    with criterion("7 desk-scale MLP on C6e: BLER 0 noiseless, <= 0.05 at p_bg=0.005, MD monotone"):
        weights, trace, elapsed = smoke_model
        assert SMOKE["delta"] * len(c6e) >= 100_000 and len(trace.losses) <= 10
        dec = MlpDecoder(weights)
        clean = perms_to_matrices(c6e.as_array())
        assert block_errors(dec(clean), c6e.as_array()) == 0
        noiseless = evaluate_bler(dec, c6e, PlcParams.synchronized(6), 100_000, 1)
        assert noiseless.bler == 0.0
        noisy = evaluate_bler(dec, c6e, PlcParams.synchronized(6, 0.005, 0.001, 0.001), 100_000, 2)
        assert noisy.bler <= 0.05, noisy
        md = [evaluate_bler(MdDecoder(c6e, False), c6e, p, 100_000, 3 + k) for k, p in enumerate(plc_sync_grid(6))]
        assert monotone_within(md, 3.0), [r.bler for r in md]
        assert md[-1].bler > md[0].bler
        assert elapsed < 15 * 60
        ACCEPTANCE_LINES.append(
            f"      mlp bler@p_bg=0.005: {noisy.bler:.2e}; md bler over grid: "
            + " ".join(f"{r.bler:.1e}" for r in md)
        )


def test_8_determinism(c6e, smoke_model, tmp_path):
    with criterion("8 identical seeds give byte-identical model files and sweep CSVs"):
        weights, _, _ = smoke_model
        again, _ = _smoke_train(c6e)
        save_model(weights, tmp_path / "a.pmnd")
        save_model(again, tmp_path / "b.pmnd")
        assert (tmp_path / "a.pmnd").read_bytes() == (tmp_path / "b.pmnd").read_bytes()
        raw = {
            "family": "tenengolts_even",
            "n": 6,
            "channel": {
                "kind": "plc",
                "fixed": {"p_im": 0.001, "p_pfd": 0.001},
                "sweep": {"param": "p_bg", "values": [0.005, 0.02, 0.05]},
            },
            "decoders": ["md_plain", "md_erasure", "mlp"],
            "model": str(tmp_path / "a.pmnd"),
            "trials": 20_000,
            "seed": 9,
        }
        cfg = SweepConfig.from_dict(raw)
        run_sweep(cfg, tmp_path / "a.csv")
        run_sweep(SweepConfig.from_dict(raw), tmp_path / "b.csv", workers=2)
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
