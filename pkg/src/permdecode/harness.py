"""Datasets, training, BLER evaluation, sweeps and the proposition audit.

Random streams
--------------
Every random draw comes from :func:`stream`, a ``numpy.random.Generator``
seeded with ``SeedSequence([seed, *keys])``. The keys used here:

====================  ==========================================
``(seed, 1, g, c)``    dataset, grid point ``g``, chunk ``c``
``(seed, 2)``          train/validation split
``(seed, 3)``          weight initialization
``(seed, 4, e)``       batch order in epoch ``e``
``(seed, 5, e)``       dropout masks in epoch ``e``
``(seed, 7, s)``       BLER evaluation shard ``s``
====================  ==========================================

BLER shards have a fixed size, so counts do not depend on how many
workers process them.
"""

from __future__ import annotations

import csv
import io
import itertools
import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import plc, rm
from .codes import Codebook, CodeFamily, enumerate_code, min_hamming_distance
from .md import md_decode_batch, ulam_decode_batch
from .neural import AdamState, MlpSpec, ModelWeights, adam_step, init_weights, load_model, loss_and_grad, predict
from .perm import perms_to_matrices

log = logging.getLogger(__name__)

ChannelParams = plc.PlcParams | rm.RmParams
SHARD_SIZE = 10_000
DATA_CHUNK = 50_000


def stream(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))


def channel_tag(params: ChannelParams) -> str:
    if isinstance(params, rm.RmParams):
        return "rm"
    return "plc_sync" if params.is_synchronized else "plc"


def channel_outputs(params: ChannelParams, codewords: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    if isinstance(params, plc.PlcParams):
        return plc.transmit_batch(codewords, params, rng)
    if isinstance(params, rm.RmParams):
        return rm.transmit_batch(codewords, params, rng)
    raise TypeError(f"unsupported channel parameters {type(params).__name__}")


def _check_channel(cb: Codebook, params: ChannelParams) -> None:
    if isinstance(params, rm.RmParams) and params.n != cb.n:
        raise ValueError(f"{params.n} charge levels for a code of length {cb.n}")
    if isinstance(params, plc.PlcParams):
        params.check_length(cb.n)


# -- datasets ---------------------------------------------------------------


@dataclass
class Dataset:
    inputs: np.ndarray
    targets: np.ndarray
    labels: np.ndarray  # grid point that produced each pair

    def __len__(self) -> int:
        return len(self.targets)

    def subset(self, idx: np.ndarray) -> Dataset:
        return Dataset(self.inputs[idx], self.targets[idx], self.labels[idx])


def repetitions(delta: int, grid_size: int) -> list[int]:
    """Split ``delta`` passes over the codebook among grid points; earlier points get the remainder."""
    base, extra = divmod(delta, grid_size)
    return [base + (g < extra) for g in range(grid_size)]


def generate_dataset(cb: Codebook, grid: Sequence[ChannelParams], delta: int, seed: int) -> Dataset:
    """Pass every codeword through each grid point's channel; ``delta`` passes in total.

    Each codeword appears exactly ``delta`` times. Pairs are laid out grid
    point by grid point, and within one point codeword by codeword.
    """
    if not grid:
        raise ValueError("empty noise grid")
    if delta < 1:
        raise ValueError("delta must be positive")
    if len({channel_tag(p) for p in grid}) != 1 or len({type(p) for p in grid}) != 1:
        raise ValueError("grid mixes channel kinds")
    for p in grid:
        _check_channel(cb, p)
    words = cb.as_array()
    inputs, targets, labels = [], [], []
    for g, (params, reps) in enumerate(zip(grid, repetitions(delta, len(grid)))):
        if reps == 0:
            continue
        block = np.repeat(words, reps, axis=0)
        for c, start in enumerate(range(0, len(block), DATA_CHUNK)):
            part = block[start : start + DATA_CHUNK]
            inputs.append(channel_outputs(params, part, stream(seed, 1, g, c)))
            targets.append(part)
        labels.append(np.full(len(block), g, dtype=np.int64))
    return Dataset(np.concatenate(inputs), np.concatenate(targets), np.concatenate(labels))


# -- decoders ---------------------------------------------------------------


def block_errors(decoded: np.ndarray, sent: np.ndarray) -> int:
    """Rows where the decoded symbol vector differs from the codeword anywhere."""
    return int((np.asarray(decoded) != np.asarray(sent)).any(axis=1).sum())


class MlpDecoder:
    name = "mlp"

    def __init__(self, weights: ModelWeights):
        self.weights = weights

    def check(self, cb: Codebook, params: ChannelParams) -> None:
        spec = self.weights.spec
        if spec.n != cb.n:
            raise ValueError("model and codebook lengths differ")
        if spec.embedded != isinstance(params, rm.RmParams):
            raise ValueError(f"{spec.input_kind} model cannot decode channel {channel_tag(params)}")
        if not spec.embedded and spec.width != params.c_max:
            raise ValueError(f"model expects c_max={spec.width}, channel gives {params.c_max}")

    def __call__(self, outputs: np.ndarray) -> np.ndarray:
        out = np.empty((len(outputs), self.weights.spec.n), dtype=np.int64)
        for start in range(0, len(outputs), 4096):
            out[start : start + 4096] = predict(self.weights, outputs[start : start + 4096])
        return out


class MdDecoder:
    def __init__(self, cb: Codebook, erasure: bool):
        self.cb = cb
        self.erasure = erasure
        self.name = "md_erasure" if erasure else "md_plain"

    def check(self, cb: Codebook, params: ChannelParams) -> None:
        if not isinstance(params, plc.PlcParams) or params.c_max != cb.n:
            raise ValueError("minimum-distance decoding needs the synchronized PLC channel with c_max = n")

    def __call__(self, outputs: np.ndarray) -> np.ndarray:
        return md_decode_batch(outputs, self.cb, self.erasure)


class UlamDecoder:
    name = "ulam"

    def __init__(self, cb: Codebook):
        self.cb = cb

    def check(self, cb: Codebook, params: ChannelParams) -> None:
        if not isinstance(params, rm.RmParams):
            raise ValueError("Ulam decoding applies to the rank-modulation channel")

    def __call__(self, outputs: np.ndarray) -> np.ndarray:
        return ulam_decode_batch(outputs, self.cb)


Decoder = Callable[[np.ndarray], np.ndarray]


# -- BLER -------------------------------------------------------------------


@dataclass(frozen=True)
class BlerRecord:
    code: str
    n: int
    channel: str
    p_bg: float | None = None
    p_im: float | None = None
    p_pfd: float | None = None
    p_i: float | None = None
    p_d: float | None = None
    sigma1: float | None = None
    sigma2: float | None = None
    p_large: float | None = None
    decoder: str = ""
    trials: int = 0
    block_errors: int = 0
    bler: float = 0.0
    seed: int = 0

    @property
    def stderr(self) -> float:
        return math.sqrt(max(self.bler * (1 - self.bler), 0.0) / self.trials)

    def row(self) -> list[str]:
        return ["" if getattr(self, f.name) is None else str(getattr(self, f.name)) for f in fields(self)]


CSV_COLUMNS = [f.name for f in fields(BlerRecord)]


def _channel_fields(params: ChannelParams) -> dict:
    if isinstance(params, plc.PlcParams):
        return dict(p_bg=params.p_bg, p_im=params.p_im, p_pfd=params.p_pfd, p_i=params.p_i, p_d=params.p_d)
    return dict(sigma1=params.sigma1, sigma2=params.sigma2, p_large=params.p)


def count_errors(
    decoder: Decoder, cb: Codebook, params: ChannelParams, trials: int, seed: int, workers: int = 1
) -> int:
    words = cb.as_array()

    def shard(s: int) -> int:
        size = min(SHARD_SIZE, trials - s * SHARD_SIZE)
        rng = stream(seed, 7, s)
        sent = words[rng.integers(len(words), size=size)]
        return block_errors(decoder(channel_outputs(params, sent, rng)), sent)

    shards = range(math.ceil(trials / SHARD_SIZE))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return sum(pool.map(shard, shards))
    return sum(map(shard, shards))


def evaluate_bler(
    decoder: Decoder,
    cb: Codebook,
    params: ChannelParams,
    trials: int,
    seed: int,
    workers: int = 1,
    name: str | None = None,
) -> BlerRecord:
    """Send ``trials`` uniformly drawn codewords and count block errors."""
    if trials < 1:
        raise ValueError("trials must be positive")
    _check_channel(cb, params)
    if hasattr(decoder, "check"):
        decoder.check(cb, params)
    errors = count_errors(decoder, cb, params, trials, seed, workers)
    return BlerRecord(
        code=cb.family.label if cb.family else "custom",
        n=cb.n,
        channel=channel_tag(params),
        **_channel_fields(params),
        decoder=name or getattr(decoder, "name", "custom"),
        trials=trials,
        block_errors=errors,
        bler=errors / trials,
        seed=seed,
    )


def md_agreement(cb: Codebook, params: plc.PlcParams, trials: int, seed: int) -> dict:
    """Compare plain and erasure minimum-distance decoding on the same channel draws."""
    words = cb.as_array()
    rng = stream(seed, 8)
    sent = words[rng.integers(len(words), size=trials)]
    mats = plc.transmit_batch(sent, params, rng)
    plain = md_decode_batch(mats, cb, erasure=False)
    erased = md_decode_batch(mats, cb, erasure=True)
    has_erasure = mats.all(axis=1).any(axis=1) | mats.all(axis=2).any(axis=1)
    agree = (plain == erased).all(axis=1)
    return {
        "trials": trials,
        "agreement": float(agree.mean()),
        "with_erasures": int(has_erasure.sum()),
        "disagree_without_erasures": int((~agree & ~has_erasure).sum()),
    }


# -- training ---------------------------------------------------------------


@dataclass
class TrainConfig:
    delta: int
    noise_grid: list
    batch_size: int = 200
    lr: float = 1e-3
    max_epochs: int = 10
    seed: int = 0
    validation_fraction: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.validation_fraction < 0.5:
            raise ValueError("validation_fraction must lie in (0, 0.5)")
        if self.batch_size < 1 or self.max_epochs < 1 or self.delta < 1:
            raise ValueError("batch_size, max_epochs and delta must be positive")


@dataclass
class TrainTrace:
    losses: list[float] = field(default_factory=list)
    val_bler: list[float] = field(default_factory=list)
    best_epoch: int = 0


def _dataset_bler(w: ModelWeights, data: Dataset) -> float:
    return block_errors(MlpDecoder(w)(data.inputs), data.targets) / len(data)


def train_on(
    spec: MlpSpec, data: Dataset, config: TrainConfig, log_every: int | None = None
) -> tuple[ModelWeights, TrainTrace]:
    """Adam on ``data`` with a held-out validation split; keep the best epoch.

    The best epoch is the one with the lowest validation BLER, the earliest
    on ties.
    """
    if len(data) == 0:
        raise ValueError("empty dataset")
    order = stream(config.seed, 2).permutation(len(data))
    n_val = max(1, round(len(data) * config.validation_fraction))
    val, tr = data.subset(np.sort(order[:n_val])), data.subset(np.sort(order[n_val:]))

    w = init_weights(spec, np.random.SeedSequence([config.seed, 3]).generate_state(2))
    state = AdamState.for_weights(w, lr=config.lr)
    trace = TrainTrace()
    best, best_bler = None, math.inf
    for epoch in range(1, config.max_epochs + 1):
        perm = stream(config.seed, 4, epoch).permutation(len(tr))
        drop = stream(config.seed, 5, epoch)
        total = 0.0
        for start in range(0, len(tr), config.batch_size):
            idx = perm[start : start + config.batch_size]
            value, grads = loss_and_grad(w, tr.inputs[idx], tr.targets[idx], train=True, rng=drop)
            adam_step(w, grads, state)
            total += value * len(idx)
        trace.losses.append(total / len(tr))
        trace.val_bler.append(_dataset_bler(w, val))
        log.info("epoch %d loss %.5f val_bler %.5f", epoch, trace.losses[-1], trace.val_bler[-1])
        if trace.val_bler[-1] < best_bler:
            best, best_bler, trace.best_epoch = w.copy(), trace.val_bler[-1], epoch
    return best, trace


def train(spec: MlpSpec, cb: Codebook, config: TrainConfig) -> tuple[ModelWeights, TrainTrace]:
    if spec.n != cb.n:
        raise ValueError("model and codebook lengths differ")
    return train_on(spec, generate_dataset(cb, config.noise_grid, config.delta, config.seed), config)


# -- reference grids ----------------------------------------------------------


def plc_sync_grid(n: int, p_im: float = 0.001, p_pfd: float = 0.001) -> list[plc.PlcParams]:
    """Background-noise sweep for the synchronized channel: p_bg = 0.005 i, i = 1..10."""
    return [plc.PlcParams.synchronized(n, p_bg=round(0.005 * i, 10), p_im=p_im, p_pfd=p_pfd) for i in range(1, 11)]


def plc_unsync_grid(n: int, p_id: float, p_im: float = 0.001, p_pfd: float = 0.001) -> list[plc.PlcParams]:
    """p_bg = 0.001 + 0.003 i, i = 0..9, with p_i = p_d = ``p_id``, l_max = 1, c_max = n + 3."""
    return [
        plc.PlcParams(round(0.001 + 0.003 * i, 10), p_im, p_pfd, p_id, p_id, l_max=1, c_max=n + 3)
        for i in range(10)
    ]


def rm_grid(n: int, p: float, sigma2: float | None = None, sigma2_gap_multiple: float = 2.0) -> list[rm.RmParams]:
    """sigma1 = 0.05 i, i = 1..10. Without ``sigma2`` it is a multiple of the level gap."""
    levels = rm.default_levels(n)
    if sigma2 is None:
        sigma2 = sigma2_gap_multiple * min(b - a for a, b in zip(levels, levels[1:]))
    return [rm.RmParams(round(0.05 * i, 10), sigma2, p, levels) for i in range(1, 11)]


# -- sweeps -------------------------------------------------------------------


class ConfigError(ValueError):
    pass


PLC_KEYS = {"p_bg", "p_im", "p_pfd", "p_i", "p_d", "l_max", "c_max"}
RM_KEYS = {"sigma1", "sigma2", "p", "levels", "sigma2_gap_multiple"}


@dataclass
class SweepConfig:
    family: str
    n: int
    channel: str  # "plc" or "rm"
    fixed: dict
    param: str
    values: list[float]
    decoders: list[str]
    trials: int
    seed: int
    model: str | None = None

    @classmethod
    def from_dict(cls, raw: dict, base: Path | None = None) -> SweepConfig:
        try:
            ch = raw["channel"]
            sweep = ch["sweep"]
            model = raw.get("model")
            if model is not None and base is not None and not Path(model).is_absolute():
                model = str(base / model)
            cfg = cls(
                family=str(raw["family"]),
                n=int(raw["n"]),
                channel=str(ch["kind"]),
                fixed=dict(ch.get("fixed") or {}),
                param=str(sweep["param"]),
                values=[float(v) for v in sweep["values"]],
                decoders=[str(d) for d in raw["decoders"]],
                trials=int(raw.get("trials", 100_000)),
                seed=int(raw.get("seed", 0)),
                model=model,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed sweep config: {exc!r}") from exc
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> SweepConfig:
        import yaml

        path = Path(path)
        try:
            raw = yaml.safe_load(path.read_text())
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read sweep config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("sweep config must be a mapping")
        return cls.from_dict(raw, base=path.parent)

    def validate(self) -> None:
        if not self.values:
            raise ConfigError("empty sweep grid")
        if not self.decoders:
            raise ConfigError("no decoders listed")
        keys = {"plc": PLC_KEYS, "rm": RM_KEYS}.get(self.channel)
        if keys is None:
            raise ConfigError(f"unknown channel kind {self.channel!r}")
        unknown = (set(self.fixed) | {self.param}) - keys
        if unknown:
            raise ConfigError(f"unknown {self.channel} parameters {sorted(unknown)}")
        for d in self.decoders:
            if d not in {"mlp", "md_plain", "md_erasure", "ulam"}:
                raise ConfigError(f"unknown decoder {d!r}")
        if "mlp" in self.decoders and not self.model:
            raise ConfigError("decoder mlp needs a model file")
        if self.trials < 1:
            raise ConfigError("trials must be positive")

    def grid(self) -> list[ChannelParams]:
        out = []
        for v in self.values:
            kw = dict(self.fixed)
            kw[self.param] = v
            try:
                out.append(self._params(kw))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"invalid channel parameters {kw}: {exc}") from exc
        return out

    def _params(self, kw: dict) -> ChannelParams:
        if self.channel == "plc":
            kw.setdefault("c_max", self.n)
            return plc.PlcParams(**kw)
        levels = tuple(kw.pop("levels", None) or rm.default_levels(self.n))
        multiple = kw.pop("sigma2_gap_multiple", None)
        if multiple is not None:
            kw["sigma2"] = float(multiple) * min(b - a for a, b in zip(levels, levels[1:]))
        return rm.RmParams(kw["sigma1"], kw["sigma2"], kw.get("p", 0.0), levels)


def build_decoders(cfg: SweepConfig, cb: Codebook) -> list:
    out = []
    for name in cfg.decoders:
        if name == "mlp":
            try:
                out.append(MlpDecoder(load_model(cfg.model)[1]))
            except OSError as exc:
                raise ConfigError(f"cannot load model {cfg.model}: {exc}") from exc
        elif name == "ulam":
            out.append(UlamDecoder(cb))
        else:
            out.append(MdDecoder(cb, erasure=name == "md_erasure"))
    return out


def records_csv(records: Sequence[BlerRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(r.row() for r in records)
    return buf.getvalue()


def write_csv(records: Sequence[BlerRecord], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(records_csv(records))
    tmp.replace(path)


def run_sweep(cfg: SweepConfig, out: str | Path | None = None, workers: int = 1) -> list[BlerRecord]:
    """One record per grid point per decoder, grid point ``k`` seeded with ``seed + k``.

    All decoders at a grid point see the same channel draws.
    """
    cfg.validate()
    cb = enumerate_code(CodeFamily(cfg.family, cfg.n))
    grid = cfg.grid()
    decoders = build_decoders(cfg, cb)
    records = []
    for k, params in enumerate(grid):
        for dec in decoders:
            records.append(evaluate_bler(dec, cb, params, cfg.trials, cfg.seed + k, workers))
            log.info("%s", records[-1])
    if out is not None:
        write_csv(records, out)
    return records


def monotone_within(records: Sequence[BlerRecord], sigmas: float = 3.0) -> bool:
    """True if BLER never drops by more than ``sigmas`` combined standard errors."""
    for a, b in itertools.pairwise(records):
        tol = sigmas * math.hypot(a.stderr, b.stderr)
        if b.bler < a.bler - tol:
            return False
    return True


# -- proposition audit --------------------------------------------------------


@dataclass
class AuditReport:
    min_distance: int
    budget: int
    codewords: int
    patterns: int
    failures: list[tuple[int, tuple]]  # (codeword index, pattern)

    @property
    def ok(self) -> bool:
        return not self.failures


def error_patterns(n: int, budget: int):
    """All (flips, impulse_cols, pfd_rows) with ``len(flips)+len(cols)+len(rows) <= budget``.

    Indices are 0-based; flips avoid erased rows and columns.
    """
    for e2 in range(budget + 1):
        for cols in itertools.combinations(range(n), e2):
            for e3 in range(budget - e2 + 1):
                for rows in itertools.combinations(range(n), e3):
                    cells = [(r, c) for r in range(n) if r not in rows for c in range(n) if c not in cols]
                    for e1 in range(budget - e2 - e3 + 1):
                        for flips in itertools.combinations(cells, e1):
                            yield flips, cols, rows


def proposition_audit(cb: Codebook, budget: int | None = None, limit: int = 10**8) -> AuditReport:
    """Erasure-decode every codeword under every pattern of at most ``budget`` errors.

    ``budget`` defaults to ``d - 1`` for the code's minimum Hamming distance
    ``d``, the largest mix of flips, impulses and disturbances the code is
    guaranteed to absorb.
    """
    if len(cb) < 2:
        return AuditReport(cb.n if len(cb) else 0, budget or 0, len(cb), 0, [])
    d = min_hamming_distance(cb)
    budget = d - 1 if budget is None else budget
    n = cb.n
    # upper bound on the pattern count: choose up to `budget` of the n*n cells, n columns, n rows
    bound = sum(math.comb(n * n + 2 * n, e) for e in range(budget + 1))
    if len(cb) * bound > limit:
        raise ValueError("codebook too large for an exhaustive audit")
    patterns = list(error_patterns(n, budget))
    flip = np.zeros((len(patterns), n, n), dtype=np.uint8)
    cols = np.zeros((len(patterns), n), dtype=bool)
    rows = np.zeros((len(patterns), n), dtype=bool)
    for k, (fl, cs, rs) in enumerate(patterns):
        for r, c in fl:
            flip[k, r, c] = 1
        cols[k, list(cs)] = True
        rows[k, list(rs)] = True
    words = cb.as_array()
    clean = perms_to_matrices(words)
    failures = []
    for i, y in enumerate(clean):
        m = y[None] ^ flip
        m[np.broadcast_to(cols[:, None, :], m.shape)] = 1
        m[np.broadcast_to(rows[:, :, None], m.shape)] = 1
        decoded = md_decode_batch(m, cb, erasure=True)
        for k in np.flatnonzero((decoded != words[i]).any(axis=1)):
            failures.append((i + 1, patterns[k]))
    return AuditReport(d, budget, len(cb), len(patterns), failures)
