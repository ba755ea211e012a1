"""Reproducible surrogate-training datasets and their on-disk format.

A sample pairs a randomly drawn initial condition with the solution at the
fixed horizon, solved on a fine grid (default 256 x 256 nodes, h = L/255)
and block-averaged down by a factor 4 (default, to 64 x 64).  Conditioning
vectors are drawn uniformly from the sampling box.  Per-sample randomness
derives from the master seed (``rng.derive_seed``): sample k uses child
stream 2k for the initial condition and 2k+1 for the conditioning, so
content is independent of generation order and worker count.  A factorial
test set solves every combination of n_ic initial conditions (child
streams 2*k1) with n_c conditionings (child streams 2*k2+1).

File format (extension ``.cdr``)
--------------------------------
    bytes 0..3    magic "CDR1"
    bytes 4..7    container version, u32 little-endian (currently 1)
    bytes 8..15   manifest length K, u64 little-endian
    16..16+K      manifest, UTF-8 JSON with sorted keys
    16+K..        payload: per record, X0 then XM, row-major with the x
                  index outermost, little-endian float32 (float64 when the
                  manifest says so)

The manifest records the grid sizes, horizon, tolerance, PRNG algorithm
id, master seed, per-record child seeds, conditioning values, byte
offsets (relative to the payload start), CRC32 checksums and solver
statistics; factorial manifests additionally store the (k1, k2) index of
every record.  Rewriting a file from the same seed is byte-identical.
"""

from __future__ import annotations

import json
import logging
import struct
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .coefficients import (
    CONDITIONING_BOX,
    Conditioning,
    eval_coefficients,
    sample_conditioning,
)
from .grid import GridSpec, ScalarField, make_grid
from .initial import render_ic, sample_ic
from .integrate import RunStats, StepperConfig, integrate_to
from .rng import RNG_ALGORITHM, SplitMix64, derive_seed

logger = logging.getLogger(__name__)

MAGIC = b"CDR1"
CONTAINER_VERSION = 1

#: defaults matching the published data generation setup
FINE_N = 256
COARSE_FACTOR = 4
DOMAIN_LENGTH = 20.0


class DatasetFormatError(ValueError):
    """Malformed dataset file: bad magic/version, truncation, checksum."""


class PipelineError(RuntimeError):
    """Dataset generation failed (too many solver failures)."""


def coarse_grain(fine: ScalarField, factor: int = COARSE_FACTOR) -> ScalarField:
    """Block-average a fine field; each coarse value is the mean of its
    factor x factor node block."""
    n = fine.grid.n
    if factor < 1 or n % factor:
        raise ValueError(f"fine side {n} not divisible by factor {factor}")
    m = n // factor
    coarse = fine.values.reshape(m, factor, m, factor).mean(axis=(1, 3))
    return ScalarField(make_grid(m, fine.grid.length), coarse)


@dataclass
class SamplePair:
    x0: ScalarField
    xm: ScalarField
    c: Conditioning
    seed_ic: int
    seed_c: int
    stats: RunStats


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PipelineConfig:
    fine_n: int = FINE_N
    coarse_factor: int = COARSE_FACTOR
    length: float = DOMAIN_LENGTH
    t_final: float = 1.5
    tol: float = 1e-6
    dt_init0: float = 1e-4
    dtype: str = "float32"  # payload dtype; solver always runs in float64

    def stepper(self) -> StepperConfig:
        return StepperConfig(tol=self.tol, dt_init0=self.dt_init0, t_final=self.t_final)

    def fine_grid(self) -> GridSpec:
        return make_grid(self.fine_n, self.length)


def solve_sample(seed_ic: int, seed_c: int, pipe: PipelineConfig) -> SamplePair:
    """Solve one (initial condition, conditioning) pair from its child seeds."""
    grid = pipe.fine_grid()
    ic = sample_ic(SplitMix64(seed_ic), grid)
    c = sample_conditioning(SplitMix64(seed_c))
    x0 = render_ic(ic, grid)
    coeff = eval_coefficients(grid, c)
    xm, stats = integrate_to(x0, coeff, pipe.stepper())
    return SamplePair(
        x0=coarse_grain(x0, pipe.coarse_factor),
        xm=coarse_grain(xm, pipe.coarse_factor),
        c=c,
        seed_ic=seed_ic,
        seed_c=seed_c,
        stats=stats,
    )


def _record_bytes(pair: SamplePair, dtype: str) -> bytes:
    nptype = np.dtype(dtype).newbyteorder("<")
    return (
        np.ascontiguousarray(pair.x0.values).astype(nptype).tobytes()
        + np.ascontiguousarray(pair.xm.values).astype(nptype).tobytes()
    )


def _worker(args):
    index, extra, seed_ic, seed_c, pipe = args
    try:
        pair = solve_sample(seed_ic, seed_c, pipe)
    except Exception as exc:  # noqa: BLE001 - reported to the caller
        return index, extra, seed_ic, seed_c, None, repr(exc)
    return index, extra, seed_ic, seed_c, pair, None


def _run_samples(tasks, jobs: int):
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            yield from pool.map(_worker, tasks, chunksize=1)
    else:
        for task in tasks:
            yield _worker(task)


def _base_manifest(kind: str, seed: int, pipe: PipelineConfig) -> dict:
    return {
        "format": "cdr-dataset",
        "version": CONTAINER_VERSION,
        "kind": kind,
        "grid": {
            "fine_n": pipe.fine_n,
            "coarse_n": pipe.fine_n // pipe.coarse_factor,
            "length": pipe.length,
        },
        "time": {"t_final": pipe.t_final, "tol": pipe.tol, "dt_init0": pipe.dt_init0},
        "rng": {"algorithm": RNG_ALGORITHM, "master_seed": seed},
        "layout": "row-major-x-outer",
        "dtype": pipe.dtype,
        "coarse_operator": f"block-mean-{pipe.coarse_factor}x{pipe.coarse_factor}",
        "conditioning_box": [list(pair) for pair in CONDITIONING_BOX],
        "records": [],
        "skipped": [],
    }


def _assemble(path, manifest: dict, results, n_total: int) -> dict:
    """Collect worker results (already index-ordered), enforce the failure
    budget, and write the container."""
    payload = bytearray()
    failures = 0
    for index, extra, seed_ic, seed_c, pair, error in results:
        if pair is None:
            failures += 1
            logger.warning(
                "sample %d failed (seed_ic=%d, seed_c=%d): %s",
                index, seed_ic, seed_c, error,
            )
            manifest["skipped"].append(
                {"index": index, "seed_ic": seed_ic, "seed_c": seed_c, "error": error}
            )
            continue
        blob = _record_bytes(pair, manifest["dtype"])
        record = {
            "index": index,
            "seed_ic": seed_ic,
            "seed_c": seed_c,
            "c": list(pair.c.as_tuple()),
            "offset": len(payload),
            "nbytes": len(blob),
            "crc32": zlib.crc32(blob),
            "steps_accepted": pair.stats.steps_accepted,
            "steps_rejected": pair.stats.steps_rejected,
            "avg_dt": pair.stats.avg_dt,
        }
        record.update(extra)
        manifest["records"].append(record)
        payload += blob

    if failures > 0.01 * n_total:
        raise PipelineError(
            f"{failures} of {n_total} samples failed (> 1% budget), aborting"
        )
    if failures:
        logger.warning("skipped %d of %d samples", failures, n_total)

    blob = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", CONTAINER_VERSION))
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        fh.write(payload)
    return manifest


def gen_training_set(
    path,
    n: int = 10000,
    seed: int = 0,
    pipe: PipelineConfig | None = None,
    jobs: int = 1,
) -> dict:
    """Generate n independently sampled pairs; returns the manifest."""
    if n < 1:
        raise ValueError("need n >= 1")
    pipe = pipe or PipelineConfig()
    manifest = _base_manifest("train", seed, pipe)
    tasks = [
        (k, {}, derive_seed(seed, 2 * k), derive_seed(seed, 2 * k + 1), pipe)
        for k in range(n)
    ]
    return _assemble(path, manifest, _run_samples(tasks, jobs), n)


def gen_test_set(
    path,
    n_ic: int = 50,
    n_c: int = 50,
    seed: int = 0,
    pipe: PipelineConfig | None = None,
    jobs: int = 1,
) -> dict:
    """Generate the factorial test set: every (IC k1, conditioning k2) pair."""
    if n_ic < 1 or n_c < 1:
        raise ValueError("need n_ic >= 1 and n_c >= 1")
    pipe = pipe or PipelineConfig()
    manifest = _base_manifest("factorial-test", seed, pipe)
    ic_seeds = [derive_seed(seed, 2 * k1) for k1 in range(n_ic)]
    c_seeds = [derive_seed(seed, 2 * k2 + 1) for k2 in range(n_c)]
    manifest["factorial"] = {"n_ic": n_ic, "n_c": n_c, "ic_seeds": ic_seeds, "c_seeds": c_seeds}
    tasks = [
        (
            k1 * n_c + k2,
            {"k1": k1, "k2": k2},
            ic_seeds[k1],
            c_seeds[k2],
            pipe,
        )
        for k1 in range(n_ic)
        for k2 in range(n_c)
    ]
    return _assemble(path, manifest, _run_samples(tasks, jobs), n_ic * n_c)


def write_simulation(
    path,
    x0: ScalarField,
    xm: ScalarField,
    stats: RunStats,
    pipe: PipelineConfig,
    preset_name: str,
    c: Conditioning | None,
    seed_ic: int | None,
    seed_c: int | None,
) -> dict:
    """Persist one solver run as a single-record container (kind "simulate").

    Fields are stored at full grid resolution (no coarse-graining).
    """
    manifest = _base_manifest("simulate", seed_ic or 0, pipe)
    manifest["grid"] = {"fine_n": x0.grid.n, "coarse_n": x0.grid.n, "length": x0.grid.length}
    manifest["preset"] = preset_name
    blob = _record_bytes(
        SamplePair(x0, xm, c or Conditioning(0, 0, 0, 0), seed_ic or 0, seed_c or 0, stats),
        manifest["dtype"],
    )
    manifest["records"].append(
        {
            "index": 0,
            "seed_ic": seed_ic,
            "seed_c": seed_c,
            "c": list(c.as_tuple()) if c is not None else None,
            "offset": 0,
            "nbytes": len(blob),
            "crc32": zlib.crc32(blob),
            "steps_accepted": stats.steps_accepted,
            "steps_rejected": stats.steps_rejected,
            "avg_dt": stats.avg_dt,
        }
    )
    mblob = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", CONTAINER_VERSION))
        fh.write(struct.pack("<Q", len(mblob)))
        fh.write(mblob)
        fh.write(blob)
    return manifest


def regenerate_record(manifest: dict, record: dict) -> SamplePair:
    """Recompute one record standalone from its manifest seeds."""
    grid = manifest["grid"]
    time_cfg = manifest["time"]
    pipe = PipelineConfig(
        fine_n=grid["fine_n"],
        coarse_factor=grid["fine_n"] // grid["coarse_n"],
        length=grid["length"],
        t_final=time_cfg["t_final"],
        tol=time_cfg["tol"],
        dt_init0=time_cfg["dt_init0"],
        dtype=manifest["dtype"],
    )
    return solve_sample(record["seed_ic"], record["seed_c"], pipe)


def record_payload(manifest: dict, pair: SamplePair) -> bytes:
    """Serialize a sample exactly as it would appear in the file payload."""
    return _record_bytes(pair, manifest["dtype"])


# ---------------------------------------------------------------------------
# Reading
# ---------------------------------------------------------------------------


class DatasetFile:
    """Random-access reader for ``.cdr`` files with checksum verification."""

    def __init__(self, path):
        self.path = path
        self._fh = open(path, "rb")
        try:
            head = self._fh.read(16)
            if len(head) < 16:
                raise DatasetFormatError(f"{path}: truncated header")
            if head[:4] != MAGIC:
                raise DatasetFormatError(
                    f"{path}: bad magic {head[:4]!r}, expected {MAGIC!r}"
                )
            (version,) = struct.unpack("<I", head[4:8])
            if version != CONTAINER_VERSION:
                raise DatasetFormatError(
                    f"{path}: unsupported container version {version}"
                )
            (mlen,) = struct.unpack("<Q", head[8:16])
            blob = self._fh.read(mlen)
            if len(blob) < mlen:
                raise DatasetFormatError(f"{path}: truncated manifest")
            try:
                self.manifest = json.loads(blob.decode())
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise DatasetFormatError(f"{path}: unreadable manifest: {exc}") from exc
            self._payload_start = 16 + mlen
            self._fh.seek(0, 2)
            end = self._fh.tell()
            for rec in self.manifest["records"]:
                if self._payload_start + rec["offset"] + rec["nbytes"] > end:
                    raise DatasetFormatError(
                        f"{path}: truncated payload (record {rec['index']})"
                    )
        except Exception:
            self._fh.close()
            raise

    def __len__(self) -> int:
        return len(self.manifest["records"])

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def close(self):
        self._fh.close()

    def record_meta(self, k: int) -> dict:
        return self.manifest["records"][k]

    def read_record(self, k: int) -> tuple[np.ndarray, np.ndarray, dict]:
        """(X0, XM, record metadata) as float arrays of shape (m, m)."""
        rec = self.manifest["records"][k]
        self._fh.seek(self._payload_start + rec["offset"])
        blob = self._fh.read(rec["nbytes"])
        if len(blob) < rec["nbytes"]:
            raise DatasetFormatError(f"{self.path}: truncated record {rec['index']}")
        if zlib.crc32(blob) != rec["crc32"]:
            raise DatasetFormatError(
                f"{self.path}: checksum mismatch on record {rec['index']}"
            )
        m = self.manifest["grid"]["coarse_n"]
        nptype = np.dtype(self.manifest["dtype"]).newbyteorder("<")
        flat = np.frombuffer(blob, dtype=nptype)
        if flat.size != 2 * m * m:
            raise DatasetFormatError(
                f"{self.path}: record {rec['index']} has {flat.size} values, "
                f"expected {2 * m * m}"
            )
        # copies: frombuffer views are read-only
        return (
            flat[: m * m].reshape(m, m).copy(),
            flat[m * m :].reshape(m, m).copy(),
            rec,
        )

    def factorial_record(self, k1: int, k2: int) -> tuple[np.ndarray, np.ndarray, dict]:
        """Look up a factorial record by its (k1, k2) index, not file order."""
        fact = self.manifest.get("factorial")
        if fact is None:
            raise DatasetFormatError(f"{self.path}: not a factorial dataset")
        for k, rec in enumerate(self.manifest["records"]):
            if rec.get("k1") == k1 and rec.get("k2") == k2:
                return self.read_record(k)
        raise KeyError(f"no record with (k1, k2) = ({k1}, {k2})")
