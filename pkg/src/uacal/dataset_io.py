"""Binary dataset container (UACL) and the fitted-temperature text file.

UACL layout, all little-endian:

    magic   4 bytes  "UACL"
    version u32      1
    ndims   u8       1-4
    dims    ndims x u32
    n       u64      sample count
    then n records of { task_id: u32, expert_flat: u64, logits: |A| x f32 }

File length is exactly 9 + 4*ndims + 8 + n*(12 + 4*|A|) bytes. Logits are
stored f32 and computed on as f64 downstream.
"""

from __future__ import annotations

import os
import struct

import numpy as np

from .action_space import ActionGrid
from .calibration import CalibrationSample, LogitField, TemperatureModel
from .errors import FormatError, ValidationError

MAGIC = b"UACL"
VERSION = 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK64
    return h


def dataset_bytes(grid: ActionGrid, samples) -> bytes:
    parts = [MAGIC, struct.pack("<IB", VERSION, grid.ndim)]
    parts.append(struct.pack(f"<{grid.ndim}I", *grid.dims))
    parts.append(struct.pack("<Q", len(samples)))
    for s in samples:
        parts.append(struct.pack("<IQ", s.task_id, s.expert))
        parts.append(s.logits.values.astype("<f4").tobytes())
    return b"".join(parts)


def write_dataset(path, samples, grid: ActionGrid | None = None) -> str:
    """Serialize samples (all on one grid) to UACL; returns FNV-1a hex checksum.

    ``grid`` is required only for an empty sample list.
    """
    samples = list(samples)
    if samples:
        grids = {s.logits.grid for s in samples}
        if len(grids) != 1:
            raise ValidationError("all samples must share a single grid")
        grid = samples[0].logits.grid
    elif grid is None:
        raise ValidationError("an empty dataset needs an explicit grid")
    data = dataset_bytes(grid, samples)
    with open(path, "wb") as fh:
        fh.write(data)
    return f"{fnv1a64(data):016x}"


def dataset_checksum(path) -> str:
    with open(path, "rb") as fh:
        return f"{fnv1a64(fh.read()):016x}"


def _read_exact(fh, n: int, what: str):
    data = fh.read(n)
    if len(data) != n:
        raise FormatError(f"truncated file: wanted {n} bytes for {what}, got {len(data)}",
                          offset=fh.tell() - len(data))
    return data


def read_header(fh):
    """Validate and return (grid, n_samples); leaves fh at the first record."""
    magic = _read_exact(fh, 4, "magic")
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}", offset=0)
    version, ndims = struct.unpack("<IB", _read_exact(fh, 5, "version/ndims"))
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", offset=4)
    if not 1 <= ndims <= 4:
        raise FormatError(f"ndims must be 1-4, got {ndims}", offset=8)
    dims = struct.unpack(f"<{ndims}I", _read_exact(fh, 4 * ndims, "dims"))
    if any(d < 1 for d in dims):
        raise FormatError(f"dims must be positive, got {dims}", offset=9)
    (n_samples,) = struct.unpack("<Q", _read_exact(fh, 8, "n_samples"))
    return ActionGrid(tuple(int(d) for d in dims)), n_samples


def expected_length(grid: ActionGrid, n_samples: int) -> int:
    return 9 + 4 * grid.ndim + 8 + n_samples * (12 + 4 * grid.size)


def read_dataset(path) -> list[CalibrationSample]:
    """Parse and validate a UACL file into calibration samples."""
    size = os.path.getsize(path)
    with open(path, "rb") as fh:
        grid, n_samples = read_header(fh)
        want = expected_length(grid, n_samples)
        if size != want:
            raise FormatError(
                f"file length {size} does not match expected {want} "
                f"for {n_samples} samples on dims {grid.dims}")
        samples = []
        rec_logits = 4 * grid.size
        for ordinal in range(n_samples):
            task_id, expert = struct.unpack("<IQ", _read_exact(fh, 12, "record header"))
            raw = _read_exact(fh, rec_logits, "record logits")
            logits = np.frombuffer(raw, dtype="<f4").astype(np.float64)
            if expert >= grid.size:
                raise FormatError(
                    f"record {ordinal}: expert index {expert} out of range "
                    f"for |A|={grid.size}")
            if not np.all(np.isfinite(logits)):
                raise FormatError(f"record {ordinal}: non-finite logit")
            samples.append(CalibrationSample(LogitField(grid, logits),
                                             int(expert), int(task_id)))
    return samples


def count_samples(path) -> int:
    """Header-only sample count; does not read record payloads."""
    with open(path, "rb") as fh:
        _, n = read_header(fh)
    return n


def write_temperature_file(path, model: TemperatureModel, checksum: str) -> None:
    lines = [
        f"temperature = {model.temperature:.17g}",
        f"final_nll = {model.final_nll:.17g}",
        f"iterations = {model.iterations}",
        f"degenerate = {'true' if model.degenerate else 'false'}",
        f"dataset_checksum = {checksum}",
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_temperature_file(path):
    """Returns (TemperatureModel, checksum)."""
    fields = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if "=" not in line:
                raise FormatError(f"bad temperature-file line: {line!r}")
            key, _, value = line.partition("=")
            fields[key.strip()] = value.strip()
    try:
        model = TemperatureModel(
            temperature=float(fields["temperature"]),
            final_nll=float(fields["final_nll"]),
            iterations=int(fields["iterations"]),
            degenerate=fields.get("degenerate", "false") == "true",
        )
        checksum = fields["dataset_checksum"]
    except KeyError as exc:
        raise FormatError(f"temperature file missing field {exc}") from exc
    return model, checksum


def write_reliability_csv(path, table) -> None:
    """CSV: bin_lo,bin_hi,count,mean_confidence,accuracy (17 sig digits)."""
    lines = ["bin_lo,bin_hi,count,mean_confidence,accuracy"]
    for i in range(table.n_bins):
        lo = table.bin_edges[i]
        hi = table.bin_edges[i + 1]
        c = int(table.counts[i])
        conf = table.mean_confidence[i]
        acc = table.accuracy[i]
        conf_s = "" if np.isnan(conf) else f"{conf:.17g}"
        acc_s = "" if np.isnan(acc) else f"{acc:.17g}"
        lines.append(f"{lo:.17g},{hi:.17g},{c},{conf_s},{acc_s}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
