# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: uwb_har/utils/formats.py
# ----------------------------------------------------------------------------------
# Purpose:
# Readers and writers for the artifact files exchanged between pipeline stages:
#   UWBF  frame matrices (version 1) and spectrogram pairs (version 2, kind flag)
#   SANW  network weights with a layer table
#   TSV   dataset manifests
#   JSON  metric reports (sorted keys) and CSV confusion matrices
# All binary fields are little-endian.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

import csv
import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from uwb_har.services.channel import FrameMatrix, RadioConfig
from uwb_har.services.features import Normalization, Spectrogram, SpectrogramKind
from uwb_har.utils.errors import UwbHarError

__all__ = [
    "FormatError",
    "ManifestEntry",
    "PairKind",
    "read_frames",
    "read_manifest",
    "read_spectrogram_pair",
    "read_weights",
    "write_confusion",
    "write_frames",
    "write_manifest",
    "write_metrics",
    "write_spectrogram_pair",
    "write_weights",
]

FRAMES_MAGIC = b"UWBF"
WEIGHTS_MAGIC = b"SANW"
FRAMES_VERSION = 1
PAIR_VERSION = 2
WEIGHTS_VERSION = 1
MANIFEST_COLUMNS = ("sample_path", "label", "environment_id", "split")

_FRAMES_HEADER = struct.Struct("<4sHII4d")
_PAIR_HEADER = struct.Struct("<4sHBII4d")


class FormatError(UwbHarError):
    """Exception raised for malformed or mismatched artifact files."""

    def __init__(self, message: str, operation: str, original_error: Exception | None = None) -> None:
        super().__init__(message, operation=operation, kind="invalid-format", original_error=original_error)


class PairKind:
    """Kind flag of a version-2 container: real part is the time spectrogram, imaginary part the Doppler one."""

    RAW = 1
    ZSCORE = 2


def _read_bytes(path: Path, operation: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e}", operation=operation, original_error=e)


def _complex_payload(payload: bytes, rows: int, cols: int, path: Path, operation: str) -> np.ndarray:
    expected = rows * cols * 8
    if len(payload) != expected:
        raise FormatError(f"{path}: expected {expected} payload bytes for {rows}x{cols}, found {len(payload)}", operation=operation)
    return np.frombuffer(payload, dtype="<c8").reshape(rows, cols).astype(np.complex128)


def write_frames(path: str | Path, frames: FrameMatrix) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    radio = frames.radio
    header = _FRAMES_HEADER.pack(
        FRAMES_MAGIC, FRAMES_VERSION, frames.n_frames, frames.n_bins, frames.frame_period_s, radio.carrier_freq_hz, radio.bandwidth_hz, radio.adc_interval_s
    )
    path.write_bytes(header + np.ascontiguousarray(frames.data, dtype="<c8").tobytes())
    return path


def read_frames(path: str | Path) -> FrameMatrix:
    path = Path(path)
    raw = _read_bytes(path, "read_frames")
    if len(raw) < _FRAMES_HEADER.size or raw[:4] != FRAMES_MAGIC:
        raise FormatError(f"{path} is not a frame-matrix file", operation="read_frames")
    magic, version, rows, cols, frame_period, carrier, bandwidth, adc = _FRAMES_HEADER.unpack_from(raw)
    if version != FRAMES_VERSION:
        raise FormatError(f"{path}: unsupported frame-matrix version {version}", operation="read_frames")
    data = _complex_payload(raw[_FRAMES_HEADER.size :], rows, cols, path, "read_frames")
    radio = RadioConfig(
        carrier_freq_hz=carrier,
        bandwidth_hz=bandwidth,
        adc_interval_s=adc,
        fast_time_bins=cols,
        pulse_repetition_hz=1.0 / frame_period,
    )
    return FrameMatrix(data=data, radio=radio, frame_period_s=frame_period)


def write_spectrogram_pair(path: str | Path, time: Spectrogram, freq: Spectrogram, radio: RadioConfig) -> Path:
    if time.shape != freq.shape:
        raise FormatError(f"time {time.shape} and Doppler {freq.shape} spectrograms differ in shape", operation="write_spectrogram_pair")
    if time.normalization != freq.normalization:
        raise FormatError("both spectrograms of a pair must share one normalization", operation="write_spectrogram_pair")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    kind = PairKind.ZSCORE if time.normalization == Normalization.ZSCORE else PairKind.RAW
    rows, cols = time.shape
    header = _PAIR_HEADER.pack(FRAMES_MAGIC, PAIR_VERSION, kind, rows, cols, radio.frame_period_s, radio.carrier_freq_hz, radio.bandwidth_hz, radio.adc_interval_s)
    packed = np.empty(time.shape, dtype="<c8")
    packed.real = time.data
    packed.imag = freq.data
    path.write_bytes(header + packed.tobytes())
    return path


def read_spectrogram_pair(path: str | Path) -> tuple[Spectrogram, Spectrogram]:
    path = Path(path)
    raw = _read_bytes(path, "read_spectrogram_pair")
    if len(raw) < _PAIR_HEADER.size or raw[:4] != FRAMES_MAGIC:
        raise FormatError(f"{path} is not a spectrogram-pair file", operation="read_spectrogram_pair")
    _, version, kind, rows, cols, *_ = _PAIR_HEADER.unpack_from(raw)
    if version != PAIR_VERSION or kind not in (PairKind.RAW, PairKind.ZSCORE):
        raise FormatError(f"{path}: unsupported container version {version} / kind {kind}", operation="read_spectrogram_pair")
    data = _complex_payload(raw[_PAIR_HEADER.size :], rows, cols, path, "read_spectrogram_pair")
    normalization = Normalization.ZSCORE if kind == PairKind.ZSCORE else Normalization.NONE
    return (
        Spectrogram(data=data.real.copy(), kind=SpectrogramKind.TIME_DOMAIN, normalization=normalization),
        Spectrogram(data=data.imag.copy(), kind=SpectrogramKind.DOPPLER_DOMAIN, normalization=normalization),
    )


def _pack_text(text: str) -> bytes:
    encoded = text.encode("utf-8")
    return struct.pack("<H", len(encoded)) + encoded


def write_weights(path: str | Path, layers: Sequence[tuple[str, str, np.ndarray]]) -> Path:
    """Write (name, op_kind, array) entries: layer table first, then every array as f32 in the given order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table = [WEIGHTS_MAGIC, struct.pack("<HI", WEIGHTS_VERSION, len(layers))]
    for name, op_kind, array in layers:
        table += [_pack_text(name), _pack_text(op_kind), struct.pack("<B", array.ndim), struct.pack(f"<{array.ndim}I", *array.shape)]
    payload = [np.ascontiguousarray(array, dtype="<f4").tobytes() for _, _, array in layers]
    path.write_bytes(b"".join(table + payload))
    return path


def read_weights(path: str | Path) -> list[tuple[str, str, np.ndarray]]:
    path = Path(path)
    raw = _read_bytes(path, "read_weights")
    if raw[:4] != WEIGHTS_MAGIC:
        raise FormatError(f"{path} is not a weights file", operation="read_weights")
    try:
        version, count = struct.unpack_from("<HI", raw, 4)
        if version != WEIGHTS_VERSION:
            raise FormatError(f"{path}: unsupported weights version {version}", operation="read_weights")
        offset = 10
        table = []
        for _ in range(count):
            texts = []
            for _ in range(2):
                (length,) = struct.unpack_from("<H", raw, offset)
                texts.append(raw[offset + 2 : offset + 2 + length].decode("utf-8"))
                offset += 2 + length
            (ndim,) = struct.unpack_from("<B", raw, offset)
            shape = struct.unpack_from(f"<{ndim}I", raw, offset + 1)
            offset += 1 + 4 * ndim
            table.append((texts[0], texts[1], tuple(shape)))
    except (struct.error, UnicodeDecodeError) as e:
        raise FormatError(f"{path}: truncated or corrupt layer table", operation="read_weights", original_error=e)

    entries = []
    for name, op_kind, shape in table:
        size = int(np.prod(shape, dtype=np.int64)) * 4
        if offset + size > len(raw):
            raise FormatError(f"{path}: weights for {name} are truncated", operation="read_weights")
        entries.append((name, op_kind, np.frombuffer(raw, dtype="<f4", count=size // 4, offset=offset).reshape(shape).copy()))
        offset += size
    if offset != len(raw):
        raise FormatError(f"{path}: {len(raw) - offset} trailing bytes after the weights", operation="read_weights")
    return entries


@dataclass(frozen=True)
class ManifestEntry:
    sample_path: str
    label: str
    environment_id: int
    split: str


def write_manifest(path: str | Path, entries: Iterable[ManifestEntry]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["\t".join(MANIFEST_COLUMNS)]
    lines += [f"{e.sample_path}\t{e.label}\t{e.environment_id}\t{e.split}" for e in entries]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_manifest(path: str | Path) -> list[ManifestEntry]:
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e}", operation="read_manifest", original_error=e)
    if not lines or tuple(lines[0].split("\t")) != MANIFEST_COLUMNS:
        raise FormatError(f"{path}: manifest header must be {'<TAB>'.join(MANIFEST_COLUMNS)}", operation="read_manifest")
    entries = []
    for number, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != len(MANIFEST_COLUMNS):
            raise FormatError(f"{path}:{number}: expected {len(MANIFEST_COLUMNS)} columns, got {len(fields)}", operation="read_manifest")
        try:
            entries.append(ManifestEntry(fields[0], fields[1], int(fields[2]), fields[3]))
        except ValueError as e:
            raise FormatError(f"{path}:{number}: environment_id must be an integer", operation="read_manifest", original_error=e)
    return entries


def write_metrics(path: str | Path, metrics: Mapping[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(metrics, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def write_confusion(path: str | Path, confusion: np.ndarray, labels: Sequence[str]) -> Path:
    """Rows are true classes, columns predicted classes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["true/predicted", *labels])
        for label, row in zip(labels, np.asarray(confusion, dtype=np.int64)):
            writer.writerow([label, *(int(value) for value in row)])
    return path
