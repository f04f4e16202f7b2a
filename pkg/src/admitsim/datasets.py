"""Bit-exact file formats: demonstration datasets, trace CSVs, report CSVs.

Dataset layout (little-endian):
  magic 'ADMS' | u32 version | 4-byte task code | u32 chunk horizon |
  u32 episode count | u64 total tuple count | u32 tuple count per episode |
  records of 14 f64 per tuple (10 pose/gripper + 3 normal + 1 contact flag).

CSV floats are written with repr() (shortest round-trip), so identical runs
produce byte-identical files.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import IoFailure
from .expert import SupervisionTuple

MAGIC = b"ADMS"
VERSION = 1
RECORD_DIM = 14


@dataclass
class Dataset:
    task: str
    horizon: int
    episodes: list  # list of list[SupervisionTuple]

    @property
    def tuple_count(self) -> int:
        return sum(len(ep) for ep in self.episodes)


def write_dataset(path: str, ds: Dataset) -> None:
    try:
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<I", VERSION))
            fh.write(ds.task.encode("ascii").ljust(4, b"\0")[:4])
            fh.write(struct.pack("<I", ds.horizon))
            fh.write(struct.pack("<I", len(ds.episodes)))
            fh.write(struct.pack("<Q", ds.tuple_count))
            for ep in ds.episodes:
                fh.write(struct.pack("<I", len(ep)))
            for ep in ds.episodes:
                for tup in ep:
                    rec = np.concatenate([tup.pose10, tup.normal, [float(tup.contact)]])
                    fh.write(struct.pack("<14d", *rec))
    except OSError as exc:
        raise IoFailure(f"cannot write dataset {path}: {exc}") from exc


def read_dataset(path: str) -> Dataset:
    try:
        with open(path, "rb") as fh:
            if fh.read(4) != MAGIC:
                raise IoFailure(f"{path}: not a dataset file")
            (version,) = struct.unpack("<I", fh.read(4))
            if version != VERSION:
                raise IoFailure(f"{path}: unsupported version {version}")
            task = fh.read(4).rstrip(b"\0").decode("ascii")
            (horizon,) = struct.unpack("<I", fh.read(4))
            (n_eps,) = struct.unpack("<I", fh.read(4))
            (total,) = struct.unpack("<Q", fh.read(8))
            lengths = [struct.unpack("<I", fh.read(4))[0] for _ in range(n_eps)]
            if sum(lengths) != total:
                raise IoFailure(f"{path}: episode lengths disagree with header count")
            episodes = []
            for n in lengths:
                ep = []
                for _ in range(n):
                    rec = struct.unpack("<14d", fh.read(8 * RECORD_DIM))
                    ep.append(SupervisionTuple(np.array(rec[:10]), np.array(rec[10:13]),
                                               int(rec[13])))
                episodes.append(ep)
            return Dataset(task, horizon, episodes)
    except OSError as exc:
        raise IoFailure(f"cannot read dataset {path}: {exc}") from exc


# --------------------------------------------------------------------------
# CSV writers
# --------------------------------------------------------------------------

TRACE_COLUMNS = (
    "t",
    "xr_x", "xr_y", "xr_z",
    "vr_x", "vr_y", "vr_z",
    "fext_x", "fext_y", "fext_z",
    "fcmd_x", "fcmd_y", "fcmd_z",
    "keig_1", "keig_2", "keig_3",
    "phase", "contact", "disturbed",
)


def _fmt(x) -> str:
    return repr(float(x))


def write_trace(path: str, log) -> None:
    """One row per controller tick, fixed column order, strictly increasing t."""
    try:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(TRACE_COLUMNS) + "\n")
            for i in range(log.n_ticks):
                row = [_fmt(log.t[i])]
                row += [_fmt(v) for v in log.x_r[i]]
                row += [_fmt(v) for v in log.v_r[i]]
                row += [_fmt(v) for v in log.f_ext[i]]
                row += [_fmt(v) for v in log.f_cmd[i]]
                row += [_fmt(v) for v in log.k_eigs[i]]
                row += [str(int(log.phase[i])), str(int(log.contact[i])),
                        str(int(log.disturbed[i]))]
                fh.write(",".join(row) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write trace {path}: {exc}") from exc


SUITE_COLUMNS = (
    "mode", "disturbed", "episodes", "success_rate", "safety_stop_rate",
    "mean_remaining_ink_cm", "mean_insertion_depth_mm", "mean_opening_angle_deg",
    "mean_peak_force_n",
)


def write_suite_csv(path: str, rows) -> None:
    try:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(SUITE_COLUMNS) + "\n")
            for r in rows:
                fh.write(",".join([
                    r.mode, str(int(r.disturbed)), str(r.episodes),
                    _fmt(r.success_rate), _fmt(r.safety_stop_rate),
                    _fmt(r.mean_remaining_ink_cm), _fmt(r.mean_insertion_depth_mm),
                    _fmt(r.mean_opening_angle_deg), _fmt(r.mean_peak_force_n),
                ]) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write suite summary {path}: {exc}") from exc


VERIFY_COLUMNS = ("proposition", "m", "d", "k_e", "f_H", "measured", "bound", "passed")


def write_verification_csv(path: str, reports) -> None:
    """One row per report: headline measured value vs its tolerance/bound."""
    headline = {
        "prop1": ("x_err", "tol_x"),
        "prop2": ("analytic_max_err", "analytic_tol"),
        "prop3": ("sup_e", None),
        "equivalence": ("max_step_gap", "tol"),
    }
    try:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(VERIFY_COLUMNS) + "\n")
            for rep in reports:
                mkey, tkey = headline[rep.proposition]
                measured = rep.measured[mkey]
                bound = rep.measured["bound"] if tkey is None else rep.tolerances[tkey]
                fh.write(",".join([
                    rep.proposition,
                    _fmt(rep.params.get("m", 0.0)), _fmt(rep.params.get("d", 0.0)),
                    _fmt(rep.params.get("k_e", 0.0)), _fmt(rep.params.get("f_H", 0.0)),
                    _fmt(measured), _fmt(bound), str(int(rep.passed)),
                ]) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write verification report {path}: {exc}") from exc
