"""Text container for complex plane fields, plus solver-report files.

Field file layout: ``# key: value`` header lines (format version, field
kind, angular frequency, grid geometry, free-form provenance note),
then a CSV body ``ix,iy,re,im`` with one row per grid point in row-major
(ix, iy) order. Floats are written with 17 significant digits so a
read/write round trip is bit-exact.

Report files use the same ``key: value`` header followed by a
``[trace]`` section holding per-epoch CSV rows.
"""

from __future__ import annotations

import io
import os

import numpy as np

from .errors import ContractError
from .fields import ComplexField
from .geometry import PlaneGrid
from .metrics import BinaryMask

__all__ = [
    "write_field",
    "read_field",
    "write_mask",
    "read_mask",
    "write_report",
    "read_report",
    "write_network",
    "read_network",
    "FORMAT_VERSION",
    "REPORT_SCHEMA",
]

FORMAT_VERSION = 1
REPORT_SCHEMA = 1


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_field(path, field: ComplexField, note: str = "") -> None:
    grid = field.grid
    lines = [
        f"# fieldfile: {FORMAT_VERSION}",
        f"# kind: {field.kind}",
        f"# omega: {_fmt(field.omega)}",
        f"# nx: {grid.nx}",
        f"# ny: {grid.ny}",
        f"# dx: {_fmt(grid.dx)}",
        f"# dy: {_fmt(grid.dy)}",
        f"# z: {_fmt(grid.z)}",
        f"# origin_x: {_fmt(grid.origin_x)}",
        f"# origin_y: {_fmt(grid.origin_y)}",
        f"# note: {note}",
        "ix,iy,re,im",
    ]
    values = field.values
    for n in range(values.size):
        ix, iy = divmod(n, grid.ny)
        lines.append(f"{ix},{iy},{_fmt(values[n].real)},{_fmt(values[n].imag)}")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")


def _parse_header(handle) -> tuple[dict, str]:
    header = {}
    for line in handle:
        line = line.rstrip("\n")
        if line.startswith("# "):
            key, _, value = line[2:].partition(":")
            header[key.strip()] = value.strip()
        else:
            return header, line
    raise ContractError("file ended before the CSV body")


def read_field(path) -> tuple[ComplexField, dict]:
    """Read a field file; returns (field, header dict)."""
    with open(path, "r", encoding="utf-8") as handle:
        header, columns = _parse_header(handle)
        if header.get("fieldfile") != str(FORMAT_VERSION):
            raise ContractError(f"{path}: unsupported field file version {header.get('fieldfile')!r}")
        if columns != "ix,iy,re,im":
            raise ContractError(f"{path}: unexpected column header {columns!r}")
        grid = PlaneGrid(
            nx=int(header["nx"]),
            ny=int(header["ny"]),
            dx=float(header["dx"]),
            dy=float(header["dy"]),
            z=float(header["z"]),
            origin_x=float(header["origin_x"]),
            origin_y=float(header["origin_y"]),
        )
        values = np.zeros(grid.n_points, dtype=np.complex128)
        seen = 0
        for line in handle:
            line = line.strip()
            if not line:
                continue
            ix, iy, re, im = line.split(",")
            values[int(ix) * grid.ny + int(iy)] = complex(float(re), float(im))
            seen += 1
        if seen != grid.n_points:
            raise ContractError(f"{path}: {seen} rows for a {grid.n_points}-point grid")
    field = ComplexField(values, grid, float(header["omega"]), header["kind"])
    return field, header


def write_mask(path, mask: BinaryMask, note: str = "") -> None:
    if mask.grid is None:
        raise ContractError("mask file needs a grid-attached mask")
    grid = mask.grid
    lines = [
        f"# maskfile: {FORMAT_VERSION}",
        f"# nx: {grid.nx}",
        f"# ny: {grid.ny}",
        f"# note: {note}",
        "ix,iy,flag",
    ]
    for n, flag in enumerate(mask.flags):
        ix, iy = divmod(n, grid.ny)
        lines.append(f"{ix},{iy},{int(flag)}")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")


def read_mask(path) -> np.ndarray:
    """Read a mask file into a flat boolean array (row-major)."""
    with open(path, "r", encoding="utf-8") as handle:
        header, columns = _parse_header(handle)
        if columns != "ix,iy,flag":
            raise ContractError(f"{path}: unexpected mask columns {columns!r}")
        nx, ny = int(header["nx"]), int(header["ny"])
        flags = np.zeros(nx * ny, dtype=bool)
        for line in handle:
            line = line.strip()
            if not line:
                continue
            ix, iy, flag = line.split(",")
            flags[int(ix) * ny + int(iy)] = bool(int(flag))
    return flags


def write_report(path, entries: dict, trace_rows=None, trace_columns=None) -> None:
    """Write a key-value report with an optional [trace] CSV section."""
    buf = io.StringIO()
    buf.write(f"schema: {REPORT_SCHEMA}\n")
    for key, value in entries.items():
        if isinstance(value, float):
            value = _fmt(value)
        buf.write(f"{key}: {value}\n")
    if trace_rows is not None:
        buf.write("[trace]\n")
        buf.write(",".join(trace_columns) + "\n")
        for row in trace_rows:
            buf.write(",".join("" if cell is None else (_fmt(cell) if isinstance(cell, float) else str(cell)) for cell in row) + "\n")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(buf.getvalue())


def read_report(path) -> tuple[dict, list[dict]]:
    """Read a report file; returns (entries, trace row dicts)."""
    entries = {}
    trace = []
    with open(path, "r", encoding="utf-8") as handle:
        in_trace = False
        columns = None
        for line in handle:
            line = line.rstrip("\n")
            if not line:
                continue
            if line == "[trace]":
                in_trace = True
                continue
            if not in_trace:
                key, _, value = line.partition(":")
                entries[key.strip()] = value.strip()
            elif columns is None:
                columns = line.split(",")
            else:
                cells = line.split(",")
                trace.append(dict(zip(columns, cells)))
    if entries.get("schema") != str(REPORT_SCHEMA):
        raise ContractError(f"{path}: unsupported report schema {entries.get('schema')!r}")
    return entries, trace


def write_network(path, net, note: str = "") -> None:
    """Serialize complex network parameters with layer-shape metadata."""
    sizes = [net.in_size] + [layer.out_size for layer in net.layers]
    lines = [
        f"# networkfile: {FORMAT_VERSION}",
        f"# sizes: {' '.join(str(s) for s in sizes)}",
        f"# note: {note}",
        "layer,param,row,col,re,im",
    ]
    for index, layer in enumerate(net.layers):
        for (r, c), value in np.ndenumerate(layer.weight):
            lines.append(f"{index},weight,{r},{c},{_fmt(value.real)},{_fmt(value.imag)}")
        for r, value in enumerate(layer.bias):
            lines.append(f"{index},bias,{r},0,{_fmt(value.real)},{_fmt(value.imag)}")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")


def read_network(path):
    """Rebuild a ComplexNetwork from :func:`write_network` output."""
    from .cvnn import ComplexAffine, ComplexNetwork

    with open(path, "r", encoding="utf-8") as handle:
        header, columns = _parse_header(handle)
        if header.get("networkfile") != str(FORMAT_VERSION):
            raise ContractError(f"{path}: unsupported network file version")
        if columns != "layer,param,row,col,re,im":
            raise ContractError(f"{path}: unexpected columns {columns!r}")
        sizes = [int(s) for s in header["sizes"].split()]
        layers = [
            ComplexAffine(
                weight=np.zeros((fan_out, fan_in), dtype=np.complex128),
                bias=np.zeros(fan_out, dtype=np.complex128),
            )
            for fan_in, fan_out in zip(sizes, sizes[1:])
        ]
        for line in handle:
            line = line.strip()
            if not line:
                continue
            index, param, row, col, re, im = line.split(",")
            value = complex(float(re), float(im))
            if param == "weight":
                layers[int(index)].weight[int(row), int(col)] = value
            else:
                layers[int(index)].bias[int(row)] = value
    return ComplexNetwork(layers)


def ensure_dir(path) -> None:
    os.makedirs(path, exist_ok=True)
