import numpy as np
import pytest

from pynah.errors import ContractError
from pynah.fieldfile import read_field, read_mask, read_report, write_field, write_mask, write_report
from pynah.fields import PRESSURE, VELOCITY, ComplexField
from pynah.geometry import build_plane_grid
from pynah.metrics import BinaryMask


def awkward_field(kind=PRESSURE):
    grid = build_plane_grid(3, 4, 0.0125, 0.017, 0.0312, origin=(-0.3, 0.11))
    rng = np.random.default_rng(0)
    values = rng.standard_normal(12) * 1e-7 + 1j * rng.standard_normal(12) * 1e3
    values[0] = 0.1 + 0.2j  # not exactly representable decimals
    values[1] = 1e-300 + 1e300j
    values[2] = -0.0 + 0.0j
    return ComplexField(values, grid, 2 * np.pi * 1684.6564, kind)


class TestFieldRoundTrip:
    def test_bit_exact_round_trip(self, tmp_path):
        field = awkward_field()
        path = tmp_path / "f.field"
        write_field(path, field, note="hash=abc seed=7")
        loaded, header = read_field(path)
        assert np.array_equal(loaded.values, field.values)
        assert loaded.grid == field.grid
        assert loaded.omega == field.omega
        assert loaded.kind == field.kind
        assert header["note"] == "hash=abc seed=7"

    def test_velocity_kind_preserved(self, tmp_path):
        field = awkward_field(kind=VELOCITY)
        path = tmp_path / "v.field"
        write_field(path, field)
        loaded, _ = read_field(path)
        assert loaded.kind == VELOCITY

    def test_double_round_trip_identical_bytes(self, tmp_path):
        field = awkward_field()
        first = tmp_path / "a.field"
        second = tmp_path / "b.field"
        write_field(first, field, note="n")
        loaded, _ = read_field(first)
        write_field(second, loaded, note="n")
        assert first.read_bytes() == second.read_bytes()

    def test_wrong_version_rejected(self, tmp_path):
        path = tmp_path / "bad.field"
        path.write_text("# fieldfile: 99\n# kind: pressure\nix,iy,re,im\n")
        with pytest.raises(ContractError):
            read_field(path)

    def test_row_count_mismatch_rejected(self, tmp_path):
        field = awkward_field()
        path = tmp_path / "f.field"
        write_field(path, field)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(ContractError):
            read_field(path)


class TestMaskFile:
    def test_round_trip(self, tmp_path):
        grid = build_plane_grid(4, 5, 0.01, 0.01, 0.0)
        flags = np.zeros(20, dtype=bool)
        flags[[0, 3, 7, 19]] = True
        mask = BinaryMask(flags, grid)
        path = tmp_path / "m.mask"
        write_mask(path, mask, note="violin-ish")
        loaded = read_mask(path)
        assert np.array_equal(loaded, flags)


class TestNetworkFile:
    def test_round_trip(self, tmp_path):
        from pynah.cvnn import ComplexNetwork

        net = ComplexNetwork.create([4, 6, 3], seed=11)
        path = tmp_path / "net.params"
        from pynah.fieldfile import read_network, write_network

        write_network(path, net, note="snapshot")
        loaded = read_network(path)
        assert loaded.in_size == 4 and loaded.out_size == 3
        for a, b in zip(net.layers, loaded.layers):
            assert np.array_equal(a.weight, b.weight)
            assert np.array_equal(a.bias, b.bias)
        x = np.arange(4, dtype=complex) + 0.5j
        ya, _ = net.forward(x)
        yb, _ = loaded.forward(x)
        assert np.array_equal(ya, yb)


class TestReportFile:
    def test_round_trip_with_trace(self, tmp_path):
        path = tmp_path / "r.txt"
        entries = {"method": "pinnsfd_direct", "lambda": 1e-6, "stop_reason": "early_stop"}
        rows = [(0, 1.5, -3.0), (1, 1.25, None), (2, 1.125, -4.5)]
        write_report(path, entries, trace_rows=rows, trace_columns=("epoch", "loss", "nmse_db"))
        loaded, trace = read_report(path)
        assert loaded["method"] == "pinnsfd_direct"
        assert float(loaded["lambda"]) == 1e-6
        assert len(trace) == 3
        assert trace[1]["nmse_db"] == ""
        assert float(trace[2]["loss"]) == 1.125

    def test_report_without_trace(self, tmp_path):
        path = tmp_path / "r.txt"
        write_report(path, {"method": "cesm"})
        entries, trace = read_report(path)
        assert entries["method"] == "cesm"
        assert trace == []
