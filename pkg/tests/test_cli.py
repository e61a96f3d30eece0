import json

import numpy as np
import pytest

from bevsim import PlotError, parse_config, run, synth_trapezoid
from bevsim.cli import build_parser, emit_trace, main
from bevsim.cycle import serialize_cycle
from bevsim.engine import TRACE_FIELDS
from bevsim.params import serialize_config
from bevsim.plots import emit_plot

EXPECTED_HEADER = (
    "t_s,v_target_kmh,v_kmh,dist_km,cmd,motor_nm,motor_rpm,fric_n,"
    "batt_kw,current_a,volt_v,soc,rr_n,wr_n,accel_ms2"
)


@pytest.fixture()
def short_cycle_path(tmp_path):
    path = tmp_path / "short.csv"
    path.write_text(serialize_cycle(synth_trapezoid(50.0, 10.0, 5.0)))
    return str(path)


@pytest.fixture()
def small_config_path(tmp_path, small_battery_config):
    path = tmp_path / "vehicle.json"
    path.write_text(serialize_config(small_battery_config))
    return str(path)


def test_simulate_happy_path(tmp_path, short_cycle_path, capsys):
    out = tmp_path / "trace.csv"
    code = main(
        ["simulate", "--cycle", short_cycle_path, "--out", str(out)]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["schema_version"] == 1
    assert payload["command"] == "simulate"
    assert payload["summary"]["stop_reason"] == "cycle_end"
    assert payload["ledger"]["check_passed"] is True
    lines = out.read_text().strip().split("\n")
    assert lines[0] == EXPECTED_HEADER
    assert len(lines) == 1 + 250  # 25 s at dt=0.1


def test_trace_csv_round_trips_within_1e5(tmp_path, config):
    cycle = synth_trapezoid(50.0, 10.0, 5.0)
    trace, _, _ = run(config, cycle)
    path = tmp_path / "trace.csv"
    emit_trace(trace, str(path))
    lines = path.read_text().strip().split("\n")
    header = lines[0].split(",")
    assert header == list(TRACE_FIELDS)
    rows = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    for j, field in enumerate(TRACE_FIELDS):
        col = getattr(trace, field)
        scale = np.maximum(np.abs(col), 1e-30)
        assert np.all(np.abs(rows[:, j] - col) / scale <= 1e-5 + 1e-12), field


def test_emit_trace_three_steps_gives_four_lines(tmp_path, config, udds):
    trace, _, _ = run(config, udds, max_time=3 * config.sim.dt)
    path = tmp_path / "three.csv"
    emit_trace(trace, str(path))
    assert len(path.read_text().strip().split("\n")) == 4


def test_emit_trace_empty_gives_header_only(tmp_path, config, udds):
    trace, _, _ = run(config, udds, max_time=0.0)
    path = tmp_path / "empty.csv"
    emit_trace(trace, str(path))
    assert path.read_text() == EXPECTED_HEADER + "\n"


def test_emit_trace_decimation(tmp_path, config):
    cycle = synth_trapezoid(50.0, 10.0, 5.0)
    trace, _, _ = run(config, cycle)
    path = tmp_path / "thin.csv"
    emit_trace(trace, str(path), every=10)
    lines = path.read_text().strip().split("\n")
    assert len(lines) == 1 + 25


def test_repeated_invocations_are_byte_identical(tmp_path, short_cycle_path, capsys):
    outputs = []
    files = []
    for tag in ("a", "b"):
        out = tmp_path / f"trace_{tag}.csv"
        svg = tmp_path / f"plot_{tag}.svg"
        code = main(
            [
                "simulate",
                "--cycle", short_cycle_path,
                "--out", str(out),
                "--plot", str(svg),
            ]
        )
        assert code == 0
        outputs.append(capsys.readouterr().out)
        files.append((out.read_bytes(), svg.read_bytes()))
    assert outputs[0] == outputs[1]
    assert files[0] == files[1]


def test_missing_config_names_the_file(capsys):
    code = main(["simulate", "--config", "missing.json"])
    assert code == 1
    assert "missing.json" in capsys.readouterr().err


def test_malformed_cycle_exits_one(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("t_s,v_kmh\n0,0\n2,5\n1,3\n")
    code = main(["simulate", "--cycle", str(bad)])
    assert code == 1
    assert "row" in capsys.readouterr().err


def test_flag_conflict_rejected(short_cycle_path, capsys):
    code = main(
        [
            "simulate",
            "--cycle", short_cycle_path,
            "--no-regen",
            "--regen-eff", "0.7",
        ]
    )
    assert code == 1
    assert "--no-regen" in capsys.readouterr().err


def test_unknown_flag_exits_one(capsys):
    assert main(["simulate", "--warp-speed"]) == 1


def test_defaults_round_trips(capsys):
    assert main(["defaults"]) == 0
    text = capsys.readouterr().out
    cfg = parse_config(text)
    from bevsim import default_config

    assert cfg == default_config()


def test_validate_accepts_valid_config(tmp_path, small_config_path, capsys):
    code = main(["validate", "--config", small_config_path])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["valid"] is True
    assert payload["violations"] == []


def test_validate_rejects_invalid_config(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"body": {"mass": -1}}')
    code = main(["validate", "--config", str(path)])
    assert code == 1
    assert "mass" in capsys.readouterr().err


def test_validate_requires_config(capsys):
    assert main(["validate"]) == 1


def test_range_compare_regen_reports_gain(small_config_path, capsys):
    code = main(
        [
            "range",
            "--config", small_config_path,
            "--until-soc", "0.5",
            "--compare-regen",
        ]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["command"] == "range"
    on = payload["reports"]["regen_on"]
    off = payload["reports"]["regen_off"]
    assert on["distance_km"] > off["distance_km"]
    assert payload["gain_percent"] > 0.0
    assert payload["reference_gain_percents"] == [23.0, 25.0, 25.5]


def test_compare_regen_subcommand(small_config_path, capsys):
    code = main(
        ["compare-regen", "--config", small_config_path, "--until-soc", "0.6"]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert "regen_on" in payload["reports"]


def test_range_single_leg_with_outputs(tmp_path, small_config_path, capsys):
    out = tmp_path / "range.csv"
    svg = tmp_path / "range.svg"
    code = main(
        [
            "range",
            "--config", small_config_path,
            "--until-soc", "0.6",
            "--out", str(out),
            "--plot", str(svg),
        ]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["report"]["soc_end"] <= 0.6 + 1e-9
    assert payload["ledger"]["check_passed"] is True
    assert out.read_text().startswith(EXPECTED_HEADER)
    assert svg.read_text().startswith("<svg")


def test_range_conflicts(small_config_path, capsys):
    code = main(
        [
            "range",
            "--config", small_config_path,
            "--compare-regen",
            "--no-regen",
        ]
    )
    assert code == 1


def test_range_rejects_floor_above_initial_soc(small_config_path, capsys):
    code = main(
        ["range", "--config", small_config_path, "--until-soc", "0.95"]
    )
    assert code == 1
    assert "--until-soc" in capsys.readouterr().err


def test_accel_command(capsys, tmp_path):
    svg = tmp_path / "accel.svg"
    code = main(["accel", "--target", "60", "--plot", str(svg)])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["report"]["target_kmh"] == 60.0
    assert payload["report"]["time_to_target_s"] > 0.0
    assert payload["oracle_time_s"] == pytest.approx(
        payload["report"]["time_to_target_s"], rel=0.02
    )
    assert payload["reference_time_to_100_s"] == 9.5
    assert svg.read_text().startswith("<svg")


def test_accel_unreachable_exits_two(capsys):
    code = main(["accel", "--target", "500"])
    assert code == 2
    assert "force-balance" in capsys.readouterr().err


def test_topspeed_command(capsys, tmp_path):
    svg = tmp_path / "top.svg"
    code = main(["topspeed", "--duration", "60", "--plot", str(svg)])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["report"]["oracle_vmax_kmh"] == pytest.approx(171.8, abs=0.5)
    assert payload["reference_top_speed_kmh"] == 190.0
    assert svg.exists()


def test_size_motor_command(capsys):
    code = main(["size-motor", "--speed", "120"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["power_kw"] == pytest.approx(28.46, abs=0.005)

    code = main(["size-motor", "--power", "29.48"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["sustained_speed_kmh"] == pytest.approx(122.0, abs=1.0)

    code = main(["size-motor"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["design_speed_kmh"] == 120.0


def test_dt_override(short_cycle_path, capsys):
    code = main(["simulate", "--cycle", short_cycle_path, "--dt", "0.05"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["summary"]["duration_s"] == pytest.approx(25.0, abs=1e-6)
    assert main(["simulate", "--cycle", short_cycle_path, "--dt", "0"]) == 1


def test_simulate_repeat_flag(short_cycle_path, capsys):
    code = main(["simulate", "--cycle", short_cycle_path, "--repeat", "3"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["summary"]["duration_s"] == pytest.approx(75.0, abs=1e-6)
    assert main(["simulate", "--cycle", short_cycle_path, "--repeat", "0"]) == 1


def test_every_subcommand_documents_every_flag():
    parser = build_parser()
    subparsers = parser._subparsers._group_actions[0].choices
    assert set(subparsers) == {
        "simulate", "range", "accel", "topspeed",
        "compare-regen", "size-motor", "defaults", "validate",
    }
    for name, sub in subparsers.items():
        help_text = sub.format_help()
        for action in sub._actions:
            assert action.help, f"{name}: {action.option_strings} lacks help text"
            for opt in action.option_strings:
                assert opt in help_text, f"{name}: {opt} missing from --help"


def test_plot_kinds_render(config, udds, tmp_path):
    trace, _, _ = run(config, udds, max_time=120.0)
    for kind in ("tracking", "range_soc", "soc_dynamics"):
        path = tmp_path / f"{kind}.svg"
        emit_plot(trace, kind, str(path))
        text = path.read_text()
        assert text.startswith("<svg")
        assert "</svg>" in text
        assert "time [s]" in text


def test_plot_rejects_empty_trace(config, udds, tmp_path):
    empty, _, _ = run(config, udds, max_time=0.0)
    target = tmp_path / "never.svg"
    with pytest.raises(PlotError):
        emit_plot(empty, "tracking", str(target))
    assert not target.exists()


def test_plot_rejects_unknown_kind(config, udds, tmp_path):
    trace, _, _ = run(config, udds, max_time=10.0)
    with pytest.raises(PlotError):
        emit_plot(trace, "waterfall", str(tmp_path / "x.svg"))


def test_tracking_plot_has_both_curves(config, udds, tmp_path):
    trace, _, _ = run(config, udds, max_time=200.0)
    path = tmp_path / "tracking.svg"
    emit_plot(trace, "tracking", str(path))
    text = path.read_text()
    assert ">target</text>" in text
    assert ">actual</text>" in text
    assert text.count("<polyline") == 2
