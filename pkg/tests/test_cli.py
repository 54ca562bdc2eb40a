import json

from lcfilter.cli import build_parser, config_from_args, main
from lcfilter.pnm import read_ppm
from lcfilter.streams import read_edge_stream, read_metrics


def simulate(tmp_path, *extra):
    out = tmp_path / "sim"
    assert main(["simulate", "--out", str(out), "--frames", "8", "--landmarks", "150", "--seed", "3", *extra]) == 0
    return out


def test_simulate_writes_streams(tmp_path):
    out = simulate(tmp_path, "--movers", "1", "--images")
    frames = read_edge_stream(out / "edges.txt")
    assert len(frames) == 8 and len(frames[0][2]) >= 150
    assert len(list((out / "frames").glob("*.pgm"))) == 8
    assert (out / "labels.txt").read_text().count("\n") == 8


def test_run_metrics_overlays_and_state(tmp_path):
    out = simulate(tmp_path)
    rc = main(["run", "--edges", str(out / "edges.txt"), "--ego", str(out / "ego.txt"),
               "--metrics", str(tmp_path / "m.csv"), "--overlays", str(tmp_path / "ov"),
               "--trust-log", str(tmp_path / "t.csv"), "--dump-state", str(tmp_path / "s.json")])
    assert rc == 0
    rows = read_metrics(tmp_path / "m.csv")
    assert [r["frame_id"] for r in rows] == list(range(1, 9))
    img = read_ppm(tmp_path / "ov" / "overlay_0005.ppm")
    assert img.shape == (480, 640, 3) and img.any()
    assert json.loads((tmp_path / "s.json").read_text())["frame_id"] == 8
    assert (tmp_path / "t.csv").read_text().startswith("frame_id,kind,entity_id,event,delta,trust")


def test_run_prints_csv_to_stdout(tmp_path, capsys):
    out = simulate(tmp_path)
    capsys.readouterr()
    assert main(["run", "--edges", str(out / "edges.txt"), "--ego", str(out / "ego.txt")]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("frame_id,raw_edges,culled") and len(lines) == 9


def test_resume_matches_single_run(tmp_path):
    out = simulate(tmp_path, "--movers", "1")
    common = ["run", "--edges", str(out / "edges.txt"), "--ego", str(out / "ego.txt")]
    main(common + ["--metrics", str(tmp_path / "full.csv")])
    main(common + ["--until", "4", "--metrics", str(tmp_path / "a.csv"), "--dump-state", str(tmp_path / "s.json")])
    main(common + ["--load-state", str(tmp_path / "s.json"), "--metrics", str(tmp_path / "b.csv")])
    assert read_metrics(tmp_path / "a.csv") + read_metrics(tmp_path / "b.csv") == read_metrics(tmp_path / "full.csv")


def test_flags_override_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"eps_beta": 15.0, "psi_lifetime": 4}))
    args = build_parser().parse_args(["run", "--edges", "e", "--ego", "g", "--config", str(cfg),
                                      "--psi-lifetime", "2", "--no-feedback"])
    c = config_from_args(args)
    assert (c.eps_beta, c.psi_lifetime, c.feedback) == (15.0, 2, False)


def test_detect_then_run_from_images(tmp_path):
    out = simulate(tmp_path, "--images")
    assert main(["detect", "--images", str(out / "frames"), "--out", str(tmp_path / "det.txt")]) == 0
    frames = read_edge_stream(tmp_path / "det.txt")
    assert len(frames) == 8 and len(frames[0][2]) > 100
    assert main(["run", "--images", str(out / "frames"), "--ego", str(out / "ego.txt"),
                 "--metrics", str(tmp_path / "m.csv")]) == 0


def test_metrics_summary_and_figure(tmp_path, capsys):
    out = simulate(tmp_path)
    main(["run", "--edges", str(out / "edges.txt"), "--ego", str(out / "ego.txt"), "--metrics", str(tmp_path / "m.csv")])
    capsys.readouterr()
    assert main(["metrics", str(tmp_path / "m.csv"), "--summary", str(tmp_path / "s.csv"),
                 "--figure", str(tmp_path / "f.png"), "--late-start", "6", "--late-end", "8"]) == 0
    text = capsys.readouterr().out
    assert "processed_reduction" in text and "first_psi_frame" in text
    assert (tmp_path / "f.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    assert (tmp_path / "s.csv").read_text().startswith("key,value")


def test_missing_input_is_reported(tmp_path, capsys):
    rc = main(["run", "--edges", str(tmp_path / "nope.txt"), "--ego", str(tmp_path / "nope2.txt")])
    assert rc == 2
    assert "error" in capsys.readouterr().err


def test_mismatched_ego_log_is_reported(tmp_path, capsys):
    out = simulate(tmp_path)
    lines = (out / "ego.txt").read_text().splitlines()
    (out / "ego.txt").write_text("\n".join(lines[:-1]) + "\n")
    assert main(["run", "--edges", str(out / "edges.txt"), "--ego", str(out / "ego.txt")]) == 2
    assert "mismatch" in capsys.readouterr().err


def test_empty_input_succeeds(tmp_path, capsys):
    (tmp_path / "e.txt").write_text("")
    (tmp_path / "g.txt").write_text("")
    assert main(["run", "--edges", str(tmp_path / "e.txt"), "--ego", str(tmp_path / "g.txt")]) == 0
    assert capsys.readouterr().out.strip().count("\n") == 0
