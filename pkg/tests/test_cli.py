import json

import numpy as np

from flownoise.cli import main
from flownoise.flow_io import read_flo_file, write_flo_file
from flownoise.noise import NoiseSpec, make_noise_frame
from flownoise.pipeline import load_frame, save_frame


def make_clip_tree(root, clip_names, count=3, size=32):
    rng = np.random.default_rng(0)
    for name in clip_names:
        clip_dir = root / name
        clip_dir.mkdir(parents=True)
        background = rng.integers(0, 90, (size, size, 3), dtype=np.uint8)
        for t in range(count):
            frame = background.copy()
            frame[10:20, 4 + 3 * t:10 + 3 * t] = (250, 120, 30)
            save_frame(clip_dir / f"{t:03d}.png", frame)


def test_gen_estimate_end_to_end(tmp_path, capsys):
    make_clip_tree(tmp_path / "in", ["a", "b"])
    code = main([
        "gen",
        "--input", str(tmp_path / "in"),
        "--output", str(tmp_path / "out"),
        "--flow", "estimate",
        "--seed", "9",
        "--workers", "2",
        "--iterations", "30",
        "--pyramid-levels", "2",
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "a: ok" in out and "b: ok" in out
    assert (tmp_path / "out" / "manifest.jsonl").exists()
    assert (tmp_path / "out" / "a" / "frame_00002.png").exists()
    assert (tmp_path / "out" / "a" / "audit.json").exists()


def test_gen_reports_failures_with_exit_code(tmp_path, capsys):
    make_clip_tree(tmp_path / "in", ["good"])
    (tmp_path / "in" / "broken").mkdir()
    code = main([
        "gen",
        "--input", str(tmp_path / "in"),
        "--output", str(tmp_path / "out"),
        "--iterations", "30",
    ])
    assert code == 1
    out = capsys.readouterr().out
    assert "broken: error" in out
    assert "good: ok" in out


def test_flow_then_viz(tmp_path, capsys):
    make_clip_tree(tmp_path / "in", ["clip"], count=3)
    code = main([
        "flow",
        "--input", str(tmp_path / "in" / "clip"),
        "--output", str(tmp_path / "flo"),
        "--iterations", "40",
        "--pyramid-levels", "2",
    ])
    assert code == 0
    flo_files = sorted((tmp_path / "flo").glob("*.flo"))
    assert len(flo_files) == 2
    flow = read_flo_file(flo_files[0])
    assert flow.shape == (32, 32, 2)

    code = main(["viz", "--input", str(tmp_path / "flo"), "--output", str(tmp_path / "viz")])
    assert code == 0
    images = sorted((tmp_path / "viz").glob("*.png"))
    assert len(images) == 2
    assert load_frame(images[0]).shape == (32, 32, 3)


def test_viz_zero_flow_is_white(tmp_path):
    write_flo_file(tmp_path / "z.flo", np.zeros((4, 4, 2), np.float32))
    code = main(["viz", "--input", str(tmp_path / "z.flo"), "--output", str(tmp_path / "img")])
    assert code == 0
    image = load_frame(tmp_path / "img" / "z.png")
    assert (image == 255).all()


def test_audit_command(tmp_path, capsys):
    frames_dir = tmp_path / "frames"
    frames_dir.mkdir()
    for s in range(3):
        save_frame(frames_dir / f"{s:03d}.png", make_noise_frame(NoiseSpec(width=64, height=64, seed=s)))
    code = main(["audit", "--input", str(frames_dir), "--output", str(tmp_path / "report.json")])
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["summary"]["verdict"] == "pass"
    assert report["summary"]["frame_count"] == 3


def test_subset_command(tmp_path, capsys):
    csv = "a,b,c,d\n6,2,1,1\n2,6,1,1\n1,1,7,1\n1,1,1,7\n"
    (tmp_path / "conf.csv").write_text(csv)
    code = main(["subset", "--input", str(tmp_path / "conf.csv"), "--k", "2"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert sorted(payload["selected_labels"]) == ["a", "b"]
    assert len(payload["permutation"]) == 4


def test_bad_flo_input_reports_error(tmp_path, capsys):
    (tmp_path / "junk.flo").write_bytes(b"\x00" * 16)
    code = main(["viz", "--input", str(tmp_path / "junk.flo"), "--output", str(tmp_path / "o")])
    assert code == 1
    assert "BadMagic" in capsys.readouterr().err
