from conftest import smooth_texture, write_frames
from raft_export.cli import main

from flownoise import read_flo_file


def test_cli_exports(tmp_path, jiggle_clip, local_checkpoint, capsys):
    code = main([
        "--input", str(jiggle_clip),
        "--output", str(tmp_path / "flo"),
        "--checkpoint", f"raft_small:{local_checkpoint}",
        "--flow-updates", "2",
    ])
    assert code == 0
    assert "wrote 9 flow files" in capsys.readouterr().out
    assert read_flo_file(tmp_path / "flo" / "flow_00008.flo", allow_unknown=True).shape == (128, 128, 2)


def test_cli_reports_missing_checkpoint(tmp_path, capsys):
    write_frames(tmp_path / "in", [smooth_texture(), smooth_texture(seed=6)])
    code = main([
        "--input", str(tmp_path / "in"),
        "--output", str(tmp_path / "out"),
        "--checkpoint", f"raft_small:{tmp_path}/missing.pth",
    ])
    assert code == 1
    assert "MissingCheckpoint" in capsys.readouterr().err


def test_cli_reports_too_few_frames(tmp_path, capsys):
    write_frames(tmp_path / "in", [smooth_texture()])
    code = main([
        "--input", str(tmp_path / "in"),
        "--output", str(tmp_path / "out"),
    ])
    assert code == 1
    assert "FrameCountTooSmall" in capsys.readouterr().err
