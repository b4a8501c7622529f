import numpy as np
import pytest
import torch
from PIL import Image
from scipy.ndimage import gaussian_filter

from raft_export.export import MissingCheckpoint, load_model


def _pretrained_available() -> bool:
    try:
        load_model("raft_small")
        return True
    except MissingCheckpoint:
        return False


_HAVE_PRETRAINED = None

PRETRAINED_SKIP_REASON = (
    "pretrained RAFT weights unavailable in this environment (not cached and "
    "download.pytorch.org unreachable); flow-quality assertions need them"
)


def have_pretrained() -> bool:
    global _HAVE_PRETRAINED
    if _HAVE_PRETRAINED is None:
        _HAVE_PRETRAINED = _pretrained_available()
    return _HAVE_PRETRAINED


@pytest.fixture(scope="session")
def local_checkpoint(tmp_path_factory):
    """A randomly initialized raft_small state dict saved to disk.

    Lets the export machinery run end to end in environments where the
    pretrained weights cannot be fetched; flow quality is meaningless with
    it, so quality assertions must use the real pretrained weights.
    """
    path = tmp_path_factory.mktemp("weights") / "raft_small_random.pth"
    from torchvision.models.optical_flow import raft_small

    torch.manual_seed(0)
    model = raft_small(weights=None)
    torch.save(model.state_dict(), path)
    return path


def smooth_texture(size=128, sigma=3.0, seed=5):
    rng = np.random.default_rng(seed)
    base = gaussian_filter(rng.uniform(0, 1, (size, size)), sigma, mode="wrap")
    base = (base - base.min()) / (base.max() - base.min())
    return np.repeat((base * 255).astype(np.uint8)[..., None], 3, axis=2)


def write_frames(directory, frames):
    directory.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(frames):
        Image.fromarray(frame, mode="RGB").save(directory / f"{i:04d}.png")


@pytest.fixture
def jiggle_clip(tmp_path):
    """Ten 128x128 frames of a texture nudged around integer offsets."""
    rng = np.random.default_rng(3)
    big = gaussian_filter(rng.uniform(0, 1, (144, 144)), 3.0)
    big = (big - big.min()) / (big.max() - big.min())
    offsets = [(0, 0), (1, 0), (1, 1), (0, 1), (0, 0), (2, 1), (2, 2), (1, 2), (0, 1), (0, 0)]
    frames = []
    for ox, oy in offsets:
        window = big[8 + oy:8 + oy + 128, 8 + ox:8 + ox + 128]
        frames.append(np.repeat((window * 255).astype(np.uint8)[..., None], 3, axis=2))
    clip_dir = tmp_path / "frames"
    write_frames(clip_dir, frames)
    return clip_dir
