"""
Checkpoint serialisation.

Binary layout, all integers unsigned 32-bit little-endian:

    b"PNET" | version | tensor count |
    per tensor: name length | name (utf-8) | rank | dims... | float32 LE payload, row-major

The model configuration travels next to the checkpoint as ``<path>.json``.
"""

import json
import struct
from collections import OrderedDict
from pathlib import Path
from typing import Dict, Mapping, Optional, Union

import numpy as np
import torch

from ..constants import CHECKPOINT_MAGIC, CHECKPOINT_VERSION
from ..exceptions import CheckpointError
from ..utils.logging import get_logger
from .config import ModelConfig
from .segmodel import SegModel, build_model

logger = get_logger(__name__)

PathLike = Union[str, Path]

_U32 = struct.Struct("<I")


def sidecar_path(path: PathLike) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def encode_state(state: Mapping[str, torch.Tensor]) -> bytes:
    """Serialise a state dict to checkpoint bytes."""
    chunks = [CHECKPOINT_MAGIC, _U32.pack(CHECKPOINT_VERSION), _U32.pack(len(state))]
    for name, tensor in state.items():
        encoded = name.encode("utf-8")
        array = tensor.detach().cpu().numpy().astype("<f4", copy=False)
        chunks.append(_U32.pack(len(encoded)))
        chunks.append(encoded)
        chunks.append(_U32.pack(array.ndim))
        chunks.extend(_U32.pack(d) for d in array.shape)
        chunks.append(np.ascontiguousarray(array).tobytes())
    return b"".join(chunks)


class _Reader:
    def __init__(self, data: bytes, source: str):
        self.data = data
        self.offset = 0
        self.source = source

    def take(self, n: int) -> bytes:
        if self.offset + n > len(self.data):
            raise CheckpointError(f"Truncated checkpoint {self.source} at byte {self.offset}")
        chunk = self.data[self.offset:self.offset + n]
        self.offset += n
        return chunk

    def u32(self) -> int:
        return _U32.unpack(self.take(4))[0]


def decode_state(data: bytes, source: str = "<bytes>") -> "OrderedDict[str, np.ndarray]":
    """
    Parse checkpoint bytes.

    Args:
        data: Raw file contents
        source: File name used in error messages

    Returns:
        Ordered mapping of tensor names to float32 arrays

    Raises:
        CheckpointError: On bad magic, unknown version, truncation or trailing bytes
    """
    reader = _Reader(data, source)
    if reader.take(len(CHECKPOINT_MAGIC)) != CHECKPOINT_MAGIC:
        logger.error(f"Bad checkpoint magic in {source}")
        raise CheckpointError(f"Not a PerceptiveNet checkpoint (bad magic): {source}")
    version = reader.u32()
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"Unsupported checkpoint version {version} in {source}")
    count = reader.u32()
    state = OrderedDict()
    for _ in range(count):
        name = reader.take(reader.u32()).decode("utf-8")
        rank = reader.u32()
        shape = tuple(reader.u32() for _ in range(rank))
        n_bytes = 4 * int(np.prod(shape, dtype=np.int64))
        state[name] = np.frombuffer(reader.take(n_bytes), dtype="<f4").reshape(shape).copy()
    if reader.offset != len(data):
        raise CheckpointError(f"Trailing bytes after {count} tensors in {source}")
    return state


def apply_state(model: torch.nn.Module, state: Mapping[str, np.ndarray], source: str = "<bytes>") -> None:
    """Copy decoded arrays into ``model``, casting to each target tensor's dtype."""
    own = model.state_dict()
    missing = sorted(set(own) - set(state))
    unexpected = sorted(set(state) - set(own))
    if missing or unexpected:
        raise CheckpointError(f"Checkpoint {source} does not match the model (missing {missing}, unexpected {unexpected})")
    restored = OrderedDict()
    for name, target in own.items():
        array = state[name]
        if tuple(array.shape) != tuple(target.shape):
            raise CheckpointError(f"Tensor {name} in {source} has shape {array.shape}, model expects {tuple(target.shape)}")
        restored[name] = torch.from_numpy(array).to(dtype=target.dtype, device=target.device)
    model.load_state_dict(restored)


def save_checkpoint(model: SegModel, path: PathLike, config: Optional[ModelConfig] = None) -> Path:
    """
    Write the model's full state and its configuration sidecar.

    Returns:
        Path of the checkpoint file
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_state(model.state_dict()))
    config = config or model.config
    sidecar_path(path).write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True))
    logger.info(f"Saved checkpoint {path}")
    return path


def read_state(path: PathLike) -> "OrderedDict[str, np.ndarray]":
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"Checkpoint not found: {path}")
    return decode_state(path.read_bytes(), str(path))


def read_config(path: PathLike) -> ModelConfig:
    sidecar = sidecar_path(path)
    if not sidecar.is_file():
        raise CheckpointError(f"Missing model config {sidecar} for checkpoint {path}")
    try:
        data: Dict = json.loads(sidecar.read_text())
    except json.JSONDecodeError as e:
        raise CheckpointError(f"Unreadable model config {sidecar}: {e}")
    return ModelConfig.from_dict(data).validate()


def restore_checkpoint(model: SegModel, path: PathLike) -> SegModel:
    """Load a checkpoint's tensors into an existing model."""
    apply_state(model, read_state(path), str(path))
    logger.info(f"Restored checkpoint {path}")
    return model


def load_checkpoint(path: PathLike, dtype: torch.dtype = torch.float32) -> SegModel:
    """
    Rebuild a model from a checkpoint and its sidecar.

    Args:
        path: Checkpoint file
        dtype: Floating dtype of the rebuilt model

    Returns:
        SegModel in eval mode

    Raises:
        CheckpointError: If either file is missing or corrupt
    """
    state = read_state(path)
    model = build_model(read_config(path)).to(dtype)
    apply_state(model, state, str(path))
    logger.info(f"Loaded checkpoint {path}")
    return model.eval()
