"""
Binary model container.

Layout (little-endian):
    8 bytes   magic "SLKQSVM1"
    u32       format_version
    u32 + n   canonical JSON header (sorted keys, compact separators)
    per learner:
        u32 n_support, f64 alpha[n], f64 bias, i8 y[n], f64 features[n * 5],
        u8 kernel kind (0 = rbf, 1 = gate), f64 kernel parameter (rbf_gamma or angle_scale)
    u32       CRC32 of every preceding byte
"""
import json
import logging
import struct
import zlib
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
from pydantic import ValidationError

from slickqsvm.core.exceptions import (
    ChecksumException,
    CustomException,
    ModelFileException,
    NotFoundException,
    TruncatedFileException,
    VersionMismatchException,
)
from slickqsvm.models.domain import FORMAT_VERSION, N_FEATURES, FeatureScaler, ModelFile, WeakLearner
from slickqsvm.models.schemas import EnsembleHeader, KernelSpec, ModelHeader, ScalerHeader

logger = logging.getLogger(__name__)

MAGIC = b"SLKQSVM1"
KERNEL_CODES = {"rbf": 0, "gate": 1}
KERNEL_KINDS = {code: kind for kind, code in KERNEL_CODES.items()}

_U32 = struct.Struct("<I")
_F64 = struct.Struct("<d")
_KERNEL = struct.Struct("<Bd")


def canonical_json(payload: dict) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def build_header(model: ModelFile) -> ModelHeader:
    return ModelHeader(
        backend=model.backend,
        ensemble_config=EnsembleHeader(
            n_learners=model.n_learners,
            subset_size=model.subset_size,
            aggregation_rule=model.aggregation,
        ),
        feature_scaler=ScalerHeader(
            shift=[float(v) for v in model.scaler.shift],
            scale=[float(v) for v in model.scaler.scale],
        ),
        rng_seed=model.rng_seed,
        requested_learners=model.requested_learners,
        preprocess=model.preprocess,
        sampling=model.sampling,
        training=model.training,
    )


def _encode_learner(learner: WeakLearner) -> bytes:
    kind = learner.kernel.kind
    if kind not in KERNEL_CODES:
        raise ModelFileException(f"Kernel kind '{kind}' cannot be stored; learners keep 'rbf' or 'gate'")
    parameter = learner.kernel.rbf_gamma if kind == "rbf" else learner.kernel.angle_scale
    return b"".join(
        (
            _U32.pack(learner.n_support),
            learner.alphas.astype("<f8").tobytes(),
            _F64.pack(learner.bias),
            learner.support_y.astype("<i1").tobytes(),
            np.ascontiguousarray(learner.support_x, dtype="<f8").tobytes(),
            _KERNEL.pack(KERNEL_CODES[kind], parameter),
        )
    )


def encode_model(model: ModelFile) -> bytes:
    header = canonical_json(build_header(model).model_dump(mode="json"))
    body = b"".join(
        [MAGIC, _U32.pack(model.format_version), _U32.pack(len(header)), header]
        + [_encode_learner(learner) for learner in model.learners]
    )
    return body + _U32.pack(zlib.crc32(body) & 0xFFFFFFFF)


class _Reader:
    """Cursor over the file bytes that reports running out of data as truncation"""

    def __init__(self, data: bytes, offset: int = 0):
        self.data = data
        self.offset = offset

    def take(self, size: int) -> bytes:
        end = self.offset + size
        if end > len(self.data):
            raise TruncatedFileException(
                f"Model file is truncated: needed {size} bytes at offset {self.offset}, "
                f"{len(self.data) - self.offset} available"
            )
        chunk = self.data[self.offset:end]
        self.offset = end
        return chunk

    def unpack(self, fmt: struct.Struct) -> Tuple:
        return fmt.unpack(self.take(fmt.size))

    def array(self, dtype: str, count: int) -> np.ndarray:
        itemsize = np.dtype(dtype).itemsize
        return np.frombuffer(self.take(itemsize * count), dtype=dtype).copy()

    @property
    def remaining(self) -> int:
        return len(self.data) - self.offset


def _decode_learner(reader: _Reader) -> WeakLearner:
    (n_support,) = reader.unpack(_U32)
    alphas = reader.array("<f8", n_support)
    (bias,) = reader.unpack(_F64)
    support_y = reader.array("<i1", n_support)
    support_x = reader.array("<f8", n_support * N_FEATURES).reshape(n_support, N_FEATURES)
    code, parameter = reader.unpack(_KERNEL)
    if code not in KERNEL_KINDS:
        raise ModelFileException(f"Unknown kernel code {code}")
    kind = KERNEL_KINDS[code]
    kernel = KernelSpec(kind="rbf", rbf_gamma=parameter) if kind == "rbf" else KernelSpec(kind="gate", angle_scale=parameter)
    return WeakLearner(
        support_x=support_x.astype(np.float64),
        support_y=support_y.astype(np.int8),
        alphas=alphas.astype(np.float64),
        bias=bias,
        kernel=kernel,
    )


def _decode_body(reader: _Reader) -> ModelFile:
    (header_length,) = reader.unpack(_U32)
    header = ModelHeader.model_validate(json.loads(reader.take(header_length).decode("utf-8")))
    learners: List[WeakLearner] = [
        _decode_learner(reader) for _ in range(header.ensemble_config.n_learners)
    ]
    if reader.remaining < _U32.size:
        raise TruncatedFileException("Model file is truncated: checksum trailer missing")
    if reader.remaining > _U32.size:
        raise ModelFileException(f"Model file has {reader.remaining - _U32.size} unexpected trailing bytes")
    return ModelFile(
        backend=header.backend,
        scaler=FeatureScaler(
            shift=np.asarray(header.feature_scaler.shift),
            scale=np.asarray(header.feature_scaler.scale),
        ),
        learners=learners,
        subset_size=header.ensemble_config.subset_size,
        aggregation=header.ensemble_config.aggregation_rule,
        rng_seed=header.rng_seed,
        requested_learners=header.requested_learners,
        preprocess=header.preprocess,
        sampling=header.sampling,
        training=header.training,
    )


def decode_model(data: bytes) -> ModelFile:
    if len(data) < len(MAGIC) + _U32.size:
        raise TruncatedFileException("Model file is truncated before its version field")
    if data[: len(MAGIC)] != MAGIC:
        raise ModelFileException("Not a model file: magic bytes do not match")
    (version,) = _U32.unpack_from(data, len(MAGIC))
    if version != FORMAT_VERSION:
        raise VersionMismatchException(found=version, expected=FORMAT_VERSION)

    checksum_ok = len(data) >= len(MAGIC) + 3 * _U32.size and (
        zlib.crc32(data[:-_U32.size]) & 0xFFFFFFFF
    ) == _U32.unpack_from(data, len(data) - _U32.size)[0]

    try:
        model = _decode_body(_Reader(data, len(MAGIC) + _U32.size))
    except TruncatedFileException:
        raise
    except (ValueError, ValidationError, CustomException) as exc:
        if not checksum_ok:
            raise ChecksumException("Model file checksum mismatch (content is corrupted)") from None
        raise ModelFileException(f"Malformed model file: {exc}") from None

    if not checksum_ok:
        raise ChecksumException("Model file checksum mismatch (content is corrupted)")
    return model


def save_model(model: ModelFile, path: Union[str, Path]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_model(model))
    logger.info("Saved %s model %s (%d learners) to %s", model.backend, model.model_id, model.n_learners, path)


def load_model(path: Union[str, Path]) -> ModelFile:
    path = Path(path)
    if not path.is_file():
        raise NotFoundException(f"Model file '{path}' does not exist")
    model = decode_model(path.read_bytes())
    logger.info("Loaded %s model %s (%d learners) from %s", model.backend, model.model_id, model.n_learners, path)
    return model
