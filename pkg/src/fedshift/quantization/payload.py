"""
Upload wire format (version 1, little-endian).

    header   magic b'FSQP' | u16 version | u8 scheme | u8 bits | u32 layer count
    layer    u16 name length | utf-8 name | u32 element count | aux | packed indices

aux is two float32 bounds (w_min, w_max) for the uniform scheme, 2^bits float32 centroids for
k-means (short codebooks padded by repeating the last centroid), nothing for raw. Indices are
packed ``bits`` per element, least significant bit first, padded to a byte boundary per layer.
"""
import struct

import numpy as np

from fedshift.common.logger import get_logger
from fedshift.exceptions import ConfigurationError, CorruptionError, OutputError
from .types import (FULL_PRECISION_BITS, MAX_BITS, MIN_BITS, SCHEME_KMEANS, SCHEME_RAW, SCHEME_UNIFORM,
                    KMeansCodebook, QuantizedLayer, QuantizedModel, UniformCodec)

logger = get_logger(__name__)

MAGIC = b'FSQP'
VERSION = 1

_HEADER = struct.Struct('<4sHBBI')
_NAME_LEN = struct.Struct('<H')
_COUNT = struct.Struct('<I')
_FLOAT = 4

SCHEME_CODES = {
    SCHEME_UNIFORM: 0,
    SCHEME_KMEANS: 1,
    SCHEME_RAW: 2,
}
_CODE_SCHEMES = {code: scheme for scheme, code in SCHEME_CODES.items()}


def packed_length(count, bits):
    return (count * bits + 7) // 8


def aux_length(scheme, bits):
    if scheme == SCHEME_UNIFORM:
        return 2 * _FLOAT
    if scheme == SCHEME_KMEANS:
        return (2 ** bits) * _FLOAT
    return 0


def pack_indices(indices, bits):
    indices = np.asarray(indices, dtype=np.uint32)
    if indices.size == 0:
        return b''
    shifts = np.arange(bits, dtype=np.uint32)
    bit_matrix = ((indices[:, None] >> shifts) & 1).astype(np.uint8)
    return np.packbits(bit_matrix.reshape(-1), bitorder='little').tobytes()


def unpack_indices(buffer, count, bits):
    if count == 0:
        return np.zeros(0, dtype=np.uint32)
    raw = np.unpackbits(np.frombuffer(buffer, dtype=np.uint8), bitorder='little')
    bit_matrix = raw[:count * bits].reshape(count, bits).astype(np.uint64)
    weights = np.left_shift(np.uint64(1), np.arange(bits, dtype=np.uint64))
    return (bit_matrix * weights).sum(axis=1).astype(np.uint32)


def _aux_bytes(layer: QuantizedLayer):
    codec = layer.codec
    if isinstance(codec, UniformCodec):
        return np.asarray([codec.w_min, codec.w_max], dtype='<f4').tobytes()
    if isinstance(codec, KMeansCodebook):
        centroids = list(codec.centroids)
        centroids += [centroids[-1]] * (2 ** codec.bits - len(centroids))
        return np.asarray(centroids, dtype='<f4').tobytes()
    return b''


def serialize_payload(q: QuantizedModel) -> bytes:
    """
    Encode a QuantizedModel to bytes

    :param q: QuantizedModel
    :return: bytes
    """
    chunks = [_HEADER.pack(MAGIC, VERSION, SCHEME_CODES[q.scheme], q.bits, len(q.layers))]
    for layer in q.layers:
        if layer.bits != q.bits:
            raise ConfigurationError(f'layer {layer.name} has {layer.bits} bits, model has {q.bits}')
        name = layer.name.encode('utf-8')
        chunks.append(_NAME_LEN.pack(len(name)))
        chunks.append(name)
        chunks.append(_COUNT.pack(layer.size))
        chunks.append(_aux_bytes(layer))
        chunks.append(pack_indices(layer.indices, layer.bits))
    return b''.join(chunks)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, n, what):
        if self.offset + n > len(self.data):
            raise CorruptionError(f'truncated payload while reading {what}: need {n} bytes, '
                                  f'{len(self.data) - self.offset} left', offset=self.offset)
        chunk = self.data[self.offset:self.offset + n]
        self.offset += n
        return chunk

    def unpack(self, fmt: struct.Struct, what):
        return fmt.unpack(self.take(fmt.size, what))


def _read_codec(reader, scheme, bits, name):
    offset = reader.offset
    if scheme == SCHEME_UNIFORM:
        w_min, w_max = np.frombuffer(reader.take(2 * _FLOAT, f'{name} bounds'), dtype='<f4').astype(np.float64)
        if not (np.isfinite(w_min) and np.isfinite(w_max) and w_min <= w_max):
            raise CorruptionError(f'layer {name}: invalid bounds ({w_min}, {w_max})', offset=offset)
        return UniformCodec(w_min=w_min, w_max=w_max, bits=bits), 2 ** bits
    if scheme == SCHEME_KMEANS:
        padded = np.frombuffer(reader.take((2 ** bits) * _FLOAT, f'{name} codebook'), dtype='<f4').astype(np.float64)
        count = padded.size
        while count > 1 and padded[count - 1] == padded[count - 2]:
            count -= 1
        centroids = padded[:count]
        if not np.all(np.isfinite(centroids)) or np.any(np.diff(centroids) <= 0):
            raise CorruptionError(f'layer {name}: codebook is not strictly increasing', offset=offset)
        return KMeansCodebook(centroids=centroids, bits=bits), count
    return None, None


def deserialize_payload(data: bytes) -> QuantizedModel:
    """
    Decode bytes produced by serialize_payload

    :param data: bytes
    :return: QuantizedModel
    :raises CorruptionError: bad magic, version, scheme, bits, index or truncation
    """
    reader = _Reader(bytes(data))
    magic, version, scheme_code, bits, layer_count = reader.unpack(_HEADER, 'header')
    if magic != MAGIC:
        raise CorruptionError(f'bad magic {magic!r}', offset=0)
    if version != VERSION:
        raise CorruptionError(f'unsupported version {version}', offset=4)
    scheme = _CODE_SCHEMES.get(scheme_code)
    if scheme is None:
        raise CorruptionError(f'unknown scheme code {scheme_code}', offset=6)
    valid_bits = bits == FULL_PRECISION_BITS if scheme == SCHEME_RAW else MIN_BITS <= bits <= MAX_BITS
    if not valid_bits:
        raise CorruptionError(f'invalid bit width {bits} for scheme {scheme}', offset=7)

    layers = []
    for _ in range(layer_count):
        name_offset = reader.offset
        (name_length,) = reader.unpack(_NAME_LEN, 'layer name length')
        try:
            name = reader.take(name_length, 'layer name').decode('utf-8')
        except UnicodeDecodeError as e:
            raise CorruptionError(f'layer name is not utf-8: {e}', offset=name_offset)
        (count,) = reader.unpack(_COUNT, f'{name} element count')
        codec, limit = _read_codec(reader, scheme, bits, name)
        index_offset = reader.offset
        indices = unpack_indices(reader.take(packed_length(count, bits), f'{name} indices'), count, bits)
        if limit is not None and count and int(indices.max()) >= limit:
            raise CorruptionError(f'layer {name}: index {int(indices.max())} out of range for {limit} levels',
                                  offset=index_offset)
        layers.append(QuantizedLayer(name=name, indices=indices, codec=codec))
    if reader.offset != len(reader.data):
        raise CorruptionError(f'{len(reader.data) - reader.offset} trailing bytes', offset=reader.offset)
    return QuantizedModel(layers=layers, scheme=scheme, bits=bits)


def payload_size(q: QuantizedModel):
    """
    Packed index bytes and codec metadata bytes, as serialize_payload writes them

    :param q: QuantizedModel
    :return: (int, int)
    """
    weight_bytes = sum(packed_length(layer.size, layer.bits) for layer in q.layers)
    aux_bytes = sum(aux_length(layer.scheme, layer.bits) for layer in q.layers)
    return int(weight_bytes), int(aux_bytes)


def overhead_size(q: QuantizedModel):
    """Header and per-layer name/count bytes"""
    return _HEADER.size + sum(_NAME_LEN.size + len(layer.name.encode('utf-8')) + _COUNT.size for layer in q.layers)


def full_precision_size(num_params):
    return int(num_params) * _FLOAT


def transfer_efficiency(quantized_bytes, full_bytes, overhead_seconds, bandwidth_bytes_per_s):
    """
    Full-precision transfer time over quantized transfer-plus-overhead time

    Above 1 the quantized upload finishes first at this bandwidth.
    """
    if bandwidth_bytes_per_s <= 0:
        raise ConfigurationError(f'bandwidth must be positive, received {bandwidth_bytes_per_s}')
    full_time = full_bytes / bandwidth_bytes_per_s
    quantized_time = quantized_bytes / bandwidth_bytes_per_s + overhead_seconds
    return full_time / quantized_time


def write_payload(path, q: QuantizedModel):
    try:
        with open(path, 'wb') as fp:
            fp.write(serialize_payload(q))
    except OSError as e:
        raise OutputError(f'cannot write payload: {e}', path=str(path))
    logger.debug(f'Wrote payload {path}')


def read_payload(path) -> QuantizedModel:
    try:
        with open(path, 'rb') as fp:
            data = fp.read()
    except OSError as e:
        raise OutputError(f'cannot read payload: {e}', path=str(path))
    try:
        return deserialize_payload(data)
    except CorruptionError as e:
        raise e.add_context(path=str(path))
