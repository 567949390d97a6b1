"""Binary persistence for feature matrices.

Layout (little-endian): magic "SSFT1", u8 kind-tag length, kind tag (ascii),
u32 dims, u32 num_frames, f64 hop seconds, then num_frames x dims float32
row-major.  Writes go through a temp file + rename so readers never see a
partial file.
"""

import os
import struct
import tempfile

import numpy as np

from .errors import BadMagic, TruncatedPayload
from .spectral import FeatureMatrix, check_kind_dims

MAGIC = b"SSFT1"


def atomic_write_bytes(path, data):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=os.path.basename(path) + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_feature(path, m):
    check_kind_dims(m.kind, m.dims)
    with np.errstate(over="ignore"):  # the isfinite check below handles it
        payload = m.data.astype("<f4")
    if not np.all(np.isfinite(payload)):
        raise ValueError("feature values overflow float32")
    kind = m.kind.encode("ascii")
    head = MAGIC + struct.pack("<B", len(kind)) + kind
    head += struct.pack("<IId", m.dims, m.num_frames, m.hop)
    atomic_write_bytes(path, head + payload.tobytes())


def read_feature(path, meta=""):
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[: len(MAGIC)] != MAGIC:
        raise BadMagic("not a feature file: %r" % raw[:5])
    pos = len(MAGIC)
    try:
        (klen,) = struct.unpack_from("<B", raw, pos)
        pos += 1
        kind = raw[pos : pos + klen].decode("ascii")
        if len(raw) < pos + klen + 16:
            raise struct.error("header")
        pos += klen
        dims, num_frames, hop = struct.unpack_from("<IId", raw, pos)
        pos += 16
    except (struct.error, UnicodeDecodeError):
        raise TruncatedPayload("feature file header incomplete") from None

    want = dims * num_frames * 4
    if len(raw) - pos != want:
        raise TruncatedPayload(
            "payload holds %d bytes, header declares %d" % (len(raw) - pos, want)
        )
    data = np.frombuffer(raw, dtype="<f4", count=dims * num_frames, offset=pos)
    return FeatureMatrix(
        kind=kind, data=data.reshape(num_frames, dims).astype(np.float64), hop=hop, meta=meta
    )
