"""Reading and writing 3D volumes.

Two on-disk formats are supported:

* NIfTI-1 single-file volumes (``.nii`` / ``.nii.gz``), the lingua franca
  of neuroimaging. A self-contained reader/writer is included here so the
  package has no imaging-library dependency; it covers the common scalar
  dtypes, voxel spacing, and intensity scaling, which is all this project
  needs.
* ``.rawvol``, a trivial json-header + raw-bytes container used where
  byte-level simplicity matters (synthetic fixtures, debugging).

Arrays are indexed ``[x, y, z]`` and NIfTI data is stored x-fastest, so
(de)serialization uses Fortran element order, matching the usual
neuroimaging convention.
"""

from __future__ import annotations

import gzip
import json
import struct
from pathlib import Path

import numpy as np

from .errors import DataError

_HDR_FMT = "<i10s18sihcc8h3fhhhh8ffffhccffffii80s24shh3f3f12f16s4s"
_HDR_SIZE = struct.calcsize(_HDR_FMT)
assert _HDR_SIZE == 348

# NIfTI-1 datatype codes.
_DTYPES = {
    2: np.dtype(np.uint8),
    4: np.dtype(np.int16),
    8: np.dtype(np.int32),
    16: np.dtype(np.float32),
    64: np.dtype(np.float64),
    256: np.dtype(np.int8),
    512: np.dtype(np.uint16),
    768: np.dtype(np.uint32),
}
_DTYPE_CODES = {v: k for k, v in _DTYPES.items()}

Spacing = tuple[float, float, float]


def _open_maybe_gz(path: Path, mode: str):
    if path.name.endswith(".gz"):
        # mtime=0 keeps writes byte-reproducible.
        return gzip.GzipFile(path, mode=mode, mtime=0)
    return open(path, mode)


def read_nifti(path: str | Path) -> tuple[np.ndarray, Spacing]:
    """Read a single-file NIfTI-1 volume; returns (array[x,y,z], spacing mm)."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"volume file not found: {path}")
    with _open_maybe_gz(path, "rb") as f:
        raw = f.read()
    if len(raw) < _HDR_SIZE:
        raise DataError(f"{path}: truncated NIfTI header")
    sizeof_hdr = struct.unpack("<i", raw[:4])[0]
    byteorder = "<"
    if sizeof_hdr != 348:
        sizeof_hdr = struct.unpack(">i", raw[:4])[0]
        if sizeof_hdr != 348:
            raise DataError(f"{path}: not a NIfTI-1 file (sizeof_hdr={sizeof_hdr})")
        byteorder = ">"
    fields = struct.unpack(byteorder + _HDR_FMT[1:], raw[:_HDR_SIZE])
    dim = fields[7:15]
    datatype = fields[19]
    pixdim = fields[22:30]
    vox_offset = int(fields[30])
    scl_slope, scl_inter = fields[31], fields[32]
    magic = fields[-1].rstrip(b"\0")
    if magic not in (b"n+1", b"ni1"):
        raise DataError(f"{path}: bad NIfTI magic {magic!r}")
    if magic == b"ni1":
        raise DataError(f"{path}: detached .hdr/.img pairs are not supported")
    ndim = dim[0]
    if ndim < 3 or any(d != 1 for d in dim[4 : 1 + ndim]):
        raise DataError(f"{path}: expected a 3D volume, got dim={dim}")
    shape = tuple(int(d) for d in dim[1:4])
    if datatype not in _DTYPES:
        raise DataError(f"{path}: unsupported NIfTI datatype code {datatype}")
    dtype = _DTYPES[datatype].newbyteorder(byteorder)
    count = int(np.prod(shape))
    data = np.frombuffer(raw, dtype=dtype, count=count, offset=vox_offset)
    arr = data.reshape(shape, order="F")
    if scl_slope not in (0.0, 1.0) or scl_inter != 0.0:
        slope = scl_slope if scl_slope != 0.0 else 1.0
        arr = arr.astype(np.float32) * slope + scl_inter
    else:
        arr = np.ascontiguousarray(arr.astype(arr.dtype.newbyteorder("=")))
    spacing = tuple(float(abs(p)) if p != 0 else 1.0 for p in pixdim[1:4])
    return arr, spacing


def write_nifti(path: str | Path, array: np.ndarray, spacing: Spacing = (1.0, 1.0, 1.0)) -> None:
    """Write ``array[x,y,z]`` as a single-file NIfTI-1 volume."""
    path = Path(path)
    array = np.asarray(array)
    if array.ndim != 3:
        raise DataError(f"expected a 3D array, got shape {array.shape}")
    dtype = np.dtype(array.dtype)
    if dtype not in _DTYPE_CODES:
        raise DataError(f"cannot write dtype {dtype} as NIfTI; convert first")
    sx, sy, sz = (float(s) for s in spacing)
    dim = (3, *array.shape, 1, 1, 1, 1)
    pixdim = (1.0, sx, sy, sz, 0.0, 0.0, 0.0, 0.0)
    header = struct.pack(
        _HDR_FMT,
        348,
        b"", b"", 0, 0, b"\0", b"\0",
        *dim,
        0.0, 0.0, 0.0, 0,
        _DTYPE_CODES[dtype],
        dtype.itemsize * 8,
        0,
        *pixdim,
        352.0,          # vox_offset: header + 4 extension-flag bytes
        1.0, 0.0,       # scl_slope / scl_inter
        0, b"\0",
        bytes([2]),     # xyzt_units: millimetres
        0.0, 0.0, 0.0, 0.0, 0, 0,
        b"lesionseg", b"",
        0, 1,           # qform_code, sform_code
        0.0, 0.0, 0.0,
        0.0, 0.0, 0.0,
        sx, 0.0, 0.0, 0.0,
        0.0, sy, 0.0, 0.0,
        0.0, 0.0, sz, 0.0,
        b"", b"n+1\0",
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    with _open_maybe_gz(path, "wb") as f:
        f.write(header)
        f.write(b"\0\0\0\0")
        f.write(np.asfortranarray(array).tobytes(order="F"))


_RAWVOL_MAGIC = b"RAWVOL1 "


def read_rawvol(path: str | Path) -> tuple[np.ndarray, Spacing]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"volume file not found: {path}")
    blob = path.read_bytes()
    if not blob.startswith(_RAWVOL_MAGIC):
        raise DataError(f"{path}: not a rawvol file")
    nl = blob.index(b"\n")
    meta = json.loads(blob[len(_RAWVOL_MAGIC) : nl])
    arr = np.frombuffer(blob, dtype=np.dtype(meta["dtype"]), offset=nl + 1)
    arr = arr.reshape(meta["shape"]).copy()
    return arr, tuple(float(s) for s in meta["spacing"])


def write_rawvol(path: str | Path, array: np.ndarray, spacing: Spacing = (1.0, 1.0, 1.0)) -> None:
    path = Path(path)
    array = np.ascontiguousarray(array)
    meta = {
        "shape": list(array.shape),
        "dtype": np.dtype(array.dtype).str,
        "spacing": [float(s) for s in spacing],
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(_RAWVOL_MAGIC)
        f.write(json.dumps(meta).encode())
        f.write(b"\n")
        f.write(array.tobytes())


def read_volume(path: str | Path) -> tuple[np.ndarray, Spacing]:
    """Read a volume, dispatching on file extension."""
    name = str(path)
    if name.endswith(".rawvol"):
        return read_rawvol(path)
    return read_nifti(path)


def write_volume(path: str | Path, array: np.ndarray, spacing: Spacing = (1.0, 1.0, 1.0)) -> None:
    """Write a volume, dispatching on file extension."""
    name = str(path)
    if name.endswith(".rawvol"):
        write_rawvol(path, array, spacing)
    else:
        write_nifti(path, array, spacing)
