"""Exact cosine-similarity index over cohort vectors.

Deliberately brute force: one float32 matrix in memory, a matmul per query,
full tie-broken ranking. Catalogue sizes here are thousands of rows, so exact
search is both fast enough and the reference behavior approximate indexes
would be judged against.

On-disk layout (little endian throughout):
  magic   8 bytes  b"NEUROEMB"
  version u32      1
  dim     u32
  count   u64
  count entries of: u32 byte length + UTF-8 accession
  count * dim float32, row major
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"NEUROEMB"
FORMAT_VERSION = 1


class IndexFormatError(ValueError):
    pass


class DimensionMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class RankedHit:
    rank: int  # 1-based
    accession: str
    similarity: float


def _read_exact(source, n: int) -> bytes:
    data = source.read(n)
    if len(data) != n:
        raise IndexFormatError(f"truncated index: wanted {n} bytes, got {len(data)}")
    return data


class VectorIndex:
    def __init__(self, dim: int):
        if dim <= 0:
            raise ValueError("dimension must be positive")
        self.dim = dim
        self.accessions: list[str] = []
        self._rows: list[np.ndarray] = []
        self._matrix: np.ndarray | None = None
        self._norms: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.accessions)

    def add(self, accession: str, vector: np.ndarray) -> None:
        if vector.shape != (self.dim,):
            raise DimensionMismatchError(
                f"expected vector of dimension {self.dim}, got {vector.shape}")
        if accession in set(self.accessions):
            raise ValueError(f"duplicate accession {accession!r}")
        self.accessions.append(accession)
        self._rows.append(np.asarray(vector, dtype=np.float32))
        self._matrix = None

    def _ensure_matrix(self) -> None:
        if self._matrix is None:
            if self._rows:
                self._matrix = np.stack(self._rows)
            else:
                self._matrix = np.zeros((0, self.dim), dtype=np.float32)
            norms = np.linalg.norm(self._matrix.astype(np.float64), axis=1)
            if np.any(norms == 0.0) and len(self._matrix):
                raise ValueError("index contains a zero vector")
            self._norms = norms

    @property
    def matrix(self) -> np.ndarray:
        self._ensure_matrix()
        return self._matrix

    def search(self, query: np.ndarray, k: int) -> list[RankedHit]:
        """Top-k by cosine similarity; ties broken by accession ascending."""
        if query.shape != (self.dim,):
            raise DimensionMismatchError(
                f"expected query of dimension {self.dim}, got {query.shape}")
        qnorm = np.linalg.norm(query)
        if qnorm == 0.0:
            raise ValueError("cannot search with a zero query vector")
        if k <= 0:
            raise ValueError("k must be positive")
        self._ensure_matrix()
        if not len(self.accessions):
            return []
        sims = (self._matrix.astype(np.float64) @ (query / qnorm)) / self._norms
        order = sorted(range(len(sims)), key=lambda i: (-sims[i], self.accessions[i]))
        return [RankedHit(rank=r + 1, accession=self.accessions[i],
                          similarity=float(sims[i]))
                for r, i in enumerate(order[:k])]

    def rank_of(self, query: np.ndarray, accession: str) -> int:
        """1-based rank of `accession` under the same ordering as search."""
        hits = self.search(query, len(self.accessions))
        for hit in hits:
            if hit.accession == accession:
                return hit.rank
        raise KeyError(accession)

    def save(self, sink) -> None:
        self._ensure_matrix()
        sink.write(MAGIC)
        sink.write(struct.pack("<IIQ", FORMAT_VERSION, self.dim, len(self.accessions)))
        for accession in self.accessions:
            raw = accession.encode("utf-8")
            sink.write(struct.pack("<I", len(raw)))
            sink.write(raw)
        sink.write(self._matrix.astype("<f4").tobytes(order="C"))

    @classmethod
    def load(cls, source) -> "VectorIndex":
        magic = _read_exact(source, len(MAGIC))
        if magic != MAGIC:
            raise IndexFormatError(f"bad magic {magic!r}")
        version, dim, count = struct.unpack("<IIQ", _read_exact(source, 16))
        if version != FORMAT_VERSION:
            raise IndexFormatError(f"unsupported version {version}")
        index = cls(dim=dim)
        for _ in range(count):
            (length,) = struct.unpack("<I", _read_exact(source, 4))
            index.accessions.append(_read_exact(source, length).decode("utf-8"))
        payload = _read_exact(source, count * dim * 4)
        matrix = np.frombuffer(payload, dtype="<f4").reshape(count, dim).copy()
        index._rows = list(matrix)
        index._ensure_matrix()
        trailing = source.read(1)
        if trailing:
            raise IndexFormatError("trailing bytes after vector payload")
        return index


def build_index(accessions: list[str], matrix: np.ndarray) -> VectorIndex:
    if matrix.ndim != 2 or matrix.shape[0] != len(accessions):
        raise DimensionMismatchError("matrix rows must align with accessions")
    index = VectorIndex(dim=matrix.shape[1])
    for accession, row in zip(accessions, matrix):
        index.add(accession, np.asarray(row))
    return index
