"""Ray-time noise filters evaluated at candidate surface voxels.

Five spatially variant filters plus a pass-through, all sharing the same
border policy (reads outside the volume are 0) and all returning a real
value; quantization happens only at image write-out.

* mean: plain average over the M^3 kernel.
* sigma: average over kernel voxels within sigma_mult * global_sigma of the
  center value (the center always qualifies, so the divisor is >= 1).
* okada: average over the 6 face-adjacent neighbors whose absolute
  difference from the center is below okada_threshold; 0 when none qualify.
  The center voxel itself is not part of the sum.
* entropy: sum over the M^3 kernel voxels of -p*log2(p) of each voxel's
  global grey-level probability; passes the raw center value when that sum
  exceeds entropy_threshold bits, else 0.
* local-cluster: mean of nine axis-arm cluster averages - one at the center
  voxel and eight at the diagonal offsets (+-d, +-d, +-d).  A cluster
  average at c is (1/3M) * sum of the three M-sample axis arms through c,
  so the cluster center is counted once per axis.

Every filter has a vectorized ``*_batch`` form (coordinate arrays in,
float64 out) used by the renderer; the scalar forms wrap them.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass, replace

import numpy as np

from .grid import gather_center, gather_offsets
from .histogram import HistogramModel
from .volume import Volume


class FilterError(Exception):
    pass


class FilterKind(enum.Enum):
    NONE = "none"
    MEAN = "mean"
    SIGMA = "sigma"
    OKADA = "okada"
    ENTROPY = "entropy"
    LOCAL_CLUSTER = "local-cluster"

    @classmethod
    def from_name(cls, name: str) -> "FilterKind":
        for kind in cls:
            if kind.value == name:
                return kind
        valid = ", ".join(k.value for k in cls)
        raise FilterError(f"unknown filter {name!r}; valid filters: {valid}")


@dataclass(frozen=True)
class FilterConfig:
    """Filter selection and tuning parameters.

    threshold is the lower intensity cut T; None means "derive from Otsu"
    and is resolved against the volume histogram wherever the config is
    used.  okada_threshold and entropy_threshold have no values in the
    source method descriptions; the defaults here are tunable choices and
    travel with every frame's metadata.
    """

    kind: FilterKind = FilterKind.NONE
    kernel_size: int = 3  # M, odd and >= 3
    threshold: float | None = None  # T; None = auto (Otsu)
    sigma_mult: float = 2.0
    okada_threshold: float = 25.0  # grey levels
    entropy_threshold: float = 2.0  # bits
    cluster_offset: int = 1  # d; diagonal cluster centers at (+-d,+-d,+-d)

    def __post_init__(self):
        if self.kernel_size < 3 or self.kernel_size % 2 == 0:
            raise FilterError(f"kernel_size must be odd and >= 3, got {self.kernel_size}")
        if self.threshold is not None and self.threshold < 0:
            raise FilterError(f"threshold must be >= 0, got {self.threshold}")
        if self.sigma_mult < 0 or self.okada_threshold < 0 or self.entropy_threshold < 0:
            raise FilterError("filter thresholds must be >= 0")
        if self.cluster_offset < 1:
            raise FilterError(f"cluster_offset must be >= 1, got {self.cluster_offset}")

    def resolve_threshold(self, histogram: HistogramModel | None) -> "FilterConfig":
        if self.threshold is not None:
            return self
        if histogram is None:
            raise FilterError("threshold is auto but no histogram was given")
        return replace(self, threshold=float(histogram.otsu_threshold))

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "kernel_size": self.kernel_size,
            "threshold": self.threshold,
            "sigma_mult": self.sigma_mult,
            "okada_threshold": self.okada_threshold,
            "entropy_threshold": self.entropy_threshold,
            "cluster_offset": self.cluster_offset,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FilterConfig":
        kind = FilterKind.from_name(obj.get("kind", "none"))
        kwargs = {}
        for key in (
            "kernel_size",
            "threshold",
            "sigma_mult",
            "okada_threshold",
            "entropy_threshold",
            "cluster_offset",
        ):
            if key in obj:
                kwargs[key] = obj[key]
        return cls(kind=kind, **kwargs)

    def digest(self) -> bytes:
        """First 8 bytes of sha256 over the canonical JSON form."""
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).digest()[:8]


# --- sampling helpers --------------------------------------------------------


def kernel_offsets(m: int) -> np.ndarray:
    """(M^3, 3) integer offsets, delta_i = i - (M-1)/2 per axis."""
    h = (m - 1) // 2
    r = np.arange(-h, h + 1)
    dx, dy, dz = np.meshgrid(r, r, r, indexing="ij")
    return np.stack([dx.reshape(-1), dy.reshape(-1), dz.reshape(-1)], axis=1)


def axis_arm_offsets(m: int) -> np.ndarray:
    """(3M, 3) offsets of the three axis arms through the center."""
    h = (m - 1) // 2
    r = np.arange(-h, h + 1)
    zeros = np.zeros(m, dtype=int)
    return np.concatenate(
        [
            np.stack([r, zeros, zeros], axis=1),
            np.stack([zeros, r, zeros], axis=1),
            np.stack([zeros, zeros, r], axis=1),
        ]
    )


def cluster_offsets(m: int, d: int) -> np.ndarray:
    """(9*3M, 3) offsets for the nine-cluster average (duplicates kept).

    Arm points of neighboring clusters can coincide; keeping duplicates
    makes the flat mean equal to the mean of the nine per-cluster means.
    """
    arms = axis_arm_offsets(m)
    centers = [(0, 0, 0)] + [(sx * d, sy * d, sz * d) for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)]
    return np.concatenate([arms + np.array(c) for c in centers])


def _offsets_mean(volume: Volume, cx, cy, cz, offsets: np.ndarray) -> np.ndarray:
    vals = gather_offsets(volume, cx, cy, cz, offsets)
    return vals.sum(axis=0, dtype=np.int64) / len(offsets)


# --- batch filters ------------------------------------------------------------


def mean_filter_batch(volume, cx, cy, cz, kernel_size: int = 3) -> np.ndarray:
    return _offsets_mean(volume, cx, cy, cz, kernel_offsets(kernel_size))


def axis_cluster_average_batch(volume, cx, cy, cz, kernel_size: int = 3) -> np.ndarray:
    return _offsets_mean(volume, cx, cy, cz, axis_arm_offsets(kernel_size))


def local_cluster_filter_batch(
    volume, cx, cy, cz, kernel_size: int = 3, cluster_offset: int = 1
) -> np.ndarray:
    return _offsets_mean(volume, cx, cy, cz, cluster_offsets(kernel_size, cluster_offset))


def sigma_filter_batch(
    volume, cx, cy, cz, kernel_size: int, sigma_mult: float, global_sigma: float
) -> np.ndarray:
    vals = gather_offsets(volume, cx, cy, cz, kernel_offsets(kernel_size))
    center = gather_center(volume, cx, cy, cz)
    diff = np.abs(vals.astype(np.int16) - center.astype(np.int16))
    ok = diff <= sigma_mult * global_sigma
    # the center always qualifies, so the divisor is never zero
    return (vals * ok).sum(axis=0, dtype=np.int64) / ok.sum(axis=0)


_FACE_OFFSETS = np.array(
    [[-1, 0, 0], [1, 0, 0], [0, -1, 0], [0, 1, 0], [0, 0, -1], [0, 0, 1]]
)


def okada_filter_batch(volume, cx, cy, cz, okada_threshold: float) -> np.ndarray:
    vals = gather_offsets(volume, cx, cy, cz, _FACE_OFFSETS)
    center = gather_center(volume, cx, cy, cz)
    ok = np.abs(center.astype(np.int16) - vals.astype(np.int16)) < okada_threshold
    n = ok.sum(axis=0)
    total = (vals * ok).sum(axis=0, dtype=np.int64).astype(np.float64)
    return np.divide(total, n, out=np.zeros_like(total), where=n > 0)


def entropy_terms(probabilities: np.ndarray) -> np.ndarray:
    """Per-level -p*log2(p) lookup table with 0*log2(0) = 0."""
    p = np.asarray(probabilities, dtype=np.float64)
    terms = np.zeros_like(p)
    nz = p > 0
    terms[nz] = -p[nz] * np.log2(p[nz])
    return terms


def entropy_filter_batch(
    volume, cx, cy, cz, kernel_size: int, entropy_threshold: float, probabilities: np.ndarray
) -> np.ndarray:
    vals = gather_offsets(volume, cx, cy, cz, kernel_offsets(kernel_size))
    h = entropy_terms(probabilities)[vals].sum(axis=0)
    center = gather_center(volume, cx, cy, cz).astype(np.float64)
    return np.where(h > entropy_threshold, center, 0.0)


def apply_filter_batch(
    volume: Volume,
    cx,
    cy,
    cz,
    config: FilterConfig,
    histogram: HistogramModel | None = None,
) -> np.ndarray:
    """Dispatch on config.kind; NONE passes the raw center value through."""
    kind = config.kind
    if kind in (FilterKind.SIGMA, FilterKind.ENTROPY) and histogram is None:
        raise FilterError(f"{kind.value} filter needs the volume histogram")
    if kind is FilterKind.NONE:
        return gather_center(volume, cx, cy, cz).astype(np.float64)
    if kind is FilterKind.MEAN:
        return mean_filter_batch(volume, cx, cy, cz, config.kernel_size)
    if kind is FilterKind.SIGMA:
        return sigma_filter_batch(
            volume, cx, cy, cz, config.kernel_size, config.sigma_mult, histogram.global_sigma
        )
    if kind is FilterKind.OKADA:
        return okada_filter_batch(volume, cx, cy, cz, config.okada_threshold)
    if kind is FilterKind.ENTROPY:
        return entropy_filter_batch(
            volume,
            cx,
            cy,
            cz,
            config.kernel_size,
            config.entropy_threshold,
            histogram.probabilities,
        )
    if kind is FilterKind.LOCAL_CLUSTER:
        return local_cluster_filter_batch(
            volume, cx, cy, cz, config.kernel_size, config.cluster_offset
        )
    raise FilterError(f"unhandled filter kind {kind}")


# --- scalar forms -------------------------------------------------------------


def _scalar(batch_result: np.ndarray) -> float:
    return float(batch_result[0])


def mean_filter(volume, cx: int, cy: int, cz: int, kernel_size: int = 3) -> float:
    return _scalar(mean_filter_batch(volume, [cx], [cy], [cz], kernel_size))


def axis_cluster_average(volume, cx: int, cy: int, cz: int, kernel_size: int = 3) -> float:
    return _scalar(axis_cluster_average_batch(volume, [cx], [cy], [cz], kernel_size))


def local_cluster_filter(volume, cx: int, cy: int, cz: int, config: FilterConfig) -> float:
    if config.kind is not FilterKind.LOCAL_CLUSTER:
        raise FilterError(f"config.kind must be local-cluster, got {config.kind.value}")
    return _scalar(
        local_cluster_filter_batch(
            volume, [cx], [cy], [cz], config.kernel_size, config.cluster_offset
        )
    )


def sigma_filter(
    volume, cx: int, cy: int, cz: int, kernel_size: int, sigma_mult: float, global_sigma: float
) -> float:
    return _scalar(
        sigma_filter_batch(volume, [cx], [cy], [cz], kernel_size, sigma_mult, global_sigma)
    )


def okada_filter(volume, cx: int, cy: int, cz: int, okada_threshold: float) -> float:
    return _scalar(okada_filter_batch(volume, [cx], [cy], [cz], okada_threshold))


def entropy_filter(
    volume,
    cx: int,
    cy: int,
    cz: int,
    kernel_size: int,
    entropy_threshold: float,
    probabilities: np.ndarray,
) -> float:
    return _scalar(
        entropy_filter_batch(
            volume, [cx], [cy], [cz], kernel_size, entropy_threshold, probabilities
        )
    )


def apply_filter(
    volume: Volume,
    cx: int,
    cy: int,
    cz: int,
    config: FilterConfig,
    histogram: HistogramModel | None = None,
) -> float:
    return _scalar(apply_filter_batch(volume, [cx], [cy], [cz], config, histogram))
