"""Structure-inconsistency maps and NIR structure suppression.

Given binary edge maps from the RGB and NIR sides, the inconsistency
function scores each pixel:

* both edges present        -> 1      (consistent structure, trust NIR)
* exactly one edge present  -> 0      (severe inconsistency, suppress)
* neither edge present      -> lambda (no evidence either way)

Applied per scale and channel this yields the inconsistency pyramid;
multiplying it into the NIR structure maps discards NIR-only structures
(shadows, IR-invisible print) before fusion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .structure import StructurePyramid

DEFAULT_LAMBDA = 0.5


@dataclass(frozen=True)
class DipPyramid:
    """Per-scale, per-channel inconsistency maps with values in {0, lambda, 1}."""

    maps: tuple[tuple[np.ndarray, ...], ...]
    lam: float = DEFAULT_LAMBDA

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise ValueError(f"lambda must be in (0, 1), got {self.lam}")
        maps = tuple(tuple(np.asarray(m, dtype=np.float64) for m in level) for level in self.maps)
        if not maps:
            raise ValueError("inconsistency pyramid needs at least one scale")
        for level in maps:
            if len(level) != len(maps[0]):
                raise ValueError("every scale must have the same channel count")
            for m in level:
                if not np.all((m == 0.0) | (m == self.lam) | (m == 1.0)):
                    raise ValueError("inconsistency values must be exactly 0, lambda or 1")
                m.flags.writeable = False
        object.__setattr__(self, "maps", maps)

    @property
    def scales(self) -> int:
        return len(self.maps)

    @property
    def channels(self) -> int:
        return len(self.maps[0])


def _check_binary(name: str, plane: np.ndarray) -> np.ndarray:
    plane = np.asarray(plane, dtype=np.float64)
    if not np.all((plane == 0.0) | (plane == 1.0)):
        raise ValueError(f"{name} must be strictly binary")
    return plane


def inconsistency(edge_c: np.ndarray, edge_n: np.ndarray, lam: float = DEFAULT_LAMBDA) -> np.ndarray:
    """Elementwise inconsistency score lam*(1-c)*(1-n) + c*n of two edge maps."""
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lambda must be in (0, 1), got {lam}")
    edge_c = _check_binary("edge_c", edge_c)
    edge_n = _check_binary("edge_n", edge_n)
    if edge_c.shape != edge_n.shape:
        raise ValueError(f"edge map shapes differ: {edge_c.shape} vs {edge_n.shape}")
    return lam * (1.0 - edge_c) * (1.0 - edge_n) + edge_c * edge_n


def compute_dip(
    rgb: StructurePyramid,
    nir: StructurePyramid,
    lam: float = DEFAULT_LAMBDA,
) -> DipPyramid:
    """Inconsistency pyramid between RGB structures and (broadcast) NIR structures.

    The single NIR structure channel is compared against each RGB channel.
    """
    if rgb.scales != nir.scales:
        raise ValueError(f"scale counts differ: rgb {rgb.scales} vs nir {nir.scales}")
    if nir.channels != 1:
        raise ValueError(f"NIR structure pyramid must have 1 channel, got {nir.channels}")
    maps = tuple(
        tuple(inconsistency(rgb.maps[i][c], nir.maps[i][0], lam) for c in range(rgb.channels))
        for i in range(rgb.scales)
    )
    return DipPyramid(maps, lam=lam)


def weight_nir(nir: StructurePyramid, dip: DipPyramid) -> DipPyramid:
    """Suppress inconsistent NIR structures: weighted[i][c] = dip[i][c] * nir[i][0].

    NIR-only edges land on dip = 0 and vanish; consistent edges (dip = 1)
    survive unchanged, so values stay in {0, lambda, 1}.
    """
    if nir.scales != dip.scales:
        raise ValueError(f"scale counts differ: nir {nir.scales} vs dip {dip.scales}")
    if nir.channels != 1:
        raise ValueError(f"NIR structure pyramid must have 1 channel, got {nir.channels}")
    maps = []
    for i in range(dip.scales):
        level = []
        for c in range(dip.channels):
            if dip.maps[i][c].shape != nir.maps[i][0].shape:
                raise ValueError(f"map shapes differ at scale {i}, channel {c}")
            level.append(dip.maps[i][c] * nir.maps[i][0])
        maps.append(tuple(level))
    return DipPyramid(tuple(maps), lam=dip.lam)
