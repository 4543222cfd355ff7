"""
Early stage of a vision transformer, up to and including PostLayerNorm.

VitStyle:  z(X) = LN_post(X + E_pos)
SwinStyle: z(X) = LN_post(LN_pre(X) + E_pos)

X is the N x D matrix of linearly projected, flattened patches. The class
token is not modelled; E_pos has exactly N rows.
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

from ..core.errors import InvalidArgumentError, ShapeError
from ..core.tensor import Matrix, Vector, as_matrix, derive_seeds, freeze, frobenius, mat_random_uniform
from .layer_norm import DEFAULT_EPSILON, LayerNormParams, layer_norm

TINY = 1e-300


class Variant(str, Enum):
    VIT = "vit"
    SWIN = "swin"

    @property
    def label(self) -> str:
        return "ViT (no PreLayerNorm)" if self is Variant.VIT else "Swin (PreLayerNorm)"


@dataclass(frozen=True)
class EarlyStageConfig:
    """Weights of one early stage. Immutable; arrays are read-only."""
    variant: Variant
    patch_size: int
    embed_dim: int
    image_size: int
    proj_weights: Matrix
    proj_bias: Vector
    pos_embed: Matrix
    post_ln: LayerNormParams
    pre_ln: Optional[LayerNormParams] = None

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.patch_size < 1 or self.image_size % self.patch_size:
            raise ShapeError(f"image size {self.image_size} is not divisible by patch size {self.patch_size}")
        object.__setattr__(self, "proj_weights", as_matrix(self.proj_weights, "proj_weights"))
        object.__setattr__(self, "pos_embed", as_matrix(self.pos_embed, "pos_embed"))
        object.__setattr__(self, "proj_bias", freeze(np.array(self.proj_bias, dtype=np.float64).reshape(-1)))

        d = self.embed_dim
        if self.proj_weights.shape != (self.patch_dim, d):
            raise ShapeError(f"proj_weights must be {(self.patch_dim, d)}, got {self.proj_weights.shape}")
        if self.proj_bias.shape != (d,):
            raise ShapeError(f"proj_bias must have length {d}, got {self.proj_bias.shape}")
        if self.pos_embed.shape != (self.num_patches, d):
            raise ShapeError(f"pos_embed must be {(self.num_patches, d)}, got {self.pos_embed.shape}")
        if self.post_ln.dim != d:
            raise ShapeError(f"post_ln has length {self.post_ln.dim}, embed_dim is {d}")
        if self.variant is Variant.SWIN:
            if self.pre_ln is None:
                raise InvalidArgumentError("SwinStyle requires pre_ln")
            if self.pre_ln.dim != d:
                raise ShapeError(f"pre_ln has length {self.pre_ln.dim}, embed_dim is {d}")
        elif self.pre_ln is not None:
            raise InvalidArgumentError("VitStyle must not carry pre_ln")

    @property
    def patch_dim(self) -> int:
        return self.patch_size * self.patch_size * 3

    @property
    def num_patches(self) -> int:
        return (self.image_size // self.patch_size) ** 2

    def with_pos_embed(self, pos_embed: Matrix) -> "EarlyStageConfig":
        return replace(self, pos_embed=pos_embed)

    def with_post_ln(self, post_ln: LayerNormParams) -> "EarlyStageConfig":
        return replace(self, post_ln=post_ln)


@dataclass(frozen=True)
class ScaleBias:
    """a*X + b, with b a scalar or a per-colour-channel vector of length 3."""
    a: float
    b: Union[float, Sequence[float]] = 0.0

    def __post_init__(self):
        if not np.isfinite(self.a) or self.a == 0:
            raise InvalidArgumentError(f"scale must be finite and nonzero, got {self.a}")
        object.__setattr__(self, "a", float(self.a))
        b = np.asarray(self.b, dtype=np.float64)
        if b.ndim == 0:
            object.__setattr__(self, "b", float(b))
        elif b.shape == (3,):
            object.__setattr__(self, "b", tuple(float(v) for v in b))
        else:
            raise ShapeError(f"bias must be a scalar or length-3 vector, got shape {b.shape}")

    @property
    def per_channel(self) -> bool:
        return isinstance(self.b, tuple)

    def patch_offset(self, cfg: EarlyStageConfig) -> Union[float, Vector]:
        """Offset added to every patch row.

        A per-colour bias adds b[c] to every pixel of channel c, which the
        projection turns into sum_c b[c] * (column sums of channel-c weights).
        """
        if not self.per_channel:
            return self.b
        channel_sums = cfg.proj_weights.reshape(-1, 3, cfg.embed_dim).sum(axis=0)
        return np.asarray(self.b) @ channel_sums

    def apply(self, x: Matrix, cfg: EarlyStageConfig) -> Matrix:
        return freeze(self.a * np.asarray(x, dtype=np.float64) + self.patch_offset(cfg))


def patchify(img, cfg: EarlyStageConfig) -> Matrix:
    """Split an H x W x 3 raster into patches and project each one.

    Patches are taken in raster order; each is flattened row-major over pixels
    with the three channels of a pixel adjacent.
    """
    pixels = np.asarray(getattr(img, "pixels", img), dtype=np.float64)
    if pixels.ndim != 3 or pixels.shape[2] != 3:
        raise ShapeError(f"image must be H x W x 3, got {pixels.shape}")
    h, w, _ = pixels.shape
    p = cfg.patch_size
    if h % p or w % p:
        raise ShapeError(f"image {h}x{w} is not divisible by patch size {p}")
    patches = (
        pixels.reshape(h // p, p, w // p, p, 3)
        .transpose(0, 2, 1, 3, 4)
        .reshape(-1, p * p * 3)
    )
    return freeze(patches @ cfg.proj_weights + cfg.proj_bias)


def _check_patches(x: Matrix, cfg: EarlyStageConfig) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != cfg.pos_embed.shape:
        raise ShapeError(f"patches have shape {x.shape}, config expects {cfg.pos_embed.shape}")
    return x


def outer_input(x: Matrix, cfg: EarlyStageConfig) -> Matrix:
    """Input of PostLayerNorm: X + E_pos, or LN_pre(X) + E_pos."""
    x = _check_patches(x, cfg)
    if cfg.variant is Variant.SWIN:
        x = layer_norm(x, cfg.pre_ln)
    return freeze(x + cfg.pos_embed)


def early_stage_forward(x: Matrix, cfg: EarlyStageConfig) -> Matrix:
    return layer_norm(outer_input(x, cfg), cfg.post_ln)


def consistency_gap(x: Matrix, sb: ScaleBias, cfg: EarlyStageConfig) -> float:
    """||z(aX + b) - z(X)||_F / ||z(X)||_F."""
    z = early_stage_forward(x, cfg)
    z_transformed = early_stage_forward(sb.apply(x, cfg), cfg)
    return frobenius(z_transformed - z) / max(frobenius(z), TINY)


def build_early_stage(
    variant: Union[Variant, str],
    image_size: int,
    patch_size: int,
    embed_dim: int,
    seed: int,
    pos_embed_scale: float = 1.0,
    epsilon: float = DEFAULT_EPSILON,
    center_projection: bool = True,
) -> EarlyStageConfig:
    """Seeded early stage.

    Both variants built from one seed share proj_weights, pos_embed and
    post_ln; only SwinStyle adds pre_ln. proj_weights ~ U[-1/sqrt(k), 1/sqrt(k))
    with k = patch_size^2 * 3. With ``center_projection`` every column is
    shifted to sum to zero, so a uniform grey image projects to the zero token.
    """
    variant = Variant(variant)
    if image_size % patch_size:
        raise ShapeError(f"image size {image_size} is not divisible by patch size {patch_size}")
    if pos_embed_scale <= 0:
        raise InvalidArgumentError(f"pos_embed_scale must be > 0, got {pos_embed_scale}")
    w_seed, pos_seed, post_seed, pre_seed = derive_seeds(seed, 4)

    patch_dim = patch_size * patch_size * 3
    bound = 1.0 / np.sqrt(patch_dim)
    weights = np.array(mat_random_uniform(patch_dim, embed_dim, -bound, bound, w_seed))
    if center_projection:
        weights -= weights.mean(axis=0, keepdims=True)

    num_patches = (image_size // patch_size) ** 2
    pos_embed = mat_random_uniform(num_patches, embed_dim, -pos_embed_scale, pos_embed_scale, pos_seed)
    post_ln = LayerNormParams.random(embed_dim, post_seed, epsilon)
    pre_ln = LayerNormParams.random(embed_dim, pre_seed, epsilon) if variant is Variant.SWIN else None

    return EarlyStageConfig(
        variant=variant,
        patch_size=patch_size,
        embed_dim=embed_dim,
        image_size=image_size,
        proj_weights=weights,
        proj_bias=np.zeros(embed_dim),
        pos_embed=pos_embed,
        post_ln=post_ln,
        pre_ln=pre_ln,
    )


def config_from_settings(variant: Union[Variant, str], seed: int, embedding) -> EarlyStageConfig:
    """Build from an ``EmbeddingSettings`` instance."""
    return build_early_stage(
        variant,
        image_size=embedding.image_size,
        patch_size=embedding.patch_size,
        embed_dim=embedding.embed_dim,
        seed=seed,
        pos_embed_scale=embedding.pos_embed_scale,
        epsilon=embedding.epsilon,
        center_projection=embedding.center_projection,
    )
