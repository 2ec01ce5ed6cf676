"""Jordan-Pochhammer operators, branch-tracked periods and regulator double
integrals on cyclic covers of the line."""

from __future__ import annotations

from ._core import BACKEND
from .errors import PicardLabError
from .operator import build_jp_operator, lemma_identity_check
from .periods import ModelConfig
from .quadrature import QuadratureConfig

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ModelConfig",
    "PicardLabError",
    "QuadratureConfig",
    "build_jp_operator",
    "lemma_identity_check",
    "__version__",
]
