"""Point-range Bloom filter with prefix hashing and piecewise-monotone hashing."""

from .bitstore import SegmentedBitArray
from .config import FilterConfig, build_config, layer_count
from .dyadic import (
    CoverEntry,
    DyadicDecomposition,
    DyadicPiece,
    SIDE_BOTH,
    SIDE_LEFT,
    SIDE_RIGHT,
    decompose,
)
from .errors import (
    AdvisorError,
    BitStoreBoundsError,
    BloomRfError,
    ConfigError,
    GenerationError,
    QueryBoundsError,
    SerializationError,
)
from .filter import AccessCounter, BloomRf, CheckItem, bit_mask
from .hashing import (
    LayerHashSpec,
    base_hash,
    pmhf_position,
    pmhf_word,
    reverse_pmhf_position,
)
from .serialization import deserialize, serialize

__version__ = "0.1.0"

__all__ = [
    "AccessCounter",
    "AdvisorError",
    "BitStoreBoundsError",
    "BloomRf",
    "BloomRfError",
    "CheckItem",
    "ConfigError",
    "CoverEntry",
    "DyadicDecomposition",
    "DyadicPiece",
    "FilterConfig",
    "GenerationError",
    "LayerHashSpec",
    "QueryBoundsError",
    "SIDE_BOTH",
    "SIDE_LEFT",
    "SIDE_RIGHT",
    "SegmentedBitArray",
    "SerializationError",
    "base_hash",
    "bit_mask",
    "build_config",
    "decompose",
    "deserialize",
    "layer_count",
    "pmhf_position",
    "pmhf_word",
    "reverse_pmhf_position",
    "serialize",
    "__version__",
]
