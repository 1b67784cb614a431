"""Gumbel-Max sketches: generation, streaming, merging, and estimation.

The core objects are :class:`~gmsketch.sketch.WeightedVector` and
:class:`~gmsketch.sketch.GumbelMaxSketch`; the generators in
:mod:`gmsketch.sketch` and :mod:`gmsketch.stream` produce identical
sketches for identical seed schemes, and :mod:`gmsketch.estimate` turns
sketches into similarity, cardinality, and set-algebra estimates.  An
HTTP service (:mod:`gmsketch.service`) exposes the same operations over
the wire; the command line (:mod:`gmsketch.cli`) is a thin client of it.
"""

from .errors import (
    DatasetParseError,
    EmptyVectorError,
    GmSketchError,
    IncompleteSketchError,
    InconsistentWeightError,
    InvalidParameterError,
    InvalidWeightError,
    MismatchedSketchError,
    MissingElementError,
    QueueExhaustedError,
    UnknownDistributionError,
)
from .estimate import (
    CardinalityEstimate,
    SetAlgebraEstimate,
    SimilarityEstimate,
    estimate_cardinality,
    estimate_difference,
    estimate_jaccard_p,
    estimate_set_algebra,
    exact_jaccard_p,
    exact_jaccard_w,
    merge,
)
from .randgen import (
    ElementQueueState,
    SeedScheme,
    derive_seed,
    next_order_statistic,
    uniform_open,
)
from .sketch import (
    GenerationParams,
    GumbelMaxSketch,
    WeightedVector,
    compute_ri,
    sketch_fast,
    sketch_fast_counted,
    sketch_from_json,
    sketch_naive,
    sketch_naive_counted,
    sketch_to_json,
)
from .stream import (
    StreamSketchState,
    parse_stream_items,
    sketch_stream,
    stream_finalize,
    stream_update,
)

__version__ = "0.1.0"

__all__ = [
    "CardinalityEstimate",
    "DatasetParseError",
    "ElementQueueState",
    "EmptyVectorError",
    "GenerationParams",
    "GmSketchError",
    "GumbelMaxSketch",
    "IncompleteSketchError",
    "InconsistentWeightError",
    "InvalidParameterError",
    "InvalidWeightError",
    "MismatchedSketchError",
    "MissingElementError",
    "QueueExhaustedError",
    "SeedScheme",
    "SetAlgebraEstimate",
    "SimilarityEstimate",
    "StreamSketchState",
    "UnknownDistributionError",
    "WeightedVector",
    "compute_ri",
    "derive_seed",
    "estimate_cardinality",
    "estimate_difference",
    "estimate_jaccard_p",
    "estimate_set_algebra",
    "exact_jaccard_p",
    "exact_jaccard_w",
    "merge",
    "next_order_statistic",
    "parse_stream_items",
    "sketch_fast",
    "sketch_fast_counted",
    "sketch_from_json",
    "sketch_naive",
    "sketch_naive_counted",
    "sketch_stream",
    "sketch_to_json",
    "stream_finalize",
    "stream_update",
    "uniform_open",
    "__version__",
]
