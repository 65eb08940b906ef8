"""Observable daily market volatility from a panel of stock prices."""

__version__ = "0.1.0"

from .errors import InputError, StatisticalError  # noqa: E402
from .panel import (  # noqa: E402
    PricePanel,
    ReturnMatrix,
    align_panel,
    compute_returns,
    parse_price_csv,
    read_price_csv,
    write_price_csv,
)
from .index import (  # noqa: E402
    SQRT3,
    IndexSeries,
    WeightScheme,
    build_index_series,
    index_return,
    observable_volatility,
    residual_series,
)
from .corr import (  # noqa: E402
    CorrelationCurve,
    bootstrap_bands,
    cross_correlation,
    cross_correlation_reference,
)
from .diagnostics import (  # noqa: E402
    MomentSummary,
    RescaleReport,
    UniformityReport,
    compute_k,
    rescale_check,
    sample_moments,
    uniformity_test,
)
from .synth import (  # noqa: E402
    SynthConfig,
    SynthPanel,
    gen_market,
    gen_volatility_path,
    oracle_compare,
    write_synth,
)

__all__ = [
    "InputError",
    "StatisticalError",
    "#",
    "noqa:",
    "E402",
    "PricePanel",
    "ReturnMatrix",
    "align_panel",
    "compute_returns",
    "parse_price_csv",
    "read_price_csv",
    "write_price_csv",
    "#",
    "noqa:",
    "E402",
    "SQRT3",
    "IndexSeries",
    "WeightScheme",
    "build_index_series",
    "index_return",
    "observable_volatility",
    "residual_series",
    "#",
    "noqa:",
    "E402",
    "CorrelationCurve",
    "bootstrap_bands",
    "cross_correlation",
    "cross_correlation_reference",
    "#",
    "noqa:",
    "E402",
    "MomentSummary",
    "RescaleReport",
    "UniformityReport",
    "compute_k",
    "rescale_check",
    "sample_moments",
    "uniformity_test",
    "#",
    "noqa:",
    "E402",
    "SynthConfig",
    "SynthPanel",
    "gen_market",
    "gen_volatility_path",
    "oracle_compare",
    "write_synth",
]
