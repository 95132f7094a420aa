"""codebpc: sliding-window bits-per-character evaluation for code corpora.

Curates leakage-resistant validation corpora, computes stride-masked
sliding-window BPC from bounded-context models or external traces,
aggregates benchmark scores into a composite metric, and fits the
log-linear versus linear relationship between the two.
"""

__version__ = "0.1.0"

from .analysis import (  # noqa: F401
    FitReport,
    ModelComparison,
    ObservationPoint,
    compare_models,
    emit_plot_data,
    fit_least_squares,
    fit_linear_model,
    fit_log_model,
    load_points,
    save_points,
    slice_fit,
)
from .bpc import (  # noqa: F401
    BpcReport,
    WindowConfig,
    decompose_bpc,
    full_context_bpc,
    min_context_per_scored_token,
    sliding_window_bpc,
    truncated_bpc,
    window_schedule,
)
from .corpus import (  # noqa: F401
    CodeDocument,
    CorpusManifest,
    build_corpus,
    distribution_report,
    filter_min_tokens,
    filter_timestamp,
    load_manifest,
    make_document,
    manifest_from_documents,
    save_manifest,
    strip_boilerplate,
    weighted_sample,
)
from .errors import (  # noqa: F401
    CodeBpcError,
    ComputeError,
    ConfigError,
    InputError,
    OutputError,
)
from .minhash import (  # noqa: F401
    MinHashSignature,
    estimate_jaccard,
    exact_jaccard,
    lsh_dedup,
    minhash_signature,
)
from .ngram import (  # noqa: F401
    NGramModel,
    UniformModel,
    ngram_logprob,
    ngram_train,
    trace_from_model,
)
from .scoring import (  # noqa: F401
    BenchmarkResult,
    CompositeScore,
    ResponseRecord,
    composite_score,
    empty_ratio,
    extract_code,
    intelligence_metric,
    make_response_record,
    placeholder_scan,
    stop_predicate,
)
from .tokenize import tokenize_chars, tokenize_coverage, tokenize_simple  # noqa: F401
from .trace import LogProbTrace, TokenEvent, load_trace, write_trace  # noqa: F401
