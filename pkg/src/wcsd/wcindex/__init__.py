from .index import (DEFAULT_MEM_CAP, LabelStore, QueryTrace, StaleIndexError, WcIndex, build,
                    build_directed, query_distance, query_many, reconstruct_path, trace_query)
from .reference import (ConstructionState, SourceContext, prune_query, prune_query_fast,
                        reference_build)
from .validate import (ValidationReport, check_append_order, check_hub_rank, check_monotone,
                       check_size_bound, validate_complete, validate_minimal, validate_sound)

__all__ = [
    "DEFAULT_MEM_CAP",
    "LabelStore",
    "QueryTrace",
    "StaleIndexError",
    "WcIndex",
    "build",
    "build_directed",
    "query_distance",
    "query_many",
    "reconstruct_path",
    "trace_query",
    "ConstructionState",
    "SourceContext",
    "prune_query",
    "prune_query_fast",
    "reference_build",
    "ValidationReport",
    "check_append_order",
    "check_hub_rank",
    "check_monotone",
    "check_size_bound",
    "validate_complete",
    "validate_minimal",
    "validate_sound",
]
