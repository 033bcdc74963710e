"""gract: a compressed in-memory spatio-temporal index for trajectories."""

from .dataio import (BehaviorMix, GridConfig, OracleStore, RawPing,
                     RegularDataset, gen_synthetic, read_pings_csv,
                     regularize, write_pings_csv)
from .errors import (FormatError, GractError, NotFoundError, RangeError,
                     UnknownObjectError, ValidationError)
from .geometry import CellRect, chebyshev_to_rect
from .index import (MODE_GRACT, MODE_SCDC, IndexConfig, QueryOptions,
                    QueryStats, SizeReport, TrajectoryIndex, expand_region,
                    extract_log_streams)
from .k2tree import K2Tree
from .movement import (AbsReappear, LogEvent, Move, RelReappear, apply_event,
                       events_to_ints, ints_to_events, spiral_decode,
                       spiral_encode)
from .repair import Grammar, RuleMeta, enrich, repair_compress
from .scdc import (scdc_choose_s, scdc_decode_all, scdc_decode_next,
                   scdc_encode)
from .snapshot import NEVER_SEEN, AbsentInfo, Snapshot
from .succinct import BitVector, DacSequence, unzigzag, zigzag

__version__ = "0.1.0"

__all__ = [
    "AbsReappear", "AbsentInfo", "BehaviorMix", "BitVector", "CellRect",
    "DacSequence", "FormatError", "GractError", "Grammar", "GridConfig",
    "IndexConfig", "K2Tree", "LogEvent", "MODE_GRACT", "MODE_SCDC", "Move",
    "NEVER_SEEN", "NotFoundError", "OracleStore", "QueryOptions",
    "QueryStats", "RangeError", "RawPing", "RegularDataset", "RelReappear",
    "RuleMeta", "SizeReport", "Snapshot", "TrajectoryIndex",
    "UnknownObjectError", "ValidationError", "apply_event",
    "chebyshev_to_rect", "enrich", "events_to_ints", "expand_region",
    "extract_log_streams", "gen_synthetic", "ints_to_events",
    "read_pings_csv", "regularize", "repair_compress", "scdc_choose_s",
    "scdc_decode_all", "scdc_decode_next", "scdc_encode", "spiral_decode",
    "spiral_encode", "unzigzag", "write_pings_csv", "zigzag",
]
