"""Video panoptic segmentation evaluation and semantic-vote fusion.

Public surface: the category registry and video containers with their
directory codecs, the windowed overlap kernel, VPQ/PQ/STQ metrics with
mergeable accumulators, the fusion rules, and the synthetic generator.
"""

from ._version import VERSION as __version__
from .categories import (Category, CategorySet, VOID_CATEGORY,
                         VOID_SEGMENT_ID, dump_categories, load_categories)
from .codecs import (decode_panoptic_video, decode_semantic_video,
                     encode_panoptic_video, encode_semantic_video)
from .errors import (CapacityError, IntegrityError, LabelError, ManifestError,
                     SchemaError, ShapeError, SpecError, UndefinedMetricError,
                     VpsEvalError)
from .fusion import (AuditRecord, FusionAudit, FusionConfig, correct_single_thing,
                     correct_stuff, fill_void, fuse, semantic_majority)
from .metrics import (CategoryTally, MetricAccumulator, StqAccumulator,
                      StqReport, VpqReport, WindowMatches, accumulate_stq,
                      match_window, merge_accumulators, pq_image, stq,
                      vpq_for_k, vpq_report)
from .rng import SplitMix64
from .synth import CorruptionSpec, SceneSpec, corrupt, generate
from .tubes import (OverlapTable, PairCounts, SegmentTube, TubeKey, WindowSpec,
                    extract_overlaps, pair_counts, tube_iou)
from .video import (PanopticFrame, PanopticVideo, Segment, SemanticVideo,
                    semantic_collapse, validate_panoptic_video,
                    validate_semantic_video)

__all__ = [
    "__version__",
    "Category", "CategorySet", "VOID_CATEGORY", "VOID_SEGMENT_ID",
    "dump_categories", "load_categories",
    "decode_panoptic_video", "decode_semantic_video",
    "encode_panoptic_video", "encode_semantic_video",
    "CapacityError", "IntegrityError", "LabelError", "ManifestError",
    "SchemaError", "ShapeError", "SpecError", "UndefinedMetricError",
    "VpsEvalError",
    "AuditRecord", "FusionAudit", "FusionConfig", "correct_single_thing",
    "correct_stuff", "fill_void", "fuse", "semantic_majority",
    "CategoryTally", "MetricAccumulator", "StqAccumulator", "StqReport",
    "VpqReport", "WindowMatches", "accumulate_stq", "match_window",
    "merge_accumulators", "pq_image", "stq", "vpq_for_k", "vpq_report",
    "SplitMix64",
    "CorruptionSpec", "SceneSpec", "corrupt", "generate",
    "OverlapTable", "PairCounts", "SegmentTube", "TubeKey", "WindowSpec",
    "extract_overlaps", "pair_counts", "tube_iou",
    "PanopticFrame", "PanopticVideo", "Segment", "SemanticVideo",
    "semantic_collapse", "validate_panoptic_video", "validate_semantic_video",
]
