"""SFT sample generation from transition corpora.

Per transition: the next-state screenshot is relabeled into HTML (image to
code), the current screenshot gets a visual action annotation, and a
look-ahead reasoning trace is synthesized from the annotated pair.  The
assembled target is the exact string format the next-state predictor is
trained to emit, so the delimiter rules here and the output parser in
``evaluate.parse`` are two halves of one contract.
"""

from .annotate import ANNOTATABLE_KINDS, annotate_action, annotation_geometry
from .steps import (
    BlocklistReject,
    CodeState,
    DEFAULT_BLOCKLIST,
    DelimiterReject,
    ReasoningTrace,
    RelabelParseError,
    SftSample,
    build_sft_sample,
    check_blocklist,
    parse_relabel_response,
)
from .pipeline import GenerationReport, PipelineConfig, generate_dataset

__all__ = [
    "ANNOTATABLE_KINDS",
    "BlocklistReject",
    "CodeState",
    "DEFAULT_BLOCKLIST",
    "DelimiterReject",
    "GenerationReport",
    "PipelineConfig",
    "ReasoningTrace",
    "RelabelParseError",
    "SftSample",
    "annotate_action",
    "annotation_geometry",
    "build_sft_sample",
    "check_blocklist",
    "generate_dataset",
    "parse_relabel_response",
]
