"""Track common and distinct topics across an online and an offline document stream."""

from importlib import resources

from .factorization import (FactorPair, SolverOptions, multiplicative_update_step, nmf_factorize,
                            onmf_update, reconstruction_error)
from .joint import (JointFactorization, JointParams, joint_gradients, joint_objective,
                    joint_onmf_step, split_common_distinct)
from .metrics import MetricRecord, assign_common_topics, cscore, dscore, top_terms
from .runner import MethodKind, TimeSeriesResult, compare_methods, run_stream
from .textpipe import (Document, Source, StreamSchedule, Vocabulary, build_vocabulary,
                       interleave_schedule, tfidf_matrix, tokenize)

__version__ = "0.1.0"

__all__ = [
    "FactorPair", "SolverOptions", "multiplicative_update_step", "nmf_factorize", "onmf_update",
    "reconstruction_error", "JointFactorization", "JointParams", "joint_gradients", "joint_objective",
    "joint_onmf_step", "split_common_distinct", "MetricRecord", "assign_common_topics", "cscore",
    "dscore", "top_terms", "MethodKind", "TimeSeriesResult", "compare_methods", "run_stream",
    "Document", "Source", "StreamSchedule", "Vocabulary", "build_vocabulary", "interleave_schedule",
    "tfidf_matrix", "tokenize", "data_path",
]


def data_path(name):
    """Filesystem path of a bundled data file (``demo.json``, ``demo_corpus.jsonl``)."""
    return str(resources.files(__name__).joinpath("data", name))
