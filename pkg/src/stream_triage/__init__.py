"""Online issue assignment: incremental TF-IDF, streaming NB, online boosting and ADWIN."""

from .activity import ActivityIndex
from .corpus import (
    EmptyStreamError,
    IssueRecord,
    IssueStream,
    ProjectStats,
    filter_projects,
    ingest,
    parse_issue_stream,
    project_stats,
)
from .drift import Adwin, DriftEvent
from .ensemble import OnlineBoost
from .evaluation import (
    CONFIG_NAMES,
    ModelConfig,
    RunResult,
    StepRecord,
    compare_configs,
    emit_report,
    run_pipeline,
    sweep,
)
from .featurize import Vectorizer, tokenize
from .learner import ColdStartError, MultinomialNB

__version__ = "0.1.0"
