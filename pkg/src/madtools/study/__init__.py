from .core import (
    CRITERION_PROMPTS,
    CRITERION_TITLES,
    Criterion,
    DuplicateSubmissionError,
    MissingCriterionError,
    Presentation,
    PreferenceRecord,
    RATING_VALUES,
    StudyConfig,
    StudyError,
    StudyState,
    UnknownTokenError,
)
from .ratings import ModelRating, PairRate, RatingTable, fit_ratings, win_rates

__all__ = [
    "CRITERION_PROMPTS",
    "CRITERION_TITLES",
    "Criterion",
    "DuplicateSubmissionError",
    "MissingCriterionError",
    "ModelRating",
    "PairRate",
    "Presentation",
    "PreferenceRecord",
    "RATING_VALUES",
    "RatingTable",
    "StudyConfig",
    "StudyError",
    "StudyState",
    "UnknownTokenError",
    "fit_ratings",
    "win_rates",
]
