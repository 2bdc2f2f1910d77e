from .config import ANALYSIS_DEFAULTS, ConfigError, ProblemSpec, load_spec, validate
from .expr import EvaluationError, Expression, ExpressionError, evaluate, free_variables, parse, to_text
