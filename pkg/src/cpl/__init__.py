"""Conditional probability logic over lifted Bayesian networks."""
from .asymptotics import TypeProbTable, critical_numbers, epsilon_margin, is_noncritical, msf_p, msf_p_cond
from .atomic_types import CompleteAtomicType, dimension, enumerate_types, restrict, to_type_disjunction
from .eliminator import (
    eliminate, eliminate_comparison, eliminate_existential, limit_probability, quantifier_free_network,
)
from .errors import (
    BoundExceededError, CPLError, CriticalFormulaError, EvaluationError, InvalidNetworkError, NetworkError,
    ParseError, SignatureError, ZeroMassError,
)
from .evaluator import FiniteStructure, evaluate, solution_set
from .formula import Signature, free_vars, parse, quantifier_rank, render, threshold_constants
from .network import LiftedNetwork, Rule, build, load, loads, mp_rank, strata, subnetwork, validate
from .worlds import estimate_probability, exact_probability, sample, world_probability

__version__ = "0.1.0"
