"""Intuitionistic temporal logic over dynamic posets: semantics, normal forms,
stratified models, finite-model extraction and bounded decision procedures."""

from .formula import (
    FALSUM, TRUE, And, Atom, ClosureSet, Eventually, Falsum, Formula, FormulaSyntaxError,
    Henceforth, Implies, Next, Or, atoms, neg, parse_formula, print_formula, size,
    subformula_closure,
)
from .model import (
    DynamicModel, FrameClass, check_frame, confluence_witness, enumerate_models, load_model,
    save_model,
)
from .semantics import eventualities, evaluate, fulfillment, holds, sigma_set
from .labeled import (
    LabeledPoset, LabeledTree, bound_B, bounds, check_condensation, find_immersion,
    normalize_tree,
)
from .stratified import (
    LassoModel, extract_finite_model, flatten, stratify_prefix, transform_collapse,
    transform_collapse_connect, transform_normalize_stratum,
    transform_normalize_stratum_pointed, validate_lasso,
)
from .decide import (
    CounterModel, ExhaustedUpTo, Satisfiable, classical_ltl_sat, decide_sat, decide_valid,
)

__version__ = "0.1.0"
