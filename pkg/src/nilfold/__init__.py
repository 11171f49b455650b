"""Commutators, nilpotency and Higgins commutators of finite loops."""
from .errors import (
    BudgetExceeded,
    GuardError,
    NilfoldError,
    NotAGroup,
    NotInVariety,
    NotNormal,
    SectionCollapse,
    TooLarge,
    ValidationError,
)
from .loopcore import FiniteLoop, Homomorphism, builtin, parse_table, validate_loop
from .substructure import NormalSubloop, SubSet, all_normal_subloops, centre, normal_closure, quotient
from .commutators import huq_commutator, lower_central_series, nilpotency_class, tower_report
from .higgins import fold_class, higgins_lower, higgins_sandwich, higgins_upper, is_n_folded
from .nilsum import coproduct2, coproduct3, cosmash2, cr3, cube_limit3
from .triality import TrialityDatum, is_triality_group, reflect_to_triality, special_elements

__version__ = "0.1.0"
