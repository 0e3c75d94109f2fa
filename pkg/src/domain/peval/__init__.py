"""オンライン部分評価器"""

from .embedding import embeds
from .msg import generalize, is_instance, is_variant, match, msg
from .residual import (
    ResidualPredicate,
    ResidualProgram,
    parse_residual,
    prune_by_success,
    rename_filter,
)
from .specializer import GlobalAtom, GlobalSet, RawResidual, Specializer, partial_evaluate
from .unfold import Resultant, Unfolder

__all__ = [
    "GlobalAtom",
    "GlobalSet",
    "RawResidual",
    "ResidualPredicate",
    "ResidualProgram",
    "Resultant",
    "Specializer",
    "Unfolder",
    "embeds",
    "generalize",
    "is_instance",
    "is_variant",
    "match",
    "msg",
    "parse_residual",
    "partial_evaluate",
    "prune_by_success",
    "rename_filter",
]
