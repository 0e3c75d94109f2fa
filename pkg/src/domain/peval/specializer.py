"""大域制御 - 埋め込みと msg による呼び出しパターン集合の管理"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from loguru import logger

from src.shared.errors import GlobalLimitHit

from ..logic.builtins import is_builtin
from ..logic.store import ClauseStore
from ..logic.terms import Term, functor
from ..value_objects import PEConfig
from .embedding import embeds
from .msg import generalize, is_instance
from .residual import ResidualProgram, rename_filter
from .unfold import Resultant, Unfolder


@dataclass
class GlobalAtom:
    atom: Term
    resultants: Optional[list[Resultant]] = None
    alive: bool = True
    entry: bool = False

    @property
    def key(self) -> tuple[str, int]:
        return functor(self.atom)


@dataclass
class GlobalSet:
    """処理済み・未処理の一般化された呼び出しアトム"""

    atoms: list[GlobalAtom] = field(default_factory=list)

    def alive(self) -> list[GlobalAtom]:
        return [a for a in self.atoms if a.alive]

    def covering(self, atom: Term) -> Optional[GlobalAtom]:
        key = functor(atom)
        for g in self.atoms:
            if g.alive and g.key == key and is_instance(atom, g.atom):
                return g
        return None

    def next_pending(self) -> Optional[GlobalAtom]:
        return next((g for g in self.atoms if g.alive and g.resultants is None), None)


@dataclass
class RawResidual:
    """改名前の残余プログラム"""

    entry: Term
    atoms: list[GlobalAtom]
    steps: int
    whistles: int = 0
    generalizations: int = 0


class Specializer:
    def __init__(self, store: ClauseStore, config: PEConfig) -> None:
        self.store = store
        self.config = config
        self.unfolder = Unfolder(store, config)
        self.globals = GlobalSet()
        self.generalizations = 0

    def run(self, entry: Term) -> RawResidual:
        self.globals.atoms.append(GlobalAtom(entry, entry=True))
        while (pending := self.globals.next_pending()) is not None:
            pending.resultants = self.unfolder.unfold(pending.atom)
            logger.debug(
                "unfolded {}/{} into {} resultants", *pending.key, len(pending.resultants)
            )
            for resultant in pending.resultants:
                for literal in resultant.body:
                    if not is_builtin(literal) and functor(literal) in self.store:
                        self._add(literal)
        alive = self.globals.alive()
        logger.info(
            "partial evaluation: {} global atoms, {} unfolding steps",
            len(alive),
            self.unfolder.steps,
        )
        return RawResidual(
            entry=entry,
            atoms=alive,
            steps=self.unfolder.steps,
            whistles=self.unfolder.whistles,
            generalizations=self.generalizations,
        )

    def _add(self, atom: Term) -> None:
        if self.globals.covering(atom) is not None:
            return
        key = functor(atom)
        for g in self.globals.alive():
            if g.entry or g.key != key:
                continue
            if embeds(g.atom, atom, self.config.widen):
                general = generalize(g.atom, atom)
                g.alive = False
                self.generalizations += 1
                logger.debug("generalizing {}/{} with msg", *key)
                self._add(general)
                return
        self.globals.atoms.append(GlobalAtom(atom))
        alive = self.globals.alive()
        if len(alive) > self.config.max_global:
            raise GlobalLimitHit(
                self.config.max_global, [g.atom for g in alive if g.resultants is None]
            )


def partial_evaluate(
    store: ClauseStore,
    entry: Term,
    config: PEConfig,
    entry_name: str = "main",
    trace_positions: Optional[Mapping[tuple[str, int], tuple[int, ...]]] = None,
) -> ResidualProgram:
    """entry について store を部分評価し、改名済みの残余プログラムを返す"""
    raw = Specializer(store, config).run(entry)
    return rename_filter(raw, config.entry_name or entry_name, trace_positions, config.prune)
