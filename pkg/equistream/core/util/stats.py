from dataclasses import dataclass, field
from typing import Dict


@dataclass
class OpStats:
    """Counts multiply-adds and auxiliary array elements of an instrumented call.

    ``alloc``/``free`` track live auxiliary elements; ``peak_elems`` is their high-water mark.
    Counters only grow within a run.
    """

    madds: int = 0
    current_elems: int = 0
    peak_elems: int = 0
    by_kind: Dict[str, int] = field(default_factory=dict)

    def add_madds(self, n: int, kind: str = None):
        self.madds += int(n)
        if kind is not None:
            self.by_kind[kind] = self.by_kind.get(kind, 0) + int(n)

    def alloc(self, n: int):
        self.current_elems += int(n)
        self.peak_elems = max(self.peak_elems, self.current_elems)

    def free(self, n: int):
        self.current_elems -= int(n)

    def merge(self, other: 'OpStats'):
        self.madds += other.madds
        self.peak_elems = max(self.peak_elems, other.peak_elems)
        for kind, n in other.by_kind.items():
            self.by_kind[kind] = self.by_kind.get(kind, 0) + n
