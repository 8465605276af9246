import time
import traceback
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Iterator, List

import numpy as np

from equistream.core.config.verify import ToleranceCfg, VerifyCfg
from equistream.core.util import log


@dataclass
class PropertyResult:
    """Outcome of one checked property: the worst residual seen against its threshold.

    ``upper`` properties pass when ``residual <= tolerance``; lower-bound properties (fit quality, counts
    inside a range) set ``upper=False`` and pass when ``residual >= tolerance``.
    """

    suite: str
    name: str
    residual: float
    tolerance: float
    passed: bool
    upper: bool = True
    detail: str = ''
    seconds: float = 0.0

    def line(self) -> str:
        status = 'PASS' if self.passed else 'FAIL'
        op = '<=' if self.upper else '>='
        text = f'[{status}] {self.suite}/{self.name}: {self.residual:.3e} {op} {self.tolerance:.1e}'
        return f'{text} ({self.seconds:.2f}s) {self.detail}'.rstrip()


@dataclass
class SuiteReport:
    seed: int
    results: List[PropertyResult] = field(default_factory=list)
    config: VerifyCfg = None

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failures(self) -> List[PropertyResult]:
        return [r for r in self.results if not r.passed]

    def replay_command(self, suite: str) -> str:
        """Command line that reruns ``suite`` with the seed and every non-default option of this run."""
        parts = ['equistream verify', f'--suite {suite}', f'--seed {self.seed}']
        if self.config is not None:
            defaults = VerifyCfg()
            for key in ('draws', 'rotations'):
                value = getattr(self.config, key)
                if value != getattr(defaults, key):
                    parts.append(f'--{key} {value}')
            for key, value in self.config.tolerances.model_dump().items():
                if value != getattr(defaults.tolerances, key):
                    parts.append(f'--tol {key}={value!r}')
        return ' '.join(parts)

    def text(self) -> str:
        lines = [r.line() for r in self.results]
        for failure in self.failures:
            lines.append(f'replay {failure.suite}/{failure.name}: {self.replay_command(failure.suite)}')
        passed = len(self.results) - len(self.failures)
        lines.append(f'{passed}/{len(self.results)} properties passed (seed {self.seed})')
        return '\n'.join(lines) + '\n'


class BaseSuite(ABC):
    """A named group of property checks run by ``equistream verify``."""

    suites = {}

    def __init__(self, config: VerifyCfg):
        self.config = config
        self.tol: ToleranceCfg = config.tolerances
        self.name = None

    @classmethod
    def register(cls, name: str):
        """
        Register a suite class with the given name(decorator).

        Args:
            name(str): name of the suite
        """

        def wrapper(suite_class):
            cls.suites[name] = suite_class
            return suite_class

        return wrapper

    def rng(self, *salt: int) -> np.random.Generator:
        """Generator keyed by the run seed and a per-property salt, so one property replays alone."""
        return np.random.default_rng([self.config.seed, *salt])

    @abstractmethod
    def properties(self) -> Iterator[Callable[[], PropertyResult]]:
        """Yield zero-argument callables, each checking one property."""
        raise NotImplementedError(f'`properties` of {self.name} is not implemented')

    def check(self, name: str, residual: float, tolerance: float, upper: bool = True, detail: str = ''):
        residual = float(residual)
        if upper:
            passed = bool(residual <= tolerance)
        else:
            passed = bool(residual >= tolerance)
        return PropertyResult(self.name, name, residual, tolerance, passed, upper, detail)

    def run(self) -> List[PropertyResult]:
        results = []
        for prop in self.properties():
            name = getattr(prop, '__name__', 'property')
            start = time.perf_counter()
            try:
                result = prop()
            except Exception as e:
                log.error(f'{self.name}: property {name} raised {e!r}')
                log.debug(traceback.format_exc())
                result = PropertyResult(
                    self.name, name, float('nan'), 0.0, False, detail=f'raised {type(e).__name__}: {e}'
                )
            result.seconds = time.perf_counter() - start
            log.info(result.line())
            results.append(result)
        return results


def create_suite(name: str, config: VerifyCfg) -> BaseSuite:
    if name not in BaseSuite.suites:
        raise KeyError(f"""The suite {name} is not registered, please register it using `@BaseSuite.register`""")
    suite = BaseSuite.suites[name](config)
    suite.name = name
    return suite


def run_suites(config: VerifyCfg = None) -> SuiteReport:
    config = config or VerifyCfg()
    report = SuiteReport(seed=config.seed, config=config)
    for name in config.suites:
        report.results.extend(create_suite(name, config).run())
    return report
