import time

from equistream.core.util.log import log, set_log_level


def synchronize():
    """Barrier placed before every time read in the benchmarks.

    numpy work is synchronous; a CUDA device, when torch sees one, is drained.
    """
    import torch

    if torch.cuda.is_available():
        torch.cuda.synchronize()


def timed_loop(fn, warmup: int, iters: int, budget_s: float = None):
    """Run ``fn`` ``warmup`` times untimed, then ``iters`` timed calls.

    With ``budget_s`` the loop stops once that much wall time (warmup included) is spent; at least one
    timed call always runs.

    Returns:
        list[float]: per-iteration wall times in seconds.
    """
    begin = time.perf_counter()

    def spent() -> bool:
        return budget_s is not None and time.perf_counter() - begin >= budget_s

    for _ in range(warmup):
        if spent():
            break
        fn()
    times = []
    for _ in range(iters):
        if times and spent():
            log.warning(f'time budget of {budget_s:g} s spent after {len(times)} of {iters} timed iterations')
            break
        synchronize()
        start = time.perf_counter()
        fn()
        synchronize()
        times.append(time.perf_counter() - start)
    return times
