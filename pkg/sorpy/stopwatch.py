''' elapsed time of fits and simulation runs, usable as object or context manager '''

import logging
import time

log = logging.getLogger(__name__)


class Stopwatch(object):
    '''
    Measures wall time with the performance counter.

    As a regular object:

    >>> stopwatch = Stopwatch()
    >>> stopwatch.start()
    >>> stopwatch.time_elapsed >= 0
    True
    >>> stopwatch.stop()
    >>> stopwatch.total_run_time >= 0
    True

    As a context manager, exceptions of the block propagate unchanged:

    >>> with Stopwatch("replicate") as stopwatch:
    ...     pass
    >>> stopwatch.total_run_time >= 0
    True
    '''

    def __init__(self, label=None):
        self.label = label
        self.start_time = None
        self.stop_time = None

    def start(self):
        self.start_time = time.perf_counter()

    def stop(self):
        self.stop_time = time.perf_counter()

    @property
    def time_elapsed(self):
        ''' seconds since start, while the stopwatch is running '''
        assert not self.stop_time, "Can't check `time_elapsed` on an ended `Stopwatch`."
        return time.perf_counter() - self.start_time

    @property
    def total_run_time(self):
        ''' seconds from start to stop '''
        return self.stop_time - self.start_time

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, type_, value, traceback):
        self.stop()
        if self.label:
            log.debug("%s took %.3f seconds", self.label, self.total_run_time)
        return False
