import logging
import sys


class Logger(object):
    """global logger

    Args:
        name (str, optional): logger name. Defaults to 'equistream'.
        filename (str, optional): log file name. Defaults to None.
        level (str, optional): log level( debug info warning error critical ). Defaults to 'warning'.
        fmt (str, optional): log format. Defaults to '[%(asctime)s][%(levelname)s] %(message)s'.
    PS:
        stdout carries CSV and manifests, so the stream handler always writes to stderr.
    """

    level_relations = {
        'debug': logging.DEBUG,
        'info': logging.INFO,
        'warning': logging.WARNING,
        'error': logging.ERROR,
        'critical': logging.CRITICAL,
    }

    def __init__(
        self,
        name: str = 'equistream',
        filename: str = None,
        level: str = 'warning',
        fmt: str = '[%(asctime)s][%(levelname)s] %(message)s',
    ):
        if filename == 'None':
            filename = None
        self.log = logging.getLogger(name)
        self.log.propagate = False
        format_str = logging.Formatter(fmt)
        self.set_level(level)
        # Re-importing must not stack handlers.
        if not self.log.handlers:
            sh = logging.StreamHandler(sys.stderr)
            sh.setFormatter(format_str)
            self.log.addHandler(sh)
            if filename is not None:
                th = logging.FileHandler(filename=filename, encoding='utf-8')
                th.setFormatter(format_str)
                self.log.addHandler(th)

    def set_level(self, level: str):
        if level not in self.level_relations:
            raise ValueError(f'unknown log level {level!r}, expected one of {list(self.level_relations)}')
        self.log.setLevel(self.level_relations[level])
