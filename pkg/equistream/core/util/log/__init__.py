from typing import Optional

from pydantic import BaseModel

from equistream.core.util.log.logger import Logger


class LogConfig(BaseModel):
    filename: Optional[str] = None
    level: Optional[str] = 'warning'
    fmt: Optional[str] = '[%(asctime)s][%(levelname)s] %(pathname)s[line:%(lineno)d] -: %(message)s'


config = LogConfig()

_logger = Logger(
    filename=config.filename,
    level=config.level,
    fmt=config.fmt,
)

# Use this rather than `Logger`
log = _logger.log


def set_log_level(level: str):
    """Change the process-wide level, e.g. from the CLI ``--log-level`` flag."""
    _logger.set_level(level)
