# Copyright (c) 2026 fedda contributors

# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:

# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.

# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.

import sys
from loguru import logger

#: Format shared by every console sink.
log_format = (
    '<green>[{time:HH:mm:ss}]</green> |  <magenta>{level}</magenta>  | '
    '<lvl>{message}</lvl>'
)


def set_logger(level: str = 'INFO', log_path: str = None):
    """
    Reset the loguru sinks. The console sink goes to stderr so
    that anything written to stdout stays machine readable.

    Parameters:

        :param level (str):
            Minimum level for the console sink.

        :param log_path (str : Optional):
            When given, a rotating file sink is added that
            always records DEBUG and above.
    """

    logger.remove()
    logger.add(sys.stderr, format=log_format, level=level.upper())
    if log_path:
        logger.add(
            log_path,
            rotation='100 MB',
            compression='zip',
            level='DEBUG'
        )
    return logger


set_logger()

__all__ = ['logger', 'set_logger']
