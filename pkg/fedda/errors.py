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

class FedDAError(Exception):
    pass

class ShapeError(FedDAError, ValueError):
    pass

class LabelError(FedDAError, ValueError):
    pass

class GradientError(FedDAError):
    pass

class ConfigError(FedDAError, ValueError):
    """
    Base error for configuration problems. When the problem
    comes from a config file, `line` holds the 1-based line number.
    """

    def __init__(self, message: str, line: int = None):
        self.line = line
        if line is not None:
            message = 'line %d: %s' % (line, message)
        super().__init__(message)

class ConfigSyntaxError(ConfigError):
    pass

class UnknownKeyError(ConfigError):
    pass

class ValueRangeError(ConfigError):
    pass

class EnumValueError(ConfigError):
    pass

class DatasetFormatError(FedDAError):
    pass

class MagicMismatchError(DatasetFormatError):
    pass

class VersionMismatchError(DatasetFormatError):
    pass

class TruncatedPayloadError(DatasetFormatError):
    pass

class AggregationError(FedDAError):
    pass

class ProtocolError(FedDAError):
    pass
