# Copyright 2025 Frank Sommers
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
Exception hierarchy for the Benjamin-equation laboratory.

Validation problems (bad parameters, unresolvable grids) derive from
``ValueError`` so callers that only know the standard library can still
catch them; failures of a computation derive from ``RuntimeError``. The CLI
maps the two families onto exit codes 2 and 3.
"""


class BlabError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(BlabError, ValueError):
    """A precondition on parameters, grids or inputs does not hold."""


class NumericalFailure(BlabError, RuntimeError):
    """A computation ran but did not produce a trustworthy result."""


class BlowUpError(NumericalFailure):
    """The time stepper produced non-finite or exploding values."""

    def __init__(self, message: str, time: float, max_abs: float):
        super().__init__(message)
        self.time = time
        self.max_abs = max_abs


class QuadratureError(NumericalFailure):
    """Successive quadrature refinements disagree by more than the allowed margin."""


class ConvergenceError(NumericalFailure):
    """An iteration that must be monotone (or contractive) was not."""
