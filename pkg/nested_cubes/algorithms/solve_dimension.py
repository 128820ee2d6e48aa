"""Processing algorithms to sweep and invert the measure dimensions of a spec"""

# Copyright (C) 2026 nested_cubes contributors
#
# This program is free software; you can redistribute it and/or
# modify it under the terms of the GNU General Public License
# as published by the Free Software Foundation; either version 2
# of the License, or (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program; if not, write to the Free Software
# Foundation, Inc., 51 Franklin Street, Fifth Floor, Boston, MA  02110-1301, USA.

import io
from fractions import Fraction
from typing import Any

from ..processing import (
    OUTPUT,
    TABLE,
    TEXT,
    ProcessingAlgorithm,
    ProcessingContext,
    ProcessingFeedback,
    ProcessingParameterEnum,
    ProcessingParameterFile,
    ProcessingParameterNumber,
    ProcessingParameterRationalList,
)
from .utils.analysis import ivp_solve, sweep
from .utils.dimension import MEASURE_ASSOUAD, MEASURE_LOWER
from .utils.errors import InvalidParams
from .utils.formats import solve_result_to_json, write_sweep_csv

_SWEEP_DESCRIPTION = """Exact Assouad and lower dimensions of mu_{p,eta} along a grid of p.

The grid is --p (comma separated) or --steps evenly spaced values
i/(steps*M), i = 1..steps. The table is plot-ready CSV.
"""

_SOLVE_DESCRIPTION = """Find p whose measure dimension equals --target.

Assouad targets must lie at or above the spec's set dimension; lower targets
must be positive. When no p reaches a lower target and the spec has several
central slots, eta is moved away from uniform as well.
"""

_KINDS = {"assouad": MEASURE_ASSOUAD, "lower": MEASURE_LOWER}


class SweepAlgorithm(ProcessingAlgorithm):
    SPEC = "SPEC"
    P_LIST = "P_LIST"
    STEPS = "STEPS"
    ETA = "ETA"

    def initAlgorithm(self, config=None):
        self.addParameter(ProcessingParameterFile(self.SPEC, "Tree spec JSON", fromStdin=True))
        self.addParameter(
            ProcessingParameterRationalList(self.P_LIST, "Values of p, comma separated", flag="--p")
        )
        self.addParameter(ProcessingParameterNumber(self.STEPS, "Grid size", defaultValue=32))
        self.addParameter(
            ProcessingParameterRationalList(self.ETA, "Central weights eta, comma separated")
        )

    def processAlgorithm(
        self,
        parameters: dict[str, Any],
        context: ProcessingContext,
        feedback: ProcessingFeedback,
    ) -> dict[str, Any]:
        spec = self.parameterAsSpec(parameters, self.SPEC, context)
        grid = self.parameterAsRationalList(parameters, self.P_LIST, context)
        if grid is None:
            steps = self.parameterAsInt(parameters, self.STEPS, context)
            if steps < 1:
                raise InvalidParams("--steps must be positive")
            grid = [Fraction(i, steps * spec.max_branching) for i in range(1, steps + 1)]
        eta = self.parameterAsRationalList(parameters, self.ETA, context)

        rows = sweep(spec, grid, eta, context.config.workers)
        feedback.pushInfo(f"swept {len(rows)} values of p")
        buffer = io.StringIO()
        write_sweep_csv(rows, buffer)
        table = buffer.getvalue()
        return {
            OUTPUT: {
                "rows": [
                    {"p": r.p, "dim_assouad": r.dim_assouad, "dim_lower": r.dim_lower}
                    for r in rows
                ]
            },
            TEXT: table,
            TABLE: table,
        }

    def name(self):
        return "sweep"

    def displayName(self):
        return "Sweep p"

    def group(self):
        return "Solvers"

    def groupId(self):
        return "solve"

    def shortHelpString(self):
        return _SWEEP_DESCRIPTION


class SolveAlgorithm(ProcessingAlgorithm):
    SPEC = "SPEC"
    TARGET = "TARGET"
    KIND = "KIND"
    TOL = "TOL"

    def initAlgorithm(self, config=None):
        self.addParameter(ProcessingParameterFile(self.SPEC, "Tree spec JSON", fromStdin=True))
        self.addParameter(
            ProcessingParameterNumber(self.TARGET, "Target dimension", type=float, optional=False)
        )
        self.addParameter(
            ProcessingParameterEnum(self.KIND, "Dimension", list(_KINDS), defaultValue="assouad")
        )
        self.addParameter(
            ProcessingParameterNumber(self.TOL, "Tolerance", type=float, defaultValue=1e-6)
        )

    def processAlgorithm(
        self,
        parameters: dict[str, Any],
        context: ProcessingContext,
        feedback: ProcessingFeedback,
    ) -> dict[str, Any]:
        spec = self.parameterAsSpec(parameters, self.SPEC, context)
        result = ivp_solve(
            spec,
            self.parameterAsDouble(parameters, self.TARGET, context),
            _KINDS[self.parameterAsEnum(parameters, self.KIND, context)],
            self.parameterAsDouble(parameters, self.TOL, context),
        )
        feedback.pushInfo(f"p={float(result.p):.10g} after {result.iterations} bisections")
        return {OUTPUT: solve_result_to_json(result)}

    def name(self):
        return "solve"

    def displayName(self):
        return "Solve for p"

    def group(self):
        return "Solvers"

    def groupId(self):
        return "solve"

    def shortHelpString(self):
        return _SOLVE_DESCRIPTION
