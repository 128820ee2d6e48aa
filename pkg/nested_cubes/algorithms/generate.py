"""Processing algorithm to generate tree specs and point clouds"""

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
    ProcessingParameterNumber,
    ProcessingParameterRational,
)
from .utils.formats import write_points_csv
from .utils.generators import (
    boundary_rich_spec,
    cantor_points,
    grid_points,
    random_points,
    triadic_spec,
    uniform_spec,
)
from .utils.metric import Metric

_DESCRIPTION = """Emit a tree spec as JSON or a point cloud as CSV.

Specs:
- triadic: three children per interval, the middle one central, delta = 1/3
- uniform: one type with M children, J of them central (--M, --J, --delta)
- boundary-rich: a cycle of --beta-den types, the first --beta-num of them
  with M children, all other types with a single central child

Point clouds (ids 0..n-1):
- cantor: the 2^depth left endpoints of the middle-thirds construction
- grid: the lattice {0..n-1}^d scaled into [0,1]^d
- random: n uniform points in [0,1]^d drawn with --seed
"""

_SPECS = ("triadic", "uniform", "boundary-rich")
_POINTS = ("cantor", "grid", "random")

_DEFAULT_BOUNDARY_RICH_DELTA = Fraction(1, 8)


class GenerateAlgorithm(ProcessingAlgorithm):
    WHAT = "WHAT"
    M = "M"
    J = "J"
    DELTA = "DELTA"
    BETA_NUM = "BETA_NUM"
    BETA_DEN = "BETA_DEN"
    DEPTH = "DEPTH"
    DIM = "DIM"
    N = "N"
    METRIC = "METRIC"

    def initAlgorithm(self, config=None):
        self.addParameter(
            ProcessingParameterEnum(
                self.WHAT, "Spec or point cloud to generate", _SPECS + _POINTS,
                optional=False, positional=True,
            )
        )
        self.addParameter(
            ProcessingParameterNumber(self.M, "Children per cube", defaultValue=3, flag="--M")
        )
        self.addParameter(
            ProcessingParameterNumber(self.J, "Central children per cube", defaultValue=1, flag="--J")
        )
        self.addParameter(ProcessingParameterRational(self.DELTA, "Scale ratio delta"))
        self.addParameter(
            ProcessingParameterNumber(self.BETA_NUM, "Boundary types per period", defaultValue=1)
        )
        self.addParameter(
            ProcessingParameterNumber(self.BETA_DEN, "Types per period", defaultValue=2)
        )
        self.addParameter(
            ProcessingParameterNumber(self.DEPTH, "Cantor construction depth", defaultValue=6)
        )
        self.addParameter(
            ProcessingParameterNumber(self.DIM, "Ambient dimension", defaultValue=1, flag="--d")
        )
        self.addParameter(
            ProcessingParameterNumber(self.N, "Points per axis (grid) or in total (random)", defaultValue=27, flag="--n")
        )
        self.addParameter(
            ProcessingParameterEnum(
                self.METRIC, "Metric of the point cloud", [m.value for m in Metric],
                defaultValue=Metric.EUCLIDEAN.value,
            )
        )

    def processAlgorithm(
        self,
        parameters: dict[str, Any],
        context: ProcessingContext,
        feedback: ProcessingFeedback,
    ) -> dict[str, Any]:
        what = self.parameterAsEnum(parameters, self.WHAT, context)
        M = self.parameterAsInt(parameters, self.M, context)
        delta = self.parameterAsRational(parameters, self.DELTA, context)

        if what in _SPECS:
            if what == "triadic":
                spec = triadic_spec()
            elif what == "uniform":
                J = self.parameterAsInt(parameters, self.J, context)
                spec = uniform_spec(M, delta if delta is not None else Fraction(1, M), J)
            else:
                spec = boundary_rich_spec(
                    self.parameterAsInt(parameters, self.BETA_NUM, context),
                    self.parameterAsInt(parameters, self.BETA_DEN, context),
                    M,
                    delta if delta is not None else _DEFAULT_BOUNDARY_RICH_DELTA,
                )
            if spec.relaxed:
                feedback.pushWarning(f"delta={spec.delta} is at least 1/7; the spec is relaxed")
            feedback.pushInfo(f"{what} spec with {len(spec.types)} type(s)")
            return {OUTPUT: spec.to_json()}

        metric = self.parameterAsEnum(parameters, self.METRIC, context)
        d = self.parameterAsInt(parameters, self.DIM, context)
        n = self.parameterAsInt(parameters, self.N, context)
        if what == "cantor":
            space = cantor_points(self.parameterAsInt(parameters, self.DEPTH, context))
        elif what == "grid":
            space = grid_points(d, n, metric)
        else:
            space = random_points(d, n, context.config.seed, metric)
        feedback.pushInfo(f"{what}: {space.n} points")

        buffer = io.StringIO()
        write_points_csv(space, buffer)
        table = buffer.getvalue()
        return {
            OUTPUT: {"points": space.n, "metric": space.metric.value, "csv": table},
            TEXT: table,
            TABLE: table,
        }

    def name(self):
        return "gen"

    def displayName(self):
        return "Generate specs and point clouds"

    def group(self):
        return None

    def groupId(self):
        return None

    def shortHelpString(self):
        return _DESCRIPTION
