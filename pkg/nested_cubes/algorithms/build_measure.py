"""Processing algorithm to distribute mass over a cube tree"""

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

from fractions import Fraction
from typing import Any, Optional

from ..processing import (
    OUTPUT,
    ProcessingAlgorithm,
    ProcessingContext,
    ProcessingFeedback,
    ProcessingParameterBoolean,
    ProcessingParameterEnum,
    ProcessingParameterFile,
    ProcessingParameterNumber,
    ProcessingParameterRational,
    ProcessingParameterRationalList,
)
from .utils.cubes import METRIC, CubeTree
from .utils.errors import InvalidParams, SourceMismatch
from .utils.measures import (
    MassAssignment,
    assign_central_slots,
    build_counting_measure,
    build_mu_p,
    build_mu_p_eta,
)
from .utils.metric import FiniteMetricSpace, Metric

_DESCRIPTION = """Distribute a unit mass over a cube tree.

Each boundary child receives p times its parent's mass and the central
children share the rest in proportions --eta (uniform when omitted).
--counting instead gives every cube a mass proportional to its points.

For a metric tree, --J relabels every cube's children so that its J
children farthest inside it become the central slots; this needs --points.
"""

P = "P"
ETA = "ETA"
COUNTING = "COUNTING"


def add_measure_parameters(algorithm: ProcessingAlgorithm):
    algorithm.addParameter(ProcessingParameterRational(P, "Boundary mass fraction p"))
    algorithm.addParameter(
        ProcessingParameterRationalList(ETA, "Central weights eta, comma separated")
    )
    algorithm.addParameter(ProcessingParameterBoolean(COUNTING, "Use the counting measure"))


def measure_from_parameters(
    algorithm: ProcessingAlgorithm,
    parameters: dict[str, Any],
    context: ProcessingContext,
    tree: CubeTree,
) -> MassAssignment:
    if algorithm.parameterAsBool(parameters, COUNTING, context):
        return build_counting_measure(tree)
    p = algorithm.parameterAsRational(parameters, P, context)
    if p is None:
        raise InvalidParams("--p is required unless --counting is given")
    eta = algorithm.parameterAsRationalList(parameters, ETA, context)
    if eta is None and tree.J == 1:
        return build_mu_p(tree, p)
    return build_mu_p_eta(tree, p, eta or [Fraction(1, tree.J)] * tree.J)


class BuildMeasureAlgorithm(ProcessingAlgorithm):
    TREE = "TREE"
    POINTS = "POINTS"
    METRIC = "METRIC"
    J = "J"

    def initAlgorithm(self, config=None):
        self.addParameter(ProcessingParameterFile(self.TREE, "Cube tree JSON", fromStdin=True))
        self.addParameter(ProcessingParameterFile(self.POINTS, "Point cloud CSV of a metric tree"))
        self.addParameter(
            ProcessingParameterEnum(
                self.METRIC, "Metric for coordinate input", [m.value for m in Metric],
                defaultValue=Metric.EUCLIDEAN.value,
            )
        )
        self.addParameter(
            ProcessingParameterNumber(self.J, "Central slots per cube", flag="--J")
        )
        add_measure_parameters(self)

    def processAlgorithm(
        self,
        parameters: dict[str, Any],
        context: ProcessingContext,
        feedback: ProcessingFeedback,
    ) -> dict[str, Any]:
        tree = self.parameterAsTree(parameters, self.TREE, context)
        J: Optional[int] = self.parameterAsInt(parameters, self.J, context)

        relabeled = False
        if J is not None and J != tree.J:
            if tree.source != METRIC:
                raise SourceMismatch("central slots of a spec tree are fixed by its spec")
            metric = self.parameterAsEnum(parameters, self.METRIC, context)
            space: Optional[FiniteMetricSpace] = self.parameterAsPoints(
                parameters, self.POINTS, metric, context
            )
            if space is None:
                raise InvalidParams("--J on a metric tree needs --points")
            tree = assign_central_slots(tree, space, J)
            relabeled = True
            feedback.pushInfo(f"relabeled central slots with J={J}")

        mu = measure_from_parameters(self, parameters, context, tree)
        feedback.pushInfo(f"{mu.label}: {len(mu.table)} distinct masses over {tree.n_cubes} cubes")
        output = mu.to_json()
        if relabeled:
            output["tree_json"] = tree.to_json()
        return {OUTPUT: output}

    def name(self):
        return "measure-build"

    def displayName(self):
        return "Build measure"

    def command(self):
        return ("measure", "build")

    def group(self):
        return "Measures"

    def groupId(self):
        return "measure"

    def shortHelpString(self):
        return _DESCRIPTION
