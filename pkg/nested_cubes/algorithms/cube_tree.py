"""Processing algorithms to build and validate cube trees"""

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
from typing import Any

from ..processing import (
    OUTPUT,
    PASSED,
    ProcessingAlgorithm,
    ProcessingContext,
    ProcessingFeedback,
    ProcessingParameterEnum,
    ProcessingParameterFile,
    ProcessingParameterNumber,
    ProcessingParameterRational,
    ProcessingParameterString,
)
from .utils.cubes import build_cube_tree, unfold_spec, validate_tree
from .utils.errors import InvalidParams
from .utils.formats import tree_validation_to_json
from .utils.metric import Metric

_BUILD_DESCRIPTION = """Build a cube tree.

With --points the tree is built over the point cloud from nested greedy
nets at radii scale * delta^k for k = 0..levels-1, rooted at --origin
(default: the first point). Otherwise the spec (--spec, or standard input)
is unfolded to --depth levels.
"""

_VALIDATE_DESCRIPTION = """Check the properties of a cube tree: partition, nesting,
the ball sandwich (metric trees, needs --points), origin, center persistence
and central/boundary kinds. Exits with status 1 when a property fails.
"""

_METRICS = [m.value for m in Metric]


class BuildTreeAlgorithm(ProcessingAlgorithm):
    POINTS = "POINTS"
    METRIC = "METRIC"
    SPEC = "SPEC"
    DELTA = "DELTA"
    LEVELS = "LEVELS"
    ORIGIN = "ORIGIN"
    DEPTH = "DEPTH"

    def initAlgorithm(self, config=None):
        self.addParameter(ProcessingParameterFile(self.POINTS, "Point cloud CSV"))
        self.addParameter(
            ProcessingParameterEnum(
                self.METRIC, "Metric for coordinate input", _METRICS,
                defaultValue=Metric.EUCLIDEAN.value,
            )
        )
        self.addParameter(ProcessingParameterFile(self.SPEC, "Tree spec JSON", fromStdin=True))
        self.addParameter(
            ProcessingParameterRational(self.DELTA, "Scale ratio delta", defaultValue=Fraction(1, 8))
        )
        self.addParameter(ProcessingParameterNumber(self.LEVELS, "Number of levels", defaultValue=4))
        self.addParameter(ProcessingParameterString(self.ORIGIN, "Origin point id"))
        self.addParameter(ProcessingParameterNumber(self.DEPTH, "Spec unfolding depth", defaultValue=6))

    def processAlgorithm(
        self,
        parameters: dict[str, Any],
        context: ProcessingContext,
        feedback: ProcessingFeedback,
    ) -> dict[str, Any]:
        metric = self.parameterAsEnum(parameters, self.METRIC, context)
        space = self.parameterAsPoints(parameters, self.POINTS, metric, context)

        if space is None:
            spec = self.parameterAsSpec(parameters, self.SPEC, context)
            depth = self.parameterAsInt(parameters, self.DEPTH, context)
            tree = unfold_spec(spec, depth)
            feedback.pushInfo(f"unfolded {tree.n_cubes} cubes to depth {depth}")
            return {OUTPUT: tree.to_json()}

        if space.n == 0:
            raise InvalidParams("the point cloud is empty")
        origin = self.parameterAsString(parameters, self.ORIGIN, context)
        if origin is None:
            origin = space.point_ids[0]
        delta = self.parameterAsRational(parameters, self.DELTA, context)
        levels = self.parameterAsInt(parameters, self.LEVELS, context)
        tree = build_cube_tree(space, delta, levels, origin)
        for flag in tree.flags:
            feedback.pushWarning(f"tree flagged: {flag}")
        feedback.pushInfo(f"built {tree.n_cubes} cubes over {space.n} points")
        return {OUTPUT: tree.to_json()}

    def name(self):
        return "tree-build"

    def displayName(self):
        return "Build cube tree"

    def command(self):
        return ("tree", "build")

    def group(self):
        return "Cube trees"

    def groupId(self):
        return "tree"

    def shortHelpString(self):
        return _BUILD_DESCRIPTION


class ValidateTreeAlgorithm(ProcessingAlgorithm):
    TREE = "TREE"
    POINTS = "POINTS"
    METRIC = "METRIC"

    def initAlgorithm(self, config=None):
        self.addParameter(ProcessingParameterFile(self.TREE, "Cube tree JSON", fromStdin=True))
        self.addParameter(ProcessingParameterFile(self.POINTS, "Point cloud CSV of a metric tree"))
        self.addParameter(
            ProcessingParameterEnum(
                self.METRIC, "Metric for coordinate input", _METRICS,
                defaultValue=Metric.EUCLIDEAN.value,
            )
        )

    def processAlgorithm(
        self,
        parameters: dict[str, Any],
        context: ProcessingContext,
        feedback: ProcessingFeedback,
    ) -> dict[str, Any]:
        tree = self.parameterAsTree(parameters, self.TREE, context)
        metric = self.parameterAsEnum(parameters, self.METRIC, context)
        space = self.parameterAsPoints(parameters, self.POINTS, metric, context)

        report = validate_tree(tree, space)
        for check in report.failed():
            feedback.pushWarning(f"{check.name} failed: {check.witness}")
        return {OUTPUT: tree_validation_to_json(report), PASSED: report.passed}

    def name(self):
        return "tree-validate"

    def displayName(self):
        return "Validate cube tree"

    def command(self):
        return ("tree", "validate")

    def group(self):
        return "Cube trees"

    def groupId(self):
        return "tree"

    def shortHelpString(self):
        return _VALIDATE_DESCRIPTION
