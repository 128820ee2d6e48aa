"""Processing algorithms to estimate and compute Assouad and lower dimensions"""

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
    TEXT,
    ProcessingAlgorithm,
    ProcessingContext,
    ProcessingFeedback,
    ProcessingParameterEnum,
    ProcessingParameterFile,
    ProcessingParameterNumber,
    ProcessingParameterRational,
    ProcessingParameterRationalList,
)
from .build_measure import add_measure_parameters, measure_from_parameters
from .utils.dimension import (
    MEASURE_ASSOUAD,
    MEASURE_LOWER,
    SET_ASSOUAD,
    SET_LOWER,
    doubling_constant,
    exact_dimension_spec,
    measure_ball_estimate,
    measure_chain_estimate,
    set_assouad_estimate,
    set_lower_estimate,
)
from .utils.errors import InvalidParams
from .utils.formats import dimension_report_to_json, doubling_to_json, exact_dimension_to_json
from .utils.metric import FiniteMetricSpace, Metric, ScaleWindow
from .utils.rationals import as_fraction

_METRICS = [m.value for m in Metric]

_EXACT_KINDS = {
    "assouad": MEASURE_ASSOUAD,
    "lower": MEASURE_LOWER,
    "set-assouad": SET_ASSOUAD,
    "set-lower": SET_LOWER,
}

_SET_DESCRIPTION = """Estimate the Assouad (or lower) dimension of a point cloud.

Covering numbers N(x, R, r) are counted for sampled centers over the
geometric scales r_max * ratio^i inside [r_min, r_max]; the estimate is the
slope of the extremal log N against log(R/r), skipping balls that already
hold every point. The window defaults to [smallest distance, diameter]; the
ratio defaults to 1/b when r_max/r_min is a power of b (b <= 9), else 1/2.
"""

_MEASURE_DESCRIPTION = """Estimate the Assouad (or lower) dimension of a measure on a cube tree.

--method chain: extremal exponent of mass ratios along cube chains at least
--m-min levels long (no point data needed).
--method ball: extremal exponent of ball-mass ratios over sampled centers
and the scale window, over pairs at least two tree levels apart (needs
--points).
"""

_EXACT_DESCRIPTION = """Exact dimension of the infinite tree described by a spec.

The value is an optimal mean cycle of the spec's type graph; it is printed
as a fraction when it is rational. Measure kinds need --p (and --eta when the
spec has several central slots).
"""

_DOUBLING_DESCRIPTION = """Doubling constant of a point cloud, or of a measure with --tree.

Set form: sup N(x, 2r, r), counted exactly on small balls and greedily
beyond --cap points. Measure form: sup mu(B(x, 2r)) / mu(B(x, r)).
"""

POINTS = "POINTS"
METRIC = "METRIC"
KIND = "KIND"
R_MIN = "R_MIN"
R_MAX = "R_MAX"
RATIO = "RATIO"
SAMPLES = "SAMPLES"


def _add_point_parameters(algorithm: ProcessingAlgorithm, optional: bool = False):
    algorithm.addParameter(ProcessingParameterFile(POINTS, "Point cloud CSV", optional=optional))
    algorithm.addParameter(
        ProcessingParameterEnum(
            METRIC, "Metric for coordinate input", _METRICS, defaultValue=Metric.EUCLIDEAN.value
        )
    )


def _add_window_parameters(algorithm: ProcessingAlgorithm):
    algorithm.addParameter(ProcessingParameterRational(R_MIN, "Smallest scale"))
    algorithm.addParameter(ProcessingParameterRational(R_MAX, "Largest scale"))
    algorithm.addParameter(
        ProcessingParameterRational(RATIO, "Ratio between scales")
    )
    algorithm.addParameter(
        ProcessingParameterNumber(SAMPLES, "Number of sampled centers", defaultValue=64)
    )


def _window(
    algorithm: ProcessingAlgorithm, parameters, context, space: FiniteMetricSpace
) -> ScaleWindow:
    r_min = algorithm.parameterAsRational(parameters, R_MIN, context)
    r_max = algorithm.parameterAsRational(parameters, R_MAX, context)
    if r_min is None:
        smallest = space.min_positive_distance
        if smallest is None:
            raise InvalidParams("the point cloud has no positive distance")
        r_min = as_fraction(smallest)
    if r_max is None:
        r_max = as_fraction(space.diameter)
    return ScaleWindow(r_min, r_max)


def _value_text(value: float) -> str:
    return repr(float(value))


def _scales_text(window: ScaleWindow, ratio: Optional[Fraction]) -> str:
    return ", ".join(str(s) for s in window.grid(ratio))


class SetDimensionAlgorithm(ProcessingAlgorithm):
    MODE = "MODE"

    def initAlgorithm(self, config=None):
        _add_point_parameters(self)
        self.addParameter(
            ProcessingParameterEnum(KIND, "Dimension", ["assouad", "lower"], defaultValue="assouad")
        )
        self.addParameter(
            ProcessingParameterEnum(
                self.MODE, "Covering numbers", ["greedy", "exact"], defaultValue="greedy"
            )
        )
        _add_window_parameters(self)

    def processAlgorithm(
        self,
        parameters: dict[str, Any],
        context: ProcessingContext,
        feedback: ProcessingFeedback,
    ) -> dict[str, Any]:
        metric = self.parameterAsEnum(parameters, METRIC, context)
        space = self.parameterAsPoints(parameters, POINTS, metric, context)
        window = _window(self, parameters, context, space)
        ratio = self.parameterAsRational(parameters, RATIO, context)
        feedback.pushDebugInfo(f"scales {_scales_text(window, ratio)}")
        estimate = (
            set_assouad_estimate
            if self.parameterAsEnum(parameters, KIND, context) == "assouad"
            else set_lower_estimate
        )
        report = estimate(
            space,
            window,
            sample_budget=self.parameterAsInt(parameters, SAMPLES, context),
            ratio=ratio,
            mode=self.parameterAsEnum(parameters, self.MODE, context),
        )
        for flag in report.flags:
            feedback.pushWarning(f"estimate flagged: {flag}")
        return {
            OUTPUT: dimension_report_to_json(report, context.config.emit_evidence),
            TEXT: _value_text(report.value),
        }

    def name(self):
        return "dim-set"

    def displayName(self):
        return "Set dimension estimate"

    def command(self):
        return ("dim", "set")

    def group(self):
        return "Dimensions"

    def groupId(self):
        return "dim"

    def shortHelpString(self):
        return _SET_DESCRIPTION


class MeasureDimensionAlgorithm(ProcessingAlgorithm):
    TREE = "TREE"
    METHOD = "METHOD"
    M_MIN = "M_MIN"

    def initAlgorithm(self, config=None):
        self.addParameter(ProcessingParameterFile(self.TREE, "Cube tree JSON", fromStdin=True))
        _add_point_parameters(self, optional=True)
        self.addParameter(
            ProcessingParameterEnum(KIND, "Dimension", ["assouad", "lower"], defaultValue="assouad")
        )
        self.addParameter(
            ProcessingParameterEnum(
                self.METHOD, "Estimator", ["chain", "ball"], defaultValue="chain"
            )
        )
        self.addParameter(
            ProcessingParameterNumber(self.M_MIN, "Shortest chain in levels", defaultValue=1)
        )
        add_measure_parameters(self)
        _add_window_parameters(self)

    def processAlgorithm(
        self,
        parameters: dict[str, Any],
        context: ProcessingContext,
        feedback: ProcessingFeedback,
    ) -> dict[str, Any]:
        tree = self.parameterAsTree(parameters, self.TREE, context)
        mu = measure_from_parameters(self, parameters, context, tree)
        kind = self.parameterAsEnum(parameters, KIND, context)

        if self.parameterAsEnum(parameters, self.METHOD, context) == "chain":
            report = measure_chain_estimate(
                tree, mu, self.parameterAsInt(parameters, self.M_MIN, context), kind
            )
        else:
            metric = self.parameterAsEnum(parameters, METRIC, context)
            space = self.parameterAsPoints(parameters, POINTS, metric, context)
            if space is None:
                raise InvalidParams("the ball estimator needs --points")
            window = _window(self, parameters, context, space)
            ratio = self.parameterAsRational(parameters, RATIO, context)
            feedback.pushDebugInfo(f"scales {_scales_text(window, ratio)}")
            report = measure_ball_estimate(
                space,
                tree,
                mu,
                window,
                sample_budget=self.parameterAsInt(parameters, SAMPLES, context),
                kind=kind,
                ratio=ratio,
            )
        for flag in report.flags:
            feedback.pushWarning(f"estimate flagged: {flag}")
        return {
            OUTPUT: dimension_report_to_json(report, context.config.emit_evidence),
            TEXT: _value_text(report.value),
        }

    def name(self):
        return "dim-measure"

    def displayName(self):
        return "Measure dimension estimate"

    def command(self):
        return ("dim", "measure")

    def group(self):
        return "Dimensions"

    def groupId(self):
        return "dim"

    def shortHelpString(self):
        return _MEASURE_DESCRIPTION


class ExactDimensionAlgorithm(ProcessingAlgorithm):
    SPEC = "SPEC"
    P = "P"
    ETA = "ETA"

    def initAlgorithm(self, config=None):
        self.addParameter(ProcessingParameterFile(self.SPEC, "Tree spec JSON", fromStdin=True))
        self.addParameter(
            ProcessingParameterEnum(
                KIND, "Dimension", list(_EXACT_KINDS), defaultValue="assouad"
            )
        )
        self.addParameter(ProcessingParameterRational(self.P, "Boundary mass fraction p"))
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
        kind = _EXACT_KINDS[self.parameterAsEnum(parameters, KIND, context)]
        p: Optional[Fraction] = self.parameterAsRational(parameters, self.P, context)
        eta = self.parameterAsRationalList(parameters, self.ETA, context)

        value = exact_dimension_spec(spec, p, eta, kind)
        feedback.pushInfo(f"{kind}: optimal cycle of length {value.length}")
        text = str(value.rational) if value.rational is not None else _value_text(value.value)
        return {OUTPUT: {"kind": kind, **exact_dimension_to_json(value)}, TEXT: text}

    def name(self):
        return "dim-exact"

    def displayName(self):
        return "Exact spec dimension"

    def command(self):
        return ("dim", "exact")

    def group(self):
        return "Dimensions"

    def groupId(self):
        return "dim"

    def shortHelpString(self):
        return _EXACT_DESCRIPTION


class DoublingConstantAlgorithm(ProcessingAlgorithm):
    TREE = "TREE"
    CAP = "CAP"

    def initAlgorithm(self, config=None):
        _add_point_parameters(self)
        self.addParameter(ProcessingParameterFile(self.TREE, "Cube tree JSON for the measure form"))
        add_measure_parameters(self)
        self.addParameter(ProcessingParameterRational(R_MIN, "Smallest radius"))
        self.addParameter(ProcessingParameterRational(R_MAX, "Largest radius"))
        self.addParameter(
            ProcessingParameterNumber(self.CAP, "Largest ball covered exactly", defaultValue=20)
        )

    def processAlgorithm(
        self,
        parameters: dict[str, Any],
        context: ProcessingContext,
        feedback: ProcessingFeedback,
    ) -> dict[str, Any]:
        metric = self.parameterAsEnum(parameters, METRIC, context)
        space = self.parameterAsPoints(parameters, POINTS, metric, context)
        tree = self.parameterAsTree(parameters, self.TREE, context)
        mu = None if tree is None else measure_from_parameters(self, parameters, context, tree)

        window = None
        r_min = self.parameterAsRational(parameters, R_MIN, context)
        r_max = self.parameterAsRational(parameters, R_MAX, context)
        if r_min is not None or r_max is not None:
            window = _window(self, parameters, context, space)

        value = doubling_constant(
            space, tree, mu, window, cap=self.parameterAsInt(parameters, self.CAP, context)
        )
        for flag in value.flags:
            feedback.pushWarning(f"doubling constant flagged: {flag}")
        return {OUTPUT: doubling_to_json(value), TEXT: str(value.value)}

    def name(self):
        return "dim-doubling"

    def displayName(self):
        return "Doubling constant"

    def command(self):
        return ("dim", "doubling")

    def group(self):
        return "Dimensions"

    def groupId(self):
        return "dim"

    def shortHelpString(self):
        return _DOUBLING_DESCRIPTION
