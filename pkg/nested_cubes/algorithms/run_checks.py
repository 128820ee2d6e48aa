"""Processing algorithms for the property checks"""

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

import numpy as np

from ..processing import (
    OUTPUT,
    PASSED,
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
from .utils.analysis import (
    assouad_from_set_bound,
    binom_bound_check,
    blowup_check,
    check_key_estimate,
    dimension_continuity_check,
    kappa,
    lower_blowdown_check,
    proof_bound,
)
from .utils.cubes import max_branching, unfold_spec
from .utils.dimension import boundary_fraction_value
from .utils.errors import InvalidParams
from .utils.formats import check_report_to_json, metric_validation_to_json
from .utils.metric import Metric, validate_metric

_PAIR_RESOLUTION = 1000

_DESCRIPTIONS = {
    "metric": "Check the metric axioms on a point cloud: exhaustively up to 500 points, "
    "on a seeded sample of triples beyond.",
    "key-estimate": "Compare mu_p and mu_p2 mass ratios along every chain of a tree against "
    "delta^(+-epsilon N), in exact arithmetic. Without --p/--p2, --count seeded pairs are checked.",
    "continuity": "Check |dim mu_p - dim mu_p2| <= epsilon(p, p2) for both measure dimensions "
    "of a spec, on --p/--p2 or on --count seeded pairs.",
    "binom": "Count depth-N offspring against binom(N, floor(beta N)) M^(beta N); beta "
    "defaults to the spec's largest boundary fraction.",
    "blowup": "Check dim_A mu_p >= beta * log_delta p and growth of dim_A mu_p as p decreases.",
    "blowdown": "Check that dim_L mu_p never exceeds the exponent of the all-central chain.",
}


def seeded_pairs(M: int, count: int, seed: int) -> list[tuple[Fraction, Fraction]]:
    """`count` pairs of rationals in (0, 1/M], reproducible from `seed`"""
    rng = np.random.default_rng(seed)
    draws = rng.integers(1, _PAIR_RESOLUTION + 1, size=(count, 2))
    return [
        (Fraction(int(a), _PAIR_RESOLUTION * M), Fraction(int(b), _PAIR_RESOLUTION * M))
        for a, b in draws
    ]


def _default_p_list(M: int) -> list[Fraction]:
    return [Fraction(1, M**k) for k in range(1, 7)]


class _CheckAlgorithm(ProcessingAlgorithm):
    CHECK = ""

    def name(self):
        return f"check-{self.CHECK}"

    def displayName(self):
        return f"Check {self.CHECK}"

    def command(self):
        return ("check", self.CHECK)

    def group(self):
        return "Checks"

    def groupId(self):
        return "check"

    def shortHelpString(self):
        return _DESCRIPTIONS[self.CHECK]


class MetricCheckAlgorithm(_CheckAlgorithm):
    CHECK = "metric"
    POINTS = "POINTS"
    METRIC = "METRIC"
    SAMPLE_SIZE = "SAMPLE_SIZE"

    def initAlgorithm(self, config=None):
        self.addParameter(ProcessingParameterFile(self.POINTS, "Point cloud CSV", optional=False))
        self.addParameter(
            ProcessingParameterEnum(
                self.METRIC, "Metric for coordinate input", [m.value for m in Metric],
                defaultValue=Metric.EUCLIDEAN.value,
            )
        )
        self.addParameter(
            ProcessingParameterNumber(self.SAMPLE_SIZE, "Sampled triples", defaultValue=100_000)
        )

    def processAlgorithm(
        self,
        parameters: dict[str, Any],
        context: ProcessingContext,
        feedback: ProcessingFeedback,
    ) -> dict[str, Any]:
        metric = self.parameterAsEnum(parameters, self.METRIC, context)
        space = self.parameterAsPoints(parameters, self.POINTS, metric, context)
        report = validate_metric(
            space,
            sample_size=self.parameterAsInt(parameters, self.SAMPLE_SIZE, context),
            seed=context.config.seed,
        )
        if report.truncated:
            feedback.pushWarning("violation list truncated")
        return {OUTPUT: metric_validation_to_json(report), PASSED: report.passed}


class KeyEstimateAlgorithm(_CheckAlgorithm):
    CHECK = "key-estimate"
    TREE = "TREE"
    SPEC = "SPEC"
    DEPTH = "DEPTH"
    P = "P"
    P2 = "P2"
    COUNT = "COUNT"

    def initAlgorithm(self, config=None):
        self.addParameter(ProcessingParameterFile(self.TREE, "Cube tree JSON"))
        self.addParameter(ProcessingParameterFile(self.SPEC, "Tree spec JSON", fromStdin=True))
        self.addParameter(ProcessingParameterNumber(self.DEPTH, "Spec unfolding depth", defaultValue=6))
        self.addParameter(ProcessingParameterRational(self.P, "First p"))
        self.addParameter(ProcessingParameterRational(self.P2, "Second p"))
        self.addParameter(ProcessingParameterNumber(self.COUNT, "Seeded pairs", defaultValue=10))

    def processAlgorithm(
        self,
        parameters: dict[str, Any],
        context: ProcessingContext,
        feedback: ProcessingFeedback,
    ) -> dict[str, Any]:
        tree = self.parameterAsTree(parameters, self.TREE, context)
        if tree is None:
            spec = self.parameterAsSpec(parameters, self.SPEC, context)
            tree = unfold_spec(spec, self.parameterAsInt(parameters, self.DEPTH, context))

        p = self.parameterAsRational(parameters, self.P, context)
        p2 = self.parameterAsRational(parameters, self.P2, context)
        if (p is None) != (p2 is None):
            raise InvalidParams("--p and --p2 go together")
        if p is not None:
            pairs = [(p, p2)]
        else:
            count = self.parameterAsInt(parameters, self.COUNT, context)
            pairs = seeded_pairs(max_branching(tree), count, context.config.seed)

        rows = []
        for i, (a, b) in enumerate(pairs):
            if feedback.isCanceled():
                break
            report = check_key_estimate(tree, a, b)
            rows.append({"p": a, "p2": b, **check_report_to_json(report)})
            feedback.setProgress(100 * (i + 1) / len(pairs))
            if not report.passed:
                feedback.pushWarning(f"key estimate fails for p={a}, p2={b}: {report.witness}")

        passed = all(row["pass"] for row in rows)
        return {OUTPUT: {"pass": passed, "pairs": rows}, PASSED: passed}


class ContinuityAlgorithm(_CheckAlgorithm):
    CHECK = "continuity"
    SPEC = "SPEC"
    P = "P"
    P2 = "P2"
    COUNT = "COUNT"

    def initAlgorithm(self, config=None):
        self.addParameter(ProcessingParameterFile(self.SPEC, "Tree spec JSON", fromStdin=True))
        self.addParameter(ProcessingParameterRational(self.P, "First p"))
        self.addParameter(ProcessingParameterRational(self.P2, "Second p"))
        self.addParameter(ProcessingParameterNumber(self.COUNT, "Seeded pairs", defaultValue=100))

    def processAlgorithm(
        self,
        parameters: dict[str, Any],
        context: ProcessingContext,
        feedback: ProcessingFeedback,
    ) -> dict[str, Any]:
        spec = self.parameterAsSpec(parameters, self.SPEC, context)
        p = self.parameterAsRational(parameters, self.P, context)
        p2 = self.parameterAsRational(parameters, self.P2, context)
        if (p is None) != (p2 is None):
            raise InvalidParams("--p and --p2 go together")
        if p is not None:
            pairs = [(p, p2)]
        else:
            count = self.parameterAsInt(parameters, self.COUNT, context)
            pairs = seeded_pairs(spec.max_branching, count, context.config.seed)

        report = dimension_continuity_check(spec, pairs, context.config.workers)
        if not report.passed:
            feedback.pushWarning(f"continuity fails: {report.witness}")
        return {
            OUTPUT: check_report_to_json(report, context.config.emit_evidence),
            PASSED: report.passed,
        }


class BinomAlgorithm(_CheckAlgorithm):
    CHECK = "binom"
    SPEC = "SPEC"
    BETA = "BETA"
    N = "N"
    ADMISSIBLE = "ADMISSIBLE"

    def initAlgorithm(self, config=None):
        self.addParameter(ProcessingParameterFile(self.SPEC, "Tree spec JSON", fromStdin=True))
        self.addParameter(ProcessingParameterRational(self.BETA, "Boundary fraction beta"))
        self.addParameter(
            ProcessingParameterNumber(self.N, "Chain length", defaultValue=12, flag="--N")
        )
        self.addParameter(
            ProcessingParameterBoolean(self.ADMISSIBLE, "Count only chains within beta*N")
        )

    def processAlgorithm(
        self,
        parameters: dict[str, Any],
        context: ProcessingContext,
        feedback: ProcessingFeedback,
    ) -> dict[str, Any]:
        spec = self.parameterAsSpec(parameters, self.SPEC, context)
        beta = self.parameterAsRational(parameters, self.BETA, context)
        if beta is None:
            beta = boundary_fraction_value(spec)
            feedback.pushInfo(f"beta defaults to the largest boundary fraction {beta}")
        report = binom_bound_check(
            spec,
            beta,
            self.parameterAsInt(parameters, self.N, context),
            self.parameterAsBool(parameters, self.ADMISSIBLE, context),
        )
        output = check_report_to_json(report)
        output["beta"] = beta
        output["kappa"] = kappa(beta, spec.delta)
        if beta >= boundary_fraction_value(spec):
            output["set_dimension_bound"] = assouad_from_set_bound(spec, beta)
        return {OUTPUT: output, PASSED: report.passed}


class BlowupAlgorithm(_CheckAlgorithm):
    CHECK = "blowup"
    SPEC = "SPEC"
    P_LIST = "P_LIST"

    def initAlgorithm(self, config=None):
        self.addParameter(ProcessingParameterFile(self.SPEC, "Tree spec JSON", fromStdin=True))
        self.addParameter(
            ProcessingParameterRationalList(
                self.P_LIST, "Values of p, comma separated (default 1/M^k, k = 1..6)", flag="--p"
            )
        )

    def processAlgorithm(
        self,
        parameters: dict[str, Any],
        context: ProcessingContext,
        feedback: ProcessingFeedback,
    ) -> dict[str, Any]:
        spec = self.parameterAsSpec(parameters, self.SPEC, context)
        p_list = self.parameterAsRationalList(parameters, self.P_LIST, context)
        p_list = p_list or _default_p_list(spec.max_branching)
        report = blowup_check(spec, p_list)
        output = check_report_to_json(report, emit_evidence=True)
        output["proof_bounds"] = [{"p": p, "bound": proof_bound(spec, p)} for p in p_list]
        return {OUTPUT: output, PASSED: report.passed}


class BlowdownAlgorithm(_CheckAlgorithm):
    CHECK = "blowdown"
    SPEC = "SPEC"
    P_LIST = "P_LIST"

    def initAlgorithm(self, config=None):
        self.addParameter(ProcessingParameterFile(self.SPEC, "Tree spec JSON", fromStdin=True))
        self.addParameter(
            ProcessingParameterRationalList(
                self.P_LIST, "Values of p, comma separated (default 1/M^k, k = 1..6)", flag="--p"
            )
        )

    def processAlgorithm(
        self,
        parameters: dict[str, Any],
        context: ProcessingContext,
        feedback: ProcessingFeedback,
    ) -> dict[str, Any]:
        spec = self.parameterAsSpec(parameters, self.SPEC, context)
        p_list = self.parameterAsRationalList(parameters, self.P_LIST, context)
        report = lower_blowdown_check(spec, p_list or _default_p_list(spec.max_branching))
        return {OUTPUT: check_report_to_json(report, emit_evidence=True), PASSED: report.passed}
