"""Processing provider for this package"""

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

from .algorithms.build_measure import BuildMeasureAlgorithm
from .algorithms.cube_tree import BuildTreeAlgorithm, ValidateTreeAlgorithm
from .algorithms.estimate_dimension import (
    DoublingConstantAlgorithm,
    ExactDimensionAlgorithm,
    MeasureDimensionAlgorithm,
    SetDimensionAlgorithm,
)
from .algorithms.generate import GenerateAlgorithm
from .algorithms.run_checks import (
    BinomAlgorithm,
    BlowdownAlgorithm,
    BlowupAlgorithm,
    ContinuityAlgorithm,
    KeyEstimateAlgorithm,
    MetricCheckAlgorithm,
)
from .algorithms.solve_dimension import SolveAlgorithm, SweepAlgorithm
from .processing import ProcessingProvider


class NestedCubesProcessingProvider(ProcessingProvider):
    def loadAlgorithms(self, *args, **kwargs):
        self.addAlgorithm(GenerateAlgorithm())
        self.addAlgorithm(BuildTreeAlgorithm())
        self.addAlgorithm(ValidateTreeAlgorithm())
        self.addAlgorithm(BuildMeasureAlgorithm())
        self.addAlgorithm(SetDimensionAlgorithm())
        self.addAlgorithm(MeasureDimensionAlgorithm())
        self.addAlgorithm(ExactDimensionAlgorithm())
        self.addAlgorithm(DoublingConstantAlgorithm())
        self.addAlgorithm(MetricCheckAlgorithm())
        self.addAlgorithm(KeyEstimateAlgorithm())
        self.addAlgorithm(ContinuityAlgorithm())
        self.addAlgorithm(BinomAlgorithm())
        self.addAlgorithm(BlowupAlgorithm())
        self.addAlgorithm(BlowdownAlgorithm())
        self.addAlgorithm(SweepAlgorithm())
        self.addAlgorithm(SolveAlgorithm())

    def id(self, *args, **kwargs):
        return "nestedcubes"

    def name(self, *args, **kwargs):
        return "Nested cubes"
