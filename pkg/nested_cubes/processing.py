"""Processing framework: algorithms, parameters, context and feedback"""

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

import argparse
import io
import logging
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import IO, Any, Optional, Sequence

from .algorithms.utils.cubes import CubeTree
from .algorithms.utils.errors import FormatError, InvalidParams
from .algorithms.utils.formats import load_json, read_points_csv
from .algorithms.utils.metric import FiniteMetricSpace, Metric
from .algorithms.utils.rationals import parse_rational
from .algorithms.utils.tree_spec import TreeSpec

logger = logging.getLogger(__name__)

# result keys
OUTPUT = "OUTPUT"
TEXT = "TEXT"
TABLE = "TABLE"
PASSED = "PASSED"

FORMATS = ("text", "json", "csv")


@dataclass(frozen=True)
class RunConfig:
    command: tuple[str, ...]
    seed: int = 0
    threads: int = 0
    format: str = "text"
    emit_evidence: bool = False
    verbose: bool = False
    output: Optional[Path] = None

    @property
    def workers(self) -> int:
        return self.threads or os.cpu_count() or 1


@dataclass
class ProcessingContext:
    config: RunConfig
    stdin: IO[str] = field(default_factory=lambda: sys.stdin)
    inexact: list[str] = field(default_factory=list)


class ProcessingFeedback:
    """Progress and messages of a running algorithm, routed to `logging`"""

    def __init__(self, log: Optional[logging.Logger] = None):
        self._log = log or logging.getLogger("nested_cubes")
        self._canceled = False
        self._progress = 0.0

    def setProgress(self, progress: float):
        self._progress = progress
        self._log.debug("progress %.0f%%", progress)

    def progress(self) -> float:
        return self._progress

    def pushInfo(self, info: str):
        self._log.info(info)

    def pushWarning(self, warning: str):
        self._log.warning(warning)

    def pushDebugInfo(self, info: str):
        self._log.debug(info)

    def cancel(self):
        self._canceled = True

    def isCanceled(self) -> bool:
        return self._canceled


class ProcessingParameterDefinition:
    """A named parameter, exposed on the command line as `--<name>`"""

    def __init__(
        self,
        name: str,
        description: str,
        defaultValue: Any = None,
        optional: bool = True,
        flag: Optional[str] = None,
    ):
        self._name = name
        self._description = description
        self._default = defaultValue
        self._optional = optional
        self._flag = flag or "--" + name.lower().replace("_", "-")

    def name(self) -> str:
        return self._name

    def description(self) -> str:
        return self._description

    def defaultValue(self) -> Any:
        return self._default

    def isOptional(self) -> bool:
        return self._optional

    def _argument_kwargs(self) -> dict[str, Any]:
        return {"type": str}

    def addToParser(self, parser: argparse.ArgumentParser):
        parser.add_argument(
            self._flag,
            dest=self._name,
            help=self._description,
            default=None,
            required=not self._optional,
            **self._argument_kwargs(),
        )


class ProcessingParameterNumber(ProcessingParameterDefinition):
    Integer = int
    Double = float

    def __init__(self, name, description, type=int, defaultValue=None, optional=True, flag=None):
        super().__init__(name, description, defaultValue, optional, flag)
        self._type = type

    def _argument_kwargs(self):
        return {"type": self._type}


class ProcessingParameterRational(ProcessingParameterDefinition):
    """A `num/den` string; decimals are converted and flagged inexact"""


class ProcessingParameterRationalList(ProcessingParameterDefinition):
    """Comma-separated rationals"""


class ProcessingParameterString(ProcessingParameterDefinition):
    pass


class ProcessingParameterBoolean(ProcessingParameterDefinition):
    def addToParser(self, parser):
        parser.add_argument(
            self._flag, dest=self._name, help=self._description, action="store_true"
        )


class ProcessingParameterEnum(ProcessingParameterDefinition):
    def __init__(
        self, name, description, options: Sequence[str], defaultValue=None, optional=True,
        positional: bool = False, flag=None,
    ):
        super().__init__(name, description, defaultValue, optional, flag)
        self._options = tuple(options)
        self._positional = positional

    def options(self) -> tuple[str, ...]:
        return self._options

    def addToParser(self, parser):
        if self._positional:
            parser.add_argument(
                self._name, help=self._description, choices=self._options,
                **({"nargs": "?", "default": None} if self._optional else {}),
            )
        else:
            parser.add_argument(
                self._flag, dest=self._name, help=self._description,
                choices=self._options, default=None, required=not self._optional,
            )


class ProcessingParameterFile(ProcessingParameterDefinition):
    """An input file; with `fromStdin` an omitted path reads standard input"""

    def __init__(self, name, description, optional=True, fromStdin=False, flag=None):
        super().__init__(name, description, None, optional, flag)
        self._from_stdin = fromStdin

    def readsStdin(self) -> bool:
        return self._from_stdin


class ProcessingAlgorithm:
    """Base of every command: declared parameters plus a `processAlgorithm` body"""

    def __init__(self):
        self._parameters: list[ProcessingParameterDefinition] = []
        self._initialized = False

    def name(self) -> str:
        raise NotImplementedError

    def displayName(self) -> str:
        return self.name()

    def group(self) -> Optional[str]:
        return None

    def groupId(self) -> Optional[str]:
        return None

    def shortHelpString(self) -> str:
        return ""

    def command(self) -> tuple[str, ...]:
        """The words selecting this algorithm on the command line"""
        return (self.name(),)

    def createInstance(self) -> "ProcessingAlgorithm":
        return type(self)()

    def initAlgorithm(self, config=None):
        raise NotImplementedError

    def processAlgorithm(
        self,
        parameters: dict[str, Any],
        context: ProcessingContext,
        feedback: ProcessingFeedback,
    ) -> dict[str, Any]:
        raise NotImplementedError

    def addParameter(self, definition: ProcessingParameterDefinition):
        self._parameters.append(definition)

    def parameterDefinitions(self) -> list[ProcessingParameterDefinition]:
        if not self._initialized:
            self.initAlgorithm()
            self._initialized = True
        return self._parameters

    def parameterDefinition(self, name: str) -> ProcessingParameterDefinition:
        for definition in self.parameterDefinitions():
            if definition.name() == name:
                return definition
        raise KeyError(name)

    def run(
        self,
        parameters: dict[str, Any],
        context: ProcessingContext,
        feedback: Optional[ProcessingFeedback] = None,
    ) -> dict[str, Any]:
        feedback = feedback or ProcessingFeedback()
        for definition in self.parameterDefinitions():
            if not definition.isOptional() and parameters.get(definition.name()) is None:
                raise InvalidParams(f"missing required parameter {definition.name()}")
        result = self.processAlgorithm(parameters, context, feedback)
        if context.inexact and isinstance(result.get(OUTPUT), dict):
            result[OUTPUT] = {**result[OUTPUT], "inexact": list(context.inexact)}
        return result

    # parameter accessors

    def _raw(self, parameters: dict[str, Any], name: str) -> Any:
        value = parameters.get(name)
        return self.parameterDefinition(name).defaultValue() if value is None else value

    def parameterAsInt(self, parameters, name, context) -> Optional[int]:
        value = self._raw(parameters, name)
        return None if value is None else int(value)

    def parameterAsDouble(self, parameters, name, context) -> Optional[float]:
        value = self._raw(parameters, name)
        return None if value is None else float(value)

    def parameterAsBool(self, parameters, name, context) -> bool:
        return bool(self._raw(parameters, name))

    def parameterAsString(self, parameters, name, context) -> Optional[str]:
        value = self._raw(parameters, name)
        return None if value is None else str(value)

    def parameterAsEnum(self, parameters, name, context) -> Optional[str]:
        return self.parameterAsString(parameters, name, context)

    def parameterAsRational(self, parameters, name, context) -> Optional[Fraction]:
        value = self._raw(parameters, name)
        if value is None or isinstance(value, Fraction):
            return value
        return self._parse(str(value), name, context)

    def parameterAsRationalList(self, parameters, name, context) -> Optional[list[Fraction]]:
        value = self._raw(parameters, name)
        if value is None:
            return None
        if isinstance(value, (list, tuple)):
            return [v if isinstance(v, Fraction) else self._parse(str(v), name, context) for v in value]
        return [self._parse(part, name, context) for part in str(value).split(",") if part.strip()]

    def _parse(self, text: str, name: str, context: ProcessingContext) -> Fraction:
        try:
            value, inexact = parse_rational(text)
        except (ValueError, ZeroDivisionError) as e:
            raise InvalidParams(f"{name}: not a rational: {text!r}") from e
        if inexact:
            context.inexact.append(name)
        return value

    def _open(self, parameters, name, context) -> Optional[IO[str]]:
        path = self._raw(parameters, name)
        if path is not None:
            try:
                return io.StringIO(Path(path).read_text(encoding="utf-8"))
            except OSError as e:
                raise InvalidParams(f"{name}: cannot read {path}: {e.strerror}") from e
        definition = self.parameterDefinition(name)
        if isinstance(definition, ProcessingParameterFile) and definition.readsStdin():
            return context.stdin
        return None

    def parameterAsSpec(self, parameters, name, context) -> Optional[TreeSpec]:
        stream = self._open(parameters, name, context)
        if stream is None:
            return None
        obj = load_json(stream)
        if "types" not in obj:
            raise FormatError("input is not a tree spec")
        return TreeSpec.from_json(obj)

    def parameterAsTree(self, parameters, name, context) -> Optional[CubeTree]:
        stream = self._open(parameters, name, context)
        if stream is None:
            return None
        obj = load_json(stream)
        # measure output embeds a relabeled tree under "tree_json"
        return CubeTree.from_json(obj.get("tree_json", obj))

    def parameterAsPoints(
        self, parameters, name, metric: Optional[str], context
    ) -> Optional[FiniteMetricSpace]:
        stream = self._open(parameters, name, context)
        if stream is None:
            return None
        return read_points_csv(stream, Metric(metric or Metric.EUCLIDEAN.value))


class ProcessingProvider:
    """A registry of algorithms, loaded on demand"""

    def __init__(self):
        self._algorithms: dict[str, ProcessingAlgorithm] = {}
        self._loaded = False

    def id(self) -> str:
        raise NotImplementedError

    def name(self) -> str:
        return self.id()

    def loadAlgorithms(self):
        raise NotImplementedError

    def addAlgorithm(self, algorithm: ProcessingAlgorithm):
        key = f"{self.id()}:{algorithm.name()}"
        if key in self._algorithms:
            raise ValueError(f"duplicate algorithm id {key}")
        self._algorithms[key] = algorithm

    def algorithms(self) -> list[ProcessingAlgorithm]:
        if not self._loaded:
            self.loadAlgorithms()
            self._loaded = True
        return list(self._algorithms.values())

    def algorithm(self, algorithm_id: str) -> ProcessingAlgorithm:
        for alg in self.algorithms():
            if f"{self.id()}:{alg.name()}" == algorithm_id:
                return alg.createInstance()
        raise KeyError(algorithm_id)


class ProcessingRegistry:
    """Providers by id, and their algorithms by `provider:name`"""

    def __init__(self):
        self._providers: dict[str, ProcessingProvider] = {}

    def addProvider(self, provider: ProcessingProvider) -> bool:
        if provider.id() in self._providers:
            return False
        self._providers[provider.id()] = provider
        return True

    def removeProvider(self, provider: ProcessingProvider) -> bool:
        return self._providers.pop(provider.id(), None) is not None

    def providerById(self, provider_id: str) -> Optional[ProcessingProvider]:
        return self._providers.get(provider_id)

    def providers(self) -> list[ProcessingProvider]:
        return list(self._providers.values())

    def algorithmById(self, algorithm_id: str) -> Optional[ProcessingAlgorithm]:
        provider_id, _, _ = algorithm_id.partition(":")
        provider = self._providers.get(provider_id)
        if provider is None:
            return None
        try:
            return provider.algorithm(algorithm_id)
        except KeyError:
            return None

    def algorithms(self) -> list[ProcessingAlgorithm]:
        return [alg for provider in self._providers.values() for alg in provider.algorithms()]
