import logging
from fractions import Fraction

from nested_cubes import classFactory
from nested_cubes.processing import (
    ProcessingContext,
    ProcessingFeedback,
    ProcessingRegistry,
    RunConfig,
)


def test_registered(registry: ProcessingRegistry):
    provider = registry.providerById("nestedcubes")
    assert provider is not None
    assert len(provider.name()) > 0

    alg = registry.algorithmById("nestedcubes:gen")
    assert alg is not None
    assert alg.group() is None
    assert alg.groupId() is None
    assert isinstance(alg.displayName(), str)
    assert isinstance(alg.shortHelpString(), str)

    assert registry.algorithmById("nestedcubes:missing") is None
    assert registry.algorithmById("other:gen") is None


def test_commands_are_unique(registry: ProcessingRegistry):
    commands = [alg.command() for alg in registry.algorithms()]
    assert len(commands) == len(set(commands)) == 16
    assert ("dim", "exact") in commands
    assert ("check", "blowup") in commands


def test_algorithm_instances_are_fresh(registry: ProcessingRegistry):
    a = registry.algorithmById("nestedcubes:solve")
    b = registry.algorithmById("nestedcubes:solve")
    assert a is not b
    assert [d.name() for d in a.parameterDefinitions()] == ["SPEC", "TARGET", "KIND", "TOL"]


def test_unload_removes_provider():
    registry = ProcessingRegistry()
    plugin = classFactory(registry)
    plugin.initGui()
    assert registry.providerById("nestedcubes") is not None
    plugin.unload()
    assert registry.providerById("nestedcubes") is None


def test_rational_parameters_record_inexact_input(registry: ProcessingRegistry):
    alg = registry.algorithmById("nestedcubes:dim-exact")
    context = ProcessingContext(RunConfig(("dim", "exact")))
    assert alg.parameterAsRational({"P": "2/18"}, "P", context) == Fraction(1, 9)
    assert context.inexact == []
    alg.parameterAsRational({"P": "0.1111111111111"}, "P", context)
    assert context.inexact == ["P"]


def test_feedback():
    feedback = ProcessingFeedback()
    feedback.setProgress(50)
    assert feedback.progress() == 50
    assert not feedback.isCanceled()
    feedback.cancel()
    assert feedback.isCanceled()


def test_feedback_debug_info(caplog):
    feedback = ProcessingFeedback()
    with caplog.at_level(logging.DEBUG, logger="nested_cubes"):
        feedback.pushDebugInfo("scales 1, 1/2")
    assert "scales 1, 1/2" in caplog.text
