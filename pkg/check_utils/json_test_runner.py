"""Runs tests and writes one JSON record per test case."""
from __future__ import annotations

import inspect
import json
import sys
import time
from unittest import result
from unittest.signals import registerResult

import check_utils.decorators as decorators

DECORATOR_CLASSES = [
    klass for _name, klass in inspect.getmembers(decorators)
    if (
        inspect.isclass(klass)
        and issubclass(klass, decorators.Decorator)
        and klass != decorators.Decorator
    )
]


class JSONTestResult(result.TestResult):
    """
    Collects a record per test: name (with the decorators' changes), passed,
    feedback and elapsed seconds.
    """

    def __init__(self, stream, descriptions, verbosity, results):
        super().__init__(stream, descriptions, verbosity)
        self.descriptions = descriptions
        self.results = results
        self._started = {}

    def getDescription(self, test):
        doc_first_line = test.shortDescription()
        if self.descriptions and doc_first_line:
            return doc_first_line
        return str(test)

    def getOutput(self):
        if self.buffer:
            out = self._stdout_buffer.getvalue()
            err = self._stderr_buffer.getvalue()
            if err:
                if not out.endswith("\n"):
                    out += "\n"
                out += err
            return out

    def startTest(self, test):
        self._started[test.id()] = time.perf_counter()
        super().startTest(test)

    def buildResult(self, test, err=None):
        output = self.getOutput() or ""
        started = self._started.pop(test.id(), None)
        if err is not None:
            output += ("" if not output or output.endswith("\n") else "\n") + f"Test Failed: {err[1]}\n"
        record = {
            "name": self.getDescription(test),
            "passed": err is None,
            "feedback": output,
            "elapsed": None if started is None else round(time.perf_counter() - started, 3),
        }
        method = getattr(test, test._testMethodName)
        for dec in DECORATOR_CLASSES:
            dec.change_result(getattr(method, dec.get_attr_name(), None), record, output, err)
        return record

    def processResult(self, test, err=None):
        self.results.append(self.buildResult(test, err))

    def addSuccess(self, test):
        super().addSuccess(test)
        self.processResult(test)

    def addError(self, test, err):
        super().addError(test, err)
        self._mirrorOutput = False
        self.processResult(test, err)

    def addFailure(self, test, err):
        super().addFailure(test, err)
        self._mirrorOutput = False
        self.processResult(test, err)


class JSONTestRunner:

    resultclass = JSONTestResult

    def __init__(self, stream=sys.stdout, descriptions=True, verbosity=1, failfast=False, buffer=True):
        self.stream = stream
        self.descriptions = descriptions
        self.verbosity = verbosity
        self.failfast = failfast
        self.buffer = buffer
        self.json_data = {"testcases": []}

    def _makeResult(self):
        return self.resultclass(self.stream, self.descriptions, self.verbosity, self.json_data["testcases"])

    def run(self, test):
        outcome = self._makeResult()
        registerResult(outcome)
        outcome.failfast = self.failfast
        outcome.buffer = self.buffer
        outcome.startTestRun()
        try:
            test(outcome)
        finally:
            outcome.stopTestRun()
        self.json_data["testcases"].sort(key=lambda x: x["name"])
        json.dump(self.json_data, self.stream, indent=4)
        self.stream.write("\n")
        return outcome
