import argparse
import re
import sys
import unittest

from check_utils.json_test_runner import JSONTestRunner


def _prune(suite, task: str, include_slow: bool) -> None:
    for s in suite:
        for t in s:
            if "FailedTest" in str(type(t)):
                continue
            marked_remove = set()
            for t2 in t:
                func = getattr(t2, t2._testMethodName)
                if getattr(func, "__slow__", None) is True and not include_slow:
                    marked_remove.add(t2)
                elif task and not re.match(rf"^{task}\.", getattr(func, "__number__", "")):
                    marked_remove.add(t2)
            for t2 in marked_remove:
                t._tests.remove(t2)


if __name__ == "__main__":

    p = argparse.ArgumentParser()
    p.add_argument(
        "task",
        help=(
            "The area number you'd like to run. "
            "Leave blank for all areas.\n\n"
            "Example: run_tests.py 7\n"
            "Runs the tests with @number('7.x')."
        ),
        default="",
        nargs="?",
    )
    p.add_argument(
        "-s",
        "--slow",
        help="Also run the desk-scale numerical tests.",
        action="store_true",
    )
    p.add_argument(
        "-j",
        "--json",
        help="Print a JSON record per test, with timings.",
        action="store_true",
    )
    args = p.parse_args()

    suite = unittest.defaultTestLoader.discover(".", top_level_dir=".")
    _prune(suite, args.task, args.slow)
    if args.json:
        outcome = JSONTestRunner(stream=sys.stdout).run(suite)
    else:
        outcome = unittest.runner.TextTestRunner().run(suite)
    sys.exit(0 if outcome.wasSuccessful() else 1)
