import abc


class InvalidValueException(Exception):
    pass


class Decorator(abc.ABC):

    def __init__(self, v) -> None:
        res = self.validate(v)
        if res:
            raise InvalidValueException(res)
        self.v = v

    def validate(self, v):
        return None

    def __call__(self, func):
        setattr(func, self.get_attr_name(), self.v)
        return func

    @classmethod
    def get_attr_name(cls):
        return f"__{cls.__name__}__"

    @classmethod
    @abc.abstractmethod
    def change_result(cls, saved_value, results: dict, output: str, err):
        """
        Apply the decorator's change to a result record.
        Called for every test; saved_value is None when the decorator was not applied.
        """


class number(Decorator):
    """Area code, e.g. @number("7.3"); run_tests.py filters on the part before the dot."""

    def validate(self, v):
        if not isinstance(v, str) or "." not in v:
            return "Number should look like '3.1'."

    @classmethod
    def change_result(cls, saved_value, results: dict, output: str, err):
        if saved_value is not None:
            results["name"] = "{}: {}".format(saved_value, results["name"])


class slow(Decorator):
    """
    Desk-scale numerics; skipped unless run_tests.py is given --slow.

    Usage: @slow()
    """

    def __init__(self) -> None:
        self.v = True

    @classmethod
    def change_result(cls, saved_value, results: dict, output: str, err):
        if saved_value is not None:
            results["name"] = "[SLOW] {}".format(results["name"])


class budget(Decorator):
    """
    Wall clock allowance in seconds. Overrunning does not fail the test, it is
    only reported.

    Usage: @budget(60)
    """

    def validate(self, v):
        if not isinstance(v, (float, int)):
            return "Budget should be a float/int."
        if v <= 0:
            return "Budget should be positive."

    @classmethod
    def change_result(cls, saved_value, results: dict, output: str, err):
        elapsed = results.get("elapsed")
        if saved_value is not None and elapsed is not None:
            results["budget"] = saved_value
            results["over_budget"] = elapsed > saved_value

