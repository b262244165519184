import math
import unittest
import warnings

import numpy as np

from check_utils.decorators import number
from errors import QuadratureError
from quadrature import TANH_SINH, QuadratureSpec, integrate_complex, panels, vertical_contour


class TestQuadrature(unittest.TestCase):

    @number("3.16")
    def test_schemes_agree(self):
        exact = complex(math.sin(1.0), 1 - math.cos(1.0))
        for spec in (QuadratureSpec(), QuadratureSpec(scheme=TANH_SINH)):
            value, error = integrate_complex(lambda x: complex(math.cos(x), math.sin(x)), 0.0, 1.0, spec)
            self.assertAlmostEqual(value, exact, places=9)
            self.assertLessEqual(error, spec.tol)
        value, _ = integrate_complex(lambda x: 1.0, 0.0, 1.0, QuadratureSpec(), weight="cos", wvar=10.0)
        self.assertAlmostEqual(value, math.sin(10.0) / 10.0, places=10)
        self.assertEqual(integrate_complex(lambda x: 1.0, 1.0, 1.0, QuadratureSpec()), (0j, 0.0))

    @number("3.17")
    def test_spec_validation_and_failure(self):
        with self.assertRaises(ValueError):
            QuadratureSpec(scheme="simpson")
        with self.assertRaises(ValueError):
            QuadratureSpec(tol=1e-15)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            with self.assertRaises(QuadratureError) as ctx:
                integrate_complex(lambda x: math.sin(200 * x), 0.0, 10.0, QuadratureSpec(max_depth=1, tol=1e-13))
        self.assertGreater(ctx.exception.estimate, 0.0)

    @number("3.18")
    def test_panels_and_vertical_contour(self):
        nodes, weights = panels(-1.0, 3.0, 5, 4)
        self.assertEqual(len(nodes), 20)
        self.assertAlmostEqual(weights.sum(), 4.0, places=13)
        self.assertAlmostEqual(float(np.sum(weights * nodes**7)), (3.0**8 - 1.0) / 8, places=8)
        # (1/2 pi) * integral of exp(-u^2) du over the line
        expected = math.sqrt(math.pi) / (2 * math.pi)
        for half in (False, True):
            contour = vertical_contour(0.5, 10.0, 1.0, 20, half)
            value = contour.integrate(np.exp((contour.s - 0.5) ** 2))
            self.assertAlmostEqual(value.real, expected, places=10)
            self.assertAlmostEqual(value.imag, 0.0, places=12)
