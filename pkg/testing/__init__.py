from elasticity_test import TestElasticity
from geometry_test import TestGeometry
from kernels_test import TestKernels
from quadrature_test import TestQuadrature
from bounds_test import TestBounds
from pipeline_test import TestPipeline
from cli_test import TestCLI
import unittest

class TestSuite(unittest.TestSuite):
    def __init__(self):
        super().__init__([TestElasticity(), TestGeometry(), TestKernels(), TestQuadrature(), TestBounds(), TestPipeline(), TestCLI()])

if __name__ == "__main__":
    unittest.TextTestRunner().run(TestSuite())
