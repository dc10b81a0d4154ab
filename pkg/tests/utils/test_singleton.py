import sys
from pathlib import Path

# Add project root to Python path
project_root = Path(__file__).parent.parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import unittest
from utils.singleton import singleton


class TestSingleton(unittest.TestCase):
    def setUp(self):
        @singleton
        class Dummy:
            def __init__(self, value=0):
                self.value = value
        self.Dummy = Dummy

    def test_single_instance(self):
        a = self.Dummy(1)
        b = self.Dummy(2)
        self.assertIs(a, b)
        # The value should be from the first instantiation
        self.assertEqual(a.value, 1)
        self.assertEqual(b.value, 1)

    def test_reset(self):
        a = self.Dummy(1)
        self.Dummy.reset()
        b = self.Dummy(2)
        self.assertIsNot(a, b)
        self.assertEqual(b.value, 2)

    def test_wrapped_class(self):
        self.assertIsInstance(self.Dummy(), self.Dummy.wrapped_class)

    def test_singleton_multiple_classes(self):
        @singleton
        class A:
            pass

        @singleton
        class B:
            pass
        self.assertIs(A(), A())
        self.assertIs(B(), B())
        self.assertIsNot(type(A()), type(B()))


if __name__ == '__main__':
    unittest.main()
