import dataclasses
import math
import random

import pytest

from composedc.domain import ArchitectureKind, build_topology
from composedc.optimizer import MilpInstance, solve_greedy
from composedc.optimizer.compile import compile_instance
from composedc.optimizer.kernel import KERNEL, compiled_search, get_search, python_search
from composedc.wlgen import generate_workloads

from conftest import random_small_instance

pytestmark = pytest.mark.skipif(compiled_search is None, reason="compiled kernel not built")


def inputs():
    rnd = random.Random(99)
    for _ in range(40):
        inst = random_small_instance(rnd, max_workloads=8, max_modules=6)
        yield inst
    for seed in (1, 2, 3):
        for kind, racks in ((ArchitectureKind.RACK_SCALE, 2), (ArchitectureKind.POD_SCALE, 2), (ArchitectureKind.TRADITIONAL, 1)):
            yield MilpInstance(build_topology(kind, 20, 20, racks), tuple(generate_workloads(seed, 20)))


def test_identical_results():
    for inst in inputs():
        ki = compile_instance(inst, inst.canonical_order())
        try:
            ub = solve_greedy(inst).objective - ki.io_constant + 2e-9
        except Exception:
            ub = math.inf
        for pooled in ([True, False] if ki.pooled else [False]):
            k2 = dataclasses.replace(ki, pooled=pooled)
            for budget in (5, 300, 100_000):
                for bound in (ub, math.inf):
                    a = python_search(k2, bound, 1e-9, budget, 60.0)
                    b = compiled_search(k2, bound, 1e-9, budget, 60.0)
                    assert a == b


def test_default_kernel_is_compiled():
    import os

    if not os.environ.get("COMPOSEDC_PURE_PYTHON"):
        assert KERNEL == "cython" and get_search() is compiled_search


def test_unknown_kernel():
    with pytest.raises(ValueError):
        get_search("fortran")
