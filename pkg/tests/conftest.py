import json
from pathlib import Path

import pytest
from hypothesis import settings

from carnot.exactcore import VarId
from carnot.groupcalc import derive_group_law
from carnot.liecore import StratifiedLieAlgebra, builtin

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

DATA = Path(__file__).parent / "data" / "v1"

X, Y, S = VarId(1, 1), VarId(1, 2), VarId(2, 1)

STEP_LE_3 = ["heisenberg:1", "heisenberg:2", "abelian:3", "engel", "free2:3"]
ACCEPTANCE_GROUPS = ["heisenberg:1", "heisenberg:2", "engel", "free2:3"]


def load_fixture(name):
    return json.loads((DATA / name).read_text())


def free_nilpotent_rank2(step: int) -> StratifiedLieAlgebra:
    """Free nilpotent algebra on two generators, step 3 or 4 (Hall basis)."""
    e = lambda j, l: VarId(j, l)  # noqa: E731
    table = {
        (e(1, 1), e(1, 2)): ((e(2, 1), 1),),  # [a,b] = c
        (e(1, 1), e(2, 1)): ((e(3, 1), 1),),  # [a,c] = d
        (e(1, 2), e(2, 1)): ((e(3, 2), 1),),  # [b,c] = f
    }
    layers = (2, 1, 2)
    if step == 4:
        layers = (2, 1, 2, 3)
        table[(e(1, 1), e(3, 1))] = ((e(4, 1), 1),)  # [a,d]
        table[(e(1, 2), e(3, 1))] = ((e(4, 2), 1),)  # [b,d]
        table[(e(1, 1), e(3, 2))] = ((e(4, 2), 1),)  # [a,f] = [b,d] by Jacobi
        table[(e(1, 2), e(3, 2))] = ((e(4, 3), 1),)  # [b,f]
    return StratifiedLieAlgebra(layers, table, f"free_rank2_step{step}")


def filiform(n: int) -> StratifiedLieAlgebra:
    """Model filiform algebra: [e1, e_k] = e_{k+1}, layers (2, 1, ..., 1)."""
    basis = [VarId(1, 1), VarId(1, 2)] + [VarId(j, 1) for j in range(2, n)]
    table = {(basis[0], basis[k]): ((basis[k + 1], 1),) for k in range(1, n - 1)}
    return StratifiedLieAlgebra((2,) + (1,) * (n - 2), table, f"filiform:{n}")


@pytest.fixture(scope="session")
def h1():
    return derive_group_law(builtin("heisenberg:1"))


@pytest.fixture(params=STEP_LE_3)
def any_law(request):
    return derive_group_law(builtin(request.param))
