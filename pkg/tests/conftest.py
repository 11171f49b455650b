import pytest

from nilfold.loopcore import (
    make_cyclic,
    make_dihedral,
    make_elementary_abelian,
    make_heisenberg,
    make_octonion_loop,
    make_quaternion8,
    make_s3,
)

# group corpus used throughout; dihedral groups are named by polygon size
GROUPS = {
    **{f"Z/{n}": (lambda n=n: make_cyclic(n)) for n in range(1, 9)},
    **{f"(Z/2)^{k}": (lambda k=k: make_elementary_abelian(2, k)) for k in range(1, 4)},
    "S3": make_s3,
    "D4": lambda: make_dihedral(4),
    "Q8": make_quaternion8,
    "D8": lambda: make_dihedral(8),
    "Heis27": lambda: make_heisenberg(3),
}
CORPUS = {**GROUPS, "O16": make_octonion_loop}
ABELIAN = {name for name in GROUPS if name.startswith("Z/") or name.startswith("(Z/2)")}

_cache = {}


def load(name):
    if name not in _cache:
        _cache[name] = CORPUS[name]()
    return _cache[name]


@pytest.fixture(params=sorted(CORPUS))
def corpus_loop(request):
    return request.param, load(request.param)


@pytest.fixture(params=sorted(GROUPS))
def corpus_group(request):
    return request.param, load(request.param)


_acceptance_lines = []


def record_acceptance(line):
    _acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_acceptance_lines):
            terminalreporter.write_line(line)
