import pytest
from hypothesis import HealthCheck, settings

from aidist.crypto.rng import Rng
from aidist.schemes import get_scheme

# group operations are slow enough that per-example deadlines only add noise
settings.register_profile(
    "aidist",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.function_scoped_fixture, HealthCheck.too_slow],
)
settings.load_profile("aidist")


@pytest.fixture(scope="session")
def card():
    return get_scheme("card")


@pytest.fixture(scope="session")
def phone():
    return get_scheme("phone")


@pytest.fixture(params=["card", "phone"])
def scheme(request):
    return get_scheme(request.param)


@pytest.fixture
def rng(request):
    return Rng(f"test/{request.node.name}")


@pytest.fixture(scope="session")
def card_auth(card):
    return card.setup(Rng("card-auth"))


@pytest.fixture(scope="session")
def phone_auth(phone):
    return phone.setup(Rng("phone-auth"))


def enroll(scheme, auth, ent, rng):
    """Fresh registered token plus its revocation entry."""
    token = scheme.new_token(auth.public)
    rev = scheme.register(auth, token, ent, rng)
    return token, rev


# -- acceptance report ---------------------------------------------------------

_VERDICTS: dict[int, list[tuple[bool, str]]] = {}


@pytest.fixture
def criterion():
    """``criterion(n, ok, detail)`` records one part of a criterion and returns ``ok``."""

    def record(n: int, ok: bool, detail: str) -> bool:
        _VERDICTS.setdefault(n, []).append((ok, detail))
        print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    """One line per criterion; it passes only if every recorded part passed."""
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_VERDICTS):
        parts = _VERDICTS[n]
        ok = all(p for p, _ in parts)
        detail = "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
