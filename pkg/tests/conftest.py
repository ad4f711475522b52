import os

import pytest

from freeflags.building import build_ball


@pytest.fixture(scope="session")
def ball2_4():
    return build_ball(2, 4)


@pytest.fixture(scope="session")
def ball3_3():
    return build_ball(3, 3)


@pytest.fixture(scope="session")
def cx2_4(ball2_4):
    return ball2_4.to_colored_complex()


@pytest.fixture(scope="session")
def cayley_13_5():
    """X^{13,5}; cached under HDX_DATA_DIR (default: a session temp dir)."""
    from freeflags.walks import cayley_setup

    if not os.environ.get("HDX_DATA_DIR"):
        os.environ["HDX_DATA_DIR"] = os.path.join(os.path.expanduser("~"), ".cache", "freeflags")
    return cayley_setup(13, 5)
