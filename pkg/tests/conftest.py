"""Shared fixtures: the expensive solves are built once per session."""

import pytest

from hypnodal import hypfem, surfglue


@pytest.fixture(scope="session")
def tiling_ext():
    """Quarter-domain mode extended across both mirrors (four charts)."""
    return surfglue.extend_quarter_mode(h_target=0.16)


@pytest.fixture(scope="session")
def octagon_modes():
    """Direct free-boundary solve on the full octagon."""
    poly = surfglue.octagon_polygon()
    return hypfem.solve_polygon(poly, h_target=0.08, k=6, essential_labels=())


@pytest.fixture(scope="session")
def g3():
    """Closed genus-3 surface with its transported ground state."""
    return surfglue.build_genus3(2.0, h_target=0.12)
