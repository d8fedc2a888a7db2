"""Acceptance suite: one test per criterion, each printing its pass line.

The checks live in hamcap.acceptance (shared with the CLI ``accept``
command); every criterion runs at its stated tolerance.
"""

import pytest

from hamcap import acceptance


def _run(fn):
    result = fn()
    print(result.line())
    assert result.passed, result.detail
    return result


def test_criterion_1_capacity_formula_and_sharpness():
    result = _run(acceptance.criterion_capacity_formula)
    assert result.runtime <= 60.0


def test_criterion_2_existence_and_action_bound():
    result = _run(acceptance.criterion_existence)
    assert result.runtime <= 120.0


def test_criterion_3_orbit_count_lower_bound():
    _run(acceptance.criterion_orbit_count)


def test_criterion_4_step_inequalities():
    _run(acceptance.criterion_step_inequalities)


def test_criterion_5_dimension_tables():
    _run(acceptance.criterion_dimension_tables)


def test_criterion_6_oracle_equivalence():
    _run(acceptance.criterion_oracle_equivalence)


def test_criterion_7_profile_properties():
    _run(acceptance.criterion_profile_properties)
