"""Shared sampling helpers for coupling and acceptance tests."""

from relaxdg.models import FluidModel
from relaxdg.verification import (DEFAULT_ELASTIC as ELASTIC,
                                  DEFAULT_FLUID as FLUID,
                                  componentwise_error, sample_guarded_inputs)

__all__ = ["ELASTIC", "FLUID", "componentwise_error",
           "sample_guarded_inputs", "fluid_normal_flux"]


def fluid_normal_flux(Up, fluid=FLUID):
    return FluidModel(fluid).flux(Up, 1)
