"""Slot-level Monte Carlo simulator."""
from .runner import SimMetrics, run_simulation, simulate_scenario
from .world import SlotOutcome, StNode, World, age_update, init_world, step_slot

__all__ = ["SimMetrics", "run_simulation", "simulate_scenario", "SlotOutcome", "StNode",
           "World", "age_update", "init_world", "step_slot"]
