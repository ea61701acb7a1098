"""Spreading speeds and traveling waves for cooperative and sandwiched reaction-diffusion systems."""
