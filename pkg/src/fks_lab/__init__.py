"""Numerical lab for the fractional Keller-Segel equation

    d_t rho = Lap^{alpha/2} rho + lambda div((K * rho) rho),  K(x) = x / |x|^a,

with a pseudospectral solver, an alpha-stable particle system, closed-form
constants and the diagnostics that compare them.
"""
from .constants import ModelParams, classify_regime, constants_report
from .diagnostics import BlowupMomentSpec, DiagnosticsRecord, DiagnosticsSpec
from .grid import Domain, GridField, make_preset
from .particles import ParticleConfig, ParticleEnsemble, run_particles
from .spectral import SolverConfig, run
from .stable import StableSpec, sample_increment, sample_positive_stable

__all__ = [
    "BlowupMomentSpec", "DiagnosticsRecord", "DiagnosticsSpec", "Domain", "GridField",
    "ModelParams", "ParticleConfig", "ParticleEnsemble", "SolverConfig", "StableSpec",
    "classify_regime", "constants_report", "make_preset", "run", "run_particles",
    "sample_increment", "sample_positive_stable",
]
