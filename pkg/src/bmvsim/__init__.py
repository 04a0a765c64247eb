"""Deterministic simulator of entanglement mediation by locally classical
mediators in three non-locally-tomographic toy theories: parity-superselected
fermions, a non-Abelian fusion-tree model, and bit/anti-bit composites."""

from .statecore import EPS
from .fermion_ssr import run_fermion_protocol
from .ising_anyon import run_anyon_protocol
from .bit_antibit import run_bit_antibit_protocol
from .witness import ProtocolTrace, WitnessReport, purity, uncorrelated_test

__version__ = "0.1.0"

__all__ = [
    "EPS",
    "ProtocolTrace",
    "WitnessReport",
    "purity",
    "run_anyon_protocol",
    "run_bit_antibit_protocol",
    "run_fermion_protocol",
    "uncorrelated_test",
    "__version__",
]
