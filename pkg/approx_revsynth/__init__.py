from approx_revsynth.circuit import Circuit
from approx_revsynth.gates import BitState, Gate, GateKind
from approx_revsynth.oracles import BooleanFunction, builtin
from approx_revsynth.synthesis import EAParams, synthesize
