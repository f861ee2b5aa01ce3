"""Continuous-time neural networks.

Units with delayed weighted summation, windowed RMS integration, tanh
activation and amplitude-modulating oscillation; behaviour synthesis,
comb-filter period analysis, gradient-descent training and a linear hybrid
automaton simulator for reference trajectories.
"""

from .core import (Edge, Network, NetworkEvaluator, UnitConfig, Violation, eval_activation,
                   eval_integration, eval_network, eval_oscillation, eval_summation, evaluate,
                   validate)
from .errors import (ArityMismatch, Blocked, CTNNError, CyclicNetwork, Diverged, FileFormatError,
                     InvalidGrid, InvalidNetwork, InvalidSpec, NonBooleanInput,
                     NondeterministicChoice, OutOfRange, UnknownVariable)
from .estimators import CTNNRegressor, FourierGateClassifier, PeriodDetector
from .hybrid import HybridAutomaton, robot_arm_automaton, simulate, to_signal
from .network_io import load_network, save_network
from .periodicity import (PeriodScan, RatioApprox, comb_energy, comb_energy_direct,
                          predict_period_candidates, scan_periods, stern_brocot)
from .signal import Signal, TimeGrid, from_function, read_csv
from .synthesis import (FourierLogicGate, SawtoothSpec, build_sawtooth_network,
                        eval_fourier_gate, gate_table)
from .training import (Dataset, TrainConfig, analytic_weight_gradient, error, gradient,
                       gradient_check, train)

__version__ = "0.1.0"
