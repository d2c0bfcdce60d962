################################################################
# Gate library
################################################################

# Quantum cost per gate kind (standard 1-/2-qubit primitive counts)
# id=0, not=1, cnot=1, swap=3 (three CNOTs), toffoli=5, fredkin=5
qc_table = {
    'id': 0,
    'not': 1,
    'cnot': 1,
    'swap': 3,
    'toffoli': 5,
    'fredkin': 5,
}

# 2-qubit primitives are weighted x10 in the circuit cost
two_qubit_weight = 10

################################################################
# Coupling map
################################################################

# Bundled two-row ladder approximating IBMQ-16 Melbourne
coupling_map_file = 'melbourne.coupling'

################################################################
# Evolutionary search
################################################################

# Guards for the restricted sampler
argument_retry_cap = 1000
total_retry_cap = 1_000_000

# FAILS capacity = fails_capacity_factor * b
fails_capacity_factor = 64

# Population chunk evaluated per worker thread
population_chunk = 1024

# Per-generation progress in the debug log
log_every = 50

################################################################
# Resource guards
################################################################

# Materialized truth tables only
max_inputs = 24

# Upper bound for 2^n * T in noisy evaluation
max_noisy_samples = 2 ** 28

################################################################
# Noise model
################################################################

p1 = 0.001
p2 = 0.01
p_meas = 0.02
channel = 'depolarizing'  # or 'bitflip'

# Trajectories per input
trials = 1024

################################################################
# Experiments
################################################################

# Independent runs per gate count
repetitions = 16

# Log and file names
synth_circuit_file = 'circuit.rev'
synth_report_file = 'report.json'
gates_raw_file = 'sweep_gates.csv'
gates_curve_file = 'sweep_gates_curve.csv'
noise_file = 'sweep_noise.csv'
noise_crossover_file = 'sweep_noise_crossover.csv'

################################################################
# CSV headers
################################################################

gates_raw_header = ['d', 'run', 'seed', 'err', 'qc', 'cc', 'constant', 'gates_after_pruning']
gates_curve_header = ['qc', 'median', 'min', 'max', 'count']
noise_header = ['circuit_id', 'qc', 'cc', 'lambda', 'trials', 'error_rate', 'stderr']
crossover_header = ['cheap_id', 'expensive_id', 'crossover_lambda']
