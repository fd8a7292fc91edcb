import numpy as np

from qutrit_toffoli.certify import (
    enumerate_relevant_paulis,
    exhaustive_fidelity,
    ideal_toffoli_choi,
    monte_carlo_fidelity,
)
from qutrit_toffoli.gates import toffoli_circuit
from qutrit_toffoli.noise import NoiseModel, circuit_channel
from qutrit_toffoli.tomography import restrict_to_qubits

# Full tomography needs 64 x 64 settings.  Certification gets the same
# fidelity from far fewer measurements by only looking at Pauli pairs whose
# expectation is non-zero on the perfect gate, then importance-sampling
# those.

relevant = enumerate_relevant_paulis(ideal_toffoli_choi())
print(f"relevant Pauli pairs: {len(relevant)} of 4096")
magnitudes = sorted({round(abs(ps.ideal), 9) for ps in relevant})
print(f"ideal correlation magnitudes: {magnitudes}")
print()

channel = restrict_to_qubits(
    circuit_channel(toffoli_circuit(), NoiseModel.from_device())
)

# Measuring every relevant pair once gives the deterministic reference.
reference = exhaustive_fidelity(channel)
print(f"exhaustive estimate: {reference:.6f}")
print()

# The sampled estimator converges to the same number, with an error bar
# that shrinks as the square root of the sample count.
print("samples   estimate    stderr    pull")
for samples in (100, 1000, 10000):
    result = monte_carlo_fidelity(channel, samples=samples, seed=0)
    pull = (result.estimate - reference) / result.stderr
    print(
        f"{samples:>7}   {result.estimate:.6f}  {result.stderr:.6f}  {pull:+.2f} sigma"
    )
print()

# Each sampled string contributes a ratio of measured to ideal correlation.
# The heavy hitters are the strings the chooser visits most.
result = monte_carlo_fidelity(channel, samples=10000, seed=0)
top = sorted(result.contributions, key=lambda c: -c.draws)[:5]
print("most-sampled strings (input -> output, draws, measured/ideal):")
for contribution in top:
    ps = contribution.pauli
    print(
        f"  {ps.in_labels} -> {ps.out_labels}   {contribution.draws:>4}"
        f"   {contribution.mean_value / ps.ideal:+.4f}"
    )
