"""molresp: molecular ground states, excited states and response properties
on an exact statevector simulator.

Pipeline: STO-3G integrals -> RHF -> Jordan-Wigner qubit Hamiltonian ->
fermionic ADAPT-VQE ground state -> subspace excited states (qEOM, q-sc-EOM,
q-proj-EOM, QSE) and quantum linear response (dynamic polarizability,
specific rotation, UV-Vis/ECD spectra), all validated against an in-repo
FCI sum-over-states oracle, plus a perturbative noise laboratory.
"""

__version__ = "0.1.0"
