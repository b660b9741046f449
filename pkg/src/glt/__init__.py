"""glt: exact-diagonalization experiments for gapped lattice spin systems.

Core layers:
  lattice / operators   geometry, tensor-product algebra, norms
  models                Hamiltonian builders, charges, twisted variants
  spectral              ground states, gaps, spectral flow
  lieb_robinson         light-cone commutator norms and their upper bounds
  filters_qa            spectral step filter, correlators, continuation transport
  lsm                   twist-operator variational experiment, flux insertion
  hall                  flux-torus curvature, Chern numbers, loop phases
  cli                   config-driven experiment runner (`glt run`, `glt list`)
"""

__version__ = "0.1.0"

from .lattice import Lattice, build_lattice, cartesian_cycle, cycle, path, torus
from .operators import (BasisIndexer, LocalOperator, commutator, embed, op_norm,
                        spin_matrices, translation_operator)
from .models import (ChargeSpec, TermSum, TwistSpec, build_model,
                     flux_torus_hamiltonian, gapped_test_chain, heisenberg_chain,
                     lr_constants, majumdar_ghosh, polarized_chain,
                     strength_and_range, twisted_hamiltonian, xxz_torus)
from .spectral import (SpectralResult, full_spectrum, ground_state,
                       load_states, save_states, simultaneous_block_diagonalize,
                       spectral_flow, translation_eigenvalue)
from .lieb_robinson import (LightConeProfile, commutator_norm_profile,
                            heisenberg_evolve, light_cone_study,
                            lr_exponential_bound, lr_series_bound)
from .filters_qa import (QaFilter, connected_correlation, decay_fit,
                         filtered_correlation, qa_generator, qa_transport,
                         step_filter)
from .lsm import (LsmReport, double_commutator_norm, flux_insertion_study,
                  lsm_experiment, lsm_twist)
from .hall import (FluxTorusFamily, TwoLevelFamily, berry_curvature_grid,
                   chern_number, hall_conductance, qa_loop_phase)
