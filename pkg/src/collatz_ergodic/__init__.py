"""Finite-carrier mechanization of the Collatz map as a topological and
measurable dynamical system: cycles, the doubling-pair topology, Borel atoms,
orbit measures and zero-entropy pressure."""
from .dynamics import (CollatzMap, Cycle, CycleRegistry, OrbitResult, Status, STANDARD,
                       canonical_rotation, find_cycles, is_periodic, orbit, orbit_set, step)
from .measurable import (AtomPartition, borel, check_measurable, discrete_partition,
                         intersect_sigma, measurability_transfer_check)
from .measure import (InvariantMeasureOffCycles, RationalMeasure, convex_combination,
                      ergodic_decomposition, integrate, is_invariant, orbit_measure,
                      point_mass, recurrence_scan)
from .thermo import (CodomainMode, EmptyRegistryError, Potential, battery,
                     check_potential_continuity, constant_potential, dichotomy_report,
                     equilibrium_states, indicator_potential, key_potential,
                     key_pressure_growth, literal_key_potential, orbit_average, pressure,
                     table_potential)
from .topology import (Carrier, Comparison, SafeZone, Topology, check_continuity,
                       collatz_subbasis, collatz_topology, derive_singletons,
                       discrete_topology, generate, intersect_topologies, is_coarser,
                       replay_derivation, witness_topology)

__version__ = "0.1.0"
