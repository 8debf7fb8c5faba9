"""Physical constants used throughout the package.

All values are frozen CODATA/SI figures; nothing here is configurable. The
Planck momentum is carried as M_P*c in SI units (kg m/s) because the modified
commutator is parametrised by (p / M_P c)^2.
"""

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    # hbar is derived from the exact SI h so identities mixing the two (for
    # example the shot/radiation white-noise coefficient) close to float
    # precision; the usual 1.054571817e-34 is that value rounded.
    hbar: float = 6.62607015e-34 / (2.0 * math.pi)  # J s
    h: float = 6.62607015e-34       # J s
    k_B: float = 1.380649e-23       # J/K
    c: float = 299792458.0          # m/s
    planck_momentum: float = 6.5249  # M_P * c, kg m/s
    m_nucleon: float = 1.67e-27     # kg, reference mass for composite scaling


CONSTANTS = PhysicalConstants()
