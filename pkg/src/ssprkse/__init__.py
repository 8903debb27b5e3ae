"""Split-explicit SSPRK time stepping for a layered shallow-water ocean model."""
from .barotropic import (BarotropicState, SubstepResult, barotropic_rhs, barotropic_ssprk2_substep,
                         barotropic_ssprk3_substep, interp2, interp3)
from .errors import (BlowUpError, ConfigError, InvalidThicknessError, NonFiniteStateError,
                     SolverError)
from .grid import Boundary, DimensionError, Grid, VectorField
from .kernels import get_backend, set_backend
from .modesplit import (BaroclinicStepResult, SplitVelocities, baroclinic_feuler,
                        baroclinic_feuler_mixing, split_velocity, tridiag_solve)
from .stepper import (FluxLedger, ModelState, Scheme, SchemeConfig, StepDiagnostics,
                      fe_se_baseline_step, integrate, ssprk2_se_step, ssprk3_se_step, step,
                      unsplit_reference_step)
from .tendencies import (LayerStack, PhysicalParams, hydrostatic_pressure, momentum_tendency_Tu,
                         thickness_tendency_Th, vertical_diffusion_Du)

__version__ = "0.1.0"
