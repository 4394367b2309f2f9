"""Toolkit for the 1-d quintic focusing NLS.

Modules
-------
grids        periodic spectral grid, fields, transforms, pairings
solitons     ground state, symmetry group, explicit blow-up solutions
linearized   the linearized matrix operator, root space, projections
scattering   distorted Fourier basis, scattering coefficients, semigroup
evolve       nonlinear split-step evolution and conservation diagnostics
modulation   soliton-parameter decomposition and blow-up rate classification
verify       cross-module invariant battery
cli          command-line driver (simulate, linspec, dfourier, modulate,
             verify, batch)
"""

from .grids import (
    ComplexField,
    Grid1D,
    VectorField,
    field_from_csv,
    field_to_csv,
    inner,
    l2_norm,
    make_field,
    make_grid,
    read_snapshot,
    spectral_derivative,
    trig_interpolate,
    write_snapshot,
)
from .solitons import (
    GalileiParams,
    SL2Params,
    StandingWaveParams,
    exact_modulated_w,
    explicit_blowup,
    galilei_apply,
    pde_residual,
    phi0,
    phi0_prime,
    sl2_apply,
    standing_wave,
    standing_wave_fn,
)
from .linearized import (
    HOperator,
    RootSpaceBasis,
    apply_H,
    apply_H_star,
    build_H,
    build_L_operators,
    build_root_basis,
    expected_gram,
    gram_table,
    project,
    solve_rho,
    spectrum_check,
)
from .scattering import (
    DistortedSpectrum,
    ScatteringPoint,
    build_bandlimited_packet,
    build_dispersive_datum,
    build_spectrum,
    decay_exponent_fit,
    decay_exponents,
    distorted_transform,
    edge_check,
    evolve_linear,
    evolve_linear_oracle,
    jost_solve,
    plancherel_pair,
    reconstruct,
)
from .evolve import (
    SolverConfig,
    Trajectory,
    blowup_time_fit,
    energy,
    free_evolve,
    h1_norm,
    load_trajectory,
    mass,
    null_form_check,
    pconf_invariant,
    pconf_norm,
    run,
    save_trajectory,
    split_step,
)
from .modulation import (
    DecompositionResult,
    ModParams,
    build_eta_family,
    build_w,
    build_xi_family,
    classify_rate,
    consistency_residuals,
    decompose,
    track,
)
from .verify import run_battery

__version__ = "0.1.0"
