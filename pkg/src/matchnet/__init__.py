"""Matching probabilities on random application networks.

A bipartite application graph with independent Bernoulli links, a
one-shot offer protocol, and heterogeneous search intensities induce a
matching function. This package computes it three ways and cross-checks
them: exact finite-market formulas, large-market closed forms, and a
seeded Monte Carlo simulator, plus the comparative statics of intensity
dispersion.
"""

from matchnet.discrete import (
    DiscretePMF,
    binomial_pmf,
    expect_min_capacity,
    expect_reciprocal_one_plus,
    mixed_poisson_pmf,
    poisson_binomial_pmf,
    poisson_pmf,
)
from matchnet.errors import (
    ConstructionError,
    DomainError,
    MatchnetError,
    NumericError,
    SizeGuardError,
)
from matchnet.intensity import (
    Degenerate,
    Exponential,
    FosdFamily,
    Gamma,
    IntegerDist,
    IntensityModel,
    Pareto,
    TwoPointMixture,
    Uniform,
    fosd_sweep,
    gini,
    mgf_neg,
    model_from_json,
    model_to_json,
    mps_pair,
    verify_sosd,
)
from matchnet.large_market import (
    LargeMarketSpec,
    ces_f,
    ces_scaling_dbar,
    complete_monotonicity_check,
    f_abundant,
    f_dense,
    f_large,
    f_locations_large,
    f_taylor1,
    f_taylor2,
    f_taylor_series,
    frictionless_f,
    phi,
    q_large,
    scale_model,
)
from matchnet.simulator import (
    LargeMarketRecipe,
    SimConfig,
    SimEstimate,
    degree_gof,
    estimate_f,
    estimate_q,
    large_market_config,
    run_protocol,
    sample_network,
)
from matchnet.small_market import (
    FiniteMarketSpec,
    MatchProbabilities,
    accounting_check,
    brute_force_applicant,
    brute_force_locations,
    brute_force_vacancy,
    job_finding_exact,
    locations_job_finding_exact,
    urnball_f,
    vacancy_fill_exact,
)

__version__ = "0.1.0"
