"""Urysohn, Kolmogorov-Arnold and ridge models identified by Kaczmarz-type row actions."""

from ._kaid import (
    Dataset,
    GaussBasis,
    KaidError,
    KaModel,
    PwlBasis,
    RidgeModel,
    Rng,
    RunReport,
    Stream,
    UrysohnModel,
    fit_ka,
    fit_ridge_gn,
    fit_ridge_nk,
    fit_urysohn,
    formula2,
    gen_formula2_data,
    gen_ridge_data,
    ka_init,
    load_model,
    perturbed_ridge_model,
    reference_ridge_model,
    rmse_normalized,
    run_ensemble,
    save_model,
)

__all__ = [name for name in dir() if not name.startswith("_")]
