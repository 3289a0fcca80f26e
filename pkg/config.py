# config.py
# Run settings for the ultrametric toolkit. Plain dicts, read at import time.
APP_META = {
    "name": "Ultrametric Toolkit",
    "version": "0.1.0",
}

RUN_CONFIG = {
    "log_level": "WARNING",
    "log_format": "%(asctime)s %(levelname)s: %(message)s",
    "seed": 20240601,                # default seed for sampled certificates
    "exhaustive_limit": 16,          # largest space searched subset-by-subset in doubling checks
    "submodule_trials": 200,
    "coeff_bound": 3,
    "perturb_prefixes": 4,           # telescope prefixes checked after a perturbation
    "witness_block_limit": 200,      # blocks scanned for anti-doubling witnesses
    "embed_crosscheck_limit": 24,    # interpolation cross-checks against the embedding up to this size
    "default_c_grid": ["1", "10", "100"],
    "default_alpha_grid": ["1", "2", "3"],
}
