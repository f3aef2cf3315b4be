from spillkit.sim.synthdgp import (
    make_generator,
    oracle_gfevd_mc,
    oracle_quantile_lp,
    simulate,
)

__all__ = ["simulate", "make_generator", "oracle_gfevd_mc", "oracle_quantile_lp"]
