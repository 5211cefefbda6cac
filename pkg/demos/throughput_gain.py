"""
Full-duplex throughput gain against SBS density
===============================================

TG > 1 means the cache-aided FD network beats a cache-free half-duplex one.
Caching removes the UL hop and its self-interference on a hit, so the gain
holds up better in dense deployments when more of the catalog is stored.
"""

import numpy as np

from fdcache.analytics import analyze
from fdcache.core import ScenarioConfig

lams = np.logspace(-5, -3, 9)
print("lambda    " + "  ".join(f"kappa={k:<4}" for k in (0.0, 0.1, 0.35, 0.6)))
for lam in lams:
    tg = [analyze(ScenarioConfig.table1(lambda_sbs=lam, kappa=k)).tg_fd for k in (0.0, 0.1, 0.35, 0.6)]
    print(f"{lam:7.1e}  " + "  ".join(f"{v:10.3f}" for v in tg))

# where does FD stop paying off without a cache?
for lam in lams:
    if analyze(ScenarioConfig.table1(lambda_sbs=lam, kappa=0.0)).tg_fd < 1:
        print(f"\nwithout caching, TG is below 1 by lambda = {lam:.1e} SBS/m^2")
        break
