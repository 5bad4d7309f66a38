# engine/config.py
# Environment-aware runtime settings and reference-scenario defaults for the
# modal shift simulator

import logging
import os
from typing import Literal, Optional

# Environment detection - normalize to lowercase
_raw_env = os.environ.get("MODALSHIFT_ENV", "dev").strip().lower()
ENV: Literal["dev", "ci", "prod"] = _raw_env if _raw_env in ("dev", "ci", "prod") else "dev"  # type: ignore

IS_DEV = (ENV == "dev")
IS_CI = (ENV == "ci")
IS_PROD = (ENV == "prod")

# Conservation audit on every run (slow path, checks each phase boundary)
AUDIT_ENABLED = os.environ.get("MODALSHIFT_AUDIT", "").strip().lower() in ("1", "true", "yes")

LOG_LEVEL = os.environ.get("MODALSHIFT_LOG_LEVEL", "DEBUG" if IS_DEV else "INFO").strip().upper()

logger = logging.getLogger(__name__)

# ---------------------------------------------------------
# Model defaults (peak-hour setup of the Etoile - La Defense segment)
# ---------------------------------------------------------
DEFAULT_HORIZON = 240            # minutes, one peak period
DEFAULT_TRANSFER_TIME = 5        # minutes between modes
DEFAULT_SEED = 0

DEFAULT_RER_ARRIVAL_RATE = 100.0  # users / minute
DEFAULT_BOARDING_RATE = 1000      # users / minute
DEFAULT_MAX_DWELL = 2             # minutes
DEFAULT_SEGMENT_SLOTS = 4         # minutes at maximal speed
DEFAULT_TRAIN_CAPACITY = 2600     # MI09 total capacity
DEFAULT_TRAIN_INTERVAL = 5        # minutes
DEFAULT_PLATFORM_CAPACITY = 2000  # normalization only

# Alternative modes: (traversal_time, queue_capacity, arrival_rate, shift_share)
# Metro capacity is 700 users per train with 5 trains on the segment.
DEFAULT_ALTERNATIVES = {
    "metro": (10, 3500, 40.0, 0.55),
    "bus": (25, 300, 10.0, 0.20),
    "taxi": (15, 50, 2.0, 0.05),
    "bike": (20, 200, 5.0, 0.10),
    "walk": (60, 10000, 3.0, 0.10),
}

# Optimizer defaults (conventional NSGA-II settings)
DEFAULT_BETA_BOUNDS = (-5.0, 5.0)
DEFAULT_CROSSOVER_PROBABILITY = 0.9
DEFAULT_ETA_C = 15.0
DEFAULT_MUTATION_PROBABILITY = 0.5
DEFAULT_ETA_M = 20.0


def get_default_parallelism() -> int:
    """
    Resolve the worker count used when --parallelism is not given.

    Priority:
    1. MODALSHIFT_THREADS environment variable (integer >= 1)
    2. 1 (sequential)
    """
    raw = os.environ.get("MODALSHIFT_THREADS", "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        logger.warning("[CONFIG] Ignoring MODALSHIFT_THREADS=%r (not an integer)", raw)
        return 1
    if value < 1:
        logger.warning("[CONFIG] Ignoring MODALSHIFT_THREADS=%d (must be >= 1)", value)
        return 1
    return value


def configure_logging(level: Optional[str] = None) -> None:
    """Install one root handler; safe to call more than once."""
    resolved = (level or LOG_LEVEL).upper()
    logging.basicConfig(
        level=getattr(logging, resolved, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
    )
    logger.debug("[CONFIG] Environment: %s", ENV)
    logger.debug("[CONFIG] Audit: %s", "enabled" if AUDIT_ENABLED else "disabled")
