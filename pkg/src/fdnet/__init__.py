"""Monte Carlo simulator for full-duplex small cells in ultra-dense networks."""
from .config import SimConfig, load_config, dump_config
from .engine import Report, run, run_variants, sweep

__all__ = ["SimConfig", "load_config", "dump_config", "Report", "run", "run_variants", "sweep"]
__version__ = "0.1.0"
