"""Memory-informed neural pseudo-operators for integro-differential equations."""

import os

# Must precede backend initialization; the legacy XLA CPU runtime is markedly
# faster for the many small fused kernels of nested forward-mode derivatives.
os.environ.setdefault("XLA_FLAGS", "--xla_cpu_use_thunk_runtime=false")

from .baselines import relative_error  # noqa: E402
from .config import RunConfig  # noqa: E402
from .core import Minpo, total_loss  # noqa: E402
from .runner import run_experiment  # noqa: E402

__all__ = ["Minpo", "RunConfig", "relative_error", "run_experiment", "total_loss"]
__version__ = "0.1.0"
