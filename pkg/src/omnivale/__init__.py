"""omnivale: omni-modal event annotation pipeline and evaluation harness.

Builds event-level annotations for long multi-modal videos (filtering,
visual/audio boundary detection, omni-modal fusion, relation-aware caption
orchestration, dialogue generation) plus the metric suites and the human
review service used for quality control.
"""

__version__ = "0.1.0"

from .kernels import BACKEND as KERNEL_BACKEND

__all__ = ["KERNEL_BACKEND", "__version__"]
