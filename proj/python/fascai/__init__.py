from ._fascai import (
    ProtocolError,
    Service,
    StorageError,
    ValidationError,
    __version__,
    allocate,
    bin_confidence,
    compare_proportions,
    generate_instance,
    report,
    simulate,
    two_proportion_z,
    validate,
)

__all__ = [
    "ProtocolError",
    "Service",
    "StorageError",
    "ValidationError",
    "__version__",
    "allocate",
    "bin_confidence",
    "compare_proportions",
    "generate_instance",
    "report",
    "simulate",
    "two_proportion_z",
    "validate",
]
