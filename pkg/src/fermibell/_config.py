"""Package-wide numerical defaults and backend selection."""

import os

#: Default absolute/relative tolerance for predicates and verdicts.
DEFAULT_TOL = 1e-9

#: A CHSH value must exceed 2 by more than this to count as a violation.
CERT_MARGIN = 1e-9

#: Set FERMIBELL_DISABLE_NUMBA=1 to force the pure-numpy kernels.
DISABLE_NUMBA = os.environ.get("FERMIBELL_DISABLE_NUMBA", "0").lower() in ("1", "true", "yes")
