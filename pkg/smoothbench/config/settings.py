# File: smoothbench/config/settings.py

import os
from pathlib import Path

from dotenv import load_dotenv

# .env at repo root
env_path = Path(__file__).parent.parent.parent / ".env"
load_dotenv(env_path)

# Relative to the leading singular value; governs every rank decision.
RANK_TOL = float(os.getenv("SMOOTHBENCH_RANK_TOL", "1e-12"))

# Symmetry tolerance for sym_eig inputs (relative Frobenius).
SYMMETRY_TOL = float(os.getenv("SMOOTHBENCH_SYMMETRY_TOL", "1e-10"))

# Stability margin: Re(λ) must stay below -STABILITY_MARGIN·‖A‖₂.
STABILITY_MARGIN = float(os.getenv("SMOOTHBENCH_STABILITY_MARGIN", "1e-12"))

WORKERS = int(os.getenv("SMOOTHBENCH_WORKERS", "4"))
VERBOSE = os.getenv("SMOOTHBENCH_VERBOSE", "false").lower() == "true"

# Where the ISS1R Matrix Market files (A.mtx, B.mtx, C.mtx) are expected for the iss1r preset.
ISS_DIR = Path(os.getenv("SMOOTHBENCH_ISS_DIR", "data/iss1r"))
