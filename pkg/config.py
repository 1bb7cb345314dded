"""
Configuration file for the shortcutting toolkit
"""
import os
from dotenv import load_dotenv
load_dotenv()

# Output directory for generated files (bench CSVs, metrics)
output_dir = os.getenv("SHORTCUT_OUTPUT_DIR", "output")

# Create output directory if it doesn't exist
os.makedirs(output_dir, exist_ok=True)

LOG_LEVEL = os.getenv("SHORTCUT_LOG_LEVEL", "INFO").upper()

# Tag lists hold TAG_CAP_FACTOR * ceil(log2(n+2)) pivot ids before a search aborts
TAG_CAP_FACTOR = int(os.getenv("SHORTCUT_TAG_CAP_FACTOR", "8"))

# ParSC budgets: factor * n * lg^2 shortcuts, factor * (n+m) * lg^2 visits
BUDGET_FACTOR = int(os.getenv("SHORTCUT_BUDGET_FACTOR", "32"))

# Hop cap for the reachability BFS and the diameter regression threshold
DIAMETER_FACTOR = int(os.getenv("SHORTCUT_DIAMETER_FACTOR", "4"))

# Default number of independent sequential runs = factor * lg n
SEQ_RUNS_FACTOR = int(os.getenv("SHORTCUT_SEQ_RUNS_FACTOR", "3"))

# Quadratic-memory guard for the closure oracle
ORACLE_MAX_N = int(os.getenv("SHORTCUT_ORACLE_MAX_N", "4096"))

# Redraws allowed per inner ParDiam run before giving up
RETRY_CAP = int(os.getenv("SHORTCUT_RETRY_CAP", "8"))

# Las Vegas loop guard for reachability
REACH_MAX_ATTEMPTS = int(os.getenv("SHORTCUT_REACH_MAX_ATTEMPTS", "64"))

# Partition and label-monotonicity assertions
DEBUG_CHECKS = os.getenv("SHORTCUT_DEBUG_CHECKS", "1") not in ("0", "false", "False", "")

# Largest acceptable log-log slope of measured diameter against n in bench runs
DIAMETER_SLOPE_MAX = float(os.getenv("SHORTCUT_DIAMETER_SLOPE_MAX", "0.78"))
