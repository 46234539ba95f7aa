"""Constants for better coding."""

from math import pi

# Geometry (track units unless stated)
# ====================================
UNIT_TO_METER = 0.85
TRACK_HALF_WIDTH = 1.0
INNER_TURN_RADIUS = 10.0
CENTER_TURN_RADIUS = INNER_TURN_RADIUS + TRACK_HALF_WIDTH
PAIRS_PER_SEGMENT = 15
PAIR_SPACING = 1.0
MARKER_INWARD_YAW_DEG = 20.0
TURN_STEP_DEG = 15
MAX_TURN_DEG = 90
CENTERLINE_STEP = 0.1
# Arc length either side of the last projection searched by progress
PROGRESS_WINDOW = 2.0
FINISH_ID = 0
DEFAULT_ENTRY_HEADING = pi / 2

# Robot and episode rules
# =======================
LINEAR_SPEED_MPS = 0.5
CONTROL_PERIOD = 0.2  # seconds, i.e. 5 actions per second
MAX_ANGULAR_SPEED = 0.4  # rad/s
DQN_TURN_SPEED = 0.2  # rad/s
COLLISION_DISTANCE = 0.5
FINISH_DETECTION_Z = 1.0 * UNIT_TO_METER  # meters
BLIND_STEP_LIMIT = 10
MAX_STEPS = 2000
OBSERVED_MARKERS = 6
OBSERVATION_SIZE = 2 * OBSERVED_MARKERS

# Termination kinds
# =================
RUNNING = "running"
FINISHED = "finished"
COLLISION = "collision"
BLIND = "blind"
TIMEOUT = "timeout"
TERMINATION_KINDS = (RUNNING, FINISHED, COLLISION, BLIND, TIMEOUT)

# Protocol
# ========
SEGMENT_SUITE_SIZE = 169
OVAL_START_OFFSETS = (-0.5, 0.0, 0.5)  # units; negative is left of centre
OVAL_RUNS_PER_START = 30
CLOCKWISE = "cw"
ANTICLOCKWISE = "acw"
DIRECTIONS = (CLOCKWISE, ANTICLOCKWISE)

# Seed streams split off the master seed
TRACK_STREAM = 0
AGENT_STREAM = 1
EVAL_STREAM = 2

# File formats
# ============
CHECKPOINT_FORMAT_VERSION = 1
MANIFEST_FILE = "manifest.json"
OPTIMIZER_FILE = "optimizer.npz"
RESOLVED_CONFIG_FILE = "config_resolved.json"
REWARD_LOG_FILE = "rewards.csv"
EVAL_CSV_FILE = "eval_{suite}.csv"
SUMMARY_FILE = "summary_{suite}.json"
TRACE_FILE = "trace.jsonl"
TRACK_FILE = "track.json"
REWARD_LOG_FIELDS = ("episode", "total_reward", "steps", "termination",
                     "progress")
EVAL_CSV_FIELDS = ("episode_id", "track_spec", "start_offset", "direction",
                   "finished", "max_progress", "steps", "termination")

# Utility names
# =============
# Values are lower case, like ConfigParser keys.
DQN_CLASS = "dqn class"
TD3_CLASS = "td3 class"
STRING_CLASS = "string class"
ALGORITHMS = {"dqn": DQN_CLASS, "td3": TD3_CLASS}
SCRIPTED_POLICIES = {
    "follower": "markerrally.agents.scripted:CenterlineFollower",
    "straight": "markerrally.agents.scripted:NeverTurn",
}

# Environment variables
# =====================
OUT_ENV_VAR = "MARKER_RALLY_OUT"
EXTENDED_ENV_VAR = "MARKER_RALLY_EXTENDED"

# Exit codes
# ==========
EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
