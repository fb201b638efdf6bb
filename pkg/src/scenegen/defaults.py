"""Shared tuning constants.

DEFAULT_GAP is used both by the ranker's capacity check and by the spawn
solver, so the two stages agree on what "the road can host k vehicles" means.
"""

# Longitudinal spacing between stacked agents when no explicit distance is given [m].
DEFAULT_GAP = 8.0

# Simulation tick and wall-clock budget [s].
DEFAULT_DT = 0.1
DEFAULT_TIMEOUT_S = 60.0

# Pedestrians start crossing once the ego is this close [m].
TRIGGER_DISTANCE = 25.0

# Longitudinal distance over which a lane change interpolates laterally [m].
LANE_CHANGE_LENGTH = 15.0

# Travel distance after which a plain "go straight" counts as finished [m].
ACTION_DISTANCE = 30.0

# How far before the junction an approaching adjacent-road agent spawns [m].
APPROACH_OFFSET = 15.0

# Distance into the target road after which a turn counts as complete [m].
TURN_ENTRY_COMPLETION = 5.0

# Car-following relaxation time [s].
FOLLOW_TAU = 1.0

# Road ends closer than this are treated as meeting at the same junction [m].
JUNCTION_RADIUS = 45.0

# Agents closer than this to a junction take part in yield decisions [m].
YIELD_RANGE = 14.0

# Gap a blocking agent tries to hold in front of the ego [m].
BLOCK_GAP = 8.0

# Minimum clearance kept to road ends when spawning [m].
SPAWN_MARGIN = 3.0

# Walking speed for pedestrians [m/s].
PEDESTRIAN_SPEED = 1.4

# Heading change below which a junction connection counts as "straight" [deg].
STRAIGHT_THRESHOLD_DEG = 30.0
