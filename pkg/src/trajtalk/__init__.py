"""trajtalk: voice-steered trajectory adaptation for assistive robot motions.

The package turns short verbal requests ("go faster", "stay away from my
mouth") into bounded, cumulative edits of a planned end-effector trajectory -
scaling velocity and force globally, per waypoint, or with Gaussian decay
around body landmarks, and displacing waypoints through single-step
attractive/repulsive potential fields.  A session layer plays trajectories
back in simulated or real time with a pause-interpret-resume loop and
bidirectional feedback (assurances and clarifying questions), an HTTP/WS
service exposes live sessions, and a replay engine reruns scripted scenarios
deterministically for analytics.
"""

from .analytics import LatencyStats, StepCurve, ccdf_remaining, latency_stats
from .files import (
    FileFormatError,
    load_landmarks,
    load_params,
    load_replies,
    load_trajectory,
    save_trajectory,
)
from .geometry import Vec3
from .interpreter import (
    BackendError,
    ConversationTurn,
    History,
    LlmBackend,
    MockBackend,
    PendingClarification,
    PromptTemplates,
    ScriptedBackend,
    build_clarification_prompt,
    build_main_prompt,
    interpret,
    interpret_clarification,
    mock_interpret,
)
from .modify import (
    ApplyParams,
    apply,
    attract_displacement,
    displace_positions,
    gaussian_factor,
    repulse_displacement,
    scale_global,
    scale_landmark,
    scale_waypoints,
)
from .schema import (
    GlobalChange,
    InterpreterReply,
    LandmarkChange,
    ModificationSpec,
    ReplyFormatError,
    SpecParseError,
    WaypointChange,
    clamp_spec,
    extract_reply,
    format_multiplier,
    parse_multiplier,
    parse_spec,
    serialize_spec,
)
from .session import Event, Mode, Outcome, Phase, Session, SessionError, resume_point, start
from .trajectory import (
    CANONICAL_LANDMARKS,
    DEFAULT_PROXIMITY_THRESHOLD,
    Landmark,
    LandmarkSet,
    Trajectory,
    Waypoint,
    interpolate_state,
    nearest_landmark,
    retime,
    to_context_yaml,
    trajectory_hash,
    validate,
)

__version__ = "0.1.0"
