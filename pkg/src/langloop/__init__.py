"""Closed-loop robot control through cooperating language-model agents.

A controller asks for what it needs to see, per-camera monitors answer in
plain language, a curator rewrites a bounded structured memory, and a thin
adapter layer dispatches validated actions. Moving the whole stack to a new
robot means writing three small config files, not code.
"""

from .config import (
    ActionDef,
    ActionHistory,
    ActionInterface,
    EmbodimentConfig,
    ProprioState,
    RobotDescription,
    TaskSpec,
    load_embodiment_config,
    validate_action,
)
from .backends import (
    ChatExchange,
    ChatMessage,
    HttpBackend,
    ReplayBackend,
    ScriptedBackend,
    TranscriptRecorder,
    complete,
    record_session,
)
from .controller import (
    ComposedPrompt,
    ControllerDecision,
    VisualQuery,
    compose_system_prompt,
    generate_visual_query,
    select_action,
)
from .memory import (
    Bearing,
    EnvironmentMemory,
    LlmCurator,
    MotionEvent,
    ObjectEntry,
    ReferenceCurator,
    empty_memory,
    infer_position_from_detection,
    render_memory_text,
    update_bearing,
)
from .monitor import (
    CameraFrame,
    MonitorObservation,
    MonitorSettings,
    Raster,
    SceneEntity,
    describe_scene,
    oracle_describe,
    upscale,
)
from .records import StepRecord
from .runner import (
    Condition,
    EpisodeResult,
    ExperimentSummary,
    run_episode,
    run_experiment,
    run_random_episode,
)
from .stats import t_test_holm, t_test_two_sample

__version__ = "0.1.0"
