"""admitsim: force-aware admittance control and contact simulation toolkit."""

from .admittance import (
    AdmittanceConfig,
    ControllerCommand,
    ControllerState,
    TickResult,
    WrenchSample,
    apply_deadband,
    commanded_force,
    compute_damping,
    controller_tick,
    effective_stiffness,
    step_rotation,
    step_translation,
)
from .environments import (
    DisturbanceEvent,
    FrictionModel,
    HingedDoor,
    HoleFixture,
    InkGrid,
    PlaneBoard,
    SpringContact,
    apply_disturbance,
    external_wrench,
    insertion_depth,
    latch_resistance,
    opening_angle,
    remaining_ink_length,
    update_ink,
)
from .expert import (
    FsmPhase,
    KeyPose,
    PhaseLabel,
    SupervisionTuple,
    extract_supervision,
    manifold_normal,
    plan_articulated,
    plan_free_motion,
    plan_insertion,
    plan_wiping,
)
from .geometry import (
    Pose,
    interpolate_pose,
    pose10_decode,
    pose10_encode,
    rodrigues_rotate,
    rot6d_decode,
    rot6d_encode,
    tangent_direction,
)
from .harness import (
    RunLog,
    ScenarioConfig,
    run_episode,
    run_suite,
    safety_monitor,
    success_check,
)
from .policy import ActionChunk, NoiseSpec, Observation, loss, predict
from .tasks import Demo, build_environment, generate_demo
from .verify import (
    NormalDynamicsParams,
    VerificationReport,
    XeProfile,
    default_grid,
    equivalence_check,
    run_default_verification,
    verify_prop1,
    verify_prop2,
    verify_prop3,
)

__version__ = "0.1.0"
