"""Actor-critic agents: CACLA, DPG, and SPG over shared network scaffolding.

All three pair a squashed-output actor with a critic and hard-refreshed
target copies of both:

* CACLA trains a state-value critic V(s) and moves the actor toward the taken
  action only on transitions whose temporal-difference error is positive.
* DPG trains an action-value critic Q(s, a) and ascends dQ/da through the
  actor's output.
* SPG also trains Q(s, a) but updates the actor by regression toward the best
  of a few actions sampled around the current policy output, and only when
  that sample strictly beats the policy's own Q-value.

Exploration uses Gaussian noise whose standard deviation decays
exponentially: sd(t) = sd_initial * exp(-lambda * t) with lambda chosen so
sd(t_max / 2) = sd_at_half.
"""

import math
import struct

import numpy as np

from aclab.envs.agar import FRAME_SIDE
from aclab.errors import (
    CheckpointError,
    ConfigError,
    NumericError,
    ShapeError,
    StateError,
)
from aclab.nn.checkpoint import read_layers, write_layers
from aclab.nn.layers import Conv2d, Dense, Relu, Scale, Sigmoid, Tanh
from aclab.nn.network import Network, TrunkHeadNetwork, clone_shared_pair, mse_loss

ALGORITHMS = ("cacla", "dpg", "spg")
SQUASHES = ("sigmoid", "tanh")
HIDDEN_UNITS = 100
TARGET_UPDATE_INTERVAL = 1500
SPG_SAMPLE_COUNT = 5
SPG_SD_FLOOR = 0.05


class NoiseSchedule:
    """Exponentially decaying exploration noise standard deviation."""

    def __init__(self, t_max, sd_initial=1.0, sd_at_half=0.05):
        if t_max <= 0:
            raise ConfigError("t_max must be positive")
        if sd_initial <= 0 or sd_at_half <= 0 or sd_at_half >= sd_initial:
            raise ConfigError("need 0 < sd_at_half < sd_initial")
        self.t_max = t_max
        self.sd_initial = sd_initial
        self.sd_at_half = sd_at_half
        self.decay_rate = math.log(sd_initial / sd_at_half) / (0.5 * t_max)

    def sd(self, t):
        if t < 0:
            raise ConfigError("schedule time must be >= 0")
        return self.sd_initial * math.exp(-self.decay_rate * t)


def clamp_action(action, squash):
    if squash == "sigmoid":
        return np.clip(action, 0.0, 1.0)
    return np.clip(action, -1.0, 1.0)


def _squash_layer(squash):
    if squash not in SQUASHES:
        raise ConfigError(f"action squash must be one of {SQUASHES}, got {squash!r}")
    return Sigmoid() if squash == "sigmoid" else Tanh()


def _mlp(in_dim, out_dim, rng, out_activation=None):
    layers = [
        Dense(in_dim, HIDDEN_UNITS, rng=rng),
        Relu(),
        Dense(HIDDEN_UNITS, HIDDEN_UNITS, rng=rng),
        Relu(),
        Dense(HIDDEN_UNITS, out_dim, rng=rng),
    ]
    if out_activation is not None:
        layers.append(out_activation)
    return layers


def _conv_trunk(rng):
    return [
        Conv2d(1, 32, kernel=8, stride=4, rng=rng),
        Relu(),
        Conv2d(32, 64, kernel=4, stride=2, rng=rng),
        Relu(),
    ]


def _trunk_flat_width():
    side = (FRAME_SIDE - 8) // 4 + 1
    side = (side - 4) // 2 + 1
    return 64 * side * side


class AgentBundle:
    """An actor, a critic, their target copies, and the training hyperparameters.

    ``pixel`` bundles use TrunkHeadNetwork actor/critic sharing one conv trunk;
    vector bundles use plain MLPs, with Q-critics taking the action
    concatenated onto the observation.
    """

    def __init__(
        self,
        algorithm,
        actor,
        critic,
        obs_dim,
        action_dim,
        action_squash,
        actor_lr,
        critic_lr,
        discount,
        pixel=False,
        target_update_interval=TARGET_UPDATE_INTERVAL,
        spg_sample_count=SPG_SAMPLE_COUNT,
        spg_sd_floor=SPG_SD_FLOOR,
    ):
        if algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {algorithm!r}")
        if action_squash not in SQUASHES:
            raise ConfigError(f"action squash must be one of {SQUASHES}")
        if algorithm == "spg" and spg_sample_count < 1:
            raise ConfigError("spg_sample_count must be >= 1")
        if not 0.0 <= discount < 1.0:
            raise ConfigError("discount must be in [0, 1)")
        self.algorithm = algorithm
        self.actor = actor
        self.critic = critic
        self.obs_dim = obs_dim
        self.action_dim = action_dim
        self.action_squash = action_squash
        self.actor_lr = actor_lr
        self.critic_lr = critic_lr
        self.discount = discount
        self.pixel = pixel
        self.target_update_interval = target_update_interval
        self.spg_sample_count = spg_sample_count
        self.spg_sd_floor = spg_sd_floor
        self.step_counter = 0
        self.current_sd = 1.0
        self.training_started = False
        if pixel:
            self.actor_target, self.critic_target = clone_shared_pair(actor, critic)
        else:
            self.actor_target = actor.clone()
            self.critic_target = critic.clone()

    @property
    def uses_q_critic(self):
        return self.algorithm in ("dpg", "spg")

    def set_noise_sd(self, sd):
        """Record the schedule's current sd; SPG sampling reads it (with a floor)."""
        self.current_sd = float(sd)

    def spg_sampling_sd(self):
        return max(self.current_sd, self.spg_sd_floor)


def build_vector_agent(
    algorithm,
    obs_dim,
    action_dim,
    action_squash,
    actor_lr,
    critic_lr,
    discount,
    rng,
    input_scale=None,
    **overrides,
):
    """MLP agent for flat observations (vision grid or point-mass state).

    ``input_scale``, when given, prepends a fixed elementwise scaling of the
    observation to both networks; Q-critics leave their action inputs
    unscaled (actions already live in unit ranges).
    """
    if input_scale is not None:
        input_scale = np.asarray(input_scale, dtype=np.float64)
        if input_scale.shape != (obs_dim,):
            raise ShapeError(
                f"input_scale must have shape ({obs_dim},), got {input_scale.shape}"
            )
    actor_layers = _mlp(obs_dim, action_dim, rng, _squash_layer(action_squash))
    critic_in = obs_dim + (action_dim if algorithm in ("dpg", "spg") else 0)
    critic_layers = _mlp(critic_in, 1, rng)
    if input_scale is not None:
        actor_layers.insert(0, Scale(input_scale))
        critic_scale = (
            np.concatenate([input_scale, np.ones(critic_in - obs_dim)])
            if critic_in > obs_dim
            else input_scale
        )
        critic_layers.insert(0, Scale(critic_scale))
    actor = Network(actor_layers)
    critic = Network(critic_layers)
    return AgentBundle(
        algorithm,
        actor,
        critic,
        obs_dim,
        action_dim,
        action_squash,
        actor_lr,
        critic_lr,
        discount,
        pixel=False,
        **overrides,
    )


def build_pixel_agent(
    algorithm,
    action_dim,
    action_squash,
    actor_lr,
    critic_lr,
    discount,
    rng,
    **overrides,
):
    """Conv agent for 42x42 frames; actor and critic share one conv trunk."""
    trunk = _conv_trunk(rng)
    flat = _trunk_flat_width()
    actor = TrunkHeadNetwork(trunk, _mlp(flat, action_dim, rng, _squash_layer(action_squash)))
    extra = action_dim if algorithm in ("dpg", "spg") else 0
    critic = TrunkHeadNetwork(trunk, _mlp(flat + extra, 1, rng), extra_inputs=extra)
    return AgentBundle(
        algorithm,
        actor,
        critic,
        None,
        action_dim,
        action_squash,
        actor_lr,
        critic_lr,
        discount,
        pixel=True,
        **overrides,
    )


def _check_single_obs(bundle, obs):
    obs = np.asarray(obs, dtype=np.float64)
    if bundle.pixel:
        if obs.shape not in ((FRAME_SIDE, FRAME_SIDE), (1, FRAME_SIDE, FRAME_SIDE)):
            raise ShapeError(f"expected a {FRAME_SIDE}x{FRAME_SIDE} frame, got {obs.shape}")
    elif obs.shape != (bundle.obs_dim,):
        raise ShapeError(f"expected observation of shape ({bundle.obs_dim},), got {obs.shape}")
    return obs


def act(bundle, obs, sd, rng=None):
    """Policy action with Gaussian exploration noise, clamped to action bounds.

    sd=0 returns the deterministic policy output (test mode) and draws nothing
    from the generator.
    """
    obs = _check_single_obs(bundle, obs)
    action = bundle.actor.forward(obs)
    if sd > 0:
        if rng is None:
            raise ConfigError("exploration noise needs a generator")
        action = action + rng.normal(0.0, sd, size=action.shape)
    return clamp_action(action, bundle.action_squash)


def _stack_obs(bundle, obs_list):
    arr = np.stack([np.asarray(o, dtype=np.float64) for o in obs_list])
    if bundle.pixel and arr.ndim == 3:
        arr = arr[:, None]
    return arr


def _q_values(bundle, net, obs, actions):
    if bundle.pixel:
        return net.forward(obs, extra=actions)
    return net.forward(np.concatenate([obs, actions], axis=1))


def _q_backward_action_grad(bundle, net, grad_out):
    if bundle.pixel:
        _, grad_actions = net.backward(grad_out)
        return grad_actions
    return net.backward(grad_out)[:, bundle.obs_dim:]


def _batch_arrays(bundle, batch):
    obs = _stack_obs(bundle, [t.obs for t in batch])
    actions = np.stack([np.asarray(t.action, dtype=np.float64) for t in batch])
    rewards = np.array([t.reward for t in batch], dtype=np.float64)
    next_obs = _stack_obs(bundle, [t.next_obs for t in batch])
    not_done = np.array([0.0 if t.done else 1.0 for t in batch])
    return obs, actions, rewards, next_obs, not_done


def critic_targets(bundle, rewards, next_obs, not_done):
    """Bootstrapped regression targets; terminal transitions get the bare reward."""
    if bundle.uses_q_critic:
        next_actions = bundle.actor_target.forward(next_obs)
        bootstrap = _q_values(bundle, bundle.critic_target, next_obs, next_actions)[:, 0]
    else:
        bootstrap = bundle.critic_target.forward(next_obs)[:, 0]
    targets = rewards + bundle.discount * bootstrap * not_done
    if not np.all(np.isfinite(targets)):
        raise NumericError("non-finite critic target")
    return targets


def train_critic(bundle, batch):
    """One Adam step of MSE regression toward the bootstrapped target."""
    if not batch:
        raise ConfigError("training batch must be non-empty")
    bundle.training_started = True
    obs, actions, rewards, next_obs, not_done = _batch_arrays(bundle, batch)
    targets = critic_targets(bundle, rewards, next_obs, not_done)
    if bundle.uses_q_critic:
        predicted = _q_values(bundle, bundle.critic, obs, actions)
    else:
        predicted = bundle.critic.forward(obs)
    loss, grad = mse_loss(predicted, targets[:, None])
    bundle.critic.backward(grad)
    bundle.critic.adam_step(bundle.critic_lr)
    return loss


def train_actor_cacla(bundle, batch):
    """Move the actor toward taken actions on positive-TD rows only.

    The TD error is computed with the critic as it stands now, so call this
    before train_critic within a training step. Returns the number of rows
    that contributed.
    """
    bundle.training_started = True
    obs, actions, rewards, next_obs, not_done = _batch_arrays(bundle, batch)
    targets = critic_targets(bundle, rewards, next_obs, not_done)
    values = bundle.critic.forward(obs)[:, 0]
    positive = (targets - values) > 0.0
    used = int(np.count_nonzero(positive))
    if used == 0:
        return 0
    predicted = bundle.actor.forward(obs[positive])
    _, grad = mse_loss(predicted, actions[positive])
    bundle.actor.backward(grad)
    bundle.actor.adam_step(bundle.actor_lr)
    return used


def train_actor_dpg(bundle, batch):
    """Gradient ascent on Q(s, pi(s)) through the critic's action input.

    Critic parameters are read, never written. Returns the batch mean Q.
    """
    bundle.training_started = True
    obs = _stack_obs(bundle, [t.obs for t in batch])
    actions = bundle.actor.forward(obs)
    q = _q_values(bundle, bundle.critic, obs, actions)
    grad_q = np.full_like(q, 1.0 / q.shape[0])
    grad_actions = _q_backward_action_grad(bundle, bundle.critic, grad_q)
    bundle.actor.backward(-grad_actions)
    bundle.actor.adam_step(bundle.actor_lr)
    return float(np.mean(q))


def train_actor_spg(bundle, batch, rng):
    """Regress the actor toward the best sampled action where it beats pi(s).

    Per state, spg_sample_count actions are drawn around pi(s) with the
    current sampling sd; the argmax-Q sample becomes the regression target
    only if its Q strictly exceeds Q(s, pi(s)). Returns contributing rows.
    """
    if bundle.spg_sample_count < 1:
        raise ConfigError("spg_sample_count must be >= 1")
    bundle.training_started = True
    obs = _stack_obs(bundle, [t.obs for t in batch])
    policy_actions = bundle.actor.forward(obs)
    policy_q = _q_values(bundle, bundle.critic, obs, policy_actions)[:, 0]
    sd = bundle.spg_sampling_sd()
    best_q = np.full(policy_q.shape, -np.inf)
    best_actions = np.zeros_like(policy_actions)
    for _ in range(bundle.spg_sample_count):
        sampled = clamp_action(
            policy_actions + rng.normal(0.0, sd, size=policy_actions.shape),
            bundle.action_squash,
        )
        sampled_q = _q_values(bundle, bundle.critic, obs, sampled)[:, 0]
        better = sampled_q > best_q
        best_q[better] = sampled_q[better]
        best_actions[better] = sampled[better]
    include = best_q > policy_q
    used = int(np.count_nonzero(include))
    if used == 0:
        return 0
    predicted = bundle.actor.forward(obs[include])
    _, grad = mse_loss(predicted, best_actions[include])
    bundle.actor.backward(grad)
    bundle.actor.adam_step(bundle.actor_lr)
    return used


def maybe_update_targets(bundle):
    """Hard-copy live networks into targets at every update-interval multiple."""
    if bundle.step_counter % bundle.target_update_interval != 0:
        return False
    bundle.actor_target.copy_params_from(bundle.actor)
    bundle.critic_target.copy_params_from(bundle.critic)
    return True


def optimistic_init(bundle, offset):
    """Shift the critic's output bias so untrained value estimates look high.

    Allowed only before any training; the target critic is re-synced so
    bootstrap targets carry the same optimism.
    """
    if bundle.training_started:
        raise StateError("optimistic init must happen before training starts")
    output = None
    for layer in reversed(bundle.critic.layers):
        if layer.kind == "dense":
            output = layer
            break
    if output is None:
        raise StateError("critic has no dense output layer")
    output.bias += offset
    bundle.critic_target.copy_params_from(bundle.critic)
    return bundle


def train_step(bundle, batch, rng=None):
    """One full training step; dispatches per algorithm, then ticks targets.

    CACLA updates the actor first so its TD gate sees the pre-update critic;
    DPG and SPG update the critic first, then the actor against it.
    """
    if bundle.algorithm == "cacla":
        train_actor_cacla(bundle, batch)
        loss = train_critic(bundle, batch)
    elif bundle.algorithm == "dpg":
        loss = train_critic(bundle, batch)
        train_actor_dpg(bundle, batch)
    else:
        if rng is None:
            raise ConfigError("spg training needs a generator")
        loss = train_critic(bundle, batch)
        train_actor_spg(bundle, batch, rng)
    bundle.step_counter += 1
    maybe_update_targets(bundle)
    return loss


_AGENT_MAGIC = b"ACAG"
_AGENT_VERSION = 1
_ALGO_TAGS = {"cacla": 1, "dpg": 2, "spg": 3}
_TAG_ALGOS = {v: k for k, v in _ALGO_TAGS.items()}
_SQUASH_TAGS = {"sigmoid": 1, "tanh": 2}
_TAG_SQUASHES = {v: k for k, v in _SQUASH_TAGS.items()}


def save_agent(path, bundle):
    """Serialize the bundle: header, then actor / critic / target networks.

    Pixel bundles store the shared trunk once inside the actor block; critic
    blocks hold only head layers and the loader re-ties them to the trunk.
    """
    with open(path, "wb") as f:
        f.write(_AGENT_MAGIC)
        f.write(struct.pack("<I", _AGENT_VERSION))
        f.write(
            struct.pack(
                "<BBB",
                _ALGO_TAGS[bundle.algorithm],
                2 if bundle.pixel else 1,
                _SQUASH_TAGS[bundle.action_squash],
            )
        )
        f.write(
            struct.pack(
                "<IIQ",
                0 if bundle.pixel else bundle.obs_dim,
                bundle.action_dim,
                bundle.step_counter,
            )
        )
        f.write(
            struct.pack(
                "<dddd",
                bundle.actor_lr,
                bundle.critic_lr,
                bundle.discount,
                bundle.current_sd,
            )
        )
        f.write(
            struct.pack(
                "<IId",
                bundle.target_update_interval,
                bundle.spg_sample_count,
                bundle.spg_sd_floor,
            )
        )
        if bundle.pixel:
            f.write(struct.pack("<I", len(bundle.actor.trunk)))
            write_layers(f, bundle.actor.trunk + bundle.actor.head)
            write_layers(f, bundle.critic.head)
            write_layers(f, bundle.actor_target.trunk + bundle.actor_target.head)
            write_layers(f, bundle.critic_target.head)
        else:
            for net in (bundle.actor, bundle.critic, bundle.actor_target, bundle.critic_target):
                write_layers(f, net.layers)


def _read_struct(f, fmt):
    size = struct.calcsize(fmt)
    data = f.read(size)
    if len(data) != size:
        raise CheckpointError(f"truncated agent checkpoint: wanted {size} bytes")
    return struct.unpack(fmt, data)


def load_agent(path):
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != _AGENT_MAGIC:
            raise CheckpointError(f"bad agent magic {magic!r}")
        (version,) = _read_struct(f, "<I")
        if version != _AGENT_VERSION:
            raise CheckpointError(f"unsupported agent checkpoint version {version}")
        algo_tag, arch_tag, squash_tag = _read_struct(f, "<BBB")
        if algo_tag not in _TAG_ALGOS or arch_tag not in (1, 2) or squash_tag not in _TAG_SQUASHES:
            raise CheckpointError("unknown algorithm, architecture, or squash tag")
        algorithm = _TAG_ALGOS[algo_tag]
        pixel = arch_tag == 2
        squash = _TAG_SQUASHES[squash_tag]
        obs_dim, action_dim, step_counter = _read_struct(f, "<IIQ")
        actor_lr, critic_lr, discount, current_sd = _read_struct(f, "<dddd")
        interval, spg_samples, spg_floor = _read_struct(f, "<IId")
        if pixel:
            (trunk_len,) = _read_struct(f, "<I")
            extra = action_dim if algorithm in ("dpg", "spg") else 0
            actor_layers = read_layers(f)
            trunk, actor_head = actor_layers[:trunk_len], actor_layers[trunk_len:]
            actor = TrunkHeadNetwork(trunk, actor_head)
            critic = TrunkHeadNetwork(trunk, read_layers(f), extra_inputs=extra)
            target_layers = read_layers(f)
            t_trunk, t_head = target_layers[:trunk_len], target_layers[trunk_len:]
            actor_target = TrunkHeadNetwork(t_trunk, t_head)
            critic_target = TrunkHeadNetwork(t_trunk, read_layers(f), extra_inputs=extra)
            obs_dim = None
        else:
            actor = Network(read_layers(f))
            critic = Network(read_layers(f))
            actor_target = Network(read_layers(f))
            critic_target = Network(read_layers(f))
        if f.read(1):
            raise CheckpointError("trailing bytes after agent payload")
    bundle = AgentBundle(
        algorithm,
        actor,
        critic,
        obs_dim,
        action_dim,
        squash,
        actor_lr,
        critic_lr,
        discount,
        pixel=pixel,
        target_update_interval=interval,
        spg_sample_count=spg_samples,
        spg_sd_floor=spg_floor,
    )
    bundle.step_counter = step_counter
    bundle.current_sd = current_sd
    bundle.actor_target.copy_params_from(actor_target)
    bundle.critic_target.copy_params_from(critic_target)
    if step_counter > 0:
        bundle.training_started = True
    return bundle
