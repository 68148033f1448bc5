from dataclasses import dataclass, field

from ..exceptions import ConfigError


@dataclass
class Ensemble:
    """N independently seeded networks sharing one specification.

    :param spec: shared :class:`NetworkSpec`.
    :param members: list of :class:`Parameters`, one per network.
    :param seeds: initialisation seed of every member.
    :param loss: :class:`LossSpec` the members were trained with.
    :param mask: optional :class:`FeatureMask` applied to the inputs.
    :param dict history: per-member training loss history.
    """

    spec: object
    members: list
    seeds: list
    loss: object
    mask: object = None
    history: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.members:
            raise ConfigError("an ensemble needs at least one member")
        if len(self.members) != len(self.seeds):
            raise ConfigError("one seed is required per member")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError(f"member seeds must be distinct: {self.seeds}")
        sizes = {len(m) for m in self.members}
        if len(sizes) != 1:
            raise ConfigError("members don't share the same parameter layout")

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    @property
    def size(self):
        return len(self.members)

    def subset(self, indices):
        """Ensemble restricted to the given member indices, in that order."""
        return Ensemble(
            self.spec,
            [self.members[i] for i in indices],
            [self.seeds[i] for i in indices],
            self.loss,
            self.mask)
