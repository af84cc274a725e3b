"""Exception types shared across the package."""


class WindfleetError(Exception):
    """Base class for all package errors."""


class BoundsError(WindfleetError):
    """A coordinate or position lies outside the flight area."""


class DegenerateDirectionError(WindfleetError):
    """A direction vector with zero magnitude was supplied."""


class SaturationError(WindfleetError):
    """A rotor speed outside [0, omega_max] was supplied."""


class UnrealizableInputError(WindfleetError):
    """An input vector cannot be realized by the four rotors.

    Attributes:
        rotor_index: index (0..3) of the first offending rotor, or the
            time index for sequence-level checks (see ``piecewise_energy``).
    """

    def __init__(self, message, rotor_index=None, time_index=None):
        super().__init__(message)
        self.rotor_index = rotor_index
        self.time_index = time_index


class CannotLiftError(WindfleetError):
    """Maximum thrust is below the craft weight."""


class SingularityError(WindfleetError):
    """Pitch left the open interval (-pi/2, pi/2)."""


class InvalidStartError(WindfleetError):
    """Path search started inside an obstacle hex."""


class ProtocolViolationError(WindfleetError):
    """An agent broke the synchronous round protocol."""


class MembershipError(WindfleetError):
    """An agent not registered on the bus tried to participate."""


class ScenarioError(WindfleetError):
    """A scenario file or configuration is malformed."""


class CapacityError(ScenarioError):
    """Requested placements exceed the number of free hexes."""


class InternalConsistencyError(WindfleetError):
    """An invariant that the implementation guarantees was violated."""


class SimulationTimeout(WindfleetError):
    """The simulated mission exceeded its wall-clock-equivalent cap."""
