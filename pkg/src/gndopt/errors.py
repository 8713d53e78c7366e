"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An operation received invalid parameters."""


class GateViolationError(ParameterError):
    """A regularity gate required by a schedule is violated (beta >= alpha)."""


class ConstraintNotCheckableError(ParameterError):
    """A feasibility check is indeterminate for the given inputs (s = 0 with beta > 0)."""


class DivergedError(RuntimeError):
    """A trajectory produced a non-finite or absurdly large value or gradient.

    Carries the offending iteration index and, for ensemble runs, the trial index.
    """

    def __init__(self, iteration, trial=None):
        self.iteration = int(iteration)
        self.trial = None if trial is None else int(trial)
        where = f"iteration {self.iteration}"
        if self.trial is not None:
            where = f"trial {self.trial}, " + where
        super().__init__(f"trajectory diverged at {where}")
