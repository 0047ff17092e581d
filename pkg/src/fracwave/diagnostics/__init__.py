"""Functionals, inequalities and bounds evaluated along solver runs."""

from .blowup import *  # noqa: F401,F403
from .bounds import *  # noqa: F401,F403
from .functionals import *  # noqa: F401,F403
from .series import *  # noqa: F401,F403
from .stability import *  # noqa: F401,F403

from . import blowup, bounds, functionals, series, stability

__all__ = (
    blowup.__all__ + bounds.__all__ + functionals.__all__ + series.__all__ + stability.__all__
)
