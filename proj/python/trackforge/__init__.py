"""Link region proposals into object tracks and score them."""

from ._core import *  # noqa: F401,F403
from ._core import __version__, TrackforgeError, ParseError, MissingFlow, InvalidDistribution  # noqa: F401
