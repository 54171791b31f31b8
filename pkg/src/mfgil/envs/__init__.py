from .two_state import TwoStateParams, two_state_model
from .beach_bar import BeachBarParams, beach_bar_model
from .night_clubs import NightClubsParams, night_clubs_model

ENV_BUILDERS = {
    "two_state": (TwoStateParams, two_state_model),
    "beach_bar": (BeachBarParams, beach_bar_model),
    "night_clubs": (NightClubsParams, night_clubs_model),
}


def build_env(name, **kwargs):
    if name not in ENV_BUILDERS:
        raise ValueError(f"unknown environment {name!r}")
    params_cls, builder = ENV_BUILDERS[name]
    return builder(params_cls(**kwargs))
