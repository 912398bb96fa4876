"""Регистрация обработчиков подкоманд."""

from typing import Callable

from . import convergence, lifespan, lp_analyze, simulate

Handler = Callable[..., int]


def setup_handlers() -> dict[str, Handler]:
    return {
        "simulate": simulate.run,
        "lifespan-study": lifespan.run,
        "convergence-study": convergence.run,
        "lp-analyze": lp_analyze.run,
    }
