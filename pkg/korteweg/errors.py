"""Исключения пакета: ошибки аргументов и численные отказы решателя."""


class KortewegError(RuntimeError):
    """Базовое исключение лаборатории."""


class GridMismatchError(KortewegError, ValueError):
    """Операнды заданы на разных сетках."""


class OutOfRangeError(KortewegError, ValueError):
    """Аргумент вне допустимого диапазона (индекс блока, шаг по времени, пустая траектория...)."""


class NonSolenoidalError(OutOfRangeError):
    """Начальная скорость не бездивергентна."""


class FlowDegenerateError(KortewegError):
    """det DX слишком близок к нулю: поток вышел из режима малости."""


class FlowNotInvertibleError(KortewegError):
    """Обратный поток не найден с заданной точностью."""


class StepRejectedError(KortewegError):
    """Явная часть шага растёт слишком быстро: шаг нужно уменьшить вдвое."""


class NoContractionError(KortewegError):
    """Итерации Пикара не сжимают на данном T."""


class SmallnessExceededError(KortewegError):
    """Нарушено условие малости ∫‖Dv‖ ≤ ε₀."""


class DensityBoundError(KortewegError):
    """Плотность вышла из допустимого диапазона."""
