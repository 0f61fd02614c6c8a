"""
Иерархия исключений wavefarm.

Библиотечный код только выбрасывает их, коды выхода назначает main.py.
"""
from typing import Optional


class WaveFarmError(Exception):
    """Базовый класс всех ошибок пакета"""

    exit_code = 1


class ConfigError(WaveFarmError):
    """Некорректная конфигурация запуска или переопределение"""

    exit_code = 2


class DataError(WaveFarmError):
    """Поврежденные, отсутствующие или несогласованные файлы"""

    exit_code = 3

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = f"{path}"
            if line is not None:
                location += f":{line}"
            location += ": "
        super().__init__(f"{location}{message}")


class DomainError(WaveFarmError, ValueError):
    """Числовой аргумент вне области определения операции"""

    exit_code = 3


class SingularityError(DomainError):
    """Матрица импеданса слишком плохо обусловлена для обращения"""

    def __init__(self, omega: float, condition: float):
        self.omega = omega
        self.condition = condition
        super().__init__(
            f"impedance matrix singular at omega={omega:.6g} rad/s "
            f"(condition number {condition:.3g})"
        )


class TrainingError(WaveFarmError):
    """Обучение сети прервано"""

    exit_code = 3

    def __init__(self, message: str, target: Optional[str] = None):
        self.target = target
        prefix = f"[{target}] " if target else ""
        super().__init__(f"{prefix}{message}")


class InfeasibleDesignError(WaveFarmError):
    """Раскладка и параметры устройства нарушают ограничения фермы"""

    exit_code = 4
